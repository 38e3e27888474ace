import numpy as np
import pytest
from scipy.linalg import sqrtm

from robust2gmm.errors import InvalidConfig
from robust2gmm.model import MixtureModel
from robust2gmm.synthdata import (
    Allocation,
    GenerationConfig,
    NoiseModel,
    exact_counts,
    generate,
    sample_cauchy,
)

OUTLIER_DEMO = MixtureModel.spherical((20 / 41, 20 / 41, 1 / 41), [1.0, 2.0], [3.0, 5.0])


def test_outlier_demo_counts_and_noise_point():
    ds = generate(GenerationConfig(OUTLIER_DEMO, 41, NoiseModel.point_mass([6, 1]), 0, Allocation.EXACT_COUNTS))
    assert ds.counts() == {"G1": 20, "G2": 20, "NOISE": 1}
    np.testing.assert_array_equal(ds.subset("NOISE"), [[6.0, 1.0]])


def test_same_config_same_data():
    cfg = GenerationConfig(OUTLIER_DEMO, 500, NoiseModel.cauchy(), 11)
    a, b = generate(cfg), generate(cfg)
    np.testing.assert_array_equal(a.points, b.points)
    assert list(a.labels) == list(b.labels)


def test_noise_model_does_not_move_gaussian_draws():
    a = generate(GenerationConfig(OUTLIER_DEMO, 300, NoiseModel.cauchy(), 4))
    b = generate(GenerationConfig(OUTLIER_DEMO, 300, NoiseModel.point_mass([0, 0]), 4))
    np.testing.assert_array_equal(a.subset("G1"), b.subset("G1"))
    np.testing.assert_array_equal(a.subset("G2"), b.subset("G2"))


def test_near_single_gaussian_mean():
    n = 3
    model = MixtureModel(1 - 2e-9, 1e-9, 1e-9, mu1=np.zeros(n), mu2=np.ones(n), sigma=np.eye(n))
    ds = generate(GenerationConfig(model, 100_000, NoiseModel.cauchy(), 0))
    g1 = ds.subset("G1")
    # 3 sigma / sqrt(m) per coordinate is about 0.0095
    assert np.linalg.norm(g1.mean(0)) < 0.02


def test_cauchy_empty_and_median():
    rng = np.random.default_rng(0)
    assert sample_cauchy(3, 1.0, None, 0, rng).shape == (0, 3)
    x = sample_cauchy(2, 1.0, None, 100_000, rng)
    assert np.all(np.abs(np.median(x, axis=0)) < 0.02)
    # P(|X| > 1) = 1/2 for a standard Cauchy
    assert abs(np.mean(np.abs(x[:, 0]) > 1) - 0.5) < 0.01


def test_cauchy_scale_and_location():
    rng = np.random.default_rng(1)
    x = sample_cauchy(1, 3.0, [5.0], 100_000, rng)[:, 0]
    assert abs(np.median(x) - 5.0) < 0.06
    # quartiles of Cauchy(5, 3) are 5 -/+ 3
    assert abs(np.quantile(x, 0.75) - 8.0) < 0.1


def test_multinomial_counts_match_weights():
    model = MixtureModel.spherical((0.8, 0.16, 0.04), [0, 0], [5, 5])
    counts = np.array([list(generate(GenerationConfig(model, 1000, seed=s)).counts().values()) for s in range(200)])
    w = np.array(model.weights)
    se = np.sqrt(1000 * w * (1 - w) / 200)
    assert np.all(np.abs(counts.mean(0) - 1000 * w) < 3 * se)


def test_exact_counts_largest_remainder():
    assert exact_counts(41, (20 / 41, 20 / 41, 1 / 41)).tolist() == [20, 20, 1]
    # 10 * (1/3, 1/3, 1/3) = 3.33 each; the extra point goes to the first
    assert exact_counts(10, (1 / 3, 1 / 3, 1 / 3)).tolist() == [4, 3, 3]
    assert exact_counts(7, (0.5, 0.3, 0.2)).sum() == 7


def test_whitened_g1_sanity():
    sigma = np.array([[2.0, 0.6], [0.6, 1.0]])
    model = MixtureModel(0.8, 0.16, 0.04, mu1=[1.0, -1.0], mu2=[6.0, 6.0], sigma=sigma)
    ds = generate(GenerationConfig(model, 20_000, seed=3))
    g1 = ds.subset("G1")
    z = (g1 - model.mu1) @ np.linalg.inv(np.real(sqrtm(sigma)))
    m1 = len(z)
    assert np.all(np.abs(z.mean(0)) < 4 / np.sqrt(m1))
    assert np.all(np.abs(z.var(0) - 1) < 8 / np.sqrt(m1))


def test_rows_are_shuffled():
    ds = generate(GenerationConfig(OUTLIER_DEMO, 41, NoiseModel.point_mass([6, 1]), 0, Allocation.EXACT_COUNTS))
    assert list(ds.labels) != sorted(ds.labels)


def test_external_noise_sampler():
    noise = NoiseModel("external", sampler=lambda k, n, rng: np.full((k, n), 7.0))
    ds = generate(GenerationConfig(OUTLIER_DEMO, 41, noise, 0, Allocation.EXACT_COUNTS))
    np.testing.assert_array_equal(ds.subset("NOISE"), [[7.0, 7.0]])


def test_invalid_configs():
    with pytest.raises(InvalidConfig):
        generate(GenerationConfig(OUTLIER_DEMO, 41, NoiseModel.point_mass([6, 1, 0])))
    with pytest.raises(InvalidConfig):
        generate(GenerationConfig(OUTLIER_DEMO, 10, NoiseModel.cauchy(), allocation="exact_counts"))
    with pytest.raises(InvalidConfig):
        NoiseModel("point_mass")
    with pytest.raises(InvalidConfig):
        NoiseModel.cauchy(scale=0.0)
