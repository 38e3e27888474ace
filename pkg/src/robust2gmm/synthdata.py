"""Seeded generation of noisy 2-GMM point clouds."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidConfig
from .model import G1, G2, NOISE, Dataset, MixtureModel

# Substream offsets under one master seed. Gaussian draws never depend on the
# noise model, so datasets that differ only in noise stay paired.
_STREAM_COUNTS, _STREAM_G1, _STREAM_G2, _STREAM_NOISE, _STREAM_SHUFFLE = range(5)


class NoiseKind(str, enum.Enum):
    CAUCHY = "cauchy"
    POINT_MASS = "point_mass"
    EXTERNAL = "external"


class Allocation(str, enum.Enum):
    MULTINOMIAL = "multinomial"
    EXACT_COUNTS = "exact_counts"


@dataclass(frozen=True)
class NoiseModel:
    """How the ``w3`` fraction is produced.

    ``EXTERNAL`` takes ``sampler(count, dim, rng) -> (count, dim) array``.
    """

    kind: NoiseKind = NoiseKind.CAUCHY
    point: Optional[np.ndarray] = None
    scale: float = 1.0
    location: Optional[np.ndarray] = None
    sampler: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        if self.scale <= 0:
            raise InvalidConfig("Cauchy scale must be positive")
        if self.kind is NoiseKind.POINT_MASS and self.point is None:
            raise InvalidConfig("POINT_MASS noise needs a point")
        if self.kind is NoiseKind.EXTERNAL and self.sampler is None:
            raise InvalidConfig("EXTERNAL noise needs a sampler")

    @classmethod
    def cauchy(cls, scale: float = 1.0, location=None) -> "NoiseModel":
        return cls(NoiseKind.CAUCHY, scale=scale, location=location)

    @classmethod
    def point_mass(cls, point) -> "NoiseModel":
        return cls(NoiseKind.POINT_MASS, point=np.asarray(point, dtype=float))

    def describe(self) -> dict:
        d = {"kind": self.kind.value}
        if self.kind is NoiseKind.CAUCHY:
            d["scale"] = self.scale
            d["location"] = None if self.location is None else np.asarray(self.location).tolist()
            d["structure"] = "iid standard Cauchy per coordinate"
        elif self.kind is NoiseKind.POINT_MASS:
            d["point"] = np.asarray(self.point).tolist()
        return d


@dataclass(frozen=True)
class GenerationConfig:
    model: MixtureModel
    m: int
    noise: NoiseModel = field(default_factory=NoiseModel)
    seed: int = 0
    allocation: Allocation = Allocation.MULTINOMIAL

    def __post_init__(self):
        object.__setattr__(self, "allocation", Allocation(self.allocation))


def sample_cauchy(n: int, scale: float, location, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` points with iid Cauchy(location_j, scale) coordinates."""
    if count < 0:
        raise InvalidConfig("count must be non-negative")
    loc = np.zeros(n) if location is None else np.asarray(location, dtype=float)
    return loc + scale * rng.standard_cauchy((count, n))


def exact_counts(m: int, weights) -> np.ndarray:
    """Largest-remainder apportionment of ``m`` points to ``weights``."""
    raw = m * np.asarray(weights, dtype=float)
    counts = np.floor(raw).astype(int)
    short = m - counts.sum()
    # stable sort so equal remainders go to the earlier component
    order = np.argsort(-(raw - counts), kind="stable")
    counts[order[:short]] += 1
    return counts


def _validate(cfg: GenerationConfig) -> None:
    model = cfg.model
    if cfg.m < 1:
        raise InvalidConfig("m must be positive")
    n = model.dim
    if model.mu2.shape != (n,) or model.sigma.shape != (n, n):
        raise InvalidConfig("model dimensions are inconsistent")
    w = np.array(model.weights)
    if np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
        raise InvalidConfig("weights must be a probability vector")
    noise = cfg.noise
    if noise.kind is NoiseKind.POINT_MASS and np.asarray(noise.point).shape != (n,):
        raise InvalidConfig(f"noise point must have dimension {n}")
    if noise.location is not None and np.asarray(noise.location).shape != (n,):
        raise InvalidConfig(f"noise location must have dimension {n}")
    if cfg.allocation is Allocation.EXACT_COUNTS and np.any(np.round(cfg.m * w) < 1):
        raise InvalidConfig("EXACT_COUNTS needs round(m * w_i) >= 1 for every component")


def _gaussian(rng, mean, chol, count):
    return mean + rng.standard_normal((count, mean.shape[0])) @ chol.T


def generate(cfg: GenerationConfig) -> Dataset:
    """Draw a labelled dataset; identical configs give identical arrays.

    The rows are shuffled, so the order carries no label information (the
    pairing step of the covariance estimator relies on that).
    """
    _validate(cfg)
    model, m, seed = cfg.model, cfg.m, int(cfg.seed)
    streams = [np.random.default_rng([seed, k]) for k in range(5)]
    w = np.array(model.weights)
    if cfg.allocation is Allocation.EXACT_COUNTS:
        counts = exact_counts(m, w)
    else:
        counts = streams[_STREAM_COUNTS].multinomial(m, w / w.sum())
    try:
        chol = np.linalg.cholesky(model.sigma)
    except np.linalg.LinAlgError as exc:
        raise InvalidConfig("sigma is not positive definite") from exc

    n = model.dim
    g1 = _gaussian(streams[_STREAM_G1], model.mu1, chol, counts[0])
    g2 = _gaussian(streams[_STREAM_G2], model.mu2, chol, counts[1])
    noise = cfg.noise
    rng_noise = streams[_STREAM_NOISE]
    if noise.kind is NoiseKind.CAUCHY:
        nz = sample_cauchy(n, noise.scale, noise.location, counts[2], rng_noise)
    elif noise.kind is NoiseKind.POINT_MASS:
        nz = np.tile(np.asarray(noise.point, dtype=float), (counts[2], 1))
    else:
        nz = np.asarray(noise.sampler(counts[2], n, rng_noise), dtype=float).reshape(counts[2], n)

    points = np.vstack([g1, g2, nz])
    labels = np.array([G1] * counts[0] + [G2] * counts[1] + [NOISE] * counts[2], dtype=object)
    perm = streams[_STREAM_SHUFFLE].permutation(m)
    return Dataset(points[perm], labels[perm], seed=seed)
