import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from robust2gmm import dataio
from robust2gmm.cli import main, parse_config_text
from robust2gmm.errors import DimensionMismatch, ParseError
from robust2gmm.model import Dataset, EstimationResult, MixtureModel
from robust2gmm.synthdata import GenerationConfig, NoiseModel, generate


def test_dataset_round_trip(tmp_path):
    ds = generate(GenerationConfig(MixtureModel.spherical((0.8, 0.16, 0.04), [0, 0, 0], [3, 3, 3]), 200,
                                   NoiseModel.cauchy(), 1))
    p = tmp_path / "d.csv"
    dataio.write_dataset(p, ds, echo={"seed": 1})
    back = dataio.read_dataset(p)
    np.testing.assert_array_equal(back.points, ds.points)
    assert list(back.labels) == list(ds.labels)


@settings(max_examples=30, deadline=None)
@given(arrays(float, (5, 2), elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_float_round_trip_exact(tmp_path_factory, pts):
    p = tmp_path_factory.mktemp("rt") / "d.csv"
    dataio.write_dataset(p, Dataset(pts))
    np.testing.assert_array_equal(dataio.read_dataset(p).points, pts)


def test_extra_field_is_parse_error_with_line(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("x1,x2\n1,2\n3,4,5\n")
    with pytest.raises(ParseError) as exc:
        dataio.read_dataset(p)
    assert exc.value.line == 3


def test_bad_header_and_labels(tmp_path):
    p = tmp_path / "h.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ParseError):
        dataio.read_dataset(p)
    p.write_text("x1,label\n1,G7\n")
    with pytest.raises(ParseError) as exc:
        dataio.read_dataset(p)
    assert exc.value.line == 2
    p.write_text("x1,x2\n")
    with pytest.raises(DimensionMismatch):
        dataio.read_dataset(p)


def test_unlabelled_csv(tmp_path):
    p = tmp_path / "u.csv"
    rng = np.random.default_rng(0)
    dataio.write_dataset(p, Dataset(rng.standard_normal((60, 2))))
    ds = dataio.read_dataset(p)
    assert ds.labels is None
    out = tmp_path / "r.json"
    assert main(["estimate", "--input", str(p), "--w1", "0.7", "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    assert res["config_echo"]["labels_present"] is False


def test_result_json_schema(tmp_path):
    res = EstimationResult([1.0, 2.0], [3.0, 4.0], np.eye(2), {"iterations": 3, "filter_mask": np.ones(3, bool),
                                                               "nan": float("nan")})
    p = tmp_path / "r.json"
    dataio.write_result(p, res, {"method": "x"})
    d = json.loads(p.read_text())
    assert set(d) == {"mu1_hat", "mu2_hat", "sigma_hat", "diagnostics", "config_echo"}
    assert d["sigma_hat"] == [[1.0, 0.0], [0.0, 1.0]]
    assert d["diagnostics"] == {"iterations": 3, "nan": None}


def test_config_parser():
    cfg = parse_config_text("# campaign\nm = 500\ndims = 10, 20\nmethods = alg1\n\nalpha_grid = 0.5,1.0\n")
    assert cfg == {"m": 500, "dims": (10, 20), "methods": ("alg1",), "alpha_grid": (0.5, 1.0)}
    with pytest.raises(ParseError) as exc:
        parse_config_text("m = 5\nbogus = 1\n")
    assert exc.value.line == 2
    with pytest.raises(ParseError):
        parse_config_text("m = five\n")
    with pytest.raises(ParseError):
        parse_config_text("m 5\n")


def test_exit_codes(tmp_path):
    assert main(["estimate", "--input", str(tmp_path / "missing.csv"), "--w1", "0.8", "--out", str(tmp_path / "o")]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("x1\n1\n2,3\n")
    assert main(["estimate", "--input", str(bad), "--w1", "0.8", "--out", str(tmp_path / "o")]) == 1
    cfg = tmp_path / "c.cfg"
    cfg.write_text("reps = 0\n")
    assert main(["bench", "--config", str(cfg), "--records", str(tmp_path / "r"), "--aggregate", str(tmp_path / "a")]) == 1
    model = tmp_path / "m.json"
    model.write_text(json.dumps({"w1": 0.1, "w2": 0.8, "w3": 0.1, "mu1": [0], "mu2": [1], "sigma": [[1]]}))
    assert main(["check", "--model", str(model), "--out", str(tmp_path / "o.json")]) == 1


def test_gen_estimate_check_pipeline(tmp_path):
    data = tmp_path / "d.csv"
    assert main(["gen", "--n", "3", "--m", "300", "--seed", "2", "--out", str(data)]) == 0
    assert data.read_text().startswith(dataio.ECHO_PREFIX)
    for method in ("alg1", "em"):
        out = tmp_path / f"{method}.json"
        assert main(["estimate", "--input", str(data), "--method", method, "--w1", "0.8", "--out", str(out)]) == 0
        d = json.loads(out.read_text())
        assert len(d["mu1_hat"]) == 3 and d["config_echo"]["method"] == method
    model = tmp_path / "m.json"
    model.write_text(json.dumps(MixtureModel(0.8, 0.16, 0.04, mu1=[0, 0], mu2=[4, 1], sigma=[[2, 0.3], [0.3, 1]])
                                .to_dict()))
    out = tmp_path / "c.json"
    assert main(["check", "--model", str(model), "--out", str(out), "--m", "1000"]) == 0
    rep = json.loads(out.read_text())
    assert rep["kind"] == "nonspherical"
    assert {c["name"] for c in rep["conditions"]} >= {"first_separation", "sigma_min_vs_trace", "sample_size"}
    assert rep["config_echo"]["constants"]["c1_prime"] == 6.0


def test_bench_and_sensitivity_outputs(tmp_path):
    cfg = tmp_path / "b.cfg"
    cfg.write_text("m = 200\ndims = 3\nreps = 2\nalpha_grid = 0.5, 1.0\n")
    rec, agg, sens = tmp_path / "rec.csv", tmp_path / "agg.csv", tmp_path / "sens.csv"
    assert main(["bench", "--config", str(cfg), "--records", str(rec), "--aggregate", str(agg)]) == 0
    rows = dataio.read_table(rec)
    assert len(rows) == 4 and {r["method"] for r in rows} == {"alg1", "em"}
    table = dataio.read_table(agg)
    for row in table:
        vals = [float(r["err_total"]) for r in rows if r["method"] == row["method"]]
        assert float(row["mean_err_total"]) == pytest.approx(np.mean(vals), abs=1e-9)
    assert "runtime_ms" not in rows[0]
    assert main(["sensitivity", "--config", str(cfg), "--out", str(sens)]) == 0
    assert [r["alpha"] for r in dataio.read_table(sens)] == ["0.5", "1"]
