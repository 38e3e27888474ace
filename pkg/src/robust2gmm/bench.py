"""Benchmark campaigns: robust-estimator-vs-EM error tables and the ``w1`` sensitivity sweep.

Every cell ``(n, rep)`` draws its own dataset from
``master_seed XOR stable_hash(n, rep)``, so adding a dimension or a
repetition never changes the data of existing cells, and the sensitivity
sweep reuses the same datasets for every ``alpha``.
"""

from __future__ import annotations

import enum
import hashlib
import math
import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .agnostic import AgnosticConfig
from .baseline_em import EmConfig, estimate_em
from .errors import EstimationError, InvalidConfig
from .gmm2 import Alg1Config, estimate_alg1
from .model import G1, G2, MixtureModel, matched_errors
from .synthdata import Allocation, GenerationConfig, NoiseModel, generate
from .theory import first_condition_rhs

DEFAULT_ALPHAS = (0.5, 0.67, 0.83, 1.0, 1.17, 1.33, 1.5)


class Method(str, enum.Enum):
    ALG1 = "alg1"
    EM = "em"


def stable_hash(*parts) -> int:
    """32-bit hash of ``parts`` that does not depend on the interpreter's hash seed."""
    key = ":".join(str(p) for p in parts).encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=4).digest(), "little")


def cell_seed(master: int, n: int, rep: int) -> int:
    return int(master) ^ stable_hash(n, rep)


def default_model(n: int, weights=(0.8, 0.16, 0.04), separation_factor: float = 4.0) -> MixtureModel:
    """``mu1 = 0``, ``mu2`` along ``(1,...,1)``, ``sigma = I``.

    ``|mu2|^2`` is ``separation_factor`` times the first separation threshold
    ``2 sqrt(n log(w1/w2)) + 2 sqrt(n-1) + 2 log(w1/w2)``.
    """
    w1, w2, _ = weights
    lam = separation_factor * first_condition_rhs(n, w1, w2)
    mu2 = np.full(n, math.sqrt(lam / n))
    return MixtureModel(*weights, mu1=np.zeros(n), mu2=mu2, sigma=np.eye(n))


@dataclass(frozen=True)
class BenchmarkConfig:
    """One campaign.

    When ``model`` is None each dimension uses :func:`default_model`; an
    explicit model pins ``dims`` to its own dimension.
    """

    m: int = 2000
    dims: tuple = (10,)
    reps: int = 10
    methods: tuple = (Method.ALG1, Method.EM)
    noise: NoiseModel = field(default_factory=NoiseModel)
    alpha_grid: Optional[tuple] = DEFAULT_ALPHAS
    seed: int = 0
    model: Optional[MixtureModel] = None
    weights: tuple = (0.8, 0.16, 0.04)
    separation_factor: float = 4.0
    allocation: Allocation = Allocation.MULTINOMIAL
    agnostic: AgnosticConfig = field(default_factory=AgnosticConfig)
    em: EmConfig = field(default_factory=EmConfig)
    record_runtime: bool = False

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "methods", tuple(Method(x) for x in self.methods))
        object.__setattr__(self, "allocation", Allocation(self.allocation))
        if self.alpha_grid is not None:
            object.__setattr__(self, "alpha_grid", tuple(float(a) for a in self.alpha_grid))
        if self.reps < 1:
            raise InvalidConfig("reps must be at least 1")
        if not self.dims:
            raise InvalidConfig("dims must be non-empty")
        if not self.methods:
            raise InvalidConfig("methods must be non-empty")
        if self.model is not None and set(self.dims) != {self.model.dim}:
            raise InvalidConfig(f"explicit model has dimension {self.model.dim}, dims = {self.dims}")
        w1 = self.true_w1
        for a in self.alpha_grid or ():
            if a <= 0 or not 0.0 < 1.0 - a * (1.0 - w1) < 1.0:
                raise InvalidConfig(f"alpha = {a} gives w1_input outside (0, 1)")

    @property
    def true_w1(self) -> float:
        return self.model.w1 if self.model is not None else self.weights[0]

    def model_for(self, n: int) -> MixtureModel:
        if self.model is not None:
            return self.model
        return default_model(n, self.weights, self.separation_factor)

    def echo(self) -> dict:
        return {
            "m": self.m,
            "dims": list(self.dims),
            "reps": self.reps,
            "methods": [x.value for x in self.methods],
            "noise": self.noise.describe(),
            "alpha_grid": None if self.alpha_grid is None else list(self.alpha_grid),
            "seed": self.seed,
            "seed_rule": "master XOR blake2b-32('n:rep')",
            "model": None if self.model is None else self.model.to_dict(),
            "weights": list(self.weights if self.model is None else self.model.weights),
            "separation_factor": self.separation_factor,
            "default_model": "mu1=0, mu2=sqrt(lambda/n)*ones, sigma=I, lambda=factor*first separation threshold",
            "allocation": self.allocation.value,
            "alg1": Alg1Config(self.true_w1, self.agnostic).echo(),
            "em": self.em.echo() | {"seed": "cell seed"},
            "std": "population (ddof=0)",
        }


RECORD_COLUMNS = [
    "n",
    "rep",
    "seed",
    "method",
    "w1_input",
    "status",
    "err_mu1",
    "err_mu2",
    "err_total",
    "true_sampling_err_mu1",
    "true_sampling_err_mu2",
    "error",
]


@dataclass
class BenchmarkRecord:
    n: int
    rep: int
    seed: int
    method: str
    w1_input: float
    status: str
    err_mu1: float
    err_mu2: float
    err_total: float
    true_sampling_err_mu1: float
    true_sampling_err_mu2: float
    error: str = ""
    runtime_ms: float = float("nan")

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def row(self) -> dict:
        return {c: getattr(self, c) for c in RECORD_COLUMNS} | {"runtime_ms": self.runtime_ms}


def sampling_errors(ds, model: MixtureModel) -> tuple[float, float]:
    """Distance of each labelled subsample mean to its true mean (NaN if unavailable)."""
    out = []
    for label, mu in ((G1, model.mu1), (G2, model.mu2)):
        if ds.labels is None:
            out.append(float("nan"))
            continue
        pts = ds.subset(label)
        out.append(float(np.linalg.norm(pts.mean(0) - mu)) if len(pts) else float("nan"))
    return out[0], out[1]


def _run_method(method: Method, X, w1_input: float, seed: int, cfg: BenchmarkConfig):
    if method is Method.ALG1:
        return estimate_alg1(X, Alg1Config(w1_input, cfg.agnostic))
    return estimate_em(X, replace(cfg.em, seed=seed))


def _dataset(cfg: BenchmarkConfig, n: int, rep: int):
    seed = cell_seed(cfg.seed, n, rep)
    model = cfg.model_for(n)
    ds = generate(GenerationConfig(model, cfg.m, cfg.noise, seed, cfg.allocation))
    return seed, model, ds


def _score(n, rep, seed, method, w1_input, model, ds, cfg) -> BenchmarkRecord:
    s1, s2 = sampling_errors(ds, model)
    t0 = time.perf_counter()
    try:
        res = _run_method(method, ds.points, w1_input, seed, cfg)
    except (EstimationError, np.linalg.LinAlgError, FloatingPointError) as exc:
        nan = float("nan")
        return BenchmarkRecord(
            n, rep, seed, method.value, w1_input, "failed", nan, nan, nan, s1, s2, f"{type(exc).__name__}: {exc}"
        )
    ms = (time.perf_counter() - t0) * 1e3
    e1, e2, _ = matched_errors(res.mu1_hat, res.mu2_hat, model.mu1, model.mu2)
    rec = BenchmarkRecord(n, rep, seed, method.value, w1_input, "ok", e1, e2, e1 + e2, s1, s2)
    if cfg.record_runtime:
        rec.runtime_ms = ms
    return rec


def _mean_std(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return float("nan"), float("nan")
    return float(v.mean()), float(v.std())


def cell_text(mean: float, std: float) -> str:
    return f"{mean:.2f}({std:.2f})"


AGGREGATE_COLUMNS = [
    "n",
    "method",
    "count",
    "failed",
    "mean_err_mu1",
    "std_err_mu1",
    "mean_err_mu2",
    "std_err_mu2",
    "mean_err_total",
    "std_err_total",
    "mean_true_sampling_err_mu1",
    "mean_true_sampling_err_mu2",
    "cell",
]


def aggregate(records: list[BenchmarkRecord]) -> list[dict]:
    """Mean and population std per ``(n, method)`` over successful records."""
    keys = sorted({(r.n, r.method) for r in records})
    rows = []
    for n, method in keys:
        group = [r for r in records if r.n == n and r.method == method]
        ok = [r for r in group if r.ok]
        row = {"n": n, "method": method, "count": len(ok), "failed": len(group) - len(ok)}
        for col in ("err_mu1", "err_mu2", "err_total"):
            row[f"mean_{col}"], row[f"std_{col}"] = _mean_std([getattr(r, col) for r in ok])
        for col in ("true_sampling_err_mu1", "true_sampling_err_mu2"):
            row[f"mean_{col}"] = _mean_std([getattr(r, col) for r in group])[0]
        row["cell"] = cell_text(row["mean_err_total"], row["std_err_total"])
        rows.append(row)
    return rows


def run_benchmark(cfg: BenchmarkConfig) -> tuple[list[BenchmarkRecord], list[dict]]:
    """Every method on every ``(n, rep)`` cell; failures become ``failed`` records."""
    records = []
    for n in cfg.dims:
        for rep in range(cfg.reps):
            seed, model, ds = _dataset(cfg, n, rep)
            for method in cfg.methods:
                records.append(_score(n, rep, seed, method, model.w1, model, ds, cfg))
    return records, aggregate(records)


SENSITIVITY_COLUMNS = ["alpha", "w1_input", "n", "count", "failed", "mean_err_total", "std_err_total", "cell"]


def w1_for_alpha(w1: float, alpha: float) -> float:
    """``w1' = 1 - alpha (1 - w1)``; ``alpha = 1`` returns ``w1`` itself."""
    return w1 if alpha == 1.0 else 1.0 - alpha * (1.0 - w1)


def run_sensitivity(cfg: BenchmarkConfig) -> tuple[list[BenchmarkRecord], list[dict]]:
    """The robust estimator with a misreported ``w1`` on datasets shared across ``alpha``."""
    if not cfg.alpha_grid:
        raise InvalidConfig("sensitivity needs an alpha grid")
    records = []
    rows = []
    for n in cfg.dims:
        cells = [_dataset(cfg, n, rep) for rep in range(cfg.reps)]
        for alpha in cfg.alpha_grid:
            group = []
            for rep, (seed, model, ds) in enumerate(cells):
                w1_in = w1_for_alpha(model.w1, alpha)
                group.append(_score(n, rep, seed, Method.ALG1, w1_in, model, ds, cfg))
            ok = [r.err_total for r in group if r.ok]
            mean, std = _mean_std(ok)
            rows.append(
                {
                    "alpha": alpha,
                    "w1_input": group[0].w1_input,
                    "n": n,
                    "count": len(ok),
                    "failed": len(group) - len(ok),
                    "mean_err_total": mean,
                    "std_err_total": std,
                    "cell": cell_text(mean, std),
                }
            )
            records.extend(group)
    return records, rows
