"""Closed-form separation conditions, sample-size expressions and tail bounds.

Everything here is plain arithmetic on model parameters. Hidden ``O(.)`` and
``Omega(.)`` constants are exposed through :class:`SeparationParams` and
default to 1 unless a concrete value is known. The reports are diagnostics;
they say whether a model sits inside the regime the guarantees describe, not
whether an estimator will succeed on a particular sample.

The tail-bound helpers return ``(threshold, bound)`` pairs meaning
``P(X >= threshold) <= bound`` (``<=`` for the lower-tail variants), and come
with seeded Monte Carlo samplers so each pair can be checked empirically.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidConfig, NotSpherical, SingularCovariance
from .model import MixtureModel

SPHERICAL_RTOL = 1e-10

DEFAULT_CONSTANTS = {"c": 1.0, "c1": 1.0, "c2": 2.0, "c3": 12.0, "c1_prime": 6.0}


class Side(str, enum.Enum):
    UPPER = "upper"
    LOWER = "lower"


def _spectrum(sigma) -> np.ndarray:
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    return np.linalg.eigvalsh((sigma + sigma.T) / 2)


def lambda_param(m: MixtureModel) -> float:
    """Separation ``(mu2 - mu1)^T sigma^{-1} (mu2 - mu1)``."""
    d = m.mu2 - m.mu1
    try:
        L = np.linalg.cholesky(m.sigma)
    except np.linalg.LinAlgError as exc:
        raise SingularCovariance("sigma is not positive definite") from exc
    z = np.linalg.solve(L, d)
    return float(z @ z)


def spherical_scale(sigma, rtol: float = SPHERICAL_RTOL) -> Optional[float]:
    """``s`` when ``sigma == s * I`` up to ``rtol`` (relative), else None."""
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    s = float(np.mean(np.diag(sigma)))
    if s <= 0:
        return None
    if np.max(np.abs(sigma - s * np.eye(sigma.shape[0]))) > rtol * s:
        return None
    return s


@dataclass(frozen=True)
class SeparationParams:
    """Inputs to the separation checks.

    ``m`` (sample count) is optional; when given, the reports also test it
    against the sample-size floor.
    """

    model: MixtureModel
    eta: float
    constants: dict = field(default_factory=dict)
    m: Optional[int] = None

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise InvalidConfig(f"eta must lie in (0, 1), got {self.eta}")
        merged = {**DEFAULT_CONSTANTS, **self.constants}
        unknown = set(merged) - set(DEFAULT_CONSTANTS)
        if unknown:
            raise InvalidConfig(f"unknown constants {sorted(unknown)}")
        if any(v <= 0 for v in merged.values()):
            raise InvalidConfig("constants must be positive")
        object.__setattr__(self, "constants", merged)

    @property
    def delta(self) -> float:
        w1, w2, w3 = self.model.weights
        return self.eta * w2 / w1 + w3 / w1

    def echo(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "eta": self.eta,
            "delta": self.delta,
            "constants": dict(sorted(self.constants.items())),
            "m": self.m,
        }


@dataclass(frozen=True)
class Condition:
    name: str
    lhs: float
    rhs: float

    @property
    def satisfied(self) -> bool:
        return self.lhs >= self.rhs

    def to_dict(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "satisfied": self.satisfied}


@dataclass(frozen=True)
class SeparationReport:
    kind: str
    lam: float
    conditions: list
    sample_bounds: dict
    quantities: dict
    echo: dict

    @property
    def satisfied(self) -> bool:
        return all(c.satisfied for c in self.conditions)

    def condition(self, name: str) -> Condition:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "lambda": self.lam,
            "conditions": [c.to_dict() for c in self.conditions],
            "all_satisfied": self.satisfied,
            "sample_bounds": self.sample_bounds,
            "quantities": self.quantities,
            "config_echo": self.echo,
        }


def first_condition_rhs(n: int, w1: float, w2: float) -> float:
    """``2 sqrt(n log(w1/w2)) + 2 sqrt(n-1) + 2 log(w1/w2)``."""
    r = math.log(w1 / w2)
    return 2.0 * math.sqrt(n * r) + 2.0 * math.sqrt(n - 1) + 2.0 * r


def sample_floor(p: SeparationParams) -> float:
    """``c w2 log(w2/w3) / (w3 eta^2)``."""
    _, w2, w3 = p.model.weights
    denom = w3 * p.eta**2
    if denom == 0.0:
        return math.inf
    return p.constants["c"] * w2 * math.log(w2 / w3) / denom


def _finish(kind, p: SeparationParams, lam, conds, quantities) -> SeparationReport:
    floor = sample_floor(p)
    if p.m is not None:
        conds.append(Condition("sample_size", float(p.m), floor))
    return SeparationReport(
        kind=kind,
        lam=lam,
        conditions=conds,
        sample_bounds={"filter_sample_floor": floor},
        quantities=quantities,
        echo=p.echo(),
    )


def check_spherical_separation(p: SeparationParams) -> SeparationReport:
    """Both separation conditions for ``sigma = s I``.

    The second condition is
    ``c1' log(1/delta) + c2 sqrt(n log(1/delta)) + c3 sqrt(log(1/eta)(log(1/delta) + n))``.
    """
    model = p.model
    s = spherical_scale(model.sigma)
    if s is None:
        raise NotSpherical("sigma is not a multiple of the identity")
    n = model.dim
    w1, w2, _ = model.weights
    lam = float(np.sum((model.mu2 - model.mu1) ** 2) / s)
    k = p.constants
    ld = math.log(1.0 / p.delta)
    rhs2 = (
        k["c1_prime"] * ld
        + k["c2"] * math.sqrt(n * ld)
        + k["c3"] * math.sqrt(math.log(1.0 / p.eta) * (ld + n))
    )
    conds = [
        Condition("first_separation", lam, first_condition_rhs(n, w1, w2)),
        Condition("second_separation", lam, rhs2),
    ]
    quantities = {"n": n, "sigma2": s, "delta": p.delta, "log_inv_delta": ld}
    return _finish("spherical", p, lam, conds, quantities)


def check_nonspherical_separation(p: SeparationParams) -> SeparationReport:
    """Separation and conditioning requirements for a general ``sigma``.

    The two lower bounds on the smallest eigenvalue are reported as
    separate conditions, ``sigma_min_vs_log_n`` and ``sigma_min_vs_trace``.
    """
    model = p.model
    n = model.dim
    w1, w2, w3 = model.weights
    ev = _spectrum(model.sigma)
    if ev[0] <= 0:
        raise SingularCovariance("sigma is not positive definite")
    lam = lambda_param(model)
    tr, tr2 = float(ev.sum()), float(np.sum(ev**2))
    norm, inv_norm = float(ev[-1]), float(1.0 / ev[0])
    sigma_min = float(ev[0])
    k = p.constants
    ld = math.log(1.0 / p.delta)
    logn = math.log(n)
    cond_factor = math.sqrt(norm) * inv_norm + 1.0
    rhs2 = (
        k["c1"] * math.sqrt(w2 * logn) * cond_factor * (tr + math.sqrt(tr2 * ld) + norm * ld)
        + k["c2"] * math.sqrt(n * ld)
        + ld
    )
    rhs_a = k["c"] * w2 * norm * logn
    rhs_b = k["c"] * math.sqrt(w2) * norm * math.sqrt(logn) * (
        2.0 * norm**2 * math.sqrt(math.log(w2 / w3)) / math.sqrt(tr2) + 1.0
    )
    conds = [
        Condition("first_separation", lam, first_condition_rhs(n, w1, w2)),
        Condition("second_separation", lam, rhs2),
        Condition("sigma_min_vs_log_n", sigma_min, rhs_a),
        Condition("sigma_min_vs_trace", sigma_min, rhs_b),
    ]
    quantities = {
        "n": n,
        "trace": tr,
        "trace_sq": tr2,
        "norm": norm,
        "inv_norm": inv_norm,
        "sigma_min": sigma_min,
        "delta": p.delta,
        "log_inv_delta": ld,
    }
    return _finish("nonspherical", p, lam, conds, quantities)


def sample_complexity(n: int, epsilon: float, w1: float, w2: float, w3: float, spherical: bool) -> dict:
    """The three additive sample-size terms (hidden constants set to 1) and their sum.

    Spherical::

        n (1/w2)(log n + log 1/eps) log n / eps^2
        (1/w2) log(1/eps + w2/w3) / (eps^2 + (w3/w2)^2)
        log(1/eps + w2/w3) / w3

    General covariance replaces ``1/w2`` by ``n + 1/w2`` in the first term,
    ``w2/w3`` by its square root and ``eps^2`` by ``eps^4`` in the second.
    Also returns the filter accuracy ``eta`` implied by each regime.
    """
    if not 0.0 < epsilon < 1.0:
        raise InvalidConfig("epsilon must lie in (0, 1)")
    logn, linv = math.log(n), math.log(1.0 / epsilon)
    ratio = w2 / w3
    if spherical:
        t1 = n * (1.0 / w2) * (logn + linv) * logn / epsilon**2
        lg = math.log(1.0 / epsilon + ratio)
        t2 = (1.0 / w2) * lg / (epsilon**2 + (w3 / w2) ** 2)
    else:
        t1 = n * (n + 1.0 / w2) * (logn + linv) * logn / epsilon**2
        lg = math.log(1.0 / epsilon + math.sqrt(ratio))
        t2 = (1.0 / w2) * lg / (epsilon**4 + (w3 / w2) ** 2)
    t3 = lg / w3
    return {
        "regime": "spherical" if spherical else "nonspherical",
        "agnostic_term": t1,
        "filter_term": t2,
        "noise_term": t3,
        "total": t1 + t2 + t3,
        "eta_spherical": epsilon + w3 / w2,
        "eta_nonspherical": epsilon**2 + w3 / w2,
    }


# ---------------------------------------------------------------- tail bounds


def chisq_tail_upper(n: int, x: float) -> tuple[float, float]:
    """``P(chi2_n >= n + 2 sqrt(nx) + 2x) <= e^{-x}``."""
    return n + 2.0 * math.sqrt(n * x) + 2.0 * x, math.exp(-x)


def chisq_tail_lower(n: int, x: float) -> tuple[float, float]:
    """``P(chi2_n <= n - 2 sqrt(nx)) <= e^{-x}``."""
    return n - 2.0 * math.sqrt(n * x), math.exp(-x)


def noncentral_chisq_tail(n: int, lam: float, x: float, side: Side = Side.UPPER) -> tuple[float, float]:
    """Tail thresholds for ``chi2_n(lam)``; at ``lam = 0`` they equal the central ones."""
    side = Side(side)
    spread = 2.0 * math.sqrt((n + 2.0 * lam) * x)
    if side is Side.UPPER:
        return n + lam + spread + 2.0 * x, math.exp(-x)
    return n + lam - spread, math.exp(-x)


def quadform_tail(sigma, shift, x: float) -> tuple[float, float]:
    """Upper threshold for ``|y - mu1|^2`` with ``y ~ N(mu1 + shift, sigma)``.

    Zero shift gives ``tr + 2 sqrt(tr2 x) + 2 |sigma| x``; a shift adds
    ``|shift|^2 (1 + 2 |sigma| x / sqrt(tr2 x))``.
    """
    ev = np.clip(_spectrum(sigma), 0.0, None)
    tr, tr2, norm = float(ev.sum()), float(np.sum(ev**2)), float(ev[-1])
    thr = tr + 2.0 * math.sqrt(tr2 * x) + 2.0 * norm * x
    s2 = float(np.sum(np.asarray(shift, dtype=float) ** 2))
    if s2 > 0:
        thr += s2 * (1.0 + 2.0 * norm * x / math.sqrt(tr2 * x))
    return thr, math.exp(-x)


# ---------------------------------------------------------------- Monte Carlo


def sample_chisq(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    return rng.chisquare(n, size)


def sample_noncentral_chisq(n: int, lam: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """``chi2_{n-1} + (Z + sqrt(lam))^2``, an exact draw from ``chi2_n(lam)``."""
    central = rng.chisquare(n - 1, size) if n > 1 else np.zeros(size)
    z = rng.standard_normal(size) + math.sqrt(lam)
    return central + z * z


def sample_quadform(sigma, shift, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draws of ``|y - mu1|^2`` with ``y - mu1 ~ N(shift, sigma)``."""
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    L = np.linalg.cholesky(sigma)
    y = np.asarray(shift, dtype=float) + rng.standard_normal((size, sigma.shape[0])) @ L.T
    return np.sum(y * y, axis=1)


def tail_frequency(samples, threshold: float, side: Side = Side.UPPER) -> float:
    samples = np.asarray(samples)
    if Side(side) is Side.UPPER:
        return float(np.mean(samples >= threshold))
    return float(np.mean(samples <= threshold))


def mc_slack(bound: float, size: int, k: float = 3.0) -> float:
    """``k`` Monte Carlo standard errors of a frequency whose mean is ``bound``."""
    return k * math.sqrt(bound / size)


def bound_holds(freq: float, bound: float, size: int, k: float = 3.0) -> bool:
    return freq <= bound + mc_slack(bound, size, k)
