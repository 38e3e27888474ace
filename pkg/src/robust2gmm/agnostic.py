"""Robust mean and covariance of one Gaussian under a fraction of malicious points.

Four building blocks:

* :func:`outlier_damping` -- exponential down-weighting by distance to the
  coordinate-wise median.
* :func:`outlier_truncation` -- keep the smallest ball (interval in 1-d) around
  a robust centre holding a target fraction of the sample.
* :func:`agnostic_mean` -- recursive spectral estimator: fix the mean on the
  low-variance half of the principal directions by averaging, recurse on the
  high-variance half.
* :func:`agnostic_cov` -- pair differences ``(x_i - x_{i+m/2}) / sqrt(2)`` have
  second moment ``Sigma`` whatever the mean is; run the robust mean on their
  flattened outer products.

Quantiles use the type-1 (inverted CDF) convention: the order statistic at
index ``ceil(q * m)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import norm

from .errors import EmptyInput, FractionOutOfRange, InvalidConfig, TooFewSamples

# Phi(1): the N(0,1) quantile at this level sits exactly one sd above the mean.
SIGMA_QUANTILE = float(norm.cdf(1.0))
# Widths/radii closer than this (relative to the data spread) count as ties.
_TIE_RTOL = 1e-9
# Eigenvalues below this fraction of the largest are treated as zero variance.
_RANK_RTOL = 1e-12
PSD_RFLOOR = 1e-8
PSD_AFLOOR = 1e-12


class Mode(str, enum.Enum):
    DAMPED = "damped"
    TRUNCATED = "truncated"
    GAUSSIAN_BASE = "gaussian_base"


class Branch(str, enum.Enum):
    GAUSSIAN = "gaussian"  # damping preprocessing, median at the 1-d base
    GENERAL = "general"  # truncation preprocessing, mean at the 1-d base


@dataclass(frozen=True)
class WeightedSample:
    points: np.ndarray
    weights: np.ndarray
    mode: Mode

    def __post_init__(self):
        if self.points.shape[0] != self.weights.shape[0]:
            raise ValueError("weights and points differ in length")
        if self.weights.size and (self.weights.min() < 0 or self.weights.max() > 1):
            raise ValueError("weights must lie in [0, 1]")
        if self.mode is Mode.GAUSSIAN_BASE and self.points.shape[1] != 1:
            raise ValueError("GAUSSIAN_BASE only arises in dimension 1")


@dataclass(frozen=True)
class AgnosticConfig:
    """Parameters shared by the agnostic estimators.

    Attributes:
        eta: assumed corruption fraction, in [0, 1/2) for a single Gaussian.
            The two-component estimator also passes mixture-level fractions up to 1 - w1.
        epsilon: accuracy slack; the truncation keeps a
            ``(1 - eta - epsilon) * (1 - eta)`` fraction.
        damping_c: ``s^2 = damping_c * tr(Sigma)`` in the damping weights.
        branch: GAUSSIAN (damping) or GENERAL (truncation).
        sigma_floor: lower bound on the 1-d robust scale.
        recurse_on_kept: recurse on the truncated sample instead of the full
            one. Needed when the "corruption" is a whole second cluster: the
            truncated core then sits inside one component but is nearly
            isotropic, so its top principal direction is arbitrary and the
            full sample projected on it can be densest elsewhere. Ignored on
            the damping branch.
    """

    eta: float = 0.0
    epsilon: float = 0.01
    damping_c: float = 10.0
    branch: Branch = Branch.GAUSSIAN
    sigma_floor: float = 1e-12
    recurse_on_kept: bool = False

    def __post_init__(self):
        object.__setattr__(self, "branch", Branch(self.branch))
        if not 0 <= self.eta < 1:
            raise InvalidConfig(f"eta must be in [0, 1), got {self.eta}")
        if self.epsilon <= 0:
            raise InvalidConfig("epsilon must be positive")
        if self.damping_c <= 0:
            raise InvalidConfig("damping_c must be positive")
        keep_fraction(self.eta, self.epsilon)

    def with_eta(self, eta: float) -> "AgnosticConfig":
        return replace(self, eta=eta)

    def with_branch(self, branch) -> "AgnosticConfig":
        return replace(self, branch=branch)


def keep_fraction(eta: float, epsilon: float) -> float:
    f = (1.0 - eta - epsilon) * (1.0 - eta)
    if not 0.0 < f <= 1.0:
        raise FractionOutOfRange(f"(1-eta-eps)(1-eta) = {f} is outside (0, 1]")
    return f


def _as_points(S) -> np.ndarray:
    X = np.asarray(S, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyInput("need a non-empty (m, n) array of points")
    return X


def type1_quantile(xs, q: float) -> float:
    """Order statistic ``x_(ceil(q m))`` (1-based), clamped to the sample."""
    xs = np.sort(np.asarray(xs, dtype=float))
    k = min(max(math.ceil(q * xs.size - 1e-12), 1), xs.size)
    return float(xs[k - 1])


def robust_sigma_1d(xs, mu_hat: float, floor: float = 1e-12, diagnostics: dict | None = None) -> float:
    """Scale estimate ``quantile_{Phi(1)}(xs) - mu_hat``, floored at ``floor``.

    If the estimate falls to the floor (e.g. all values equal) and a
    ``diagnostics`` dict is given, ``diagnostics["degenerate_sample"]`` is set.
    """
    xs = np.asarray(xs, dtype=float).ravel()
    if xs.size < 2:
        raise TooFewSamples("robust_sigma_1d needs at least two values")
    sigma = type1_quantile(xs, SIGMA_QUANTILE) - mu_hat
    if not sigma > floor:
        if diagnostics is not None:
            diagnostics["degenerate_sample"] = True
        return floor
    return sigma


def outlier_damping(S, cfg: AgnosticConfig | None = None) -> WeightedSample:
    cfg = cfg or AgnosticConfig()
    X = _as_points(S)
    m, n = X.shape
    if n == 1:
        return WeightedSample(X, np.ones(m), Mode.GAUSSIAN_BASE)
    if m < 2:
        raise TooFewSamples("damping needs at least two points")
    a = np.median(X, axis=0)
    trace = sum(robust_sigma_1d(X[:, j], a[j], cfg.sigma_floor) ** 2 for j in range(n))
    s2 = cfg.damping_c * trace
    d2 = np.sum((X - a) ** 2, axis=1)
    w = np.exp(-d2 / s2)
    if not w.sum() > 0:
        # every weight underflowed; rescale by the nearest point (ratios unchanged)
        w = np.exp(-(d2 - d2.min()) / s2)
    return WeightedSample(X, w, Mode.DAMPED)


def _keep_count(m: int, fraction: float) -> int:
    return min(max(math.ceil(fraction * m - 1e-12), 1), m)


def shortest_interval(x: np.ndarray, k: int) -> tuple[float, float]:
    """Narrowest ``[a, b]`` holding ``k`` of the values; ties go to the lowest ``a``."""
    xs = np.sort(x)
    widths = xs[k - 1 :] - xs[: xs.size - k + 1]
    tol = _TIE_RTOL * max(xs[-1] - xs[0], np.abs(xs).max() * 1e-3, np.finfo(float).tiny)
    i = int(np.flatnonzero(widths <= widths.min() + tol)[0])
    return float(xs[i]), float(xs[i + k - 1])


def outlier_truncation(S, eta: float, epsilon: float) -> WeightedSample:
    """Keep the ``(1-eta-epsilon)(1-eta)`` fraction nearest a robust centre.

    In 1-d the kept set is the sample inside the shortest covering interval.
    Otherwise the centre is the vector of per-coordinate shortest-interval
    means and the kept set is the smallest ball around it.
    """
    X = _as_points(S)
    m, n = X.shape
    k = _keep_count(m, keep_fraction(eta, epsilon))
    if n == 1:
        lo, hi = shortest_interval(X[:, 0], k)
        keep = (X[:, 0] >= lo) & (X[:, 0] <= hi)
    else:
        center = np.empty(n)
        for j in range(n):
            col = X[:, j]
            lo, hi = shortest_interval(col, k)
            center[j] = col[(col >= lo) & (col <= hi)].mean()
        dist = np.sqrt(np.sum((X - center) ** 2, axis=1))
        r = np.partition(dist, k - 1)[k - 1]
        keep = dist <= r * (1 + _TIE_RTOL) + np.finfo(float).tiny
    kept = X[keep]
    return WeightedSample(kept, np.ones(kept.shape[0]), Mode.TRUNCATED)


def _preprocess(X: np.ndarray, cfg: AgnosticConfig) -> WeightedSample:
    if cfg.branch is Branch.GAUSSIAN:
        return outlier_damping(X, cfg)
    return outlier_truncation(X, cfg.eta, cfg.epsilon)


def _weighted_moments(ws: WeightedSample) -> tuple[np.ndarray, np.ndarray]:
    w = ws.weights / ws.weights.sum()
    mean = w @ ws.points
    centred = ws.points - mean
    cov = (centred * w[:, None]).T @ centred
    return mean, (cov + cov.T) / 2


def split_subspaces(cov: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal bases ``(V, W)``: V spans the top ``ceil(n/2)`` directions.

    Directions with (numerically) zero variance are never put in V, so V
    may be smaller, or empty, when ``cov`` is rank deficient.
    """
    n = cov.shape[0]
    evals, evecs = np.linalg.eigh(cov)
    evals, evecs = evals[::-1], evecs[:, ::-1]
    # The 1-d scale estimate is one-sided, so a reflected coordinate changes
    # the damping weights. Fix each sign by the largest-magnitude entry, a
    # choice that commutes with permuting the axes.
    lead = evecs[np.argmax(np.abs(evecs), axis=0), np.arange(n)]
    evecs = evecs * np.where(lead < 0, -1.0, 1.0)
    top = evals[0] if evals.size else 0.0
    rank = int(np.sum(evals > _RANK_RTOL * top)) if top > 0 else 0
    k = min(math.ceil(n / 2), rank)
    return evecs[:, :k], evecs[:, k:]


def _agnostic_mean(X: np.ndarray, cfg: AgnosticConfig, depth: int) -> tuple[np.ndarray, int]:
    m, n = X.shape
    ws = _preprocess(X, cfg)
    if n == 1:
        if ws.mode is Mode.GAUSSIAN_BASE:
            return np.median(ws.points, axis=0), depth
        return ws.points.mean(axis=0), depth
    mean, cov = _weighted_moments(ws)
    V, W = split_subspaces(cov)
    if V.shape[1] == 0:
        return mean, depth
    # the W part comes from the preprocessed sample, damping weights included
    src = ws.points if (cfg.recurse_on_kept and ws.mode is Mode.TRUNCATED) else X
    mu_V, reached = _agnostic_mean(src @ V, cfg, depth + 1)
    mu_W = mean @ W
    return V @ mu_V + W @ mu_W, reached


def agnostic_mean(S, cfg: AgnosticConfig | None = None, diagnostics: dict | None = None) -> np.ndarray:
    """Robust mean of a sample from a Gaussian with an ``eta`` fraction of bad points.

    Example:
        >>> agnostic_mean(np.array([[1.0], [2.0], [100.0]]))
        array([2.])
    """
    cfg = cfg or AgnosticConfig()
    X = _as_points(S)
    if X.shape[0] < 2:
        raise TooFewSamples("agnostic_mean needs at least two points")
    mu, depth = _agnostic_mean(X, cfg, 0)
    if diagnostics is not None:
        diagnostics["recursion_depth"] = depth
    return mu


def psd_clamp(A: np.ndarray) -> np.ndarray:
    """Symmetrise and lift eigenvalues below ``1e-8 * lambda_max`` to that floor."""
    A = (A + A.T) / 2
    evals, evecs = np.linalg.eigh(A)
    top = evals[-1]
    floor = PSD_RFLOOR * top if top > 0 else PSD_AFLOOR
    out = (evecs * np.maximum(evals, floor)) @ evecs.T
    return (out + out.T) / 2


def agnostic_cov(
    S,
    eta: float,
    cfg: AgnosticConfig | None = None,
    clamp: bool = True,
    branch: Branch = Branch.GENERAL,
) -> np.ndarray:
    """Robust covariance via pair differences and a robust mean in ``R^{n^2}``.

    The first ``m // 2`` points are paired with the next ``m // 2``; an odd
    last point is dropped. The flattened outer products go through
    :func:`agnostic_mean` with corruption fraction ``eta`` on ``branch``
    (truncation by default). With ``clamp=False`` the symmetrised estimate is
    returned unclamped.
    """
    cfg = cfg or AgnosticConfig()
    X = _as_points(S)
    m, n = X.shape
    if m < 4:
        raise TooFewSamples("agnostic_cov needs at least four points")
    half = m // 2
    diffs = (X[:half] - X[half : 2 * half]) / math.sqrt(2.0)
    outer = (diffs[:, :, None] * diffs[:, None, :]).reshape(half, n * n)
    inner = replace(cfg, eta=eta, branch=Branch(branch), recurse_on_kept=False)
    est = agnostic_mean(outer, inner).reshape(n, n)
    est = (est + est.T) / 2
    return psd_clamp(est) if clamp else est
