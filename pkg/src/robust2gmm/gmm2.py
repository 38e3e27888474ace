"""Two-stage estimator for a noisy, imbalanced 2-GMM.

Estimate the dominant component robustly from the whole sample, rank every
point by Mahalanobis distance to it, keep the far ``1 - w1`` tail and run the
robust mean again on that tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, solve_triangular

from .agnostic import AgnosticConfig, Branch, agnostic_cov, agnostic_mean
from .errors import InvalidConfig, SingularCovariance, TooFewSamples
from .model import EstimationResult

SECOND_ETA_FACTOR = 0.75


@dataclass(frozen=True)
class Alg1Config:
    """Settings for :func:`estimate_alg1`.

    Attributes:
        w1_input: mixing weight handed to the algorithm (may differ from truth).
        agnostic: epsilon / damping constant shared by every robust call.
        first_branch: branch of the robust mean on the full sample, which
            treats component 2 plus noise as an ``eta = 1 - w1_input``
            corruption. Truncation keeps a ``~w1^2`` core of the sample and
            so locks onto the dominant mode; damping only suppresses far
            outliers and drifts toward the second component.
        second_branch: branch of the robust mean on the filtered tail.
        second_eta: corruption fraction assumed in the tail; ``None`` means
            ``(1 - w1_input) * 0.75``.
        cov_branch: branch of the robust mean inside the covariance estimate.
        recurse_on_kept: the first-pass mean recurses on its truncated core
            (see :class:`~robust2gmm.agnostic.AgnosticConfig`). The tail pass
            sees one Gaussian plus outliers and always recurses on its full
            input.
    """

    w1_input: float
    agnostic: AgnosticConfig = field(default_factory=AgnosticConfig)
    first_branch: Branch = Branch.GENERAL
    second_branch: Branch = Branch.GENERAL
    second_eta: Optional[float] = None
    cov_branch: Branch = Branch.GENERAL
    recurse_on_kept: bool = True

    def __post_init__(self):
        if not 0.0 < self.w1_input < 1.0:
            raise InvalidConfig(f"w1_input must lie in (0, 1), got {self.w1_input}")
        object.__setattr__(self, "first_branch", Branch(self.first_branch))
        object.__setattr__(self, "second_branch", Branch(self.second_branch))
        object.__setattr__(self, "cov_branch", Branch(self.cov_branch))

    @property
    def tail_eta(self) -> float:
        if self.second_eta is not None:
            return self.second_eta
        return (1.0 - self.w1_input) * SECOND_ETA_FACTOR

    def echo(self) -> dict:
        a = self.agnostic
        return {
            "w1_input": self.w1_input,
            "epsilon": a.epsilon,
            "damping_c": a.damping_c,
            "first_branch": self.first_branch.value,
            "first_eta": 1.0 - self.w1_input,
            "cov_eta": 1.0 - self.w1_input,
            "cov_branch": self.cov_branch.value,
            "second_branch": self.second_branch.value,
            "second_eta": self.tail_eta,
            "recurse_on_kept": self.recurse_on_kept,
            "rank_rule": "k = clamp(floor(m*w1 + 0.5), 1, m-1); keep y >= y_(k)",
        }


def mahalanobis_scores(X, mu, sigma) -> np.ndarray:
    """``(x - mu)^T sigma^{-1} (x - mu)`` per row, via a Cholesky solve."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    try:
        L, _ = cho_factor(np.asarray(sigma, dtype=float), lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularCovariance("covariance is not positive definite") from exc
    Z = solve_triangular(L, (X - mu).T, lower=True, check_finite=False)
    return np.sum(Z * Z, axis=0)


def rank_index(m: int, w1: float) -> int:
    return min(max(math.floor(m * w1 + 0.5), 1), m - 1)


def filter_mask(scores, w1: float) -> tuple[np.ndarray, float]:
    """Mask of scores at or above the ``k``-th smallest, and that cutoff."""
    scores = np.asarray(scores, dtype=float)
    m = scores.size
    if m < 2:
        raise TooFewSamples("filter needs at least two points")
    k = rank_index(m, w1)
    cutoff = float(np.partition(scores, k - 1)[k - 1])
    return scores >= cutoff, cutoff


def filter_top(X, scores, w1: float) -> np.ndarray:
    X = np.asarray(X)
    if X.shape[0] != np.size(scores):
        raise ValueError("points and scores differ in length")
    mask, _ = filter_mask(scores, w1)
    return X[mask]


def estimate_alg1(X, cfg: Alg1Config) -> EstimationResult:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    m, n = X.shape
    if m < max(4, n + 1):
        raise TooFewSamples(f"need at least max(4, n+1) = {max(4, n + 1)} points, got {m}")
    eta1 = 1.0 - cfg.w1_input
    base = replace(cfg.agnostic, recurse_on_kept=False)
    diag: dict = {}

    first_diag: dict = {}
    first = replace(base, eta=eta1, branch=cfg.first_branch, recurse_on_kept=cfg.recurse_on_kept)
    mu1 = agnostic_mean(X, first, first_diag)
    sigma = agnostic_cov(X, eta1, base, branch=cfg.cov_branch)
    scores = mahalanobis_scores(X, mu1, sigma)
    mask, cutoff = filter_mask(scores, cfg.w1_input)
    tail = X[mask]
    second_diag: dict = {}
    mu2 = agnostic_mean(tail, base.with_eta(cfg.tail_eta).with_branch(cfg.second_branch), second_diag)

    diag["filtered_size"] = int(mask.sum())
    diag["rank_k"] = rank_index(m, cfg.w1_input)
    diag["mahalanobis_cutoff"] = cutoff
    diag["recursion_depth_mu1"] = first_diag["recursion_depth"]
    diag["recursion_depth_mu2"] = second_diag["recursion_depth"]
    diag["filter_mask"] = mask
    return EstimationResult(mu1, mu2, sigma, diag)


def sensitivity_bound(
    w1_true: float,
    w1_input: float,
    w2: float,
    w3: float,
    sigma_scalar: float,
    n: int,
    epsilon: float,
    alpha_k: float = 1.0,
) -> float:
    """Bound on how far an estimate moves when ``w1`` is misreported (spherical case).

    ``alpha_k * ((|w1' - w1| + w3)/w2 + w3/(1 - w1') + epsilon) * sigma * sqrt(log n)``
    """
    term = (abs(w1_input - w1_true) + w3) / w2 + w3 / (1.0 - w1_input) + epsilon
    return alpha_k * term * sigma_scalar * math.sqrt(math.log(n))
