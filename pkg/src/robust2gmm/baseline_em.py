"""Plain EM for a two-component Gaussian mixture (the comparison baseline)."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import DegenerateComponent, InvalidConfig, NonFiniteLikelihood, TooFewSamples
from .model import EstimationResult


class EmInit(str, enum.Enum):
    RANDOM_POINTS = "random_points"
    KMEANS_LIKE = "kmeans_like"


class CovarianceMode(str, enum.Enum):
    FULL_PER_COMPONENT = "full"
    SHARED = "shared"


@dataclass(frozen=True)
class EmConfig:
    k: int = 2
    max_iters: int = 1000
    tol: float = 1e-6
    reg: float = 1e-6
    init: EmInit = EmInit.RANDOM_POINTS
    seed: int = 0
    covariance_mode: CovarianceMode = CovarianceMode.FULL_PER_COMPONENT
    check_monotone: bool = False

    def __post_init__(self):
        object.__setattr__(self, "init", EmInit(self.init))
        object.__setattr__(self, "covariance_mode", CovarianceMode(self.covariance_mode))
        if self.k != 2:
            raise InvalidConfig("only k = 2 is supported")
        if self.max_iters < 1 or self.tol <= 0 or self.reg < 0:
            raise InvalidConfig("need max_iters >= 1, tol > 0, reg >= 0")

    def echo(self) -> dict:
        return {
            "k": self.k,
            "max_iters": self.max_iters,
            "tol": self.tol,
            "reg": self.reg,
            "init": self.init.value,
            "seed": self.seed,
            "covariance_mode": self.covariance_mode.value,
        }


def _log_gauss(X, mean, cov):
    n = X.shape[1]
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        return np.full(X.shape[0], -np.inf)
    Z = np.linalg.solve(L, (X - mean).T)
    logdet = 2.0 * np.sum(np.log(np.diag(L)))
    return -0.5 * (np.sum(Z * Z, axis=0) + logdet + n * np.log(2 * np.pi))


def _pooled_cov(X, reg):
    c = np.atleast_2d(np.cov(X.T, bias=True))
    return c + reg * np.eye(X.shape[1])


def _init_means(X, cfg: EmConfig, rng):
    m = X.shape[0]
    first = rng.integers(m)
    # second start must differ from the first
    others = np.flatnonzero(np.any(X != X[first], axis=1))
    if others.size == 0:
        raise DegenerateComponent("all points coincide")
    means = np.stack([X[first], X[rng.choice(others)]])
    if cfg.init is EmInit.KMEANS_LIKE:
        for _ in range(10):
            d = ((X[:, None, :] - means[None]) ** 2).sum(-1)
            lab = d.argmin(1)
            for j in range(2):
                if np.any(lab == j):
                    means[j] = X[lab == j].mean(0)
    return means


def estimate_em(X, cfg: EmConfig | None = None) -> EstimationResult:
    """Fit two Gaussians by EM and return the heavier component first.

    Diagnostics carry ``iterations``, ``log_likelihood``, the mixing
    ``weights``, ``ll_history`` and the number of component re-initialisations.
    """
    cfg = cfg or EmConfig()
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    m, n = X.shape
    if m < 2 * (n + 1):
        raise TooFewSamples(f"EM needs at least 2(n+1) = {2 * (n + 1)} points")
    rng = np.random.default_rng(cfg.seed)
    ridge = cfg.reg * np.eye(n)

    means = _init_means(X, cfg, rng)
    pooled = _pooled_cov(X, cfg.reg)
    covs = np.stack([pooled, pooled])
    pis = np.array([0.5, 0.5])
    history: list[float] = []
    fresh = True  # no previous likelihood to compare against
    reinits = 0
    converged = False
    it = 0
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for it in range(1, cfg.max_iters + 1):
            logp = np.stack([np.log(pis[j]) + _log_gauss(X, means[j], covs[j]) for j in range(2)], axis=1)
            ll_rows = logsumexp(logp, axis=1)
            ll = float(ll_rows.sum())
            if not np.isfinite(ll):
                raise NonFiniteLikelihood(f"log-likelihood became {ll} at iteration {it}")
            if not fresh:
                if cfg.check_monotone and ll < history[-1] - 1e-8:
                    raise AssertionError(f"log-likelihood decreased: {history[-1]} -> {ll}")
                if abs(ll - history[-1]) <= cfg.tol * abs(ll):
                    history.append(ll)
                    converged = True
                    break
            history.append(ll)
            fresh = False
            resp = np.exp(logp - ll_rows[:, None])

            nk = resp.sum(axis=0)
            starved = np.flatnonzero(nk < 1e-12)
            if starved.size:
                if reinits:
                    raise DegenerateComponent(f"component {starved[0]} lost all responsibility twice")
                reinits += 1
                for j in starved:
                    means[j] = X[rng.integers(m)]
                    covs[j] = pooled
                pis[:] = 0.5
                fresh = True
                continue

            pis = nk / m
            means = (resp.T @ X) / nk[:, None]
            for j in range(2):
                c = X - means[j]
                cj = (c * resp[:, j : j + 1]).T @ c / nk[j]
                covs[j] = (cj + cj.T) / 2
            if cfg.covariance_mode is CovarianceMode.SHARED:
                covs[:] = pis[0] * covs[0] + pis[1] * covs[1]
            covs += ridge
            if not (np.all(np.isfinite(means)) and np.all(np.isfinite(covs))):
                raise NonFiniteLikelihood(f"parameters became non-finite at iteration {it}")

    order = np.argsort(-pis, kind="stable")
    means, covs, pis = means[order], covs[order], pis[order]
    # weight-averaged covariance; equals the tied one in SHARED mode
    sigma_hat = pis[0] * covs[0] + pis[1] * covs[1]
    diag = {
        "iterations": it,
        "converged": converged,
        "log_likelihood": history[-1],
        "weights": pis.tolist(),
        "reinitialisations": reinits,
        "ll_history": history,
        "covariances": covs,
    }
    return EstimationResult(means[0], means[1], sigma_hat, diag)
