"""Core value types for a noisy two-component Gaussian mixture.

Points are stored as ``(m, n)`` float arrays throughout the package. Labels
are strings from :data:`LABELS`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    DimensionMismatch,
    NonPositiveDefiniteCovariance,
    WeightOrderViolation,
    WeightSumViolation,
)

G1, G2, NOISE = "G1", "G2", "NOISE"
LABELS = (G1, G2, NOISE)

WEIGHT_SUM_TOL = 1e-12
SYMMETRY_RTOL = 1e-10


@dataclass(frozen=True)
class MixtureModel:
    """Ground truth: ``w1 N(mu1, sigma) + w2 N(mu2, sigma) + w3 (arbitrary)``."""

    w1: float
    w2: float
    w3: float
    mu1: np.ndarray
    mu2: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mu1", np.asarray(self.mu1, dtype=float).ravel())
        object.__setattr__(self, "mu2", np.asarray(self.mu2, dtype=float).ravel())
        object.__setattr__(self, "sigma", np.atleast_2d(np.asarray(self.sigma, dtype=float)))
        for arr in (self.mu1, self.mu2, self.sigma):
            arr.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.mu1.shape[0]

    @property
    def weights(self) -> tuple[float, float, float]:
        return (self.w1, self.w2, self.w3)

    @classmethod
    def spherical(cls, w, mu1, mu2, sigma2: float = 1.0) -> "MixtureModel":
        mu1 = np.asarray(mu1, dtype=float)
        return cls(*w, mu1=mu1, mu2=mu2, sigma=sigma2 * np.eye(mu1.shape[0]))

    def to_dict(self) -> dict:
        return {
            "w1": self.w1,
            "w2": self.w2,
            "w3": self.w3,
            "mu1": self.mu1.tolist(),
            "mu2": self.mu2.tolist(),
            "sigma": self.sigma.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MixtureModel":
        return cls(
            float(d["w1"]),
            float(d["w2"]),
            float(d["w3"]),
            mu1=np.asarray(d["mu1"], dtype=float),
            mu2=np.asarray(d["mu2"], dtype=float),
            sigma=np.asarray(d["sigma"], dtype=float),
        )


@dataclass(frozen=True)
class Dataset:
    points: np.ndarray
    labels: Optional[np.ndarray] = None
    seed: Optional[int] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise DimensionMismatch(f"points must be a 2-d array, got shape {pts.shape}")
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=object)
            if labels.shape != (pts.shape[0],):
                raise DimensionMismatch(
                    f"{labels.shape[0]} labels for {pts.shape[0]} points"
                )
            bad = set(labels.tolist()) - set(LABELS)
            if bad:
                raise ValueError(f"unknown labels {sorted(bad)}")
            object.__setattr__(self, "labels", labels)

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def subset(self, label: str) -> np.ndarray:
        if self.labels is None:
            raise ValueError("dataset carries no labels")
        return self.points[self.labels == label]

    def counts(self) -> dict[str, int]:
        if self.labels is None:
            return {}
        return {lab: int(np.sum(self.labels == lab)) for lab in LABELS}


@dataclass
class EstimationResult:
    mu1_hat: np.ndarray
    mu2_hat: np.ndarray
    sigma_hat: Optional[np.ndarray] = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.mu1_hat = np.asarray(self.mu1_hat, dtype=float).ravel()
        self.mu2_hat = np.asarray(self.mu2_hat, dtype=float).ravel()
        if self.mu1_hat.shape != self.mu2_hat.shape:
            raise DimensionMismatch("mu1_hat and mu2_hat differ in dimension")
        if self.sigma_hat is not None:
            s = np.atleast_2d(np.asarray(self.sigma_hat, dtype=float))
            if not np.allclose(s, s.T, rtol=SYMMETRY_RTOL, atol=0.0):
                raise ValueError("sigma_hat is not symmetric")
            self.sigma_hat = s


def validate_model(model: MixtureModel) -> None:
    """Raise if ``model`` breaks any mixture invariant; return None otherwise."""
    w1, w2, w3 = model.weights
    # ties w1 == w2 are accepted: the balanced 20/20/1 motivating scenario has them
    if not (w1 >= w2 > w3 > 0):
        raise WeightOrderViolation(f"need w1 >= w2 > w3 > 0, got ({w1}, {w2}, {w3})")
    if abs(w1 + w2 + w3 - 1.0) > WEIGHT_SUM_TOL:
        raise WeightSumViolation(f"weights sum to {w1 + w2 + w3!r}")
    n = model.dim
    if model.mu2.shape != (n,) or model.sigma.shape != (n, n):
        raise DimensionMismatch(
            f"mu1 {model.mu1.shape}, mu2 {model.mu2.shape}, sigma {model.sigma.shape}"
        )
    s = model.sigma
    scale = max(np.max(np.abs(s)), np.finfo(float).tiny)
    if np.max(np.abs(s - s.T)) > SYMMETRY_RTOL * scale:
        raise NonPositiveDefiniteCovariance("sigma is not symmetric")
    if np.linalg.eigvalsh(s)[0] <= 0:
        raise NonPositiveDefiniteCovariance("sigma has a non-positive eigenvalue")


def matched_errors(
    mu1_hat, mu2_hat, mu1, mu2
) -> tuple[float, float, bool]:
    """Per-component errors under the better of the two assignments.

    Returns ``(err_mu1, err_mu2, swapped)``; ``swapped`` is True when
    ``mu2_hat`` was matched to ``mu1``.
    """
    mu1_hat, mu2_hat = np.asarray(mu1_hat, float), np.asarray(mu2_hat, float)
    mu1, mu2 = np.asarray(mu1, float), np.asarray(mu2, float)
    if not (mu1_hat.shape == mu2_hat.shape == mu1.shape == mu2.shape):
        raise DimensionMismatch("estimate and truth dimensions differ")
    straight = (np.linalg.norm(mu1_hat - mu1), np.linalg.norm(mu2_hat - mu2))
    crossed = (np.linalg.norm(mu2_hat - mu1), np.linalg.norm(mu1_hat - mu2))
    if sum(crossed) < sum(straight):
        return float(crossed[0]), float(crossed[1]), True
    return float(straight[0]), float(straight[1]), False


def estimation_error(est: EstimationResult, truth: MixtureModel) -> float:
    """Permutation-invariant error ``min_pi |mu_hat_pi(1)-mu1| + |mu_hat_pi(2)-mu2|``."""
    e1, e2, _ = matched_errors(est.mu1_hat, est.mu2_hat, truth.mu1, truth.mu2)
    return e1 + e2
