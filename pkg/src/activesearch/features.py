"""Explicit kernel-space featurization via random Fourier features.

Maps points ``x`` to ``phi(x) = sqrt(2/D) * cos(W x + b)`` with frequencies
``W`` drawn Gaussian at scale ``1/sigma`` and phases ``b`` uniform on
[0, 2pi). Dot products of the mapped features are unbiased estimates of the
Gaussian kernel ``exp(-||x - y||^2 / (2 sigma^2))``, so downstream engines
can keep treating similarity as a plain dot product.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import DataWarning, ParameterError, ShapeError

__all__ = [
    "RffMap",
    "rff_fit",
    "rff_transform",
    "median_heuristic",
    "negative_pair_fraction",
    "similarity_sanity_warning",
]


@dataclass(frozen=True)
class RffMap:
    """Frozen random feature map; fully determined by (seed, dim, input_dim, sigma)."""

    W: np.ndarray
    b: np.ndarray
    dim: int
    input_dim: int
    sigma: float
    seed: int

    def to_json(self) -> str:
        """Tiny reproducible form: the matrices are regenerated, not stored."""
        return json.dumps({
            "version": 1,
            "kind": "rff",
            "seed": self.seed,
            "dim": self.dim,
            "input_dim": self.input_dim,
            "sigma": self.sigma,
        })

    @classmethod
    def from_json(cls, text: str) -> "RffMap":
        doc = json.loads(text)
        if doc.get("kind") != "rff" or doc.get("version") != 1:
            raise ParameterError("not a version-1 rff map document")
        return rff_fit(doc["input_dim"], doc["dim"], doc["sigma"], doc["seed"])


def rff_fit(input_dim: int, dim: int, sigma: float, seed: int = 0) -> RffMap:
    """Draw a deterministic feature map: same arguments, same matrices."""
    if dim < 1:
        raise ParameterError(f"output dimension must be >= 1, got {dim}")
    if input_dim < 1:
        raise ParameterError(f"input dimension must be >= 1, got {input_dim}")
    if not sigma > 0:
        raise ParameterError(f"bandwidth sigma must be positive, got {sigma}")
    rng = np.random.default_rng(seed)
    W = rng.normal(0.0, 1.0 / sigma, size=(dim, input_dim))
    b = rng.uniform(0.0, 2.0 * np.pi, size=dim)
    return RffMap(W=W, b=b, dim=dim, input_dim=input_dim, sigma=float(sigma), seed=int(seed))


def rff_transform(m: RffMap, d: Dataset) -> Dataset:
    """Apply the map to every point; output dimension is ``m.dim``."""
    if d.r != m.input_dim:
        raise ShapeError(f"map expects {m.input_dim}-dimensional points, dataset has {d.r}")
    phi = np.sqrt(2.0 / m.dim) * np.cos(m.W @ d.X + m.b[:, None])
    return d.with_features(phi)


def median_heuristic(d: Dataset, sample: int = 1000, seed: int = 0) -> float:
    """Median pairwise distance over a point sample; a serviceable default sigma."""
    rng = np.random.default_rng(seed)
    n = d.n
    take = min(sample, n)
    idx = rng.choice(n, size=take, replace=False)
    S = d.X[:, idx]
    sq = (S * S).sum(axis=0)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (S.T @ S)
    iu = np.triu_indices(take, k=1)
    if iu[0].size == 0:
        raise ParameterError("median heuristic needs at least two points")
    med = float(np.median(np.sqrt(np.maximum(d2[iu], 0.0))))
    if med == 0.0:
        raise ParameterError("median pairwise distance is zero; data are degenerate")
    return med


def negative_pair_fraction(X: np.ndarray, pairs: int = 1000, seed: int = 0) -> float:
    """Fraction of negative dot products over a random sample of point pairs."""
    n = X.shape[1]
    if n < 2:
        return 0.0
    rng = np.random.default_rng(seed)
    i = rng.integers(0, n, size=pairs)
    j = rng.integers(0, n, size=pairs)
    clash = i == j
    j[clash] = (j[clash] + 1) % n
    sims = np.einsum("ri,ri->i", X[:, i], X[:, j])
    return float((sims < 0.0).mean())


def similarity_sanity_warning(X: np.ndarray, threshold: float = 0.01) -> float:
    """Warn when too many sampled pairwise similarities are negative.

    Negative similarities are legal for the engines' algebra but void the
    random-walk reading of the scores; a diagnostic keeps this visible.
    Returns the sampled fraction.
    """
    frac = negative_pair_fraction(X)
    if frac > threshold:
        warnings.warn(
            f"{frac:.1%} of sampled pairwise similarities are negative; "
            "scores no longer have a random-walk interpretation",
            DataWarning,
        )
    return frac
