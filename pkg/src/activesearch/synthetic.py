"""Seeded synthetic datasets for experiments, benchmarks, and fixtures.

All generators return :class:`~activesearch.dataset.Dataset` objects with
ground-truth labels, deterministic for a given seed. Because the engines
use the raw dot product as similarity, every generator places points so
pairwise dot products stay (almost surely) positive: class structure is
encoded in the *direction* of the class centers, not in their magnitude,
on top of a shared offset into one halfspace.
"""

from __future__ import annotations

import numpy as np

from .dataset import Dataset
from .errors import ParameterError

__all__ = ["two_gaussians", "swiss_roll", "random_instance", "two_block"]


def _shared_offset_directions(r: int) -> tuple[np.ndarray, np.ndarray]:
    # u: shared offset direction; v: unit direction orthogonal to u along
    # which the two class centers separate. Keeping the separation
    # orthogonal to the offset makes within-class dot products exceed
    # cross-class ones by s^2/2 regardless of the offset magnitude.
    u = np.ones(r) / np.sqrt(r)
    v = np.zeros(r)
    v[0] = 1.0
    v -= (v @ u) * u
    v /= np.linalg.norm(v)
    return u, v


def two_gaussians(n: int, r: int, prevalence: float, separation: float,
                  seed: int, base: float = 1.5, sigma: float = 1.0) -> Dataset:
    """Rare-positive mixture of two spherical Gaussians.

    The positive class (``round(n * prevalence)`` points, at least one) and
    the negative class sit at centers ``separation * sigma`` apart along a
    direction orthogonal to a shared offset of ``base`` per coordinate, with
    isotropic noise ``sigma``. Point order is shuffled so classes are not
    contiguous.

    Parameters
    ----------
    n, r : int
        Number of points and feature dimension (r >= 2).
    prevalence : float
        Positive fraction, in (0, 1).
    separation : float
        Center distance in units of sigma.
    seed : int
        Seeds both the noise and the shuffle.
    base : float
        Shared per-coordinate offset keeping dot products positive.
    sigma : float
        Within-class standard deviation per coordinate.
    """
    if r < 2:
        raise ParameterError(f"need at least 2 features, got {r}")
    if not 0.0 < prevalence < 1.0:
        raise ParameterError(f"prevalence must be in (0, 1), got {prevalence}")
    n_pos = max(1, round(n * prevalence))
    if n_pos >= n:
        raise ParameterError("prevalence leaves no negative points")
    rng = np.random.default_rng(seed)
    u, v = _shared_offset_directions(r)
    center = base * np.sqrt(r) * u
    half = 0.5 * separation * sigma * v
    X = np.empty((r, n))
    labels = np.zeros(n, dtype=np.int8)
    labels[:n_pos] = 1
    X[:, :n_pos] = (center + half)[:, None] + sigma * rng.standard_normal((r, n_pos))
    X[:, n_pos:] = (center - half)[:, None] + sigma * rng.standard_normal((r, n - n_pos))
    order = rng.permutation(n)
    return Dataset(X=X[:, order], labels=labels[order])


def swiss_roll(n: int, seed: int, noise: float = 0.05) -> Dataset:
    """Two-class curled-manifold fixture in 3 features.

    Points lie on a spiral (angle t in [1.5pi, 4.5pi], radius t), lifted
    with a uniform height coordinate; the inner half of the spiral is the
    positive class. Coordinates are shifted into the positive orthant so
    dot products stay nonnegative. Useful for qualitative tests where
    propagation along the manifold differs from one-step neighbor voting.
    """
    rng = np.random.default_rng(seed)
    t = rng.uniform(1.5 * np.pi, 4.5 * np.pi, n)
    height = rng.uniform(0.0, 10.0, n)
    X = np.vstack([t * np.cos(t), height, t * np.sin(t)])
    X += noise * rng.standard_normal(X.shape)
    X -= X.min(axis=1, keepdims=True) - 0.5
    labels = (t < 3.0 * np.pi).astype(np.int8)
    return Dataset(X=X, labels=labels)


def random_instance(n: int, r: int, seed: int, nonnegative: bool = True,
                    prevalence: float = 0.1) -> Dataset:
    """Unstructured random dataset for equivalence and property tests.

    ``nonnegative=True`` draws features from U[0.1, 1.1] so every pairwise
    dot product is strictly positive (no zero degrees, walk interpretation
    valid); otherwise features are standard normal. Labels are iid
    Bernoulli(prevalence) with at least one positive and one negative
    forced.
    """
    rng = np.random.default_rng(seed)
    if nonnegative:
        X = rng.uniform(0.1, 1.1, (r, n))
    else:
        X = rng.standard_normal((r, n))
    labels = (rng.random(n) < prevalence).astype(np.int8)
    if labels.all() or not labels.any():
        labels[rng.integers(n)] = 1 - labels[0]
    return Dataset(X=X, labels=labels)


def two_block(n: int, r: int, eps: float, seed: int) -> tuple[Dataset, np.ndarray, np.ndarray]:
    """Nearly block-structured nonnegative instance for bound checks.

    Each half of the points is supported on its own half of the feature
    coordinates (values U[0.5, 1]), plus U[0, eps] bleed on the other half,
    so cross-block similarities are O(eps) while within-block ones are O(r).
    Returns the dataset and the two blocks' index arrays.
    """
    if r < 2 or n < 2:
        raise ParameterError(f"need n >= 2 and r >= 2, got n={n}, r={r}")
    rng = np.random.default_rng(seed)
    half_r = r // 2
    half_n = n // 2
    X = rng.uniform(0.0, eps, (r, n))
    X[:half_r, :half_n] = rng.uniform(0.5, 1.0, (half_r, half_n))
    X[half_r:, half_n:] = rng.uniform(0.5, 1.0, (r - half_r, n - half_n))
    labels = np.zeros(n, dtype=np.int8)
    labels[half_n:] = 1
    block1 = np.arange(half_n)
    block2 = np.arange(half_n, n)
    return Dataset(X=X, labels=labels), block1, block2
