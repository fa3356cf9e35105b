"""Dense reference engine: exact graph-based score propagation.

This is the naive O(n^2)-memory, O(n^3)-time route: materialize the full
similarity graph, solve the soft-label harmonic system directly every
iteration, and compute the one-step-lookahead impact factor by literally
relabeling each candidate and re-solving. It is deliberately slow and
simple; the scalable engine in :mod:`activesearch.las` is required to
reproduce its scores and query choices exactly, so everything here doubles
as a correctness oracle.

The score vector ``f`` minimizes the soft-label harmonic energy

    sum_L (y_i - f_i)^2 D_ii
      + lam * (w0 * sum_U (f_i - pi)^2 D_ii + sum_ij (f_i - f_j)^2 A_ij)

whose stationary condition is ``(I - B D^-1 A) f = (I - B) y'`` with the
diagonal label-mixing matrix B (lam/(1+lam) on labeled entries, 1/(1+w0) on
unlabeled ones) and y' carrying observed labels or the prior pi. With
nonnegative similarities, f_i is the probability that a random walk from
point i is absorbed at a positive label-holding node before a negative one.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .dataset import Dataset
from .errors import (
    GraphCapError,
    NumericalWarning,
    SessionExhaustedError,
    StateError,
    ZeroDegreeError,
)
# Both engines apply the identical mean rescaling so rankings stay comparable.
from .las import scale_impact
from .params import HyperParams, LabelState

__all__ = [
    "DenseGraph",
    "build_graph",
    "solve_f",
    "impact_naive",
    "impact_dense",
    "select_query",
    "soft_label_system",
    "AsgEngine",
    "DEFAULT_GRAPH_CAP",
]

DEFAULT_GRAPH_CAP = 5000


@dataclass(frozen=True)
class DenseGraph:
    """Dense adjacency A (n x n, A_ij = x_i . x_j) and degree vector d."""

    A: np.ndarray
    d: np.ndarray

    @property
    def n(self) -> int:
        return self.A.shape[0]


def build_graph(d: Dataset, cap: int = DEFAULT_GRAPH_CAP) -> DenseGraph:
    """Materialize the similarity-induced graph. Refuses oversized inputs:
    this module exists for exactness, not scale."""
    if d.n > cap:
        raise GraphCapError(
            f"dense reference graph capped at {cap} points, got {d.n}; "
            "use the linearized engine for large instances"
        )
    A = d.X.T @ d.X
    return DenseGraph(A=A, d=A.sum(axis=1))


def _check_degrees(degrees: np.ndarray) -> None:
    zero = np.flatnonzero(degrees == 0.0)
    if zero.size:
        raise ZeroDegreeError(int(zero[0]))


def _b_diag(s: LabelState, h: HyperParams) -> np.ndarray:
    return np.where(s.labeled_mask, h.b_labeled, h.b_unlabeled)


def solve_f(g: DenseGraph, s: LabelState, h: HyperParams) -> np.ndarray:
    """Exact minimizer of the soft-label energy by one dense factorization.

    Solves (I - B D^-1 A) f = (I - B) y' with partial pivoting. Attaches a
    :class:`NumericalWarning` when the 1-norm condition estimate exceeds
    1e12 or the residual exceeds 1e-9; those results are still returned.
    """
    _check_degrees(g.d)
    b = _b_diag(s, h)
    G = -(b / g.d)[:, None] * g.A
    G[np.diag_indices_from(G)] += 1.0
    rhs = (1.0 - b) * s.yprime

    lu, piv = scipy.linalg.lu_factor(G)
    anorm = np.abs(G).sum(axis=0).max()
    rcond, _ = scipy.linalg.lapack.dgecon(lu, anorm, norm="1")
    if rcond > 0 and 1.0 / rcond > 1e12:
        warnings.warn(f"propagation system condition estimate {1.0 / rcond:.2e} > 1e12",
                      NumericalWarning)
    f = scipy.linalg.lu_solve((lu, piv), rhs)
    residual = np.abs(G @ f - rhs).max()
    if residual > 1e-9:
        warnings.warn(f"propagation solve residual {residual:.2e} > 1e-9", NumericalWarning)
    return f


def soft_label_system(g: DenseGraph, s: LabelState, h: HyperParams):
    """Absorbing-walk form of the same system: M = D + P - A and diag(P).

    P scales degrees by 1/lam on labeled points and w0 on unlabeled ones;
    M is symmetric diagonally dominant with non-positive off-diagonals, so
    its inverse is entrywise nonnegative, and M 1 = P 1 makes the rows of
    M^-1 P a probability distribution whenever A is nonnegative.
    """
    _check_degrees(g.d)
    p = np.where(s.labeled_mask, 1.0 / h.lam, h.w0) * g.d
    M = -g.A.copy()
    M[np.diag_indices_from(M)] += g.d + p
    return M, p


def impact_naive(g: DenseGraph, s: LabelState, h: HyperParams, f: np.ndarray) -> np.ndarray:
    """Brute-force impact factor: relabel each candidate positive, re-solve,
    and sum the score change over the other unlabeled points.

    Entries for labeled points are 0. This is the ground truth the fast
    closed-form route must match; it costs a full dense solve per unlabeled
    point and is only for verification scale.
    """
    im = np.zeros(g.n)
    for i in s.unlabeled_indices():
        trial = s.copy()
        trial.add_label(int(i), 1)
        f_plus = solve_f(g, trial, h)
        others = trial.unlabeled_indices()
        im[i] = f[i] * (f_plus[others] - f[others]).sum()
    return im


def impact_dense(g: DenseGraph, s: LabelState, h: HyperParams, f: np.ndarray) -> np.ndarray:
    """Impact factor from one fresh dense inverse of M, no incremental state.

    Relabeling candidate i positive perturbs M and P in the single diagonal
    entry i, so the score change is a scalar multiple of the i-th column of
    M^-1; summing those changes over the unlabeled set needs only diag(M^-1)
    and M^-1 u. Equals :func:`impact_naive` up to roundoff while costing one
    O(n^3) inverse per call instead of n dense solves, which is what makes
    full-session equivalence runs against the scalable engine affordable.
    """
    M, _ = soft_label_system(g, s, h)
    Minv = np.linalg.inv(M)
    lvec = g.d / h.lam
    uvec = h.w0 * g.d
    delta_p = lvec - uvec
    diag_minv = np.diag(Minv)
    dftilde = (lvec - h.pi * uvec - delta_p * f) * diag_minv / (1.0 + delta_p * diag_minv)
    minv_u = Minv @ s.u
    dF = (lvec - h.pi * uvec - delta_p * (f + dftilde)) * minv_u
    im = f * (dF - dftilde)
    im[s.labeled_mask] = 0.0
    return im


def select_query(f: np.ndarray, im: np.ndarray, s: LabelState, h: HyperParams) -> int:
    """Argmax of f + alpha * im over the unlabeled set; ties go to the
    lowest index. ``im`` must already carry the engine's mean rescaling so
    rankings are comparable across engines."""
    if s.num_unlabeled == 0:
        raise SessionExhaustedError("no unlabeled points remain")
    scores = f + h.alpha * im
    scores = np.where(s.labeled_mask, -np.inf, scores)
    return int(np.argmax(scores))


class AsgEngine:
    """Session driver for the dense reference path.

    Re-solves the full system every iteration and recomputes the impact
    factor fresh (dense closed form by default, literal relabel-and-resolve
    with ``impact_mode="naive"``). No state is carried between iterations
    beyond the label partition, which is the point: this engine is the
    slow, trustworthy baseline the incremental one is checked against.
    """

    name = "asg"

    def __init__(self, d: Dataset, initial: dict[int, int] | None, h: HyperParams,
                 cap: int = DEFAULT_GRAPH_CAP, impact_mode: str = "dense"):
        if impact_mode not in ("dense", "naive"):
            raise StateError(f"unknown impact mode {impact_mode!r}")
        self.graph = build_graph(d, cap=cap)
        self.h = h
        self.labels = LabelState(d.n, h.pi, initial)
        self.impact_mode = impact_mode
        self.iteration = 0
        self._refresh()

    def _refresh(self) -> None:
        self.f = solve_f(self.graph, self.labels, self.h)
        if self.h.alpha == 0.0:
            self.im_scaled = np.zeros(self.graph.n)
        else:
            compute = impact_dense if self.impact_mode == "dense" else impact_naive
            raw = compute(self.graph, self.labels, self.h, self.f)
            self.im_scaled = scale_impact(raw, self.f, self.labels)

    def next_query(self) -> int:
        return select_query(self.f, self.im_scaled, self.labels, self.h)

    def update(self, i: int, y: int) -> None:
        self.labels.add_label(i, y)
        self.iteration += 1
        self._refresh()
