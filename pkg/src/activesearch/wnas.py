"""Weighted-neighbor engine: one-step label propagation kept as a ratio.

Each unlabeled point is scored by the label-weighted similarity mass of
the labeled set,

    f_i = sum_{j in L} y_j K(x_i, x_j)  /  sum_{j in L} |K(x_i, x_j)|,

the Nadaraya-Watson form with the dataset's dot product as the kernel.
Numerator and denominator are maintained separately, so folding in a new
label is one matrix-vector product ``X^T x_i`` (O(nr)) added into both
running sums. The absolute value in the denominator keeps the ratio
well-defined when similarities go negative; where no labeled mass has
arrived at all (den = 0) the score falls back to the prior pi, so
untouched regions rank by prevalence instead of being unrankable.

With nonnegative similarities the score reads as the probability that a
one-step walk from i lands on a positive labeled neighbor, which bounds it
to [0, 1]. There is no lookahead term here: an impact factor for this
estimator costs O(n^2) per iteration, so selection is plain argmax.
"""

from __future__ import annotations

import json

import numpy as np

from .dataset import Dataset
from .errors import ParameterError, SessionExhaustedError, StateError
from .params import HyperParams, LabelState

__all__ = ["WnasEngine", "SNAPSHOT_VERSION"]

SNAPSHOT_VERSION = 1

DEN_FLOOR = 1e-15


class WnasEngine:
    """Incremental weighted-neighbor scorer over a fixed feature matrix.

    Single-writer: ``update`` needs exclusive access; reads between writes
    are safe. ``num``/``den`` accumulate labeled-neighbor mass for the
    *unlabeled* entries only; labeled entries score as their own label.
    """

    name = "wnas"

    def __init__(self, d: Dataset, initial: dict[int, int] | None, h: HyperParams):
        self.X = d.X
        self.h = h
        self.n = d.n
        self.r = d.r
        self.iteration = 0
        self.labels = LabelState(self.n, h.pi, initial)
        self.num = np.zeros(self.n)
        self.den = np.zeros(self.n)
        unlabeled = ~self.labels.labeled_mask
        for j in self.labels.labeled_indices():
            s = self.X.T @ self.X[:, j]
            self.num[unlabeled] += self.labels.y_observed[j] * s[unlabeled]
            self.den[unlabeled] += np.abs(s[unlabeled])
        self.f = self._score()

    def _score(self) -> np.ndarray:
        f = np.where(self.den > DEN_FLOOR, self.num / np.maximum(self.den, DEN_FLOOR),
                     self.h.pi)
        mask = self.labels.labeled_mask
        f[mask] = self.labels.y_observed[mask]
        return f

    def update(self, i: int, y: int) -> None:
        """Fold in one observed label: one X^T x_i product added into the
        running sums of the points still unlabeled."""
        i = int(i)
        if self.labels.is_labeled(i):
            raise StateError(f"point {i} is already labeled")
        if y not in (0, 1):
            raise ParameterError(f"label must be 0 or 1, got {y!r}")
        self.labels.add_label(i, y)
        unlabeled = ~self.labels.labeled_mask
        s = self.X.T @ self.X[:, i]
        self.num[unlabeled] += y * s[unlabeled]
        self.den[unlabeled] += np.abs(s[unlabeled])
        self.f = self._score()
        self.iteration += 1

    def next_query(self) -> int:
        """Argmax of the score over the unlabeled set; ties go to the
        lowest index."""
        if self.labels.num_unlabeled == 0:
            raise SessionExhaustedError("no unlabeled points remain")
        scores = np.where(self.labels.labeled_mask, -np.inf, self.f)
        return int(np.argmax(scores))

    def snapshot(self) -> str:
        """Serialize resumable state (running sums + label partition) as
        versioned JSON. The feature matrix is not stored; restore() must be
        handed the same dataset."""
        return json.dumps({
            "version": SNAPSHOT_VERSION,
            "engine": self.name,
            "n": self.n,
            "r": self.r,
            "hyperparams": self.h.to_dict(),
            "iteration": self.iteration,
            "labeled": {str(i): int(y) for i, y in self.labels.labels_dict().items()},
            "num": self.num.tolist(),
            "den": self.den.tolist(),
        })

    @classmethod
    def restore(cls, doc: str, d: Dataset) -> "WnasEngine":
        state = json.loads(doc)
        if state.get("version") != SNAPSHOT_VERSION or state.get("engine") != cls.name:
            raise ParameterError("not a compatible engine snapshot")
        if state["n"] != d.n or state["r"] != d.r:
            raise ParameterError(
                f"snapshot is for a {state['r']}x{state['n']} dataset, got {d.r}x{d.n}"
            )
        h = HyperParams.from_dict(state["hyperparams"])
        eng = cls.__new__(cls)
        eng.X = d.X
        eng.h = h
        eng.n, eng.r = d.n, d.r
        eng.iteration = state["iteration"]
        eng.labels = LabelState(d.n, h.pi,
                                {int(i): y for i, y in state["labeled"].items()})
        eng.num = np.array(state["num"])
        eng.den = np.array(state["den"])
        eng.f = eng._score()
        return eng


def batch_state(d: Dataset, labeled: dict[int, int], h: HyperParams) -> tuple[np.ndarray, np.ndarray]:
    """Recompute (num, den) from scratch for a given label set.

    Reference for the incremental-equivalence property: valid on the
    unlabeled entries, which are the only ones scoring ever reads.
    """
    num = np.zeros(d.n)
    den = np.zeros(d.n)
    for j, y in labeled.items():
        s = d.X.T @ d.X[:, j]
        num += y * s
        den += np.abs(s)
    idx = np.fromiter(labeled.keys(), dtype=int, count=len(labeled))
    if idx.size:
        num[idx] = 0.0
        den[idx] = 0.0
    return num, den
