"""Shared engine state: hyperparameters and the labeled/unlabeled partition.

All three engines consume the same soft-label model constants:

* ``lam`` -- trust in observed labels (larger = labeled scores pinned harder
  to their labels),
* ``w0`` -- trust in the prior for unlabeled points,
* ``pi`` -- prior probability of the positive class (also readable as a
  label-importance knob: small ``pi`` makes each positive label very
  informative),
* ``alpha`` -- weight of the one-step-lookahead impact term in the selection
  criterion.

``lam`` and ``w0`` may equivalently be given as transition probabilities
``eta`` and ``nu`` into the label-holding pseudo-nodes, related by
``lam = (1 - eta) / eta`` and ``w0 = nu``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, StateError


@dataclass(frozen=True)
class HyperParams:
    """Soft-label model constants shared by all engines."""

    lam: float = 1.0
    w0: float = 1.0
    pi: float = 0.5
    alpha: float = 1e-6
    eta: float | None = None
    nu: float | None = None

    def __post_init__(self):
        lam, w0 = self.lam, self.w0
        if self.eta is not None:
            if not 0.0 < self.eta < 1.0:
                raise ParameterError(f"eta must be in (0,1), got {self.eta}")
            derived = (1.0 - self.eta) / self.eta
            if abs(lam - derived) > 1e-12 and self.lam != HyperParams.__dataclass_fields__["lam"].default:
                raise ParameterError(
                    f"lambda={lam} inconsistent with eta={self.eta} (implies {derived})"
                )
            object.__setattr__(self, "lam", derived)
        if self.nu is not None:
            if not 0.0 < self.nu < 1.0:
                raise ParameterError(f"nu must be in (0,1), got {self.nu}")
            if abs(w0 - self.nu) > 1e-12 and self.w0 != HyperParams.__dataclass_fields__["w0"].default:
                raise ParameterError(f"w0={w0} inconsistent with nu={self.nu}")
            object.__setattr__(self, "w0", self.nu)
        if not self.lam > 0:
            raise ParameterError(f"lambda must be positive, got {self.lam}")
        if not self.w0 > 0:
            raise ParameterError(f"w0 must be positive, got {self.w0}")
        if not 0.0 <= self.pi <= 1.0:
            raise ParameterError(f"pi must be in [0,1], got {self.pi}")
        if not self.alpha >= 0:
            raise ParameterError(f"alpha must be nonnegative, got {self.alpha}")

    @property
    def b_labeled(self) -> float:
        """Diagonal entry of the label-mixing matrix for labeled points."""
        return self.lam / (1.0 + self.lam)

    @property
    def b_unlabeled(self) -> float:
        """Diagonal entry of the label-mixing matrix for unlabeled points."""
        return 1.0 / (1.0 + self.w0)

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "w0": self.w0, "pi": self.pi, "alpha": self.alpha}

    @classmethod
    def from_dict(cls, d: dict) -> "HyperParams":
        known = {"lambda": "lam", "lam": "lam", "w0": "w0", "pi": "pi",
                 "alpha": "alpha", "eta": "eta", "nu": "nu"}
        kwargs = {}
        for key, value in d.items():
            if key not in known:
                raise ParameterError(f"unknown hyperparameter {key!r}")
            kwargs[known[key]] = value
        return cls(**kwargs)


class LabelState:
    """Labeled/unlabeled index partition plus the observed labels.

    Maintains, for ``n`` points:

    * ``labeled_mask`` -- boolean, True where the label has been observed,
    * ``y_observed``   -- the observed {0,1} labels (valid where labeled),
    * ``yprime``       -- observed label where labeled, prior ``pi`` elsewhere,
    * ``u``            -- float {0,1} indicator of the unlabeled set.
    """

    def __init__(self, n: int, pi: float, initial: dict[int, int] | None = None):
        if n < 1:
            raise ParameterError(f"need at least one point, got n={n}")
        self.n = int(n)
        self.pi = float(pi)
        self.labeled_mask = np.zeros(n, dtype=bool)
        self.y_observed = np.zeros(n, dtype=np.int8)
        self.yprime = np.full(n, self.pi, dtype=np.float64)
        self.u = np.ones(n, dtype=np.float64)
        for i, y in (initial or {}).items():
            self.add_label(int(i), int(y))

    def add_label(self, i: int, y: int) -> None:
        if not 0 <= i < self.n:
            raise StateError(f"index {i} outside 0..{self.n - 1}")
        if self.labeled_mask[i]:
            raise StateError(f"point {i} is already labeled")
        if y not in (0, 1):
            raise ParameterError(f"label must be 0 or 1, got {y!r}")
        self.labeled_mask[i] = True
        self.y_observed[i] = y
        self.yprime[i] = float(y)
        self.u[i] = 0.0

    def is_labeled(self, i: int) -> bool:
        return bool(self.labeled_mask[i])

    @property
    def num_labeled(self) -> int:
        return int(self.labeled_mask.sum())

    @property
    def num_unlabeled(self) -> int:
        return self.n - self.num_labeled

    def labeled_indices(self) -> np.ndarray:
        return np.flatnonzero(self.labeled_mask)

    def unlabeled_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.labeled_mask)

    def labels_dict(self) -> dict[int, int]:
        return {int(i): int(self.y_observed[i]) for i in self.labeled_indices()}

    def copy(self) -> "LabelState":
        out = LabelState(self.n, self.pi)
        out.labeled_mask = self.labeled_mask.copy()
        out.y_observed = self.y_observed.copy()
        out.yprime = self.yprime.copy()
        out.u = self.u.copy()
        return out
