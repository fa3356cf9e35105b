"""Scalable linearized engine: incremental score propagation in feature space.

For a linear similarity ``A = X^T X`` the harmonic system never has to be
formed in point space. Writing ``R = B D^-1`` (diagonal) and
``q = (I - B) y'``, the score vector is

    f = q + R X^T K^-1 X q,        K = I_r - X R X^T,

so the only matrix ever inverted is the r x r ``K``. Labeling one point
changes a single diagonal entry of ``R`` (and of ``q``), which perturbs K by
a rank-one term ``gamma * x_i x_i^T``; ``K^-1`` is then patched with the
Sherman-Morrison formula in O(r^2), and ``f`` is recomputed by cascaded
matrix-vector products in O(nr). Initialization costs O(nr^2 + r^3); every
iteration after that costs O(nr + r^2).

The one-step-lookahead impact factor rides on the same quantities. In the
absorbing-walk form ``M = D + P - A``, relabeling candidate ``i`` positive
perturbs a single diagonal entry of both M and P, so the induced score
change is a scalar times column i of ``M^-1``. Everything the closed form
needs reduces to two maintained n-vectors:

    J_t = x_t^T K^-1 x_t        (diag of X^T K^-1 X; rank-one updatable)
    z   = R u                   (u = unlabeled indicator; one entry per step)

giving ``diag(M^-1) = (1 + rdiag * J) * rdiag`` and
``M^-1 u = z + R X^T K^-1 X z``.
"""

from __future__ import annotations

import json
import warnings

import numpy as np

from .dataset import Dataset
from .errors import (
    NumericalError,
    NumericalWarning,
    ParameterError,
    SessionExhaustedError,
    SingularImpactError,
    SingularUpdateError,
    StateError,
    ZeroDegreeError,
)
from .features import similarity_sanity_warning
from .params import HyperParams, LabelState

__all__ = ["LasEngine", "scale_impact", "SNAPSHOT_VERSION"]

SNAPSHOT_VERSION = 1


def scale_impact(im_raw: np.ndarray, f: np.ndarray, labels: LabelState) -> np.ndarray:
    """Rescale the raw impact vector to share the mean of f over the
    unlabeled set, so the selection weight alpha is dataset-independent.

    If the raw mean is (numerically) zero the vector is returned unscaled;
    there is nothing meaningful to normalize against.
    """
    if labels.num_unlabeled == 0:
        raise SessionExhaustedError("no unlabeled points remain")
    unlabeled = ~labels.labeled_mask
    mean_im = im_raw[unlabeled].mean()
    if abs(mean_im) <= 1e-15:
        return im_raw.copy()
    return im_raw * (f[unlabeled].mean() / mean_im)


class LasEngine:
    """Incremental engine over a fixed feature matrix.

    Single-writer: ``update``/``refresh`` need exclusive access; reads
    (``next_query`` previews, ``f`` snapshots) are safe between writes.
    Construction is O(nr^2 + r^3); every labeled point costs O(nr + r^2).

    Attributes mirror the maintained quantities: ``Kinv`` (r x r inverse),
    ``f`` (scores), ``q``, ``rdiag``, ``d`` (degrees), ``J``, ``z``, and
    ``labels`` (the partition). ``refresh_every`` bounds floating-point
    drift by periodically rebuilding ``Kinv``/``J`` from scratch.
    """

    name = "las"

    def __init__(self, d: Dataset, initial: dict[int, int] | None, h: HyperParams,
                 refresh_every: int = 500, similarity_check: bool = True):
        if refresh_every < 1:
            raise ParameterError(f"refresh_every must be positive, got {refresh_every}")
        self.X = d.X
        self.h = h
        self.n = d.n
        self.r = d.r
        self.refresh_every = refresh_every
        self.iteration = 0
        self.last_drift = 0.0

        self.d = self.X.T @ (self.X @ np.ones(self.n))
        zero = np.flatnonzero(self.d == 0.0)
        if zero.size:
            raise ZeroDegreeError(int(zero[0]))
        if similarity_check:
            similarity_sanity_warning(self.X)

        self.labels = LabelState(self.n, h.pi, initial)
        self.rdiag = np.where(self.labels.labeled_mask, h.b_labeled, h.b_unlabeled) / self.d
        self.q = (1.0 - np.where(self.labels.labeled_mask, h.b_labeled, h.b_unlabeled)) \
            * self.labels.yprime
        self.z = self.rdiag * self.labels.u
        self.Kinv = self._fresh_kinv()
        self.J = self._fresh_j()
        self.f = self._compute_f()

    # ---- initialization helpers -------------------------------------------------

    def _fresh_kinv(self) -> np.ndarray:
        K = np.eye(self.r) - (self.X * self.rdiag) @ self.X.T
        try:
            return np.linalg.inv(K)
        except np.linalg.LinAlgError as exc:
            cond = np.linalg.cond(K, 1)
            raise NumericalError(
                f"feature-space system is singular (condition estimate {cond:.2e})"
            ) from exc

    def _fresh_j(self) -> np.ndarray:
        return np.einsum("rn,rn->n", self.Kinv @ self.X, self.X)

    def _compute_f(self) -> np.ndarray:
        # f = q + R X^T K^-1 X q, evaluated right-to-left
        t = self.X @ self.q
        t = self.Kinv @ t
        return self.q + self.rdiag * (self.X.T @ t)

    # ---- per-iteration operations -----------------------------------------------

    def update(self, i: int, y: int) -> None:
        """Fold in one observed label: rank-one Kinv/J patches, pointwise
        q/rdiag/z edits, then a fresh O(nr) score pass."""
        i = int(i)
        if self.labels.is_labeled(i):
            raise StateError(f"point {i} is already labeled")
        if y not in (0, 1):
            raise ParameterError(f"label must be 0 or 1, got {y!r}")
        h = self.h
        gamma = -(h.b_labeled - h.b_unlabeled) / self.d[i]
        if gamma != 0.0:
            x_i = self.X[:, i]
            kx = self.Kinv @ x_i
            denom = 1.0 + gamma * (x_i @ kx)
            if abs(denom) < 1e-12:
                raise SingularUpdateError(
                    f"rank-one update denominator {denom:.2e} at point {i}; state unchanged"
                )
            c = gamma / denom
            self.Kinv -= c * np.outer(kx, kx)
            w = self.X.T @ kx
            self.J -= c * w * w

        self.labels.add_label(i, y)
        self.q[i] = y / (1.0 + h.lam)
        self.rdiag[i] = h.b_labeled / self.d[i]
        self.z[i] = 0.0
        self.f = self._compute_f()
        self.iteration += 1
        if self.iteration % self.refresh_every == 0:
            self.refresh()

    def impact(self) -> np.ndarray:
        """Raw one-step-lookahead impact for every unlabeled point, O(nr + r^2).

        For each candidate i (hypothetically labeled positive), this is
        f_i times the total score change over the other unlabeled points.
        Labeled entries are 0.
        """
        h = self.h
        lvec = self.d / h.lam
        uvec = h.w0 * self.d
        delta_p = lvec - uvec
        diag_minv = (1.0 + self.rdiag * self.J) * self.rdiag
        denom = 1.0 + delta_p * diag_minv
        bad = np.flatnonzero((np.abs(denom) < 1e-12) & ~self.labels.labeled_mask)
        if bad.size:
            raise SingularImpactError(int(bad[0]))
        dftilde = (lvec - h.pi * uvec - delta_p * self.f) * diag_minv / denom
        t = self.Kinv @ (self.X @ self.z)
        minv_u = self.z + self.rdiag * (self.X.T @ t)
        dF = (lvec - h.pi * uvec - delta_p * (self.f + dftilde)) * minv_u
        im = self.f * (dF - dftilde)
        im[self.labels.labeled_mask] = 0.0
        return im

    def next_query(self) -> int:
        """Argmax of f + alpha * (mean-rescaled impact) over the unlabeled
        set; ties go to the lowest index. alpha = 0 skips the impact
        computation entirely."""
        if self.labels.num_unlabeled == 0:
            raise SessionExhaustedError("no unlabeled points remain")
        if self.h.alpha == 0.0:
            scores = self.f
        else:
            im = scale_impact(self.impact(), self.f, self.labels)
            scores = self.f + self.h.alpha * im
        scores = np.where(self.labels.labeled_mask, -np.inf, scores)
        return int(np.argmax(scores))

    def refresh(self) -> None:
        """Rebuild Kinv/J/f from scratch; record the incremental drift and
        adopt the fresh values. Long sessions call this automatically every
        ``refresh_every`` updates."""
        kinv = self._fresh_kinv()
        drift_k = float(np.abs(self.Kinv - kinv).max())
        self.Kinv = kinv
        j = self._fresh_j()
        drift_j = float(np.abs(self.J - j).max())
        self.J = j
        self.last_drift = max(drift_k, drift_j)
        if self.last_drift > 1e-4:
            warnings.warn(
                f"incremental inverse drift {self.last_drift:.2e} exceeded 1e-4; "
                "fresh values adopted", NumericalWarning,
            )
        self.f = self._compute_f()

    # ---- diagnostics & persistence ----------------------------------------------

    def inverse_residual(self) -> float:
        """max |Kinv K - I|; cheap consistency probe used by tests and refresh audits."""
        K = np.eye(self.r) - (self.X * self.rdiag) @ self.X.T
        return float(np.abs(self.Kinv @ K - np.eye(self.r)).max())

    def snapshot(self) -> str:
        """Serialize the resumable state as a versioned JSON document.

        Fields: version; hyperparams (lambda/w0/pi/alpha); iteration /
        refresh_every counters; the label partition (labeled indices and
        their labels); and the maintained arrays d, rdiag, q, z, J, f and
        Kinv (row-major nested lists). The feature matrix is NOT stored --
        restore() must be handed the same dataset.
        """
        return json.dumps({
            "version": SNAPSHOT_VERSION,
            "engine": self.name,
            "n": self.n,
            "r": self.r,
            "hyperparams": self.h.to_dict(),
            "iteration": self.iteration,
            "refresh_every": self.refresh_every,
            "labeled": {str(i): int(y) for i, y in self.labels.labels_dict().items()},
            "d": self.d.tolist(),
            "rdiag": self.rdiag.tolist(),
            "q": self.q.tolist(),
            "z": self.z.tolist(),
            "J": self.J.tolist(),
            "f": self.f.tolist(),
            "Kinv": self.Kinv.tolist(),
        })

    @classmethod
    def restore(cls, doc: str, d: Dataset) -> "LasEngine":
        """Rebuild an engine from :meth:`snapshot` output plus its dataset."""
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
        eng.refresh_every = state["refresh_every"]
        eng.iteration = state["iteration"]
        eng.last_drift = 0.0
        eng.labels = LabelState(d.n, h.pi,
                                {int(i): y for i, y in state["labeled"].items()})
        eng.d = np.array(state["d"])
        eng.rdiag = np.array(state["rdiag"])
        eng.q = np.array(state["q"])
        eng.z = np.array(state["z"])
        eng.J = np.array(state["J"])
        eng.f = np.array(state["f"])
        eng.Kinv = np.array(state["Kinv"])
        return eng
