"""Point-set loading, validation, and preprocessing.

The canonical in-memory layout is a column-major feature matrix ``X`` of
shape (r features, n points): point ``i`` is the column ``X[:, i]``, so the
similarity between two points is the plain dot product ``X[:, i] @ X[:, j]``.
Every loader and transform returns a new :class:`Dataset`; nothing mutates
in place.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DataWarning, ParameterError, ParseError, ShapeError

__all__ = [
    "Dataset",
    "PreprocessSpec",
    "load_csv",
    "load_sparse",
    "save_csv",
    "unit_normalize",
    "one_hot",
    "append_bias",
    "discretize",
    "apply_preprocess",
    "subsample_to_prevalence",
]


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus optional ground-truth labels and display metadata.

    ``X`` is (r, n): r features, n points, all finite. ``labels`` (if given)
    holds the {0,1} ground truth used by simulated oracles. ``ids`` are
    unique opaque identifiers, one per point; ``meta`` optional display
    strings for a UI.
    """

    X: np.ndarray
    labels: np.ndarray | None = None
    ids: tuple[str, ...] = ()
    meta: tuple[str, ...] | None = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim != 2:
            raise ShapeError(f"X must be 2-d (features x points), got shape {X.shape}")
        r, n = X.shape
        if n < 1 or r < 1:
            raise ShapeError(f"need at least one point and one feature, got {r}x{n}")
        if not np.isfinite(X).all():
            bad = np.argwhere(~np.isfinite(X))[0]
            raise ParseError(f"non-finite value at feature {bad[0]}, point {bad[1]}")
        object.__setattr__(self, "X", X)
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (n,):
                raise ShapeError(f"labels must have length {n}, got {labels.shape}")
            vals = np.unique(labels)
            if not np.isin(vals, (0, 1)).all():
                raise ParameterError(f"labels must be 0/1, found values {vals[:5]}")
            object.__setattr__(self, "labels", labels.astype(np.int8))
        ids = tuple(self.ids) if self.ids else tuple(f"p{i}" for i in range(n))
        if len(ids) != n:
            raise ShapeError(f"need {n} ids, got {len(ids)}")
        if len(set(ids)) != n:
            raise ParameterError("point ids must be unique")
        object.__setattr__(self, "ids", ids)
        if self.meta is not None:
            meta = tuple(self.meta)
            if len(meta) != n:
                raise ShapeError(f"need {n} meta strings, got {len(meta)}")
            object.__setattr__(self, "meta", meta)

    @property
    def n(self) -> int:
        return self.X.shape[1]

    @property
    def r(self) -> int:
        return self.X.shape[0]

    @property
    def prevalence(self) -> float:
        """Fraction of positive points (requires ground-truth labels)."""
        if self.labels is None:
            raise ParameterError("dataset has no ground-truth labels")
        return float(self.labels.mean())

    def with_features(self, X: np.ndarray) -> "Dataset":
        """Same points (labels/ids/meta), new feature matrix."""
        if X.shape[1] != self.n:
            raise ShapeError(f"expected {self.n} points, got {X.shape[1]}")
        return Dataset(X=X, labels=self.labels, ids=self.ids, meta=self.meta)


@dataclass(frozen=True)
class PreprocessSpec:
    """Declarative preprocessing: which transforms to run, in data order.

    ``categorical`` lists feature-row indices to one-hot expand;
    ``discretize`` maps a feature-row index to its strictly increasing bin
    edges (continuous -> bin codes, which are then one-hot expanded too).
    """

    normalize: bool = False
    bias: bool = False
    categorical: tuple[int, ...] = ()
    discretize: dict[int, tuple[float, ...]] = field(default_factory=dict)

    def __post_init__(self):
        for col, edges in self.discretize.items():
            e = np.asarray(edges, dtype=float)
            if e.ndim != 1 or len(e) < 1 or not (np.diff(e) > 0).all():
                raise ParameterError(f"bin edges for column {col} must be strictly increasing")


def _parse_cell(token: str, line_no: int, col: int) -> float:
    token = token.strip()
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"non-numeric cell {token!r} at line {line_no}, column {col}") from None
    if not np.isfinite(value):
        raise ParseError(f"non-finite cell {token!r} at line {line_no}, column {col}")
    return value


def _parse_label(token: str, line_no: int, col: int) -> int:
    value = _parse_cell(token, line_no, col)
    if value not in (0.0, 1.0):
        raise ParseError(f"label must be 0 or 1, got {token!r} at line {line_no}, column {col}")
    return int(value)


def load_csv(
    path,
    has_labels: bool = False,
    label_column: int | None = None,
    categorical: tuple[int, ...] = (),
    has_header: bool = False,
    delimiter: str = ",",
) -> Dataset:
    """Load a delimited table, one point per file row.

    Each file row becomes one column of ``X``. Column indices (for
    ``label_column`` and ``categorical``) refer to the file's columns.
    Declared categorical columns may hold arbitrary strings and are one-hot
    expanded in sorted category order; all other columns must be finite
    numbers. Raises :class:`ParseError` naming the line/cell on any
    malformed input.
    """
    if has_labels and label_column is None:
        raise ParameterError("has_labels requires label_column")
    rows: list[list[str]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        for line_no, row in enumerate(reader, start=1):
            if has_header and line_no == 1:
                continue
            if not row or all(not c.strip() for c in row):
                continue
            rows.append([c for c in row])
            if len(rows[-1]) != len(rows[0]):
                raise ParseError(
                    f"ragged row at line {line_no}: expected {len(rows[0])} fields, got {len(row)}"
                )
    if not rows:
        raise ParseError(f"no rows in {path}")
    width = len(rows[0])
    cat_set = set(categorical)
    if has_labels:
        if label_column < 0:
            label_column += width
        if not 0 <= label_column < width:
            raise ParameterError(f"label_column {label_column} outside 0..{width - 1}")
        cat_set.discard(label_column)
    for col in cat_set:
        if not 0 <= col < width:
            raise ParameterError(f"categorical column {col} outside 0..{width - 1}")

    offset = 1 if has_header else 0
    labels = None
    if has_labels:
        labels = np.array(
            [_parse_label(row[label_column], i + 1 + offset, label_column)
             for i, row in enumerate(rows)],
            dtype=np.int8,
        )

    feature_cols = [c for c in range(width) if not (has_labels and c == label_column)]
    blocks: list[np.ndarray] = []
    for col in feature_cols:
        raw = [row[col] for row in rows]
        if col in cat_set:
            categories = sorted(set(v.strip() for v in raw))
            index = {cat: k for k, cat in enumerate(categories)}
            block = np.zeros((len(categories), len(rows)))
            for j, v in enumerate(raw):
                block[index[v.strip()], j] = 1.0
            blocks.append(block)
        else:
            blocks.append(np.array(
                [_parse_cell(v, j + 1 + offset, col) for j, v in enumerate(raw)]
            )[None, :])
    X = np.vstack(blocks)
    return Dataset(X=X, labels=labels)


def load_sparse(path, n_features: int | None = None) -> Dataset:
    """Load the whitespace-separated sparse format.

    One point per line: ``label idx:val idx:val ...`` with 0-based feature
    indices. The feature count is ``n_features`` if given, else the largest
    index seen plus one.
    """
    labels: list[int] = []
    entries: list[list[tuple[int, float]]] = []
    max_idx = -1
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            tokens = line.split()
            if not tokens:
                continue
            labels.append(_parse_label(tokens[0], line_no, 0))
            point = []
            for tok in tokens[1:]:
                if ":" not in tok:
                    raise ParseError(f"expected idx:val, got {tok!r} at line {line_no}")
                idx_s, val_s = tok.split(":", 1)
                try:
                    idx = int(idx_s)
                except ValueError:
                    raise ParseError(f"bad feature index {idx_s!r} at line {line_no}") from None
                if idx < 0:
                    raise ParseError(f"negative feature index at line {line_no}")
                point.append((idx, _parse_cell(val_s, line_no, idx)))
                max_idx = max(max_idx, idx)
            entries.append(point)
    if not entries:
        raise ParseError(f"no rows in {path}")
    r = n_features if n_features is not None else max_idx + 1
    if r < 1:
        raise ParseError("no features present and n_features not given")
    if max_idx >= r:
        raise ParseError(f"feature index {max_idx} outside declared dimension {r}")
    X = np.zeros((r, len(entries)))
    for j, point in enumerate(entries):
        for idx, val in point:
            X[idx, j] = val
    return Dataset(X=X, labels=np.array(labels, dtype=np.int8))


def save_csv(d: Dataset, path, include_labels: bool = True) -> None:
    """Write one point per row, features then (optionally) the label last.

    Floats are written with 17 significant digits so a reload reproduces
    ``X`` bit-exactly.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for j in range(d.n):
            row = [format(v, ".17g") for v in d.X[:, j]]
            if include_labels and d.labels is not None:
                row.append(str(int(d.labels[j])))
            writer.writerow(row)


def unit_normalize(d: Dataset) -> Dataset:
    """Scale every point to unit Euclidean length.

    Zero-length points are left unchanged (they simply never receive
    similarity mass) and counted in a :class:`DataWarning`.
    """
    norms = np.linalg.norm(d.X, axis=0)
    zero = norms == 0.0
    n_zero = int(zero.sum())
    if n_zero:
        warnings.warn(f"{n_zero} zero-norm point(s) left unnormalized", DataWarning)
    safe = np.where(zero, 1.0, norms)
    return d.with_features(d.X / safe)


def one_hot(d: Dataset, spec: PreprocessSpec) -> Dataset:
    """Expand the declared categorical feature rows into indicator rows.

    Categories are the distinct values of the row, in sorted order; an
    m-category row becomes m binary rows in its original position.
    """
    for col in spec.categorical:
        if not 0 <= col < d.r:
            raise ParameterError(f"categorical index {col} outside 0..{d.r - 1}")
    cat_set = set(spec.categorical)
    blocks = []
    for row_idx in range(d.r):
        row = d.X[row_idx]
        if row_idx in cat_set:
            categories = np.unique(row)
            blocks.append((row[None, :] == categories[:, None]).astype(np.float64))
        else:
            blocks.append(row[None, :])
    return d.with_features(np.vstack(blocks))


def discretize(d: Dataset, spec: PreprocessSpec) -> Dataset:
    """Replace declared continuous rows by their bin index (0..len(edges))."""
    X = d.X.copy()
    for col, edges in spec.discretize.items():
        if not 0 <= col < d.r:
            raise ParameterError(f"discretize index {col} outside 0..{d.r - 1}")
        X[col] = np.digitize(X[col], np.asarray(edges, dtype=float))
    return d.with_features(X)


def append_bias(d: Dataset) -> Dataset:
    """Append a constant-1 feature row. Warns if one is already present."""
    if any(np.all(d.X[i] == 1.0) for i in range(d.r)):
        warnings.warn("appending a bias row to data that already has a constant-1 row",
                      DataWarning)
    return d.with_features(np.vstack([d.X, np.ones((1, d.n))]))


def apply_preprocess(d: Dataset, spec: PreprocessSpec) -> Dataset:
    """Run the declared pipeline: discretize, one-hot, normalize, bias."""
    if spec.discretize:
        d = discretize(d, spec)
        spec = replace(spec, categorical=tuple(sorted(set(spec.categorical) | set(spec.discretize))))
    if spec.categorical:
        d = one_hot(d, spec)
    if spec.normalize:
        d = unit_normalize(d)
    if spec.bias:
        d = append_bias(d)
    return d


def subsample_to_prevalence(d: Dataset, target: float, seed: int = 0) -> Dataset:
    """Downsample the over-represented class until positives make up ``target``.

    Never duplicates points: whichever class is too large relative to the
    target prevalence is randomly thinned, the other kept whole.
    """
    if d.labels is None:
        raise ParameterError("subsampling to a prevalence requires ground-truth labels")
    if not 0.0 < target < 1.0:
        raise ParameterError(f"target prevalence must be in (0,1), got {target}")
    rng = np.random.default_rng(seed)
    pos = np.flatnonzero(d.labels == 1)
    neg = np.flatnonzero(d.labels == 0)
    if len(pos) == 0 or len(neg) == 0:
        raise ParameterError("both classes must be present")
    if d.prevalence > target:
        # too many positives: keep all negatives, thin positives
        keep_pos = int(round(target * len(neg) / (1.0 - target)))
        keep_pos = max(1, min(keep_pos, len(pos)))
        pos = rng.choice(pos, size=keep_pos, replace=False)
    else:
        # too many negatives: keep all positives, thin negatives
        keep_neg = int(round(len(pos) * (1.0 - target) / target))
        keep_neg = max(1, min(keep_neg, len(neg)))
        neg = rng.choice(neg, size=keep_neg, replace=False)
    idx = np.sort(np.concatenate([pos, neg]))
    return Dataset(
        X=d.X[:, idx],
        labels=d.labels[idx],
        ids=tuple(d.ids[i] for i in idx),
        meta=tuple(d.meta[i] for i in idx) if d.meta is not None else None,
    )
