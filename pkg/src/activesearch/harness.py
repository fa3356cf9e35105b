"""Experiment harness: recall runs against a simulated oracle, pairwise
probes, the block-similarity bound checker, scaling benchmarks, and report
emission (delimited data plus rendered figures).

Everything here is deterministic given a config: engines are seeded only
through initialization choices, and all randomness flows from explicit
seeds. Identical configs produce bit-identical curves.
"""

from __future__ import annotations

import dataclasses
import json
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .asg import AsgEngine, DEFAULT_GRAPH_CAP, build_graph
from .dataset import Dataset, PreprocessSpec, apply_preprocess, load_csv, load_sparse
from .errors import ConfigError, DataWarning, ParameterError
from .features import median_heuristic, rff_fit, rff_transform
from .las import LasEngine
from .params import HyperParams
from .synthetic import random_instance, swiss_roll, two_block, two_gaussians
from .wnas import WnasEngine

__all__ = [
    "DatasetSpec", "RunConfig", "RecallCurve", "LemmaReport", "ProbeResult",
    "BenchRow", "make_engine", "materialize", "run_experiment",
    "run_pairwise_probe", "lemma_check", "scaling_bench", "summarize",
    "emit_report",
]

ENGINES = {"las": LasEngine, "wnas": WnasEngine, "asg": AsgEngine}
INIT_POLICIES = ("one-random-positive", "pos-neg-pair")


# ---- configuration ----------------------------------------------------------------


@dataclass(frozen=True)
class DatasetSpec:
    """Where the data comes from: a file on disk or a seeded generator.

    ``kind`` selects the source: "csv", "sparse", "two-gaussians",
    "swiss-roll", or "random". File kinds read ``path``; generator kinds
    use the numeric fields. ``preprocess`` (if given) is applied after
    loading, and the RFF fields on :class:`RunConfig` after that.
    """

    kind: str = "two-gaussians"
    path: str | None = None
    has_labels: bool = True
    label_column: int = 0
    has_header: bool = False
    delimiter: str = ","
    categorical: tuple[int, ...] = ()
    n: int = 5000
    r: int = 20
    prevalence: float = 0.01
    separation: float = 5.0
    seed: int = 0
    preprocess: PreprocessSpec | None = None

    def __post_init__(self):
        kinds = ("csv", "sparse", "two-gaussians", "swiss-roll", "random")
        if self.kind not in kinds:
            raise ConfigError(f"dataset kind must be one of {kinds}, got {self.kind!r}")
        if self.kind in ("csv", "sparse") and not self.path:
            raise ConfigError(f"dataset kind {self.kind!r} requires a path")
        if self.categorical:
            object.__setattr__(self, "categorical", tuple(self.categorical))

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        if self.preprocess is not None:
            pre = dataclasses.asdict(self.preprocess)
            pre["discretize"] = {str(k): list(v) for k, v in self.preprocess.discretize.items()} \
                if self.preprocess.discretize else {}
            out["preprocess"] = pre
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "DatasetSpec":
        doc = dict(doc)
        pre = doc.pop("preprocess", None)
        if pre is not None:
            pre = dict(pre)
            if "categorical" in pre:
                pre["categorical"] = tuple(pre["categorical"])
            if pre.get("discretize"):
                pre["discretize"] = {int(k): tuple(v) for k, v in pre["discretize"].items()}
            pre = PreprocessSpec(**pre)
        if "categorical" in doc:
            doc["categorical"] = tuple(doc["categorical"])
        return cls(preprocess=pre, **doc)


def materialize(spec: DatasetSpec) -> Dataset:
    """Load or generate the dataset a spec describes (without RFF)."""
    if spec.kind == "csv":
        d = load_csv(spec.path, has_labels=spec.has_labels,
                     label_column=spec.label_column, categorical=spec.categorical,
                     has_header=spec.has_header, delimiter=spec.delimiter)
    elif spec.kind == "sparse":
        d = load_sparse(spec.path)
    elif spec.kind == "two-gaussians":
        d = two_gaussians(spec.n, spec.r, spec.prevalence, spec.separation, spec.seed)
    elif spec.kind == "swiss-roll":
        d = swiss_roll(spec.n, spec.seed)
    else:
        d = random_instance(spec.n, spec.r, spec.seed, prevalence=spec.prevalence)
    if spec.preprocess is not None:
        d = apply_preprocess(d, spec.preprocess)
    return d


@dataclass(frozen=True)
class RunConfig:
    """One experiment: dataset, engine, hyperparameters, budget, seeds.

    ``rff_dim``/``rff_sigma`` (optional) re-featurize the loaded dataset
    with the random cosine map before the engine sees it; sigma accepts a
    bandwidth or the string "median" for the pairwise-distance heuristic.
    """

    dataset: DatasetSpec = field(default_factory=DatasetSpec)
    engine: str = "las"
    h: HyperParams = field(default_factory=HyperParams)
    T: int = 40
    seeds: tuple[int, ...] = (0,)
    init_policy: str = "one-random-positive"
    rff_dim: int | None = None
    rff_sigma: float | str | None = None
    rff_seed: int = 0

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ConfigError(f"engine must be one of {sorted(ENGINES)}, got {self.engine!r}")
        if self.T < 1:
            raise ConfigError(f"budget T must be >= 1, got {self.T}")
        seeds = tuple(int(s) for s in self.seeds)
        if not seeds:
            raise ConfigError("seeds must be nonempty")
        object.__setattr__(self, "seeds", seeds)
        if self.init_policy not in INIT_POLICIES:
            raise ConfigError(
                f"init_policy must be one of {INIT_POLICIES}, got {self.init_policy!r}")
        if self.rff_dim is not None:
            if self.rff_dim < 1:
                raise ConfigError(f"rff_dim must be positive, got {self.rff_dim}")
            if self.rff_sigma is None:
                raise ConfigError("rff runs require rff_sigma (a bandwidth or \"median\")")
            if isinstance(self.rff_sigma, str) and self.rff_sigma != "median":
                raise ConfigError(f"rff_sigma must be a number or \"median\", got {self.rff_sigma!r}")

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset.to_dict(),
            "engine": self.engine,
            "h": self.h.to_dict(),
            "T": self.T,
            "seeds": list(self.seeds),
            "init_policy": self.init_policy,
            "rff_dim": self.rff_dim,
            "rff_sigma": self.rff_sigma,
            "rff_seed": self.rff_seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        doc = dict(doc)
        ds = doc.pop("dataset", None)
        h = doc.pop("h", None)
        return cls(
            dataset=DatasetSpec.from_dict(ds) if ds else DatasetSpec(),
            h=HyperParams.from_dict(h) if h else HyperParams(),
            **doc,
        )


def prepare_dataset(cfg: RunConfig) -> Dataset:
    """Materialize the config's dataset, including the optional RFF step."""
    d = materialize(cfg.dataset)
    if cfg.rff_dim is not None:
        sigma = cfg.rff_sigma
        if sigma == "median":
            sigma = median_heuristic(d)
        m = rff_fit(d.r, cfg.rff_dim, float(sigma), cfg.rff_seed)
        d = rff_transform(m, d)
    return d


def make_engine(name: str, d: Dataset, initial: dict[int, int] | None, h: HyperParams):
    if name not in ENGINES:
        raise ConfigError(f"engine must be one of {sorted(ENGINES)}, got {name!r}")
    return ENGINES[name](d, initial, h)


# ---- recall experiments -----------------------------------------------------------


@dataclass(frozen=True)
class RecallCurve:
    """Per-seed run trace: cumulative positives found after each query,
    against the ideal line min(t, total positives) and the random baseline
    t * prevalence. Initially labeled points are not counted as found."""

    engine: str
    seed: int
    found: np.ndarray
    ideal: np.ndarray
    random_expect: np.ndarray
    iter_seconds: np.ndarray

    def __post_init__(self):
        found = np.asarray(self.found, dtype=np.int64)
        ideal = np.asarray(self.ideal, dtype=np.int64)
        rand = np.asarray(self.random_expect, dtype=np.float64)
        secs = np.asarray(self.iter_seconds, dtype=np.float64)
        if not (found.shape == ideal.shape == rand.shape == secs.shape):
            raise ParameterError("curve vectors must share one length")
        if found.size and np.any(np.diff(found) < 0):
            raise ParameterError("cumulative recall must be nondecreasing")
        if np.any(found > ideal):
            raise ParameterError("recall cannot exceed the ideal curve")
        for name, arr in (("found", found), ("ideal", ideal),
                          ("random_expect", rand), ("iter_seconds", secs)):
            object.__setattr__(self, name, arr)

    @property
    def T(self) -> int:
        return int(self.found.size)


def _initial_labels(d: Dataset, policy: str, rng: np.random.Generator) -> dict[int, int]:
    positives = np.flatnonzero(d.labels == 1)
    negatives = np.flatnonzero(d.labels == 0)
    if positives.size == 0:
        raise ConfigError("dataset has no positive points to initialize from")
    init = {int(rng.choice(positives)): 1}
    if policy == "pos-neg-pair":
        if negatives.size == 0:
            raise ConfigError("dataset has no negative points for pos-neg-pair init")
        init[int(rng.choice(negatives))] = 0
    return init


def _run_one_seed(cfg: RunConfig, d: Dataset, seed: int, budget: int) -> RecallCurve:
    rng = np.random.default_rng(seed)
    init = _initial_labels(d, cfg.init_policy, rng)
    engine = make_engine(cfg.engine, d, init, cfg.h)
    total_pos = int(d.labels.sum())
    prevalence = d.prevalence
    found = np.zeros(budget, dtype=np.int64)
    secs = np.zeros(budget)
    hits = 0
    for t in range(budget):
        t0 = time.perf_counter()
        i = engine.next_query()
        y = int(d.labels[i])
        engine.update(i, y)
        secs[t] = time.perf_counter() - t0
        hits += y
        found[t] = hits
    t_axis = np.arange(1, budget + 1)
    return RecallCurve(
        engine=cfg.engine, seed=seed, found=found,
        ideal=np.minimum(t_axis, total_pos),
        random_expect=t_axis * prevalence,
        iter_seconds=secs,
    )


def run_experiment(cfg: RunConfig, workers: int = 1) -> list[RecallCurve]:
    """Run the query loop against the ground-truth oracle, once per seed.

    Returns one curve per seed, in seed order. ``workers`` > 1 runs seeds
    on a thread pool (results are identical; only wall-clock timing vectors
    differ under contention).
    """
    d = prepare_dataset(cfg)
    if d.labels is None:
        raise ConfigError("recall experiments need a dataset with ground-truth labels")
    max_init = 1 if cfg.init_policy == "one-random-positive" else 2
    budget = cfg.T
    if budget > d.n - max_init:
        budget = d.n - max_init
        warnings.warn(
            f"budget {cfg.T} exceeds available unlabeled points; truncated to {budget}",
            DataWarning,
        )
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_one_seed, cfg, d, s, budget) for s in cfg.seeds]
            return [f.result() for f in futures]
    return [_run_one_seed(cfg, d, s, budget) for s in cfg.seeds]


def summarize(curves: list[RecallCurve]) -> dict:
    """Mean and sample standard deviation of recall at t = T//2 and t = T,
    grouped by engine (the table convention for reporting runs)."""
    if not curves:
        raise ParameterError("no curves to summarize")
    by_engine: dict[str, list[RecallCurve]] = {}
    for c in curves:
        by_engine.setdefault(c.engine, []).append(c)
    out = {}
    for engine, group in by_engine.items():
        T = min(c.T for c in group)
        half = max(T // 2, 1)
        stats = {}
        for label, t in (("half", half), ("end", T)):
            vals = np.array([c.found[t - 1] for c in group], dtype=float)
            std = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
            stats[label] = {"t": t, "mean": float(vals.mean()), "std": std}
        out[engine] = {
            "seeds": [c.seed for c in group],
            "T": T,
            "at_half": stats["half"],
            "at_end": stats["end"],
            "random_expect_end": float(group[0].random_expect[T - 1]),
            "ideal_end": int(group[0].ideal[T - 1]),
        }
    return out


# ---- pairwise probe ---------------------------------------------------------------


@dataclass(frozen=True)
class ProbeResult:
    """Positives in the top-100 by score after a one-positive/one-negative
    initialization, averaged over sampled pairs; pairs where both engines
    found zero are excluded as bad initializations."""

    las_mean: float
    wnas_mean: float
    las_counts: tuple[int, ...]
    wnas_counts: tuple[int, ...]
    pairs_sampled: int
    pairs_valid: int


def _top_k_positives(f: np.ndarray, d: Dataset, exclude: tuple[int, int], k: int) -> int:
    mask = np.ones(d.n, dtype=bool)
    mask[list(exclude)] = False
    idx = np.flatnonzero(mask)
    order = idx[np.argsort(-f[idx], kind="stable")][:k]
    return int(d.labels[order].sum())


def run_pairwise_probe(cfg: RunConfig, pairs: int = 100, k: int = 100) -> ProbeResult:
    """Sample (positive, negative) seed pairs; for each, initialize both
    ranking engines, score once, and count positives in the unlabeled
    top-k. The engine field of the config is ignored: the probe always
    compares the propagation engine against the weighted-neighbor one on
    identical pairs."""
    d = prepare_dataset(cfg)
    if d.labels is None or not (d.labels == 1).any():
        raise ConfigError("pairwise probe needs ground-truth labels with at least one positive")
    if not (d.labels == 0).any():
        raise ConfigError("pairwise probe needs at least one negative point")
    rng = np.random.default_rng(cfg.seeds[0])
    positives = np.flatnonzero(d.labels == 1)
    negatives = np.flatnonzero(d.labels == 0)
    las_counts, wnas_counts = [], []
    for _ in range(pairs):
        p = int(rng.choice(positives))
        q = int(rng.choice(negatives))
        init = {p: 1, q: 0}
        f_las = LasEngine(d, init, cfg.h, similarity_check=False).f
        f_wnas = WnasEngine(d, init, cfg.h).f
        las_counts.append(_top_k_positives(f_las, d, (p, q), k))
        wnas_counts.append(_top_k_positives(f_wnas, d, (p, q), k))
    las_arr = np.array(las_counts)
    wnas_arr = np.array(wnas_counts)
    valid = (las_arr > 0) | (wnas_arr > 0)
    if valid.sum() < pairs:
        warnings.warn(
            f"only {int(valid.sum())} of {pairs} pairs were valid "
            "(both engines found zero on the rest)", DataWarning,
        )
    if not valid.any():
        raise ConfigError("every sampled pair was a bad initialization")
    return ProbeResult(
        las_mean=float(las_arr[valid].mean()),
        wnas_mean=float(wnas_arr[valid].mean()),
        las_counts=tuple(int(v) for v in las_arr),
        wnas_counts=tuple(int(v) for v in wnas_arr),
        pairs_sampled=pairs,
        pairs_valid=int(valid.sum()),
    )


# ---- block-similarity bound -------------------------------------------------------


@dataclass(frozen=True)
class LemmaReport:
    """Near-block-diagonal propagation bound: if the cross-block similarity
    mass ||A2||_1 is small, the cross block of the inverse system matrix is
    small too, ||Minv_12||_1 < (1/(c d_min))^2 ||A2||_1 with
    c = min(1/lambda, w0). Also records the entrywise-nonnegativity check
    on the full inverse (the walk-probability reading)."""

    a2_norm1: float
    m12_norm1: float
    bound: float
    holds: bool
    minv_min: float
    stieltjes: bool

    @staticmethod
    def _holds(a2_norm1: float, m12_norm1: float, bound: float) -> bool:
        # Perfectly block similarity makes both sides exactly zero; the
        # system inverse stays block diagonal, which counts as holding even
        # though the strict inequality degenerates.
        if a2_norm1 == 0.0:
            return m12_norm1 <= 1e-12
        return m12_norm1 < bound

    def __post_init__(self):
        if self.holds != self._holds(self.a2_norm1, self.m12_norm1, self.bound):
            raise ParameterError("holds flag is inconsistent with the recorded norms")


def lemma_check(d: Dataset, block1: np.ndarray, block2: np.ndarray, h: HyperParams,
                labeled: dict[int, int] | None = None,
                cap: int = DEFAULT_GRAPH_CAP) -> LemmaReport:
    """Assemble the dense absorbing system M = D + P - A for a two-block
    partition, invert it, and compare the cross block of the inverse
    against the bound. Requires nonnegative similarities (the regime where
    M is a Stieltjes matrix) and dense-oracle scale."""
    g = build_graph(d, cap=cap)
    A, deg = g.A, g.d
    if A.min() < 0:
        raise ParameterError(
            f"bound check requires nonnegative similarities; min was {A.min():.3e}")
    block1 = np.asarray(block1, dtype=int)
    block2 = np.asarray(block2, dtype=int)
    ids = np.sort(np.concatenate([block1, block2]))
    if ids.size != d.n or np.any(ids != np.arange(d.n)):
        raise ParameterError("blocks must partition the point indices")
    labeled_mask = np.zeros(d.n, dtype=bool)
    if labeled:
        labeled_mask[list(labeled)] = True
    p_scale = np.where(labeled_mask, 1.0 / h.lam, h.w0)
    M = np.diag(deg + p_scale * deg) - A
    minv = np.linalg.inv(M)
    m12 = minv[np.ix_(block1, block2)]
    a2 = A[np.ix_(block1, block2)]
    c = min(1.0 / h.lam, h.w0)
    a2_norm1 = float(np.abs(a2).sum(axis=0).max()) if a2.size else 0.0
    m12_norm1 = float(np.abs(m12).sum(axis=0).max()) if m12.size else 0.0
    bound = float((1.0 / (c * deg.min())) ** 2 * a2_norm1)
    minv_min = float(minv.min())
    return LemmaReport(
        a2_norm1=a2_norm1, m12_norm1=m12_norm1, bound=bound,
        holds=LemmaReport._holds(a2_norm1, m12_norm1, bound), minv_min=minv_min,
        stieltjes=bool(minv_min >= -1e-10),
    )


def lemma_trials(n: int, r: int, trials: int, h: HyperParams, eps: float = 1e-3,
                 seed: int = 0) -> list[LemmaReport]:
    """Run the bound check on randomized two-block instances."""
    reports = []
    for t in range(trials):
        d, b1, b2 = two_block(n, r, eps, seed + t)
        reports.append(lemma_check(d, b1, b2, h))
    return reports


# ---- scaling benchmark ------------------------------------------------------------


@dataclass(frozen=True)
class BenchRow:
    n: int
    r: int
    init_seconds: float
    median_iter_seconds: float


def scaling_bench(r: int, n_list: list[int], iters: int = 30, seed: int = 0,
                  h: HyperParams | None = None) -> tuple[list[BenchRow], float]:
    """Time the incremental engine across dataset sizes at fixed dimension.

    For each n: generate the standard synthetic, time construction, then
    time ``iters`` full query-update iterations and take the median over
    iterations 10 and later (warm-up excluded). Returns the rows and the
    least-squares slope of median time vs n (seconds per point).
    """
    if iters < 12:
        raise ParameterError(f"need iters >= 12 to skip warm-up, got {iters}")
    h = h or HyperParams()
    rows = []
    for n in n_list:
        d = two_gaussians(n, r, prevalence=0.01, separation=5.0, seed=seed)
        t0 = time.perf_counter()
        engine = LasEngine(d, None, h, similarity_check=False)
        init_s = time.perf_counter() - t0
        times = np.zeros(iters)
        for t in range(iters):
            t0 = time.perf_counter()
            i = engine.next_query()
            engine.update(i, int(d.labels[i]))
            times[t] = time.perf_counter() - t0
        rows.append(BenchRow(n=n, r=r, init_seconds=init_s,
                             median_iter_seconds=float(np.median(times[9:]))))
    slope = 0.0
    if len(rows) > 1:
        ns = np.array([row.n for row in rows], dtype=float)
        ts = np.array([row.median_iter_seconds for row in rows])
        slope = float(np.polyfit(ns, ts, 1)[0])
    return rows, slope


# ---- report emission --------------------------------------------------------------


def emit_report(curves: list[RecallCurve], outdir, prefix: str = "curve",
                lemma_reports: list[LemmaReport] | None = None,
                render_figure: bool = True) -> list[Path]:
    """Write one CSV per curve, a JSON summary (mean and std at T/2 and T),
    a gnuplot-ready mean-curve .dat per engine, and a rendered recall
    figure. Returns the written paths."""
    if not curves:
        raise ParameterError("no curves to report")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    for c in curves:
        path = outdir / f"{prefix}_{c.engine}_seed{c.seed}.csv"
        with open(path, "w") as fh:
            fh.write("iter,recall,ideal,random\n")
            for t in range(c.T):
                fh.write(f"{t + 1},{c.found[t]},{c.ideal[t]},{c.random_expect[t]:.6g}\n")
        written.append(path)

    summary = summarize(curves)
    spath = outdir / f"{prefix}_summary.json"
    spath.write_text(json.dumps(summary, indent=2) + "\n")
    written.append(spath)

    by_engine: dict[str, list[RecallCurve]] = {}
    for c in curves:
        by_engine.setdefault(c.engine, []).append(c)
    for engine, group in by_engine.items():
        T = min(c.T for c in group)
        mean = np.mean([c.found[:T] for c in group], axis=0)
        dpath = outdir / f"{prefix}_{engine}_mean.dat"
        with open(dpath, "w") as fh:
            fh.write("# iter mean_recall ideal random_expect\n")
            for t in range(T):
                fh.write(f"{t + 1} {mean[t]:.6g} {group[0].ideal[t]} "
                         f"{group[0].random_expect[t]:.6g}\n")
        written.append(dpath)

    if lemma_reports:
        lpath = outdir / f"{prefix}_lemma.json"
        lpath.write_text(json.dumps([dataclasses.asdict(r) for r in lemma_reports],
                                    indent=2) + "\n")
        written.append(lpath)

    if render_figure:
        from .plotting import save_recall_figure
        fpath = outdir / f"{prefix}_recall.png"
        save_recall_figure(curves, fpath)
        written.append(fpath)
    return written
