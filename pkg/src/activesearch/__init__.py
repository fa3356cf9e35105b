"""Rare-class active search: given feature vectors whose dot product is the
similarity, iteratively propose unlabeled points for labeling so positives
are found as fast as possible within a fixed budget.

Three engines share one protocol (``next_query`` / ``update`` / ``f``):

- :class:`AsgEngine`   dense reference; solves the full harmonic system
  each iteration. Exact but O(n^3)-ish, capped to small n.
- :class:`LasEngine`   scalable engine; same scores via an incrementally
  maintained r x r inverse, O(nr + r^2) per iteration.
- :class:`WnasEngine`  weighted-neighbor baseline; one-step label mass.

The harness runs simulated-oracle experiments and diagnostics; the service
exposes sessions over HTTP for human labeling.
"""

from .asg import AsgEngine, DenseGraph, build_graph, impact_dense, impact_naive, solve_f
from .dataset import (
    Dataset, PreprocessSpec, apply_preprocess, append_bias, discretize, load_csv,
    load_sparse, one_hot, save_csv, subsample_to_prevalence, unit_normalize,
)
from .errors import (
    ActiveSearchError, ConfigError, DataWarning, GraphCapError, NumericalError,
    NumericalWarning, ParameterError, ParseError, SessionExhaustedError, ShapeError,
    SingularImpactError, SingularUpdateError, StateError, ZeroDegreeError,
)
from .features import RffMap, median_heuristic, rff_fit, rff_transform
from .harness import (
    BenchRow, DatasetSpec, LemmaReport, ProbeResult, RecallCurve, RunConfig,
    emit_report, lemma_check, lemma_trials, make_engine, materialize,
    run_experiment, run_pairwise_probe, scaling_bench, summarize,
)
from .las import LasEngine, scale_impact
from .params import HyperParams, LabelState
from .service import create_app
from .synthetic import random_instance, swiss_roll, two_block, two_gaussians
from .wnas import WnasEngine

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # engines
    "AsgEngine", "LasEngine", "WnasEngine", "make_engine",
    # graph reference pieces
    "DenseGraph", "build_graph", "solve_f", "impact_dense", "impact_naive",
    "scale_impact",
    # data
    "Dataset", "PreprocessSpec", "load_csv", "load_sparse", "save_csv",
    "apply_preprocess", "unit_normalize", "one_hot", "discretize", "append_bias",
    "subsample_to_prevalence",
    # features
    "RffMap", "rff_fit", "rff_transform", "median_heuristic",
    # parameters
    "HyperParams", "LabelState",
    # synthetic data
    "two_gaussians", "swiss_roll", "random_instance", "two_block",
    # harness
    "DatasetSpec", "RunConfig", "RecallCurve", "LemmaReport", "ProbeResult",
    "BenchRow", "materialize", "run_experiment", "run_pairwise_probe",
    "lemma_check", "lemma_trials", "scaling_bench", "summarize", "emit_report",
    # service
    "create_app",
    # errors
    "ActiveSearchError", "ParseError", "ShapeError", "ParameterError",
    "ZeroDegreeError", "GraphCapError", "NumericalError", "SingularUpdateError",
    "SingularImpactError", "StateError", "SessionExhaustedError", "ConfigError",
    "NumericalWarning", "DataWarning",
]
