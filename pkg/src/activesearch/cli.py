"""Command-line front end.

Subcommands:

    run     recall experiment against the ground-truth oracle; writes CSV
            curves, JSON summary, gnuplot .dat files, and a rendered figure
    probe   pairwise top-100 comparison of the two ranking engines
    lemma   randomized trials of the block-similarity bound
    bench   per-iteration scaling benchmark across dataset sizes
    report  re-render summary/figure from stored curve CSVs
    serve   start the HTTP labeling service

``--config FILE`` loads a JSON document mirroring RunConfig; explicit
flags override fields from the file.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import re
import sys
from pathlib import Path

import numpy as np

from .dataset import PreprocessSpec
from .errors import ActiveSearchError
from .harness import (
    DatasetSpec, RecallCurve, RunConfig, emit_report, lemma_trials,
    run_experiment, run_pairwise_probe, scaling_bench, summarize,
)
from .params import HyperParams

__all__ = ["main"]


def _add_dataset_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("dataset")
    g.add_argument("--dataset", metavar="CSV", help="labeled CSV file, one point per row")
    g.add_argument("--sparse", metavar="FILE", help="sparse 'label idx:val ...' file")
    g.add_argument("--synthetic", choices=["two-gaussians", "swiss-roll", "random"],
                   help="generate data instead of loading")
    g.add_argument("--n", type=int, help="synthetic: number of points")
    g.add_argument("--r", type=int, help="synthetic: feature dimension")
    g.add_argument("--prevalence", type=float, help="synthetic: positive fraction")
    g.add_argument("--separation", type=float, help="synthetic: center distance in sigmas")
    g.add_argument("--data-seed", type=int, help="synthetic: generator seed")
    g.add_argument("--label-column", type=int, help="CSV: label column (default 0)")
    g.add_argument("--has-header", action="store_true", help="CSV: skip first row")
    g.add_argument("--delimiter", help="CSV: field delimiter (default ,)")
    g.add_argument("--categorical", metavar="COLS",
                   help="CSV: comma-separated column indices to one-hot")
    g.add_argument("--normalize", action="store_true",
                   help="scale each point to unit length")
    g.add_argument("--bias", action="store_true", help="append a constant-1 feature")
    g.add_argument("--rff-dim", type=int, help="random cosine features: output dimension")
    g.add_argument("--rff-sigma", help="random cosine features: bandwidth or 'median'")
    g.add_argument("--rff-seed", type=int, help="random cosine features: seed")


def _add_hyper_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("hyperparameters")
    g.add_argument("--lambda", dest="lam", type=float, help="label trust (default 1.0)")
    g.add_argument("--w0", type=float, help="prior trust (default 1.0)")
    g.add_argument("--pi", type=float, help="positive prior (default 0.5)")
    g.add_argument("--alpha", type=float, help="impact weight (default 1e-6)")


def _parse_seeds(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(",") if tok.strip() != "")


def _dataset_overrides(args) -> dict:
    out: dict = {}
    if args.dataset:
        out["kind"] = "csv"
        out["path"] = args.dataset
    elif args.sparse:
        out["kind"] = "sparse"
        out["path"] = args.sparse
    elif args.synthetic:
        out["kind"] = args.synthetic
    for name in ("n", "r", "prevalence", "separation", "label_column", "delimiter"):
        val = getattr(args, name)
        if val is not None:
            out[name] = val
    if args.data_seed is not None:
        out["seed"] = args.data_seed
    if args.has_header:
        out["has_header"] = True
    if args.categorical:
        out["categorical"] = tuple(int(c) for c in args.categorical.split(","))
    if args.normalize or args.bias:
        out["preprocess"] = PreprocessSpec(normalize=args.normalize, bias=args.bias)
    return out


def _build_config(args) -> RunConfig:
    base: dict = {}
    if getattr(args, "config", None):
        base = json.loads(Path(args.config).read_text())
    cfg = RunConfig.from_dict(base) if base else RunConfig()

    ds_over = _dataset_overrides(args)
    if ds_over:
        dataset = dataclasses.replace(cfg.dataset, **{
            k: v for k, v in ds_over.items() if k != "preprocess"})
        if "preprocess" in ds_over:
            dataset = dataclasses.replace(dataset, preprocess=ds_over["preprocess"])
        cfg = dataclasses.replace(cfg, dataset=dataset)

    h_over = {}
    for name in ("lam", "w0", "pi", "alpha"):
        val = getattr(args, name, None)
        if val is not None:
            h_over[name] = val
    if h_over:
        cfg = dataclasses.replace(cfg, h=dataclasses.replace(cfg.h, **h_over))

    top: dict = {}
    if getattr(args, "engine", None):
        top["engine"] = args.engine
    if getattr(args, "budget", None) is not None:
        top["T"] = args.budget
    if getattr(args, "seeds", None):
        top["seeds"] = _parse_seeds(args.seeds)
    if getattr(args, "init_policy", None):
        top["init_policy"] = args.init_policy
    if args.rff_dim is not None:
        top["rff_dim"] = args.rff_dim
    if args.rff_sigma is not None:
        top["rff_sigma"] = args.rff_sigma if args.rff_sigma == "median" \
            else float(args.rff_sigma)
    if args.rff_seed is not None:
        top["rff_seed"] = args.rff_seed
    if top:
        cfg = dataclasses.replace(cfg, **top)
    return cfg


def _hyper_from_args(args) -> HyperParams:
    return HyperParams(
        lam=args.lam if args.lam is not None else 1.0,
        w0=args.w0 if args.w0 is not None else 1.0,
        pi=args.pi if args.pi is not None else 0.5,
        alpha=args.alpha if args.alpha is not None else 1e-6,
    )


# ---- subcommand handlers ----------------------------------------------------------


def _cmd_run(args) -> int:
    cfg = _build_config(args)
    curves = run_experiment(cfg, workers=args.workers)
    outdir = Path(args.out)
    written = emit_report(curves, outdir, prefix=args.prefix)
    summary = summarize(curves)
    for engine, s in summary.items():
        print(f"{engine}: recall@{s['at_half']['t']} = {s['at_half']['mean']:.2f} "
              f"± {s['at_half']['std']:.2f}; recall@{s['at_end']['t']} = "
              f"{s['at_end']['mean']:.2f} ± {s['at_end']['std']:.2f} "
              f"(ideal {s['ideal_end']}, random {s['random_expect_end']:.2f})")
    for path in written:
        print(f"wrote {path}")
    return 0

def _cmd_probe(args) -> int:
    cfg = _build_config(args)
    res = run_pairwise_probe(cfg, pairs=args.pairs)
    print(f"pairs: {res.pairs_valid} valid of {res.pairs_sampled}")
    print(f"las  mean positives in top-100: {res.las_mean:.2f}")
    print(f"wnas mean positives in top-100: {res.wnas_mean:.2f}")
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        path = outdir / "probe.json"
        path.write_text(json.dumps(dataclasses.asdict(res), indent=2) + "\n")
        print(f"wrote {path}")
    return 0


def _cmd_lemma(args) -> int:
    h = _hyper_from_args(args)
    reports = lemma_trials(args.n, args.r, args.trials, h, eps=args.eps,
                           seed=args.data_seed or 0)
    held = sum(r.holds for r in reports)
    stieltjes = sum(r.stieltjes for r in reports)
    worst = min(r.minv_min for r in reports)
    print(f"bound held on {held}/{len(reports)} trials; "
          f"inverse nonnegative on {stieltjes}/{len(reports)} "
          f"(worst entry {worst:.2e})")
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        path = outdir / "lemma.json"
        path.write_text(json.dumps([dataclasses.asdict(r) for r in reports],
                                   indent=2) + "\n")
        print(f"wrote {path}")
    return 0 if held == len(reports) else 1


def _cmd_bench(args) -> int:
    sizes = [int(tok) for tok in args.sizes.split(",")]
    rows, slope = scaling_bench(args.r, sizes, iters=args.iters,
                                seed=args.data_seed or 0)
    print(f"{'n':>8} {'init_s':>10} {'iter_s':>12}")
    for row in rows:
        print(f"{row.n:>8} {row.init_seconds:>10.4f} {row.median_iter_seconds:>12.6f}")
    print(f"linear fit: {slope * 1e6:.4f} microseconds per point per iteration")
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        cpath = outdir / "bench.csv"
        with open(cpath, "w") as fh:
            fh.write("n,r,init_seconds,median_iter_seconds\n")
            for row in rows:
                fh.write(f"{row.n},{row.r},{row.init_seconds:.6g},"
                         f"{row.median_iter_seconds:.6g}\n")
        print(f"wrote {cpath}")
        from .plotting import save_bench_figure
        fpath = save_bench_figure(rows, outdir / "bench.png")
        print(f"wrote {fpath}")
    return 0


def _cmd_report(args) -> int:
    indir = Path(args.curves)
    pattern = re.compile(r"(?P<engine>[A-Za-z]+)_seed(?P<seed>-?\d+)\.csv$")
    curves = []
    for path in sorted(indir.glob("*.csv")):
        m = pattern.search(path.name)
        if not m:
            continue
        rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        curves.append(RecallCurve(
            engine=m.group("engine"), seed=int(m.group("seed")),
            found=rows[:, 1].astype(int), ideal=rows[:, 2].astype(int),
            random_expect=rows[:, 3], iter_seconds=np.zeros(rows.shape[0]),
        ))
    if not curves:
        print(f"no curve CSVs found under {indir}", file=sys.stderr)
        return 1
    written = emit_report(curves, Path(args.out), prefix=args.prefix)
    print(json.dumps(summarize(curves), indent=2))
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .dataset import load_csv
    from .harness import materialize
    from .service import create_app

    datasets = {}
    for spec in args.data or []:
        name, _, path = spec.partition("=")
        if not path:
            print(f"--data expects name=path.csv, got {spec!r}", file=sys.stderr)
            return 2
        # labeled CSVs follow the save_csv convention: label in the last column
        datasets[name] = load_csv(path, has_labels=not args.unlabeled,
                                  label_column=None if args.unlabeled else -1)
    if args.demo_data:
        datasets[args.demo_data] = materialize(DatasetSpec(
            kind="two-gaussians", n=500, r=10, prevalence=0.05, separation=5.0, seed=0))
    if not datasets:
        print("no datasets: pass --data name=path.csv or --demo-data NAME",
              file=sys.stderr)
        return 2
    app = create_app(datasets, wal_path=args.wal)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="activesearch",
        description="rare-class active search: engines, experiments, labeling service",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="recall experiment against the label oracle")
    _add_dataset_flags(p_run)
    _add_hyper_flags(p_run)
    p_run.add_argument("--engine", choices=["las", "wnas", "asg"])
    p_run.add_argument("--budget", type=int, help="queries per run")
    p_run.add_argument("--seeds", help="comma-separated run seeds")
    p_run.add_argument("--init-policy", choices=["one-random-positive", "pos-neg-pair"])
    p_run.add_argument("--config", help="JSON config file (flags override)")
    p_run.add_argument("--workers", type=int, default=1, help="parallel seed runners")
    p_run.add_argument("--out", default="results", help="output directory")
    p_run.add_argument("--prefix", default="curve", help="output file prefix")
    p_run.set_defaults(func=_cmd_run)

    p_probe = sub.add_parser("probe", help="pairwise top-100 engine comparison")
    _add_dataset_flags(p_probe)
    _add_hyper_flags(p_probe)
    p_probe.add_argument("--pairs", type=int, default=100)
    p_probe.add_argument("--seeds", help="comma-separated seeds (first is the sampler seed)")
    p_probe.add_argument("--config", help="JSON config file (flags override)")
    p_probe.add_argument("--out", help="output directory for probe.json")
    p_probe.set_defaults(func=_cmd_probe)

    p_lemma = sub.add_parser("lemma", help="block-similarity bound trials")
    _add_hyper_flags(p_lemma)
    p_lemma.add_argument("--n", type=int, default=60)
    p_lemma.add_argument("--r", type=int, default=10)
    p_lemma.add_argument("--trials", type=int, default=100)
    p_lemma.add_argument("--eps", type=float, default=1e-3)
    p_lemma.add_argument("--data-seed", type=int)
    p_lemma.add_argument("--out", help="output directory for lemma.json")
    p_lemma.set_defaults(func=_cmd_lemma)

    p_bench = sub.add_parser("bench", help="per-iteration scaling benchmark")
    p_bench.add_argument("--r", type=int, default=50)
    p_bench.add_argument("--sizes", default="5000,50000", help="comma-separated n values")
    p_bench.add_argument("--iters", type=int, default=30)
    p_bench.add_argument("--data-seed", type=int)
    p_bench.add_argument("--out", help="output directory for bench.csv/png")
    p_bench.set_defaults(func=_cmd_bench)

    p_report = sub.add_parser("report", help="re-render summary and figure from curve CSVs")
    p_report.add_argument("--curves", required=True, help="directory of curve CSVs")
    p_report.add_argument("--out", default="results", help="output directory")
    p_report.add_argument("--prefix", default="report", help="output file prefix")
    p_report.set_defaults(func=_cmd_report)

    p_serve = sub.add_parser("serve", help="start the HTTP labeling service")
    p_serve.add_argument("--data", action="append", metavar="NAME=CSV",
                         help="register a labeled CSV dataset (repeatable)")
    p_serve.add_argument("--unlabeled", action="store_true",
                         help="registered CSVs have no label column")
    p_serve.add_argument("--demo-data", metavar="NAME",
                         help="register a small synthetic demo dataset")
    p_serve.add_argument("--wal", help="JSON-lines session log for restart resume")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=_cmd_serve)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ActiveSearchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
