"""Command-line front end.

    proxdiv validate --ensemble O.csv --surrogate OHAT.csv
    proxdiv validate --ensemble O.csv --partition nodes.csv [--weights w.csv]
    proxdiv simulate type1|power|sparsity [axis overrides] --out DIR
    proxdiv gen --n 100 --k 5 --signal 0.5 --out DIR

Exit codes: 0 success, 1 I/O error, 2 invalid input.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import experiments
from .errors import ProxDivError
from .io import (
    atomic_write,
    read_matrix_csv,
    read_partition_csv,
    read_weights_csv,
    write_matrix_csv,
    write_partition_csv,
)
from .matrix import DEFAULT_TOLERANCE, crisp_from_partition
from .measures import ALL_MEASURES, DEFAULT_EPSILON, LoIDecomposition, MeasureKind, loi_decompose
from .permtest import PermTestConfig, TestReport, run_permutation_test
from .simgen import SimScenario, generate

SCHEMA_VERSION = 1
EXIT_OK, EXIT_IO, EXIT_INVALID = 0, 1, 2

# Per-pair decomposition thresholds: (favourable below, warning above).
IN_THRESHOLDS = (0.01, 0.1)
OUT_THRESHOLDS = (0.1, 0.3)


class UsageError(Exception):
    pass


def _measures(text: str) -> tuple:
    try:
        return tuple(MeasureKind.parse(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _floats(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def verdict(value: float | None, favourable: float, warning: float) -> str:
    if value is None:
        return "undefined"
    if value < favourable:
        return "favorable"
    if value > warning:
        return "warning"
    return "moderate"


def report_dict(label: str, report: TestReport, decomp: LoIDecomposition | None, thresholds: dict) -> dict:
    cfg = report.config
    doc = {
        "schema_version": SCHEMA_VERSION,
        "dataset": label,
        "n": report.n,
        "n_pairs": report.n * (report.n - 1) // 2,
        "permutations": cfg.R,
        "alpha": cfg.alpha,
        "seed": cfg.seed,
        "scheme": cfg.scheme,
        "measures": [t.as_dict() for t in report],
        "decomposition": None,
    }
    if decomp is not None:
        d = decomp.as_dict()
        d["thresholds"] = thresholds
        d["verdict_in"] = verdict(decomp.mean_in, *thresholds["mean_in"])
        d["verdict_out"] = verdict(decomp.mean_out, *thresholds["mean_out"])
        doc["decomposition"] = d
    return doc


def _fmt(x, fmt: str) -> str:
    return "NA" if x is None or (isinstance(x, float) and math.isnan(x)) else format(x, fmt)


def format_report(doc: dict) -> str:
    """Aligned text rendering of a validation report (display rounding only)."""
    head = ["Method", "Type", "Observed", "Null mean", "Null SD", "Z", "p", "CI"]
    rows = [
        [
            r["method"],
            r["type"],
            _fmt(r["observed"], ".3f"),
            _fmt(r["null_mean"], ".3f"),
            _fmt(r["null_sd"], ".3f"),
            _fmt(r["z"], "+.1f"),
            _fmt(r["p"], ".3f"),
            f"[{r['ci_lower']:.3f}, {r['ci_upper']:.3f}]",
        ]
        for r in doc["measures"]
    ]
    widths = [max(len(x[i]) for x in [head] + rows) for i in range(len(head))]

    def line(cells):
        return "  ".join(c.ljust(w) if i < 2 else c.rjust(w) for i, (c, w) in enumerate(zip(cells, widths)))

    out = [
        f"Dataset: {doc['dataset']}  (n = {doc['n']}, R = {doc['permutations']}, alpha = {doc['alpha']})",
        line(head),
        "-" * len(line(head)),
    ]
    out += [line(r) for r in rows]
    d = doc.get("decomposition")
    if d:
        out += [
            "",
            "LoI decomposition",
            f"  LoI total = {d['loi_total']:.4f}   LoI_in = {d['loi_in']:.4f} over {d['n_in']} pairs"
            f"   LoI_out = {d['loi_out']:.4f} over {d['n_out']} pairs",
            f"  mean_in  = {_fmt(d['mean_in'], '.4f')}  ({d['verdict_in']})",
            f"  mean_out = {_fmt(d['mean_out'], '.4f')}  ({d['verdict_out']})",
        ]
    return "\n".join(out)


def cmd_validate(args) -> int:
    o = read_matrix_csv(args.ensemble, args.tolerance)
    partition = read_partition_csv(args.partition) if args.partition else None
    if partition is not None and partition.n != o.n:
        raise UsageError(f"partition has {partition.n} observations, ensemble matrix has n={o.n}")
    if args.surrogate:
        ohat = read_matrix_csv(args.surrogate, args.tolerance)
    else:
        weights = read_weights_csv(args.weights, partition) if args.weights else None
        ohat = crisp_from_partition(partition, weights)
    cfg = PermTestConfig(
        R=args.permutations,
        alpha=args.alpha,
        seed=args.seed,
        measures=args.measures,
        epsilon=args.epsilon,
        ssim_window=args.ssim_window,
        workers=args.workers,
    )
    report = run_permutation_test(o, ohat, cfg)
    decomp = loi_decompose(o, ohat, partition) if partition is not None else None
    thresholds = {
        "mean_in": [args.in_favorable, args.in_warning],
        "mean_out": [args.out_favorable, args.out_warning],
    }
    label = args.label or Path(args.ensemble).stem
    doc = report_dict(label, report, decomp, thresholds)
    text = format_report(doc)
    if args.out:
        out = Path(args.out)
        with atomic_write(out) as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        with atomic_write(out.with_suffix(".txt")) as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_OK


_STUDIES = {
    "type1": (experiments.type1_grid, experiments.run_type1),
    "power": (experiments.power_grid, experiments.run_power),
    "sparsity": (experiments.sparsity_grid, experiments.run_sparsity),
}


def cmd_simulate(args) -> int:
    make_grid, run = _STUDIES[args.study]
    overrides = {
        k: v
        for k, v in {
            "n": args.n,
            "K": args.k,
            "signal": args.signal,
            "sparsity": args.sparsity,
            "replicates": args.replicates,
            "R": args.permutations,
            "alpha": args.alpha,
            "seed": args.seed,
        }.items()
        if v is not None
    }
    try:
        grid = make_grid(**overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = Path(args.out)
    if not out.is_dir():
        out.mkdir(parents=True, exist_ok=True)

    def progress(done, total):
        if not args.quiet and (done == total or done % max(1, total // 20) == 0):
            print(f"\r{args.study}: {done}/{total} replicates", end="" if done < total else "\n", file=sys.stderr)

    results = run(grid, workers=args.workers, progress=progress)
    experiments.write_csv(results, out / f"{args.study}.csv")
    experiments.write_json(results, out / f"{args.study}.json", args.study, grid)
    print(experiments.format_table(results))
    return EXIT_OK


def cmd_gen(args) -> int:
    try:
        sc = SimScenario(n=args.n, K=args.k, signal=args.signal, sparsity=args.sparsity, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    pair = generate(sc)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_matrix_csv(pair.o, out / "ensemble.csv")
    write_matrix_csv(pair.ohat, out / "surrogate.csv")
    write_partition_csv(pair.surrogate_groups, out / "partition.csv")
    write_partition_csv(pair.true_groups, out / "true_groups.csv")
    print(f"wrote ensemble.csv, surrogate.csv, partition.csv, true_groups.csv to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="proxdiv", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="test a surrogate matrix against an ensemble matrix")
    v.add_argument("--ensemble", required=True, help="ensemble co-occurrence matrix (CSV)")
    src = v.add_mutually_exclusive_group(required=True)
    src.add_argument("--surrogate", help="surrogate co-occurrence matrix (CSV)")
    src.add_argument("--partition", help="terminal-node labels (CSV)")
    v.add_argument("--weights", help="node weights for --partition: label,weight rows or n x n grid")
    v.add_argument("--measures", type=_measures, default=ALL_MEASURES, help="comma list (default: all six)")
    v.add_argument("--permutations", type=int, default=999)
    v.add_argument("--alpha", type=float, default=0.05)
    v.add_argument("--seed", type=_seed, default=0)
    v.add_argument("--out", help="write the JSON report here (and a .txt table beside it)")
    v.add_argument("--ssim-window", dest="ssim_window", type=int, default=None)
    v.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    v.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE, help="symmetry tolerance on ingestion")
    v.add_argument("--label", help="dataset label in the report (default: ensemble file stem)")
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--in-favorable", dest="in_favorable", type=float, default=IN_THRESHOLDS[0])
    v.add_argument("--in-warning", dest="in_warning", type=float, default=IN_THRESHOLDS[1])
    v.add_argument("--out-favorable", dest="out_favorable", type=float, default=OUT_THRESHOLDS[0])
    v.add_argument("--out-warning", dest="out_warning", type=float, default=OUT_THRESHOLDS[1])
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("simulate", help="run a Monte Carlo study")
    s.add_argument("study", choices=sorted(_STUDIES))
    s.add_argument("--n", type=_ints)
    s.add_argument("--k", type=_ints)
    s.add_argument("--signal", type=_floats)
    s.add_argument("--sparsity", type=_floats)
    s.add_argument("--replicates", type=int)
    s.add_argument("--permutations", type=int)
    s.add_argument("--alpha", type=float)
    s.add_argument("--seed", type=_seed)
    s.add_argument("--out", default=".", help="output directory (default: current)")
    s.add_argument("--workers", type=int, default=1, help="worker processes")
    s.add_argument("--quiet", action="store_true")
    s.set_defaults(func=cmd_simulate)

    g = sub.add_parser("gen", help="write a simulated matrix pair to CSV files")
    g.add_argument("--n", type=int, default=100)
    g.add_argument("--k", type=int, default=5)
    g.add_argument("--signal", type=float, default=1.0)
    g.add_argument("--sparsity", type=float, default=0.0)
    g.add_argument("--seed", type=_seed, default=0)
    g.add_argument("--out", default=".")
    g.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ProxDivError, UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
