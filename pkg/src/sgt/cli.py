"""Command-line entry point: ``sgt {gen,simulate,sweep,bounds,leakage}``."""
from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

from . import bounds
from .design import DesignParams, InstanceTooLarge, SecrecyMode, bin_size, generate_codebook, save_codebook
from .harness import (
    ConfigError,
    emit_csv,
    leakage_csv_rows,
    parse_config,
    run_sweep,
    run_trial,
    summarize,
    sweep_csv_text,
    worker_count,
    write_trace,
    SweepResult,
)
from .secrecy import empirical_leakage

EXIT_OK, EXIT_CONFIG, EXIT_TOO_LARGE, EXIT_IO = 0, 2, 3, 4


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _design_params(args, t):
    try:
        return DesignParams(args.n, args.k, t, args.delta, args.eps_prime, args.density, SecrecyMode(args.mode))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_gen(args):
    params = _design_params(args, args.t)
    codebook = generate_codebook(params, args.seed)
    save_codebook(codebook, args.out)
    print(f"wrote {args.out}: N={params.n_items} K={params.n_defective} T={params.n_tests} M={codebook.bin_size}")


def _load_config(path):
    return parse_config(Path(path).read_text())


def cmd_sweep(args):
    config = _load_config(args.config)
    out = args.out or config.output_path
    result = run_sweep(config, workers=worker_count(args.workers))
    if out == "-":
        sys.stdout.write(sweep_csv_text(result))
    else:
        emit_csv(result, out)
        print(f"wrote {out} ({len(result.records)} rows)")


def cmd_simulate(args):
    config = _load_config(args.config)
    t = args.t if args.t is not None else config.t_grid[0]
    outcomes = [run_trial(config, t, i, keep_vectors=args.trace is not None) for i in range(config.trials)]
    if args.trace:
        write_trace(config, outcomes, args.trace)
    sys.stdout.write(sweep_csv_text(SweepResult([summarize(config, t, outcomes)])))


def cmd_bounds(args):
    header = ("N", "K", "delta", "thr_converse", "thr_ml", "argmax_i", "thr_corollary", "thr_dnd", "secrecy_capacity_ratio")
    rows = []
    for n in args.n:
        for k in args.k:
            for delta in args.delta:
                try:
                    ml = bounds.t_threshold_ml(n, k, delta, args.eps)
                    row = [n, k, delta, bounds.t_converse(n, k, delta, args.eps_t), ml.value, ml.argmax,
                           bounds.t_threshold_corollary(n, k, delta, args.eps)]
                except bounds.DomainError as exc:
                    raise ConfigError(str(exc)) from None
                try:
                    row.append(bounds.t_threshold_dnd(n, k, delta, args.eps))
                except bounds.DomainError:
                    row.append(None)
                row.append(bounds.secrecy_capacity(delta, 1.0))
                rows.append(row)
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in r] for r in rows)
        sys.stdout.write(buf.getvalue())
    else:
        cells = [header] + [["-" if v is None else (f"{v:.4f}" if isinstance(v, float) else str(v)) for v in r] for r in rows]
        widths = [max(len(c[i]) for c in cells) for i in range(len(header))]
        for c in cells:
            print("  ".join(s.rjust(w) for s, w in zip(c, widths)))


def cmd_leakage(args):
    rows = []
    for delta in args.delta:
        params = _design_params(argparse.Namespace(**{**vars(args), "delta": delta}), args.t)
        sizes = args.m or [bin_size(params)]
        for m in sizes:
            codebook = generate_codebook(params, args.seed, m=m)
            est = empirical_leakage(codebook, delta, args.trials, args.seed, args.cap)
            rows.append((args.n, args.k, args.t, m, delta, args.trials, est))
    text = leakage_csv_rows(rows)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
        print(f"wrote {args.out} ({len(rows)} rows)")


def _add_design_args(p, leakage=False):
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    if not leakage:
        p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--eps-prime", type=float, default=0.0)
    p.add_argument("--mode", choices=("weak", "strong"), default="strong" if leakage else "weak")
    p.add_argument("--density", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)


def build_parser():
    parser = argparse.ArgumentParser(prog="sgt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a codebook container")
    _add_design_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("simulate", help="run one T of a config, optionally writing a per-trial trace")
    p.add_argument("config")
    p.add_argument("--t", type=int, default=None, help="number of tests (default: first grid value)")
    p.add_argument("--trace", default=None, help="per-trial trace CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run a config over its whole t_grid")
    p.add_argument("config")
    p.add_argument("--out", default=None, help="summary CSV ('-' for stdout; default: config 'out')")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bounds", help="tabulate analytic thresholds")
    p.add_argument("--n", type=_ints, default=[50, 100, 500])
    p.add_argument("--k", type=_ints, default=[2, 3, 5])
    p.add_argument("--delta", type=_floats, default=[0.0, 0.1, 0.25, 0.45])
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--eps-t", type=float, default=0.0)
    p.add_argument("--format", choices=("csv", "text"), default="text")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("leakage", help="estimate I(W;Z^T) over delta and bin sizes")
    _add_design_args(p, leakage=True)
    p.add_argument("--delta", type=_floats, required=True)
    p.add_argument("--m", type=_ints, default=None, help="bin sizes (default: from mode)")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--cap", type=int, default=10**7)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_leakage)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InstanceTooLarge as exc:
        print(f"instance too large: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
