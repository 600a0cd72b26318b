"""Command line entry point: ``aqclust run|brute|gen-blobs|verify-anova``.

Exit codes: 0 success, 1 I/O error, 2 configuration error, 3 numerical
instability (norm drift), 4 degenerate clustering.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from aqclust import clustering as cl
from aqclust import pipeline as pl
from aqclust.qsim import DEFAULT_SAMPLES, NormDriftError

EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_DRIFT = 3
EXIT_DEGENERATE = 4


def _vector(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {text!r}") from None


def _add_data_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("data")
    g.add_argument("--input", help="CSV file, one point per line")
    g.add_argument("--header", action="store_true", help="CSV has a header row")
    g.add_argument("--n1", type=int, default=2, help="generated blob 1 size (default 2)")
    g.add_argument("--n2", type=int, default=6, help="generated blob 2 size (default 6)")
    g.add_argument("--center1", type=_vector, default=(-3.0, 0.0))
    g.add_argument("--center2", type=_vector, default=(1.0, 0.0))
    g.add_argument("--spread", type=float, default=0.3)
    g.add_argument("--data-seed", type=int, default=7, help="seed of the blob generator")


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=("full", "reduced"), default="full")
    p.add_argument("--fixed-index", type=int, help="1-based point pinned to cluster 1 (reduced model)")
    p.add_argument("--kernel", default="linear", help="linear | rbf:GAMMA | poly:D:C0")


def _blobs(args: argparse.Namespace) -> pl.BlobSpec:
    return pl.BlobSpec(args.n1, args.n2, (args.center1, args.center2), args.spread, args.data_seed)


def _config(args: argparse.Namespace, **extra) -> pl.RunConfig:
    fixed = None if args.fixed_index is None else args.fixed_index - 1
    return pl.RunConfig(
        input=args.input,
        header=args.header,
        blobs=_blobs(args),
        model=args.model,
        fixed_index=fixed,
        kernel=args.kernel,
        **extra,
    )


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_run(args: argparse.Namespace) -> int:
    config = _config(
        args,
        tau=args.tau,
        steps=args.steps,
        sample_count=args.samples,
        normalize_energy=args.normalize_energy,
        seed=args.seed,
        out=args.out,
        trace=args.trace,
        oracle=not args.no_oracle,
    )
    result = pl.run(config)
    summary = result.to_dict()
    if not args.out:
        sys.stdout.write(result.to_json())
    else:
        top = ", ".join(f"|{t['ket']}> {t['probability']:.4f}" for t in summary["top_states"][:2])
        print(f"assignment {summary['assignment']}  top {top}")
    return 0


def cmd_brute(args: argparse.Namespace) -> int:
    _emit(pl.oracle_report(_config(args)), args.out)
    return 0


def cmd_gen_blobs(args: argparse.Namespace) -> int:
    data = _blobs(args).generate()
    if args.out:
        cl.write_csv(data, args.out, header=not args.no_header)
    else:
        for col in data.values.T:
            print(",".join(repr(float(v)) for v in col))
    return 0


def cmd_verify_anova(args: argparse.Namespace) -> int:
    data = cl.read_csv(args.input, header=args.header) if args.input else None
    report = pl.verify_anova(data, args.trials, seed=args.seed)
    _emit(report, args.out)
    return 0 if report["passed"] else EXIT_DRIFT


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aqclust", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="cluster by simulated adiabatic evolution")
    _add_data_args(p)
    _add_model_args(p)
    p.add_argument("--tau", type=float, default=75.0)
    p.add_argument("--steps", type=int, help="RK4 steps (default 40 per unit time)")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="trace sample count")
    p.add_argument(
        "--normalize-energy",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="rescale the problem diagonal to max magnitude 1 (default on)",
    )
    p.add_argument("--no-oracle", action="store_true", help="skip the brute-force check")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="result JSON path (default stdout)")
    p.add_argument("--trace", help="trace CSV path")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("brute", help="exhaustive ground-state search")
    _add_data_args(p)
    _add_model_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_brute)

    p = sub.add_parser("gen-blobs", help="write a two-blob sample as CSV")
    _add_data_args(p)
    p.add_argument("--seed", dest="data_seed", type=int, help="alias of --data-seed")
    p.add_argument("--no-header", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_blobs)

    p = sub.add_parser("verify-anova", help="check S_T = S_W + S_B/(2n) on random assignments")
    p.add_argument("--input")
    p.add_argument("--header", action="store_true")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify_anova)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    if getattr(args, "data_seed", 0) is None:
        args.data_seed = 7
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except pl.DegenerateClusteringError as exc:
        print(f"degenerate clustering: {exc}; {json.dumps(exc.diagnostics)}", file=sys.stderr)
        return EXIT_DEGENERATE
    except NormDriftError as exc:
        print(f"numerical instability: {exc}", file=sys.stderr)
        return EXIT_DRIFT
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
