"""Command-line interface: ``eix estimate | sweep | simulate | mc``.

Exit codes: 0 success, 2 invalid input or arguments, 3 degenerate series.

JSON output follows the schemas shipped in ``eix/schemas``:
``estimate.schema.json`` for ``eix estimate`` and ``sweep_report.schema.json``
for the ``.json`` file written by ``eix mc``. ``eix sweep`` writes CSV with
columns ``b, theta, theta_bc, ci_lo, ci_hi, theta_raw``.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import warnings
from importlib import resources
from typing import List, Optional, Sequence

from eix.estimators import DegenerateSeriesError, EstimatorVariant
from eix.inference import Analysis, Prepared, analyze
from eix.ingest import DataError, IngestSpec, read_series
from eix.mc import DEFAULT_BLOCKS, MonteCarloError, SweepConfig, run_coverage, run_sweep, run_variance_ratio
from eix.models import make_model, simulate

EXIT_OK, EXIT_DATA, EXIT_DEGENERATE = 0, 2, 3

log = logging.getLogger("eix")


class UsageError(Exception):
    pass


def load_schema(name: str) -> dict:
    """A shipped JSON schema, ``"estimate"`` or ``"sweep_report"``."""
    return json.loads(resources.files("eix").joinpath("schemas", f"{name}.schema.json").read_text())


def _fmt(v: float) -> str:
    return repr(float(v))


def parse_blocks(text: str) -> List[int]:
    """``"16:256"`` (inclusive, step 1), ``"16:256:8"`` or ``"4,8,16"``."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            lo, hi, step = parts
            if step < 1:
                raise ValueError
            return list(range(lo, hi + 1, step))
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"cannot parse block lengths {text!r}") from None


def _add_ingest(p: argparse.ArgumentParser) -> None:
    p.add_argument("path", help="delimited text file")
    p.add_argument("--column", "-c", default=None, help="column name or 0-based index (default: last)")
    p.add_argument("--transform", choices=["none", "neg-log-returns"], default="none")
    p.add_argument("--delimiter", "-d", default=",")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--header", dest="header", action="store_true", default=None)
    g.add_argument("--no-header", dest="header", action="store_false")


def _add_variant(p: argparse.ArgumentParser) -> None:
    p.add_argument("--estimator", "-e", default="B-sl", help="B|N - dj|sl [-lbo], e.g. N-dj-lbo (default B-sl)")
    p.add_argument("--no-bias-correct", dest="bias_correct", action="store_false")
    p.add_argument("--level", type=float, default=0.95)


def _ingest(args) -> IngestSpec:
    return IngestSpec(args.path, args.column, args.transform.replace("-", "_"), args.delimiter, args.header)


def _variant(args) -> EstimatorVariant:
    try:
        v = EstimatorVariant.parse(args.estimator)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if v.cdf_mode == "oracle":
        raise UsageError("oracle estimators need the true cdf and are only available in mc")
    return v


def cmd_estimate(args) -> int:
    x = read_series(_ingest(args))
    try:
        result = analyze(x, args.b, _variant(args), args.level, args.bias_correct)
    except DegenerateSeriesError:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    json.dump(result.to_dict(), sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


SWEEP_COLUMNS = ["b", "theta", "theta_bc", "ci_lo", "ci_hi", "theta_raw"]


def cmd_sweep(args) -> int:
    x = read_series(_ingest(args))
    variant = _variant(args)
    prep = Prepared(x)
    blocks = parse_blocks(args.blocks)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for b in blocks:
            if not 2 <= b <= prep.n // 2:
                log.warning("skipping b=%d: need 2 <= b <= n/2 = %d", b, prep.n // 2)
                continue
            r: Analysis = analyze(prep, b, variant, args.level, args.bias_correct)
            w.writerow([b, _fmt(r.theta), _fmt(r.theta_bc), _fmt(r.ci.lo), _fmt(r.ci.hi), _fmt(r.theta_raw)])
    finally:
        if args.out:
            out.close()
    return EXIT_OK


def _model(args):
    param = {"armax": args.alpha, "iid": 0.0, "sq-arch": args.lam, "arch": args.lam, "clayton": args.vartheta}[args.model]
    if param is None:
        flag = {"armax": "--alpha", "sq-arch": "--lambda", "arch": "--lambda", "clayton": "--vartheta"}[args.model]
        raise UsageError(f"model {args.model} needs {flag}")
    try:
        return make_model(args.model, param)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _add_model(p: argparse.ArgumentParser, seed_required: bool) -> None:
    p.add_argument("--model", "-m", required=True, choices=["armax", "iid", "sq-arch", "arch", "clayton"])
    p.add_argument("--alpha", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--vartheta", type=float)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--seed", type=int, required=seed_required, help="64-bit seed")


def cmd_simulate(args) -> int:
    model = _model(args)
    if args.n < 1:
        raise UsageError("-n must be positive")
    x = simulate(model, args.n, args.seed, args.burn_in)
    text = "".join(_fmt(v) + "\n" for v in x)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_mc(args) -> int:
    try:
        config = SweepConfig(
            model=_model(args),
            n=args.n,
            blocks=tuple(parse_blocks(args.blocks)),
            reps=args.reps,
            master_seed=args.seed,
            estimators=tuple(e for e in args.estimators.split(",") if e),
            bias_correct=args.bias_correct,
            level=args.level,
            burn_in=args.burn_in,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    runner = {"sweep": run_sweep, "coverage": run_coverage, "ratio": run_variance_ratio}[args.experiment]
    kwargs = {"var_reps": args.var_reps} if args.experiment == "ratio" else {}
    report = runner(config, threads=args.threads, **kwargs)
    with open(args.out + ".csv", "w", newline="") as fh:
        fh.write(report.to_csv())
    with open(args.out + ".json", "w") as fh:
        fh.write(report.to_json())
    for est, b in report.argmin().items():
        row = report.row(est, b)
        print(f"{est}\targmin_b={b}\tmse={row.mse:.6g}\tmse_x1e3={1e3 * row.mse:.4f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eix", description="Extremal index estimation from block maxima.")
    parser.add_argument("--verbose", "-v", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate theta for one block length (JSON on stdout)")
    _add_ingest(p)
    p.add_argument("-b", type=int, required=True, help="block length")
    _add_variant(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("sweep", help="estimates over a range of block lengths (CSV)")
    _add_ingest(p)
    p.add_argument("--blocks", default="10:357", help="lo:hi[:step] or comma list (default 10:357)")
    p.add_argument("--out", "-o")
    _add_variant(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="simulate a model, one value per line")
    _add_model(p, seed_required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("mc", help="Monte Carlo experiments (writes OUT.csv and OUT.json)")
    p.add_argument("experiment", choices=["sweep", "coverage", "ratio"])
    _add_model(p, seed_required=False)
    p.set_defaults(seed=0)
    p.add_argument("-n", type=int, default=8192)
    p.add_argument("--blocks", default=",".join(map(str, DEFAULT_BLOCKS)))
    p.add_argument("--reps", type=int, default=2000)
    p.add_argument("--var-reps", type=int, default=None, help="size of the second bank for 'ratio'")
    p.add_argument("--estimators", default="B-sl-bc,N-sl-lbo", help="comma list; suffix -bc for bias reduction")
    p.add_argument("--bias-correct", action="store_true", help="bias-reduce every estimator")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--threads", type=int, default=None, help="worker processes (default $EIX_THREADS or 1)")
    p.add_argument("--out", "-o", required=True, help="output path prefix")
    p.set_defaults(func=cmd_mc)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_DATA
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="eix: %(message)s")
    warnings.simplefilter("ignore")
    try:
        return args.func(args)
    except (DataError, UsageError, MonteCarloError) as exc:
        print(f"eix: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DegenerateSeriesError as exc:
        print(f"eix: degenerate series: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
