"""
Command line entry point ``adar``.

Subcommands: simulate, fit, test, diagnose, mc, region. Every run writes a
manifest (resolved configuration, seeds and library versions) next to its
output. Exit status is 0 on success, 1 on usage or input errors and 2 on
model or numerical failures.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import platform
import sys
from typing import Optional, Sequence

import numpy as np

from adar import __version__
from adar.errors import ADARError, ConfigurationError, ParameterError

log = logging.getLogger("adar")

DIFFERENCES = ("none", "diff", "pct-diff")


class UsageError(Exception):
    pass


class IngestError(ADARError, ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------- ingestion


def read_series(path: str, column=0, difference: str = "none") -> np.ndarray:
    """
    Read one numeric column from a CSV file (header row optional).

    ``difference`` is ``none``, ``diff`` (``x_t - x_{t-1}``) or ``pct-diff``
    (``100 (x_t - x_{t-1})``).
    """
    if difference not in DIFFERENCES:
        raise IngestError(f"difference must be one of {DIFFERENCES}, got {difference!r}")
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise IngestError(f"{path}: no data rows")
    col = column
    start = 0
    if isinstance(column, str) and not column.lstrip("-").isdigit():
        header = [c.strip() for c in rows[0]]
        if column not in header:
            raise IngestError(f"{path}: column {column!r} not in header {header}")
        col, start = header.index(column), 1
    else:
        col = int(column)
        try:
            float(rows[0][col])
        except (ValueError, IndexError):
            start = 1  # header row
    values = []
    for i, row in enumerate(rows[start:], start=start + 1):
        try:
            cell = row[col].strip()
        except IndexError:
            raise IngestError(f"{path}: row {i} has no column {col}") from None
        try:
            v = float(cell)
        except ValueError:
            raise IngestError(f"{path}: row {i}: non-numeric value {cell!r}") from None
        if not np.isfinite(v):
            raise IngestError(f"{path}: row {i}: non-finite value {cell!r}")
        values.append(v)
    x = np.asarray(values, dtype=float)
    if difference == "diff":
        x = np.diff(x)
    elif difference == "pct-diff":
        x = 100.0 * np.diff(x)
    return x


def ingest_csv(path: str, column=0, difference: str = "none", m: int = 1):
    """Series from CSV as a frame with the first ``m`` values as presample."""
    from adar.model import SeriesFrame

    y = read_series(path, column, difference)
    if y.size < m + 30:
        raise IngestError(f"{path}: {y.size} usable values; need at least {m + 30} for m={m}")
    return SeriesFrame.from_series(y, m)


def write_series(path: str, y, name: str = "y") -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow([name])
        for v in y:
            wr.writerow([repr(float(v))])


# ---------------------------------------------------------------- helpers


def _floats(text) -> list[float]:
    if text is None or text == "":
        return []
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(",") if v.strip()]


def _ints(text) -> list[int]:
    return [int(v) for v in _floats(text)]


def _sig(x) -> str:
    if x is None:
        return "-"
    return f"{x:.6g}"


def _versions() -> dict:
    import scipy

    from adar import kernels

    return {
        "adar": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
        "kernel_backend": kernels.BACKEND,
    }


def _write_json(path: Optional[str], obj) -> None:
    text = json.dumps(obj, indent=2, default=_json_default)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _weight_scheme(args):
    from adar.weights import WeightScheme

    return WeightScheme(args.weight, m=args.weight_m, c_w=args.weight_cw, percentile=args.weight_percentile)


def _load(args):
    from adar.likelihood import QuasiLikelihood
    from adar.model import ModelSpec
    from adar.weights import compute_weights

    spec = ModelSpec(args.p, args.q)
    frame = ingest_csv(args.input, args.column, args.difference, spec.m)
    scheme = _weight_scheme(args)
    w = compute_weights(scheme, frame)
    return spec, frame, QuasiLikelihood(frame, spec, w)


def _fixed(spec, text) -> tuple:
    from adar.inference import _parse_coords

    return _parse_coords(spec, text) if text else ()


# ---------------------------------------------------------------- commands


def cmd_simulate(args) -> dict:
    from adar.model import InnovationLaw, ModelSpec, ParamVector, simulate

    phi = _floats(args.phi)
    alpha = _floats(args.alpha)
    spec = ModelSpec(len(phi), len(alpha))
    theta = ParamVector(args.u, phi, args.omega, alpha)
    law = InnovationLaw.parse(args.law)
    frame = simulate(spec, theta, law, n=args.n, burn_in=args.burn_in, seed=args.seed)
    write_series(args.out, frame.full)
    log.info("wrote %d values (%d presample) to %s", frame.full.size, frame.m, args.out)
    return {"out": args.out, "n": frame.n, "presample": frame.m, "theta": theta.to_dict(), "law": law.to_dict()}


def _coef_table(est) -> str:
    d = est.to_dict()
    lines = [f"{'coef':>8} {'estimate':>12} {'(t)':>12} {'se':>12}"]
    for c in d["coefficients"]:
        t = "pinned" if c["pinned"] else f"({_sig(c['t'])})"
        lines.append(f"{c['name']:>8} {_sig(c['estimate']):>12} {t:>12} {_sig(c['se']):>12}")
    lines.append(f"F_n = {_sig(d['F_value'])}  converged = {d['converged']}  n = {d['n']}")
    return "\n".join(lines)


def cmd_fit(args) -> dict:
    from adar.diagnostics import information_criteria
    from adar.inference import estimate

    spec, frame, lik = _load(args)
    est = estimate(lik, fixed_zero=_fixed(spec, args.fix), j_form=args.j_form)
    out = est.to_dict()
    out.update(information_criteria(est))
    out["weight"] = _weight_scheme(args).to_dict()
    for wmsg in est.warnings:
        log.warning(wmsg)
    if args.dump_workspace:
        with open(args.dump_workspace, "w") as fh:
            fh.write(lik.workspace(est.theta).to_json())
    if not args.quiet:
        print(_coef_table(est), file=sys.stderr if args.out is None else sys.stdout)
    _write_json(args.out, out)
    return out


def cmd_test(args) -> dict:
    from adar.inference import HypothesisSpec, estimate, run_tests

    spec, frame, lik = _load(args)
    hyp = HypothesisSpec.parse(spec, args.null, args.nuisance or "")
    est = estimate(lik, fixed_zero=_fixed(spec, args.fix), j_form=args.j_form)
    levels = tuple(_floats(args.level))
    reports = run_tests(est, hyp, method=args.method, N=args.N, levels=levels, seed=args.seed)
    out = {
        "hypothesis": hyp.describe(),
        "nuisance_boundary": [spec.names()[i] for i in hyp.nuisance_boundary],
        "estimate": est.to_dict(),
        "tests": {k: r.to_dict() for k, r in reports.items()},
    }
    if not args.quiet:
        stream = sys.stderr if args.out is None else sys.stdout
        print(f"H0: {hyp.describe()} = 0", file=stream)
        for k, r in reports.items():
            cv = "  ".join(f"{b:g}:{_sig(v)}" for b, v in r.critical_values.items())
            print(f"{k:>5} {_sig(r.statistic):>12} p={_sig(r.pvalue):<10} [{r.method}] {cv}", file=stream)
    _write_json(args.out, out)
    return out


def cmd_diagnose(args) -> dict:
    from adar.diagnostics import hill, information_criteria, portmanteau
    from adar.inference import estimate

    spec, frame, lik = _load(args)
    est = estimate(lik, fixed_zero=_fixed(spec, args.fix), j_form=args.j_form)
    sim = True if args.simulate_null else None
    reps = [portmanteau(est, M, simulate_null=sim, N=args.N, seed=args.seed) for M in _ints(args.lags)]
    out = {
        "portmanteau": [r.to_dict() for r in reps],
        "information_criteria": information_criteria(est),
        "estimate": est.to_dict(),
    }
    if args.hill_k:
        out["hill"] = {str(k): hill(frame.full, k) for k in _ints(args.hill_k)}
    if not args.quiet:
        stream = sys.stderr if args.out is None else sys.stdout
        for r in reps:
            print(f"Q_{r.M} = {_sig(r.QM)}  p = {_sig(r.pvalue)}  [{r.method}]", file=stream)
    _write_json(args.out, out)
    return out


def cmd_mc(args) -> dict:
    from adar.model import InnovationLaw
    from adar.montecarlo import ExperimentPlan, run_experiment

    plan = ExperimentPlan(
        dgp=args.dgp,
        alpha_case=args.case,
        law=InnovationLaw.parse(args.law),
        n=args.n,
        reps=args.reps,
        h_grid=tuple(_ints(args.h)),
        weight=_weight_scheme(args),
        levels=tuple(_floats(args.level)),
        seed=args.seed,
        N_alg1=args.N,
        j_form=args.j_form,
    )
    res = run_experiment(plan, workers=args.workers)
    power_out = args.power_out
    if power_out is None and len(plan.h_grid) > 1:
        root, ext = os.path.splitext(args.out)
        power_out = f"{root}_power{ext or '.csv'}"
    res.write_csv(args.out, power_out)
    summary = res.summary()
    summary["outputs"] = {"rates": args.out, "power": power_out}
    if not args.quiet:
        for row in res.tidy_rows():
            print(f"h={row['h']:<3} {row['test']:>5} {row['level']:<5g} rate={_sig(row['rate'])} se={_sig(row['se'])}")
    return summary


def cmd_region(args) -> dict:
    from adar.model import InnovationLaw, moment_region_dar11

    law = InnovationLaw.parse(args.law)
    rep = moment_region_dar11(args.phi, args.alpha, law, mc_draws=args.mc_draws, seed=args.seed)
    out = rep.to_dict() if hasattr(rep, "to_dict") else dict(rep.__dict__)
    _write_json(args.out, out)
    return out


# ---------------------------------------------------------------- parser


def _data_flags(p) -> None:
    p.add_argument("--input", required=True, help="CSV file with the series")
    p.add_argument("--column", default="0", help="column name or 0-based index")
    p.add_argument("--difference", choices=DIFFERENCES, default="none")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--fix", default="", help="coefficients pinned at zero, e.g. 'phi2,a3'")
    p.add_argument("--j-form", choices=("gamma", "hessian"), default="gamma",
                   help="curvature estimate in the sandwich and tests")
    _weight_flags(p)


def _weight_flags(p, default="hv") -> None:
    p.add_argument("--weight", choices=("unit", "hv", "ling"), default=default)
    p.add_argument("--weight-m", type=int, default=None)
    p.add_argument("--weight-cw", type=float, default=None)
    p.add_argument("--weight-percentile", type=float, default=95.0)


def _common(p) -> None:
    p.add_argument("--config", default=None, help="JSON file whose keys mirror the flags")
    p.add_argument("--out", default=None)
    p.add_argument("--manifest", default=None, help="manifest path (default: next to --out)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-v", "--verbose", action="count", default=0)
    p.add_argument("--quiet", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adar", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=f"adar {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("simulate", help="simulate a series to CSV")
    _common(p)
    p.add_argument("--u", type=float, default=0.0)
    p.add_argument("--phi", default="0.5")
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--alpha", default="0.1")
    p.add_argument("--law", default="normal")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--burn-in", type=int, default=500)
    p.set_defaults(func=cmd_simulate, out="series.csv")

    p = sub.add_parser("fit", help="self-weighted quasi-likelihood fit")
    _common(p)
    _data_flags(p)
    p.add_argument("--dump-workspace", default=None, help="write score, Hessian and sandwich to JSON")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("test", help="Wald, LM, QLR and t tests of zero coefficients")
    _common(p)
    _data_flags(p)
    p.add_argument("--null", required=True, help="tested coefficients, e.g. 'a4,a5' or 'u,phi2'")
    p.add_argument("--nuisance", "--nuisance-boundary", default="", help="volatility coefficients known to be zero but estimated")
    p.add_argument("--method", choices=("auto", "alg1", "closedform"), default="auto")
    p.add_argument("--N", type=int, default=50_000, help="simulated null draws")
    p.add_argument("--level", default="0.01,0.05,0.10")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("diagnose", help="portmanteau test, information criteria, Hill estimates")
    _common(p)
    _data_flags(p)
    p.add_argument("--lags", default="6,12,18")
    p.add_argument("--simulate-null", action="store_true")
    p.add_argument("--N", type=int, default=50_000)
    p.add_argument("--hill-k", default="", help="Hill estimator k values, e.g. '50,100'")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("mc", help="Monte Carlo size and local-power experiment")
    _common(p)
    p.add_argument("--dgp", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--case", choices=("I", "II"), default="I")
    p.add_argument("--law", default="normal")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--reps", type=int, default=500)
    p.add_argument("--h", default="0")
    p.add_argument("--N", type=int, default=10_000)
    p.add_argument("--level", default="0.01,0.05,0.10")
    p.add_argument("--workers", type=int, default=None, help="processes (default from ADAR_WORKERS or 1)")
    p.add_argument("--power-out", default=None)
    p.add_argument("--j-form", choices=("gamma", "hessian"), default="gamma")
    _weight_flags(p)
    p.set_defaults(func=cmd_mc, out="results.csv")

    p = sub.add_parser("region", help="stationarity and moment conditions of DAR(1,1)")
    _common(p)
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--law", default="normal")
    p.add_argument("--mc-draws", type=int, default=1_000_000)
    p.set_defaults(func=cmd_region)
    return parser


def _apply_config(parser, sub_name: str, argv: Sequence[str], path: str):
    """Re-parse with defaults taken from a JSON config; unknown keys are rejected."""
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    subp = parser._subparsers._group_actions[0].choices[sub_name]
    known = {a.dest for a in subp._actions}
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    unknown = sorted(set(cfg) - known - {"command"})
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    for a in subp._actions:
        if a.dest in cfg:
            a.required = False
    subp.set_defaults(**{k: v for k, v in cfg.items() if k != "command"})
    return parser.parse_args(argv)


def _manifest_path(args) -> str:
    if args.manifest:
        return args.manifest
    if args.out:
        root, _ = os.path.splitext(args.out)
        return root + ".manifest.json"
    return f"adar-{args.command}.manifest.json"


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help()
            return 1
        if args.config:
            args = _apply_config(parser, args.command, argv, args.config)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s: %(message)s", stream=sys.stderr
    )
    config = {k: v for k, v in vars(args).items() if k != "func"}
    try:
        result = args.func(args)
        status = 0
    except (UsageError, ParameterError, ConfigurationError, IngestError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        result, status = {"error": str(exc)}, 1
    except (ADARError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        result, status = {"error": f"{type(exc).__name__}: {exc}"}, 2
    manifest = {
        "command": args.command,
        "argv": argv,
        "config": config,
        "seed": args.seed,
        "versions": _versions(),
        "exit_status": status,
    }
    if status == 0 and args.command == "mc":
        manifest["summary"] = result
    try:
        _write_json(_manifest_path(args), manifest)
    except OSError as exc:
        print(f"warning: manifest not written: {exc}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
