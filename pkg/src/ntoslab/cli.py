"""Command-line front end: one subcommand per experiment, one table per output file.

Exit codes: 0 success, 1 runtime error, 2 invalid input or failed validation,
64 malformed command line.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, analytic, experiments
from .eig import PRECISION_FLOOR, spectrum_record
from .errors import (
    InvalidParamsError,
    InvalidSizeError,
    NtosError,
    PreconditionError,
)
from .io import TableArtifact, write_table
from .model import ChainParams

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INVALID = 2
EXIT_USAGE = 64

INPUT_ERRORS = (InvalidParamsError, InvalidSizeError, PreconditionError)


class UsageError(Exception):
    pass


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- range syntax -------------------------------------------------------------


def parse_n_range(text):
    """``a``, ``a:b`` or ``a:b:step`` -> list of N (inclusive)."""
    parts = str(text).split(":")
    try:
        nums = [int(p) for p in parts]
    except ValueError:
        raise UsageError(f"bad N range {text!r}; use a:b[:step]") from None
    if len(nums) == 1:
        return nums
    if len(nums) not in (2, 3) or (len(nums) == 3 and nums[2] <= 0):
        raise UsageError(f"bad N range {text!r}; use a:b[:step]")
    a, b = nums[0], nums[1]
    step = nums[2] if len(nums) == 3 else 1
    if b < a:
        raise UsageError(f"empty N range {text!r}")
    return list(range(a, b + 1, step))


def parse_grid(text):
    """``lo:hi:count`` -> (lo, hi, count)."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise UsageError(f"bad grid {text!r}; use lo:hi:count")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"bad grid {text!r}; use lo:hi:count") from None


# -- argument parsing ---------------------------------------------------------

PARAM_KEYS = ("t1", "t2", "gamma", "lambda_l", "lambda_r")


def _add_params(p, lambdas=True):
    p.add_argument("--t1", type=float)
    p.add_argument("--t2", type=float)
    p.add_argument("--gamma", type=float)
    if lambdas:
        p.add_argument("--lambda-l", dest="lambda_l", type=float, default=0.0)
        p.add_argument("--lambda-r", dest="lambda_r", type=float, default=0.0)


def _add_output(p, default_name):
    p.add_argument("--out", default=default_name, help="output path")
    p.add_argument("--format", choices=("csv", "json"), help="defaults to the --out extension")
    p.add_argument("--config", help="JSON file whose keys override the flags")


def build_parser():
    parser = _Parser(prog="ntoslab", description="Terminal-coupled nonreciprocal SSH chain experiments.")
    parser.add_argument("--version", action="version", version=f"ntoslab {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("spectrum", help="full spectrum for one or more N")
    _add_params(p)
    p.add_argument("--n", default="10", help="N or a:b[:step]")
    _add_output(p, "spectrum.csv")

    p = sub.add_parser("nsweep", help="E_min against N with the linear-law prediction")
    _add_params(p)
    p.add_argument("--n", default="2:60", help="a:b[:step]")
    p.add_argument("--floor", type=float, default=PRECISION_FLOOR)
    _add_output(p, "nsweep.csv")

    p = sub.add_parser("phase", help="raster of a quantity over the (t1, t2) plane")
    p.add_argument("--quantity", default="winding", help="comma list of " + ",".join(experiments.PHASE_QUANTITIES))
    p.add_argument("--gamma", type=float)
    p.add_argument("--lambda-l", dest="lambda_l", type=float, default=1e-5)
    p.add_argument("--lambda-r", dest="lambda_r", type=float, default=1e-5)
    p.add_argument("--t1", default="-4:4:161", help="lo:hi:count")
    p.add_argument("--t2", default="-4:4:161", help="lo:hi:count")
    p.add_argument("--tube", type=float, default=experiments.TUBE_HALF_WIDTH)
    p.add_argument("--resolution", type=int, default=256)
    p.add_argument("--saturation-form", dest="saturation_form", choices=("printed", "derived"), default="printed")
    _add_output(p, "phase.csv")

    p = sub.add_parser("saturation", help="predicted and numeric saturation point")
    _add_params(p)
    p.add_argument("--n", default=None, help="sweep window a:b (default covers 1.5x predicted N_c)")
    p.add_argument("--im-tol", dest="im_tol", type=float, default=experiments.SAT_IM_TOL)
    p.add_argument("--saturation-form", dest="saturation_form", choices=("printed", "derived"), default="printed")
    _add_output(p, "saturation.csv")

    p = sub.add_parser("curves", help="PBC or GBZ bulk spectrum")
    _add_params(p, lambdas=False)
    p.add_argument("--kind", choices=("PBC", "GBZ"), default="PBC")
    p.add_argument("--samples", type=int, default=experiments.CURVE_SAMPLES)
    _add_output(p, "curves.csv")

    p = sub.add_parser("unidir", help="unidirectional coupling: fitted against predicted slopes")
    _add_params(p, lambdas=False)
    p.add_argument("--lambda", dest="lam", type=float, default=1e-5)
    p.add_argument("--n", default="2:80", help="a:b")
    _add_output(p, "unidir.csv")

    p = sub.add_parser("validate", help="run the acceptance criteria")
    p.add_argument("--only", default=None, help="comma list of criterion numbers")
    _add_output(p, "validate.csv")
    return parser


def apply_config(args, parser_actions):
    if not args.config:
        return args
    try:
        data = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    allowed = {a.dest for a in parser_actions} - {"help", "config", "command", "version"}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown config keys for {args.command}: {', '.join(unknown)}")
    for key, value in data.items():
        setattr(args, key, value)
    return args


def _params(args):
    missing = [k for k in ("t1", "t2", "gamma") if getattr(args, k, None) is None]
    if missing:
        raise UsageError("missing required parameters: " + ", ".join("--" + m for m in missing))
    return ChainParams(
        args.t1, args.t2, args.gamma, getattr(args, "lambda_l", 0.0), getattr(args, "lambda_r", 0.0)
    )


def _fmt(args):
    if args.format:
        return args.format
    return "json" if str(args.out).lower().endswith(".json") else "csv"


def _meta(params=None, **extra):
    meta = {}
    if params is not None:
        meta["params"] = params.as_dict()
    meta.update(extra)
    return meta


# -- commands -----------------------------------------------------------------


def cmd_spectrum(args):
    params = _params(args)
    ns = parse_n_range(args.n)
    art = TableArtifact(
        "ntoslab.spectrum/1",
        [("N", "int"), ("index", "int"), ("re", "float"), ("im", "float"), ("is_emin", "int"), ("source", "str")],
        metadata=_meta(params, n=ns, precision_floor=PRECISION_FLOOR, basis="A1,B1,...,A_N"),
    )
    for n in ns:
        rec = spectrum_record(params, n)
        order = np.lexsort((np.asarray(rec.eigenvalues).imag, np.asarray(rec.eigenvalues).real))
        for k, idx in enumerate(order):
            ev = complex(rec.eigenvalues[idx])
            is_min = int(ev == rec.e_min)
            art.add_row(n, k, ev.real, ev.imag, is_min, rec.e_min_source if is_min else "dense_eig")
    return [(art, args.out)]


def cmd_nsweep(args):
    params = _params(args)
    ns = parse_n_range(args.n)
    sweep = experiments.nsweep(params, ns[0], ns[-1], args.floor)
    wanted = set(ns)
    art = TableArtifact(
        "ntoslab.nsweep/1",
        [("N", "int"), ("re_emin", "float"), ("im_emin", "float"), ("ln_abs_emin", "float"), ("pred_ln_abs", "float")],
        metadata=_meta(
            params,
            n=[ns[0], ns[-1], ns[1] - ns[0] if len(ns) > 1 else 1],
            precision_floor=args.floor,
            root_solver_n=[r.N for r in sweep.records if r is not None and r.e_min_source == "consistency_root" and r.N in wanted],
            errors={str(k): v for k, v in sweep.errors.items() if k in wanted},
        ),
    )
    for rec, pred in zip(sweep.records, sweep.predictions):
        if rec is None or rec.N not in wanted:
            continue
        e = rec.e_min
        ln_abs = math.log(abs(e)) if e != 0 else -math.inf
        art.add_row(rec.N, e.real, e.imag, ln_abs, float(pred))
    return [(art, args.out)]


def cmd_phase(args):
    quantities = [q.strip() for q in str(args.quantity).split(",") if q.strip()]
    if args.gamma is None:
        raise UsageError("missing required parameter --gamma")
    t1r, t2r = parse_grid(args.t1), parse_grid(args.t2)
    outputs = []
    out = Path(args.out)
    for q in quantities:
        grid = experiments.phase_grid(
            t1r, t2r, args.gamma, q, (args.lambda_l, args.lambda_r), args.tube, args.resolution, args.saturation_form
        )
        art = TableArtifact(
            "ntoslab.phase/1",
            [("t1", "float"), ("t2", "float"), ("value", "float"), ("mask", "int")],
            metadata=dict(grid.meta, quantity=q, t1_range=list(t1r), t2_range=list(t2r)),
        )
        for i, t1 in enumerate(grid.t1_axis):
            for j, t2 in enumerate(grid.t2_axis):
                art.add_row(t1, t2, grid.values[i, j], int(grid.mask[i, j]))
        path = out if len(quantities) == 1 else out.with_name(f"{out.stem}_{q}{out.suffix}")
        outputs.append((art, path))
    return outputs


def cmd_saturation(args):
    params = _params(args)
    pred = analytic.saturation_prediction(params, form=args.saturation_form)
    if args.n:
        ns = parse_n_range(args.n)
        lo, hi = ns[0], ns[-1]
    else:
        lo, hi = 2, min(experiments.MAX_SWEEP_N, int(math.ceil(1.5 * pred.N_c)) + 2)
    sweep = experiments.nsweep(params, lo, hi)
    sat = experiments.detect_saturation(sweep, args.im_tol)
    nan = math.nan
    art = TableArtifact(
        "ntoslab.saturation/1",
        [
            ("branch", "str"), ("form", "str"), ("lambert_arg", "float"), ("E_c_pred", "float"), ("N_c_pred", "float"),
            ("criterion", "str"), ("N_c_num", "int"), ("E_c_num", "float"), ("E_at_onset", "float"),
        ],
        metadata=_meta(params, n=[lo, hi], im_tol=args.im_tol, stall_fraction=experiments.STALL_FRACTION),
    )
    art.add_row(
        pred.branch, pred.form, pred.lambert_arg, pred.E_c, pred.N_c, sat.criterion,
        sat.N_c_num if sat.saturated else -1,
        sat.E_c_num if sat.saturated else nan,
        sat.E_at_onset if sat.saturated else nan,
    )
    return [(art, args.out)]


def cmd_curves(args):
    params = _params(args)
    curve = analytic.bulk_curves(params, args.kind, args.samples)
    art = TableArtifact(
        "ntoslab.curves/1",
        [("branch", "int"), ("parameter", "float"), ("re", "float"), ("im", "float")],
        metadata=_meta(params, kind=args.kind, samples=args.samples),
    )
    m = curve.parameter.size
    for k, e in enumerate(curve.samples):
        art.add_row(1 if k < m else -1, curve.parameter[k % m], e.real, e.imag)
    return [(art, args.out)]


def cmd_unidir(args):
    params = _params(args)
    ns = parse_n_range(args.n)
    rows = experiments.unidirectional_comparison(params.t1, params.t2, params.gamma, args.lam, ns[0], ns[-1])
    art = TableArtifact(
        "ntoslab.unidir/1",
        [("zeroed_side", "str"), ("pred_slope", "float"), ("fit_slope", "float"), ("points_used", "int")],
        metadata=_meta(params, coupling=args.lam, n=[ns[0], ns[-1]]),
    )
    for r in rows:
        art.add_row(r["zeroed_side"], r["pred_slope"], r["fit_slope"], r["points_used"])
    return [(art, args.out)]


def cmd_validate(args):
    from . import acceptance

    only = None
    if args.only:
        try:
            only = [int(x) for x in str(args.only).split(",")]
        except ValueError:
            raise UsageError("--only takes a comma list of integers") from None
    results = acceptance.run_all(only)
    art = TableArtifact(
        "ntoslab.validate/1",
        [("criterion", "int"), ("name", "str"), ("status", "str"), ("detail", "str")],
        metadata={"criteria": [r.number for r in results], "thresholds": acceptance.THRESHOLDS},
    )
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.number}. {r.name.ljust(width)}  {r.detail}")
        art.add_row(r.number, r.name, status, r.detail)
    args._validate_failed = not all(r.passed for r in results)
    return [(art, args.out)]


COMMANDS = {
    "spectrum": cmd_spectrum,
    "nsweep": cmd_nsweep,
    "phase": cmd_phase,
    "saturation": cmd_saturation,
    "curves": cmd_curves,
    "unidir": cmd_unidir,
    "validate": cmd_validate,
}


def _glue_negative_values(argv):
    """Turn ``--t1 -4:4:161`` into ``--t1=-4:4:161`` so argparse does not read a flag."""
    out = []
    k = 0
    while k < len(argv):
        tok = argv[k]
        if tok in ("--t1", "--t2", "--n") and k + 1 < len(argv) and argv[k + 1].startswith("-") and ":" in argv[k + 1]:
            out.append(f"{tok}={argv[k + 1]}")
            k += 2
            continue
        out.append(tok)
        k += 1
    return out


def run_cli(argv=None) -> int:
    parser = build_parser()
    argv = _glue_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:  # --help / --version
            return int(exc.code or 0)
        sub_actions = parser._subparsers._group_actions[0].choices[args.command]._actions
        args = apply_config(args, sub_actions)
        outputs = COMMANDS[args.command](args)
        for artifact, path in outputs:
            write_table(artifact, _fmt(args), path)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except INPUT_ERRORS as exc:
        print(f"invalid input ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NtosError, OSError, ValueError, ArithmeticError) as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_ERROR
    if getattr(args, "_validate_failed", False):
        return EXIT_INVALID
    return EXIT_OK


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
