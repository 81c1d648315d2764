"""Command-line front end: point evaluation, verification campaigns and tables.

Weights are passed as the odd integer 2m and complex numbers as ``re,im``.
Exit codes: 0 success, 2 budget warning, 1 failure or invalid input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import config

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_WARN = 2

FAMILIES = ("delta", "psi", "pfkm", "delta-via-psi")
CHECKS = ("reproducing", "thm61", "fourier", "hecke", "adjoint", "norm", "cocycle")
TABLES = ("nonvanishing", "delta-coeffs", "psi-bounds")

# default tolerance per check; WARN up to WARN_FACTOR times this
CHECK_TOL = {
    "reproducing": 1e-2,
    "thm61": 1e-2,
    "fourier": 1e-2,
    "hecke": 1e-2,
    "adjoint": 1e-2,
    "norm": 1e-6,
    "cocycle": 1e-8,
}
WARN_FACTOR = 10.0


class CliError(Exception):
    pass


def parse_complex(text: str) -> complex:
    """``"re,im"`` -> complex."""
    parts = str(text).split(",")
    if len(parts) != 2:
        raise CliError(f"complex values are written re,im; got {text!r}")
    try:
        return complex(float(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise CliError(f"cannot parse {text!r} as re,im") from exc


def parse_upper(text: str, name: str) -> complex:
    z = parse_complex(text)
    if not z.imag > 0.0:
        raise CliError(f"{name} must lie in the upper half-plane, got Im = {z.imag:g}")
    return z


def parse_int_list(text: str) -> list[int]:
    """``"1,3,5"`` or ``"5..13"`` (inclusive, odd entries only for 2m lists step 2)."""
    text = str(text)
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(t) for t in text.split(",") if t.strip()]


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file whose keys mirror the long flags")
    p.add_argument("--N", type=int, default=4, help="level")
    p.add_argument("--two-m", type=int, default=9, help="twice the weight (odd)")
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--n", type=int, default=1, help="psi index")
    p.add_argument("--p", type=int, default=3, help="Hecke prime")
    p.add_argument("--xi", default="0,1.5", help="re,im")
    p.add_argument("--chi", default=None, help="N:index or JSON character file (default trivial)")
    p.add_argument("--cmax", type=float, default=config.DEFAULT_CMAX)
    p.add_argument("--point-cmax", type=float, default=config.DEFAULT_POINT_CMAX)
    p.add_argument("--lattice-terms", type=int, default=config.DEFAULT_EM_TERMS)
    p.add_argument("--nmax", type=int, default=None)
    p.add_argument("--res", type=int, default=config.DEFAULT_QUAD_RES, help="quadrature nodes per axis")
    p.add_argument("--ymax", type=float, default=config.DEFAULT_YMAX)
    p.add_argument("--y0", type=float, default=None, help="Fourier sampling height")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--tol", type=float, default=None, help="pass tolerance")
    p.add_argument("--tail-tol", type=float, default=1e-6, help="relative tail size that triggers a budget warning")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", default=None, help="report path (stdout if omitted)")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="halfpoincare", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    pe = sub.add_parser("eval", help="evaluate a series at a point")
    pe.add_argument("family", choices=FAMILIES)
    pe.add_argument("--z", default="0,1", help="re,im")
    _common(pe)
    pv = sub.add_parser("verify", help="run a verification check")
    pv.add_argument("check", choices=CHECKS)
    pv.add_argument("--cases", type=int, default=1000, help="random cases for cocycle")
    _common(pv)
    pt = sub.add_parser("table", help="emit a CSV/JSON table")
    pt.add_argument("kind", choices=TABLES)
    pt.add_argument("--k-list", default="0..4")
    pt.add_argument("--two-m-list", default="5,7,9,11,13")
    pt.add_argument("--level", type=int, default=None, help="evaluate corollary cases at this N")
    _common(pt)
    return parser


def _flag_names(parser: argparse.ArgumentParser) -> set:
    names = set()
    for action in parser._actions:
        names.add(action.dest)
    return names


def parse_args(argv=None) -> argparse.Namespace:
    """Parse once, then apply a JSON config as defaults so explicit flags win."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot read config {args.config}: {exc}") from exc
        sub = parser._subparsers._group_actions[0].choices[args.command]
        cfg = {str(k).replace("-", "_"): v for k, v in cfg.items()}
        unknown = set(cfg) - _flag_names(sub)
        if unknown:
            raise CliError(f"unknown config keys: {sorted(unknown)}")
        for key in ("command", "family", "check", "kind"):
            cfg.pop(key, None)
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def config_echo(args: argparse.Namespace) -> dict:
    """The resolved configuration, JSON-serializable and key-sorted."""
    out = {k: v for k, v in sorted(vars(args).items()) if k not in ("config", "output")}
    return out


def config_hash(args: argparse.Namespace) -> str:
    blob = json.dumps(config_echo(args), sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha1(b"blob %d\0" % len(blob) + blob).hexdigest()


# ---------------------------------------------------------------------------
# object construction


def _cx(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def build_context(args) -> dict:
    """Validate the numeric inputs and build weight, character and budget."""
    from .arithmetic import DirichletCharacter
    from .group_core import HalfWeight
    from .series import TruncationBudget

    if args.N < 1:
        raise CliError("N must be a positive integer")
    try:
        w = HalfWeight(args.two_m)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if args.k < 0 or args.n < 1:
        raise CliError("need k >= 0 and n >= 1")
    xi = parse_upper(args.xi, "xi")
    try:
        chi = DirichletCharacter.parse(args.chi) if args.chi else DirichletCharacter.trivial(args.N)
        budget = TruncationBudget(
            cmax=args.cmax, point_cmax=args.point_cmax, lattice_terms=args.lattice_terms, quad_res=args.res, tol=args.tail_tol
        )
    except (ValueError, OSError, KeyError) as exc:
        raise CliError(str(exc)) from exc
    if args.N % chi.modulus:
        raise CliError(f"character modulus {chi.modulus} does not divide N = {args.N}")
    return {"w": w, "chi": chi, "xi": xi, "budget": budget}


def _apply_threads():
    n = config.thread_count()
    if n:
        import numba

        numba.set_num_threads(max(1, min(n, numba.config.NUMBA_NUM_THREADS)))


# ---------------------------------------------------------------------------
# eval


def cmd_eval(args) -> tuple[dict, int]:
    from .series import SeriesSpec, series_values

    ctx = build_context(args)
    z = parse_upper(args.z, "z")
    index = args.n if args.family == "psi" else args.k
    try:
        spec = SeriesSpec(args.family, args.N, ctx["w"], index, ctx["xi"], ctx["chi"])
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    pb = ctx["budget"].for_points()
    v, t, c = series_values(spec, np.array([z]), pb)
    value, tail = complex(v[0]), float(t[0])
    warn = not (tail <= 10.0 * pb.tol * max(abs(value), 1e-300))
    out = {
        "family": args.family,
        "z": _cx(z),
        "value": _cx(value),
        "tail_estimate": tail,
        "tail_kind": "implementer-derived majorant",
        "terms_used": int(c[0]),
        "warning": bool(warn),
        "budget": pb.describe(),
    }
    return out, EXIT_WARN if warn else EXIT_OK


# ---------------------------------------------------------------------------
# verify


def _status(rel_err: float, tol: float) -> tuple[str, int]:
    if rel_err < tol:
        return "PASS", EXIT_OK
    if rel_err < WARN_FACTOR * tol:
        return "WARN", EXIT_WARN
    return "FAIL", EXIT_FAIL


def _psi_functions(args, ctx, n):
    from .series import SeriesSpec, series_function

    spec = SeriesSpec("psi", args.N, ctx["w"], n, None, ctx["chi"])
    return series_function(spec, ctx["budget"]), series_function(spec, ctx["budget"].for_points())


def _mesh(args):
    from .petersson import fundamental_mesh

    return fundamental_mesh(args.N, args.ymax, args.res)


def _identity_details(rep) -> dict:
    return {
        "lhs": _cx(rep.lhs),
        "rhs": _cx(rep.rhs),
        "abs_err": rep.abs_err,
        "rel_err": rep.rel_err,
        "quad_error": rep.quad_error,
        "coverage": rep.coverage,
    }


def check_reproducing(args, ctx) -> tuple[float, str, dict]:
    from .petersson import verify_reproducing

    f, fp = _psi_functions(args, ctx, args.n)
    mesh = _mesh(args)
    rep = verify_reproducing(f, args.k, ctx["xi"], ctx["w"], ctx["chi"], args.N, ctx["budget"], mesh, f_point_eval=fp)
    return rep.rel_err, rep.budget, _identity_details(rep)


def check_thm61(args, ctx) -> tuple[float, str, dict]:
    from .petersson import verify_thm61

    f, fp = _psi_functions(args, ctx, args.n)
    mesh = _mesh(args)
    rep = verify_thm61(f, args.k, ctx["w"], ctx["chi"], args.N, ctx["budget"], mesh, f_point_eval=fp)
    return rep.rel_err, rep.budget, _identity_details(rep)


def _delta_coefficients(args, ctx, nmax):
    """(predicted, predicted_err, extracted, extracted_err, y0, S) for n = 1..nmax."""
    from dataclasses import replace

    from .series import SeriesSpec, series_function
    from .spectral import delta_coeffs_predicted, fourier_coefficients

    b = ctx["budget"]
    pred = delta_coeffs_predicted(nmax, args.k, ctx["w"], ctx["xi"], ctx["chi"], args.N, b)
    half = replace(b, point_cmax=0.5 * b.point_cmax)
    pred_half = delta_coeffs_predicted(nmax, args.k, ctx["w"], ctx["xi"], ctx["chi"], args.N, half)
    y0 = args.y0 if args.y0 is not None else 1.5 / nmax
    S = args.samples or config.SAMPLES_PER_COEFF * nmax
    delta = series_function(SeriesSpec("delta", args.N, ctx["w"], args.k, ctx["xi"], ctx["chi"]), b.for_points())
    q = fourier_coefficients(delta, y0, nmax, S)
    return pred, np.abs(pred - pred_half), q.coeffs, q.errors, y0, S


def check_fourier(args, ctx) -> tuple[float, str, dict]:
    from .spectral import fourier_coefficients, fourier_via_petersson

    nmax = args.nmax or 5
    pred, perr, ext, eerr, y0, S = _delta_coefficients(args, ctx, nmax)
    rel = np.abs(pred - ext) / np.maximum(np.abs(pred), 1e-300)
    # a_n(psi_n0) for n <= 3: DFT against the Petersson route
    f, fp = _psi_functions(args, ctx, args.n)
    mesh = _mesh(args)
    pet = fourier_via_petersson(f, ctx["w"], ctx["chi"], args.N, mesh, ctx["budget"], 3)
    dft = fourier_coefficients(fp, 0.5, 3, 32)
    rel_psi = np.abs(pet.coeffs - dft.coeffs) / np.maximum(np.abs(dft.coeffs), 1e-300)
    details = {
        "n": list(range(1, nmax + 1)),
        "predicted": [_cx(v) for v in pred],
        "predicted_err": perr.tolist(),
        "extracted": [_cx(v) for v in ext],
        "extracted_err": eerr.tolist(),
        "rel_err": rel.tolist(),
        "psi_petersson": [_cx(v) for v in pet.coeffs],
        "psi_petersson_err": pet.errors.tolist(),
        "psi_dft": [_cx(v) for v in dft.coeffs],
        "psi_dft_err": dft.errors.tolist(),
        "psi_rel_err": rel_psi.tolist(),
        "psi_tol": 5e-2,
    }
    # the psi cross-check has its own looser tolerance; fold it in relative to it
    tol = args.tol or CHECK_TOL["fourier"]
    worst = max(float(np.max(rel)), float(np.max(rel_psi)) * tol / 5e-2)
    budget = ctx["budget"].describe() + f",y0={y0:g},S={S},res={args.res}"
    return worst, budget, details


def check_hecke(args, ctx) -> tuple[float, str, dict]:
    from .spectral import hecke_delta_check

    nmax = args.nmax or 10
    try:
        rep = hecke_delta_check(args.k, ctx["w"], ctx["xi"], ctx["chi"], args.N, args.p, ctx["budget"], nmax, args.y0, args.samples)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    details = {
        "p": args.p,
        "n": list(range(1, nmax + 1)),
        "direct": [_cx(v) for v in rep.direct],
        "via_psi": [_cx(v) for v in rep.via_psi],
        "noise": rep.noise.tolist(),
        "rel_err": rep.rel_err.tolist(),
    }
    return rep.max_rel_err(), rep.budget, details


def check_adjoint(args, ctx) -> tuple[float, str, dict]:
    from dataclasses import replace

    from .spectral import HeckeSpec, hecke_adjointness

    f, _ = _psi_functions(args, ctx, args.n)
    g, _ = _psi_functions(args, ctx, args.n + 1)
    half = dict(ctx, budget=replace(ctx["budget"], cmax=0.5 * ctx["budget"].cmax))
    f2, _ = _psi_functions(args, half, args.n)
    g2, _ = _psi_functions(args, half, args.n + 1)
    try:
        spec = HeckeSpec(args.p, ctx["w"], ctx["chi"], args.N)
        rep = hecke_adjointness(f, g, spec, _mesh(args), f2, g2)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    details = {
        "p": args.p,
        "lhs": _cx(rep.lhs),
        "rhs": _cx(rep.rhs),
        "abs_err": rep.abs_err,
        "quad_error": rep.quad_error,
        "trunc_error": rep.trunc_error,
        "within_error": rep.abs_err <= rep.quad_error + rep.trunc_error,
    }
    return rep.rel_err, ctx["budget"].describe() + f",res={args.res}", details


def check_norm(args, ctx) -> tuple[float, str, dict]:
    from .petersson import verify_norm_identity

    rep = verify_norm_identity(args.k, ctx["w"])
    return rep.rel_err, rep.budget, _identity_details(rep)


def check_cocycle(args, ctx) -> tuple[float, str, dict]:
    from .arithmetic import multiplier_checks

    worst = multiplier_checks(np.random.default_rng(args.seed), args.cases)
    return max(worst.values()), f"cases={args.cases},seed={args.seed}", worst


CHECK_FUNCS = {
    "reproducing": check_reproducing,
    "thm61": check_thm61,
    "fourier": check_fourier,
    "hecke": check_hecke,
    "adjoint": check_adjoint,
    "norm": check_norm,
    "cocycle": check_cocycle,
}


def cmd_verify(args) -> tuple[dict, int]:
    ctx = build_context(args)
    tol = args.tol or CHECK_TOL[args.check]
    rel_err, budget, details = CHECK_FUNCS[args.check](args, ctx)
    status, code = _status(rel_err, tol)
    out = {"check": args.check, "status": status, "rel_err": rel_err, "tol": tol, "budget": budget, "details": details}
    out["summary"] = f"CHECK {args.check} {status} rel_err={rel_err:.3e} budget={budget}"
    return out, code


# ---------------------------------------------------------------------------
# tables


def table_nonvanishing(args, ctx) -> list[dict]:
    from .nonvanishing import threshold_table

    two_ms = parse_int_list(args.two_m_list)
    if any(t % 2 == 0 for t in two_ms):
        raise CliError("2m must be odd; the corollary's m = 4 case is unreachable for half-integral weights")
    if any(t < 5 for t in two_ms):
        raise CliError("thresholds need 2m >= 5")
    ks = parse_int_list(args.k_list)
    if any(k < 0 for k in ks):
        raise CliError("k must be non-negative")
    return threshold_table(ks, two_ms, args.level)


def table_delta_coeffs(args, ctx) -> list[dict]:
    """Predicted (psi_n derivatives) against extracted (DFT) coefficients of Delta."""
    nmax = args.nmax or 10
    pred, perr, ext, eerr, y0, S = _delta_coefficients(args, ctx, nmax)
    rows = []
    for i in range(nmax):
        rows.append(
            {
                "n": i + 1,
                "predicted_re": pred[i].real,
                "predicted_im": pred[i].imag,
                "predicted_err": perr[i],
                "extracted_re": ext[i].real,
                "extracted_im": ext[i].imag,
                "extracted_err": eerr[i],
                "abs_diff": abs(pred[i] - ext[i]),
            }
        )
    return rows


def table_psi_bounds(args, ctx) -> list[dict]:
    """Weighted sup scans of psi_n^(k) with the doubling plateau test."""
    from .spectral import bound_scan

    nmax = args.nmax or 3
    ks = parse_int_list(args.k_list) if args.k_list != "0..4" else [0, 1, 2]
    rows = []
    for n in range(1, nmax + 1):
        f, _ = _psi_functions(args, ctx, n)
        for k in ks:
            scan = bound_scan(f, k, ctx["w"])
            rows.append(
                {
                    "n": n,
                    "k": k,
                    "sup": scan.sup_value,
                    "sup_err": abs(scan.sup_doubled - scan.sup_value),
                    "argmax_re": scan.argmax.real,
                    "argmax_im": scan.argmax.imag,
                    "plateau": scan.plateau_flag,
                }
            )
    return rows


TABLE_FUNCS = {"nonvanishing": table_nonvanishing, "delta-coeffs": table_delta_coeffs, "psi-bounds": table_psi_bounds}


def _fmt(v):
    if isinstance(v, bool) or isinstance(v, (int, np.integer)):
        return str(v)
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.15g}"
    return str(v)


def rows_to_csv(rows: list[dict], header: list[str]) -> str:
    lines = [f"# {h}" for h in header]
    if rows:
        keys = list(rows[0].keys())
        lines.append(",".join(keys))
        for r in rows:
            lines.append(",".join(_fmt(r[k]) for k in keys))
    return "\n".join(lines) + "\n"


def cmd_table(args) -> tuple[dict, int]:
    ctx = build_context(args)
    rows = TABLE_FUNCS[args.kind](args, ctx)
    return {"table": args.kind, "rows": rows}, EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, complex):
        return _cx(obj)
    return obj


def render(args, result: dict) -> str:
    header = [f"config={json.dumps(config_echo(args), sort_keys=True)}", f"config_hash={config_hash(args)}"]
    if args.format == "csv":
        if "rows" in result:
            rows = result["rows"]
        elif "details" in result:
            rows = [{"check": result["check"], "status": result["status"], "rel_err": result["rel_err"], "tol": result["tol"]}]
        else:
            rows = [
                {
                    "family": result["family"],
                    "value_re": result["value"][0],
                    "value_im": result["value"][1],
                    "tail_estimate": result["tail_estimate"],
                    "terms_used": result["terms_used"],
                    "warning": result["warning"],
                }
            ]
        return rows_to_csv(rows, header)
    doc = dict(result)
    doc["config"] = config_echo(args)
    doc["config_hash"] = config_hash(args)
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


COMMANDS = {"eval": cmd_eval, "verify": cmd_verify, "table": cmd_table}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        _apply_threads()
        result, code = COMMANDS[args.command](args)
        text = render(args, result)
        if args.output:
            Path(args.output).write_text(text)
        else:
            sys.stdout.write(text)
        if "summary" in result:
            print(result["summary"])
        return code
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
