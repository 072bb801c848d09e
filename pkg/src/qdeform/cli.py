"""``qdeform`` command line.

Every subcommand prints a JSON report ``{command, params, seed, checks,
max_error, verdict, results}`` (or writes it with ``--report``). Exit status:
0 when all checks pass, 1 when a check fails, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import dirac, fock, kahler, ncalg
from .errors import ParameterError, ParseError, QDeformError, SymbolError
from .flow import FlowConfig, integrate, measure_frequency
from .parser import parse_poly
from .poisson import BUILTINS, SYMBOLIC, builtin, casimir_check, jacobi_residual, real_form
from .serialize import dumps_structure, loads_structure

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ----------------------------------------------------------------------------- helpers

def _rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a rational number: {text!r}")


def _beta_arg(text: str):
    if text == "symbolic":
        return SYMBOLIC
    value = _rational(text)
    if value == 0:
        raise UsageError("beta must be non-zero")
    return value


def _complex(text: str) -> complex:
    t = text.strip().replace(" ", "")
    if t.endswith("i"):
        t = t[:-1] + "j"
    try:
        return complex(t)
    except ValueError:
        raise UsageError(f"not a complex number: {text!r}")


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"not a comma separated list of numbers: {text!r}")


def _load_structure(spec: str, beta, n: int):
    if spec in BUILTINS:
        return builtin(spec, beta, n)
    if os.path.exists(spec):
        with open(spec) as fh:
            P = loads_structure(fh.read())
        return P.bind_beta(beta) if P.beta == SYMBOLIC and beta != SYMBOLIC else P
    raise UsageError(f"unknown structure {spec!r}: expected one of {', '.join(BUILTINS)} or a JSON file")


def _check(name: str, value: float, tol: float) -> dict:
    value = float(value)
    return {"name": name, "value": value, "tol": tol, "pass": bool(value <= tol)}


def _report(command: str, params: dict, checks: list, seed=None, results=None) -> dict:
    finite = [c["value"] for c in checks if math.isfinite(c["value"])]
    ok = all(c["pass"] for c in checks)
    return {
        "command": command,
        "params": params,
        "seed": seed,
        "checks": checks,
        "max_error": max(finite) if finite else 0.0,
        "verdict": "pass" if ok else "fail",
        "results": results or {},
    }


def _emit(report: dict, path: str | None) -> int:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_PASS if report["verdict"] == "pass" else EXIT_FAIL


def _coef_size(poly) -> float:
    return max((abs(complex(c)) for _, c in poly.items()), default=0.0)


# ----------------------------------------------------------------------------- commands

def cmd_verify_jacobi(args) -> int:
    P = _load_structure(args.structure, _beta_arg(args.beta), args.n)
    residual = jacobi_residual(P)
    worst = max((_coef_size(r) for r in residual), default=0.0)
    checks = [_check("jacobi", worst, 0.0)]
    for k, C in enumerate(P.casimirs):
        checks.append(_check(f"casimir{k}", 0.0 if casimir_check(P, C) else 1.0, 0.0))
    if args.dump:
        with open(args.dump, "w") as fh:
            fh.write(dumps_structure(P) + "\n")
    nonzero = [str(r) for r in residual if not r.is_zero()]
    params = {"structure": args.structure, "n": args.n, "beta": args.beta}
    return _emit(_report("verify-jacobi", params, checks, results={"nonzero_residuals": nonzero}), args.report)


def _start_point(P, args) -> dict:
    names = list(P.names)
    inv = P.chart.involution
    point = {}
    if args.start:
        for item in args.start.split(","):
            if "=" not in item:
                raise UsageError(f"--start expects name=value pairs, got {item!r}")
            key, val = item.split("=", 1)
            key = key.strip()
            if key not in names:
                raise UsageError(f"--start names unknown symbol {key!r}")
            point[key] = _complex(val)
    elif args.b0 is not None:
        point[names[0]] = _complex(args.b0)
    else:
        raise UsageError("flow needs --b0 or --start")
    for a in list(point):
        partner = inv[a]
        if partner != a and partner not in point:
            point[partner] = point[a].conjugate()
    missing = [s for s in names if s not in point]
    if missing:
        raise UsageError(f"start point does not bind {', '.join(missing)}")
    return point


def cmd_flow(args) -> int:
    beta = _beta_arg(args.beta)
    if beta == SYMBOLIC:
        raise UsageError("flow needs a numeric beta")
    P = _load_structure(args.structure, beta, args.n)
    H = parse_poly(args.H, {"beta": beta})
    start = _start_point(P, args)
    cfg = FlowConfig(args.t, rel_tol=args.rtol, abs_tol=args.atol, sample_count=args.samples)
    traj = integrate(P, H, start, cfg)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(traj.to_csv())
        with open(os.path.splitext(args.out)[0] + ".json", "w") as fh:
            fh.write(traj.to_json())

    checks = [
        _check("energy_drift", np.max(traj.monitors["energy_drift"]), args.tol),
        _check("conjugation_defect", np.max(traj.monitors["conjugation_defect"]), args.tol),
    ]
    for key, series in traj.monitors.items():
        if key.startswith("casimir"):
            checks.append(_check(key, np.max(series), args.tol))
    results = {}
    if P.chart.kind == "holomorphic":
        symbol = P.names[0]
        freq = measure_frequency(traj, symbol)
        results["frequency"] = freq
        expected = args.expect_frequency
        if expected is None and P.name == "qosc1" and H == parse_poly("b* * b"):
            expected = 1.0 - abs(start[symbol]) ** 2 / float(beta)
        if expected is not None:
            results["expected_frequency"] = expected
            checks.append(_check("frequency", abs(freq - expected) / abs(expected), args.freq_tol))
    params = {
        "structure": args.structure, "n": args.n, "beta": args.beta, "H": args.H,
        "start": {k: [v.real, v.imag] for k, v in sorted(start.items())}, "t": args.t, "samples": args.samples,
    }
    return _emit(_report("flow", params, checks, results=results), args.report)


def cmd_kahler(args) -> int:
    beta = float(_beta_arg(args.beta))
    model = kahler.KahlerModel(args.n, beta)
    params = {"n": args.n, "beta": args.beta}
    if args.point:
        z = np.array([_complex(v) for v in args.point.split(",")])
        if len(z) != args.n:
            raise UsageError(f"--point needs {args.n} complex coordinates")
        g = kahler.metric(z, model)
        fd_err = float(np.max(np.abs(kahler.metric_fd(z, model) - g)))
        curv = kahler.scalar_curvature(z, model)
        checks = [
            _check("metric_fd", fd_err, args.tol),
            _check("curvature_ratio", abs(curv.ratio - kahler.CURVATURE_RATIO), 1e-8),
        ]
        results = {
            "metric_diag": [float(v) for v in g],
            "potential": kahler.potential(z, model),
            "curvature": curv.impl,
            "curvature_reference": curv.reference,
        }
        params["point"] = args.point
        return _emit(_report("kahler", params, checks, results=results), args.report)

    radii = _floats(args.radii)
    lines = ["r,u,metric,metric_fd_error,curvature,curvature_reference,ratio"]
    worst_fd, worst_ratio = 0.0, 0.0
    for r in radii:
        z = np.zeros(args.n, dtype=complex)
        z[0] = r
        g = kahler.metric(z, model)
        fd_err = float(np.max(np.abs(kahler.metric_fd(z, model) - g)))
        curv = kahler.scalar_curvature(z, model)
        worst_fd = max(worst_fd, fd_err)
        worst_ratio = max(worst_ratio, abs(curv.ratio - kahler.CURVATURE_RATIO))
        u = float(model.u(z)[0])
        lines.append(f"{r!r},{u!r},{float(g[0])!r},{fd_err!r},{curv.impl!r},{curv.reference!r},{curv.ratio!r}")
    csv = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(csv)
    checks = [_check("metric_fd", worst_fd, args.tol), _check("curvature_ratio", worst_ratio, 1e-8)]
    params["radii"] = radii
    return _emit(_report("kahler", params, checks, results={"rows": len(radii)}), args.report)


def cmd_dirac_verify(args) -> int:
    beta = _beta_arg(args.beta)
    if args.structure in BUILTINS:
        P = dirac.structure_for(args.structure, beta, args.n)
    else:
        P = _load_structure(args.structure, beta, args.n)
        if P.chart.kind != "real":
            P = real_form(P)
    rng = np.random.default_rng(args.seed)
    samples = dirac.sample_points(P, args.samples, rng)
    rep = dirac.verify_reduction(P, samples, tol=args.tol, method=args.method)
    checks = [_check("reduction", rep.max_error, args.tol)]
    params = {"structure": args.structure, "n": args.n, "beta": args.beta, "samples": args.samples,
              "tol": args.tol, "method": args.method}
    return _emit(_report("dirac verify", params, checks, seed=args.seed, results={"points": rep.rows}), args.report)


def cmd_ncalg_check(args) -> int:
    if args.rules:
        with open(args.rules) as fh:
            R = ncalg.RewriteSystem.from_json(fh.read())
        label = args.rules
    else:
        R = ncalg.builtin_system(args.system, _rational(args.hbar), _rational(args.beta))
        label = args.system
    residuals, checks = {}, []
    gens = R.order
    for a in range(len(gens)):
        for b in range(a + 1, len(gens)):
            for c in range(b + 1, len(gens)):
                res = ncalg.jacobi_check(R, gens[a], gens[b], gens[c])
                key = f"jacobi({gens[a]},{gens[b]},{gens[c]})"
                residuals[key] = str(res) if not res.is_zero() else "0"
                checks.append(_check(key, _coef_size(res), 0.0))
    if not checks:
        checks.append(_check("jacobi", 0.0, 0.0))
    params = {"system": label, "hbar": args.hbar, "beta": args.beta}
    return _emit(_report("ncalg check", params, checks, results={"residuals": residuals}), args.report)


def cmd_fock_residuals(args) -> int:
    if args.algebra == "eq1":
        ops = fock.qoscillator_ops(args.trunc, args.hbar, args.q)
        rep = fock.relation_residuals(ops, "eq1")
    else:
        ops = fock.multimode_ops(args.modes, args.trunc, args.hbar, args.q, dressing=args.dressing, check=False)
        rep = fock.relation_residuals(ops, "suqn")
    checks = [_check(k, v, args.tol) for k, v in rep.residuals.items()]
    params = {"algebra": args.algebra, "modes": args.modes, "trunc": args.trunc, "q": args.q, "hbar": args.hbar,
              "dressing": args.dressing}
    return _emit(_report("fock residuals", params, checks, results={"interior": rep.interior}), args.report)


def cmd_fock_limit(args) -> int:
    if args.steps < 2:
        raise UsageError("--steps must be at least 2")
    hbars = [args.hbar0 / 2**k for k in range(args.steps)]
    scan = fock.classical_limit_scan(args.beta, args.action, hbars)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(scan.to_csv())
    else:
        sys.stderr.write(scan.to_csv())
    checks = [
        _check("extrapolated_vs_profile", abs(scan.extrapolated - scan.target), 1e-10),
        _check("slope_vs_one", abs(scan.slope - 1.0), 0.1),
        _check("operator_identity", scan.operator_residual, 1e-12),
    ]
    params = {"beta": args.beta, "action": args.action, "steps": args.steps, "hbar0": args.hbar0}
    results = {"target": scan.target, "extrapolated": scan.extrapolated, "slope": scan.slope}
    return _emit(_report("fock limit", params, checks, results=results), args.report)


# ----------------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qdeform", description="Deformed Poisson and operator algebra toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--report", help="write the JSON report here instead of stdout")

    p = sub.add_parser("verify-jacobi", help="exact Jacobi and Casimir checks")
    p.add_argument("--structure", required=True, help=f"one of {', '.join(BUILTINS)} or a JSON file")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--beta", default="1", help="rational or 'symbolic'")
    p.add_argument("--dump", help="also write the structure as JSON")
    common(p)
    p.set_defaults(func=cmd_verify_jacobi)

    p = sub.add_parser("flow", help="integrate a Hamiltonian flow")
    p.add_argument("--structure", required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--beta", default="1")
    p.add_argument("--H", required=True, help="Hamiltonian expression")
    p.add_argument("--b0", help="initial value of the first coordinate (partner is its conjugate)")
    p.add_argument("--start", help="comma separated name=value pairs")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--samples", type=int, default=2001)
    p.add_argument("--rtol", type=float, default=1e-12)
    p.add_argument("--atol", type=float, default=1e-14)
    p.add_argument("--tol", type=float, default=1e-8, help="tolerance for drift monitors")
    p.add_argument("--expect-frequency", type=float)
    p.add_argument("--freq-tol", type=float, default=1e-6)
    p.add_argument("--out", help="trajectory CSV (a .json mirror is written alongside)")
    common(p)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("kahler", help="metric and curvature tables")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--beta", default="1")
    p.add_argument("--radii", default="0.1,0.2,0.3,0.4,0.5,0.6")
    p.add_argument("--point", help="single point: comma separated complex coordinates")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out", help="CSV output for the radial grid")
    common(p)
    p.set_defaults(func=cmd_kahler)

    p = sub.add_parser("dirac", help="second-class constraint reduction")
    dsub = p.add_subparsers(dest="action", required=True)
    d = dsub.add_parser("verify")
    d.add_argument("--structure", required=True)
    d.add_argument("--n", type=int, default=1)
    d.add_argument("--beta", default="1")
    d.add_argument("--samples", type=int, default=20)
    d.add_argument("--tol", type=float, default=1e-10)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--method", choices=("closed", "quadrature"), default="closed")
    common(d)
    d.set_defaults(func=cmd_dirac_verify)

    p = sub.add_parser("ncalg", help="noncommutative rewriting checks")
    nsub = p.add_subparsers(dest="action", required=True)
    c = nsub.add_parser("check")
    c.add_argument("--system", choices=ncalg.SYSTEMS, default="eq5")
    c.add_argument("--hbar", default="1/10")
    c.add_argument("--beta", default="1")
    c.add_argument("--rules", help="JSON rule system (overrides --system)")
    common(c)
    c.set_defaults(func=cmd_ncalg_check)

    p = sub.add_parser("fock", help="truncated Fock representations")
    fsub = p.add_subparsers(dest="action", required=True)
    r = fsub.add_parser("residuals")
    r.add_argument("--algebra", choices=("eq1", "suqn"), required=True)
    r.add_argument("--modes", type=int, default=2)
    r.add_argument("--trunc", type=int, default=10)
    r.add_argument("--q", type=float, default=0.9)
    r.add_argument("--hbar", type=float, default=1.0)
    r.add_argument("--dressing", choices=("q^N", "none"), default="q^N")
    r.add_argument("--tol", type=float, default=1e-12)
    common(r)
    r.set_defaults(func=cmd_fock_residuals)
    lim = fsub.add_parser("limit")
    lim.add_argument("--beta", type=float, default=1.0)
    lim.add_argument("--action", type=float, default=1.0)
    lim.add_argument("--steps", type=int, default=8)
    lim.add_argument("--hbar0", type=float, default=0.1)
    lim.add_argument("--out", help="CSV output (stderr if omitted)")
    common(lim)
    lim.set_defaults(func=cmd_fock_limit)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)  # exits with status 2 on bad flags
    try:
        return args.func(args)
    except (UsageError, ParseError, ParameterError, SymbolError) as exc:
        ap.print_usage(sys.stderr)
        sys.stderr.write(f"qdeform: error: {exc}\n")
        return EXIT_USAGE
    except QDeformError as exc:
        sys.stderr.write(f"qdeform: check failed: {exc}\n")
        return EXIT_FAIL
