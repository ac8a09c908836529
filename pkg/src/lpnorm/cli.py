"""Command line interface: ``lpnorm <subcommand> [options]``.

Every subcommand writes to standard output or to ``--output``.  Floats are
printed with 17 significant digits so that results round-trip exactly.

Exit status is 0 on success, 2 on invalid parameters or configuration and
1 on any other library error (or a failed ``verify`` criterion).
"""

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from lpnorm import __version__
from lpnorm import birkhoff as bk
from lpnorm import poisson_series as ps
from lpnorm.dynamics import State, dominant_frequencies, integrate
from lpnorm.equilibria import BRANCHES, epsilon_form_point, residuals, series_point, triangular_point
from lpnorm.errors import LpnormError, ParameterError
from lpnorm.expansion import VARIABLES, cubic_coeffs, numeric_taylor_oracle, quadratic_coeffs
from lpnorm.linear_normal_form import (
    frequencies,
    normal_form_residual,
    stability,
    whittaker_matrix,
    whittaker_matrix_oracle,
)
from lpnorm.poisson_series import moser_condition
from lpnorm.params import DerivedParams, PerturbationParams, derive
from lpnorm.verify import SUITES, render, run_suite

PARAM_KEYS = ("mu", "q1", "A2", "cd")
SWEEP_KEYS = ("epsilon", "A2", "W1")


class ConfigError(ParameterError):
    """Unreadable or malformed ``--config`` file."""


# serialization ----------------------------------------------------------


def _fmt(x):
    return f"{x:.17g}"


def to_json(obj):
    """JSON text with floats at 17 significant digits; NaN and inf become null."""
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return _fmt(x) if math.isfinite(x) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v).lower() for v in row))
    return "\n".join(lines) + "\n"


def _emit(args, text):
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _monomial(e):
    parts = [f"{v}^{k}" if k > 1 else v for v, k in zip(VARIABLES, e) if k]
    return "*".join(parts) or "1"


# parameter plumbing -----------------------------------------------------


def _load_config(path):
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return data


def _merged(args, keys):
    """Config values overridden by explicit flags."""
    values = {k: v for k, v in _load_config(args.config).items() if k in keys}
    for k in keys:
        flag = getattr(args, k, None)
        if flag is not None:
            values[k] = flag
    return values


def _params(args):
    values = _merged(args, PARAM_KEYS)
    if "mu" not in values:
        raise ParameterError("mu is required (flag --mu or config key 'mu')")
    try:
        return PerturbationParams(**{k: float(v) for k, v in values.items()})
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ParameterError):
            raise
        raise ConfigError(f"bad parameter value: {exc}") from exc


def parse_grid(text):
    """``a:b:N`` into ``N`` evenly spaced values from ``a`` to ``b`` inclusive."""
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError as exc:
        raise ParameterError(f"grid must look like a:b:N, got {text!r}") from exc
    if n < 1 or not (math.isfinite(a) and math.isfinite(b)):
        raise ParameterError(f"grid needs finite ends and N >= 1, got {text!r}")
    return [a] if n == 1 else [float(v) for v in np.linspace(a, b, n)]


def _threads():
    raw = os.environ.get("LPNORM_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(f"LPNORM_THREADS must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ConfigError(f"LPNORM_THREADS must be positive, got {value}")
    return value


# subcommands ------------------------------------------------------------


def cmd_equilibria(args):
    p = _params(args)
    if args.method == "series":
        point = series_point(p, args.branch)
    elif args.method == "epsilon_series":
        if args.branch != "L4":
            raise ParameterError("the epsilon-series form covers L4 only")
        point = epsilon_form_point(p)
    else:
        point = triangular_point(p, args.branch)
    ux, uy = residuals(point, p)
    out = {"branch": point.branch, "method": point.method, "x": point.x, "y": point.y,
           "residual_Ux": ux, "residual_Uy": uy}
    _emit(args, to_json(out) + "\n")


def _stability_record(d):
    rep = stability(d)
    w1 = w2 = None
    if rep.stable:
        try:
            f = frequencies(d)
            w1, w2 = f.omega1, f.omega2
        except LpnormError:
            pass
    return rep, w1, w2


def cmd_stability(args):
    d = derive(_params(args))
    rep, w1, w2 = _stability_record(d)
    out = {"mu": d.mu, "epsilon": d.epsilon, "A2": d.A2, "W1": d.W1, "mu_crit": rep.mu_crit,
           "D": rep.D, "stable": rep.stable, "margin": rep.margin, "omega1": w1, "omega2": w2}
    _emit(args, to_json(out) + "\n")


def _sweep_row(values):
    d = DerivedParams.from_values(*values)
    rep = stability(d)
    return (d.mu, d.epsilon, d.A2, d.W1, rep.mu_crit, rep.D, rep.stable, rep.margin)


def cmd_sweep(args):
    scalars = _merged(args, SWEEP_KEYS)
    axes = []
    for key in ("mu",) + SWEEP_KEYS:
        grid = getattr(args, f"{key}_grid")
        if grid is not None:
            axes.append(parse_grid(grid))
        elif key == "mu":
            raise ParameterError("sweep needs --mu-grid")
        else:
            axes.append([float(scalars.get(key, 0.0))])
    combos = [(m, e, a, w) for m in axes[0] for e in axes[1] for a in axes[2] for w in axes[3]]
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        rows = list(pool.map(_sweep_row, combos))
    header = ("mu", "epsilon", "A2", "W1", "mu_crit", "D", "stable", "margin")
    _emit(args, _csv(header, rows))


def cmd_expand(args):
    d = derive(_params(args))
    q = quadratic_coeffs(d)
    c = cubic_coeffs(d)
    table = numeric_taylor_oracle(d)
    qo = table.quadratic()
    T1, T2, T3, T4 = table.cubic()
    printed = {"E": q.E, "F": q.F, "G": q.G, "T1": c.T1, "T2": c.T2, "T3": c.T3, "T4": c.T4}
    oracle = {"E": qo.E, "F": qo.F, "G": qo.G, "T1": T1, "T2": T2, "T3": T3, "T4": T4}
    rel = {}
    for k, v in printed.items():
        scale = max(abs(v), abs(oracle[k]))
        rel[k] = abs(v - oracle[k]) / scale if scale > 0.0 else 0.0
    t5 = {_monomial(e): v for e, v in sorted(c.T5.cubic_part().terms.items())}
    t5_oracle = {_monomial(e): v for e, v in sorted(table.velocity_cubic().terms.items())}
    out = dict(printed)
    out["T5_coeffs"] = t5
    out["oracle"] = dict(oracle, T5_coeffs=t5_oracle, error_estimate=table.error_estimate)
    out["rel_diff"] = rel
    out["max_rel_diff"] = max(rel.values())
    _emit(args, to_json(out) + "\n")


def _whittaker_dict(J):
    return {k: getattr(J, k) for k in ("J13", "J14", "J21", "J22", "J23", "J24", "l1", "l2", "k1", "k2")}


def cmd_normal_form(args):
    d = derive(_params(args))
    f = frequencies(d)
    J = whittaker_matrix(d, f)
    Jo = whittaker_matrix_oracle(d, f)
    moser = moser_condition(f, kmax=args.kmax)
    out = {
        "omega1": f.omega1,
        "omega2": f.omega2,
        "J": _whittaker_dict(J),
        "J_oracle": _whittaker_dict(Jo),
        "residual": normal_form_residual(d, J=J),
        "residual_oracle": normal_form_residual(d, J=Jo),
        "moser": {"satisfied": moser.satisfied, "witness": list(moser.witness), "min_value": moser.min_value},
    }
    _emit(args, to_json(out) + "\n")


def cmd_birkhoff(args):
    d = derive(_params(args))
    f = frequencies(d)
    J = whittaker_matrix(d, f)
    out = {"route": args.route}
    solution = None
    if args.route in ("generic", "both") or args.dump_series:
        solution = bk.generic_second_order_solve(d, f, J)
    if args.route == "closed":
        rs = bk.rs_coefficients(d, f, J)
        out["r"], out["s"] = list(rs.r), list(rs.s)
    else:
        values = bk.rs_of_solution(solution)
        out["r"], out["s"] = list(values["r"]), list(values["s"])
    B1 = bk.first_order_series(f, J)
    B2 = solution.B2 if solution is not None else bk.b2_closed_form(bk.rs_coefficients(d, f, J))
    h3 = bk.h3_coefficients(d, f, B1, B2)
    out["h3"] = {"A30": h3.A30, "A21": h3.A21, "A12": h3.A12, "A03": h3.A03,
                 "reference": h3.reference, "relative": h3.relative}
    out["discrepancies"] = bk.discrepancy_report(d, f, J, oracle=args.oracle) if args.route == "both" else []
    if args.dump_series:
        folder = Path(args.dump_series)
        folder.mkdir(parents=True, exist_ok=True)
        closed = bk.b2_closed_form(bk.rs_coefficients(d, f, J))
        for name, series in (("B1_x", B1[0]), ("B1_y", B1[1]), ("B2_x_generic", solution.B2[0]),
                             ("B2_y_generic", solution.B2[1]), ("B2_x_closed", closed[0]),
                             ("B2_y_closed", closed[1])):
            (folder / f"{name}.txt").write_text(ps.dumps(series))
    _emit(args, to_json(out) + "\n")


def cmd_simulate(args):
    p = _params(args)
    x0, y0 = args.x0, args.y0
    if x0 is None or y0 is None:
        l4 = triangular_point(p, "L4")
        x0 = l4.x if x0 is None else x0
        y0 = l4.y if y0 is None else y0
    traj = integrate(State(x0, y0, args.vx0, args.vy0), p, args.t_end, args.dt_out, tol=args.tol)
    rows = [tuple(float(v) for v in (t, *s)) for t, s in zip(traj.t, traj.states)]
    _emit(args, _csv(("t", "x", "y", "vx", "vy"), rows))
    sidecar = args.spectrum or (f"{args.output}.spectrum.json" if args.output else None)
    if sidecar:
        spectrum = {}
        for comp in ("x", "y"):
            try:
                lines = dominant_frequencies(traj, k=args.lines, component=comp)
            except ParameterError:
                lines = []
            spectrum[comp] = [{"frequency": w, "amplitude": a} for w, a in lines]
        Path(sidecar).write_text(to_json(spectrum) + "\n")


def cmd_verify(args):
    results = run_suite(args.suite)
    _emit(args, render(results))
    return 0 if all(r.passed for r in results) else 1


# parser -----------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with parameter values; flags take precedence")
    common.add_argument("--output", "-o", help="write to this file instead of standard output")

    params = argparse.ArgumentParser(add_help=False)
    params.add_argument("--mu", type=float, help="mass ratio, 0 < mu <= 1/2")
    params.add_argument("--q1", type=float, help="mass reduction factor, 0 < q1 <= 1 (default 1)")
    params.add_argument("--A2", type=float, help="oblateness coefficient, A2 >= 0 (default 0)")
    params.add_argument("--cd", type=float, help="speed-of-light constant, cd > 0 (default 1)")

    parser = argparse.ArgumentParser(prog="lpnorm", description="Normal forms about the triangular points.")
    parser.add_argument("--version", action="version", version=f"lpnorm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("equilibria", parents=[common, params], help="triangular point")
    s.add_argument("--branch", choices=BRANCHES, default="L4")
    s.add_argument("--method", choices=("refined", "series", "epsilon_series"), default="refined")
    s.set_defaults(func=cmd_equilibria)

    s = sub.add_parser("stability", parents=[common, params], help="discriminant and critical mass")
    s.set_defaults(func=cmd_stability)

    s = sub.add_parser("sweep", parents=[common], help="stability over a parameter grid, CSV")
    s.add_argument("--mu-grid", required=True, help="a:b:N")
    for key in SWEEP_KEYS:
        s.add_argument(f"--{key}-grid", dest=f"{key}_grid", help="a:b:N")
        s.add_argument(f"--{key}", type=float, help=f"fixed {key} (default 0)")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("expand", parents=[common, params], help="Lagrangian coefficients vs exact expansion")
    s.set_defaults(func=cmd_expand)

    s = sub.add_parser("normal-form", parents=[common, params], help="frequencies and linear transform")
    s.add_argument("--kmax", type=int, default=4, help="highest order of the resonance scan")
    s.set_defaults(func=cmd_normal_form)

    s = sub.add_parser("birkhoff", parents=[common, params], help="second-order coefficients")
    s.add_argument("--route", choices=("closed", "generic", "both"), default="both")
    s.add_argument("--oracle", action="store_true", help="add the exact-expansion column to discrepancies")
    s.add_argument("--dump-series", metavar="DIR", help="write B1 and B2 series in text form")
    s.set_defaults(func=cmd_birkhoff)

    s = sub.add_parser("simulate", parents=[common, params], help="integrate a trajectory, CSV")
    s.add_argument("--x0", type=float, help="default: L4 abscissa")
    s.add_argument("--y0", type=float, help="default: L4 ordinate")
    s.add_argument("--vx0", type=float, default=0.0)
    s.add_argument("--vy0", type=float, default=0.0)
    s.add_argument("--t-end", type=float, default=100.0)
    s.add_argument("--dt-out", type=float, default=0.1)
    s.add_argument("--tol", type=float, default=1e-12)
    s.add_argument("--lines", type=int, default=2, help="spectral lines per coordinate")
    s.add_argument("--spectrum", help="spectrum JSON path (default: OUTPUT.spectrum.json)")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("verify", parents=[common], help="run the acceptance criteria")
    s.add_argument("--suite", choices=SUITES, default="classical")
    s.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        code = args.func(args)
    except ParameterError as exc:
        print(f"lpnorm: error: {exc}", file=sys.stderr)
        return 2
    except LpnormError as exc:
        print(f"lpnorm: error: {exc}", file=sys.stderr)
        return 1
    return code or 0


if __name__ == "__main__":
    sys.exit(main())
