"""Command-line front end.

Subcommands: ``roulette``, ``mesh``, ``degeneracy``, ``melnikov``, ``solve``
and ``verify``. Exit codes: 0 success, 1 domain error, 2 numerical failure or
failed verification, 64 usage error. Every run writes a JSON provenance
record (``<out>.provenance.json`` next to a file output, or the path given by
``--provenance``; stderr when output goes to stdout).
"""
import argparse
from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import asdict, dataclass, field
import io
import json
import math
import os
import platform
import sys

import numpy as np
import scipy

from . import __version__, elliptic
from .curvature_field import parse_field, require_perturbative
from .degeneracy import degeneracy_report, find_T0, kernel_basis
from .delaunay import export_mesh, make_param, roulette
from .errors import DomainError, NumericalFailure, ObstructionError
from .melnikov import enclosed_volume_monte_carlo, find_critical_points, melnikov_landscape
from .pmc_solver import (DEFAULT_NT, DEFAULT_NTHETA, SOLVER_TOL, independent_residual,
                         solve_axisymmetric, solve_lyapunov_schmidt, solve_nondegenerate,
                         solve_with_translation)

SCHEMA = "pmcsurf.run/1"
EXIT_OK, EXIT_DOMAIN, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2, 64

ROULETTE_COLUMNS = ("a", "t", "x", "dx", "z", "dz")
DEGENERACY_COLUMNS = ("a", "j", "k", "T", "bracket_lo", "bracket_hi", "residual")
MELNIKOV_COLUMNS = ("p", "q", "M", "dMdp", "dMdq")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _range(text):
    vals = _float_list(text)
    if len(vals) != 3 or vals[2] < 1 or int(vals[2]) != vals[2]:
        raise argparse.ArgumentTypeError("expected lo,hi,n with integer n >= 1")
    return vals


def build_parser():
    parser = _Parser(prog="pmcsurf", description="Prescribed mean curvature perturbations of Delaunay surfaces.")
    parser.add_argument("--version", action="version", version=f"pmcsurf {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file whose keys override command-line flags")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--provenance", help="path of the JSON provenance record")
    common.add_argument("--seed", type=int, default=42, help="seed for Monte-Carlo oracles (default 42)")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("roulette", parents=[common],
                       help="sample the profile curve",
                       description=f"CSV columns: {', '.join(ROULETTE_COLUMNS)}.")
    _add_a(p)
    p.add_argument("--tmin", type=float, default=0.0)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--n", type=int, default=200, help="number of samples (>= 2)")

    p = sub.add_parser("mesh", parents=[common], help="write a Delaunay patch as OBJ",
                       description="Writes a Wavefront OBJ of X_a + p e1 + q e2 over [-T, T]; --out is required.")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--p", type=float, default=0.0)
    p.add_argument("--q", type=float, default=0.0)
    p.add_argument("--n-t", type=int, default=64)
    p.add_argument("--n-theta", type=int, default=64)

    p = sub.add_parser("degeneracy", parents=[common], help="degenerate half-lengths up to Tmax",
                       description=f"CSV columns: {', '.join(DEGENERACY_COLUMNS)}; residual is |w_(a,j)(T)|.")
    _add_a(p)
    p.add_argument("--Tmax", type=float, required=True)
    p.add_argument("--j-max", type=int, default=None)

    p = sub.add_parser("melnikov", parents=[common], help="Melnikov landscape and critical points",
                       description=f"CSV columns: {', '.join(MELNIKOV_COLUMNS)}. Critical points go to "
                                   "--critical-out (JSON) or into the provenance record.")
    p.add_argument("--a", type=float, required=True)
    _add_T(p)
    p.add_argument("--field", required=True)
    p.add_argument("--p-range", type=_range, default=[-0.5, 0.5, 5], help="lo,hi,n")
    p.add_argument("--q-range", type=_range, default=[-0.5, 0.5, 5], help="lo,hi,n")
    p.add_argument("--critical-out")
    p.add_argument("--volume-oracle", action="store_true",
                   help="also report the Monte-Carlo enclosed volume (unduloids, uses --seed)")

    p = sub.add_parser("solve", parents=[common], help="solve the Dirichlet problem on a normal graph",
                       description="Emits a JSON solution summary; --mesh-out writes the solved surface.")
    _add_a(p)
    _add_T(p)
    p.add_argument("--field", required=True)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--eps-list", type=_float_list)
    p.add_argument("--p", type=float, default=0.0)
    p.add_argument("--q", type=float, default=0.0)
    p.add_argument("--mode", choices=("auto", "nondegenerate", "axisym", "lyapunov-schmidt", "translation"),
                   default="auto")
    p.add_argument("--n-t", type=int, default=DEFAULT_NT)
    p.add_argument("--n-theta", type=int, default=DEFAULT_NTHETA)
    p.add_argument("--tol", type=float, default=SOLVER_TOL)
    p.add_argument("--mesh-out")

    p = sub.add_parser("verify", parents=[common], help="run the acceptance checks",
                       description="Prints one PASS/FAIL line per acceptance criterion.")
    p.add_argument("--only", type=lambda s: [int(v) for v in s.split(",")], help="comma-separated criteria")
    p.add_argument("--verbose", action="store_true")
    return parser


def _add_a(p):
    p.add_argument("--a", type=float)
    p.add_argument("--a-list", type=_float_list, help="comma-separated sweep over a")


def _add_T(p):
    p.add_argument("--T", type=float)
    p.add_argument("--T0-index", type=int, help="use T = T_(a,k) (mode-0 degeneracy)")
    p.add_argument("--T1-index", type=int, help="use T = (k + 1/2) tau_a (mode-1 degeneracy)")


@dataclass
class RunConfig:
    """Validated inputs of one invocation."""

    command: str
    values: dict = field(default_factory=dict)

    def get(self, key, default=None):
        value = self.values.get(key)
        return default if value is None else value


def _apply_config(args):
    if not getattr(args, "config", None):
        return args
    try:
        with open(args.config) as fh:
            overrides = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read config {args.config!r}: {exc}") from exc
    if not isinstance(overrides, dict):
        raise DomainError("config file must hold a JSON object")
    for key, value in overrides.items():
        name = key.replace("-", "_")
        if not hasattr(args, name) or name in ("command", "config"):
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        setattr(args, name, value)
    return args


def _a_values(args):
    if getattr(args, "a_list", None):
        return sorted(args.a_list)
    if args.a is None:
        raise UsageError("one of --a or --a-list is required")
    return [args.a]


def _resolve_T(param, args):
    chosen = [v is not None for v in (args.T, args.T0_index, args.T1_index)]
    if sum(chosen) != 1:
        raise UsageError("give exactly one of --T, --T0-index, --T1-index")
    if args.T is not None:
        if not args.T > 0:
            raise DomainError("T must be positive")
        return float(args.T)
    if args.T0_index is not None:
        return find_T0(param, args.T0_index)
    if args.T1_index < 0:
        raise DomainError("--T1-index must be nonnegative")
    return (args.T1_index + 0.5) * param.tau


def validate(args):
    """Check every parameter against module preconditions before computing."""
    values = {k: v for k, v in vars(args).items() if k not in ("config",)}
    cmd = args.command
    if cmd in ("roulette", "degeneracy", "solve"):
        values["a_values"] = _a_values(args)
        for a in values["a_values"]:
            make_param(a)
    if cmd in ("mesh", "melnikov"):
        make_param(args.a)
    if cmd == "roulette":
        if args.n < 2 or not args.tmax > args.tmin:
            raise DomainError("roulette needs --n >= 2 and --tmax > --tmin")
    if cmd == "mesh":
        if not args.out:
            raise UsageError("mesh needs --out")
        if args.T <= 0 or args.n_t < 8 or args.n_theta < 8:
            raise DomainError("mesh needs T > 0 and at least 8 nodes per direction")
    if cmd == "degeneracy" and not args.Tmax > 0:
        raise DomainError("--Tmax must be positive")
    if cmd in ("melnikov", "solve"):
        values["field_obj"] = parse_field(args.field)
        values["T_values"] = {a: _resolve_T(make_param(a), args)
                              for a in values.get("a_values", [args.a])}
    if cmd == "melnikov":
        require_perturbative(values["field_obj"])
    if cmd == "solve":
        eps = args.eps_list if args.eps_list else ([args.eps] if args.eps is not None else None)
        if not eps:
            raise UsageError("one of --eps or --eps-list is required")
        values["eps_values"] = sorted(eps)
        if args.n_t < 8 or args.n_theta < 8 or args.n_t % 2 or args.n_theta % 2:
            raise DomainError("grid sizes must be even and at least 8")
        if not args.tol > 0:
            raise DomainError("--tol must be positive")
    return RunConfig(cmd, values)


def _versions():
    return {"pmcsurf": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version(), "elliptic_backend": elliptic.BACKEND}


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else str(v)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (str, int, bool)) or value is None:
        return value
    return str(value)


def _provenance(config, tolerances, outputs, extra=None):
    inputs = {k: v for k, v in config.values.items() if k not in ("field_obj", "provenance", "out")}
    record = {"schema": SCHEMA, "command": config.command, "inputs": inputs, "versions": _versions(),
              "tolerances": tolerances, "seed": config.get("seed"), "outputs": outputs}
    if extra:
        record.update(extra)
    return _jsonable(record)


def _emit(text, path):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_provenance(config, record):
    text = json.dumps(record, sort_keys=True, indent=2) + "\n"
    target = config.get("provenance") or (config.get("out") + ".provenance.json" if config.get("out") else None)
    if target:
        with open(target, "w") as fh:
            fh.write(text)
    else:
        sys.stderr.write(text)


def _csv(columns, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _workers():
    try:
        return max(1, int(os.environ.get("PMC_THREADS", "1")))
    except ValueError:
        raise DomainError("PMC_THREADS must be an integer")


def _fan_out(func, items):
    """Map over items, in worker processes when PMC_THREADS > 1; order preserved."""
    workers = min(_workers(), len(items))
    if workers <= 1:
        return [func(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


# -- subcommands ------------------------------------------------------------


def _roulette_rows(job):
    a, tmin, tmax, n = job
    t = np.linspace(tmin, tmax, n)
    r = roulette(make_param(a), t)
    return [(a, float(ti), float(x), float(dx), float(z), float(dz))
            for ti, x, dx, z, dz in zip(t, r.x, r.dx, r.z, r.dz)]


def cmd_roulette(config):
    jobs = [(a, config.get("tmin"), config.get("tmax"), config.get("n")) for a in config.get("a_values")]
    rows = [row for chunk in _fan_out(_roulette_rows, jobs) for row in chunk]
    _emit(_csv(ROULETTE_COLUMNS, rows), config.get("out"))
    return _provenance(config, {"elliptic": "Carlson duplication to machine precision"},
                       {"rows": len(rows), "columns": list(ROULETTE_COLUMNS)})


def cmd_mesh(config):
    v = config.values
    path = export_mesh(v["a"], v["T"], v["out"], v["p"], v["q"], None, v["n_t"], v["n_theta"])
    return _provenance(config, {}, {"obj": str(path), "vertices": (v["n_t"] + 1) * v["n_theta"],
                                    "faces": 2 * v["n_t"] * v["n_theta"]})


def _degeneracy_rows(job):
    a, t_max, j_max = job
    param = make_param(a)
    return degeneracy_report(param, t_max, j_max, kernel_dims=False).rows(param)


def cmd_degeneracy(config):
    jobs = [(a, config.get("Tmax"), config.values.get("j_max")) for a in config.get("a_values")]
    rows = sorted((row for chunk in _fan_out(_degeneracy_rows, jobs) for row in chunk),
                  key=lambda r: (r[0], r[1], r[3]))
    _emit(_csv(DEGENERACY_COLUMNS, rows), config.get("out"))
    return _provenance(config, {"brent_xtol": 1e-15, "kernel_tol": 1e-8}, {"rows": len(rows)})


def cmd_melnikov(config):
    v = config.values
    param = make_param(v["a"])
    T = v["T_values"][v["a"]]
    fld = v["field_obj"]
    ps = np.linspace(v["p_range"][0], v["p_range"][1], int(v["p_range"][2]))
    qs = np.linspace(v["q_range"][0], v["q_range"][1], int(v["q_range"][2]))
    rows = melnikov_landscape(param, T, fld, ps, qs)
    _emit(_csv(MELNIKOV_COLUMNS, rows), v.get("out"))
    seeds = [(float(p), float(q)) for p in ps for q in qs]
    crit = find_critical_points(param, T, fld, seeds)
    crit_json = [{"p": c.p, "q": c.q, "value": c.value, "grad": list(c.grad), "hessian": [list(r) for r in c.hessian],
                  "nondegenerate": c.nondegenerate, "flat": c.flat} for c in crit]
    outputs = {"rows": len(rows), "T": T}
    if v.get("critical_out"):
        with open(v["critical_out"], "w") as fh:
            json.dump(_jsonable({"schema": "pmcsurf.critical/1", "critical_points": crit_json}), fh,
                      sort_keys=True, indent=2)
        outputs["critical_out"] = v["critical_out"]
    else:
        outputs["critical_points"] = crit_json
    if v.get("volume_oracle"):
        vol, err = enclosed_volume_monte_carlo(param, T, seed=v["seed"])
        outputs["monte_carlo_volume"] = {"volume": vol, "standard_error": err, "seed": v["seed"]}
    return _provenance(config, {"quadrature_rel": 1e-10, "newton_grad_floor": 1e-10, "dedup": 1e-6}, outputs)


def _solve_one(job):
    a, T, text, eps, p, q, mode, n_t, n_theta, tol = job
    param = make_param(a)
    fld = parse_field(text)
    if mode == "auto":
        kernel = kernel_basis(param, T)
        mode = "nondegenerate" if kernel.dim == 0 else ("lyapunov-schmidt" if kernel.modes == (1,) else "nondegenerate")
    kwargs = dict(tol=tol, n_t=n_t, n_theta=n_theta)
    if mode == "nondegenerate":
        sol = solve_nondegenerate(param, T, fld, eps, p, q, **kwargs)
    elif mode == "axisym":
        sol = solve_axisymmetric(param, T, fld, eps, **kwargs)
    elif mode == "lyapunov-schmidt":
        sol = solve_lyapunov_schmidt(param, T, fld, eps, p, q, **kwargs)
    else:
        sol = solve_with_translation(param, T, fld, eps, (p, q), **kwargs)
    summary = sol.summary()
    summary["independent_residual"] = independent_residual(sol, fld)
    return summary, sol


def cmd_solve(config):
    v = config.values
    jobs = [(a, v["T_values"][a], v["field"], eps, v["p"], v["q"], v["mode"], v["n_t"], v["n_theta"], v["tol"])
            for a in v["a_values"] for eps in v["eps_values"]]
    results = _fan_out(_solve_one, jobs)
    summaries = [r[0] for r in results]
    text = json.dumps(_jsonable({"schema": "pmcsurf.solution/1", "solutions": summaries}), sort_keys=True, indent=2)
    _emit(text + "\n", v.get("out"))
    outputs = {"solutions": len(summaries)}
    if v.get("mesh_out"):
        if len(results) != 1:
            raise DomainError("--mesh-out needs a single solve (no sweeps)")
        results[0][1].export_mesh(v["mesh_out"])
        outputs["mesh"] = v["mesh_out"]
    return _provenance(config, {"newton_tol": v["tol"], "damping_floor": 2.0 ** -20}, outputs)


def cmd_verify(config):
    from .verify import run_all
    results = run_all(config.get("only"), seed=config.get("seed"))
    lines = []
    for res in results:
        lines.append(res.line())
        if config.get("verbose") or not res.passed:
            lines.extend(res.details())
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} criteria passed")
    _emit("\n".join(lines) + "\n", config.get("out"))
    record = _provenance(config, {"per_criterion": "pinned in pmcsurf.verify"},
                         {"passed": passed, "total": len(results),
                          "criteria": {r.number: r.passed for r in results}})
    record["_exit"] = EXIT_OK if passed == len(results) else EXIT_NUMERICAL
    return record


COMMANDS = {"roulette": cmd_roulette, "mesh": cmd_mesh, "degeneracy": cmd_degeneracy,
            "melnikov": cmd_melnikov, "solve": cmd_solve, "verify": cmd_verify}


def run(argv=None):
    """Parse ``argv``, execute, and return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError(parser.format_usage() + "pmcsurf: error: a subcommand is required")
        args = _apply_config(args)
        config = validate(args)
        record = COMMANDS[args.command](config)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except ObstructionError as exc:
        sys.stderr.write(json.dumps(_jsonable({"schema": SCHEMA, "error": "obstruction", "message": str(exc),
                                               "obstruction": exc.obstruction}), sort_keys=True) + "\n")
        return EXIT_DOMAIN
    except DomainError as exc:
        sys.stderr.write(f"pmcsurf: domain error: {exc}\n")
        return EXIT_DOMAIN
    except NumericalFailure as exc:
        sys.stderr.write(f"pmcsurf: numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    code = record.pop("_exit", EXIT_OK)
    _write_provenance(config, record)
    return code


def main():
    sys.exit(run())
