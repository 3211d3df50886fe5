"""Command-line front end: verification suites, simulation, curvature, rank.

Subcommands
-----------
verify          randomized Poisson-algebra verification (sl2z, casimirs,
                so4, lrl, or all); exit 0 iff every residual is below the
                threshold, 1 on residual failure, 2 on invalid input.
simulate        integrate a family Hamiltonian, write a trajectory CSV and a
                drift summary; exit 3 when a chart singularity ends the run
                early (the partial CSV is still written).
curvature       numeric-vs-closed-form curvature scan over a regular grid.
rank            functional-independence rank histogram over random states.
export-presets  dump the named (kappa1, kappa2) presets.

A flat key=value config file can preload any long option (flags win); the
environment variable CURVKEPLER_SEED is the seed fallback.  Identical
invocations (including seed) produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import coalgebra, dynamics, spaces, symmetry
from .kernel import DomainError
from .phase import Chart, ChartMismatchError, ChartSingularityError, PhaseState

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_SINGULAR = 3

_CHARTS = {
    "beltrami": Chart.BELTRAMI,
    "polar-variable": Chart.POLAR_VARIABLE,
    "polar-constant": Chart.POLAR_CONSTANT,
}


def _load_config(path):
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{lineno}: expected key = value")
            key, val = (part.strip() for part in line.split("=", 1))
            values[key.replace("-", "_")] = val
    return values


def _space_params(args, need_gamma=False):
    if getattr(args, "preset", None):
        params = spaces.SpaceParams.preset(args.preset, gamma=args.gamma)
    else:
        if args.z is None or args.kappa2 is None:
            raise DomainError("provide --preset or both --z and --kappa2")
        params = spaces.SpaceParams(z=args.z, kappa2=args.kappa2,
                                    gamma=args.gamma)
    if need_gamma and params.gamma == 0.0:
        raise DomainError("this command needs a nonzero --gamma "
                          "(Kepler coupling)")
    return params


def _seed(args):
    if args.seed is not None:
        return int(args.seed)
    env = os.environ.get("CURVKEPLER_SEED")
    return int(env) if env else 0


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _dump_json(doc, path):
    _emit(json.dumps(doc, indent=2, sort_keys=True), path)


# --------------------------------------------------------------------------
# verify
# --------------------------------------------------------------------------

_COALGEBRA_GENS = frozenset(("jminus", "jplus", "jthree"))
_SO4_GENS = frozenset(("j01", "j02", "j03", "j12", "j13", "j23"))


def _route_perturb(suite, perturb):
    """Split a --perturb name between the coalgebra and so(4) suites."""
    if perturb is None:
        return None, None
    if perturb not in _COALGEBRA_GENS | _SO4_GENS:
        raise DomainError(f"unknown generator {perturb!r}; coalgebra suites "
                          f"take {sorted(_COALGEBRA_GENS)}, polar suites "
                          f"{sorted(_SO4_GENS)}")
    cperturb = perturb if perturb in _COALGEBRA_GENS else None
    sperturb = perturb if perturb in _SO4_GENS else None
    if suite in ("sl2z", "casimirs") and cperturb is None:
        raise DomainError(f"{perturb!r} does not name a generator of the "
                          f"{suite} suite")
    if suite in ("so4", "lrl") and sperturb is None:
        raise DomainError(f"{perturb!r} does not name a generator of the "
                          f"{suite} suite")
    return cperturb, sperturb


def _run_suites(suite, params, samples, seed, perturb):
    cperturb, sperturb = _route_perturb(suite, perturb)
    reports = []
    if suite in ("sl2z", "all"):
        for r in (coalgebra.one_site(params.z), coalgebra.three_site(params.z)):
            reports.append(coalgebra.verify_sl2z(
                r, samples=samples, seed=seed, perturb=cperturb))
    if suite in ("casimirs", "all"):
        reports.append(coalgebra.verify_casimirs(
            params.z, samples=samples, seed=seed, perturb=cperturb))
    if suite in ("so4", "all"):
        reports.append(symmetry.verify_so4(
            params, samples=samples, seed=seed, perturb=sperturb))
    if suite in ("lrl", "all"):
        reports.append(symmetry.verify_lrl_algebra(
            params, samples=samples, seed=seed, perturb=sperturb))
    return reports


def _cmd_verify(args):
    if args.suite in ("sl2z", "casimirs") and not args.preset \
            and args.kappa2 is None:
        args.kappa2 = 1.0  # these suites depend on z only
    params = _space_params(args)
    if params.gamma == 0.0 and args.suite in ("lrl", "all"):
        params = spaces.SpaceParams(params.z, params.kappa2, gamma=0.5)
    seed = _seed(args)
    reports = _run_suites(args.suite, params, args.samples, seed, args.perturb)
    worst = max(r.max_residual for r in reports)
    passed = worst < args.threshold
    doc = {
        "schema": 1,
        "suite": args.suite,
        "params": {"z": params.z, "kappa2": params.kappa2,
                   "gamma": params.gamma},
        "samples": args.samples,
        "seed": seed,
        "threshold": args.threshold,
        "max_residual": worst,
        "passed": passed,
        "reports": [r.as_dict() for r in reports],
    }
    _dump_json(doc, args.out)
    return EXIT_OK if passed else EXIT_FAIL


# --------------------------------------------------------------------------
# simulate
# --------------------------------------------------------------------------

def _parse_state(text):
    parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
    if len(parts) != 6:
        raise DomainError("--state needs 6 comma-separated numbers")
    return tuple(float(p) for p in parts)


def _family_of(args):
    if not getattr(args, "family", None):
        raise DomainError("--family is required")
    try:
        family = spaces.Family(args.family)
    except ValueError:
        raise DomainError(f"unknown family {args.family!r}") from None
    if family is spaces.Family.CUSTOM:
        raise DomainError("the CLI drives the four named families")
    return family


def _cmd_simulate(args):
    params = _space_params(args)
    family = _family_of(args)
    if not args.state:
        raise DomainError("--state is required")
    spec = spaces.HamiltonianSpec(family, params)
    polar = (Chart.POLAR_VARIABLE if family in (spaces.Family.FREE_NC,
                                                spaces.Family.KEPLER_NC)
             else Chart.POLAR_CONSTANT)
    chart = _chart_of(args) if args.chart else polar
    state = PhaseState(chart, _parse_state(args.state))
    if chart is Chart.BELTRAMI:
        state = spaces.to_polar(state, params, polar)
    elif chart is not polar:
        raise DomainError(f"{family.value} integrates on {polar.value}")

    h = spaces.hamiltonian(spec, polar)
    monitors = dict(symmetry.constants(spec, polar))
    monitors["H"] = h
    cfg = dynamics.IntegratorConfig(
        rel_tol=args.rel_tol, abs_tol=args.abs_tol, t_end=args.t_end,
        max_step=args.max_step, sample_stride=args.stride,
        method=args.method, fixed_step=args.fixed_step)
    guard = spaces.chart_guard(polar, params)
    code = EXIT_OK
    try:
        tr = dynamics.integrate(h, state, cfg, monitors=monitors,
                                domain_guard=guard)
    except dynamics.StepUnderflowError as err:
        tr = err.trajectory
        code = EXIT_SINGULAR
    if tr.terminated_early:
        code = EXIT_SINGULAR
    _emit(dynamics.trajectory_csv(tr), args.csv)
    summary = {
        "schema": 1,
        "family": family.value,
        "params": {"z": params.z, "kappa2": params.kappa2,
                   "gamma": params.gamma},
        "t_end": args.t_end,
        "samples": len(tr.times),
        "terminated_early": tr.terminated_early,
        "termination_reason": tr.termination_reason,
        "drift": dynamics.drift_report(tr),
    }
    if args.summary:
        _dump_json(summary, args.summary)
    else:
        print(json.dumps(summary, indent=2, sort_keys=True), file=sys.stderr)
    return code


# --------------------------------------------------------------------------
# curvature
# --------------------------------------------------------------------------

def _parse_grid(text):
    axes = text.split(",")
    if len(axes) != 3:
        raise DomainError("--grid needs three ranges lo:hi:n")
    out = []
    for axis in axes:
        bits = axis.split(":")
        if len(bits) != 3:
            raise DomainError(f"bad grid axis {axis!r}; want lo:hi:n")
        lo, hi, n = float(bits[0]), float(bits[1]), int(bits[2])
        if n < 1:
            raise DomainError("grid axis needs n >= 1")
        out.append(np.linspace(lo, hi, n))
    return out

def _chart_of(args):
    if not getattr(args, "chart", None):
        raise DomainError("--chart is required")
    try:
        return _CHARTS[args.chart]
    except KeyError:
        raise DomainError(f"unknown chart {args.chart!r}") from None


def _cmd_curvature(args):
    params = _space_params(args)
    chart = _chart_of(args)
    if not args.grid:
        raise DomainError("--grid is required")
    if args.kind not in ("nc", "cc"):
        raise DomainError("--kind must be nc or cc")
    axes = _parse_grid(args.grid)
    guard = spaces.chart_guard(chart, params)
    lines = ["x1,x2,x3,K12,K13,K23,K,closed_K,abs_err"]
    max_err = 0.0
    for x1 in axes[0]:
        for x2 in axes[1]:
            for x3 in axes[2]:
                reason = guard((x1, x2, x3, 0.0, 0.0, 0.0))
                if reason is not None:
                    raise ChartSingularityError(
                        f"grid point ({x1:g}, {x2:g}, {x3:g}): {reason}")
                res = spaces.curvature(chart, args.kind, (x1, x2, x3),
                                       params, h=args.step)
                closed = res.closed.get("kscalar")
                err = abs(res.kscalar - closed) if closed is not None else ""
                if err != "":
                    max_err = max(max_err, err)
                row = [x1, x2, x3, res.k12, res.k13, res.k23, res.kscalar]
                row.append("" if closed is None else closed)
                row.append(err)
                lines.append(",".join("" if v == "" else f"{v:.17g}" for v in row))
    lines.append(f"max_abs_err,,,,,,,,{max_err:.17g}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


# --------------------------------------------------------------------------
# rank
# --------------------------------------------------------------------------

def _cmd_rank(args):
    params = _space_params(args)
    family = _family_of(args)
    spec = spaces.HamiltonianSpec(family, params)
    polar = (Chart.POLAR_VARIABLE if family in (spaces.Family.FREE_NC,
                                                spaces.Family.KEPLER_NC)
             else Chart.POLAR_CONSTANT)
    consts = symmetry.constants(spec, polar)
    obs = [consts["C2"], consts["C2mid"], consts["C3"],
           spaces.hamiltonian(spec, polar)]
    expected = 4
    if args.append_lrl != "none":
        if family is not spaces.Family.KEPLER_CC:
            raise DomainError("--append-lrl applies to kepler-cc only")
        obs.append(consts[args.append_lrl])
        expected = 5
    rng = np.random.default_rng(_seed(args))
    histogram = {}
    for _ in range(args.samples):
        s = symmetry.sample_polar(params, rng, chart=polar)
        r = symmetry.independence_rank(obs, s)
        histogram[r] = histogram.get(r, 0) + 1
    modal = max(sorted(histogram), key=lambda k: histogram[k])
    doc = {
        "schema": 1,
        "family": family.value,
        "observables": [getattr(o, "name", "") for o in obs],
        "expected_rank": expected,
        "observed_ranks": {str(k): v for k, v in sorted(histogram.items())},
        "modal_rank": modal,
        "passed": modal == expected,
        "samples": args.samples,
        "seed": _seed(args),
    }
    _dump_json(doc, args.out)
    return EXIT_OK if modal == expected else EXIT_FAIL


def _cmd_export_presets(args):
    doc = {
        "schema": 1,
        "presets": {name: {"kappa1": k1, "kappa2": k2}
                    for name, (k1, k2) in sorted(spaces.PRESETS.items())},
    }
    _dump_json(doc, args.out)
    return EXIT_OK


# --------------------------------------------------------------------------
# argument plumbing
# --------------------------------------------------------------------------

def _add_space_args(p, gamma_default=0.0):
    p.add_argument("--preset", choices=sorted(spaces.PRESETS), default=None,
                   help="named constant-curvature space (sets z and kappa2)")
    p.add_argument("--z", type=float, default=None,
                   help="deformation parameter z = kappa1")
    p.add_argument("--kappa2", type=float, default=None,
                   help="signature label kappa2 (nonzero)")
    p.add_argument("--gamma", type=float, default=gamma_default,
                   help="Kepler coupling gamma (k = 2 sqrt(2) gamma)")


def _add_common(p):
    p.add_argument("--config", default=None,
                   help="flat key = value file preloading any long option")
    p.add_argument("--seed", type=int, default=None,
                   help="RNG seed (fallback: CURVKEPLER_SEED, then 0)")
    p.add_argument("--out", default=None, help="output path (default stdout)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="curvkepler",
        description="Superintegrable free/Kepler systems on 3D curved "
                    "spaces: verification, simulation, curvature, rank.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="randomized Poisson-algebra checks")
    p.add_argument("--suite", choices=("sl2z", "casimirs", "so4", "lrl", "all"),
                   default="all")
    _add_space_args(p, gamma_default=0.5)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--threshold", type=float, default=1e-8,
                   help="pass/fail residual threshold")
    p.add_argument("--perturb", default=None,
                   help="scale one generator by 1.01 (negative control)")
    _add_common(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("simulate", help="integrate a family Hamiltonian")
    p.add_argument("--family", default=None,
                   help="free-nc | free-cc | kepler-nc | kepler-cc")
    _add_space_args(p)
    p.add_argument("--state", default=None,
                   help="6 comma-separated phase coordinates")
    p.add_argument("--chart", choices=sorted(_CHARTS), default=None,
                   help="chart of --state (default: the family's polar chart)")
    p.add_argument("--t-end", type=float, default=10.0)
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--abs-tol", type=float, default=1e-12)
    p.add_argument("--max-step", type=float, default=math.inf)
    p.add_argument("--stride", type=int, default=1,
                   help="record every N-th accepted step")
    p.add_argument("--method", choices=("dopri54", "implicit-midpoint"),
                   default="dopri54")
    p.add_argument("--fixed-step", type=float, default=0.0)
    p.add_argument("--csv", default=None, help="trajectory CSV path")
    p.add_argument("--summary", default=None, help="drift summary JSON path")
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("curvature", help="curvature scan over a grid")
    p.add_argument("--kind", default=None, help="nc | cc")
    p.add_argument("--chart", default=None,
                   help="beltrami | polar-variable | polar-constant")
    _add_space_args(p)
    p.add_argument("--grid", default=None, help="lo:hi:n,lo:hi:n,lo:hi:n")
    p.add_argument("--step", type=float, default=1e-4,
                   help="finite-difference step for the Riemann pipeline")
    _add_common(p)
    p.set_defaults(func=_cmd_curvature)

    p = sub.add_parser("rank", help="functional-independence rank histogram")
    p.add_argument("--family", default=None,
                   help="free-nc | free-cc | kepler-nc | kepler-cc")
    _add_space_args(p, gamma_default=0.5)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--append-lrl", choices=("none", "L1", "L2", "L3"),
                   default="none")
    _add_common(p)
    p.set_defaults(func=_cmd_rank)

    p = sub.add_parser("export-presets", help="dump named space presets")
    _add_common(p)
    p.set_defaults(func=_cmd_export_presets)

    parser.command_parsers = tuple(sub.choices.values())
    return parser


def _extract_config_path(argv):
    for i, arg in enumerate(argv):
        if arg == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if arg.startswith("--config="):
            return arg.split("=", 1)[1]
    return None


def _coerce(text):
    for caster in (int, float):
        try:
            return caster(text)
        except ValueError:
            continue
    return text


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    cfg_path = _extract_config_path(argv)
    if cfg_path:
        try:
            overrides = {k: _coerce(v)
                         for k, v in _load_config(cfg_path).items()}
        except (OSError, DomainError) as err:
            print(f"error: {err}", file=sys.stderr)
            return EXIT_CONFIG
        for sub in parser.command_parsers:
            sub.set_defaults(**overrides)
    args = parser.parse_args(argv)  # argparse exits with code 2 on bad flags
    try:
        return args.func(args)
    except (DomainError, ChartMismatchError, ChartSingularityError,
            ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
