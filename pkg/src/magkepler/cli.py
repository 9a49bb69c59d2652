"""Command-line front end.

Subcommands drive the library end to end: ``simulate`` integrates
trajectories (from the circular benchmark, an orbit-elements file, or an
explicit state file) and writes CSV/JSON exports plus a drift report;
``construct``, ``classify``, ``lightcone``, ``act``, ``check-lemma`` and
``fit`` expose the orbit-geometry, light-cone and gauge-identity tooling
on JSON payloads.

Exit codes: 0 success; 2 bad configuration or malformed input; 3
integration aborted (Dirac string, collision, step underflow); 4 drift
bound exceeded; 5 membership or invariant violation (the offending
invariant is named on stderr).

JSON output is deterministic (sorted keys) and files are written
atomically.  Relative output paths resolve against $MAGKEPLER_OUTPUT_DIR
when set.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from .dynamics import (
    IntegrationError,
    State,
    drift_report,
    integrate,
    trajectory_to_csv,
    trajectory_to_json_dict,
)
from .gauge import lemma_residuals
from .liealg import SkewMatrix, random_on_orbit
from .lorentz import LightConeOrbit, LorentzTransform, from_lightcone, group_apply, to_lightcone
from .orbits import (
    OrbitElements,
    classify,
    conic_fit,
    construct_initial_data,
    eccentricity,
    energy_from_elements,
    implied_magnetic_charge,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_ABORT = 3
EXIT_DRIFT = 4
EXIT_INVARIANT = 5

ENV_OUTPUT_DIR = "MAGKEPLER_OUTPUT_DIR"


class CliError(Exception):
    """Carries the exit code and a message for stderr."""

    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _fail_usage(message: str) -> CliError:
    return CliError(EXIT_USAGE, message)


def _fail_invariant(message: str) -> CliError:
    return CliError(EXIT_INVARIANT, message)


# -- input/output helpers ---------------------------------------------------


def _resolve_path(path: str) -> str:
    if os.path.isabs(path):
        return path
    base = os.environ.get(ENV_OUTPUT_DIR)
    if base:
        os.makedirs(base, exist_ok=True)
        return os.path.join(base, path)
    return path


def _atomic_write(path: str, text: str):
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _emit(obj, output: str | None):
    text = _json_text(obj)
    if output:
        _atomic_write(_resolve_path(output), text)
    else:
        sys.stdout.write(text)


def _load_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise _fail_usage(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _fail_usage(f"malformed JSON in {path}: {exc}") from exc


def _parse(builder, data, what: str):
    """Structural deserialization; failures are usage errors (exit 2)."""
    try:
        return builder(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise _fail_usage(f"malformed {what}: {exc}") from exc


def _validated(obj, what: str):
    """Invariant check after successful parsing (exit 5 on violation)."""
    try:
        obj.validate()
    except ValueError as exc:
        raise _fail_invariant(f"{what} invariant violated: {exc}") from exc
    return obj


def _load_elements(path: str) -> OrbitElements:
    el = _parse(OrbitElements.from_dict, _load_json(path), "orbit elements")
    return _validated(el, "orbit elements")


def _load_lightcone(path: str) -> LightConeOrbit:
    lc = _parse(LightConeOrbit.from_dict, _load_json(path), "light-cone point")
    return _validated(lc, "light-cone point")


def _check_dim(dim: int):
    if dim < 3 or dim % 2 == 0:
        raise _fail_usage(f"dimension must be odd and >= 3, got {dim}")


# -- simulate ---------------------------------------------------------------


def _initial_conditions(args):
    """Resolve (state, mu, k) from --circle / --elements / --state."""
    if args.circle:
        _check_dim(args.dim)
        k = (args.dim - 1) // 2
        if args.mu != 0.0:
            raise _fail_usage("the circular benchmark requires --mu 0")
        r0 = np.zeros(args.dim)
        v0 = np.zeros(args.dim)
        r0[0] = 1.0
        v0[1] = 1.0
        return State(r0, v0, SkewMatrix.zero(k)), 0.0, k
    if args.elements:
        el = _load_elements(args.elements)
        if args.dim is not None and args.dim != 2 * el.k + 1:
            raise _fail_usage(
                f"--dim {args.dim} does not match the elements file "
                f"(dimension {2 * el.k + 1})")
        try:
            data = construct_initial_data(el)
        except ValueError as exc:
            raise _fail_invariant(f"orbit construction failed: {exc}") from exc
        return (State(data.q, data.v, data.eta), data.implied_mu, el.k)
    payload = _load_json(args.state)

    def build(d):
        r0 = np.array(d["r"], dtype=float)
        v0 = np.array(d["v"], dtype=float)
        if r0.ndim != 1 or r0.shape != v0.shape:
            raise ValueError("r and v must be vectors of equal length")
        k = (r0.shape[0] - 1) // 2
        xi = (SkewMatrix.from_dict(d["xi"]) if d.get("xi") is not None
              else SkewMatrix.zero(k))
        return State(r0, v0, xi)

    s0 = _parse(build, payload, "state")
    dim = s0.r_vec.shape[0]
    _check_dim(dim)
    if args.dim is not None and args.dim != dim:
        raise _fail_usage(f"--dim {args.dim} does not match the state file "
                          f"(dimension {dim})")
    return s0, args.mu, (dim - 1) // 2


def _cmd_simulate(args) -> int:
    if args.samples < 2:
        raise _fail_usage("--samples must be at least 2")
    for name, tol in (("--rel-tol", args.rel_tol), ("--abs-tol", args.abs_tol)):
        if not 0.0 < tol <= 1e-3:
            raise _fail_usage(f"{name} must lie in (0, 1e-3]")
    if args.t_end <= 0:
        raise _fail_usage("--t-end must be positive")
    s0, mu, k = _initial_conditions(args)
    try:
        s0.validate(mu, k)
    except (ValueError, IntegrationError) as exc:
        raise _fail_usage(f"invalid initial state: {exc}") from exc

    t_eval = np.linspace(0.0, args.t_end, args.samples)
    try:
        traj = integrate(s0, mu, k, args.t_end, rel_tol=args.rel_tol,
                         abs_tol=args.abs_tol, t_eval=t_eval)
    except IntegrationError as exc:
        print(f"integration aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT

    out_path = _resolve_path(args.output or f"trajectory.{args.format}")
    if args.format == "csv":
        tmp = f"{out_path}.tmp.{os.getpid()}"
        trajectory_to_csv(traj, tmp)
        os.replace(tmp, out_path)
    else:
        _atomic_write(out_path, _json_text(trajectory_to_json_dict(traj)))

    drifts = drift_report(traj)
    worst = max(drifts.values())
    report = {
        "drifts": drifts,
        "drift_bound": args.drift_bound,
        "max_drift": worst,
        "mu": mu,
        "dim": 2 * k + 1,
        "output": out_path,
        "status": "ok" if worst <= args.drift_bound else "drift_exceeded",
    }
    sys.stdout.write(_json_text(report))
    return EXIT_OK if worst <= args.drift_bound else EXIT_DRIFT


# -- tools ------------------------------------------------------------------


def _cmd_construct(args) -> int:
    el = _load_elements(args.elements)
    try:
        data = construct_initial_data(el)
    except ValueError as exc:
        raise _fail_invariant(f"orbit construction failed: {exc}") from exc
    _emit(data.to_dict(), args.output)
    return EXIT_OK


def _cmd_classify(args) -> int:
    el = _load_elements(args.elements)
    _emit({
        "class": classify(el).value,
        "E": energy_from_elements(el),
        "e": eccentricity(el),
        "mu": implied_magnetic_charge(el),
    }, args.output)
    return EXIT_OK


def _cmd_lightcone(args) -> int:
    if args.invert:
        lc = _load_lightcone(args.input)
        try:
            el = from_lightcone(lc)
            el.validate()
        except ValueError as exc:
            raise _fail_invariant(f"decoded elements invalid: {exc}") from exc
        _emit(el.to_dict(), args.output)
        return EXIT_OK
    el = _load_elements(args.input)
    try:
        lc = to_lightcone(el)
    except ValueError as exc:
        raise _fail_invariant(f"light-cone encoding failed: {exc}") from exc
    _emit(lc.to_dict(), args.output)
    return EXIT_OK


def _cmd_act(args) -> int:
    lc = _load_lightcone(args.point)
    dim = lc.metric.dim
    if args.transform:
        payload = _load_json(args.transform)

        def build(d):
            mat = np.array(d["matrix"], dtype=float)
            return LorentzTransform(mat.reshape(dim, dim))

        transform = _parse(build, payload, "transform")
    else:
        transform = LorentzTransform.identity(dim)
    if args.scale <= 0:
        raise _fail_usage("--scale must be positive")
    try:
        moved = group_apply(transform, args.scale, lc)
    except ValueError as exc:
        raise _fail_invariant(f"group action rejected: {exc}") from exc
    _emit(moved.to_dict(), args.output)
    return EXIT_OK


def _cmd_check_lemma(args) -> int:
    _check_dim(args.dim)
    if args.samples < 1:
        raise _fail_usage("--samples must be positive")
    k = (args.dim - 1) // 2
    rng = np.random.default_rng(args.seed)
    algebraic_keys = ("radial_potential", "radial_curvature", "quadratic",
                      "pairing_normsq", "force_normsq")
    worst = dict.fromkeys(algebraic_keys, 0.0)
    worst_cov = 0.0
    orders = []
    # the finite-difference identity is spot-checked on a thin subsample;
    # the algebraic identities run at every point
    fd_stride = max(1, args.samples // 25)
    for i in range(args.samples):
        while True:
            r_vec = rng.normal(size=args.dim)
            r_vec *= rng.uniform(0.5, 2.0) / np.linalg.norm(r_vec)
            if (np.linalg.norm(r_vec) + r_vec[-1]) / np.linalg.norm(r_vec) > args.margin:
                break
        v = rng.normal(size=args.dim)
        xi = random_on_orbit(args.mu, k, rng)
        h_values = (1e-3, 1e-4) if i % fd_stride == 0 else ()
        res = lemma_residuals(r_vec, xi, v, args.mu, h_values=h_values)
        for key in algebraic_keys:
            worst[key] = max(worst[key], getattr(res, key))
        if h_values:
            worst_cov = max(worst_cov, res.covariant[h_values[-1]])
            if res.covariant_order is not None:
                orders.append(res.covariant_order)
    report = {
        "dim": args.dim,
        "mu": args.mu,
        "samples": args.samples,
        "max_residual": max(worst.values()),
        "residuals": worst,
        "covariant_residual": worst_cov,
        "covariant_order": {
            "min": min(orders) if orders else None,
            "max": max(orders) if orders else None,
        },
        "tolerance": args.tol,
    }
    _emit(report, args.output)
    if report["max_residual"] > args.tol:
        bad = max(worst, key=worst.get)
        raise _fail_invariant(
            f"lemma identity '{bad}' exceeds tolerance: "
            f"{worst[bad]:.3e} > {args.tol:g}")
    return EXIT_OK


def _read_positions(path: str) -> np.ndarray:
    if path.endswith(".json"):
        payload = _load_json(path)

        def build(d):
            return np.array([s["r"] for s in d["samples"]], dtype=float)

        return _parse(build, payload, "trajectory JSON")
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            cols = []
            i = 1
            while reader.fieldnames and f"r{i}" in reader.fieldnames:
                cols.append(f"r{i}")
                i += 1
            if not cols:
                raise _fail_usage(f"no position columns r1.. in {path}")
            rows = [[float(row[c]) for c in cols] for row in reader]
    except OSError as exc:
        raise _fail_usage(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise _fail_usage(f"malformed trajectory CSV {path}: {exc}") from exc
    return np.array(rows)


def _cmd_fit(args) -> int:
    points = _read_positions(args.trajectory)
    try:
        ecc, plane, residual = conic_fit(points)
    except ValueError as exc:
        raise _fail_invariant(f"conic fit failed: {exc}") from exc
    _emit({"eccentricity": ecc, "plane": plane.to_dict(),
           "residual": residual}, args.output)
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magkepler",
        description="Magnetized Kepler problems in odd dimensions.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate a trajectory")
    src = sim.add_mutually_exclusive_group(required=True)
    src.add_argument("--circle", action="store_true",
                     help="analytic circular benchmark (requires --mu 0)")
    src.add_argument("--elements", metavar="FILE",
                     help="orbit-elements JSON; mu is taken from the "
                          "implied magnetic charge")
    src.add_argument("--state", metavar="FILE",
                     help="initial state JSON {r, v, xi}")
    sim.add_argument("--dim", type=int, default=None,
                     help="space dimension 2k+1 (default 3 for --circle)")
    sim.add_argument("--mu", type=float, default=0.0,
                     help="magnetic charge (ignored with --elements)")
    sim.add_argument("--t-end", type=float, default=20.0)
    sim.add_argument("--rel-tol", type=float, default=1e-10)
    sim.add_argument("--abs-tol", type=float, default=1e-10)
    sim.add_argument("--samples", type=int, default=201,
                     help="number of output samples (>= 2)")
    sim.add_argument("--drift-bound", type=float, default=1e-8,
                     help="max tolerated relative drift of any invariant")
    sim.add_argument("--format", choices=("csv", "json"), default="csv")
    sim.add_argument("--output", metavar="FILE",
                     help="trajectory file (default trajectory.<format>)")
    sim.set_defaults(func=_cmd_simulate)

    con = sub.add_parser("construct",
                         help="initial data from orbit elements")
    con.add_argument("elements", help="orbit-elements JSON file, or -")
    con.add_argument("--output", metavar="FILE")
    con.set_defaults(func=_cmd_construct)

    cla = sub.add_parser("classify", help="conic class, energy, "
                                          "eccentricity, charge")
    cla.add_argument("elements", help="orbit-elements JSON file, or -")
    cla.add_argument("--output", metavar="FILE")
    cla.set_defaults(func=_cmd_classify)

    lco = sub.add_parser("lightcone",
                         help="orbit elements <-> light-cone point")
    lco.add_argument("input", help="input JSON file, or -")
    lco.add_argument("--invert", action="store_true",
                     help="decode a light-cone point back to elements")
    lco.add_argument("--output", metavar="FILE")
    lco.set_defaults(func=_cmd_lightcone)

    act = sub.add_parser("act", help="apply a Lorentz transform and scaling")
    act.add_argument("point", help="light-cone point JSON file, or -")
    act.add_argument("--transform", metavar="FILE",
                     help="Lorentz transform JSON (default identity)")
    act.add_argument("--scale", type=float, default=1.0,
                     help="positive scaling factor")
    act.add_argument("--output", metavar="FILE")
    act.set_defaults(func=_cmd_act)

    lem = sub.add_parser("check-lemma",
                         help="verify the gauge-field identities on "
                              "random points")
    lem.add_argument("--dim", type=int, required=True)
    lem.add_argument("--mu", type=float, default=0.0)
    lem.add_argument("--samples", type=int, default=1000)
    lem.add_argument("--seed", type=int, default=42)
    lem.add_argument("--margin", type=float, default=0.1,
                     help="minimum Dirac-string margin of sampled points")
    lem.add_argument("--tol", type=float, default=1e-10)
    lem.add_argument("--output", metavar="FILE")
    lem.set_defaults(func=_cmd_check_lemma)

    fit = sub.add_parser("fit", help="fit a conic to trajectory positions")
    fit.add_argument("trajectory", help="trajectory CSV or JSON file")
    fit.add_argument("--output", metavar="FILE")
    fit.set_defaults(func=_cmd_fit)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "simulate" and args.circle and args.dim is None:
        args.dim = 3
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()
