"""Command-line frontend.

Commands: shift, simulate, verify, bounds, sweep.  Human-readable tables go
to stdout; machine-readable documents (JSON) and CSV tables go to --out.
Exit codes: 0 success, 1 computation or verification failure, 2 input
validation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .analytic import perihelion_shift, rescale_params, scaling_constants
from .bounds import (
    default_observation,
    load_observation,
    rad_per_rev_to_arcsec_per_century,
    render_report_table,
    run_pipeline,
)
from .core import (
    NCParams,
    OrbitElements,
    PhysicalConstants,
    kepler_state_at_perihelion,
)
from .errors import NCOrbitError, ValidationError
from .integrator import integrate_orbit, measure_precession, write_trajectory_csv
from .kvfile import as_float, as_float_opt, parse_kv_file
from .verification import default_grid, run_grid, tolerance_for

EXIT_OK = 0
EXIT_COMPUTE = 1
EXIT_VALIDATION = 2

_ELEMENT_KEYS = {"a_m", "e", "mass_kg", "k_m3s2", "theta_sq", "eta_sq"}
_SHIFT_KEYS = _ELEMENT_KEYS | {"revolutions_per_century"}
_SIMULATE_KEYS = _ELEMENT_KEYS | {"n_orbits"}
_VERIFY_KEYS = {"e_values", "eps_values", "modes", "n_orbits", "workers"}
_SWEEP_KEYS = _ELEMENT_KEYS | {
    "axis", "start", "stop", "count", "spacing", "measure", "n_orbits", "workers",
}
_BOUNDS_KEYS: set[str] = set()


def _load_config(args, allowed: set[str], required: bool) -> dict[str, str]:
    if args.config is None:
        if required:
            raise ValidationError("this command requires --config")
        return {}
    pairs = parse_kv_file(args.config)
    for key in pairs:
        if key not in allowed:
            raise ValidationError(f"{args.config}: unknown key '{key}'")
    return pairs


def _constants(args) -> PhysicalConstants:
    if args.constants is not None:
        return PhysicalConstants.from_file(args.constants)
    return PhysicalConstants.default()


def _elements_from(pairs: dict[str, str], consts: PhysicalConstants, origin: str):
    elem = OrbitElements(
        a=as_float(pairs, "a_m", origin),
        e=as_float(pairs, "e", origin),
        k=as_float_opt(pairs, "k_m3s2", consts.G * consts.solar_mass, origin),
        m=as_float(pairs, "mass_kg", origin),
    )
    nc = NCParams(
        theta_sq=as_float_opt(pairs, "theta_sq", 0.0, origin),
        eta_sq=as_float_opt(pairs, "eta_sq", 0.0, origin),
        mass=elem.m,
    )
    return elem, nc


def _write_json(path, payload: dict, no_timestamp: bool) -> None:
    if not no_timestamp:
        payload = dict(payload)
        payload["generated_at_utc"] = datetime.now(timezone.utc).isoformat()
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header: list[str], rows: list[list]) -> None:
    def fmt(v):
        if isinstance(v, float):
            return f"{v:.17g}"
        return str(v)

    text = ",".join(header) + "\n"
    text += "".join(",".join(fmt(v) for v in row) + "\n" for row in rows)
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_shift(args) -> int:
    consts = _constants(args)
    pairs = _load_config(args, _SHIFT_KEYS, required=True)
    elem, nc = _elements_from(pairs, consts, str(args.config))
    revs = as_float_opt(pairs, "revolutions_per_century", 415.2018557391525,
                        str(args.config))
    if revs <= 0:
        raise ValidationError(
            f"{args.config}: key 'revolutions_per_century' must be > 0, got {revs}"
        )
    theta_term = perihelion_shift(elem, NCParams(nc.theta_sq, 0.0, nc.mass))
    eta_term = perihelion_shift(elem, NCParams(0.0, nc.eta_sq, nc.mass))
    total = perihelion_shift(elem, nc)
    print("perihelion shift per revolution")
    print(f"  theta term  {theta_term:+.9e} rad/rev")
    print(f"  eta term    {eta_term:+.9e} rad/rev")
    print(f"  total       {total:+.9e} rad/rev")
    print(f"  total       {rad_per_rev_to_arcsec_per_century(total, revs):+.9e}"
          f" arcsec/century (at {revs:g} rev/century)")
    if args.out:
        _write_json(args.out, {
            "theta_term_rad_per_rev": theta_term,
            "eta_term_rad_per_rev": eta_term,
            "total_rad_per_rev": total,
            "total_arcsec_per_century": rad_per_rev_to_arcsec_per_century(total, revs),
            "revolutions_per_century": revs,
            "inputs": {"a_m": elem.a, "e": elem.e, "k_m3s2": elem.k,
                       "mass_kg": elem.m, "theta_sq": nc.theta_sq,
                       "eta_sq": nc.eta_sq},
        }, args.no_timestamp)
    return EXIT_OK


def cmd_simulate(args) -> int:
    consts = _constants(args)
    pairs = _load_config(args, _SIMULATE_KEYS, required=True)
    elem, nc = _elements_from(pairs, consts, str(args.config))
    n_orbits = int(as_float_opt(pairs, "n_orbits", 10, str(args.config)))
    state = kepler_state_at_perihelion(elem)
    traj = integrate_orbit(state, elem, nc, n_orbits, args.tolerance)
    print(f"integrated {n_orbits} orbits: {traj.stats.n_steps} steps "
          f"({traj.stats.n_rejected} rejected)")
    print(f"  max relative energy drift   {traj.stats.max_energy_drift:.3e}")
    print(f"  max relative ang.mom. drift {traj.stats.max_angmom_drift:.3e}")
    if args.out:
        write_trajectory_csv(traj, elem, nc, args.out)
        print(f"  trajectory written to {args.out}")
    return EXIT_OK


def _float_list(raw: str, key: str) -> list[float]:
    try:
        return [float(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError as exc:
        raise ValidationError(f"key '{key}' must be a comma-separated number list") from exc


def cmd_verify(args) -> int:
    pairs = _load_config(args, _VERIFY_KEYS, required=False)
    e_values = _float_list(pairs["e_values"], "e_values") if "e_values" in pairs else None
    eps_values = _float_list(pairs["eps_values"], "eps_values") if "eps_values" in pairs else None
    modes = tuple(tok.strip() for tok in pairs["modes"].split(",")) if "modes" in pairs else None
    for mode in modes or ():
        if mode not in ("theta", "eta", "mixed"):
            raise ValidationError(f"key 'modes': unknown mode '{mode}'")
    origin = str(args.config)
    n_orbits = int(as_float_opt(pairs, "n_orbits", 30, origin))
    workers = int(as_float_opt(pairs, "workers", 1, origin))
    grid_kwargs = {}
    if e_values is not None:
        grid_kwargs["e_values"] = e_values
    if eps_values is not None:
        grid_kwargs["eps_values"] = eps_values
    if modes is not None:
        grid_kwargs["modes"] = modes
    cases = default_grid(**grid_kwargs)
    if not cases:
        raise ValidationError("verification grid is empty")
    for case in cases:
        if case.eps <= 0:
            raise ValidationError(f"key 'eps_values': eps must be > 0, got {case.eps}")
        if tolerance_for(case.eps) >= 1.0:
            raise ValidationError(f"key 'eps_values': eps {case.eps} is outside the "
                                  "perturbative regime")

    results = run_grid(cases, n_orbits=n_orbits, tolerance=args.tolerance, workers=workers)
    header = ["e", "eps", "mode", "analytic_rad_per_rev", "measured_rad_per_rev",
              "rel_discrepancy", "tolerance", "status"]
    rows = []
    all_passed = True
    print(f"{'case':<28} {'analytic':>14} {'measured':>14} {'rel.disc':>10} {'limit':>8}  status")
    for res in results:
        if res.skipped:
            status = "skip"
        elif res.passed:
            status = "pass"
        else:
            status = "FAIL"
            all_passed = False
        rows.append([res.case.e, res.case.eps, res.case.mode, res.analytic,
                     res.measured, res.rel_discrepancy, res.tolerance, status])
        print(f"{res.case.label():<28} {res.analytic:>14.6e} {res.measured:>14.6e} "
              f"{res.rel_discrepancy:>10.3e} {res.tolerance:>8.2e}  {status}"
              + (f" ({res.skipped})" if res.skipped else ""))
    if args.out:
        _write_csv(args.out, header, rows)
    return EXIT_OK if all_passed else EXIT_COMPUTE


def cmd_bounds(args) -> int:
    consts = _constants(args)
    _load_config(args, _BOUNDS_KEYS, required=False)
    if args.observation is not None:
        obs = load_observation(args.observation, consts)
    else:
        obs = default_observation(consts)
    report = run_pipeline(
        obs=obs, consts=consts,
        sigma_multiplier=args.sigma_multiplier, rounding=args.rounding,
    )
    print(render_report_table(report))
    if args.out:
        _write_json(args.out, report.to_dict(), args.no_timestamp)
        print(f"report written to {args.out}")
    return EXIT_OK


_SWEEP_AXES = ("e", "a_m", "mass_kg", "theta_sq", "eta_sq")


def cmd_sweep(args) -> int:
    consts = _constants(args)
    pairs = _load_config(args, _SWEEP_KEYS, required=True)
    origin = str(args.config)
    axis = pairs.get("axis")
    if axis not in _SWEEP_AXES:
        raise ValidationError(f"{origin}: key 'axis' must be one of {_SWEEP_AXES}, got {axis!r}")
    start = as_float(pairs, "start", origin)
    stop = as_float(pairs, "stop", origin)
    count = int(as_float(pairs, "count", origin))
    if count < 1:
        raise ValidationError(f"{origin}: key 'count' must be >= 1, got {count}")
    spacing = pairs.get("spacing", "linear")
    if spacing not in ("linear", "log"):
        raise ValidationError(f"{origin}: key 'spacing' must be linear or log, got {spacing!r}")
    measure = pairs.get("measure", "0") not in ("0", "false", "no")
    n_orbits = int(as_float_opt(pairs, "n_orbits", 30, origin))
    workers = int(as_float_opt(pairs, "workers", 1, origin))

    base_elem, base_nc = _elements_from(pairs, consts, origin)
    if spacing == "log":
        if start <= 0 or stop <= 0:
            raise ValidationError(f"{origin}: log spacing needs positive start/stop")
        grid = np.geomspace(start, stop, count)
    else:
        grid = np.linspace(start, stop, count)

    # the mass axis holds the mass-invariant constants fixed, so the shift
    # column directly exhibits (or refutes) mass independence
    inv_theta, inv_eta = scaling_constants(base_nc)

    def build(value: float):
        if axis == "e":
            elem = OrbitElements(base_elem.a, value, base_elem.k, base_elem.m)
            return elem, base_nc
        if axis == "a_m":
            elem = OrbitElements(value, base_elem.e, base_elem.k, base_elem.m)
            return elem, base_nc
        if axis == "mass_kg":
            elem = OrbitElements(base_elem.a, base_elem.e, base_elem.k, value)
            return elem, rescale_params(base_nc, value)
        if axis == "theta_sq":
            return base_elem, NCParams(value, base_nc.eta_sq, base_nc.mass)
        return base_elem, NCParams(base_nc.theta_sq, value, base_nc.mass)

    # validate the whole grid before computing anything
    points = []
    for value in grid:
        try:
            points.append((float(value), *build(float(value))))
        except (ValidationError, NCOrbitError) as exc:
            raise ValidationError(f"{origin}: grid point {axis}={value:g}: {exc}") from exc

    header = [axis, "analytic_rad_per_rev"]
    if measure:
        header += ["measured_rad_per_rev", "rel_discrepancy"]

    def evaluate(point):
        value, elem, nc = point
        analytic = perihelion_shift(elem, nc)
        row = [value, analytic]
        if measure:
            m = measure_precession(elem, nc, n_orbits=n_orbits, tolerance=args.tolerance)
            rel = (abs(m.shift_per_rev - analytic) / abs(analytic)
                   if analytic != 0.0 else math.nan)
            row += [m.shift_per_rev, rel]
        return row

    if workers > 1:
        # executor.map restores grid order regardless of completion order
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(evaluate, points))
    else:
        rows = [evaluate(p) for p in points]
    _write_csv(args.out, header, rows)
    if args.out:
        print(f"{len(rows)} rows written to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat key-value config file")
    common.add_argument("--constants", metavar="PATH",
                        help="constants override file (keys G, hbar, planck_length, "
                             "solar_mass, electron_mass, nucleon_mass)")
    common.add_argument("--out", metavar="PATH", help="machine-readable output path")
    common.add_argument("--rounding", choices=("exact", "paper"), default="exact",
                        help="intermediate rounding convention (default exact)")
    common.add_argument("--tolerance", type=float, default=1e-12,
                        help="integrator step tolerance (default 1e-12)")
    common.add_argument("--no-timestamp", action="store_true",
                        help="omit the timestamp field from JSON output")

    parser = argparse.ArgumentParser(
        prog="ncorbit",
        description="Perihelion precession and noncommutativity bounds toolkit",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("shift", parents=[common],
                   help="closed-form perihelion shift from a config file")
    sub.add_parser("simulate", parents=[common],
                   help="propagate an orbit and dump the trajectory CSV")
    sub.add_parser("verify", parents=[common],
                   help="integrator-versus-closed-form verification table")
    bounds_p = sub.add_parser("bounds", parents=[common],
                              help="observational bound report")
    bounds_p.add_argument("--observation", metavar="PATH",
                          help="observation record file (default: shipped Mercury data)")
    bounds_p.add_argument("--sigma-multiplier", type=float, default=3.0,
                          help="residual cap multiplier (default 3)")
    sub.add_parser("sweep", parents=[common],
                   help="tabulate the shift over a 1-D parameter grid")
    return parser


_HANDLERS = {
    "shift": cmd_shift,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "bounds": cmd_bounds,
    "sweep": cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not (0.0 < args.tolerance <= 1e-3):
        print(f"error: --tolerance must be in (0, 1e-3], got {args.tolerance}",
              file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return _HANDLERS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NCOrbitError as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
