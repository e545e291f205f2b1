"""Command-line front end: presets, runs, convergence, fan and field dumps.

Exit codes: 0 success, 1 run failure (the manifest holds the reason),
2 configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import pathlib
import sys
import time

import numpy as np

from . import fields, output, riemann1d, solver1d
from .config import ConfigError, parse_config, preset, preset_names, serialize
from .physics import (
    AffineAdsorption,
    FluxContext,
    LinearSumViscosity,
    PhysicsModel,
    SqrtSumViscosity,
    State,
)
from .pressure2d import Grid2D, PressureBC
from .solver1d import Solver1D
from .solver2d import Solver2D

_log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# builders


def build_model(cfg):
    viscosity = (LinearSumViscosity(cfg.viscosity_base)
                 if cfg.viscosity == "linear-sum"
                 else SqrtSumViscosity(cfg.viscosity_base))
    return PhysicsModel(
        m=cfg.m, mu_o=cfg.mu_o, water_viscosity=viscosity,
        adsorption=AffineAdsorption(cfg.adsorption_base,
                                    cfg.adsorption_slope),
        rho_w_g=cfg.rho_w_g, rho_o_g=cfg.rho_o_g,
        gravity_on=cfg.gravity, c_max=cfg.c_max)


def build_solver_1d(cfg, model=None):
    model = model or build_model(cfg)
    h = (cfg.x_hi - cfg.x_lo) / cfg.n
    x = cfg.x_lo + h * (np.arange(cfg.n) + 0.5)
    left = x < cfg.jump
    s0 = np.where(left, cfg.s_left, cfg.s_right)
    c0 = np.where(left[None, :],
                  np.asarray(cfg.c_left, float)[:, None],
                  np.asarray(cfg.c_right, float)[:, None])
    bs_l, bc_l, bs_r, bc_r = cfg.boundary_states()
    return Solver1D(
        model, s0, c0, v=cfg.v, K=cfg.K, x_lo=cfg.x_lo, x_hi=cfg.x_hi,
        direction=cfg.direction, flux=cfg.flux, order=cfg.order,
        theta=cfg.theta, cfl=0.5 * cfg.cfl_safety,
        left_state=State(bs_l, bc_l), right_state=State(bs_r, bc_r))


def build_boundary(cfg, grid):
    if cfg.layout == "strip":
        return PressureBC.strip_flow(grid, cfg.p_in, cfg.p_out)
    return PressureBC.quarter_five_spot(
        grid, cfg.p_in, cfg.p_out,
        inlet_fraction=cfg.inlet_fraction,
        outlet_fraction=cfg.outlet_fraction)


def build_solver_2d(cfg, model=None):
    model = model or build_model(cfg)
    grid = Grid2D(cfg.nx, cfg.ny)
    K = fields.generate(cfg.field_spec(), cfg.nx, cfg.ny)
    bc = build_boundary(cfg, grid)
    # the pressure field drifts slowly compared to the transport CFL
    # step, so refreshing it every few steps amortizes the linear solve
    # without touching the stability bound (velocities stay frozen, and
    # the bound is always taken from the field actually in use)
    return Solver2D(
        model, grid, cfg.s0, np.asarray(cfg.c0, float), K, bc,
        inlet_c=np.asarray(cfg.inlet_c, float), flux=cfg.flux,
        order=cfg.order, theta=cfg.theta, cfl_safety=cfg.cfl_safety,
        pressure_every=10, preconditioner="jacobi")


# ---------------------------------------------------------------------------
# snapshots


def _snapshot_paths(outdir, index, formats):
    stem = outdir / ("snapshot_%03d" % index)
    names = []
    if formats in ("csv", "both"):
        names.append(stem.with_suffix(".csv"))
    if formats in ("vtk", "both"):
        names.append(stem.with_suffix(".vtk"))
    return names


def _write_snapshot(cfg, solver, outdir, index):
    written = []
    for path in _snapshot_paths(outdir, index, cfg.format):
        if cfg.dimension == 1:
            if path.suffix == ".csv":
                output.write_snapshot_1d(path, solver.x, solver.s, solver.c)
            else:
                arrays = {"s": solver.s}
                for l, name in enumerate(output.species_names(solver.c.shape[0])):
                    arrays[name] = solver.c[l]
                output.write_vtk(path, arrays, nx=solver.N, dx=solver.h)
        else:
            solver._ensure_pressure()
            if path.suffix == ".csv":
                output.write_snapshot_2d(
                    path, solver.grid, solver.s, solver.c, solver.K,
                    solver.pressure)
            else:
                arrays = {"s": solver.s}
                for l, name in enumerate(output.species_names(solver.c.shape[0])):
                    arrays[name] = solver.c[l]
                arrays["K"] = solver.K
                arrays["p"] = solver.pressure
                output.write_vtk(path, arrays, nx=solver.grid.nx,
                                 ny=solver.grid.ny, dx=solver.grid.dx,
                                 dy=solver.grid.dy)
        written.append(path.name)
    return written


def _violation_count(solver, guard_tripped):
    """Violations: a tripped solver guard, or a clipped concentration
    excursion beyond roundoff (which only warns)."""
    count = 1 if guard_tripped else 0
    if solver.max_c_excess > solver1d._C_RANGE_TOL:
        count += 1
    return count


# ---------------------------------------------------------------------------
# operations


def run_experiment(cfg):
    """Run one configured experiment; artifacts land in cfg.outdir.

    The manifest is written even when the run fails, with the reason.
    Returns the process exit status.
    """
    outdir = pathlib.Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "config": serialize(cfg),
        "dimension": cfg.dimension,
        "status": "failed",
        "reason": None,
        "snapshots": [],
        "time_steps": 0,
        "wall_time_s": 0.0,
        "invariant_violations": None,
    }
    started = time.perf_counter()
    solver = None
    status = 1
    guard_tripped = False
    try:
        solver = (build_solver_1d(cfg) if cfg.dimension == 1
                  else build_solver_2d(cfg))
        manifest["snapshots"].append(
            {"index": 0, "t": 0.0,
             "files": _write_snapshot(cfg, solver, outdir, 0)})
        for index, t_snap in enumerate(cfg.output_times(), start=1):
            solver.run(t_snap)
            manifest["snapshots"].append(
                {"index": index, "t": solver.t,
                 "files": _write_snapshot(cfg, solver, outdir, index)})
        manifest["status"] = "ok"
        manifest["reason"] = None
        status = 0
    except RuntimeError as err:  # a solver invariant guard tripped
        guard_tripped = True
        manifest["reason"] = str(err)
        _log.error("run failed: %s", err)
    except Exception as err:  # the manifest must record any failure
        manifest["reason"] = str(err)
        _log.error("run failed: %s", err)
    finally:
        if solver is not None:
            manifest["time_steps"] = solver.steps
            manifest["invariant_violations"] = _violation_count(
                solver, guard_tripped)
        manifest["wall_time_s"] = time.perf_counter() - started
        output.write_manifest(outdir / "manifest.json", manifest)
    return status


def convergence_study(cfg, grid_ns, reference_n):
    """Error table rows (h, e_s, alpha_s, e_c1, alpha_c1, ...) for cfg.

    Each listed grid runs cfg's scheme to t_final; the reference is the
    first-order exact-interface scheme on reference_n cells, block
    averaged onto each grid for the L1 comparison.
    """
    if cfg.dimension != 1:
        raise ValueError("the error study is defined for one dimension")
    for n in grid_ns:
        if reference_n % n != 0:
            raise ValueError(
                "reference grid %d must refine grid %d" % (reference_n, n))
    ref_cfg = dataclasses.replace(
        cfg, flux="godunov", order=1, theta=None, n=int(reference_n))
    ref = build_solver_1d(ref_cfg)
    ref.run(cfg.t_final, record=False)

    rows = []
    prev = None
    for n in grid_ns:
        sol = build_solver_1d(dataclasses.replace(cfg, n=int(n)))
        sol.run(cfg.t_final, record=False)
        ratio = reference_n // n
        h = (cfg.x_hi - cfg.x_lo) / n
        errs = [solver1d.l1_distance(
            sol.s, solver1d.coarsen(ref.s, ratio), h)]
        for l in range(cfg.m):
            errs.append(solver1d.l1_distance(
                sol.c[l], solver1d.coarsen(ref.c[l], ratio), h))
        if prev is None:
            alphas = [math.nan] * len(errs)
        else:
            h_prev, errs_prev = prev
            alphas = [
                math.log(ep / e) / math.log(h_prev / h)
                if ep > 0.0 and e > 0.0 else math.nan
                for ep, e in zip(errs_prev, errs)]
        row = [h]
        for e, a in zip(errs, alphas):
            row += [e, a]
        rows.append(tuple(row))
        prev = (h, errs)
    return rows


def solve_fan(cfg, model=None):
    """The exact similarity solution for cfg's 1D jump data."""
    model = model or build_model(cfg)
    bs_l, bc_l, bs_r, bc_r = cfg.boundary_states()
    ctx = FluxContext(cfg.v, cfg.K, cfg.direction)
    problem = riemann1d.RiemannProblem(
        State(bs_l, bc_l), State(bs_r, bc_r), ctx, ctx, model)
    return riemann1d.solve(problem)


def dump_fan(cfg, samples=1001):
    """Solve the configured jump problem; write samples and wave data."""
    if cfg.dimension != 1:
        raise ValueError("the fan dump is defined for one dimension")
    outdir = pathlib.Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    fan = solve_fan(cfg)
    speeds = [w.speed_lo for w in fan.waves] + [w.speed_hi for w in fan.waves]
    lo = min(speeds + [0.0])
    hi = max(speeds + [0.0])
    span = max(hi - lo, 1.0)
    xi = np.linspace(lo - 0.15 * span, hi + 0.15 * span, samples)
    states = [fan.sample(value) for value in xi]
    s = np.array([st.s for st in states])
    c = np.array([st.c for st in states]).T
    header = ["xi", "s"] + output.species_names(cfg.m)
    output._write_rows(outdir / "fan.csv", header, [xi, s] + list(c))

    waves = [
        {
            "kind": w.kind,
            "speed_lo": w.speed_lo,
            "speed_hi": w.speed_hi,
            "left": {"s": w.left.s, "c": list(w.left.c)},
            "right": {"s": w.right.s, "c": list(w.right.c)},
        }
        for w in fan.waves
    ]
    output.write_manifest(outdir / "fan_waves.json", {"waves": waves})
    return fan


def dump_field(cfg):
    """Generate the configured permeability field and write it out."""
    outdir = pathlib.Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    field = fields.generate(cfg.field_spec(), cfg.nx, cfg.ny)
    if cfg.format in ("csv", "both"):
        fields.write_csv(outdir / "field.csv", field)
    if cfg.format in ("vtk", "both"):
        output.write_vtk(outdir / "field.vtk", {"K": field},
                         nx=cfg.nx, ny=cfg.ny,
                         dx=1.0 / cfg.nx, dy=1.0 / cfg.ny)
    return field


# ---------------------------------------------------------------------------
# argument handling


def _add_config_options(sub):
    sub.add_argument("--config", metavar="PATH",
                     help="path to a run configuration file")
    sub.add_argument("--preset", metavar="NAME",
                     help="built-in configuration (see --list-presets)")
    sub.add_argument("--out", metavar="DIR",
                     help="override the output directory")
    sub.add_argument("--seed", type=int, metavar="N",
                     help="override the permeability field seed")
    sub.add_argument("--format", choices=_FORMAT_CHOICES,
                     help="snapshot format override")


_FORMAT_CHOICES = ("csv", "vtk", "both")


def load_config(args):
    if bool(args.config) == bool(args.preset):
        raise ConfigError(["exactly one of --config or --preset is needed"])
    if args.preset:
        try:
            cfg = preset(args.preset)
        except KeyError as err:
            raise ConfigError([str(err.args[0])]) from err
    else:
        text = pathlib.Path(args.config).read_text(encoding="utf-8")
        cfg = parse_config(text)
    overrides = {}
    if args.out is not None:
        overrides["outdir"] = args.out
    if args.seed is not None:
        overrides["field_seed"] = args.seed
    if args.format is not None:
        overrides["format"] = args.format
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    return cfg


def _parse_grid_list(text):
    try:
        ns = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as err:
        raise ConfigError(["--grids: %s" % (err,)]) from err
    if not ns:
        raise ConfigError(["--grids: need at least one grid"])
    return ns


def build_parser():
    parser = argparse.ArgumentParser(
        prog="polyflood",
        description="Finite-volume simulator for two-phase flow with "
                    "multicomponent polymer flooding.")
    parser.add_argument("--list-presets", action="store_true",
                        help="list built-in configurations and exit")
    sub = parser.add_subparsers(dest="command")

    run = sub.add_parser("run", help="run one configured experiment")
    _add_config_options(run)

    conv = sub.add_parser(
        "convergence", help="error table against a fine reference run")
    _add_config_options(conv)
    conv.add_argument("--grids", default="50,100,200,400,800",
                      help="comma-separated cell counts")
    conv.add_argument("--reference", type=int, default=3200,
                      help="reference grid cell count")
    conv.add_argument("--fluxes", default=None,
                      help="comma-separated flux list (default: the "
                           "configured flux; 'all' for every scheme)")

    rie = sub.add_parser("riemann", help="dump the exact similarity fan")
    _add_config_options(rie)
    rie.add_argument("--samples", type=int, default=1001,
                     help="number of fan sample points")

    fld = sub.add_parser("field", help="generate a permeability field")
    _add_config_options(fld)
    return parser


def _cmd_run(args):
    return run_experiment(load_config(args))


def _cmd_convergence(args):
    cfg = load_config(args)
    grid_ns = _parse_grid_list(args.grids)
    if args.fluxes is None:
        fluxes = [cfg.flux]
    elif args.fluxes.strip() == "all":
        fluxes = ["dflu", "godunov", "upstream"]
    else:
        fluxes = [f.strip() for f in args.fluxes.split(",") if f.strip()]
    outdir = pathlib.Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for flux in fluxes:
        flux_cfg = dataclasses.replace(cfg, flux=flux, theta=None)
        rows = convergence_study(flux_cfg, grid_ns, args.reference)
        path = outdir / ("convergence_%s.csv" % flux)
        output.write_convergence(path, rows, cfg.m)
        print("# %s" % flux)
        print(",".join(output.convergence_header(cfg.m)))
        for row in rows:
            print(",".join("%.6g" % value for value in row))
    return 0


def _cmd_riemann(args):
    cfg = load_config(args)
    fan = dump_fan(cfg, samples=args.samples)
    for wave in fan.waves:
        print("%-12s speeds [%.12g, %.12g]  s: %.12g -> %.12g"
              % (wave.kind, wave.speed_lo, wave.speed_hi,
                 wave.left.s, wave.right.s))
    return 0


def _cmd_field(args):
    cfg = load_config(args)
    field = dump_field(cfg)
    print("field %s: %dx%d, K in [%.6g, %.6g], mean %.6g"
          % (cfg.field_kind, cfg.nx, cfg.ny,
             field.min(), field.max(), field.mean()))
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "convergence": _cmd_convergence,
    "riemann": _cmd_riemann,
    "field": _cmd_field,
}


def main(argv=None):
    logging.basicConfig(
        level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_presets:
        for name in preset_names():
            print(name)
        return 0
    if args.command is None:
        parser.print_help()
        return 2
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as err:
        for problem in err.errors:
            print("config error: %s" % problem, file=sys.stderr)
        return 2
    except (ValueError, OSError) as err:
        print("error: %s" % err, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
