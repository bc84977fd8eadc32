"""Benchmark command line: single runs, tuning sweeps, parameter studies
and manufactured-solution rate checks.

Subcommands: solve | sweep-omega | study | mms. Every run is deterministic
for a given configuration; sweep points may execute concurrently under
--jobs, with output written by the collecting thread in a fixed order.
Exit code 0 means every requested run converged (or the rate study
completed); 1 flags usage/configuration errors and 2 solver failures.
The POROSPLIT_LOG environment variable sets the log level.
"""

import argparse
import concurrent.futures
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import mms as mms_mod
from .assembly import assemble_flux_mass, assemble_pressure_mass, assemble_vector_mass
from .biot import load_scenario, optimal_tuning
from .errors import Divergence, PorosplitError
from .plots import plot_fields_svg
from .solver import build_discretization, march

log = logging.getLogger("porosplit")


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(",".join(header) + "\n")
        for row in rows:
            handle.write(",".join(_fmt(v) for v in row) + "\n")


def _run_with_cap(config, omega=None):
    """One full split run; divergence is captured, not raised.

    Returns (total_iters, max_slab_iters, converged, result_or_None).
    """
    cfg = config if omega is None else config.with_omega(omega)
    disc = build_discretization(cfg)
    try:
        result = march(
            disc,
            cfg.n_slabs,
            mode="split",
            tuning=cfg.tuning_value(),
            tol_fixed=cfg.tol_fixed,
            max_iters=cfg.max_fixed_iters,
        )
        return result.total_iterations, result.max_slab_iterations, True, result
    except Divergence as exc:
        total = sum(r.iterations for r in exc.completed_reports)
        worst = max(r.iterations for r in exc.completed_reports)
        log.warning("run did not converge at slab %s", exc.slab_index)
        return total, worst, False, None


def cmd_solve(config_path, out_dir):
    """Run one scenario and emit report.csv, snapshots.csv and field SVGs."""
    config = load_scenario(config_path)
    disc = build_discretization(config)
    result = march(
        disc,
        config.n_slabs,
        mode="split",
        tuning=config.tuning_value(),
        tol_fixed=config.tol_fixed,
        max_iters=config.max_fixed_iters,
    )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for rep in result.reports:
        rows.append(
            (
                rep.slab,
                rep.iterations,
                rep.pressure_increments[-1] if rep.pressure_increments else 0.0,
                rep.flux_increments[-1] if rep.flux_increments else 0.0,
                rep.displacement_increments[-1] if rep.displacement_increments else 0.0,
                rep.termination,
            )
        )
    _write_csv(
        out / "report.csv",
        ["slab", "iterations", "p_increment", "q_increment", "u_increment", "termination"],
        rows,
    )
    Mp = assemble_pressure_mass(disc.spaces.pressure)
    Mq = assemble_flux_mass(disc.spaces.flux, np.eye(2))
    Mu = assemble_vector_mass(disc.spaces.displacement)
    snap_rows = []
    for n, t in enumerate(result.times):
        p = result.pressure_snapshots[n]
        q = result.flux_snapshots[n]
        u = result.displacement_snapshots[n]
        snap_rows.append(
            (
                t,
                float(np.sqrt(max(p @ (Mp @ p), 0.0))),
                float(np.sqrt(max(q @ (Mq @ q), 0.0))),
                float(np.sqrt(max(u @ (Mu @ u), 0.0))),
            )
        )
    _write_csv(out / "snapshots.csv", ["t", "p_L2", "q_L2", "u_L2"], snap_rows)
    for n, t in enumerate(result.times):
        plot_fields_svg(
            disc.spaces,
            result.pressure_snapshots[n],
            result.displacement_snapshots[n],
            t,
            out / f"fields_{t:g}.svg",
        )
    return result


def sweep_omega(config, omegas, jobs=1):
    """SweepResult rows (omega, tuning, totals, converged) sorted by omega."""
    omegas = sorted(float(w) for w in omegas)
    l_star = optimal_tuning(config.material)

    def one(omega):
        total, worst, ok, _ = _run_with_cap(config, omega)
        return (omega, omega * l_star, total, worst, ok)

    if jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(one, omegas))
    else:
        rows = [one(w) for w in omegas]
    return rows


def cmd_sweep_omega(config_path, omegas, out_dir, jobs=1):
    config = load_scenario(config_path)
    rows = sweep_omega(config, omegas, jobs)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out / "sweep.csv",
        ["omega", "L", "total_iters", "max_slab_iters", "converged"],
        rows,
    )
    return rows


_STUDY_AXES = ("mesh-level", "time-step", "space-degree", "time-scheme")
_SCHEME_TOKENS = {"dg0": ("dg", 0), "dg1": ("dg", 1), "cgp1": ("cgp", 1), "cgp2": ("cgp", 2)}


def _apply_axis(config, axis, value):
    from dataclasses import replace

    if axis == "mesh-level":
        return replace(config, mesh_level=int(value)), int(value)
    if axis == "time-step":
        return replace(config, tau=float(value)), float(value)
    if axis == "space-degree":
        return replace(config, space_degree=int(value)), int(value)
    if axis == "time-scheme":
        token = str(value).lower()
        if token not in _SCHEME_TOKENS:
            raise PorosplitError(f"unknown time scheme token {token!r}; use one of {sorted(_SCHEME_TOKENS)}")
        scheme, degree = _SCHEME_TOKENS[token]
        return replace(config, scheme=scheme, time_degree=degree), token
    raise PorosplitError(f"unknown study axis {axis!r}; use one of {_STUDY_AXES}")


def study(config, axis, values, omegas=None, jobs=1):
    """One sweep (or single run at the configured tuning) per axis value."""
    if omegas is None:
        if config.omega is not None:
            omegas = [config.omega]
        else:
            l_star = optimal_tuning(config.material)
            if l_star <= 0:
                raise PorosplitError("cannot express an explicit tuning value as a "
                                     "multiplier when the optimal value is zero")
            omegas = [config.tuning / l_star]
    rows = []
    for value in values:
        cfg, shown = _apply_axis(config, axis, value)
        for entry in sweep_omega(cfg, omegas, jobs):
            rows.append((axis, shown) + entry)
    return rows


def cmd_study(config_path, axis, values, out_dir, omegas=None, jobs=1):
    config = load_scenario(config_path)
    rows = study(config, axis, values, omegas, jobs)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out / "study.csv",
        ["axis", "value", "omega", "L", "total_iters", "max_slab_iters", "converged"],
        rows,
    )
    return rows


def cmd_mms(scheme, time_degree, space_degree, levels, out_dir):
    """Spatial and temporal rate studies; writes rates.csv."""
    levels = [int(v) for v in levels]
    rows = []
    spatial_rows = mms_mod.spatial_study(space_degree, levels, scheme=scheme,
                                         time_degree=max(time_degree, 1))
    orders = {
        key: [""] + mms_mod.observed_orders(spatial_rows, key)
        for key in ("pressure", "flux", "displacement")
    }
    for i, row in enumerate(spatial_rows):
        rows.append(
            (
                "spatial", scheme, max(time_degree, 1), space_degree, row["level"],
                row["pressure"], row["flux"], row["displacement"],
                orders["pressure"][i], orders["flux"][i], orders["displacement"][i],
            )
        )
    slab_counts = [4 * 2**k for k in range(len(levels))]
    temporal_rows = mms_mod.temporal_study(scheme, time_degree, space_degree, slab_counts)
    orders = {
        key: [""] + mms_mod.observed_orders(temporal_rows, key)
        for key in ("pressure", "flux", "displacement")
    }
    for i, row in enumerate(temporal_rows):
        rows.append(
            (
                "temporal", scheme, time_degree, space_degree, row["level"],
                row["pressure"], row["flux"], row["displacement"],
                orders["pressure"][i], orders["flux"][i], orders["displacement"][i],
            )
        )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out / "rates.csv",
        [
            "study", "scheme", "time_degree", "space_degree", "level",
            "error_p", "error_q", "error_u", "order_p", "order_q", "order_u",
        ],
        rows,
    )
    return rows


def _parse_list(text):
    return [tok for tok in text.replace(",", " ").split() if tok]


def make_parser():
    parser = argparse.ArgumentParser(
        prog="porosplit",
        description="Poroelasticity benchmark harness: tuned fixed-stress splitting studies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run one scenario and write reports/snapshots/figures")
    solve.add_argument("--config", required=True, help="scenario file path")
    solve.add_argument("--out", required=True, help="output directory")

    sweep = sub.add_parser("sweep-omega", help="re-run the scenario across tuning multipliers")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--omega", required=True, help="list of multipliers, e.g. '0.5 1 1.5'")
    sweep.add_argument("--jobs", type=int, default=1)

    study_p = sub.add_parser("study", help="vary one axis, sweeping omega per value")
    study_p.add_argument("--config", required=True)
    study_p.add_argument("--out", required=True)
    study_p.add_argument("--vary", required=True, choices=_STUDY_AXES)
    study_p.add_argument("--values", required=True, help="list of axis values")
    study_p.add_argument("--omega", default=None, help="optional list of multipliers")
    study_p.add_argument("--jobs", type=int, default=1)

    mms_p = sub.add_parser("mms", help="manufactured-solution convergence rates")
    mms_p.add_argument("--out", required=True)
    mms_p.add_argument("--scheme", default="cgp", choices=("cgp", "dg"))
    mms_p.add_argument("--time-degree", type=int, default=1)
    mms_p.add_argument("--space-degree", type=int, default=0)
    mms_p.add_argument("--levels", default="8 16 32", help="mesh sizes for the spatial study")
    return parser


def main(argv=None):
    level = os.environ.get("POROSPLIT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "solve":
            result = cmd_solve(args.config, args.out)
            ok = all(r.termination == "converged" for r in result.reports)
            return 0 if ok else 2
        if args.command == "sweep-omega":
            rows = cmd_sweep_omega(args.config, _parse_list(args.omega), args.out, args.jobs)
            return 0 if all(row[-1] for row in rows) else 2
        if args.command == "study":
            omegas = _parse_list(args.omega) if args.omega else None
            rows = cmd_study(args.config, args.vary, _parse_list(args.values), args.out,
                             omegas, args.jobs)
            return 0 if all(row[-1] for row in rows) else 2
        if args.command == "mms":
            cmd_mms(args.scheme, args.time_degree, args.space_degree,
                    _parse_list(args.levels), args.out)
            return 0
    except Divergence as exc:
        log.error("solver did not converge: %s", exc)
        return 2
    except (PorosplitError, OSError) as exc:
        log.error("%s", exc)
        return 1
    return 1


if __name__ == "__main__":
    sys.exit(main())
