"""Command-line front end: opacity conversions, scan/curve CSV output and
Monte Carlo verification reports, with optional figure rendering.

Exit codes: 0 success, 2 usage or config error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import cloud as cloudmod
from .config import ConfigError, ScenarioConfig, load_scenario
from .distribution import SpreadDistribution, interval_probability
from .engine import (MODELS, lattice_offsets, mass_sum, square_detector_tr,
                     transmittance_curve, TransmittanceCurve)
from .montecarlo import coverage_bias_bound, mc_coverage, mc_nonlocal
from .opacity import KINDS, make_opacity


def _fmt(x) -> str:
    return format(float(x), ".12g")


def _emit(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def cmd_convert(args) -> int:
    spec = make_opacity(args.kind, args.value)
    _emit(json.dumps(spec.to_json_dict()) + "\n", args.out)
    return 0


def cmd_single(args) -> int:
    if not args.offset_min < args.offset_max:
        raise ValueError(f"offset range must satisfy min < max, got "
                         f"[{args.offset_min}, {args.offset_max}]")
    if args.points < 2:
        raise ValueError(f"points must be >= 2, got {args.points}")
    dist = SpreadDistribution.gaussian(args.stdev)
    g = make_opacity("g", args.g).g
    offsets = np.linspace(args.offset_min, args.offset_max, args.points)
    p_v = np.atleast_1d(interval_probability(dist, offsets, args.r))
    tr = 1.0 - g * p_v
    _emit(_csv(("offset", "p_v", "tr"), zip(offsets, p_v, tr)), args.out)
    if args.plot:
        from .plotting import save_single_plot
        save_single_plot(offsets, p_v, tr, args.plot,
                         title=f"stdev={args.stdev:g}r, g={g:g}")
    return 0


def _curve_lattice_cloud(cfg: ScenarioConfig) -> TransmittanceCurve:
    plan = cloudmod.plan_layers(cfg.cloud, cfg.detector.r)
    grid = cfg.stdev_grid
    g_total = math.fsum(layer.opacity.g for layer in plan.layers)
    lattices = {len(layer.lattice): layer.lattice for layer in plan.layers}
    nonlocal_v = np.empty(grid.size)
    s_v = np.empty(grid.size)
    for i, s in enumerate(grid):
        shape = SpreadDistribution.gaussian(s)
        nonlocal_v[i] = cloudmod.total_tr(plan, shape, cfg.detector.r)
        # the narrowest lattice leaks first: conservative mass indicator
        s_v[i] = min(mass_sum(lat, shape, cfg.detector.r) for lat in lattices.values())
    values = {}
    for m in cfg.models:
        if m == "nonlocal":
            values[m] = nonlocal_v
        elif m == "classic":
            values[m] = np.full(grid.size, cloudmod.classic_tr(cfg.cloud).tr_cl)
        else:
            values[m] = np.full(grid.size, math.exp(-g_total))
    return TransmittanceCurve(stdev_grid=grid, values=values, mass_sum=s_v)


def _curve_square(cfg: ScenarioConfig) -> TransmittanceCurve:
    grid = cfg.stdev_grid
    r = cfg.detector.r
    if cfg.cloud is not None:
        layers = cloudmod.project_3d(cfg.cloud, r)
        classic = cloudmod.classic_tr(cfg.cloud).tr_cl
        offset = 0.0
    else:
        layers = [cloudmod.SquareLayer(grid_n=cfg.n_particles, g=cfg.opacity.g)]
        classic = 1.0 - cfg.opacity.g
        offset = cfg.detector.axis_offset
    g_total = math.fsum(l.g for l in layers)
    nonlocal_v = np.empty(grid.size)
    s_v = np.empty(grid.size)
    for i, s in enumerate(grid):
        shape = SpreadDistribution.gaussian(s)
        tr = 1.0
        s2d = math.inf
        for layer in layers:
            # the scalar axis offset displaces one transverse axis
            tr *= square_detector_tr(layer.grid_n, shape, r, layer.g, offset, 0.0)
            sx = mass_sum(lattice_offsets(layer.grid_n, r, offset), shape, r)
            sy = mass_sum(lattice_offsets(layer.grid_n, r), shape, r)
            s2d = min(s2d, sx * sy)
        nonlocal_v[i] = tr
        s_v[i] = s2d
    values = {}
    for m in cfg.models:
        if m == "nonlocal":
            values[m] = nonlocal_v
        elif m == "classic":
            values[m] = np.full(grid.size, classic)
        else:
            values[m] = np.full(grid.size, math.exp(-g_total))
    return TransmittanceCurve(stdev_grid=grid, values=values, mass_sum=s_v)


def _build_curve(cfg: ScenarioConfig) -> TransmittanceCurve:
    if cfg.stdev_grid is None:
        raise ConfigError("curve needs a spread.stdev or spread.stdev_grid section",
                          cfg.source)
    layered = cfg.cloud is not None
    square = cfg.detector.shape == "square_2d" or (
        layered and cfg.cloud.dimensionality == "d2_projected")
    if (layered or square) and "pilotwave" in cfg.models:
        raise ConfigError("the pilotwave model is defined for 1D single-lattice scenarios "
                          "(cloud.n_particles with an interval_1d detector)", cfg.source)
    if square:
        if cfg.cloud is None and cfg.n_particles is None:
            raise ConfigError("square-detector curve needs cloud.n_particles (chunks per "
                              "axis) or cloud segments", cfg.source)
        if cfg.cloud is None and cfg.opacity is None:
            raise ConfigError("curve needs an opacity section", cfg.source)
        return _curve_square(cfg)
    if layered:
        return _curve_lattice_cloud(cfg)
    if cfg.n_particles is None:
        raise ConfigError("curve needs cloud.n_particles or cloud segments", cfg.source)
    if cfg.opacity is None:
        raise ConfigError("curve needs an opacity section", cfg.source)
    return transmittance_curve(cfg.n_particles, cfg.detector.r, cfg.opacity.g,
                               cfg.detector.axis_offset, cfg.stdev_grid, cfg.models)


def cmd_curve(args) -> int:
    cfg = load_scenario(args.config)
    curve = _build_curve(cfg)
    header = ["stdev"] + [m for m in MODELS if m in curve.values] + ["mass_sum"]
    rows = []
    for i, s in enumerate(curve.stdev_grid):
        row = [s] + [curve.values[m][i] for m in header[1:-1]] + [curve.mass_sum[i]]
        rows.append(row)
    _emit(_csv(header, rows), args.out)
    if args.plot:
        from .plotting import save_curve_plot
        save_curve_plot(curve, args.plot, title=cfg.source)
    return 0


def _verify_cases(cfg: ScenarioConfig):
    if cfg.mc is None:
        raise ConfigError("verify needs an mc section (mc.samples, mc.seed)", cfg.source)
    if cfg.mc_matrix is not None:
        return cfg.mc_matrix.cases()
    if cfg.n_particles is None or cfg.opacity is None:
        raise ConfigError("verify needs mc.matrix.* keys, or cloud.n_particles with an "
                          "opacity section", cfg.source)
    if cfg.stdev_grid is None or cfg.stdev_grid.size != 1:
        raise ConfigError("verify without mc.matrix needs a single spread.stdev",
                          cfg.source)
    return [(cfg.n_particles, float(cfg.stdev_grid[0]), cfg.opacity.g)]


def cmd_verify(args) -> int:
    cfg = load_scenario(args.config)
    cases = _verify_cases(cfg)
    r = cfg.detector.r
    reports = []
    failures = []
    for n, stdev, g in cases:
        lattice = lattice_offsets(n, r, cfg.detector.axis_offset)
        shape = SpreadDistribution.gaussian(stdev)
        label = f"n={n} stdev={stdev:g} g={g:g}"

        rep = mc_nonlocal(lattice, shape, r, g, cfg.mc)
        reports.append(rep.to_json_dict())
        if not abs(rep.z_score) <= 4.0:
            failures.append(f"nonlocal {label}: |z| = {abs(rep.z_score):.2f} > 4")

        rep = mc_coverage(lattice, shape, r, g, cfg.mc)
        reports.append(rep.to_json_dict())
        low, high = coverage_bias_bound(lattice, shape, r, g)
        diff = rep.estimate - rep.analytic
        band = (min(0.0, low) - 4.0 * rep.std_error,
                max(0.0, high) + 4.0 * rep.std_error)
        if not band[0] <= diff <= band[1]:
            failures.append(f"coverage {label}: estimate - analytic = {diff:.2e} "
                            f"outside [{band[0]:.2e}, {band[1]:.2e}]")

    _emit(json.dumps(reports, indent=2) + "\n", args.out)
    if failures:
        for line in failures:
            print(f"verification failed: {line}", file=sys.stderr)
        return 3
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spreadgas",
        description="Optical transmittance of gas clouds whose particles are "
                    "spatially spread probability distributions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="convert one opacity representation to all four")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("value", type=float)
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("single", help="single-particle offset scan (CSV: offset,p_v,tr)")
    p.add_argument("--stdev", type=float, required=True, help="particle spread in r units")
    p.add_argument("--g", type=float, required=True, help="absorbed fraction in (0, 1]")
    p.add_argument("--r", type=float, default=1.0, help="detector half-width (default 1)")
    p.add_argument("--offset-min", type=float, default=-10.0)
    p.add_argument("--offset-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--plot", help="also render the scan to this figure file")
    p.set_defaults(func=cmd_single)

    p = sub.add_parser("curve", help="model transmittances over a spread grid "
                                     "(CSV: stdev,<models>,mass_sum)")
    p.add_argument("--config", required=True, help="scenario file")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--plot", help="also render the curves to this figure file")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("verify", help="Monte Carlo vs analytic reports (JSON array)")
    p.add_argument("--config", required=True, help="scenario file with an mc section")
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def entrypoint():
    sys.exit(main())
