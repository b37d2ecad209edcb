"""Command-line front end.

    hgmimo simulate --preset table1 --out out/
    hgmimo steer-sweep --preset table1 --scheme both
    hgmimo profile --preset table1 --plane tx --tilt 30,30
    hgmimo optimize 1mm 20m
    hgmimo capture-sweep --out out/

Every command that writes files echoes the effective configuration to
``<out>/config.yaml``; rerunning with ``--config <out>/config.yaml``
reproduces the outputs byte for byte.
"""
from __future__ import annotations

import argparse
import dataclasses
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .beam import ModeIndex, hg_fields, optimize_waist
from .config import POLARIZATIONS, SCHEMES, dump_config, load_config, preset
from .errors import ConfigError, HgMimoError
from .geometry import element_positions
from .linkmetrics import (capture_sweep, element_grid, power_profile, received_profile,
                          report_from_channel, scenario_channel, write_capture_csv, write_grid,
                          write_streams_csv, write_sweep_csv)
from .txrx import CROSS, UNIDIRECTIONAL, ModeSet

_LENGTH_UNITS = {"km": 1e3, "m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "nm": 1e-9}


def parse_length(text):
    """'1mm' -> 0.001; a bare number is taken in metres."""
    match = re.fullmatch(r"\s*([0-9.eE+-]+)\s*([a-z]*)\s*", text)
    if not match or match.group(2) not in ("", *_LENGTH_UNITS):
        raise ConfigError("length", f"cannot parse {text!r}; use e.g. 1mm, 20m, 0.35")
    try:
        value = float(match.group(1)) * _LENGTH_UNITS.get(match.group(2), 1.0)
    except ValueError:
        raise ConfigError("length", f"cannot parse {text!r}") from None
    if not (math.isfinite(value) and value > 0):
        raise ConfigError("length", f"must be positive, got {text!r}")
    return value


def parse_pair(text, name="--tilt"):
    parts = text.split(",")
    try:
        if len(parts) != 2:
            raise ValueError
        return [float(parts[0]), float(parts[1])]
    except ValueError:
        raise ConfigError(name, f"expected two comma-separated numbers, got {text!r}") from None


def _scenario(args):
    if args.config and args.preset:
        raise ConfigError("--config", "use either --config or --preset, not both")
    cfg = load_config(args.config) if args.config else preset(args.preset or "table1")
    if getattr(args, "scheme", None):
        cfg.scheme = args.scheme
    if getattr(args, "pol", None):
        cfg.polarization = args.pol
    if getattr(args, "tilt", None):
        cfg.tilt_deg = parse_pair(args.tilt)
    if getattr(args, "out", None):
        cfg.output_dir = args.out
    cfg.validate()
    for theta in cfg.tilt_deg:
        if abs(theta) >= 90.0:
            print(f"warning: tilt {cfg.tilt_deg} deg turns the TX array away from the RX", file=sys.stderr)
            break
    return cfg


def _outdir(cfg):
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    dump_config(cfg, out / "config.yaml")
    return out


def _summary_lines(cfg, reports):
    lines = [f"hgmimo {__version__}",
             f"carrier {cfg.carrier_frequency_hz / 1e9:g} GHz, bandwidth {cfg.bandwidth_hz / 1e6:g} MHz, "
             f"TX power {cfg.tx_power_dbm:g} dBm, distance {cfg.distance_m:g} m",
             f"tilt {cfg.tilt_deg[0]:g},{cfg.tilt_deg[1]:g} deg, element pattern {cfg.element_pattern.kind}", ""]
    for r in reports:
        sinr = r.sinr_db
        lines.append(f"{r.scheme:10s} {r.polarization:15s} streams {len(r.streams):3d}  "
                     f"SE {r.total_se:9.4f} bps/Hz  throughput {r.throughput_bps / 1e9:9.4f} Gbps  "
                     f"SINR {sinr.min():7.2f}..{sinr.max():6.2f} dB")
    by_pol = {}
    for r in reports:
        by_pol.setdefault(r.polarization, []).append(r)
    for pol, rs in by_pol.items():
        if len(rs) == 2:
            a, b = rs
            lines.append(f"{pol}: {b.scheme} - {a.scheme} = {b.total_se - a.total_se:+.4f} bps/Hz")
    return lines


def cmd_simulate(args):
    cfg = _scenario(args)
    out = _outdir(cfg)
    h = scenario_channel(cfg, backend=args.backend)
    reports = [report_from_channel(h, cfg, s, cfg.polarization_name()) for s in cfg.schemes()]
    write_streams_csv(out / "streams.csv", reports)
    lines = _summary_lines(cfg, reports)
    (out / "summary.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0


def cmd_steer_sweep(args):
    cfg = _scenario(args)
    if args.tilts:
        cfg.sweep_tilts_deg = [parse_pair(t, "--tilts") for t in args.tilts]
        cfg.validate()
    out = _outdir(cfg)
    pols = [POLARIZATIONS[args.pol]] if args.pol else [UNIDIRECTIONAL, CROSS]
    rows = []
    for tx_deg, ty_deg in cfg.sweep_tilts_deg:
        sweep_cfg = dataclasses.replace(cfg, tilt_deg=[tx_deg, ty_deg])
        h = scenario_channel(sweep_cfg, backend=args.backend)
        for pol in pols:
            for scheme in cfg.schemes():
                r = report_from_channel(h, sweep_cfg, scheme, pol)
                rows.append((tx_deg, ty_deg, r))
                print(f"tilt {tx_deg:5.1f},{ty_deg:5.1f}  {r.scheme:10s} {r.polarization:15s} "
                      f"SE {r.total_se:9.4f} bps/Hz")
    write_sweep_csv(out / "sweep.csv", rows)
    return 0


def _profile_modes(cfg, mode_args):
    if not mode_args:
        return cfg.mode_set()
    return ModeSet(ModeIndex(*(int(v) for v in parse_pair(m, "--mode"))) for m in mode_args)


def cmd_profile(args):
    cfg = _scenario(args)
    if args.units:
        cfg.grid.units = args.units
    out = _outdir(cfg)
    grids = out / "grids"
    grids.mkdir(exist_ok=True)
    modes = _profile_modes(cfg, args.mode)
    beam = cfg.beam()
    tilt = cfg.tilt()
    if args.plane == "tx":
        z = cfg.tx_geometry().plane_z
        grid = power_profile(beam, modes, 1.0 / len(modes), z, tilt, cfg.grid.half_extent, cfg.grid.points,
                             cfg.grid.units)
        path = grids / "tx_profile.grid"
        write_grid(path, grid)
        print(f"wrote {path} ({grid.shape[0]}x{grid.shape[1]}, units {grid.units})")
        return 0
    sampled, _ = received_profile(cfg, modes, tilt)
    rx = cfg.rx_geometry()
    pts = element_positions(rx)
    analytic = np.einsum("...k->...", np.abs(hg_fields(beam, modes, pts[:, 0], pts[:, 1], pts[:, 2])) ** 2)
    write_grid(grids / "rx_sampled.grid", sampled)
    write_grid(grids / "rx_analytic.grid", element_grid(analytic, rx))
    print(f"wrote {grids / 'rx_sampled.grid'} and {grids / 'rx_analytic.grid'} "
          f"({sampled.shape[0]}x{sampled.shape[1]}, metres)")
    return 0


def optimize_report(wavelength, distance, modes=36):
    sol = optimize_waist(wavelength, distance)
    half = 2.2 * sol.edge_radius
    return {
        "w0_m": sol.beam.waist,
        "w_edge_m": sol.edge_radius,
        "rayleigh_distance_m": sol.beam.rayleigh_distance,
        "half_size_m": half,
        "modes": modes,
    }


def cmd_optimize(args):
    wavelength = parse_length(args.wavelength)
    distance = parse_length(args.distance)
    r = optimize_report(wavelength, distance)
    print(f"wavelength       {wavelength:.6g} m")
    print(f"distance         {distance:.6g} m")
    print(f"w0_opt           {r['w0_m']:.4f} m")
    print(f"w_edge           {r['w_edge_m']:.4f} m")
    print(f"rayleigh_dist    {r['rayleigh_distance_m']:.4f} m")
    print(f"half_size_36     {r['half_size_m']:.4f} m  (2.2 w_edge, span {2 * r['half_size_m']:.4f} m)")
    return 0


def cmd_capture_sweep(args):
    cfg = _scenario(args)
    out = _outdir(cfg)
    modes = _profile_modes(cfg, args.mode) if args.mode else [ModeIndex(l, l) for l in range(6)]
    s_values = np.round(np.arange(args.s_min, args.s_max + 0.5 * args.s_step, args.s_step), 10)
    rows = capture_sweep(cfg.beam(), modes, s_values)
    write_capture_csv(out / "capture.csv", rows)
    print(f"wrote {out / 'capture.csv'} ({len(rows)} rows)")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="hgmimo", description="Near-field LOS MIMO over Hermite-Gaussian modes")
    parser.add_argument("--version", action="version", version=f"hgmimo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_flags(p, tilt=True):
        p.add_argument("--config", help="YAML scenario file")
        p.add_argument("--preset", choices=["table1"], help="built-in scenario (default when no --config)")
        p.add_argument("--out", help="output directory (overrides output_dir)")
        if tilt:
            p.add_argument("--tilt", help="TX tilt theta_x,theta_y in degrees")
        p.add_argument("--backend", choices=["numba", "numpy"], help="channel kernel backend")

    p = sub.add_parser("simulate", help="link report for one tilt")
    scenario_flags(p)
    p.add_argument("--scheme", choices=[*SCHEMES, "both"])
    p.add_argument("--pol", choices=sorted(POLARIZATIONS))
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("steer-sweep", help="total SE across TX tilts")
    scenario_flags(p, tilt=False)
    p.add_argument("--scheme", choices=[*SCHEMES, "both"])
    p.add_argument("--pol", choices=sorted(POLARIZATIONS), help="default: both polarizations")
    p.add_argument("--tilts", nargs="+", metavar="DEG,DEG", help="override the sweep tilt list")
    p.set_defaults(func=cmd_steer_sweep)

    p = sub.add_parser("profile", help="power profile grid on the TX or RX plane")
    scenario_flags(p)
    p.add_argument("--plane", choices=["tx", "rx"], default="tx")
    p.add_argument("--mode", action="append", metavar="L,M", help="restrict to these modes (repeatable)")
    p.add_argument("--units", choices=["w", "m"], help="TX grid axis units")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("optimize", help="optimal waist for a wavelength and distance")
    p.add_argument("wavelength", help="e.g. 1mm")
    p.add_argument("distance", help="e.g. 20m")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("capture-sweep", help="capture efficiency against aperture size")
    scenario_flags(p, tilt=False)
    p.add_argument("--mode", action="append", metavar="L,M", help="modes (default (l,l) for l <= 5)")
    p.add_argument("--s-min", type=float, default=0.25)
    p.add_argument("--s-max", type=float, default=3.0)
    p.add_argument("--s-step", type=float, default=0.05)
    p.set_defaults(func=cmd_capture_sweep)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except HgMimoError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
