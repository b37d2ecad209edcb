"""Noise, SINR-to-SE mapping, link reports, power profiles and capture sweeps.

Spectral efficiency is a per-stream table lookup (highest MCS row whose
threshold does not exceed the SINR), summed over streams. The Shannon value
log2(1 + SINR) is carried alongside strictly as a debug column.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .beam import ModeIndex, beam_radius, capture_efficiency, hg_fields
from .channel import boresight_link, effective_channel
from .errors import DomainError
from .geometry import ArrayGeometry, Tilt, rotate
from .txrx import CROSS, HG_DIRECT, SVD, SchemeConfig, cross_polarization_expand, mode_filters, \
    stream_sinrs, svd_precoder


@dataclass(frozen=True)
class NoiseConfig:
    bandwidth_hz: float
    noise_figure_db: float = 0.0
    thermal_floor_dbm_hz: float = -174.0

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise DomainError("bandwidth must be positive")
        if self.noise_figure_db < 0:
            raise DomainError("noise figure must be non-negative")


def noise_power_dbm(cfg):
    return cfg.thermal_floor_dbm_hz + 10.0 * math.log10(cfg.bandwidth_hz) + cfg.noise_figure_db


def dbm_to_watts(dbm):
    return 1e-3 * 10.0 ** (dbm / 10.0)


# -------------------------------------------------------------- MCS mapping

@dataclass(frozen=True)
class McsTable:
    thresholds_db: tuple
    efficiencies: tuple
    labels: tuple = ()

    #: highest 64-QAM entry of the CQI table
    SE_CAP = 5.5547

    def __post_init__(self):
        t = np.asarray(self.thresholds_db, dtype=float)
        e = np.asarray(self.efficiencies, dtype=float)
        if t.size == 0 or t.size != e.size:
            raise DomainError("MCS table needs matching, non-empty threshold and efficiency lists")
        if np.any(np.diff(t) <= 0):
            raise DomainError("MCS thresholds must be strictly increasing")
        if np.any(np.diff(e) < 0):
            raise DomainError("MCS efficiencies must be non-decreasing")
        if e.max() > self.SE_CAP + 1e-12:
            raise DomainError(f"MCS table exceeds the 64-QAM efficiency cap {self.SE_CAP}")

    @classmethod
    def from_csv(cls, text):
        rows = list(csv.DictReader(line for line in io.StringIO(text) if not line.startswith("#")))
        return cls(tuple(float(r["sinr_threshold_db"]) for r in rows),
                   tuple(float(r["efficiency"]) for r in rows),
                   tuple(f"CQI{r['cqi']} {r['modulation']}" for r in rows))


def load_mcs_table(path=None):
    """The packaged CQI table, or a CSV with ``sinr_threshold_db`` and ``efficiency`` columns."""
    if path is None:
        text = resources.files("hgmimo").joinpath("data/cqi_table1.csv").read_text()
    else:
        with open(path) as f:
            text = f.read()
    return McsTable.from_csv(text)


def se_from_sinr(sinr_db, table=None):
    """Table spectral efficiency for SINR values in dB (inclusive thresholds)."""
    table = table or load_mcs_table()
    t = np.asarray(table.thresholds_db)
    e = np.asarray(table.efficiencies)
    s = np.asarray(sinr_db, dtype=float)
    idx = np.searchsorted(t, s, side="right") - 1
    out = np.where(idx >= 0, e[np.clip(idx, 0, None)], 0.0)
    return float(out) if out.ndim == 0 else out


# -------------------------------------------------------------- link reports

@dataclass(frozen=True)
class StreamRow:
    stream: int
    l: int
    m: int
    polarization: str
    sinr_db: float
    se: float
    shannon_se_debug: float


@dataclass(frozen=True)
class LinkReport:
    scheme: str
    polarization: str
    streams: tuple
    total_se: float
    throughput_bps: float
    bandwidth_hz: float

    @property
    def sinr_db(self):
        return np.array([s.sinr_db for s in self.streams])

    @property
    def per_stream_se(self):
        return np.array([s.se for s in self.streams])


def scenario_channel(cfg, tilt=None, backend=None):
    """Unidirectional H^mod for a scenario, with the TX steered by ``tilt`` (config tilt by default)."""
    tilt = cfg.tilt() if tilt is None else tilt
    beam = cfg.beam()
    modes = cfg.mode_set()
    tx_geo, rx_geo = cfg.tx_geometry(), cfg.rx_geometry()
    w_tx = mode_filters(beam, tx_geo, modes, tilt)
    w_rx = mode_filters(beam, rx_geo, modes, Tilt(), conjugated=True)
    link = boresight_link(beam.wavelength, tx_geo, rx_geo, tilt, cfg.pattern())
    return effective_channel(link, w_tx, w_rx, backend=backend)


def scenario_noise_w(cfg):
    return dbm_to_watts(noise_power_dbm(NoiseConfig(cfg.bandwidth_hz, cfg.noise.noise_figure_db,
                                                    cfg.noise.thermal_floor_dbm_hz)))


def report_from_channel(h, cfg, scheme, polarization, table=None):
    """Per-stream SINR/SE and totals for one scheme and polarization on a unidirectional H^mod."""
    table = table or load_mcs_table(cfg.mcs_table)
    big = cross_polarization_expand(h) if polarization == CROSS else h
    sc = SchemeConfig(scheme, polarization, cfg.tx_power_dbm)
    est = stream_sinrs(big, sc, scenario_noise_w(cfg))
    sinr_db = est.sinr_db
    se = se_from_sinr(sinr_db, table)
    n = big.shape[1]
    if scheme == HG_DIRECT:
        modes = list(big.tx_modes)
    else:
        # label each SVD stream by the mode dominating its precoding vector
        v = svd_precoder(big).v
        modes = [big.tx_modes[int(np.argmax(np.abs(v[:, k])))] for k in range(n)]
    pols = big.tx_labels if big.tx_labels else ("+",) * n
    rows = tuple(StreamRow(k, int(ModeIndex(*modes[k]).l), int(ModeIndex(*modes[k]).m), pols[k],
                           float(sinr_db[k]), float(se[k]), float(math.log2(1.0 + est.sinr[k])))
                 for k in range(n))
    total = float(math.fsum(r.se for r in rows))
    return LinkReport(scheme, polarization, rows, total, total * cfg.bandwidth_hz, cfg.bandwidth_hz)


def link_report(cfg, scheme=None, polarization=None, h=None, backend=None):
    """Run the whole pipeline for a scenario and return one LinkReport."""
    scheme = scheme or cfg.schemes()[0]
    polarization = polarization or cfg.polarization_name()
    h = scenario_channel(cfg, backend=backend) if h is None else h
    return report_from_channel(h, cfg, scheme, polarization)


# -------------------------------------------------------------- grids

@dataclass(frozen=True)
class FieldGrid:
    """Uniform 2D grid; row r is x = x0 + r dx, column c is y = y0 + c dy."""

    values: np.ndarray
    x0: float
    y0: float
    dx: float
    dy: float
    units: str = "w"

    @property
    def shape(self):
        return self.values.shape

    def axes(self):
        rows, cols = self.values.shape
        return self.x0 + self.dx * np.arange(rows), self.y0 + self.dy * np.arange(cols)


def power_profile(beam, modes, powers, plane_z, tilt=Tilt(), half_extent=3.0, points=241, units="w"):
    """Sum of p |HG|^2 over ``modes`` on a square grid in the (possibly tilted) array plane.

    Grid coordinates are array-local; with a tilt the plane is turned about
    its centre like a steered array, so the sampled profile appears stretched.
    ``half_extent`` is in units of w(plane_z) when ``units == "w"``.
    """
    powers = np.broadcast_to(np.asarray(powers, dtype=float), (len(modes),))
    w = float(beam_radius(beam, plane_z))
    scale = w if units == "w" else 1.0
    axis = np.linspace(-half_extent, half_extent, points)
    xx, yy = np.meshgrid(axis * scale, axis * scale, indexing="ij")
    pts = np.stack([xx, yy, np.full_like(xx, plane_z)], axis=-1)
    if not tilt.is_zero:
        pts = rotate(tilt.inverse(), pts, pivot=(0.0, 0.0, plane_z))
    fields = hg_fields(beam, modes, pts[..., 0], pts[..., 1], pts[..., 2])
    values = np.einsum("...k,k->...", np.abs(fields) ** 2, powers)
    step = 2.0 * half_extent / (points - 1)
    return FieldGrid(values, float(axis[0]), float(axis[0]), step, step, units)


def grid_cell_area(grid, beam, plane_z):
    scale = float(beam_radius(beam, plane_z)) if grid.units == "w" else 1.0
    return grid.dx * grid.dy * scale ** 2


def element_grid(values, array, units="m", scale=1.0):
    """Wrap per-element values (canonical order) as a FieldGrid over the array."""
    v = np.asarray(values).reshape(array.shape)
    d = array.spacing / scale
    return FieldGrid(v, -array.nx * d, -array.ny * d, d, d, units)


def received_profile(cfg, modes=None, tilt=None):
    """Per-element received power on the RX array for equal-power modes sent through G^p.

    Returns the FieldGrid (metres) and the complex per-element signal.
    """
    tilt = cfg.tilt() if tilt is None else tilt
    modes = cfg.mode_set() if modes is None else modes
    beam = cfg.beam()
    tx_geo, rx_geo = cfg.tx_geometry(), cfg.rx_geometry()
    w_tx = mode_filters(beam, tx_geo, modes, tilt)
    link = boresight_link(beam.wavelength, tx_geo, rx_geo, tilt, cfg.pattern())
    p = dbm_to_watts(cfg.tx_power_dbm) / len(modes)
    received = link.apply(w_tx.matrix) * math.sqrt(p)
    power = np.sum(np.abs(received) ** 2, axis=1)
    return element_grid(power, rx_geo), received


GRID_MAGIC = "# hgmimo-grid v1"


def write_grid(path, grid):
    """Plain-text grid: header lines then one row of values per line (%.17g)."""
    rows, cols = grid.values.shape
    with open(path, "w") as f:
        f.write(f"{GRID_MAGIC}\nrows {rows}\ncols {cols}\nx0 {grid.x0!r}\ny0 {grid.y0!r}\n"
                f"dx {grid.dx!r}\ndy {grid.dy!r}\nunits {grid.units}\n")
        for row in grid.values:
            f.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def read_grid(path):
    with open(path) as f:
        lines = f.read().splitlines()
    if not lines or lines[0] != GRID_MAGIC:
        raise DomainError(f"{path}: not a grid file")
    head = dict(line.split(" ", 1) for line in lines[1:8])
    rows, cols = int(head["rows"]), int(head["cols"])
    values = np.array([[float(v) for v in line.split()] for line in lines[8:8 + rows]])
    if values.shape != (rows, cols):
        raise DomainError(f"{path}: expected {rows}x{cols} values")
    return FieldGrid(values, float(head["x0"]), float(head["y0"]), float(head["dx"]), float(head["dy"]),
                     head["units"])


# -------------------------------------------------------------- capture sweep

@dataclass(frozen=True)
class CaptureRow:
    l: int
    m: int
    s_over_w: float
    efficiency: float


def capture_sweep(beam, modes, s_over_w, z=0.0):
    w = float(beam_radius(beam, z))
    rows = []
    for mode in modes:
        mode = ModeIndex(*mode)
        for s in s_over_w:
            if not s > 0:
                raise DomainError("aperture sizes must be positive")
            rows.append(CaptureRow(mode.l, mode.m, float(s), capture_efficiency(beam, mode, z, s * w)))
    return rows


# -------------------------------------------------------------- CSV output

def _fmt(v):
    return f"{v:.10g}" if isinstance(v, float) else str(v)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_streams_csv(path, reports):
    header = ["scheme", "stream", "l", "m", "polarization", "sinr_db", "se", "shannon_se_debug"]
    _write_csv(path, header, [(r.scheme, s.stream, s.l, s.m, s.polarization, s.sinr_db, s.se, s.shannon_se_debug)
                              for r in reports for s in r.streams])


def write_capture_csv(path, rows):
    _write_csv(path, ["l", "m", "s_over_w", "efficiency"], [(r.l, r.m, r.s_over_w, r.efficiency) for r in rows])


def write_sweep_csv(path, rows):
    """``rows``: (theta_x_deg, theta_y_deg, LinkReport) triples."""
    _write_csv(path, ["theta_x_deg", "theta_y_deg", "scheme", "polarization", "total_se", "throughput_bps"],
               [(float(tx), float(ty), r.scheme, r.polarization, r.total_se, r.throughput_bps)
                for tx, ty, r in rows])


__all__ = [
    "NoiseConfig", "noise_power_dbm", "McsTable", "load_mcs_table", "se_from_sinr", "LinkReport",
    "StreamRow", "link_report", "report_from_channel", "scenario_channel", "power_profile", "FieldGrid",
    "capture_sweep", "write_grid", "read_grid", "received_profile", "SVD", "ArrayGeometry",
]
