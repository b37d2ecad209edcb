"""Scenario configuration: YAML files, defaults and the reference preset.

Every default reproduces the 300 GHz point-to-point scenario, so an empty
config file (or ``--preset table1``) runs the reference link. Angles are in
degrees here and converted to radians when geometry objects are built.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .beam import BeamParams, optimize_waist
from .channel import ISOTROPIC, SECTORIZED, ElementPattern
from .errors import ConfigError, HgMimoError
from .geometry import ArrayGeometry, Tilt
from .txrx import CROSS, HG_DIRECT, SVD, UNIDIRECTIONAL, ModeSet

SPEED_OF_LIGHT = 299_792_458.0

SCHEMES = {"hg": HG_DIRECT, "svd": SVD}
POLARIZATIONS = {"uni": UNIDIRECTIONAL, "cross": CROSS}

STEERING_PRESET = ((0.0, 0.0), (15.0, 0.0), (30.0, 0.0), (30.0, 30.0), (45.0, 0.0))


@dataclass
class ArraySpec:
    nx: int = 35
    ny: int = 35
    spacing_m: float = 0.005


@dataclass
class ModeSpec:
    l_max: int = 5
    m_max: int = 5
    explicit: list | None = None


@dataclass
class PatternSpec:
    kind: str = SECTORIZED
    max_gain_dbi: float = 8.0
    hpbw_v_deg: float = 65.0
    hpbw_h_deg: float = 65.0
    side_lobe_db: float = 30.0
    front_to_back_db: float = 30.0


@dataclass
class NoiseSpec:
    noise_figure_db: float = 8.0
    thermal_floor_dbm_hz: float = -174.0


@dataclass
class GridSpec:
    half_extent: float = 3.0
    points: int = 241
    units: str = "w"


@dataclass
class ScenarioConfig:
    carrier_frequency_hz: float = 300e9
    bandwidth_hz: float = 2000e6
    tx_power_dbm: float = -6.0
    distance_m: float = 20.0
    tx_array: ArraySpec = field(default_factory=ArraySpec)
    rx_array: ArraySpec = field(default_factory=ArraySpec)
    modes: ModeSpec = field(default_factory=ModeSpec)
    polarization: str = "uni"
    scheme: str = "both"
    tilt_deg: list = field(default_factory=lambda: [0.0, 0.0])
    element_pattern: PatternSpec = field(default_factory=PatternSpec)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    waist: object = "optimal"
    mcs_table: str | None = None
    output_dir: str = "out"
    sweep_tilts_deg: list = field(default_factory=lambda: [list(t) for t in STEERING_PRESET])
    grid: GridSpec = field(default_factory=GridSpec)

    # ------------------------------------------------------------ derived
    @property
    def wavelength(self):
        return SPEED_OF_LIGHT / self.carrier_frequency_hz

    def beam(self):
        if self.waist == "optimal":
            return optimize_waist(self.wavelength, self.distance_m).beam
        return BeamParams(self.wavelength, float(self.waist))

    def tx_geometry(self):
        a = self.tx_array
        return ArrayGeometry(a.nx, a.ny, a.spacing_m, -0.5 * self.distance_m)

    def rx_geometry(self):
        a = self.rx_array
        return ArrayGeometry(a.nx, a.ny, a.spacing_m, 0.5 * self.distance_m)

    def mode_set(self):
        if self.modes.explicit:
            return ModeSet(tuple(m) for m in self.modes.explicit)
        return ModeSet.rectangular(self.modes.l_max, self.modes.m_max)

    def pattern(self):
        return ElementPattern(**dataclasses.asdict(self.element_pattern))

    def tilt(self):
        return Tilt.from_degrees(*self.tilt_deg)

    def schemes(self):
        return list(SCHEMES.values()) if self.scheme == "both" else [SCHEMES[self.scheme]]

    def polarization_name(self):
        return POLARIZATIONS[self.polarization]

    # ------------------------------------------------------------ checks
    def validate(self):
        positive = {
            "carrier_frequency_hz": self.carrier_frequency_hz,
            "bandwidth_hz": self.bandwidth_hz,
            "distance_m": self.distance_m,
            "tx_array.spacing_m": self.tx_array.spacing_m,
            "rx_array.spacing_m": self.rx_array.spacing_m,
            "grid.half_extent": self.grid.half_extent,
        }
        for name, value in positive.items():
            if not _is_number(value) or not (math.isfinite(value) and value > 0):
                raise ConfigError(name, f"must be a positive number, got {value!r}")
        if not _is_number(self.tx_power_dbm) or math.isnan(self.tx_power_dbm):
            raise ConfigError("tx_power_dbm", f"must be a number, got {self.tx_power_dbm!r}")
        for side in ("tx_array", "rx_array"):
            spec = getattr(self, side)
            for axis in ("nx", "ny"):
                v = getattr(spec, axis)
                if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                    raise ConfigError(f"{side}.{axis}", f"must be a non-negative integer, got {v!r}")
        if self.polarization not in POLARIZATIONS:
            raise ConfigError("polarization", f"must be one of {sorted(POLARIZATIONS)}, got {self.polarization!r}")
        if self.scheme not in (*SCHEMES, "both"):
            raise ConfigError("scheme", f"must be hg, svd or both, got {self.scheme!r}")
        if self.element_pattern.kind not in (ISOTROPIC, SECTORIZED):
            raise ConfigError("element_pattern.kind", f"must be {ISOTROPIC} or {SECTORIZED}")
        if self.waist != "optimal" and (not _is_number(self.waist) or not self.waist > 0):
            raise ConfigError("waist", f"must be 'optimal' or a positive length in metres, got {self.waist!r}")
        if self.grid.units not in ("w", "m"):
            raise ConfigError("grid.units", "must be 'w' or 'm'")
        if not isinstance(self.grid.points, int) or self.grid.points < 2:
            raise ConfigError("grid.points", "must be an integer >= 2")
        _check_tilt("tilt_deg", self.tilt_deg)
        for i, t in enumerate(self.sweep_tilts_deg):
            _check_tilt(f"sweep_tilts_deg[{i}]", t)
        try:
            self.mode_set()
        except (HgMimoError, TypeError) as exc:
            raise ConfigError("modes", str(exc)) from None
        try:
            self.pattern()
        except HgMimoError as exc:
            raise ConfigError("element_pattern", str(exc)) from None
        return self

    def to_dict(self):
        return dataclasses.asdict(self)


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _check_tilt(name, t):
    if not isinstance(t, (list, tuple)) or len(t) != 2 or not all(_is_number(a) for a in t):
        raise ConfigError(name, f"must be a pair of angles in degrees, got {t!r}")


def _build(cls, data, prefix=""):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(prefix.rstrip(".") or "<root>", "expected a mapping")
    known = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(prefix + str(key), "unknown field")
        sub = _NESTED.get((cls, key))
        kwargs[key] = _build(sub, value, f"{prefix}{key}.") if sub else value
    obj = cls(**kwargs)
    # YAML reads 3e11 as a string; coerce numeric-looking strings once here
    for f in dataclasses.fields(obj):
        v = getattr(obj, f.name)
        if isinstance(v, str) and f.type in ("float", "int"):
            try:
                setattr(obj, f.name, float(v))
            except ValueError:
                raise ConfigError(prefix + f.name, f"not a number: {v!r}") from None
    return obj


_NESTED = {
    (ScenarioConfig, "tx_array"): ArraySpec,
    (ScenarioConfig, "rx_array"): ArraySpec,
    (ScenarioConfig, "modes"): ModeSpec,
    (ScenarioConfig, "element_pattern"): PatternSpec,
    (ScenarioConfig, "noise"): NoiseSpec,
    (ScenarioConfig, "grid"): GridSpec,
}


def from_dict(data):
    return _build(ScenarioConfig, data).validate()


def load_config(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("--config", f"invalid YAML: {exc}") from None
    return from_dict(data)


def dump_config(cfg, path):
    Path(path).write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=False))


def preset(name):
    if name != "table1":
        raise ConfigError("--preset", f"unknown preset {name!r}")
    return ScenarioConfig().validate()
