"""Hermite-Gaussian beam fields, waist optimization and aperture capture."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .hermite import MAX_ORDER, hermite_eval, hermite_table

MAX_TOTAL_ORDER = 128


class ModeIndex(NamedTuple):
    """HG mode (l, m): l is the X-direction order, m the Y-direction order."""

    l: int
    m: int

    def validate(self):
        if self.l < 0 or self.m < 0:
            raise DomainError(f"mode orders must be non-negative, got {tuple(self)}")
        if self.l > MAX_ORDER or self.m > MAX_ORDER or self.l + self.m > MAX_TOTAL_ORDER:
            raise DomainError(f"mode {tuple(self)} exceeds the supported order")
        return self

    @property
    def order(self):
        return self.l + self.m


@dataclass(frozen=True)
class BeamParams:
    wavelength: float
    waist: float
    refraction_index: float = 1.0

    def __post_init__(self):
        for name in ("wavelength", "waist", "refraction_index"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive and finite, got {v!r}")

    @property
    def rayleigh_distance(self):
        return math.pi * self.waist ** 2 * self.refraction_index / self.wavelength

    @property
    def wavenumber(self):
        return 2.0 * math.pi / self.wavelength


@dataclass(frozen=True)
class WaistSolution:
    beam: BeamParams
    edge_radius: float
    edge_distance: float

    @property
    def rayleigh_distance(self):
        return self.beam.rayleigh_distance


def beam_radius(beam, z):
    z = np.asarray(z, dtype=np.float64)
    return beam.waist * np.sqrt(1.0 + (z / beam.rayleigh_distance) ** 2)


def curvature(beam, z):
    """Wavefront curvature 1/R(z); zero on the focal plane."""
    z = np.asarray(z, dtype=np.float64)
    return z / (z ** 2 + beam.rayleigh_distance ** 2)


def gouy_phase(beam, mode, z):
    l, m = ModeIndex(*mode).validate()
    z = np.asarray(z, dtype=np.float64)
    return (1 + l + m) * np.arctan(z / beam.rayleigh_distance)


def _norm_const(l, m):
    return math.sqrt(1.0 / (2.0 ** (l + m - 1) * math.pi * math.factorial(l) * math.factorial(m)))


def hg_fields(beam, modes, x, y, z):
    """Complex HG fields for several modes at the same sample points.

    ``x``, ``y``, ``z`` broadcast against each other; the result has one
    extra trailing axis indexing ``modes`` in the order given.
    """
    modes = [ModeIndex(*md).validate() for md in modes]
    x, y, z = np.broadcast_arrays(*(np.asarray(v, dtype=np.float64) for v in (x, y, z)))
    w = beam_radius(beam, z)
    k = beam.wavenumber
    r2 = x ** 2 + y ** 2
    # envelope and every mode-independent phase factor
    common = np.exp(-r2 / w ** 2) * np.exp(-1j * (k * r2 * curvature(beam, z) / 2.0 + k * z)) / w
    atan = np.arctan(z / beam.rayleigh_distance)
    hx = hermite_table(max(md.l for md in modes), math.sqrt(2.0) * x / w)
    hy = hermite_table(max(md.m for md in modes), math.sqrt(2.0) * y / w)
    out = np.empty(x.shape + (len(modes),), dtype=np.complex128)
    for c, (l, m) in enumerate(modes):
        out[..., c] = (_norm_const(l, m) * hx[l] * hy[m]) * common * np.exp(1j * (1 + l + m) * atan)
    return out


def hg_field(beam, mode, x, y, z):
    """HG_{l,m}(x, y, z) with exp(-ikz) propagation and exp(+i psi) Gouy phase."""
    out = hg_fields(beam, [mode], x, y, z)[..., 0]
    return complex(out) if out.ndim == 0 else out


def optimize_waist(wavelength, distance, refraction_index=1.0):
    """Waist that minimizes the beam radius on symmetric TX/RX planes at +-distance/2.

    Returns the focal-plane beam together with the resulting edge radius;
    the Rayleigh distance of the optimum equals distance / 2.
    """
    if not (wavelength > 0 and distance > 0):
        raise DomainError("wavelength and distance must be positive")
    z_edge = 0.5 * distance
    w0 = math.sqrt(wavelength * z_edge / (math.pi * refraction_index))
    beam = BeamParams(wavelength, w0, refraction_index)
    return WaistSolution(beam=beam, edge_radius=math.sqrt(2.0) * w0, edge_distance=z_edge)


def _legendre_nodes(count):
    return np.polynomial.legendre.leggauss(count)


def capture_1d(order, half_size_over_w):
    """Fraction of a 1D HG factor's power within |x| <= s, as a function of s/w.

    With t = sqrt(2) x / w the integrand becomes H_n(t)^2 exp(-t^2) / (sqrt(pi) 2^n n!),
    integrated on [-a, a], a = sqrt(2) s / w, by Gauss-Legendre.
    """
    if half_size_over_w <= 0:
        raise DomainError("aperture half-size must be positive")
    # beyond the last zero plus 6 the remaining tail is below 1e-15
    a = min(math.sqrt(2.0) * half_size_over_w, math.sqrt(2 * order + 1) + 6.0)
    nodes, weights = _legendre_nodes(int(math.ceil(20 + 6 * order + 4 * a)))
    t = a * nodes
    h = hermite_eval(order, t)
    val = a * np.sum(weights * h * h * np.exp(-t * t))
    return float(min(1.0, val / (math.sqrt(math.pi) * 2.0 ** order * math.factorial(order))))


def capture_efficiency(beam, mode, z, half_size):
    """Power fraction of HG_{l,m} at distance z inside the square |x|, |y| <= half_size."""
    l, m = ModeIndex(*mode).validate()
    if half_size <= 0:
        raise DomainError("aperture half-size must be positive")
    ratio = half_size / float(beam_radius(beam, z))
    return capture_1d(l, ratio) * capture_1d(m, ratio)
