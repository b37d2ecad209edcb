"""Mode filters, the SVD-based and HG-direct schemes, and LMMSE reception."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .beam import ModeIndex, hg_fields
from .channel import EffectiveChannel
from .errors import DimensionError, DomainError
from .geometry import Tilt, steered_sample_points

HG_DIRECT = "hg-direct"
SVD = "svd"
UNIDIRECTIONAL = "unidirectional"
CROSS = "cross"


class ModeSet(tuple):
    """Ordered, duplicate-free tuple of ModeIndex; the order indexes every mode matrix."""

    def __new__(cls, modes):
        modes = tuple(ModeIndex(*m).validate() for m in modes)
        if not modes:
            raise DomainError("mode set is empty")
        if len(set(modes)) != len(modes):
            raise DomainError("mode set contains duplicates")
        return super().__new__(cls, modes)

    @classmethod
    def rectangular(cls, l_max, m_max):
        """All (l, m) with l <= l_max, m <= m_max, ascending in l then m."""
        return cls(ModeIndex(l, m) for l in range(l_max + 1) for m in range(m_max + 1))

    def canonical(self):
        return ModeSet(sorted(self))


@dataclass(frozen=True)
class FilterMatrix:
    """Per-element coefficients; ``conjugated`` marks stored RX weights HG*."""

    matrix: np.ndarray
    modes: ModeSet
    normalized: bool = True
    conjugated: bool = False

    @property
    def field(self):
        """The sampled HG values themselves, whatever the stored convention."""
        return self.matrix.conj() if self.conjugated else self.matrix


def mode_filters(beam, array, modes, tilt=Tilt(), conjugated=False, normalize=True, pivot="center"):
    """Per-element HG coefficients, one column per mode.

    Columns sample the mode field at :func:`steered_sample_points` and are
    scaled to unit Euclidean norm. With ``conjugated=True`` the stored
    coefficients are HG*, the weights an RX array applies before summing.
    """
    modes = ModeSet(modes)
    pts = steered_sample_points(array, tilt, pivot=pivot)
    w = hg_fields(beam, modes, pts[:, 0], pts[:, 1], pts[:, 2])
    if normalize:
        norms = np.linalg.norm(w, axis=0)
        if np.any(norms == 0.0):
            bad = [tuple(m) for m, n in zip(modes, norms) if n == 0.0]
            raise DomainError(f"modes {bad} have no energy on the array")
        w = w / norms
    if conjugated:
        w = w.conj()
    return FilterMatrix(w, modes, normalize, conjugated)


def project(filters, received):
    """Apply RX filters: u = W^H r, for r of shape (elements,) or (elements, samples)."""
    return filters_field(filters).conj().T @ received


def tx_signals(filters, symbols, per_stream_power):
    """Per-element signal W diag(sqrt(p)) s; ``symbols`` may carry a trailing sample axis."""
    w = filters_field(filters)
    s = np.asarray(symbols)
    p = np.broadcast_to(np.asarray(per_stream_power, dtype=np.float64), (w.shape[1],))
    if s.shape[0] != w.shape[1]:
        raise DimensionError(f"{s.shape[0]} symbol streams for {w.shape[1]} filter columns")
    scale = np.sqrt(p)
    return w @ (scale[:, None] * s if s.ndim == 2 else scale * s)


def filters_field(filters):
    return np.asarray(getattr(filters, "field", filters))


@dataclass(frozen=True)
class SvdPrecoder:
    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray


def svd_precoder(h):
    """H = U diag(sigma) V^H on the mode-domain channel, sigma descending."""
    mat = np.asarray(getattr(h, "matrix", h))
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    return SvdPrecoder(u, s, vh.conj().T)


@dataclass(frozen=True)
class SchemeConfig:
    scheme: str = HG_DIRECT
    polarization: str = UNIDIRECTIONAL
    tx_power_dbm: float = -6.0

    def __post_init__(self):
        if self.scheme not in (HG_DIRECT, SVD):
            raise DomainError(f"unknown scheme {self.scheme!r}")
        if self.polarization not in (UNIDIRECTIONAL, CROSS):
            raise DomainError(f"unknown polarization {self.polarization!r}")
        if math.isnan(self.tx_power_dbm) or self.tx_power_dbm == math.inf:
            raise DomainError("TX power must be finite")

    @property
    def tx_power_w(self):
        return 1e-3 * 10.0 ** (self.tx_power_dbm / 10.0)

    def per_stream_power(self, n_streams):
        """Equal split of the total TX power over all streams (both polarizations)."""
        return self.tx_power_w / n_streams


@dataclass(frozen=True)
class StreamEstimate:
    sinr: np.ndarray

    @property
    def sinr_db(self):
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(self.sinr)

    @property
    def order(self):
        """Indices that sort streams by descending SINR."""
        return np.argsort(-self.sinr, kind="stable")

    @property
    def sorted_db(self):
        return self.sinr_db[self.order]


def lmmse_sinr(h, power, noise_power):
    """Unbiased post-LMMSE SINR for u = H diag(sqrt(p)) s + n, white n.

    SINR_k = 1 / [(I + H_p^H H_p / noise)^-1]_kk - 1 with H_p = H diag(sqrt(p)).
    """
    h = np.asarray(h, dtype=np.complex128)
    if noise_power <= 0:
        raise DomainError("noise power must be positive")
    p = np.broadcast_to(np.asarray(power, dtype=np.float64), (h.shape[1],))
    hp = h * np.sqrt(p)[None, :]
    a = np.eye(h.shape[1]) + (hp.conj().T @ hp) / noise_power
    mse = np.real(np.diag(np.linalg.inv(a)))
    return np.maximum(1.0 / mse - 1.0, 0.0)


def lmmse_equalizer(h, power, noise_power):
    """Linear MMSE filter F with s_hat = F u, matching :func:`lmmse_sinr`."""
    h = np.asarray(h, dtype=np.complex128)
    p = np.broadcast_to(np.asarray(power, dtype=np.float64), (h.shape[1],))
    hp = h * np.sqrt(p)[None, :]
    a = hp.conj().T @ hp + noise_power * np.eye(h.shape[1])
    return np.linalg.solve(a, hp.conj().T)


def stream_sinrs(h, scheme, noise_power, per_stream_power=None):
    """Per-stream SINR for either scheme, in the channel's column order.

    HG-direct sends one stream per mode column and equalizes with LMMSE.
    SVD precodes with V and receives with U^H; the LMMSE step then runs on
    U^H H V so any residual coupling is still accounted for. Streams of the
    SVD scheme are indexed by singular value (descending).
    """
    mat = np.asarray(getattr(h, "matrix", h))
    if isinstance(scheme, str):
        scheme = SchemeConfig(scheme=scheme)
    n = mat.shape[1]
    p = scheme.per_stream_power(n) if per_stream_power is None else per_stream_power
    if scheme.scheme == HG_DIRECT:
        if mat.shape[0] != mat.shape[1]:
            raise DimensionError("HG-direct scheme needs a square effective channel")
        return StreamEstimate(lmmse_sinr(mat, p, noise_power))
    pre = svd_precoder(mat)
    return StreamEstimate(lmmse_sinr(pre.u.conj().T @ mat @ pre.v, p, noise_power))


def matched_filter_sinr(h, power, noise_power):
    """SINR of the per-stream matched filter h_k^H u (no interference cancellation)."""
    h = np.asarray(h, dtype=np.complex128)
    p = np.broadcast_to(np.asarray(power, dtype=np.float64), (h.shape[1],))
    g = h.conj().T @ h
    sig = p * np.abs(np.diag(g)) ** 2
    interf = (np.abs(g) ** 2 * p[None, :]).sum(axis=1) - sig
    return sig / (interf + noise_power * np.real(np.diag(g)))


def cross_polarization_expand(h):
    """Block-diagonal diag(H, H) for ideal cross-polar isolation."""
    mat = np.asarray(h.matrix)
    big = np.kron(np.eye(2), mat)
    rx_labels = tuple(pol for pol in ("+", "-") for _ in h.rx_modes)
    tx_labels = tuple(pol for pol in ("+", "-") for _ in h.tx_modes)
    return EffectiveChannel(big, tuple(h.rx_modes) * 2, tuple(h.tx_modes) * 2, rx_labels, tx_labels)
