"""Free-space element-to-element channel and its reduction to the mode domain.

Channel entries are voltage gains with the same exp(-ikr) phase convention
as the beam fields: between isotropic elements a distance r apart,
``g = lambda / (4 pi r) * exp(-2j pi r / lambda)``, so received power is
``|g|^2`` times transmitted power.

The streamed product ``G @ W_tx`` sums over TX elements in index order for
each RX row, so H^mod does not depend on how rows are partitioned; the numpy
and numba backends agree to about 1e-12 of the largest entry (phase round-off at kr ~ 1e5).
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .beam import ModeIndex
from .errors import DimensionError, DomainError
from .geometry import Tilt, array_frame, element_positions, steered_sample_points

ISOTROPIC = "isotropic"
SECTORIZED = "sectorized-38.901"


@dataclass(frozen=True)
class ElementPattern:
    """Element power pattern; the sectorized kind follows TR 38.901 Table 7.3-1."""

    kind: str = ISOTROPIC
    max_gain_dbi: float = 8.0
    hpbw_v_deg: float = 65.0
    hpbw_h_deg: float = 65.0
    side_lobe_db: float = 30.0
    front_to_back_db: float = 30.0

    def __post_init__(self):
        if self.kind not in (ISOTROPIC, SECTORIZED):
            raise DomainError(f"unknown element pattern kind {self.kind!r}")
        vals = (self.max_gain_dbi, self.hpbw_v_deg, self.hpbw_h_deg, self.side_lobe_db, self.front_to_back_db)
        if not all(math.isfinite(v) for v in vals) or self.hpbw_v_deg <= 0 or self.hpbw_h_deg <= 0:
            raise DomainError("element pattern parameters must be finite with positive beamwidths")

    @classmethod
    def sectorized(cls, **kw):
        return cls(kind=SECTORIZED, **kw)

    def as_vector(self):
        return np.array([0.0 if self.kind == ISOTROPIC else 1.0, self.max_gain_dbi, self.hpbw_v_deg,
                         self.hpbw_h_deg, self.side_lobe_db, self.front_to_back_db])

    def gain(self, direction, frame=None):
        """Linear power gain toward unit vector(s) ``direction`` in the given frame."""
        if frame is None:
            frame = array_frame()
        d = np.asarray(direction, dtype=np.float64)
        d = d / np.linalg.norm(d, axis=-1, keepdims=True)
        return _kernels.pattern_gain_numpy(d, np.asarray(frame, dtype=np.float64), self.as_vector())


@dataclass(frozen=True)
class ArraySide:
    """Element positions and orientation of one end of the link, in the beam frame."""

    positions: np.ndarray
    frame: np.ndarray
    pattern: ElementPattern = ElementPattern()

    @property
    def size(self):
        return self.positions.shape[0]


@dataclass(frozen=True)
class Link:
    """Everything needed to evaluate G^p entries on demand."""

    tx: ArraySide
    rx: ArraySide
    wavelength: float

    @property
    def wavenumber(self):
        return 2.0 * math.pi / self.wavelength

    def _args(self):
        return (self.rx.positions, self.tx.positions, self.wavenumber, self.tx.frame, self.rx.frame,
                self.tx.pattern.as_vector(), self.rx.pattern.as_vector())

    def apply(self, w_tx, backend=None):
        """``G @ w_tx`` for a (n_tx, k) matrix, streamed over RX rows."""
        w_tx = np.asarray(w_tx)
        if w_tx.ndim == 1:
            return self.apply(w_tx[:, None], backend)[:, 0]
        if w_tx.shape[0] != self.tx.size:
            raise DimensionError(f"TX filter has {w_tx.shape[0]} rows, link has {self.tx.size} TX elements")
        return _kernels.channel_apply(*self._args(), w_tx, backend=backend)

    def block(self, rx_rows=None):
        rx_pos = self.rx.positions if rx_rows is None else self.rx.positions[rx_rows]
        args = list(self._args())
        args[0] = rx_pos
        return _kernels.channel_block(*args)


@dataclass(frozen=True)
class PhysicalChannel:
    matrix: np.ndarray
    wavelength: float
    tx_positions: np.ndarray
    rx_positions: np.ndarray


@dataclass(frozen=True)
class EffectiveChannel:
    """H^mod with RX modes on rows and TX modes on columns."""

    matrix: np.ndarray
    rx_modes: tuple
    tx_modes: tuple
    rx_labels: tuple = field(default=())
    tx_labels: tuple = field(default=())

    def __post_init__(self):
        if self.matrix.shape != (len(self.rx_modes), len(self.tx_modes)):
            raise DimensionError(f"H^mod shape {self.matrix.shape} does not match mode lists "
                                 f"({len(self.rx_modes)}, {len(self.tx_modes)})")
        if not np.all(np.isfinite(self.matrix)):
            raise DomainError("effective channel has non-finite entries")

    @property
    def shape(self):
        return self.matrix.shape

    def diagonal_dominance_db(self):
        """Per-row ratio of the diagonal power to the summed off-diagonal power."""
        p = np.abs(self.matrix) ** 2
        diag = np.diag(p).copy()
        off = p.sum(axis=1) - diag
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(diag / off)


def element_channel(p_tx, p_rx, wavelength, tx_pattern=ElementPattern(), rx_pattern=ElementPattern(),
                    tx_boresight=(0.0, 0.0, 1.0), rx_boresight=(0.0, 0.0, -1.0)):
    """Friis voltage gain between two elements, with pattern gains at departure/arrival angles."""
    p_tx = np.asarray(p_tx, dtype=np.float64)
    p_rx = np.asarray(p_rx, dtype=np.float64)
    if np.linalg.norm(p_rx - p_tx) == 0.0:
        raise DomainError("TX and RX elements coincide")
    return complex(_kernels.channel_block_numpy(
        p_rx[None, :], p_tx[None, :], 2.0 * math.pi / wavelength,
        _frame_from_boresight(tx_boresight), _frame_from_boresight(rx_boresight),
        tx_pattern.as_vector(), rx_pattern.as_vector())[0, 0])


def _frame_from_boresight(boresight):
    n = np.asarray(boresight, dtype=np.float64)
    n = n / np.linalg.norm(n)
    ref = np.array([0.0, 1.0, 0.0]) if abs(n[1]) < 0.9 else np.array([1.0, 0.0, 0.0])
    v = ref - n * (ref @ n)
    v /= np.linalg.norm(v)
    u = np.cross(v, n)
    return np.vstack([u, v, n])


def boresight_link(beam_wavelength, tx_array, rx_array, tx_tilt=Tilt(), pattern=ElementPattern()):
    """Link with the TX array on plane z_T (tilted about its centre) and the RX facing back along -Z."""
    tx = ArraySide(steered_sample_points(tx_array, tx_tilt), array_frame(tx_tilt, +1), pattern)
    rx = ArraySide(element_positions(rx_array), array_frame(Tilt(), -1), pattern)
    return Link(tx, rx, beam_wavelength)


def physical_channel(link):
    """Materialize G^p, shape (n_rx, n_tx). Prefer :meth:`Link.apply` for large arrays."""
    return PhysicalChannel(link.block(), link.wavelength, link.tx.positions, link.rx.positions)


def effective_channel(channel, w_tx, w_rx, tx_modes=None, rx_modes=None, backend=None):
    """H^mod = W_rx^H G W_tx for a materialized channel or a streamed :class:`Link`.

    ``w_tx``/``w_rx`` are FilterMatrix objects or plain (elements, modes) arrays.
    """
    tx_modes = tuple(tx_modes if tx_modes is not None else getattr(w_tx, "modes", range(np.shape(_mat(w_tx))[1])))
    rx_modes = tuple(rx_modes if rx_modes is not None else getattr(w_rx, "modes", range(np.shape(_mat(w_rx))[1])))
    a_tx, a_rx = _mat(w_tx), _mat(w_rx)
    if isinstance(channel, Link):
        if a_rx.shape[0] != channel.rx.size:
            raise DimensionError("RX filter rows do not match RX element count")
        gw = channel.apply(a_tx, backend=backend)
    else:
        g = channel.matrix if isinstance(channel, PhysicalChannel) else np.asarray(channel)
        if g.shape != (a_rx.shape[0], a_tx.shape[0]):
            raise DimensionError(f"channel shape {g.shape} incompatible with filters "
                                 f"({a_rx.shape[0]}, {a_tx.shape[0]})")
        gw = g @ a_tx
    return EffectiveChannel(a_rx.conj().T @ gw, rx_modes, tx_modes)


def _mat(w):
    return np.asarray(getattr(w, "field", w))


# ----------------------------------------------------------- binary H^mod dump
# little-endian: magic "HMOD", u32 version, u32 rows, u32 cols,
# rows x (u32 l, u32 m), cols x (u32 l, u32 m), then rows*cols (f64 re, f64 im) row-major
_MAGIC = b"HMOD"


def write_hmod(path, h):
    rows, cols = h.matrix.shape
    with open(path, "wb") as f:
        f.write(_MAGIC + struct.pack("<III", 1, rows, cols))
        for mode in tuple(h.rx_modes) + tuple(h.tx_modes):
            l, m = ModeIndex(*mode)
            f.write(struct.pack("<II", l, m))
        f.write(np.ascontiguousarray(h.matrix, dtype="<c16").tobytes())


def read_hmod(path):
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != _MAGIC:
        raise DomainError(f"{path}: not an H^mod dump")
    version, rows, cols = struct.unpack_from("<III", data, 4)
    if version != 1:
        raise DomainError(f"{path}: unsupported dump version {version}")
    off = 16
    modes = [ModeIndex(*struct.unpack_from("<II", data, off + 8 * i)) for i in range(rows + cols)]
    off += 8 * (rows + cols)
    mat = np.frombuffer(data, dtype="<c16", count=rows * cols, offset=off).reshape(rows, cols).copy()
    return EffectiveChannel(mat, tuple(modes[:rows]), tuple(modes[rows:]))
