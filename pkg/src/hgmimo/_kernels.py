"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import time from the ``HGMIMO_BACKEND``
environment variable (``numba`` or ``numpy``). When unset, numba is used if it
can be imported. Both implementations are always importable under explicit
names so they can be benchmarked and cross-checked in one process.

Element-pattern parameters are passed to the kernels as a flat float64 vector::

    [kind, max_gain_dbi, hpbw_v_deg, hpbw_h_deg, side_lobe_db, front_to_back_db]

with ``kind`` 0 for isotropic and 1 for the TR 38.901 sectorized element.
Orientation frames are 3x3 arrays whose rows are the element's local
horizontal axis, vertical axis and boresight, in that order.
"""
from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba
    from numba import njit

    HAVE_NUMBA = True
    if "NUMBA_THREADING_LAYER" not in os.environ:
        # skip probing an outdated system TBB, which only emits a warning
        numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

_requested = os.environ.get("HGMIMO_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ImportError(f"HGMIMO_BACKEND must be 'numba' or 'numpy', got {_requested!r}")
BACKEND = "numpy" if _requested == "numpy" or not HAVE_NUMBA else "numba"

# rows of G are computed this many at a time by the numpy path
ROW_BLOCK = 128


# ---------------------------------------------------------------- numpy path

def hermite_table_numpy(nmax, x):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = 2.0 * x
    for n in range(1, nmax):
        out[n + 1] = 2.0 * x * out[n] - 2.0 * n * out[n - 1]
    return out


def pattern_gain_numpy(dirs, frame, pat):
    """Linear power gain for unit direction vectors ``dirs`` (..., 3)."""
    if pat[0] == 0.0:
        return np.ones(dirs.shape[:-1])
    horiz = dirs @ frame[0]
    vert = dirs @ frame[1]
    fwd = dirs @ frame[2]
    elev = np.degrees(np.arcsin(np.clip(vert, -1.0, 1.0)))
    azim = np.degrees(np.arctan2(horiz, fwd))
    att_v = -np.minimum(12.0 * (elev / pat[2]) ** 2, pat[4])
    att_h = -np.minimum(12.0 * (azim / pat[3]) ** 2, pat[5])
    att = -np.minimum(-(att_v + att_h), pat[5])
    return 10.0 ** ((pat[1] + att) / 10.0)


def channel_block_numpy(rx_pos, tx_pos, k, tx_frame, rx_frame, tx_pat, rx_pat):
    """Dense block of the element-to-element Friis channel, shape (n_rx, n_tx)."""
    diff = rx_pos[:, None, :] - tx_pos[None, :, :]
    r = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    if np.any(r == 0.0):
        raise ZeroDivisionError("coincident TX and RX element positions")
    amp = (2.0 * np.pi / k) / (4.0 * np.pi * r)
    if tx_pat[0] != 0.0 or rx_pat[0] != 0.0:
        unit = diff / r[..., None]
        amp = amp * np.sqrt(pattern_gain_numpy(unit, tx_frame, tx_pat)
                            * pattern_gain_numpy(-unit, rx_frame, rx_pat))
    return amp * np.exp(-1j * k * r)


def channel_apply_numpy(rx_pos, tx_pos, k, tx_frame, rx_frame, tx_pat, rx_pat, w_tx):
    """Return ``G @ w_tx`` without materializing G (row blocks of ROW_BLOCK)."""
    out = np.empty((rx_pos.shape[0], w_tx.shape[1]), dtype=np.complex128)
    for start in range(0, rx_pos.shape[0], ROW_BLOCK):
        stop = min(start + ROW_BLOCK, rx_pos.shape[0])
        block = channel_block_numpy(rx_pos[start:stop], tx_pos, k, tx_frame, rx_frame, tx_pat, rx_pat)
        out[start:stop] = block @ w_tx
    return out


# ---------------------------------------------------------------- numba path

if HAVE_NUMBA:

    @njit(cache=True)
    def _hermite_table_nb(nmax, x):
        out = np.empty((nmax + 1, x.size))
        for j in range(x.size):
            xi = x[j]
            h_prev = 1.0
            out[0, j] = 1.0
            if nmax >= 1:
                h = 2.0 * xi
                out[1, j] = h
                for n in range(1, nmax):
                    h_next = 2.0 * xi * h - 2.0 * n * h_prev
                    h_prev = h
                    h = h_next
                    out[n + 1, j] = h
        return out

    @njit(cache=True)
    def _pattern_gain_db_nb(dx, dy, dz, frame, pat):
        if pat[0] == 0.0:
            return 0.0
        horiz = dx * frame[0, 0] + dy * frame[0, 1] + dz * frame[0, 2]
        vert = dx * frame[1, 0] + dy * frame[1, 1] + dz * frame[1, 2]
        fwd = dx * frame[2, 0] + dy * frame[2, 1] + dz * frame[2, 2]
        vert = min(1.0, max(-1.0, vert))
        elev = math.degrees(math.asin(vert))
        azim = math.degrees(math.atan2(horiz, fwd))
        att_v = -min(12.0 * (elev / pat[2]) ** 2, pat[4])
        att_h = -min(12.0 * (azim / pat[3]) ** 2, pat[5])
        att = -min(-(att_v + att_h), pat[5])
        return pat[1] + att

    @njit(cache=True)
    def _pattern_gain_nb(dx, dy, dz, frame, pat):
        return 10.0 ** (_pattern_gain_db_nb(dx, dy, dz, frame, pat) / 10.0)

    @njit(cache=True)
    def _channel_entry_nb(px, py, pz, qx, qy, qz, k, tx_frame, rx_frame, tx_pat, rx_pat):
        # p: rx element, q: tx element
        dx = px - qx
        dy = py - qy
        dz = pz - qz
        r = math.sqrt(dx * dx + dy * dy + dz * dz)
        if r == 0.0:
            # raising inside a parallel loop is unsupported; callers flag the row instead
            return 0.0, 0.0, 0.0
        amp = (2.0 * math.pi / k) / (4.0 * math.pi * r)
        if tx_pat[0] != 0.0 or rx_pat[0] != 0.0:
            ux = dx / r
            uy = dy / r
            uz = dz / r
            # sqrt(g_t g_r) as a single power of ten
            db = _pattern_gain_db_nb(ux, uy, uz, tx_frame, tx_pat) + _pattern_gain_db_nb(-ux, -uy, -uz, rx_frame, rx_pat)
            amp *= 10.0 ** (db / 20.0)
        ph = -k * r
        return amp * math.cos(ph), amp * math.sin(ph), r

    @njit(cache=True, parallel=True)
    def _channel_block_nb(rx_pos, tx_pos, k, tx_frame, rx_frame, tx_pat, rx_pat):
        n_rx = rx_pos.shape[0]
        n_tx = tx_pos.shape[0]
        out = np.empty((n_rx, n_tx), dtype=np.complex128)
        bad = np.zeros(n_rx, dtype=np.bool_)
        # rows are independent and each sums over TX in index order, so threads cannot reorder a reduction
        for j in numba.prange(n_rx):
            for i in range(n_tx):
                re, im, r = _channel_entry_nb(rx_pos[j, 0], rx_pos[j, 1], rx_pos[j, 2],
                                              tx_pos[i, 0], tx_pos[i, 1], tx_pos[i, 2],
                                              k, tx_frame, rx_frame, tx_pat, rx_pat)
                if r == 0.0:
                    bad[j] = True
                out[j, i] = complex(re, im)
        return out, bad

    @njit(cache=True, parallel=True)
    def _channel_apply_nb(rx_pos, tx_pos, k, tx_frame, rx_frame, tx_pat, rx_pat, w_re, w_im):
        n_rx = rx_pos.shape[0]
        n_tx = tx_pos.shape[0]
        n_col = w_re.shape[1]
        out_re = np.zeros((n_rx, n_col))
        out_im = np.zeros((n_rx, n_col))
        bad = np.zeros(n_rx, dtype=np.bool_)
        # rows are independent and each sums over TX in index order, so threads cannot reorder a reduction
        for j in numba.prange(n_rx):
            for i in range(n_tx):
                g_re, g_im, r = _channel_entry_nb(rx_pos[j, 0], rx_pos[j, 1], rx_pos[j, 2],
                                                  tx_pos[i, 0], tx_pos[i, 1], tx_pos[i, 2],
                                                  k, tx_frame, rx_frame, tx_pat, rx_pat)
                if r == 0.0:
                    bad[j] = True
                for c in range(n_col):
                    out_re[j, c] += g_re * w_re[i, c] - g_im * w_im[i, c]
                    out_im[j, c] += g_re * w_im[i, c] + g_im * w_re[i, c]
        return out_re, out_im, bad

    def hermite_table_numba(nmax, x):
        x = np.asarray(x, dtype=np.float64)
        flat = _hermite_table_nb(int(nmax), np.ascontiguousarray(x.ravel()))
        return flat.reshape((nmax + 1,) + x.shape)

    def _raise_if_coincident(bad):
        if bad.any():
            raise ZeroDivisionError("coincident TX and RX element positions")

    def channel_block_numba(rx_pos, tx_pos, k, tx_frame, rx_frame, tx_pat, rx_pat):
        out, bad = _channel_block_nb(rx_pos, tx_pos, float(k), tx_frame, rx_frame, tx_pat, rx_pat)
        _raise_if_coincident(bad)
        return out

    def channel_apply_numba(rx_pos, tx_pos, k, tx_frame, rx_frame, tx_pat, rx_pat, w_tx):
        w_tx = np.asarray(w_tx, dtype=np.complex128)
        re, im, bad = _channel_apply_nb(rx_pos, tx_pos, float(k), tx_frame, rx_frame, tx_pat, rx_pat,
                                   np.ascontiguousarray(w_tx.real), np.ascontiguousarray(w_tx.imag))
        _raise_if_coincident(bad)
        return re + 1j * im

    numba_version = numba.__version__


def _contig(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def hermite_table(nmax, x):
    """All physicist Hermite values H_0..H_nmax at ``x``, stacked on axis 0."""
    if BACKEND == "numba":
        return hermite_table_numba(nmax, x)
    return hermite_table_numpy(nmax, x)


def channel_block(rx_pos, tx_pos, k, tx_frame, rx_frame, tx_pat, rx_pat):
    args = (_contig(rx_pos), _contig(tx_pos), k, _contig(tx_frame), _contig(rx_frame),
            _contig(tx_pat), _contig(rx_pat))
    if BACKEND == "numba":
        return channel_block_numba(*args)
    return channel_block_numpy(*args)


def channel_apply(rx_pos, tx_pos, k, tx_frame, rx_frame, tx_pat, rx_pat, w_tx, backend=None):
    args = (_contig(rx_pos), _contig(tx_pos), k, _contig(tx_frame), _contig(rx_frame),
            _contig(tx_pat), _contig(rx_pat), np.asarray(w_tx, dtype=np.complex128))
    backend = backend or BACKEND
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    if backend == "numba":
        return channel_apply_numba(*args)
    return channel_apply_numpy(*args)
