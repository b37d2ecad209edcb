import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hgmimo.beam import BeamParams
from hgmimo.channel import (ISOTROPIC, ArraySide, EffectiveChannel, ElementPattern, Link, boresight_link,
                            effective_channel, element_channel, physical_channel, read_hmod, write_hmod)
from hgmimo.errors import DimensionError, DomainError
from hgmimo.geometry import ArrayGeometry, Tilt, array_frame, element_positions, rotation_matrix
from hgmimo.txrx import mode_filters

LAM = 1e-3
SECTOR = ElementPattern.sectorized()


def test_one_wavelength_isotropic():
    g = element_channel((0, 0, 0), (0, 0, LAM), LAM)
    assert abs(g) == pytest.approx(1 / (4 * math.pi), rel=1e-12)
    assert g.imag == pytest.approx(0.0, abs=1e-12)


def test_friis_path_loss_20m():
    g = element_channel((0, 0, -10), (0, 0, 10), LAM)
    assert -20 * math.log10(abs(g)) == pytest.approx(108.0, abs=0.01)
    assert -20 * math.log10(abs(g)) == pytest.approx(20 * math.log10(4 * math.pi * 20 / LAM), abs=1e-9)


@given(st.floats(0.01, 100.0))
def test_inverse_distance(r):
    a = element_channel((0, 0, 0), (0, 0, r), LAM)
    b = element_channel((0, 0, 0), (0, 0, 2 * r), LAM)
    assert abs(b) == pytest.approx(abs(a) / 2, rel=1e-12)


def test_phase_advance_along_axis():
    r = 20.0
    for frac in (0.125, 0.25, 0.4):
        a = element_channel((0, 0, 0), (0, 0, r), LAM)
        b = element_channel((0, 0, 0), (0, 0, r + frac * LAM), LAM)
        assert np.angle(b / a) == pytest.approx(-2 * math.pi * frac, abs=1e-9)


def test_coincident_elements():
    with pytest.raises(DomainError):
        element_channel((1, 2, 3), (1, 2, 3), LAM)


def _pattern_oracle_db(theta_deg, phi_deg):
    # TR 38.901 Table 7.3-1, theta measured from zenith, phi from boresight
    a_v = -min(12 * ((theta_deg - 90) / 65) ** 2, 30)
    a_h = -min(12 * (phi_deg / 65) ** 2, 30)
    return 8 - min(-(a_v + a_h), 30)


@pytest.mark.parametrize("theta, phi", [(90, 0), (90, 32.5), (57.5, 0), (90, 120), (70, -40), (120, 60), (90, 180)])
def test_sectorized_gain_matches_table(theta, phi):
    t, p = math.radians(theta), math.radians(phi)
    # local frame: x horizontal, y vertical (zenith), z boresight
    d = np.array([math.sin(t) * math.sin(p), math.cos(t), math.sin(t) * math.cos(p)])
    got = 10 * math.log10(float(SECTOR.gain(d)))
    assert got == pytest.approx(_pattern_oracle_db(theta, phi), abs=1e-9)


def test_sectorized_key_values():
    assert float(SECTOR.gain([0, 0, 1])) == pytest.approx(10 ** 0.8)
    half = [math.sin(math.radians(32.5)), 0, math.cos(math.radians(32.5))]
    assert 10 * math.log10(float(SECTOR.gain(half))) == pytest.approx(5.0)
    assert 10 * math.log10(float(SECTOR.gain([0, 0, -1]))) == pytest.approx(-22.0)


def test_isotropic_gain_is_one(rng):
    d = rng.normal(size=(50, 3))
    np.testing.assert_array_equal(ElementPattern().gain(d), 1.0)
    assert ElementPattern().kind == ISOTROPIC


def test_pattern_validation():
    with pytest.raises(DomainError):
        ElementPattern(kind="dipole")
    with pytest.raises(DomainError):
        ElementPattern.sectorized(hpbw_v_deg=0.0)


def test_boresight_gain_in_element_channel():
    iso = element_channel((0, 0, -10), (0, 0, 10), LAM)
    sec = element_channel((0, 0, -10), (0, 0, 10), LAM, SECTOR, SECTOR)
    assert abs(sec) / abs(iso) == pytest.approx(10 ** 0.8, rel=1e-12)


def test_single_pair_physical_channel():
    tx = ArrayGeometry(0, 0, 0.005, -10.0)
    rx = ArrayGeometry(0, 0, 0.005, 10.0)
    g = physical_channel(boresight_link(LAM, tx, rx)).matrix
    assert g.shape == (1, 1)
    assert abs(g[0, 0]) == pytest.approx(LAM / (4 * math.pi * 20), rel=1e-12)


def test_reference_magnitude_bounds():
    tx = ArrayGeometry.square(35, 0.005, -10.0)
    rx = ArrayGeometry.square(35, 0.005, 10.0)
    link = boresight_link(LAM, tx, rx)
    r_max = math.sqrt(20 ** 2 + 2 * 0.35 ** 2)
    rows = np.r_[0:40, 2500:2540, 5001:5041]
    mag = np.abs(link.block(rows))
    assert mag.shape == (120, 5041)
    assert mag.max() <= LAM / (4 * math.pi * 20) * (1 + 1e-12)
    assert mag.min() >= LAM / (4 * math.pi * r_max) * (1 - 1e-12)


@pytest.mark.parametrize("pattern", [ElementPattern(), SECTOR])
def test_reciprocity_symmetric_for_mirror_arrays(pattern):
    tx = ArrayGeometry(1, 1, 0.3, -1.0)
    rx = ArrayGeometry(1, 1, 0.3, 1.0)
    g = physical_channel(boresight_link(LAM, tx, rx, pattern=pattern)).matrix
    np.testing.assert_allclose(g, g.T, rtol=1e-13, atol=0)


def test_streamed_equals_materialized(rng):
    tx = ArrayGeometry(3, 2, 0.01, -1.0)
    rx = ArrayGeometry(2, 3, 0.01, 1.5)
    link = boresight_link(LAM, tx, rx, Tilt(0.2, -0.1), SECTOR)
    w = rng.normal(size=(tx.size, 4)) + 1j * rng.normal(size=(tx.size, 4))
    dense = physical_channel(link).matrix @ w
    for backend in ("numpy", "numba"):
        got = link.apply(w, backend=backend)
        assert np.max(np.abs(got - dense)) <= 1e-11 * np.max(np.abs(dense))


def _desk(n=2, nmodes=2):
    beam = BeamParams(LAM, math.sqrt(LAM * 1.0 / (2 * math.pi)))
    tx = ArrayGeometry(n, n, 0.005, -0.5)
    rx = ArrayGeometry(n, n, 0.005, 0.5)
    modes = [(0, 0), (1, 0), (0, 1)][:nmodes]
    return beam, tx, rx, modes


def test_hmod_entrywise_sum():
    beam, tx, rx, modes = _desk()
    link = boresight_link(LAM, tx, rx)
    g = physical_channel(link).matrix
    w_tx = mode_filters(beam, tx, modes)
    w_rx = mode_filters(beam, rx, modes, conjugated=True)
    h = effective_channel(g, w_tx, w_rx).matrix
    tx_pos, rx_pos = element_positions(tx), element_positions(rx)
    for a in range(len(modes)):
        for b in range(len(modes)):
            total = 0j
            for j in range(rx.size):
                for i in range(tx.size):
                    gij = element_channel(tx_pos[i], rx_pos[j], LAM)
                    # stored RX weights already hold HG*
                    total += w_rx.matrix[j, a] * gij * w_tx.matrix[i, b]
            assert abs(total - h[a, b]) <= 1e-12 * abs(h).max()


def test_link_and_dense_inputs_agree():
    beam, tx, rx, modes = _desk(3, 3)
    link = boresight_link(LAM, tx, rx)
    w_tx = mode_filters(beam, tx, modes)
    w_rx = mode_filters(beam, rx, modes, conjugated=True)
    a = effective_channel(link, w_tx, w_rx).matrix
    b = effective_channel(physical_channel(link), w_tx, w_rx).matrix
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-18)


def test_single_path_single_mode(rng):
    g = np.array([[0.3 - 0.1j]])
    w_tx, w_rx = np.array([[1.0 + 0j]]), np.array([[1j]])
    h = effective_channel(g, w_tx, w_rx).matrix
    assert h[0, 0] == pytest.approx(np.conj(1j) * (0.3 - 0.1j))


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1))
def test_linearity(seed):
    r = np.random.default_rng(seed)
    cplx = lambda *s: r.normal(size=s) + 1j * r.normal(size=s)
    g, a1, a2, b = cplx(3, 3), cplx(3, 3), cplx(3, 3), cplx(3, 3)
    alpha, beta = complex(*r.normal(size=2)), complex(*r.normal(size=2))
    lhs = effective_channel(g, alpha * a1 + beta * a2, b).matrix
    rhs = alpha * effective_channel(g, a1, b).matrix + beta * effective_channel(g, a2, b).matrix
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)
    np.testing.assert_allclose(effective_channel(g, a1, b).matrix, b.conj().T @ g @ a1, atol=1e-12)
    lhs = effective_channel(g, a1, alpha * b).matrix
    np.testing.assert_allclose(lhs, np.conj(alpha) * effective_channel(g, a1, b).matrix, atol=1e-12)


def test_column_swap(rng):
    g = rng.normal(size=(4, 4)) + 0j
    w = rng.normal(size=(4, 3)) + 0j
    h = effective_channel(g, w, w).matrix
    h2 = effective_channel(g, w[:, [1, 0, 2]], w).matrix
    np.testing.assert_array_equal(h2, h[:, [1, 0, 2]])


def test_dimension_errors(rng):
    g = np.ones((4, 5))
    with pytest.raises(DimensionError):
        effective_channel(g, np.ones((4, 2)), np.ones((4, 2)))
    with pytest.raises(DimensionError):
        EffectiveChannel(np.ones((2, 3)), ((0, 0),), ((0, 0),))
    link = boresight_link(LAM, ArrayGeometry(1, 1, 0.1, -1), ArrayGeometry(1, 1, 0.1, 1))
    with pytest.raises(DimensionError):
        link.apply(np.ones((8, 1)))


def test_reference_diagonal_dominance(ref_hmod):
    dd = ref_hmod.diagonal_dominance_db()
    assert dd.shape == (36,)
    assert dd.min() >= 20.0


def test_hmod_dump_round_trip(tmp_path, ref_hmod):
    path = tmp_path / "h.bin"
    write_hmod(path, ref_hmod)
    back = read_hmod(path)
    np.testing.assert_array_equal(back.matrix, ref_hmod.matrix)
    assert back.tx_modes == tuple(ref_hmod.tx_modes)
    raw = path.read_bytes()
    assert raw[:4] == b"HMOD" and len(raw) == 16 + 8 * 72 + 16 * 36 * 36


def test_hmod_dump_rejects_garbage(tmp_path):
    p = tmp_path / "x.bin"
    p.write_bytes(b"nope" + bytes(20))
    with pytest.raises(DomainError):
        read_hmod(p)


def test_custom_link_sides():
    pos = np.array([[0.0, 0.0, 0.0]])
    side = ArraySide(pos, array_frame())
    far = ArraySide(np.array([[0.0, 0.0, 2.0]]), array_frame(Tilt(), -1))
    link = Link(side, far, LAM)
    assert link.wavenumber == pytest.approx(2 * math.pi / LAM)
    assert abs(link.block()[0, 0]) == pytest.approx(LAM / (8 * math.pi))


@given(st.floats(-0.6, 0.6), st.floats(-0.6, 0.6))
@settings(max_examples=20, deadline=None)
def test_rigid_rotation_invariance(ax, ay):
    # turning both arrays and their boresights together leaves every entry unchanged
    link = boresight_link(LAM, ArrayGeometry(2, 2, 5 * LAM, -0.1), ArrayGeometry(2, 2, 5 * LAM, 0.1),
                          Tilt(0.2, -0.1), SECTOR)
    r = rotation_matrix(Tilt(ax, ay))
    turned = Link(ArraySide(link.tx.positions @ r.T, link.tx.frame @ r.T, SECTOR),
                  ArraySide(link.rx.positions @ r.T, link.rx.frame @ r.T, SECTOR), LAM)
    np.testing.assert_allclose(turned.block(), link.block(), rtol=1e-9, atol=0)
