import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helmfds.dense import dense_solve, relative_error
from helmfds.errors import ConfigError, DimensionError
from helmfds.formulations import (BlockSystem, Formulation, IncidentWave, diag_rules,
                                  incident_trace, reorder)
from helmfds.geometry import CurveSpec, grid_layout, make_star_curve
from helmfds.kernels import WaveParams, potential_matrix, self_matrices
from helmfds.oracle import mie_solve, mie_trace


@pytest.fixture(scope="module")
def four():
    return grid_layout(4, n=48)


def test_parse():
    assert Formulation.parse("pmchwt-omit") is Formulation.PMCHWT_OMIT
    assert Formulation.parse("BM") is Formulation.BM
    assert Formulation.parse(Formulation.PMCHWT_ALL) is Formulation.PMCHWT_ALL
    with pytest.raises(ConfigError):
        Formulation.parse("efie")


def test_incident_trace_examples(circle):
    p = WaveParams(3.0)
    kp = p.k_plus
    grid = make_star_curve(CurveSpec(center=(0.0, 0.0), lobe_amplitude=0.0), 64)
    u, q = incident_trace(IncidentWave(), grid, p)
    expected = np.exp(1j * kp * grid.nodes[:, 0])
    assert np.allclose(u, expected, rtol=0, atol=1e-15)
    # Nodes at t = pi/2 have normal (0, 1), perpendicular to the direction.
    assert abs(q[16]) < 1e-15
    # Quarter period shift.
    from helmfds.formulations import IncidentWave as W
    pt = make_star_curve(CurveSpec(center=(math.pi / (2 * kp) - 0.25, 0.0), lobe_amplitude=0.0), 64)
    u2, _ = incident_trace(W(), pt, p)
    assert abs(u2[0] - 1j) < 1e-15


def test_incident_wave_at_origin():
    class _G:
        nodes = np.zeros((1, 2))
        normals = np.array([[1.0, 0.0]])
    u, q = incident_trace(IncidentWave(), _G, WaveParams(2.0, 2.0, 3.0))
    assert u[0] == 1.0
    assert q[0] == pytest.approx(1j * 2.0 * math.sqrt(2.0) / 2.0)


def test_incident_wave_validation():
    with pytest.raises(ConfigError):
        IncidentWave(direction=(1.0, 1.0))


def _expected_offdiag(form, gi, gj, p):
    pm = lambda kind, side: potential_matrix(kind, side, gi, gj, p)  # noqa: E731
    ep, em = p.eps_plus, p.eps_minus
    if form == "pmchwt-all":
        return np.block([[-(ep * pm("S", "+") + em * pm("S", "-")), pm("D", "+") + pm("D", "-")],
                         [-(pm("Dstar", "+") + pm("Dstar", "-")),
                          pm("N", "+") / ep + pm("N", "-") / em]])
    if form == "pmchwt-omit":
        return np.block([[-ep * pm("S", "+"), pm("D", "+")],
                         [-pm("Dstar", "+"), pm("N", "+") / ep]])
    a = 1j / p.k_plus
    return np.block([[pm("D", "+") + a * pm("N", "+"), -ep * (pm("S", "+") + a * pm("Dstar", "+"))],
                     [pm("D", "-"), -em * pm("S", "-")]])


@pytest.mark.parametrize("form", ["pmchwt-all", "pmchwt-omit", "bm"])
def test_offdiag_block_layout(four, form):
    p = WaveParams(3.0, 1.3, 4.0)
    system = BlockSystem(four, p, form)
    ref = _expected_offdiag(form, four[0], four[2], p)
    assert np.max(np.abs(system.block(0, 2) - ref)) <= 1e-13 * np.max(np.abs(ref))


def test_omit_offdiag_independent_of_eps_minus(four):
    a = BlockSystem(four, WaveParams(5.0, 1.0, 5.0), "pmchwt-omit").block(1, 3)
    b = BlockSystem(four, WaveParams(5.0, 1.0, 50.0), "pmchwt-omit").block(1, 3)
    assert np.array_equal(a, b)


def test_all_and_omit_share_diagonal(four):
    p = WaveParams(5.0, 1.0, 5.0)
    a = BlockSystem(four, p, "pmchwt-all").block(2, 2)
    b = BlockSystem(four, p, "pmchwt-omit").block(2, 2)
    assert np.array_equal(a, b)


def test_bm_diagonal_identity_shifts(four):
    p = WaveParams(3.0, 1.5, 4.0)
    system = BlockSystem(four, p, "bm")
    n = four[0].n
    A = system.block(1, 1)
    # The same row/column combination built from the self matrices without jumps.
    rules = diag_rules("bm", p)
    plain = np.zeros_like(A)
    for side in rules.sides:
        M = self_matrices(four[1], p.k(side))
        names = {"G": "S", "dG_dny": "D", "dG_dnx": "Dstar", "d2G": "N"}
        for rc in (0, 1):
            for cc in (0, 1):
                for kind, c in rules.coefficients(rc, cc, side, p).items():
                    if c:
                        plain[rc * n:(rc + 1) * n, cc * n:(cc + 1) * n] += c * M[names[kind]]
    alpha = 1j / p.k_plus
    eye = np.eye(n)
    shift = np.block([[-eye / 2, -alpha * p.eps_plus * eye / 2], [eye / 2, 0 * eye]])
    assert np.max(np.abs((A - plain) - shift)) < 1e-14


def test_rhs_layout(four):
    p = WaveParams(3.0, 1.0, 4.0)
    n = four[0].n
    fb = BlockSystem(four, p, "bm").rhs()
    fp = BlockSystem(four, p, "pmchwt-all").rhs()
    for s, g in enumerate(four):
        u, q = incident_trace(IncidentWave(), g, p)
        blk = slice(2 * n * s, 2 * n * (s + 1))
        assert np.all(fb[blk][n:] == 0)
        assert np.allclose(fb[blk][:n], -(u + 1j / p.k_plus * q))
        assert np.array_equal(fp[blk][:n], -u)
        assert np.array_equal(fp[blk][n:], -q)


def test_zero_amplitude_wave_gives_zero_solution(four):
    system = BlockSystem(four, WaveParams(3.0), "bm")
    f = system.rhs(IncidentWave(amplitude=0.0))
    assert not np.any(f)
    rep = dense_solve(system, rhs=f)
    assert not np.any(rep.solution)


def test_apply_and_blocks_match_dense(four):
    system = BlockSystem(four, WaveParams(2.0, 1.0, 3.0), "pmchwt-all")
    A = system.dense_matrix()
    rng = np.random.default_rng(0)
    phi = rng.normal(size=system.size) + 1j * rng.normal(size=system.size)
    assert np.allclose(system.apply(phi), A @ phi, rtol=1e-13, atol=1e-13)
    two_n = 2 * four[0].n
    assert np.array_equal(system.block(3, 1), A[3 * two_n:4 * two_n, two_n:2 * two_n])
    rows, cols = np.array([5, 70, 3]), np.array([2 * two_n + 7, 3 * two_n + 50])
    assert np.array_equal(system.offdiag(rows, cols), A[np.ix_(rows, cols)])
    with pytest.raises(ValueError):
        system.offdiag(np.array([0]), np.array([1]))
    with pytest.raises(DimensionError):
        system.apply(np.ones(3))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(16, 40).filter(lambda v: v % 2 == 0))
def test_reorder_is_involution(m, n):
    phi = np.arange(2 * m * n, dtype=float)
    back = reorder(reorder(phi, n), n)
    assert np.array_equal(back, phi)
    swapped = reorder(phi, n).reshape(m, 2, n)
    assert np.array_equal(swapped[:, 0], phi.reshape(m, 2, n)[:, 1])


def test_reorder_rejects_bad_length():
    with pytest.raises(DimensionError):
        reorder(np.ones(10), 4)


def test_traces_follow_ordering(four):
    p = WaveParams(3.0)
    n = four[0].n
    phi = np.arange(2 * 4 * n, dtype=complex)
    u, q = BlockSystem(four, p, "pmchwt-omit").traces(phi)
    assert u[0, 0] == n and q[0, 0] == 0
    u, q = BlockSystem(four, p, "bm").traces(phi)
    assert u[0, 0] == 0 and q[0, 0] == n


@pytest.mark.parametrize("form", ["pmchwt-all", "pmchwt-omit", "bm"])
def test_no_scattering_when_media_match(form):
    grids = grid_layout(4, n=200)
    p = WaveParams(3.0, 2.0, 2.0)
    system = BlockSystem(grids, p, form)
    u, q = system.traces(dense_solve(system).solution)
    for s, g in enumerate(grids):
        ui, qi = incident_trace(IncidentWave(), g, p)
        assert np.max(np.abs(u[s] - ui)) <= 1e-9
        assert np.max(np.abs(q[s] - qi)) <= 1e-9 * np.max(np.abs(qi))


def test_bm_residual_on_oracle_traces(circle):
    p = WaveParams(3.0, 1.0, 4.0)
    system = BlockSystem([circle], p, "bm")
    u, q = mie_trace(mie_solve(0.25, p), circle)
    phi = np.concatenate([u, q])
    f = system.rhs()
    assert np.linalg.norm(system.dense_matrix() @ phi - f) / np.linalg.norm(f) <= 1e-9


def test_formulations_agree_m16(dense16):
    omit = dense16("pmchwt-omit", 3.0, 4.0)[1].solution
    full = dense16("pmchwt-all", 3.0, 4.0)[1].solution
    bm = dense16("bm", 3.0, 4.0)[1].solution
    n = 200
    assert relative_error(reorder(omit, n), bm) <= 1e-9
    assert relative_error(reorder(full, n), bm) <= 1e-9
    assert relative_error(omit, full) <= 1e-9


def test_system_validation(four):
    with pytest.raises(ConfigError):
        BlockSystem([], WaveParams(1.0), "bm")
    mixed = [four[0], make_star_curve(CurveSpec(center=(5.0, 5.0)), 64)]
    with pytest.raises(ConfigError):
        BlockSystem(mixed, WaveParams(1.0), "bm")
