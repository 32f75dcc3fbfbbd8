import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helmfds.dense import dense_solve
from helmfds.errors import DimensionError, DomainError
from helmfds.fieldeval import (EXTERIOR, FieldSample, classify_points, evaluate_field,
                               field_values, write_field_csv)
from helmfds.formulations import BlockSystem, IncidentWave
from helmfds.geometry import grid_layout
from helmfds.kernels import WaveParams
from helmfds.oracle import mie_field, mie_solve

P = WaveParams(3.0, 1.0, 4.0)


@pytest.fixture(scope="module", params=["pmchwt-omit", "bm"])
def solved(circle, request):
    system = BlockSystem([circle], P, request.param)
    return system.traces(dense_solve(system).solution)


def test_exterior_matches_mie(circle, solved):
    a = circle.radius
    th = np.linspace(0, 2 * np.pi, 9)[:-1]
    pts = 3 * a * np.column_stack([np.cos(th), np.sin(th)])
    region, val = field_values(pts, solved, P, [circle])
    assert np.all(region == EXTERIOR)
    ref = mie_field(mie_solve(a, P), pts)
    assert np.max(np.abs(val - ref) / np.abs(ref)) <= 1e-8


def test_interior_matches_mie(circle, solved):
    a = circle.radius
    pts = np.array([[0.0, 0.0], [0.3 * a, 0.1 * a], [-0.5 * a, 0.4 * a], [0.0, -0.7 * a]])
    region, val = field_values(pts, solved, P, [circle])
    assert np.all(region == 0)
    ref = mie_field(mie_solve(a, P), pts)
    assert np.max(np.abs(val - ref) / np.abs(ref)) <= 1e-8


def test_matching_media_give_incident_field():
    p = WaveParams(4.0, 1.0, 1.0)
    grids = grid_layout(4, n=200)
    system = BlockSystem(grids, p, "bm")
    traces = system.traces(dense_solve(system).solution)
    pts = np.array([[-0.6, -0.6], [0.5, 0.5], [grids[2].center[0], grids[2].center[1]],
                    [2.0, -1.0]])
    region, val = field_values(pts, traces, p, grids)
    assert region[2] == 2
    incident = np.exp(1j * p.k_plus * pts[:, 0])
    assert np.max(np.abs(val - incident)) <= 1e-8


def test_guard_rejects_points_near_the_curve(circle, solved):
    h = np.max(circle.weights)
    near = circle.nodes[10] + 2.0 * h * circle.normals[10]
    with pytest.raises(DomainError):
        field_values([near], solved, P, [circle])
    ok = circle.nodes[10] + 4.0 * h * circle.normals[10]
    assert classify_points([ok], [circle])[0] == EXTERIOR


def test_trace_shape_checked(circle):
    with pytest.raises(DimensionError):
        field_values([[1.0, 1.0]], (np.zeros((1, 10)), np.zeros((1, 10))), P, [circle])


def test_classify_layout():
    grids = grid_layout(16, n=64)
    pts = np.array([g.center for g in grids] + [[-5.0, -5.0]])
    region = classify_points(pts, grids)
    assert region.tolist() == list(range(16)) + [EXTERIOR]


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 199))
def test_mirrored_pairs_continuous(circle, solved, i):
    """Literal continuity check: points 5 node spacings on either side."""
    h = np.max(circle.weights)
    x0, nrm = circle.nodes[i], circle.normals[i]
    _, v = field_values([x0 + 5 * h * nrm, x0 - 5 * h * nrm], solved, P, [circle])
    assert abs(v[0] - v[1]) <= 1e-4 * abs(solved[0][0, i])


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 199))
def test_one_sided_limits_continuous(circle, solved, i):
    """Limits extrapolated from 5..12 node spacings agree across the curve."""
    h = np.max(circle.weights)
    x0, nrm = circle.nodes[i], circle.normals[i]
    d = h * np.arange(5, 13)
    _, out = field_values(x0 + d[:, None] * nrm, solved, P, [circle])
    _, inn = field_values(x0 - d[:, None] * nrm, solved, P, [circle])
    lim_out = np.polyval(np.polyfit(d, out, 6), 0.0)
    lim_in = np.polyval(np.polyfit(d, inn, 6), 0.0)
    u = solved[0][0, i]
    assert abs(lim_out - lim_in) <= 1e-4 * abs(u)
    assert abs(lim_out - u) <= 1e-4 * abs(u)


def test_oblique_wave(circle):
    wave = IncidentWave(direction=(0.6, 0.8))
    system = BlockSystem([circle], P, "pmchwt-omit")
    traces = system.traces(dense_solve(system, system.rhs(wave)).solution)
    pts = np.array([[0.9, 0.2], [-0.05, 0.02]])
    _, val = field_values(pts, traces, P, [circle], wave=wave)
    ref = mie_field(mie_solve(circle.radius, P, wave=wave), pts)
    assert np.max(np.abs(val - ref) / np.abs(ref)) <= 1e-8


def test_samples_and_csv(tmp_path, circle, solved):
    pts = [[0.9, 0.0], [0.0, 0.05]]
    samples = evaluate_field(pts, solved, P, [circle])
    assert [s.region_name for s in samples] == ["exterior", "interior(0)"]
    assert isinstance(samples[0], FieldSample)
    path = tmp_path / "field.csv"
    write_field_csv(path, samples)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["x1", "x2", "re_u", "im_u", "abs_u"]
    assert len(rows) == 3
    assert complex(float(rows[1][2]), float(rows[1][3])) == samples[0].value
