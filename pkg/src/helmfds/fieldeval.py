"""Total field at points away from the boundaries.

Given boundary traces ``(u_j, q_j)`` (``q`` is the normal derivative scaled
by ``1/eps``) the field is reconstructed by the Green representation

* exterior: ``u(x) = u^I(x) + sum_j int_{G_j} [dG+/dn_y u_j - eps+ G+ q_j] ds``
* inside inclusion ``j``: ``u(x) = -int_{G_j} [dG-/dn_y u_j - eps- G- q_j] ds``

with the plain trapezoidal rule. That rule is only accurate some distance
away from the curve, so points closer than a few node spacings to any
boundary are rejected instead of being evaluated inaccurately.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError
from .formulations import IncidentWave
from .kernels import pair_kernels

__all__ = ["FieldSample", "EXTERIOR", "classify_points", "field_values", "evaluate_field",
           "write_field_csv"]

#: Region label of points outside every inclusion.
EXTERIOR = -1


@dataclass(frozen=True)
class FieldSample:
    """Field value at one point.

    Attributes
    ----------
    point : tuple of float
    region : int
        :data:`EXTERIOR` or the index of the inclusion containing the point.
    value : complex
    """

    point: tuple
    region: int
    value: complex

    @property
    def region_name(self):
        return "exterior" if self.region == EXTERIOR else f"interior({self.region})"


def _inside_polygon(points, poly):
    """Even-odd crossing test of ``points`` against a closed polygon."""
    x, y = points[:, 0:1], points[:, 1:2]
    x0, y0 = poly[None, :, 0], poly[None, :, 1]
    x1, y1 = np.roll(poly, -1, axis=0)[None, :, 0], np.roll(poly, -1, axis=0)[None, :, 1]
    straddle = (y0 > y) != (y1 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xc = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    crossings = np.count_nonzero(straddle & (x < xc), axis=1)
    return crossings % 2 == 1


def classify_points(points, grids, guard=3.0):
    """Region of each point, checking the distance to every boundary.

    Parameters
    ----------
    points : array_like, shape (p, 2)
    grids : list of QuadratureGrid
    guard : float
        Minimum distance to a curve in units of that curve's largest node
        spacing.

    Returns
    -------
    ndarray of int, shape (p,)
        :data:`EXTERIOR` or the containing inclusion.

    Raises
    ------
    DomainError
        If a point lies within ``guard`` node spacings of a boundary.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DimensionError("points must have shape (p, 2)")
    region = np.full(pts.shape[0], EXTERIOR, dtype=int)
    for j, g in enumerate(grids):
        limit = guard * float(np.max(g.weights))
        # Bounding-disc prefilter before the pairwise distances.
        cand = np.flatnonzero(np.hypot(*(pts - g.center).T) < g.radius + limit)
        if cand.size == 0:
            continue
        sub = pts[cand]
        dist = np.hypot(sub[:, 0:1] - g.nodes[None, :, 0], sub[:, 1:2] - g.nodes[None, :, 1])
        close = dist.min(axis=1) <= limit
        if close.any():
            p = sub[np.flatnonzero(close)[0]]
            raise DomainError(
                f"point ({p[0]:.6g}, {p[1]:.6g}) lies within {guard:g} node spacings "
                f"of inclusion {j}")
        region[cand[_inside_polygon(sub, g.nodes)]] = j
    return region


def _layer(points, grid, u, q, k, eps):
    """``int [dG/dn_y u - eps G q] ds`` over one curve."""
    K = pair_kernels(points, None, grid.nodes, grid.normals, k, ("G", "dG_dny"))
    return (K["dG_dny"] @ (grid.weights * u)) - eps * (K["G"] @ (grid.weights * q))


def field_values(points, traces, params, grids, wave=None, guard=3.0):
    """Region labels and field values at many points.

    Parameters
    ----------
    points : array_like, shape (p, 2)
    traces : tuple of ndarray
        ``(u, q)``, each of shape ``(m, n)``, e.g. from
        :meth:`~helmfds.formulations.BlockSystem.traces`.
    params : WaveParams
    grids : list of QuadratureGrid
    wave : IncidentWave, optional
    guard : float
        See :func:`classify_points`.

    Returns
    -------
    region : ndarray of int, shape (p,)
    value : ndarray of complex, shape (p,)
    """
    wave = IncidentWave() if wave is None else wave
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    u, q = (np.asarray(t) for t in traces)
    if u.shape != (len(grids), grids[0].n) or q.shape != u.shape:
        raise DimensionError(f"traces must have shape ({len(grids)}, {grids[0].n})")
    region = classify_points(pts, grids, guard)
    value = np.zeros(pts.shape[0], dtype=complex)
    ext = np.flatnonzero(region == EXTERIOR)
    if ext.size:
        d = np.asarray(wave.direction, dtype=float)
        value[ext] = wave.amplitude * np.exp(1j * params.k_plus * (pts[ext] @ d))
        for j, g in enumerate(grids):
            value[ext] += _layer(pts[ext], g, u[j], q[j], params.k_plus, params.eps_plus)
    for j, g in enumerate(grids):
        inside = np.flatnonzero(region == j)
        if inside.size:
            value[inside] = -_layer(pts[inside], g, u[j], q[j], params.k_minus, params.eps_minus)
    return region, value


def evaluate_field(points, traces, params, grids, wave=None, guard=3.0):
    """Field samples at ``points``; see :func:`field_values`.

    Returns
    -------
    list of FieldSample
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    region, value = field_values(pts, traces, params, grids, wave, guard)
    return [FieldSample((float(p[0]), float(p[1])), int(r), complex(v))
            for p, r, v in zip(pts, region, value)]


def write_field_csv(path, samples):
    """Write samples as ``x1, x2, re_u, im_u, abs_u`` with 17 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x1", "x2", "re_u", "im_u", "abs_u"])
        for s in samples:
            v = s.value
            w.writerow([f"{s.point[0]:.17g}", f"{s.point[1]:.17g}", f"{v.real:.17g}",
                        f"{v.imag:.17g}", f"{abs(v):.17g}"])
