"""Inclusion curves, grid layouts, quadrature grids and the cell tree.

Every inclusion is a smooth star-shaped curve

.. math:: x(t) = c + R_0 (1 + a\\cos p t)\\,(\\cos(t+\\varphi), \\sin(t+\\varphi)),

sampled with the periodic trapezoidal rule at ``t_l = 2 pi l / n``. The
curves are arranged on a ``sqrt(m) x sqrt(m)`` grid and grouped into a
perfect binary tree whose leaves are the inclusions in Morton (Z) order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, OverlapError

__all__ = [
    "CurveSpec",
    "QuadratureGrid",
    "Cell",
    "CellTree",
    "golden_rotation",
    "make_star_curve",
    "make_parametric_curve",
    "grid_layout",
    "grid_index",
    "morton_code",
    "build_tree",
    "bounding_diameter",
    "write_geometry_csv",
]

#: Rotation increment of consecutive inclusions, ``pi (3 - sqrt 5)``.
GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@dataclass(frozen=True)
class CurveSpec:
    """Parameters of a star-shaped inclusion ``r(t) = R0 (1 + a cos p t)``.

    Attributes
    ----------
    center : tuple of float
        Centre of the star.
    base_radius : float
        ``R0 > 0``.
    lobe_amplitude : float
        ``a`` with ``|a| < 1`` so the curve stays a Jordan curve.
    lobe_count : int
        ``p >= 0``; ``p = 0`` or ``a = 0`` gives a circle.
    rotation : float
        Rotation angle ``phi`` in radians.
    """

    center: tuple = (0.0, 0.0)
    base_radius: float = 0.25
    lobe_amplitude: float = 0.3
    lobe_count: int = 5
    rotation: float = 0.0

    def __post_init__(self):
        if not self.base_radius > 0:
            raise ConfigError("base_radius must be positive")
        if not abs(self.lobe_amplitude) < 1:
            raise ConfigError("|lobe_amplitude| must be < 1")
        if int(self.lobe_count) != self.lobe_count or self.lobe_count < 0:
            raise ConfigError("lobe_count must be a non-negative integer")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @property
    def max_radius(self):
        """Largest distance of the curve from its centre."""
        return self.base_radius * (1.0 + abs(self.lobe_amplitude))

    @property
    def min_radius(self):
        """Smallest distance of the curve from its centre."""
        return self.base_radius * (1.0 - abs(self.lobe_amplitude))


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Nyström nodes on one closed curve.

    Attributes
    ----------
    nodes : ndarray, shape (n, 2)
    normals : ndarray, shape (n, 2)
        Unit normals pointing away from the enclosed region.
    speeds : ndarray, shape (n,)
        ``|x'(t_l)|``.
    weights : ndarray, shape (n,)
        Trapezoidal weights ``h |x'(t_l)|``.
    second : ndarray, shape (n, 2)
        ``x''(t_l)``, needed by the self-interaction quadrature.
    params : ndarray, shape (n,)
        Parameter values ``t_l``.
    center : ndarray, shape (2,)
    radius : float
        Radius of a disc around ``center`` containing the curve.
    """

    nodes: np.ndarray
    normals: np.ndarray
    speeds: np.ndarray
    weights: np.ndarray
    second: np.ndarray
    params: np.ndarray
    center: np.ndarray
    radius: float

    @property
    def n(self):
        return self.nodes.shape[0]

    @property
    def h(self):
        return 2.0 * math.pi / self.n

    @property
    def tangents(self):
        """Unit tangents (counter-clockwise)."""
        return np.column_stack([-self.normals[:, 1], self.normals[:, 0]])


def golden_rotation(s):
    """Deterministic rotation ``s * pi (3 - sqrt 5) mod 2 pi`` of inclusion ``s``."""
    return math.fmod(s * GOLDEN_ANGLE, 2.0 * math.pi)


def _check_nodes(n):
    if int(n) != n or n < 16 or n % 2:
        raise ConfigError(f"n must be an even integer >= 16, got {n!r}")
    return int(n)


def make_parametric_curve(position, derivative, second, n, center=None):
    """Sample a counter-clockwise ``2 pi``-periodic curve with ``n`` nodes.

    Parameters
    ----------
    position, derivative, second : callable
        Map an array of parameters ``t`` to arrays of shape ``(len(t), 2)``
        holding ``x(t)``, ``x'(t)`` and ``x''(t)``.
    n : int
        Even number of nodes, at least 16.
    center : array_like, optional
        Reference point for the bounding disc; defaults to the node mean.

    Returns
    -------
    QuadratureGrid
    """
    n = _check_nodes(n)
    t = 2.0 * math.pi * np.arange(n) / n
    nodes = np.asarray(position(t), dtype=float)
    d1 = np.asarray(derivative(t), dtype=float)
    d2 = np.asarray(second(t), dtype=float)
    speeds = np.hypot(d1[:, 0], d1[:, 1])
    normals = np.column_stack([d1[:, 1], -d1[:, 0]]) / speeds[:, None]
    weights = (2.0 * math.pi / n) * speeds
    c = nodes.mean(axis=0) if center is None else np.asarray(center, dtype=float)
    radius = float(np.max(np.hypot(*(nodes - c).T)))
    return QuadratureGrid(nodes=nodes, normals=normals, speeds=speeds, weights=weights,
                          second=d2, params=t, center=c, radius=radius)


def make_star_curve(spec, n):
    """Sample a star-shaped curve with ``n`` trapezoidal nodes.

    Parameters
    ----------
    spec : CurveSpec
    n : int
        Even number of nodes, at least 16.

    Returns
    -------
    QuadratureGrid
        Its bounding disc is centred at ``spec.center`` with radius
        ``R0 (1 + |a|)``.
    """
    n = _check_nodes(n)
    R0, a, p, phi = spec.base_radius, spec.lobe_amplitude, spec.lobe_count, spec.rotation
    cx, cy = spec.center

    def parts(t):
        r = R0 * (1.0 + a * np.cos(p * t))
        dr = -R0 * a * p * np.sin(p * t)
        d2r = -R0 * a * p * p * np.cos(p * t)
        return r, dr, d2r, np.cos(t + phi), np.sin(t + phi)

    def position(t):
        r, _, _, c, s = parts(t)
        return np.column_stack([cx + r * c, cy + r * s])

    def derivative(t):
        r, dr, _, c, s = parts(t)
        return np.column_stack([dr * c - r * s, dr * s + r * c])

    def second(t):
        r, dr, d2r, c, s = parts(t)
        return np.column_stack([(d2r - r) * c - 2.0 * dr * s, (d2r - r) * s + 2.0 * dr * c])

    grid = make_parametric_curve(position, derivative, second, n, center=(cx, cy))
    return replace(grid, radius=spec.max_radius)


def grid_index(s, m):
    """Grid coordinates ``(ix, iy)`` of inclusion ``s`` in a ``sqrt(m)`` grid."""
    side = math.isqrt(m)
    return s % side, s // side


def _check_power_of_four(m):
    if int(m) != m or m < 1 or (m & (m - 1)) or (int(m).bit_length() - 1) % 2:
        raise ConfigError(f"m must be a power of 4, got {m!r}")


def grid_layout(m, spacing=1.0, base=None, n=200):
    """Build the ``sqrt(m) x sqrt(m)`` arrangement of rotated stars.

    Inclusion ``s`` sits at ``(ix d, iy d)`` with ``s = iy sqrt(m) + ix`` and
    is rotated by :func:`golden_rotation` ``(s)``.

    Parameters
    ----------
    m : int
        Number of inclusions, a power of 4.
    spacing : float
        Grid spacing ``d``.
    base : CurveSpec, optional
        Shape template; its centre and rotation are overridden.
    n : int
        Nodes per inclusion.

    Returns
    -------
    list of QuadratureGrid
        Indexed by inclusion id ``s``.

    Raises
    ------
    OverlapError
        If ``d <= 2 R0 (1 + |a|)``.
    """
    _check_power_of_four(m)
    base = CurveSpec() if base is None else base
    if not spacing > 2.0 * base.max_radius:
        raise OverlapError(
            f"spacing {spacing} does not separate inclusions of radius {base.max_radius}")
    grids = []
    for s in range(m):
        ix, iy = grid_index(s, m)
        spec = replace(base, center=(ix * spacing, iy * spacing), rotation=golden_rotation(s))
        grids.append(make_star_curve(spec, n))
    return grids


def bounding_diameter(grids):
    """Diameter of the axis-aligned bounding box of the discs enclosing ``grids``."""
    c = np.array([g.center for g in grids])
    r = np.array([g.radius for g in grids])
    lo = (c - r[:, None]).min(axis=0)
    hi = (c + r[:, None]).max(axis=0)
    return float(np.hypot(*(hi - lo)))


def morton_code(ix, iy):
    """Interleave bits: ``ix`` on even bit positions, ``iy`` on odd ones."""
    code = 0
    bit = 0
    while ix or iy:
        code |= (ix & 1) << (2 * bit)
        code |= (iy & 1) << (2 * bit + 1)
        ix >>= 1
        iy >>= 1
        bit += 1
    return code


@dataclass
class Cell:
    """A node of the cell tree.

    Attributes
    ----------
    level : int
        0 for leaves.
    index : int
        Position within its level.
    inclusions : list of int
        Inclusion ids covered, in Morton order.
    children : tuple of int
        Indices of the two children in level ``level - 1`` (empty for leaves).
    block : tuple of int
        Grid-block coordinates ``(bx, by)`` at this level.
    center, radius
        Bounding disc of all member curves.
    near : list of int
        Same-level neighbours sharing a block edge.
    """

    level: int
    index: int
    inclusions: list
    children: tuple
    block: tuple
    center: np.ndarray
    radius: float
    near: list = field(default_factory=list)

    @property
    def key(self):
        return (self.level, self.index)


@dataclass
class CellTree:
    """Perfect binary tree over the inclusions of a grid layout.

    ``levels[0]`` holds the leaves (one per inclusion, Morton order) and
    ``levels[-1]`` the root.
    """

    m: int
    levels: list

    @property
    def leaves(self):
        return self.levels[0]

    @property
    def depth(self):
        return len(self.levels)


def _block_shift(level):
    """Bit shifts ``(sx, sy)`` mapping grid coordinates to level blocks."""
    return (level + 1) // 2, level // 2


def build_tree(grids, near_rule="edge"):
    """Build the Morton-ordered binary cell tree of a grid layout.

    Level ``l`` cells are blocks of ``2**ceil(l/2) x 2**floor(l/2)``
    inclusions; merges alternate between the x and y directions. The near
    list of a cell holds the same-level cells whose blocks share an edge.

    Parameters
    ----------
    grids : list of QuadratureGrid
        Output of :func:`grid_layout`.
    near_rule : {"edge"}
        Only edge adjacency is implemented.
    """
    if near_rule != "edge":
        raise ConfigError(f"unknown near rule {near_rule!r}")
    m = len(grids)
    _check_power_of_four(m)
    order = sorted(range(m), key=lambda s: morton_code(*grid_index(s, m)))
    nlev = m.bit_length()
    levels = []
    for lev in range(nlev):
        size = 1 << lev
        sx, sy = _block_shift(lev)
        cells = []
        for idx in range(m >> lev):
            members = order[idx * size:(idx + 1) * size]
            ix, iy = grid_index(members[0], m)
            block = (ix >> sx, iy >> sy)
            ctr = np.mean([grids[s].center for s in members], axis=0)
            rad = max(float(np.linalg.norm(grids[s].center - ctr)) + grids[s].radius
                      for s in members)
            children = () if lev == 0 else (2 * idx, 2 * idx + 1)
            cells.append(Cell(lev, idx, list(members), children, block, ctr, rad))
        lookup = {c.block: c.index for c in cells}
        for c in cells:
            bx, by = c.block
            c.near = sorted(lookup[b] for b in ((bx - 1, by), (bx + 1, by), (bx, by - 1), (bx, by + 1))
                            if b in lookup)
        levels.append(cells)
    return CellTree(m=m, levels=levels)


def write_geometry_csv(path, grids):
    """Dump nodes, normals and weights as CSV.

    Columns: ``inclusion_id, node_id, x1, x2, n1, n2, weight``.
    """
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["inclusion_id", "node_id", "x1", "x2", "n1", "n2", "weight"])
        for s, g in enumerate(grids):
            for l in range(g.n):
                w.writerow([s, l] + [repr(float(v)) for v in (
                    g.nodes[l, 0], g.nodes[l, 1], g.normals[l, 0], g.normals[l, 1], g.weights[l])])
