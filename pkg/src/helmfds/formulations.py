"""Block systems of the three transmission formulations.

Unknowns are stored inclusion by inclusion. Each inclusion ``s`` owns a
block of ``2n`` unknowns at global offset ``2 n s``; the first ``n`` hold
component 0 and the next ``n`` component 1:

* PMCHWT (all/omit): component 0 is ``q``, component 1 is ``u``;
* Burton--Miller:    component 0 is ``u``, component 1 is ``q``.

Every matrix entry is written as a *row functional* applied to a *column
field*. A column DOF on curve ``j`` radiates on side ``s`` the field
``D_s u - eps_s S_s q``; a row DOF observes that field through
``c_val * value + c_der * normal derivative``. The coefficients depend on
the formulation, the component and the side, and are collected in
:class:`Rules`. Diagonal blocks use the self-interaction quadrature plus
the identity shifts of the Burton--Miller system.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError
from .kernels import pair_kernels, self_matrices

__all__ = [
    "Formulation",
    "Rules",
    "IncidentWave",
    "BlockSystem",
    "incident_trace",
    "offdiag_rules",
    "diag_rules",
    "simplified_bm_rules",
    "reorder",
]


#: Largest number of node pairs whose kernels are evaluated at once.
_CHUNK_ENTRIES = 1 << 20


class Formulation(enum.Enum):
    """Boundary integral formulation."""

    PMCHWT_ALL = "pmchwt-all"
    PMCHWT_OMIT = "pmchwt-omit"
    BM = "bm"

    @classmethod
    def parse(cls, value):
        """Accept an enum member, its value (``"pmchwt-omit"``) or its name."""
        if isinstance(value, cls):
            return value
        key = str(value).strip()
        for member in cls:
            if key.lower() in (member.value, member.name.lower()):
                return member
        raise ConfigError(f"unknown formulation {value!r}")

    @property
    def is_pmchwt(self):
        return self is not Formulation.BM


_KIND_OF = {"G": "S", "dG_dny": "D", "dG_dnx": "Dstar", "d2G": "N"}


@dataclass(frozen=True)
class Rules:
    """Row functionals and column fields of one family of blocks.

    Attributes
    ----------
    sides : tuple of str
        Sides whose kernels enter the blocks.
    row : dict
        ``(component, side) -> (c_val, c_der)``; missing keys mean zero.
    unknown : tuple of str
        ``unknown[c]`` is ``"u"`` or ``"q"`` for component ``c``.
    """

    sides: tuple
    row: dict
    unknown: tuple

    def column(self, component, side, params):
        """Field coefficients ``(g_single, g_double)`` of a column component."""
        if self.unknown[component] == "u":
            return 0.0, 1.0
        return -params.eps(side), 0.0

    def coefficients(self, rc, cc, side, params):
        """Weights of ``(G, dG_dny, dG_dnx, d2G)`` for one component pair."""
        cv, cd = self.row.get((rc, side), (0.0, 0.0))
        gs, gd = self.column(cc, side, params)
        return {"G": cv * gs, "dG_dny": cv * gd, "dG_dnx": cd * gs, "d2G": cd * gd}

    def kinds(self, side, params):
        """Kernel kinds with a non-zero weight on ``side``."""
        need = set()
        for rc in (0, 1):
            for cc in (0, 1):
                for kind, c in self.coefficients(rc, cc, side, params).items():
                    if c != 0:
                        need.add(kind)
        return tuple(k for k in ("G", "dG_dny", "dG_dnx", "d2G") if k in need)


def _pmchwt_rules(sides, params):
    row = {}
    for s in sides:
        row[(0, s)] = (1.0, 0.0)
        row[(1, s)] = (0.0, 1.0 / params.eps(s))
    return Rules(tuple(sides), row, ("q", "u"))


def _bm_rules(params, interior=True):
    alpha = 1j / params.k_plus
    row = {(0, "+"): (1.0, alpha)}
    sides = ("+",)
    if interior:
        row[(1, "-")] = (1.0, 0.0)
        sides = ("+", "-")
    return Rules(sides, row, ("u", "q"))


def offdiag_rules(form, params):
    """Rules for blocks coupling two different inclusions."""
    form = Formulation.parse(form)
    if form is Formulation.PMCHWT_OMIT:
        return _pmchwt_rules(("+",), params)
    if form is Formulation.PMCHWT_ALL:
        return _pmchwt_rules(("+", "-"), params)
    return _bm_rules(params)


def diag_rules(form, params):
    """Rules for the self-interaction block of an inclusion."""
    form = Formulation.parse(form)
    if form.is_pmchwt:
        return _pmchwt_rules(("+", "-"), params)
    return _bm_rules(params)


def simplified_bm_rules(params):
    """Off-diagonal rules of the simplified Burton--Miller variant.

    The interior potentials are dropped from blocks coupling different
    inclusions, so component 1 rows of every off-diagonal block vanish.
    This variant is only a demonstration fixture: it makes the projected
    matrix ``R A^{-1} L`` singular and must never be used as a solver.
    """
    return _bm_rules(params, interior=False)


@dataclass(frozen=True)
class IncidentWave:
    """Plane wave ``amplitude * exp(i k+ d.x)``."""

    direction: tuple = (1.0, 0.0)
    amplitude: complex = 1.0

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        if d.shape != (2,) or abs(math.hypot(*d) - 1.0) > 1e-12:
            raise ConfigError("incident direction must be a unit 2-vector")


def incident_trace(wave, grid, params):
    """Values ``u^I`` and scaled normal derivatives ``q^I`` on a grid.

    ``q^I = (1/eps+) * du^I/dn = (1/eps+) * i k+ (d . n) u^I``.
    """
    d = np.asarray(wave.direction, dtype=float)
    kp = params.k_plus
    u = wave.amplitude * np.exp(1j * kp * (grid.nodes @ d))
    q = (1j * kp / params.eps_plus) * (grid.normals @ d) * u
    return u, q


def reorder(phi, n):
    """Swap the two components inside every ``2n`` block.

    Maps the PMCHWT ordering ``(q, u)`` to the Burton--Miller ordering
    ``(u, q)`` and back.
    """
    phi = np.asarray(phi)
    if phi.shape[0] % (2 * n):
        raise DimensionError("vector length is not a multiple of 2n")
    blocks = phi.reshape(-1, 2, n, *phi.shape[1:])
    return blocks[:, ::-1].reshape(phi.shape)


class BlockSystem:
    """The ``2mn x 2mn`` block system of a layout.

    Entries are generated on demand; nothing of size ``O((mn)^2)`` is
    stored unless :meth:`dense_matrix` is called.

    Parameters
    ----------
    grids : list of QuadratureGrid
        One grid per inclusion, all with the same ``n``.
    params : WaveParams
    form : Formulation or str
    offdiag : Rules, optional
        Override of the off-diagonal rules (used for the simplified
        Burton--Miller fixture).
    """

    def __init__(self, grids, params, form, offdiag=None):
        self.grids = list(grids)
        if not self.grids:
            raise ConfigError("at least one inclusion is required")
        ns = {g.n for g in self.grids}
        if len(ns) != 1:
            raise ConfigError("all inclusions must carry the same number of nodes")
        self.n = ns.pop()
        self.m = len(self.grids)
        self.params = params
        self.form = Formulation.parse(form)
        self.rules = offdiag if offdiag is not None else offdiag_rules(self.form, params)
        self.drules = diag_rules(self.form, params)
        self.nodes = np.concatenate([g.nodes for g in self.grids])
        self.normals = np.concatenate([g.normals for g in self.grids])
        self.weights = np.concatenate([g.weights for g in self.grids])

    @property
    def size(self):
        """Number of unknowns ``N = 2 m n``."""
        return 2 * self.m * self.n

    # -- index helpers -------------------------------------------------
    def block_dofs(self, s):
        """Global DOF indices of inclusion ``s``."""
        return np.arange(2 * self.n * s, 2 * self.n * (s + 1))

    def split(self, dofs):
        """Decompose global DOFs into ``(inclusion, component, global node)``."""
        dofs = np.asarray(dofs, dtype=np.intp)
        two_n = 2 * self.n
        s = dofs // two_n
        rem = dofs - s * two_n
        comp = rem // self.n
        node = s * self.n + (rem - comp * self.n)
        return s, comp, node

    # -- blocks --------------------------------------------------------
    def diag_block(self, s):
        """Assembled ``2n x 2n`` self block of inclusion ``s``."""
        g = self.grids[s]
        n = self.n
        A = np.zeros((2 * n, 2 * n), dtype=complex)
        R = self.drules
        for side in R.sides:
            kinds = R.kinds(side, self.params)
            mats = self_matrices(g, self.params.k(side), tuple(_KIND_OF[k] for k in kinds))
            for rc in (0, 1):
                for cc in (0, 1):
                    coef = R.coefficients(rc, cc, side, self.params)
                    blk = A[rc * n:(rc + 1) * n, cc * n:(cc + 1) * n]
                    for kind in kinds:
                        if coef[kind] != 0:
                            blk += coef[kind] * mats[_KIND_OF[kind]]
        if self.form is Formulation.BM:
            alpha = 1j / self.params.k_plus
            idx = np.arange(n)
            A[idx, idx] -= 0.5
            A[idx, n + idx] -= 0.5 * alpha * self.params.eps_plus
            A[n + idx, idx] += 0.5
        return A

    def offdiag(self, rows, cols, rules=None, out=None):
        """Entries ``A[rows, cols]`` for DOFs on different inclusions.

        Kernel values are evaluated once per distinct node pair and shared
        by the component combinations.

        Parameters
        ----------
        rows, cols : array_like of int
            Global DOF indices. No row may share an inclusion with a column.
        rules : Rules, optional
            Defaults to the system's off-diagonal rules.
        out : ndarray, optional
            Complex array (or view) of shape ``(len(rows), len(cols))`` to
            fill in place instead of allocating the result.

        Returns
        -------
        ndarray, shape (len(rows), len(cols))
        """
        rules = self.rules if rules is None else rules
        rows = np.asarray(rows, dtype=np.intp)
        cols = np.asarray(cols, dtype=np.intp)
        if out is None:
            out = np.zeros((rows.size, cols.size), dtype=complex)
        elif out.shape != (rows.size, cols.size):
            raise ValueError(f"out has shape {out.shape}, expected {(rows.size, cols.size)}")
        else:
            out[...] = 0.0
        if rows.size == 0 or cols.size == 0:
            return out
        rs, rcomp, rnode = self.split(rows)
        cs, ccomp, cnode = self.split(cols)
        if np.intersect1d(rs, cs).size:
            raise ValueError("offdiag called with rows and columns on the same inclusion")
        ur, rinv = np.unique(rnode, return_inverse=True)
        uc, cinv = np.unique(cnode, return_inverse=True)
        w = self.weights[uc]
        rmask = [rcomp == c for c in (0, 1)]
        cidx = [np.flatnonzero(ccomp == c) for c in (0, 1)]
        # Row chunks bound the size of the kernel temporaries; every entry is
        # computed independently, so the result does not depend on the chunking.
        chunk = max(1, _CHUNK_ENTRIES // uc.size)
        for side in rules.sides:
            kinds = rules.kinds(side, self.params)
            if not kinds:
                continue
            for a in range(0, ur.size, chunk):
                b = min(a + chunk, ur.size)
                K = pair_kernels(self.nodes[ur[a:b]], self.normals[ur[a:b]], self.nodes[uc],
                                 self.normals[uc], self.params.k(side), kinds)
                in_chunk = (rinv >= a) & (rinv < b)
                for rc in (0, 1):
                    ri = np.flatnonzero(rmask[rc] & in_chunk)
                    if not ri.size:
                        continue
                    for cc in (0, 1):
                        ci = cidx[cc]
                        if not ci.size:
                            continue
                        coef = rules.coefficients(rc, cc, side, self.params)
                        terms = [(coef[kd], K[kd]) for kd in kinds if coef[kd] != 0]
                        if not terms:
                            continue
                        sub = np.ix_(rinv[ri] - a, cinv[ci])
                        val = terms[0][0] * terms[0][1][sub]
                        for c, Kk in terms[1:]:
                            val += c * Kk[sub]
                        val *= w[cinv[ci]][None, :]
                        out[np.ix_(ri, ci)] += val
                del K
        return out

    def block(self, i, j):
        """The ``2n x 2n`` block ``A_ij``."""
        if i == j:
            return self.diag_block(i)
        return self.offdiag(self.block_dofs(i), self.block_dofs(j))

    def dense_matrix(self):
        """Materialize the full ``N x N`` matrix."""
        N = self.size
        A = np.empty((N, N), dtype=complex)
        two_n = 2 * self.n
        for i in range(self.m):
            rows = self.block_dofs(i)
            others = np.concatenate([self.block_dofs(j) for j in range(self.m) if j != i]) \
                if self.m > 1 else np.empty(0, dtype=np.intp)
            A[i * two_n:(i + 1) * two_n, others] = self.offdiag(rows, others)
            A[i * two_n:(i + 1) * two_n, i * two_n:(i + 1) * two_n] = self.diag_block(i)
        return A

    def apply(self, phi):
        """Matrix-vector product ``A phi`` without storing ``A``."""
        phi = np.asarray(phi)
        if phi.shape[0] != self.size:
            raise DimensionError(f"expected length {self.size}, got {phi.shape[0]}")
        out = np.zeros(phi.shape, dtype=complex)
        two_n = 2 * self.n
        for i in range(self.m):
            rows = self.block_dofs(i)
            sl = slice(i * two_n, (i + 1) * two_n)
            out[sl] = self.diag_block(i) @ phi[sl]
            if self.m > 1:
                others = np.concatenate([self.block_dofs(j) for j in range(self.m) if j != i])
                out[sl] += self.offdiag(rows, others) @ phi[others]
        return out

    def rhs(self, wave=None):
        """Right-hand side for plane-wave incidence.

        PMCHWT: ``(-u^I; -q^I)``. Burton--Miller:
        ``(-(u^I + alpha eps+ q^I); 0)`` with ``alpha = i/k+``.
        """
        wave = IncidentWave() if wave is None else wave
        parts = []
        alpha = 1j / self.params.k_plus
        for g in self.grids:
            u, q = incident_trace(wave, g, self.params)
            if self.form.is_pmchwt:
                parts.append(np.concatenate([-u, -q]))
            else:
                parts.append(np.concatenate([-(u + alpha * self.params.eps_plus * q),
                                             np.zeros(self.n, dtype=complex)]))
        return np.concatenate(parts)

    def traces(self, phi):
        """Split a solution into per-inclusion ``(u, q)`` arrays of shape ``(m, n)``."""
        blocks = np.asarray(phi).reshape(self.m, 2, self.n)
        if self.form.is_pmchwt:
            return blocks[:, 1], blocks[:, 0]
        return blocks[:, 0], blocks[:, 1]
