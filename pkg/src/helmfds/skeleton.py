"""Proxy sampling and interpolative decomposition of one cell.

A cell ``tau`` with active DOFs ``I`` is compressed against everything
outside it. Interactions with nearby cells are sampled directly; all other
interactions are represented through a proxy circle of radius
``rho = gamma * R_cell``:

* *outgoing* rows: value and normal derivative, on the proxy circle, of the
  field radiated by each column DOF of the cell (one row group per side
  used by the off-diagonal blocks);
* *incoming* columns: the cell's row functionals applied to monopoles and
  dipoles placed on the proxy circle (same side rule).

The stacked sample ``Y = [A(near, I); outgoing; A(I, near)^T; incoming^T]``
is factored by column-pivoted QR. One skeleton set ``S`` serves both rows
and columns, so coupling blocks between cells remain plain sub-matrices of
the system matrix.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import ConfigError, ProxyGeometryError, SingularProjection

__all__ = [
    "CompressionConfig",
    "ProxySurface",
    "SampleReducer",
    "SkeletonFactorization",
    "make_proxy",
    "proxy_count",
    "proxy_blocks",
    "interpolative_decomposition",
    "skeletonize_cell",
    "skeletonize_sample",
    "skeleton_block",
    "write_stats_csv",
]


@dataclass(frozen=True)
class CompressionConfig:
    """Parameters of the cell compression.

    Attributes
    ----------
    qr_tol : float
        Relative pivot cutoff ``eps``: the rank is the number of pivots with
        ``|r_ii| > eps |r_11|``.
    proxy_ratio : float
        ``gamma``; the proxy radius is ``gamma`` times the cell radius.
    proxy_min : int
        Lower bound on the number of proxy points.
    proxy_factor : float
        Points per unit of ``k_max * rho``.
    max_rank : int or None
        Optional cap on the skeleton size.
    cond_limit : float
        Largest accepted condition number of ``R A^{-1} L``.
    """

    qr_tol: float = 1e-12
    proxy_ratio: float = 1.5
    proxy_min: int = 64
    proxy_factor: float = 3.0
    max_rank: int | None = None
    cond_limit: float = 1e12

    def __post_init__(self):
        if not 0.0 <= self.qr_tol < 1.0:
            raise ConfigError("qr_tol must lie in [0, 1)")
        if not self.proxy_ratio > 1.0:
            raise ConfigError("proxy_ratio must exceed 1")
        if self.proxy_min < 8:
            raise ConfigError("proxy_min must be at least 8")
        if self.max_rank is not None and self.max_rank < 1:
            raise ConfigError("max_rank must be positive")


@dataclass(frozen=True)
class ProxySurface:
    """Points on a proxy circle.

    Attributes
    ----------
    center : ndarray, shape (2,)
    radius : float
    points, normals : ndarray, shape (n_p, 2)
    sides : tuple of str
        Sides whose kernels generate proxy rows and columns.
    """

    center: np.ndarray
    radius: float
    points: np.ndarray
    normals: np.ndarray
    sides: tuple

    @property
    def count(self):
        return self.points.shape[0]


def proxy_count(radius, k_max, config):
    """Number of proxy points ``max(proxy_min, ceil(proxy_factor k_max rho))`` (made even)."""
    npx = max(config.proxy_min, int(math.ceil(config.proxy_factor * k_max * radius)))
    return npx + (npx % 2)


def make_proxy(center, radius, count, sides):
    """Uniform points on a circle with outward normals."""
    t = 2.0 * math.pi * np.arange(count) / count
    nrm = np.column_stack([np.cos(t), np.sin(t)])
    pts = np.asarray(center, float)[None, :] + radius * nrm
    return ProxySurface(np.asarray(center, float), float(radius), pts, nrm, tuple(sides))


def proxy_blocks(system, dofs, proxy, rules=None):
    """Outgoing and incoming proxy samples of a set of DOFs.

    Parameters
    ----------
    system : BlockSystem
    dofs : array_like of int
        Active DOFs of the cell.
    proxy : ProxySurface
    rules : Rules, optional
        Off-diagonal rules; defaults to ``system.rules``.

    Returns
    -------
    outgoing : ndarray, shape (2 n_p len(sides), len(dofs))
        Rows ``[value; normal derivative]`` per side.
    incoming : ndarray, shape (len(dofs), 2 n_p len(sides))
        Columns ``[monopole, dipole]`` per side.

    Raises
    ------
    ProxyGeometryError
        If a node of the cell lies on or outside the proxy circle.
    """
    from .kernels import pair_kernels

    rules = system.rules if rules is None else rules
    params = system.params
    _, comp, node = system.split(dofs)
    x, nx, w = system.nodes[node], system.normals[node], system.weights[node]
    if node.size and np.max(np.hypot(*(x - proxy.center).T)) >= proxy.radius:
        raise ProxyGeometryError("proxy circle intersects the geometry of its own cell")
    P, Pn = proxy.points, proxy.normals
    npx = proxy.count
    scale = math.sqrt(2.0 * math.pi * proxy.radius / npx)
    outs, ins = [], []
    for side in proxy.sides:
        k = params.k(side)
        dscale = 1.0 / (k + 1.0 / proxy.radius)
        # Kernels with targets on the cell and sources on the proxy circle.
        K = pair_kernels(x, nx, P, Pn, k)
        out_val = np.zeros((npx, len(node)), dtype=complex)
        out_der = np.zeros((npx, len(node)), dtype=complex)
        in_mono = np.zeros((len(node), npx), dtype=complex)
        in_dip = np.zeros((len(node), npx), dtype=complex)
        for c in (0, 1):
            sel = comp == c
            if not sel.any():
                continue
            gs, gd = rules.column(c, side, params)
            # Field of a cell DOF observed at proxy point z: swap roles, so
            # G(z, y) = G(y, z), dG/dn_y(z, y) = dG/dn_x(y, z), etc.
            val = gs * K["G"][sel] + gd * K["dG_dnx"][sel]
            der = gs * K["dG_dny"][sel] + gd * K["d2G"][sel]
            out_val[:, sel] = (val * w[sel, None]).T
            out_der[:, sel] = (der * w[sel, None]).T
            cv, cd = rules.row.get((c, side), (0.0, 0.0))
            if cv or cd:
                in_mono[sel] = cv * K["G"][sel] + cd * K["dG_dnx"][sel]
                in_dip[sel] = cv * K["dG_dny"][sel] + cd * K["d2G"][sel]
        outs += [scale * out_val, scale * dscale * out_der]
        ins += [scale * in_mono, scale * dscale * in_dip]
    return np.vstack(outs), np.hstack(ins)


def _triangular_factor(Y, overwrite=False):
    """Upper triangle ``R`` (``ncol x ncol``) of an unpivoted QR of a tall ``Y``.

    LAPACK is called directly: with ``overwrite`` and a Fortran-ordered
    ``Y`` the factorization runs in place and only ``R`` is copied out.
    """
    nrow, ncol = Y.shape
    geqrf, geqrf_lwork = sla.get_lapack_funcs(("geqrf", "geqrf_lwork"), (Y,))
    lwork, info = geqrf_lwork(nrow, ncol)
    if info != 0:
        raise np.linalg.LinAlgError(f"geqrf workspace query failed (info={info})")
    qr, _, _, info = geqrf(Y, lwork=int(np.real(lwork)), overwrite_a=overwrite)
    if info != 0:
        raise np.linalg.LinAlgError(f"geqrf failed (info={info})")
    return np.triu(qr[:ncol])


class SampleReducer:
    """Row-stacked sample matrix with bounded memory.

    The column interpolative decomposition of a stacked sample depends only
    on the column geometry, which any ``Q R`` factorization of the stack
    preserves. Rows are written into a fixed buffer; when the next piece
    does not fit, the buffer contents are replaced in place by their
    triangular factor and filling continues below it. A sample that fits
    in ``max_bytes`` is stored verbatim as a plain stack.

    Parameters
    ----------
    ncol : int
        Number of sample columns (DOFs of the cell).
    nrow : int
        Total number of rows that will be appended.
    max_bytes : int
        Buffer budget.
    """

    def __init__(self, ncol, nrow, max_bytes=1 << 28):
        self.ncol = ncol
        cap = nrow
        if nrow * ncol * 16 > max_bytes:
            cap = min(nrow, max(2 * ncol, max_bytes // (16 * ncol)))
        self.buf = np.empty((cap, ncol), dtype=complex, order="F")
        #: Rows per piece: everything at once, or what fits below a factor.
        self.step = nrow if cap == nrow else cap - ncol
        self.used = 0
        self.folds = 0

    def rows(self, k):
        """Writable view of the next ``k`` rows (``k <= step``)."""
        cap = self.buf.shape[0]
        if self.used + k > cap:
            if k > self.step:
                raise ValueError(f"cannot append {k} rows in pieces of {self.step}")
            self.buf[self.used:] = 0.0
            self.buf[:self.ncol] = _triangular_factor(self.buf, overwrite=True)
            self.used = self.ncol
            self.folds += 1
        view = self.buf[self.used:self.used + k]
        self.used += k
        return view

    def slices(self, n):
        """Row ranges ``(a, b)`` that cover ``n`` rows in appendable pieces."""
        step = max(1, self.step)
        return [(a, min(a + step, n)) for a in range(0, n, step)]

    def append(self, block):
        """Append all rows of ``block``."""
        for a, b in self.slices(block.shape[0]):
            self.rows(b - a)[...] = block[a:b]

    def result(self):
        """The stacked sample, or an equivalent factor if rows were folded."""
        return self.buf if self.used == self.buf.shape[0] else self.buf[:self.used]


def interpolative_decomposition(Y, tol, max_rank=None, overwrite=False):
    """Column interpolative decomposition ``Y ~ Y[:, skel] @ P``.

    The matrix is first reduced by an unpivoted QR when it is tall (this
    leaves column norms and pivoted-QR factors unchanged), then factored by
    LAPACK's column-pivoted QR.

    Parameters
    ----------
    Y : ndarray, shape (nrow, ncol)
    tol : float
        Relative pivot cutoff.
    max_rank : int, optional
    overwrite : bool
        Allow ``Y`` to be destroyed to save memory.

    Returns
    -------
    perm : ndarray of int
        Column permutation; ``perm[:rank]`` is the skeleton.
    rank : int
    T : ndarray, shape (rank, ncols - rank)
        Interpolation coefficients of the redundant columns.
    rdiag : ndarray
        Absolute diagonal of the triangular factor.
    """
    nrow, ncol = Y.shape
    if nrow > ncol:
        Y = _triangular_factor(Y, overwrite)
        overwrite = True
    Rf, perm = sla.qr(Y, mode="r", pivoting=True, overwrite_a=overwrite, check_finite=False)
    rdiag = np.abs(np.diagonal(Rf))
    if rdiag.size == 0 or rdiag[0] == 0.0:
        rank = 0
    else:
        rank = int(np.count_nonzero(rdiag > tol * rdiag[0]))
    if max_rank is not None:
        rank = min(rank, max_rank)
    if rank:
        T = sla.solve_triangular(Rf[:rank, :rank], Rf[:rank, rank:], check_finite=False)
    else:
        T = np.zeros((0, ncol), dtype=Y.dtype)
    return perm, rank, T, rdiag


@dataclass
class SkeletonFactorization:
    """Compression data of one cell.

    The interpolation operators are stored compactly: ``R`` has identity
    columns on the skeleton and ``T`` on the redundant positions, and
    ``L = R^T`` with the rows of dead DOFs zeroed. Dense copies are
    available as properties.

    Attributes
    ----------
    cell : tuple
        ``(level, index)``.
    dofs : ndarray of int
        Active global DOFs (length ``n_hat``).
    skel : ndarray of int
        Positions of the skeleton within ``dofs`` (length ``k_hat``).
    rest : ndarray of int
        Positions of the redundant DOFs within ``dofs``.
    T : ndarray, shape (k_hat, n_hat - k_hat)
        Interpolation coefficients of the redundant DOFs.
    dead : ndarray of bool, shape (n_hat,)
        DOFs whose rows of ``L`` are zero.
    lu : tuple
        LU factorization of ``A_tt``.
    Atilde : ndarray, shape (k_hat, k_hat)
        ``(R A_tt^{-1} L)^{-1}``.
    cond : float
        Condition number of ``R A_tt^{-1} L``.
    seconds : float
        Wall time spent compressing the cell.
    """

    cell: tuple
    dofs: np.ndarray
    skel: np.ndarray
    rest: np.ndarray
    T: np.ndarray
    dead: np.ndarray
    lu: tuple
    Atilde: np.ndarray
    cond: float
    seconds: float = 0.0
    rdiag: np.ndarray = field(default=None, repr=False)

    @property
    def n_hat(self):
        return self.dofs.size

    @property
    def k_hat(self):
        return self.skel.size

    @property
    def skel_dofs(self):
        """Global DOF indices of the skeleton."""
        return self.dofs[self.skel]

    def restrict(self, y):
        """``R @ y`` for ``y`` of leading dimension ``n_hat``."""
        return y[self.skel] + self.T @ y[self.rest]

    def extend(self, v):
        """``L @ v`` for ``v`` of leading dimension ``k_hat``."""
        out = np.zeros((self.n_hat,) + np.shape(v)[1:], dtype=complex)
        out[self.skel] = v
        out[self.rest] = self.T.T @ v
        out[self.dead] = 0.0
        return out

    def solve_extend(self, v):
        """``A_tt^{-1} L @ v``."""
        return sla.lu_solve(self.lu, self.extend(v), check_finite=False)

    @property
    def R(self):
        """Dense ``R``, shape ``(k_hat, n_hat)``."""
        return self.restrict(np.eye(self.n_hat, dtype=complex))

    @property
    def L(self):
        """Dense ``L``, shape ``(n_hat, k_hat)``."""
        return self.extend(np.eye(self.k_hat, dtype=complex))

    @property
    def X(self):
        """Dense ``A_tt^{-1} L``, shape ``(n_hat, k_hat)``."""
        return self.solve_extend(np.eye(self.k_hat, dtype=complex))


def skeletonize_cell(cell, dofs, A_tt, near_cols, near_rows, outgoing, incoming, config,
                     lu=None):
    """Compress one cell.

    Parameters
    ----------
    cell : tuple
        Identifier used in error messages.
    dofs : ndarray of int
        Active DOFs.
    A_tt : ndarray
        Diagonal block on ``dofs`` (ignored when ``lu`` is given).
    near_cols : ndarray, shape (*, n_hat)
        Stacked ``A(near, tau)``.
    near_rows : ndarray, shape (n_hat, *)
        Stacked ``A(tau, near)``.
    outgoing, incoming : ndarray
        Proxy samples from :func:`proxy_blocks`.
    config : CompressionConfig
    lu : tuple, optional
        Precomputed LU factors of ``A_tt``.

    Returns
    -------
    SkeletonFactorization

    Raises
    ------
    SingularProjection
        If ``R A_tt^{-1} L`` is numerically singular.
    """
    Y = np.vstack([near_cols, outgoing, near_rows.T, incoming.T])
    # A row whose row-side sample is identically zero carries no information
    # for the interpolation: its least-squares coefficients are zero.
    dead = ~(np.any(near_rows != 0, axis=1) | np.any(incoming != 0, axis=1))
    return skeletonize_sample(cell, dofs, A_tt, Y, dead, config, lu)


def skeletonize_sample(cell, dofs, A_tt, Y, dead, config, lu=None):
    """Compress one cell from its stacked sample.

    Same as :func:`skeletonize_cell` but takes the stacked sample ``Y``
    (overwritten) and the mask of DOFs with identically zero row-side
    samples, so callers can build ``Y`` in place without holding the
    separate blocks.
    """
    from .dense import lu_factor_checked

    perm, rank, T, rdiag = interpolative_decomposition(Y, config.qr_tol, config.max_rank,
                                                       overwrite=True)
    skel = perm[:rank]
    rest = perm[rank:]
    if lu is None:
        lu = lu_factor_checked(A_tt)
    fact = SkeletonFactorization(cell, np.asarray(dofs), np.asarray(skel), np.asarray(rest),
                                 np.asarray(T, dtype=complex), dead, lu, None, math.nan,
                                 rdiag=rdiag)
    M = fact.restrict(fact.X)
    if rank:
        sv = np.linalg.svd(M, compute_uv=False)
        cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    else:
        cond = 1.0
    if not cond <= config.cond_limit:
        raise SingularProjection(
            f"R A^-1 L of cell {cell} is singular (condition estimate {cond:.3e})", cell, cond)
    if not rank:
        Atilde = np.zeros((0, 0), dtype=complex)
    elif math.isfinite(cond):
        Atilde = np.linalg.inv(M)
    else:
        # Only reachable with cond_limit = inf (diagnostic runs).
        Atilde = np.full((rank, rank), np.nan, dtype=complex)
    fact.Atilde = Atilde
    fact.cond = cond
    return fact


def skeleton_block(fi, fj, system, rules=None):
    """Coupling block ``A(S_i, S_j)`` between two compressed cells."""
    return system.offdiag(fi.skel_dofs, fj.skel_dofs, rules)


def write_stats_csv(path, stats):
    """Write per-cell compression records as ``level, cell_id, n_hat, k_hat, seconds``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["level", "cell_id", "n_hat", "k_hat", "seconds"])
        for rec in stats:
            w.writerow([rec["level"], rec["cell_id"], rec["n_hat"], rec["k_hat"],
                        f"{rec['seconds']:.6f}"])
