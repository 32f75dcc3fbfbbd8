"""Helmholtz fundamental solution and Nyström layer-potential matrices.

The fundamental solution is ``G(x, y) = (i/4) H0(k |x - y|)``. With
``d = x - y`` and ``r = |d|`` its normal derivatives are

* ``dG/dn(y)      =  (i k / 4) H1(k r) (d . n_y) / r``
* ``dG/dn(x)      = -(i k / 4) H1(k r) (d . n_x) / r``
* ``d2G/dn(x)dn(y) = (i k / 4) [ (d . n_y)(d . n_x)(k r H0 - 2 H1) / r^3
  + H1 (n_x . n_y) / r ]``

Interactions between different curves use the plain trapezoidal rule
(kernel times weight). Self interactions use the classical logarithmic
splitting with trigonometric product weights for ``S``, ``D`` and ``D*``;
the hypersingular ``N`` is reduced by the Maue identity

.. math:: N\\varphi = \\frac{d}{ds} S\\Big[\\frac{d\\varphi}{ds}\\Big]
          + k^2\\, n_x \\cdot S[n_y \\varphi],

with tangential derivatives taken by spectral differentiation on the
uniform periodic grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SingularPointError
from .specfun import bessel_j01, hankel01

__all__ = [
    "WaveParams",
    "KINDS",
    "fundamental",
    "pair_kernels",
    "self_matrices",
    "potential_matrix",
    "spectral_diff_matrix",
]

EULER_GAMMA = 0.57721566490153286061
KINDS = ("S", "D", "Dstar", "N")
_FUNDAMENTAL_KINDS = ("G", "dG_dny", "dG_dnx", "d2G")


@dataclass(frozen=True)
class WaveParams:
    """Frequency and material constants of the transmission problem.

    Attributes
    ----------
    omega : float
        Angular frequency ``omega > 0``.
    eps_plus, eps_minus : float
        Material constants of the exterior and interior media.
    """

    omega: float
    eps_plus: float = 1.0
    eps_minus: float = 4.0

    def __post_init__(self):
        for name in ("omega", "eps_plus", "eps_minus"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be a positive finite number, got {v!r}")

    @property
    def k_plus(self):
        return self.omega * math.sqrt(self.eps_plus)

    @property
    def k_minus(self):
        return self.omega * math.sqrt(self.eps_minus)

    def k(self, side):
        """Wave number of ``side`` (``"+"`` or ``"-"``)."""
        return self.k_plus if side == "+" else self.k_minus

    def eps(self, side):
        """Material constant of ``side``."""
        return self.eps_plus if side == "+" else self.eps_minus


def fundamental(kind, x, nx, y, ny, k):
    """Evaluate the fundamental solution or one of its normal derivatives.

    Parameters
    ----------
    kind : {"G", "dG_dny", "dG_dnx", "d2G"}
    x, nx : array_like, shape (2,)
        Target point and its unit normal (ignored where unused).
    y, ny : array_like, shape (2,)
        Source point and its unit normal (ignored where unused).
    k : float
        Wave number.

    Returns
    -------
    complex

    Raises
    ------
    SingularPointError
        If ``x == y``.
    """
    if kind not in _FUNDAMENTAL_KINDS:
        raise ValueError(f"unknown kernel kind {kind!r}")
    x, y = np.asarray(x, float), np.asarray(y, float)
    d = x - y
    r = math.hypot(d[0], d[1])
    if r == 0.0:
        raise SingularPointError("fundamental solution evaluated at x == y")
    h0, h1 = (complex(v[0]) for v in hankel01(np.array([k * r])))
    if kind == "G":
        return 0.25j * h0
    c = 0.25j * k
    if kind == "dG_dny":
        return c * h1 * float(d @ np.asarray(ny, float)) / r
    if kind == "dG_dnx":
        return -c * h1 * float(d @ np.asarray(nx, float)) / r
    dny = float(d @ np.asarray(ny, float))
    dnx = float(d @ np.asarray(nx, float))
    nn = float(np.asarray(nx, float) @ np.asarray(ny, float))
    return c * (dny * dnx * (k * r * h0 - 2.0 * h1) / r**3 + h1 * nn / r)


def pair_kernels(x, nx, y, ny, k, kinds=_FUNDAMENTAL_KINDS):
    """Kernel matrices between target points ``x`` and source points ``y``.

    Parameters
    ----------
    x : ndarray, shape (p, 2)
    nx : ndarray, shape (p, 2) or None
        Target normals (needed for ``dG_dnx`` and ``d2G``).
    y : ndarray, shape (q, 2)
    ny : ndarray, shape (q, 2) or None
        Source normals (needed for ``dG_dny`` and ``d2G``).
    k : float
    kinds : iterable of str
        Subset of ``("G", "dG_dny", "dG_dnx", "d2G")``.

    Returns
    -------
    dict
        ``kind -> (p, q)`` complex matrix (no quadrature weights applied).
    """
    kinds = tuple(kinds)
    dx = x[:, 0:1] - y[None, :, 0]
    dy = x[:, 1:2] - y[None, :, 1]
    r = np.hypot(dx, dy)
    if np.any(r == 0.0):
        raise SingularPointError("coincident target and source points")
    need_h0 = "G" in kinds or "d2G" in kinds
    h0, h1 = hankel01(k * r)
    out = {}
    c = 0.25j * k
    if "G" in kinds:
        out["G"] = 0.25j * h0
    if not need_h0:
        del h0
    inv_r = 1.0 / r
    if "dG_dny" in kinds or "d2G" in kinds:
        dny = (dx * ny[None, :, 0] + dy * ny[None, :, 1]) * inv_r
    if "dG_dnx" in kinds or "d2G" in kinds:
        dnx = (dx * nx[:, 0:1] + dy * nx[:, 1:2]) * inv_r
    c_h1 = c * h1
    if "dG_dny" in kinds:
        out["dG_dny"] = c_h1 * dny
    if "dG_dnx" in kinds:
        out["dG_dnx"] = -c_h1 * dnx
    if "d2G" in kinds:
        nn = nx[:, 0:1] * ny[None, :, 0] + nx[:, 1:2] * ny[None, :, 1]
        kr = k * r
        out["d2G"] = c * ((dny * dnx) * (kr * h0 - 2.0 * h1) + h1 * nn) * inv_r
    return out


def _log_weights(n):
    """Trigonometric product weights for ``ln(4 sin^2((t - s)/2))``.

    Returns the circulant first column ``Rw[m]`` such that
    ``int_0^{2pi} ln(4 sin^2((t_i - s)/2)) f(s) ds ~ sum_j Rw[(i - j) % n] f(t_j)``.
    """
    M = n // 2
    t = 2.0 * math.pi * np.arange(n) / n
    l = np.arange(1, M)
    w = -(2.0 * math.pi / M) * (np.cos(np.outer(t, l)) / l).sum(axis=1)
    w -= (math.pi / M**2) * np.cos(M * t)
    return w


def spectral_diff_matrix(n):
    """Differentiation matrix of the trigonometric interpolant (even ``n``)."""
    if n % 2:
        raise ConfigError("spectral differentiation needs an even number of nodes")
    idx = np.arange(n)
    diff = idx[:, None] - idx[None, :]
    Dm = np.zeros((n, n))
    off = diff != 0
    h = 2.0 * math.pi / n
    sign = np.where(diff % 2 == 0, 1.0, -1.0)
    Dm[off] = 0.5 * sign[off] / np.tan(0.5 * h * diff[off])
    return Dm


def self_matrices(grid, k, kinds=KINDS):
    """Self-interaction Nyström matrices of one closed curve.

    Parameters
    ----------
    grid : QuadratureGrid
    k : float
        Wave number.
    kinds : iterable of {"S", "D", "Dstar", "N"}

    Returns
    -------
    dict
        ``kind -> (n, n)`` complex matrix acting on nodal density values.
    """
    kinds = tuple(kinds)
    n = grid.n
    h = grid.h
    x, nrm, sp, x2 = grid.nodes, grid.normals, grid.speeds, grid.second
    idx = np.arange(n)
    circ = (idx[:, None] - idx[None, :]) % n
    Rw = _log_weights(n)[circ]
    diag = np.eye(n, dtype=bool)

    dx = x[:, 0:1] - x[None, :, 0]
    dy = x[:, 1:2] - x[None, :, 1]
    r = np.hypot(dx, dy)
    r[diag] = 1.0
    kr = k * r
    h0, h1 = hankel01(kr)
    j0, j1 = bessel_j01(kr)
    dt = grid.params[:, None] - grid.params[None, :]
    logs = np.log(4.0 * np.sin(0.5 * dt) ** 2 + diag)
    inv_r = 1.0 / r
    quad = Rw - h * logs  # log-part weights minus what the smooth part re-adds
    out = {}

    need_S = "S" in kinds or "N" in kinds
    if need_S:
        L1 = (-1.0 / (4.0 * math.pi)) * j0 * sp[None, :]
        G = 0.25j * h0 * sp[None, :]
        L1[diag] = -sp / (4.0 * math.pi)
        G[diag] = (0.25j - (EULER_GAMMA + np.log(0.5 * k * sp)) / (2.0 * math.pi)) * sp
        S = quad * L1 + h * G
        S[diag] = Rw[diag] * L1[diag] + h * G[diag]
        if "S" in kinds:
            out["S"] = S

    curv_term = (x2[:, 0] * nrm[:, 0] + x2[:, 1] * nrm[:, 1]) / (4.0 * math.pi * sp)
    if "D" in kinds:
        dny = (dx * nrm[None, :, 0] + dy * nrm[None, :, 1]) * inv_r
        L1 = (-k / (4.0 * math.pi)) * j1 * dny * sp[None, :]
        K = 0.25j * k * h1 * dny * sp[None, :]
        D = quad * L1 + h * K
        D[diag] = h * curv_term
        out["D"] = D
    if "Dstar" in kinds:
        dnx = -(dx * nrm[:, 0:1] + dy * nrm[:, 1:2]) * inv_r
        L1 = (-k / (4.0 * math.pi)) * j1 * dnx * sp[None, :]
        K = 0.25j * k * h1 * dnx * sp[None, :]
        Ds = quad * L1 + h * K
        Ds[diag] = h * curv_term
        out["Dstar"] = Ds
    if "N" in kinds:
        Dt = spectral_diff_matrix(n)
        Ts = Dt / sp[:, None]  # d/ds at nodes
        nn = nrm @ nrm.T
        out["N"] = Ts @ S @ Ts + (k * k) * nn * S
    return out


def potential_matrix(kind, side, target, source, params, self_flag=False):
    """Nyström matrix of a layer potential between two quadrature grids.

    Parameters
    ----------
    kind : {"S", "D", "Dstar", "N"}
    side : {"+", "-"}
        Selects ``k_plus`` or ``k_minus``.
    target, source : QuadratureGrid
    params : WaveParams
    self_flag : bool
        Use the singular self-interaction quadrature; ``target`` and
        ``source`` must then be the same grid.

    Returns
    -------
    ndarray, shape (target.n, source.n)
    """
    if kind not in KINDS:
        raise ValueError(f"unknown potential kind {kind!r}")
    if side not in ("+", "-"):
        raise ValueError(f"side must be '+' or '-', got {side!r}")
    k = params.k(side)
    if self_flag:
        if target is not source:
            raise ValueError("self_flag requires identical target and source grids")
        return self_matrices(target, k, (kind,))[kind]
    fk = {"S": "G", "D": "dG_dny", "Dstar": "dG_dnx", "N": "d2G"}[kind]
    K = pair_kernels(target.nodes, target.normals, source.nodes, source.normals, k, (fk,))[fk]
    return K * source.weights[None, :]
