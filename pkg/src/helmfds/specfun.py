"""Double-precision Bessel and Hankel functions of order 0 and 1.

Only real, non-negative arguments are supported. The functions are evaluated
from Chebyshev expansions on two ranges:

* ``0 <= x <= 8``: expansions in ``t = x**2/32 - 1`` of ``J0``, ``J1/x`` and
  of the regular parts of ``Y0`` and ``Y1`` left after removing the
  logarithmic (and, for ``Y1``, the ``1/x``) singularity;
* ``x > 8``: expansions in ``t = 128/x**2 - 1`` of the Hankel amplitude
  functions ``P`` and ``x*Q`` in

  .. math::

     J_\\nu(x) = \\sqrt{2/(\\pi x)}\\,(P\\cos\\chi - Q\\sin\\chi),\\qquad
     Y_\\nu(x) = \\sqrt{2/(\\pi x)}\\,(P\\sin\\chi + Q\\cos\\chi),

  with ``chi = x - (2 nu + 1) pi / 4``.

The coefficient tables live in :mod:`helmfds._bessel_tables` and are
regenerated with ``tools/gen_bessel_tables.py``. The evaluation loop is
compiled with numba. All functions accept scalars
or arrays and are pure, hence safe to call from any thread.
"""

from __future__ import annotations

import math

import numba
import numpy as np

from . import _bessel_tables as _tab
from .errors import DomainError

__all__ = [
    "bessel_j",
    "bessel_y",
    "hankel1",
    "bessel_j01",
    "bessel_jy01",
    "hankel01",
]

_SWITCH = 8.0
_TWO_OVER_PI = 2.0 / math.pi
_SQRT_HALF = math.sqrt(0.5)

_TABLES = tuple(np.asarray(getattr(_tab, name), dtype=float) for name in (
    "J0_SMALL", "J1_SMALL", "R0_SMALL", "R1_SMALL",
    "P0_LARGE", "Q0_LARGE", "P1_LARGE", "Q1_LARGE",
))


@numba.njit(cache=True, inline="always")
def _clenshaw(c, t):
    """Evaluate ``sum_k c[k] T_k(t)`` by the Clenshaw recurrence."""
    t2 = 2.0 * t
    b1 = 0.0
    b2 = 0.0
    for k in range(c.size - 1, 0, -1):
        b1, b2 = t2 * b1 - b2 + c[k], b1
    return t * b1 - b2 + c[0]


@numba.njit(cache=True)
def _eval_loop(x, want_y, j0, j1, y0, y1, tabs):
    j0s, j1s, r0s, r1s, p0l, q0l, p1l, q1l = tabs
    for i in range(x.size):
        xi = x[i]
        if xi <= _SWITCH:
            t = xi * xi / 32.0 - 1.0
            a0 = _clenshaw(j0s, t)
            a1 = xi * _clenshaw(j1s, t)
            j0[i] = a0
            j1[i] = a1
            if want_y:
                lg = math.log(0.5 * xi)
                y0[i] = _TWO_OVER_PI * lg * a0 + _clenshaw(r0s, t)
                y1[i] = _TWO_OVER_PI * (lg * a1 - 1.0 / xi) + xi * _clenshaw(r1s, t)
        else:
            inv = 1.0 / xi
            t = 128.0 * inv * inv - 1.0
            p0 = _clenshaw(p0l, t)
            q0 = _clenshaw(q0l, t) * inv
            p1 = _clenshaw(p1l, t)
            q1 = _clenshaw(q1l, t) * inv
            s = math.sin(xi)
            c = math.cos(xi)
            # cos/sin of x - pi/4 without forming the shifted phase; the
            # order-1 phase is a further quarter turn.
            cp = _SQRT_HALF * (c + s)
            sp = _SQRT_HALF * (s - c)
            amp = math.sqrt(_TWO_OVER_PI * inv)
            j0[i] = amp * (p0 * cp - q0 * sp)
            j1[i] = amp * (p1 * sp + q1 * cp)
            if want_y:
                y0[i] = amp * (p0 * sp + q0 * cp)
                y1[i] = amp * (-p1 * cp + q1 * sp)


def _eval(x, want_y):
    """Return ``(J0, J1, Y0, Y1)`` for a validated 1-D array ``x``."""
    x = np.ascontiguousarray(x, dtype=float)
    out = [np.empty_like(x) for _ in range(4 if want_y else 2)]
    dummy = np.empty(0)
    j0, j1 = out[0], out[1]
    y0, y1 = (out[2], out[3]) if want_y else (dummy, dummy)
    _eval_loop(x, want_y, j0, j1, y0, y1, _TABLES)
    return out


def _as_checked_array(x, allow_zero):
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise DomainError("Bessel argument must be finite")
    if allow_zero:
        if np.any(xa < 0.0):
            raise DomainError("Bessel argument must be non-negative")
    elif np.any(xa <= 0.0):
        raise DomainError("Bessel function of the second kind needs x > 0")
    return xa


def _kernel_eval(x, want_y):
    flat = x.ravel()
    res = _eval(flat, want_y)
    return [r.reshape(x.shape) for r in res]


def _check_order(order):
    if order not in (0, 1):
        raise DomainError(f"only orders 0 and 1 are supported, got {order!r}")


def _scalarize(value, like):
    return float(value) if np.ndim(like) == 0 else value


def bessel_j(order, x):
    """Bessel function of the first kind ``J_order(x)``.

    Parameters
    ----------
    order : {0, 1}
        Order of the function.
    x : float or array_like
        Non-negative finite argument(s). ``x = 0`` returns the limit.

    Returns
    -------
    float or ndarray
        Values with the shape of ``x``.

    Raises
    ------
    DomainError
        If ``x < 0``, ``x`` is not finite, or the order is unsupported.
    """
    _check_order(order)
    xa = _as_checked_array(x, allow_zero=True)
    j0, j1 = _kernel_eval(np.atleast_1d(xa), want_y=False)
    val = (j0 if order == 0 else j1).reshape(xa.shape)
    return _scalarize(val, x)


def bessel_y(order, x):
    """Bessel function of the second kind ``Y_order(x)`` for ``x > 0``.

    Raises
    ------
    DomainError
        If any ``x <= 0`` (logarithmic/pole singularity at the origin) or is
        not finite.
    """
    _check_order(order)
    xa = _as_checked_array(x, allow_zero=False)
    _, _, y0, y1 = _kernel_eval(np.atleast_1d(xa), want_y=True)
    val = (y0 if order == 0 else y1).reshape(xa.shape)
    return _scalarize(val, x)


def hankel1(order, x):
    """Hankel function of the first kind ``H_order^(1)(x) = J + iY``."""
    _check_order(order)
    xa = _as_checked_array(x, allow_zero=False)
    j0, j1, y0, y1 = _kernel_eval(np.atleast_1d(xa), want_y=True)
    val = (j0 + 1j * y0) if order == 0 else (j1 + 1j * y1)
    val = val.reshape(xa.shape)
    return complex(val) if np.ndim(x) == 0 else val


def bessel_j01(x):
    """Return ``(J0(x), J1(x))`` for an array of non-negative arguments.

    This is the unchecked fast path used by the quadrature code; callers
    are responsible for passing finite, non-negative values.
    """
    xa = np.asarray(x, dtype=float)
    j0, j1 = _kernel_eval(np.atleast_1d(xa), want_y=False)
    return j0.reshape(xa.shape), j1.reshape(xa.shape)


def bessel_jy01(x):
    """Return ``(J0, J1, Y0, Y1)`` for an array of positive arguments (unchecked)."""
    xa = np.asarray(x, dtype=float)
    vals = _kernel_eval(np.atleast_1d(xa), want_y=True)
    return tuple(v.reshape(xa.shape) for v in vals)


def hankel01(x):
    """Return ``(H0^(1)(x), H1^(1)(x))`` for an array of positive arguments.

    Unchecked fast path used when assembling kernel matrices.
    """
    j0, j1, y0, y1 = bessel_jy01(x)
    h0 = np.empty(j0.shape, dtype=complex)
    h0.real, h0.imag = j0, y0
    h1 = np.empty(j1.shape, dtype=complex)
    h1.real, h1.imag = j1, y1
    return h0, h1
