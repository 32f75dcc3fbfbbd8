"""Analytic series solution for one circular penetrable cylinder.

For plane-wave incidence ``exp(i k+ d.x)`` on a circle of radius ``a``
centred at ``c`` the fields are

* exterior: ``sum_n [i^n J_n(k+ r) + a_n H_n(k+ r)] e^{i n (theta - theta_d)}``
* interior: ``sum_n b_n J_n(k- r) e^{i n (theta - theta_d)}``

(times the phase ``exp(i k+ d.c)``). Continuity of ``u`` and of
``(1/eps) du/dr`` on ``r = a`` fixes ``a_n`` and ``b_n`` one harmonic at a
time. Bessel functions of order ``>= 2`` come from Miller's backward
recurrence (``J``) and forward recurrence from the order 0/1 seeds (``Y``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ConvergenceError
from .formulations import IncidentWave
from .specfun import bessel_j, bessel_y

__all__ = ["MieSolution", "bessel_j_orders", "bessel_y_orders", "mie_solve", "mie_trace", "mie_field"]


def bessel_j_orders(nmax, x):
    """``J_0(x) .. J_nmax(x)`` by normalized backward recurrence.

    Parameters
    ----------
    nmax : int
    x : float
        Non-negative argument.

    Returns
    -------
    ndarray, shape (nmax + 1,)
    """
    x = float(x)
    out = np.zeros(nmax + 1)
    if x == 0.0:
        out[0] = 1.0
        return out
    big = max(nmax, int(x))
    start = big + 20 + int(math.sqrt(40.0 * big))
    start += start % 2
    jp1, j = 0.0, 1e-30
    vals = np.zeros(start + 1)
    vals[start] = j
    for k in range(start, 0, -1):
        jm1 = (2.0 * k / x) * j - jp1
        jp1, j = j, jm1
        vals[k - 1] = j
        if abs(j) > 1e250:
            vals[k - 1:] *= 1e-250
            jp1 *= 1e-250
            j *= 1e-250
    # Normalize against the more reliable of the two seeds.
    j0, j1 = bessel_j(0, x), bessel_j(1, x)
    if abs(j0) >= abs(j1):
        scale = j0 / vals[0]
    else:
        scale = j1 / vals[1]
    out[:] = vals[:nmax + 1] * scale
    return out


def bessel_y_orders(nmax, x):
    """``Y_0(x) .. Y_nmax(x)`` by forward recurrence from the order 0/1 values."""
    x = float(x)
    out = np.zeros(nmax + 1)
    out[0] = bessel_y(0, x)
    if nmax >= 1:
        out[1] = bessel_y(1, x)
    for k in range(1, nmax):
        out[k + 1] = (2.0 * k / x) * out[k] - out[k - 1]
    return out


def _signed(vals, orders):
    """Extend non-negative order values to ``orders`` via ``Z_{-n} = (-1)^n Z_n``."""
    a = np.abs(orders)
    sign = np.where((orders < 0) & (a % 2 == 1), -1.0, 1.0)
    return sign * vals[a]


def _j(M, x):
    """``J_n(x)`` for ``n = -M..M`` (also valid at ``x = 0``)."""
    return _signed(bessel_j_orders(M, x), np.arange(-M, M + 1))


def _j_and_deriv(M, x):
    """``J_n(x)`` and ``J_n'(x)`` for ``n = -M..M``."""
    jp = bessel_j_orders(M + 1, x)
    n = np.arange(-M, M + 1)
    J = _signed(jp, n)
    Jm1 = _signed(jp, n - 1)
    dJ = Jm1 - (n / x) * J
    return J, dJ


def _h_and_deriv(M, x):
    jp = bessel_j_orders(M + 1, x)
    yp = bessel_y_orders(M + 1, x)
    hp = jp + 1j * yp
    n = np.arange(-M, M + 1)
    H = _signed(hp, n)
    Hm1 = _signed(hp, n - 1)
    return H, Hm1 - (n / x) * H


@dataclass(frozen=True)
class MieSolution:
    """Coefficients of the cylindrical-harmonic series.

    Attributes
    ----------
    radius : float
    center : ndarray, shape (2,)
    order : int
        Truncation order ``M``; harmonics ``-M..M`` are kept.
    a, b : ndarray, shape (2M + 1,)
        Exterior scattered and interior coefficients, direction phase
        ``e^{-i n theta_d}`` and centre phase already included.
    params : WaveParams
    wave : IncidentWave
    """

    radius: float
    center: np.ndarray
    order: int
    a: np.ndarray
    b: np.ndarray
    params: object
    wave: IncidentWave

    @property
    def orders(self):
        return np.arange(-self.order, self.order + 1)


def mie_solve(a, params, wave=None, center=(0.0, 0.0), order=None, tail_tol=1e-14):
    """Solve the matching conditions harmonic by harmonic.

    Parameters
    ----------
    a : float
        Cylinder radius.
    params : WaveParams
    wave : IncidentWave, optional
    center : tuple of float
    order : int, optional
        Truncation order; defaults to ``ceil(k+ a) + 20``.
    tail_tol : float
        Maximum allowed ``|a_M| / max |a_n|``.

    Raises
    ------
    ConvergenceError
        If the coefficient tail is larger than ``tail_tol``.
    """
    if not a > 0:
        raise ConfigError("radius must be positive")
    wave = IncidentWave() if wave is None else wave
    kp, km = params.k_plus, params.k_minus
    M = int(math.ceil(kp * a)) + 20 if order is None else int(order)
    n = np.arange(-M, M + 1)
    Jp, dJp = _j_and_deriv(M, kp * a)
    Jm, dJm = _j_and_deriv(M, km * a)
    H, dH = _h_and_deriv(M, kp * a)
    cp, cm = kp / params.eps_plus, km / params.eps_minus
    inc = 1j ** (n % 4)
    # [[H, -Jm], [cp H', -cm Jm']] [a_n, b_n]^T = -inc [Jp, cp Jp']^T
    det = -H * cm * dJm + Jm * cp * dH
    r1 = -inc * Jp
    r2 = -inc * cp * dJp
    an = (r1 * (-cm * dJm) + Jm * r2) / det
    bn = (H * r2 - cp * dH * r1) / det
    scale = np.max(np.abs(an))
    if scale > 0:
        tail = max(abs(an[0]), abs(an[-1])) / scale
        if tail > tail_tol:
            raise ConvergenceError(f"Mie series tail {tail:.3e} exceeds {tail_tol:.1e}")
    d = np.asarray(wave.direction, dtype=float)
    center = np.asarray(center, dtype=float)
    theta_d = math.atan2(d[1], d[0])
    phase = wave.amplitude * np.exp(1j * kp * (d @ center)) * np.exp(-1j * n * theta_d)
    return MieSolution(float(a), center, M, an * phase, bn * phase, params, wave)


def _angles(sol, points):
    rel = np.atleast_2d(points) - sol.center[None, :]
    return np.hypot(rel[:, 0], rel[:, 1]), np.arctan2(rel[:, 1], rel[:, 0])


def mie_trace(sol, grid, rel_tol=1e-12):
    """Boundary traces ``(u, q)`` of the series on a grid lying on the circle.

    Raises
    ------
    ConfigError
        If a node lies off the circle by more than ``rel_tol * a``.
    """
    r, th = _angles(sol, grid.nodes)
    if np.max(np.abs(r - sol.radius)) > rel_tol * sol.radius:
        raise ConfigError("grid does not lie on the oracle circle")
    km = sol.params.k_minus
    J, dJ = _j_and_deriv(sol.order, km * sol.radius)
    E = np.exp(1j * np.outer(th, sol.orders))
    u = E @ (sol.b * J)
    q = (km / sol.params.eps_minus) * (E @ (sol.b * dJ))
    return u, q


def mie_field(sol, points):
    """Total field at arbitrary points (exterior or interior of the circle)."""
    r, th = _angles(sol, points)
    kp, km = sol.params.k_plus, sol.params.k_minus
    M = sol.order
    n = sol.orders
    d = np.asarray(sol.wave.direction, dtype=float)
    theta_d = math.atan2(d[1], d[0])
    out = np.empty(r.shape, dtype=complex)
    for idx, (ri, ti) in enumerate(zip(r, th)):
        e = np.exp(1j * n * ti)
        if ri < sol.radius:
            J = _j(M, km * ri)
            out[idx] = e @ (sol.b * J)
        else:
            J = _j(M, kp * ri)
            H, _ = _h_and_deriv(M, kp * ri)
            inc_phase = sol.wave.amplitude * np.exp(1j * kp * (d @ sol.center))
            inc = inc_phase * (1j ** (n % 4)) * np.exp(-1j * n * theta_d) * J
            out[idx] = e @ (inc + sol.a * H)
    return out
