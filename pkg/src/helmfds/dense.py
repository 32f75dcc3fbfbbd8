"""Dense reference solver: assemble the full matrix and LU-factor it."""

from __future__ import annotations

import os
import time
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DimensionError, FactorizationError, SizeCapExceeded

__all__ = ["DenseSolveReport", "DEFAULT_SIZE_CAP", "dense_solve", "lu_factor_checked",
           "relative_error", "available_memory", "total_memory", "write_solution"]

#: Default cap on the number of unknowns of a dense solve.
DEFAULT_SIZE_CAP = 40_000


@dataclass
class DenseSolveReport:
    """Result of :func:`dense_solve`.

    Attributes
    ----------
    solution : ndarray
    assembly_time, factor_time, solve_time : float
        Wall-clock seconds.
    residual : float
        ``||A phi - f|| / ||f||`` (0 when ``f = 0``).
    """

    solution: np.ndarray
    assembly_time: float
    factor_time: float
    solve_time: float
    residual: float

    @property
    def total_time(self):
        return self.assembly_time + self.factor_time + self.solve_time


def available_memory():
    """Physical memory currently available, in bytes (``None`` if unknown).

    Uses the kernel's ``MemAvailable`` estimate (free plus reclaimable page
    cache) where it exists, and the free page count otherwise.
    """
    try:
        with open("/proc/meminfo") as fh:
            for line in fh:
                if line.startswith("MemAvailable:"):
                    return int(line.split()[1]) * 1024
    except (OSError, ValueError, IndexError):
        pass
    try:
        return os.sysconf("SC_AVPHYS_PAGES") * os.sysconf("SC_PAGE_SIZE")
    except (ValueError, OSError, AttributeError):
        return None


def total_memory():
    """Installed physical memory in bytes (``None`` if unknown)."""
    try:
        return os.sysconf("SC_PHYS_PAGES") * os.sysconf("SC_PAGE_SIZE")
    except (ValueError, OSError, AttributeError):
        return None


def check_dense_size(N, size_cap=DEFAULT_SIZE_CAP, memory_fraction=0.8):
    """Raise :class:`SizeCapExceeded` if an ``N x N`` complex solve is too large.

    Both the configured unknown cap and the memory currently available
    (two complex matrices of size ``N^2``) are enforced.
    """
    if N > size_cap:
        raise SizeCapExceeded(f"{N} unknowns exceed the dense cap of {size_cap}")
    avail = available_memory()
    need = 2 * 16 * N * N
    if avail is not None and need > memory_fraction * avail:
        raise SizeCapExceeded(
            f"dense solve with {N} unknowns needs ~{need / 2**30:.1f} GiB, "
            f"only {avail / 2**30:.1f} GiB available")


def lu_factor_checked(A, overwrite_a=False):
    """Partially pivoted LU that reports an exactly zero pivot."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A, overwrite_a=overwrite_a, check_finite=False)
    d = np.abs(np.diagonal(lu))
    bad = np.flatnonzero(~(d > 0))
    if bad.size:
        raise FactorizationError(f"zero pivot at index {bad[0]}", int(bad[0]))
    return lu, piv


def dense_solve(system, rhs=None, size_cap=DEFAULT_SIZE_CAP):
    """Assemble, factor and solve a :class:`~helmfds.formulations.BlockSystem`.

    Parameters
    ----------
    system : BlockSystem
    rhs : ndarray, optional
        Right-hand side; defaults to the plane wave ``system.rhs()``.
    size_cap : int
        Maximum number of unknowns.

    Returns
    -------
    DenseSolveReport
    """
    N = system.size
    check_dense_size(N, size_cap)
    t0 = time.perf_counter()
    A = system.dense_matrix()
    f = system.rhs() if rhs is None else np.asarray(rhs, dtype=complex)
    if f.shape[0] != N:
        raise DimensionError(f"rhs length {f.shape[0]} != {N}")
    t1 = time.perf_counter()
    lu = lu_factor_checked(A)
    t2 = time.perf_counter()
    phi = sla.lu_solve(lu, f, check_finite=False)
    t3 = time.perf_counter()
    # The factorization used a copy, so A is still the assembled matrix.
    fn = np.linalg.norm(f)
    res = float(np.linalg.norm(A @ phi - f) / fn) if fn > 0 else float(np.linalg.norm(A @ phi))
    return DenseSolveReport(phi, t1 - t0, t2 - t1, t3 - t2, res)


def relative_error(phi, ref):
    """Relative 2-norm error ``||phi - ref|| / ||ref||``."""
    phi = np.asarray(phi)
    ref = np.asarray(ref)
    if phi.shape != ref.shape:
        raise DimensionError(f"shape mismatch {phi.shape} vs {ref.shape}")
    nr = np.linalg.norm(ref)
    if nr == 0:
        raise ZeroDivisionError("reference vector has zero norm")
    return float(np.linalg.norm(phi - ref) / nr)


def write_solution(path, phi, metadata):
    """Write ``phi`` as little-endian interleaved doubles plus a JSON sidecar."""
    import json

    np.asarray(phi, dtype="<c16").tofile(path)
    with open(str(path) + ".json", "w") as fh:
        json.dump(dict(metadata, length=int(np.asarray(phi).size), dtype="complex128-le"),
                  fh, indent=2, sort_keys=True)
