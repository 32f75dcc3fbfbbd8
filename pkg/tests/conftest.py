import os
import sys

import numpy as np
import pytest
from threadpoolctl import threadpool_limits

sys.path.insert(0, os.path.dirname(__file__))

from helmfds.geometry import CurveSpec, build_tree, grid_layout, make_star_curve  # noqa: E402
from helmfds.kernels import WaveParams  # noqa: E402
from helmfds.formulations import BlockSystem  # noqa: E402
from helmfds.dense import dense_solve  # noqa: E402


@pytest.fixture(autouse=True, scope="session")
def _single_thread():
    """Run everything with one BLAS thread so results are reproducible."""
    with threadpool_limits(limits=1):
        yield


@pytest.fixture(scope="session")
def circle():
    return make_star_curve(CurveSpec(lobe_amplitude=0.0), 200)


@pytest.fixture(scope="session")
def star():
    return make_star_curve(CurveSpec(rotation=0.4), 200)


@pytest.fixture(scope="session")
def small_layout():
    """Four stars with few nodes, for fast structural tests."""
    grids = grid_layout(4, n=64)
    return grids, build_tree(grids)


@pytest.fixture(scope="session")
def layout16():
    grids = grid_layout(16, n=200)
    return grids, build_tree(grids)


@pytest.fixture(scope="session")
def params5():
    return WaveParams(5.0, 1.0, 5.0)


_DENSE_CACHE = {}


@pytest.fixture(scope="session")
def dense16(layout16):
    """Dense matrices and solutions of the m = 16 problem, computed once per key.

    ``dense16(form, omega, eps_minus)`` returns ``(system, report)`` where
    ``report`` is the :class:`~helmfds.dense.DenseSolveReport`. Matrices are
    not kept (each one takes 650 MB).
    """
    grids, _ = layout16

    def get(form, omega, eps_minus):
        key = (form, omega, eps_minus)
        if key not in _DENSE_CACHE:
            system = BlockSystem(grids, WaveParams(omega, 1.0, eps_minus), form)
            _DENSE_CACHE[key] = (system, dense_solve(system))
        return _DENSE_CACHE[key]

    return get


_FDS_CACHE = {}
_FDS_CACHE_SIZE = 4


@pytest.fixture(scope="session")
def fds16(layout16):
    """FDS factorizations of the m = 16, omega = 5, eps = (1, 5) problem.

    ``fds16(form, qr_tol)`` returns ``(system, factorization)``. Only the
    most recent few factorizations are kept to bound memory.
    """
    from helmfds.fds import fds_factor
    from helmfds.skeleton import CompressionConfig

    grids, tree = layout16

    def get(form, qr_tol):
        key = (form, qr_tol)
        if key not in _FDS_CACHE:
            while len(_FDS_CACHE) >= _FDS_CACHE_SIZE:
                _FDS_CACHE.pop(next(iter(_FDS_CACHE)))
            system = BlockSystem(grids, WaveParams(5.0, 1.0, 5.0), form)
            _FDS_CACHE[key] = (system, fds_factor(system, tree, CompressionConfig(qr_tol=qr_tol)))
        return _FDS_CACHE[key]

    return get


_FDS_SOLUTIONS = {}


@pytest.fixture(scope="session")
def fds16_solution(fds16):
    """``fds16_solution(form, qr_tol)`` -> (solution, compressed_size), cached."""
    from helmfds.fds import fds_solve

    def get(form, qr_tol):
        key = (form, qr_tol)
        if key not in _FDS_SOLUTIONS:
            system, fact = fds16(form, qr_tol)
            rep = fds_solve(fact, system.rhs())
            _FDS_SOLUTIONS[key] = (rep.solution, rep.compressed_size)
        return _FDS_SOLUTIONS[key]

    return get
