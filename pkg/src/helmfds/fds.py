"""Multi-level recursive-skeletonization direct solver.

Factorization (upward): every level with at least two cells is
compressed, so the top system couples the two children of the root. A
leaf uses its assembled diagonal block as ``A_tt``; a parent
with children ``c1, c2`` uses

.. code-block:: text

    A_tt = [[Atilde_c1,       A(S_c1, S_c2)],
            [A(S_c2, S_c1),   Atilde_c2    ]]

over the union of its children's skeletons, where the coupling blocks are
re-evaluated from the kernels. The compressed system of the last
compressed level (``Atilde`` on the diagonal, skeleton sub-blocks off it)
is factored densely.

Solve: the upward pass forms ``y = A_tt^{-1} f_t`` and
``g = Atilde R y`` per cell, the parents' right-hand sides being the
concatenated ``g`` of their children. After the top solve, the downward
pass recovers ``phi_t = y + A_tt^{-1} L (Atilde psi_t - g)``.

The LU factors of the diagonal blocks dominate the stored data. When the
available physical memory drops below a fraction of the installed memory,
the factors of finished levels are moved to memory-mapped temporary files
(:class:`FactorSpill`). The values are unchanged, so results do not
depend on whether that happened.
"""

from __future__ import annotations

import math
import os
import tempfile
import time
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla

from .dense import available_memory, lu_factor_checked, total_memory
from .errors import DimensionError
from .geometry import build_tree
from .skeleton import (CompressionConfig, SampleReducer, make_proxy, proxy_blocks, proxy_count,
                       skeletonize_sample)

__all__ = ["FactorSpill", "FdsFactorization", "FdsReport", "fds_factor", "fds_solve", "compressed_size_of",
           "leaf_projections"]


@dataclass
class FdsFactorization:
    """Factorization produced by :func:`fds_factor`.

    Attributes
    ----------
    system : BlockSystem
    tree : CellTree
    config : CompressionConfig
    levels : list of list of SkeletonFactorization
        ``levels[l]`` holds the compressed cells of tree level ``l``.
    top_dofs : list of ndarray
        Global DOFs of each top-level block (skeletons of the last
        compressed level, or all DOFs when nothing was compressed).
    top_lu : tuple
        LU factors of the top-level compressed matrix.
    compressed_size : int
    times : dict
        ``assembly`` (kernel evaluation) and ``compression`` seconds and
        the top factorization time ``top_factor``.
    stats : list of dict
        Per-cell ``level, cell_id, n_hat, k_hat, seconds`` records.
    spill : FactorSpill or None
        Owner of the files backing spilled factors, if any.
    """

    system: object
    tree: object
    config: CompressionConfig
    levels: list
    top_dofs: list
    top_lu: tuple
    compressed_size: int
    times: dict = field(default_factory=dict)
    stats: list = field(default_factory=list)
    spill: object = None

    def per_level(self):
        """Summary ``[{level, cells, sum_khat, max_khat}]`` of each compressed level."""
        out = []
        for lev, facts in enumerate(self.levels):
            ks = [f.k_hat for f in facts]
            out.append({"level": lev, "cells": len(ks), "sum_khat": int(sum(ks)),
                        "max_khat": int(max(ks)), "sum_nhat": int(sum(f.n_hat for f in facts))})
        return out


@dataclass
class FdsReport:
    """Solution and bookkeeping of :func:`fds_solve`."""

    solution: np.ndarray
    compressed_size: int
    times: dict
    per_level: list


class FactorSpill:
    """Disk-backed storage for LU factors of finished levels.

    Each array is copied into its own ``.npy`` file in a private temporary
    directory and replaced by a read-only memory map of it. File pages can
    be evicted by the kernel, which bounds the resident memory of large
    factorizations. The directory is removed with this object.

    Parameters
    ----------
    min_free_fraction : float
        Spilling starts once available memory falls below this fraction
        of the installed memory.
    """

    def __init__(self, min_free_fraction=0.5):
        self.min_free_fraction = min_free_fraction
        self._dir = None
        self.count = 0
        self.nbytes = 0

    def needed(self):
        """Whether available memory is below the threshold."""
        avail, total = available_memory(), total_memory()
        return avail is not None and total is not None and avail < self.min_free_fraction * total

    def store(self, arr):
        """Memory-mapped, read-only copy of ``arr`` backed by a new file."""
        if self._dir is None:
            self._dir = tempfile.TemporaryDirectory(prefix="helmfds-factors-")
        path = os.path.join(self._dir.name, f"{self.count}.npy")
        fortran = bool(arr.flags.f_contiguous and not arr.flags.c_contiguous)
        mm = np.lib.format.open_memmap(path, mode="w+", dtype=arr.dtype, shape=arr.shape,
                                       fortran_order=fortran)
        mm[...] = arr
        mm.flush()
        del mm
        self.count += 1
        self.nbytes += arr.nbytes
        return np.load(path, mmap_mode="r")

    def spill_levels(self, levels):
        """Move every in-memory LU factor of ``levels`` to disk."""
        for facts in levels:
            for f in facts:
                lu, piv = f.lu
                if not isinstance(lu, np.memmap):
                    f.lu = (self.store(lu), piv)


def compressed_size_of(fact):
    """Size of the top-level compressed system."""
    return fact.compressed_size


def fds_factor(system, tree=None, config=None, rules=None):
    """Build the multi-level factorization of a block system.

    Parameters
    ----------
    system : BlockSystem
    tree : CellTree, optional
        Defaults to :func:`~helmfds.geometry.build_tree` of the layout.
    config : CompressionConfig, optional
    rules : Rules, optional
        Off-diagonal rules; defaults to those of ``system``.

    Returns
    -------
    FdsFactorization

    Raises
    ------
    SingularProjection
        If a cell's ``R A^{-1} L`` cannot be inverted.
    """
    config = CompressionConfig() if config is None else config
    tree = build_tree(system.grids) if tree is None else tree
    rules = system.rules if rules is None else rules
    if rules is not system.rules:
        system = _with_rules(system, rules)
    t_start = time.perf_counter()
    ctx = _Context(system, tree, config)
    spill = FactorSpill()
    levels = []
    stats = []
    prev = None
    lev = 0
    t_asm = 0.0
    while len(tree.levels[lev]) >= 2:
        facts = []
        for ci in range(len(tree.levels[lev])):
            fact, ta = ctx.compress(lev, ci, prev)
            t_asm += ta
            facts.append(fact)
            stats.append({"level": lev, "cell_id": ci, "n_hat": fact.n_hat,
                          "k_hat": fact.k_hat, "seconds": fact.seconds})
        levels.append(facts)
        prev = facts
        lev += 1
        if spill.needed():
            spill.spill_levels(levels)

    ta = time.perf_counter()
    if not levels:
        top_dofs = [np.arange(system.size)]
        top = system.dense_matrix()
    else:
        top_dofs = [f.skel_dofs for f in prev]
        sizes = [d.size for d in top_dofs]
        offs = np.concatenate([[0], np.cumsum(sizes)])
        top = np.zeros((offs[-1], offs[-1]), dtype=complex)
        for i, fi in enumerate(prev):
            for j, fj in enumerate(prev):
                blk = fi.Atilde if i == j else system.offdiag(fi.skel_dofs, fj.skel_dofs)
                top[offs[i]:offs[i + 1], offs[j]:offs[j + 1]] = blk
    t_top_asm = time.perf_counter() - ta
    t_asm += t_top_asm
    tf = time.perf_counter()
    top_lu = lu_factor_checked(top)
    t_top = time.perf_counter() - tf
    total = time.perf_counter() - t_start
    times = {"assembly": t_asm, "compression": total - t_asm - t_top, "top_factor": t_top}
    return FdsFactorization(system, tree, config, levels, top_dofs, top_lu,
                            int(sum(d.size for d in top_dofs)), times, stats,
                            spill if spill.count else None)


class _Context:
    """Geometry lookups shared by the cell compressions of one factorization."""

    def __init__(self, system, tree, config):
        self.system = system
        self.tree = tree
        self.config = config
        self.centers = np.array([g.center for g in system.grids])
        self.radii = np.array([g.radius for g in system.grids])
        leaf_order = np.array([c.inclusions[0] for c in tree.leaves])
        self.leaf_pos = np.empty(system.m, dtype=np.intp)
        self.leaf_pos[leaf_order] = np.arange(system.m)
        self.k_max = max(system.params.k(s) for s in system.rules.sides)

    def dofs(self, lev, ci, prev):
        cell = self.tree.levels[lev][ci]
        if lev == 0:
            return self.system.block_dofs(cell.inclusions[0])
        return np.concatenate([prev[ch].skel_dofs for ch in cell.children])

    def compress(self, lev, ci, prev, config=None):
        """Compress cell ``ci`` of level ``lev``; returns ``(fact, assembly seconds)``."""
        system, config = self.system, self.config if config is None else config
        cell = self.tree.levels[lev][ci]
        tc = time.perf_counter()
        if lev == 0:
            A_tt = system.diag_block(cell.inclusions[0])
        else:
            c1, c2 = (prev[ch] for ch in cell.children)
            S12 = system.offdiag(c1.skel_dofs, c2.skel_dofs)
            S21 = system.offdiag(c2.skel_dofs, c1.skel_dofs)
            A_tt = np.block([[c1.Atilde, S12], [S21, c2.Atilde]])
        # The near sample is the tree's near list plus every cell owning an
        # inclusion that reaches into the proxy disc, so that the proxy
        # circle only has to represent well-separated geometry.
        rho = config.proxy_ratio * cell.radius
        hits = (np.hypot(*(self.centers - cell.center).T) - self.radii) < rho
        extra = set((self.leaf_pos[hits] >> lev).tolist()) - {ci}
        near = sorted(set(cell.near) | extra)
        dofs = self.dofs(lev, ci, prev)
        if near:
            J = np.concatenate([self.dofs(lev, v, prev) for v in near])
        else:
            J = np.empty(0, np.intp)
        proxy = make_proxy(cell.center, rho, proxy_count(rho, self.k_max, config),
                           system.rules.sides)
        # The stacked sample [A(J, I); outgoing; A(I, J)^T; incoming^T] is
        # filled in place one piece at a time: at the upper levels the near
        # blocks dominate the memory footprint, and a sample beyond the
        # reducer's budget is folded into its triangular factor as it grows.
        nj, n_px = J.size, 2 * proxy.count * len(proxy.sides)
        red = SampleReducer(dofs.size, 2 * (nj + n_px))
        for a, b in red.slices(nj):
            system.offdiag(J[a:b], dofs, out=red.rows(b - a))
        out_blk, in_blk = proxy_blocks(system, dofs, proxy)
        red.append(out_blk)
        live = np.any(in_blk != 0, axis=1)
        for a, b in red.slices(nj):
            piece = red.rows(b - a)
            system.offdiag(dofs, J[a:b], out=piece.T)
            live |= np.any(piece != 0, axis=0)
        red.append(in_blk.T)
        del out_blk, in_blk
        Y, dead = red.result(), ~live
        t_asm = time.perf_counter() - tc
        fact = skeletonize_sample((lev, ci), dofs, A_tt, Y, dead, config)
        fact.seconds = time.perf_counter() - tc
        return fact, t_asm


def leaf_projections(system, tree=None, config=None, rules=None):
    """Compress every leaf without rejecting singular projections.

    Used to report the condition estimate of ``R A^{-1} L`` on each leaf
    (for instance for a formulation known to make it singular) instead of
    stopping at the first failing cell.

    Returns
    -------
    list of SkeletonFactorization
        One per leaf, in tree order. ``Atilde`` may be meaningless when
        ``cond`` is huge.
    """
    config = CompressionConfig() if config is None else config
    tree = build_tree(system.grids) if tree is None else tree
    if rules is not None and rules is not system.rules:
        system = _with_rules(system, rules)
    if len(tree.leaves) < 2:
        return []
    ctx = _Context(system, tree, config)
    lenient = replace(config, cond_limit=math.inf)
    return [ctx.compress(0, ci, None, lenient)[0] for ci in range(len(tree.leaves))]


def _with_rules(system, rules):
    from .formulations import BlockSystem

    return BlockSystem(system.grids, system.params, system.form, offdiag=rules)


def fds_solve(fact, f):
    """Solve ``A phi = f`` with a factorization.

    Parameters
    ----------
    fact : FdsFactorization
    f : ndarray, shape (N,) or (N, r)

    Returns
    -------
    FdsReport
    """
    f = np.asarray(f, dtype=complex)
    N = fact.system.size
    if f.ndim not in (1, 2) or f.shape[0] != N:
        raise DimensionError(f"right-hand side must have leading dimension {N}, got {f.shape}")
    t0 = time.perf_counter()
    ys, gs = [], []
    prev_g = None
    for lev, facts in enumerate(fact.levels):
        ly, lg = [], []
        for ci, fa in enumerate(facts):
            if lev == 0:
                ft = f[fa.dofs]
            else:
                cell = fact.tree.levels[lev][ci]
                ft = np.concatenate([prev_g[ch] for ch in cell.children])
            y = sla.lu_solve(fa.lu, ft, check_finite=False)
            g = fa.Atilde @ fa.restrict(y)
            ly.append(y)
            lg.append(g)
        ys.append(ly)
        gs.append(lg)
        prev_g = lg
    t1 = time.perf_counter()
    if fact.levels:
        rhs_top = np.concatenate(prev_g)
    else:
        rhs_top = f
    psi = sla.lu_solve(fact.top_lu, rhs_top, check_finite=False)
    t2 = time.perf_counter()
    if not fact.levels:
        phi = psi
    else:
        phi = np.zeros(f.shape, dtype=complex)
        sizes = [fa.k_hat for fa in fact.levels[-1]]
        offs = np.concatenate([[0], np.cumsum(sizes)])
        psis = [psi[offs[i]:offs[i + 1]] for i in range(len(sizes))]
        for lev in range(len(fact.levels) - 1, -1, -1):
            facts = fact.levels[lev]
            new = []
            for ci, fa in enumerate(facts):
                corr = fa.Atilde @ psis[ci] - gs[lev][ci]
                new.append(ys[lev][ci] + fa.solve_extend(corr))
            if lev == 0:
                for fa, v in zip(facts, new):
                    phi[fa.dofs] = v
            else:
                child_psis = [None] * len(fact.levels[lev - 1])
                for ci, cell in enumerate(fact.tree.levels[lev]):
                    o = 0
                    for ch in cell.children:
                        k = fact.levels[lev - 1][ch].k_hat
                        child_psis[ch] = new[ci][o:o + k]
                        o += k
                psis = child_psis
    t3 = time.perf_counter()
    times = dict(fact.times)
    times["top_solve"] = times.get("top_factor", 0.0) + (t2 - t1)
    times["recovery"] = (t1 - t0) + (t3 - t2)
    return FdsReport(phi, fact.compressed_size, times, fact.per_level())
