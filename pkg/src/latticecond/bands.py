"""Band energies and momentum expectations over the symmetry k-grid."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from threadpoolctl import threadpool_limits

from .eigensolve import ConvergenceError, degenerate_clusters, lowest_eigenpairs
from .hamiltonian import basis_arrays, build
from .model import ModelParams

__all__ = [
    "BandData",
    "SolveError",
    "compute_bands",
    "compute_bands_many",
    "k_grid",
    "l_grid",
    "px_mean",
    "resolve_threads",
    "solve_kpoints",
]


class SolveError(RuntimeError):
    """An eigensolve failed; ``efield`` and ``k`` locate the failing point."""

    def __init__(self, message, efield=None, k=None):
        super().__init__(message)
        self.efield = efield
        self.k = k


def l_grid(params: ModelParams, drop_duplicate_edge: bool = False) -> np.ndarray:
    start = -params.N // 2 + (1 if drop_duplicate_edge else 0)
    return np.arange(start, params.N // 2 + 1)


def k_grid(params: ModelParams, drop_duplicate_edge: bool = False) -> np.ndarray:
    """Wavenumbers ``2*pi*l/L`` for ``l = -N/2 .. N/2`` (both zone edges included).

    With ``drop_duplicate_edge`` the ``l = -N/2`` point, which is a
    reciprocal-lattice image of ``l = N/2``, is left out.
    """
    return 2.0 * math.pi * l_grid(params, drop_duplicate_edge) / params.L


def px_mean(k: float, coeffs, params: ModelParams, atol: float = 1e-10) -> float:
    """``<p_x>_k = k + sum |c|^2 * 2*pi*j/L`` for one normalized coefficient vector."""
    c = np.asarray(coeffs, dtype=float)
    norm = np.dot(c, c)
    if abs(norm - 1.0) > atol:
        raise ValueError(f"coefficients not normalized: |c|^2 = {norm!r}")
    _, _, j = basis_arrays(params)
    return k + float(np.dot(c * c, 2.0 * math.pi * j / params.L))


@dataclass
class BandData:
    params: ModelParams
    lvalues: np.ndarray
    kvalues: np.ndarray
    energies: np.ndarray  # (M, nk)
    px_mean: np.ndarray  # (M, nk)
    y_mean: np.ndarray  # (M, nk)
    band_mean_energy: np.ndarray  # (M,)
    band_momentum_sum: np.ndarray  # (M,)

    @property
    def M(self) -> int:
        return self.energies.shape[0]


def _cluster_average(values, clusters):
    out = values.copy()
    for c in clusters:
        if len(c) > 1:
            out[c] = values[c].mean(axis=0)
    return out


def _solve_point(params, k, M, tol, method):
    """Energies, <p_x> and <y> of the ``M`` lowest states at one k."""
    H = build(params, k)
    # one extra state so a degenerate cluster at the top edge is seen whole
    extra = min(M + 1, H.dim)
    res = lowest_eigenpairs(H, extra, tol=tol, method=method if extra < H.dim - 1 else "dense")
    del H

    _, q, j = basis_arrays(params)
    weights = res.eigenvectors**2
    px = k + weights.T @ (2.0 * math.pi * j / params.L)
    y = weights.T @ (q * params.y_step)
    # expectations inside a degenerate cluster depend on the arbitrary basis
    # the solver picked; the cluster average does not
    clusters = degenerate_clusters(res.eigenvalues)
    px = _cluster_average(px, clusters)
    y = _cluster_average(y, clusters)
    return res.eigenvalues[:M], px[:M], y[:M]


def resolve_threads(threads) -> int:
    if threads in (None, "auto"):
        return os.cpu_count() or 1
    threads = int(threads)
    if threads < 1:
        raise ValueError("threads must be >= 1")
    return threads


def solve_kpoints(tasks, M, tol=1e-10, method="dense", threads=1):
    """Solve ``[(params, k), ...]`` concurrently; results come back in task order.

    BLAS is limited to one thread inside the workers so that every solve
    runs the same code path regardless of the pool size.
    """
    threads = resolve_threads(threads)

    def work(task):
        params, k = task
        try:
            return _solve_point(params, k, M, tol, method)
        except ConvergenceError as exc:
            raise SolveError(f"E={params.Efield}, k={k}: {exc}", efield=params.Efield, k=k) from exc

    with threadpool_limits(limits=1, user_api="blas"):
        if threads == 1:
            return [work(t) for t in tasks]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(work, tasks))


def _assemble(params, lvals, kvals, results) -> BandData:
    energies = np.stack([r[0] for r in results], axis=1)
    px = np.stack([r[1] for r in results], axis=1)
    y = np.stack([r[2] for r in results], axis=1)
    return BandData(
        params=params,
        lvalues=lvals,
        kvalues=kvals,
        energies=energies,
        px_mean=px,
        y_mean=y,
        band_mean_energy=energies.mean(axis=1),
        band_momentum_sum=px.sum(axis=1),
    )


def compute_bands(
    params: ModelParams,
    M: int,
    threads=1,
    tol: float = 1e-10,
    method: str = "dense",
    drop_duplicate_edge: bool = False,
) -> BandData:
    """Lowest ``M`` bands at every grid wavenumber, sorted by energy per k.

    ``band_momentum_sum`` is the sum of ``px_mean`` over the grid and
    ``band_mean_energy`` the unweighted mean energy of each band.
    """
    params.check()
    if M < 1:
        raise ValueError("M must be >= 1")
    lvals = l_grid(params, drop_duplicate_edge)
    kvals = k_grid(params, drop_duplicate_edge)
    results = solve_kpoints([(params, k) for k in kvals], M, tol, method, threads)
    return _assemble(params, lvals, kvals, results)


def compute_bands_many(params_list, M, threads=1, tol=1e-10, method="dense", drop_duplicate_edge=False):
    """:func:`compute_bands` for several parameter sets sharing one worker pool."""
    grids = []
    tasks = []
    for p in params_list:
        p.check()
        lv, kv = l_grid(p, drop_duplicate_edge), k_grid(p, drop_duplicate_edge)
        grids.append((p, lv, kv))
        tasks.extend((p, k) for k in kv)
    results = solve_kpoints(tasks, M, tol, method, threads)
    out, i = [], 0
    for p, lv, kv in grids:
        out.append(_assemble(p, lv, kv, results[i : i + kv.size]))
        i += kv.size
    return out
