"""Lowest eigenpairs of the real symmetric k-space Hamiltonian."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .hamiltonian import HamiltonianMatrix

__all__ = [
    "ConvergenceError",
    "DegeneracyWarning",
    "EigenResult",
    "degenerate_clusters",
    "lowest_eigenpairs",
]

DEGENERACY_TOL = 1e-9


class ConvergenceError(RuntimeError):
    def __init__(self, message, iterations=None, best_residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.best_residual = best_residual


class DegeneracyWarning(UserWarning):
    pass


@dataclass
class EigenResult:
    k: float
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # shape (D, M), columns are states
    residual_norms: np.ndarray

    @property
    def M(self) -> int:
        return self.eigenvalues.size


def degenerate_clusters(eigenvalues, tol: float = DEGENERACY_TOL) -> list[list[int]]:
    """Group ascending eigenvalues whose neighbours differ by at most ``tol * max(1, |e|)``."""
    ev = np.asarray(eigenvalues)
    clusters = [[0]] if ev.size else []
    for i in range(1, ev.size):
        if ev[i] - ev[i - 1] <= tol * max(1.0, abs(ev[i])):
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return clusters


def _norm1(A, block=256):
    # symmetric, so the max column sum equals the max row sum; blocked to
    # avoid a full-size |A| temporary
    return max(np.abs(A[i : i + block]).sum(axis=1).max() for i in range(0, A.shape[0], block))


def _residuals(A, values, vectors):
    return np.linalg.norm(A @ vectors - vectors * values, axis=0)


def lowest_eigenpairs(
    H: HamiltonianMatrix,
    M: int,
    tol: float = 1e-10,
    method: str = "dense",
    maxiter: int | None = None,
) -> EigenResult:
    """Return the ``M`` algebraically smallest eigenpairs of ``H``.

    ``method="dense"`` uses LAPACK's symmetric solver restricted to the
    requested index range; ``method="lanczos"`` uses implicitly restarted
    Lanczos (ARPACK) and is meant for large ``D`` with small ``M``.  Both
    check every residual ``||H v - e v||`` against ``tol`` times an estimate
    of ``||H||`` and raise :class:`ConvergenceError` when it is exceeded.
    """
    A = H.entries
    D = H.dim
    if not 1 <= M <= D:
        raise ValueError(f"M must lie in 1..{D}, got {M}")
    if not tol > 0:
        raise ValueError("tol must be positive")

    if method == "dense":
        try:
            values, vectors = scipy.linalg.eigh(A, subset_by_index=[0, M - 1], check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"dense eigensolver failed at k={H.k}: {exc}") from exc
    elif method == "lanczos":
        if M >= D - 1:
            raise ValueError("lanczos needs M < D - 1; use method='dense'")
        # deterministic start vector keeps repeated runs bit-identical
        v0 = np.ones(D) / np.sqrt(D)
        try:
            values, vectors = scipy.sparse.linalg.eigsh(
                A, k=M, which="SA", tol=tol * 1e-2, v0=v0, maxiter=maxiter
            )
        except scipy.sparse.linalg.ArpackNoConvergence as exc:
            best = np.inf
            if exc.eigenvectors is not None and exc.eigenvectors.size:
                best = float(_residuals(A, exc.eigenvalues, exc.eigenvectors).max())
            raise ConvergenceError(
                f"Lanczos did not converge at k={H.k}", iterations=maxiter, best_residual=best
            ) from exc
        order = np.argsort(values, kind="stable")
        values, vectors = values[order], vectors[:, order]
    else:
        raise ValueError(f"unknown method {method!r}")

    res = _residuals(A, values, vectors)
    scale = max(_norm1(A), np.abs(values).max(), 1.0)
    if res.max() > tol * scale:
        raise ConvergenceError(
            f"residual {res.max():.3e} exceeds {tol:g} * ||H|| ({scale:.3e}) at k={H.k}",
            best_residual=float(res.max()),
        )
    if any(len(c) > 1 for c in degenerate_clusters(values)):
        warnings.warn(f"degenerate eigenvalues at k={H.k}", DegeneracyWarning, stacklevel=2)
    return EigenResult(k=H.k, eigenvalues=values, eigenvectors=vectors, residual_norms=res)
