import math
import warnings

import numpy as np
import pytest

from latticecond.eigensolve import (
    ConvergenceError,
    DegeneracyWarning,
    degenerate_clusters,
    lowest_eigenpairs,
)
from latticecond.hamiltonian import HamiltonianMatrix, build
from latticecond.model import ModelParams


def wrap(a, k=0.0):
    return HamiltonianMatrix(k=k, spin=1, entries=np.asarray(a, dtype=float))


def test_two_by_two():
    res = lowest_eigenpairs(wrap([[0, 1], [1, 0]]), 2)
    np.testing.assert_allclose(res.eigenvalues, [-1, 1], atol=1e-14)
    np.testing.assert_allclose(res.eigenvectors.T @ res.eigenvectors, np.eye(2), atol=1e-14)


def test_diagonal_case():
    res = lowest_eigenpairs(wrap(np.diag([3.0, 1.0, 2.0])), 2)
    np.testing.assert_allclose(res.eigenvalues, [1, 2])
    np.testing.assert_allclose(np.abs(res.eigenvectors), [[0, 0], [1, 0], [0, 1]])


def test_lanczos_matches_dense():
    H = build(ModelParams(lam=1, Ux=10, Uy=10, N=2, Q=5, J=5), 0.3)
    dense = lowest_eigenpairs(H, 3)
    lanczos = lowest_eigenpairs(H, 3, method="lanczos")
    np.testing.assert_allclose(lanczos.eigenvalues, dense.eigenvalues, rtol=0, atol=1e-8)


def test_residual_and_orthonormality_contract():
    H = build(ModelParams(lam=1, Ux=100, Uy=100, N=4, Q=9, J=9, Efield=0.5), 0.1)
    res = lowest_eigenpairs(H, 8)
    assert np.all(np.diff(res.eigenvalues) >= 0)
    V = res.eigenvectors
    assert np.abs(V.T @ V - np.eye(8)).max() <= 1e-10
    scale = np.abs(H.entries).sum(axis=1).max()
    assert res.residual_norms.max() <= 1e-10 * scale


def test_permutation_invariance():
    H = build(ModelParams(lam=1, Ux=10, Uy=10, N=2, Q=5, J=5, Efield=0.3), 0.7)
    perm = np.random.default_rng(5).permutation(H.dim)
    shuffled = wrap(H.entries[np.ix_(perm, perm)], H.k)
    a = lowest_eigenpairs(H, 6).eigenvalues
    b = lowest_eigenpairs(shuffled, 6).eigenvalues
    assert np.abs(a - b).max() <= 1e-10 * max(1, np.abs(a).max())


def test_reflected_k_spectrum():
    p = ModelParams(lam=1, Ux=30, Uy=30, N=4, Q=9, J=9)
    k = 2 * math.pi / p.L
    a = lowest_eigenpairs(build(p, k), 6).eigenvalues
    b = lowest_eigenpairs(build(p, -k), 6).eigenvalues
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-8)


def test_bad_arguments():
    H = wrap(np.eye(3))
    with pytest.raises(ValueError):
        lowest_eigenpairs(H, 0)
    with pytest.raises(ValueError):
        lowest_eigenpairs(H, 4)
    with pytest.raises(ValueError):
        lowest_eigenpairs(H, 1, tol=0)
    with pytest.raises(ValueError):
        lowest_eigenpairs(H, 1, method="qr")
    with pytest.raises(ValueError):
        lowest_eigenpairs(H, 2, method="lanczos")


def test_lanczos_nonconvergence_reports():
    A = np.diag(np.linspace(0, 1, 200)) + 1e-3 * np.random.default_rng(0).standard_normal((200, 200))
    A = (A + A.T) / 2
    with pytest.raises(ConvergenceError) as info:
        lowest_eigenpairs(wrap(A), 5, method="lanczos", maxiter=2)
    assert info.value.iterations == 2
    assert info.value.best_residual is not None


def test_degenerate_warning_and_clusters():
    with pytest.warns(DegeneracyWarning):
        lowest_eigenpairs(wrap(np.diag([1.0, 1.0, 2.0])), 3)
    assert degenerate_clusters([1.0, 1.0 + 1e-12, 2.0, 3.0, 3.0]) == [[0, 1], [2], [3, 4]]
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        lowest_eigenpairs(wrap(np.diag([1.0, 2.0])), 2)
