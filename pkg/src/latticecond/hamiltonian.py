"""Symmetry-adapted k-space Hamiltonian in the (n, q) plane-wave basis.

Basis functions are simultaneous eigenfunctions of ``p_x`` and ``y`` on the
``x p_y`` cell ``[-L/2, L/2] x [-lam*L/2, lam*L/2]``::

    phi_{j,q}(x, p_y) = exp(2*pi*i*j*x/L) * exp(-2*pi*i*q*p_y/(lam*L)) / (L*sqrt(lam))

with ``p_x = 2*pi*j/L``, ``y = 2*pi*q/(lam*L)`` and the momentum integer tied
to the cell index by ``j = N*n - q``.  Rows are flattened as
``row = (n + n_max)*Q + (q + q_max)``.

The closed-form elements are real.  :func:`quadrature_element` and
:func:`quadrature_matrix` evaluate the same elements by applying the operator
to the basis functions and integrating numerically; they share no code with
:func:`matrix_element` and :func:`build` and serve as the verification oracle.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import ModelParams

__all__ = [
    "BasisIndex",
    "HamiltonianMatrix",
    "ResourceError",
    "basis_arrays",
    "build",
    "dump_matrix",
    "f_kernel",
    "g_kernel",
    "load_matrix",
    "matrix_element",
    "quadrature_element",
    "quadrature_matrix",
]

PI2_6 = math.pi**2 / 6.0

_DUMP_MAGIC = b"LCH1"
_DUMP_HEADER = struct.Struct("<4sidi")


class ResourceError(MemoryError):
    """The dense matrix (or a build temporary) could not be allocated."""


@dataclass(frozen=True)
class BasisIndex:
    n: int
    q: int
    j: int
    row: int

    @classmethod
    def of(cls, params: ModelParams, n: int, q: int) -> "BasisIndex":
        if abs(n) > params.n_max or abs(q) > params.q_max:
            raise IndexError(
                f"(n={n}, q={q}) outside |n| <= {params.n_max}, |q| <= {params.q_max}"
            )
        row = (n + params.n_max) * params.Q + (q + params.q_max)
        return cls(n=n, q=q, j=params.N * n - q, row=row)

    @classmethod
    def from_row(cls, params: ModelParams, row: int) -> "BasisIndex":
        if not 0 <= row < params.dim:
            raise IndexError(f"row {row} outside 0..{params.dim - 1}")
        n, q = divmod(row, params.Q)
        return cls.of(params, n - params.n_max, q - params.q_max)


def basis_arrays(params: ModelParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return integer arrays ``(n, q, j)`` in row order."""
    n = np.repeat(np.arange(-params.n_max, params.n_max + 1), params.Q)
    q = np.tile(np.arange(-params.q_max, params.q_max + 1), params.J)
    return n, q, params.N * n - q


def f_kernel(n: int, n2: int) -> float:
    d = n - n2
    if d == 0:
        return PI2_6
    return (1.0 if d % 2 == 0 else -1.0) / (d * d)


def g_kernel(n: int, n2: int) -> float:
    d = n - n2
    if d == 0:
        return 0.0
    return (1.0 if d % 2 == 0 else -1.0) / d


def _diagonal_terms(params: ModelParams, k, q, j):
    # kinetic-x, spin-orbit y*(p_x + k), Uy cosine and field terms; works on
    # scalars and arrays with the same operation order
    L, a, lam, m = params.L, params.a, params.lam, params.m
    pk = 2.0 * math.pi * j / L + k
    kin = pk * pk / (2.0 * m)
    so = params.spin * (2.0 * math.pi * q / (m * L)) * pk
    uy = params.Uy * np.cos(4.0 * math.pi**2 * q / (a * lam * L))
    field = params.e * params.Efield * (2.0 * math.pi * q / (lam * L))
    return kin - so + uy - field


def _prefactor(params: ModelParams) -> float:
    return params.lam**2 * params.L**2 / (4.0 * math.pi**2 * params.m)


def matrix_element(params: ModelParams, k: float, r: BasisIndex, c: BasisIndex) -> float:
    """Closed-form ``<r| H_k |c>`` for the configured spin sector."""
    r = BasisIndex.of(params, r.n, r.q)
    c = BasisIndex.of(params, c.n, c.q)
    same_q = r.q == c.q
    same_j = r.j == c.j

    fq = f_kernel(r.q, c.q) if same_j else 0.0
    gg = g_kernel(r.q, c.q) * g_kernel(r.j, c.j)
    fj = f_kernel(r.j, c.j) if same_q else 0.0
    val = _prefactor(params) * (fq + params.spin * gg + fj)
    if same_q and abs(r.j - c.j) == params.N:
        val += params.Ux / 2.0
    if same_q and same_j:
        val += float(_diagonal_terms(params, k, r.q, r.j))
    return val


@dataclass
class HamiltonianMatrix:
    k: float
    spin: int
    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def _fill_rows(params, k, rows, q, j, out):
    """Evaluate the closed form for ``rows`` against every column into ``out``."""
    qr, jr = q[rows, None], j[rows, None]
    dq = qr - q[None, :]
    dj = jr - j[None, :]
    same_q = dq == 0
    same_j = dj == 0
    sq = 1.0 - 2.0 * (dq & 1)
    sj = 1.0 - 2.0 * (dj & 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        fq = np.where(same_j, np.where(same_q, PI2_6, sq / (dq * dq)), 0.0)
        gq = np.where(same_q, 0.0, sq / dq)
        gj = np.where(same_j, 0.0, sj / dj)
        fj = np.where(same_q, np.where(same_j, PI2_6, sj / (dj * dj)), 0.0)
    np.multiply(_prefactor(params), fq + params.spin * (gq * gj) + fj, out=out)
    out += np.where(same_q & (np.abs(dj) == params.N), params.Ux / 2.0, 0.0)


def build(params: ModelParams, k: float, block_rows: int | None = None) -> HamiltonianMatrix:
    """Assemble the full dense ``D x D`` matrix for wavenumber ``k``.

    Both triangles are evaluated from the element formula.  Rows are
    processed in blocks to bound the size of the temporaries.
    """
    params.check()
    D = params.dim
    try:
        H = np.empty((D, D))
    except MemoryError as exc:
        raise ResourceError(f"cannot allocate {D}x{D} float64 matrix ({8 * D * D} bytes)") from exc

    _, q, j = basis_arrays(params)
    if block_rows is None:
        block_rows = max(1, min(D, (1 << 22) // D))
    try:
        for start in range(0, D, block_rows):
            stop = min(start + block_rows, D)
            _fill_rows(params, k, slice(start, stop), q, j, H[start:stop])
    except MemoryError as exc:
        raise ResourceError(f"out of memory filling {D}x{D} matrix in blocks of {block_rows} rows") from exc

    H[np.diag_indices(D)] += _diagonal_terms(params, k, q, j)
    return HamiltonianMatrix(k=float(k), spin=params.spin, entries=H)


# -- quadrature oracle ------------------------------------------------------


def _trapezoid_weights(n: int, length: float) -> np.ndarray:
    w = np.full(n + 1, length / n)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def _cell_grid(params: ModelParams, n: int):
    L, lam = params.L, params.lam
    x = np.linspace(-L / 2, L / 2, n + 1)
    p = np.linspace(-lam * L / 2, lam * L / 2, n + 1)
    return x, p, _trapezoid_weights(n, L), _trapezoid_weights(n, lam * L)


def _multiplicative_part(params: ModelParams, X, P):
    """Terms of ``H_k`` that act on a basis function by multiplication."""
    s, lam, m = params.spin, params.lam, params.m
    return (P + s * lam * X) ** 2 / (2 * m) + params.Ux * np.cos(2 * math.pi * X / params.a)


def _eigenvalue_part(params: ModelParams, k, q_c, j_c):
    """Terms of ``H_k`` in which ``p_x`` and ``y`` act on ``phi_c`` as eigenvalues."""
    L, lam, m, s = params.L, params.lam, params.m, params.spin
    px = 2.0 * math.pi * j_c / L
    y = 2.0 * math.pi * q_c / (lam * L)
    return (
        (px + k) ** 2 / (2 * m)
        - (lam / m) * s * y * (px + k)
        + params.Uy * np.cos(2 * math.pi * y / params.a)
        - params.e * params.Efield * y
    )


def _phi(params: ModelParams, x, p, q, j):
    L, lam = params.L, params.lam
    return np.exp(2j * math.pi * j * x / L) * np.exp(-2j * math.pi * q * p / (lam * L)) / (L * math.sqrt(lam))


def _element_trapezoid(params, k, r, c, n):
    x, p, wx, wp = _cell_grid(params, n)
    X, P = np.meshgrid(x, p, indexing="ij")
    applied = (_multiplicative_part(params, X, P) + _eigenvalue_part(params, k, c.q, c.j)) * _phi(
        params, X, P, c.q, c.j
    )
    return wx @ (np.conj(_phi(params, X, P, r.q, r.j)) * applied) @ wp


def _richardson(levels: list) -> list:
    """Romberg table diagonal from trapezoid values at successive halvings."""
    table = [levels[0]]
    rows = [[levels[0]]]
    for i in range(1, len(levels)):
        row = [levels[i]]
        for m in range(1, i + 1):
            row.append(row[m - 1] + (row[m - 1] - rows[i - 1][m - 1]) / (4**m - 1))
        rows.append(row)
        table.append(row[-1])
    return table


def _resolving_grid(grid_points: int, max_freq: int) -> int:
    # coarse grids that alias the highest frequency pollute the Romberg
    # table, so start from one with at least 4 points per period
    n = grid_points
    while n < 4 * max_freq:
        n *= 2
    return n


def _romberg(evaluate, grid_points, rtol, max_points):
    if grid_points < 32:
        raise ValueError("grid_points must be >= 32")
    levels, n = [], grid_points
    while n <= max_points:
        levels.append(evaluate(n))
        if len(levels) >= 2:
            diag = _richardson(levels)
            err = np.max(np.abs(diag[-1] - diag[-2]) / (1.0 + np.abs(diag[-1])))
            if err <= rtol:
                return diag[-1], n
        n *= 2
    raise RuntimeError(f"quadrature not converged to rtol={rtol} with {max_points} grid points")


def quadrature_element(
    params: ModelParams,
    k: float,
    r: BasisIndex,
    c: BasisIndex,
    grid_points: int = 64,
    rtol: float = 1e-7,
    max_points: int = 4096,
    full_output: bool = False,
):
    """Numerically integrate ``<phi_r| H_k |phi_c>`` over the ``x p_y`` cell.

    Tensor-product trapezoid rule, doubled from ``grid_points`` until two
    successive Richardson-extrapolated values agree within ``rtol``.  The
    extrapolation is needed because multiplication by ``x`` and ``p_y`` is
    not smooth across the cell boundary, so the plain rule converges only
    as ``h**2``.

    Returns the real part, or ``(complex value, grid points used)`` with
    ``full_output=True``.
    """
    r = BasisIndex.of(params, r.n, r.q)
    c = BasisIndex.of(params, c.n, c.q)
    start = _resolving_grid(grid_points, max(abs(r.j - c.j) + params.N, abs(r.q - c.q)))
    value, n = _romberg(lambda n: _element_trapezoid(params, k, r, c, n), start, rtol, max_points)
    if full_output:
        return complex(value), n
    return float(value.real)


def _matrix_trapezoid(params, k, q, j, n):
    x, p, wx, wp = _cell_grid(params, n)
    L, lam = params.L, params.lam
    norm = 1.0 / (L * L * lam)

    # integrals of conj(phi_r) * F(x, p_y) * phi_c only depend on
    # (j_c - j_r, q_c - q_r), so tabulate them once per grid
    X, P = np.meshgrid(x, p, indexing="ij")
    dj = np.arange(j.min() - j.max(), j.max() - j.min() + 1)
    dq = np.arange(q.min() - q.max(), q.max() - q.min() + 1)
    Ex = np.exp(2j * math.pi * np.outer(dj, x) / L) * wx
    Ep = np.exp(-2j * math.pi * np.outer(dq, p) / (lam * L)) * wp
    mult = Ex @ _multiplicative_part(params, X, P) @ Ep.T * norm
    overlap = np.outer(Ex.sum(axis=1), Ep.sum(axis=1)) * norm

    ij = j[None, :] - j[:, None] - dj[0]
    iq = q[None, :] - q[:, None] - dq[0]
    eig = _eigenvalue_part(params, k, q, j)
    return mult[ij, iq] + overlap[ij, iq] * eig[None, :]


def quadrature_matrix(
    params: ModelParams,
    k: float,
    grid_points: int = 64,
    rtol: float = 1e-7,
    max_points: int = 4096,
) -> tuple[np.ndarray, int]:
    """All ``D x D`` elements by the same quadrature as :func:`quadrature_element`.

    Returns ``(complex matrix, grid points used)``; convergence is judged on
    the largest element change.  Intended for desk-scale checks only.
    """
    if grid_points < 32:
        raise ValueError("grid_points must be >= 32")
    _, q, j = basis_arrays(params)
    start = _resolving_grid(grid_points, max(int(np.ptp(j)) + params.N, int(np.ptp(q))))
    return _romberg(lambda n: _matrix_trapezoid(params, k, q, j, n), start, rtol, max_points)


# -- binary dump ------------------------------------------------------------


def dump_matrix(H: HamiltonianMatrix, path) -> None:
    """Write ``H`` as a 20-byte header followed by row-major little-endian doubles.

    Header layout: magic ``b"LCH1"``, dim (int32), k (float64), spin (int32).
    """
    with open(path, "wb") as fh:
        fh.write(_DUMP_HEADER.pack(_DUMP_MAGIC, H.dim, H.k, H.spin))
        fh.write(np.ascontiguousarray(H.entries, dtype="<f8").tobytes())


def load_matrix(path) -> HamiltonianMatrix:
    data = Path(path).read_bytes()
    magic, dim, k, spin = _DUMP_HEADER.unpack_from(data)
    if magic != _DUMP_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    body = np.frombuffer(data, dtype="<f8", offset=_DUMP_HEADER.size)
    if body.size != dim * dim:
        raise ValueError(f"{path}: expected {dim * dim} values, found {body.size}")
    return HamiltonianMatrix(k=k, spin=spin, entries=body.reshape(dim, dim).astype(np.float64))
