"""Executable verification suites with a consolidated pass/fail report.

Each suite measures the largest deviation of one property and compares it
with a fixed tolerance.  Failures are report entries, never exceptions, so a
single run shows every problem at once.
"""

from __future__ import annotations

import csv
import io
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import conductivity, scattering
from .bands import compute_bands
from .eigensolve import DegeneracyWarning, degenerate_clusters, lowest_eigenpairs
from .hamiltonian import (
    BasisIndex,
    HamiltonianMatrix,
    basis_arrays,
    build,
    f_kernel,
    g_kernel,
    matrix_element,
    quadrature_element,
    quadrature_matrix,
)
from .model import ModelParams, derive_geometry

__all__ = ["Entry", "VerificationReport", "run_verification", "QUICK_MAX_DIM"]

QUICK_MAX_DIM = 1000
_ORACLE_FULL_DIM = 400
_HF_STEP = 1e-4


@dataclass(frozen=True)
class Entry:
    suite: str
    property: str
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        # NaN never passes
        return bool(self.deviation <= self.tolerance)


@dataclass
class VerificationReport:
    level: str
    dim: int
    entries: list[Entry] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def failures(self) -> list[Entry]:
        return [e for e in self.entries if not e.passed]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["suite", "property", "deviation", "tolerance", "pass"])
        for e in self.entries:
            w.writerow([e.suite, e.property, f"{e.deviation:.17g}", f"{e.tolerance:.17g}", int(e.passed)])
        return buf.getvalue()

    def __str__(self) -> str:
        lines = [f"verification ({self.level}, D={self.dim}): {'PASS' if self.passed else 'FAIL'}"]
        width = max((len(e.suite) + len(e.property) for e in self.entries), default=0) + 3
        for e in self.entries:
            name = f"{e.suite} / {e.property}"
            mark = "ok  " if e.passed else "FAIL"
            lines.append(f"  {mark} {name:<{width}} {e.deviation:.3e} <= {e.tolerance:.1e}")
        return "\n".join(lines)


def _max(values) -> float:
    arr = np.asarray(values, dtype=float)
    return float(np.max(arr)) if arr.size else 0.0


# -- model ------------------------------------------------------------------


def _suite_model(p: ModelParams):
    L, a, q_max = derive_geometry(p.Q, p.lam, p.N)
    yield "geometry q_max round trip", abs(p.lam * L * L / (4 * math.pi) - q_max) / q_max, 1e-12
    yield "a*N equals L", abs(a * p.N - L) / L, 4 * np.finfo(float).eps
    yield "D equals Q*J", float(p.dim != p.Q * p.J), 0.0


# -- hamiltonian ------------------------------------------------------------


def _suite_kernels(p: ModelParams):
    n = np.arange(-20, 21)
    f = np.array([[f_kernel(a, b) for b in n] for a in n])
    g = np.array([[g_kernel(a, b) for b in n] for a in n])
    yield "f symmetric", _max(np.abs(f - f.T)), 0.0
    yield "g antisymmetric", _max(np.abs(g + g.T)), 0.0
    yield "f diagonal is pi^2/6", _max(np.abs(np.diag(f) - math.pi**2 / 6)), 0.0


def _suite_matrix(p: ModelParams):
    ks = [0.0, 2 * math.pi / p.L]
    sym = lin = elem = 0.0
    _, q, _ = basis_arrays(p)
    rng = np.random.default_rng(0)
    for k in ks:
        H0 = build(p.with_efield(0.0), k).entries
        H1 = build(p.with_efield(1.0), k).entries
        sym = max(sym, _max(np.abs(H0 - H0.T)), _max(np.abs(H1 - H1.T)))
        diff = H1 - H0
        expected = -p.e * 2 * math.pi * q / (p.lam * p.L)
        off = diff - np.diag(np.diag(diff))
        scale = max(1.0, _max(np.abs(H0)))
        lin = max(lin, _max(np.abs(off)) / scale, _max(np.abs(np.diag(diff) - expected)))
        for r, c in rng.integers(0, p.dim, size=(50, 2)):
            ri, ci = BasisIndex.from_row(p, int(r)), BasisIndex.from_row(p, int(c))
            elem = max(elem, abs(matrix_element(p.with_efield(0.0), k, ri, ci) - H0[r, c]))
    yield "max|M - M^T|", sym, 0.0
    yield "E-linearity diagonal difference", lin, 1e-12
    yield "element formula equals build", elem, 0.0


def _suite_reflection_index(p: ModelParams):
    p0 = p.with_efield(0.0)
    k = 2 * math.pi / p.L
    Hp = build(p0, k).entries
    Hm = build(p0, -k).entries
    # (n, q) -> (-n, -q) reverses the flattened row order
    yield "index reflection (n,q,k) -> (-n,-q,-k)", _max(np.abs(Hp - Hm[::-1, ::-1])), 0.0


def _oracle_pairs(p: ModelParams):
    if p.dim <= _ORACLE_FULL_DIM:
        return None
    rng = np.random.default_rng(1)
    return rng.integers(0, p.dim, size=(64, 2))


def _suite_oracle(p: ModelParams):
    rel = imag = 0.0
    pairs = _oracle_pairs(p)
    for E in sorted({0.0, 1.0}):
        pe = p.with_efield(E)
        for k in (0.0, 2 * math.pi / p.L):
            H = build(pe, k).entries
            try:
                if pairs is None:
                    Z, _ = quadrature_matrix(pe, k)
                    rel = max(rel, _max(np.abs(H - Z.real) / (1 + np.abs(Z))))
                    imag = max(imag, _max(np.abs(Z.imag)))
                else:
                    for r, c in pairs:
                        z, _ = quadrature_element(
                            pe, k, BasisIndex.from_row(p, int(r)), BasisIndex.from_row(p, int(c)), full_output=True
                        )
                        rel = max(rel, abs(H[r, c] - z.real) / (1 + abs(z)))
                        imag = max(imag, abs(z.imag))
            except RuntimeError:
                rel = imag = math.inf
    yield "closed form vs quadrature", rel, 1e-6
    yield "quadrature imaginary part", imag, 1e-8


# -- eigensolve -------------------------------------------------------------


def _suite_eigensolve(p: ModelParams, M: int):
    H = build(p, 2 * math.pi / p.L)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegeneracyWarning)
        res = lowest_eigenpairs(H, M)
        V = res.eigenvectors
        yield "orthonormality", _max(np.abs(V.T @ V - np.eye(M))), 1e-10

        scale = max(1.0, _max(np.abs(res.eigenvalues)))
        perm = np.random.default_rng(2).permutation(H.dim)
        shuffled = HamiltonianMatrix(H.k, H.spin, np.ascontiguousarray(H.entries[np.ix_(perm, perm)]))
        res_p = lowest_eigenpairs(shuffled, M)
        yield "permutation invariance (relative)", _max(np.abs(res_p.eigenvalues - res.eigenvalues)) / scale, 1e-10

        if M < H.dim - 1:
            res_l = lowest_eigenpairs(H, M, method="lanczos")
            yield "lanczos vs dense", _max(np.abs(res_l.eigenvalues - res.eigenvalues)), 1e-8
    yield "ascending eigenvalues", float(np.any(np.diff(res.eigenvalues) < 0)), 0.0


# -- bands ------------------------------------------------------------------


def _suite_bands(p: ModelParams, M: int):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegeneracyWarning)
        b0 = compute_bands(p.with_efield(0.0), M)
        pe = p if p.Efield != 0 else p.with_efield(0.5)
        bm = compute_bands(pe.with_efield(pe.Efield - _HF_STEP), M)
        bc = compute_bands(pe, M)
        bp = compute_bands(pe.with_efield(pe.Efield + _HF_STEP), M)

    E, P = b0.energies, b0.px_mean
    yield "k <-> -k energy reflection at E=0", _max(np.abs(E - E[:, ::-1])), 1e-8
    yield "px antisymmetry at E=0", _max(np.abs(P + P[:, ::-1])), 1e-8
    typical = float(np.mean(np.abs(P)))
    pi_res = _max(np.abs(b0.band_momentum_sum)) / typical if typical > 0 else 0.0
    yield "Pi(E=0) residual / typical |px|", pi_res, 1e-4

    fd = (bp.energies - bm.energies) / (2 * _HF_STEP)
    hf = -pe.e * bc.y_mean
    # cluster averaging makes y_mean consistent with the averaged derivative
    fd = _cluster_mean_rows(bc.energies, fd)
    denom = np.maximum(np.abs(hf), pe.e * pe.y_step)
    yield "Hellmann-Feynman dE/dE vs -e<y>", _max(np.abs(fd - hf) / denom), 1e-4

    yield "energies ascending per k", float(np.any(np.diff(bc.energies, axis=0) < 0)), 0.0
    yield "Pi equals row sum of px", _max(np.abs(bc.band_momentum_sum - bc.px_mean.sum(axis=1))), 0.0


def _cluster_mean_rows(energies, values):
    out = values.copy()
    for col in range(energies.shape[1]):
        for c in degenerate_clusters(energies[:, col]):
            if len(c) > 1:
                out[c, col] = values[c, col].mean()
    return out


# -- conductivity -----------------------------------------------------------


def _suite_conductivity(p: ModelParams, M: int):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegeneracyWarning)
        b = compute_bands(p if p.Efield != 0 else p.with_efield(0.5), M)
    means = b.band_mean_energy
    # a Fermi level between band means n-1 and n includes exactly n bands
    between = np.concatenate([[means[0] - 1.0], 0.5 * (means[:-1] + means[1:])])
    add = 0.0
    for n in range(1, M):
        if means[n - 1] < means[n] and (n == 1 or means[n - 2] < means[n - 1]):
            lo = conductivity.sigma_xy(b, between[n - 1])
            hi = conductivity.sigma_xy(b, between[n])
            add = max(add, abs(hi - (lo + b.band_momentum_sum[n - 1])))
    yield "sigma additive over bands", add, 0.0

    grid = np.linspace(means[0] - 1.0, means[-1], 25)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", conductivity.FermiTieWarning)
        counts = [conductivity.bands_below(b, ef) for ef in grid]
    yield "monotone band filling", float(np.any(np.diff(counts) < 0)), 0.0

    u, levels = 13.78, np.repeat([0, 1, 2, 3, 2, 1], 8).astype(float)
    noise = np.random.default_rng(3).uniform(-0.005, 0.005, levels.size)
    curve = conductivity.ConductivityCurve(
        fermi_level=0.0,
        efield_values=np.arange(levels.size, dtype=float),
        sigma_over_alpha=levels * u * (1 + noise),
        n_bands_included=np.zeros(levels.size, dtype=int),
        band_means=np.zeros((levels.size, 1)),
        band_sums=np.zeros((levels.size, 1)),
    )
    fit = conductivity.estimate_sigma0([curve])
    yield "sigma0 recovery on noisy synthetic staircase", abs(fit.sigma0_over_alpha - u) / u, 0.02


# -- scattering -------------------------------------------------------------


def _suite_scattering(p: ModelParams):
    zero = max(
        abs(scattering.reflection_ratio(scattering.ScatteringInput(U, math.pi, 1.0))) for U in (1.0, 1e3, 1e6)
    )
    yield "|V/A| at theta=pi", zero, 1e-12
    big = abs(abs(scattering.reflection_ratio(scattering.ScatteringInput(1e6, 0.0, 1.0))) - 1.0)
    yield "|V/A| -> 1 for strong obstacle", big, 1e-6
    rows = np.array(scattering.theta_sweep(10.0, 1.0, count=100))
    yield "|V/A|^2 decreasing in theta", float(np.any(np.diff(rows[:, 3]) > 0)), 0.0
    yield "|V/A| below one", float(np.any(rows[:, 3] >= 1.0)), 0.0


def run_verification(params: ModelParams, level: str = "quick", M: int = 6) -> VerificationReport:
    """Run every suite on ``params`` and collect the results.

    ``quick`` includes the quadrature oracle and requires ``D <= 1000``;
    ``full`` skips the oracle and accepts any size.  Suites are run and
    reported in alphabetical order of their names.
    """
    if level not in ("quick", "full"):
        raise ValueError(f"level must be 'quick' or 'full', got {level!r}")
    params.check()
    if level == "quick" and params.dim > QUICK_MAX_DIM:
        raise ValueError(f"quick verification needs D <= {QUICK_MAX_DIM}, got {params.dim}")
    M = min(M, params.dim - 2)

    suites = {
        "bands": lambda: _suite_bands(params, M),
        "conductivity": lambda: _suite_conductivity(params, M),
        "eigensolve": lambda: _suite_eigensolve(params, M),
        "hamiltonian.kernels": lambda: _suite_kernels(params),
        "hamiltonian.matrix": lambda: _suite_matrix(params),
        "hamiltonian.reflection": lambda: _suite_reflection_index(params),
        "model": lambda: _suite_model(params),
        "scattering": lambda: _suite_scattering(params),
    }
    if level == "quick":
        suites["hamiltonian.oracle"] = lambda: _suite_oracle(params)

    report = VerificationReport(level=level, dim=params.dim)
    t0 = time.perf_counter()
    for name in sorted(suites):
        try:
            for prop, dev, tol in suites[name]():
                report.entries.append(Entry(name, prop, float(dev), float(tol)))
        except Exception as exc:  # a crashing suite is a failed entry
            report.entries.append(Entry(name, f"ran without error ({type(exc).__name__}: {exc})", math.inf, 0.0))
    report.seconds = time.perf_counter() - t0
    return report
