"""Physical and truncation parameters of the lattice model.

All quantities are in atomic units (hbar = 1).  The system length is not a
free parameter: the combined space/momentum translation symmetry ties it to
the number of position states ``Q`` and the spin-orbit strength ``lam``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

__all__ = [
    "InvalidParameterError",
    "ModelParams",
    "ValidationReport",
    "derive_geometry",
    "validate",
]


class InvalidParameterError(ValueError):
    """Raised when model parameters violate a structural invariant."""


def derive_geometry(Q: int, lam: float, N: int) -> tuple[float, float, int]:
    """Return ``(L, a, q_max)`` for ``Q`` position states and ``N`` cells per side.

    ``L = sqrt(2*pi*(Q-1)/lam)``, ``a = L/N`` and ``q_max = (Q-1)/2``.

    >>> L, a, q_max = derive_geometry(101, 1.0, 10)
    >>> round(L, 4), q_max
    (25.0663, 50)
    """
    if not isinstance(Q, int) or Q < 3 or Q % 2 == 0:
        raise InvalidParameterError(f"Q must be an odd integer >= 3, got {Q!r}")
    if not isinstance(N, int) or N < 2 or N % 2 == 1:
        raise InvalidParameterError(f"N must be an even integer >= 2, got {N!r}")
    if not lam > 0:
        raise InvalidParameterError(f"lambda must be positive, got {lam!r}")
    L = math.sqrt(2.0 * math.pi * (Q - 1) / lam)
    return L, L / N, (Q - 1) // 2


@dataclass(frozen=True)
class ModelParams:
    """Immutable parameter set for one spin sector.

    ``lam`` is the spin-orbit strength (``lambda`` in config files).  Derived
    geometry (``L``, ``a``, ``q_max``, ``n_max``, ``dim``) is computed on
    access and raises :class:`InvalidParameterError` for inconsistent input.
    """

    m: float = 1.0
    e: float = 1.0
    lam: float = 1.0
    Ux: float = 1000.0
    Uy: float = 1000.0
    Efield: float = 0.0
    N: int = 10
    Q: int = 101
    J: int = 201
    spin: int = 1

    @property
    def L(self) -> float:
        return derive_geometry(self.Q, self.lam, self.N)[0]

    @property
    def a(self) -> float:
        return derive_geometry(self.Q, self.lam, self.N)[1]

    @property
    def q_max(self) -> int:
        return (self.Q - 1) // 2

    @property
    def n_max(self) -> int:
        return (self.J - 1) // 2

    @property
    def dim(self) -> int:
        return self.Q * self.J

    @property
    def y_step(self) -> float:
        """Spacing ``2*pi/(lam*L)`` of the position eigenvalues along y."""
        return 2.0 * math.pi / (self.lam * self.L)

    def with_efield(self, Efield: float) -> "ModelParams":
        return replace(self, Efield=float(Efield))

    def check(self) -> None:
        """Raise :class:`InvalidParameterError` listing every violation."""
        report = validate(self)
        if not report.ok:
            raise InvalidParameterError("; ".join(report.violations))


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    dim: int | None = None
    matrix_bytes: int | None = None

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        lines = ["valid" if self.ok else "invalid"]
        lines += [f"  - {v}" for v in self.violations]
        if self.dim is not None:
            lines.append(f"  D = {self.dim}, dense matrix = {self.matrix_bytes / 2**30:.2f} GiB")
        return "\n".join(lines)


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def validate(params: ModelParams) -> ValidationReport:
    """Collect every violated invariant instead of stopping at the first."""
    v = []
    if not _is_int(params.Q) or params.Q < 3:
        v.append("Q must be an integer >= 3")
    elif params.Q % 2 == 0:
        v.append("Q must be odd")
    if not _is_int(params.J) or params.J < 1:
        v.append("J must be a positive integer")
    elif params.J % 2 == 0:
        v.append("J must be odd")
    if not _is_int(params.N) or params.N < 2:
        v.append("N must be an integer >= 2")
    elif params.N % 2 == 1:
        v.append("N must be even")
    if not params.lam > 0:
        v.append("lambda must be positive")
    if not params.m > 0:
        v.append("m must be positive")
    if params.spin not in (1, -1):
        v.append("spin must be +1 or -1")
    for name in ("e", "Ux", "Uy", "Efield"):
        if not math.isfinite(getattr(params, name)):
            v.append(f"{name} must be finite")

    report = ValidationReport(violations=v)
    if _is_int(params.Q) and _is_int(params.J) and params.Q > 0 and params.J > 0:
        report.dim = params.Q * params.J
        report.matrix_bytes = 8 * report.dim**2
    return report
