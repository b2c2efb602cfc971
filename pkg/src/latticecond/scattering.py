"""Spin-flip backscattering off a single non-magnetic delta obstacle in 1D.

The obstacle ``U (exp(i theta/2 sigma_x) + exp(-i theta/2 sigma_x)) delta(x)``
lets a spin-up electron reflect only into the spin-down channel.  Matching
at the origin fixes the reflected amplitude relative to the incident one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["ScatteringInput", "reflection_ratio", "reflection_probability", "theta_sweep"]


@dataclass(frozen=True)
class ScatteringInput:
    U: float
    theta: float
    kwave: float
    m: float = 1.0

    def __post_init__(self):
        if not self.kwave > 0:
            raise ValueError(f"kwave must be positive, got {self.kwave}")
        if not self.m > 0:
            raise ValueError(f"m must be positive, got {self.m}")


def _half_cos(theta):
    # cos(theta/2) written as sin((pi - theta)/2) so theta = pi gives exactly 0
    return np.sin((math.pi - np.asarray(theta, dtype=float)) / 2)


def reflection_ratio(inp: ScatteringInput) -> complex:
    """``V/A = 2 U cos(theta/2) / (i k/m - 2 U cos(theta/2))``."""
    c = 2.0 * inp.U * float(_half_cos(inp.theta))
    return c / complex(-c, inp.kwave / inp.m)


def reflection_probability(inp: ScatteringInput) -> float:
    """``|V/A|**2``, computed without forming the complex ratio."""
    c = 2.0 * inp.U * float(_half_cos(inp.theta))
    return c * c / (c * c + (inp.kwave / inp.m) ** 2)


def theta_sweep(U: float, kwave: float, m: float = 1.0, count: int = 101):
    """Rows ``(theta, re V/A, im V/A, |V/A|^2)`` for ``count`` angles in ``[0, pi]``."""
    rows = []
    for theta in np.linspace(0.0, math.pi, count):
        inp = ScatteringInput(U=U, theta=float(theta), kwave=kwave, m=m)
        r = reflection_ratio(inp)
        rows.append((float(theta), r.real, r.imag, reflection_probability(inp)))
    return rows
