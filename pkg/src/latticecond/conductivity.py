"""Transverse conductivity from band momentum sums, in units of ``alpha``.

A band contributes its momentum sum to the conductivity when its mean energy
lies strictly below the Fermi level.  Sweeping the electric field gives a
staircase; :func:`estimate_sigma0` recovers the common step and
:func:`quantize` attaches integer steps and jump locations to the curves.
"""

from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .bands import BandData, compute_bands_many
from .model import ModelParams

__all__ = [
    "AmbiguousUnitError",
    "ConductivityCurve",
    "FermiTieWarning",
    "InsufficientBandsError",
    "NoPlateauError",
    "Plateau",
    "Sigma0Fit",
    "band_crossings",
    "bands_below",
    "estimate_sigma0",
    "find_plateaus",
    "jump_locations",
    "quantize",
    "sigma_xy",
    "sweep",
    "zero_field_limit",
]

TIE_TOL = 1e-9


class InsufficientBandsError(ValueError):
    """The Fermi level is above every computed band mean."""


class NoPlateauError(ValueError):
    pass


class AmbiguousUnitError(ValueError):
    pass


class FermiTieWarning(UserWarning):
    pass


def bands_below(bands: BandData, fermi_level: float) -> int:
    """Number of bands with mean energy strictly below ``fermi_level``.

    Band means are non-decreasing in the band index, so the included bands
    are always the lowest ones.
    """
    means = bands.band_mean_energy
    if fermi_level > means[-1]:
        raise InsufficientBandsError(
            f"Fermi level {fermi_level} above the highest computed band mean {means[-1]}; "
            f"compute more than {bands.M} bands"
        )
    ties = np.abs(means - fermi_level) <= TIE_TOL * max(1.0, abs(fermi_level))
    if ties.any():
        warnings.warn(
            f"band mean equals Fermi level {fermi_level}; band excluded", FermiTieWarning, stacklevel=2
        )
    return int(np.count_nonzero((means < fermi_level) & ~ties))


def sigma_xy(bands: BandData, fermi_level: float) -> float:
    """Sum of the momentum sums of all bands below ``fermi_level``."""
    n = bands_below(bands, fermi_level)
    if n == 0:
        return 0.0
    # sequential accumulation so that adding one band adds exactly its sum
    return float(np.cumsum(bands.band_momentum_sum)[n - 1])


@dataclass
class ConductivityCurve:
    fermi_level: float
    efield_values: np.ndarray
    sigma_over_alpha: np.ndarray
    n_bands_included: np.ndarray
    band_means: np.ndarray  # (nE, M)
    band_sums: np.ndarray  # (nE, M)
    sigma0_over_alpha: float | None = None
    integer_steps: np.ndarray | None = None
    jump_locations: list = field(default_factory=list)


def sweep(
    params: ModelParams,
    efields,
    fermi_levels,
    M: int,
    threads=1,
    tol: float = 1e-10,
    method: str = "dense",
    drop_duplicate_edge: bool = False,
) -> list[ConductivityCurve]:
    """Conductivity versus field for each Fermi level.

    Bands are recomputed for every field value; all (field, k) solves share
    one worker pool.  Jump locations use a provisional zero scale of 1% of
    the largest ``|sigma|``; :func:`quantize` refines them once the unit is known.
    """
    efields = np.asarray(efields, dtype=float)
    if efields.size == 0 or np.any(np.diff(efields) <= 0):
        raise ValueError("efields must be non-empty and strictly ascending")
    all_bands = compute_bands_many(
        [params.with_efield(E) for E in efields], M, threads, tol, method, drop_duplicate_edge
    )
    means = np.array([b.band_mean_energy for b in all_bands])
    sums = np.array([b.band_momentum_sum for b in all_bands])

    curves = []
    for ef in fermi_levels:
        counts = np.array([bands_below(b, ef) for b in all_bands])
        sigma = np.array([sigma_xy(b, ef) for b in all_bands])
        curve = ConductivityCurve(
            fermi_level=float(ef),
            efield_values=efields,
            sigma_over_alpha=sigma,
            n_bands_included=counts,
            band_means=means,
            band_sums=sums,
        )
        scale = np.abs(sigma).max()
        curve.jump_locations = jump_locations(efields, sigma, atol=0.01 * scale)
        curves.append(curve)
    return curves


class Plateau(NamedTuple):
    start: int
    stop: int  # exclusive
    level: float

    @property
    def length(self) -> int:
        return self.stop - self.start


def find_plateaus(values, rtol: float = 0.01, atol: float = 0.0) -> list[Plateau]:
    """Split ``values`` into maximal runs whose spread stays below tolerance.

    A run is extended while ``max - min < max(rtol * |mean|, atol)`` or the
    values are identical.  Every
    point belongs to exactly one run; isolated points become runs of length 1.
    """
    v = np.asarray(values, dtype=float)
    runs = []
    start = 0
    lo = hi = v[0] if v.size else 0.0
    for i in range(1, v.size):
        nlo, nhi = min(lo, v[i]), max(hi, v[i])
        mean = v[start : i + 1].mean()
        spread = nhi - nlo
        if spread == 0 or spread < max(rtol * abs(mean), atol):
            lo, hi = nlo, nhi
        else:
            runs.append(Plateau(start, i, float(v[start:i].mean())))
            start, lo, hi = i, v[i], v[i]
    if v.size:
        runs.append(Plateau(start, v.size, float(v[start:].mean())))
    return runs


def jump_locations(efields, sigma, rtol: float = 0.01, atol: float = 0.0) -> list[float]:
    """Midpoints of the field intervals separating consecutive plateaus."""
    efields = np.asarray(efields, dtype=float)
    return [0.5 * (efields[p.start - 1] + efields[p.start]) for p in find_plateaus(sigma, rtol, atol)[1:]]


def band_crossings(efields, band_means, fermi_level: float) -> list[float]:
    """Field values where a band mean crosses ``fermi_level`` (linear interpolation)."""
    efields = np.asarray(efields, dtype=float)
    d = np.asarray(band_means) - fermi_level
    out = []
    for i in range(1, efields.size):
        for b in range(d.shape[1]):
            d0, d1 = d[i - 1, b], d[i, b]
            if d0 == 0.0 or (d0 < 0) != (d1 < 0):
                t = d0 / (d0 - d1) if d0 != d1 else 0.0
                out.append(float(efields[i - 1] + t * (efields[i] - efields[i - 1])))
    return sorted(out)


class Sigma0Fit(NamedTuple):
    sigma0_over_alpha: float
    assignments: list  # per curve, one integer per plateau
    residual: float  # max |level - n*u| / u over all plateaus


def _plateaus_for_fit(curves, rtol, min_length):
    found = []
    for curve in curves:
        found.append([p for p in find_plateaus(curve.sigma_over_alpha, rtol) if p.length >= min_length])
    return found


def _assign(levels, u):
    n = np.rint(levels / u)
    return n, np.abs(levels - n * u)


def estimate_sigma0(
    curves,
    rtol: float = 0.01,
    fit_tol: float = 0.05,
    max_multiple: int = 12,
    min_length: int = 2,
    zero_tol: float = 0.02,
) -> Sigma0Fit:
    """Largest unit ``u`` making every plateau an integer multiple of ``u``.

    Plateaus are runs of at least ``min_length`` points varying by less than
    ``rtol`` relative.  Levels smaller than ``zero_tol`` times the largest
    level count as zero.  Candidate units are ``|level| / r`` for
    ``r = 1 .. max_multiple``; a candidate fits when every nonzero level is
    within ``fit_tol * u`` of a nonzero multiple.  The largest fitting
    candidate is refined by length-weighted least squares.  Smaller fitting
    candidates must be submultiples of it (assignments scaled by an integer);
    any other fitting candidate makes the unit ambiguous.
    """
    per_curve = _plateaus_for_fit(curves, rtol, min_length)
    flat = [p for plist in per_curve for p in plist]
    if not flat:
        raise NoPlateauError("no plateau of the required length")
    levels = np.array([p.level for p in flat])
    weights = np.array([p.length for p in flat], dtype=float)
    top = np.abs(levels).max()
    nonzero = np.abs(levels) > zero_tol * top
    if not nonzero.any():
        raise NoPlateauError("all plateaus are at zero conductivity")
    lv, w = levels[nonzero], weights[nonzero]

    candidates = sorted({abs(x) / r for x in lv for r in range(1, max_multiple + 1)}, reverse=True)
    fitting = []
    for u in candidates:
        n, dev = _assign(lv, u)
        if np.all(n != 0) and np.all(dev <= fit_tol * u):
            fitting.append((u, n))
    if not fitting:
        raise NoPlateauError(f"no unit fits all plateau levels within {fit_tol:.0%}")
    u_best, n_best = fitting[0]
    for u, n in fitting[1:]:
        # any submultiple u_best/k fits too; only other unit grids are ambiguous
        ratio = n / n_best
        k = np.rint(ratio[0])
        if not (k >= 1 and np.all(ratio == k)):
            raise AmbiguousUnitError(
                f"units {u_best:.6g} and {u:.6g} both fit with different assignments "
                f"({n_best.astype(int).tolist()} vs {n.astype(int).tolist()})"
            )

    u = float(np.sum(w * n_best * lv) / np.sum(w * n_best**2))
    n_all, dev_all = _assign(levels, u)
    n_all[~nonzero] = 0
    dev_all[~nonzero] = np.abs(levels[~nonzero])
    residual = float(dev_all.max() / u)

    assignments, i = [], 0
    for plist in per_curve:
        assignments.append([int(x) for x in n_all[i : i + len(plist)]])
        i += len(plist)
    return Sigma0Fit(u, assignments, residual)


def quantize(curves, sigma0: float, tol: float = 0.05, rtol: float = 0.01) -> list[ConductivityCurve]:
    """Copies of ``curves`` carrying the unit, integer steps and refined jumps.

    ``integer_steps`` is only set when every point lies within ``tol * sigma0``
    of its nearest multiple.
    """
    out = []
    for c in curves:
        n, dev = _assign(c.sigma_over_alpha, sigma0)
        steps = n.astype(int) if np.all(dev <= tol * sigma0) else None
        jumps = jump_locations(c.efield_values, c.sigma_over_alpha, rtol=rtol, atol=0.01 * sigma0)
        out.append(dataclasses.replace(c, sigma0_over_alpha=sigma0, integer_steps=steps, jump_locations=jumps))
    return out


def zero_field_limit(curve: ConductivityCurve, npoints: int = 3) -> float:
    """Linear extrapolation to ``E -> 0+`` from the smallest positive field values."""
    E = np.asarray(curve.efield_values)
    pos = np.flatnonzero(E > 0)[:npoints]
    if pos.size < 2:
        raise ValueError("need at least two positive field values")
    slope, intercept = np.polyfit(E[pos], curve.sigma_over_alpha[pos], 1)
    return float(intercept)
