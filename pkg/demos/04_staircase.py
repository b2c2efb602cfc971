"""Conductivity staircase on a desk-size lattice (a few minutes on one core).

The conductivity at a given Fermi level is the sum of band momentum sums of
the bands whose mean energy lies below it.  Sweeping the field moves band
means across the Fermi levels; each crossing adds or removes a whole band
and the conductivity jumps between integer multiples of one unit.
"""

import warnings

import numpy as np

from latticecond import DegeneracyWarning, ModelParams, compute_bands, estimate_sigma0, quantize, sweep
from latticecond.conductivity import band_crossings

warnings.simplefilter("ignore", DegeneracyWarning)

# (Q - 1)/N even puts the potential minima along y on the position grid
p = ModelParams(lam=1, Ux=2000, Uy=2000, N=4, Q=33, J=51)
zero = compute_bands(p, 8)
fermi = np.linspace(zero.band_mean_energy[0], zero.band_mean_energy[-1], 10)[1:-1]
efields = np.linspace(0.3, 12.0, 40)

curves = sweep(p, efields, fermi, M=8, threads="auto")
fit = estimate_sigma0(curves)
curves = quantize(curves, fit.sigma0_over_alpha)
print(f"unit sigma0/alpha = {fit.sigma0_over_alpha:.5f}, residual {fit.residual:.2%}")
print(f"well-localized estimate (N+1) lambda a / 2 = {(p.N + 1) * p.lam * p.a / 2:.5f}")

step = efields[1] - efields[0]
for c in curves:
    crossings = band_crossings(efields, c.band_means, c.fermi_level)
    matched = all(any(abs(j - x) <= step for x in crossings) for j in c.jump_locations)
    levels = [int(s) for s in c.integer_steps[np.r_[True, np.diff(c.integer_steps) != 0]]]
    print(f"E_F = {c.fermi_level:9.2f}: steps {levels}, jumps at {np.round(c.jump_locations, 2).tolist()}, "
          f"all at band crossings: {matched}")
