"""Flat bands, the k <-> -k reflection, and the field derivative of energies.

With a strong lattice potential the lowest bands are almost flat.  At zero
field every band is symmetric in k and its momentum expectation is odd, so
the band momentum sum vanishes.  A field makes the sums nonzero; the energy
slope with field equals -e <y>, which is checked by finite differences.
"""

import warnings

import numpy as np

from latticecond import DegeneracyWarning, ModelParams, compute_bands

warnings.simplefilter("ignore", DegeneracyWarning)
np.set_printoptions(precision=4, suppress=True, linewidth=120)

p = ModelParams(lam=1, Ux=800, Uy=800, N=4, Q=25, J=41)
u = (p.N + 1) * p.lam * p.a / 2

zero = compute_bands(p, 8)
print("k grid:", zero.kvalues)
print("band means at E=0:", zero.band_mean_energy)
print("in-band spread:   ", np.ptp(zero.energies, axis=1))
print("max |e(k) - e(-k)|:", np.abs(zero.energies - zero.energies[:, ::-1]).max())
print("band momentum sums at E=0:", zero.band_momentum_sum)

field = compute_bands(p.with_efield(2.0), 8)
print("\nband momentum sums at E=2, in units of (N+1) lambda a / 2:")
print(field.band_momentum_sum / u)

dE = 1e-4
lo = compute_bands(p.with_efield(2.0 - dE), 8)
hi = compute_bands(p.with_efield(2.0 + dE), 8)
slope = (hi.energies - lo.energies) / (2 * dE)
print("\nmax |d e / dE + e <y>|:", np.abs(slope + p.e * field.y_mean).max())
