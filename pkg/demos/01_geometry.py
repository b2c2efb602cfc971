"""Geometry forced by the symmetry, and what a full-size run costs.

The system length is not a free parameter: once the number of position
states Q and the spin-orbit strength are chosen, L follows.  This script
derives it for the large configuration and for a desk-size one, and shows
how validation reports problems and memory needs.
"""

import math

from latticecond import ModelParams, derive_geometry, validate

L, a, q_max = derive_geometry(Q=101, lam=1.0, N=10)
print(f"Q=101, lambda=1, N=10 -> L = {L:.6f}, a = {a:.6f}, q_max = {q_max}")
print(f"round trip lambda L^2 / (4 pi) = {L * L / (4 * math.pi):.15f}")

large = ModelParams()  # m = e = lambda = 1, Ux = Uy = 1000, N = 10, Q = 101, J = 201
print("\nlarge configuration:")
print(validate(large))

desk = ModelParams(Ux=2000, Uy=2000, N=4, Q=33, J=51)
print("\ndesk configuration used for the staircase demo:")
print(validate(desk))

print("\na config with several mistakes at once:")
print(validate(ModelParams(Q=100, J=20, lam=0.0)))
