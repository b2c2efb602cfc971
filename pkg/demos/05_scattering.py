"""A spin-flipping delta obstacle cannot backscatter at theta = pi.

The reflected amplitude is proportional to cos(theta/2), so the channel
closes completely at theta = pi whatever the obstacle strength.
"""

import math

from latticecond import ScatteringInput, reflection_ratio, theta_sweep

for U in (1.0, 1e3, 1e6):
    r = reflection_ratio(ScatteringInput(U=U, theta=math.pi, kwave=1.0))
    print(f"U = {U:8g}: V/A at theta=pi -> {abs(r)}")

print("strong obstacle, theta = 0:", abs(reflection_ratio(ScatteringInput(1e6, 0.0, 1.0))))
print("\n theta     |V/A|^2")
for theta, re, im, prob in theta_sweep(U=10.0, kwave=1.0, count=7):
    print(f"{theta:6.3f}  {prob:.6f}")
