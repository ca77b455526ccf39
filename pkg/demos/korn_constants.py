"""Discrete Korn and Poincare constants on the unit square.

On a flat square clamped on the boundary the optimal constant in
||grad xi||^2 <= C ||L_xi g||^2 is 1/2, and the Poincare constant is
1 / (2 pi^2).  The discrete values approach both from below as the mesh
is refined.

Run with ``python3 demos/korn_constants.py``.
"""

import math

from relast import IdentityMap, make_metric, unit_square
from relast.spectral import korn_estimate, poincare_and_ricci_bound

flat = make_metric("euclidean", 2)
for n in (4, 8, 16):
    k = korn_estimate(unit_square(n), flat, IdentityMap(2))
    pb = poincare_and_ricci_bound(unit_square(n), flat, IdentityMap(2))
    print(f"n = {n:2d}: C*_K = {k.C_Kstar:.5f}  C_K = {k.C_K:.4f}  C_P = {pb.C_P:.6f}  "
          f"Korn bound from C_P = {pb.C_K_bound:.4f}")
print(f"limits: C*_K = 0.5, C_P = {1 / (2 * math.pi ** 2):.6f}")
