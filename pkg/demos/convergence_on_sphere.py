"""Manufactured-solution study on a patch of the unit sphere.

The body is the coordinate rectangle theta in [pi/4, 3 pi/4],
phi in [0, pi/2] of the round sphere, clamped on its whole boundary.  We
prescribe xi = sin sin (1, 1), derive the dead load that makes it an exact
solution of the linearized problem and watch the P1 error shrink.

Run with ``python3 demos/convergence_on_sphere.py``.
"""

import math

from relast import MaterialModel, IdentityMap, make_metric
from relast.mms import ManufacturedProblem, convergence_study, sine_field

box = [(math.pi / 4, 3 * math.pi / 4), (0.0, math.pi / 2)]
exact, grad = sine_field(box, [1.0, 1.0])
problem = ManufacturedProblem(box, make_metric("sphere", 2, radius=1.0), IdentityMap(2),
                              MaterialModel(1.0, 1.0), exact, grad)

table = convergence_study(problem, [4, 8, 16, 32])
print(f"{'h':>8s} {'L2 error':>11s} {'H1 error':>11s} {'L2 rate':>8s} {'H1 rate':>8s}")
for h, l2, h1, r2, r1 in table.rows():
    print(f"{h:8.4f} {l2:11.3e} {h1:11.3e} {r2:8.3f} {r1:8.3f}")

# P1 elements: second order in L2, first order in H1, curvature or not
