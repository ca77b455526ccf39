"""A clamped spherical membrane sagging under its own weight.

Solves the finite-strain St Venant-Kirchhoff problem by the chord
(fixed-Jacobian) Newton method and prints the iteration history next to
the smallness estimates that predict whether the iteration contracts.
Then the load is scaled up until the iteration breaks down.

Run with ``python3 demos/nonlinear_sag.py``.
"""

import math

import numpy as np

from relast import (ContractionFailureError, ForceModel, IdentityMap, MaterialModel,
                    NonlinearProblem, chord_newton_solve, generate_mesh, make_metric,
                    smallness_report)

mesh = generate_mesh([(math.pi / 4, 3 * math.pi / 4), (0.0, math.pi / 2)], [8, 8])
sphere = make_metric("sphere", 2, radius=1.0)
mat = MaterialModel(1.0, 1.0)

for weight in (1e-2, 1e-1, 1e1, 1e3):
    p = NonlinearProblem(mesh, sphere, IdentityMap(2), mat, ForceModel(2, np.array([weight, 0.0])))
    diag = smallness_report(p, np.random.default_rng(0), korn=False)
    print(f"\nload {weight:g}: |load| {diag['load_norm']:.3e}, epsilon1 estimate "
          f"{diag['epsilon1']:.3e} -> {'small' if diag['load_passes'] else 'not small'}")
    try:
        rep = chord_newton_solve(p)
    except ContractionFailureError as exc:
        print(f"  chord Newton failed: {exc}")
        continue
    for k, res, step, ratio, energy, det in rep.rows():
        print(f"  {k:2d} residual {res:.3e} step {step:.3e} ratio {ratio:.2e} energy {energy:+.6e}")
    print(f"  largest nodal displacement {np.max(np.abs(rep.xi.values)):.3e}")

# The estimate is conservative: loads well above epsilon1 may still converge,
# but once the steps stop shrinking the solver reports the failure.
