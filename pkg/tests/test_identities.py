import numpy as np
import pytest

from relast.geometry import Euclidean, IdentityMap, PolarFlat
from relast.identities import (AnalyticField, great_circle_exp, ibp_refinement,
                               linear_vector_field, polynomial_tensor_field, random_configuration,
                               strain_expressions, trig_tensor_field, trig_vector_field,
                               validation_suite, verify_integration_by_parts, zero_tensor_field)
from relast.mesh import generate_mesh


def test_zero_stress_field_gives_zero_residual(rng):
    mesh = generate_mesh([(1.0, 2.0), (0.0, 1.0)], [2, 2])
    r = verify_integration_by_parts(PolarFlat(), IdentityMap(2), zero_tensor_field(2),
                                    trig_vector_field(rng, 2), mesh)
    assert r == 0.0


def test_flat_polynomial_identity_exact(rng):
    for d in (2, 3):
        mesh = generate_mesh([(0.0, 1.0)] * d, [2] * d)
        for _ in range(5):
            r = verify_integration_by_parts(Euclidean(d), IdentityMap(d),
                                            polynomial_tensor_field(rng, d),
                                            linear_vector_field(rng, d), mesh)
            assert r < 1e-12


def test_hand_built_constant_field():
    """T = I, xi = x on the unit square: int tr(I) = 2 and the boundary term is 2."""
    T = AnalyticField(lambda x: np.broadcast_to(np.eye(2), np.shape(x)[:-1] + (2, 2)),
                      lambda x: np.zeros(np.shape(x)[:-1] + (2, 2, 2)), "identity")
    xi = AnalyticField(lambda x: np.asarray(x, dtype=float),
                       lambda x: np.broadcast_to(np.eye(2), np.shape(x)[:-1] + (2, 2)), "position")
    assert verify_integration_by_parts(Euclidean(2), IdentityMap(2), T, xi, generate_mesh(
        [(0.0, 1.0), (0.0, 1.0)], [1, 1])) < 1e-15


def test_curved_residual_decreases_at_second_order(rng):
    res, orders = ibp_refinement(PolarFlat(), IdentityMap(2), trig_tensor_field(rng, 2),
                                 trig_vector_field(rng, 2), [(1.0, 2.0), (0.0, 1.0)])
    assert res[0] > res[1] > res[2]
    assert orders[-1] >= 1.9


def test_strain_expressions_agree(rng):
    for _ in range(20):
        model, phi, x = random_configuration(rng)
        d = model.dim
        mats = strain_expressions(model, phi, x, rng.standard_normal(d), rng.standard_normal((d, d)))
        scale = max(np.max(np.abs(m)) for m in mats)
        for m in mats[1:]:
            assert np.max(np.abs(m - mats[0])) <= 1e-10 * scale


def test_great_circle_oracle_quarter_turn():
    y = great_circle_exp(1.0, np.array([np.pi / 2, 0.0]), np.array([0.0, np.pi / 2]))
    np.testing.assert_allclose(y, [np.pi / 2, np.pi / 2], atol=1e-14)


def test_validation_suite_passes():
    rows = validation_suite(seed=3, n=30)
    failing = [(r.name, r.worst, r.tol) for r in rows if not r.passed]
    assert not failing
    assert all(r.cases > 0 for r in rows)
