import numpy as np
import pytest

from relast.constitutive import (MaterialModel, StressValue, elasticity_tensor,
                                 positive_definiteness_estimate, stored_energy, stress_convert,
                                 stress_sigma)
from relast.errors import InputError
from relast.geometry import Euclidean, IdentityMap, pullback_metric
from relast.identities import (random_configuration, stress_contractions, stress_gradient_gap,
                               two_point_stress_gap)
from relast.tensor import UP, MetricValue, TensorValue

from conftest import random_spd


def _sym(rng, d):
    a = rng.standard_normal((d, d))
    return 0.5 * (a + a.T)


def test_material_constraints():
    with pytest.raises(InputError, match="mu > 0"):
        MaterialModel(1.0, -1.0)
    with pytest.raises(InputError):
        MaterialModel(-0.5, 1.0)
    with pytest.raises(InputError):
        MaterialModel(1.0, 1.0, law="neo-hookean")


def test_elasticity_tensor_flat_entries():
    A = elasticity_tensor(MaterialModel(0.0, 1.0), MetricValue(np.eye(2))).components
    assert (A[0, 0, 0, 0], A[0, 1, 0, 1], A[0, 0, 1, 1]) == (2.0, 1.0, 0.0)
    A = elasticity_tensor(MaterialModel(1.0, 1.0), MetricValue(np.eye(2))).components
    assert (A[0, 0, 1, 1], A[0, 0, 0, 0]) == (1.0, 3.0)


def test_elasticity_tensor_curved_entry():
    lam, mu = 0.7, 1.3
    A = elasticity_tensor(MaterialModel(lam, mu), MetricValue(np.diag([1.0, 4.0]))).components
    assert abs(A[1, 1, 1, 1] - (lam + 2 * mu) / 16) < 1e-14


def test_elasticity_tensor_symmetries(rng):
    for d in (2, 3):
        g = random_spd(rng, d)
        A = elasticity_tensor(MaterialModel(0.4, 1.1), MetricValue(0.5 * (g + g.T))).components
        np.testing.assert_array_equal(A, np.transpose(A, (2, 3, 0, 1)))
        np.testing.assert_array_equal(A, np.transpose(A, (1, 0, 2, 3)))
        np.testing.assert_array_equal(A, np.transpose(A, (0, 1, 3, 2)))


def test_stored_energy_examples(rng):
    A = elasticity_tensor(MaterialModel(0.0, 1.0), MetricValue(np.eye(2)))
    assert stored_energy(A, np.zeros((2, 2))) == 0.0
    eps = 0.3
    assert stored_energy(A, np.diag([eps, 0.0])) == pytest.approx(eps ** 2, rel=1e-15)


def test_stored_energy_forms_agree(rng):
    for d in (2, 3):
        mat = MaterialModel(0.8, 1.7)
        g = random_spd(rng, d)
        m = MetricValue(0.5 * (g + g.T))
        E = _sym(rng, d)
        quad = stored_energy(elasticity_tensor(mat, m), E)
        trace = float(mat.energy(m.ginv, E))
        assert abs(quad - trace) <= 1e-13 * abs(trace)
        sigma = stress_sigma(elasticity_tensor(mat, m), E).sigma.components
        assert abs(0.5 * np.einsum("ij,ij->", sigma, E) - trace) <= 1e-13 * abs(trace)


def test_stress_examples():
    A = elasticity_tensor(MaterialModel(0.0, 1.0), MetricValue(np.eye(2)))
    assert not np.any(stress_sigma(A, np.zeros((2, 2))).sigma.components)
    s = stress_sigma(A, np.diag([0.1, 0.0])).sigma.components
    np.testing.assert_allclose(s, np.diag([0.2, 0.0]), rtol=1e-15)


def test_stress_is_energy_gradient(rng):
    for d in (2, 3):
        mat = MaterialModel(float(rng.uniform(0, 2)), float(rng.uniform(0.5, 2)))
        ginv = np.linalg.inv(random_spd(rng, d))
        assert stress_gradient_gap(mat, ginv, _sym(rng, d)) < 1e-7
        # directional form Sigma : dE against a central difference
        E, dE = _sym(rng, d), _sym(rng, d)
        h = 1e-6
        fd = (float(mat.energy(ginv, E + h * dE)) - float(mat.energy(ginv, E - h * dE))) / (2 * h)
        exact = float(np.einsum("ij,ij->", mat.stress(ginv, E), dE))
        assert abs(fd - exact) <= 1e-7 * abs(exact)


def test_stress_convert_zero_and_flat_identity(rng):
    x = np.array([0.1, 0.2])
    g = pullback_metric(Euclidean(2), IdentityMap(2), x)
    zero = stress_convert(StressValue(TensorValue(np.zeros((2, 2)), (UP, UP))), g, IdentityMap(2),
                          Euclidean(2), x)
    assert all(not np.any(t.components) for t in zero)
    s = _sym(rng, 2)
    out = stress_convert(StressValue(TensorValue(s, (UP, UP))), g, IdentityMap(2), Euclidean(2), x)
    for t in out:
        np.testing.assert_allclose(t.components, s, rtol=1e-15, atol=1e-15)


def test_two_point_stress_formula_independent(rng):
    """T~^i_a = g^_ab d_j phi^b Sigma^ij, against explicit loops."""
    for _ in range(10):
        model, phi, x = random_configuration(rng)
        d = model.dim
        s = _sym(rng, d)
        g = pullback_metric(model, phi, x)
        out = stress_convert(StressValue(TensorValue(s, (UP, UP))), g, phi, model, x)
        y, F = phi.evaluate(x)
        gh = model.metric(y)
        ref = np.zeros((d, d))
        for i in range(d):
            for a in range(d):
                ref[i, a] = sum(gh[a, b] * F[b, j] * s[i, j] for b in range(d) for j in range(d))
        np.testing.assert_allclose(out.T_tilde.components, ref, rtol=1e-13, atol=1e-13)


def test_two_point_stress_is_energy_derivative_in_F(rng):
    for _ in range(20):
        model, phi, x = random_configuration(rng)
        y, F = phi.evaluate(x)
        g = F.T @ model.metric(y) @ F
        g0 = 0.5 * (g + random_spd(rng, model.dim, 0.3))
        assert two_point_stress_gap(model, phi, x, MaterialModel(0.6, 1.2), g0) < 1e-7


def test_five_way_contraction(rng):
    for _ in range(40):
        model, phi, x = random_configuration(rng)
        d = model.dim
        vals = stress_contractions(model, phi, x, _sym(rng, d), rng.standard_normal(d),
                                   rng.standard_normal((d, d)))
        assert np.max(np.abs(vals - vals[0])) <= 1e-11 * np.max(np.abs(vals))


def test_positive_definiteness_examples():
    I2 = np.eye(2)
    for lam in (0.0, 1.0):
        A = elasticity_tensor(MaterialModel(lam, 1.0), MetricValue(I2)).components
        assert positive_definiteness_estimate(A, I2) == pytest.approx(2.0, rel=1e-12)
    A = elasticity_tensor(MaterialModel(1.0, 1.0), MetricValue(I2)).components
    c = 3.5
    assert positive_definiteness_estimate(c * A, I2) == pytest.approx(
        c * positive_definiteness_estimate(A, I2), rel=1e-12)


def test_positive_definiteness_curved_metric_is_2mu(rng):
    g = random_spd(rng, 3)
    g = 0.5 * (g + g.T)
    A = elasticity_tensor(MaterialModel(0.5, 0.8), MetricValue(g)).components
    assert positive_definiteness_estimate(A, g) == pytest.approx(1.6, rel=1e-10)
