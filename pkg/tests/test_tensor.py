import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relast.errors import DimensionError, MetricDegenerateError, VarianceError
from relast.geometry import Euclidean, HyperbolicHalfPlane, PerturbedFlat, PolarFlat, Sphere
from relast.tensor import (DOWN, UP, MetricValue, TensorValue, christoffel_array, christoffels,
                           contract, covariant_derivative_vector, lie_derivative_metric,
                           metric_inverse, raise_lower, symmetrized_strain_array, volume_density)

from conftest import random_spd


def fd_metric_derivative(model, y, h=1e-5):
    """Central differences of the model metric, [k, i, j] = d_k g_ij."""
    out = []
    for k in range(model.dim):
        e = np.zeros(model.dim)
        e[k] = h
        out.append((model.metric(y + e) - model.metric(y - e)) / (2 * h))
    return np.array(out)


def naive_christoffel(g, dg):
    n = g.shape[0]
    ginv = np.linalg.inv(g)
    out = np.zeros((n, n, n))
    for k, i, j, l in itertools.product(range(n), repeat=4):
        out[k, i, j] += 0.5 * ginv[k, l] * (dg[i, j, l] + dg[j, i, l] - dg[l, i, j])
    return out


# -- contract -----------------------------------------------------------------

def test_contract_kronecker_with_vector():
    v = TensorValue.vector([1.0, -2.0, 0.5])
    delta = TensorValue(np.eye(3), (UP, DOWN))
    out = contract(delta, v, [(1, 0)])
    assert out.variance == (UP,)
    np.testing.assert_array_equal(out.components, v.components)


def test_contract_metric_with_inverse(rng):
    g = random_spd(rng, 3)
    m = MetricValue(0.5 * (g + g.T))
    out = contract(m.tensor, m.inverse_tensor, [(1, 0)])
    np.testing.assert_allclose(out.components, np.eye(3), atol=1e-14)
    assert out.variance == (DOWN, UP)


@pytest.mark.parametrize("d", [2, 3])
def test_double_contraction_matches_naive_loops(rng, d):
    a = TensorValue(rng.standard_normal((d, d)), (UP, UP))
    b = TensorValue(rng.standard_normal((d, d)), (DOWN, DOWN))
    out = contract(a, b, [(0, 0), (1, 1)])
    ref = sum(a.components[i, j] * b.components[i, j] for i in range(d) for j in range(d))
    assert out.rank == 0
    assert abs(float(out.components) - ref) <= 1e-14 * max(abs(ref), 1.0)


def test_contract_rejects_same_variance():
    a = TensorValue.vector([1.0, 2.0])
    with pytest.raises(VarianceError):
        contract(a, a, [(0, 0)])


def test_contract_rejects_dimension_mismatch():
    with pytest.raises(DimensionError):
        contract(TensorValue.vector([1.0, 2.0]), TensorValue.covector([1.0, 2.0, 3.0]), [(0, 0)])


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 3), st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2 ** 31))
def test_contraction_is_bilinear(d, s, t, seed):
    r = np.random.default_rng(seed)
    a1, a2 = (TensorValue(r.standard_normal((d, d)), (UP, DOWN)) for _ in range(2))
    b = TensorValue(r.standard_normal((d, d, d)), (UP, DOWN, DOWN))
    comb = TensorValue(s * a1.components + t * a2.components, (UP, DOWN))
    lhs = contract(comb, b, [(1, 0)]).components
    rhs = s * contract(a1, b, [(1, 0)]).components + t * contract(a2, b, [(1, 0)]).components
    np.testing.assert_allclose(lhs, rhs, rtol=1e-13, atol=1e-13)


# -- metrics and Christoffels --------------------------------------------------

def test_metric_rejects_non_positive_definite():
    with pytest.raises(MetricDegenerateError):
        MetricValue(np.diag([1.0, -1.0]))


def test_metric_rejects_asymmetric():
    with pytest.raises(MetricDegenerateError):
        MetricValue(np.array([[1.0, 0.1], [0.0, 1.0]]))


def test_christoffels_flat_vanish():
    m = MetricValue(np.eye(2), np.zeros((2, 2, 2)))
    np.testing.assert_array_equal(christoffels(m).components, 0.0)


def test_christoffels_polar_chart():
    model = PolarFlat()
    y = np.array([2.0, 0.3])
    gam = naive_christoffel(model.metric(y), fd_metric_derivative(model, y))
    ours = christoffels(model.metric_value(y)).components
    np.testing.assert_allclose(ours, gam, atol=1e-9)
    assert ours[0, 1, 1] == pytest.approx(-2.0, abs=1e-14)
    assert ours[1, 0, 1] == pytest.approx(0.5, abs=1e-14)
    assert ours[1, 1, 0] == pytest.approx(0.5, abs=1e-14)
    mask = np.ones_like(ours, dtype=bool)
    mask[0, 1, 1] = mask[1, 0, 1] = mask[1, 1, 0] = False
    np.testing.assert_array_equal(ours[mask], 0.0)


def test_christoffels_sphere():
    model = Sphere(1.0)
    y = np.array([math.pi / 4, 0.7])
    ours = christoffels(model.metric_value(y)).components
    np.testing.assert_allclose(ours, naive_christoffel(model.metric(y),
                                                       fd_metric_derivative(model, y)), atol=1e-9)
    assert ours[0, 1, 1] == pytest.approx(-0.5, abs=1e-14)


@pytest.mark.parametrize("model", [Euclidean(3), PolarFlat(), Sphere(1.4), HyperbolicHalfPlane(),
                                   PerturbedFlat(0.4, 1.3), PerturbedFlat(0.2, 2.0, 3)])
def test_metric_compatibility(rng, model):
    """nabla_k g_ij = d_k g_ij - Gamma^l_ki g_lj - Gamma^l_kj g_il = 0."""
    for _ in range(10):
        y = rng.uniform(0.4, 1.4, model.dim)
        g, dg, _ = model.evaluate(y)
        gam = christoffel_array(metric_inverse(g), dg)
        nab = dg - np.einsum("lki,lj->kij", gam, g) - np.einsum("lkj,il->kij", gam, g)
        assert np.max(np.abs(nab)) < 1e-12
        np.testing.assert_array_equal(gam, np.swapaxes(gam, -1, -2))


# -- covariant and Lie derivatives ----------------------------------------------

def test_covariant_derivative_constant_field_no_connection():
    xi = TensorValue.vector([1.0, 2.0])
    gam = TensorValue(np.zeros((2, 2, 2)), (UP, DOWN, DOWN))
    out = covariant_derivative_vector(xi, np.zeros((2, 2)), gam)
    np.testing.assert_array_equal(out.components, 0.0)


def test_covariant_derivative_position_field_flat():
    x = np.array([0.3, -0.7])
    gam = TensorValue(np.zeros((2, 2, 2)), (UP, DOWN, DOWN))
    out = covariant_derivative_vector(TensorValue.vector(x), np.eye(2), gam)
    np.testing.assert_array_equal(out.components, np.eye(2))


def _embedding(y):
    th, ph = y[..., 0], y[..., 1]
    return np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)


def _tangent_basis(y, h=1e-5):
    cols = []
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        cols.append((_embedding(y + e) - _embedding(y - e)) / (2 * h))
    return np.array(cols)  # [k, :] = d_k X


@pytest.mark.parametrize("field", ["theta", "mixed"])
def test_covariant_derivative_sphere_matches_embedding(field):
    """nabla_i xi^j equals the tangential part of d_i (xi^k d_k X) in R^3."""
    model = Sphere(1.0)

    def xi_of(y):
        if field == "theta":
            return np.array([1.0, 0.0])
        return np.array([np.sin(y[1]) * y[0], np.cos(y[0])])

    y = np.array([1.1, 0.4])
    h = 1e-5

    def V(z):
        return xi_of(z) @ _tangent_basis(z)

    dxi = np.array([(xi_of(y + h * e) - xi_of(y - h * e)) / (2 * h) for e in np.eye(2)])
    dV = np.array([(V(y + h * e) - V(y - h * e)) / (2 * h) for e in np.eye(2)])
    basis = _tangent_basis(y)
    gram = basis @ basis.T
    ref = np.linalg.solve(gram, basis @ dV.T).T  # [i, j]
    gam = christoffels(model.metric_value(y))
    ours = covariant_derivative_vector(TensorValue.vector(xi_of(y)), dxi, gam).components
    np.testing.assert_allclose(ours, ref, atol=1e-6)


def test_lie_derivative_zero_field():
    m = MetricValue(np.eye(2), np.zeros((2, 2, 2)))
    out = lie_derivative_metric(TensorValue.vector([0.0, 0.0]), np.zeros((2, 2)), m)
    np.testing.assert_array_equal(out.components, 0.0)


def test_lie_derivative_rotation_flat():
    x = np.array([0.4, 1.2])
    xi = TensorValue.vector([-x[1], x[0]])
    dxi = np.array([[0.0, 1.0], [-1.0, 0.0]])  # [i, j] = d_i xi^j
    out = lie_derivative_metric(xi, dxi, MetricValue(np.eye(2), np.zeros((2, 2, 2))))
    np.testing.assert_array_equal(out.components, 0.0)


def test_lie_derivative_sphere_azimuthal_killing():
    model = Sphere(1.0)
    for th in (0.3, 1.0, 2.5):
        m = model.metric_value(np.array([th, 0.2]))
        out = lie_derivative_metric(TensorValue.vector([0.0, 1.0]), np.zeros((2, 2)), m)
        assert np.max(np.abs(out.components)) < 1e-15


def test_lie_derivative_is_twice_symmetrized_gradient(rng):
    for model in (Sphere(1.0), HyperbolicHalfPlane(), PerturbedFlat(0.3, 1.1, 3)):
        for _ in range(10):
            y = rng.uniform(0.5, 1.5, model.dim)
            m = model.metric_value(y)
            xi = rng.standard_normal(model.dim)
            dxi = rng.standard_normal((model.dim, model.dim))
            lie = lie_derivative_metric(TensorValue.vector(xi), dxi, m).components
            e = symmetrized_strain_array(xi, dxi, m.g, christoffels(m).components)
            assert np.max(np.abs(lie - 2 * e)) <= 1e-12 * np.max(np.abs(lie))


# -- volume density and index gymnastics ----------------------------------------

def test_volume_density_examples():
    assert volume_density(MetricValue(np.eye(3))) == 1.0
    assert volume_density(MetricValue(np.diag([1.0, math.sin(math.pi / 2) ** 2]))) == 1.0
    assert volume_density(MetricValue(np.diag([4.0, 9.0]))) == pytest.approx(6.0, rel=1e-15)


def test_raise_lower_round_trip(rng):
    for d in (2, 3):
        g = random_spd(rng, d)
        m = MetricValue(0.5 * (g + g.T))
        v = TensorValue.vector(rng.standard_normal(d))
        back = raise_lower(raise_lower(v, 0, m, "lower"), 0, m, "raise")
        np.testing.assert_allclose(back.components, v.components, rtol=1e-13, atol=1e-13)


def test_lower_example():
    out = raise_lower(TensorValue.vector([1.0, 0.0]), 0, MetricValue(np.diag([4.0, 1.0])), "lower")
    np.testing.assert_array_equal(out.components, [4.0, 0.0])
    assert out.variance == (DOWN,)


def test_mixed_stress_by_lowering_matches_loop(rng):
    d = 3
    g = random_spd(rng, d)
    g = 0.5 * (g + g.T)
    s = rng.standard_normal((d, d))
    s = s + s.T
    T = raise_lower(TensorValue(s, (UP, UP)), 1, MetricValue(g), "lower").components
    ref = np.zeros((d, d))
    for i, j, k in itertools.product(range(d), repeat=3):
        ref[i, j] += g[j, k] * s[i, k]
    np.testing.assert_allclose(T, ref, rtol=1e-14, atol=1e-14)


def test_raise_rejects_wrong_variance():
    with pytest.raises(VarianceError):
        raise_lower(TensorValue.vector([1.0, 2.0]), 0, MetricValue(np.eye(2)), "raise")
