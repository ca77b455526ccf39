import math

import numpy as np
import pytest

from relast.errors import CapabilityError, ChartExitError, ImmersionError
from relast.geometry import (CATALOG, Euclidean, HyperbolicHalfPlane, IdentityMap, LinearMap,
                             PerturbedFlat, PolarEmbedding, PolarFlat, QuadraticMap, Sphere,
                             density_ratio, geodesic_exp, geodesic_path, make_metric,
                             pullback_metric, ricci, ricci_components)
from relast.identities import geodesic_speed_drift, great_circle_exp

MODELS = [Euclidean(2), Euclidean(3), PolarFlat(), Sphere(1.3), HyperbolicHalfPlane(),
          PerturbedFlat(0.4, 1.3), PerturbedFlat(0.2, 2.0, 3)]


def _points(rng, model, n=8):
    return rng.uniform(0.5, 1.5, (n, model.dim))


@pytest.mark.parametrize("model", MODELS, ids=repr)
def test_metric_derivatives_match_differences(rng, model):
    h = 1e-5
    for y in _points(rng, model):
        g, dg, d2g = model.evaluate(y)
        fd1 = np.array([(model.metric(y + h * e) - model.metric(y - h * e)) / (2 * h)
                        for e in np.eye(model.dim)])
        fd2 = np.array([(model.evaluate(y + h * e)[1] - model.evaluate(y - h * e)[1]) / (2 * h)
                        for e in np.eye(model.dim)])
        assert np.max(np.abs(fd1 - dg)) <= 1e-6 * max(np.max(np.abs(g)), 1.0)
        assert np.max(np.abs(fd2 - d2g)) <= 1e-6 * max(np.max(np.abs(g)), 1.0)
        np.linalg.cholesky(g)


def test_make_metric_catalog():
    assert set(CATALOG) == {"euclidean", "polar_flat", "sphere", "hyperbolic_half_plane",
                            "perturbed_flat"}
    assert isinstance(make_metric("sphere", radius=2.0), Sphere)
    with pytest.raises(ValueError):
        make_metric("torus")
    with pytest.raises(ValueError):
        PerturbedFlat(1.5)


# -- exponential map ------------------------------------------------------------

def test_exp_euclidean_is_translation(rng):
    y0, v = rng.standard_normal(3), rng.standard_normal(3)
    np.testing.assert_array_equal(geodesic_exp(Euclidean(3), y0, v), y0 + v)


@pytest.mark.parametrize("model", MODELS, ids=repr)
def test_exp_of_zero_is_base_point(model):
    y0 = np.full(model.dim, 0.9)
    np.testing.assert_array_equal(geodesic_exp(model, y0, np.zeros(model.dim)), y0)


def test_exp_sphere_quarter_meridian():
    out = geodesic_exp(Sphere(1.0), np.array([math.pi / 2, 0.0]), np.array([-math.pi / 4, 0.0]))
    np.testing.assert_allclose(out, [math.pi / 4, 0.0], atol=1e-8)


def test_exp_sphere_matches_great_circles(rng):
    for _ in range(20):
        y0 = np.array([rng.uniform(0.6, 2.5), rng.uniform(-3, 3)])
        v = rng.uniform(-0.4, 0.4, 2)
        np.testing.assert_allclose(geodesic_exp(Sphere(1.0), y0, v), great_circle_exp(1.0, y0, v),
                                   atol=1e-8)


def test_exp_batch_matches_single_points(rng):
    model = Sphere(1.0)
    y0 = np.column_stack([rng.uniform(0.8, 2.2, 6), rng.uniform(0, 1, 6)])
    v = rng.uniform(-0.3, 0.3, (6, 2))
    batch = geodesic_exp(model, y0, v)
    for k in range(6):
        np.testing.assert_array_equal(batch[k], geodesic_exp(model, y0[k], v[k]))


@pytest.mark.parametrize("model", [PolarFlat(), Sphere(1.0), HyperbolicHalfPlane(),
                                   PerturbedFlat(0.4, 1.3), PerturbedFlat(0.2, 2.0, 3)], ids=repr)
def test_geodesic_speed_is_conserved(rng, model):
    for _ in range(5):
        y0 = rng.uniform(0.8, 1.4, model.dim)
        v = rng.uniform(-0.3, 0.3, model.dim)
        assert geodesic_speed_drift(model, y0, v) < 1e-8


@pytest.mark.parametrize("t", [0.25, 0.5])
def test_exp_rescaling_follows_same_curve(t):
    model = Sphere(1.0)
    y0, v = np.array([1.0, 0.3]), np.array([0.2, -0.15])
    n = 64
    path = geodesic_path(model, y0, v, n_steps=n)
    on_curve = path[int(t * n)][0]
    np.testing.assert_allclose(geodesic_exp(model, y0, t * v), on_curve, atol=1e-8)


def test_exp_leaving_chart_raises():
    with pytest.raises(ChartExitError):
        geodesic_exp(PolarFlat(), np.array([1.0, 0.0]), np.array([-3.0, 0.0]))
    with pytest.raises(ChartExitError):
        geodesic_exp(HyperbolicHalfPlane(), np.array([0.0, -1.0]), np.array([0.1, 0.0]))


# -- curvature ------------------------------------------------------------------

def test_ricci_euclidean_vanishes():
    np.testing.assert_array_equal(ricci(Euclidean(3), np.zeros(3)).components, 0.0)


@pytest.mark.parametrize("R", [1.0, 2.5])
def test_ricci_sphere_constant_curvature(rng, R):
    y = np.column_stack([rng.uniform(0.1, math.pi - 0.1, 30), rng.uniform(-3, 3, 30)])
    ric = ricci_components(Sphere(R), y)
    g = Sphere(R).metric(y)
    assert np.max(np.abs(ric - g / R ** 2)) <= 1e-10 * np.max(np.abs(g / R ** 2))
    np.testing.assert_array_equal(ric, np.swapaxes(ric, -1, -2))


def test_ricci_hyperbolic(rng):
    y = np.column_stack([rng.uniform(-2, 2, 30), rng.uniform(0.2, 3.0, 30)])
    ric = ricci_components(HyperbolicHalfPlane(), y)
    g = HyperbolicHalfPlane().metric(y)
    assert np.max(np.abs(ric + g) / np.abs(g).max(axis=(-1, -2))[:, None, None]) < 1e-10


def test_ricci_needs_second_derivatives():
    class NoSecond(Euclidean):
        has_second_derivatives = False
    with pytest.raises(CapabilityError):
        ricci(NoSecond(2), np.zeros(2))


# -- pullback and density ratio -------------------------------------------------

def test_pullback_identity_and_homothety():
    x = np.array([0.3, 0.4])
    np.testing.assert_array_equal(pullback_metric(Euclidean(2), IdentityMap(2), x).g, np.eye(2))
    np.testing.assert_array_equal(pullback_metric(Euclidean(2), LinearMap(2 * np.eye(2)), x).g,
                                  4 * np.eye(2))


def test_pullback_polar_embedding():
    x = np.array([1.7, 0.9])
    m = pullback_metric(Euclidean(2), PolarEmbedding(), x)
    np.testing.assert_allclose(m.g, np.diag([1.0, 1.7 ** 2]), atol=1e-13)
    np.testing.assert_allclose(m.dg, PolarFlat().evaluate(x)[1], atol=1e-13)


def test_pullback_singular_raises():
    with pytest.raises(ImmersionError):
        pullback_metric(Euclidean(2), LinearMap(np.array([[1.0, 2.0], [2.0, 4.0]])), np.zeros(2))


def test_pullback_is_functorial(rng):
    A, B = rng.standard_normal((2, 2)) + 2 * np.eye(2), rng.standard_normal((2, 2)) + 2 * np.eye(2)
    inner, outer = LinearMap(A, [0.1, 0.2]), LinearMap(B, [1.0, 0.5])
    model = Sphere(1.0)
    x = np.array([0.1, -0.05])
    direct = pullback_metric(model, outer.compose(inner), x).g
    mid = inner.phi(x)
    g_outer = pullback_metric(model, outer, mid).g
    composed = A.T @ g_outer @ A
    np.testing.assert_allclose(direct, composed, rtol=1e-12, atol=1e-12)


def test_quadratic_map_derivatives(rng):
    q = QuadraticMap(rng.standard_normal((3, 3)), rng.standard_normal((3, 3, 3)), rng.standard_normal(3))
    x = rng.standard_normal(3)
    h = 1e-5
    fd = np.array([(q.phi(x + h * e) - q.phi(x - h * e)) / (2 * h) for e in np.eye(3)]).T
    np.testing.assert_allclose(q.dphi(x), fd, atol=1e-9)
    fd2 = np.array([(q.dphi(x + h * e) - q.dphi(x - h * e)) / (2 * h) for e in np.eye(3)])
    np.testing.assert_allclose(q.d2phi(x), np.moveaxis(fd2, 0, -1), atol=1e-8)


def test_density_ratio_examples(rng):
    x = np.array([0.2, 0.3])
    assert density_ratio(Euclidean(2), IdentityMap(2), IdentityMap(2), x) == pytest.approx(1.0)
    assert density_ratio(Euclidean(2), IdentityMap(2), LinearMap(2 * np.eye(2)), x) == \
        pytest.approx(0.25, rel=1e-15)


def test_density_ratio_defining_identity(rng):
    model = Sphere(1.0)
    phi0 = QuadraticMap(0.5 * np.eye(2), 0.1 * rng.standard_normal((2, 2, 2)), [1.2, 0.3])
    for _ in range(10):
        phi = QuadraticMap(0.4 * np.eye(2) + 0.05 * rng.standard_normal((2, 2)),
                           0.1 * rng.standard_normal((2, 2, 2)), [1.0, 0.5])
        x = rng.uniform(-0.3, 0.3, 2)
        rho = density_ratio(model, phi0, phi, x)
        g = pullback_metric(model, phi, x).g
        g0 = pullback_metric(model, phi0, x).g
        assert abs(rho * math.sqrt(np.linalg.det(g)) - math.sqrt(np.linalg.det(g0))) < 1e-12
