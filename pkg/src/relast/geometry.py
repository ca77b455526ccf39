"""Ambient manifold as a single chart with an analytic metric catalog.

Metric models evaluate ``g``, ``dg`` and ``d2g`` in closed form on batches
of chart points (trailing axis = coordinates).  The geodesic exponential map
is integrated with classical RK4 on a fixed step rule.
"""

import math

import numpy as np

from .errors import (CapabilityError, ChartExitError, DimensionError, DivergenceError,
                     ImmersionError)
from .tensor import (MetricValue, TensorValue, DOWN, christoffel_array,
                     christoffel_derivative_array, metric_inverse, ricci_array, sqrt_det)


class MetricModel:
    """Base class; subclasses implement :meth:`evaluate` in closed form."""

    kind = None
    has_second_derivatives = True
    # straight lines are geodesics of the chart (closed-form exponential map)
    affine_chart = False

    def __init__(self, dim):
        if dim not in (2, 3):
            raise DimensionError(f"dimension must be 2 or 3, got {dim}")
        self.dim = dim

    def evaluate(self, y):
        """Return ``(g, dg, d2g)`` at points ``y`` of shape (..., dim)."""
        raise NotImplementedError

    def metric(self, y):
        return self.evaluate(y)[0]

    def admissible(self, y):
        """Boolean mask of chart points where the metric is valid."""
        y = np.asarray(y, dtype=float)
        return np.all(np.isfinite(y), axis=-1)

    def chart_distance(self, y):
        """Metric distance from ``y`` to the chart boundary (inf if none)."""
        return np.full(np.shape(y)[:-1], np.inf)

    def injectivity_radius(self):
        """Catalog injectivity radius of the whole model."""
        return math.inf

    def injectivity_bound(self, points):
        """Admissibility radius over a compact set of chart points."""
        points = np.asarray(points, dtype=float).reshape(-1, self.dim)
        return float(min(self.injectivity_radius(), np.min(self.chart_distance(points))))

    def metric_value(self, y):
        g, dg, d2g = self.evaluate(np.asarray(y, dtype=float))
        return MetricValue(g, dg, d2g if self.has_second_derivatives else None)

    def params(self):
        return {}

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}(dim={self.dim}{', ' if args else ''}{args})"

    def _check(self, y):
        y = np.asarray(y, dtype=float)
        if y.shape[-1] != self.dim:
            raise DimensionError(f"expected points with {self.dim} coordinates")
        return y


def _diag_metric(diag):
    """Build (..., n, n) from (..., n) diagonal entries."""
    n = diag.shape[-1]
    out = np.zeros(diag.shape + (n,))
    idx = np.arange(n)
    out[..., idx, idx] = diag
    return out


class Euclidean(MetricModel):
    kind = "euclidean"
    affine_chart = True

    def evaluate(self, y):
        y = self._check(y)
        n = self.dim
        shape = y.shape[:-1]
        g = np.broadcast_to(np.eye(n), shape + (n, n)).copy()
        return g, np.zeros(shape + (n,) * 3), np.zeros(shape + (n,) * 4)


class PolarFlat(MetricModel):
    """Flat plane in polar coordinates (r, theta): g = diag(1, r^2)."""

    kind = "polar_flat"

    def __init__(self, dim=2):
        if dim != 2:
            raise DimensionError("polar_flat is two-dimensional")
        super().__init__(2)

    def evaluate(self, y):
        y = self._check(y)
        r = y[..., 0]
        shape = y.shape[:-1]
        g = _diag_metric(np.stack([np.ones_like(r), r * r], axis=-1))
        dg = np.zeros(shape + (2, 2, 2))
        dg[..., 0, 1, 1] = 2.0 * r
        d2g = np.zeros(shape + (2, 2, 2, 2))
        d2g[..., 0, 0, 1, 1] = 2.0
        return g, dg, d2g

    def admissible(self, y):
        y = np.asarray(y, dtype=float)
        return super().admissible(y) & (y[..., 0] > 0.0)

    def chart_distance(self, y):
        return np.asarray(y, dtype=float)[..., 0]


class Sphere(MetricModel):
    """Round sphere of radius R in colatitude/longitude (theta, phi)."""

    kind = "sphere"

    def __init__(self, radius=1.0, dim=2):
        if dim != 2:
            raise DimensionError("sphere is two-dimensional")
        if not radius > 0:
            raise ValueError("sphere radius must be positive")
        super().__init__(2)
        self.radius = float(radius)

    def params(self):
        return {"radius": self.radius}

    def evaluate(self, y):
        y = self._check(y)
        th = y[..., 0]
        r2 = self.radius ** 2
        shape = y.shape[:-1]
        g = _diag_metric(np.stack([np.full_like(th, r2), r2 * np.sin(th) ** 2], axis=-1))
        dg = np.zeros(shape + (2, 2, 2))
        dg[..., 0, 1, 1] = r2 * np.sin(2.0 * th)
        d2g = np.zeros(shape + (2, 2, 2, 2))
        d2g[..., 0, 0, 1, 1] = 2.0 * r2 * np.cos(2.0 * th)
        return g, dg, d2g

    def admissible(self, y):
        y = np.asarray(y, dtype=float)
        th = y[..., 0]
        return super().admissible(y) & (th > 0.0) & (th < math.pi)

    def chart_distance(self, y):
        th = np.asarray(y, dtype=float)[..., 0]
        return self.radius * np.minimum(th, math.pi - th)

    def injectivity_radius(self):
        return math.pi * self.radius


class HyperbolicHalfPlane(MetricModel):
    """Upper half-plane model g = delta / (y^2)^2, curvature -1."""

    kind = "hyperbolic_half_plane"

    def __init__(self, dim=2):
        if dim != 2:
            raise DimensionError("hyperbolic_half_plane is two-dimensional")
        super().__init__(2)

    def evaluate(self, y):
        y = self._check(y)
        t = y[..., 1]
        shape = y.shape[:-1]
        eye = np.eye(2)
        g = np.broadcast_to(eye, shape + (2, 2)) / (t * t)[..., None, None]
        dg = np.zeros(shape + (2, 2, 2))
        dg[..., 1, :, :] = (-2.0 / t ** 3)[..., None, None] * eye
        d2g = np.zeros(shape + (2, 2, 2, 2))
        d2g[..., 1, 1, :, :] = (6.0 / t ** 4)[..., None, None] * eye
        return g, dg, d2g

    def admissible(self, y):
        y = np.asarray(y, dtype=float)
        return super().admissible(y) & (y[..., 1] > 0.0)


class PerturbedFlat(MetricModel):
    """Conformally flat g = (1 + a sin(k y1) sin(k y2)) delta, |a| < 1."""

    kind = "perturbed_flat"

    def __init__(self, amplitude=0.1, wavenumber=1.0, dim=2):
        super().__init__(dim)
        if not abs(amplitude) < 1.0:
            raise ValueError("perturbed_flat needs |amplitude| < 1")
        self.amplitude = float(amplitude)
        self.wavenumber = float(wavenumber)

    def params(self):
        return {"amplitude": self.amplitude, "wavenumber": self.wavenumber}

    def evaluate(self, y):
        y = self._check(y)
        a, k, n = self.amplitude, self.wavenumber, self.dim
        s1, c1 = np.sin(k * y[..., 0]), np.cos(k * y[..., 0])
        s2, c2 = np.sin(k * y[..., 1]), np.cos(k * y[..., 1])
        eye = np.eye(n)
        shape = y.shape[:-1]
        conf = 1.0 + a * s1 * s2
        d = np.zeros(shape + (n,))
        d[..., 0] = a * k * c1 * s2
        d[..., 1] = a * k * s1 * c2
        dd = np.zeros(shape + (n, n))
        dd[..., 0, 0] = -a * k * k * s1 * s2
        dd[..., 1, 1] = -a * k * k * s1 * s2
        dd[..., 0, 1] = dd[..., 1, 0] = a * k * k * c1 * c2
        g = conf[..., None, None] * eye
        dg = d[..., :, None, None] * eye
        d2g = dd[..., :, :, None, None] * eye
        return g, dg, d2g

    def injectivity_radius(self):
        # documented heuristic, not an exact injectivity radius
        return math.pi / (self.wavenumber * (1.0 + abs(self.amplitude)))


CATALOG = {
    "euclidean": Euclidean,
    "polar_flat": PolarFlat,
    "sphere": Sphere,
    "hyperbolic_half_plane": HyperbolicHalfPlane,
    "perturbed_flat": PerturbedFlat,
}


def make_metric(kind, dim=2, **params):
    try:
        cls = CATALOG[kind]
    except KeyError:
        raise ValueError(f"unknown metric kind {kind!r}; choose from {sorted(CATALOG)}") from None
    return cls(dim=dim, **params)


# ---------------------------------------------------------------------------
# christoffels / ricci of a model
# ---------------------------------------------------------------------------

def model_christoffels(model, y):
    g, dg, _ = model.evaluate(y)
    return christoffel_array(metric_inverse(g), dg)


def ricci(model, y):
    """Ricci tensor (0, 2) of the model metric at a single point ``y``."""
    if not model.has_second_derivatives:
        raise CapabilityError(f"{model.kind} does not provide second derivatives")
    return TensorValue(ricci_components(model, np.asarray(y, dtype=float)), (DOWN, DOWN))


def ricci_components(model, y):
    """Batched Ricci components (..., n, n)."""
    if not model.has_second_derivatives:
        raise CapabilityError(f"{model.kind} does not provide second derivatives")
    g, dg, d2g = model.evaluate(y)
    ginv = metric_inverse(g)
    gamma = christoffel_array(ginv, dg)
    dgamma = christoffel_derivative_array(ginv, dg, d2g)
    return ricci_array(gamma, dgamma)


# ---------------------------------------------------------------------------
# geodesics
# ---------------------------------------------------------------------------

def geodesic_steps(model, y0, v):
    """Fixed RK4 step count max(16, ceil(64 |v|_g)) per point."""
    g = model.metric(y0)
    speed = np.sqrt(np.maximum(np.einsum("...i,...ij,...j->...", v, g, v), 0.0))
    return np.maximum(16, np.ceil(64.0 * speed)).astype(int)


def _geodesic_rhs(model, y, u):
    if not np.all(model.admissible(y)):
        raise ChartExitError(f"geodesic left the admissible region of the {model.kind} chart")
    gamma = model_christoffels(model, y)
    return u, -np.einsum("...abc,...b,...c->...a", gamma, u, u)


def _rk4(model, y, u, n_steps, record=False):
    h = 1.0 / n_steps
    path = [(y, u)] if record else None
    for _ in range(n_steps):
        k1y, k1u = _geodesic_rhs(model, y, u)
        k2y, k2u = _geodesic_rhs(model, y + 0.5 * h * k1y, u + 0.5 * h * k1u)
        k3y, k3u = _geodesic_rhs(model, y + 0.5 * h * k2y, u + 0.5 * h * k2u)
        k4y, k4u = _geodesic_rhs(model, y + h * k3y, u + h * k3u)
        y = y + (h / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        u = u + (h / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(u))):
            raise DivergenceError("non-finite state while integrating the geodesic equation")
        if not np.all(model.admissible(y)):
            raise ChartExitError(f"geodesic left the admissible region of the {model.kind} chart")
        if record:
            path.append((y, u))
    return (y, u) if not record else path


def geodesic_exp(model, y0, v):
    """End point of the geodesic through ``y0`` with initial velocity ``v``.

    Works on a single point or on a batch (..., dim).  Points sharing the
    same step count are integrated together; the result does not depend on
    how the batch is composed.  Charts whose geodesics are straight lines
    return ``y0 + v`` directly.
    """
    y0 = np.asarray(y0, dtype=float)
    v = np.asarray(v, dtype=float)
    y0, v = np.broadcast_arrays(y0, v)
    shape = y0.shape
    y0f = y0.reshape(-1, model.dim)
    vf = v.reshape(-1, model.dim)
    if not np.all(model.admissible(y0f)):
        raise ChartExitError("geodesic start point is outside the admissible chart region")
    if model.affine_chart:
        return (y0f + vf).reshape(shape)
    out = y0f.copy()
    moving = np.any(vf != 0.0, axis=-1)
    if np.any(moving):
        steps = geodesic_steps(model, y0f, vf)
        for n in np.unique(steps[moving]):
            sel = moving & (steps == n)
            out[sel], _ = _rk4(model, y0f[sel], vf[sel], int(n))
    return out.reshape(shape)


def geodesic_path(model, y0, v, n_steps=None):
    """RK4 trajectory ``[(y_k, ydot_k)]`` of a single geodesic, k = 0..n_steps."""
    y0 = np.asarray(y0, dtype=float)
    v = np.asarray(v, dtype=float)
    if n_steps is None:
        n_steps = int(geodesic_steps(model, y0, v))
    return _rk4(model, y0, v, n_steps, record=True)


# ---------------------------------------------------------------------------
# deformations
# ---------------------------------------------------------------------------

class DeformationChart:
    """Closed-form map from M-chart to N-chart coordinates.

    ``dphi[..., a, i] = d phi^a / d x^i`` and
    ``d2phi[..., a, i, j] = d^2 phi^a / d x^i d x^j``.
    """

    dim = None

    def phi(self, x):
        raise NotImplementedError

    def dphi(self, x):
        raise NotImplementedError

    def d2phi(self, x):
        return None

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        return self.phi(x), self.dphi(x)


class IdentityMap(DeformationChart):
    def __init__(self, dim):
        self.dim = dim

    def phi(self, x):
        return np.array(x, dtype=float)

    def dphi(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.eye(self.dim), x.shape[:-1] + (self.dim, self.dim)).copy()

    def d2phi(self, x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (self.dim,) * 3)

    def __repr__(self):
        return f"IdentityMap(dim={self.dim})"


class LinearMap(DeformationChart):
    """phi(x) = matrix @ x + offset."""

    def __init__(self, matrix, offset=None):
        self.matrix = np.array(matrix, dtype=float)
        self.dim = self.matrix.shape[0]
        if self.matrix.shape != (self.dim, self.dim):
            raise DimensionError("linear map must be square")
        self.offset = np.zeros(self.dim) if offset is None else np.array(offset, dtype=float)

    def phi(self, x):
        return np.asarray(x, dtype=float) @ self.matrix.T + self.offset

    def dphi(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.matrix, x.shape[:-1] + (self.dim, self.dim)).copy()

    def d2phi(self, x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (self.dim,) * 3)

    def compose(self, inner):
        """self o inner for another LinearMap."""
        return LinearMap(self.matrix @ inner.matrix, self.matrix @ inner.offset + self.offset)


class QuadraticMap(DeformationChart):
    """phi^a(x) = c^a + A^a_i x^i + 1/2 B^a_ij x^i x^j with B symmetric in (i, j)."""

    def __init__(self, matrix, hessian, offset=None):
        self.matrix = np.array(matrix, dtype=float)
        self.dim = self.matrix.shape[0]
        B = np.array(hessian, dtype=float)
        if B.shape != (self.dim,) * 3:
            raise DimensionError("hessian must have shape (d, d, d)")
        self.hessian = 0.5 * (B + np.swapaxes(B, -1, -2))
        self.offset = np.zeros(self.dim) if offset is None else np.array(offset, dtype=float)

    def phi(self, x):
        x = np.asarray(x, dtype=float)
        return (self.offset + x @ self.matrix.T
                + 0.5 * np.einsum("aij,...i,...j->...a", self.hessian, x, x))

    def dphi(self, x):
        x = np.asarray(x, dtype=float)
        return self.matrix + np.einsum("aij,...j->...ai", self.hessian, x)

    def d2phi(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.hessian, x.shape[:-1] + (self.dim,) * 3).copy()


class PolarEmbedding(DeformationChart):
    """(r, theta) -> (r cos theta, r sin theta)."""

    dim = 2

    def phi(self, x):
        x = np.asarray(x, dtype=float)
        r, t = x[..., 0], x[..., 1]
        return np.stack([r * np.cos(t), r * np.sin(t)], axis=-1)

    def dphi(self, x):
        x = np.asarray(x, dtype=float)
        r, t = x[..., 0], x[..., 1]
        c, s = np.cos(t), np.sin(t)
        out = np.empty(x.shape[:-1] + (2, 2))
        out[..., 0, 0] = c
        out[..., 0, 1] = -r * s
        out[..., 1, 0] = s
        out[..., 1, 1] = r * c
        return out

    def d2phi(self, x):
        x = np.asarray(x, dtype=float)
        r, t = x[..., 0], x[..., 1]
        c, s = np.cos(t), np.sin(t)
        out = np.zeros(x.shape[:-1] + (2, 2, 2))
        out[..., 0, 0, 1] = out[..., 0, 1, 0] = -s
        out[..., 0, 1, 1] = -r * c
        out[..., 1, 0, 1] = out[..., 1, 1, 0] = c
        out[..., 1, 1, 1] = -r * s
        return out

    def __repr__(self):
        return "PolarEmbedding()"


def pullback_components(model, phi, dphi, d2phi=None):
    """Batched pullback metric components and (optionally) first partials.

    ``phi`` are N-chart points, ``dphi[..., a, i]`` the Jacobian.  When
    ``d2phi`` is given the chain-rule partials ``dg[..., k, i, j]`` are
    returned as well, otherwise ``None``.
    """
    gh, dgh, _ = model.evaluate(phi)
    g = np.einsum("...ai,...ab,...bj->...ij", dphi, gh, dphi)
    g = 0.5 * (g + np.swapaxes(g, -1, -2))
    if d2phi is None:
        return g, None
    t = np.einsum("...aki,...bj,...ab->...kij", d2phi, dphi, gh)
    dg = (t + np.swapaxes(t, -1, -2)
          + np.einsum("...ai,...bj,...cab,...ck->...kij", dphi, dphi, dgh, dphi))
    dg = 0.5 * (dg + np.swapaxes(dg, -1, -2))
    return g, dg


def _check_immersion(dphi):
    det = np.linalg.det(dphi)
    if np.any(det == 0.0) or not np.all(np.isfinite(det)):
        raise ImmersionError("deformation Jacobian is singular")
    return det


def pullback_metric(model, d, x):
    """Metric g[phi] = phi^* g_hat at a point ``x`` of the M-chart."""
    x = np.asarray(x, dtype=float)
    if d.dim != model.dim:
        raise DimensionError("deformation and ambient model dimensions differ")
    phi, dphi = d.evaluate(x)
    _check_immersion(dphi)
    g, dg = pullback_components(model, phi, dphi, d.d2phi(x))
    return MetricValue(g, dg)


def density_ratio(model, phi0, phi, x):
    """rho with rho * omega[phi] = omega_ref at ``x``.

    Includes the sqrt(det g_hat) factors, so it is valid on curved charts.
    """
    x = np.asarray(x, dtype=float)
    y0, f0 = phi0.evaluate(x)
    y1, f1 = phi.evaluate(x)
    d0 = _check_immersion(f0)
    d1 = _check_immersion(f1)
    v0 = d0 * sqrt_det(model.metric(y0))
    v1 = d1 * sqrt_det(model.metric(y1))
    return v0 / v1
