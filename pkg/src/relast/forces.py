"""Dead and affine live force models, and the normal trace on facets."""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DegenerateFacetError, DimensionError, VarianceError
from .tensor import DOWN, UP, TensorValue, metric_inverse, sqrt_det

PROFILES = ("none", "constant", "sine2d", "poly2d")


def profile_field(profile, amplitude=1.0, vector=None, dim=2):
    """Covector field x -> f(x) from the fixed profile menu.

    * ``constant``: f_i = A v_i
    * ``sine2d``:   f_i = A v_i sin(pi x1) sin(pi x2)
    * ``poly2d``:   f_i = A v_i 16 x1 (1 - x1) x2 (1 - x2)

    ``vector`` defaults to all ones.
    """
    v = np.ones(dim) if vector is None else np.asarray(vector, dtype=float)
    if v.shape != (dim,):
        raise DimensionError(f"profile vector must have {dim} components")
    amp = float(amplitude)
    if profile == "none":
        return None
    if profile == "constant":
        def f(x):
            x = np.asarray(x, dtype=float)
            return np.broadcast_to(amp * v, x.shape).copy()
    elif profile == "sine2d":
        def f(x):
            x = np.asarray(x, dtype=float)
            s = np.sin(math.pi * x[..., 0]) * np.sin(math.pi * x[..., 1])
            return amp * s[..., None] * v
    elif profile == "poly2d":
        def f(x):
            x = np.asarray(x, dtype=float)
            p = 16.0 * x[..., 0] * (1 - x[..., 0]) * x[..., 1] * (1 - x[..., 1])
            return amp * p[..., None] * v
    else:
        raise ValueError(f"unknown force profile {profile!r}; choose from {PROFILES}")
    return f


def _const_field(value):
    value = np.asarray(value, dtype=float)

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(value, x.shape[:-1] + value.shape).copy()
    return f


@dataclass
class ForceModel:
    """Applied forces on the reference configuration.

    ``body(x)`` returns the dead body force f(x) (covector per unit reference
    volume, M-chart components); ``f1`` (i, j) and ``f2`` (i, k, j) give the
    live affine part ``f1_ij xi^j + f2[i, k, j] nabla_k xi^j``;
    ``traction(x)`` is the dead surface force on gamma2 per unit reference
    facet measure.  Any of them may be ``None``.  ``f1``/``f2`` may be
    constant arrays or callables of x.
    """

    dim: int
    body: object = None
    f1: object = None
    f2: object = None
    traction: object = None

    def __post_init__(self):
        for name in ("f1", "f2"):
            val = getattr(self, name)
            if val is not None and not callable(val):
                arr = np.asarray(val, dtype=float)
                want = (self.dim,) * (2 if name == "f1" else 3)
                if arr.shape != want:
                    raise DimensionError(f"{name} must have shape {want}")
                if not np.all(np.isfinite(arr)):
                    raise ValueError(f"{name} has non-finite entries")
                setattr(self, name, _const_field(arr))
        if self.traction is not None and not callable(self.traction):
            self.traction = _const_field(self.traction)
        if self.body is not None and not callable(self.body):
            self.body = _const_field(self.body)

    @property
    def has_live(self):
        return self.f1 is not None or self.f2 is not None

    def body_at(self, x):
        x = np.asarray(x, dtype=float)
        if self.body is None:
            return np.zeros(x.shape)
        return self.body(x)

    def scaled(self, factor):
        """Same model with the dead loads multiplied by ``factor``."""
        body = None if self.body is None else (lambda x, b=self.body: factor * b(x))
        tr = None if self.traction is None else (lambda x, t=self.traction: factor * t(x))
        return ForceModel(self.dim, body, self.f1, self.f2, tr)


def live_term_array(fm, x, xi, nabla_xi):
    """f1 . xi + f2 : nabla xi at points x, batched; zeros if no live part."""
    out = np.zeros(np.shape(xi))
    if fm.f1 is not None:
        out = out + np.einsum("...ij,...j->...i", fm.f1(x), xi)
    if fm.f2 is not None:
        out = out + np.einsum("...ikj,...kj->...i", fm.f2(x), nabla_xi)
    return out


def body_force_affine(fm, xi, dxi, x, gamma0=None):
    """f(x) + f1 . xi + f2 : nabla xi as a covector per unit reference volume.

    ``dxi[i, j] = d_i xi^j``; the covariant derivative uses ``gamma0``
    (reference Christoffels) when given, otherwise the coordinate partials.
    """
    x = np.asarray(x, dtype=float)
    xi_c = xi.components if isinstance(xi, TensorValue) else np.asarray(xi, dtype=float)
    nab = np.asarray(dxi, dtype=float)
    if gamma0 is not None:
        gam = gamma0.components if isinstance(gamma0, TensorValue) else np.asarray(gamma0)
        nab = nab + np.einsum("jik,k->ij", gam, xi_c)
    val = fm.body_at(x) + live_term_array(fm, x, xi_c, nab)
    return TensorValue(val, (DOWN,))


def ambient_dead_load(fm, phi0, x):
    """Ambient dead covector f^_a with d_i phi0^a f^_a = f_i at x."""
    x = np.asarray(x, dtype=float)
    f = fm.body_at(x)
    F0 = phi0.dphi(x)
    return np.linalg.solve(np.swapaxes(F0, -1, -2), f[..., None])[..., 0]


def dead_force_pullback(fm, phi, x, phi0=None):
    """Dead load seen by the deformation ``phi`` at x.

    Returns ``(f_M, f_hat)``: the M-chart components d_i phi^a f^_a of the
    load in the configuration phi, and the ambient covector f^_a itself,
    which does not depend on phi.  Both are per unit reference volume.
    ``phi0`` fixes the ambient covector from the reference components; the
    identity is assumed when it is omitted.
    """
    x = np.asarray(x, dtype=float)
    if phi0 is None:
        f_hat = fm.body_at(x)
    else:
        f_hat = ambient_dead_load(fm, phi0, x)
    F = phi.dphi(x)
    f_m = np.einsum("...ai,...a->...i", F, f_hat)
    return TensorValue(f_m, (DOWN,)), TensorValue(f_hat, (DOWN,))


def facet_normal(vertices, outward):
    """Euclidean coordinate measure and unit normal of a flat facet.

    ``vertices`` is (d, d) in chart coordinates; ``outward`` any vector with
    positive component along the outward direction (e.g. facet point minus
    the opposite element vertex).
    """
    pts = np.asarray(vertices, dtype=float)
    d = pts.shape[1]
    if pts.shape != (d, d) or d not in (2, 3):
        raise DimensionError("facet needs d vertices in d dimensions")
    if d == 2:
        t = pts[1] - pts[0]
        n = np.array([t[1], -t[0]])
        meas = float(np.linalg.norm(t))
    else:
        n = np.cross(pts[1] - pts[0], pts[2] - pts[0])
        meas = 0.5 * float(np.linalg.norm(n))
    norm = np.linalg.norm(n)
    if not norm > 0.0:
        raise DegenerateFacetError("facet has zero measure")
    n = n / norm
    if np.dot(n, np.asarray(outward, dtype=float)) < 0:
        n = -n
    return meas, n


def normal_trace(T, g, vertices, outward, density=None):
    """Traction covector and facet measure of the normal trace.

    ``T`` has a contravariant first slot (M) and a covariant second slot
    (M or ambient).  Its components are taken over the volume form
    ``density * dx``; ``density`` defaults to sqrt(det g), i.e. over the
    volume form of ``g``.  Returns ``(traction, measure)`` where
    ``traction_a = T^i_a nu_i`` with ``nu`` the g-unit outward conormal and
    ``measure`` the integral of i_nu(density dx) over the facet.  Their
    product does not depend on ``g``.
    """
    gm = g.g if hasattr(g, "g") else np.asarray(g, dtype=float)
    comps = T.components if isinstance(T, TensorValue) else np.asarray(T, dtype=float)
    if isinstance(T, TensorValue) and T.variance[0] != UP:
        raise VarianceError("normal trace contracts a contravariant first slot")
    meas_e, n = facet_normal(vertices, outward)
    ginv = metric_inverse(gm)
    nrm = math.sqrt(float(n @ ginv @ n))
    nu = n / nrm
    theta = float(sqrt_det(gm)) if density is None else float(density)
    traction = np.einsum("ia,i->a", comps, nu)
    return TensorValue(traction, (DOWN,)), theta * nrm * meas_e
