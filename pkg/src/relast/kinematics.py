"""Strain measures and the displacement -> deformation map."""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DisplacementTooLargeError, InputError
from .geometry import geodesic_exp, pullback_components
from .tensor import DOWN, TensorValue, symmetrized_strain_array


@dataclass
class DisplacementField:
    """Nodal displacement (contravariant, M-chart components) on a mesh."""

    mesh: object
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.mesh.n_nodes, self.mesh.dim):
            raise DimensionError(
                f"displacement needs shape {(self.mesh.n_nodes, self.mesh.dim)}, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InputError("displacement has non-finite components")
        fixed = self.mesh.dirichlet_nodes()
        if np.any(v[fixed] != 0.0):
            raise InputError("displacement must vanish at gamma1 nodes")
        self.values = v

    @classmethod
    def zeros(cls, mesh):
        return cls(mesh, np.zeros((mesh.n_nodes, mesh.dim)))


class NodalDeformation:
    """Piecewise-linear deformation given by N-chart values at mesh nodes."""

    def __init__(self, mesh, values):
        self.mesh = mesh
        self.dim = mesh.dim
        self.values = np.asarray(values, dtype=float)
        if self.values.shape != (mesh.n_nodes, mesh.dim):
            raise DimensionError("nodal deformation has the wrong shape")

    def element_jacobians(self, grads):
        """Element-constant D phi, shape (E, d, d): [e, a, i] = d phi^a / d x^i."""
        y = self.values[self.mesh.elements]  # (E, d+1, d)
        return np.einsum("eka,eki->eai", y, grads)

    def at_points(self, bary):
        """Values at barycentric points (Q, d+1) of every element -> (E, Q, d)."""
        return np.einsum("qk,eka->eqa", bary, self.values[self.mesh.elements])


def strain(g_phi, g0):
    """Green-St Venant strain E = (g[phi] - g0) / 2."""
    if g_phi.dim != g0.dim:
        raise DimensionError("metrics have different dimensions")
    e = 0.5 * (g_phi.g - g0.g)
    return TensorValue(0.5 * (e + e.T), (DOWN, DOWN))


def linearized_strain(xi, dxi, g0, gamma0):
    """e_ij = 1/2 (g0_jk nabla_i xi^k + g0_ik nabla_j xi^k)."""
    dxi = np.asarray(dxi, dtype=float)
    return TensorValue(symmetrized_strain_array(xi.components, dxi, g0.g, gamma0.components),
                       (DOWN, DOWN))


def nodal_pushforward(phi0, nodes, xi):
    """D phi0(x_a) . xi_a at every node, shape (n_nodes, d)."""
    return np.einsum("nai,ni->na", phi0.dphi(nodes), xi)


def displacement_to_deformation(phi0, model, xi, bound=None):
    """Nodal deformation y_a = exp_{phi0(x_a)}(D phi0(x_a) . xi_a).

    ``bound`` overrides the admissibility radius (default: the model's
    injectivity bound over phi0 of the mesh nodes).
    """
    mesh = xi.mesh
    base = phi0.phi(mesh.nodes)
    v = nodal_pushforward(phi0, mesh.nodes, xi.values)
    if bound is None:
        bound = model.injectivity_bound(base)
    g = model.metric(base)
    size = np.sqrt(np.maximum(np.einsum("ni,nij,nj->n", v, g, v), 0.0))
    bad = np.nonzero(~(size < bound))[0]
    if bad.size:
        node = int(bad[np.argmax(size[bad])])
        raise DisplacementTooLargeError(node, float(size[node]), float(bound))
    return NodalDeformation(mesh, geodesic_exp(model, base, v))


def metric_variation_array(gh, dgh, dphi, w, dw):
    """Batched first variation of phi^* g_hat along w.

    ``gh``, ``dgh`` are the ambient metric and its partials at phi(x);
    ``dphi[a, i]`` the Jacobian, ``w`` the variation (N-chart components) and
    ``dw[a, i] = d w^a / d x^i``.
    """
    t = np.einsum("...ai,...bj,...ab->...ij", dw, dphi, gh)
    out = t + np.swapaxes(t, -1, -2)
    out = out + np.einsum("...ai,...bj,...cab,...c->...ij", dphi, dphi, dgh, w)
    return 0.5 * (out + np.swapaxes(out, -1, -2))


def metric_first_variation(model, phi, w, dw, x):
    """d/dt g[phi + t w] at t = 0 for a closed-form deformation ``phi``.

    ``w`` and ``dw[a, i]`` give the variation and its partials at ``x``.
    """
    x = np.asarray(x, dtype=float)
    y, dphi = phi.evaluate(x)
    gh, dgh, _ = model.evaluate(y)
    return TensorValue(metric_variation_array(gh, dgh, dphi, np.asarray(w, float),
                                              np.asarray(dw, float)), (DOWN, DOWN))


def pullback_at(model, phi, x):
    """(g, dg) of the pullback metric for a closed-form deformation, batched."""
    x = np.asarray(x, dtype=float)
    y, dphi = phi.evaluate(x)
    return pullback_components(model, y, dphi, phi.d2phi(x))
