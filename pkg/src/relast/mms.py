"""Manufactured solutions: forcing oracle, error norms and convergence studies."""

from dataclasses import dataclass, field
import math

import numpy as np

from .constitutive import MaterialModel
from .errors import InputError
from .fem import ERROR_DEGREE, assemble, reference_geometry, solve_cg
from .forces import ForceModel, live_term_array
from .geometry import pullback_components
from .mesh import generate_mesh
from .tensor import christoffel_array, metric_inverse, symmetrized_strain_array

FD_RELATIVE_STEP = 1e-4


def fd_gradient(f, x, h):
    """Fourth-order central differences: out[..., i, *] = d_i f(x)."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    parts = []
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        parts.append((f(x - 2 * e) - 8.0 * f(x - e) + 8.0 * f(x + e) - f(x + 2 * e))
                     / (12.0 * h))
    return np.stack(parts, axis=x.ndim - 1)


@dataclass
class ManufacturedProblem:
    """Closed-form displacement on a box with pure Dirichlet conditions.

    ``exact(x)`` maps points (..., d) to contravariant components (..., d);
    ``exact_grad(x)`` optionally gives ``[..., i, j] = d_i xi^j``, otherwise
    it is differenced.
    """

    box: list
    model: object
    phi0: object
    mat: MaterialModel
    exact: object
    exact_grad: object = None
    f1: object = None
    f2: object = None
    step: float = None

    def __post_init__(self):
        self.box = [tuple(map(float, b)) for b in self.box]
        if self.step is None:
            size = max(hi - lo for lo, hi in self.box)
            self.step = FD_RELATIVE_STEP * size

    @property
    def live(self):
        return ForceModel(len(self.box), None, self.f1, self.f2)

    def gradient(self, x):
        if self.exact_grad is not None:
            return self.exact_grad(x)
        return fd_gradient(self.exact, x, self.step)

    def reference(self, x):
        """(g0, ginv0, sqrt det g0, Christoffels) at points x."""
        y, dphi = self.phi0.evaluate(x)
        g, dg = pullback_components(self.model, y, dphi, self.phi0.d2phi(x))
        ginv = metric_inverse(g)
        return g, ginv, np.sqrt(np.linalg.det(g)), christoffel_array(ginv, dg)

    def stress_density(self, x, grad=None):
        """sqrt(g0) T^i_k of the linearized stress of the exact field."""
        g, ginv, sg, gamma = self.reference(x)
        xi = self.exact(x)
        dxi = fd_gradient(self.exact, x, self.step) if grad is None else grad(x)
        e = symmetrized_strain_array(xi, dxi, g, gamma)
        sigma = self.mat.stress(ginv, e)
        T = np.einsum("...ij,...jk->...ik", sigma, g)
        return sg[..., None, None] * T

    def forcing(self, x):
        """Dead load f_k = -(div T)_k - live_k evaluated by nested differences.

        (div T)_k = (1/sqrt g) d_i(sqrt g T^i_k) - Gamma^l_ik T^i_l.
        """
        x = np.asarray(x, dtype=float)
        grad = self.exact_grad
        dens = fd_gradient(lambda z: self.stress_density(z, grad), x, self.step)
        div_flux = np.einsum("...iik->...k", dens)
        g, ginv, sg, gamma = self.reference(x)
        T = self.stress_density(x, grad) / sg[..., None, None]
        div = div_flux / sg[..., None] - np.einsum("...lik,...il->...k", gamma, T)
        f = -div
        live = self.live
        if live.has_live:
            xi = self.exact(x)
            nab = self.gradient(x) + np.einsum("...jik,...k->...ij", gamma, xi)
            f = f - live_term_array(live, x, xi, nab)
        return f

    def force_model(self):
        return ForceModel(len(self.box), self.forcing, self.f1, self.f2)


def error_norms(mesh, problem, nodal):
    """(L2, H1) norms of the error of a nodal P1 field, degree-4 quadrature.

    Both use the reference metric; the H1 norm is
    (||e||^2 + ||nabla e||^2)^(1/2) with the covariant gradient.
    """
    geo = reference_geometry(mesh, problem.model, problem.phi0, ERROR_DEGREE)
    u = np.asarray(nodal, dtype=float)[mesh.elements]  # (E, d+1, d)
    uh = np.einsum("qa,eaj->eqj", geo.bary, u)
    duh = np.einsum("eai,eaj->eij", geo.grads, u)[:, None]
    err = uh - problem.exact(geo.x)
    derr = duh - problem.gradient(geo.x)
    nab = derr + np.einsum("eqjik,eqk->eqij", geo.gamma, err)
    l2 = np.einsum("eq,eqij,eqi,eqj->", geo.weight, geo.g, err, err)
    semi = np.einsum("eq,eqij,eqkl,eqki,eqlj->", geo.weight, geo.g, geo.ginv, nab, nab)
    return math.sqrt(max(l2, 0.0)), math.sqrt(max(l2 + semi, 0.0))


@dataclass
class ConvergenceTable:
    h: list = field(default_factory=list)
    l2_error: list = field(default_factory=list)
    h1_error: list = field(default_factory=list)
    l2_rate: list = field(default_factory=list)
    h1_rate: list = field(default_factory=list)
    iterations: list = field(default_factory=list)

    def rows(self):
        return list(zip(self.h, self.l2_error, self.h1_error, self.l2_rate, self.h1_rate))


def observed_rate(e1, e2, h1, h2):
    if not (e1 > 0.0 and e2 > 0.0):
        return math.nan
    return math.log(e1 / e2) / math.log(h1 / h2)


def convergence_study(problem, levels, tol=1e-12, maxiter=None):
    """Solve the manufactured problem on each resolution and tabulate errors.

    ``levels`` holds per-axis cell counts (an int applies to every axis).
    Rates compare consecutive levels: log(e_k-1 / e_k) / log(h_k-1 / h_k).
    """
    table = ConvergenceTable()
    fm = problem.force_model()
    dim = len(problem.box)
    for level in levels:
        res = [level] * dim if np.isscalar(level) else list(level)
        mesh = generate_mesh(problem.box, res)
        fixed = mesh.dirichlet_nodes()
        if fixed.size and np.max(np.abs(problem.exact(mesh.nodes[fixed]))) > 1e-12:
            raise InputError("exact field does not vanish on gamma1")
        sys = assemble(mesh, problem.mat, problem.model, problem.phi0, fm)
        xi, it = solve_cg(sys, tol, maxiter)
        l2, h1 = error_norms(mesh, problem, xi.values)
        table.h.append(mesh.h)
        table.l2_error.append(l2)
        table.h1_error.append(h1)
        table.iterations.append(it)
        if len(table.h) == 1:
            table.l2_rate.append(math.nan)
            table.h1_rate.append(math.nan)
        else:
            table.l2_rate.append(observed_rate(table.l2_error[-2], l2, table.h[-2], mesh.h))
            table.h1_rate.append(observed_rate(table.h1_error[-2], h1, table.h[-2], mesh.h))
    return table


def sine_field(box, direction=None):
    """sin(pi (x1 - a1)/L1) sin(pi (x2 - a2)/L2) ... times a fixed vector.

    Returns ``(exact, exact_grad)``; the field vanishes on the whole box
    boundary.
    """
    lo = np.array([b[0] for b in box], dtype=float)
    L = np.array([b[1] - b[0] for b in box], dtype=float)
    d = len(box)
    v = np.ones(d) if direction is None else np.asarray(direction, dtype=float)
    k = math.pi / L

    def exact(x):
        x = np.asarray(x, dtype=float)
        s = np.prod(np.sin(k * (x - lo)), axis=-1)
        return s[..., None] * v

    def exact_grad(x):
        x = np.asarray(x, dtype=float)
        s = np.sin(k * (x - lo))
        c = np.cos(k * (x - lo))
        parts = []
        for i in range(d):
            p = k[i] * c[..., i]
            for j in range(d):
                if j != i:
                    p = p * s[..., j]
            parts.append(p)
        ds = np.stack(parts, axis=-1)
        return ds[..., :, None] * v

    return exact, exact_grad
