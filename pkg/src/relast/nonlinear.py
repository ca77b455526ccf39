"""Pure-Dirichlet nonlinear problem and the fixed-Jacobian Newton iteration.

The primal iterate is a free-dof vector xi of nodal M-chart displacements.
Nodal positions in N are y_a = exp_{phi0(x_a)}(D phi0(x_a) xi_a) and the
deformation is their P1 interpolation in N-chart coordinates.  The
reference metric g0 is taken from the same interpolation of phi0, so the
strain vanishes exactly at xi = 0.  Test variations are the fixed nodal
push-forwards w = D phi0(x_a) eta_a.
"""

from dataclasses import dataclass, field
import logging
import math

import numpy as np

from .constitutive import positive_definiteness_estimate
from .errors import (ContractionFailureError, DisplacementTooLargeError, ImmersionError,
                     InputError, NonConvergenceError)
from .fem import (assemble, assemble_gram, element_dofs, live_element_matrices,
                  make_dof_map, pcg, reference_geometry, scatter_matrix, scatter_vector)
from .forces import ambient_dead_load
from .kinematics import DisplacementField, NodalDeformation, displacement_to_deformation
from .mesh import GAMMA1, element_geometry, simplex_rule
from .spectral import korn_estimate, smallest_generalized_eigenvalue
from .tensor import metric_inverse

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAXITER = 200
GROWTH_WINDOW = 5
SOBOLEV_CONSTANT = 1.0


class NonlinearProblem:
    """Discrete residual, energy and linearization of the pure-Dirichlet problem.

    Parameters
    ----------
    mesh : Mesh
        Every boundary facet must be tagged gamma1.
    model : MetricModel
    phi0 : DeformationChart
    mat : MaterialModel
    fm : ForceModel
        Dead body load (M-chart components over the reference volume) plus an
        optional affine live part; tractions are not allowed.
    ball_radius : float, optional
        Admissibility radius for the nodal exp-map arguments.  Defaults to
        the injectivity bound of the model over phi0 of the nodes.
    """

    def __init__(self, mesh, model, phi0, mat, fm, ball_radius=None):
        if np.any(mesh.facet_tags != GAMMA1):
            raise InputError("the nonlinear problem is pure Dirichlet: tag every facet gamma1")
        if fm is not None and fm.traction is not None:
            raise InputError("surface tractions are not supported by the nonlinear problem")
        self.mesh, self.model, self.phi0, self.mat, self.fm = mesh, model, phi0, mat, fm
        d = mesh.dim
        self.dim = d
        self.dof_map = make_dof_map(mesh)
        self.n = int(self.dof_map.max()) + 1 if np.any(self.dof_map >= 0) else 0
        self.edofs = element_dofs(mesh, self.dof_map)
        base = phi0.phi(mesh.nodes)
        self.base = base
        self.ball_radius = (model.injectivity_bound(base) if ball_radius is None
                            else float(ball_radius))

        rule = simplex_rule(d, 2)
        self.rule = rule
        self.vol, self.grads = element_geometry(mesh)
        N = rule.bary
        x_el = mesh.nodes[mesh.elements]
        self.xq = np.einsum("qa,ead->eqd", N, x_el)

        # discrete reference: P1 interpolation of phi0 in N coordinates
        y0 = base[mesh.elements]
        F0 = np.einsum("eka,eki->eai", y0, self.grads)
        if not np.all(np.linalg.det(F0) > 0.0):
            raise ImmersionError("interpolated reference deformation is not orientation preserving")
        self.y0q = np.einsum("qa,ead->eqd", N, y0)
        gh = model.metric(self.y0q)
        g0 = np.einsum("eai,eqab,ebj->eqij", F0, gh, F0)
        self.g0 = 0.5 * (g0 + np.swapaxes(g0, -1, -2))
        self.ginv0 = metric_inverse(self.g0)
        self.weight = rule.weights[None, :] * self.vol[:, None] * np.sqrt(np.linalg.det(self.g0))

        # fixed test variations w = D phi0(x_a) e_c
        D0 = phi0.dphi(mesh.nodes)[mesh.elements]  # (E, d+1, alpha, c)
        self.Wq = np.einsum("qa,eagc->eqacg", N, D0)
        self.dW = np.einsum("eai,eagc->eacgi", self.grads, D0)

        # dead load: ambient covector fixed by the reference components
        if fm is not None and fm.body is not None:
            xq_flat = self.xq.reshape(-1, d)
            fhat = ambient_dead_load(fm, phi0, xq_flat).reshape(self.xq.shape)
        else:
            fhat = np.zeros(self.xq.shape)
        self.fhat = fhat
        load_e = np.einsum("eq,eqg,eqacg->eac", self.weight, fhat, self.Wq)
        self.load = scatter_vector(load_e.reshape(mesh.n_elements, -1), self.edofs, self.n)

        # linear live part and the linearized operator at 0
        self.geo = reference_geometry(mesh, model, phi0)
        if fm is not None and fm.has_live:
            self.live = scatter_matrix(live_element_matrices(self.geo, fm), self.edofs, self.n)
        else:
            self.live = None
        self._stiffness = None
        self._h1 = None

    # -- helpers -----------------------------------------------------------

    @property
    def stiffness(self):
        """Linearized operator at 0, assembled once by the linear discretization."""
        if self._stiffness is None:
            self._stiffness = assemble(self.mesh, self.mat, self.model, self.phi0, self.fm,
                                       geo=self.geo).stiffness
        return self._stiffness

    @property
    def h1_gram(self):
        """Discrete H1 Gram matrix (mass + covariant gradient) over the free dofs."""
        if self._h1 is None:
            M, _ = assemble_gram(self.mesh, self.model, self.phi0, "mass", geo=self.geo)
            G, _ = assemble_gram(self.mesh, self.model, self.phi0, "gradient", geo=self.geo)
            self._h1 = (M + G).tocsr()
        return self._h1

    def h1_norm(self, v):
        v = np.asarray(v, dtype=float)
        return math.sqrt(max(float(v @ (self.h1_gram @ v)), 0.0))

    def dual_norm(self, r):
        """Y-norm surrogate sqrt(r^T H^-1 r) of a residual covector."""
        if not np.any(r):
            return 0.0
        z, _, _ = pcg(self.h1_gram, r, 1e-13)
        return math.sqrt(max(float(r @ z), 0.0))

    def expand(self, v):
        out = np.zeros(self.dof_map.shape)
        mask = self.dof_map >= 0
        out[mask] = np.asarray(v)[self.dof_map[mask]]
        return out

    def restrict(self, nodal):
        out = np.zeros(self.n)
        mask = self.dof_map >= 0
        out[self.dof_map[mask]] = np.asarray(nodal)[mask]
        return out

    def _vec(self, xi):
        if isinstance(xi, DisplacementField):
            return self.restrict(xi.values)
        xi = np.asarray(xi, dtype=float)
        return self.restrict(xi) if xi.ndim == 2 else xi

    def deformation(self, xi):
        """Nodal deformation exp_phi0(xi); raises if xi leaves the admissible ball."""
        v = self._vec(xi)
        field_ = DisplacementField(self.mesh, self.expand(v))
        return displacement_to_deformation(self.phi0, self.model, field_, self.ball_radius)

    def _kinematics(self, y_nodal):
        y = y_nodal[self.mesh.elements]
        F = np.einsum("eka,eki->eai", y, self.grads)
        det = np.linalg.det(F)
        if not np.all(det > 0.0):
            e = int(np.argmin(det))
            raise ImmersionError(f"element {e} is folded (det D phi = {float(det[e])!r})")
        yq = np.einsum("qa,ead->eqd", self.rule.bary, y)
        gh, dgh, _ = self.model.evaluate(yq)
        g = np.einsum("eai,eqab,ebj->eqij", F, gh, F)
        E = 0.25 * (g + np.swapaxes(g, -1, -2)) - 0.5 * self.g0
        return F, det, yq, gh, dgh, E

    # -- residual and energy ----------------------------------------------

    def residual(self, xi):
        """Free-dof residual: internal virtual work minus external work.

        Entry (a, c) is int 1/2 Sigma : delta g[phi; w_ac] sqrt(g0) dx minus
        the dead load work on w_ac and the live load work on N_a e_c.
        """
        v = self._vec(xi)
        y = self.deformation(v).values
        return self._residual_from_nodes(v, y)

    def _residual_from_nodes(self, v, y):
        F, _, _, gh, dgh, E = self._kinematics(y)
        S = self.mat.stress(self.ginv0, E)
        gF = np.einsum("eqab,ebj->eqaj", gh, F)
        t1 = np.einsum("eqij,eacgi,eqgj->eqac", S, self.dW, gF)
        t2 = 0.5 * np.einsum("eqij,eui,evj,eqkuv,eqnck->eqnc", S, F, F, dgh, self.Wq)
        internal = np.einsum("eq,eqac->eac", self.weight, t1 + t2)
        r = scatter_vector(internal.reshape(self.mesh.n_elements, -1), self.edofs, self.n)
        r = r - self.load
        if self.live is not None:
            r = r - self.live @ v
        return r

    def energy(self, xi):
        """Total energy J = int W(E) sqrt(g0) dx - int f_hat . (phi - phi0) sqrt(g0) dx.

        The affine live part has no potential in general and is not included.
        """
        y = self.deformation(xi).values
        return self._energy_from_nodes(y)

    def _energy_from_nodes(self, y):
        _, _, yq, _, _, E = self._kinematics(y)
        W = self.mat.energy(self.ginv0, E)
        work = np.einsum("eqa,eqa->eq", self.fhat, yq - self.y0q)
        return float(np.einsum("eq,eq->", self.weight, W - work))

    def min_det(self, xi):
        y = self.deformation(xi).values
        return orientation_check(self, NodalDeformation(self.mesh, y))["min_det"]

    def solve_linear(self, r, tol=1e-13):
        """K^-1 r with the cached linearized operator."""
        K = self.stiffness
        if not np.any(r):
            return np.zeros_like(r)
        if _is_symmetric(K):
            z, _, _ = pcg(K, r, tol)
            return z
        from .fem import _bicgstab
        z, _, _ = _bicgstab(K, r, tol, 20 * self.n)
        return z


def _is_symmetric(K, rtol=1e-12):
    if K.nnz == 0:
        return True
    return abs(K - K.T).max() <= rtol * abs(K).max()


def orientation_check(p, phi):
    """Minimum element determinant of D phi for P1 or closed-form deformations."""
    mesh = p.mesh
    if not isinstance(phi, NodalDeformation):
        phi = NodalDeformation(mesh, phi.phi(mesh.nodes))
    _, grads = element_geometry(mesh)
    det = np.linalg.det(phi.element_jacobians(grads))
    m = float(np.min(det))
    return {"min_det": m, "ok": bool(m > 0.0)}


def total_energy(p, phi):
    """J at a nodal or closed-form deformation (P1-interpolated)."""
    if not isinstance(phi, NodalDeformation):
        phi = NodalDeformation(p.mesh, phi.phi(p.mesh.nodes))
    return p._energy_from_nodes(phi.values)


# ---------------------------------------------------------------------------
# chord Newton
# ---------------------------------------------------------------------------

@dataclass
class SolveReport:
    """History of a chord-Newton run.

    Row k of the history describes the iterate xi_k (xi_0 = 0):
    ``residual_norms[k]`` = |A[xi_k]|, ``step_norms[k]`` = |xi_k+1 - xi_k|_H1
    (nan for the last row), ``ratios[k]`` = step_k / step_k-1.
    """

    residual_norms: list = field(default_factory=list)
    step_norms: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    min_dets: list = field(default_factory=list)
    xi: object = None
    converged: bool = False
    reason: str = ""
    reference_norm: float = 0.0
    diagnostics: dict = field(default_factory=dict)
    iterates: list = field(default_factory=list)

    @property
    def iterations(self):
        return len(self.residual_norms)

    @property
    def contraction_estimate(self):
        r = [x for x in self.ratios if np.isfinite(x)]
        return max(r) if r else 0.0

    def error_bounds(self):
        """|xi_k - xi*|_H1 <= C^k / (1 - C) |xi_1 - xi_0|_H1, C = max ratio.

        Returns one bound per row, or ``None`` when C >= 1.
        """
        C = self.contraction_estimate
        if not C < 1.0 or not self.step_norms:
            return None
        s0 = self.step_norms[0]
        if not np.isfinite(s0):
            s0 = 0.0
        return [C ** k / (1.0 - C) * s0 for k in range(len(self.residual_norms))]

    def rows(self):
        return list(zip(range(len(self.residual_norms)), self.residual_norms,
                        self.step_norms, self.ratios, self.energies, self.min_dets))


def chord_newton_solve(p, tol=DEFAULT_TOL, maxiter=DEFAULT_MAXITER, keep_iterates=False):
    """xi_k+1 = xi_k - K^-1 A[xi_k] with K the linearized operator at 0.

    Stops when |A[xi_k]| <= tol |A[0]| or when the H1 step falls below
    ``tol``.  Persistent growth of the steps (ratio >= 1 for
    ``GROWTH_WINDOW`` consecutive steps), non-finite values, folded elements,
    iterates outside the admissible ball, or ``maxiter`` with a last ratio >= 1 raise
    :class:`ContractionFailureError`.
    """
    rep = SolveReport()
    v = np.zeros(p.n)
    K = p.stiffness
    if p.n and K.diagonal().min() <= 0.0:
        from .errors import NotPositiveDefiniteError
        raise NotPositiveDefiniteError("linearized operator has a non-positive diagonal")
    growth = 0
    prev_step = math.nan
    for k in range(maxiter + 1):
        try:
            y = p.deformation(v).values
            r = p._residual_from_nodes(v, y)
            J = p._energy_from_nodes(y)
        except (ImmersionError, DisplacementTooLargeError) as exc:
            rep.reason = f"iterate {k} is not admissible: {exc}"
            raise ContractionFailureError(rep.reason, rep) from exc
        rn = float(np.linalg.norm(r))
        if not (np.isfinite(rn) and np.isfinite(J)):
            rep.reason = f"non-finite residual at iterate {k}"
            raise ContractionFailureError(rep.reason, rep)
        if k == 0:
            rep.reference_norm = rn
        rep.residual_norms.append(rn)
        rep.energies.append(J)
        rep.min_dets.append(orientation_check(p, NodalDeformation(p.mesh, y))["min_det"])
        if keep_iterates:
            rep.iterates.append(v.copy())
        if rn <= tol * rep.reference_norm or rn == 0.0:
            rep.step_norms.append(math.nan)
            rep.ratios.append(math.nan)
            rep.converged = True
            rep.reason = "residual"
            break
        if k == maxiter:
            rep.step_norms.append(math.nan)
            rep.ratios.append(math.nan)
            break
        step = -p.solve_linear(r)
        sn = p.h1_norm(step)
        ratio = sn / prev_step if prev_step > 0.0 else math.nan
        rep.step_norms.append(sn)
        rep.ratios.append(ratio)
        growth = growth + 1 if ratio >= 1.0 else 0
        if growth >= GROWTH_WINDOW:
            rep.reason = f"steps grew for {growth} consecutive iterations (ratio {ratio!r})"
            raise ContractionFailureError(rep.reason, rep)
        v = v + step
        prev_step = sn
        if sn <= tol:
            # accept the step and record the final iterate
            try:
                y = p.deformation(v).values
                r = p._residual_from_nodes(v, y)
                rep.residual_norms.append(float(np.linalg.norm(r)))
                rep.energies.append(p._energy_from_nodes(y))
                rep.min_dets.append(orientation_check(p, NodalDeformation(p.mesh, y))["min_det"])
            except (ImmersionError, DisplacementTooLargeError) as exc:
                raise ContractionFailureError(str(exc), rep) from exc
            if keep_iterates:
                rep.iterates.append(v.copy())
            rep.step_norms.append(math.nan)
            rep.ratios.append(math.nan)
            rep.converged = True
            rep.reason = "step"
            break
    rep.xi = DisplacementField(p.mesh, p.expand(v))
    if not rep.converged:
        last = [x for x in rep.ratios if np.isfinite(x)]
        if last and last[-1] >= 1.0:
            rep.reason = "maxiter reached with ratio >= 1"
            raise ContractionFailureError(rep.reason, rep)
        raise NonConvergenceError(f"chord Newton did not converge in {maxiter} iterations",
                                  rep.residual_norms)
    return rep


# ---------------------------------------------------------------------------
# oracles and diagnostics
# ---------------------------------------------------------------------------

def fd_jacobian(p, v, step=None):
    """Dense central-difference Jacobian of the residual at v (test oracle)."""
    v = np.asarray(v, dtype=float)
    h = 1e-6 * _scale(p) if step is None else step
    J = np.zeros((p.n, p.n))
    for j in range(p.n):
        e = np.zeros(p.n)
        e[j] = h
        J[:, j] = (p.residual(v + e) - p.residual(v - e)) / (2.0 * h)
    return J


def _scale(p):
    ext = p.mesh.nodes.max(axis=0) - p.mesh.nodes.min(axis=0)
    return float(np.linalg.norm(ext))


def full_newton_oracle(p, tol=1e-11, maxiter=30):
    """Full Newton with a dense finite-difference Jacobian (small meshes only).

    Iterates until the relative residual is below ``tol`` or stops
    decreasing at round-off level.
    """
    v = np.zeros(p.n)
    r = p.residual(v)
    r0 = np.linalg.norm(r)
    best = r0
    for _ in range(maxiter):
        rn = np.linalg.norm(r)
        if rn <= tol * max(r0, 1e-300):
            return v
        v = v - np.linalg.solve(fd_jacobian(p, v), r)
        r = p.residual(v)
        if np.linalg.norm(r) >= 0.5 * best and best <= 1e-8 * r0:
            return v
        best = min(best, np.linalg.norm(r))
    raise NonConvergenceError("full Newton oracle did not converge")


def directional_derivative(p, v, eta, step=None):
    h = 1e-6 * _scale(p) / max(np.max(np.abs(eta)), 1e-300) if step is None else step
    return (p.residual(v + h * eta) - p.residual(v - h * eta)) / (2.0 * h)


def inverse_norm_estimate(p):
    """ESTIMATE of |A'[0]^-1| from H1-dual to H1: 1 / lam_min(K, H)."""
    K = p.stiffness
    if _is_symmetric(K):
        return 1.0 / smallest_generalized_eigenvalue(K, p.h1_gram).value
    # non-symmetric: dense singular value of L^T K^-1 L
    return dense_inverse_norm(p)


def dense_inverse_norm(p):
    """Dense oracle: largest singular value of L^T K^-1 L with H = L L^T."""
    K = p.stiffness.toarray()
    L = np.linalg.cholesky(p.h1_gram.toarray())
    return float(np.linalg.norm(L.T @ np.linalg.solve(K, L), 2))


def _random_h1_vector(p, rng, radius):
    z = rng.standard_normal(p.n)
    return radius * z / p.h1_norm(z)


def smallness_report(p, rng=None, n_samples=20, n_directions=10, radii_fractions=(0.125, 0.25, 0.5),
                     korn=True):
    """ESTIMATES of the quantities entering the nonlinear smallness conditions.

    All norms are discrete surrogates: X = H1 (Gram matrix H), Y = its dual
    (|r|_Y^2 = r^T H^-1 r).
    """
    rng = np.random.default_rng(2024) if rng is None else rng
    out = {"label": "ESTIMATE"}
    inv = inverse_norm_estimate(p)
    out["inverse_norm"] = inv

    # admissible radius: injectivity bound / (C_S |D phi0|_inf), C_S := 1 (flagged)
    dphi = p.phi0.dphi(p.mesh.nodes)
    dnorm = float(np.max(np.linalg.norm(dphi, ord=2, axis=(-2, -1))))
    out["sobolev_constant"] = SOBOLEV_CONSTANT
    out["sobolev_constant_flag"] = "substituted (not computed)"
    out["dphi0_sup"] = dnorm
    delta_hat = p.ball_radius
    if math.isfinite(delta_hat):
        delta = delta_hat / (SOBOLEV_CONSTANT * dnorm)
        out["delta_flag"] = "injectivity bound"
    else:
        ext = p.mesh.nodes.max(axis=0) - p.mesh.nodes.min(axis=0)
        delta = float(np.linalg.norm(ext))
        out["delta_flag"] = "infinite injectivity bound; domain diameter used"
    out["delta"] = delta

    K = p.stiffness
    per_radius = {}
    skipped = 0
    counts = np.full(len(radii_fractions), n_samples // len(radii_fractions))
    counts[: n_samples % len(radii_fractions)] += 1
    for frac, cnt in zip(radii_fractions, counts):
        r = frac * delta
        worst = 0.0
        evaluated = 0
        for _ in range(int(cnt)):
            xi = _random_h1_vector(p, rng, r)
            try:
                p.residual(xi)
            except (DisplacementTooLargeError, ImmersionError):
                skipped += 1
                continue
            for _ in range(n_directions):
                eta = _random_h1_vector(p, rng, 1.0)
                try:
                    d = directional_derivative(p, xi, eta)
                except (DisplacementTooLargeError, ImmersionError):
                    skipped += 1
                    continue
                worst = max(worst, p.dual_norm(d - K @ eta))
                evaluated += 1
        # a radius with no admissible sample carries no information
        per_radius[r] = worst if evaluated else math.nan
    out["derivative_deviation"] = per_radius
    out["skipped_samples"] = skipped
    usable = [r * (1.0 / inv - s) for r, s in per_radius.items() if math.isfinite(s)]
    eps1 = max(usable) if usable else 0.0
    out["epsilon1"] = eps1
    load = p.dual_norm(p.residual(np.zeros(p.n)))
    out["load_norm"] = load
    out["load_passes"] = bool(load < eps1)

    # linear smallness: |f'| <= C_A / C_K
    A = p.mat.tensor(p.geo.ginv)
    out["C_A"] = positive_definiteness_estimate(A, p.geo.g)
    out["live_norm"] = _live_norm_bound(p)
    if korn:
        kr = korn_estimate(p.mesh, p.model, p.phi0)
        out["C_K"] = kr.C_K
        out["linear_ratio_passes"] = bool(out["live_norm"] <= out["C_A"] / kr.C_K)
    return out


def _live_norm_bound(p):
    """Pointwise upper bound sup(|f1|_g0 + |f2|_g0) of |f'| in L(H1, L2)."""
    fm = p.fm
    if fm is None or not fm.has_live:
        return 0.0
    geo = p.geo
    total = np.zeros(geo.weight.shape)
    if fm.f1 is not None:
        f1 = fm.f1(geo.x)
        total += np.sqrt(np.abs(np.einsum("eqij,eqkl,eqik,eqjl->eq", f1, f1, geo.ginv, geo.g)))
    if fm.f2 is not None:
        f2 = fm.f2(geo.x)
        total += np.sqrt(np.abs(np.einsum("eqikj,eqlmn,eqil,eqkm,eqjn->eq",
                                          f2, f2, geo.ginv, geo.ginv, geo.g)))
    return float(total.max())


def linearization_error(p, n_directions=20, rng=None):
    """Largest relative gap between FD directional derivatives at 0 and K."""
    rng = np.random.default_rng(7) if rng is None else rng
    K = p.stiffness
    worst = 0.0
    zero = np.zeros(p.n)
    for _ in range(n_directions):
        eta = rng.standard_normal(p.n)
        d = directional_derivative(p, zero, eta)
        ref = K @ eta
        worst = max(worst, float(np.linalg.norm(d - ref) / np.linalg.norm(ref)))
    return worst


__all__ = ["NonlinearProblem", "SolveReport", "chord_newton_solve", "orientation_check",
           "total_energy", "smallness_report", "full_newton_oracle", "fd_jacobian",
           "inverse_norm_estimate", "dense_inverse_norm", "linearization_error"]
