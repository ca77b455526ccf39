"""Extreme generalized eigenvalues and the discrete Korn / Poincare constants.

The smallest eigenvalue of ``A x = lam B x`` (A, B symmetric positive
definite) is found by block inverse iteration: each sweep solves
``A Y = B X`` with block CG and projects onto span(X, Y, P) (Rayleigh-Ritz
with the previous update P).  The Korn spectra cluster at their lower end,
where plain inverse iteration would stall.
"""

from dataclasses import dataclass
import logging
import math

import numpy as np
import scipy.linalg as sla

from .errors import EigenStagnationError, InputError, NonConvergenceError
from .fem import assemble_gram, reference_geometry
from .geometry import ricci_components

log = logging.getLogger(__name__)

EIG_TOL = 1e-8
EIG_MAXITER = 500


@dataclass
class EigenResult:
    value: float
    vector: np.ndarray
    iterations: int
    history: list


def _b_orthonormal(V, B, drop=1e-10):
    """Basis of span(V) orthonormal in the B inner product, dropping
    numerically dependent directions."""
    S = V.T @ (B @ V)
    S = 0.5 * (S + S.T)
    w, U = np.linalg.eigh(S)
    keep = w > drop * w[-1]
    return V @ (U[:, keep] / np.sqrt(w[keep]))


def _b_normalize(V, B):
    """Scale columns to unit B-norm; zero columns are dropped."""
    nrm = np.sqrt(np.maximum(np.einsum("ij,ij->j", V, B @ V), 0.0))
    keep = nrm > 0.0
    return V[:, keep] / nrm[keep]


def smallest_generalized_eigenvalue(A, B, tol=EIG_TOL, maxiter=EIG_MAXITER, block=4,
                                    cg_tol=None, rng=None):
    """Smallest lam with A x = lam B x by accelerated block inverse iteration.

    Each sweep applies A^-1 B to the current block with block CG and does a
    Rayleigh-Ritz projection on span(X, W, P), where W = A^-1 (A X - B X theta)
    is the inverse-preconditioned residual and P the previous update (the
    locally optimal variant of inverse iteration).  Stops when
    the relative change of the smallest Ritz value drops below ``tol``;
    raises :class:`EigenStagnationError` after ``maxiter`` sweeps.
    """
    from .fem import pcg
    n = A.shape[0]
    if n == 0:
        raise InputError("eigenproblem has no degrees of freedom")
    block = max(1, min(block, n))
    rng = np.random.default_rng(12345) if rng is None else rng
    cg_tol = tol * 1e-2 if cg_tol is None else cg_tol
    X = _b_orthonormal(rng.standard_normal((n, block)), B)
    theta = np.einsum("ij,ij->j", X, A @ X)
    P = None
    history = []
    lam_old = math.inf
    for it in range(1, maxiter + 1):
        try:
            Y, _, _ = pcg(A, B @ X, cg_tol)
        except NonConvergenceError as exc:
            raise EigenStagnationError(f"inner CG failed at sweep {it}: {exc}",
                                       history) from exc
        # A^-1 applied to the residual A X - B X theta; near convergence this
        # is small but, unlike A^-1 B X itself, not nearly parallel to X
        W = X - Y * theta
        W = W - X @ (X.T @ (B @ W))
        parts = [X, _b_normalize(W, B)] + ([] if P is None else [_b_normalize(P, B)])
        Q = _b_orthonormal(np.hstack(parts), B)
        Aq = Q.T @ (A @ Q)
        vals, vecs = np.linalg.eigh(0.5 * (Aq + Aq.T))
        k = min(block, vals.size)
        Xn = Q @ vecs[:, :k]
        P = Xn - X @ (X.T @ (B @ Xn))
        X, theta = Xn, vals[:k]
        lam = float(vals[0])
        history.append(lam)
        if abs(lam - lam_old) <= tol * abs(lam):
            return EigenResult(lam, X[:, 0], it, history)
        lam_old = lam
    raise EigenStagnationError(
        f"inverse iteration did not settle to {tol!r} in {maxiter} sweeps", history)


def dense_smallest_eigenvalue(A, B):
    """Dense oracle for small problems."""
    a = A.toarray() if hasattr(A, "toarray") else np.asarray(A)
    b = B.toarray() if hasattr(B, "toarray") else np.asarray(B)
    return float(sla.eigh(a, b, eigvals_only=True)[0])


@dataclass
class KornEstimate:
    """ESTIMATE: discrete Korn constants of the P1 space over the mesh.

    ``C_K`` satisfies ||xi||_H1 <= C_K ||e[xi]||_L2 and ``C_Kstar``
    satisfies ||nabla xi||^2 <= C_Kstar ||L_xi g0||^2 on the free dofs.
    """

    C_K: float
    C_Kstar: float
    lam_K: float
    lam_Kstar: float
    iterations: tuple


def korn_estimate(mesh, model, phi0, tol=EIG_TOL, maxiter=EIG_MAXITER):
    """Discrete Korn constants from two generalized eigenproblems.

    C_K^2 = 1 / lam_min(E, H) with E the Gram matrix of ||e[xi]||^2 and
    H = mass + gradient (the H1 inner product); C_Kstar = 1 / lam_min(4E, G)
    with G the gradient Gram matrix, since ||L_xi g0||^2 = 4 ||e||^2.
    """
    if not np.any(mesh.facet_tags == "gamma1"):
        raise InputError("Korn estimate needs a non-empty gamma1")
    geo = reference_geometry(mesh, model, phi0)
    E, _ = assemble_gram(mesh, model, phi0, "strain", geo=geo)
    G, _ = assemble_gram(mesh, model, phi0, "gradient", geo=geo)
    M, _ = assemble_gram(mesh, model, phi0, "mass", geo=geo)
    r1 = smallest_generalized_eigenvalue(E, (M + G).tocsr(), tol, maxiter)
    r2 = smallest_generalized_eigenvalue(4.0 * E, G, tol, maxiter)
    for r in (r1, r2):
        if not r.value > 0.0:
            raise EigenStagnationError("non-positive Korn eigenvalue; rigid modes present",
                                       r.history)
    return KornEstimate(1.0 / math.sqrt(r1.value), 1.0 / r2.value, r1.value, r2.value,
                        (r1.iterations, r2.iterations))


def korn_bound_formula(C_P, ric):
    """C_K = 2 {(1 + C_P) [2 (1 - C_P ric)]^-1}^(1/2), or None if C_P ric >= 1."""
    if not C_P * ric < 1.0:
        return None
    return 2.0 * math.sqrt((1.0 + C_P) / (2.0 * (1.0 - C_P * ric)))


@dataclass
class PoincareBound:
    """ESTIMATE: discrete Poincare constant, sup |Ric_g0| and the Korn bound."""

    C_P: float
    ric_inf_norm: float
    C_K_bound: object   # float, or None when the bound is not applicable
    iterations: int

    @property
    def applicable(self):
        return self.C_K_bound is not None


def reference_ricci_norm(mesh, model, phi0):
    """max over quadrature points of the g0-operator norm of Ric(g0).

    Ric(g0) is the pullback of the ambient Ricci tensor by D phi0.
    """
    geo = reference_geometry(mesh, model, phi0)
    y, dphi = phi0.evaluate(geo.x)
    ric_hat = ricci_components(model, y)
    ric = np.einsum("...ai,...ab,...bj->...ij", dphi, ric_hat, dphi)
    # eigenvalues of g0^-1 Ric via the symmetric form L^-1 Ric L^-T
    L = np.linalg.cholesky(geo.g)
    Linv = np.linalg.inv(L)
    S = np.einsum("...ia,...ab,...jb->...ij", Linv, ric, Linv)
    ev = np.linalg.eigvalsh(0.5 * (S + np.swapaxes(S, -1, -2)))
    return float(np.max(np.abs(ev)))


def poincare_and_ricci_bound(mesh, model, phi0, tol=EIG_TOL, maxiter=EIG_MAXITER):
    """C_P = 1 / lam_1 of the vector Dirichlet problem, plus the Korn bound."""
    if np.any(mesh.facet_tags != "gamma1"):
        raise InputError("Poincare constant needs gamma1 = whole boundary")
    geo = reference_geometry(mesh, model, phi0)
    G, _ = assemble_gram(mesh, model, phi0, "gradient", geo=geo)
    M, _ = assemble_gram(mesh, model, phi0, "mass", geo=geo)
    r = smallest_generalized_eigenvalue(G, M, tol, maxiter)
    C_P = 1.0 / r.value
    ric = reference_ricci_norm(mesh, model, phi0)
    return PoincareBound(C_P, ric, korn_bound_formula(C_P, ric), r.iterations)
