"""P1 Galerkin discretization of the linearized problem and its CG solver.

Degrees of freedom are nodal M-chart vector components.  The global index
of (node n, component c) is ``dof_map[n, c]``; gamma1 nodes carry ``-1``
and are eliminated.  All element quantities are evaluated at once with
``einsum`` and scattered through a COO triplet list in ascending element
order, so assembly is bit-reproducible.
"""

from dataclasses import dataclass
import logging

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (ImmersionError, InputError, NonConvergenceError,
                     NotPositiveDefiniteError)
from .geometry import pullback_components
from .kinematics import DisplacementField
from .mesh import GAMMA2, element_geometry, quadrature_points, simplex_rule
from .tensor import christoffel_array, metric_inverse

log = logging.getLogger(__name__)

ASSEMBLY_DEGREE = 2
ERROR_DEGREE = 4


# ---------------------------------------------------------------------------
# reference geometry at quadrature points
# ---------------------------------------------------------------------------

@dataclass
class ReferenceGeometry:
    """Reference metric data g0 = phi0^* g_hat at the quadrature points.

    Arrays carry leading axes (E, Q).  ``weight`` already contains the
    quadrature weight, the element volume and sqrt(det g0).
    """

    mesh: object
    rule: object
    x: np.ndarray
    bary: np.ndarray
    grads: np.ndarray
    vol: np.ndarray
    g: np.ndarray
    ginv: np.ndarray
    sqrtg: np.ndarray
    gamma: np.ndarray
    weight: np.ndarray


def reference_geometry(mesh, model, phi0, degree=ASSEMBLY_DEGREE):
    rule = simplex_rule(mesh.dim, degree)
    vol, grads = element_geometry(mesh)
    x = quadrature_points(mesh, rule)
    y, dphi = phi0.evaluate(x)
    det = np.linalg.det(dphi)
    if not np.all(det > 0.0):
        raise ImmersionError("reference deformation is not an orientation-preserving "
                             "immersion at every quadrature point")
    g, dg = pullback_components(model, y, dphi, phi0.d2phi(x))
    ginv = metric_inverse(g)
    sqrtg = np.sqrt(np.linalg.det(g))
    gamma = christoffel_array(ginv, dg)
    weight = rule.weights[None, :] * vol[:, None] * sqrtg
    return ReferenceGeometry(mesh, rule, x, rule.bary, grads, vol, g, ginv, sqrtg,
                             gamma, weight)


def basis_covariant_gradients(geo):
    """B[e, q, a, c, i, k] = nabla_i of the basis field N_a e_c, component k."""
    E, Q = geo.weight.shape
    d = geo.mesh.dim
    eye = np.eye(d)
    # partial derivative part: d_i N_a delta^k_c
    B = np.einsum("eai,kc->eacik", geo.grads, eye)[:, None]
    B = np.broadcast_to(B, (E, Q, d + 1, d, d, d)).copy()
    # connection part: Gamma^k_{i c} N_a
    B += np.einsum("qa,eqkic->eqacik", geo.bary, geo.gamma)
    return B


def basis_strains(geo, B=None):
    """Linearized strains of the basis fields, e[e, q, a, c, i, j]."""
    if B is None:
        B = basis_covariant_gradients(geo)
    t = np.einsum("eqjk,eqacik->eqacij", geo.g, B)
    return 0.5 * (t + np.swapaxes(t, -1, -2))


# ---------------------------------------------------------------------------
# element matrices
# ---------------------------------------------------------------------------

def elasticity_element_matrices(geo, mat, eps=None):
    """Element matrices of int (A : e[xi]) : e[eta] sqrt(g0) dx, shape (E, n, n)."""
    if eps is None:
        eps = basis_strains(geo)
    A = mat.tensor(geo.ginv)
    ae = np.einsum("eqijkl,eqbdkl->eqbdij", A, eps)
    Ke = np.einsum("eq,eqacij,eqbdij->eacbd", geo.weight, eps, ae)
    return _flatten(Ke)


def live_element_matrices(geo, fm, B=None):
    """Element matrices of int (f1 . xi + f2 : nabla xi) . eta sqrt(g0) dx."""
    E, Q = geo.weight.shape
    d = geo.mesh.dim
    Ke = np.zeros((E, d + 1, d, d + 1, d))
    if fm is None or not fm.has_live:
        return _flatten(Ke)
    if B is None:
        B = basis_covariant_gradients(geo)
    N = geo.bary
    if fm.f1 is not None:
        f1 = fm.f1(geo.x)  # (E, Q, d, d)
        Ke += np.einsum("eq,qa,eqcd,qb->eacbd", geo.weight, N, f1, N)
    if fm.f2 is not None:
        f2 = fm.f2(geo.x)  # (E, Q, i, k, j)
        Ke += np.einsum("eq,qa,eqckj,eqbdkj->eacbd", geo.weight, N, f2, B)
    return _flatten(Ke)


def mass_element_matrices(geo):
    """Element matrices of int g0(xi, eta) sqrt(g0) dx."""
    N = geo.bary
    Me = np.einsum("eq,qa,eqcd,qb->eacbd", geo.weight, N, geo.g, N)
    return _flatten(Me)


def gradient_element_matrices(geo, B=None):
    """Element matrices of int g0_ij g0^kl nabla_k xi^i nabla_l eta^j sqrt(g0) dx."""
    if B is None:
        B = basis_covariant_gradients(geo)
    Ge = np.einsum("eq,eqkl,eqij,eqacki,eqbdlj->eacbd",
                   geo.weight, geo.ginv, geo.g, B, B)
    return _flatten(Ge)


def _flatten(Ke):
    E, n1, d = Ke.shape[:3]
    return Ke.reshape(E, n1 * d, n1 * d)


# ---------------------------------------------------------------------------
# global assembly
# ---------------------------------------------------------------------------

def make_dof_map(mesh, constrained=True):
    """(n_nodes, d) global dof indices; -1 on gamma1 nodes when constrained."""
    d = mesh.dim
    free = np.ones(mesh.n_nodes, dtype=bool)
    if constrained:
        free[mesh.dirichlet_nodes()] = False
    dof = np.full((mesh.n_nodes, d), -1, dtype=np.int64)
    dof[free] = np.arange(int(free.sum()) * d).reshape(-1, d)
    return dof


def element_dofs(mesh, dof_map):
    """(E, (d+1) d) global indices of the local dofs, -1 where eliminated."""
    return dof_map[mesh.elements].reshape(mesh.n_elements, -1)


def scatter_matrix(Ke, edofs, n):
    """Sum element matrices into a CSR matrix, dropping eliminated dofs."""
    E, m, _ = Ke.shape
    rows = np.broadcast_to(edofs[:, :, None], (E, m, m)).ravel()
    cols = np.broadcast_to(edofs[:, None, :], (E, m, m)).ravel()
    vals = Ke.ravel()
    keep = (rows >= 0) & (cols >= 0)
    K = sp.coo_matrix((vals[keep], (rows[keep], cols[keep])), shape=(n, n))
    K = K.tocsr()
    K.sum_duplicates()
    K.sort_indices()
    return K


def scatter_vector(fe, edofs, n):
    keep = edofs.ravel() >= 0
    out = np.zeros(n)
    np.add.at(out, edofs.ravel()[keep], fe.ravel()[keep])
    return out


@dataclass
class LinearSystem:
    """Stiffness and load over the free (non-gamma1) degrees of freedom."""

    mesh: object
    stiffness: object
    rhs: np.ndarray
    dof_map: np.ndarray

    @property
    def n_dofs(self):
        return self.rhs.shape[0]

    def expand(self, u):
        """Nodal (n_nodes, d) array from a free-dof vector (zeros on gamma1)."""
        out = np.zeros(self.dof_map.shape)
        mask = self.dof_map >= 0
        out[mask] = np.asarray(u)[self.dof_map[mask]]
        return out

    def restrict(self, nodal):
        nodal = np.asarray(nodal, dtype=float)
        out = np.zeros(self.n_dofs)
        mask = self.dof_map >= 0
        out[self.dof_map[mask]] = nodal[mask]
        return out

    def is_symmetric(self, rtol=1e-12):
        K = self.stiffness
        scale = abs(K).max() if K.nnz else 0.0
        diff = abs(K - K.T).max() if K.nnz else 0.0
        return diff <= rtol * scale


def body_load_vector(geo, fm, edofs, n):
    f = fm.body_at(geo.x)  # (E, Q, d)
    fe = np.einsum("eq,qa,eqc->eac", geo.weight, geo.bary, f)
    return scatter_vector(fe.reshape(fe.shape[0], -1), edofs, n)


def traction_load_vector(mesh, model, phi0, fm, dof_map, degree=ASSEMBLY_DEGREE):
    """Dead gamma2 tractions per unit reference facet measure i_nu omega0."""
    n = int(dof_map.max()) + 1 if dof_map.size else 0
    out = np.zeros(n)
    ids = np.nonzero(mesh.facet_tags == GAMMA2)[0]
    if fm is None or fm.traction is None or ids.size == 0:
        return out
    from .mesh import facet_geometry
    d = mesh.dim
    rule = simplex_rule(d - 1, degree)
    meas, normal = facet_geometry(mesh, ids)
    fverts = mesh.facets[ids]  # (F, d)
    x = np.einsum("qa,fad->fqd", rule.bary, mesh.nodes[fverts])
    y, dphi = phi0.evaluate(x)
    g, _ = pullback_components(model, y, dphi)
    ginv = metric_inverse(g)
    nrm = np.sqrt(np.einsum("fi,fqij,fj->fq", normal, ginv, normal))
    dens = np.sqrt(np.linalg.det(g)) * nrm  # i_nu omega0 per unit coordinate measure
    h = fm.traction(x)
    fe = np.einsum("q,f,fq,qa,fqc->fac", rule.weights, meas, dens, rule.bary, h)
    fdofs = dof_map[fverts].reshape(len(ids), -1)
    return out + scatter_vector(fe.reshape(len(ids), -1), fdofs, n)


def assemble(mesh, mat, model, phi0, fm=None, constrained=True, geo=None):
    """Stiffness and load of the linearized problem.

    ``a(xi, eta) = int (A : e[xi]) : e[eta] sqrt(g0) dx
    - int (f1 . xi + f2 : nabla xi) . eta sqrt(g0) dx`` on the left and the
    dead body load plus gamma2 tractions on the right.  ``constrained=False``
    keeps every node free (used to inspect the kernel of the form).
    """
    if mesh.dim != model.dim:
        raise InputError("mesh and metric model dimensions differ")
    geo = reference_geometry(mesh, model, phi0) if geo is None else geo
    dof_map = make_dof_map(mesh, constrained)
    n = int(dof_map.max()) + 1 if np.any(dof_map >= 0) else 0
    edofs = element_dofs(mesh, dof_map)
    B = basis_covariant_gradients(geo)
    Ke = elasticity_element_matrices(geo, mat, basis_strains(geo, B))
    if fm is not None and fm.has_live:
        Ke = Ke - live_element_matrices(geo, fm, B)
    K = scatter_matrix(Ke, edofs, n)
    rhs = np.zeros(n)
    if fm is not None:
        rhs = body_load_vector(geo, fm, edofs, n)
        rhs = rhs + traction_load_vector(mesh, model, phi0, fm, dof_map)
    if not (np.all(np.isfinite(K.data)) and np.all(np.isfinite(rhs))):
        raise InputError("assembled system has non-finite entries")
    return LinearSystem(mesh, K, rhs, dof_map)


def assemble_gram(mesh, model, phi0, kind, constrained=True, geo=None):
    """Gram matrix of the reference L2 ("mass"), gradient ("gradient") or
    strain ("strain", i.e. ||e[xi]||^2) inner product over the free dofs."""
    geo = reference_geometry(mesh, model, phi0) if geo is None else geo
    dof_map = make_dof_map(mesh, constrained)
    n = int(dof_map.max()) + 1 if np.any(dof_map >= 0) else 0
    edofs = element_dofs(mesh, dof_map)
    if kind == "mass":
        Ke = mass_element_matrices(geo)
    elif kind == "gradient":
        Ke = gradient_element_matrices(geo)
    elif kind == "strain":
        eps = basis_strains(geo)
        Ke = _flatten(np.einsum("eq,eqik,eqjl,eqacij,eqbdkl->eacbd",
                                geo.weight, geo.ginv, geo.ginv, eps, eps))
    else:
        raise ValueError(f"unknown Gram kind {kind!r}")
    return scatter_matrix(Ke, edofs, n), dof_map


# ---------------------------------------------------------------------------
# conjugate gradients
# ---------------------------------------------------------------------------

def pcg(K, b, tol=1e-10, maxiter=None, x0=None):
    """Jacobi-preconditioned CG for SPD ``K``.

    ``b`` may be a vector or an (n, m) block of independent right-hand
    sides; the columns are iterated together but each keeps its own step
    lengths.  Returns ``(x, iterations, history)`` where ``history`` lists
    the largest relative residual per iteration.  Raises
    :class:`NotPositiveDefiniteError` when p^T K p <= 0 and
    :class:`NonConvergenceError` after ``maxiter`` iterations.
    """
    b = np.asarray(b, dtype=float)
    vec = b.ndim == 1
    B = b[:, None] if vec else b
    n, m = B.shape
    maxiter = max(10 * n, 100) if maxiter is None else int(maxiter)
    bnorm = np.linalg.norm(B, axis=0)
    X = np.zeros_like(B) if x0 is None else np.array(x0, dtype=float).reshape(n, m)
    if n == 0:
        return (X[:, 0] if vec else X), 0, []
    diag = K.diagonal() if sp.issparse(K) else np.diag(K).copy()
    if np.any(~(diag > 0.0)):
        raise NotPositiveDefiniteError("stiffness has a non-positive diagonal entry")
    dinv = 1.0 / diag
    R = B - K @ X
    active = bnorm > 0.0
    X[:, ~active] = 0.0
    R[:, ~active] = 0.0
    scale = np.where(active, bnorm, 1.0)
    rel = np.linalg.norm(R, axis=0) / scale
    history = [float(rel.max())]
    if np.all(rel <= tol):
        return (X[:, 0] if vec else X), 0, history
    Z = dinv[:, None] * R
    P = Z.copy()
    rz = np.einsum("ij,ij->j", R, Z)
    for it in range(1, maxiter + 1):
        KP = K @ P
        pkp = np.einsum("ij,ij->j", P, KP)
        live = rel > tol
        if np.any(live & ~(pkp > 0.0)):
            raise NotPositiveDefiniteError(
                f"p^T K p = {float(np.min(pkp[live]))!r} <= 0 at CG iteration {it}")
        alpha = np.where(live, rz / np.where(live, pkp, 1.0), 0.0)
        X += alpha * P
        R -= alpha * KP
        rel = np.linalg.norm(R, axis=0) / scale
        history.append(float(rel.max()))
        if np.all(rel <= tol):
            return (X[:, 0] if vec else X), it, history
        Z = dinv[:, None] * R
        rz_new = np.einsum("ij,ij->j", R, Z)
        beta = np.where(live, rz_new / np.where(rz > 0.0, rz, 1.0), 0.0)
        P = Z + beta * P
        rz = rz_new
    raise NonConvergenceError(
        f"CG did not reach relative residual {tol!r} in {maxiter} iterations "
        f"(last {history[-1]!r})", history)


def _bicgstab(K, b, tol, maxiter):
    diag = K.diagonal()
    if np.any(diag == 0.0):
        raise NotPositiveDefiniteError("stiffness has a zero diagonal entry")
    M = spla.LinearOperator(K.shape, matvec=lambda v: v / diag)
    history = []

    def record(xk):
        history.append(float(np.linalg.norm(b - K @ xk) / np.linalg.norm(b)))

    x, info = spla.bicgstab(K, b, rtol=tol, atol=0.0, maxiter=maxiter, M=M, callback=record)
    if info != 0:
        raise NonConvergenceError(f"BiCGSTAB failed to converge (info={info})", history)
    return x, len(history), history


def solve_cg(sys, tol=1e-10, maxiter=None):
    """Solve the linear system; returns ``(DisplacementField, iterations)``.

    Symmetric systems use Jacobi-preconditioned CG.  Live loads with a
    non-symmetric part make the stiffness non-symmetric; those fall back to
    BiCGSTAB with the same preconditioner.
    """
    if sys.n_dofs == 0 or not np.any(sys.rhs):
        return DisplacementField.zeros(sys.mesh), 0
    if sys.is_symmetric():
        u, it, _ = pcg(sys.stiffness, sys.rhs, tol, maxiter)
    else:
        log.info("stiffness is not symmetric; using BiCGSTAB")
        u, it, _ = _bicgstab(sys.stiffness, sys.rhs, tol,
                             maxiter if maxiter is not None else 10 * sys.n_dofs)
    return DisplacementField(sys.mesh, sys.expand(u)), it


def dense_solve(sys):
    """Dense LU solve of the system (test oracle for small meshes)."""
    return sys.expand(np.linalg.solve(sys.stiffness.toarray(), sys.rhs))


def bilinear_form(sys, u, v):
    """a(u, v) for nodal or free-dof vectors."""
    u = sys.restrict(u) if np.ndim(u) == 2 else np.asarray(u)
    v = sys.restrict(v) if np.ndim(v) == 2 else np.asarray(v)
    return float(v @ (sys.stiffness @ u))

