import numpy as np
import pytest
import scipy.sparse as sp

from relast.constitutive import MaterialModel
from relast.errors import InputError, NonConvergenceError, NotPositiveDefiniteError
from relast.fem import (assemble, assemble_gram, bilinear_form, dense_solve, make_dof_map, pcg,
                        solve_cg)
from relast.forces import ForceModel, profile_field
from relast.geometry import Euclidean, IdentityMap, LinearMap, Sphere
from relast.mesh import Mesh, generate_mesh, simplex_rule, unit_square

SPHERE_BOX = [(0.6, 1.4), (0.0, 0.8)]


# -- mesh --------------------------------------------------------------------

def test_mesh_counts_2d():
    m = generate_mesh([(0, 1), (0, 2)], [3, 4])
    assert (m.n_nodes, m.n_elements, m.n_facets) == (20, 24, 14)
    assert m.element_volumes().sum() == pytest.approx(2.0, rel=1e-14)
    assert set(m.facet_tags.tolist()) == {"gamma1"}


def test_mesh_3d_volume_and_tags():
    m = generate_mesh([(0, 1)] * 3, [2, 2, 2], ("xmax",))
    assert (m.n_nodes, m.n_elements, m.n_facets) == (27, 48, 48)
    assert abs(m.element_volumes().sum() - 1.0) < 1e-14
    gamma2 = m.facets[m.facet_tags == "gamma2"]
    assert np.all(m.nodes[gamma2][..., 0] == 1.0)


def test_mesh_elements_positive():
    for m in (unit_square(5), generate_mesh([(0, 2), (0, 1), (0, 1)], [2, 3, 1])):
        assert np.all(m.element_volumes() > 0.0)
        m.validate()


def test_mesh_validation_errors():
    m = unit_square(2)
    flipped = m.elements.copy()
    flipped[0, [0, 1]] = flipped[0, [1, 0]]
    with pytest.raises(InputError, match="non-positive volume"):
        Mesh(2, m.nodes, flipped, m.facets, m.facet_tags).validate()
    with pytest.raises(InputError, match="cover the boundary"):
        Mesh(2, m.nodes, m.elements, m.facets[1:], m.facet_tags[1:]).validate()
    tags = m.facet_tags.copy()
    tags[0] = "gamma3"
    with pytest.raises(InputError, match="unknown facet tag"):
        Mesh(2, m.nodes, m.elements, m.facets, tags).validate()
    with pytest.raises(InputError, match="unknown box face"):
        generate_mesh([(0, 1), (0, 1)], [2, 2], ("top",))


@pytest.mark.parametrize("dim", [1, 2, 3])
@pytest.mark.parametrize("degree", [1, 2, 4])
def test_simplex_rule_exact_for_monomials(dim, degree):
    rule = simplex_rule(dim, degree)
    assert abs(rule.weights.sum() - 1.0) < 1e-14
    # average of lambda_0^degree over the simplex is d! degree! / (d + degree)!
    from math import factorial
    exact = factorial(dim) * factorial(degree) / factorial(dim + degree)
    assert abs(rule.weights @ rule.bary[:, 0] ** degree - exact) < 1e-14


# -- assembly ----------------------------------------------------------------

def _textbook_stiffness(mesh, lam, mu):
    """Plane P1 stiffness by explicit B^T D B loops (engineering shear)."""
    D = np.array([[lam + 2 * mu, lam, 0.0], [lam, lam + 2 * mu, 0.0], [0.0, 0.0, mu]])
    n = 2 * mesh.n_nodes
    K = np.zeros((n, n))
    for tri in mesh.elements:
        x = mesh.nodes[tri]
        J = np.array([x[1] - x[0], x[2] - x[0]]).T
        area = 0.5 * np.linalg.det(J)
        grads = np.linalg.solve(J.T, np.array([[-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]]))
        B = np.zeros((3, 6))
        for a in range(3):
            bx, by = grads[:, a]
            B[0, 2 * a], B[1, 2 * a + 1] = bx, by
            B[2, 2 * a], B[2, 2 * a + 1] = by, bx
        Ke = area * B.T @ D @ B
        idx = np.ravel([[2 * v, 2 * v + 1] for v in tri])
        K[np.ix_(idx, idx)] += Ke
    return K


def test_flat_stiffness_matches_textbook():
    mesh = generate_mesh([(0, 1.5), (0, 1)], [3, 2])
    sys_ = assemble(mesh, MaterialModel(0.7, 1.3), Euclidean(2), IdentityMap(2), constrained=False)
    K = sys_.stiffness.toarray()
    ref = _textbook_stiffness(mesh, 0.7, 1.3)
    assert np.max(np.abs(K - ref)) < 1e-12 * np.max(np.abs(ref))


def test_zero_forces_give_zero_solution():
    mesh = unit_square(4)
    sys_ = assemble(mesh, MaterialModel(1.0, 1.0), Sphere(1.0), LinearMap(0.5 * np.eye(2), [0.8, 0.2]),
                    ForceModel(2))
    assert not np.any(sys_.rhs)
    xi, it = solve_cg(sys_)
    assert it == 0 and not np.any(xi.values)


def test_curved_stiffness_symmetric_and_spd():
    mesh = generate_mesh(SPHERE_BOX, [4, 4], ("xmax",))
    sys_ = assemble(mesh, MaterialModel(0.5, 1.0), Sphere(1.0), IdentityMap(2))
    assert sys_.is_symmetric()
    assert np.linalg.eigvalsh(sys_.stiffness.toarray())[0] > 0.0


def test_rigid_motions_span_kernel():
    mesh = generate_mesh([(0, 1), (0, 1), (0, 1)], [2, 2, 2])
    sys_ = assemble(mesh, MaterialModel(1.0, 1.0), Euclidean(3), IdentityMap(3), constrained=False)
    K = sys_.stiffness
    x = mesh.nodes
    modes = [np.tile(e, (mesh.n_nodes, 1)) for e in np.eye(3)]
    for w in np.eye(3):
        modes.append(np.cross(w, x))
    scale = abs(K).max()
    for m in modes:
        assert np.max(np.abs(K @ m.ravel())) < 1e-10 * scale


def test_cg_against_dense_and_galerkin_orthogonality(rng):
    mesh = generate_mesh(SPHERE_BOX, [5, 4], ("ymax",))
    fm = ForceModel(2, profile_field("sine2d", 0.1, [1.0, 0.5]), traction=np.array([0.0, -0.05]))
    sys_ = assemble(mesh, MaterialModel(0.3, 1.0), Sphere(1.0), IdentityMap(2), fm)
    xi, it = solve_cg(sys_, tol=1e-13)
    ref = dense_solve(sys_)
    assert it > 0
    assert np.max(np.abs(xi.values - ref)) < 1e-10 * np.max(np.abs(ref))
    # a(xi_h, eta) = l(eta) for random discrete eta
    for _ in range(5):
        eta = rng.standard_normal(sys_.n_dofs)
        lhs = bilinear_form(sys_, xi.values, eta)
        rhs = float(sys_.rhs @ eta)
        assert abs(lhs - rhs) < 1e-10 * abs(rhs)


def test_single_dof_system():
    x, it, _ = pcg(sp.csr_matrix([[4.0]]), np.array([2.0]))
    assert x[0] == pytest.approx(0.5) and it == 1


def test_pcg_block_columns_are_independent(rng):
    A = rng.standard_normal((30, 30))
    K = sp.csr_matrix(A @ A.T + 30 * np.eye(30))
    b = rng.standard_normal((30, 3))
    b[:, 1] = 0.0
    X, _, _ = pcg(K, b, 1e-13)
    np.testing.assert_allclose(X, np.linalg.solve(K.toarray(), b), atol=1e-10)
    assert not np.any(X[:, 1])


def test_indefinite_live_load_is_rejected():
    mesh = unit_square(3)
    fm = ForceModel(2, np.array([1.0, 0.0]), 1e4 * np.eye(2))
    sys_ = assemble(mesh, MaterialModel(1.0, 1.0), Euclidean(2), IdentityMap(2), fm)
    with pytest.raises(NotPositiveDefiniteError):
        solve_cg(sys_)


def test_nonconvergence_reports_history():
    mesh = unit_square(6)
    sys_ = assemble(mesh, MaterialModel(1.0, 1.0), Euclidean(2), IdentityMap(2),
                    ForceModel(2, np.array([1.0, 0.0])))
    with pytest.raises(NonConvergenceError) as exc:
        solve_cg(sys_, tol=1e-14, maxiter=2)
    assert len(exc.value.history) == 3


def test_gram_matrices():
    mesh = unit_square(3)
    M, dof = assemble_gram(mesh, Euclidean(2), IdentityMap(2), "mass", constrained=False)
    ones = np.ones(M.shape[0])
    assert ones @ (M @ ones) == pytest.approx(2.0, rel=1e-13)  # |Omega| per component
    with pytest.raises(ValueError):
        assemble_gram(mesh, Euclidean(2), IdentityMap(2), "hessian")
    assert np.array_equal(dof, make_dof_map(mesh, False))
