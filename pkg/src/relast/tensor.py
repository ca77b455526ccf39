"""Chart-based tensor calculus on small dense component arrays.

Two layers live here:

* array kernels (``*_array`` functions, :func:`metric_inverse`,
  :func:`sqrt_det`) that act on the trailing axes of numpy arrays and
  broadcast over any leading batch axes (quadrature points, nodes, ...);
* the :class:`TensorValue` / :class:`MetricValue` point values and the
  operations on them, which carry an explicit variance signature.

Index conventions for arrays (leading batch axes omitted):

========  ===================  ===========================
name      shape                meaning
========  ===================  ===========================
g         (n, n)               g_ij
dg        (n, n, n)            dg[k, i, j] = d_k g_ij
d2g       (n, n, n, n)         d2g[l, k, i, j] = d_l d_k g_ij
gamma     (n, n, n)            gamma[k, i, j] = Gamma^k_ij
dxi       (n, n)               dxi[i, j] = d_i xi^j
========  ===================  ===========================
"""

from dataclasses import dataclass, field
import string

import numpy as np

from .errors import DimensionError, MetricDegenerateError, VarianceError

UP = "up"
DOWN = "down"
_KINDS = (UP, DOWN)


# ---------------------------------------------------------------------------
# array kernels
# ---------------------------------------------------------------------------

def metric_inverse(g):
    """Inverse of a batch of SPD matrices; Cholesky doubles as the SPD test."""
    g = np.asarray(g, dtype=float)
    try:
        chol = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise MetricDegenerateError("metric is not positive definite") from exc
    if not np.all(np.isfinite(chol)):
        raise MetricDegenerateError("metric is not positive definite")
    n = g.shape[-1]
    eye = np.broadcast_to(np.eye(n), g.shape)
    linv = np.linalg.solve(chol, eye)
    ginv = np.swapaxes(linv, -1, -2) @ linv
    return 0.5 * (ginv + np.swapaxes(ginv, -1, -2))


def sqrt_det(g):
    det = np.linalg.det(np.asarray(g, dtype=float))
    if np.any(~(det > 0.0)):
        raise MetricDegenerateError("metric determinant is not positive")
    return np.sqrt(det)


def christoffel_array(ginv, dg):
    """Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij)."""
    lower = dg + np.swapaxes(dg, -3, -2) - np.moveaxis(dg, -3, -1)
    # lower[i, j, l] = d_i g_jl + d_j g_il - d_l g_ij
    gamma = 0.5 * np.einsum("...kl,...ijl->...kij", ginv, lower)
    # exact symmetry in the lower pair
    return 0.5 * (gamma + np.swapaxes(gamma, -1, -2))


def christoffel_derivative_array(ginv, dg, d2g):
    """dgamma[m, k, i, j] = d_m Gamma^k_ij."""
    lower = dg + np.swapaxes(dg, -3, -2) - np.moveaxis(dg, -3, -1)
    dlower = d2g + np.swapaxes(d2g, -3, -2) - np.moveaxis(d2g, -3, -1)
    dginv = -np.einsum("...ka,...mab,...bl->...mkl", ginv, dg, ginv)
    out = 0.5 * (np.einsum("...mkl,...ijl->...mkij", dginv, lower)
                 + np.einsum("...kl,...mijl->...mkij", ginv, dlower))
    return 0.5 * (out + np.swapaxes(out, -1, -2))


def ricci_array(gamma, dgamma):
    """R_ij = d_k G^k_ij - d_i G^k_kj + G^k_kl G^l_ij - G^k_il G^l_kj."""
    t1 = np.einsum("...kkij->...ij", dgamma)
    t2 = np.einsum("...ikkj->...ij", dgamma)
    t3 = np.einsum("...kkl,...lij->...ij", gamma, gamma)
    t4 = np.einsum("...kil,...lkj->...ij", gamma, gamma)
    ric = t1 - t2 + t3 - t4
    return 0.5 * (ric + np.swapaxes(ric, -1, -2))


def covariant_derivative_array(xi, dxi, gamma):
    """nabla_i xi^j = d_i xi^j + Gamma^j_ik xi^k."""
    return dxi + np.einsum("...jik,...k->...ij", gamma, xi)


def lie_derivative_metric_array(xi, dxi, g, dg):
    """(L_xi g)_ij = xi^k d_k g_ij + g_kj d_i xi^k + g_ik d_j xi^k."""
    a = np.einsum("...k,...kij->...ij", xi, dg)
    b = np.einsum("...kj,...ik->...ij", g, dxi)
    return a + b + np.swapaxes(b, -1, -2)


def symmetrized_strain_array(xi, dxi, g, gamma):
    """1/2 (g_jk nabla_i xi^k + g_ik nabla_j xi^k)."""
    nab = covariant_derivative_array(xi, dxi, gamma)
    b = np.einsum("...jk,...ik->...ij", g, nab)
    return 0.5 * (b + np.swapaxes(b, -1, -2))


# ---------------------------------------------------------------------------
# point values
# ---------------------------------------------------------------------------

def _check_dim(dim):
    if dim not in (2, 3):
        raise DimensionError(f"dimension must be 2 or 3, got {dim}")


@dataclass(frozen=True)
class TensorValue:
    """Components of a (p, q) tensor at one point.

    ``components`` has shape ``(dim,) * len(variance)``; slot ``s`` is
    contravariant when ``variance[s] == "up"``.  Scalars use an empty
    variance tuple together with ``dim``.
    """

    components: np.ndarray
    variance: tuple
    dim: int = field(default=None)

    def __post_init__(self):
        comps = np.array(self.components, dtype=float)
        variance = tuple(self.variance)
        for kind in variance:
            if kind not in _KINDS:
                raise VarianceError(f"unknown slot kind {kind!r}")
        dim = self.dim
        if dim is None:
            if not variance:
                raise DimensionError("scalar TensorValue needs an explicit dim")
            dim = comps.shape[0]
        _check_dim(dim)
        if comps.shape != (dim,) * len(variance):
            raise DimensionError(
                f"components shape {comps.shape} does not match dim {dim} and rank {len(variance)}")
        comps.setflags(write=False)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "variance", variance)
        object.__setattr__(self, "dim", dim)

    @property
    def rank(self):
        return len(self.variance)

    @property
    def p(self):
        return self.variance.count(UP)

    @property
    def q(self):
        return self.variance.count(DOWN)

    @classmethod
    def vector(cls, v):
        return cls(np.asarray(v, dtype=float), (UP,))

    @classmethod
    def covector(cls, v):
        return cls(np.asarray(v, dtype=float), (DOWN,))

    @classmethod
    def scalar(cls, value, dim):
        return cls(np.asarray(value, dtype=float), (), dim)


@dataclass(frozen=True)
class MetricValue:
    """Metric components at a point, with optional first/second partials."""

    g: np.ndarray
    dg: np.ndarray = None
    d2g: np.ndarray = None

    def __post_init__(self):
        g = np.array(self.g, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise DimensionError("metric must be a square matrix")
        _check_dim(g.shape[0])
        if np.any(g != g.T):
            raise MetricDegenerateError("metric components are not symmetric")
        ginv = metric_inverse(g)
        n = g.shape[0]
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "ginv", ginv)
        if self.dg is not None:
            dg = np.array(self.dg, dtype=float)
            if dg.shape != (n, n, n):
                raise DimensionError("dg must have shape (n, n, n)")
            if np.any(dg != np.swapaxes(dg, -1, -2)):
                raise MetricDegenerateError("metric derivative is not symmetric in (i, j)")
            object.__setattr__(self, "dg", dg)
        if self.d2g is not None:
            d2g = np.array(self.d2g, dtype=float)
            if d2g.shape != (n, n, n, n):
                raise DimensionError("d2g must have shape (n, n, n, n)")
            object.__setattr__(self, "d2g", d2g)

    @property
    def dim(self):
        return self.g.shape[0]

    @property
    def tensor(self):
        return TensorValue(self.g, (DOWN, DOWN))

    @property
    def inverse_tensor(self):
        return TensorValue(self.ginv, (UP, UP))


def contract(a, b, slot_pairs):
    """Contract slots of ``a`` against slots of ``b``.

    ``slot_pairs`` lists ``(slot_of_a, slot_of_b)`` pairs; each pair must join
    an upper with a lower index.  The result keeps the free slots of ``a``
    followed by the free slots of ``b``.
    """
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")
    letters = iter(string.ascii_letters)
    sa = [next(letters) for _ in range(a.rank)]
    sb = [next(letters) for _ in range(b.rank)]
    used_a, used_b = set(), set()
    for ia, ib in slot_pairs:
        if not (0 <= ia < a.rank and 0 <= ib < b.rank):
            raise DimensionError(f"slot pair {(ia, ib)} out of range")
        if ia in used_a or ib in used_b:
            raise VarianceError(f"slot pair {(ia, ib)} reuses a slot")
        if a.variance[ia] == b.variance[ib]:
            raise VarianceError(
                f"cannot contract {a.variance[ia]} slot {ia} with {b.variance[ib]} slot {ib}")
        sb[ib] = sa[ia]
        used_a.add(ia)
        used_b.add(ib)
    out_a = [i for i in range(a.rank) if i not in used_a]
    out_b = [i for i in range(b.rank) if i not in used_b]
    out = "".join(sa[i] for i in out_a) + "".join(sb[i] for i in out_b)
    comps = np.einsum(f"{''.join(sa)},{''.join(sb)}->{out}", a.components, b.components)
    variance = tuple(a.variance[i] for i in out_a) + tuple(b.variance[i] for i in out_b)
    return TensorValue(comps, variance, a.dim)


def christoffels(m):
    if m.dg is None:
        raise ValueError("christoffels needs metric first derivatives (dg)")
    return TensorValue(christoffel_array(m.ginv, m.dg), (UP, DOWN, DOWN))


def covariant_derivative_vector(xi, dxi, gamma):
    """Covariant derivative of a vector field from its value and partials.

    ``dxi[i, j]`` is the coordinate partial d_i xi^j.  The result has
    variance (down, up): slot 0 is the derivative direction.
    """
    dxi = np.asarray(dxi, dtype=float)
    n = xi.dim
    if xi.variance != (UP,) or gamma.variance != (UP, DOWN, DOWN):
        raise VarianceError("expected a vector and Christoffel symbols")
    if dxi.shape != (n, n) or gamma.dim != n:
        raise DimensionError("inconsistent shapes")
    return TensorValue(covariant_derivative_array(xi.components, dxi, gamma.components), (DOWN, UP))


def lie_derivative_metric(xi, dxi, m):
    if m.dg is None:
        raise ValueError("Lie derivative of the metric needs dg")
    dxi = np.asarray(dxi, dtype=float)
    if dxi.shape != (m.dim, m.dim) or xi.dim != m.dim:
        raise DimensionError("inconsistent shapes")
    lie = lie_derivative_metric_array(xi.components, dxi, m.g, m.dg)
    return TensorValue(0.5 * (lie + lie.T), (DOWN, DOWN))


def volume_density(m):
    return float(sqrt_det(m.g))


def raise_lower(t, slot, m, direction):
    """Raise (``direction="raise"``) or lower one slot with the metric ``m``."""
    if not 0 <= slot < t.rank:
        raise DimensionError(f"slot {slot} out of range for rank {t.rank}")
    if t.dim != m.dim:
        raise DimensionError("dimension mismatch")
    if direction == "raise":
        if t.variance[slot] != DOWN:
            raise VarianceError("can only raise a covariant slot")
        mat, new = m.ginv, UP
    elif direction == "lower":
        if t.variance[slot] != UP:
            raise VarianceError("can only lower a contravariant slot")
        mat, new = m.g, DOWN
    else:
        raise ValueError(f"direction must be 'raise' or 'lower', got {direction!r}")
    comps = np.tensordot(mat, t.components, axes=([1], [slot]))
    comps = np.moveaxis(comps, 0, slot)
    variance = list(t.variance)
    variance[slot] = new
    return TensorValue(comps, tuple(variance), t.dim)
