"""Simplicial meshes, quadrature rules and P1 element geometry."""

from dataclasses import dataclass
import itertools
import math

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .errors import InputError

GAMMA1 = "gamma1"
GAMMA2 = "gamma2"
TAGS = (GAMMA1, GAMMA2)

BOX_FACES = ("xmin", "xmax", "ymin", "ymax", "zmin", "zmax")


@dataclass
class Mesh:
    dim: int
    nodes: np.ndarray        # (n_nodes, dim)
    elements: np.ndarray     # (n_elements, dim + 1), positively oriented
    facets: np.ndarray       # (n_facets, dim)
    facet_tags: np.ndarray   # (n_facets,) of "gamma1" / "gamma2"

    def __post_init__(self):
        self.nodes = np.ascontiguousarray(self.nodes, dtype=float)
        self.elements = np.ascontiguousarray(self.elements, dtype=np.int64)
        self.facets = np.ascontiguousarray(self.facets, dtype=np.int64).reshape(-1, self.dim)
        self.facet_tags = np.asarray(self.facet_tags, dtype=object)

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def n_elements(self):
        return self.elements.shape[0]

    @property
    def n_facets(self):
        return self.facets.shape[0]

    @property
    def h(self):
        """Largest element diameter."""
        x = self.nodes[self.elements]
        diam = 0.0
        for a, b in itertools.combinations(range(self.dim + 1), 2):
            diam = max(diam, float(np.max(np.linalg.norm(x[:, a] - x[:, b], axis=-1))))
        return diam

    def element_volumes(self):
        return element_geometry(self)[0]

    def dirichlet_nodes(self):
        """Sorted indices of nodes on gamma1 facets."""
        mask = self.facet_tags == GAMMA1
        return np.unique(self.facets[mask].ravel())

    def facet_elements(self):
        """Owning element and opposite local vertex for every boundary facet."""
        return _facet_owners(self.elements, self.facets)

    def validate(self):
        x = self.nodes[self.elements]
        jac = np.stack([x[:, k + 1] - x[:, 0] for k in range(self.dim)], axis=-1)
        if np.any(~(np.linalg.det(jac) > 0.0)):
            raise InputError("mesh has elements with non-positive volume")
        for tag in set(self.facet_tags.tolist()):
            if tag not in TAGS:
                raise InputError(f"unknown facet tag {tag!r}")
        owners, _ = _facet_owners(self.elements, self.facets)
        if np.any(owners < 0):
            raise InputError("boundary facet not attached to exactly one element")
        bnd = _boundary_faces(self.elements)
        have = {tuple(sorted(f)) for f in self.facets.tolist()}
        if have != {tuple(sorted(f)) for f in bnd.tolist()}:
            raise InputError("tagged facets do not cover the boundary exactly")
        return self


def _local_faces(dim):
    """Local vertex tuples of element faces; face k omits vertex k."""
    verts = list(range(dim + 1))
    return [tuple(v for v in verts if v != k) for k in verts]


def _boundary_faces(elements):
    dim = elements.shape[1] - 1
    faces = []
    for face in _local_faces(dim):
        faces.append(elements[:, face])
    allf = np.concatenate(faces, axis=0)
    key = np.sort(allf, axis=1)
    _, idx, counts = np.unique(key, axis=0, return_index=True, return_counts=True)
    once = np.sort(idx[counts == 1])
    return allf[once]


def _facet_owners(elements, facets):
    dim = elements.shape[1] - 1
    lookup = {}
    for e, el in enumerate(elements.tolist()):
        for k, face in enumerate(_local_faces(dim)):
            key = tuple(sorted(el[i] for i in face))
            lookup.setdefault(key, []).append((e, k))
    owners = np.full(len(facets), -1, dtype=np.int64)
    opposite = np.full(len(facets), -1, dtype=np.int64)
    for f, fac in enumerate(facets.tolist()):
        hits = lookup.get(tuple(sorted(fac)), [])
        if len(hits) == 1:
            owners[f], opposite[f] = hits[0]
    return owners, opposite


def generate_mesh(box, resolution, gamma2_faces=()):
    """Structured simplicial mesh of an axis-aligned box.

    ``box`` is a sequence of (lo, hi) intervals, ``resolution`` the number of
    cells per axis.  Squares are cut along the (0,0)-(1,1) diagonal into two
    triangles; cubes into the six Kuhn tetrahedra around the main diagonal.
    Nodes are numbered with the first coordinate running fastest.  Boundary
    facets on a face listed in ``gamma2_faces`` get tag gamma2, all others
    gamma1.
    """
    box = [tuple(map(float, iv)) for iv in box]
    dim = len(box)
    if dim not in (2, 3):
        raise InputError(f"box must have 2 or 3 intervals, got {dim}")
    resolution = [int(n) for n in resolution]
    if len(resolution) != dim:
        raise InputError("resolution must have one entry per axis")
    if any(n < 1 for n in resolution):
        raise InputError("resolution must be >= 1 on every axis")
    if any(not hi > lo for lo, hi in box):
        raise InputError("box intervals must be non-empty")
    for face in gamma2_faces:
        if face not in BOX_FACES[: 2 * dim]:
            raise InputError(f"unknown box face {face!r}")

    axes = [np.linspace(lo, hi, n + 1) for (lo, hi), n in zip(box, resolution)]
    grid = np.meshgrid(*axes, indexing="ij")
    # first coordinate fastest
    nodes = np.stack([g.transpose(tuple(range(dim))[::-1]).ravel() for g in grid], axis=-1)
    shape = [n + 1 for n in resolution]

    def node_id(idx):
        nid = 0
        stride = 1
        for a in range(dim):
            nid += idx[a] * stride
            stride *= shape[a]
        return nid

    if dim == 2:
        cell_simplices = [[(0, 0), (1, 0), (1, 1)], [(0, 0), (1, 1), (0, 1)]]
    else:
        cell_simplices = []
        for perm in itertools.permutations(range(3)):
            v = [0, 0, 0]
            path = [tuple(v)]
            for ax in perm:
                v[ax] = 1
                path.append(tuple(v))
            cell_simplices.append(path)

    elements = []
    for cell in itertools.product(*[range(n) for n in reversed(resolution)]):
        cell = cell[::-1]
        for simplex in cell_simplices:
            elements.append([node_id([c + o for c, o in zip(cell, off)]) for off in simplex])
    elements = np.array(elements, dtype=np.int64)
    # positive orientation
    x = nodes[elements]
    jac = np.stack([x[:, k + 1] - x[:, 0] for k in range(dim)], axis=-1)
    neg = np.linalg.det(jac) < 0
    elements[neg, 0], elements[neg, 1] = elements[neg, 1].copy(), elements[neg, 0].copy()

    facets = _boundary_faces(elements)
    tags = []
    tol = 1e-12 * max(hi - lo for lo, hi in box)
    for fac in facets:
        pts = nodes[fac]
        tag = GAMMA1
        for a in range(dim):
            lo, hi = box[a]
            if np.all(np.abs(pts[:, a] - lo) <= tol) and BOX_FACES[2 * a] in gamma2_faces:
                tag = GAMMA2
            if np.all(np.abs(pts[:, a] - hi) <= tol) and BOX_FACES[2 * a + 1] in gamma2_faces:
                tag = GAMMA2
        tags.append(tag)
    return Mesh(dim, nodes, elements, facets, np.array(tags, dtype=object))


def unit_square(n, gamma2_faces=()):
    return generate_mesh([(0.0, 1.0), (0.0, 1.0)], [n, n], gamma2_faces)


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimplexRule:
    """Barycentric points (Q, d+1) and weights summing to one."""

    bary: np.ndarray
    weights: np.ndarray
    degree: int


def _perm_points(coords, weight):
    pts = sorted(set(itertools.permutations(coords)))
    return [list(p) for p in pts], [weight] * len(pts)


def conical_product_rule(dim, m):
    """Collapsed Gauss-Jacobi rule on the reference simplex, exact to 2m-1.

    Rows are barycentric coordinates built recursively as (t, (1 - t) b).
    """
    if dim == 0:
        return np.ones((1, 1)), np.ones(1)
    # x1 in [0,1] with weight (1-x1)^(dim-1)
    t, w = roots_jacobi(m, dim - 1, 0)
    t = 0.5 * (t + 1.0)
    w = w / 2.0 ** dim
    sub_b, sub_w = conical_product_rule(dim - 1, m)
    bary, weights = [], []
    for ti, wi in zip(t, w):
        for b, ws in zip(sub_b, sub_w):
            bary.append(np.concatenate([[ti], (1.0 - ti) * b]))
            weights.append(wi * ws)
    bary = np.array(bary)
    weights = np.array(weights)
    return bary, weights / weights.sum()


def simplex_rule(dim, degree):
    """Quadrature on a dim-simplex (dim = 1, 2, 3) exact for ``degree``."""
    if dim == 1:
        m = max(1, math.ceil((degree + 1) / 2))
        t, w = roots_legendre(m)
        t = 0.5 * (t + 1.0)
        return SimplexRule(np.stack([1.0 - t, t], axis=-1), w / w.sum(), 2 * m - 1)
    if dim == 2 and degree <= 1:
        return SimplexRule(np.full((1, 3), 1.0 / 3.0), np.ones(1), 1)
    if dim == 2 and degree == 2:
        b, w = _perm_points((2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0), 1.0 / 3.0)
        return SimplexRule(np.array(b), np.array(w), 2)
    if dim == 2 and degree in (3, 4):
        a1, w1 = 0.445948490915965, 0.223381589678011
        a2, w2 = 0.091576213509771, 0.109951743655322
        b1, ww1 = _perm_points((a1, a1, 1.0 - 2.0 * a1), w1)
        b2, ww2 = _perm_points((a2, a2, 1.0 - 2.0 * a2), w2)
        w = np.array(ww1 + ww2)
        return SimplexRule(np.array(b1 + b2), w / w.sum(), 4)
    if dim == 3 and degree <= 1:
        return SimplexRule(np.full((1, 4), 0.25), np.ones(1), 1)
    if dim == 3 and degree == 2:
        a, b = 0.5854101966249685, 0.1381966011250105
        pts, w = _perm_points((a, b, b, b), 0.25)
        return SimplexRule(np.array(pts), np.array(w), 2)
    m = max(1, math.ceil((degree + 1) / 2))
    bary, w = conical_product_rule(dim, m)
    return SimplexRule(bary, w, 2 * m - 1)


# ---------------------------------------------------------------------------
# P1 geometry
# ---------------------------------------------------------------------------

def element_geometry(mesh):
    """Volumes (E,) and barycentric gradients (E, d+1, d) of every element."""
    x = mesh.nodes[mesh.elements]
    dim = mesh.dim
    jac = np.stack([x[:, k + 1] - x[:, 0] for k in range(dim)], axis=-1)  # (E, d, d)
    det = np.linalg.det(jac)
    vol = np.abs(det) / math.factorial(dim)
    jinv = np.linalg.inv(jac)  # rows: gradients of lambda_1..lambda_d
    grads = np.concatenate([-jinv.sum(axis=1, keepdims=True), jinv], axis=1)
    return vol, grads


def quadrature_points(mesh, rule):
    """Physical quadrature points (E, Q, d) for a simplex rule."""
    x = mesh.nodes[mesh.elements]  # (E, d+1, d)
    return np.einsum("qa,ead->eqd", rule.bary, x)


def facet_geometry(mesh, facet_ids):
    """Euclidean measure (F,) and outward coordinate unit normal (F, d)."""
    owners, opposite = mesh.facet_elements()
    owners, opposite = owners[facet_ids], opposite[facet_ids]
    pts = mesh.nodes[mesh.facets[facet_ids]]  # (F, d, d)
    dim = mesh.dim
    if dim == 2:
        t = pts[:, 1] - pts[:, 0]
        n = np.stack([t[:, 1], -t[:, 0]], axis=-1)
        meas = np.linalg.norm(t, axis=-1)
    else:
        n = np.cross(pts[:, 1] - pts[:, 0], pts[:, 2] - pts[:, 0])
        meas = 0.5 * np.linalg.norm(n, axis=-1)
    norm = np.linalg.norm(n, axis=-1)
    n = n / norm[:, None]
    opp = mesh.nodes[mesh.elements[owners, opposite]]
    flip = np.einsum("fd,fd->f", n, pts[:, 0] - opp) < 0
    n[flip] *= -1.0
    return meas, n
