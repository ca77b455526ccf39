"""Stored energy, elasticity tensor and the stress fields.

All stress components are taken over the reference volume form (the
``"reference"`` carrier); :meth:`StressValue.to_current` rescales by the
density ratio when components over the deformed volume form are needed.
"""

from collections import namedtuple
from dataclasses import dataclass
import logging
import math

import numpy as np

from .errors import DimensionError, InputError, ImmersionError
from .tensor import UP, DOWN, TensorValue

log = logging.getLogger(__name__)

REFERENCE = "reference"
CURRENT = "current"


@dataclass(frozen=True)
class MaterialModel:
    """Saint Venant-Kirchhoff material with Lame constants lambda >= 0, mu > 0."""

    lam: float
    mu: float
    law: str = "svk"

    def __post_init__(self):
        if self.law != "svk":
            raise InputError(f"unknown constitutive law {self.law!r}")
        if not (math.isfinite(self.mu) and self.mu > 0.0):
            raise InputError(f"mu = {self.mu!r} violates mu > 0", key="material.mu")
        if not (math.isfinite(self.lam) and self.lam >= 0.0):
            raise InputError(f"lambda = {self.lam!r} violates lambda >= 0", key="material.lambda")

    def tensor(self, ginv):
        return svk_tensor_array(self.lam, self.mu, ginv)

    def energy(self, ginv, E):
        """Trace form lambda/2 (tr E)^2 + mu |E|^2, batched."""
        tr = np.einsum("...ij,...ij->...", ginv, E)
        sq = np.einsum("...ik,...jl,...kl,...ij->...", ginv, ginv, E, E)
        return 0.5 * self.lam * tr * tr + self.mu * sq

    def stress(self, ginv, E):
        """Sigma^ij = lambda tr(E) g^ij + 2 mu g^ik E_kl g^lj, batched."""
        tr = np.einsum("...ij,...ij->...", ginv, E)
        return (self.lam * tr[..., None, None] * ginv
                + 2.0 * self.mu * np.einsum("...ik,...kl,...lj->...ij", ginv, E, ginv))


def svk_tensor_array(lam, mu, ginv):
    """A^ijkl = lam g^ij g^kl + mu (g^ik g^jl + g^il g^jk), batched."""
    a = lam * np.einsum("...ij,...kl->...ijkl", ginv, ginv)
    b = np.einsum("...ik,...jl->...ijkl", ginv, ginv)
    return a + mu * (b + np.swapaxes(b, -1, -2))


def elasticity_tensor(mat, g0):
    return TensorValue(mat.tensor(g0.ginv), (UP, UP, UP, UP))


def stored_energy(A, E):
    """1/2 (A : E) : E."""
    a = A.components if isinstance(A, TensorValue) else np.asarray(A)
    e = E.components if isinstance(E, TensorValue) else np.asarray(E)
    return 0.5 * float(np.einsum("ijkl,kl,ij->", a, e, e))


@dataclass(frozen=True)
class StressValue:
    sigma: TensorValue
    carrier: str = REFERENCE

    def __post_init__(self):
        if self.carrier not in (REFERENCE, CURRENT):
            raise ValueError(f"unknown carrier {self.carrier!r}")
        if self.sigma.variance != (UP, UP):
            raise ValueError("stress must be a (2, 0) tensor")

    def to_current(self, rho):
        """Components over omega[phi] given rho with rho omega[phi] = omega_ref."""
        if self.carrier == CURRENT:
            return self
        return StressValue(TensorValue(rho * self.sigma.components, (UP, UP)), CURRENT)


def stress_sigma(A, E):
    a = A.components if isinstance(A, TensorValue) else np.asarray(A)
    e = E.components if isinstance(E, TensorValue) else np.asarray(E)
    s = np.einsum("ijkl,kl->ij", a, e)
    return StressValue(TensorValue(0.5 * (s + s.T), (UP, UP)))


StressFields = namedtuple("StressFields", "T T_tilde Sigma_hat T_hat")


def stress_convert(sigma, g_phi, d, model, x):
    """Mixed, two-point and ambient stress tensors from Sigma.

    Returns ``StressFields(T, T_tilde, Sigma_hat, T_hat)`` with
    ``T[i, j] = T^i_j``, ``T_tilde[i, a] = T~^i_a``, ``Sigma_hat[a, b]``
    and ``T_hat[a, b] = T^^a_b``; all share the carrier of ``sigma``.
    """
    x = np.asarray(x, dtype=float)
    y, F = d.evaluate(x)
    if np.linalg.det(F) == 0.0:
        raise ImmersionError("deformation Jacobian is singular")
    gh = model.metric(y)
    s = sigma.sigma.components
    if s.shape[0] != g_phi.dim:
        raise DimensionError("stress and metric dimensions differ")
    T = np.einsum("jk,ik->ij", g_phi.g, s)
    T_tilde = np.einsum("ab,bj,ij->ia", gh, F, s)
    S_hat = np.einsum("ai,bj,ij->ab", F, F, s)
    S_hat = 0.5 * (S_hat + S_hat.T)
    T_hat = np.einsum("bt,at->ab", gh, S_hat)
    return StressFields(TensorValue(T, (UP, DOWN)), TensorValue(T_tilde, (UP, DOWN)),
                        TensorValue(S_hat, (UP, UP)), TensorValue(T_hat, (UP, DOWN)))


def _sym_basis(n):
    """Orthonormal basis of symmetric n x n matrices (Frobenius)."""
    basis = []
    for a in range(n):
        m = np.zeros((n, n))
        m[a, a] = 1.0
        basis.append(m)
    for a in range(n):
        for b in range(a + 1, n):
            m = np.zeros((n, n))
            m[a, b] = m[b, a] = 1.0 / math.sqrt(2.0)
            basis.append(m)
    return np.array(basis)


def acoustic_matrix(A, g0):
    """Matrix of H -> (A:H):H on symmetric H in a g0-orthonormal frame, batched."""
    A = np.asarray(A, dtype=float)
    g0 = np.asarray(g0, dtype=float)
    L = np.linalg.cholesky(g0)
    n = g0.shape[-1]
    B = _sym_basis(n)
    # H = L H' L^T with H' from the orthonormal basis; |H|_g0 = |H'|_F
    H = np.einsum("...ia,pab,...jb->...pij", L, B, L)
    return np.einsum("...ijkl,...pkl,...qij->...pq", A, H, H)


def positive_definiteness_estimate(A, g0, samples=64, rng=None):
    """Uniform positive-definiteness constant C_A of ``A`` w.r.t. ``g0``.

    ``A`` (.., n, n, n, n) and ``g0`` (.., n, n) may carry a batch of sample
    points.  The exact value at each point is the smallest eigenvalue of the
    symmetric-matrix representation; ``samples`` random unit H per point
    give an independent brute-force upper bound that is folded in.  The
    estimate is returned even when it is not positive (a warning is logged).
    """
    if isinstance(A, TensorValue):
        A = A.components
    if hasattr(g0, "g"):
        g0 = g0.g
    A = np.asarray(A, dtype=float)
    g0 = np.asarray(g0, dtype=float)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(0) if rng is None else rng
    mat = acoustic_matrix(A, g0)
    mat = 0.5 * (mat + np.swapaxes(mat, -1, -2))
    exact = float(np.min(np.linalg.eigvalsh(mat)))
    n = g0.shape[-1]
    m = n * (n + 1) // 2
    batch = mat.reshape(-1, m, m)
    c = rng.standard_normal((batch.shape[0], samples, m))
    c /= np.linalg.norm(c, axis=-1, keepdims=True)
    sampled = float(np.min(np.einsum("bsp,bpq,bsq->bs", c, batch, c)))
    est = min(exact, sampled)
    if not est > 0.0:
        log.warning("elasticity tensor is not uniformly positive definite (C_A = %r)", est)
    return est
