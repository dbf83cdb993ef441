"""
Gaussian posterior for the drift via a spectral Galerkin solve of the weak
equation ``a(b, v) = r(v)``.

With ``phi_k`` the real Fourier basis and ``L``, ``chi`` the local-time and
winding fields on the grid ``x_j = j/M``::

    A_ik = eta ((2 pi m_i)^{2p} + kappa) delta_ik + (1/M) sum_j phi_i phi_k L_j
    r_i  = -1/2 (1/M) sum_j phi_i' L_j + (1/M) sum_j phi_i chi_j

The prior part of ``A`` is exact; only the local-time mass and the load are
quadratures.  The load never differentiates the local time.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import linalg

from . import spectral
from .prior import PriorSpec, eigenvalue, precision_diagonal, tail_cutoff, tail_trace
from .sde import make_rng


class AssemblyError(np.linalg.LinAlgError):
    """The assembled precision matrix is not symmetric positive definite."""


@dataclass(frozen=True)
class AssembledSystem:
    spec: PriorSpec
    A: np.ndarray
    r: np.ndarray
    T: float


@dataclass(frozen=True)
class PosteriorGaussian:
    """
    Posterior restricted to the first ``N`` modes (mean, precision ``A``)
    together with the untouched prior tail on the remaining modes.
    """
    spec: PriorSpec
    mean: np.ndarray
    precision: np.ndarray
    T: float

    @cached_property
    def cholesky(self):
        """Lower factor ``A = L L^T``."""
        return _cholesky(self.precision)

    @cached_property
    def covariance(self):
        """``A^{-1}`` on the Galerkin subspace."""
        return linalg.cho_solve((self.cholesky, True), np.eye(self.spec.N))


def _cholesky(A):
    try:
        return linalg.cholesky(A, lower=True)
    except linalg.LinAlgError as exc:
        raise AssemblyError(f"precision matrix is not positive definite: {exc}") from None


def _check_fields(spec, lt, chi):
    if lt.M != chi.M:
        raise ValueError(f"local time (M={lt.M}) and chi (M={chi.M}) grids differ")
    if lt.M < 2 * spec.N + 2:
        raise ValueError(f"grid M={lt.M} too coarse for N={spec.N} (need M >= 2N + 2)")
    if not np.all(np.isfinite(lt.values)):
        raise ValueError("local time contains non-finite values")


def assemble(spec, lt, chi):
    """Galerkin matrix and load vector for the posterior mean equation."""
    _check_fields(spec, lt, chi)
    M = lt.M
    x = lt.x
    phi = spectral.basis_matrix(spec.N, x)
    dphi = spectral.basis_matrix(spec.N, x, derivative=1)
    L = lt.values
    A = (phi.T * L) @ phi / M
    A = 0.5 * (A + A.T)
    A[np.diag_indices(spec.N)] += precision_diagonal(spec, np.arange(1, spec.N + 1))
    r = (-0.5 * dphi.T @ L + phi.T @ chi.values) / M
    return AssembledSystem(spec, A, r, lt.T)


def solve_mean(system):
    """Solve ``A m = r`` by Cholesky; returns the mean coefficients."""
    if not np.any(system.r):
        _cholesky(system.A)
        return np.zeros(system.spec.N)
    factor = _cholesky(system.A)
    return linalg.cho_solve((factor, True), system.r)


def posterior(spec, lt, chi):
    """Assemble and solve: the Gaussian posterior given the path fields."""
    system = assemble(spec, lt, chi)
    return PosteriorGaussian(spec, solve_mean(system), system.A, system.T)


def galerkin_refinement_check(spec, lt, chi):
    """``||mean_N - P_N mean_{2N}||_{H^p}``, a convergence diagnostic."""
    fine_spec = spec.with_N(2 * spec.N)
    coarse = solve_mean(assemble(spec, lt, chi))
    fine = solve_mean(assemble(fine_spec, lt, chi))
    return float(spectral.sobolev_norm(coarse - fine[: spec.N], spec.p))


def covariance_trace(post, tol=1e-12):
    """``tr(A^{-1}) + sum_{k > N} lambda_k`` (tail truncated at ``tol``)."""
    Linv = linalg.solve_triangular(post.cholesky, np.eye(post.spec.N), lower=True)
    return float(np.sum(Linv * Linv)) + tail_trace(post.spec, tol=tol)


def sample_coefficients(post, seed=0, size=None):
    """Draws ``mean + L^{-T} z`` on the Galerkin subspace; covariance ``A^{-1}``."""
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    n = 1 if size is None else size
    z = rng.standard_normal((post.spec.N, n))
    draws = post.mean[:, None] + linalg.solve_triangular(post.cholesky, z, lower=True, trans="T")
    return draws[:, 0] if size is None else draws.T


def _tail_modes(spec, floor=1e-16):
    """Tail modes ``N < k <= K`` with ``lambda_k >= floor``."""
    K = tail_cutoff(spec, spec.N)
    k = np.arange(spec.N + 1, K + 1)
    lam = eigenvalue(spec, k) if k.size else np.zeros(0)
    keep = lam >= floor
    return k[keep], lam[keep]


def sample_posterior(post, seed=0, M=256, size=None):
    """
    Posterior draws on the grid ``j / M``: Galerkin part plus an independent
    prior draw on the tail modes with ``lambda_k >= 1e-16``.
    """
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    n = 1 if size is None else size
    head = sample_coefficients(post, rng, n)
    k, lam = _tail_modes(post.spec)
    coeffs = np.zeros((n, post.spec.N + k.size))
    coeffs[:, : post.spec.N] = head
    if k.size:
        coeffs[:, post.spec.N:] = np.sqrt(lam) * rng.standard_normal((n, k.size))
    out = spectral.synthesize(coeffs, M, allow_alias=True)
    return out[0] if size is None else out


def pointwise_variance(post, x):
    """Posterior variance at points ``x``, Galerkin block plus prior tail."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    phi = spectral.basis_matrix(post.spec.N, x)
    head = np.einsum("ij,jk,ik->i", phi, post.covariance, phi)
    k, lam = _tail_modes(post.spec)
    tail = np.zeros_like(head)
    if k.size:
        tail = (spectral.basis_matrix(int(k[-1]), x)[:, k - 1] ** 2) @ lam
    return head + tail


def log_likelihood(c, lt, chi):
    """
    ``-Phi_T`` in local-time form:
    ``-1/2 (1/M) sum L_j (b^2 + b')(x_j) + (1/M) sum chi_j b(x_j)``.
    """
    if lt.M != chi.M:
        raise ValueError("local time and chi grids differ")
    b, db = _values(c, lt.M)
    return float((-0.5 * np.dot(lt.values, b * b + db) + np.dot(chi.values, b)) / lt.M)


def penalized_objective(c, lt, chi, spec):
    """
    Tikhonov functional
    ``(1/M) sum [1/2 b^2 (eta kappa + L) + 1/2 b' L - b chi] + 1/2 eta |c|_{H^p}^2``.
    """
    if lt.M != chi.M:
        raise ValueError("local time and chi grids differ")
    b, db = _values(c, lt.M)
    L = lt.values
    data = np.sum(0.5 * b * b * (spec.eta * spec.kappa + L) + 0.5 * db * L - b * chi.values) / lt.M
    return float(data + 0.5 * spec.eta * spectral.sobolev_norm(c, spec.p) ** 2)


def _values(c, M):
    c = np.asarray(c, dtype=float)
    x = spectral.grid(M)
    return spectral.basis_matrix(c.size, x) @ c, spectral.basis_matrix(c.size, x, derivative=1) @ c
