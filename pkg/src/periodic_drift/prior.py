"""
Centred Gaussian prior with precision ``eta((-Laplacian)^p + kappa I)`` on
mean-zero periodic functions.
"""
from dataclasses import dataclass

import numpy as np

from . import spectral
from .sde import make_rng


@dataclass(frozen=True)
class PriorSpec:
    """Hyper-parameters of the prior and the Galerkin truncation ``N``."""
    p: int = 2
    eta: float = 1.0
    kappa: float = 1.0
    N: int = 64

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 2:
            raise ValueError(f"p must be an integer >= 2, got {self.p}")
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.N}")
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "eta", float(self.eta))
        object.__setattr__(self, "kappa", float(self.kappa))

    def with_N(self, N):
        return PriorSpec(self.p, self.eta, self.kappa, N)

    def to_dict(self):
        return {"p": self.p, "eta": self.eta, "kappa": self.kappa, "N": self.N}


def precision_diagonal(spec, k):
    """Prior precision ``eta (4 pi^2 ceil(k/2)^2)^p + eta kappa`` for mode(s) ``k``."""
    m = (np.asarray(k) + 1) // 2
    return spec.eta * (4.0 * np.pi**2 * m.astype(float) ** 2) ** spec.p + spec.eta * spec.kappa


def eigenvalue(spec, k):
    """Prior covariance eigenvalue ``lambda_k`` (scalar or array ``k >= 1``)."""
    k = np.asarray(k)
    if np.any(k < 1):
        raise ValueError("mode index must be >= 1")
    lam = 1.0 / precision_diagonal(spec, k)
    return float(lam) if lam.ndim == 0 else lam


def eigenvalues(spec, N=None):
    """``lambda_1 .. lambda_N`` (default: the prior's truncation N)."""
    return eigenvalue(spec, np.arange(1, (spec.N if N is None else N) + 1))


def tail_cutoff(spec, start, tol=1e-12):
    """
    Smallest ``K`` such that ``sum_{k > K} lambda_k <= tol``, using the bound
    ``sum_{m > J} 2/(eta (2 pi m)^{2p}) <= 2 J^{1-2p} / (eta (2 pi)^{2p} (2p - 1))``.
    """
    c = 2.0 / (spec.eta * (2.0 * np.pi) ** (2 * spec.p) * (2 * spec.p - 1))
    J = int(np.ceil((c / tol) ** (1.0 / (2 * spec.p - 1))))
    return max(int(start), 2 * J)


def tail_trace(spec, start=None, tol=1e-12):
    """``sum_{k > start} lambda_k`` with truncation error at most ``tol``."""
    start = spec.N if start is None else int(start)
    K = tail_cutoff(spec, start, tol)
    if K <= start:
        return 0.0
    # sum smallest terms first
    return float(np.sum(eigenvalue(spec, np.arange(K, start, -1))))


def sample_prior(spec, seed=0, size=None):
    """
    Karhunen-Loeve draw ``c_k = sqrt(lambda_k) Z_k``, ``k = 1..N``.

    ``size`` adds a leading batch axis of independent draws.
    """
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    shape = (spec.N,) if size is None else (size, spec.N)
    return np.sqrt(eigenvalues(spec)) * rng.standard_normal(shape)


def rkhs_norm(c, spec):
    """Cameron-Martin norm ``(sum_k c_k^2 / lambda_k)^{1/2}``."""
    c = np.asarray(c, dtype=float)
    if c.shape[-1] > spec.N:
        raise ValueError(f"coefficient vector longer than the truncation N={spec.N}")
    return float(np.sqrt(np.sum(c * c * precision_diagonal(spec, np.arange(1, c.shape[-1] + 1)))))


def sobolev_equivalent(c, spec):
    """``eta (|c|_{H^p}^2 + kappa |c|_{L2}^2)``, the Sobolev form of the RKHS norm squared."""
    return spec.eta * (spectral.sobolev_norm(c, spec.p) ** 2 + spec.kappa * spectral.sobolev_norm(c, 0) ** 2)
