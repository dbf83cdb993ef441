"""
Periodic local time, winding field and the invariant density on the circle.

All fields live on the grid ``x_j = j / M``.  The local time is a histogram
whose cells ``[(j - 1/2)/M, (j + 1/2)/M)`` are centred on the grid points, so
the same nodes serve as quadrature points for the Galerkin assembly and as
evaluation points for the invariant density.
"""
from dataclasses import dataclass

import numpy as np

from . import spectral
from .sde import DriftSpec

#: Sobolev orders at which fluctuation norms are reported (all below 1/2).
FLUCTUATION_ORDERS = (0.0, 0.25, 0.4)


@dataclass(frozen=True)
class LocalTimeField:
    """Occupation density ``L_j`` of the wrapped path (time per unit space)."""
    values: np.ndarray
    T: float

    @property
    def M(self):
        return self.values.size

    @property
    def x(self):
        return spectral.grid(self.M)


@dataclass(frozen=True)
class ChiField:
    """Periodised signed crossing count ``chi_j`` on the grid."""
    values: np.ndarray

    @property
    def M(self):
        return self.values.size

    @property
    def x(self):
        return spectral.grid(self.M)


@dataclass(frozen=True)
class StationaryLaw:
    """
    Invariant density ``rho``, scale derivative ``s'`` and speed mass.

    ``s'`` is normalised so that ``s(1) - s(0) = 1``; then ``m_mass = m[0,1]``
    equals the mean winding time and ``rho * s' * m_mass = 1``.
    """
    x: np.ndarray
    rho: np.ndarray
    s_prime: np.ndarray
    m_mass: float

    @property
    def M(self):
        return self.x.size


def grid_index(x, M):
    """Index of the grid point ``j/M`` nearest to each (unwrapped) position."""
    j = np.floor(np.asarray(x, dtype=float) * M + 0.5)
    return np.mod(j, M).astype(np.int64)


def occupation(x, dt, M):
    """Histogram occupation density of the points ``x`` each weighted by ``dt``."""
    counts = np.bincount(grid_index(x, M), minlength=M)
    return M * dt * counts.astype(float)


def estimate_local_time(path, M=256):
    """
    Histogram estimate of the periodic local time.

    Each step ``i < n`` deposits ``dt`` into the cell containing ``x_i``
    (left-point rule), so ``(1/M) sum_j L_j = T`` holds exactly.
    """
    M = int(M)
    if M < 4:
        raise ValueError("grid size must be at least 4")
    return LocalTimeField(occupation(path.values[:-1], path.dt, M), path.T)


def chi_closed_form(x0, xT, x):
    """
    ``sum_k chi_T(x + k)``: the number of integers ``k`` with
    ``x0 < x + k < xT``, negated when ``xT < x0``.
    """
    x = np.asarray(x, dtype=float)
    return (np.floor(xT - x) - np.floor(x0 - x)).astype(np.int64)


def chi_field(path, M=256):
    """Winding field of a path on the grid ``j / M``."""
    return ChiField(chi_closed_form(path.x0, path.xT, spectral.grid(int(M))))


def stationary_density(drift, M=256):
    """
    Invariant density ``rho = C exp(2 int_0^x b)`` on the grid ``j / M``.

    The antiderivative of the Fourier drift is exact; ``C`` and the scale
    normalisation use the grid mean, which is spectrally accurate for
    smooth periodic integrands.
    """
    drift = DriftSpec.from_descriptor(drift)
    x = spectral.grid(int(M))
    prim = drift.antiderivative(x)
    up = np.exp(2.0 * prim)
    down = np.exp(-2.0 * prim)
    z_up, z_down = up.mean(), down.mean()
    return StationaryLaw(x, up / z_up, down / z_down, float(z_up * z_down))


def _check_same_grid(lt, law):
    if lt.M != law.M:
        raise ValueError(f"grid mismatch: local time has M={lt.M}, law has M={law.M}")


def fluctuation_field(lt, law):
    """``sqrt(T) (L/T - rho)`` on the common grid."""
    _check_same_grid(lt, law)
    return np.sqrt(lt.T) * (lt.values / lt.T - law.rho)


def fluctuation_norms(lt, law, orders=FLUCTUATION_ORDERS, N=None):
    """
    Unscaled ``||L/T - rho||_{H^s}`` for each order ``s``.

    The difference is projected onto the first ``N`` basis functions
    (default ``M/2 - 1``, the largest the grid supports).
    """
    _check_same_grid(lt, law)
    N = lt.M // 2 - 1 if N is None else N
    c = spectral.analyze(lt.values / lt.T - law.rho, N)
    return {s: float(spectral.sobolev_norm(c, s)) for s in orders}


def sup_error(lt, law):
    """``max_j |L_j/T - rho_j|``."""
    _check_same_grid(lt, law)
    return float(np.max(np.abs(lt.values / lt.T - law.rho)))
