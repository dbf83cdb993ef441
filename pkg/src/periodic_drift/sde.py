"""
Euler-Maruyama simulation of ``dX = b(X) dt + dW`` with a 1-periodic,
mean-zero drift, plus path functionals (winding times, Ito sums).
"""
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

from . import spectral

#: Hard cap on the number of Euler steps in one path.
MAX_STEPS = 2**31 - 1


def make_rng(seed, *key):
    """
    Counter-based generator for ``seed``.

    Extra ``key`` integers select an independent stream, so replicate ``r`` of
    horizon ``i`` draws from ``make_rng(seed, i, r)`` without overlap.
    """
    if isinstance(seed, np.random.Generator) and not key:
        return seed
    if isinstance(seed, np.random.SeedSequence):
        ss = seed if not key else np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + key)
    else:
        ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class DriftSpec:
    """
    A drift function given by finitely many Fourier coefficients.

    Mean zero and periodicity hold by construction.  ``name`` and ``params``
    record how the drift was built so it can be serialised back into a
    config descriptor.
    """
    coeffs: np.ndarray
    name: str = "fourier"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float)).copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zero(cls):
        return cls(np.zeros(2), "zero")

    @classmethod
    def sine(cls, amplitude=1.0):
        """``amplitude * sin(2 pi x)``, i.e. ``amplitude / sqrt(2)`` times phi_1."""
        return cls(np.array([amplitude / spectral.SQRT2, 0.0]), "sin", {"amplitude": amplitude})

    @classmethod
    def rough(cls, N=64, p=2, amplitude=1.0):
        """Coefficients ``amplitude * ceil(k/2)^-(p + 0.51)``: just inside H^p."""
        c = amplitude * spectral.wavenumbers(N) ** -(p + 0.51)
        return cls(c, "rough", {"N": N, "p": p, "amplitude": amplitude})

    @classmethod
    def from_descriptor(cls, desc):
        """
        Build a drift from a config descriptor.

        Accepts a registry name (``"zero"``, ``"sin"``, ``"rough"``), a dict
        ``{"name": ..., **params}``, a dict ``{"coeffs": [...]}`` or a path to
        a coefficient file (whitespace separated numbers, or a JSON list).
        """
        if isinstance(desc, cls):
            return desc
        if isinstance(desc, str):
            if desc in _REGISTRY:
                return _REGISTRY[desc]()
            path = Path(desc)
            if not path.is_file():
                raise ValueError(f"unknown drift {desc!r}: not a registry name or coefficient file")
            return cls.from_file(path)
        if isinstance(desc, dict):
            desc = dict(desc)
            if "coeffs" in desc:
                return cls(np.asarray(desc["coeffs"], dtype=float))
            name = desc.pop("name", None)
            if name not in _REGISTRY:
                raise ValueError(f"unknown drift name {name!r}")
            return _REGISTRY[name](**desc)
        raise ValueError(f"cannot interpret drift descriptor {desc!r}")

    @classmethod
    def from_file(cls, path):
        import json

        text = Path(path).read_text()
        if text.lstrip().startswith("["):
            return cls(np.asarray(json.loads(text), dtype=float))
        return cls(np.loadtxt(path, ndmin=1, comments="#"))

    def descriptor(self):
        if self.name == "fourier":
            return {"coeffs": [float(v) for v in self.coeffs]}
        return {"name": self.name, **self.params}

    @property
    def N(self):
        return self.coeffs.size

    def padded(self, N):
        """Coefficients zero-padded to length ``N``."""
        nz = np.flatnonzero(self.coeffs)
        if nz.size and nz[-1] >= N:
            raise ValueError(f"drift has modes beyond the first {N}")
        out = np.zeros(N)
        k = min(N, self.N)
        out[:k] = self.coeffs[:k]
        return out

    def __call__(self, x):
        return spectral.evaluate(self.coeffs, x)

    def derivative(self, x):
        return spectral.evaluate(spectral.differentiate(self.coeffs, 1), x)

    def antiderivative(self, x):
        """Exact ``int_0^x b(y) dy`` (periodic because b has mean zero)."""
        sin_c, cos_c = spectral.split_pairs(self.coeffs)
        w = 2.0 * np.pi * np.arange(1, sin_c.size + 1)
        # int_0^x sin(wy) dy = (1 - cos wx)/w ;  int_0^x cos(wy) dy = sin(wx)/w
        prim = np.empty(2 * sin_c.size)
        prim[0::2] = cos_c / w / spectral.SQRT2
        prim[1::2] = -sin_c / w / spectral.SQRT2
        return spectral.evaluate(prim, x) + np.sum(sin_c / w)


_REGISTRY = {
    "zero": DriftSpec.zero,
    "sin": DriftSpec.sine,
    "rough": DriftSpec.rough,
}


@dataclass(frozen=True)
class SamplePath:
    """
    Uniformly time-stepped path ``x_0, ..., x_n`` on ``[0, n dt]``.

    Values live on the real line (no wrapping).  Simulated paths start at 0.
    """
    dt: float
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("a path needs at least two points")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not np.all(np.isfinite(v)):
            raise ValueError("path contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "dt", float(self.dt))

    @property
    def n(self):
        return self.values.size - 1

    @property
    def T(self):
        return self.n * self.dt

    @property
    def times(self):
        return np.arange(self.n + 1) * self.dt

    @property
    def x0(self):
        return float(self.values[0])

    @property
    def xT(self):
        return float(self.values[-1])


@njit(cache=True)
def _euler(sin_c, cos_c, x0, dt, dw):
    n = dw.size
    out = np.empty(n + 1)
    out[0] = x0
    x = x0
    K = sin_c.size
    for i in range(n):
        b = 0.0
        if K > 0:
            th = 2.0 * np.pi * (x - np.floor(x))
            s1 = np.sin(th)
            c1 = np.cos(th)
            sk = s1
            ck = c1
            for k in range(K):
                b += sin_c[k] * sk + cos_c[k] * ck
                sk, ck = sk * c1 + ck * s1, ck * c1 - sk * s1
        x = x + b * dt + dw[i]
        out[i + 1] = x
    return out


def euler_maruyama(drift, dt, increments, x0=0.0):
    """Euler-Maruyama path driven by the given Brownian increments."""
    drift = DriftSpec.from_descriptor(drift)
    if not np.all(np.isfinite(drift.coeffs)):
        raise FloatingPointError(f"drift coefficients are not finite: {drift.coeffs}")
    sin_c, cos_c = spectral.split_pairs(drift.coeffs)
    if not np.any(drift.coeffs):
        sin_c = cos_c = np.zeros(0)
    dw = np.ascontiguousarray(increments, dtype=float)
    values = _euler(sin_c, cos_c, float(x0), float(dt), dw)
    if not np.all(np.isfinite(values)):
        bad = int(np.argmax(~np.isfinite(values)))
        raise FloatingPointError(f"path became non-finite at step {bad} (t={bad * dt:g})")
    return SamplePath(dt, values)


def n_steps(T, dt):
    """Number of Euler steps for horizon ``T``; rejects degenerate or huge counts."""
    T, dt = float(T), float(dt)
    if not (np.isfinite(T) and np.isfinite(dt) and T > 0 and dt > 0):
        raise ValueError(f"need finite T > 0 and dt > 0, got T={T}, dt={dt}")
    if dt > T:
        raise ValueError("dt must not exceed T")
    ratio = T / dt
    if ratio > MAX_STEPS:
        raise ValueError(f"T/dt = {ratio:.3g} exceeds the step limit {MAX_STEPS}")
    return max(1, int(round(ratio)))


def simulate(drift, T, dt=1e-3, seed=0, noise_on=True):
    """
    Simulate ``dX = b(X) dt + dW`` from ``X_0 = 0`` by Euler-Maruyama.

    Parameters
    ----------
    drift : DriftSpec or descriptor
        The periodic drift ``b``.
    T : float
        Horizon; the path has ``round(T/dt)`` steps.
    dt : float
        Time step.
    seed : int or numpy.random.SeedSequence
        Seed of the counter-based generator; equal seeds give identical paths.
    noise_on : bool
        If False, the Brownian increments are zero (deterministic Euler).

    Returns
    -------
    SamplePath
    """
    n = n_steps(T, dt)
    if noise_on:
        dw = make_rng(seed).standard_normal(n)
        dw *= np.sqrt(dt)
    else:
        dw = np.zeros(n)
    return euler_maruyama(drift, dt, dw)


def estimate_mean_drift(path):
    """The simple estimator ``X_T / T`` of the drift average."""
    return (path.xT - path.x0) / path.T


@njit(cache=True)
def _winding_indices(x):
    idx = []
    anchor = np.floor(x[0] + 0.5)
    for i in range(1, x.size):
        while abs(x[i] - anchor) >= 1.0:
            anchor += 1.0 if x[i] > anchor else -1.0
            idx.append(i)
    return idx


def winding_times(path):
    """
    Winding times: ``tau_{k+1}`` is the first grid time after ``tau_k`` at
    which the path leaves ``[a_k - 1, a_k + 1]``, where the integer anchor
    ``a_k`` is the level reached at ``tau_k`` (``a_0`` is the integer nearest
    to ``x_0``).  Anchoring on integers rather than on the overshot position
    keeps the discretisation delay from accumulating across windings.
    """
    idx = _winding_indices(np.ascontiguousarray(path.values))
    return np.asarray(idx, dtype=np.int64) * path.dt


def ito_integral(path, f):
    """Left-point Ito sum ``sum_i f(x_i) (x_{i+1} - x_i)`` for coefficients ``f``."""
    x = path.values
    return float(np.dot(spectral.evaluate(f, x[:-1]), np.diff(x)))


def path_log_likelihood(path, c):
    """
    Girsanov log-likelihood in path form,
    ``sum_i b(x_i) dx_i - 1/2 sum_i b(x_i)^2 dt``.
    """
    x = path.values
    b = spectral.evaluate(c, x[:-1])
    return float(np.dot(b, np.diff(x)) - 0.5 * path.dt * np.dot(b, b))
