"""
Real Fourier basis on the circle.

Functions on the circle ``[0, 1)`` with zero mean are represented by their
coefficients ``c_1, ..., c_N`` against the orthonormal basis

    phi_{2k-1}(x) = sqrt(2) sin(2 pi k x),    phi_{2k}(x) = sqrt(2) cos(2 pi k x).

Coefficient vectors are plain 1-D float arrays (index 0 holds ``c_1``); grid
functions are 1-D arrays sampled at ``x_j = j / M``.  The constant mode is
never stored.
"""
import numpy as np
from numba import njit

SQRT2 = np.sqrt(2.0)


def wavenumbers(N):
    """Integer frequency ``ceil(k/2)`` of each basis index ``k = 1..N``."""
    return (np.arange(1, N + 1) + 1) // 2


def grid(M):
    """Left-endpoint uniform grid ``j / M``."""
    return np.arange(M) / M


def _check_grid_size(M):
    M = int(M)
    if M < 4 or M & (M - 1):
        raise ValueError(f"grid size must be a power of two >= 4, got {M}")
    return M


def _as_coeffs(c):
    c = np.asarray(c, dtype=float)
    if c.ndim < 1:
        raise ValueError("coefficients must be at least one-dimensional")
    return c


def basis_eval(k, x):
    """Evaluate the basis function ``phi_k`` at ``x`` (scalar or array)."""
    k = int(k)
    if k < 1:
        raise ValueError("basis index must be >= 1; the constant mode is excluded")
    freq = (k + 1) // 2
    arg = 2.0 * np.pi * freq * np.asarray(x, dtype=float)
    if k % 2 == 0:
        return SQRT2 * np.cos(arg)
    return SQRT2 * np.sin(arg)


def basis_matrix(N, x, derivative=0):
    """
    Matrix ``B[j, k-1] = phi_k^{(derivative)}(x_j)`` for ``k = 1..N``.

    Parameters
    ----------
    N : int
        Number of basis functions.
    x : array_like
        Evaluation points.
    derivative : int, optional
        Order of the derivative applied to every basis function.
    """
    x = np.asarray(x, dtype=float)
    m = wavenumbers(N)
    arg = 2.0 * np.pi * np.outer(x, m)
    # phi^{(d)} shifts the phase by d * pi/2 and scales by (2 pi m)^d
    shift = derivative * np.pi / 2.0
    odd = (np.arange(1, N + 1) % 2).astype(bool)
    out = np.empty((x.size, N))
    out[:, odd] = np.sin(arg[:, odd] + shift)
    out[:, ~odd] = np.cos(arg[:, ~odd] + shift)
    return SQRT2 * (2.0 * np.pi * m) ** derivative * out


def _to_spectrum(c, M):
    """Full length-M FFT spectrum of the coefficients (last axis); frequencies
    at or above M/2 fold onto their grid aliases."""
    N = c.shape[-1]
    K = (N + 1) // 2
    sin_c = np.zeros(c.shape[:-1] + (K,))
    cos_c = np.zeros(c.shape[:-1] + (K,))
    sin_c[..., : (N + 1) // 2] = c[..., 0::2]
    cos_c[..., : N // 2] = c[..., 1::2]
    # sqrt(2)(a cos + s sin) = ((a - i s)/sqrt(2)) e^{i theta} + c.c.
    amp = np.moveaxis(M * (cos_c - 1j * sin_c) / SQRT2, -1, 0)
    freqs = np.arange(1, K + 1)
    spec = np.zeros(c.shape[:-1] + (M,), dtype=complex)
    view = np.moveaxis(spec, -1, 0)
    np.add.at(view, freqs % M, amp)
    np.add.at(view, (-freqs) % M, np.conj(amp))
    return spec


def synthesize(c, M, allow_alias=False):
    """
    Sample ``sum_k c_k phi_k`` on the grid ``j / M``.

    ``c`` may carry leading batch axes.  By default ``M >= 2N`` is required so
    the samples determine the coefficients; with ``allow_alias=True`` any
    number of modes is accepted and the result is still the exact point
    evaluation (high frequencies fold onto their grid aliases).
    """
    c = _as_coeffs(c)
    M = _check_grid_size(M)
    N = c.shape[-1]
    if not allow_alias and M < 2 * N:
        raise ValueError(f"grid size M={M} too small for N={N} modes (need M >= 2N)")
    spec = _to_spectrum(c, M)
    return np.fft.ifft(spec, axis=-1).real


def analyze(g, N):
    """
    Rectangle-rule projection ``c_k = (1/M) sum_j g_j phi_k(j/M)``.

    Exact for trigonometric polynomials of degree below ``M/2``; the grid
    mean (constant mode) is discarded.
    """
    g = np.asarray(g, dtype=float)
    M = _check_grid_size(g.shape[-1])
    N = int(N)
    if N < 1 or N > M // 2 - 1:
        raise ValueError(f"N={N} too large for grid size M={M} (need N <= M/2 - 1)")
    G = np.fft.rfft(g, axis=-1) / M
    m = wavenumbers(N)
    out = np.empty(g.shape[:-1] + (N,))
    out[..., 0::2] = -SQRT2 * G[..., m[0::2]].imag
    out[..., 1::2] = SQRT2 * G[..., m[1::2]].real
    return out


@njit(cache=True)
def _series(sin_c, cos_c, x):
    out = np.empty(x.size)
    K = sin_c.size
    for i in range(x.size):
        th = 2.0 * np.pi * x[i]
        s1 = np.sin(th)
        c1 = np.cos(th)
        sk = s1
        ck = c1
        acc = 0.0
        for k in range(K):
            acc += sin_c[k] * sk + cos_c[k] * ck
            sk, ck = sk * c1 + ck * s1, ck * c1 - sk * s1
        out[i] = acc
    return out


def split_pairs(c):
    """Split coefficients into (sine, cosine) weights per frequency, each
    scaled by sqrt(2) so that f(x) = sum_k s_k sin(2 pi k x) + a_k cos(2 pi k x)."""
    c = _as_coeffs(c)
    K = (c.size + 1) // 2
    sin_c = np.zeros(K)
    cos_c = np.zeros(K)
    sin_c[:] = SQRT2 * c[0::2]
    cos_c[: c.size // 2] = SQRT2 * c[1::2]
    return sin_c, cos_c


def evaluate(c, x):
    """Evaluate ``sum_k c_k phi_k`` at arbitrary points ``x`` (any shape)."""
    sin_c, cos_c = split_pairs(c)
    x = np.asarray(x, dtype=float)
    # periodicity: reduce first so the angle recurrence starts from a small phase
    flat = np.ascontiguousarray((x - np.floor(x)).ravel())
    return _series(sin_c, cos_c, flat).reshape(x.shape)


def differentiate(c, order=1):
    """
    Exact derivative in coefficient space, applied ``order`` times.

    Each sine/cosine pair at frequency ``k`` rotates as
    ``phi_{2k-1}' = 2 pi k phi_{2k}`` and ``phi_{2k}' = -2 pi k phi_{2k-1}``.
    An odd-length input is padded with a zero cosine so the derivative of its
    last sine mode is kept; the output then has ``N + 1`` entries.
    """
    c = _as_coeffs(c)
    order = int(order)
    if order < 0:
        raise ValueError("order must be non-negative")
    if order == 0:
        return c.copy()
    if c.shape[-1] % 2:
        c = np.concatenate([c, np.zeros(c.shape[:-1] + (1,))], axis=-1)
    w = 2.0 * np.pi * np.arange(1, c.shape[-1] // 2 + 1)
    s, a = c[..., 0::2], c[..., 1::2]
    # the pair is Re[(a - i s) sqrt(2) e^{i w x}]; d/dx multiplies by i w
    z = (a - 1j * s) * (1j * w) ** order
    out = np.empty_like(c)
    out[..., 0::2] = -z.imag
    out[..., 1::2] = z.real
    return out


def sobolev_norm(c, s):
    """``(sum_k (2 pi ceil(k/2))^{2s} c_k^2)^{1/2}``; the L2 norm when ``s = 0``."""
    c = _as_coeffs(c)
    w = (2.0 * np.pi * wavenumbers(c.shape[-1])) ** (2.0 * s)
    return np.sqrt(np.sum(w * c * c, axis=-1))
