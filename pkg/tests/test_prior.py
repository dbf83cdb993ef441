import numpy as np
import pytest

from periodic_drift import spectral
from periodic_drift.prior import (
    PriorSpec,
    eigenvalue,
    eigenvalues,
    precision_diagonal,
    rkhs_norm,
    sample_prior,
    sobolev_equivalent,
    tail_cutoff,
    tail_trace,
)


@pytest.mark.parametrize("kw", [dict(p=1), dict(p=2.5), dict(eta=0), dict(kappa=-1), dict(N=1)])
def test_invalid_prior_rejected(kw):
    with pytest.raises(ValueError):
        PriorSpec(**kw)


def test_eigenvalues_closed_form():
    spec = PriorSpec(p=2, eta=0.5, kappa=2.0, N=6)
    m = np.array([1, 1, 2, 2, 3, 3])
    np.testing.assert_allclose(eigenvalues(spec), 1 / (0.5 * (2 * np.pi * m) ** 4 + 1.0))
    with pytest.raises(ValueError):
        eigenvalue(spec, 0)


def test_tail_trace_against_long_sum():
    spec = PriorSpec(p=2, eta=1.0, N=16)
    brute = np.sum(eigenvalue(spec, np.arange(17, 2_000_001)))
    assert tail_trace(spec) == pytest.approx(brute, abs=1e-12)
    assert tail_cutoff(spec, 10**9) == 10**9


def test_rkhs_norm_equals_sobolev_form():
    spec = PriorSpec(p=3, eta=0.2, kappa=0.7, N=9)
    c = np.linspace(-1, 1, 9)
    assert rkhs_norm(c, spec) ** 2 == pytest.approx(sobolev_equivalent(c, spec), rel=1e-12)
    with pytest.raises(ValueError):
        rkhs_norm(np.ones(10), spec)


def test_sample_prior_shapes_and_determinism():
    spec = PriorSpec(N=8)
    assert sample_prior(spec, 1).shape == (8,)
    draws = sample_prior(spec, 1, size=5)
    assert draws.shape == (5, 8)
    np.testing.assert_array_equal(draws, sample_prior(spec, 1, size=5))


def test_prior_draws_regularity():
    # partial sums of a p = 2 draw lie in H^s for s < 3/2; the H^s energy in
    # dyadic blocks decays for s = 1.3 and grows for s = 1.7
    spec = PriorSpec(p=2, eta=1.0, N=4096)
    c = sample_prior(spec, 0, size=200)
    m = spectral.wavenumbers(spec.N)
    blocks = [(2**j, 2 ** (j + 1)) for j in range(3, 11)]

    def slope(s):
        e = [np.mean(np.sum(((2 * np.pi * m) ** (2 * s) * c * c)[:, (m >= a) & (m < b)], axis=1)) for a, b in blocks]
        return np.polyfit(np.log2([a for a, _ in blocks]), np.log2(e), 1)[0]

    assert slope(1.3) == pytest.approx(-0.4, abs=0.1)
    assert slope(1.7) == pytest.approx(0.4, abs=0.1)


def test_precision_diagonal_is_inverse_eigenvalue():
    spec = PriorSpec()
    k = np.arange(1, 20)
    np.testing.assert_allclose(precision_diagonal(spec, k) * eigenvalue(spec, k), 1.0)
