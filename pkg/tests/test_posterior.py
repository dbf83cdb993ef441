import numpy as np
import pytest

from periodic_drift import spectral
from periodic_drift.local_time import ChiField, LocalTimeField, chi_field, estimate_local_time, stationary_density
from periodic_drift.posterior import (
    AssemblyError,
    assemble,
    covariance_trace,
    galerkin_refinement_check,
    log_likelihood,
    penalized_objective,
    pointwise_variance,
    posterior,
    sample_coefficients,
    sample_posterior,
    solve_mean,
)
from periodic_drift.prior import PriorSpec, eigenvalues, tail_trace
from periodic_drift.sde import simulate


@pytest.fixture(scope="module")
def fields():
    path = simulate("sin", 200, 1e-3, seed=9)
    return path, estimate_local_time(path, 128), chi_field(path, 128)


def test_zero_data_gives_prior(fields):
    spec = PriorSpec(N=8)
    lt = LocalTimeField(np.zeros(32), 0.0)
    post = posterior(spec, lt, ChiField(np.zeros(32, dtype=np.int64)))
    np.testing.assert_array_equal(post.mean, 0.0)
    np.testing.assert_allclose(np.diag(post.covariance), eigenvalues(spec), rtol=1e-12)
    assert covariance_trace(post) == pytest.approx(eigenvalues(spec).sum() + tail_trace(spec), rel=1e-12)


def test_constant_local_time_is_diagonal():
    spec = PriorSpec(p=2, eta=0.1, kappa=1.0, N=10)
    M, T = 64, 50.0
    rng = np.random.default_rng(1)
    chi = ChiField(rng.integers(-3, 4, M))
    system = assemble(spec, LocalTimeField(np.full(M, T), T), chi)
    off = system.A - np.diag(np.diag(system.A))
    assert np.max(np.abs(off)) < 1e-12 * T


def test_mean_solves_system_and_is_symmetric(fields):
    _, lt, chi = fields
    spec = PriorSpec(N=16, eta=1e-2)
    system = assemble(spec, lt, chi)
    np.testing.assert_array_equal(system.A, system.A.T)
    m = solve_mean(system)
    np.testing.assert_allclose(system.A @ m, system.r, atol=1e-10 * np.abs(system.r).max())


def test_assembly_guards(fields):
    _, lt, chi = fields
    with pytest.raises(ValueError):
        assemble(PriorSpec(N=64), lt, chi)  # M = 128 < 2N + 2
    with pytest.raises(ValueError):
        assemble(PriorSpec(N=8), lt, ChiField(np.zeros(64, dtype=np.int64)))
    bad = LocalTimeField(np.full(32, -1e6), 1.0)
    with pytest.raises(AssemblyError):
        posterior(PriorSpec(N=8), bad, ChiField(np.zeros(32, dtype=np.int64)))


def test_mean_recovers_sine_drift(fields):
    _, lt, chi = fields
    post = posterior(PriorSpec(N=16, eta=1e-3), lt, chi)
    truth = np.zeros(16)
    truth[0] = 1 / np.sqrt(2)
    assert spectral.sobolev_norm(post.mean - truth, 0) < 0.3


def test_refinement_check_small(fields):
    _, lt, chi = fields
    spec = PriorSpec(N=16, eta=1e-3)
    assert galerkin_refinement_check(spec, lt, chi) < 1e-2 * spectral.sobolev_norm(posterior(spec, lt, chi).mean, 2)


def test_mean_minimises_objective(fields):
    _, lt, chi = fields
    spec = PriorSpec(N=12, eta=1e-2)
    post = posterior(spec, lt, chi)
    base = penalized_objective(post.mean, lt, chi, spec)
    rng = np.random.default_rng(0)
    for _ in range(5):
        v = rng.normal(size=12)
        assert penalized_objective(post.mean + 1e-3 * v, lt, chi, spec) > base
    # the objective is exactly 1/2 c'Ac - r'c
    system = assemble(spec, lt, chi)
    c = rng.normal(size=12)
    assert penalized_objective(c, lt, chi, spec) == pytest.approx(0.5 * c @ system.A @ c - system.r @ c, rel=1e-10)


def test_log_likelihood_plus_prior_is_minus_objective(fields):
    _, lt, chi = fields
    spec = PriorSpec(N=6, eta=0.5)
    c = np.linspace(-0.3, 0.3, 6)
    prior_term = 0.5 * spec.eta * (spectral.sobolev_norm(c, spec.p) ** 2 + spec.kappa * np.dot(c, c))
    assert log_likelihood(c, lt, chi) - prior_term == pytest.approx(-penalized_objective(c, lt, chi, spec), rel=1e-10)


def test_sample_coefficients_covariance(fields):
    _, lt, chi = fields
    post = posterior(PriorSpec(N=6, eta=1e-2), lt, chi)
    draws = sample_coefficients(post, seed=3, size=40000)
    emp = np.cov(draws, rowvar=False)
    C = post.covariance
    scale = np.sqrt(np.outer(np.diag(C), np.diag(C)))
    assert np.max(np.abs(emp - C) / scale) < 0.05
    np.testing.assert_allclose(draws.mean(axis=0), post.mean, atol=4 * np.sqrt(np.diag(C) / 40000).max())


def test_sample_posterior_grid_and_determinism(fields):
    _, lt, chi = fields
    post = posterior(PriorSpec(N=8), lt, chi)
    a = sample_posterior(post, seed=1, M=64, size=3)
    assert a.shape == (3, 64)
    np.testing.assert_array_equal(a, sample_posterior(post, seed=1, M=64, size=3))
    assert sample_posterior(post, seed=1, M=64).shape == (64,)


def test_pointwise_variance_matches_covariance(fields):
    _, lt, chi = fields
    post = posterior(PriorSpec(N=8), lt, chi)
    x = np.array([0.1, 0.45])
    phi = spectral.basis_matrix(8, x)
    head = np.einsum("ij,jk,ik->i", phi, post.covariance, phi)
    var = pointwise_variance(post, x)
    assert np.all(var >= head)
    # tail modes add at most twice their trace pointwise (|phi_k|^2 <= 2)
    assert np.all(var - head <= 2 * tail_trace(post.spec) + 1e-15)


def test_infinite_data_limit():
    # with L = T rho the load -1/2 int v' L equals T int v b rho, so a bounded
    # chi (here zero) is consistent and the data dominate the prior
    law = stationary_density("sin", 256)
    T = 1e9
    post = posterior(PriorSpec(N=16), LocalTimeField(T * law.rho, T), ChiField(np.zeros(256, dtype=np.int64)))
    truth = np.zeros(16)
    truth[0] = 1 / np.sqrt(2)
    assert np.max(np.abs(post.mean - truth)) < 1e-3
    assert np.sqrt(pointwise_variance(post, np.arange(8) / 8)).max() < 1e-3
