import numpy as np
import pytest
from scipy.linalg import solve_discrete_lyapunov

from helpers import stable_truth

from cmvt import type1, type2
from cmvt.data import DesignMatrices, build_design
from cmvt.linalg import unvec
from cmvt.params import TParams
from cmvt.simulate import (
    RngStream,
    sample_coeff_vector,
    sample_inverse_wishart,
    simulate_bvar,
)


def test_rng_stream_determinism_and_splits():
    a = RngStream(7).normal(10)
    b = RngStream(7).normal(10)
    assert np.array_equal(a, b)
    child0 = RngStream(7).split(0).normal(10)
    child1 = RngStream(7).split(1).normal(10)
    assert not np.array_equal(child0, child1)
    assert not np.array_equal(a, child0)
    with pytest.raises(ValueError):
        RngStream(-1)


def test_rng_uniform_open_interval():
    u = RngStream(3).uniform(10_000)
    assert np.all(u > 0.0) and np.all(u < 1.0)


def test_inverse_wishart_draw_properties():
    rng = RngStream(11)
    v = np.array([[2.0, 0.3], [0.3, 1.0]])
    for _ in range(50):
        draw = sample_inverse_wishart(9.0, v, rng)
        assert np.array_equal(draw, draw.T)
        assert np.linalg.eigvalsh(draw).min() > 0.0
    fixed_a = sample_inverse_wishart(9.0, v, RngStream(5))
    fixed_b = sample_inverse_wishart(9.0, v, RngStream(5))
    assert np.array_equal(fixed_a, fixed_b)
    with pytest.raises(ValueError):
        sample_inverse_wishart(1.0, v, rng)


def test_inverse_wishart_scalar_mean():
    # n = 1: reciprocal of a chi-square scaled by V; mean V/(nu - 2)
    rng = RngStream(17)
    draws = 100_000
    values = np.array(
        [sample_inverse_wishart(10.0, np.array([[1.0]]), rng)[0, 0] for _ in range(draws)]
    )
    se = values.std() / np.sqrt(draws)
    assert abs(values.mean() - 1.0 / 8.0) <= 3.0 * se


def test_coeff_vector_covariance():
    rng = RngStream(23)
    lam = np.array([0.5, 2.0])
    sigma = np.array([[1.0, 0.4], [0.4, 0.8]])
    pi0 = np.array([1.0, 2.0, 3.0, 4.0])
    draws = np.array([sample_coeff_vector(pi0, lam, sigma, rng) for _ in range(40_000)])
    want = np.kron(np.diag(lam), sigma)
    got = np.cov(draws.T)
    assert np.abs(got - want).max() < 0.05
    assert np.abs(draws.mean(axis=0) - pi0).max() < 0.05


def test_coeff_vector_vanishing_scale():
    rng = RngStream(29)
    pi0 = np.array([1.0, -2.0])
    draw = sample_coeff_vector(pi0, np.array([1e-12, 1e-12]), np.eye(1), rng)
    assert np.abs(draw - pi0).max() < 1e-4


def test_simulate_type1_single_period_unrolled():
    # replaying the documented draw order reproduces y_1 = Pi Y_1 + chol(Sigma) eps
    truth = stable_truth(2, 1, 1)
    presample = np.array([[0.3], [-0.1]])
    dataset = simulate_bvar(truth, 2, 1, 1, 1, "type1", presample=presample, rng=RngStream(31))
    replay = RngStream(31)
    sigma = sample_inverse_wishart(truth.nu0, truth.v0, replay)
    coeff = unvec(sample_coeff_vector(truth.pi0, truth.lambda0, sigma, replay), 2, 3)
    eps = replay.normal((2,))
    regressor = np.concatenate([[1.0], presample[:, 0]])
    expected = coeff @ regressor + np.linalg.cholesky(sigma) @ eps
    assert np.abs(dataset.endogenous[:, 0] - expected).max() < 1e-12


def test_simulate_dataset_shape_and_determinism():
    truth = stable_truth(2, 1, 2)
    a = simulate_bvar(truth, 2, 1, 2, 30, "type2", rng=RngStream(37))
    b = simulate_bvar(truth, 2, 1, 2, 30, "type2", rng=RngStream(37))
    assert np.array_equal(a.endogenous, b.endogenous)
    assert a.T == 30 and a.p == 2 and a.n == 2
    c = simulate_bvar(truth, 2, 1, 2, 30, "type2", rng=RngStream(38))
    assert not np.array_equal(a.endogenous, c.endogenous)
    with pytest.raises(ValueError):
        simulate_bvar(truth, 2, 1, 2, 30, "type3")


def test_simulate_without_lags():
    # p = 0: the regressor is the exogenous block alone
    truth = TParams(np.array([0.7, -0.2]), np.array([0.1]), 4.0, np.eye(2))
    dataset = simulate_bvar(truth, 2, 1, 0, 25, "type2", rng=RngStream(39))
    assert dataset.p == 0 and dataset.presample.shape == (2, 0)
    design = build_design(dataset)
    assert design.d == 1
    assert np.isfinite(type2.log_likelihood(truth, design))


def test_simulate_type1_true_params_score_higher():
    # averaged over replications, the marginal likelihood prefers the truth
    # to a clearly perturbed parameter point
    truth = stable_truth(1, 1, 1, own=0.5, lam=0.05, v_scale=0.5)
    shifted = TParams(truth.pi0 + 1.0, truth.lambda0, truth.nu0, truth.v0)
    gap = 0.0
    reps = 1000
    for rep in range(reps):
        dataset = simulate_bvar(truth, 1, 1, 1, 10, "type1", rng=RngStream(40_000 + rep))
        design = build_design(dataset)
        gap += type1.log_marginal_likelihood(truth, design)
        gap -= type1.log_marginal_likelihood(shifted, design)
    assert gap / reps > 0.0


def test_simulate_type2_degenerate_matches_fixed_var_autocovariance():
    # tiny coefficient scatter and a near-degenerate covariance law reduce the
    # path to a fixed-coefficient VAR(1); match its stationary covariance
    n, l, p = 2, 1, 1
    a_mat = np.array([[0.5, 0.1], [0.0, 0.3]])
    sigma_target = np.array([[0.6, 0.1], [0.1, 0.4]])
    nu0 = 1.0e6
    coeff = np.hstack([np.zeros((n, 1)), a_mat])
    truth = TParams(
        coeff.reshape(-1, order="F"),
        np.full(n * p + l, 1e-12),
        nu0,
        (nu0 - n - 1.0) * sigma_target,
    )
    dataset = simulate_bvar(truth, n, l, p, 20_000, "type2", rng=RngStream(41))
    y = dataset.endogenous
    gamma0 = solve_discrete_lyapunov(a_mat, sigma_target)
    sample_cov = np.cov(y)
    assert np.abs(sample_cov - gamma0).max() < 0.1 * np.abs(gamma0).max()


def test_type2_histogram_matches_density():
    # draws from the generative law versus the analytic one-period density
    params = TParams(np.array([0.5]), np.array([0.3]), 6.0, np.array([[1.2]]))
    regressor = np.array([1.4])
    rng = RngStream(43)
    draws = 100_000
    sig2 = params.v0[0, 0] / rng.chi_square(np.full(draws, params.nu0))
    coeff = params.pi0[0] + np.sqrt(params.lambda0[0] * sig2) * rng.normal(draws)
    samples = coeff * regressor[0] + np.sqrt(sig2) * rng.normal(draws)
    edges = np.quantile(samples, np.linspace(0.0, 1.0, 31))
    edges[0], edges[-1] = -np.inf, np.inf
    counts, _ = np.histogram(samples, bins=edges)
    from scipy import integrate, stats

    probs = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        value, _ = integrate.quad(
            lambda y: np.exp(type2.log_predictive_density(params, regressor, [y])),
            lo, hi,
        )
        probs.append(value)
    probs = np.array(probs)
    probs = probs / probs.sum()
    stat, pvalue = stats.chisquare(counts, probs * draws)
    assert pvalue > 0.001


def test_type1_single_period_histogram_matches_density():
    params = TParams(np.array([0.2]), np.array([0.5]), 5.0, np.array([[0.9]]))
    regressor = np.array([[1.1]])
    rng = RngStream(47)
    draws = 100_000
    sig2 = params.v0[0, 0] / rng.chi_square(np.full(draws, params.nu0))
    coeff = params.pi0[0] + np.sqrt(params.lambda0[0] * sig2) * rng.normal(draws)
    samples = coeff * regressor[0, 0] + np.sqrt(sig2) * rng.normal(draws)
    edges = np.quantile(samples, np.linspace(0.0, 1.0, 31))
    edges[0], edges[-1] = -np.inf, np.inf
    counts, _ = np.histogram(samples, bins=edges)
    from scipy import integrate, stats

    def density(y):
        design = DesignMatrices(np.array([[y]]), regressor)
        return np.exp(type1.log_marginal_likelihood(params, design))

    probs = np.array(
        [integrate.quad(density, lo, hi)[0] for lo, hi in zip(edges[:-1], edges[1:])]
    )
    probs = probs / probs.sum()
    stat, pvalue = stats.chisquare(counts, probs * draws)
    assert pvalue > 0.001
