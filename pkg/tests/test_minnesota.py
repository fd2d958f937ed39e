import numpy as np
import pytest

from helpers import simulated_design, stable_truth

from cmvt import minnesota, type1
from cmvt.exceptions import NumericError
from cmvt.fitting import FitOptions
from cmvt.minnesota import MinnesotaHyper, default_hyper


def _random_hyper(rs, n, l, m=None, nu0=None):
    m = rs.randint(0, min(n, l) + 1) if m is None else m
    phi = np.array([0.0] * m + [1.0] * (n - m))
    return MinnesotaHyper(
        rs.randn(n, m),
        np.exp(rs.randn(l) * 0.5),
        float(np.exp(rs.randn() * 0.5)),
        float(rs.randn()),
        np.exp(rs.randn(n) * 0.5),
        phi,
        float(n + 2 + rs.rand()),
        np.eye(n),
    )


def test_hyper_validation():
    with pytest.raises(ValueError, match="0 .stationary. or 1"):
        MinnesotaHyper(np.zeros((1, 0)), [1.0], 1.0, 1.0, [1.0], [0.5], 3.0, np.eye(1))
    with pytest.raises(ValueError, match="first positions"):
        MinnesotaHyper(np.zeros((2, 1)), [1.0], 1.0, 1.0, [1.0, 1.0], [1.0, 0.0], 4.0, np.eye(2))
    with pytest.raises(ValueError, match="cannot exceed"):
        MinnesotaHyper(np.zeros((2, 2)), [1.0], 1.0, 1.0, [1.0, 1.0], [0.0, 0.0], 4.0, np.eye(2))
    with pytest.raises(ValueError, match="alpha"):
        MinnesotaHyper(np.zeros((1, 0)), [1.0], 0.0, 1.0, [1.0], [1.0], 3.0, np.eye(1))


def test_hyper_json_roundtrip():
    rs = np.random.RandomState(0)
    hyper = _random_hyper(rs, 3, 2, m=1)
    again = MinnesotaHyper.from_dict(hyper.to_dict())
    assert np.array_equal(again.c_m, hyper.c_m)
    assert np.array_equal(again.eps, hyper.eps)
    assert again.alpha == hyper.alpha and again.beta == hyper.beta
    assert np.array_equal(again.gamma, hyper.gamma)
    assert np.array_equal(again.phi, hyper.phi)


def test_dummy_observations_all_unit_root():
    hyper = default_hyper(2, 1)  # phi all ones, m = 0
    dummy = minnesota.build_dummy_observations(hyper, 2, 1, 2)
    assert np.abs(dummy.y_dummy[:, :1]).max() == 0.0
    assert np.array_equal(dummy.y_dummy[:, 1:3], hyper.alpha * np.diag(hyper.gamma))
    assert np.abs(dummy.y_dummy[:, 3:]).max() == 0.0


def test_dummy_observations_hand_case():
    # p=1, n=1, l=1, phi=0: y_dummy = [c*e, 0], regressors diag(e, alpha*gamma)
    hyper = MinnesotaHyper([[2.0]], [0.5], 1.5, 0.7, [1.2], [0.0], 3.0, np.eye(1))
    dummy = minnesota.build_dummy_observations(hyper, 1, 1, 1)
    assert np.allclose(dummy.y_dummy, [[2.0 * 0.5, 0.0]])
    assert np.allclose(dummy.regressor_dummy, np.diag([0.5, 1.5 * 1.2]))


def test_dummy_gram_equals_lambda0_inv():
    rs = np.random.RandomState(1)
    for _ in range(50):
        n, l, p = rs.randint(1, 4), rs.randint(1, 4), rs.randint(1, 4)
        hyper = _random_hyper(rs, n, l)
        dummy = minnesota.build_dummy_observations(hyper, n, l, p)
        gram = dummy.regressor_dummy @ dummy.regressor_dummy.T
        assert np.abs(gram - minnesota.lambda0_inv(hyper, p)).max() < 1e-12
        # block diagonality of the dummy regressors
        assert np.abs(dummy.regressor_dummy[:l, l:]).max() == 0.0
        assert np.abs(dummy.regressor_dummy[l:, :l]).max() == 0.0


def test_dummy_ols_reproduces_prior_mean():
    rs = np.random.RandomState(2)
    for _ in range(50):
        n, l, p = rs.randint(1, 4), rs.randint(1, 4), rs.randint(1, 4)
        hyper = _random_hyper(rs, n, l)
        dummy = minnesota.build_dummy_observations(hyper, n, l, p)
        gram = dummy.regressor_dummy @ dummy.regressor_dummy.T
        ols = dummy.y_dummy @ dummy.regressor_dummy.T @ np.linalg.inv(gram)
        assert np.abs(ols - minnesota.pi0_matrix(hyper, p)).max() < 1e-12


def test_lambda0_inv_hand_case_and_logdet():
    hyper = MinnesotaHyper([[0.3]], [0.5], 1.5, 0.7, [1.2], [0.0], 3.0, np.eye(1))
    diag = minnesota.lambda0_inv_diagonal(hyper, 1)
    assert np.allclose(diag, [0.25, 1.5 ** 2 * 1.2 ** 2])
    # log-det closed form with the dimensionally consistent n * sum(log lag) term
    rs = np.random.RandomState(3)
    for _ in range(20):
        n, l, p = rs.randint(1, 4), rs.randint(1, 4), rs.randint(2, 5)
        hyper = _random_hyper(rs, n, l)
        diag = minnesota.lambda0_inv_diagonal(hyper, p)
        lags = np.arange(1, p + 1)
        closed = (
            2 * np.sum(np.log(hyper.eps))
            + 2 * n * p * np.log(hyper.alpha)
            + 2 * hyper.beta * n * np.sum(np.log(lags))
            + 2 * p * np.sum(np.log(hyper.gamma))
        )
        assert np.sum(np.log(diag)) == pytest.approx(closed, abs=1e-10)
        assert np.all(diag > 0.0)


def test_pi0_random_walk_prior():
    hyper = default_hyper(3, 1)
    mat = minnesota.pi0_matrix(hyper, 2)
    assert np.abs(mat[:, 0]).max() == 0.0
    assert np.array_equal(mat[:, 1:4], np.eye(3))
    assert np.abs(mat[:, 4:]).max() == 0.0


def test_pi0_prior_mean_entries():
    rs = np.random.RandomState(4)
    hyper = _random_hyper(rs, 3, 2, m=2)
    mat = minnesota.pi0_matrix(hyper, 1)
    for i in range(3):
        for j in range(2):
            expected = hyper.c_m[i, j] if (i < 2 and j < 2) else 0.0
            assert mat[i, j] == pytest.approx(expected)
    assert np.array_equal(np.diag(mat[:, 2:5]), hyper.phi)


def test_delta_matrices():
    rs = np.random.RandomState(5)
    hyper = _random_hyper(rs, 2, 2, m=0)
    p = 3
    d = hyper.l + hyper.n * p
    # eps selector: single unit entry
    for j in range(hyper.l):
        delta = minnesota.delta_matrix("eps", hyper, p, j)
        expected = np.zeros((d, d))
        expected[j, j] = 1.0
        assert np.array_equal(delta, expected)
    # beta selector vanishes at p = 1
    assert np.abs(minnesota.delta_matrix("beta", hyper, 1)).max() == 0.0
    # alpha selector at p = 1: lower block diag(gamma^2)
    delta_a = minnesota.delta_matrix("alpha", hyper, 1)
    assert np.allclose(np.diag(delta_a)[hyper.l:], hyper.gamma ** 2)
    # printed gamma variant vanishes at p = 1, consistent one does not
    assert np.abs(minnesota.delta_matrix("gamma", hyper, 1, 0, variant="printed")).max() == 0.0
    assert np.abs(minnesota.delta_matrix("gamma", hyper, 1, 0)).max() > 0.0
    with pytest.raises(ValueError):
        minnesota.delta_matrix("gamma", hyper, 1, 5)
    with pytest.raises(ValueError):
        minnesota.delta_matrix("nope", hyper, 1)


def test_delta_partition_reconstructs_lambda0_inv():
    rs = np.random.RandomState(6)
    for _ in range(10):
        n, l, p = rs.randint(1, 4), rs.randint(1, 4), rs.randint(1, 4)
        hyper = _random_hyper(rs, n, l)
        total = sum(
            hyper.eps[j] ** 2 * minnesota.delta_matrix("eps", hyper, p, j)
            for j in range(l)
        )
        total = total + hyper.alpha ** 2 * minnesota.delta_matrix("alpha", hyper, p)
        assert np.abs(total - minnesota.lambda0_inv(hyper, p)).max() < 1e-12


def test_induced_prior_variance_law():
    # Lambda0 diagonal times sigma_i^2 reproduces the stated prior variances
    rs = np.random.RandomState(7)
    for _ in range(20):
        n, l, p = rs.randint(1, 4), rs.randint(1, 4), rs.randint(1, 4)
        hyper = _random_hyper(rs, n, l)
        lam = 1.0 / minnesota.lambda0_inv_diagonal(hyper, p)
        sigma_i = float(np.exp(rs.randn()))
        for j in range(l):
            assert lam[j] * sigma_i ** 2 == pytest.approx((sigma_i / hyper.eps[j]) ** 2, rel=1e-12)
        for lag in range(1, p + 1):
            for j in range(n):
                idx = l + (lag - 1) * n + j
                want = (sigma_i / (hyper.alpha * lag ** hyper.beta * hyper.gamma[j])) ** 2
                assert lam[idx] * sigma_i ** 2 == pytest.approx(want, rel=1e-12)


def _minnesota_objective(hyper, design, p):
    return type1.log_marginal_likelihood(minnesota.induced_params(hyper, p), design)


def test_em_step_m0_keeps_empty_c():
    design = simulated_design(100, n=2, l=1, p=1, T=40)
    hyper = default_hyper(2, 1)
    stepped = minnesota.em_step_type1_minnesota(hyper, design)
    assert stepped.c_m.shape == (2, 0)
    assert stepped.m == 0


def test_em_step_p1_keeps_beta():
    design = simulated_design(101, n=2, l=1, p=1, T=40)
    hyper = default_hyper(2, 1, phi=[0.0, 1.0])
    stepped = minnesota.em_step_type1_minnesota(hyper, design)
    assert stepped.beta == hyper.beta


def test_em_step_positivity():
    design = simulated_design(102, n=2, l=1, p=2, T=50)
    hyper = default_hyper(2, 1, phi=[0.0, 1.0])
    for _ in range(5):
        hyper = minnesota.em_step_type1_minnesota(hyper, design)
        assert np.all(hyper.eps > 0) and hyper.alpha > 0 and np.all(hyper.gamma > 0)


def test_em_step_monotone_full():
    # n=2, l=1, p=2, T=80 with both m = 0 and m = 1 configurations
    design = simulated_design(103, n=2, l=1, p=2, T=80)
    for phi in ([1.0, 1.0], [0.0, 1.0]):
        hyper = default_hyper(2, 1, phi=phi)
        value = _minnesota_objective(hyper, design, 2)
        for _ in range(10):
            hyper = minnesota.em_step_type1_minnesota(hyper, design)
            new_value = _minnesota_objective(hyper, design, 2)
            assert new_value >= value - 1e-8
            value = new_value


def test_em_step_constrained_mean_reduces_to_plain_average_when_all_stationary():
    # m = n = l case: the restricted solve equals the plain posterior-mean block
    design = simulated_design(104, n=2, l=2, p=1, T=50,
                              truth=stable_truth(2, 2, 1))
    hyper = default_hyper(2, 2, phi=[0.0, 0.0])
    params = minnesota.induced_params(hyper, 1)
    post = type1.compute_posterior(params, design)
    stepped = minnesota.em_step_type1_minnesota(hyper, design)
    plain = post.pi_post.reshape(2, design.d, order="F")[:, :2]
    assert np.abs(stepped.c_m - plain).max() < 1e-10


def test_em_step_printed_gamma_variant_p1_degenerate():
    design = simulated_design(105, n=2, l=1, p=1, T=40)
    hyper = default_hyper(2, 1)
    with pytest.raises(NumericError, match="zero denominator"):
        minnesota.em_step_type1_minnesota(hyper, design, gamma_delta_variant="printed")


def test_fit_dispatch_and_determinism():
    design = simulated_design(106, n=2, l=1, p=2, T=60)
    hyper = default_hyper(2, 1, phi=[0.0, 1.0])
    fitted_a, trace_a = type1.fit(hyper, design, FitOptions(tol=1e-10, max_iters=30))
    fitted_b, trace_b = type1.fit(hyper, design, FitOptions(tol=1e-10, max_iters=30))
    assert isinstance(fitted_a, MinnesotaHyper)
    assert trace_a.loglik == trace_b.loglik
    assert np.diff(trace_a.loglik).min() >= -1e-8
