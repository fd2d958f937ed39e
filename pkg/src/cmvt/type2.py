"""Type II model: independent coefficient/covariance draws every period.

Per-period predictive densities, the total conditional likelihood, and the
EM iterations for the general and Minnesota-prior parameterizations.

Per-period quantities are independent given the current parameters, so the
stack-filling kernel may run on a thread pool (capped by CMVT_THREADS); all
reductions run once over full t-ascending stacks, which keeps results
bit-identical for any worker count.
"""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import minnesota, special
from .exceptions import NumericError
from .fitting import run_em
from .linalg import spd_inverse, spd_logdet, spd_solve, sym, vec
from .params import TParams, check_design


class PerPeriodPosterior:
    """One period's posterior pieces.

    lambda_t : (d, d) posterior coefficient scale, (Y_t Y_t' + Lambda0^{-1})^{-1}
    pi_t : (n*d,) posterior coefficient mean (Sigma-free)
    bt : (n, n) rank <= 1 residual matrix B_t
    phi_inv : the scalar 1 + Y_t' Lambda0 Y_t
    """

    def __init__(self, lambda_t, pi_t, bt, phi_inv):
        self.lambda_t = lambda_t
        self.pi_t = pi_t
        self.bt = bt
        self.phi_inv = phi_inv


def per_period_posterior(params, regressor, outcome):
    """Posterior pieces for a single period.

    Rank-one identities keep everything exact: with q = Y' Lambda0 Y,
    lambda_t = Lambda0 - (Lambda0 Y)(Lambda0 Y)'/(1 + q) and the posterior
    mean is Pi0 + r (Lambda0 Y)'/(1 + q) for the residual r = y - Pi0 Y.
    """
    regressor = np.asarray(regressor, dtype=float).reshape(-1)
    outcome = np.asarray(outcome, dtype=float).reshape(-1)
    n, d = params.n, params.d
    if regressor.shape[0] != d or outcome.shape[0] != n:
        raise ValueError("regressor/outcome dimensions do not match the parameters")
    lam = params.lambda0
    scaled = lam * regressor
    denom = 1.0 + float(regressor @ scaled)
    lambda_t = np.diag(lam) - np.outer(scaled, scaled) / denom
    resid = outcome - params.pi0_matrix() @ regressor
    pi_t = vec(params.pi0_matrix() + np.outer(resid, scaled) / denom)
    bt = np.outer(resid, resid) / denom
    return PerPeriodPosterior(sym(lambda_t), pi_t, sym(bt), denom)


def log_predictive_density(params, regressor, outcome):
    """Log of the one-period predictive density f(y_t | past)."""
    regressor = np.asarray(regressor, dtype=float).reshape(-1)
    outcome = np.asarray(outcome, dtype=float).reshape(-1)
    n = params.n
    if regressor.shape[0] != params.d or outcome.shape[0] != n:
        raise ValueError("regressor/outcome dimensions do not match the parameters")
    q = float(regressor @ (params.lambda0 * regressor))
    resid = outcome - params.pi0_matrix() @ regressor
    rho = float(resid @ spd_solve(params.v0, resid, "V0")) / (1.0 + q)
    nu = params.nu0
    return (
        -0.5 * n * special.LOG_PI
        + special.log_mvgamma(n, 0.5 * (nu + 1.0))
        - special.log_mvgamma(n, 0.5 * nu)
        - 0.5 * n * np.log1p(q)
        - 0.5 * spd_logdet(params.v0, "V0")
        - 0.5 * (nu + 1.0) * np.log1p(rho)
    )


def log_predictive_batch(params, design):
    """Per-period predictive log densities for every column of the design.

    Uses logdet(V0 + B_t) = logdet V0 + log(1 + r' V0^{-1} r / (1 + q)), the
    rank-one determinant identity, so the whole batch is vectorized.
    """
    check_design(params, design)
    n = params.n
    Y = design.regressors
    lam = params.lambda0
    q = np.einsum("it,i,it->t", Y, lam, Y)
    resid = design.y_stack - np.einsum("ij,jt->it", params.pi0_matrix(), Y)
    v0_inv = spd_inverse(params.v0, "V0")
    rho = np.einsum("at,ab,bt->t", resid, v0_inv, resid) / (1.0 + q)
    nu = params.nu0
    const = (
        -0.5 * n * special.LOG_PI
        + special.log_mvgamma(n, 0.5 * (nu + 1.0))
        - special.log_mvgamma(n, 0.5 * nu)
        - 0.5 * spd_logdet(params.v0, "V0")
    )
    return const - 0.5 * n * np.log1p(q) - 0.5 * (nu + 1.0) * np.log1p(rho)


def log_likelihood(params, design):
    """Total conditional log likelihood: the per-period terms summed in t order."""
    return float(np.sum(log_predictive_batch(params, design)))


def _effective_workers(max_workers):
    cap = os.environ.get("CMVT_THREADS")
    cap = int(cap) if cap else None
    requested = max_workers if max_workers is not None else (cap if cap is not None else 1)
    if cap is not None:
        requested = min(requested, cap)
    return max(1, int(requested))


def _per_period_stacks(params, design, max_workers=None):
    """Per-period posterior pieces stacked along t.

    Returns (q, resid, rho, weights, pi_stack, lambda_diag) where weights[t]
    is (V0 + B_t)^{-1} via the rank-one Sherman-Morrison identity and
    lambda_diag[t] the diagonal of the period's posterior scale. Contiguous
    t-chunks are filled with the same elementwise kernel (einsum only, no
    BLAS dispatch), so the stacks do not depend on the chunking.
    """
    Y = design.regressors
    y = design.y_stack
    n, T = y.shape
    d = Y.shape[0]
    lam = params.lambda0
    pi0_mat = params.pi0_matrix()
    v0_inv = spd_inverse(params.v0, "V0")

    q = np.empty(T)
    resid = np.empty((n, T))
    rho = np.empty(T)
    weights = np.empty((T, n, n))
    pi_stack = np.empty((T, n, d))
    lambda_diag = np.empty((T, d))

    def fill(lo, hi):
        cols = slice(lo, hi)
        Yc = Y[:, cols]
        qc = np.einsum("it,i,it->t", Yc, lam, Yc)
        rc = y[:, cols] - np.einsum("ij,jt->it", pi0_mat, Yc)
        uc = np.einsum("ab,bt->at", v0_inv, rc)
        raw = np.einsum("at,at->t", rc, uc)
        denom = 1.0 + qc
        q[cols] = qc
        resid[:, cols] = rc
        rho[cols] = raw / denom
        weights[cols] = v0_inv[None, :, :] - (
            np.einsum("at,bt->tab", uc, uc) / (denom + raw)[:, None, None]
        )
        scaled = lam[:, None] * Yc
        pi_stack[cols] = pi0_mat[None, :, :] + (
            np.einsum("at,bt->tab", rc, scaled) / denom[:, None, None]
        )
        lambda_diag[cols] = lam[None, :] - (scaled.T ** 2) / denom[:, None]

    workers = _effective_workers(max_workers)
    if workers <= 1 or T < 2 * workers:
        fill(0, T)
    else:
        bounds = np.linspace(0, T, workers + 1, dtype=int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda edges: fill(edges[0], edges[1]),
                          zip(bounds[:-1], bounds[1:])))
    return q, resid, rho, weights, pi_stack, lambda_diag


def _solve_nu0(nu0, T, n, v0, rho, weight_sum, variant):
    """Root of the per-period degrees-of-freedom condition.

    variant "eq26" carries the dimension factor n on the scalar log terms
    (the form obtained with the V0 update substituted in); "eq27" drops it.
    Unlike the whole-sample model the root is data dependent: it equals
    nu0 + 1 only when every (V0 + B_t) coincides.
    """
    if variant not in ("eq26", "eq27"):
        raise ValueError(f"unknown nu0 equation variant {variant!r}")
    coef = float(n) if variant == "eq26" else 1.0
    base = float(nu0) + 1.0
    sum_logdet = T * spd_logdet(v0, "V0") + float(np.sum(np.log1p(rho)))
    logdet_wsum = spd_logdet(weight_sum, "summed weight matrix")
    const = (
        T * special.mv_digamma(n, 0.5 * base)
        - sum_logdet
        + coef * T * np.log(T)
        - coef * T * np.log(base)
        - T * logdet_wsum
    )

    def equation(x):
        return const - T * special.mv_digamma(n, 0.5 * x) + coef * T * np.log(x)

    def derivative(x):
        return -0.5 * T * special.mv_trigamma(n, 0.5 * x) + coef * T / x

    floor = (n - 1.0) + 1e-8 * max(1.0, n - 1.0)
    try:
        return special.find_root(
            equation, floor, 2.0 * base + 10.0, tol=1e-10, fprime=derivative
        )
    except NumericError as exc:
        raise NumericError(f"nu0 update equation ({variant}): {exc}") from exc


def em_step(params, design, update_nu0=False, nu0_equation="eq26", max_workers=None):
    """One EM iteration of the per-period model.

    Update order matters: the prior mean moves first (a weighted average of
    the per-period posterior means, solved block-wise on the (n, n) summed
    weight matrix), the scale diagonal uses the refreshed mean, and the
    degrees-of-freedom/scale pair closes the step.
    """
    check_design(params, design)
    n, T = params.n, design.T
    _, _, rho, weights, pi_stack, lambda_diag = _per_period_stacks(
        params, design, max_workers
    )
    weight_sum = np.sum(weights, axis=0)
    weighted_pi = np.einsum("tab,tbj->aj", weights, pi_stack)
    pi0_new = spd_solve(weight_sum, weighted_pi, "summed weight matrix")

    shift = pi_stack - pi0_new[None, :, :]
    quad = np.einsum("taj,tab,tbj->tj", shift, weights, shift)
    lambda_new = (
        np.sum(lambda_diag, axis=0) / T
        + ((params.nu0 + 1.0) / (n * T)) * np.sum(quad, axis=0)
    )

    if update_nu0:
        nu_new = _solve_nu0(params.nu0, T, n, params.v0, rho, weight_sum, nu0_equation)
    else:
        nu_new = params.nu0
    v_new = sym(
        (T * nu_new / (params.nu0 + 1.0))
        * spd_inverse(weight_sum, "summed weight matrix")
    )
    return TParams(vec(pi0_new), lambda_new, nu_new, v_new)


def em_step_minnesota(hyper, design, update_nu0=False, nu0_equation="eq26",
                      gamma_delta_variant="consistent",
                      gamma_factor_variant="consistent", max_workers=None):
    """One hyperparameter EM iteration of the per-period model.

    ``gamma_factor_variant`` chooses the weight on the shift term of the gamma
    denominator: "consistent" uses nu0 + 1 like every sibling update,
    "printed" uses nu0 + T.
    """
    p = minnesota.infer_p(hyper, design)
    n, l, m = hyper.n, hyper.l, hyper.m
    T = design.T
    params = minnesota.induced_params(hyper, p)
    check_design(params, design)
    _, _, rho, weights, pi_stack, lambda_diag = _per_period_stacks(
        params, design, max_workers
    )
    weight_sum = np.sum(weights, axis=0)

    c_new = hyper.c_m
    if m:
        weighted_targets = np.einsum("tab,tbj->aj", weights, pi_stack[:, :, :m])
        c_new = minnesota.constrained_coeff_solve(weighted_targets, weight_sum, m)
    pi0_new = minnesota.prior_mean_matrix(c_new, hyper.phi, l, p)

    shift = pi_stack - pi0_new[None, :, :]
    quad = np.einsum("taj,tab,tbj->tj", shift, weights, shift)
    sum_lambda = np.sum(lambda_diag, axis=0)
    sum_quad = np.sum(quad, axis=0)
    mu = n * sum_lambda + (hyper.nu0 + 1.0) * sum_quad
    if gamma_factor_variant == "printed":
        gamma_mu = n * sum_lambda + (hyper.nu0 + T) * sum_quad
    elif gamma_factor_variant == "consistent":
        gamma_mu = None
    else:
        raise ValueError(f"unknown gamma factor variant {gamma_factor_variant!r}")

    eps_new, alpha_new, gamma_new, beta_new = minnesota._hyper_m_step(
        mu, hyper, p, float(T), gamma_mu=gamma_mu,
        gamma_delta_variant=gamma_delta_variant,
    )
    if update_nu0:
        nu_new = _solve_nu0(hyper.nu0, T, n, hyper.v0, rho, weight_sum, nu0_equation)
    else:
        nu_new = hyper.nu0
    v_new = sym(
        (T * nu_new / (hyper.nu0 + 1.0))
        * spd_inverse(weight_sum, "summed weight matrix")
    )
    return minnesota.MinnesotaHyper(
        c_new, eps_new, alpha_new, beta_new, gamma_new, hyper.phi, nu_new, v_new
    )


def fit(initial, design, options=None, update_nu0=False, nu0_equation="eq26",
        gamma_delta_variant="consistent", gamma_factor_variant="consistent",
        max_workers=None):
    """Run the EM loop on the per-period objective.

    ``initial`` may be a TParams (general iteration) or a MinnesotaHyper, in
    which case the hyperparameter step is iterated and the objective is the
    conditional likelihood at the induced parameters.

    Returns (params, trace).
    """
    if isinstance(initial, minnesota.MinnesotaHyper):
        p = minnesota.infer_p(initial, design)

        def step(hyper):
            return em_step_minnesota(
                hyper, design, update_nu0=update_nu0, nu0_equation=nu0_equation,
                gamma_delta_variant=gamma_delta_variant,
                gamma_factor_variant=gamma_factor_variant, max_workers=max_workers,
            )

        def objective(hyper):
            return log_likelihood(minnesota.induced_params(hyper, p), design)

    else:
        def step(params):
            return em_step(
                params, design, update_nu0=update_nu0, nu0_equation=nu0_equation,
                max_workers=max_workers,
            )

        def objective(params):
            return log_likelihood(params, design)

    return run_em(initial, step, objective, options)
