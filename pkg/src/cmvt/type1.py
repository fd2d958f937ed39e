"""Type I model: one coefficient/covariance draw shared across all periods.

Exact marginal likelihood, posterior quantities, posterior log-densities, and
the EM iteration that re-estimates (pi0, Lambda0, nu0, V0).
"""

import numpy as np

from . import special
from .exceptions import NumericError
from .fitting import run_em
from .linalg import spd_inverse, spd_logdet, spd_solve, sym, unvec, vec
from .params import TParams, check_design


class Type1Posterior:
    """Posterior quantities after conditioning on the whole sample.

    lambda_post : (d, d) posterior coefficient scale, (Y Y' + Lambda0^{-1})^{-1}
    pi_post : (n*d,) posterior coefficient mean (does not depend on Sigma)
    bt : (n, n) residual cross-product matrix B_T
    nu_post : posterior degrees of freedom, nu0 + T
    v_post : (n, n) posterior scale, B_T + V0
    """

    def __init__(self, lambda_post, pi_post, bt, nu_post, v_post):
        self.lambda_post = lambda_post
        self.pi_post = pi_post
        self.bt = bt
        self.nu_post = nu_post
        self.v_post = v_post


def compute_bt(params, design):
    """Residual cross-product matrix B_T.

    B_T = R (I_T + Y' Lambda0 Y)^{-1} R' with R = y - Pi0 Y. The (T x T)
    symmetric system is solved by Cholesky; the inverse is never formed.
    """
    check_design(params, design)
    Y = design.regressors
    resid = design.y_stack - params.pi0_matrix() @ Y
    kernel = np.eye(design.T) + (Y * params.lambda0[:, None]).T @ Y
    solved = spd_solve(kernel, resid.T, "I + Y' Lambda0 Y")
    return sym(resid @ solved)


def compute_posterior(params, design):
    """Posterior mean/scale of the coefficients plus the covariance posterior.

    lambda_post = (Y Y' + Lambda0^{-1})^{-1} and
    pi_post = vec((y Y' + Pi0 Lambda0^{-1}) lambda_post); the covariance
    posterior is inverse-Wishart with nu0 + T degrees of freedom and scale
    B_T + V0.
    """
    check_design(params, design)
    Y = design.regressors
    lam_inv = 1.0 / params.lambda0
    lambda_post = spd_inverse(Y @ Y.T + np.diag(lam_inv), "Y Y' + Lambda0^{-1}")
    pi_mat = (design.y_stack @ Y.T + params.pi0_matrix() * lam_inv[None, :]) @ lambda_post
    bt = compute_bt(params, design)
    return Type1Posterior(
        lambda_post, vec(pi_mat), bt, params.nu0 + design.T, sym(bt + params.v0)
    )


def log_marginal_likelihood(params, design):
    """Log density of the whole sample after integrating out (Pi, Sigma).

    Everything is evaluated in log space. The coefficient-scale determinants
    enter as (n/2)(logdet lambda_post - logdet Lambda0), i.e. through
    -logdet(I_d + Lambda0^{1/2} Y Y' Lambda0^{1/2}); the sign is pinned by the
    n = 1, T = 1 reduction to the scalar Student t density.
    """
    check_design(params, design)
    n, T = design.n, design.T
    Y = design.regressors
    root = np.sqrt(params.lambda0)
    whitened = np.eye(design.d) + (root[:, None] * (Y @ Y.T)) * root[None, :]
    ld_ratio = -spd_logdet(whitened, "I + Lambda0^{1/2} Y Y' Lambda0^{1/2}")
    bt = compute_bt(params, design)
    nu = params.nu0
    return (
        -0.5 * n * T * special.LOG_PI
        + 0.5 * n * ld_ratio
        + special.log_mvgamma(n, 0.5 * (nu + T))
        - special.log_mvgamma(n, 0.5 * nu)
        + 0.5 * nu * spd_logdet(params.v0, "V0")
        - 0.5 * (nu + T) * spd_logdet(bt + params.v0, "B_T + V0")
    )


def posterior_coeff_logdensity(pi, sigma, posterior):
    """Log density of the coefficient posterior at pi, given Sigma.

    The law is normal with mean pi_post and covariance lambda_post (x) Sigma;
    it is maximized at pi = pi_post.
    """
    pi = np.asarray(pi, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    n = sigma.shape[0]
    d = posterior.lambda_post.shape[0]
    if pi.shape != (n * d,):
        raise ValueError(f"pi must have n*d = {n * d} entries, got shape {pi.shape}")
    shift = unvec(pi - posterior.pi_post, n, d)
    # quadratic form tr(U lambda_post^{-1} U' Sigma^{-1}) via two SPD solves
    quad = float(
        np.sum(spd_solve(sigma, shift, "Sigma") * (shift @ spd_inverse(posterior.lambda_post, "lambda_post")))
    )
    return (
        -0.5 * n * d * np.log(2.0 * np.pi)
        - 0.5 * n * spd_logdet(posterior.lambda_post, "lambda_post")
        - 0.5 * d * spd_logdet(sigma, "Sigma")
        - 0.5 * quad
    )


def posterior_cov_logdensity(sigma, posterior):
    """Log density of the covariance posterior at Sigma.

    The law is inverse-Wishart with nu_post degrees of freedom and scale
    v_post = B_T + V0.
    """
    sigma = np.asarray(sigma, dtype=float)
    n = sigma.shape[0]
    nu = float(posterior.nu_post)
    scale = posterior.v_post
    return (
        0.5 * nu * spd_logdet(scale, "v_post")
        - special.log_mvgamma(n, 0.5 * nu)
        - 0.5 * n * nu * np.log(2.0)
        - 0.5 * (nu + n + 1.0) * spd_logdet(sigma, "Sigma")
        - 0.5 * float(np.trace(spd_solve(sigma, scale, "Sigma")))
    )


def solve_nu0(nu0, T, n, variant="eq26"):
    """Solve the degrees-of-freedom update equation.

    variant "eq26" carries the dimension factor n on the scalar log terms
    (the form obtained by differentiating with the V0 update substituted in);
    "eq27" drops that factor. Both are solved exactly by nu0 + T, so iterating
    this update grows nu0 without bound; the EM steps therefore hold nu0
    fixed unless explicitly told otherwise.
    """
    if variant not in ("eq26", "eq27"):
        raise ValueError(f"unknown nu0 equation variant {variant!r}")
    coef = float(n) if variant == "eq26" else 1.0
    target = float(nu0) + float(T)
    const = special.mv_digamma(n, 0.5 * target) - coef * np.log(target)

    def equation(x):
        return const - special.mv_digamma(n, 0.5 * x) + coef * np.log(x)

    def derivative(x):
        return -0.5 * special.mv_trigamma(n, 0.5 * x) + coef / x

    floor = (n - 1.0) + 1e-8 * max(1.0, n - 1.0)
    try:
        return special.find_root(
            equation, floor, 2.0 * target + 10.0, tol=1e-10, fprime=derivative
        )
    except NumericError as exc:
        raise NumericError(f"nu0 update equation ({variant}): {exc}") from exc


def em_step(params, design, update_nu0=False, nu0_equation="eq26"):
    """One EM iteration.

    The prior mean moves to the posterior mean first; the shift term of the
    scale update therefore vanishes and each lambda_i becomes the posterior
    scale diagonal entry. nu0 is held fixed unless ``update_nu0`` is set, in
    which case the solver result (nu0 + T) is used verbatim; V0 is rescaled
    accordingly.
    """
    check_design(params, design)
    post = compute_posterior(params, design)
    pi0_new = post.pi_post.copy()
    lambda_new = np.diag(post.lambda_post).copy()
    nu_new = solve_nu0(params.nu0, design.T, params.n, nu0_equation) if update_nu0 else params.nu0
    v_new = (nu_new / (params.nu0 + design.T)) * post.v_post
    return TParams(pi0_new, lambda_new, nu_new, v_new)


def fit(initial, design, options=None, update_nu0=False, nu0_equation="eq26",
        gamma_delta_variant="consistent"):
    """Run the EM loop on the whole-sample objective.

    ``initial`` may be a TParams (general iteration) or a MinnesotaHyper, in
    which case the hyperparameter step is iterated and the objective is the
    marginal likelihood at the induced parameters.

    Returns (params, trace).
    """
    from . import minnesota  # deferred: minnesota builds on this module

    if isinstance(initial, minnesota.MinnesotaHyper):
        p = minnesota.infer_p(initial, design)

        def step(hyper):
            return minnesota.em_step_type1_minnesota(
                hyper, design, update_nu0=update_nu0, nu0_equation=nu0_equation,
                gamma_delta_variant=gamma_delta_variant,
            )

        def objective(hyper):
            return log_marginal_likelihood(minnesota.induced_params(hyper, p), design)

    else:
        def step(params):
            return em_step(params, design, update_nu0=update_nu0, nu0_equation=nu0_equation)

        def objective(params):
            return log_marginal_likelihood(params, design)

    return run_em(initial, step, objective, options)
