"""Minnesota-prior hyperparameterization shared by both model types.

Dummy observations, the closed-form prior scale/mean they induce, diagonal
selector matrices for the shrinkage updates, and the hyperparameter EM step
for the whole-sample (Type I) model. The per-period variant lives in
``type2`` because it needs that module's per-period machinery.
"""

import numpy as np

from . import type1
from .exceptions import FactorizationError, NumericError
from .linalg import spd_cholesky, spd_solve, sym, unvec, vec
from .params import TParams
from .special import find_root
from .validation import as_float_array, check_positive, check_symmetric


class MinnesotaHyper:
    """Shrinkage hyperparameters (C_m, eps, alpha, beta, gamma, phi, nu0, V0).

    phi flags each variable with 0 (stationary) or 1 (unit root); the m
    stationary variables must occupy the first m positions and m cannot
    exceed the number of exogenous columns l, because the prior-mean block
    [C_m : 0] is (n x l). alpha is the overall tightness, beta the lag-decay
    exponent, gamma the per-variable scaling, and eps the per-exogenous-column
    tightness (the intercept column included).
    """

    def __init__(self, c_m, eps, alpha, beta, gamma, phi, nu0, v0):
        self.phi = as_float_array(phi, "phi", ndim=1)
        if self.phi.size < 1:
            raise ValueError("phi must have at least one entry")
        if not np.all(np.isin(self.phi, (0.0, 1.0))):
            raise ValueError("phi entries must be 0 (stationary) or 1 (unit root)")
        n = self.phi.shape[0]
        m = int(np.sum(self.phi == 0.0))
        if not (np.all(self.phi[:m] == 0.0) and np.all(self.phi[m:] == 1.0)):
            raise ValueError("stationary variables (phi = 0) must occupy the first positions")
        self.eps = as_float_array(eps, "eps", ndim=1)
        check_positive(self.eps, "eps")
        if m > self.eps.shape[0]:
            raise ValueError(
                f"stationary count m = {m} cannot exceed the exogenous count l = {self.eps.shape[0]}"
            )
        c_m = np.asarray(c_m, dtype=float)
        if c_m.size == 0:
            c_m = np.zeros((n, m))
        if c_m.shape != (n, m):
            raise ValueError(f"C_m must be (n, m) = ({n}, {m}), got {c_m.shape}")
        if c_m.size and not np.all(np.isfinite(c_m)):
            raise ValueError("C_m contains NaN or infinite entries")
        self.c_m = c_m
        self.alpha = float(alpha)
        if not self.alpha > 0.0:
            raise ValueError("alpha must be strictly positive")
        self.beta = float(beta)
        self.gamma = as_float_array(gamma, "gamma", ndim=1)
        check_positive(self.gamma, "gamma")
        if self.gamma.shape[0] != n:
            raise ValueError(f"gamma must have n = {n} entries")
        self.nu0 = float(nu0)
        if not self.nu0 > n - 1:
            raise ValueError(f"nu0 must exceed n - 1 = {n - 1}")
        v0 = as_float_array(v0, "v0", ndim=2)
        check_symmetric(v0, "v0")
        if v0.shape[0] != n:
            raise ValueError(f"v0 must be (n, n) = ({n}, {n})")
        self.v0 = sym(v0)
        try:
            spd_cholesky(self.v0, "v0")
        except FactorizationError as exc:
            raise ValueError("v0 must be positive definite") from exc

    @property
    def n(self):
        return self.phi.shape[0]

    @property
    def l(self):
        return self.eps.shape[0]

    @property
    def m(self):
        return int(np.sum(self.phi == 0.0))

    def to_dict(self):
        """JSON-ready dictionary {C_m, eps, alpha, beta, gamma, phi, nu0, V0}."""
        return {
            "C_m": self.c_m.tolist(),
            "eps": self.eps.tolist(),
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma.tolist(),
            "phi": self.phi.tolist(),
            "nu0": self.nu0,
            "V0": self.v0.tolist(),
        }

    @classmethod
    def from_dict(cls, payload):
        return cls(
            payload.get("C_m", []), payload["eps"], payload["alpha"], payload["beta"],
            payload["gamma"], payload["phi"], payload["nu0"], payload["V0"],
        )


def default_hyper(n, l, phi=None):
    """Neutral starting point: zero prior means, unit tightness everywhere.

    With phi omitted every variable is flagged unit root (m = 0), the
    classical random-walk prior centre.
    """
    phi = np.ones(n) if phi is None else np.asarray(phi, dtype=float)
    m = int(np.sum(phi == 0.0))
    return MinnesotaHyper(
        np.zeros((n, m)), np.ones(l), 1.0, 1.0, np.ones(n), phi, float(n + 2), np.eye(n)
    )


def infer_p(hyper, design):
    """Lag order implied by a design built for this hyperparameterization."""
    extra = design.d - hyper.l
    if design.n != hyper.n or extra <= 0 or extra % hyper.n:
        raise ValueError("design dimensions are inconsistent with the hyperparameters")
    return extra // hyper.n


def lambda0_inv_diagonal(hyper, p):
    """Diagonal of Lambda0^{-1}: eps_j^2 on the exogenous block, then
    alpha^2 lag^{2 beta} gamma_i^2 ordered lag-major."""
    if p < 1:
        raise ValueError("the Minnesota prior needs at least one lag")
    lags = np.arange(1, p + 1, dtype=float)
    lag_block = np.kron(lags ** (2.0 * hyper.beta), (hyper.alpha ** 2) * hyper.gamma ** 2)
    return np.concatenate([hyper.eps ** 2, lag_block])


def lambda0_inv(hyper, p):
    """Lambda0^{-1} as a full (d, d) diagonal matrix."""
    return np.diag(lambda0_inv_diagonal(hyper, p))


def prior_mean_matrix(c_m, phi, l, p):
    """Prior coefficient mean [diag(1 - phi) [C_m : 0] : diag(phi) : 0]."""
    phi = np.asarray(phi, dtype=float)
    n = phi.shape[0]
    m = c_m.shape[1] if c_m.ndim == 2 else 0
    c_bar = np.hstack([c_m, np.zeros((n, l - m))])
    return np.hstack([(1.0 - phi)[:, None] * c_bar, np.diag(phi), np.zeros((n, n * (p - 1)))])


def pi0_matrix(hyper, p):
    """Prior coefficient mean induced by the hyperparameters, (n, d)."""
    if p < 1:
        raise ValueError("the Minnesota prior needs at least one lag")
    return prior_mean_matrix(hyper.c_m, hyper.phi, hyper.l, p)


def pi0_vector(hyper, p):
    """Column-major vectorization of ``pi0_matrix``."""
    return vec(pi0_matrix(hyper, p))


def induced_params(hyper, p):
    """General-model parameters induced by the hyperparameters."""
    return TParams(
        pi0_vector(hyper, p), 1.0 / lambda0_inv_diagonal(hyper, p), hyper.nu0, hyper.v0
    )


class DummyObservations:
    """Dummy data block: outcomes (n, d) and regressors (d, d)."""

    def __init__(self, y_dummy, regressor_dummy):
        self.y_dummy = y_dummy
        self.regressor_dummy = regressor_dummy


def build_dummy_observations(hyper, n, l, p):
    """Dummy observations whose least-squares fit reproduces the prior mean
    and whose regressor cross-product reproduces Lambda0^{-1} exactly."""
    if (n, l) != (hyper.n, hyper.l):
        raise ValueError("n and l must match the hyperparameters")
    if p < 1:
        raise ValueError("the Minnesota prior needs at least one lag")
    c_bar = np.hstack([hyper.c_m, np.zeros((n, l - hyper.m))])
    y_dummy = np.hstack([
        ((1.0 - hyper.phi)[:, None] * c_bar) * hyper.eps[None, :],
        hyper.alpha * np.diag(hyper.phi * hyper.gamma),
        np.zeros((n, n * (p - 1))),
    ])
    lag_profile = np.arange(1, p + 1, dtype=float) ** hyper.beta
    lower = hyper.alpha * np.kron(np.diag(lag_profile), np.diag(hyper.gamma))
    regressor_dummy = np.block([
        [np.diag(hyper.eps), np.zeros((l, n * p))],
        [np.zeros((n * p, l)), lower],
    ])
    return DummyObservations(y_dummy, regressor_dummy)


def delta_matrix(kind, hyper, p, index=None, variant="consistent"):
    """Diagonal selector matrix for one shrinkage parameter, (d, d).

    kind "eps" needs the exogenous column index, kind "gamma" the variable
    index (both zero-based). For "gamma" the default variant carries the
    lag^{2 beta} profile that differentiating Lambda0^{-1} produces; the
    "printed" variant additionally carries the log-lag factors of the beta
    selector, which makes it vanish at p = 1.
    """
    if p < 1:
        raise ValueError("the Minnesota prior needs at least one lag")
    n, l = hyper.n, hyper.l
    d = l + n * p
    lags = np.arange(1, p + 1, dtype=float)
    diag = np.zeros(d)
    if kind == "eps":
        if index is None or not 0 <= index < l:
            raise ValueError(f"eps index must lie in [0, {l}), got {index!r}")
        diag[index] = 1.0
    elif kind == "alpha":
        diag[l:] = np.kron(lags ** (2.0 * hyper.beta), hyper.gamma ** 2)
    elif kind == "beta":
        diag[l:] = hyper.alpha ** 2 * np.kron(
            lags ** (2.0 * hyper.beta) * np.log(lags), hyper.gamma ** 2
        )
    elif kind == "gamma":
        if index is None or not 0 <= index < n:
            raise ValueError(f"gamma index must lie in [0, {n}), got {index!r}")
        profile = lags ** (2.0 * hyper.beta)
        if variant == "printed":
            profile = profile * np.log(lags)
        elif variant != "consistent":
            raise ValueError(f"unknown gamma selector variant {variant!r}")
        basis = np.zeros(n)
        basis[index] = 1.0
        diag[l:] = hyper.alpha ** 2 * np.kron(profile, basis)
    else:
        raise ValueError(f"unknown selector kind {kind!r}")
    return np.diag(diag)


def constrained_coeff_solve(weighted_targets, weight_sum, m):
    """Prior-mean update restricted to the stationary rows.

    The unit-root rows of the prior-mean block are pinned at zero, so the
    normal equations are solved on the leading (m, m) block of the summed
    weight matrix; with m = n this is the plain weighted average.

    Parameters
    ----------
    weighted_targets : (n, m) array
        Sum over periods of W_t times the target coefficient block.
    weight_sum : (n, n) array
        Sum over periods of the weights W_t.
    m : int
        Number of stationary variables (leading rows solved for).
    """
    n = weight_sum.shape[0]
    top = spd_solve(weight_sum[:m, :m], weighted_targets[:m, :], "coefficient weight matrix")
    top = np.atleast_2d(top)
    return np.vstack([top, np.zeros((n - m, weighted_targets.shape[1]))])


def _hyper_m_step(mu, hyper, p, scale, gamma_mu=None, gamma_delta_variant="consistent"):
    """Shrinkage updates (eps, alpha, gamma, beta) from one expected-quadratic
    vector mu of length d.

    Updates run in sequence, each conditional update using the freshest values
    of the others (eps is separable; alpha conditions on the old beta and
    gamma; gamma on the new alpha and old beta; beta on the new alpha and
    gamma). This sequencing is what keeps the EM objective from decreasing:
    alpha and gamma share a redundant scale direction, and simultaneous
    updates oscillate across it.

    ``scale`` is 1 for the whole-sample model and T for the per-period model;
    ``gamma_mu`` lets the per-period gamma update use a differently weighted
    moment vector.
    """
    n, l = hyper.n, hyper.l
    lags = np.arange(1, p + 1, dtype=float)
    mu = np.asarray(mu, dtype=float)
    mu_lag = mu[l:].reshape(p, n)
    gmu_lag = (mu if gamma_mu is None else np.asarray(gamma_mu, dtype=float))[l:].reshape(p, n)

    if np.any(mu[:l] <= 0.0):
        raise NumericError("eps update equation: zero denominator (degenerate selector)")
    eps_new = np.sqrt(n * scale / mu[:l])

    profile = lags ** (2.0 * hyper.beta)
    denom_alpha = float(profile @ mu_lag @ (hyper.gamma ** 2))
    if not denom_alpha > 0.0:
        raise NumericError("alpha update equation: zero denominator (degenerate selector)")
    alpha_sq = (n * n * p * scale) / denom_alpha

    if gamma_delta_variant == "printed":
        gamma_profile = profile * np.log(lags)
    elif gamma_delta_variant == "consistent":
        gamma_profile = profile
    else:
        raise ValueError(f"unknown gamma selector variant {gamma_delta_variant!r}")
    denom_gamma = alpha_sq * (gamma_profile @ gmu_lag)
    if np.any(denom_gamma <= 0.0):
        raise NumericError("gamma update equation: zero denominator (degenerate selector)")
    gamma_sq = (n * p * scale) / denom_gamma

    beta_new = hyper.beta
    if p >= 2:
        target = n * n * scale * float(np.sum(np.log(lags)))
        weights = mu_lag @ gamma_sq
        log_lags = np.log(lags)

        def equation(b):
            return alpha_sq * float(np.sum(lags ** (2.0 * b) * log_lags * weights)) - target

        def derivative(b):
            return alpha_sq * float(np.sum(lags ** (2.0 * b) * (2.0 * log_lags ** 2) * weights))

        # The equation is increasing in beta; push the lower edge down when
        # the root lies below the default [-5, 5] search window.
        lo, hi = -5.0, 5.0
        width = hi - lo
        tries = 0
        while equation(lo) > 0.0 and tries < 60:
            lo -= width
            width *= 2.0
            tries += 1
        try:
            beta_new = find_root(equation, lo, hi, tol=1e-10, fprime=derivative)
        except NumericError as exc:
            raise NumericError(f"beta update equation: {exc}") from exc

    return eps_new, float(np.sqrt(alpha_sq)), np.sqrt(gamma_sq), float(beta_new)


def em_step_type1_minnesota(hyper, design, update_nu0=False, nu0_equation="eq26",
                            gamma_delta_variant="consistent"):
    """One hyperparameter EM iteration of the whole-sample model.

    Order: prior-mean block C_m (skipped for m = 0), then the shrinkage
    parameters, then the beta root (skipped for p = 1), then nu0/V0.
    """
    p = infer_p(hyper, design)
    n, l, m = hyper.n, hyper.l, hyper.m
    T = design.T
    params = induced_params(hyper, p)
    post = type1.compute_posterior(params, design)
    weight = spd_solve(post.v_post, np.eye(n), "V0 + B_T")

    c_new = hyper.c_m
    if m:
        pi_post_mat = unvec(post.pi_post, n, params.d)
        c_new = constrained_coeff_solve(weight @ pi_post_mat[:, :m], weight, m)
    pi0_new = prior_mean_matrix(c_new, hyper.phi, l, p)

    shift = unvec(post.pi_post, n, params.d) - pi0_new
    quad = np.einsum("ai,ab,bi->i", shift, weight, shift)
    mu = n * np.diag(post.lambda_post) + (hyper.nu0 + T) * quad

    eps_new, alpha_new, gamma_new, beta_new = _hyper_m_step(
        mu, hyper, p, 1.0, gamma_delta_variant=gamma_delta_variant
    )
    nu_new = type1.solve_nu0(hyper.nu0, T, n, nu0_equation) if update_nu0 else hyper.nu0
    v_new = (nu_new / (hyper.nu0 + T)) * post.v_post
    return MinnesotaHyper(
        c_new, eps_new, alpha_new, beta_new, gamma_new, hyper.phi, nu_new, v_new
    )
