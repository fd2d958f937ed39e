"""Shared builders and oracles for the test suite."""

import numpy as np
from scipy.special import gammaln

from cmvt.data import build_design
from cmvt.params import TParams
from cmvt.simulate import RngStream, simulate_bvar


def stable_truth(n, l, p, own=0.4, lam=0.01, v_scale=0.1, intercept=0.5):
    """Stable VAR truth: own-lag `own`, other coefficients zero."""
    d = l + n * p
    coeff = np.zeros((n, d))
    coeff[:, 0] = intercept
    coeff[:, l:l + n] = own * np.eye(n)
    return TParams(
        coeff.reshape(-1, order="F"), lam * np.ones(d), float(n + 3), v_scale * np.eye(n)
    )


def simulated_design(seed, n=2, l=1, p=1, T=60, model="type1", truth=None):
    """Design built from a simulated path under the given law."""
    truth = truth if truth is not None else stable_truth(n, l, p)
    rng = RngStream(seed)
    exog = None
    if l > 1:
        exog = np.vstack([np.ones((1, T)), rng.normal((l - 1, T))])
    dataset = simulate_bvar(truth, n, l, p, T, model, exogenous=exog, rng=rng)
    return build_design(dataset)


def random_params(rs, n, d, nu0=None):
    """Random valid parameters with a well-conditioned scale matrix."""
    root = rs.randn(n, n) * 0.3
    v0 = root @ root.T + np.eye(n)
    return TParams(
        rs.randn(n * d),
        np.exp(0.5 * rs.randn(d)),
        float(nu0 if nu0 is not None else n + 2 + rs.rand() * 3),
        v0,
    )


def student_t_logpdf(x, df, loc, scale):
    """Textbook univariate Student t log density (location-scale form)."""
    z = (x - loc) / scale
    return (
        gammaln(0.5 * (df + 1.0))
        - gammaln(0.5 * df)
        - 0.5 * np.log(df * np.pi)
        - np.log(scale)
        - 0.5 * (df + 1.0) * np.log1p(z * z / df)
    )
