"""Seeded samplers for the model's generative laws and full path simulation.

The generator is counter-based (Philox keyed on (seed, stream)), and normals
and chi-squares come from inverse CDFs applied to 53-bit uniforms, so streams
reproduce bit for bit across platforms and can be split by index for parallel
work.
"""

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import gammaincinv, ndtri

from .data import TimeSeriesDataset
from .linalg import spd_cholesky, sym, unvec, vec
from .validation import as_float_array


class RngStream:
    """Deterministic stream of uniforms, normals, and chi-squares.

    Parameters
    ----------
    seed : int
        Non-negative seed; the first Philox key word.
    stream : int
        Sub-stream index; the second Philox key word. ``split(i)`` hands out
        the stream with index ``stream + i + 1``, so give the children of one
        parent distinct indices (the scheme is flat, nested splits share the
        same index space).
    """

    def __init__(self, seed, stream=0):
        self.seed = int(seed)
        self.stream = int(stream)
        if self.seed < 0 or self.stream < 0:
            raise ValueError("seed and stream must be non-negative integers")
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        self._bitgen = np.random.Philox(key=key)

    def split(self, index):
        """Independent child stream for parallel work, selected by index."""
        return RngStream(self.seed, self.stream + int(index) + 1)

    def uniform(self, size):
        """Uniforms on (0, 1), never exactly 0 or 1 (53-bit mantissa plus offset)."""
        raw = self._bitgen.random_raw(size)
        return (raw >> np.uint64(11)) * 2.0 ** -53 + 2.0 ** -54

    def normal(self, size):
        """Standard normals via the inverse CDF (deterministic, platform stable)."""
        return ndtri(self.uniform(size))

    def chi_square(self, df):
        """Chi-square draws via the inverse CDF; df is an array of real dfs > 0."""
        df = np.asarray(df, dtype=float)
        if np.any(df <= 0.0):
            raise ValueError("degrees of freedom must be positive")
        return 2.0 * gammaincinv(0.5 * df, self.uniform(df.shape))


def sample_inverse_wishart(nu, v, rng):
    """One inverse-Wishart draw with degrees of freedom nu and scale v.

    Bartlett construction: A is lower triangular with chi(nu - i) diagonals
    (drawn first, then the subdiagonal normals in row order) so that
    A A' ~ Wishart(nu, I); the draw is (C' A^{-T})' (A^{-1} C') for the lower
    Cholesky factor C of v, whose inverse is Wishart(nu, v^{-1}). The mean is
    v / (nu - n - 1) when that is defined.
    """
    v = as_float_array(v, "v", ndim=2)
    n = v.shape[0]
    if not float(nu) > n - 1:
        raise ValueError(f"nu must exceed n - 1 = {n - 1}, got {nu}")
    chol = spd_cholesky(v, "v")
    bartlett = np.zeros((n, n))
    dfs = float(nu) - np.arange(n, dtype=float)
    bartlett[np.diag_indices(n)] = np.sqrt(rng.chi_square(dfs))
    if n > 1:
        lower_idx = np.tril_indices(n, k=-1)
        bartlett[lower_idx] = rng.normal(lower_idx[0].shape[0])
    mixed = solve_triangular(bartlett, chol.T, lower=True)
    return sym(mixed.T @ mixed)


def sample_coeff_vector(pi0, lambda0, sigma, rng):
    """Draw from N(pi0, Lambda0 (x) Sigma) for diagonal Lambda0.

    The draw is pi0 + vec(Sigma^{1/2} Z sqrt(Lambda0)) with Z an (n, d) block
    of standard normals filled row-major.
    """
    pi0 = as_float_array(pi0, "pi0", ndim=1)
    lambda0 = as_float_array(lambda0, "lambda0", ndim=1)
    sigma = as_float_array(sigma, "sigma", ndim=2)
    n = sigma.shape[0]
    d = lambda0.shape[0]
    if pi0.shape[0] != n * d:
        raise ValueError(f"pi0 must have n*d = {n * d} entries")
    chol = spd_cholesky(sigma, "sigma")
    z = rng.normal((n, d))
    coeff = unvec(pi0, n, d) + (chol @ z) * np.sqrt(lambda0)[None, :]
    return vec(coeff)


def simulate_bvar(params, n, l, p, T, model, exogenous=None, presample=None, rng=None):
    """Simulate a BVAR path under the chosen generative law.

    model "type1" draws a single (pi, Sigma) pair for the whole path; "type2"
    draws a fresh pair every period (the per-period draw order is Sigma_t,
    pi_t, eps_t). Residuals are Sigma^{1/2} eps_t with the lower Cholesky
    factor.

    Parameters
    ----------
    params : TParams
        True parameters; dimensions must satisfy d = l + n*p.
    exogenous : (l, T) array, optional
        Defaults to the constant row (requires l = 1).
    presample : (n, p) array, optional
        Defaults to zeros.
    rng : RngStream, optional
        Defaults to RngStream(0).
    """
    if model not in ("type1", "type2"):
        raise ValueError(f"model must be 'type1' or 'type2', got {model!r}")
    n, l, p, T = int(n), int(l), int(p), int(T)
    if T < 1:
        raise ValueError("T must be at least 1")
    if params.n != n or params.d != l + n * p:
        raise ValueError(
            f"parameter dimensions (n={params.n}, d={params.d}) do not match "
            f"n={n}, d=l+n*p={l + n * p}"
        )
    if exogenous is None:
        if l != 1:
            raise ValueError("exogenous is required when l > 1")
        exogenous = np.ones((1, T))
    exogenous = as_float_array(exogenous, "exogenous", ndim=2)
    if exogenous.shape != (l, T):
        raise ValueError(f"exogenous must be (l, T) = ({l}, {T})")
    presample = (
        np.zeros((n, p)) if presample is None
        else as_float_array(presample, "presample", ndim=2)
    )
    if presample.shape != (n, p):
        raise ValueError(f"presample must be (n, p) = ({n}, {p})")
    rng = rng if rng is not None else RngStream(0)

    if model == "type1":
        sigma = sample_inverse_wishart(params.nu0, params.v0, rng)
        coeff = unvec(sample_coeff_vector(params.pi0, params.lambda0, sigma, rng), n, params.d)
        sigma_chol = spd_cholesky(sigma, "sigma")

    history = np.hstack([presample, np.zeros((n, T))])
    for t in range(T):
        if model == "type2":
            sigma = sample_inverse_wishart(params.nu0, params.v0, rng)
            coeff = unvec(
                sample_coeff_vector(params.pi0, params.lambda0, sigma, rng), n, params.d
            )
            sigma_chol = spd_cholesky(sigma, "sigma")
        lagged = [history[:, p + t - lag] for lag in range(1, p + 1)]
        regressor = np.concatenate([exogenous[:, t]] + lagged) if lagged else exogenous[:, t]
        history[:, p + t] = coeff @ regressor + sigma_chol @ rng.normal((n,))
    return TimeSeriesDataset(history[:, p:], presample, exogenous, p)
