"""Multivariate gamma-family special functions and a guarded scalar root finder.

Everything works on plain floats and stays in log space, so callers can
evaluate densities whose gamma-function factors would overflow long before
their logarithms do.
"""

import numpy as np
from scipy.special import gammaln, polygamma, psi

from .exceptions import NoSignChangeError, NumericError

LOG_PI = float(np.log(np.pi))

__all__ = ["LOG_PI", "log_mvgamma", "mv_digamma", "mv_trigamma", "find_root"]


def _shifted_args(n, a):
    """Validate (n, a) and return the shifted arguments a + (1 - j)/2, j = 1..n."""
    if int(n) != n or n < 1:
        raise ValueError(f"dimension n must be a positive integer, got {n!r}")
    n = int(n)
    a = float(a)
    bound = 0.5 * (n - 1)
    if not a > bound:
        raise ValueError(f"argument must exceed (n - 1)/2 = {bound}, got {a}")
    return a + 0.5 * (1.0 - np.arange(1, n + 1))


def log_mvgamma(n, a):
    """Log of the n-dimensional multivariate gamma function.

    Uses the product form Gamma_n(a) = pi^(n(n-1)/4) prod_j Gamma(a + (1-j)/2),
    so accuracy is that of the scalar log-gamma kernel.

    Parameters
    ----------
    n : int
        Dimension, n >= 1.
    a : float
        Argument, must exceed (n - 1)/2.
    """
    args = _shifted_args(n, a)
    return 0.25 * n * (n - 1) * LOG_PI + float(gammaln(args).sum())


def mv_digamma(n, a):
    """Multivariate digamma psi_n(a) = sum_j psi(a + (1-j)/2), i.e. d/da log_mvgamma."""
    return float(psi(_shifted_args(n, a)).sum())


def mv_trigamma(n, a):
    """Derivative of mv_digamma; strictly positive everywhere on the domain."""
    return float(polygamma(1, _shifted_args(n, a)).sum())


def _checked_eval(func, x, what="function"):
    value = float(func(x))
    if not np.isfinite(value):
        raise NumericError(f"{what} returned a non-finite value at x = {x}")
    return value


def find_root(f, lower, upper, tol=1e-10, fprime=None, max_expansions=60, max_iter=200):
    """Find a root of f inside [lower, upper].

    Safeguarded Newton iteration (when ``fprime`` is supplied) that keeps every
    iterate inside a sign-change bracket, falling back to bisection, so
    termination is guaranteed. If the initial interval does not bracket a sign
    change, the upper edge is pushed out geometrically (the width doubles,
    at most ``max_expansions`` times) before giving up; the lower edge never
    moves because callers use it as a hard domain boundary.

    Returns x with |f(x)| <= tol or with the bracket narrower than
    tol * max(1, |x|). Deterministic: identical inputs give identical output.

    Raises
    ------
    NoSignChangeError
        If no sign change is found within the expansion cap.
    NumericError
        If f (or fprime) evaluates to a non-finite value.
    """
    lo = float(lower)
    hi = float(upper)
    if not hi > lo:
        raise ValueError("upper must exceed lower")
    flo = _checked_eval(f, lo)
    if flo == 0.0:
        return lo
    fhi = _checked_eval(f, hi)
    width = hi - lo
    expansions = 0
    while fhi != 0.0 and (flo > 0.0) == (fhi > 0.0):
        if expansions >= max_expansions:
            raise NoSignChangeError(
                f"no sign change in [{lo}, {hi}] after {expansions} bracket expansions"
            )
        hi += width
        width *= 2.0
        fhi = _checked_eval(f, hi)
        expansions += 1
    if fhi == 0.0:
        return hi

    # Orient the bracket: xl and xh are positions with f(xl) < 0 < f(xh),
    # not ordered endpoints.
    if flo < 0.0:
        xl, xh = lo, hi
    else:
        xl, xh = hi, lo
    x = 0.5 * (lo + hi)
    step_old = abs(hi - lo)
    step = step_old
    fx = _checked_eval(f, x)
    dfx = _checked_eval(fprime, x, "derivative") if fprime is not None else 0.0
    for _ in range(max_iter):
        # shrink the bracket with the current point, then test convergence
        if fx < 0.0:
            xl = x
        else:
            xh = x
        if abs(fx) <= tol or abs(xh - xl) <= tol * max(1.0, abs(x)):
            return x
        newton_ok = (
            fprime is not None
            and dfx != 0.0
            and ((x - xh) * dfx - fx) * ((x - xl) * dfx - fx) < 0.0
            and abs(2.0 * fx) <= abs(step_old * dfx)
        )
        step_old = step
        if newton_ok:
            step = fx / dfx
            x_new = x - step
        else:
            step = 0.5 * (xh - xl)
            x_new = xl + step
        if x_new == x:
            return x
        x = x_new
        fx = _checked_eval(f, x)
        dfx = _checked_eval(fprime, x, "derivative") if fprime is not None else 0.0
    raise NumericError(f"root finder did not converge within {max_iter} iterations")
