"""Parameter container shared by the Type I and Type II models."""

import numpy as np

from .exceptions import FactorizationError
from .linalg import spd_cholesky, sym, unvec, vec
from .validation import as_float_array, check_positive, check_symmetric


class TParams:
    """Parameters (pi0, Lambda0, nu0, V0) of a conditional matrix-variate t model.

    The same container serves both model variants: under the Type I reading a
    single coefficient/covariance pair is shared by every period, under the
    Type II reading each period draws its own pair from the same law.

    Parameters
    ----------
    pi0 : (n*d,) array
        Prior mean of the vectorized (column-major) coefficient matrix.
    lambda0 : (d,) array
        Diagonal of the positive coefficient scale matrix Lambda0.
    nu0 : float
        Degrees of freedom of the inverse-Wishart covariance law, > n - 1.
    v0 : (n, n) array
        Symmetric positive definite scale matrix.
    """

    def __init__(self, pi0, lambda0, nu0, v0):
        self.pi0 = as_float_array(pi0, "pi0", ndim=1)
        self.lambda0 = as_float_array(lambda0, "lambda0", ndim=1)
        check_positive(self.lambda0, "lambda0")
        self.nu0 = float(nu0)
        v0 = as_float_array(v0, "v0", ndim=2)
        check_symmetric(v0, "v0")
        self.v0 = sym(v0)
        n = self.v0.shape[0]
        d = self.lambda0.shape[0]
        if self.pi0.shape[0] != n * d:
            raise ValueError(
                f"pi0 must have n*d = {n * d} entries, got {self.pi0.shape[0]}"
            )
        if not self.nu0 > n - 1:
            raise ValueError(f"nu0 must exceed n - 1 = {n - 1}, got {self.nu0}")
        try:
            spd_cholesky(self.v0, "v0")
        except FactorizationError as exc:
            raise ValueError("v0 must be positive definite") from exc

    @property
    def n(self):
        return self.v0.shape[0]

    @property
    def d(self):
        return self.lambda0.shape[0]

    def pi0_matrix(self):
        """Prior coefficient mean as an (n, d) matrix."""
        return unvec(self.pi0, self.n, self.d)

    def to_dict(self):
        """JSON-ready dictionary with fields pi0, lambda0, nu0, V0."""
        return {
            "pi0": self.pi0.tolist(),
            "lambda0": self.lambda0.tolist(),
            "nu0": self.nu0,
            "V0": self.v0.tolist(),
        }

    @classmethod
    def from_dict(cls, payload):
        return cls(payload["pi0"], payload["lambda0"], payload["nu0"], payload["V0"])


def check_design(params, design):
    """Raise if parameter and design dimensions disagree."""
    if params.n != design.n or params.d != design.d:
        raise ValueError(
            f"parameter dimensions (n={params.n}, d={params.d}) do not match "
            f"the design (n={design.n}, d={design.d})"
        )


def default_params(design):
    """Least-squares-centred default initialization.

    pi0 is the vectorized OLS coefficient estimate (ridge-guarded with 1e-8
    relative jitter when the regressor Gram matrix is singular), Lambda0 the
    identity, nu0 = n + 2 (barely proper) and V0 the identity.
    """
    n = design.n
    d = design.d
    gram = design.regressors @ design.regressors.T
    cross = design.y_stack @ design.regressors.T
    try:
        coeff = np.linalg.solve(gram, cross.T).T
    except np.linalg.LinAlgError:
        scale = np.trace(gram) / d if d else 1.0
        if not scale > 0.0:
            scale = 1.0
        coeff = np.linalg.solve(gram + 1e-8 * scale * np.eye(d), cross.T).T
    return TParams(vec(coeff), np.ones(d), float(n + 2), np.eye(n))
