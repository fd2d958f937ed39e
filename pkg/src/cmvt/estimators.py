"""Scikit-learn style estimators wrapping the four EM fitting routines.

Each estimator takes a rows-are-time endogenous array (and optional exogenous
array), consumes the first p rows as the presample, runs the corresponding EM
iteration, and exposes the fitted parameters together with the final
objective value. ``score`` evaluates the fitted model's objective on data, so
the classes compose with model-selection utilities from the wider ecosystem.
"""

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from . import minnesota, type1, type2
from .data import build_design, from_arrays
from .fitting import FitOptions
from .minnesota import MinnesotaHyper, default_hyper
from .params import TParams, default_params


class _MatrixTBase(BaseEstimator):
    """Shared fit/score plumbing; subclasses choose the model and initializer."""

    def _design(self, X, exog):
        dataset = from_arrays(X, exog, self.p)
        return build_design(dataset)

    def fit(self, X, y=None, exog=None):
        """Estimate the model on a rows-are-time array.

        Parameters
        ----------
        X : array-like, shape (p + T, n)
            Endogenous observations; the first p rows seed the lags.
        y : ignored
            Present for scikit-learn API compatibility.
        exog : array-like, optional
            Exogenous observations (see ``cmvt.data.from_arrays``).

        Returns
        -------
        self
        """
        design = self._design(X, exog)
        initial = self._initial(design)
        options = FitOptions(tol=self.tol, max_iters=self.max_iter)
        params, trace = self._run(initial, design, options)
        self.params_ = params
        self.trace_ = trace
        self.loglik_ = trace.loglik[-1]
        self.n_iter_ = len(trace) - 1
        self.converged_ = trace.converged
        self._unpack(params, design)
        return self

    def score(self, X, y=None, exog=None):
        """Objective value of the fitted model on the given data."""
        if not hasattr(self, "params_"):
            raise NotFittedError(
                f"this {type(self).__name__} instance is not fitted yet; call fit first"
            )
        design = self._design(X, exog)
        return self._objective(self.params_, design)


class _GeneralInitMixin:
    def _initial(self, design):
        if self.init is None:
            return default_params(design)
        if isinstance(self.init, TParams):
            return self.init
        return TParams.from_dict(self.init)

    def _unpack(self, params, design):
        self.pi0_ = params.pi0.copy()
        self.lambda0_ = params.lambda0.copy()
        self.nu0_ = params.nu0
        self.v0_ = params.v0.copy()


class _MinnesotaInitMixin:
    def _initial(self, design):
        if self.init is None:
            l = design.d - design.n * self.p
            return default_hyper(design.n, l, self.phi)
        if isinstance(self.init, MinnesotaHyper):
            return self.init
        return MinnesotaHyper.from_dict(self.init)

    def _unpack(self, hyper, design):
        self.hyper_ = hyper
        self.c_m_ = hyper.c_m.copy()
        self.eps_ = hyper.eps.copy()
        self.alpha_ = hyper.alpha
        self.beta_ = hyper.beta
        self.gamma_ = hyper.gamma.copy()
        self.nu0_ = hyper.nu0
        self.v0_ = hyper.v0.copy()
        induced = minnesota.induced_params(hyper, self.p)
        self.pi0_ = induced.pi0
        self.lambda0_ = induced.lambda0


class Type1MatrixT(_GeneralInitMixin, _MatrixTBase):
    """Whole-sample conditional matrix-variate t model, general parameters.

    One coefficient/covariance pair is shared by every period; the objective
    is the exact marginal likelihood of the sample.

    Parameters
    ----------
    p : int
        Lag order.
    tol, max_iter : float, int
        EM stopping controls.
    update_nu0 : bool
        Re-estimate the degrees of freedom each step (off by default; the
        update equation is solved exactly by nu0 + T and diverges when
        iterated).
    nu0_equation : {"eq26", "eq27"}
        Variant of the degrees-of-freedom equation.
    init : None, dict or TParams
        Starting point; None means the least-squares default.
    """

    def __init__(self, p=1, tol=1e-8, max_iter=500, update_nu0=False,
                 nu0_equation="eq26", init=None):
        self.p = p
        self.tol = tol
        self.max_iter = max_iter
        self.update_nu0 = update_nu0
        self.nu0_equation = nu0_equation
        self.init = init

    def _run(self, initial, design, options):
        return type1.fit(initial, design, options, update_nu0=self.update_nu0,
                         nu0_equation=self.nu0_equation)

    def _objective(self, params, design):
        return type1.log_marginal_likelihood(params, design)


class Type2MatrixT(_GeneralInitMixin, _MatrixTBase):
    """Per-period conditional matrix-variate t model, general parameters.

    Coefficients and covariances are drawn independently every period; the
    objective is the product of one-step predictive densities.
    """

    def __init__(self, p=1, tol=1e-8, max_iter=500, update_nu0=False,
                 nu0_equation="eq26", init=None):
        self.p = p
        self.tol = tol
        self.max_iter = max_iter
        self.update_nu0 = update_nu0
        self.nu0_equation = nu0_equation
        self.init = init

    def _run(self, initial, design, options):
        return type2.fit(initial, design, options, update_nu0=self.update_nu0,
                         nu0_equation=self.nu0_equation)

    def _objective(self, params, design):
        return type2.log_likelihood(params, design)


class MinnesotaType1MatrixT(_MinnesotaInitMixin, _MatrixTBase):
    """Whole-sample model with the Minnesota shrinkage hyperparameterization.

    Parameters
    ----------
    p : int
        Lag order (at least 1).
    phi : array-like of 0/1, optional
        Unit-root flags; stationary variables first. None flags every
        variable as unit root (the random-walk prior centre).
    gamma_delta_variant : {"consistent", "printed"}
        Selector-matrix variant for the gamma update.
    """

    def __init__(self, p=1, phi=None, tol=1e-8, max_iter=500, update_nu0=False,
                 nu0_equation="eq26", gamma_delta_variant="consistent", init=None):
        self.p = p
        self.phi = phi
        self.tol = tol
        self.max_iter = max_iter
        self.update_nu0 = update_nu0
        self.nu0_equation = nu0_equation
        self.gamma_delta_variant = gamma_delta_variant
        self.init = init

    def _run(self, initial, design, options):
        return type1.fit(initial, design, options, update_nu0=self.update_nu0,
                         nu0_equation=self.nu0_equation,
                         gamma_delta_variant=self.gamma_delta_variant)

    def _objective(self, hyper, design):
        return type1.log_marginal_likelihood(
            minnesota.induced_params(hyper, self.p), design
        )


class MinnesotaType2MatrixT(_MinnesotaInitMixin, _MatrixTBase):
    """Per-period model with the Minnesota shrinkage hyperparameterization."""

    def __init__(self, p=1, phi=None, tol=1e-8, max_iter=500, update_nu0=False,
                 nu0_equation="eq26", gamma_delta_variant="consistent", init=None):
        self.p = p
        self.phi = phi
        self.tol = tol
        self.max_iter = max_iter
        self.update_nu0 = update_nu0
        self.nu0_equation = nu0_equation
        self.gamma_delta_variant = gamma_delta_variant
        self.init = init

    def _run(self, initial, design, options):
        return type2.fit(initial, design, options, update_nu0=self.update_nu0,
                         nu0_equation=self.nu0_equation,
                         gamma_delta_variant=self.gamma_delta_variant)

    def _objective(self, hyper, design):
        return type2.log_likelihood(minnesota.induced_params(hyper, self.p), design)
