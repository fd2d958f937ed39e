"""Generic EM driver: options, per-iteration trace, and the ascent loop."""

from dataclasses import dataclass

import numpy as np

from .exceptions import NumericError

STOP_TOLERANCE = "tolerance"
STOP_MAX_ITERS = "max_iters"
STOP_SOLVER_FAILURE = "solver_failure"


@dataclass
class FitOptions:
    """Convergence controls for the EM loop.

    The loop stops once the relative objective change |dl| / (1 + |l|) drops
    below ``tol`` or after ``max_iters`` steps.
    """

    tol: float = 1e-8
    max_iters: int = 500

    def __post_init__(self):
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")
        if self.max_iters < 0:
            raise ValueError("max_iters must be non-negative")


class EMTrace:
    """Per-iteration parameter snapshots and objective values."""

    def __init__(self):
        self.params = []
        self.loglik = []
        self.converged = False
        self.stop_reason = STOP_MAX_ITERS

    def append(self, params, loglik):
        self.params.append(params)
        self.loglik.append(float(loglik))

    def __len__(self):
        return len(self.params)

    def write_csv(self, path):
        """Export as CSV with columns iter, loglik, nu0 (repr floats)."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("iter,loglik,nu0\n")
            for k, (snapshot, value) in enumerate(zip(self.params, self.loglik)):
                fh.write(f"{k},{value!r},{float(snapshot.nu0)!r}\n")


def run_em(initial, step, loglik, options=None):
    """Iterate ``step`` from ``initial``, recording ``loglik`` at every iterate.

    Numeric failures inside a step (or a non-finite objective) finalize the
    trace with stop_reason "solver_failure" and re-raise with the partial
    trace attached as ``exc.trace``.

    Returns
    -------
    (params, trace)
        The last iterate and the full trace (the initial point included).
    """
    options = options if options is not None else FitOptions()
    trace = EMTrace()
    params = initial
    value = float(loglik(params))
    if not np.isfinite(value):
        raise NumericError("objective is not finite at the initial parameters")
    trace.append(params, value)
    for _ in range(options.max_iters):
        try:
            params = step(params)
            new_value = float(loglik(params))
        except NumericError as exc:
            trace.stop_reason = STOP_SOLVER_FAILURE
            exc.trace = trace
            raise
        if not np.isfinite(new_value):
            trace.stop_reason = STOP_SOLVER_FAILURE
            error = NumericError("objective became non-finite during EM")
            error.trace = trace
            raise error
        trace.append(params, new_value)
        if abs(new_value - value) / (1.0 + abs(value)) < options.tol:
            trace.converged = True
            trace.stop_reason = STOP_TOLERANCE
            break
        value = new_value
    return params, trace
