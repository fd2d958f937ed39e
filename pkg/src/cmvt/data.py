"""Dataset container, CSV ingestion, and construction of the stacked regressors.

CSV layout is rows = time, columns = variables, one header row, '.' decimal
separator, UTF-8. The first p endogenous rows are consumed as the presample.
"""

import numpy as np

from .validation import as_float_array, as_time_series


class TimeSeriesDataset:
    """Endogenous series with its presample, exogenous path, and lag order.

    Parameters
    ----------
    endogenous : (n, T) array
        Columns are the observations y_1..y_T.
    presample : (n, p) array
        Columns are y_{1-p}..y_0, oldest first.
    exogenous : (l, T) array
        Columns are psi_1..psi_T; the first row must be identically one.
    p : int
        Lag order, p >= 0.
    """

    def __init__(self, endogenous, presample, exogenous, p):
        self.endogenous = as_float_array(endogenous, "endogenous", ndim=2)
        self.presample = as_float_array(presample, "presample", ndim=2)
        self.exogenous = as_float_array(exogenous, "exogenous", ndim=2)
        self.p = int(p)
        if self.p < 0:
            raise ValueError("lag order p must be non-negative")
        n, T = self.endogenous.shape
        if T < 1:
            raise ValueError("need at least one endogenous observation")
        if self.presample.shape != (n, self.p):
            raise ValueError(
                f"presample must be (n, p) = ({n}, {self.p}), got {self.presample.shape}"
            )
        if self.exogenous.shape[1] != T or self.exogenous.shape[0] < 1:
            raise ValueError(
                f"exogenous must be (l, T) with T = {T}, got {self.exogenous.shape}"
            )
        if not np.all(self.exogenous[0] == 1.0):
            raise ValueError("the first exogenous row must be identically 1")

    @property
    def n(self):
        return self.endogenous.shape[0]

    @property
    def T(self):
        return self.endogenous.shape[1]

    @property
    def l(self):
        return self.exogenous.shape[0]

    @property
    def d(self):
        return self.l + self.n * self.p


class DesignMatrices:
    """Stacked outcomes (n, T) and per-period regressors (d, T).

    Column t of ``regressors`` is (psi_t', y_{t-1}', ..., y_{t-p}')'.
    """

    def __init__(self, y_stack, regressors):
        self.y_stack = as_float_array(y_stack, "y_stack", ndim=2)
        self.regressors = as_float_array(regressors, "regressors", ndim=2)
        if self.y_stack.shape[1] != self.regressors.shape[1]:
            raise ValueError("y_stack and regressors must have the same number of columns")

    @property
    def n(self):
        return self.y_stack.shape[0]

    @property
    def d(self):
        return self.regressors.shape[0]

    @property
    def T(self):
        return self.y_stack.shape[1]


def from_arrays(endogenous_rows, exogenous_rows=None, p=0):
    """Assemble a dataset from rows-are-time arrays.

    The first p endogenous rows become the presample. An exogenous array may
    cover either every endogenous row (its first p rows are then dropped) or
    only the T estimation rows. A constant column is prepended unless the
    first column is already identically one. With no exogenous input the
    exogenous block is the constant alone (l = 1).
    """
    endog = as_time_series(endogenous_rows, "endogenous")
    p = int(p)
    if p < 0:
        raise ValueError("lag order p must be non-negative")
    total = endog.shape[0]
    T = total - p
    if T < 1:
        raise ValueError(f"need at least p + 1 = {p + 1} rows, got {total}")
    presample = endog[:p].T.copy()
    y = endog[p:].T.copy()
    if exogenous_rows is None:
        exog = np.ones((1, T))
    else:
        raw = as_time_series(exogenous_rows, "exogenous")
        if raw.shape[0] == total:
            raw = raw[p:]
        elif raw.shape[0] != T:
            raise ValueError(
                f"exogenous rows must number {total} or {T}, got {raw.shape[0]}"
            )
        exog = raw.T.copy()
        if not np.all(exog[0] == 1.0):
            exog = np.vstack([np.ones((1, T)), exog])
    return TimeSeriesDataset(y, presample, exog, p)


def load_dataset(endogenous_path, exogenous_path=None, p=0):
    """Load a dataset from CSV files.

    Parameters
    ----------
    endogenous_path : str
        CSV of the endogenous series; its first p rows become the presample.
    exogenous_path : str, optional
        CSV of exogenous variables (see ``from_arrays`` for accepted row
        counts). Missing means intercept-only (l = 1).
    p : int
        Lag order.
    """
    endog = _read_csv(endogenous_path)
    exog = None
    if exogenous_path is not None:
        exog = _read_csv(exogenous_path)
    return from_arrays(endog, exog, p)


def _read_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if len(lines) < 2:
        raise ValueError(f"{path}: need a header row and at least one data row")
    rows = []
    width = None
    for idx, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise ValueError(f"{path}: row {idx} has {len(cells)} cells, expected {width}")
        try:
            rows.append([float(cell) for cell in cells])
        except ValueError:
            raise ValueError(f"{path}: row {idx} contains a non-numeric cell") from None
    data = np.array(rows, dtype=float)
    if not np.all(np.isfinite(data)):
        raise ValueError(f"{path}: NaN or infinite values are not allowed")
    return data


def build_design(data):
    """Stack the outcomes and regressors of a dataset.

    Regressor column t reproduces (psi_t', y_{t-1}', ..., y_{t-p}')' exactly;
    lags reach into the presample for t <= p.
    """
    p, T = data.p, data.T
    full = np.hstack([data.presample, data.endogenous])
    blocks = [data.exogenous]
    for lag in range(1, p + 1):
        blocks.append(full[:, p - lag:p - lag + T])
    return DesignMatrices(data.endogenous.copy(), np.vstack(blocks))


def write_csv(path, rows, header):
    """Write a rows-are-time array in the package CSV layout.

    Floats are written with repr (shortest round-trip form) so identical
    inputs produce byte-identical files.
    """
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2:
        raise ValueError("rows must be 2-dimensional")
    if rows.shape[1] != len(header):
        raise ValueError("header length must match the number of columns")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def save_dataset(dataset, endogenous_path, exogenous_path=None):
    """Write a dataset back to CSV (presample rows first, then the sample)."""
    endog_rows = np.hstack([dataset.presample, dataset.endogenous]).T
    names = [f"y{i + 1}" for i in range(dataset.n)]
    write_csv(endogenous_path, endog_rows, names)
    if exogenous_path is not None:
        exog_rows = dataset.exogenous.T
        exog_names = [f"x{j + 1}" for j in range(dataset.l)]
        write_csv(exogenous_path, exog_rows, exog_names)
