"""Weighted isotonic regression via pool-adjacent-violators (PAVA).

Ties in the predictor are pooled first (weighted mean response, summed weight),
which makes the fit unique and independent of input order; PAVA then runs once
over the sorted distinct predictors in O(n).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class MonotoneStepFn:
    """Fitted monotone step function: one (knot, level) pair per distinct x.

    Constant extrapolation beyond the boundary knots; between knots the step is
    right-continuous (value of the nearest knot at or below the query point).
    """

    knots: np.ndarray
    levels: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        v = np.asarray(self.levels, dtype=float)
        k.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "knots", k)
        object.__setattr__(self, "levels", v)
        if k.ndim != 1 or k.size < 1 or k.shape != v.shape:
            raise InputError("knots and levels must be 1-d of equal length >= 1")
        if np.any(np.diff(k) <= 0):
            raise InputError("knots must be strictly increasing")
        if np.any(np.diff(v) < 0):
            raise InputError("levels must be nondecreasing")

    def predict(self, x0, interpolation: str = "step") -> np.ndarray:
        """Evaluate the fitted function at x0 (scalar or array).

        interpolation="step" is the canonical isotonic fit; "linear" joins the
        knots piecewise-linearly (for rendering), still constant outside them.
        """
        x = np.atleast_1d(np.asarray(x0, dtype=float))
        if interpolation == "step":
            idx = np.searchsorted(self.knots, x, side="right") - 1
            out = self.levels[np.clip(idx, 0, self.levels.size - 1)]
        elif interpolation == "linear":
            out = np.interp(x, self.knots, self.levels)
        else:
            raise InputError(f"unknown interpolation {interpolation!r}")
        return out if np.ndim(x0) else float(out[0])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["knot", "level"])
            for k, v in zip(self.knots, self.levels):
                w.writerow([f"{k:.17g}", f"{v:.17g}"])


def _pool_ties(x: np.ndarray, y: np.ndarray, w: np.ndarray):
    order = np.argsort(x, kind="stable")
    xs, ys, ws = x[order], y[order], w[order]
    ux, inv = np.unique(xs, return_inverse=True)
    if ux.size == xs.size:
        return xs, ys, ws
    wsum = np.bincount(inv, weights=ws)
    wy = np.bincount(inv, weights=ws * ys)
    return ux, wy / wsum, wsum


def _pava(y: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Stack-based PAVA over already-sorted distinct points; returns fitted values."""
    n = y.size
    means = np.empty(n)
    wsum = np.empty(n)
    count = np.empty(n, dtype=np.intp)
    m = 0
    for i in range(n):
        cm, cw, cc = y[i], w[i], 1
        while m > 0 and means[m - 1] > cm:
            m -= 1
            tw = wsum[m] + cw
            cm = (wsum[m] * means[m] + cw * cm) / tw
            cw = tw
            cc += count[m]
        means[m], wsum[m], count[m] = cm, cw, cc
        m += 1
    return np.repeat(means[:m], count[:m])


def fit_isotonic(x, y, w=None) -> MonotoneStepFn:
    """Weighted least-squares fit of a nondecreasing function to (x, y).

    Minimizes sum_i w_i * (y_i - m(x_i))^2 over nondecreasing m. Weights
    default to 1 and must be strictly positive.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size == 0:
        raise InputError("isotonic fit needs at least one point")
    if x.shape != y.shape or x.ndim != 1:
        raise InputError("x and y must be 1-d of equal length")
    w = np.ones_like(x) if w is None else np.asarray(w, dtype=float)
    if w.shape != x.shape:
        raise InputError("weights must match x in length")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y)) and np.all(np.isfinite(w))):
        raise InputError("x, y, w must be finite (no NaN/inf)")
    if np.any(w <= 0):
        raise InputError("weights must be strictly positive")
    knots, ym, wm = _pool_ties(x, y, w)
    return MonotoneStepFn(knots=knots, levels=_pava(ym, wm))
