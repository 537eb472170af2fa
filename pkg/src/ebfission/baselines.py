"""Comparison estimators: identity MLE, oracle Bayes plug-in, and a grid NPMLE.

The NPMLE maximizes the marginal likelihood over all priors supported on a
fixed grid (a Kiefer-Wolfowitz estimate). Weights are fit by plain EM from a
uniform start, which is deterministic and monotone in the average marginal
log-likelihood; the fitted prior's posterior mean then gives the estimates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .model import (
    GAUSSIAN,
    LikelihoodModel,
    PriorSpec,
    log_likelihood_matrix,
    posterior_mean,
    validate_xs_for,
)


@dataclass(frozen=True)
class NpmleFit:
    """Estimated prior on a fixed grid, with the EM trace for auditing."""

    grid: np.ndarray
    weights: np.ndarray
    loglik: float
    iterations: int
    converged: bool
    loglik_trace: np.ndarray = field(repr=False)

    def to_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["grid_point", "weight"])
            for g, wt in zip(self.grid, self.weights):
                w.writerow([f"{g:.17g}", f"{wt:.17g}"])


def mle_estimate(xs) -> np.ndarray:
    """The maximum likelihood estimate is the observation itself."""
    return np.array(xs, dtype=float)


def oracle_bayes_estimate(xs, prior: PriorSpec, lik: LikelihoodModel) -> np.ndarray:
    """Posterior mean under the true prior, applied pointwise."""
    return posterior_mean(prior, lik, xs)


def default_grid(xs: np.ndarray, lik: LikelihoodModel, grid_size: int) -> np.ndarray:
    """Candidate support points spanning the data range.

    Gaussian: [min x, max x]. Poisson: [max(0.01, min x), max x + 3*sqrt(max x)]
    (floored away from zero to avoid zero-rate degeneracies). Duplicate points
    from a degenerate range collapse to a single atom.
    """
    lo, hi = float(np.min(xs)), float(np.max(xs))
    if lik.kind != GAUSSIAN:
        lo = max(0.01, lo)
        hi = hi + 3.0 * np.sqrt(max(hi, 0.0))
        hi = max(hi, lo)
    return np.unique(np.linspace(lo, hi, grid_size))


def fit_npmle(
    xs,
    lik: LikelihoodModel,
    grid_size: int = 300,
    max_iter: int = 2000,
    tol: float = 1e-8,
) -> NpmleFit:
    """EM for the grid-constrained nonparametric MLE of the prior.

    Update: w_k <- w_k * (1/n) sum_i p(x_i|theta_k) / sum_j w_j p(x_i|theta_j),
    from uniform initialization. Stops once the average log-likelihood improves
    by less than tol, or at max_iter (then converged=False; not an error).
    """
    xs = validate_xs_for(xs, lik)
    if xs.size == 0:
        raise InputError("fit_npmle needs a nonempty sample")
    if grid_size < 2:
        raise InputError("grid_size must be >= 2")
    grid = default_grid(xs, lik, grid_size)
    n, K = xs.size, grid.size

    logp = log_likelihood_matrix(xs, grid, lik)
    shift = np.max(logp, axis=1, keepdims=True)
    p = np.exp(logp - shift)  # densities scaled per row; ratios are unaffected
    shift = shift[:, 0]

    w = np.full(K, 1.0 / K)
    trace = []
    converged = False
    it = 0
    ll = float(np.mean(np.log(p @ w) + shift))
    trace.append(ll)
    while it < max_iter:
        marg = p @ w
        w = w * (p.T @ (1.0 / marg)) / n
        it += 1
        ll_new = float(np.mean(np.log(p @ w) + shift))
        trace.append(ll_new)
        if ll_new - ll < tol:
            converged = True
            ll = ll_new
            break
        ll = ll_new
    return NpmleFit(
        grid=grid,
        weights=w,
        loglik=ll,
        iterations=it,
        converged=converged,
        loglik_trace=np.asarray(trace),
    )


def npmle_estimate(xs, fit: NpmleFit, lik: LikelihoodModel) -> np.ndarray:
    """Posterior mean under the fitted grid prior (zero-weight atoms allowed)."""
    if fit.grid.size == 1:
        return np.full(np.asarray(xs, dtype=float).shape, float(fit.grid[0]))
    prior = PriorSpec(atoms=fit.grid, weights=fit.weights / fit.weights.sum())
    return posterior_mean(prior, lik, xs)
