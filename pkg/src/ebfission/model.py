"""Hierarchical model: discrete priors, Gaussian/Poisson likelihoods, oracle Bayes rule.

The generative model is

    theta_i ~ H  (i.i.d., H discrete with finitely many atoms)
    X_i | theta_i ~ Normal(theta_i, sigma2)   or   Poisson(theta_i)

All quantities here are exact functions of (prior, likelihood); the only
randomness enters through explicit integer seeds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import ConfigurationError, InputError, NumericError

GAUSSIAN = "gaussian"
POISSON = "poisson"

_WEIGHT_SUM_TOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PriorSpec:
    """Discrete prior: support atoms (strictly increasing) and probability weights.

    Zero weights are permitted (used by the grid NPMLE); weights must sum to 1.
    """

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "atoms", _readonly(self.atoms))
        object.__setattr__(self, "weights", _readonly(self.weights))
        a, w = self.atoms, self.weights
        if a.ndim != 1 or a.size < 1 or a.shape != w.shape:
            raise ConfigurationError("atoms and weights must be 1-d of equal length >= 1")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(w))):
            raise ConfigurationError("atoms and weights must be finite")
        if np.any(np.diff(a) <= 0):
            raise ConfigurationError("atoms must be strictly increasing (no duplicates)")
        if np.any(w < 0):
            raise ConfigurationError("weights must be nonnegative")
        if abs(float(w.sum()) - 1.0) > _WEIGHT_SUM_TOL:
            raise ConfigurationError(f"weights must sum to 1 (got {float(w.sum())!r})")

    @classmethod
    def uniform(cls, atoms) -> "PriorSpec":
        atoms = np.asarray(atoms, dtype=float)
        return cls(atoms, np.full(atoms.size, 1.0 / atoms.size))

    @classmethod
    def point_mass(cls, atom: float) -> "PriorSpec":
        return cls(np.array([float(atom)]), np.array([1.0]))

    def mean(self) -> float:
        return float(self.weights @ self.atoms)

    def var(self) -> float:
        m = self.mean()
        return float(self.weights @ (self.atoms - m) ** 2)


@dataclass(frozen=True)
class LikelihoodModel:
    """Observation family p(. | theta): Gaussian with known variance, or Poisson."""

    kind: str
    sigma2: float = 1.0

    def __post_init__(self):
        if self.kind not in (GAUSSIAN, POISSON):
            raise ConfigurationError(f"unknown likelihood kind {self.kind!r}")
        if self.kind == GAUSSIAN and not self.sigma2 > 0:
            raise ConfigurationError("Gaussian variance must be strictly positive")

    @classmethod
    def gaussian(cls, sigma2: float = 1.0) -> "LikelihoodModel":
        return cls(GAUSSIAN, float(sigma2))

    @classmethod
    def poisson(cls) -> "LikelihoodModel":
        return cls(POISSON)


@dataclass(frozen=True)
class Dataset:
    """One synthetic sample: latent means, observations, and the seed that produced them."""

    thetas: np.ndarray
    xs: np.ndarray
    seed: int = field(default=0)

    def __post_init__(self):
        object.__setattr__(self, "thetas", _readonly(self.thetas))
        object.__setattr__(self, "xs", _readonly(self.xs))
        if self.thetas.shape != self.xs.shape or self.thetas.ndim != 1 or self.thetas.size < 1:
            raise InputError("thetas and xs must be 1-d of equal length >= 1")

    @property
    def n(self) -> int:
        return int(self.xs.size)


def validate_prior_for(prior: PriorSpec, lik: LikelihoodModel) -> None:
    """Reject prior/likelihood combinations outside the model's domain."""
    if lik.kind == POISSON and np.any(prior.atoms <= 0):
        raise ConfigurationError("Poisson model requires all prior atoms > 0")


def validate_xs_for(xs: np.ndarray, lik: LikelihoodModel) -> np.ndarray:
    """Check observations lie in the likelihood's support; returns xs as a float array."""
    xs = np.asarray(xs, dtype=float)
    if not np.all(np.isfinite(xs)):
        raise InputError("observations must be finite")
    if lik.kind == POISSON and (np.any(xs < 0) or np.any(xs != np.floor(xs))):
        raise InputError("Poisson observations must be nonnegative integers")
    return xs


def sample_dataset(prior: PriorSpec, lik: LikelihoodModel, n: int, seed: int) -> Dataset:
    """Draw thetas i.i.d. from the prior, then observations from the likelihood.

    Bitwise reproducible for a fixed seed.
    """
    if n < 1:
        raise InputError("n must be >= 1")
    validate_prior_for(prior, lik)
    rng = np.random.default_rng(seed)
    thetas = rng.choice(prior.atoms, size=n, p=prior.weights)
    if lik.kind == GAUSSIAN:
        xs = thetas + rng.normal(0.0, np.sqrt(lik.sigma2), size=n)
    else:
        xs = rng.poisson(thetas).astype(float)
    return Dataset(thetas=thetas, xs=xs, seed=seed)


def log_likelihood_matrix(xs: np.ndarray, atoms: np.ndarray, lik: LikelihoodModel) -> np.ndarray:
    """log p(x_i | theta_k) as an (n, K) matrix.

    Poisson mass uses log-gamma, never factorials, so counts in the tens stay exact.
    """
    xs = np.asarray(xs, dtype=float)[:, None]
    atoms = np.asarray(atoms, dtype=float)[None, :]
    if lik.kind == GAUSSIAN:
        return -0.5 * np.log(2.0 * np.pi * lik.sigma2) - (xs - atoms) ** 2 / (2.0 * lik.sigma2)
    return xs * np.log(atoms) - atoms - gammaln(xs + 1.0)


def posterior_mean(prior: PriorSpec, lik: LikelihoodModel, xs) -> np.ndarray:
    """E[theta | X = x] for each x, under (prior, lik).

    The K-term mixture is evaluated in log space with per-row max subtraction,
    so tail observations cannot underflow to 0/0.
    """
    validate_prior_for(prior, lik)
    xs = validate_xs_for(np.atleast_1d(np.asarray(xs, dtype=float)), lik)
    with np.errstate(divide="ignore"):  # log(0) = -inf for zero-weight atoms
        logw = np.log(prior.weights)
    a = log_likelihood_matrix(xs, prior.atoms, lik) + logw[None, :]
    shift = np.max(a, axis=1, keepdims=True)
    p = np.exp(a - shift)
    den = p.sum(axis=1)
    if not np.all(np.isfinite(den)) or np.any(den <= 0):
        bad = int(np.flatnonzero(~np.isfinite(den) | (den <= 0))[0])
        raise NumericError(f"posterior mean undefined at x={xs[bad]!r}: all densities vanished")
    return (p @ prior.atoms) / den


def bayes_posterior_mean(prior: PriorSpec, lik: LikelihoodModel, x: float) -> float:
    """Scalar convenience wrapper around :func:`posterior_mean`."""
    return float(posterior_mean(prior, lik, [x])[0])


def bayes_risk_mc(prior: PriorSpec, lik: LikelihoodModel, n: int, reps: int, seed: int) -> float:
    """Monte Carlo estimate of the Bayes risk E[(theta - E[theta|X])^2].

    Averages the per-dataset mean squared error of the oracle rule over `reps`
    independent datasets of size `n`, mirroring how the benchmark table is scored.
    """
    if n < 1 or reps < 1:
        raise InputError("n and reps must be >= 1")
    children = np.random.SeedSequence(seed).spawn(reps)
    total = 0.0
    for child in children:
        ds = sample_dataset(prior, lik, n, seed=int(child.generate_state(1)[0]))
        est = posterior_mean(prior, lik, ds.xs)
        total += float(np.mean((est - ds.thetas) ** 2))
    return total / reps
