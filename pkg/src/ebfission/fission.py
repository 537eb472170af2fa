"""Data fission: split one observation X into synthetic replicates (f, g).

Two constructions are provided.

Gaussian additive, for X ~ Normal(theta, sigma2) and tau > 0:

    Z ~ Normal(0, sigma2),  f = X + tau*Z,  g = X - Z/tau

f and g are conditionally independent given theta, with f ~ Normal(theta,
sigma2*(1+tau^2)) and g ~ Normal(theta, sigma2*(1+tau^-2)). X is recovered as
(f + tau^2*g)/(1+tau^2).

Poisson thinning, for X ~ Poisson(theta) and tau in (0,1):

    Z ~ Binomial(X, 1-tau),  f = Z/(1-tau),  g = (X-Z)/tau

Z and X-Z are independent Poissons given theta, so f and g are independent
unbiased replicates; X is recovered as (1-tau)*f + tau*g.

Either way E[g | f] = E[theta | f], which is what makes regressing g on f an
empirical Bayes device. tau controls how the Fisher information about theta is
split between the two replicates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InputError

GAUSSIAN = "gaussian"
POISSON = "poisson"


@dataclass(frozen=True)
class FissionConfig:
    """Fission scheme plus its tuning parameter.

    tau > 0 for the Gaussian scheme, tau in (0,1) strictly for Poisson thinning.
    sigma2 is the Gaussian noise variance and is ignored under Poisson.
    """

    tau: float
    scheme: str
    sigma2: float = 1.0

    def __post_init__(self):
        if self.scheme not in (GAUSSIAN, POISSON):
            raise ConfigurationError(f"unknown fission scheme {self.scheme!r}")
        if self.scheme == GAUSSIAN:
            if not self.tau > 0:
                raise ConfigurationError("Gaussian fission requires tau > 0")
            if not self.sigma2 > 0:
                raise ConfigurationError("Gaussian fission requires sigma2 > 0")
        elif not 0.0 < self.tau < 1.0:
            raise ConfigurationError("Poisson thinning requires tau strictly inside (0,1)")


@dataclass(frozen=True)
class FissionedSample:
    """One replicate pair: the original x plus f and g."""

    x: float
    f: float
    g: float


def fission_gaussian(x: float, tau: float, sigma2: float, rng) -> FissionedSample:
    """Split a single Gaussian observation; rng supplies the Normal(0, sigma2) draw."""
    if not tau > 0 or not sigma2 > 0:
        raise ConfigurationError("fission_gaussian requires tau > 0 and sigma2 > 0")
    z = rng.normal(0.0, np.sqrt(sigma2))
    return FissionedSample(x=float(x), f=float(x + tau * z), g=float(x - z / tau))


def fission_poisson(x: int, tau: float, rng) -> FissionedSample:
    """Split a single Poisson count by binomial thinning."""
    if not 0.0 < tau < 1.0:
        raise ConfigurationError("fission_poisson requires tau in (0,1)")
    xf = float(x)
    if xf < 0 or xf != np.floor(xf):
        raise InputError(f"Poisson fission needs a nonnegative integer count, got {x!r}")
    z = rng.binomial(int(xf), 1.0 - tau)
    return FissionedSample(x=xf, f=float(z / (1.0 - tau)), g=float((xf - z) / tau))


def tau_from_info_split(scheme: str, g_fraction: float) -> float:
    """tau that sends the stated fraction of the Fisher information to g.

    Gaussian: f ~ Normal(theta, sigma2*(1+tau^2)) carries information
    1/(1+tau^2) of the original and g carries tau^2/(1+tau^2), so
    tau = sqrt(frac/(1-frac)). Poisson: thinned-Poisson information is
    proportional to the thinning rate, so tau = frac directly.
    """
    if not 0.0 < g_fraction < 1.0:
        raise InputError(f"g_fraction must lie strictly inside (0,1), got {g_fraction!r}")
    if scheme == GAUSSIAN:
        return float(np.sqrt(g_fraction / (1.0 - g_fraction)))
    if scheme == POISSON:
        return float(g_fraction)
    raise ConfigurationError(f"unknown fission scheme {scheme!r}")


def fission_arrays(xs, cfg: FissionConfig, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized fission of a whole dataset; returns (f, g) arrays.

    Deterministic given the seed; every point gets independent noise.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.size and not np.all(np.isfinite(xs)):
        raise InputError("observations must be finite")
    rng = np.random.default_rng(seed)
    if cfg.scheme == GAUSSIAN:
        z = rng.normal(0.0, np.sqrt(cfg.sigma2), size=xs.shape)
        return xs + cfg.tau * z, xs - z / cfg.tau
    if np.any(xs < 0) or np.any(xs != np.floor(xs)):
        raise InputError("Poisson fission needs nonnegative integer counts")
    z = rng.binomial(xs.astype(np.int64), 1.0 - cfg.tau).astype(float)
    return z / (1.0 - cfg.tau), (xs - z) / cfg.tau


def fission_dataset(xs, cfg: FissionConfig, seed: int) -> list[FissionedSample]:
    """Object-level wrapper around :func:`fission_arrays`."""
    xs = np.asarray(xs, dtype=float)
    f, g = fission_arrays(xs, cfg, seed)
    return [FissionedSample(x=float(x), f=float(fi), g=float(gi)) for x, fi, gi in zip(xs, f, g)]
