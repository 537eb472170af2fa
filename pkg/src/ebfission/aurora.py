"""Aurora on fissioned replicates.

Procedure, per fission repetition r = 1..R:

1. split every X_i into (f_i, g_i) with fresh noise,
2. fit isotonic regression of g on f (unit weights),
3. plug in: estimate theta_i by the fitted value at f_i,

then average the per-observation estimates across the R repetitions.
Averaging happens over estimates, not fitted functions, in fixed rep order so
results are bitwise reproducible however reps are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .fission import FissionConfig, fission_arrays
from .isotonic import fit_isotonic


@dataclass(frozen=True)
class AuroraConfig:
    fission: FissionConfig
    n_fission_reps: int = 100
    base_seed: int = 0

    def __post_init__(self):
        if self.n_fission_reps < 1:
            raise InputError("n_fission_reps must be >= 1")


def fission_rep_seeds(base_seed: int, n_reps: int) -> list[int]:
    """Derived per-repetition seeds: hash of (base_seed, rep index) via SeedSequence."""
    children = np.random.SeedSequence(base_seed).spawn(n_reps)
    return [int(c.generate_state(1)[0]) for c in children]


def single_fission_estimate(xs, fission: FissionConfig, seed: int) -> np.ndarray:
    """One repetition: fission, regress g on f, evaluate the fit at each f_i."""
    f, g = fission_arrays(xs, fission, seed)
    fn = fit_isotonic(f, g)
    return fn.predict(f)


def aurora_estimate(xs, cfg: AuroraConfig) -> np.ndarray:
    """Average the single-repetition estimates over cfg.n_fission_reps repetitions."""
    xs = np.asarray(xs, dtype=float)
    if xs.size < 2:
        raise InputError("aurora_estimate needs at least 2 observations")
    total = np.zeros(xs.size)
    for seed in fission_rep_seeds(cfg.base_seed, cfg.n_fission_reps):
        total += single_fission_estimate(xs, cfg.fission, seed)
    return total / cfg.n_fission_reps


def mse(estimates, thetas) -> float:
    """Mean squared error (1/n) sum (estimate_i - theta_i)^2."""
    e = np.asarray(estimates, dtype=float)
    t = np.asarray(thetas, dtype=float)
    if e.shape != t.shape:
        raise InputError(f"length mismatch: {e.shape} vs {t.shape}")
    return float(np.mean((e - t) ** 2))
