"""Monte Carlo experiment orchestration.

run_experiment draws mc_reps fresh datasets, scores every configured estimator
on each one, and aggregates per-estimator MSEs. Reps are independent given
seeds derived from (base_seed, rep index), so they can run in parallel; the
final aggregation is a fixed-order reduction over rep index, which keeps
results byte-identical for any worker count.

export_figure_data produces the scatter/curve CSVs for a single fission draw,
including the true mean t -> E[theta | f = t] computed by numerical
integration (Gaussian: adaptive quadrature over the fission noise; Poisson:
exact summation over integer counts).
"""

from __future__ import annotations

import csv
import hashlib
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln, logsumexp
from scipy.stats import poisson as poisson_dist

from .aurora import AuroraConfig, aurora_estimate, mse
from .baselines import fit_npmle, mle_estimate, npmle_estimate, oracle_bayes_estimate
from .errors import ConfigurationError, InputError, NumericError
from .fission import FissionConfig, fission_arrays, tau_from_info_split
from .isotonic import fit_isotonic
from .model import (
    GAUSSIAN,
    POISSON,
    Dataset,
    LikelihoodModel,
    PriorSpec,
    sample_dataset,
    validate_prior_for,
)

ESTIMATOR_KINDS = ("mle", "npmle", "aurora", "oracle_bayes")

_TRUNCATION_MASS = 1e-12  # per-component mass dropped when truncating count sums


@dataclass(frozen=True)
class EstimatorSpec:
    """One row of the comparison: which estimator, with which settings."""

    kind: str
    g_fraction: float | None = None
    n_fission_reps: int = 100
    grid_size: int = 300
    max_iter: int = 2000
    tol: float = 1e-8
    label: str | None = None

    def __post_init__(self):
        if self.kind not in ESTIMATOR_KINDS:
            raise ConfigurationError(f"unknown estimator kind {self.kind!r}")
        if self.kind == "aurora":
            if self.g_fraction is None:
                raise ConfigurationError("aurora estimator needs g_fraction")
            if not 0.0 < self.g_fraction < 1.0:
                raise ConfigurationError("g_fraction must lie strictly inside (0,1)")
            if self.n_fission_reps < 1:
                raise ConfigurationError("n_fission_reps must be >= 1")

    @property
    def name(self) -> str:
        if self.label is not None:
            return self.label
        if self.kind == "aurora":
            return f"aurora_g{self.g_fraction:g}"
        return self.kind


@dataclass(frozen=True)
class ExperimentConfig:
    prior: PriorSpec
    lik: LikelihoodModel
    n: int
    mc_reps: int
    estimators: tuple[EstimatorSpec, ...]
    base_seed: int

    def __post_init__(self):
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if self.n < 2:
            raise ConfigurationError("n must be >= 2")
        if self.mc_reps < 1:
            raise ConfigurationError("mc_reps must be >= 1")
        if not self.estimators:
            raise ConfigurationError("estimator list must be nonempty")
        names = [e.name for e in self.estimators]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"estimator names must be unique, got {names}")
        validate_prior_for(self.prior, self.lik)

    def echo(self) -> dict:
        return {
            "prior_atoms": self.prior.atoms.tolist(),
            "prior_weights": self.prior.weights.tolist(),
            "likelihood": self.lik.kind,
            "sigma2": self.lik.sigma2 if self.lik.kind == GAUSSIAN else None,
            "n": self.n,
            "mc_reps": self.mc_reps,
            "base_seed": self.base_seed,
            "estimators": [
                {k: v for k, v in vars(e).items() if v is not None} for e in self.estimators
            ],
        }


@dataclass(frozen=True)
class EstimatorResult:
    name: str
    mean_mse: float
    se_mse: float
    per_rep_mse: tuple[float, ...]


@dataclass(frozen=True)
class SimulationReport:
    results: tuple[EstimatorResult, ...]
    config: dict
    seed: int
    wall_clock_s: float
    dataset_checksums: tuple[str, ...] = field(repr=False)

    def result(self, name: str) -> EstimatorResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def table_rows(self) -> list[dict]:
        cfg = self.config
        return [
            {
                "estimator": r.name,
                "likelihood": cfg["likelihood"],
                "mean_mse": r.mean_mse,
                "se_mse": r.se_mse,
                "n": cfg["n"],
                "mc_reps": cfg["mc_reps"],
                "seed": self.seed,
            }
            for r in self.results
        ]


def _dataset_checksum(ds: Dataset) -> str:
    h = hashlib.sha256()
    h.update(ds.xs.tobytes())
    h.update(ds.thetas.tobytes())
    return h.hexdigest()


def _rep_streams(base_seed: int, rep: int, count: int) -> list[int]:
    seq = np.random.SeedSequence(base_seed, spawn_key=(rep,))
    return [int(s) for s in seq.generate_state(count, dtype=np.uint64)]


def _fission_scheme(lik: LikelihoodModel) -> str:
    return GAUSSIAN if lik.kind == GAUSSIAN else POISSON


def _run_estimator(spec: EstimatorSpec, ds: Dataset, cfg: ExperimentConfig, seed: int) -> np.ndarray:
    if spec.kind == "mle":
        return mle_estimate(ds.xs)
    if spec.kind == "oracle_bayes":
        return oracle_bayes_estimate(ds.xs, cfg.prior, cfg.lik)
    if spec.kind == "npmle":
        fit = fit_npmle(ds.xs, cfg.lik, spec.grid_size, spec.max_iter, spec.tol)
        return npmle_estimate(ds.xs, fit, cfg.lik)
    scheme = _fission_scheme(cfg.lik)
    fission = FissionConfig(
        tau=tau_from_info_split(scheme, spec.g_fraction),
        scheme=scheme,
        sigma2=cfg.lik.sigma2,
    )
    return aurora_estimate(
        ds.xs, AuroraConfig(fission=fission, n_fission_reps=spec.n_fission_reps, base_seed=seed)
    )


def _run_single_rep(rep: int, cfg: ExperimentConfig) -> tuple[list[float], str]:
    streams = _rep_streams(cfg.base_seed, rep, 1 + len(cfg.estimators))
    ds = sample_dataset(cfg.prior, cfg.lik, cfg.n, seed=streams[0])
    checksum = _dataset_checksum(ds)
    mses = []
    for spec, est_seed in zip(cfg.estimators, streams[1:]):
        try:
            estimates = _run_estimator(spec, ds, cfg, est_seed)
        except Exception as exc:
            raise RuntimeError(
                f"estimator {spec.name!r} failed on rep {rep} (dataset seed {streams[0]}): {exc}"
            ) from exc
        mses.append(mse(estimates, ds.thetas))
    if _dataset_checksum(ds) != checksum:
        raise RuntimeError(f"dataset mutated during rep {rep}")
    return mses, checksum


def run_experiment(cfg: ExperimentConfig, n_jobs: int = 1) -> SimulationReport:
    """Score every estimator on mc_reps fresh datasets; aggregate MSEs.

    n_jobs > 1 runs reps in a process pool; outputs are identical either way.
    """
    t0 = time.perf_counter()
    reps = range(cfg.mc_reps)
    if n_jobs > 1 and cfg.mc_reps > 1:
        with ProcessPoolExecutor(max_workers=min(n_jobs, cfg.mc_reps)) as pool:
            per_rep = list(pool.map(_run_single_rep, reps, [cfg] * cfg.mc_reps, chunksize=1))
    else:
        per_rep = [_run_single_rep(r, cfg) for r in reps]

    checksums = tuple(c for _, c in per_rep)
    results = []
    for j, spec in enumerate(cfg.estimators):
        vals = np.array([per_rep[r][0][j] for r in reps])
        se = float(np.std(vals, ddof=1) / np.sqrt(cfg.mc_reps)) if cfg.mc_reps > 1 else 0.0
        results.append(
            EstimatorResult(
                name=spec.name,
                mean_mse=float(vals.mean()),
                se_mse=se,
                per_rep_mse=tuple(float(v) for v in vals),
            )
        )
    return SimulationReport(
        results=tuple(results),
        config=cfg.echo(),
        seed=cfg.base_seed,
        wall_clock_s=time.perf_counter() - t0,
        dataset_checksums=checksums,
    )


def write_table_csv(path, reports: list[SimulationReport]) -> None:
    cols = ["estimator", "likelihood", "mean_mse", "se_mse", "n", "mc_reps", "seed"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for rep in reports:
            for row in rep.table_rows():
                w.writerow([_fmt(row[c]) for c in cols])


def _fmt(v) -> str:
    return f"{v:.17g}" if isinstance(v, float) else str(v)


# --- true mean curve -------------------------------------------------------

def _gaussian_f_density(t: float, theta: float, sigma2: float, tau: float) -> float:
    """Density of f = X + tau*Z at t, by adaptive quadrature over the noise z.

    (Analytically this is the Normal(theta, sigma2*(1+tau^2)) density; the
    quadrature keeps the exported curve on an independent numerical route.)
    """
    sd = np.sqrt(sigma2)
    norm = 1.0 / (2.0 * np.pi * sigma2)

    def integrand(z):
        return norm * np.exp(-(z**2 + (t - tau * z - theta) ** 2) / (2.0 * sigma2))

    val, abserr = quad(integrand, -10.0 * sd, 10.0 * sd, epsabs=1e-14, epsrel=1e-11, limit=200)
    if not np.isfinite(val) or val < 0:
        raise NumericError(f"true-mean quadrature failed at t={t!r} (theta={theta!r})")
    return val


def _poisson_f_logpmf(k: int, theta: float, tau: float) -> float:
    """log P(f = k/(1-tau) | theta), summing over the original count x >= k.

    x is truncated where the Poisson(theta) tail drops below the mass floor.
    """
    x_hi = int(poisson_dist.ppf(1.0 - _TRUNCATION_MASS, theta)) + 1
    if x_hi < k:
        return -np.inf
    x = np.arange(k, x_hi + 1)
    log_pois = x * np.log(theta) - theta - gammaln(x + 1.0)
    log_binom = (
        gammaln(x + 1.0)
        - gammaln(k + 1.0)
        - gammaln(x - k + 1.0)
        + k * np.log1p(-tau)
        + (x - k) * np.log(tau)
    )
    return float(logsumexp(log_pois + log_binom))


def true_mean_curve(prior: PriorSpec, lik: LikelihoodModel, tau: float, ts) -> np.ndarray:
    """E[theta | f_tau(X) = t] for each t, integrating over the prior mixture."""
    validate_prior_for(prior, lik)
    ts = np.asarray(ts, dtype=float)
    out = np.empty(ts.shape)
    atoms, weights = prior.atoms, prior.weights
    for i, t in enumerate(ts):
        if lik.kind == GAUSSIAN:
            dens = np.array([_gaussian_f_density(t, th, lik.sigma2, tau) for th in atoms])
        else:
            k = t * (1.0 - tau)
            k_int = int(round(k))
            if abs(k - k_int) > 1e-9 or k_int < 0:
                raise InputError(f"Poisson f-values must be k/(1-tau) for integer k, got t={t!r}")
            logs = np.array([_poisson_f_logpmf(k_int, th, tau) for th in atoms])
            dens = np.exp(logs - logs.max())
        wd = weights * dens
        den = wd.sum()
        if not np.isfinite(den) or den <= 0:
            raise NumericError(f"true-mean curve undefined at grid point t={t!r}")
        out[i] = float(wd @ atoms / den)
    return out


def curve_grid(prior: PriorSpec, lik: LikelihoodModel, tau: float, points: int = 201) -> np.ndarray:
    """Grid of f-values for the curve CSV: continuous for Gaussian, the
    achievable lattice k/(1-tau) for Poisson."""
    if lik.kind == GAUSSIAN:
        spread = 3.0 * np.sqrt(lik.sigma2 * (1.0 + tau * tau))
        return np.linspace(prior.atoms[0] - spread, prior.atoms[-1] + spread, points)
    lam_max = prior.atoms[-1] * (1.0 - tau)
    k_hi = int(poisson_dist.ppf(1.0 - 1e-9, lam_max)) + 2
    return np.arange(0, k_hi + 1) / (1.0 - tau)


@dataclass(frozen=True)
class FigureData:
    """Scatter, fitted step function, and true/fitted mean curves for one draw."""

    f: np.ndarray
    g: np.ndarray
    knots: np.ndarray
    levels: np.ndarray
    t: np.ndarray
    true_mean: np.ndarray
    fitted_mean: np.ndarray


def export_figure_data(
    prior: PriorSpec,
    lik: LikelihoodModel,
    n: int,
    g_fraction: float,
    seed: int,
    out_dir=None,
) -> FigureData:
    """One fission draw plus curves; optionally writes scatter/knots/curve CSVs."""
    scheme = _fission_scheme(lik)
    tau = tau_from_info_split(scheme, g_fraction)
    data_seed, fission_seed = _rep_streams(seed, 0, 2)
    ds = sample_dataset(prior, lik, n, seed=data_seed)
    cfg = FissionConfig(tau=tau, scheme=scheme, sigma2=lik.sigma2)
    f, g = fission_arrays(ds.xs, cfg, fission_seed)
    fn = fit_isotonic(f, g)
    t = curve_grid(prior, lik, tau)
    data = FigureData(
        f=f,
        g=g,
        knots=fn.knots,
        levels=fn.levels,
        t=t,
        true_mean=true_mean_curve(prior, lik, tau, t),
        fitted_mean=fn.predict(t),
    )
    if out_dir is not None:
        _write_figure_csvs(data, out_dir)
    return data


def _write_figure_csvs(data: FigureData, out_dir) -> None:
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "scatter.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["f", "g"])
        for fi, gi in zip(data.f, data.g):
            w.writerow([f"{fi:.17g}", f"{gi:.17g}"])
    with open(out / "knots.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["knot", "level"])
        for k, v in zip(data.knots, data.levels):
            w.writerow([f"{k:.17g}", f"{v:.17g}"])
    with open(out / "curve.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "true_mean", "fitted_mean"])
        for ti, tm, fm in zip(data.t, data.true_mean, data.fitted_mean):
            w.writerow([f"{ti:.17g}", f"{tm:.17g}", f"{fm:.17g}"])
