"""Monte Carlo and grid verification of the package's analytic claims.

Each check returns :class:`VerificationReport` records that are
self-certifying: the verdict is a pure function of the stored fields
(estimate, standard error, bounds, resolution), so a reader can recompute
it from the report alone. Pass means the estimate sits inside
``[lower - 3 se, upper + 3 se]``; a run whose standard error exceeds the
configured resolution (or whose sampler clamped too often) is declared
inconclusive rather than pass or fail.

All randomness flows through seeded substreams keyed by the battery index,
so report bytes are identical across runs and across thread counts.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .densities import (ConditionalOutputLaw, GaussianNoise, NoiseModel,
                        concentration_constant, concentration_tail_bound,
                        info_density)
from .limits import mi_pair_lower, mi_pair_upper, tail_power_fraction
from .model import GaussianIID, SortedSignal, floor_count, sample_signal_vector
from .rng import parallel_map, sample_circular_gaussian, substream

__all__ = [
    "VerificationReport",
    "mi_estimate",
    "sandwich_check",
    "concentration_check",
    "tail_fraction_convergence_check",
    "logconcavity_check",
    "logconcavity_negative_control",
    "run_suite",
    "SUITE_NAMES",
    "DEFAULT_SANDWICH_BATTERY",
    "DEFAULT_LOGCONCAVITY_BATTERY",
]

# (miss_power, keep_power, sigma); full 3 x 2 x 2 grid.
DEFAULT_SANDWICH_BATTERY = tuple(
    (vd, ve, sg) for vd in (0.5, 1.0, 2.0) for ve in (0.0, 1.0) for sg in (0.5, 1.0)
)

# (known_sq, fresh_power, sigma) triples for the curvature scan.
DEFAULT_LOGCONCAVITY_BATTERY = (
    (0.0, 1.0, 1.0),
    (4.0, 0.5, 1.0),
    (1.0, 1.0, 0.5),
    (2.0, 2.0, 1.0),
    (0.0, 2.0, 0.5),
    (6.0, 1.0, 1.0),
)

SUITE_NAMES = ("sandwich", "concentration", "gconv", "logconcavity", "all",
               "negative-control")


@dataclass(frozen=True)
class VerificationReport:
    check: str
    params: dict
    estimate: float
    se: float
    lower: float | None   # None means unbounded below
    upper: float | None   # None means unbounded above
    trials: int
    verdict: str

    @staticmethod
    def decide(estimate: float, se: float, lower: float | None,
               upper: float | None, resolution: float | None = None,
               forced_inconclusive: bool = False) -> str:
        if forced_inconclusive:
            return "inconclusive"
        if resolution is not None and se > resolution:
            return "inconclusive"
        lo = -math.inf if lower is None else lower - 3.0 * se
        hi = math.inf if upper is None else upper + 3.0 * se
        return "pass" if lo <= estimate <= hi else "fail"

    def recompute_verdict(self) -> str:
        """Re-derive the verdict from stored fields (self-certification)."""
        return self.decide(self.estimate, self.se, self.lower, self.upper,
                           self.params.get("resolution"),
                           bool(self.params.get("forced_inconclusive", False)))

    def to_json_line(self) -> str:
        rec = {
            "check": self.check,
            "params": self.params,
            "estimate": self.estimate,
            "se": self.se,
            "lower": self.lower,
            "upper": self.upper,
            "trials": self.trials,
            "verdict": self.verdict,
        }
        return json.dumps(rec, sort_keys=True, separators=(",", ":"))


def _finalize(check: str, params: dict, estimate: float, se: float,
              lower: float | None, upper: float | None, trials: int,
              resolution: float | None = None,
              forced_inconclusive: bool = False) -> VerificationReport:
    params = dict(params)
    if resolution is not None:
        params["resolution"] = resolution
    if forced_inconclusive:
        params["forced_inconclusive"] = True
    verdict = VerificationReport.decide(estimate, se, lower, upper,
                                        resolution, forced_inconclusive)
    return VerificationReport(check=check, params=params, estimate=estimate,
                              se=se, lower=lower, upper=upper, trials=trials,
                              verdict=verdict)


def _draw_info_samples(miss_power: float, keep_power: float,
                       noise: NoiseModel, trials: int,
                       rng: np.random.Generator, nodes: int = 80):
    """Sample per-observation information densities under the pair model."""
    w_keep = sample_circular_gaussian(rng, trials)
    w_miss = sample_circular_gaussian(rng, trials)
    z = noise.sample(rng, trials)
    proj_keep = math.sqrt(keep_power) * w_keep
    proj_full = proj_keep + math.sqrt(miss_power) * w_miss
    full_sq = np.abs(proj_full) ** 2
    y = full_sq + z
    vals, n_clamped = info_density(y, full_sq, np.abs(proj_keep) ** 2,
                                   miss_power, noise, nodes=nodes)
    return vals, n_clamped


def mi_estimate(miss_power: float, keep_power: float, noise: NoiseModel,
                trials: int, rng: np.random.Generator,
                resolution: float = 0.01, max_clamp_fraction: float = 1e-3,
                nodes: int = 80) -> VerificationReport:
    """Monte Carlo mutual-information estimate checked against the
    analytic sandwich for the same power split."""
    vals, n_clamped = _draw_info_samples(miss_power, keep_power, noise,
                                         trials, rng, nodes=nodes)
    estimate = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(trials)) if trials > 1 else math.inf
    lower = float(mi_pair_lower(miss_power, noise))
    upper = float(mi_pair_upper(miss_power, keep_power, noise))
    params = {
        "miss_power": miss_power,
        "keep_power": keep_power,
        "sigma": getattr(noise, "sigma", None),
        "n_clamped": n_clamped,
    }
    forced = (n_clamped / max(trials, 1)) > max_clamp_fraction
    return _finalize("mi_sandwich", params, estimate, se, lower, upper,
                     trials, resolution=resolution, forced_inconclusive=forced)


def sandwich_check(battery=None, trials: int = 100000, master_seed: int = 0,
                   threads: int = 1, resolution: float = 0.01,
                   nodes: int = 80) -> list[VerificationReport]:
    """Run :func:`mi_estimate` over the (miss, keep, sigma) battery.

    Combo ``i`` draws from substream ``(master_seed, i)``, so results do
    not depend on the thread count or completion order.
    """
    battery = DEFAULT_SANDWICH_BATTERY if battery is None else tuple(battery)

    def one(idx_combo):
        idx, (miss, keep, sigma) = idx_combo
        return mi_estimate(miss, keep, GaussianNoise(sigma), trials,
                           substream(master_seed, idx),
                           resolution=resolution, nodes=nodes)

    return parallel_map(one, list(enumerate(battery)), threads)


def concentration_check(miss_power: float = 1.0, keep_power: float = 0.0,
                        sigma: float = 1.0, n: int = 20,
                        mu_values=(0.0, 0.01, 0.02, 0.05),
                        trials: int = 10000, info_samples: int = 1000000,
                        master_seed: int = 0, nodes: int = 80,
                        rel_se_limit: float = 3e-3) -> list[VerificationReport]:
    """Empirical two-sided tails of the summed information density against
    the analytic bound ``exp(-n C r(mu)) + exp(-n C r(-mu))``.

    The centering constant is a high-precision Monte Carlo run whose
    standard error must stay below ``rel_se_limit`` of the estimate, else
    every report is marked inconclusive. The bound's scale constant is
    deliberately conservative, so large slack is the expected outcome.
    """
    noise = GaussianNoise(sigma)
    total = miss_power + keep_power
    consts = concentration_constant(total, noise)

    vals, _ = _draw_info_samples(miss_power, keep_power, noise,
                                 info_samples, substream(master_seed, 0),
                                 nodes=nodes)
    info_mean = float(np.mean(vals))
    info_se = float(np.std(vals, ddof=1) / math.sqrt(info_samples))
    centering_bad = not (info_se <= rel_se_limit * abs(info_mean))

    draw_rng = substream(master_seed, 1)
    block, _ = _draw_info_samples(miss_power, keep_power, noise,
                                  trials * n, draw_rng, nodes=nodes)
    sums = block.reshape(trials, n).sum(axis=1)
    centered = sums - n * info_mean

    base_params = {
        "miss_power": miss_power,
        "keep_power": keep_power,
        "sigma": sigma,
        "n": n,
        "scale": consts.scale,
        "moment": consts.moment,
        "info_mean": info_mean,
        "info_se": info_se,
    }
    reports = []
    for mu in mu_values:
        deviation = 2.0 * n * consts.scale * mu
        bound = concentration_tail_bound(n, consts.scale, mu)
        for side, hit in (("lower", centered <= -deviation),
                          ("upper", centered >= deviation)):
            p_hat = float(np.mean(hit))
            se = math.sqrt(p_hat * (1.0 - p_hat) / trials)
            params = dict(base_params, mu=mu, side=side)
            reports.append(_finalize(
                "concentration_tail", params, p_hat, se, None,
                float(bound), trials, forced_inconclusive=centering_bad))
    return reports


def tail_fraction_convergence_check(c_beta: float = 1.0, k: int = 10000,
                                    n_seeds: int = 20, alpha_step: float = 0.01,
                                    master_seed: int = 0, threads: int = 1,
                                    tol_scale: float = 5.0) -> list[VerificationReport]:
    """Sorted-prefix power sums of one Gaussian draw versus the limiting
    fraction curve, uniformly over the alpha grid, one report per seed.

    The tolerance ``tol_scale / sqrt(k)`` tracks the root-k fluctuation
    scale of the empirical sorted sums.
    """
    alphas = np.arange(0.0, 1.0 + alpha_step / 2, alpha_step)
    alphas = np.clip(alphas, 0.0, 1.0)
    limit = c_beta * np.asarray(tail_power_fraction(alphas))
    counts = np.array([floor_count(a, k) for a in alphas])
    tol = tol_scale / math.sqrt(k)

    def one(seed_idx):
        beta = sample_signal_vector(GaussianIID(c_beta, k),
                                    substream(master_seed, seed_idx))
        prefix = SortedSignal(beta).prefix
        dev = np.abs(prefix[counts] - limit) / c_beta
        return _finalize(
            "tail_fraction_convergence",
            {"seed_index": seed_idx, "k": k, "c_beta": c_beta,
             "alpha_step": alpha_step},
            float(np.max(dev)), 0.0, None, tol, trials=1)

    return parallel_map(one, list(range(n_seeds)), threads)


def _second_difference_scan(logpdf, center: float, sigma: float,
                            step_scale: float, points: int) -> float:
    """Max second difference of a log density on a centered grid."""
    step = step_scale * sigma
    ys = center + step * (np.arange(points) - (points - 1) / 2.0)
    lp = np.asarray(logpdf(ys), dtype=float)
    d2 = lp[2:] - 2.0 * lp[1:-1] + lp[:-2]
    return float(np.max(d2))


def logconcavity_check(battery=None, step_scale: float = 0.01,
                       points: int = 2001, tol: float = 1e-6,
                       nodes: int = 80) -> list[VerificationReport]:
    """Second-difference log-concavity scan of the conditional output law
    over its bulk (grid centered at the mean, spanning ten noise widths)."""
    battery = DEFAULT_LOGCONCAVITY_BATTERY if battery is None else tuple(battery)
    reports = []
    for known_sq, fresh, sigma in battery:
        law = ConditionalOutputLaw(known_sq, fresh, GaussianNoise(sigma),
                                   nodes=nodes)
        est = _second_difference_scan(law.logpdf, known_sq + fresh, sigma,
                                      step_scale, points)
        reports.append(_finalize(
            "logconcavity",
            {"known_sq": known_sq, "fresh_power": fresh, "sigma": sigma,
             "step_scale": step_scale, "points": points},
            est, 0.0, None, tol, trials=points))
    return reports


def logconcavity_negative_control(sigma: float = 1.0, separation: float = 8.0,
                                  step_scale: float = 0.01,
                                  points: int = 2001,
                                  tol: float = 1e-6) -> VerificationReport:
    """Deliberately bimodal mixture; the scan must fail on it.

    A correct curvature test rejects the equal mixture of two unit-weight
    Gaussians ``separation`` apart, whose log density is convex between
    the modes.
    """
    mu2 = separation * sigma

    def logpdf(y):
        y = np.asarray(y, dtype=float)
        a = -(y ** 2) / (2 * sigma ** 2)
        b = -((y - mu2) ** 2) / (2 * sigma ** 2)
        return logsumexp(np.stack([a, b]), axis=0) + math.log(0.5) \
            - 0.5 * math.log(2 * math.pi * sigma ** 2)

    est = _second_difference_scan(logpdf, mu2 / 2.0, sigma, step_scale, points)
    return _finalize(
        "logconcavity_negative_control",
        {"sigma": sigma, "separation": separation, "step_scale": step_scale,
         "points": points},
        est, 0.0, None, tol, trials=points)


def run_suite(suite: str, trials: int = 100000, master_seed: int = 0,
              threads: int = 1) -> list[VerificationReport]:
    """Dispatch a named verification suite with scaled sample budgets.

    ``trials`` is the sandwich budget; the concentration suite uses a tenth
    of it for tail trials and ten times it for the centering run.
    """
    if suite == "sandwich":
        return sandwich_check(trials=trials, master_seed=master_seed,
                              threads=threads)
    if suite == "concentration":
        return concentration_check(trials=max(trials // 10, 1),
                                   info_samples=max(trials * 10, 10),
                                   master_seed=master_seed)
    if suite == "gconv":
        return tail_fraction_convergence_check(master_seed=master_seed,
                                               threads=threads)
    if suite == "logconcavity":
        return logconcavity_check()
    if suite == "all":
        out = []
        for name in ("sandwich", "concentration", "gconv", "logconcavity"):
            out.extend(run_suite(name, trials=trials, master_seed=master_seed,
                                 threads=threads))
        return out
    if suite == "negative-control":
        return [logconcavity_negative_control()]
    raise ValueError(f"unknown suite {suite!r}; choose from {SUITE_NAMES}")
