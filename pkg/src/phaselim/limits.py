"""Mutual-information proxies and measurement-count thresholds.

For a miss fraction ``alpha`` the sorted signal splits into the power a
decoder may miss and the power it must keep; the pairwise
mutual-information between the missed coordinates and one observation is
sandwiched between two closed forms (entropy-power below, reverse
entropy-power plus a max-entropy variance bound above). Dividing the
support-counting budget ``k * log(p/k)`` by those forms and maximizing over
``alpha`` yields the achievability threshold (enough measurements above)
and the converse threshold (failure below).

Everything here is leading-order in ``k -> infinity`` with
``log(p/k) -> infinity``; results carry a regime note saying so.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .densities import GaussianNoise, NoiseModel, golden_max
from .model import (DiscreteFlat, DiscreteGeneral, GaussianIID, SignalModel,
                    SortedSignal, floor_count, partition_powers)

__all__ = [
    "tail_power_fraction",
    "mi_pair_lower",
    "mi_pair_upper",
    "sorted_mi_lower",
    "sorted_mi_upper",
    "gaussian_mi_lower",
    "gaussian_mi_upper",
    "flat_mi_lower",
    "flat_mi_upper",
    "ThresholdQuery",
    "ThresholdResult",
    "ThresholdInfeasibleError",
    "measurement_thresholds",
    "snr_db",
    "c_beta_from_snr_db",
    "figure_curves",
    "write_figure_csv",
]

REGIME_NOTE = ("asymptotic regime: thresholds are leading-order as k and "
               "p/k grow; finite-size corrections are not modeled")

_HALF_LOG_PI_E_2 = 0.5 * math.log(math.pi * math.e / 2.0)


class ThresholdInfeasibleError(ValueError):
    """No finite measurement count: the missable power is zero somewhere on
    the optimization range (e.g. an all-zero signal)."""


def tail_power_fraction(alpha, nodes: int = 96):
    """Limiting fraction of total power in the weakest ``alpha`` fraction of
    i.i.d. complex Gaussian coefficients.

    Computed by Gauss-Legendre quadrature of the positive part
    ``max(alpha - F(u), 0)`` of the unit-mean exponential law ``F``; the
    integrand's support ends at ``-log(1 - alpha)``. Endpoints are exact:
    0 at 0 and 1 at 1.
    """
    a = np.asarray(alpha, dtype=float)
    if np.any(a < 0) or np.any(a > 1):
        raise ValueError("alpha must lie in [0, 1]")
    scalar = a.ndim == 0
    a = np.atleast_1d(a)
    out = np.zeros_like(a)
    out[a == 1.0] = 1.0
    inner = (a > 0.0) & (a < 1.0)
    if np.any(inner):
        ai = a[inner]
        top = -np.log1p(-ai)
        gx, gw = np.polynomial.legendre.leggauss(nodes)
        u = 0.5 * top[:, None] * (gx + 1.0)
        vals = ai[:, None] - 1.0 + np.exp(-u)
        out[inner] = 0.5 * top * np.sum(gw * vals, axis=1)
    return float(out[0]) if scalar else out


def mi_pair_lower(miss_power, noise: NoiseModel):
    """Entropy-power lower form ``0.5 log(1 + 4 v^2 / exp(2h))``."""
    v = np.asarray(miss_power, dtype=float)
    out = 0.5 * np.log1p(4.0 * v * v / noise.exp_2h())
    return float(out) if out.ndim == 0 else out


def mi_pair_upper(miss_power, keep_power, noise: NoiseModel):
    """Reverse-entropy-power upper form: max-entropy term, cross-power
    term, and the additive ``0.5 log(pi e / 2)`` gap."""
    v = np.asarray(miss_power, dtype=float)
    w = np.asarray(keep_power, dtype=float)
    e2h = noise.exp_2h()
    out = (_HALF_LOG_PI_E_2
           + 0.5 * np.log1p(2.0 * math.pi * math.e * v * v / e2h)
           + 0.5 * np.log1p(v * w / (v * v + e2h / (2.0 * math.pi * math.e))))
    return float(out) if out.ndim == 0 else out


def sorted_mi_lower(alpha, signal: SortedSignal, noise: NoiseModel,
                    mode: str = "floor"):
    split = partition_powers(signal, float(alpha), mode=mode)
    return mi_pair_lower(split.miss_power, noise)


def sorted_mi_upper(alpha, signal: SortedSignal, noise: NoiseModel,
                    mode: str = "floor"):
    split = partition_powers(signal, float(alpha), mode=mode)
    return mi_pair_upper(split.miss_power, split.keep_power, noise)


def gaussian_mi_lower(alpha, c_beta: float, noise: NoiseModel):
    """Limiting lower form for i.i.d. Gaussian coefficients of total power
    ``c_beta`` at miss fraction ``alpha``."""
    g = tail_power_fraction(alpha)
    return mi_pair_lower(c_beta * np.asarray(g), noise)


def gaussian_mi_upper(alpha, c_beta: float, noise: NoiseModel):
    g = np.asarray(tail_power_fraction(alpha))
    return mi_pair_upper(c_beta * g, c_beta * (1.0 - g), noise)


def flat_mi_lower(alpha, c_beta: float, noise: NoiseModel):
    """Large-k limit of the flat-signal lower form (missed power alpha*c)."""
    a = np.asarray(alpha, dtype=float)
    return mi_pair_lower(a * c_beta, noise)


def flat_mi_upper(alpha, c_beta: float, noise: NoiseModel):
    a = np.asarray(alpha, dtype=float)
    return mi_pair_upper(a * c_beta, (1.0 - a) * c_beta, noise)


@dataclass(frozen=True)
class ThresholdQuery:
    p: int
    k: int
    signal: SignalModel
    noise: NoiseModel = field(default_factory=GaussianNoise)
    alpha_star: float = 0.1
    mode: str = "floor"          # ignored for GaussianIID (always limiting)
    grid_step: float = 1e-3
    refine: bool = True

    def __post_init__(self):
        if not 0.0 < self.alpha_star < 1.0:
            raise ValueError("alpha_star must lie in (0, 1)")
        if self.k < 1 or self.p < self.k:
            raise ValueError("need 1 <= k <= p")
        if self.mode not in ("floor", "asymptotic"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if (self.mode == "floor"
                and not isinstance(self.signal, GaussianIID)
                and floor_count(self.alpha_star, self.k) < 1):
            raise ValueError("floor mode needs floor(alpha_star * k) >= 1")


@dataclass(frozen=True)
class ThresholdResult:
    n_ach: float
    n_con: float
    alpha_ach: float
    alpha_con: float
    n_ach_norm: float
    n_con_norm: float
    regime_note: str = REGIME_NOTE

    def to_dict(self) -> dict:
        return {
            "n_ach": self.n_ach,
            "n_con": self.n_con,
            "alpha_ach": self.alpha_ach,
            "alpha_con": self.alpha_con,
            "n_ach_norm": self.n_ach_norm,
            "n_con_norm": self.n_con_norm,
            "regime_note": self.regime_note,
        }


def _rate_pair(query: ThresholdQuery):
    """Vectorized (lower, upper) mutual-information forms over alpha."""
    sig = query.signal
    if isinstance(sig, GaussianIID):
        c = sig.c_beta
        return (lambda a: gaussian_mi_lower(a, c, query.noise),
                lambda a: gaussian_mi_upper(a, c, query.noise))
    if isinstance(sig, DiscreteFlat) and query.mode == "asymptotic":
        c = sig.c_beta
        return (lambda a: flat_mi_lower(a, c, query.noise),
                lambda a: flat_mi_upper(a, c, query.noise))
    if isinstance(sig, DiscreteFlat):
        sorted_sig = SortedSignal.flat(sig.c_beta, sig.k)
    elif isinstance(sig, DiscreteGeneral):
        sorted_sig = SortedSignal(np.asarray(sig.values, dtype=complex))
    else:
        raise TypeError(f"unknown signal model {type(sig).__name__}")

    def lower(a):
        a = np.atleast_1d(np.asarray(a, dtype=float))
        return np.array([sorted_mi_lower(ai, sorted_sig, query.noise, query.mode)
                         for ai in a])

    def upper(a):
        a = np.atleast_1d(np.asarray(a, dtype=float))
        return np.array([sorted_mi_upper(ai, sorted_sig, query.noise, query.mode)
                         for ai in a])

    return lower, upper


def _maximize_on_grid(objective, grid: np.ndarray, refine: bool):
    vals = objective(grid)
    i = int(np.argmax(vals))
    best_a, best_v = float(grid[i]), float(vals[i])
    if refine and 0 < i < grid.size - 1:
        a, v = golden_max(lambda t: float(objective(np.array([t]))[0]),
                          float(grid[i - 1]), float(grid[i + 1]), tol=1e-12)
        if v > best_v:
            best_a, best_v = float(a), float(v)
    return best_a, best_v


def _normalized_thresholds(lower_fn, upper_fn, alpha_star: float,
                           grid_step: float, refine: bool):
    grid = np.arange(alpha_star, 1.0, grid_step)
    if grid.size == 0 or grid[-1] < 1.0:
        grid = np.append(grid, 1.0)

    lo_vals = np.atleast_1d(np.asarray(lower_fn(grid), dtype=float))
    if np.any(lo_vals == 0.0):
        raise ThresholdInfeasibleError(
            "missable power vanishes on the optimization range")

    def ach(a):
        return np.asarray(a) / np.atleast_1d(np.asarray(lower_fn(a)))

    def con(a):
        return (np.asarray(a) - alpha_star) / np.atleast_1d(np.asarray(upper_fn(a)))

    a_ach, v_ach = _maximize_on_grid(ach, grid, refine)
    a_con, v_con = _maximize_on_grid(con, grid, refine)
    return v_ach, v_con, a_ach, a_con


def measurement_thresholds(query: ThresholdQuery) -> ThresholdResult:
    """Achievability and converse measurement counts for the query.

    ``n_ach``: above this count the decoder's miss fraction stays below
    ``alpha_star`` with vanishing error probability; ``n_con``: below it no
    decoder can. Both are grid maxima over ``alpha in [alpha_star, 1]``
    with golden-section refinement inside the best grid cell.
    """
    lower_fn, upper_fn = _rate_pair(query)
    v_ach, v_con, a_ach, a_con = _normalized_thresholds(
        lower_fn, upper_fn, query.alpha_star, query.grid_step, query.refine)
    budget = query.k * math.log(query.p / query.k)
    return ThresholdResult(
        n_ach=v_ach * budget,
        n_con=v_con * budget,
        alpha_ach=a_ach,
        alpha_con=a_con,
        n_ach_norm=v_ach,
        n_con_norm=v_con,
    )


def snr_db(signal: SignalModel, noise: GaussianNoise) -> float:
    """Caption convention: ``10 log10(2 * power^2 / sigma^2)`` where power
    is the (expected) total signal power. Base-10 decibels; the i.i.d.
    Gaussian model drops its vanishing ``1/k`` correction."""
    if isinstance(signal, (DiscreteFlat, GaussianIID)):
        c = signal.total_power
        snr = 2.0 * c * c / noise.sigma**2
    elif isinstance(signal, DiscreteGeneral):
        c = signal.total_power
        snr = 2.0 * c * c / noise.sigma**2
    else:
        raise TypeError(f"unknown signal model {type(signal).__name__}")
    return 10.0 * math.log10(snr)


def c_beta_from_snr_db(db: float, sigma: float = 1.0) -> float:
    """Inverse of :func:`snr_db` for the flat and Gaussian models."""
    return sigma * math.sqrt(10.0 ** (db / 10.0) / 2.0)


def figure_curves(alpha_star: float = 0.1, snr_db_values=None,
                  kinds=("flat", "gaussian"), sigma: float = 1.0,
                  grid_step: float = 1e-3) -> dict[str, np.ndarray]:
    """Normalized threshold curves versus SNR.

    Returns, per model kind, rows ``(snr_db, n_ach_norm, n_con_norm)``
    where the normalization divides out ``k * log(p/k)``. Curves use the
    limiting (asymptotic) forms, so they are size-free.
    """
    if snr_db_values is None:
        snr_db_values = np.arange(-10.0, 41.0, 1.0)
    snr_db_values = np.asarray(snr_db_values, dtype=float)
    noise = GaussianNoise(sigma)
    out: dict[str, np.ndarray] = {}
    for kind in kinds:
        rows = np.empty((snr_db_values.size, 3))
        for i, db in enumerate(snr_db_values):
            c = c_beta_from_snr_db(float(db), sigma)
            if kind == "flat":
                lo = lambda a: flat_mi_lower(a, c, noise)
                hi = lambda a: flat_mi_upper(a, c, noise)
            elif kind == "gaussian":
                lo = lambda a: gaussian_mi_lower(a, c, noise)
                hi = lambda a: gaussian_mi_upper(a, c, noise)
            else:
                raise ValueError(f"unknown curve kind {kind!r}")
            v_ach, v_con, _, _ = _normalized_thresholds(
                lo, hi, alpha_star, grid_step, refine=True)
            rows[i] = (db, v_ach, v_con)
        out[kind] = rows
    return out


def write_figure_csv(rows: np.ndarray, path) -> None:
    """``snr_db,n_ach_norm,n_con_norm`` CSV with 17 significant digits."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("snr_db,n_ach_norm,n_con_norm\n")
        for db, ach, con in rows:
            fh.write(f"{db:.17g},{ach:.17g},{con:.17g}\n")
