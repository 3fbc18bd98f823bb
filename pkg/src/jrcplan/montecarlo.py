"""Monte Carlo validation of the coverage and throughput closed forms.

Each trial draws one user on the constant-bistatic-range oval and a Poisson
field of clutter scatterers over the region of interest, keeps the clutter
falling inside the user's range-resolution cell, forms the SCNR with exact
per-scatterer path loss and thresholds it.

Determinism contract: trial i of a run seeded with s draws from the Philox
substream keyed (s, i), so estimates are bit-identical for any execution
order or degree of parallelism.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .geometry import (GeometryError, PolarPoint, cassini_radius,
                       cassini_circumference, range_resolution, require_cosite)
from .model import (ClutterModel, Scenario, SystemConfig, TargetModel,
                    beamwidth_from_duty, scnr, signal_power)

_WILSON_Z = 1.959963984540054  # two-sided 95%


@dataclass(frozen=True)
class SimRegion:
    """Square region of interest [-E, E]^2 populated by clutter."""

    half_extent: float = 100.0

    def __post_init__(self) -> None:
        if self.half_extent <= 0.0:
            raise ValueError("half_extent must be > 0")

    @property
    def area(self) -> float:
        return 4.0 * self.half_extent * self.half_extent


@dataclass(frozen=True)
class ClutterRealization:
    """One draw of the clutter field: positions and cross-sections."""

    xy: np.ndarray            # (n, 2) Cartesian positions
    sigma: np.ndarray         # (n,) cross-sections, m^2
    model: ClutterModel
    region: SimRegion

    def __post_init__(self) -> None:
        if self.xy.shape != (self.sigma.size, 2):
            raise ValueError("positions and cross-sections disagree in length")
        if self.sigma.size and (np.abs(self.xy) > self.region.half_extent).any():
            raise ValueError("clutter point outside the region")
        if self.sigma.size and (self.sigma <= 0.0).any():
            raise ValueError("clutter cross-sections must be > 0")

    def __len__(self) -> int:
        return int(self.sigma.size)

    @property
    def points(self) -> list[tuple[PolarPoint, float]]:
        out = []
        for (x, y), sig in zip(self.xy, self.sigma):
            out.append((PolarPoint(r=math.hypot(x, y),
                                   theta=math.atan2(y, x)), float(sig)))
        return out


@dataclass(frozen=True)
class TrialOutcome:
    """Result of a single detection trial."""

    detected: bool
    scnr_value: float
    in_cell_clutter_count: int
    target_position: PolarPoint
    target_sigma: float


@dataclass(frozen=True)
class EmpiricalEstimate:
    """Sample mean with a 95% Wilson interval, reproducible from its seed."""

    mean: float
    ci95_low: float
    ci95_high: float
    n_trials: int
    seed: int

    def __post_init__(self) -> None:
        if not self.ci95_low <= self.mean <= self.ci95_high:
            raise ValueError("interval must bracket the mean")


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Counter-based substream for one trial; independent across trials."""
    key = np.array([seed, trial], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def wilson_interval(successes: int, n: int, z: float = _WILSON_Z) -> tuple[float, float]:
    """95% score interval for a binomial proportion."""
    if n <= 0:
        raise ValueError("n must be > 0")
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2.0 * n)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n)) / denom
    # rounding can pinch the exact endpoints at phat = 0 or 1
    return min(max(center - half, 0.0), phat), max(min(center + half, 1.0), phat)


def draw_clutter(region: SimRegion, clut: ClutterModel,
                 rng_stream: np.random.Generator) -> ClutterRealization:
    """Poisson clutter field: uniform positions, Weibull cross-sections."""
    count = int(rng_stream.poisson(clut.density_rho_c * region.area))
    xy = rng_stream.uniform(-region.half_extent, region.half_extent,
                            size=(count, 2))
    sigma = clut.weibull_scale * rng_stream.weibull(clut.weibull_alpha,
                                                    size=count)
    return ClutterRealization(xy=xy, sigma=sigma, model=clut, region=region)


def largest_oval_radius(cfg: SystemConfig, kappa: float) -> float:
    """Greatest origin distance on the kappa-oval (attained on the x-axis)."""
    L = cfg.geometry.baseline_L
    return math.sqrt(kappa * kappa + 0.25 * L * L)


def check_oval_fits(cfg: SystemConfig, region: SimRegion, kappa: float) -> None:
    """Reject configurations whose oval (plus a resolution cell) leaves the
    region rather than silently truncating the clutter statistics."""
    margin = range_resolution(cfg.geometry, kappa, cfg.tau)
    if largest_oval_radius(cfg, kappa) + margin > region.half_extent:
        raise GeometryError(
            f"kappa={kappa:g} oval exceeds the simulation region "
            f"(half_extent={region.half_extent:g})")


def draw_target(region: SimRegion, tgt: TargetModel, kappa: float,
                cfg: SystemConfig,
                rng_stream: np.random.Generator) -> tuple[PolarPoint, float]:
    """User at a uniform azimuth on the kappa-oval with exponential RCS."""
    require_cosite(cfg.geometry, kappa)
    check_oval_fits(cfg, region, kappa)
    theta = rng_stream.uniform(0.0, 2.0 * math.pi)
    r = cassini_radius(cfg.geometry, kappa, theta)
    sigma_m = rng_stream.exponential(tgt.mean_rcs_m)
    return PolarPoint(r=r, theta=theta), sigma_m


def _cell_mask(cfg: SystemConfig, target: PolarPoint, xy: np.ndarray,
               epsilon: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """In-cell membership for an array of positions.

    A point shares the user's cell when its azimuth from the BS falls inside
    the beam and its two-way path agrees with the user's within the range
    resolution.  Returns the mask and the per-point one-way ranges.
    """
    half = 0.5 * cfg.geometry.baseline_L
    tx, ty = target.x, target.y
    r_tx_m = math.hypot(tx + half, ty)
    r_rx_m = math.hypot(tx - half, ty)
    kappa_m = math.sqrt(r_tx_m * r_rx_m)
    sum_m = r_tx_m + r_rx_m
    az_m = math.atan2(ty, tx + half)

    beam = beamwidth_from_duty(cfg, epsilon)
    delta_r = range_resolution(cfg.geometry, kappa_m, cfg.tau)

    x = xy[:, 0]
    y = xy[:, 1]
    r_tx_c = np.hypot(x + half, y)
    r_rx_c = np.hypot(x - half, y)
    az_c = np.arctan2(y, x + half)
    daz = (az_c - az_m + math.pi) % (2.0 * math.pi) - math.pi
    mask = (np.abs(daz) <= 0.5 * beam) & \
           (np.abs((r_tx_c + r_rx_c) - sum_m) <= delta_r)
    return mask, r_tx_c, r_rx_c


def in_cell_test(cfg: SystemConfig, target: PolarPoint,
                 clutter_point: PolarPoint, epsilon: float) -> bool:
    """Whether a clutter point is indistinguishable from the user in
    beam azimuth and two-way delay."""
    xy = np.array([[clutter_point.x, clutter_point.y]])
    mask, _, _ = _cell_mask(cfg, target, xy, epsilon)
    return bool(mask[0])


def run_trial(cfg: SystemConfig, tgt: TargetModel, clut: ClutterModel,
              region: SimRegion, kappa: float, epsilon: float,
              rng_stream: np.random.Generator) -> TrialOutcome:
    """One detection trial: draw, filter to the cell, threshold the SCNR."""
    target, sigma_m = draw_target(region, tgt, kappa, cfg, rng_stream)
    realization = draw_clutter(region, clut, rng_stream)

    mask, r_tx_c, r_rx_c = _cell_mask(cfg, target, realization.xy, epsilon)
    idx = np.flatnonzero(mask)

    gain = cfg.ptx * cfg.g0 * cfg.b0 * epsilon * cfg.h0
    kappa_c_sq = r_tx_c[idx] * r_rx_c[idx]
    clutter = float(np.sum(gain * realization.sigma[idx] / kappa_c_sq**2))

    signal = signal_power(cfg, kappa, epsilon, sigma_m)
    value = scnr(cfg, signal, clutter)
    return TrialOutcome(
        detected=bool(value >= cfg.gamma),
        scnr_value=value,
        in_cell_clutter_count=int(idx.size),
        target_position=target,
        target_sigma=sigma_m,
    )


def _detection_counts(cfg, tgt, clut, region, kappa, epsilon, seed,
                      trials: range) -> int:
    hits = 0
    for i in trials:
        outcome = run_trial(cfg, tgt, clut, region, kappa, epsilon,
                            trial_rng(seed, i))
        hits += outcome.detected
    return hits


def estimate_pdc(cfg: SystemConfig, tgt: TargetModel, clut: ClutterModel,
                 region: SimRegion, kappa: float, epsilon: float,
                 n_trials: int, seed: int,
                 workers: int = 1) -> EmpiricalEstimate:
    """Detection rate over independent trials with a 95% Wilson interval.

    The per-trial substreams make the count an order-independent sum, so the
    result does not depend on the worker count.
    """
    if n_trials < 100:
        raise ValueError("n_trials must be >= 100")
    check_oval_fits(cfg, region, kappa)
    if workers <= 1:
        hits = _detection_counts(cfg, tgt, clut, region, kappa, epsilon,
                                 seed, range(n_trials))
    else:
        chunks = [range(k, n_trials, workers) for k in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(
                lambda chunk: _detection_counts(cfg, tgt, clut, region, kappa,
                                                epsilon, seed, chunk),
                chunks)
        hits = sum(parts)
    lo, hi = wilson_interval(hits, n_trials)
    return EmpiricalEstimate(mean=hits / n_trials, ci95_low=lo, ci95_high=hi,
                             n_trials=n_trials, seed=seed)


def estimate_throughput(cfg: SystemConfig, tgt: TargetModel, clut: ClutterModel,
                        region: SimRegion, kappa: float, epsilon: float,
                        n_trials: int, seed: int,
                        workers: int = 1) -> EmpiricalEstimate:
    """Empirical throughput: detection rate scaled by the oval geometry,
    user density, service duty cycle and per-user rate."""
    pdc = estimate_pdc(cfg, tgt, clut, region, kappa, epsilon, n_trials, seed,
                       workers=workers)
    circumference = cassini_circumference(cfg.geometry, kappa, "approximate")
    delta_r = range_resolution(cfg.geometry, kappa, cfg.tau)
    factor = (circumference * tgt.density_rho_m * delta_r
              * (1.0 - epsilon) * cfg.rate_D)
    return EmpiricalEstimate(
        mean=pdc.mean * factor,
        ci95_low=pdc.ci95_low * factor,
        ci95_high=pdc.ci95_high * factor,
        n_trials=n_trials,
        seed=seed,
    )


def region_for(scenario: Scenario) -> SimRegion:
    return SimRegion(half_extent=scenario.half_extent)
