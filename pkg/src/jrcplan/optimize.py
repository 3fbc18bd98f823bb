"""Closed-form resource optimizers with numeric-argmax verification.

Optimal explore duty cycle, waveform bandwidth and pulse repetition interval
for maximum network throughput, each paired with an independent grid-plus-
golden-section search over the same objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .constants import C_LIGHT, K_BOLTZMANN
from .geometry import (cassini_circumference, max_unambiguous_kappa,
                       range_resolution)
from .analytic import (CoverageReport, _in_cell_clutter_rate,
                       clutter_mismatch_mean, snr_decay_exponent)
from .model import ClutterModel, SystemConfig, TargetModel

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_argmax(f: Callable[[float], float], lo: float, hi: float,
                  tol: float = 1e-9, grid: int = 64,
                  log_spacing: bool = False) -> float:
    """Maximizer of a unimodal function on [lo, hi].

    A coarse grid scan brackets the peak, then golden-section search narrows
    the bracket to width tol.  With log_spacing the search runs in log(x) and
    tol is relative.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    if log_spacing:
        if lo <= 0.0:
            raise ValueError("log spacing needs lo > 0")
        g = lambda u: f(math.exp(u))
        u = golden_argmax(g, math.log(lo), math.log(hi), tol=tol, grid=grid)
        return math.exp(u)

    xs = np.linspace(lo, hi, grid)
    vals = np.array([f(x) for x in xs])
    k = int(np.argmax(vals))
    a = xs[max(k - 1, 0)]
    b = xs[min(k + 1, grid - 1)]

    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = f(x1)
    return 0.5 * (a + b)


@dataclass(frozen=True)
class DutyCycleSolution:
    """Optimal explore duty cycle with its verification argmax.

    decay_a is the positive throughput decay constant: the coverage exponent
    scales as exp(-decay_a / epsilon).
    """

    epsilon_star: float
    decay_a: float
    amplitude_A0: float
    upsilon_at_star: float
    epsilon_numeric: float

    def __post_init__(self) -> None:
        if not 0.0 < self.epsilon_star < 1.0:
            raise ValueError("epsilon_star must lie in (0, 1)")


def decay_constant(cfg: SystemConfig, tgt: TargetModel, clut: ClutterModel,
                   kappa: float) -> float:
    """Duty-cycle-normalized coverage decay: the exponent at epsilon = 1."""
    e_snr = snr_decay_exponent(cfg, tgt, kappa, 1.0)
    rate = _in_cell_clutter_rate(cfg, clut, kappa, 1.0)
    if clut.weibull_alpha == 1.0:
        mismatch = (cfg.gamma * clut.mean_rcs_c
                    / (tgt.mean_rcs_m + cfg.gamma * clut.mean_rcs_c))
    else:
        mismatch = clutter_mismatch_mean(tgt, clut, cfg.gamma)
    return e_snr + rate * mismatch


def throughput_amplitude(cfg: SystemConfig, tgt: TargetModel,
                         kappa: float) -> float:
    """Duty-cycle-independent throughput prefactor for the kappa-oval."""
    circumference = cassini_circumference(cfg.geometry, kappa, "approximate")
    delta_r = range_resolution(cfg.geometry, kappa, cfg.tau)
    return circumference * tgt.density_rho_m * delta_r * cfg.rate_D


def optimal_duty_cycle(cfg: SystemConfig, tgt: TargetModel, clut: ClutterModel,
                       kappa: float) -> DutyCycleSolution:
    """Closed-form maximizer of A0 * exp(-a/eps) * (1 - eps) over (0, 1).

    Setting the derivative to zero gives eps* = (sqrt(a^2 + 4a) - a) / 2.
    """
    a = decay_constant(cfg, tgt, clut, kappa)
    if a <= 0.0:
        raise ValueError("degenerate: throughput maximized at epsilon -> 0")
    eps_star = 0.5 * (math.sqrt(a * a + 4.0 * a) - a)
    amplitude = throughput_amplitude(cfg, tgt, kappa)

    def upsilon(eps: float) -> float:
        return amplitude * math.exp(-a / eps) * (1.0 - eps)

    eps_numeric = golden_argmax(upsilon, 1e-9, 1.0 - 1e-12, tol=1e-10)
    return DutyCycleSolution(
        epsilon_star=eps_star,
        decay_a=a,
        amplitude_A0=amplitude,
        upsilon_at_star=upsilon(eps_star),
        epsilon_numeric=eps_numeric,
    )


def coverage_exponent_vs_bw(cfg: SystemConfig, tgt: TargetModel,
                            clut: ClutterModel, kappa: float,
                            bw: float) -> float:
    """Total coverage decay exponent with the pulse width tied to 1/bw.

    The noise floor grows linearly with bandwidth while the clutter cell
    shrinks as 1/bw; the duty cycle scales both and drops out of the argmax.
    """
    if bw <= 0.0:
        raise ValueError("bw must be > 0")
    L = cfg.geometry.baseline_L
    gamma = cfg.gamma
    noise = (gamma * K_BOLTZMANN * cfg.t_sys * bw * kappa**4
             / (tgt.mean_rcs_m * cfg.ptx * cfg.g0 * cfg.b0 * cfg.h0))
    clutter = (gamma * clut.density_rho_c * C_LIGHT * clut.mean_rcs_c * kappa**2
               / (bw * cfg.b0 * (kappa + math.sqrt(kappa**2 - L**2))
                  * (tgt.mean_rcs_m + gamma * clut.mean_rcs_c)))
    return noise + clutter


def optimal_bandwidth(cfg: SystemConfig, tgt: TargetModel, clut: ClutterModel,
                      kappa: float) -> float:
    """Bandwidth balancing noise growth against clutter-cell shrinkage."""
    L = cfg.geometry.baseline_L
    if kappa <= L:
        raise ValueError("requires kappa > L")
    gamma = cfg.gamma
    num = (clut.density_rho_c * C_LIGHT * clut.mean_rcs_c * tgt.mean_rcs_m
           * cfg.ptx * cfg.g0 * cfg.h0)
    den = (kappa**2 * K_BOLTZMANN * cfg.t_sys
           * (kappa + math.sqrt(kappa**2 - L**2))
           * (tgt.mean_rcs_m + gamma * clut.mean_rcs_c))
    return math.sqrt(num / den)


def optimal_bandwidth_numeric(cfg: SystemConfig, tgt: TargetModel,
                              clut: ClutterModel, kappa: float) -> float:
    """Grid + golden-section argmax of the coverage exponent over bandwidth."""
    return golden_argmax(
        lambda bw: -coverage_exponent_vs_bw(cfg, tgt, clut, kappa, bw),
        1.0, 1e18, tol=1e-12, grid=256, log_spacing=True,
    )


def throughput_vs_pri(cfg: SystemConfig, tgt: TargetModel, clut: ClutterModel,
                      epsilon: float, t_pri: float) -> float:
    """Clutter-limited throughput at the unambiguous-range limit.

    Of the form x * exp(-k*x) in the repetition interval: longer intervals
    admit more users but degrade detection at the edge of the sweep.
    """
    if t_pri <= 0.0:
        raise ValueError("t_pri must be > 0")
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("epsilon must lie in (0, 1]")
    gamma = cfg.gamma
    decay = (gamma * clut.density_rho_c * clut.mean_rcs_c * C_LIGHT**2
             * cfg.tau * t_pri
             / (4.0 * cfg.b0 * epsilon * (tgt.mean_rcs_m + gamma * clut.mean_rcs_c)))
    envelope = (0.5 * math.pi * C_LIGHT**2 * cfg.tau * t_pri
                * tgt.density_rho_m * (1.0 - epsilon) * cfg.rate_D)
    return math.exp(-decay) * envelope


def optimal_pri(cfg: SystemConfig, tgt: TargetModel, clut: ClutterModel,
                epsilon: float) -> float:
    """Closed-form repetition interval maximizing the clutter-limited sweep."""
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("epsilon must lie in (0, 1]")
    gamma = cfg.gamma
    return (4.0 * cfg.b0 * epsilon * (tgt.mean_rcs_m + gamma * clut.mean_rcs_c)
            / (gamma * clut.density_rho_c * clut.mean_rcs_c * C_LIGHT**2 * cfg.tau))


def optimal_pri_numeric(cfg: SystemConfig, tgt: TargetModel, clut: ClutterModel,
                        epsilon: float) -> float:
    """Grid + golden-section argmax of throughput_vs_pri."""
    return golden_argmax(
        lambda t: throughput_vs_pri(cfg, tgt, clut, epsilon, t),
        1e-12, 1e3, tol=1e-12, grid=256, log_spacing=True,
    )


def coverage_at_max_range(cfg: SystemConfig, tgt: TargetModel,
                          clut: ClutterModel, epsilon: float,
                          t_pri: float) -> CoverageReport:
    """Coverage at the unambiguous-range edge set by the repetition interval.

    Uses the wide-sweep closed form; agrees with the full expression at the
    same kappa once the sweep dwarfs the baseline.
    """
    kappa_max = max_unambiguous_kappa(cfg.geometry, t_pri)
    L = cfg.geometry.baseline_L
    ct_sq = (C_LIGHT * t_pri) ** 2 - L * L
    gamma = cfg.gamma
    e_snr = (gamma * cfg.noise_ns * ct_sq**2
             / (16.0 * tgt.mean_rcs_m * cfg.ptx * cfg.g0 * cfg.b0 * epsilon
                * cfg.h0))
    e_scr = (gamma * clut.density_rho_c * C_LIGHT * cfg.tau * clut.mean_rcs_c
             * math.sqrt(ct_sq)
             / (4.0 * cfg.b0 * epsilon * (tgt.mean_rcs_m + gamma * clut.mean_rcs_c)))
    return CoverageReport(
        p_dc=math.exp(-(e_snr + e_scr)),
        snr_term=math.exp(-e_snr),
        scr_term=math.exp(-e_scr),
        kappa=kappa_max,
        epsilon=epsilon,
        snr_exponent=e_snr,
        scr_exponent=e_scr,
    )
