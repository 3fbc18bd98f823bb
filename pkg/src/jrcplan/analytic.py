"""Closed-form coverage and throughput for bistatic radar search.

Detection coverage probability against Poisson clutter, the general-shape
clutter expectation, the mean number of detectable users on a
constant-bistatic-range oval, and the resulting network throughput.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate

from .constants import C_LIGHT
from .geometry import (GeometryError, cassini_circumference, range_resolution,
                       require_cosite, resolution_cell_area)
from .model import ClutterModel, SystemConfig, TargetModel, beamwidth_from_duty


class NumericalError(RuntimeError):
    """A quadrature or inversion failed to reach its tolerance."""


@dataclass(frozen=True)
class CoverageReport:
    """Coverage probability split into its noise- and clutter-limited factors.

    The decay exponents are retained so that ratios of coverage values stay
    well defined even where the probabilities themselves underflow.
    """

    p_dc: float
    snr_term: float
    scr_term: float
    kappa: float
    epsilon: float
    snr_exponent: float = 0.0  # -ln(snr_term)
    scr_exponent: float = 0.0  # -ln(scr_term)

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_dc <= 1.0:
            raise ValueError("p_dc must lie in [0, 1]")
        if abs(self.p_dc - self.snr_term * self.scr_term) > 1e-12:
            raise ValueError("p_dc must equal snr_term * scr_term")

    @property
    def log_p_dc(self) -> float:
        return -(self.snr_exponent + self.scr_exponent)


@dataclass(frozen=True)
class ThroughputReport:
    """Network throughput with its detected-user count and coverage factor.

    upsilon factorizes exactly as eta * (1 - epsilon) * rate per user.
    """

    upsilon: float
    eta: float
    coverage: CoverageReport

    def __post_init__(self) -> None:
        if self.eta < 0.0:
            raise ValueError("eta must be >= 0")


def snr_decay_exponent(cfg: SystemConfig, tgt: TargetModel, kappa: float,
                       epsilon: float) -> float:
    """Noise-limited decay gamma*N_s*kappa^4 / (mean_rcs*P*G0*B0*eps*H0)."""
    if kappa <= 0.0:
        raise ValueError("kappa must be > 0")
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("epsilon must lie in (0, 1]")
    return (cfg.gamma * cfg.noise_ns * kappa**4
            / (tgt.mean_rcs_m * cfg.ptx * cfg.g0 * cfg.b0 * epsilon * cfg.h0))


def clutter_mismatch_mean(tgt: TargetModel, clut: ClutterModel,
                          gamma: float, rel_tol: float = 1e-9) -> float:
    """E[1 - exp(-gamma*sigma_c/mean_rcs_m)] under the clutter RCS law.

    Adaptive quadrature over the bulk of the distribution plus an analytic
    tail estimate; the tail mass is below exp(-32) of the total.
    """
    if gamma == 0.0:
        return 0.0
    t = gamma / tgt.mean_rcs_m
    scale = clut.weibull_scale
    upper = scale * 32.0 ** (1.0 / clut.weibull_alpha)

    def integrand(sigma: float) -> float:
        return -math.expm1(-t * sigma) * float(clut.pdf(sigma))

    val, err = integrate.quad(integrand, 0.0, upper, epsabs=0.0,
                              epsrel=min(rel_tol, 1e-10), limit=400,
                              points=[scale, 5.0 * scale])
    tail = math.exp(-32.0) * -math.expm1(-t * upper)
    total = val + tail
    if err > rel_tol * max(abs(total), 1e-300):
        raise NumericalError(
            f"clutter expectation quadrature stalled: estimate {total:g}, "
            f"error {err:g} above relative tolerance {rel_tol:g}")
    return total


def _in_cell_clutter_rate(cfg: SystemConfig, clut: ClutterModel, kappa: float,
                          epsilon: float) -> float:
    """Expected clutter count in the range-resolution cell, rho_c * A_c."""
    beam = beamwidth_from_duty(cfg, epsilon)
    area = resolution_cell_area(cfg.geometry, kappa, cfg.tau, beam)
    return clut.density_rho_c * area


def weibull_clutter_integral(cfg: SystemConfig, tgt: TargetModel,
                             clut: ClutterModel, kappa: float,
                             epsilon: float) -> float:
    """Clutter factor of the coverage probability by direct quadrature.

    Valid for any Weibull shape; the exponential case doubles as a check of
    the closed form used in coverage_probability.
    """
    rate = _in_cell_clutter_rate(cfg, clut, kappa, epsilon)
    return math.exp(-rate * clutter_mismatch_mean(tgt, clut, cfg.gamma))


def coverage_probability(cfg: SystemConfig, tgt: TargetModel,
                         clut: ClutterModel, kappa: float,
                         epsilon: float) -> CoverageReport:
    """Probability that a user at bistatic range kappa clears the SCNR bar.

    The clutter factor uses the closed exponential-shape form when the shape
    parameter is exactly 1 and numerical quadrature otherwise.
    """
    if epsilon == 0.0:
        raise ValueError("no search time")
    require_cosite(cfg.geometry, kappa)
    if kappa <= cfg.geometry.baseline_L:
        raise GeometryError("coverage model requires kappa > L")
    e_snr = snr_decay_exponent(cfg, tgt, kappa, epsilon)
    rate = _in_cell_clutter_rate(cfg, clut, kappa, epsilon)
    if clut.weibull_alpha == 1.0:
        gamma = cfg.gamma
        mismatch = gamma * clut.mean_rcs_c / (tgt.mean_rcs_m + gamma * clut.mean_rcs_c)
    else:
        mismatch = clutter_mismatch_mean(tgt, clut, cfg.gamma)
    e_scr = rate * mismatch
    return CoverageReport(
        p_dc=math.exp(-(e_snr + e_scr)),
        snr_term=math.exp(-e_snr),
        scr_term=math.exp(-e_scr),
        kappa=kappa,
        epsilon=epsilon,
        snr_exponent=e_snr,
        scr_exponent=e_scr,
    )


def monostatic_coverage(cfg: SystemConfig, tgt: TargetModel,
                        clut: ClutterModel, r_m: float,
                        epsilon: float) -> CoverageReport:
    """Coverage for the collapsed (zero-baseline) deployment at range r_m."""
    if r_m <= 0.0:
        raise ValueError("r_m must be > 0")
    e_snr = snr_decay_exponent(cfg, tgt, r_m, epsilon)
    gamma = cfg.gamma
    e_scr = (gamma * clut.density_rho_c * C_LIGHT * cfg.tau * r_m
             * clut.mean_rcs_c
             / (2.0 * cfg.b0 * epsilon * (tgt.mean_rcs_m + gamma * clut.mean_rcs_c)))
    return CoverageReport(
        p_dc=math.exp(-(e_snr + e_scr)),
        snr_term=math.exp(-e_snr),
        scr_term=math.exp(-e_scr),
        kappa=r_m,
        epsilon=epsilon,
        snr_exponent=e_snr,
        scr_exponent=e_scr,
    )


def mean_detected_users(cfg: SystemConfig, tgt: TargetModel, clut: ClutterModel,
                        kappa: float, epsilon: float,
                        exact_geometry: bool = False) -> float:
    """Mean number of users detectable on the kappa-oval per search frame.

    Coverage times the oval circumference times the user density times the
    range resolution.  exact_geometry swaps the closed-form circumference for
    the quadrature value to expose the geometric approximation error.
    """
    cov = coverage_probability(cfg, tgt, clut, kappa, epsilon)
    mode = "exact" if exact_geometry else "approximate"
    circumference = cassini_circumference(cfg.geometry, kappa, mode)
    delta_r = range_resolution(cfg.geometry, kappa, cfg.tau)
    return cov.p_dc * circumference * tgt.density_rho_m * delta_r


def network_throughput(cfg: SystemConfig, tgt: TargetModel, clut: ClutterModel,
                       kappa: float, epsilon: float,
                       exact_geometry: bool = False) -> ThroughputReport:
    """Throughput = detected users x service duty cycle x per-user rate."""
    cov = coverage_probability(cfg, tgt, clut, kappa, epsilon)
    mode = "exact" if exact_geometry else "approximate"
    circumference = cassini_circumference(cfg.geometry, kappa, mode)
    delta_r = range_resolution(cfg.geometry, kappa, cfg.tau)
    eta = cov.p_dc * circumference * tgt.density_rho_m * delta_r
    upsilon = eta * (1.0 - epsilon) * cfg.rate_D
    return ThroughputReport(upsilon=upsilon, eta=eta, coverage=cov)
