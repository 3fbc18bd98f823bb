"""Bistatic radar geometry.

Constant-bistatic-range (Cassini) ovals, bistatic angles, range-resolution
cells and the unambiguous range set by the pulse repetition interval.

Coordinate convention: the transmitting base station (BS) sits at (-L/2, 0)
and the passive receiver (RX) at (+L/2, 0); polar coordinates are measured
from the midpoint origin.  All operations are pure and thread-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate

from .constants import C_LIGHT

TWO_PI = 2.0 * math.pi


class GeometryError(ValueError):
    """Input lies outside the geometric domain of an operation."""


@dataclass(frozen=True)
class GeometryConfig:
    """Deployment geometry: baseline length and scanned azimuth extent."""

    baseline_L: float = 0.0             # metres between BS and RX
    search_space_Omega: float = TWO_PI  # radians of azimuth searched

    def __post_init__(self) -> None:
        if self.baseline_L < 0.0:
            raise ValueError("baseline_L must be >= 0")
        if not 0.0 < self.search_space_Omega <= TWO_PI * (1.0 + 1e-12):
            raise ValueError("search_space_Omega must lie in (0, 2*pi]")

    @property
    def bs_xy(self) -> tuple[float, float]:
        return (-0.5 * self.baseline_L, 0.0)

    @property
    def rx_xy(self) -> tuple[float, float]:
        return (+0.5 * self.baseline_L, 0.0)


@dataclass(frozen=True)
class PolarPoint:
    """Scatterer position: range from the origin, azimuth folded to [0, 2*pi)."""

    r: float
    theta: float

    def __post_init__(self) -> None:
        if self.r < 0.0:
            raise ValueError("r must be >= 0")
        object.__setattr__(self, "theta", self.theta % TWO_PI)

    @property
    def x(self) -> float:
        return self.r * math.cos(self.theta)

    @property
    def y(self) -> float:
        return self.r * math.sin(self.theta)


@dataclass(frozen=True)
class BistaticRanges:
    """One-way ranges to both sites, their geometric mean, and the bistatic
    angle subtended at the scatterer."""

    r_tx: float   # metres to BS
    r_rx: float   # metres to RX
    kappa: float  # sqrt(r_tx * r_rx)
    beta: float   # radians in [0, pi)

    def __post_init__(self) -> None:
        prod = self.r_tx * self.r_rx
        if prod > 0.0 and abs(self.kappa * self.kappa - prod) > 1e-12 * prod:
            raise ValueError("kappa must equal sqrt(r_tx * r_rx)")
        if not 0.0 <= self.beta < math.pi:
            raise ValueError("beta must lie in [0, pi)")


def ranges_from_point(cfg: GeometryConfig, p: PolarPoint) -> BistaticRanges:
    """Exact one-way ranges and bistatic angle for a scatterer position.

    The angle is obtained from the law of cosines at the scatterer, never
    from the small-baseline approximation.
    """
    half = 0.5 * cfg.baseline_L
    x, y = p.x, p.y
    r_tx = math.hypot(x + half, y)
    r_rx = math.hypot(x - half, y)
    if r_tx == 0.0 or r_rx == 0.0:
        raise GeometryError("degenerate geometry: point coincides with a site")
    kappa = math.sqrt(r_tx * r_rx)
    cos_beta = (r_tx * r_tx + r_rx * r_rx - cfg.baseline_L**2) / (2.0 * r_tx * r_rx)
    beta = math.acos(min(1.0, max(-1.0, cos_beta)))
    return BistaticRanges(r_tx=r_tx, r_rx=r_rx, kappa=kappa, beta=beta)


def max_bistatic_angle(cfg: GeometryConfig, kappa: float) -> float:
    """Largest bistatic angle on the kappa-oval, small-baseline regime.

    Uses sin(beta_max) ~ L/kappa, valid for kappa > L.
    """
    if kappa <= cfg.baseline_L:
        raise GeometryError("outside approximation domain: requires kappa > L")
    return math.asin(cfg.baseline_L / kappa)


def require_cosite(cfg: GeometryConfig, kappa: float) -> None:
    """Single connected oval requires 2*kappa > L."""
    if 2.0 * kappa <= cfg.baseline_L:
        raise GeometryError("oval splits into two lobes (non-cosite: 2*kappa <= L)")


def cassini_radius(cfg: GeometryConfig, kappa: float, theta: float) -> float:
    """Radius of the constant-kappa oval at azimuth theta.

    Solves (r^2 + L^2/4)^2 - r^2 L^2 cos^2(theta) = kappa^4 for the unique
    positive root of the quadratic in r^2 (cosite regime only).
    """
    require_cosite(cfg, kappa)
    L2 = cfg.baseline_L * cfg.baseline_L
    disc = kappa**4 - (L2 * L2 / 16.0) * math.sin(2.0 * theta) ** 2
    r2 = 0.25 * L2 * math.cos(2.0 * theta) + math.sqrt(disc)
    return math.sqrt(r2)


def cassini_circumference(cfg: GeometryConfig, kappa: float,
                          mode: str = "approximate") -> float:
    """Circumference of the kappa-oval, as the polar integral of r(theta).

    mode="exact" integrates r(theta) d(theta) over a full turn by adaptive
    quadrature (relative tolerance 1e-8).  mode="approximate" returns the
    closed form 2*pi*kappa - 3*pi*L^2/(8*kappa), which requires kappa > L
    and overestimates the shrinkage of tight ovals; both agree to <1% only
    for kappa above roughly 4.3*L.
    """
    require_cosite(cfg, kappa)
    if mode == "approximate":
        if kappa <= cfg.baseline_L:
            raise GeometryError("approximate circumference requires kappa > L")
        L = cfg.baseline_L
        return TWO_PI * kappa - 3.0 * math.pi * L * L / (8.0 * kappa)
    if mode == "exact":
        val, err = integrate.quad(
            lambda th: cassini_radius(cfg, kappa, th),
            0.0, TWO_PI, epsabs=0.0, epsrel=1e-10, limit=400,
        )
        if err > 1e-8 * abs(val):
            raise GeometryError(f"circumference quadrature error {err:g} too large")
        return val
    raise ValueError(f"unknown circumference mode {mode!r}")


def resolution_cell_area(cfg: GeometryConfig, kappa: float,
                         pulse_width_tau: float, beamwidth: float) -> float:
    """Area of the range-resolution cell at bistatic range kappa.

    c * tau * kappa^2 * beamwidth / (kappa + sqrt(kappa^2 - L^2)), i.e. the
    range-limited cell with the largest-angle approximation folded in.
    """
    if kappa <= cfg.baseline_L:
        raise GeometryError("resolution cell requires kappa > L")
    if pulse_width_tau <= 0.0 or beamwidth <= 0.0:
        raise ValueError("pulse width and beamwidth must be > 0")
    L = cfg.baseline_L
    return (C_LIGHT * pulse_width_tau * kappa * kappa * beamwidth
            / (kappa + math.sqrt(kappa * kappa - L * L)))


def range_resolution(cfg: GeometryConfig, kappa: float,
                     pulse_width_tau: float) -> float:
    """Bistatic range resolution c*tau / (2*cos(beta_max/2)).

    cos(beta_max/2) evaluates exactly to sqrt(1 - L^2/(4*kappa^2)) for the
    largest bistatic angle on the oval.
    """
    if pulse_width_tau <= 0.0:
        raise ValueError("pulse width must be > 0")
    L = cfg.baseline_L
    arg = 1.0 - L * L / (4.0 * kappa * kappa) if kappa > 0.0 else 0.0
    if arg <= 0.0:
        raise GeometryError("range resolution requires 2*kappa > L")
    return C_LIGHT * pulse_width_tau / (2.0 * math.sqrt(arg))


def max_unambiguous_kappa(cfg: GeometryConfig, t_pri: float) -> float:
    """Largest unambiguous bistatic range for a pulse repetition interval.

    The two-way path c*t_pri bounds r_tx + r_rx; the bound is met where the
    bistatic angle closes (cos(beta)=1), giving 0.5*sqrt((c*t_pri)^2 - L^2).
    """
    if t_pri <= 0.0:
        raise ValueError("t_pri must be > 0")
    ct = C_LIGHT * t_pri
    L = cfg.baseline_L
    if ct <= L:
        raise GeometryError("PRI too short for baseline")
    return 0.5 * math.sqrt(ct * ct - L * L)
