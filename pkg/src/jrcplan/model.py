"""System configuration and link-budget primitives.

Holds the scalar radar/channel constants of a deployment, target and clutter
statistics, the duty-cycle to beamwidth mapping, and the received signal,
clutter and noise powers that assemble into the SCNR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .constants import C_LIGHT, K_BOLTZMANN
from .geometry import TWO_PI, BistaticRanges, GeometryConfig

FOUR_PI_CUBED = (4.0 * math.pi) ** 3

_LAGUERRE_NODES, _LAGUERRE_WEIGHTS = np.polynomial.laguerre.laggauss(64)


class ConfigError(ValueError):
    """Invalid or unknown configuration input."""


@dataclass(frozen=True)
class SystemConfig:
    """Scalar radar/channel constants of one deployment.

    The wavelength carries no default on purpose: any number published from
    this toolkit must state the carrier it was computed for.
    """

    ptx: float                # transmit power, W
    g0: float                 # antenna gain constant, dimensionless
    wavelength: float         # carrier wavelength, m
    t_total: float            # frame duration T, s
    t_beam: float             # dwell per search beam, s
    tau: float                # pulse width, s (bandwidth = 1/tau)
    t_sys: float              # system noise temperature, K
    gamma: float              # SCNR detection threshold, linear, >= 0
    rate_D: float = 1.0       # served rate per detected user
    t_pri: float = 1e-6       # pulse repetition interval, s
    geometry: GeometryConfig = field(default_factory=GeometryConfig)

    def __post_init__(self) -> None:
        for name in ("ptx", "g0", "wavelength", "t_total", "t_beam", "tau",
                     "t_sys", "rate_D", "t_pri"):
            if getattr(self, name) <= 0.0:
                raise ConfigError(f"{name} must be > 0")
        if self.gamma < 0.0:
            raise ConfigError("gamma must be >= 0")
        if self.t_beam > self.t_total:
            raise ConfigError("t_beam cannot exceed t_total")

    @property
    def bw(self) -> float:
        """Waveform bandwidth, Hz."""
        return 1.0 / self.tau

    @property
    def h0(self) -> float:
        """Two-way propagation constant, wavelength^2 / (4*pi)^3."""
        return self.wavelength * self.wavelength / FOUR_PI_CUBED

    @property
    def b0(self) -> float:
        """Beam-budget constant T / (Omega * T_beam), 1/rad."""
        return self.t_total / (self.geometry.search_space_Omega * self.t_beam)

    @property
    def noise_ns(self) -> float:
        """Receiver noise power K_B * T_sys * BW, W."""
        return K_BOLTZMANN * self.t_sys * self.bw

    def derived(self) -> "DerivedConstants":
        return DerivedConstants(h0=self.h0, b0=self.b0, noise_Ns=self.noise_ns)


@dataclass(frozen=True)
class DerivedConstants:
    """Derived channel constants, recomputed from a SystemConfig on demand."""

    h0: float        # m^2
    b0: float        # 1/rad
    noise_Ns: float  # W


@dataclass(frozen=True)
class TargetModel:
    """Mobile-user statistics: fluctuating RCS mean and spatial density."""

    mean_rcs_m: float      # m^2, exponential (single dominant scatterer) RCS
    density_rho_m: float   # users per m^2

    def __post_init__(self) -> None:
        if self.mean_rcs_m <= 0.0 or self.density_rho_m <= 0.0:
            raise ConfigError("target RCS mean and density must be > 0")


@dataclass(frozen=True)
class ClutterModel:
    """Discrete-clutter statistics: Weibull RCS and spatial density."""

    mean_rcs_c: float          # m^2
    density_rho_c: float       # scatterers per m^2
    weibull_alpha: float = 1.0  # shape; 1 = exponential, 2 = Rayleigh

    def __post_init__(self) -> None:
        if self.mean_rcs_c <= 0.0 or self.density_rho_c <= 0.0:
            raise ConfigError("clutter RCS mean and density must be > 0")
        if not 0.5 <= self.weibull_alpha <= 4.0:
            raise ConfigError("weibull_alpha outside the supported band [0.5, 4]")

    @property
    def weibull_scale(self) -> float:
        """Scale chosen so the distribution mean equals mean_rcs_c."""
        return self.mean_rcs_c / math.gamma(1.0 + 1.0 / self.weibull_alpha)

    def pdf(self, sigma):
        """RCS probability density."""
        a = self.weibull_alpha
        s = self.weibull_scale
        z = np.asarray(sigma, dtype=float) / s
        return (a / s) * z ** (a - 1.0) * np.exp(-(z ** a))

    def laplace(self, t):
        """E[exp(-t * sigma_c)]; closed form for the exponential case."""
        t_arr = np.asarray(t, dtype=float)
        if self.weibull_alpha == 1.0:
            out = 1.0 / (1.0 + t_arr * self.mean_rcs_c)
        else:
            sig = self.weibull_scale * _LAGUERRE_NODES ** (1.0 / self.weibull_alpha)
            out = np.exp(-np.multiply.outer(t_arr, sig)) @ _LAGUERRE_WEIGHTS
        return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out


def beamwidth_from_duty(cfg: SystemConfig, epsilon: float) -> float:
    """Search beamwidth for an explore duty cycle: Omega*T_beam/(epsilon*T).

    A larger duty cycle buys more, narrower beams within the frame.
    """
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("epsilon must lie in (0, 1]")
    beamwidth = 1.0 / (cfg.b0 * epsilon)
    if beamwidth > cfg.geometry.search_space_Omega * (1.0 + 1e-12):
        raise ValueError("duty cycle too small to form even one beam")
    return beamwidth


def signal_power(cfg: SystemConfig, kappa: float, epsilon: float,
                 sigma_m: float) -> float:
    """Received target return P*G0*B0*eps*sigma*H0/kappa^4 (two-way LOS)."""
    if kappa <= 0.0:
        raise ValueError("kappa must be > 0")
    if sigma_m < 0.0:
        raise ValueError("sigma_m must be >= 0")
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("epsilon must lie in (0, 1]")
    return cfg.ptx * cfg.g0 * cfg.b0 * epsilon * sigma_m * cfg.h0 / kappa**4


def clutter_power(cfg: SystemConfig,
                  clut_points: Iterable[tuple[BistaticRanges, float]],
                  epsilon: float) -> float:
    """Sum of in-cell clutter returns, each with its own exact path loss."""
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("epsilon must lie in (0, 1]")
    gain = cfg.ptx * cfg.g0 * cfg.b0 * epsilon * cfg.h0
    total = 0.0
    for ranges, sigma_c in clut_points:
        if sigma_c < 0.0:
            raise ValueError("sigma_c must be >= 0")
        total += gain * sigma_c / ranges.kappa**4
    return total


def scnr(cfg: SystemConfig, signal: float, clutter: float) -> float:
    """Signal to clutter-and-noise ratio; the noise floor keeps it finite."""
    if signal < 0.0 or clutter < 0.0:
        raise ValueError("signal and clutter powers must be >= 0")
    return signal / (clutter + cfg.noise_ns)


def calibrate_wavelength(cfg: SystemConfig, tgt: TargetModel, kappa: float,
                         epsilon: float, coverage_target: float) -> float:
    """Wavelength at which the clutter-free coverage factor at (kappa, epsilon)
    equals coverage_target.  Useful to place curve knees at a chosen range
    when the carrier is a free design parameter."""
    if not 0.0 < coverage_target < 1.0:
        raise ValueError("coverage_target must lie in (0, 1)")
    decay = -math.log(coverage_target)
    lam_sq = (FOUR_PI_CUBED * cfg.gamma * cfg.noise_ns * kappa**4
              / (tgt.mean_rcs_m * cfg.ptx * cfg.g0 * cfg.b0 * epsilon * decay))
    return math.sqrt(lam_sq)


# --- scenario bundling and config-file ingestion -----------------------------

@dataclass(frozen=True)
class Scenario:
    """One fully specified deployment: system, target, clutter, region size."""

    system: SystemConfig
    target: TargetModel
    clutter: ClutterModel
    half_extent: float = 100.0  # simulation region is [-E, E]^2

    def __post_init__(self) -> None:
        if self.half_extent <= 0.0:
            raise ConfigError("half_extent must be > 0")


# Reference deployment values; wavelength must always be supplied explicitly.
REFERENCE_DEFAULTS: dict[str, float] = {
    "ptx": 1e-3,
    "g0": 1.0,
    "t_total": 1.0,
    "t_beam": 5e-3,
    "tau": 1e-9,
    "t_sys": 300.0,
    "gamma": 1.0,
    "rate_D": 1.0,
    "t_pri": 1e-6,
    "baseline_L": 5.0,
    "search_space_Omega": TWO_PI,
    "mean_rcs_m": 1.0,
    "density_rho_m": 1e-4,
    "mean_rcs_c": 1.0,
    "density_rho_c": 0.01,
    "weibull_alpha": 1.0,
    "half_extent": 100.0,
}

_SYSTEM_KEYS = ("ptx", "g0", "wavelength", "t_total", "t_beam", "tau",
                "t_sys", "gamma", "rate_D", "t_pri")
_GEOMETRY_KEYS = ("baseline_L", "search_space_Omega")
_TARGET_KEYS = ("mean_rcs_m", "density_rho_m")
_CLUTTER_KEYS = ("mean_rcs_c", "density_rho_c", "weibull_alpha")
_ALL_KEYS = frozenset(_SYSTEM_KEYS + _GEOMETRY_KEYS + _TARGET_KEYS
                      + _CLUTTER_KEYS + ("half_extent",))


def default_scenario(wavelength: float, **overrides: float) -> Scenario:
    """Reference deployment with the given carrier; overrides by config key."""
    values = dict(REFERENCE_DEFAULTS)
    values["wavelength"] = wavelength
    for key, val in overrides.items():
        if key not in _ALL_KEYS:
            raise ConfigError(f"unknown configuration key {key!r}")
        values[key] = float(val)
    geometry = GeometryConfig(
        baseline_L=values["baseline_L"],
        search_space_Omega=values["search_space_Omega"],
    )
    system = SystemConfig(
        geometry=geometry,
        **{k: values[k] for k in _SYSTEM_KEYS},
    )
    target = TargetModel(**{k: values[k] for k in _TARGET_KEYS})
    clutter = ClutterModel(**{k: values[k] for k in _CLUTTER_KEYS})
    return Scenario(system=system, target=target, clutter=clutter,
                    half_extent=values["half_extent"])


def scenario_overrides(scenario: Scenario, **overrides: float) -> Scenario:
    """New scenario with some config keys replaced (same key set as files)."""
    values = scenario_to_mapping(scenario)
    values.update({k: float(v) for k, v in overrides.items()})
    unknown = set(overrides) - _ALL_KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    return default_scenario(**values)


def scenario_to_mapping(scenario: Scenario) -> dict[str, float]:
    """Flat key/value snapshot of a scenario (inverse of default_scenario)."""
    sys_cfg, geom = scenario.system, scenario.system.geometry
    out = {k: getattr(sys_cfg, k) for k in _SYSTEM_KEYS}
    out.update({k: getattr(geom, k) for k in _GEOMETRY_KEYS})
    out.update({k: getattr(scenario.target, k) for k in _TARGET_KEYS})
    out.update({k: getattr(scenario.clutter, k) for k in _CLUTTER_KEYS})
    out["half_extent"] = scenario.half_extent
    return out


def _parse_value(key: str, raw: str) -> float:
    raw = raw.strip()
    if key == "gamma" and raw.lower().endswith("db"):
        # dB input accepted only for the detection threshold
        return 10.0 ** (float(raw[:-2].strip()) / 10.0)
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"value for {key!r} is not a number: {raw!r}") from exc


def parse_config_text(text: str) -> dict[str, float]:
    """Parse flat 'key = value' lines; '#' starts a comment.

    Unknown or repeated keys are hard errors; gamma accepts a 'dB' suffix.
    """
    values: dict[str, float] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _ALL_KEYS:
            raise ConfigError(f"line {lineno}: unknown configuration key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _parse_value(key, raw)
    return values


def load_config(path: str) -> Scenario:
    """Load a scenario from a flat config file; wavelength is mandatory."""
    with open(path, "r", encoding="utf-8") as handle:
        values = parse_config_text(handle.read())
    if "wavelength" not in values:
        raise ConfigError("config must state the wavelength explicitly")
    return default_scenario(**values)
