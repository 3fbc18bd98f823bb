"""Planning and validation toolkit for joint radar-communication networks.

Computes radar detection coverage and communication throughput for bistatic
and monostatic deployments, optimizes the explore/exploit duty cycle,
bandwidth, transmit power trade-offs and pulse repetition interval in closed
form, and validates every analytical result against a built-in Poisson
point process Monte Carlo simulator and a reliability meta-distribution.
"""

__version__ = "0.1.0"

from .geometry import (BistaticRanges, GeometryConfig, GeometryError,
                       PolarPoint, cassini_circumference, cassini_radius,
                       max_bistatic_angle, max_unambiguous_kappa,
                       range_resolution, ranges_from_point,
                       resolution_cell_area)
from .model import (ClutterModel, ConfigError, DerivedConstants, Scenario,
                    SystemConfig, TargetModel, beamwidth_from_duty,
                    calibrate_wavelength, clutter_power, default_scenario,
                    load_config, scenario_overrides, signal_power, scnr)
from .analytic import (CoverageReport, NumericalError, ThroughputReport,
                       coverage_probability, mean_detected_users,
                       monostatic_coverage, network_throughput,
                       weibull_clutter_integral)
from .optimize import (DutyCycleSolution, coverage_at_max_range,
                       optimal_bandwidth, optimal_duty_cycle, optimal_pri,
                       throughput_vs_pri)
from .montecarlo import (ClutterRealization, EmpiricalEstimate, SimRegion,
                         TrialOutcome, draw_clutter, draw_target,
                         estimate_pdc, estimate_throughput, in_cell_test,
                         run_trial)
from .metadist import (MetaDistCurve, MomentRequest, conditional_pdc,
                       invert_gil_pelaez, metadist_curve, moment,
                       poisson_mixture_ccdf, reliability_ceiling)
