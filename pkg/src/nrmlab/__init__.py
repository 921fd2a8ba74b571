"""nrmlab: online admission control for quantity-based network revenue
management, with LP benchmarks and Monte Carlo regret experiments."""

from .errors import (
    NrmlabError, InstanceError, WindowError, LpError, PolicyError, ConfigError,
)
from .model import (
    Instance, ArrivalPath, ScaledFamily, make_instance, validate_instance,
    sample_path, arrival_counts, derive_seed, gen_single_resource,
    gen_multi_resource, instance_to_json, instance_from_json,
)
from .lp import (
    BoxLp, LpSolution, solve_box_lp, solve_dlp, dlp_per_period,
    solve_rate_dlp, solve_hindsight, lagrangian_value, perturb_revenues,
)
from .ogd import (
    OgdConfig, DualState, OgdRegretResult, theta_bar, ogd_constants,
    make_ogd_config, step_size, bid_price_decision, dual_step,
    ogd_regret_oracle,
)
from .policies import (
    Window, CapacityLedger, DecisionLog, PolicyTrace, FdParams,
    ThresholdClasses, RestartSchedule, fd_default_params, classify_types,
    restart_schedule, run_ff, run_fd, run_lpt, run_restart, run_hybrid,
)
from .sim import (
    PolicySpec, RegretReport, AuditResult, simulate, regret_samples,
    estimate_regret, audit_trace, concentration_probe,
)

__version__ = "0.1.0"

__all__ = [
    "NrmlabError", "InstanceError", "WindowError", "LpError", "PolicyError",
    "ConfigError",
    "Instance", "ArrivalPath", "ScaledFamily", "make_instance",
    "validate_instance", "sample_path", "arrival_counts", "derive_seed",
    "gen_single_resource", "gen_multi_resource", "instance_to_json",
    "instance_from_json",
    "BoxLp", "LpSolution", "solve_box_lp", "solve_dlp", "dlp_per_period",
    "solve_rate_dlp", "solve_hindsight", "lagrangian_value",
    "perturb_revenues",
    "OgdConfig", "DualState", "OgdRegretResult", "theta_bar",
    "ogd_constants", "make_ogd_config", "step_size", "bid_price_decision",
    "dual_step", "ogd_regret_oracle",
    "Window", "CapacityLedger", "DecisionLog", "PolicyTrace", "FdParams",
    "ThresholdClasses", "RestartSchedule", "fd_default_params",
    "classify_types", "restart_schedule", "run_ff", "run_fd", "run_lpt",
    "run_restart", "run_hybrid",
    "PolicySpec", "RegretReport", "AuditResult", "simulate",
    "regret_samples", "estimate_regret", "audit_trace",
    "concentration_probe",
    "__version__",
]
