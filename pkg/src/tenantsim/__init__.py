"""Deterministic discrete-event simulator for multi-tenant serverless
platforms, with explicit attacker/victim workloads and security metrics."""

from .adversary import AttackSpec, AttackedWorkload, victim_rate
from .config import ConfigError, ExperimentConfig, RunSpec, expand, parse_config, resolve
from .engine import EventEngine, EventKind, SimReport
from .metrics import MetricsCollector, RunMetrics, coloc_probability
from .platform import PlacementOutcome, PlatformState, ResourceVector
from .runner import Simulation, execute, run_experiment, write_csv
from .schedulers import eligible, make_scheduler
from .workloads import ArrivalGenerator, InvocationRecord, Role, ServiceTimeSpec, WorkloadSpec

__version__ = "0.1.0"

__all__ = [
    "AttackSpec", "AttackedWorkload", "victim_rate",
    "ConfigError", "ExperimentConfig", "RunSpec", "expand", "parse_config", "resolve",
    "EventEngine", "EventKind", "SimReport",
    "MetricsCollector", "RunMetrics", "coloc_probability",
    "PlacementOutcome", "PlatformState", "ResourceVector",
    "Simulation", "execute", "run_experiment", "write_csv",
    "eligible", "make_scheduler",
    "ArrivalGenerator", "InvocationRecord", "Role", "ServiceTimeSpec", "WorkloadSpec",
    "__version__",
]
