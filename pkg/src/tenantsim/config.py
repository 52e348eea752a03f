"""Experiment configuration: a flat `key = value` text format with dotted
keys, `#` comments and comma lists, plus sweep expansion into run specs.

Unknown keys are rejected and every diagnostic carries the offending line
number. `sweep.<key> = a,b,c` turns any numeric scalar key into a sweep
axis; the cartesian product runs axes in declaration order (first axis
outermost), then schedulers, then seeds innermost.
"""

import itertools
import re
from dataclasses import dataclass, field
from typing import Optional

from .adversary import AttackSpec
from .platform import ResourceVector
from .schedulers import SCHEDULER_NAMES
from .workloads import ServiceTimeSpec, WorkloadSpec


class ConfigError(Exception):
    pass


_WORKLOAD_KINDS = ("uniform", "poisson", "bursty")
_SERVICE_KINDS = ("fixed", "exponential")

# key -> (type tag, default); None default means the key must appear when used
_SCALAR_KEYS = {
    "platform.num_workers": ("int", 8),
    "platform.cpu": ("float", 8.0),
    "platform.memory": ("float", 8.0),
    "platform.storage": ("float", 0.0),
    "platform.idle_timeout": ("float", 60.0),
    "platform.cold_start_latency": ("float", 10.0),
    "platform.queue_limit": ("int", 10),
    "platform.prewarm.count": ("int", 0),
    "platform.prewarm.tenant": ("int", 0),
    "platform.prewarm.function": ("int", 0),
    "function.cpu": ("float", 1.0),
    "function.memory": ("float", 1.0),
    "function.storage": ("float", 0.0),
    "workload.kind": ("choice:workload", "poisson"),
    "workload.rate": ("float", None),
    "workload.interval": ("float", None),
    "workload.low_rate": ("float", None),
    "workload.high_rate": ("float", None),
    "workload.phase_length": ("float", None),
    "workload.total": ("int", None),
    "workload.tenants": ("int", None),
    "workload.functions_per_tenant": ("int", None),
    "workload.batch": ("int", 1000),
    "service.kind": ("choice:service", "fixed"),
    "service.mean": ("float", None),
    "attack.enabled": ("bool", False),
    "attack.intensity": ("float", 1.0),
    "attack.pattern": ("choice:workload", "poisson"),
    "attack.victim_tenant": ("int", 0),
    "attack.service_kind": ("choice:service", None),   # defaults to service.kind
    "attack.service_mean": ("float", None),            # defaults to service.mean
    "scheduler.recency_window": ("float", None),       # defaults to idle timeout
    "trace": ("bool", False),
}

_REQUIRED = (
    "scheduler",
    "seeds",
    "workload.total",
    "workload.tenants",
    "workload.functions_per_tenant",
    "service.mean",
)

_WORKER_OVERRIDE = re.compile(r"^platform\.worker\.(\d+)\.(cpu|memory|storage)$")


def _parse_scalar(key, text, lineno, where):
    tag = _SCALAR_KEYS[key][0]
    try:
        if tag == "int":
            return int(text)
        if tag == "float":
            return float(text)
        if tag == "bool":
            low = text.lower()
            if low in ("true", "yes", "1"):
                return True
            if low in ("false", "no", "0"):
                return False
            raise ValueError(text)
        if tag == "choice:workload":
            if text not in _WORKLOAD_KINDS:
                raise ValueError(text)
            return text
        if tag == "choice:service":
            if text not in _SERVICE_KINDS:
                raise ValueError(text)
            return text
    except ValueError:
        raise ConfigError(
            f"{where}:{lineno}: invalid {tag} value {text!r} for key {key!r}"
        ) from None
    raise AssertionError(tag)


@dataclass
class ExperimentConfig:
    name: str
    values: dict
    worker_overrides: dict          # worker id -> {"cpu"/"memory"/"storage": float}
    schedulers: list
    seeds: list
    victim_functions: Optional[tuple]
    sweep: list                     # [(key, [value, ...])], declaration order
    output: Optional[str] = None
    trace: bool = False


@dataclass(frozen=True)
class RunSpec:
    ordinal: int
    scheduler: str
    seed: int
    overrides: tuple = ()           # ((key, value), ...) from sweep axes


@dataclass
class ResolvedRun:
    """One run's fully concrete parameters."""
    scheduler: str
    seed: int
    num_workers: int
    capacities: list
    footprint: ResourceVector
    idle_timeout: float
    cold_start_latency: float
    queue_limit: int
    prewarm: tuple                  # (tenant, function, count)
    workload: WorkloadSpec
    service: ServiceTimeSpec
    attack: Optional[AttackSpec]
    recency_window: float
    trace: bool = False


def parse_config(text, name="<config>"):
    values = {}
    worker_overrides = {}
    schedulers = None
    seeds = None
    victim_functions = None
    sweep = []
    output = None
    seen = {}

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{name}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if not val:
            raise ConfigError(f"{name}:{lineno}: empty value for key {key!r}")
        if key in seen:
            raise ConfigError(
                f"{name}:{lineno}: duplicate key {key!r} (first set on line {seen[key]})"
            )
        seen[key] = lineno

        if key == "scheduler":
            schedulers = [s.strip() for s in val.split(",")]
            for s in schedulers:
                if s not in SCHEDULER_NAMES:
                    raise ConfigError(
                        f"{name}:{lineno}: unknown scheduler {s!r} "
                        f"(expected one of {', '.join(SCHEDULER_NAMES)})"
                    )
        elif key == "seeds":
            try:
                seeds = [int(s.strip()) for s in val.split(",")]
            except ValueError:
                raise ConfigError(f"{name}:{lineno}: seeds must be integers") from None
            if len(set(seeds)) != len(seeds):
                raise ConfigError(f"{name}:{lineno}: seeds must be distinct")
        elif key == "attack.victim_functions":
            try:
                victim_functions = tuple(int(s.strip()) for s in val.split(","))
            except ValueError:
                raise ConfigError(
                    f"{name}:{lineno}: attack.victim_functions must be integers"
                ) from None
        elif key == "output":
            output = val
        elif key.startswith("sweep."):
            target = key[len("sweep."):]
            if target not in _SCALAR_KEYS or _SCALAR_KEYS[target][0] not in ("int", "float"):
                raise ConfigError(
                    f"{name}:{lineno}: {target!r} is not a sweepable numeric key"
                )
            axis = [_parse_scalar(target, v.strip(), lineno, name) for v in val.split(",")]
            if not axis:
                raise ConfigError(f"{name}:{lineno}: empty sweep axis")
            sweep.append((target, axis))
        elif key in _SCALAR_KEYS:
            values[key] = _parse_scalar(key, val, lineno, name)
        else:
            m = _WORKER_OVERRIDE.match(key)
            if m:
                wid, comp = int(m.group(1)), m.group(2)
                try:
                    worker_overrides.setdefault(wid, {})[comp] = float(val)
                except ValueError:
                    raise ConfigError(
                        f"{name}:{lineno}: invalid float value {val!r} for {key!r}"
                    ) from None
            else:
                raise ConfigError(f"{name}:{lineno}: unknown key {key!r}")

    for req in _REQUIRED:
        present = {
            "scheduler": schedulers is not None,
            "seeds": seeds is not None,
        }.get(req, req in values)
        if not present:
            raise ConfigError(f"{name}: missing required key {req!r}")

    for key, (_tag, default) in _SCALAR_KEYS.items():
        values.setdefault(key, default)

    cfg = ExperimentConfig(
        name=name,
        values=values,
        worker_overrides=worker_overrides,
        schedulers=schedulers,
        seeds=seeds,
        victim_functions=victim_functions,
        sweep=sweep,
        output=output,
        trace=values["trace"],
    )
    _validate(cfg)
    return cfg


def _validate(cfg):
    v = dict(cfg.values)
    # apply one value per sweep axis so the static checks cover swept keys too
    for key, axis in cfg.sweep:
        v[key] = axis[0]
    _validate_values(cfg, v)
    for key, axis in cfg.sweep:
        for val in axis:
            probe = dict(v)
            probe[key] = val
            _validate_values(cfg, probe)


def _validate_values(cfg, v):
    def bad(msg):
        raise ConfigError(f"{cfg.name}: {msg}")

    if v["platform.num_workers"] < 1:
        bad("platform.num_workers must be >= 1")
    if v["platform.queue_limit"] < 0:
        bad("platform.queue_limit must be >= 0")
    if v["platform.idle_timeout"] <= 0:
        bad("platform.idle_timeout must be > 0")
    if v["platform.cold_start_latency"] < 0:
        bad("platform.cold_start_latency must be >= 0")
    if v["workload.total"] < 1 or v["workload.tenants"] < 1 \
            or v["workload.functions_per_tenant"] < 1:
        bad("workload.total, workload.tenants and workload.functions_per_tenant "
            "must be >= 1")
    if v["service.mean"] <= 0:
        bad("service.mean must be > 0")
    kind = v["workload.kind"]
    if kind == "poisson":
        if v["workload.rate"] is None:
            bad("workload.rate is required for poisson workloads")
        elif v["workload.rate"] <= 0:
            bad("workload.rate must be > 0")
    elif kind == "uniform":
        if v["workload.interval"] is None:
            bad("workload.interval is required for uniform workloads")
        elif v["workload.interval"] <= 0:
            bad("workload.interval must be > 0")
    elif kind == "bursty":
        for k in ("workload.low_rate", "workload.high_rate", "workload.phase_length"):
            if v[k] is None:
                bad(f"{k} is required for bursty workloads")
            elif v[k] <= 0:
                bad(f"{k} must be > 0")
    if v["attack.enabled"]:
        if v["attack.intensity"] < 0:
            bad("attack.intensity must be >= 0")
        if not 0 <= v["attack.victim_tenant"] < v["workload.tenants"]:
            bad(f"attack.victim_tenant {v['attack.victim_tenant']} is not a "
                f"benign tenant (0..{v['workload.tenants'] - 1})")
        if cfg.victim_functions is not None:
            fpt = v["workload.functions_per_tenant"]
            for f in cfg.victim_functions:
                if not 0 <= f < fpt:
                    bad(f"attack.victim_functions entry {f} out of range 0..{fpt - 1}")
    if v["platform.prewarm.count"] > 0:
        if not 0 <= v["platform.prewarm.tenant"] < v["workload.tenants"]:
            bad("platform.prewarm.tenant out of range")
        if not 0 <= v["platform.prewarm.function"] < v["workload.functions_per_tenant"]:
            bad("platform.prewarm.function out of range")
    base_cap = ResourceVector(v["platform.cpu"], v["platform.memory"],
                              v["platform.storage"])
    footprint = ResourceVector(v["function.cpu"], v["function.memory"],
                               v["function.storage"])
    caps = {None: base_cap}
    for wid, comps in cfg.worker_overrides.items():
        if wid >= v["platform.num_workers"]:
            bad(f"platform.worker.{wid} override beyond platform.num_workers")
        caps[wid] = ResourceVector(
            comps.get("cpu", base_cap.cpu),
            comps.get("memory", base_cap.memory),
            comps.get("storage", base_cap.storage),
        )
    for cap in caps.values():
        if not footprint.fits_within(cap):
            bad("function footprint does not fit within worker capacity")


def expand(cfg):
    """All runs of the experiment in deterministic order, ordinals 0..n-1."""
    specs = []
    axes = [axis for _key, axis in cfg.sweep]
    keys = [key for key, _axis in cfg.sweep]
    for combo in itertools.product(*axes):
        overrides = tuple(zip(keys, combo))
        for scheduler in cfg.schedulers:
            for seed in cfg.seeds:
                specs.append(RunSpec(len(specs), scheduler, seed, overrides))
    return specs


def resolve(cfg, spec):
    """Concrete parameters for one RunSpec, with sweep overrides applied."""
    v = dict(cfg.values)
    for key, value in spec.overrides:
        v[key] = value

    base_cap = ResourceVector(v["platform.cpu"], v["platform.memory"],
                              v["platform.storage"])
    capacities = []
    for wid in range(v["platform.num_workers"]):
        comps = cfg.worker_overrides.get(wid)
        if comps:
            capacities.append(ResourceVector(
                comps.get("cpu", base_cap.cpu),
                comps.get("memory", base_cap.memory),
                comps.get("storage", base_cap.storage),
            ))
        else:
            capacities.append(base_cap)

    workload = WorkloadSpec(
        kind=v["workload.kind"],
        tenants=v["workload.tenants"],
        functions_per_tenant=v["workload.functions_per_tenant"],
        total_invocations=v["workload.total"],
        rate=v["workload.rate"] if v["workload.rate"] is not None else 1.0,
        interval=v["workload.interval"] if v["workload.interval"] is not None else 1.0,
        low_rate=v["workload.low_rate"] if v["workload.low_rate"] is not None else 0.1,
        high_rate=v["workload.high_rate"] if v["workload.high_rate"] is not None else 1.0,
        phase_length=(v["workload.phase_length"]
                      if v["workload.phase_length"] is not None else 100.0),
        batch_size=v["workload.batch"],
    )
    service = ServiceTimeSpec(kind=v["service.kind"], mean=v["service.mean"])
    attack = None
    if v["attack.enabled"]:
        attack = AttackSpec(
            attacker_tenant=v["workload.tenants"],   # first id past the benign range
            intensity=v["attack.intensity"],
            victim_tenant=v["attack.victim_tenant"],
            pattern=v["attack.pattern"],
            victim_functions=(frozenset(cfg.victim_functions)
                              if cfg.victim_functions is not None else None),
            service=ServiceTimeSpec(
                kind=v["attack.service_kind"] or v["service.kind"],
                mean=(v["attack.service_mean"]
                      if v["attack.service_mean"] is not None else v["service.mean"]),
            ),
        )
    recency = v["scheduler.recency_window"]
    return ResolvedRun(
        scheduler=spec.scheduler,
        seed=spec.seed,
        num_workers=v["platform.num_workers"],
        capacities=capacities,
        footprint=ResourceVector(v["function.cpu"], v["function.memory"],
                                 v["function.storage"]),
        idle_timeout=v["platform.idle_timeout"],
        cold_start_latency=v["platform.cold_start_latency"],
        queue_limit=v["platform.queue_limit"],
        prewarm=(v["platform.prewarm.tenant"], v["platform.prewarm.function"],
                 v["platform.prewarm.count"]),
        workload=workload,
        service=service,
        attack=attack,
        recency_window=recency if recency is not None else v["platform.idle_timeout"],
        trace=cfg.trace,
    )
