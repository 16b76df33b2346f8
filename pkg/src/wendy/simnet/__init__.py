from .adversary import (
    AdversaryScript,
    Byzantine,
    CrashAt,
    Delay,
    DoubleVote,
    Equivocate,
    Honest,
    LinkDelay,
    StaleNewView,
    Withhold,
)
from .catalog import (
    random_scenario,
    scenario_crash_rotation,
    scenario_hidden_lock,
    sweep,
)
from .config import ConfigError, NetworkConfig, Partition, inject_partition
from .scenario_file import Scenario, load_scenario, parse_scenario
from .sim import SafetyViolation, SimResult, Simulation, run

__all__ = [
    "AdversaryScript",
    "Byzantine",
    "ConfigError",
    "CrashAt",
    "Delay",
    "DoubleVote",
    "Equivocate",
    "Honest",
    "LinkDelay",
    "NetworkConfig",
    "Partition",
    "SafetyViolation",
    "Scenario",
    "SimResult",
    "StaleNewView",
    "Simulation",
    "Withhold",
    "inject_partition",
    "load_scenario",
    "parse_scenario",
    "random_scenario",
    "run",
    "scenario_crash_rotation",
    "scenario_hidden_lock",
    "sweep",
]
