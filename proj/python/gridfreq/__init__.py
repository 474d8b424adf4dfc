"""Two-layer transient frequency control for power networks."""

from gridfreq._core import (
    LoadedScenario,
    Monitors,
    Network,
    SafetyReportEntry,
    Scenario,
    Trace,
    check_partition,
    control_cost,
    load_network,
    load_partition,
    load_scenario,
    safety_report,
    simulate,
    solve_once,
    write_trace_csv,
)

__all__ = [
    "LoadedScenario",
    "Monitors",
    "Network",
    "SafetyReportEntry",
    "Scenario",
    "Trace",
    "check_partition",
    "control_cost",
    "load_network",
    "load_partition",
    "load_scenario",
    "safety_report",
    "simulate",
    "solve_once",
    "write_trace_csv",
]
