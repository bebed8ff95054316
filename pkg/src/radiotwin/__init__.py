"""Desk-scale simulator and benchmark for jammer detection in wireless
networks by comparing measured received signal strength against a digital
twin prediction."""

from .scenario import ScenarioConfig, ScenarioInstance, build_su_grid, sample_scenario

__version__ = "0.1.0"

__all__ = [
    "ScenarioConfig",
    "ScenarioInstance",
    "build_su_grid",
    "sample_scenario",
    "__version__",
]
