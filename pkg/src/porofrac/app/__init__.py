"""Configuration, scenario generators, file output and the command line."""

from .config import ScenarioConfig, load_config, parse_config, preset, template
from .scenarios import (
                        Scenario,
                        build_custom_scenario,
                        build_footing_scenario,
                        build_injection_scenario,
                        build_scenario,
)

__all__ = [
    "Scenario", "ScenarioConfig", "build_custom_scenario", "build_footing_scenario",
    "build_injection_scenario", "build_scenario", "load_config", "parse_config",
    "preset", "template",
]
