"""Flat ``key = value`` run configuration.

A config file is a list of ``key = value`` lines; ``#`` and ``;`` start
comments, which is where units are documented.  Keys that are not set fall
back to the built-in preset of the chosen scenario (``desk`` or ``full``).
Any :class:`~porofrac.material.MaterialParams` field may be overridden with
a ``material.<name>`` key; ``material.porosity``, ``material.rho_s`` and
``material.m0`` are accepted for completeness but have no effect.  The only
environment variable consulted is ``POROFRAC_OUTPUT_DIR``, which replaces
``output_dir``.
"""

from __future__ import annotations

import configparser
import logging
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from ..errors import ConfigError
from ..material import DrivingForceMode, MaterialParams

OUTPUT_DIR_ENV = "POROFRAC_OUTPUT_DIR"

SCENARIOS = ("footing", "injection", "custom")
PRESETS = ("desk", "full")
VARIANTS = {
    "footing": ("elastic", "plastic", "drained"),
    "injection": ("elastic", "plastic"),
    "custom": ("elastic", "plastic", "drained"),
}
BOUNDARIES = ("permeable", "impermeable")
DISTRIBUTIONS = ("uniform", "point")

_SECTION = "run"
#: Mixture constants that no implemented equation uses; accepted and dropped.
UNUSED_MATERIAL_KEYS = ("porosity", "rho_s", "m0")

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to build and run one scenario.

    Lengths in m, time in s, ``injection_rate`` in kg/s (full domain) and
    ``flux`` in kg/(m^2 s) (positive into the body).  ``box`` is the
    refinement box ``(x0, x1, y0, y1)`` of the injection mesh.
    """

    scenario: str = "footing"
    preset: str = "desk"
    width: float = 23.088
    height: float = 4.758
    a: float = 4.587
    length: float = 80.0
    nx: int = 24
    ny: int = 6
    h_fine: float = 1.0
    h_coarse: float = 4.0
    box: tuple = (0.0, 40.0, 31.875, 48.125)
    tau: float = 10.0
    steps: int = 46
    displacement_increment: float = 5e-5
    injection_rate: float = 0.01
    flux: float = 0.0
    injection_distribution: str = "uniform"
    probe: tuple = (1.0, 39.875)
    driving_force_mode: str = "PlasticWork"
    variant: str = "plastic"
    permeability_factor: float = 1.0
    boundary: str = "permeable"
    fracture: bool = False
    output_every: int = 0
    output_dir: str = "porofrac-out"
    threads: int = 1
    material: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.preset not in PRESETS:
            raise ConfigError(f"preset must be one of {PRESETS}, got {self.preset!r}")
        for name in ("width", "height", "a", "length", "h_fine", "h_coarse", "tau"):
            if not getattr(self, name) > 0.0:
                raise ConfigError(f"{name} must be positive")
        for name in ("nx", "ny", "steps", "threads"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.output_every < 0:
            raise ConfigError("output_every must be >= 0")
        if self.variant not in VARIANTS[self.scenario]:
            raise ConfigError(f"variant {self.variant!r} not available for {self.scenario}; "
                              f"choose from {VARIANTS[self.scenario]}")
        if self.boundary not in BOUNDARIES:
            raise ConfigError(f"boundary must be one of {BOUNDARIES}")
        if self.injection_distribution not in DISTRIBUTIONS:
            raise ConfigError(f"injection_distribution must be one of {DISTRIBUTIONS}")
        if not self.permeability_factor > 0.0:
            raise ConfigError("permeability_factor must be positive")
        try:
            DrivingForceMode(self.driving_force_mode)
        except ValueError:
            raise ConfigError(f"unknown driving_force_mode {self.driving_force_mode!r}") from None
        if len(self.box) != 4 or len(self.probe) != 2:
            raise ConfigError("box needs 4 values and probe needs 2")
        known = {f.name for f in fields(MaterialParams)}
        unknown = set(self.material) - known
        if unknown:
            raise ConfigError(f"unknown material keys: {sorted(unknown)}")
        if self.scenario == "footing":
            if self.a >= self.width:
                raise ConfigError("footing width a must be smaller than W")
            if self.displacement_increment <= 0.0:
                raise ConfigError("footing needs a positive displacement_increment")
        if self.scenario == "injection":
            x0, x1, y0, y1 = self.box
            if not (0.0 <= x0 < x1 <= self.length / 2 and 0.0 <= y0 < y1 <= self.length):
                raise ConfigError("refinement box lies outside the half domain")
            if not y0 < self.length / 2 < y1:
                raise ConfigError("refinement box must contain the notch line")
            if not 0.0 < self.a / 2 < x1:
                raise ConfigError("notch must end inside the refinement box")
            if self.injection_rate <= 0.0:
                raise ConfigError("injection needs a positive injection_rate")
        if self.scenario == "custom" and self.flux == 0.0:
            raise ConfigError("custom scenario needs a non-zero flux")

    @property
    def total_time(self) -> float:
        return self.steps * self.tau

    def material_params(self) -> MaterialParams:
        """Material constants after variant switches and explicit overrides."""
        base = MaterialParams.hydraulic if self.scenario == "injection" else MaterialParams.footing
        p = base(driving_force_mode=self.driving_force_mode)
        p = p.replace(K=p.K * self.permeability_factor)
        if self.variant == "elastic":
            p = p.replace(s_max=1e4)
        elif self.variant == "drained":
            p = p.replace(M=0.0, b=0.0)
        try:
            return p.replace(**self.material)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid material override: {exc}") from None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["box"] = list(self.box)
        out["probe"] = list(self.probe)
        return out


def preset(scenario: str, name: str = "desk") -> ScenarioConfig:
    """Built-in defaults of a scenario."""
    if name not in PRESETS:
        raise ConfigError(f"preset must be one of {PRESETS}")
    desk = name == "desk"
    if scenario == "footing":
        return ScenarioConfig(
            scenario="footing", preset=name, nx=24 if desk else 72, ny=6 if desk else 33,
            tau=10.0 if desk else 1.0, steps=46 if desk else 460,
            displacement_increment=5e-5 if desk else 5e-6)
    if scenario == "injection":
        return ScenarioConfig(
            scenario="injection", preset=name, a=8.0, h_fine=1.0 if desk else 0.25,
            h_coarse=4.0 if desk else 6.375, tau=1.0 if desk else 1e-3,
            steps=90 if desk else 90000, fracture=True, output_every=0 if desk else 10000)
    if scenario == "custom":
        return ScenarioConfig(
            scenario="custom", preset=name, width=1.0, height=1.0, nx=4 if desk else 16,
            ny=4 if desk else 16, tau=1.0, steps=10, flux=1e-3, variant="elastic")
    raise ConfigError(f"scenario must be one of {SCENARIOS}, got {scenario!r}")


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _parse_value(name: str, text: str, default):
    try:
        if isinstance(default, bool):
            return _parse_bool(text)
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, tuple):
            return tuple(float(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"cannot parse {name} = {text!r}") from None
    return text.strip()


def parse_config(text: str, desk: bool | None = None) -> ScenarioConfig:
    """Parse config text; ``desk`` forces the desk (True) or full (False) preset."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"),
                                       interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(f"[{_SECTION}]\n{text}")
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    if parser.sections() != [_SECTION]:
        raise ConfigError("config files are flat key = value lists without sections")
    raw = dict(parser[_SECTION])
    scenario = raw.pop("scenario", None)
    if scenario is None:
        raise ConfigError("config must set 'scenario'")
    name = raw.pop("preset", "desk")
    if desk is not None:
        name = "desk" if desk else "full"
    cfg = preset(scenario.strip(), name.strip())

    defaults = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    changes, material = {}, {}
    for key, text in raw.items():
        if key.startswith("material."):
            material[key.split(".", 1)[1]] = text.strip()
        elif key in defaults and key != "material":
            changes[key] = _parse_value(key, text, defaults[key])
        else:
            raise ConfigError(f"unknown config key {key!r}")
    if material:
        known = {f.name: f for f in fields(MaterialParams)}
        for key in [k for k in material if k in UNUSED_MATERIAL_KEYS]:
            log.info("material.%s is not used by the model and is ignored", key)
            del material[key]
        for key, text in material.items():
            if key not in known:
                raise ConfigError(f"unknown material key {key!r}")
            if key != "driving_force_mode":
                material[key] = _parse_value(key, text, 0.0)
        changes["material"] = material
    env_dir = os.environ.get(OUTPUT_DIR_ENV)
    if env_dir:
        changes["output_dir"] = env_dir
    return replace(cfg, **changes)


def load_config(path, desk: bool | None = None) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, desk=desk)


_UNITS = {
    "width": "m", "height": "m", "a": "m", "length": "m", "h_fine": "m",
    "h_coarse": "m", "box": "m, x0 x1 y0 y1", "tau": "s",
    "displacement_increment": "m per step", "injection_rate": "kg/s, full domain",
    "flux": "kg/(m^2 s), into the body", "probe": "m, x y",
    "permeability_factor": "multiplies K", "output_every": "steps, 0 = final only",
}


def template(scenario: str, name: str = "desk") -> str:
    """A commented config reproducing the preset of ``scenario``."""
    cfg = preset(scenario, name)
    lines = [f"# porofrac {scenario} scenario ({name} preset)"]
    for f in fields(cfg):
        if f.name == "material":
            continue
        value = getattr(cfg, f.name)
        if isinstance(value, tuple):
            value = " ".join(f"{v:g}" for v in value)
        elif isinstance(value, bool):
            value = str(value).lower()
        unit = _UNITS.get(f.name)
        lines.append(f"{f.name} = {value}" + (f"  # {unit}" if unit else ""))
    lines.append("# material overrides, e.g.")
    lines.append("# material.K = 9.8e-12  # m^3 s/kg")
    return "\n".join(lines) + "\n"
