"""
Experiment preset registry (catalog.yaml) and project defaults (config/defaults.json).
"""
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml

from flowdata.sampling import Box
from integrators.gauss import IntegratorConfig
from phase import SYSTEMS, get_system
from phase.base import InvalidArgumentError

logger = logging.getLogger(__name__)

ROOT = Path(__file__).parent.parent
CATALOG_PATH = Path(__file__).parent / "catalog.yaml"
DEFAULTS_PATH = ROOT / "config" / "defaults.json"

TASKS = ("solve", "predict")
MODEL_KINDS = ("fnn", "sympnet")


def load_defaults(path: Path = DEFAULTS_PATH) -> Dict[str, Any]:
    """Load the default hyper-parameters."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Defaults file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def integrator_config(defaults: Dict[str, Any]) -> IntegratorConfig:
    return IntegratorConfig(**defaults["integrator"])


def default_box(system_name: str, defaults: Optional[Dict[str, Any]] = None) -> Box:
    """Sampling box used when a solve dataset is generated without explicit bounds."""
    defaults = defaults or load_defaults()
    try:
        bounds = defaults["boxes"][system_name]
    except KeyError:
        raise InvalidArgumentError(f"No default box for system {system_name!r}") from None
    return Box(lower=bounds["lower"], upper=bounds["upper"])


def coordinate_names(d: int) -> List[str]:
    """Column names of a phase point: p, q for d=1, else p1..pd, q1..qd."""
    if d == 1:
        return ["p", "q"]
    return [f"p{i + 1}" for i in range(d)] + [f"q{i + 1}" for i in range(d)]


@dataclass(frozen=True)
class ExperimentPreset:
    """One read-only catalog entry."""
    id: str
    task: str
    system: str
    h: float
    models: Tuple[str, ...]
    lr: float
    title: str = ""
    n: int = 0
    box: Optional[Box] = None
    test_n: int = 0
    seed: int = 1
    test_seed: int = 2
    start: Optional[Tuple[float, ...]] = None
    track_symplectic: bool = False
    rollout_starts: Tuple[Tuple[float, ...], ...] = ()
    rollout_from_final: bool = False
    rollout_steps: int = 1000

    def __post_init__(self):
        if self.task not in TASKS:
            raise InvalidArgumentError(f"Preset {self.id}: task must be one of {TASKS}, got {self.task!r}")
        if self.system not in SYSTEMS:
            raise InvalidArgumentError(f"Preset {self.id}: unknown system {self.system!r}")
        unknown = [m for m in self.models if m not in MODEL_KINDS]
        if not self.models or unknown:
            raise InvalidArgumentError(f"Preset {self.id}: bad model list {list(self.models)}")
        if self.n < 1 or self.rollout_steps < 0:
            raise InvalidArgumentError(f"Preset {self.id}: n and rollout steps must be positive")

        dim = 2 * get_system(self.system).d
        if self.task == "solve":
            if self.box is None or self.box.dim != dim:
                raise InvalidArgumentError(f"Preset {self.id}: solve needs a {dim}-dimensional box")
            if not self.rollout_starts:
                raise InvalidArgumentError(f"Preset {self.id}: solve needs rollout starts")
        else:
            if self.start is None or len(self.start) != dim:
                raise InvalidArgumentError(f"Preset {self.id}: predict needs a {dim}-dimensional start")
        for s in self.rollout_starts:
            if len(s) != dim:
                raise InvalidArgumentError(f"Preset {self.id}: rollout start {list(s)} is not {dim}-dimensional")

    @property
    def d(self) -> int:
        return get_system(self.system).d

    @classmethod
    def from_dict(cls, entry: Dict[str, Any]) -> "ExperimentPreset":
        data = entry.get("data", {})
        train = entry.get("train", {})
        rollout = entry.get("rollout", {})
        box = None
        if "box" in data:
            box = Box(lower=data["box"]["lower"], upper=data["box"]["upper"])
        start = tuple(float(v) for v in data["start"]) if "start" in data else None
        return cls(
            id=entry["id"],
            task=entry["task"],
            system=entry["system"],
            h=float(entry["h"]),
            models=tuple(entry.get("models", MODEL_KINDS)),
            lr=float(train["lr"]),
            title=entry.get("title", entry["id"]),
            n=int(data.get("n", 0)),
            box=box,
            test_n=int(data.get("test_n", 0)),
            seed=int(data.get("seed", 1)),
            test_seed=int(data.get("test_seed", 2)),
            start=start,
            track_symplectic=bool(train.get("track_symplectic", False)),
            rollout_starts=tuple(tuple(float(v) for v in s) for s in rollout.get("starts", ())),
            rollout_from_final=bool(rollout.get("from_final", False)),
            rollout_steps=int(rollout.get("steps", 1000)),
        )


def load_catalog(path: Path = CATALOG_PATH) -> Dict[str, ExperimentPreset]:
    """
    Load the experiment presets from YAML.

    Returns:
        Mapping of preset id to ExperimentPreset, in catalog order

    Raises:
        FileNotFoundError: catalog missing
        InvalidArgumentError: an entry is inconsistent
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Catalog file not found: {path}")

    with open(path, "r", encoding="utf-8") as f:
        catalog = yaml.safe_load(f)

    presets = {}
    for entry in catalog["presets"]:
        preset = ExperimentPreset.from_dict(entry)
        if preset.id in presets:
            raise InvalidArgumentError(f"Duplicate preset id {preset.id!r}")
        presets[preset.id] = preset
    logger.debug(f"Loaded catalog with {len(presets)} presets")
    return presets


def get_preset(name: str, path: Path = CATALOG_PATH) -> ExperimentPreset:
    presets = load_catalog(path)
    try:
        return presets[name]
    except KeyError:
        raise InvalidArgumentError(
            f"Unknown preset {name!r}; choose from {', '.join(presets)}"
        ) from None
