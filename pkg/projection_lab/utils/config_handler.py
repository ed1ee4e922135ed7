"""
Experiment configuration: loading, validation and defaults for the JSON
files under config/experiments/.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from projection_lab.utils.errors import InputError
from projection_lab.utils.family import FamilySpec
from projection_lab.utils.fractal import MeasureSpec
from projection_lab.utils.utils import content_hash, read_json

MODES = ("bound_check", "sharpness", "transversality", "verify_suite")
ESTIMATORS = ("box_counting", "correlation")
DEFAULT_TOLERANCE = 0.12


@dataclass(frozen=True)
class EstimatorConfig:
    method: str = "box_counting"
    scales: Optional[tuple] = None
    pair_budget: int = 10 ** 6

    def __post_init__(self):
        if self.method not in ESTIMATORS:
            raise InputError(f"estimator method must be one of {', '.join(ESTIMATORS)}, got '{self.method}'")

    @classmethod
    def from_dict(cls, data):
        data = data or {}
        scales = data.get("scales")
        return cls(data.get("method", "box_counting"),
                   tuple(float(s) for s in scales) if scales else None,
                   int(data.get("pair_budget", 10 ** 6)))


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """One experiment run. `raw` is the file content used for the provenance hash."""

    mode: str
    seed: int
    family: Optional[FamilySpec] = None
    measure: Optional[MeasureSpec] = None
    lambda_grid: tuple = ()
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    tolerance: float = DEFAULT_TOLERANCE
    threads: int = 0
    # sharpness
    n: Optional[int] = None
    m: Optional[int] = None
    k: Optional[int] = None
    l: Optional[int] = None
    p: Optional[int] = None
    s: Optional[float] = None
    n_points: int = 100000
    level: int = 12
    # transversality
    lambda0: Optional[tuple] = None
    directions: Optional[tuple] = None
    panel: int = 8
    samples: int = 10 ** 6
    deltas: Optional[tuple] = None
    exponent_tolerance: Optional[float] = None
    raw: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise InputError(f"mode must be one of {', '.join(MODES)}, got '{self.mode}'")
        if self.mode == "bound_check":
            if self.family is None or self.measure is None:
                raise InputError("bound_check needs 'family' and 'measure'")
            if len(self.lambda_grid) != self.family.k:
                raise InputError(f"lambda_grid needs one count per parameter ({self.family.k})")
            if any(c < 3 for c in self.lambda_grid):
                raise InputError("bound_check needs at least 3 grid points per axis")
        if self.mode == "sharpness":
            missing = [key for key in ("n", "m", "k", "l", "p") if getattr(self, key) is None]
            if missing:
                raise InputError(f"sharpness needs {', '.join(missing)}")
            if self.s is None and self.l < 1:
                raise InputError("sharpness without 's' tests the flat branch and needs l >= 1")
            if self.s is not None and not 0 <= self.s <= 1:
                raise InputError(f"s must lie in [0, 1], got {self.s}")
            if len(self.lambda_grid) != self.k:
                raise InputError(f"lambda_grid needs one count per parameter ({self.k})")
        if self.mode == "transversality" and self.family is None:
            raise InputError("transversality needs 'family'")
        if self.tolerance <= 0:
            raise InputError(f"tolerance must be positive, got {self.tolerance}")

    @property
    def config_hash(self):
        # thread count never changes results
        return content_hash({key: value for key, value in self.raw.items() if key != "threads"})

    @classmethod
    def from_dict(cls, data, base_dir=None):
        if "seed" not in data:
            raise InputError("experiment configuration must set 'seed'")
        family = data.get("family")
        if isinstance(family, str):
            path = Path(family)
            if not path.is_absolute() and base_dir is not None:
                path = Path(base_dir) / path
            family = read_json(path)
        raw = dict(data)
        if family is not None:
            raw["family"] = family
        optional = {}
        for key in ("n", "m", "k", "l", "p", "n_points", "level", "panel", "samples"):
            if key in data:
                optional[key] = int(data[key])
        for key in ("s", "exponent_tolerance"):
            if data.get(key) is not None:
                optional[key] = float(data[key])
        for key in ("lambda0", "deltas"):
            if key in data:
                optional[key] = tuple(float(x) for x in data[key])
        if "directions" in data:
            optional["directions"] = tuple(tuple(float(x) for x in w) for w in data["directions"])
        return cls(
            mode=data.get("mode", "bound_check"),
            seed=int(data["seed"]),
            family=FamilySpec.from_dict(family) if family is not None else None,
            measure=MeasureSpec.from_dict(data["measure"]) if "measure" in data else None,
            lambda_grid=tuple(int(c) for c in data.get("lambda_grid", ())),
            estimator=EstimatorConfig.from_dict(data.get("estimator")),
            tolerance=float(data.get("tolerance", DEFAULT_TOLERANCE)),
            threads=int(data.get("threads", 0)),
            raw=raw,
            **optional,
        )

    def with_overrides(self, seed=None, threads=None):
        """Command-line --seed/--threads take precedence over the file."""
        raw = dict(self.raw)
        if seed is not None:
            raw["seed"] = seed
        if threads is not None:
            raw["threads"] = threads
        return ExperimentConfig.from_dict(raw)


def load_experiment(path):
    path = Path(path)
    return ExperimentConfig.from_dict(read_json(path), base_dir=path.parent)
