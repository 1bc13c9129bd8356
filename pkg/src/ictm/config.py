"""Run configuration for the command-line front end.

A run is described by a single TOML file of key = value pairs, optionally
overridden from the command line with ``--set key=value``.  Model and
solver parameters carry their conventional symbol names (tau, lambda,
sigma, rho, mu, omega, epsilon).  Validation happens at parse time, before
any image is loaded or any computation starts.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .fields import GridSpec, LabelField
from .initializers import initialize
from .models import (
    ChanVese,
    FidelityModel,
    LocalGlobalFitting,
    LocalIntensityFitting,
    LocallyStatistical,
)
from .solver import SolverParams

MODEL_NAMES = ("cv", "lif", "lgif", "lsac")
INIT_KINDS = ("checkerboard", "circles", "stripes", "random", "from-file")

# TOML key -> dataclass field (only where they differ).
_KEY_ALIASES = {"lambda": "lam"}


@dataclass
class RunConfig:
    input: str
    model: str
    tau: float
    lam: float
    output_dir: str = "ictm-out"
    n: int = 2
    sigma: float = 3.0
    mu: object = 1.0
    omega: float = 0.5
    epsilon: float = 1e-6
    rho: float = 15.0
    nu_floor: float = 1e-4
    init: str = "checkerboard"
    init_block: int | None = None
    init_count: int = 2
    init_radius: float | None = None
    init_width: int | None = None
    init_file: str | None = None
    normalize: bool = True
    energy_check: bool = False
    max_iters: int = 1000
    tol_pixels: int = 0
    seed: int = 0
    ground_truth: str | None = None

    def __post_init__(self):
        if self.model not in MODEL_NAMES:
            raise ValueError(f"model must be one of {MODEL_NAMES}, got {self.model!r}")
        if self.init not in INIT_KINDS:
            raise ValueError(f"init must be one of {INIT_KINDS}, got {self.init!r}")
        if self.init == "from-file" and not self.init_file:
            raise ValueError("init = 'from-file' requires init_file")
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        # Construct the solver parameters now so bad values fail up front.
        self.solver_params()
        for name in ("sigma", "omega", "epsilon", "rho", "nu_floor"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)):
                raise ValueError(f"{name} must be a number, got {value!r}")
        if not 0.0 <= self.omega <= 1.0:
            raise ValueError(f"omega must lie in [0, 1], got {self.omega}")
        for name in ("sigma", "epsilon", "rho", "nu_floor"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def solver_params(self) -> SolverParams:
        return SolverParams(
            tau=self.tau,
            lam=self.lam,
            max_iters=self.max_iters,
            tol_pixels=self.tol_pixels,
            energy_check=self.energy_check,
        )

    def build_model(self, grid: GridSpec) -> FidelityModel:
        if self.model == "cv":
            return ChanVese.initial(self.n)
        if self.model == "lif":
            return LocalIntensityFitting.initial(
                grid, self.n, self.sigma, self.mu, self.epsilon
            )
        if self.model == "lgif":
            return LocalGlobalFitting.initial(
                grid, self.n, self.sigma, self.omega, self.mu, self.epsilon
            )
        return LocallyStatistical.initial(grid, self.n, self.rho, self.nu_floor)

    def build_labels(self, grid: GridSpec) -> LabelField:
        kwargs = {}
        if self.init == "checkerboard" and self.init_block is not None:
            kwargs["block"] = self.init_block
        if self.init == "circles":
            kwargs["count"] = self.init_count
            if self.init_radius is not None:
                kwargs["radius"] = self.init_radius
        if self.init == "stripes" and self.init_width is not None:
            kwargs["width"] = self.init_width
        if self.init == "from-file":
            kwargs["path"] = self.init_file
        return initialize(self.init, grid, self.n, seed=self.seed, **kwargs)


def _field_names() -> dict[str, str]:
    names = {f.name: f.name for f in dataclasses.fields(RunConfig)}
    names.pop("lam")
    names.update(_KEY_ALIASES)
    return names


def parse_override(text: str) -> tuple[str, object]:
    """Parse one ``key=value`` override; values use TOML literal syntax."""
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise ValueError(f"override must look like key=value, got {text!r}")
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw  # bare strings are convenient on the command line
    return key.strip(), value


def load_config(path, overrides: tuple[str, ...] = ()) -> RunConfig:
    """Read a TOML run configuration, apply overrides, and validate."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    try:
        data = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ValueError(f"config file {path} is not valid TOML: {exc}") from exc
    for item in overrides:
        key, value = parse_override(item)
        data[key] = value

    mapping = _field_names()
    unknown = sorted(set(data) - set(mapping))
    if unknown:
        raise ValueError(f"unknown config keys: {unknown}")
    kwargs = {mapping[k]: v for k, v in data.items()}
    missing = [k for k in ("input", "model", "tau", "lambda") if mapping[k] not in kwargs]
    if missing:
        raise ValueError(f"missing required config keys: {missing}")
    return RunConfig(**kwargs)
