"""Experiment configuration.

Settings come from three layers, later ones winning:
- Built-in defaults (the field defaults below)
- A YAML file mirroring the CLI flags (``config/experiment.yaml``)
- Explicit CLI flags

Process-wide knobs are environment variables:
- PRCM_WORKERS: worker processes for enumeration and independent chains
- PRCM_ENUMERATION_CAP: largest plaquette count enumerated exactly
- PRCM_LOG_LEVEL: default log level of the CLI
"""

import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .context import Context, parse_rational
from .errors import ConfigError, PRCMException
from .lattice import parse_cells, parse_chain
from .types import BoundaryCondition, BoundaryKind, Box, Cell, Convention

logger = logging.getLogger(__name__)

DEFAULT_ENUMERATION_CAP = 20

SUBCOMMANDS = (
    "enumerate",
    "verify-duality",
    "verify-fkg",
    "verify-holley",
    "verify-conditioning",
    "verify-coupling",
    "verify-ep",
    "sample",
    "sample-coupled",
    "estimate",
)
DUALITY_COMMANDS = {"verify-duality", "verify-ep"}
SAMPLING_COMMANDS = {"sample", "sample-coupled", "estimate"}
OBSERVABLES = ("density", "open_count", "pressure", "null_homology", "wilson")


def _env_int(name: str, default: int, minimum: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}") from None
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return value


def worker_count() -> int:
    return _env_int("PRCM_WORKERS", 1, 1)


def enumeration_cap() -> int:
    return _env_int("PRCM_ENUMERATION_CAP", DEFAULT_ENUMERATION_CAP, 0)


def context_cap(ctx: Context) -> int:
    """The context's enumeration cap, else PRCM_ENUMERATION_CAP."""
    return enumeration_cap() if ctx.enumeration_cap is None else ctx.enumeration_cap


def default_log_level() -> str:
    return os.getenv("PRCM_LOG_LEVEL", "WARNING").upper()


def parse_box(text: str, convention: Convention = Convention.OPEN) -> Box:
    """Parse primal box extents ``lo,hi x lo,hi x ...`` (e.g. ``0,2x0,2``).

    Raises:
        ConfigError: If the text is malformed or an axis is empty
    """
    lo, hi = [], []
    for axis in text.lower().split("x"):
        parts = [v.strip() for v in axis.split(",")]
        if len(parts) != 2:
            raise ConfigError(f"Box axis {axis!r} must be 'lo,hi'")
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise ConfigError(f"Box axis {axis!r} must hold integers") from None
        if a > b:
            raise ConfigError(f"Box axis {axis!r} has lo > hi")
        lo.append(a)
        hi.append(b)
    return Box.from_primal(lo, hi, convention)


def _read_source(text: str) -> str:
    """Inline text, or the contents of the file it names."""
    candidate = Path(text)
    if "anchor=" not in text and candidate.is_file():
        return candidate.read_text()
    return text


def parse_cell_list(text: str) -> List[Cell]:
    """Cells from a file path or inline text separated by ``|`` or newlines."""
    return parse_cells(_read_source(text).replace("|", "\n").splitlines())


class ExperimentConfig(BaseModel):
    """One CLI run: model, boundary condition, chain and output settings."""
    model_config = ConfigDict(extra="forbid")

    command: str = Field(..., description="Subcommand to run")
    d: int = Field(default=2, ge=1, le=6, description="Ambient dimension")
    i: int = Field(default=1, ge=1, description="Plaquette dimension")
    q: int = Field(default=2, ge=1, le=2**31 - 1, description="Coefficient modulus")
    p: str = Field(default="1/2", description="Edge parameter as 'a/b' or decimal")
    box: str = Field(default="0,1x0,1", description="Primal extents, e.g. 0,2x0,2")
    convention: Convention = Field(default=Convention.OPEN, description="open | closed")
    boundary: BoundaryKind = Field(default=BoundaryKind.FREE, description="Boundary condition kind")
    boundary_cells: Optional[str] = Field(None, description="Cell file or inline cells for the boundary")
    truncation_radius: Optional[int] = Field(None, ge=0, description="Explicit truncation radius")
    compare_boundary: BoundaryKind = Field(default=BoundaryKind.WIRED, description="Second measure for verify-holley")
    inner_box: Optional[str] = Field(None, description="Inner box for verify-conditioning")
    outside_open: Optional[str] = Field(None, description="Open plaquettes outside the inner box")
    seed: int = Field(default=0, ge=0, description="Master seed")
    sweeps: int = Field(default=10000, ge=1, description="Sweeps per chain")
    burn_in: int = Field(default=1000, ge=0, description="Discarded initial sweeps")
    chains: int = Field(default=1, ge=1, description="Independent chains")
    observables: List[str] = Field(default_factory=lambda: ["density"], description="Observables to record")
    gamma: Optional[str] = Field(None, description="Wilson cycle: chain file or inline terms")
    ep_samples: int = Field(default=1000, ge=1, description="Random configurations for verify-ep")
    enumeration_cap: Optional[int] = Field(None, ge=0, description="Override PRCM_ENUMERATION_CAP")
    output: Optional[str] = Field(None, description="Report path (stdout when omitted)")
    format: Literal["json", "csv"] = Field(default="json", description="Report format")

    @field_validator("command")
    @classmethod
    def _known_command(cls, value: str) -> str:
        if value not in SUBCOMMANDS:
            raise ValueError(f"Unknown subcommand {value!r}; expected one of {', '.join(SUBCOMMANDS)}")
        return value

    @field_validator("p", mode="before")
    @classmethod
    def _exact_p(cls, value: Any) -> str:
        try:
            p = parse_rational(value)
        except PRCMException as e:
            raise ValueError(str(e)) from None
        if not 0 <= p <= 1:
            raise ValueError(f"p must lie in [0, 1], got {p}")
        return f"{p.numerator}/{p.denominator}"

    @field_validator("observables")
    @classmethod
    def _known_observables(cls, value: List[str]) -> List[str]:
        unknown = [v for v in value if v not in OBSERVABLES]
        if unknown:
            raise ValueError(f"Unknown observables {unknown}; expected from {list(OBSERVABLES)}")
        return value

    @model_validator(mode="after")
    def _consistent(self) -> "ExperimentConfig":
        if self.i > self.d:
            raise ValueError(f"i={self.i} exceeds d={self.d}")
        try:
            box = parse_box(self.box, self.convention)
        except ConfigError as e:
            raise ValueError(str(e)) from None
        if box.d != self.d:
            raise ValueError(f"Box {self.box!r} has {box.d} axes but d={self.d}")
        if self.command in DUALITY_COMMANDS and self.i >= self.d:
            raise ValueError(
                f"{self.command} needs 1 <= i <= d - 1 (got i={self.i}, d={self.d}); "
                "the dual of top-dimensional plaquettes is empty"
            )
        if self.boundary_cells and self.boundary in (BoundaryKind.FREE, BoundaryKind.WIRED):
            raise ValueError(
                f"boundary_cells given with {self.boundary.value} boundary; "
                "use plaquettes or wired_at_infinity"
            )
        if self.command in SAMPLING_COMMANDS and self.sweeps <= self.burn_in:
            raise ValueError(f"sweeps ({self.sweeps}) must exceed burn_in ({self.burn_in})")
        if self.command == "verify-conditioning" and not self.inner_box:
            raise ValueError("verify-conditioning needs inner_box")
        wants_cycle = {"null_homology", "wilson"} & set(self.observables)
        if self.command == "estimate" and wants_cycle and not self.gamma:
            raise ValueError(f"Observables {sorted(wants_cycle)} need a gamma cycle")
        return self

    # ------------------------------------------------------------
    # Resolution into library objects
    # ------------------------------------------------------------

    def box_value(self) -> Box:
        return parse_box(self.box, self.convention)

    def boundary_condition(self) -> BoundaryCondition:
        cells = parse_cell_list(self.boundary_cells) if self.boundary_cells else []
        return BoundaryCondition(self.boundary, frozenset(cells))

    def context(self) -> Context:
        return Context(
            box=self.box_value(),
            i=self.i,
            q=self.q,
            p=parse_rational(self.p),
            boundary=self.boundary_condition(),
            truncation_radius=self.truncation_radius,
            enumeration_cap=self.enumeration_cap,
        )

    def gamma_chain(self) -> Dict[Cell, int]:
        if not self.gamma:
            raise ConfigError("No gamma cycle configured")
        return parse_chain(_read_source(self.gamma))

    def resolved(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


def _normalize_keys(data: Mapping[str, Any]) -> Dict[str, Any]:
    return {str(k).replace("-", "_"): v for k, v in data.items()}


def load_config(
    path: Optional[str] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> ExperimentConfig:
    """Merge a YAML file and explicit overrides into a validated config.

    ``None`` overrides are ignored so unset CLI flags fall through to the file.

    Raises:
        ConfigError: If the file cannot be read or is not a YAML mapping
        pydantic.ValidationError: If the merged settings are invalid
    """
    data: Dict[str, Any] = {}
    if path:
        try:
            with open(path, "r") as f:
                loaded = yaml.safe_load(f)
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(f"Could not load config from {path}: {e}") from e
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"Config {path} must be a mapping, got {type(loaded).__name__}")
        data.update(_normalize_keys(loaded))
        logger.debug(f"Loaded {len(loaded)} settings from {path}")
    if overrides:
        data.update({k: v for k, v in _normalize_keys(overrides).items() if v is not None})
    return ExperimentConfig(**data)
