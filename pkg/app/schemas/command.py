from pydantic import BaseModel, Field, ValidationError
from typing import List, Optional
from enum import Enum
from pathlib import Path
import argparse
from app.core.config import parse_int_list, settings
from app.core.exceptions import InputParseError, InvalidParameterError
from app.schemas.common import describe_validation_error
from app.schemas.optimizer import Algorithm, BoundMode


class Subcommand(str, Enum):
    OPTIMIZE = "optimize"
    PLAN = "plan"
    SIMULATE = "simulate"
    EXPERIMENT = "experiment"
    BENCH = "bench"


class CommandConfig(BaseModel):
    """Validated command line of one invocation"""
    subcommand: Subcommand
    topology: Optional[Path] = None
    flows: Optional[Path] = None
    budgets: Optional[Path] = None
    desired: Optional[Path] = None
    plan: Optional[Path] = None
    algorithm: Algorithm = Algorithm.OPTIMAL
    bound: BoundMode = Field(default_factory=lambda: BoundMode(settings.DEFAULT_BOUND))
    seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED, ge=0)
    out: Path = Field(default_factory=lambda: Path(settings.OUTPUT_DIR))
    sizes: List[int] = Field(default_factory=list)
    h_max: List[int] = Field(default_factory=list)
    trials: int = Field(default_factory=lambda: settings.DEFAULT_TRIALS)
    roots: List[int] = Field(default_factory=list)
    n: Optional[int] = None
    algorithms: List[Algorithm] = Field(default_factory=lambda: [Algorithm.GREEDY, Algorithm.OPTIMAL])
    total_flow: float = Field(default_factory=lambda: settings.DEFAULT_TOTAL_FLOW, gt=0)
    timings: bool = False

    class Config:
        frozen = True

    @classmethod
    def from_namespace(cls, args: argparse.Namespace) -> "CommandConfig":
        """Keep only the options the user actually set, then validate"""
        data = {key: value for key, value in vars(args).items()
                if key in cls.model_fields and value is not None}
        for key in ("sizes", "h_max", "roots"):
            if isinstance(data.get(key), str):
                try:
                    data[key] = parse_int_list(data[key])
                except ValueError as exc:
                    raise InvalidParameterError(f"--{key.replace('_', '-')}: expected a list like 3,4,5 or 3..7") from exc
        if isinstance(data.get("algorithms"), str):
            data["algorithms"] = [part.strip() for part in data["algorithms"].split(",") if part.strip()]
        try:
            return cls(**data)
        except ValidationError as exc:
            raise InvalidParameterError(f"Invalid arguments: {describe_validation_error(exc)}") from exc

    def require(self, *names: str) -> None:
        """Every named input path must be given and exist"""
        for name in names:
            path = getattr(self, name)
            if path is None:
                raise InvalidParameterError(f"{self.subcommand.value} needs --{name}")
            if not path.is_file():
                raise InputParseError(f"{path}: no such file")
