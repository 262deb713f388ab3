from pydantic import BaseModel, ValidationError
from typing import Any, Type, TypeVar
from app.core.exceptions import TopologyOptimizerError

ModelT = TypeVar('ModelT', bound=BaseModel)

# Node identifiers are plain integers throughout
NodeId = int


def describe_validation_error(exc: ValidationError) -> str:
    """Flatten a pydantic ValidationError into one line per failing field"""
    parts = []
    for error in exc.errors():
        location = ".".join(str(item) for item in error.get("loc", ())) or "<root>"
        message = error.get("msg", "invalid value")
        if message.startswith("Value error, "):
            message = message[len("Value error, "):]
        parts.append(f"{location}: {message}")
    return "; ".join(parts)


def build_model(model_cls: Type[ModelT], error_cls: Type[TopologyOptimizerError], **data: Any) -> ModelT:
    """Construct a domain model, re-raising validation failures as a domain error"""
    try:
        return model_cls(**data)
    except ValidationError as exc:
        raise error_cls(f"Invalid {model_cls.__name__}: {describe_validation_error(exc)}") from exc
