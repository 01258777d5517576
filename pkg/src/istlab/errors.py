"""Shared exceptions and the Failure result type used by the builders."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


class DomainError(ValueError):
    """Parameter outside the documented domain (bad p, eps, n, d, ...)."""


class NotConnected(RuntimeError):
    """BFS tree requested from a graph that does not span from the root."""


class SamplingFailed(RuntimeError):
    """A rejection/restart sampler exceeded its attempt cap."""


class DegreeTooSmall(DomainError):
    """Color decomposition needs degree >= 4."""


class TooLarge(ValueError):
    """Instance exceeds the exhaustive oracle's size caps."""


@dataclass(frozen=True)
class Failure:
    """Typed failure outcome of a randomized construction.

    `stage` names the pipeline stage ("Phase1", "Phase2", "Phase3", "Sampling",
    "BfsTree", "UniqueAnchor", "P1", "P2", "InducedMatching", "Verification");
    `detail` is human-readable, `data` carries machine-readable witnesses.
    """

    stage: str
    detail: str = ""
    data: dict[str, Any] = field(default_factory=dict)

    def to_json_obj(self) -> dict[str, Any]:
        return {"stage": self.stage, "detail": self.detail, "data": _jsonable(self.data)}


def _jsonable(obj: Any) -> Any:
    # best-effort conversion of numpy scalars/arrays and tuples for json.dumps
    import numpy as np

    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj
