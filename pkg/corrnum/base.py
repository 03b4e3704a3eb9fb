"""This module provides some base classes and common items."""

import dataclasses
import enum
import json
import math
from typing import Any, Dict

import numpy as np

__all__ = [
    "GROWTH_METHOD",
    "VERDICT",
    "Report",
]


class GROWTH_METHOD(enum.Enum):
    """Growth rate estimation method.

    Attributes:
        REGRESSION: Least-squares slope of the log cumulative weighted count over the window.
        BISECTION: Tilt at which the word length shell sums stop growing.
        BOTH: Bisection value, cross-checked against the regression.
    """

    REGRESSION = enum.auto()
    BISECTION = enum.auto()
    BOTH = enum.auto()


class VERDICT(enum.Enum):
    """Loxodromy validation verdict.

    Attributes:
        EMPIRICALLY_ANOSOV: Eigenvalue gaps grow at least linearly in word length.
        FLAGGED: Some class is not loxodromic or gaps do not grow.
    """

    EMPIRICALLY_ANOSOV = enum.auto()
    FLAGGED = enum.auto()


def _plain(value: Any) -> Any:
    if isinstance(value, Report):
        return value.to_dict()
    if isinstance(value, enum.Enum):
        return value.name
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return _plain(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


class Report:
    """Base class of dataclass reports emitted as JSON.

    Fields with ``metadata={"transient": True}`` are left out.
    """

    def to_dict(self) -> Dict[str, Any]:
        """Convert to plain JSON-compatible data."""

        return {f.name: _plain(getattr(self, f.name)) for f in dataclasses.fields(self)
                if not f.metadata.get("transient")}

    def to_json(self) -> str:
        """Serialize with sorted keys, so equal reports give equal bytes."""

        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
