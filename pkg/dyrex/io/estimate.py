"""Module containing result types: norm estimates, exact ratios and check reports."""

import math
import attrs
import torch
from fractions import Fraction
from typing import Any, Optional
from dyrex.io.interval import IntervalCollection

KINDS = ("exact", "lower_bound", "upper_bound")


def _jsonable(value: Any) -> Any:
    """Convert numbers, tensors, fractions and domain objects to JSON-ready data."""
    if value is None or isinstance(value, (bool, str, int)):
        return value
    if isinstance(value, float):
        return None if math.isnan(value) else value
    if isinstance(value, Fraction):
        return {"fraction": str(value), "float": float(value)}
    if isinstance(value, torch.Tensor):
        return value.tolist()
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "to_dict"):
        return value.to_dict()
    if isinstance(value, IntervalCollection):
        return value.to_list()
    return str(value)


@attrs.define
class NormEstimate:
    """A numeric norm value tagged with how it was obtained.

    Attributes:
        value: the nonnegative estimate.
        kind: one of `exact`, `lower_bound`, `upper_bound`.
        restarts: number of search restarts used.
        iterations: number of ascent iterations per restart.
        seed: seed of the search.
        witness: the maximizing input (for lower bounds), recomputable offline.
        meta: extra search information.
    """

    value: float = attrs.field(converter=float)
    kind: str = attrs.field(default="lower_bound", validator=attrs.validators.in_(KINDS))
    restarts: int = 0
    iterations: int = 0
    seed: Optional[int] = None
    witness: Any = None
    meta: dict = attrs.field(factory=dict)

    def __attrs_post_init__(self) -> None:
        """Check the value is a nonnegative number."""
        if math.isnan(self.value) or self.value < 0:
            raise ValueError(f"Norm estimate must be >= 0, found {self.value}")

    def __float__(self) -> float:
        """Get the value."""
        return self.value

    def to_dict(self) -> dict:
        """Convert to the JSON layout of result files."""
        return {
            "value": self.value,
            "kind": self.kind,
            "restarts": self.restarts,
            "iterations": self.iterations,
            "seed": self.seed,
            "witness": _jsonable(self.witness),
            "meta": _jsonable(self.meta),
        }


@attrs.define
class RatioCertificate:
    """An exact rational ratio together with the collection attaining it.

    Attributes:
        value: the exact ratio.
        witness: the collection whose ratio is `value`.
        kind: `exact` when the supremum was enumerated, else `lower_bound`.
        meta: extra search information.
    """

    value: Fraction = attrs.field(converter=Fraction)
    witness: IntervalCollection = attrs.field(factory=IntervalCollection)
    kind: str = attrs.field(default="exact", validator=attrs.validators.in_(KINDS))
    meta: dict = attrs.field(factory=dict)

    def __float__(self) -> float:
        """Get the ratio as a float."""
        return float(self.value)

    def to_dict(self) -> dict:
        """Convert to the JSON layout of result files."""
        return {
            "value": str(self.value),
            "value_float": float(self.value),
            "kind": self.kind,
            "witness": self.witness.to_list(),
            "meta": _jsonable(self.meta),
        }


@attrs.define
class CheckReport:
    """Outcome of an inequality check.

    Attributes:
        name: short name of the check.
        lhs: the left hand side that should be bounded.
        rhs: the bound.
        passed: whether `lhs <= rhs` (within tolerance) on every sample.
        details: numbers entering both sides and sample counts.
        counterexample: the first violating sample in canonical order, if any.
    """

    name: str
    lhs: float = attrs.field(converter=float)
    rhs: float = attrs.field(converter=float)
    passed: bool = attrs.field(converter=bool)
    details: dict = attrs.field(factory=dict)
    counterexample: Any = None

    def __bool__(self) -> bool:
        """Reports are truthy iff the check passed."""
        return self.passed

    def to_dict(self) -> dict:
        """Convert to the JSON layout of result files."""
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "passed": self.passed,
            "details": _jsonable(self.details),
            "counterexample": _jsonable(self.counterexample),
        }
