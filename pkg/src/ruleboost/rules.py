"""Conjunctive classification rules and rule ensembles.

A rule maps an example to a vector of per-label confidence scores: the
head scores if the body's conditions all hold, the null vector otherwise.
An ensemble predicts the element-wise sum over its rules.  Missing
attribute values satisfy no condition, so an example with a missing value
is never covered by a condition on that attribute.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import MISSING_CODE, AttributeSchema, Dataset, Example
from .errors import SchemaError

OP_EQ = "=="
OP_NEQ = "!="
OP_LEQ = "<="
OP_GT = ">"

NOMINAL_OPS = (OP_EQ, OP_NEQ)
NUMERIC_OPS = (OP_LEQ, OP_GT)


@dataclass(frozen=True)
class Condition:
    """A single comparison of one attribute against a constant.

    Numeric attributes use <= and >, nominal attributes use == and !=.
    """

    attribute_index: int
    operator: str
    threshold: float | str

    def __post_init__(self):
        if self.operator not in NOMINAL_OPS + NUMERIC_OPS:
            raise SchemaError(f"unknown operator {self.operator!r}")

    def holds(self, value) -> bool:
        """Evaluate against a raw value; None (missing) satisfies nothing."""
        if value is None:
            return False
        if self.operator in NUMERIC_OPS:
            if not isinstance(value, (int, float)):
                raise SchemaError(
                    f"numeric condition on attribute {self.attribute_index} "
                    f"got non-numeric value {value!r}"
                )
            return value <= self.threshold if self.operator == OP_LEQ else value > self.threshold
        if not isinstance(value, str):
            raise SchemaError(
                f"nominal condition on attribute {self.attribute_index} "
                f"got non-nominal value {value!r}"
            )
        return (value == self.threshold) == (self.operator == OP_EQ)

    def __str__(self):
        return f"x{self.attribute_index} {self.operator} {self.threshold}"


@dataclass(frozen=True)
class Body:
    """Conjunction of conditions; the empty body covers every example."""

    conditions: tuple[Condition, ...] = ()

    def __len__(self):
        return len(self.conditions)

    def __str__(self):
        return " and ".join(str(c) for c in self.conditions) if self.conditions else "<always>"


@dataclass(frozen=True, eq=False)
class Head:
    """Per-label confidence scores; single-label heads are zero elsewhere.

    ``label_index`` is None for a full (all-label) head.
    """

    scores: np.ndarray
    label_index: int | None = None

    def __eq__(self, other):
        if not isinstance(other, Head):
            return NotImplemented
        return self.label_index == other.label_index and np.array_equal(
            self.scores, other.scores
        )

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        if not np.all(np.isfinite(scores)):
            raise ValueError("head scores must be finite")
        if self.label_index is not None:
            if not 0 <= self.label_index < len(scores):
                raise ValueError(
                    f"label index {self.label_index} outside 0..{len(scores) - 1}"
                )
            mask = np.ones(len(scores), dtype=bool)
            mask[self.label_index] = False
            if np.any(scores[mask] != 0.0):
                raise ValueError("single-label head has nonzero off-label scores")
        scores.setflags(write=False)
        object.__setattr__(self, "scores", scores)

    @property
    def is_single_label(self) -> bool:
        return self.label_index is not None

    def scaled(self, factor: float) -> "Head":
        return Head(self.scores * factor, self.label_index)


@dataclass(frozen=True)
class Rule:
    body: Body
    head: Head

    def __str__(self):
        return f"if {self.body} then {np.array2string(self.head.scores, precision=4)}"


@dataclass(frozen=True)
class EnsembleMeta:
    """Training provenance carried by a serialized model."""

    loss: str
    shrinkage: float
    l2_weight: float
    seed: int


@dataclass
class Ensemble:
    """Ordered rule list whose first member covers every example.

    ``label_vectors`` holds the distinct training label rows in first
    occurrence order; it is what known-vector decoding selects from.
    """

    rules: list[Rule]
    label_names: list[str]
    schema: AttributeSchema
    meta: EnsembleMeta
    label_vectors: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if not self.rules:
            raise ValueError("an ensemble needs at least one rule")
        if len(self.rules[0].body) != 0:
            raise ValueError("the first rule must have an empty body")
        n_labels = len(self.label_names)
        for rule in self.rules:
            if rule.head.scores.shape != (n_labels,):
                raise ValueError("rule head length does not match label count")

    def __len__(self):
        return len(self.rules)

    @property
    def n_labels(self) -> int:
        return len(self.label_names)


def covers(body: Body, example: Example) -> bool:
    """True iff every condition holds for the example."""
    return all(cond.holds(example.values[cond.attribute_index]) for cond in body.conditions)


def apply_rule(rule: Rule, example: Example) -> np.ndarray:
    """Head scores if covered, else the null vector."""
    if covers(rule.body, example):
        return rule.head.scores.copy()
    return np.zeros_like(rule.head.scores)


def aggregate(ensemble: Ensemble, example: Example) -> np.ndarray:
    """Vector sum of all rule predictions for one example."""
    total = np.zeros(ensemble.n_labels)
    for rule in ensemble.rules:
        total += apply_rule(rule, example)
    return total


def condition_mask(dataset: Dataset, condition: Condition) -> np.ndarray:
    """Boolean coverage of one condition over all examples (vectorized).

    Missing values (NaN / missing code) never satisfy a condition.
    """
    attr = dataset.schema[condition.attribute_index]
    column = dataset.columns[condition.attribute_index]
    if condition.operator in NUMERIC_OPS:
        if not attr.is_numeric:
            raise SchemaError(
                f"numeric condition applied to nominal attribute {attr.name!r}"
            )
        # NaN comparisons are False, which is exactly the missing-value rule.
        with np.errstate(invalid="ignore"):
            if condition.operator == OP_LEQ:
                return column <= condition.threshold
            return column > condition.threshold
    if attr.is_numeric:
        raise SchemaError(f"nominal condition applied to numeric attribute {attr.name!r}")
    try:
        code = attr.values.index(condition.threshold)
    except ValueError:
        raise SchemaError(
            f"value {condition.threshold!r} is not in the domain of attribute {attr.name!r}"
        ) from None
    if condition.operator == OP_EQ:
        return column == code
    return (column != code) & (column != MISSING_CODE)


def body_mask(dataset: Dataset, body: Body) -> np.ndarray:
    mask = np.ones(dataset.n_examples, dtype=bool)
    for condition in body.conditions:
        mask &= condition_mask(dataset, condition)
    return mask


def ensemble_scores(ensemble: Ensemble, dataset: Dataset) -> np.ndarray:
    """Aggregated confidence scores for every example, shape (n, n_labels)."""
    scores = np.zeros((dataset.n_examples, ensemble.n_labels))
    for rule in ensemble.rules:
        scores[body_mask(dataset, rule.body)] += rule.head.scores
    return scores
