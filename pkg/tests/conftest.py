"""Shared builders for randomized test data."""

from __future__ import annotations

import numpy as np
import pytest

from ruleboost.dataset import NOMINAL, NUMERIC, Attribute, AttributeSchema, Dataset


def random_dataset(
    rng: np.random.Generator,
    n_examples: int,
    n_numeric: int,
    n_nominal: int = 0,
    n_labels: int = 2,
    missing_rate: float = 0.0,
    n_nominal_values: int = 3,
) -> Dataset:
    """Random mixed-attribute dataset with +-1 labels."""
    attributes = [Attribute(f"num{j}", NUMERIC) for j in range(n_numeric)]
    values = tuple(f"v{k}" for k in range(n_nominal_values))
    attributes += [Attribute(f"nom{j}", NOMINAL, values) for j in range(n_nominal)]
    schema = AttributeSchema(tuple(attributes))

    rows = []
    for _ in range(n_examples):
        row = []
        for j in range(n_numeric):
            if missing_rate and rng.random() < missing_rate:
                row.append(None)
            else:
                row.append(float(rng.normal()))
        for j in range(n_nominal):
            if missing_rate and rng.random() < missing_rate:
                row.append(None)
            else:
                row.append(values[rng.integers(0, len(values))])
        rows.append(row)
    labels = rng.choice([-1, 1], size=(n_examples, n_labels)).astype(np.int8)
    return Dataset.from_rows(schema, rows, labels, [f"l{k}" for k in range(n_labels)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
