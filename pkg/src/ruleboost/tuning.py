"""Holdout grid search over shrinkage, L2 weight and rule count.

The rule-count axis is evaluated by walking ensemble prefixes: one
training run per (shrinkage, l2) pair at the largest rule count provides
every smaller count exactly, because per-round randomness is keyed by the
round index.  Failed grid points are recorded and do not abort the sweep.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .errors import ConfigError, RuleBoostError
from .heads import HEAD_MULTI
from .losses import LOSSES
from .metrics import hamming_loss, subset_zero_one_loss
from .prediction import decode_scores, default_decode_method
from .rules import body_mask
from .training import TrainConfig, train

_STREAM_SPLIT = 200

METRICS = {"hamming": hamming_loss, "subset01": subset_zero_one_loss}

DEFAULT_SHRINKAGES = (0.1, 0.3, 0.5)
DEFAULT_L2_WEIGHTS = (0.0, 0.25, 1.0, 4.0, 16.0, 64.0)
DEFAULT_RULE_COUNTS = tuple(range(50, 10001, 50))


@dataclass(frozen=True)
class GridSearchConfig:
    loss: str = "label-wise-logistic"
    head_mode: str = HEAD_MULTI
    shrinkages: tuple = DEFAULT_SHRINKAGES
    l2_weights: tuple = DEFAULT_L2_WEIGHTS
    rule_counts: tuple = DEFAULT_RULE_COUNTS
    validation_fraction: float = 1.0 / 3.0
    metric: str = "subset01"
    seed: int = 0
    bagging: bool = True
    feature_sampling: bool = True

    def validate(self):
        if self.loss not in LOSSES:
            raise ConfigError(f"unknown loss {self.loss!r}")
        if not self.shrinkages or not self.l2_weights or not self.rule_counts:
            raise ConfigError("every grid must be non-empty")
        if not (0.0 < self.validation_fraction < 1.0):
            raise ConfigError("validation_fraction must be in (0, 1)")
        if self.metric not in METRICS:
            raise ConfigError(f"unknown metric {self.metric!r}; expected one of {sorted(METRICS)}")
        if any(t < 1 for t in self.rule_counts):
            raise ConfigError("rule counts must be >= 1")


@dataclass(frozen=True)
class GridCell:
    shrinkage: float
    l2_weight: float
    n_rules: int
    value: float


@dataclass(frozen=True)
class GridFailure:
    shrinkage: float
    l2_weight: float
    error: str


@dataclass
class GridSearchReport:
    metric: str
    n_train: int
    n_validation: int
    cells: list[GridCell] = field(default_factory=list)
    failures: list[GridFailure] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "n_train": self.n_train,
            "n_validation": self.n_validation,
            "cells": [
                {
                    "shrinkage": c.shrinkage,
                    "l2_weight": c.l2_weight,
                    "n_rules": c.n_rules,
                    "value": c.value,
                }
                for c in self.cells
            ],
            "failures": [
                {"shrinkage": f.shrinkage, "l2_weight": f.l2_weight, "error": f.error}
                for f in self.failures
            ],
        }


def train_validation_split(dataset: Dataset, fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Deterministic shuffled holdout split; both parts are non-empty."""
    if not (0.0 < fraction < 1.0):
        raise ConfigError("validation fraction must be in (0, 1)")
    n = dataset.n_examples
    if n < 2:
        raise ConfigError("dataset too small to split")
    n_val = min(max(int(round(n * fraction)), 1), n - 1)
    order = np.random.default_rng(np.random.SeedSequence([seed, _STREAM_SPLIT])).permutation(n)
    return dataset.subset(order[n_val:]), dataset.subset(order[:n_val])


def _select_best(cells: list[GridCell]) -> GridCell:
    """Minimum metric; ties prefer fewer rules, then smaller l2, then smaller shrinkage."""
    return min(cells, key=lambda c: (c.value, c.n_rules, c.l2_weight, c.shrinkage))


def grid_search(dataset: Dataset, config: GridSearchConfig) -> tuple[TrainConfig, GridSearchReport]:
    config.validate()
    train_split, val_split = train_validation_split(
        dataset, config.validation_fraction, config.seed
    )
    report = GridSearchReport(
        metric=config.metric,
        n_train=train_split.n_examples,
        n_validation=val_split.n_examples,
    )
    metric_fn = METRICS[config.metric]
    wanted = set(config.rule_counts)
    max_rules = max(config.rule_counts)
    method = default_decode_method(config.loss)

    for shrinkage in config.shrinkages:
        for l2_weight in config.l2_weights:
            point = TrainConfig(
                loss=config.loss,
                n_rules=max_rules,
                shrinkage=shrinkage,
                l2_weight=l2_weight,
                head_mode=config.head_mode,
                bagging=config.bagging,
                feature_sampling=config.feature_sampling,
                seed=config.seed,
            )
            try:
                ensemble = train(train_split, point)
                scores = np.zeros((val_split.n_examples, ensemble.n_labels))
                for t, rule in enumerate(ensemble.rules, start=1):
                    scores[body_mask(val_split, rule.body)] += rule.head.scores
                    if t in wanted:
                        predicted = decode_scores(scores, method, ensemble.label_vectors)
                        report.cells.append(
                            GridCell(
                                shrinkage=shrinkage,
                                l2_weight=l2_weight,
                                n_rules=t,
                                value=metric_fn(val_split.labels, predicted),
                            )
                        )
            except (RuleBoostError, np.linalg.LinAlgError) as exc:
                report.failures.append(GridFailure(shrinkage, l2_weight, str(exc)))

    if not report.cells:
        raise RuleBoostError("every grid point failed; see the report failures")
    best = _select_best(report.cells)
    best_config = TrainConfig(
        loss=config.loss,
        n_rules=best.n_rules,
        shrinkage=best.shrinkage,
        l2_weight=best.l2_weight,
        head_mode=config.head_mode,
        bagging=config.bagging,
        feature_sampling=config.feature_sampling,
        seed=config.seed,
    )
    return best_config, report
