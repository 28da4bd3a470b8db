"""Versioned JSON model documents with bit-exact score round trips.

Floats are emitted through Python's shortest round-trip repr, so parsing
a serialized model restores every score and threshold exactly.
"""

from __future__ import annotations

import json

import numpy as np

from .dataset import NOMINAL, NUMERIC, Attribute, AttributeSchema
from .errors import ParseError, UnsupportedVersionError
from .rules import Body, Condition, Ensemble, EnsembleMeta, Head, Rule

FORMAT_VERSION = 1


def ensemble_to_dict(ensemble: Ensemble) -> dict:
    schema = [
        {"name": a.name, "kind": a.kind}
        if a.is_numeric
        else {"name": a.name, "kind": a.kind, "values": list(a.values)}
        for a in ensemble.schema.attributes
    ]
    rules = [
        {
            "conditions": [
                {
                    "attribute": c.attribute_index,
                    "operator": c.operator,
                    "value": c.threshold,
                }
                for c in rule.body.conditions
            ],
            "scores": [float(s) for s in rule.head.scores],
            "label": rule.head.label_index,
        }
        for rule in ensemble.rules
    ]
    label_vectors = (
        None
        if ensemble.label_vectors is None
        else [[int(v) for v in row] for row in ensemble.label_vectors]
    )
    return {
        "format_version": FORMAT_VERSION,
        "loss": ensemble.meta.loss,
        "shrinkage": ensemble.meta.shrinkage,
        "l2_weight": ensemble.meta.l2_weight,
        "seed": ensemble.meta.seed,
        "label_names": list(ensemble.label_names),
        "schema": schema,
        "label_vectors": label_vectors,
        "rules": rules,
    }


def _require(document: dict, key: str):
    try:
        return document[key]
    except KeyError:
        raise ParseError(f"model document is missing the {key!r} field") from None


def ensemble_from_dict(document: dict) -> Ensemble:
    if not isinstance(document, dict):
        raise ParseError("model document is not an object")
    version = document.get("format_version")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"unsupported model format version {version!r}; this build reads version {FORMAT_VERSION}"
        )
    attributes = []
    for entry in _require(document, "schema"):
        kind = entry.get("kind")
        if kind == NUMERIC:
            attributes.append(Attribute(entry["name"], NUMERIC))
        elif kind == NOMINAL:
            attributes.append(Attribute(entry["name"], NOMINAL, tuple(entry["values"])))
        else:
            raise ParseError(f"unknown attribute kind {kind!r} in model schema")
    schema = AttributeSchema(tuple(attributes))
    rules = []
    for entry in _require(document, "rules"):
        conditions = tuple(
            Condition(c["attribute"], c["operator"], c["value"])
            for c in entry["conditions"]
        )
        head = Head(np.asarray(entry["scores"], dtype=np.float64), entry.get("label"))
        rules.append(Rule(Body(conditions), head))
    raw_vectors = document.get("label_vectors")
    label_vectors = None if raw_vectors is None else np.asarray(raw_vectors, dtype=np.int8)
    return Ensemble(
        rules=rules,
        label_names=list(_require(document, "label_names")),
        schema=schema,
        meta=EnsembleMeta(
            loss=_require(document, "loss"),
            shrinkage=_require(document, "shrinkage"),
            l2_weight=_require(document, "l2_weight"),
            seed=_require(document, "seed"),
        ),
        label_vectors=label_vectors,
    )


def dumps(ensemble: Ensemble) -> str:
    return json.dumps(ensemble_to_dict(ensemble), indent=2)


def loads(text: str) -> Ensemble:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid model document: {exc.msg}", line=exc.lineno) from None
    return ensemble_from_dict(document)


def save(ensemble: Ensemble, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(dumps(ensemble))
        handle.write("\n")


def load(path) -> Ensemble:
    with open(path, "r", encoding="utf-8") as handle:
        return loads(handle.read())
