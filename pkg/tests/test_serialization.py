"""Model document round trips and version handling."""

import json

import numpy as np
import pytest

from ruleboost.dataset import NOMINAL, NUMERIC, Attribute, AttributeSchema
from ruleboost.errors import ParseError, UnsupportedVersionError
from ruleboost.rules import Body, Condition, Ensemble, EnsembleMeta, Head, Rule
from ruleboost.serialization import dumps, ensemble_to_dict, load, loads, save


def random_ensemble(rng) -> Ensemble:
    n_labels = int(rng.integers(1, 6))
    n_numeric = int(rng.integers(1, 4))
    n_nominal = int(rng.integers(0, 3))
    attributes = [Attribute(f"num{j}", NUMERIC) for j in range(n_numeric)]
    attributes += [
        Attribute(f"nom{j}", NOMINAL, tuple(f"v{k}" for k in range(int(rng.integers(2, 5)))))
        for j in range(n_nominal)
    ]
    schema = AttributeSchema(tuple(attributes))

    def random_head():
        if rng.random() < 0.5:
            label = int(rng.integers(0, n_labels))
            scores = np.zeros(n_labels)
            scores[label] = rng.normal() * 10.0 ** rng.integers(-8, 8)
            return Head(scores, label)
        return Head(rng.normal(size=n_labels) * 10.0 ** rng.integers(-8, 8))

    rules = [Rule(Body(), random_head())]
    for _ in range(int(rng.integers(0, 8))):
        conditions = []
        for _ in range(int(rng.integers(1, 4))):
            attr_index = int(rng.integers(0, len(attributes)))
            attr = attributes[attr_index]
            if attr.is_numeric:
                operator = "<=" if rng.random() < 0.5 else ">"
                conditions.append(Condition(attr_index, operator, float(rng.normal())))
            else:
                operator = "==" if rng.random() < 0.5 else "!="
                value = attr.values[int(rng.integers(0, len(attr.values)))]
                conditions.append(Condition(attr_index, operator, value))
        rules.append(Rule(Body(tuple(conditions)), random_head()))

    label_vectors = None
    if rng.random() < 0.7:
        label_vectors = rng.choice([-1, 1], size=(int(rng.integers(1, 5)), n_labels)).astype(
            np.int8
        )
    return Ensemble(
        rules=rules,
        label_names=[f"l{k}" for k in range(n_labels)],
        schema=schema,
        meta=EnsembleMeta(
            loss=str(rng.choice(["label-wise-logistic", "example-wise-logistic"])),
            shrinkage=float(rng.uniform(0.05, 1.0)),
            l2_weight=float(rng.choice([0.0, 0.25, 1.0, 64.0])),
            seed=int(rng.integers(0, 2**31)),
        ),
        label_vectors=label_vectors,
    )


def assert_ensembles_identical(a: Ensemble, b: Ensemble):
    assert len(a) == len(b)
    for rule_a, rule_b in zip(a.rules, b.rules):
        assert rule_a.body == rule_b.body
        assert rule_a.head.label_index == rule_b.head.label_index
        # Bit-exact score round trip.
        assert rule_a.head.scores.tobytes() == rule_b.head.scores.tobytes()
    assert a.label_names == b.label_names
    assert a.schema == b.schema
    assert a.meta == b.meta
    if a.label_vectors is None:
        assert b.label_vectors is None
    else:
        assert np.array_equal(a.label_vectors, b.label_vectors)


class TestRoundTrip:
    def test_hundred_random_ensembles_bit_exact(self):
        rng = np.random.default_rng(555)
        for _ in range(100):
            ensemble = random_ensemble(rng)
            assert_ensembles_identical(ensemble, loads(dumps(ensemble)))

    def test_double_serialization_stable(self):
        rng = np.random.default_rng(556)
        ensemble = random_ensemble(rng)
        assert dumps(ensemble) == dumps(loads(dumps(ensemble)))

    def test_file_round_trip(self, tmp_path, rng):
        ensemble = random_ensemble(rng)
        path = tmp_path / "model.json"
        save(ensemble, path)
        assert_ensembles_identical(ensemble, load(path))

    def test_stable_field_order(self, rng):
        document = ensemble_to_dict(random_ensemble(rng))
        assert list(document)[:2] == ["format_version", "loss"]


class TestMalformedDocuments:
    def test_truncated_document(self, rng):
        text = dumps(random_ensemble(rng))
        with pytest.raises(ParseError):
            loads(text[: len(text) // 2])

    def test_parse_error_carries_location(self):
        try:
            loads('{"format_version": 1,\n  "loss": }')
        except ParseError as exc:
            assert exc.line == 2
        else:
            pytest.fail("expected ParseError")

    def test_version_mismatch(self, rng):
        document = ensemble_to_dict(random_ensemble(rng))
        document["format_version"] = 99
        with pytest.raises(UnsupportedVersionError):
            loads(json.dumps(document))

    def test_missing_version(self, rng):
        document = ensemble_to_dict(random_ensemble(rng))
        del document["format_version"]
        with pytest.raises(UnsupportedVersionError):
            loads(json.dumps(document))

    def test_missing_required_field(self, rng):
        document = ensemble_to_dict(random_ensemble(rng))
        del document["rules"]
        with pytest.raises(ParseError):
            loads(json.dumps(document))
