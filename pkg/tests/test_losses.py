"""Loss values and derivatives against independent finite-difference oracles."""

import math

import numpy as np
import pytest

from ruleboost.dataset import NUMERIC, Attribute, AttributeSchema, Dataset
from ruleboost.losses import (
    ExampleWiseLogisticLoss,
    LabelWiseLogisticLoss,
    init_store,
    make_loss,
    update_store,
)
from ruleboost.prediction import predict_sign
from ruleboost.rules import Body, Condition, Head, Rule

FD_STEP = 1e-6

LOSSES = [LabelWiseLogisticLoss(), ExampleWiseLogisticLoss()]


def fd_gradient(loss, y, q):
    """Central finite differences of the loss value."""
    q = np.asarray(q, dtype=np.float64)
    grad = np.zeros_like(q)
    for k in range(q.size):
        step = np.zeros_like(q)
        step[k] = FD_STEP
        grad[k] = (loss.evaluate(y, q + step) - loss.evaluate(y, q - step)) / (2 * FD_STEP)
    return grad


def fd_hessian(loss, y, q):
    """Central finite differences of the analytic gradient."""
    q = np.asarray(q, dtype=np.float64)
    n = q.size
    hess = np.zeros((n, n))
    for j in range(n):
        step = np.zeros_like(q)
        step[j] = FD_STEP
        hess[:, j] = (loss.gradient(y, q + step) - loss.gradient(y, q - step)) / (2 * FD_STEP)
    return hess


class TestLabelWiseValues:
    loss = LabelWiseLogisticLoss()

    def test_zero_score_single_label(self):
        assert self.loss.evaluate([1.0], [0.0]) == pytest.approx(math.log(2.0), abs=1e-12)

    def test_additivity_over_labels(self):
        assert self.loss.evaluate([1.0, -1.0], [0.0, 0.0]) == pytest.approx(
            2.0 * math.log(2.0), abs=1e-12
        )

    def test_mixed_scores(self):
        expected = math.log1p(math.exp(-2.0)) + math.log1p(math.exp(1.0))
        assert self.loss.evaluate([1.0, 1.0], [2.0, -1.0]) == pytest.approx(expected, rel=1e-12)

    def test_gradient_at_zero(self):
        assert np.allclose(self.loss.gradient([1.0, -1.0], [0.0, 0.0]), [-0.5, 0.5])

    def test_gradient_saturates(self):
        grad = self.loss.gradient([1.0], [80.0])
        assert abs(grad[0]) < 1e-30

    def test_hessian_at_zero(self):
        assert np.allclose(self.loss.hessian([1.0, -1.0], [0.0, 0.0]), np.diag([0.25, 0.25]))

    def test_large_scores_do_not_overflow(self):
        value = self.loss.evaluate([1.0, -1.0], [-900.0, 900.0])
        assert np.isfinite(value)
        assert value == pytest.approx(1800.0, rel=1e-9)


class TestExampleWiseValues:
    loss = ExampleWiseLogisticLoss()

    def test_single_label_reduces_to_logistic(self):
        assert self.loss.evaluate([1.0], [0.0]) == pytest.approx(math.log(2.0), abs=1e-12)

    def test_two_labels_zero_scores(self):
        assert self.loss.evaluate([1.0, 1.0], [0.0, 0.0]) == pytest.approx(
            math.log(3.0), abs=1e-12
        )

    def test_confident_correct_prediction(self):
        expected = math.log1p(2.0 * math.exp(-10.0))
        assert self.loss.evaluate([1.0, -1.0], [10.0, -10.0]) == pytest.approx(
            expected, rel=1e-12
        )

    def test_gradient_at_zero(self):
        assert np.allclose(
            self.loss.gradient([1.0, 1.0], [0.0, 0.0]), [-1.0 / 3.0, -1.0 / 3.0]
        )

    def test_hessian_at_zero(self):
        expected = np.array([[2.0, -1.0], [-1.0, 2.0]]) / 9.0
        assert np.allclose(self.loss.hessian([1.0, 1.0], [0.0, 0.0]), expected)

    def test_large_scores_do_not_overflow(self):
        value = self.loss.evaluate([1.0, 1.0], [-800.0, 0.0])
        assert np.isfinite(value)
        assert value == pytest.approx(800.0, rel=1e-9)


@pytest.mark.parametrize("loss", LOSSES, ids=lambda l: l.loss_id)
class TestDerivativeChecks:
    def test_gradient_matches_finite_differences(self, loss, rng):
        for _ in range(100):
            n_labels = int(rng.choice([1, 2, 3, 6]))
            y = rng.choice([-1.0, 1.0], size=n_labels)
            q = rng.uniform(-5.0, 5.0, size=n_labels)
            np.testing.assert_allclose(
                loss.gradient(y, q), fd_gradient(loss, y, q), rtol=1e-5, atol=1e-8
            )

    def test_hessian_matches_finite_differences(self, loss, rng):
        for _ in range(100):
            n_labels = int(rng.choice([1, 2, 3, 6]))
            y = rng.choice([-1.0, 1.0], size=n_labels)
            q = rng.uniform(-5.0, 5.0, size=n_labels)
            np.testing.assert_allclose(
                loss.hessian(y, q), fd_hessian(loss, y, q), rtol=1e-5, atol=1e-8
            )

    def test_hessian_is_symmetric(self, loss, rng):
        for _ in range(20):
            y = rng.choice([-1.0, 1.0], size=4)
            q = rng.uniform(-5.0, 5.0, size=4)
            hessian = loss.hessian(y, q)
            assert np.array_equal(hessian, hessian.T)

    def test_non_finite_scores_rejected(self, loss):
        with pytest.raises(ValueError):
            loss.evaluate([1.0, 1.0], [np.nan, 0.0])
        with pytest.raises(ValueError):
            loss.gradient([1.0, 1.0], [np.inf, 0.0])
        with pytest.raises(ValueError):
            loss.hessian([1.0, 1.0], [0.0, -np.inf])


class TestHessianStructure:
    def test_label_wise_hessian_exactly_diagonal(self, rng):
        loss = LabelWiseLogisticLoss()
        hessian = loss.hessian(rng.choice([-1.0, 1.0], 5), rng.uniform(-3, 3, 5))
        off = hessian - np.diag(np.diagonal(hessian))
        assert np.all(off == 0.0)

    def test_example_wise_has_off_diagonal_coupling(self, rng):
        loss = ExampleWiseLogisticLoss()
        hessian = loss.hessian(rng.choice([-1.0, 1.0], 3), rng.uniform(-3, 3, 3))
        off = hessian - np.diag(np.diagonal(hessian))
        assert np.any(off != 0.0)


class TestUpperBoundOnSubsetLoss:
    def test_example_wise_loss_bounds_scaled_error_indicator(self, rng):
        """Wrong sign decoding implies loss >= log 2; correct implies >= 0.

        The natural-log example-wise loss upper-bounds the subset 0/1
        indicator scaled by log 2 (the bound is exactly the indicator in
        base-2 logarithms), and the bound is tight at the decision border.
        """
        loss = ExampleWiseLogisticLoss()
        for _ in range(500):
            n_labels = int(rng.integers(1, 7))
            y = rng.choice([-1, 1], size=n_labels)
            q = rng.uniform(-4.0, 4.0, size=n_labels)
            wrong = float(np.any(predict_sign(q) != y))
            assert loss.evaluate(y.astype(float), q) >= math.log(2.0) * wrong - 1e-12


def _toy_dataset(labels):
    schema = AttributeSchema((Attribute("x", NUMERIC),))
    rows = [[float(i)] for i in range(len(labels))]
    return Dataset.from_rows(schema, rows, np.asarray(labels, dtype=np.int8),
                             [f"l{k}" for k in range(len(labels[0]))])


class TestStore:
    def test_init_store_label_wise_closed_form(self):
        dataset = _toy_dataset([[1, -1], [-1, -1], [1, 1]])
        store = init_store(make_loss("label-wise-logistic"), dataset)
        assert store.diagonal
        assert np.all(store.hessians == 0.25)
        assert np.all(np.abs(store.gradients) == 0.5)
        assert np.array_equal(np.sign(store.gradients), -dataset.labels)

    def test_init_store_example_wise_closed_form(self):
        dataset = _toy_dataset([[1, -1], [-1, -1]])
        store = init_store(make_loss("example-wise-logistic"), dataset)
        assert not store.diagonal
        assert np.allclose(np.abs(store.gradients), 1.0 / 3.0)
        assert store.gradients.shape == (2, 2)
        assert store.hessians.shape == (2, 2, 2)

    def test_store_dimensions(self):
        dataset = _toy_dataset([[1, -1, 1]] * 5)
        store = init_store(make_loss("label-wise-logistic"), dataset)
        assert store.gradients.shape == (5, 3)
        assert store.hessians.shape == (5, 3)

    def test_update_with_non_covering_rule_is_identity(self):
        dataset = _toy_dataset([[1, -1], [-1, 1]])
        loss = make_loss("label-wise-logistic")
        store = init_store(loss, dataset)
        before_g = store.gradients.copy()
        scores = np.zeros((2, 2))
        rule = Rule(Body((Condition(0, ">", 100.0),)), Head(np.array([5.0, 5.0])))
        update_store(store, loss, dataset, rule, scores)
        assert np.array_equal(store.gradients, before_g)
        assert np.all(scores == 0.0)

    def test_update_with_zero_head_is_identity(self):
        dataset = _toy_dataset([[1, -1], [-1, 1]])
        loss = make_loss("label-wise-logistic")
        store = init_store(loss, dataset)
        before_g = store.gradients.copy()
        before_h = store.hessians.copy()
        scores = np.zeros((2, 2))
        update_store(store, loss, dataset, Rule(Body(), Head(np.zeros(2))), scores)
        assert np.array_equal(store.gradients, before_g)
        assert np.array_equal(store.hessians, before_h)

    @pytest.mark.parametrize("loss_id", ["label-wise-logistic", "example-wise-logistic"])
    def test_incremental_update_equals_recomputation(self, loss_id, rng):
        """Oracle: recompute the store from the summed scores from scratch."""
        loss = make_loss(loss_id)
        labels = rng.choice([-1, 1], size=(30, 3)).astype(np.int8)
        dataset = _toy_dataset(labels.tolist())
        store = init_store(loss, dataset)
        scores = np.zeros((30, 3))
        for _ in range(6):
            threshold = float(rng.uniform(0, 30))
            operator = "<=" if rng.random() < 0.5 else ">"
            rule = Rule(
                Body((Condition(0, operator, threshold),)),
                Head(rng.normal(size=3)),
            )
            update_store(store, loss, dataset, rule, scores)
        fresh_g = loss.gradient_batch(labels.astype(float), scores)
        fresh_h = loss.hessian_batch(labels.astype(float), scores)
        np.testing.assert_allclose(store.gradients, fresh_g, rtol=0, atol=0)
        np.testing.assert_allclose(store.hessians, fresh_h, rtol=0, atol=0)

    def test_single_covered_example_gradient_matches_direct_call(self):
        dataset = _toy_dataset([[1, -1], [-1, 1], [1, 1]])
        loss = make_loss("label-wise-logistic")
        store = init_store(loss, dataset)
        scores = np.zeros((3, 2))
        head = np.array([0.7, -0.4])
        rule = Rule(Body((Condition(0, "<=", 0.5),)), Head(head))  # covers row 0 only
        update_store(store, loss, dataset, rule, scores)
        expected = loss.gradient([1.0, -1.0], head)
        np.testing.assert_allclose(store.gradients[0], expected, rtol=0, atol=0)
        assert np.all(store.gradients[1:] == init_store(loss, dataset).gradients[1:])
