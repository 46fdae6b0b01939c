"""SGD training, fine-tuning and evaluation."""

from dataclasses import replace

import numpy as np
import pytest
from conftest import hand_tree, random_tree_params

from hsdnet.engine import forward
from hsdnet.errors import NonFiniteError, ShapeMismatchError, TreeInvariantError
from hsdnet.subnet import extract_subnetwork
from hsdnet.training import TrainSchedule, accuracy_from_logits, evaluate, finetune, train
from hsdnet.training.trainer import predict
from hsdnet.transfer import transfer_all


class TestSchedule:
    def test_step_decay(self):
        schedule = TrainSchedule(initial_lr=0.1, lr_decay_factor=10, lr_decay_every_epochs=50)
        assert schedule.lr_at(0) == pytest.approx(0.1)
        assert schedule.lr_at(49) == pytest.approx(0.1)
        assert schedule.lr_at(50) == pytest.approx(0.01)
        assert schedule.lr_at(120) == pytest.approx(0.001)

    @pytest.mark.parametrize("field", ["initial_lr", "batch_size", "lr_decay_every_epochs"])
    def test_rejects_non_positive(self, field):
        with pytest.raises(ValueError):
            TrainSchedule(**{field: 0})


class TestTrain:
    def test_zero_epochs_leave_parameters_unchanged(self, tiny_chain, tiny_train):
        trained, history = train(tiny_chain, tiny_train, TrainSchedule(epochs=0))
        assert history.epochs == []
        for key in tiny_chain.params:
            np.testing.assert_array_equal(trained.params[key], tiny_chain.params[key])

    def test_loss_goes_down(self, tiny_chain, tiny_train):
        _, history = train(tiny_chain, tiny_train, TrainSchedule(epochs=8, initial_lr=0.05, batch_size=8))
        assert history.epochs[-1].loss < history.initial_loss
        assert len(history.epochs) == 8
        assert history.final_accuracy == history.epochs[-1].accuracy

    def test_same_seed_same_result(self, tiny_chain, tiny_train):
        schedule = TrainSchedule(epochs=2, initial_lr=0.05, batch_size=5, seed=4)
        a, _ = train(tiny_chain, tiny_train, schedule)
        b, _ = train(tiny_chain, tiny_train, schedule)
        for key in a.params:
            np.testing.assert_array_equal(a.params[key], b.params[key])

    def test_non_finite_loss_names_epoch_and_batch(self, tiny_chain, tiny_train):
        tensors = dict(tiny_chain.params.tensors)
        tensors["head.bias"] = np.full_like(tensors["head.bias"], np.nan)
        broken = tiny_chain.with_params(tiny_chain.params.merged(tensors))
        with pytest.raises(NonFiniteError, match="epoch 0, batch 0"):
            train(broken, tiny_train, TrainSchedule(epochs=1))

    def test_class_list_must_match(self, tiny_chain, tiny_train):
        renamed = replace(tiny_train, class_list=tuple(f"c{i}" for i in range(6)))
        with pytest.raises(ShapeMismatchError):
            train(tiny_chain, renamed, TrainSchedule(epochs=1))


class TestFinetune:
    def test_requires_parameters(self, tiny_train):
        with pytest.raises(TreeInvariantError):
            finetune(hand_tree(), tiny_train, TrainSchedule(epochs=1))

    def test_requires_covered_labels(self, tiny_chain, tiny_train):
        sub = extract_subnetwork(transfer_all(tiny_chain, hand_tree()), [0])
        with pytest.raises(ValueError, match=r"\[3, 4, 5\]"):
            finetune(sub, tiny_train, TrainSchedule(epochs=1))

    def test_updates_every_edge(self, tiny_chain, tiny_train):
        tree = transfer_all(tiny_chain, hand_tree())
        tuned, history = finetune(tree, tiny_train, TrainSchedule(epochs=1, initial_lr=0.01, batch_size=8))
        assert len(history.epochs) == 1
        changed = [k for k in tree.params if not np.array_equal(tree.params[k], tuned.params[k])]
        assert set(changed) == set(tree.params)


class TestEvaluate:
    def test_accuracy_from_logits(self):
        logits = np.array([[0.1, 0.9, 0.0], [2.0, 1.0, 3.0]])
        assert accuracy_from_logits(logits, np.array([1, 2])) == 1.0
        # restricted to {0, 1} the second sample predicts 0
        assert accuracy_from_logits(logits, np.array([1, 0]), restrict_to=[0, 1]) == 1.0

    def test_matches_direct_prediction(self, tiny_chain, tiny_test):
        expected = float(np.mean(np.argmax(forward(tiny_chain, tiny_test.images).logits, axis=1) == tiny_test.labels))
        assert evaluate(tiny_chain, tiny_test, batch_size=4) == pytest.approx(expected)

    def test_restricted_subnetwork_matches_full_tree(self, tiny_test):
        tree = random_tree_params(hand_tree(), seed=6)
        subset = [3, 5]
        sub = extract_subnetwork(tree, subset)
        assert evaluate(sub, tiny_test, subset) == evaluate(tree, tiny_test, subset)
        data = tiny_test.subset(subset)
        np.testing.assert_array_equal(predict(sub, data.images, subset), predict(tree, data.images, subset))

    def test_restriction_must_be_known(self, tiny_chain, tiny_test):
        with pytest.raises(ValueError):
            evaluate(tiny_chain, tiny_test, [7])
        with pytest.raises(ValueError):
            evaluate(tiny_chain, tiny_test, [])
