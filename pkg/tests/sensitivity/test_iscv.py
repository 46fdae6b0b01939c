"""Impact score class vectors against a finite-difference oracle and their invariances."""

from dataclasses import replace

import numpy as np
import pytest

from hsdnet.engine import forward
from hsdnet.errors import ShapeMismatchError
from hsdnet.sensitivity import (
    ScaledLayerProbe,
    impact_scores,
    iscv_all_layers,
    load_iscv,
    normalize_iscv,
    save_iscv,
)


def oracle_raw_impacts(net, dataset, layer, eps=1e-6):
    """Per-sample central differences of p_y w.r.t. each channel multiplier."""
    x, y = dataset.images, dataset.labels
    w = np.ones(net.width(layer))
    raw = np.zeros((net.num_classes, w.size))
    rows = np.arange(len(y))
    for k in range(w.size):
        w[k] = 1 + eps
        up = forward(net, x, {layer: w}).probabilities[rows, y]
        w[k] = 1 - eps
        down = forward(net, x, {layer: w}).probabilities[rows, y]
        w[k] = 1.0
        np.add.at(raw[:, k], y, np.abs((up - down) / (2 * eps)))
    return raw


@pytest.mark.parametrize("layer", [1, 2, 4])
def test_matches_finite_differences(tiny_chain, tiny_train, layer):
    raw = impact_scores(tiny_chain, tiny_train, layer, batch_size=7)
    np.testing.assert_allclose(raw, oracle_raw_impacts(tiny_chain, tiny_train, layer), rtol=1e-4, atol=1e-10)


def test_duplicated_samples_double_raw_scores(tiny_chain, tiny_train):
    doubled = replace(
        tiny_train,
        images=np.concatenate([tiny_train.images, tiny_train.images]),
        labels=np.concatenate([tiny_train.labels, tiny_train.labels]),
    )
    once = impact_scores(tiny_chain, tiny_train, 3)
    twice = impact_scores(tiny_chain, doubled, 3)
    np.testing.assert_allclose(twice, 2 * once, rtol=1e-12)


def test_sample_order_does_not_matter(tiny_chain, tiny_train):
    perm = np.random.default_rng(11).permutation(len(tiny_train))
    shuffled = replace(tiny_train, images=tiny_train.images[perm], labels=tiny_train.labels[perm])
    a = iscv_all_layers(tiny_chain, tiny_train, [2], batch_size=5)[2]
    b = iscv_all_layers(tiny_chain, shuffled, [2], batch_size=5)[2]
    np.testing.assert_allclose(a.scores, b.scores, rtol=1e-10)


class TestNormalize:
    def test_row_divided_by_max(self):
        m = normalize_iscv(np.array([[2.0, 4.0, 1.0]]))
        np.testing.assert_allclose(m.scores, [[0.5, 1.0, 0.25]])

    def test_zero_row_stays_zero(self):
        m = normalize_iscv(np.array([[0.0, 0.0], [1.0, 3.0]]))
        np.testing.assert_array_equal(m.scores[0], [0.0, 0.0])
        assert m.scores.max() == 1.0

    def test_negative_scores_rejected(self):
        with pytest.raises(ValueError):
            normalize_iscv(np.array([[-1.0, 1.0]]))


def test_dead_channel_scores_zero(tiny_chain, tiny_train):
    # A channel whose filter and bias are zero outputs 0 after ReLU everywhere
    tensors = dict(tiny_chain.params.tensors)
    tensors["conv2.weight"] = tensors["conv2.weight"].copy()
    tensors["conv2.weight"][3] = 0.0
    tensors["conv2.bias"] = np.zeros_like(tensors["conv2.bias"])
    net = tiny_chain.with_params(tiny_chain.params.merged(tensors))
    m = iscv_all_layers(net, tiny_train, [2])[2]
    np.testing.assert_array_equal(m.raw_scores[:, 3], 0.0)
    np.testing.assert_array_equal(m.scores[:, 3], 0.0)


def test_single_layer_equals_raw_then_normalize(tiny_chain, tiny_train):
    all_layers = iscv_all_layers(tiny_chain, tiny_train)
    assert sorted(all_layers) == [1, 2, 3, 4]
    single = normalize_iscv(impact_scores(tiny_chain, tiny_train, 3), 3)
    np.testing.assert_allclose(all_layers[3].scores, single.scores, rtol=1e-12)
    assert all_layers[3].class_list == tiny_chain.class_list
    assert all(m.scores.max() <= 1.0 for m in all_layers.values())


def test_absent_classes_are_reported(tiny_chain, tiny_train):
    partial = tiny_train.subset([0, 1, 2, 3])
    m = iscv_all_layers(tiny_chain, partial, [1])[1]
    assert m.absent == (4, 5)
    np.testing.assert_array_equal(m.scores[4:], 0.0)


def test_rejects_non_conv_layer(tiny_chain):
    with pytest.raises(ShapeMismatchError, match="layer 5"):
        ScaledLayerProbe.at(tiny_chain, 5)


def test_rejects_empty_dataset(tiny_chain, tiny_train):
    with pytest.raises(ValueError, match="empty"):
        iscv_all_layers(tiny_chain, tiny_train.subset([]))


def test_store_round_trip(tmp_path, tiny_chain, tiny_train):
    matrices = iscv_all_layers(tiny_chain, tiny_train.subset([0, 1, 2, 3, 4]), [2, 4])
    path = tmp_path / "iscv.hsdt"
    save_iscv(matrices, path)
    loaded = load_iscv(path)
    assert sorted(loaded) == [2, 4]
    for l in (2, 4):
        np.testing.assert_array_equal(loaded[l].scores, matrices[l].scores)
        np.testing.assert_array_equal(loaded[l].raw_scores, matrices[l].raw_scores)
        assert loaded[l].absent == (5,)
        assert loaded[l].class_list == tiny_chain.class_list
