"""Shared fixtures: seeded generators, tiny chains and tiny synthetic datasets."""

import os

# Keep test runs from writing log files
os.environ.setdefault("HSDNET_LOG_DIR", "")

import numpy as np
import pytest

from hsdnet.decompose import DecomposePolicy, build_hsd
from hsdnet.engine.graph import ParamStore
from hsdnet.model.chain import ChainNet, NetworkConfig, build_chain, init_params
from hsdnet.model.tree import ChannelSelection, HsdNode, HsdTree
from hsdnet.sensitivity import normalize_iscv
from hsdnet.training.datasets import Dataset, SynthSpec, synth_class_list, synth_dataset

TINY_SPEC = SynthSpec(num_classes=6, samples_per_class=4, test_samples_per_class=3, image_size=8, num_colors=2, seed=3)


def tiny_config(use_affine: bool = False) -> NetworkConfig:
    return NetworkConfig(
        conv_widths=(4, 6, 6, 8),
        pool_after=(2, 4),
        num_classes=TINY_SPEC.num_classes,
        input_size=TINY_SPEC.image_size,
        use_affine=use_affine,
        class_names=synth_class_list(TINY_SPEC),
    )


def finite_difference(f, x: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Central differences of scalar ``f`` w.r.t. every entry of ``x`` (mutated in place)."""
    grad = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        orig = x[idx]
        x[idx] = orig + eps
        up = f()
        x[idx] = orig - eps
        down = f()
        x[idx] = orig
        grad[idx] = (up - down) / (2 * eps)
    return grad


def assert_grad_close(analytic: np.ndarray, numeric: np.ndarray, rtol: float = 1e-5) -> None:
    np.testing.assert_allclose(analytic, numeric, rtol=rtol, atol=1e-7)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)


@pytest.fixture
def tiny_chain() -> ChainNet:
    return build_chain(tiny_config(), seed=1)


@pytest.fixture
def tiny_affine_chain() -> ChainNet:
    chain = build_chain(tiny_config(use_affine=True), seed=1)
    # Move affine layers off the identity so their gradients matter
    gen = np.random.default_rng(5)
    tensors = dict(chain.params.tensors)
    for key in tensors:
        if key.endswith(".scale") or key.endswith(".shift"):
            tensors[key] = tensors[key] + gen.normal(0.0, 0.1, size=tensors[key].shape)
    return chain.with_params(chain.params.merged(tensors))


@pytest.fixture
def tiny_train() -> Dataset:
    return synth_dataset(TINY_SPEC, "train").standardize()


@pytest.fixture
def tiny_test(tiny_train: Dataset) -> Dataset:
    return synth_dataset(TINY_SPEC, "test").standardize(tiny_train.mean, tiny_train.std)


def hand_tree(config: NetworkConfig | None = None) -> HsdTree:
    """Layout over the tiny config: trunk to layer 1, split at layer 2, two paths to layer 4."""
    config = config or tiny_config()
    layout = [
        (0, 0, None, (0, 1, 2, 3, 4, 5), (0, 1, 2)),
        (1, 1, 0, (0, 1, 2, 3, 4, 5), (0, 1, 2, 3)),
        (2, 2, 1, (0, 1, 2), (0, 2, 4)),
        (3, 2, 1, (3, 4, 5), (1, 3, 5)),
        (4, 3, 2, (0, 1, 2), (0, 1, 5)),
        (5, 3, 3, (3, 4, 5), (2, 3)),
        (6, 4, 4, (0, 1, 2), (0, 3, 5, 7)),
        (7, 4, 5, (3, 4, 5), (1, 2, 6, 7)),
    ]
    nodes = {
        node_id: HsdNode(node_id, layer, parent, classes, ChannelSelection(channels))
        for node_id, layer, parent, classes, channels in layout
    }
    return HsdTree(source=config, nodes=nodes)


def random_layout(seed: int, num_classes: int = 8) -> HsdTree:
    """Layout grown by the builder from random Iscv, clustering at layers 2 to 4."""
    config = tiny_config().model_copy(update={"num_classes": num_classes, "class_names": None})
    chain = ChainNet(config=config, params=ParamStore())
    gen = np.random.default_rng(seed)
    iscv = {
        l: normalize_iscv(gen.uniform(size=(num_classes, chain.width(l))), l)
        for l in chain.conv_layer_indices()
    }
    return build_hsd(chain, iscv, DecomposePolicy(clustering_layers=(2, 3, 4)))


def random_tree_params(tree: HsdTree, seed: int = 0) -> HsdTree:
    return tree.with_params(init_params(tree.compute_nodes(), np.random.default_rng(seed)))


@pytest.fixture(scope="session")
def trained_chain() -> ChainNet:
    """Tiny chain after a few epochs on the tiny training split."""
    from hsdnet.training.trainer import TrainSchedule, train

    data = synth_dataset(TINY_SPEC, "train").standardize()
    schedule = TrainSchedule(epochs=15, initial_lr=0.05, batch_size=8, seed=0)
    chain, _ = train(build_chain(tiny_config(), seed=1), data, schedule)
    return chain
