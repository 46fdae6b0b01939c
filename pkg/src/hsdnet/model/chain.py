"""The conventional single-chain classifier and its builder."""

from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from ..engine.graph import ComputeNode, HeadSpec, ParamStore, param_key
from ..engine.specs import LayerKind, LayerSpec, conv3x3, dense, pointwise
from ..errors import ShapeMismatchError
from ..utils.logger import get_logger

logger = get_logger(__name__)

HEAD_KEY = "head"


class NetworkConfig(BaseModel):
    """Architecture of a VGG-style chain: 3x3 convs, 2x2 pools, GAP + dense head."""

    model_config = ConfigDict(frozen=True)

    conv_widths: tuple[int, ...]
    pool_after: tuple[int, ...] = ()
    num_classes: int
    input_channels: int = 3
    input_size: int = 32
    use_affine: bool = False
    class_names: tuple[str, ...] | None = None

    @field_validator("conv_widths")
    @classmethod
    def _widths_positive(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        if not v or any(w <= 0 for w in v):
            raise ValueError("conv_widths must be a nonempty list of positive widths")
        return v

    @model_validator(mode="after")
    def _check(self) -> "NetworkConfig":
        if self.num_classes < 2:
            raise ValueError("a classifier needs at least two classes")
        bad = [p for p in self.pool_after if not 1 <= p <= len(self.conv_widths)]
        if bad:
            raise ValueError(f"pool_after entries {bad} are not conv layer indices")
        if len(set(self.pool_after)) != len(self.pool_after):
            raise ValueError("pool_after has duplicates")
        if self.class_names is not None:
            if len(self.class_names) != self.num_classes:
                raise ValueError("class_names length must equal num_classes")
            if len(set(self.class_names)) != len(self.class_names):
                raise ValueError("class_names has duplicates")
        return self

    @property
    def depth(self) -> int:
        return len(self.conv_widths)

    def resolved_class_names(self) -> tuple[str, ...]:
        return self.class_names or tuple(f"class{c}" for c in range(self.num_classes))


def vgg16_config(num_classes: int = 100, input_size: int = 32) -> NetworkConfig:
    """VGG16 feature extractor (13 convs, 5 pools) with a GAP + single dense head."""
    return NetworkConfig(
        conv_widths=(64, 64, 128, 128, 256, 256, 256, 512, 512, 512, 512, 512, 512),
        pool_after=(2, 4, 7, 10, 13),
        num_classes=num_classes,
        input_size=input_size,
    )


def block_layers(
    in_channels: int, out_channels: int, pooled: bool, use_affine: bool
) -> tuple[LayerSpec, ...]:
    """conv3x3 (-> affine) -> relu (-> 2x2 max-pool)."""
    layers = [conv3x3(in_channels, out_channels)]
    if use_affine:
        layers.append(pointwise(LayerKind.AFFINE, out_channels))
    layers.append(pointwise(LayerKind.RELU, out_channels))
    if pooled:
        layers.append(pointwise(LayerKind.MAXPOOL2X2, out_channels))
    return tuple(layers)


def conv_key(layer_index: int) -> str:
    return f"conv{layer_index}"


@dataclass(frozen=True, eq=False)
class ChainNet:
    """A chain network: every node has exactly one child."""

    config: NetworkConfig
    params: ParamStore

    @property
    def class_list(self) -> tuple[str, ...]:
        return self.config.resolved_class_names()

    @property
    def num_classes(self) -> int:
        return self.config.num_classes

    @property
    def input_shape(self) -> tuple[int, int, int]:
        return (self.config.input_channels, self.config.input_size, self.config.input_size)

    @property
    def depth(self) -> int:
        return self.config.depth

    def conv_layer_indices(self) -> list[int]:
        return list(range(1, self.depth + 1))

    def width(self, layer_index: int) -> int:
        """Channel count K of node ``layer_index`` (the image for 0)."""
        if layer_index == 0:
            return self.config.input_channels
        return self.config.conv_widths[layer_index - 1]

    def has_pool(self, layer_index: int) -> bool:
        return layer_index in self.config.pool_after

    def block(self, layer_index: int) -> tuple[LayerSpec, ...]:
        return block_layers(
            self.width(layer_index - 1),
            self.width(layer_index),
            self.has_pool(layer_index),
            self.config.use_affine,
        )

    @cached_property
    def ordered_layers(self) -> tuple[LayerSpec, ...]:
        layers: list[LayerSpec] = []
        for l in self.conv_layer_indices():
            layers.extend(self.block(l))
        last = self.width(self.depth)
        layers.append(pointwise(LayerKind.GLOBAL_AVG_POOL, last))
        layers.append(dense(last, self.num_classes))
        layers.append(pointwise(LayerKind.SOFTMAX, self.num_classes))
        return tuple(layers)

    def compute_nodes(self) -> list[ComputeNode]:
        return list(self._compute_nodes)

    @cached_property
    def _compute_nodes(self) -> tuple[ComputeNode, ...]:
        nodes = [ComputeNode(node_id=0, parent_id=None, layer_index=0, layers=(), edge_key="input")]
        for l in self.conv_layer_indices():
            head = None
            if l == self.depth:
                head = HeadSpec(HEAD_KEY, self.width(l), tuple(range(self.num_classes)))
            nodes.append(
                ComputeNode(
                    node_id=l,
                    parent_id=l - 1,
                    layer_index=l,
                    layers=self.block(l),
                    edge_key=conv_key(l),
                    head=head,
                )
            )
        return tuple(nodes)

    def with_params(self, params: ParamStore) -> "ChainNet":
        return replace(self, params=params)


def _check_spatial(config: NetworkConfig) -> None:
    size = config.input_size
    for l in range(1, config.depth + 1):
        if l in config.pool_after:
            if size % 2:
                raise ShapeMismatchError(
                    f"layer {l}: odd spatial extent {size} reaches a 2x2 pool"
                )
            size //= 2


def init_params(nodes: list[ComputeNode], rng: np.random.Generator) -> ParamStore:
    """He-uniform convs (b = sqrt(6/fan_in)) with zero bias, dense heads at
    b = 1/sqrt(fan_in); affine layers start as identity."""
    tensors: dict[str, np.ndarray] = {}
    specs: list[tuple[str, LayerSpec]] = []
    for node in nodes:
        specs.extend((node.edge_key, spec) for spec in node.layers if spec.is_parametric)
        if node.head is not None:
            specs.append((node.head.key, node.head.dense))
    for owner, spec in specs:
        shapes = spec.param_shapes()
        if spec.kind == LayerKind.AFFINE:
            tensors[param_key(owner, "scale")] = np.ones(shapes["scale"])
            tensors[param_key(owner, "shift")] = np.zeros(shapes["shift"])
            continue
        fan_in = spec.in_channels * max(spec.kernel_size, 1) ** 2
        if spec.kind == LayerKind.DENSE:
            bound = 1.0 / np.sqrt(fan_in)
            tensors[param_key(owner, "weight")] = rng.uniform(-bound, bound, size=shapes["weight"])
            tensors[param_key(owner, "bias")] = rng.uniform(-bound, bound, size=shapes["bias"])
        else:
            bound = np.sqrt(6.0 / fan_in)
            tensors[param_key(owner, "weight")] = rng.uniform(-bound, bound, size=shapes["weight"])
            tensors[param_key(owner, "bias")] = np.zeros(shapes["bias"])
    return ParamStore(tensors)


def build_chain(config: NetworkConfig, seed: int = 0) -> ChainNet:
    """Instantiate a chain with seeded random parameters."""
    _check_spatial(config)
    skeleton = ChainNet(config=config, params=ParamStore())
    params = init_params(skeleton.compute_nodes(), np.random.default_rng(seed))
    chain = skeleton.with_params(params)
    logger.info(
        f"Built chain: {config.depth} conv layers, pools after {list(config.pool_after)}, "
        f"{config.num_classes} classes, {params.size()} parameters"
    )
    return chain
