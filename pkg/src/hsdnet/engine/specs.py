"""Layer specifications understood by the engine."""

from enum import Enum

from pydantic import BaseModel, ConfigDict, model_validator


class LayerKind(str, Enum):
    CONV3X3 = "conv3x3"
    CONV1X1 = "conv1x1"
    AFFINE = "affine"
    RELU = "relu"
    MAXPOOL2X2 = "maxpool2x2"
    GLOBAL_AVG_POOL = "global-avg-pool"
    DENSE = "dense"
    SOFTMAX = "softmax"


PARAMETRIC_KINDS = frozenset({LayerKind.CONV3X3, LayerKind.CONV1X1, LayerKind.AFFINE, LayerKind.DENSE})


class LayerSpec(BaseModel):
    """One layer of a network.

    Channel counts are carried by every kind so that shapes can be checked
    without parameters; shape-preserving kinds have ``in_channels == out_channels``.
    """

    model_config = ConfigDict(frozen=True)

    kind: LayerKind
    in_channels: int
    out_channels: int
    stride: int = 1
    padding: int = 0

    @model_validator(mode="after")
    def _check(self) -> "LayerSpec":
        if self.in_channels <= 0 or self.out_channels <= 0:
            raise ValueError(f"{self.kind.value}: channel counts must be positive")
        if self.kind == LayerKind.CONV3X3 and (self.stride, self.padding) != (1, 1):
            raise ValueError("conv3x3 uses stride 1 and padding 1")
        if self.kind == LayerKind.CONV1X1 and (self.stride, self.padding) != (1, 0):
            raise ValueError("conv1x1 uses stride 1 and padding 0")
        if self.kind in {
            LayerKind.AFFINE,
            LayerKind.RELU,
            LayerKind.MAXPOOL2X2,
            LayerKind.GLOBAL_AVG_POOL,
            LayerKind.SOFTMAX,
        } and self.in_channels != self.out_channels:
            raise ValueError(f"{self.kind.value} keeps its channel count")
        return self

    @property
    def kernel_size(self) -> int:
        return {LayerKind.CONV3X3: 3, LayerKind.CONV1X1: 1}.get(self.kind, 0)

    @property
    def is_parametric(self) -> bool:
        return self.kind in PARAMETRIC_KINDS

    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        """Shapes of the tensors this layer owns, by suffix (``weight``, ``bias``, ...)."""
        if self.kind in (LayerKind.CONV3X3, LayerKind.CONV1X1):
            k = self.kernel_size
            return {
                "weight": (self.out_channels, self.in_channels, k, k),
                "bias": (self.out_channels,),
            }
        if self.kind == LayerKind.DENSE:
            return {"weight": (self.out_channels, self.in_channels), "bias": (self.out_channels,)}
        if self.kind == LayerKind.AFFINE:
            return {"scale": (self.out_channels,), "shift": (self.out_channels,)}
        return {}


def conv3x3(in_channels: int, out_channels: int) -> LayerSpec:
    return LayerSpec(kind=LayerKind.CONV3X3, in_channels=in_channels, out_channels=out_channels, padding=1)


def conv1x1(in_channels: int, out_channels: int) -> LayerSpec:
    return LayerSpec(kind=LayerKind.CONV1X1, in_channels=in_channels, out_channels=out_channels)


def pointwise(kind: LayerKind, channels: int) -> LayerSpec:
    return LayerSpec(kind=kind, in_channels=channels, out_channels=channels)


def dense(in_features: int, out_features: int) -> LayerSpec:
    return LayerSpec(kind=LayerKind.DENSE, in_channels=in_features, out_channels=out_features)
