"""Dense float64 tensor engine: passes, SGD, accounting and the container codec."""

from .accounting import count_macs, count_params
from .graph import ComputeNode, HeadSpec, Network, ParamStore
from .losses import softmax_cross_entropy, true_class_probability_seed
from .optim import sgd_step
from .passes import ForwardResult, GradientStore, backward, forward
from .specs import LayerKind, LayerSpec

__all__ = [
    "ComputeNode",
    "ForwardResult",
    "GradientStore",
    "HeadSpec",
    "LayerKind",
    "LayerSpec",
    "Network",
    "ParamStore",
    "backward",
    "count_macs",
    "count_params",
    "forward",
    "sgd_step",
    "softmax_cross_entropy",
    "true_class_probability_seed",
]
