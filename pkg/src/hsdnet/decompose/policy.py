"""Decomposition policy: where to split and how many channels each node keeps."""

import math

from pydantic import BaseModel, ConfigDict, field_validator

from ..model.chain import NetworkConfig


class DecomposePolicy(BaseModel):
    """``clustering_layers=None`` means the conv right before every pool."""

    model_config = ConfigDict(frozen=True)

    clustering_layers: tuple[int, ...] | None = None
    min_classes_per_node: int = 2
    channel_keep_fraction: float = 0.5
    trunk_full_width: bool = True

    @field_validator("min_classes_per_node")
    @classmethod
    def _min_classes(cls, v: int) -> int:
        if v < 2:
            raise ValueError(f"min_classes_per_node must be at least 2, got {v}")
        return v

    @field_validator("channel_keep_fraction")
    @classmethod
    def _fraction(cls, v: float) -> float:
        if not 0.0 < v <= 1.0:
            raise ValueError(f"channel_keep_fraction must lie in (0, 1], got {v}")
        return v

    def resolve_layers(self, config: NetworkConfig) -> tuple[int, ...]:
        """Concrete clustering layers for a chain architecture."""
        if self.clustering_layers is None:
            return tuple(sorted(config.pool_after))
        bad = [l for l in self.clustering_layers if not 1 <= l <= config.depth]
        if bad:
            raise ValueError(f"clustering layers {bad} are not conv layers 1..{config.depth}")
        return tuple(sorted(set(self.clustering_layers)))

    def keep_count(self, k: int) -> int:
        """``max(1, round(k * fraction))`` with halves rounded up."""
        return max(1, min(k, math.floor(k * self.channel_keep_fraction + 0.5)))
