"""Per-class channel impact scores (Iscv) of a trained chain."""

from .iscv import IscvMatrix, ScaledLayerProbe, impact_scores, iscv_all_layers, normalize_iscv
from .store import load_iscv, save_iscv

__all__ = [
    "IscvMatrix",
    "ScaledLayerProbe",
    "impact_scores",
    "iscv_all_layers",
    "load_iscv",
    "normalize_iscv",
    "save_iscv",
]
