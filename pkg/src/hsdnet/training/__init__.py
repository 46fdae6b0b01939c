"""Datasets, SGD training and fine-tuning, evaluation."""

from .datasets import Dataset, SynthSpec, load_cifar_binary, load_dataset, save_dataset, synth_dataset
from .trainer import (
    EpochRecord,
    TrainHistory,
    TrainSchedule,
    accuracy_from_logits,
    evaluate,
    finetune,
    mean_loss,
    predict,
    train,
)

__all__ = [
    "Dataset",
    "EpochRecord",
    "SynthSpec",
    "TrainHistory",
    "TrainSchedule",
    "accuracy_from_logits",
    "evaluate",
    "finetune",
    "load_cifar_binary",
    "load_dataset",
    "mean_loss",
    "predict",
    "save_dataset",
    "synth_dataset",
    "train",
]
