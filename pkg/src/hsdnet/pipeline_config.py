"""
Pipeline configuration and its flat ``key = value`` file form.

Lines are parsed with python-dotenv, so ``#`` comments, blank lines and
quoting behave as in a ``.env`` file. List values are comma separated and
``auto`` stands for "derive from the architecture".
"""

from io import StringIO
from pathlib import Path
from typing import Any, Literal

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .decompose.policy import DecomposePolicy
from .model.chain import NetworkConfig
from .training.datasets import SynthSpec
from .training.trainer import TrainSchedule


class DatasetSource(BaseModel):
    model_config = ConfigDict(frozen=True)

    source: Literal["synth", "cifar"] = "synth"
    samples_per_class: int = 100
    test_samples_per_class: int = 50
    num_colors: int = 2
    noise: float = 0.15
    cifar_train_paths: tuple[str, ...] = ()
    cifar_test_paths: tuple[str, ...] = ()
    cifar_label_names: str | None = None


def desk_network() -> NetworkConfig:
    """Six-conv chain for 16x16 inputs, small enough to train on one core."""
    return NetworkConfig(
        conv_widths=(16, 16, 32, 32, 64, 64),
        pool_after=(2, 4, 6),
        num_classes=8,
        input_size=16,
    )


class PipelineConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    network: NetworkConfig = Field(default_factory=desk_network)
    dataset: DatasetSource = Field(default_factory=DatasetSource)
    schedule: TrainSchedule = Field(default_factory=lambda: TrainSchedule(epochs=30, initial_lr=0.05))
    finetune: TrainSchedule = Field(default_factory=lambda: TrainSchedule(epochs=10, initial_lr=0.01))
    policy: DecomposePolicy = Field(default_factory=DecomposePolicy)
    seed: int = 7
    iscv_split: Literal["train", "test"] = "train"
    iscv_batch_size: int = 64
    latency_reps: int = 20
    sweep_cardinalities: tuple[int, ...] = (2, 3, 4)
    sweep_combinations: int = 10

    @model_validator(mode="after")
    def _check(self) -> "PipelineConfig":
        if self.dataset.source == "synth" and self.network.input_channels != 3:
            raise ValueError("the synthetic dataset produces RGB images; set input_channels = 3")
        if self.dataset.source == "cifar":
            if not self.dataset.cifar_train_paths or not self.dataset.cifar_test_paths:
                raise ValueError("dataset_source = cifar needs cifar_train_path and cifar_test_path")
            if self.network.input_size != 32 or self.network.input_channels != 3:
                raise ValueError("CIFAR images are 3 x 32 x 32; adjust input_size/input_channels")
        return self

    def synth_spec(self) -> SynthSpec:
        return SynthSpec(
            num_classes=self.network.num_classes,
            samples_per_class=self.dataset.samples_per_class,
            test_samples_per_class=self.dataset.test_samples_per_class,
            image_size=self.network.input_size,
            num_colors=self.dataset.num_colors,
            noise=self.dataset.noise,
            seed=self.seed,
        )

    def check_paths(self) -> None:
        """Referenced input files must exist when a command starts."""
        paths = [*self.dataset.cifar_train_paths, *self.dataset.cifar_test_paths]
        if self.dataset.cifar_label_names:
            paths.append(self.dataset.cifar_label_names)
        if self.dataset.source == "cifar":
            missing = [p for p in paths if not Path(p).exists()]
            if missing:
                raise FileNotFoundError(f"config references missing files: {missing}")


# flat key -> (section, field); section None is a top-level field
FLAT_KEYS: dict[str, tuple[str | None, str]] = {
    "conv_widths": ("network", "conv_widths"),
    "pool_after": ("network", "pool_after"),
    "num_classes": ("network", "num_classes"),
    "input_channels": ("network", "input_channels"),
    "input_size": ("network", "input_size"),
    "use_affine": ("network", "use_affine"),
    "class_names": ("network", "class_names"),
    "dataset_source": ("dataset", "source"),
    "synth_samples_per_class": ("dataset", "samples_per_class"),
    "synth_test_samples_per_class": ("dataset", "test_samples_per_class"),
    "synth_num_colors": ("dataset", "num_colors"),
    "synth_noise": ("dataset", "noise"),
    "cifar_train_path": ("dataset", "cifar_train_paths"),
    "cifar_test_path": ("dataset", "cifar_test_paths"),
    "cifar_label_names": ("dataset", "cifar_label_names"),
    "epochs": ("schedule", "epochs"),
    "initial_lr": ("schedule", "initial_lr"),
    "lr_decay_factor": ("schedule", "lr_decay_factor"),
    "lr_decay_every_epochs": ("schedule", "lr_decay_every_epochs"),
    "batch_size": ("schedule", "batch_size"),
    "finetune_epochs": ("finetune", "epochs"),
    "finetune_lr": ("finetune", "initial_lr"),
    "finetune_lr_decay_factor": ("finetune", "lr_decay_factor"),
    "finetune_lr_decay_every_epochs": ("finetune", "lr_decay_every_epochs"),
    "finetune_batch_size": ("finetune", "batch_size"),
    "clustering_layers": ("policy", "clustering_layers"),
    "min_classes_per_node": ("policy", "min_classes_per_node"),
    "channel_keep_fraction": ("policy", "channel_keep_fraction"),
    "trunk_full_width": ("policy", "trunk_full_width"),
    "seed": (None, "seed"),
    "iscv_split": (None, "iscv_split"),
    "iscv_batch_size": (None, "iscv_batch_size"),
    "latency_reps": (None, "latency_reps"),
    "sweep_cardinalities": (None, "sweep_cardinalities"),
    "sweep_combinations": (None, "sweep_combinations"),
}

LIST_KEYS = {
    "conv_widths",
    "pool_after",
    "class_names",
    "cifar_train_path",
    "cifar_test_path",
    "clustering_layers",
    "sweep_cardinalities",
}
OPTIONAL_KEYS = {"class_names", "clustering_layers", "cifar_label_names"}
AUTO = "auto"


def _format_value(key: str, value: Any) -> str:
    if value is None:
        return AUTO
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        items = [str(v) for v in value]
        bad = [v for v in items if "," in v or v != v.strip()]
        if bad:
            raise ValueError(f"{key}: list items may not contain commas or surrounding spaces: {bad}")
        return ",".join(items)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_value(key: str, raw: str | None) -> Any:
    text = (raw or "").strip()
    if key in OPTIONAL_KEYS and text.lower() == AUTO:
        return None
    if key in LIST_KEYS:
        return tuple(item.strip() for item in text.split(",") if item.strip())
    return text


def serialize_config(config: PipelineConfig) -> str:
    lines = ["# hsdnet pipeline configuration"]
    section: str | None = "network"
    for key, (sec, name) in FLAT_KEYS.items():
        if sec != section:
            lines.append("")
            section = sec
        owner = getattr(config, sec) if sec is not None else config
        lines.append(f"{key} = {_format_value(key, getattr(owner, name))}")
    return "\n".join(lines) + "\n"


def parse_config_text(text: str, source: str = "<config>") -> PipelineConfig:
    flat = dotenv_values(stream=StringIO(text), interpolate=False)
    unknown = sorted(k for k in flat if k not in FLAT_KEYS)
    if unknown:
        raise ValueError(f"{source}: unknown config keys {unknown}")
    nested: dict[str, Any] = {}
    for key, raw in flat.items():
        sec, name = FLAT_KEYS[key]
        target = nested.setdefault(sec, {}) if sec is not None else nested
        target[name] = _parse_value(key, raw)
    defaults = PipelineConfig()
    for sec in ("network", "dataset", "schedule", "finetune", "policy"):
        if sec in nested:
            base = getattr(defaults, sec).model_dump()
            base.update(nested[sec])
            nested[sec] = base
    try:
        return PipelineConfig.model_validate(nested)
    except ValidationError as e:
        raise ValueError(f"{source}: invalid configuration: {e}") from e


def parse_config(path: Path | str) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")
    return parse_config_text(path.read_text(encoding="utf-8"), str(path))


def write_config(config: PipelineConfig, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialize_config(config), encoding="utf-8")
