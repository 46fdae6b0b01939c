"""
Pipeline stages over files in one output directory.

Every stage reads what earlier stages wrote and writes its own artifact, so
each step can be rerun and inspected on its own.
"""

import json
from collections.abc import Iterable
from pathlib import Path
from typing import Any

from .decompose.builder import build_hsd
from .errors import MissingArtifactError, TreeInvariantError
from .model.chain import ChainNet, NetworkConfig, build_chain
from .model.dot import export_dot
from .model.io import load_chain, load_tree, save
from .model.tree import HsdTree, validate_tree
from .pipeline_config import PipelineConfig
from .sensitivity.iscv import iscv_all_layers
from .sensitivity.store import load_iscv, save_iscv
from .subnet.extract import extract_subnetwork, path_subnetwork
from .subnet.metrics import compute_metrics
from .subnet.sweep import subset_sweep, write_sweep_csv
from .training.datasets import Dataset, load_cifar_binary, read_label_names, synth_dataset
from .training.trainer import TrainHistory, evaluate, finetune, train
from .transfer import transfer_all
from .utils.logger import get_logger

logger = get_logger(__name__)

# artifact -> (file name, command that produces it)
ARTIFACTS: dict[str, tuple[str, str]] = {
    "chain": ("chain.hsdt", "train-base"),
    "iscv": ("iscv.hsdt", "iscv"),
    "tree_layout": ("tree_layout.hsdt", "decompose"),
    "tree_transferred": ("tree_transferred.hsdt", "transfer"),
    "tree": ("tree.hsdt", "finetune"),
    "subnet": ("subnet.hsdt", "subnet"),
}


def artifact_path(out_dir: Path, name: str) -> Path:
    return Path(out_dir) / ARTIFACTS[name][0]


def require(out_dir: Path, name: str) -> Path:
    path = artifact_path(out_dir, name)
    if not path.exists():
        file_name, command = ARTIFACTS[name]
        raise MissingArtifactError(
            f"missing {command} output {file_name} in {out_dir}; run `hsdnet {command}` first"
        )
    return path


def load_datasets(config: PipelineConfig) -> tuple[Dataset, Dataset]:
    """Train and test splits, standardized with training statistics."""
    config.check_paths()
    src = config.dataset
    if src.source == "synth":
        spec = config.synth_spec()
        train_set = synth_dataset(spec, "train").standardize()
        test_set = synth_dataset(spec, "test").standardize(train_set.mean, train_set.std)
    else:
        names = (
            read_label_names(src.cifar_label_names)
            if src.cifar_label_names
            else config.network.resolved_class_names()
        )
        if len(names) != config.network.num_classes:
            raise ValueError(f"{len(names)} CIFAR label names for {config.network.num_classes} classes")
        train_set = load_cifar_binary(src.cifar_train_paths, names, "train")
        test_set = load_cifar_binary(
            src.cifar_test_paths, names, "test", mean=train_set.mean, std=train_set.std
        )
    return train_set, test_set


def resolve_network(config: PipelineConfig, dataset: Dataset) -> NetworkConfig:
    """The configured architecture, named after the dataset's classes unless names are set."""
    if config.network.class_names is not None:
        return config.network
    return config.network.model_copy(update={"class_names": dataset.class_list})


def _write_json(path: Path, payload: Any) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info(f"Wrote {path}")


def _write_history(out_dir: Path, name: str, history: TrainHistory) -> None:
    _write_json(out_dir / f"history_{name}.json", history.model_dump())


def _latest_tree(out_dir: Path, parameterized: bool = True) -> HsdTree:
    order = ["tree", "tree_transferred"] + ([] if parameterized else ["tree_layout"])
    for name in order:
        path = artifact_path(out_dir, name)
        if path.exists():
            return load_tree(path)
    return load_tree(require(out_dir, order[-1]))


def train_base(config: PipelineConfig, out_dir: Path) -> ChainNet:
    train_set, _ = load_datasets(config)
    chain = build_chain(resolve_network(config, train_set), seed=config.seed)
    chain, history = train(chain, train_set, config.schedule.model_copy(update={"seed": config.seed}))
    out_dir.mkdir(parents=True, exist_ok=True)
    save(chain, artifact_path(out_dir, "chain"))
    _write_history(out_dir, "base", history)
    return chain


def compute_iscv(config: PipelineConfig, out_dir: Path) -> None:
    chain = load_chain(require(out_dir, "chain"))
    train_set, test_set = load_datasets(config)
    data = train_set if config.iscv_split == "train" else test_set
    save_iscv(iscv_all_layers(chain, data, batch_size=config.iscv_batch_size), artifact_path(out_dir, "iscv"))


def decompose(config: PipelineConfig, out_dir: Path) -> HsdTree:
    iscv_path = require(out_dir, "iscv")
    chain_path = require(out_dir, "chain")
    tree = build_hsd(load_chain(chain_path), load_iscv(iscv_path), config.policy)
    save(tree, artifact_path(out_dir, "tree_layout"))
    return tree


def transfer(config: PipelineConfig, out_dir: Path) -> HsdTree:
    chain_path = require(out_dir, "chain")
    layout_path = require(out_dir, "tree_layout")
    tree = transfer_all(load_chain(chain_path), load_tree(layout_path))
    save(tree, artifact_path(out_dir, "tree_transferred"))
    return tree


def finetune_tree(config: PipelineConfig, out_dir: Path) -> HsdTree:
    tree = load_tree(require(out_dir, "tree_transferred"))
    train_set, _ = load_datasets(config)
    tree, history = finetune(tree, train_set, config.finetune.model_copy(update={"seed": config.seed}))
    report = validate_tree(tree)
    if not report.ok:
        raise TreeInvariantError("; ".join(report.violations))
    save(tree, artifact_path(out_dir, "tree"))
    _write_history(out_dir, "finetune", history)
    return tree


def evaluate_models(config: PipelineConfig, out_dir: Path, subset: list[int] | None = None) -> dict[str, Any]:
    tree = _latest_tree(out_dir)
    _, test_set = load_datasets(config)
    result: dict[str, Any] = {"subset": subset, "tree_accuracy": evaluate(tree, test_set, subset)}
    chain_path = artifact_path(out_dir, "chain")
    if chain_path.exists():
        chain_acc = evaluate(load_chain(chain_path), test_set, subset)
        result["chain_accuracy"] = chain_acc
        result["accuracy_drop"] = chain_acc - result["tree_accuracy"]
    if subset is not None:
        result["subnet_accuracy"] = evaluate(extract_subnetwork(tree, subset), test_set, subset)
    _write_json(out_dir / "eval.json", result)
    return result


def extract(config: PipelineConfig, out_dir: Path, subset: list[int]) -> HsdTree:
    sub = extract_subnetwork(_latest_tree(out_dir), subset)
    save(sub, artifact_path(out_dir, "subnet"))
    return sub


def sweep(
    config: PipelineConfig,
    out_dir: Path,
    cardinalities: Iterable[int] | None = None,
    combinations: int | None = None,
) -> Path:
    tree = _latest_tree(out_dir)
    _, test_set = load_datasets(config)
    rows = subset_sweep(
        tree,
        test_set,
        cardinalities if cardinalities is not None else config.sweep_cardinalities,
        combinations if combinations is not None else config.sweep_combinations,
        seed=config.seed,
    )
    path = out_dir / "sweep.csv"
    write_sweep_csv(rows, path)
    return path


def metrics(config: PipelineConfig, out_dir: Path, subset: list[int] | None = None) -> dict[str, Any]:
    """Tree (or subset subnetwork) against the chain, plus every leaf path on structure alone."""
    chain = load_chain(require(out_dir, "chain"))
    tree = _latest_tree(out_dir)
    _, test_set = load_datasets(config)
    reduced = extract_subnetwork(tree, subset) if subset is not None else tree
    report = compute_metrics(chain, reduced, test_set, config.latency_reps, subset)
    leaf_reports = {
        str(leaf.node_id): compute_metrics(chain, path_subnetwork(tree, leaf.node_id)).model_dump(
            include={"params_reduced", "macs_reduced", "compression_rate", "saved_computations"}
        )
        for leaf in tree.leaves()
        if not leaf.is_root
    }
    payload = {"subset": subset, "report": report.to_row(), "leaf_paths": leaf_reports}
    _write_json(out_dir / "metrics.json", payload)
    return payload


def write_dot(config: PipelineConfig, out_dir: Path) -> Path:
    tree = _latest_tree(out_dir, parameterized=False)
    path = out_dir / "tree.dot"
    path.write_text(export_dot(tree), encoding="utf-8")
    logger.info(f"Wrote {path}")
    return path
