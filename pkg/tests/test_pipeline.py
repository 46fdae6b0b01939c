"""End-to-end pipeline runs: a tiny one through the CLI and the default desk-scale one."""

import csv
import json

import numpy as np
import pytest

from hsdnet import pipeline
from hsdnet.cli import run_command
from hsdnet.model import load_tree, validate_tree
from hsdnet.pipeline_config import PipelineConfig, parse_config_text
from hsdnet.subnet import subset_sweep
from hsdnet.training import evaluate

TINY_RUN = """
conv_widths = 8,8,16,16
pool_after = 2,4
num_classes = 4
input_size = 8
synth_samples_per_class = 10
synth_test_samples_per_class = 5
epochs = 3
batch_size = 8
finetune_epochs = 1
finetune_batch_size = 8
latency_reps = 2
sweep_cardinalities = 2,3
sweep_combinations = 2
seed = 3
"""


@pytest.mark.slow
def test_every_command_in_order(tmp_path):
    config_path = tmp_path / "run.cfg"
    config_path.write_text(TINY_RUN)
    out = tmp_path / "out"
    common = ["--config", str(config_path), "--out", str(out)]

    for command in (["train-base"], ["iscv"], ["decompose"], ["transfer"], ["finetune"]):
        assert run_command([*command, *common]) == 0, command
    for name in ("chain", "iscv", "tree_layout", "tree_transferred", "tree"):
        assert pipeline.artifact_path(out, name).exists()
    assert validate_tree(load_tree(pipeline.artifact_path(out, "tree"))).ok

    assert run_command(["eval", *common, "--subset", "0,1"]) == 0
    evaluation = json.loads((out / "eval.json").read_text())
    assert evaluation["subset"] == [0, 1]
    assert 0.0 <= evaluation["subnet_accuracy"] <= 1.0

    assert run_command(["subnet", *common, "--subset", "0,1"]) == 0
    assert run_command(["sweep", *common]) == 0
    with (out / "sweep.csv").open(newline="") as f:
        rows = list(csv.DictReader(f))
    assert {int(r["cardinality"]) for r in rows} == {2, 3}

    assert run_command(["metrics", *common]) == 0
    report = json.loads((out / "metrics.json").read_text())["report"]
    assert report["compression_rate"] > 0

    assert run_command(["export-dot", *common]) == 0
    assert (out / "tree.dot").read_text().startswith("digraph")


@pytest.mark.slow
def test_stages_are_deterministic(tmp_path):
    config = parse_config_text(TINY_RUN)
    a = pipeline.train_base(config, tmp_path / "a")
    b = pipeline.train_base(config, tmp_path / "b")
    for key in a.params:
        assert (a.params[key] == b.params[key]).all()


@pytest.mark.slow
def test_desk_scale_run_meets_accuracy_floors(tmp_path):
    config = PipelineConfig()
    assert (config.network.num_classes, config.seed, config.dataset.source) == (8, 7, "synth")
    out = tmp_path / "desk"
    train_set, test_set = pipeline.load_datasets(config)

    chain = pipeline.train_base(config, out)
    history = json.loads((out / "history_base.json").read_text())
    assert len(history["epochs"]) == config.schedule.epochs <= 30
    assert evaluate(chain, train_set) >= 0.90

    pipeline.compute_iscv(config, out)
    layout = pipeline.decompose(config, out)
    assert 1 <= len(layout.leaves()) <= config.network.num_classes // 2
    pipeline.transfer(config, out)
    tree = pipeline.finetune_tree(config, out)

    result = pipeline.evaluate_models(config, out)
    assert result["accuracy_drop"] <= 0.02

    rows = subset_sweep(tree, test_set, (2, 3, 4), config.sweep_combinations, seed=config.seed)
    assert {r.cardinality for r in rows} == {2, 3, 4}
    at_least_full = np.mean([r.subnet_accuracy >= result["tree_accuracy"] for r in rows])
    assert at_least_full >= 0.5
