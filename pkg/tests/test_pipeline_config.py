"""Flat config files."""

import pytest

from hsdnet.decompose import DecomposePolicy
from hsdnet.pipeline_config import PipelineConfig, parse_config, parse_config_text, serialize_config, write_config


def test_default_round_trip(tmp_path):
    path = tmp_path / "run.cfg"
    write_config(PipelineConfig(), path)
    assert parse_config(path) == PipelineConfig()


def test_edited_values_round_trip():
    config = PipelineConfig(
        policy=DecomposePolicy(clustering_layers=(3, 5), channel_keep_fraction=0.25, trunk_full_width=False),
        sweep_cardinalities=(2, 5),
        seed=11,
    )
    text = serialize_config(config)
    assert "clustering_layers = 3,5" in text
    assert "trunk_full_width = false" in text
    assert parse_config_text(text) == config


def test_partial_file_keeps_defaults():
    config = parse_config_text("# small run\nepochs = 3\nconv_widths = 8,8,16,16,32,32\n")
    assert config.schedule.epochs == 3
    assert config.schedule.initial_lr == PipelineConfig().schedule.initial_lr
    assert config.network.conv_widths == (8, 8, 16, 16, 32, 32)
    assert config.network.pool_after == (2, 4, 6)


def test_auto_means_derived():
    config = parse_config_text("clustering_layers = auto\nclass_names = auto\n")
    assert config.policy.clustering_layers is None
    assert config.network.class_names is None


def test_unknown_key():
    with pytest.raises(ValueError, match="unknown config keys \\['epoch'\\]"):
        parse_config_text("epoch = 3\n")


def test_invalid_value():
    with pytest.raises(ValueError, match="invalid configuration"):
        parse_config_text("channel_keep_fraction = 2\n")


def test_cifar_needs_paths():
    with pytest.raises(ValueError):
        parse_config_text("dataset_source = cifar\ninput_size = 32\n")


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        parse_config(tmp_path / "absent.cfg")
