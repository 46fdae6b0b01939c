"""Efficiency metrics."""

import numpy as np
import pytest
from conftest import hand_tree, random_tree_params

from hsdnet.engine import count_macs, count_params
from hsdnet.subnet import (
    accuracy_drop,
    compression_rate,
    compute_metrics,
    extract_subnetwork,
    measure_latency,
    saved_computations,
    speedup,
)


class TestArithmetic:
    def test_compression_rate(self):
        assert compression_rate(14.7e6, 3.7e6) == pytest.approx(3.97, abs=0.005)

    def test_saved_computations(self):
        assert 100 * saved_computations(313e6, 212e6) == pytest.approx(32.27, abs=0.01)

    def test_more_costly_network_saves_negative(self):
        assert 100 * saved_computations(313e6, 438e6) == pytest.approx(-39.94, abs=0.01)

    def test_speedup_and_drop(self):
        assert speedup(0.3, 0.1) == pytest.approx(3.0)
        assert accuracy_drop(0.92, 0.90) == pytest.approx(0.02)


def test_structure_only_report(tiny_chain):
    tree = random_tree_params(hand_tree())
    sub = extract_subnetwork(tree, [4])
    report = compute_metrics(tiny_chain, sub)
    assert report.params_base == count_params(tiny_chain)
    assert report.macs_reduced == count_macs(sub)
    assert report.compression_rate == pytest.approx(count_params(tiny_chain) / count_params(sub))
    assert report.latency_base is None and report.accuracy_drop is None


def test_report_with_data(tiny_chain, tiny_test):
    tree = random_tree_params(hand_tree())
    report = compute_metrics(tiny_chain, tree, tiny_test, latency_reps=3, restrict_to=[0, 1, 2])
    assert report.latency_base > 0 and report.latency_reduced > 0
    assert report.speedup == pytest.approx(report.latency_base / report.latency_reduced)
    assert 0.0 <= report.accuracy_base <= 1.0
    assert report.accuracy_drop == pytest.approx(report.accuracy_base - report.accuracy_reduced)
    assert set(report.to_row()) >= {"compression_rate", "saved_computations", "speedup"}


def test_latency_needs_reps(tiny_chain):
    with pytest.raises(ValueError):
        measure_latency(tiny_chain, np.zeros((1, *tiny_chain.input_shape)), reps=0)
