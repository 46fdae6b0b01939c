"""Two-cluster Ward agglomeration."""

import itertools

import numpy as np
import pytest

from hsdnet.decompose import ward_cluster


def brute_force_ward(x):
    """Greedy Ward with explicit centroids: merge the pair with the smallest variance increase."""
    clusters = [[i] for i in range(len(x))]
    while len(clusters) > 2:
        best, pair = np.inf, None
        for a, b in itertools.combinations(range(len(clusters)), 2):
            ca, cb = clusters[a], clusters[b]
            gap = x[ca].mean(axis=0) - x[cb].mean(axis=0)
            cost = len(ca) * len(cb) / (len(ca) + len(cb)) * float(gap @ gap)
            if cost < best:
                best, pair = cost, (a, b)
        a, b = pair
        clusters[a] = clusters[a] + clusters[b]
        del clusters[b]
    return {frozenset(c) for c in clusters}


def partition(result):
    return {frozenset(result.left), frozenset(result.right)}


@pytest.mark.parametrize("seed", range(500))
def test_matches_brute_force(seed):
    gen = np.random.default_rng(seed)
    x = gen.uniform(size=(int(gen.integers(3, 8)), int(gen.integers(2, 6))))
    assert partition(ward_cluster(x)) == brute_force_ward(x)


@pytest.mark.parametrize("seed", range(50))
def test_matches_scipy(seed):
    hierarchy = pytest.importorskip("scipy.cluster.hierarchy")
    gen = np.random.default_rng(1000 + seed)
    x = gen.uniform(size=(int(gen.integers(3, 12)), 4))
    flat = hierarchy.fcluster(hierarchy.linkage(x, method="ward"), 2, criterion="maxclust")
    expected = {frozenset(np.flatnonzero(flat == k).tolist()) for k in (1, 2)}
    assert partition(ward_cluster(x)) == expected


def test_separable_groups():
    x = np.array(
        [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 1.0],
            [0.9, 0.1, 0.0],
            [0.1, 0.9, 1.0],
            [1.0, 0.1, 0.1],
            [0.0, 1.0, 0.9],
        ]
    )
    result = ward_cluster(x, labels=[10, 11, 12, 13, 14, 15])
    assert result.left == (10, 12, 14)
    assert result.right == (11, 13, 15)
    assert not result.merged_to_single
    assert result.assignment[13] == "right"


def test_left_holds_first_vector():
    x = np.array([[5.0, 5.0], [0.0, 0.0], [0.1, 0.0], [5.1, 5.0]])
    result = ward_cluster(x)
    assert result.left == (0, 3)
    assert result.right == (1, 2)


def test_two_vectors_fall_back_to_single():
    result = ward_cluster(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert (result.left, result.right) == ((0,), (1,))
    assert result.merged_to_single


def test_outlier_side_too_small():
    x = np.array([[0.0, 0.0], [0.1, 0.0], [0.0, 0.1], [10.0, 10.0]])
    result = ward_cluster(x)
    assert result.right == (3,)
    assert result.merged_to_single
    assert not ward_cluster(x, min_cluster_size=1).merged_to_single


def test_identical_vectors_tie_to_lowest_slots():
    result = ward_cluster(np.zeros((4, 2)))
    # (0,1) merges first, then (0,2): class 3 is left alone
    assert result.left == (0, 1, 2)
    assert result.right == (3,)


@pytest.mark.parametrize("shape", [(1, 3), (3,)])
def test_rejects_bad_input(shape):
    with pytest.raises(ValueError):
        ward_cluster(np.zeros(shape))


def test_label_count_must_match():
    with pytest.raises(ValueError):
        ward_cluster(np.zeros((3, 2)), labels=[1, 2])
