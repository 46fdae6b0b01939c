"""Two-cluster Ward agglomeration with the Lance-Williams update."""

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np

Side = Literal["left", "right"]


@dataclass(frozen=True)
class ClusterResult:
    """Final two clusters over class ids.

    ``left`` holds the class of the first input vector. When
    ``merged_to_single`` is set the split is rejected and the caller keeps
    one child with every class.
    """

    left: tuple[int, ...]
    right: tuple[int, ...]
    merged_to_single: bool

    @property
    def assignment(self) -> dict[int, Side]:
        out: dict[int, Side] = {c: "left" for c in self.left}
        out.update({c: "right" for c in self.right})
        return out


def ward_cluster(
    vectors: np.ndarray,
    labels: Sequence[int] | None = None,
    min_cluster_size: int = 2,
) -> ClusterResult:
    """Merge bottom-up until two clusters remain.

    Distances start as squared Euclidean; merging ``i`` and ``j`` updates
    every other cluster ``k`` by Lance-Williams for Ward linkage. Ties go to
    the lexicographically smallest ``(i, j)`` slot pair; the merged cluster
    keeps slot ``i``.
    """
    x = np.asarray(vectors, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError(f"ward_cluster needs at least two equal-length vectors, got shape {x.shape}")
    n = x.shape[0]
    ids = list(range(n)) if labels is None else [int(c) for c in labels]
    if len(ids) != n:
        raise ValueError(f"{len(ids)} labels for {n} vectors")

    diff = x[:, None, :] - x[None, :, :]
    dist = np.einsum("ijk,ijk->ij", diff, diff)
    sizes = np.ones(n)
    members: dict[int, list[int]] = {i: [i] for i in range(n)}
    active = np.ones(n, dtype=bool)
    upper = np.triu(np.ones((n, n), dtype=bool), k=1)

    while len(members) > 2:
        candidates = np.where(upper & active[:, None] & active[None, :], dist, np.inf)
        i, j = divmod(int(np.argmin(candidates)), n)
        others = np.flatnonzero(active)
        others = others[(others != i) & (others != j)]
        ni, nj, nk = sizes[i], sizes[j], sizes[others]
        merged = ((ni + nk) * dist[i, others] + (nj + nk) * dist[j, others] - nk * dist[i, j]) / (
            ni + nj + nk
        )
        dist[i, others] = merged
        dist[others, i] = merged
        sizes[i] = ni + nj
        members[i].extend(members.pop(j))
        active[j] = False

    first, second = sorted(members.values(), key=min)
    left = tuple(sorted(ids[m] for m in first))
    right = tuple(sorted(ids[m] for m in second))
    merged_to_single = min(len(left), len(right)) < min_cluster_size
    return ClusterResult(left=left, right=right, merged_to_single=merged_to_single)
