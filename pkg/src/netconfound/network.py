"""Directed binary social networks and the exposure/reciprocity queries built on them.

The adjacency convention throughout: entry (i, j) = 1 means node i nominates
node j. Undirected graphs are represented as symmetric directed networks.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Literal

import numpy as np

__all__ = [
    "SocialNetwork",
    "ReciprocityPartition",
    "read_edge_list",
    "write_edge_list",
]


@dataclass(frozen=True)
class ReciprocityPartition:
    """Classification of every tie by reciprocation status.

    mutual      -- unordered pairs (i, j) with i < j where both directions exist
    named_only  -- ordered (namer, named) pairs whose reverse direction is absent
    namer_only  -- the same unreciprocated ties seen from the named node:
                   ordered (named, namer) pairs
    """

    mutual: frozenset[tuple[int, int]]
    named_only: frozenset[tuple[int, int]]
    namer_only: frozenset[tuple[int, int]]


class SocialNetwork:
    """Immutable directed binary network over ``n`` nodes.

    Stores a dense 0/1 adjacency matrix plus per-node out-neighbor arrays so
    that sampling a uniform neighbor (the inner loop of the copying dynamics)
    costs O(1) after an O(out-degree) lookup.
    """

    def __init__(self, adjacency: np.ndarray):
        adjacency = np.asarray(adjacency)
        if adjacency.ndim != 2 or adjacency.shape[0] != adjacency.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {adjacency.shape}")
        if adjacency.shape[0] < 1:
            raise ValueError("network needs at least one node")
        values = np.unique(adjacency)
        if not np.all(np.isin(values, (0, 1))):
            raise ValueError("adjacency entries must be exactly 0 or 1")
        if np.any(np.diagonal(adjacency) != 0):
            raise ValueError("self-loops are not allowed")
        self._adj = adjacency.astype(np.uint8)
        self._adj.setflags(write=False)
        self._out_neighbors: list[np.ndarray] | None = None  # built on first use

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "SocialNetwork":
        """Build a network from an ordered edge list; duplicate edges collapse."""
        if n < 1:
            raise ValueError("n must be >= 1")
        adj = np.zeros((n, n), dtype=np.uint8)
        for i, j in edges:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
            if i == j:
                raise ValueError(f"self-loop ({i}, {i}) is not allowed")
            adj[i, j] = 1
        return cls(adj)

    @property
    def n(self) -> int:
        return self._adj.shape[0]

    @property
    def adjacency(self) -> np.ndarray:
        """Read-only 0/1 adjacency matrix."""
        return self._adj

    def out_degree(self) -> np.ndarray:
        return self._adj.sum(axis=1).astype(np.int64)

    def in_degree(self) -> np.ndarray:
        return self._adj.sum(axis=0).astype(np.int64)

    def out_neighbors(self, i: int) -> np.ndarray:
        if self._out_neighbors is None:
            self._out_neighbors = [
                np.flatnonzero(row).astype(np.int64) for row in self._adj
            ]
        return self._out_neighbors[i]

    def edges(self) -> list[tuple[int, int]]:
        rows, cols = np.nonzero(self._adj)
        return list(zip(rows.tolist(), cols.tolist()))

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self._adj, self._adj.T))

    def exposure(self, direction: Literal["out", "in"], y: np.ndarray) -> np.ndarray:
        """Neighbor-weighted sums of ``y``.

        direction="out": component i is sum_j A[i,j] * y[j] (the people i named);
        direction="in":  component i is sum_j A[j,i] * y[j] (the people naming i).
        """
        y = np.asarray(y, dtype=float)
        if y.shape != (self.n,):
            raise ValueError(f"y has length {y.shape}, expected ({self.n},)")
        if direction == "out":
            return self._adj @ y
        if direction == "in":
            return self._adj.T @ y
        raise ValueError(f"direction must be 'out' or 'in', got {direction!r}")

    def reciprocity_partition(self) -> ReciprocityPartition:
        """Split all ties into mutual / named-only / namer-only classes.

        named_only pairs are (namer, named). namer_only holds the same
        unreciprocated ties as (named, namer), so the underlying tie of an
        entry (i, j) there is j -> i.
        """
        a = self._adj.astype(bool)
        both = a & a.T
        one_way = a & ~a.T
        mi, mj = np.nonzero(np.triu(both, 1))
        ni, nj = np.nonzero(one_way)
        return ReciprocityPartition(
            mutual=frozenset(zip(mi.tolist(), mj.tolist())),
            named_only=frozenset(zip(ni.tolist(), nj.tolist())),
            namer_only=frozenset(zip(nj.tolist(), ni.tolist())),
        )


def write_edge_list(net: SocialNetwork, path: str | Path) -> None:
    """Write one 0-indexed "i j" pair per line."""
    lines = [f"{i} {j}" for i, j in net.edges()]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def read_edge_list(path: str | Path, n: int | None = None) -> SocialNetwork:
    """Read an "i j" per line file; n is inferred from the largest index if omitted."""
    edges = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"malformed edge line: {raw!r}")
        edges.append((int(parts[0]), int(parts[1])))
    if n is None:
        if not edges:
            raise ValueError("cannot infer node count from an empty edge list")
        n = max(max(i, j) for i, j in edges) + 1
    return SocialNetwork.from_edges(n, edges)
