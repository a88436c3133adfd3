"""Attributed graphs with planar node attributes."""

from __future__ import annotations

import json

import numpy as np


class GraphError(ValueError):
    pass


class AttributedGraph:
    """Undirected graph whose nodes carry real attribute vectors.

    Instances are immutable; ``nodes`` is a read-only ``(n, k)`` array and
    ``edges`` a sorted tuple of ``(i, j)`` pairs with ``i < j``.
    """

    __slots__ = ("nodes", "edges", "_adj")

    def __init__(self, nodes, edges=()):
        nodes = np.array(nodes, dtype=float)
        if nodes.size == 0:
            nodes = nodes.reshape(0, 2)
        if nodes.ndim != 2:
            raise GraphError("node attributes must form an (n, k) array")
        n = nodes.shape[0]
        norm = set()
        for e in edges:
            i, j = (int(v) for v in e)
            if i == j:
                raise GraphError(f"self-loop on node {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise GraphError(f"edge ({i}, {j}) out of range for {n} nodes")
            pair = (min(i, j), max(i, j))
            if pair in norm:
                raise GraphError(f"duplicate edge {pair}")
            norm.add(pair)
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", tuple(sorted(norm)))
        object.__setattr__(self, "_adj", None)

    def __setattr__(self, name, value):
        raise AttributeError("AttributedGraph is immutable")

    def __reduce__(self):
        return (AttributedGraph, (np.array(self.nodes), self.edges))

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def adjacency(self) -> np.ndarray:
        if self._adj is None:
            adj = np.zeros((self.n_nodes, self.n_nodes), dtype=bool)
            if self.edges:
                e = np.array(self.edges)
                adj[e[:, 0], e[:, 1]] = True
                adj[e[:, 1], e[:, 0]] = True
            adj.setflags(write=False)
            object.__setattr__(self, "_adj", adj)
        return self._adj

    @property
    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    def permuted(self, perm) -> "AttributedGraph":
        """Relabelled copy: old node ``i`` becomes node ``perm[i]``."""
        perm = np.asarray(perm, dtype=int)
        if sorted(perm.tolist()) != list(range(self.n_nodes)):
            raise GraphError("not a permutation of the node indices")
        nodes = np.empty_like(self.nodes)
        nodes[perm] = self.nodes
        edges = [(perm[i], perm[j]) for i, j in self.edges]
        return AttributedGraph(nodes, edges)

    def __eq__(self, other):
        if not isinstance(other, AttributedGraph):
            return NotImplemented
        return (self.edges == other.edges
                and self.nodes.shape == other.nodes.shape
                and bool(np.array_equal(self.nodes, other.nodes)))

    def __hash__(self):
        return hash((self.nodes.tobytes(), self.edges))

    def __repr__(self):
        return f"AttributedGraph(n_nodes={self.n_nodes}, n_edges={self.n_edges})"

    def to_dict(self) -> dict:
        return {"nodes": self.nodes.tolist(),
                "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, obj) -> "AttributedGraph":
        return cls(obj["nodes"], [tuple(e) for e in obj.get("edges", [])])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(", ", ": "))

    @classmethod
    def from_json(cls, line: str) -> "AttributedGraph":
        return cls.from_dict(json.loads(line))
