"""Two-layer multiplex networks over a shared node set.

Layers are stored as CSR-style neighbor lists (``indptr``/``indices``) with
each node's neighbors sorted ascending. Node ``i`` of layer A and node ``i``
of layer B are the same individual; there are no explicit inter-layer edges.
"""

import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import networkx as nx
import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError, EdgeListParseError

TOPOLOGIES = ("erdos-renyi", "barabasi-albert", "edge-list-file")


class Layer:
    """Undirected simple graph on nodes ``0..n-1`` stored as neighbor lists."""

    __slots__ = ("n", "indptr", "indices", "_csr")

    def __init__(self, n, indptr, indices):
        self.n = int(n)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)
        self._csr = None

    @classmethod
    def from_edges(cls, n, edges):
        """Build a layer from an iterable of ``(i, j)`` pairs.

        Duplicates (in either orientation) are collapsed. Self-loops and
        out-of-range indices raise ``ValueError``.
        """
        n = int(n)
        arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if not arr.size:
            return cls(n, np.zeros(n + 1, np.int64), np.zeros(0, np.int64))
        if (arr < 0).any() or (arr >= n).any():
            raise ValueError("edge endpoint outside 0..n-1")
        if (arr[:, 0] == arr[:, 1]).any():
            raise ValueError("self-loop")
        # unique() sorts rows lexicographically, which is exactly CSR order
        both = np.unique(np.concatenate([arr, arr[:, ::-1]]), axis=0)
        counts = np.bincount(both[:, 0], minlength=n)
        indptr = np.concatenate([[0], np.cumsum(counts)])
        return cls(n, indptr, both[:, 1])

    @classmethod
    def from_networkx(cls, graph, n=None):
        n = graph.number_of_nodes() if n is None else n
        return cls.from_edges(n, graph.edges())

    def neighbors(self, i):
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def degrees(self):
        return np.diff(self.indptr)

    @property
    def n_edges(self):
        return len(self.indices) // 2

    def edges(self):
        """Canonical sorted list of ``(i, j)`` with ``i < j``."""
        rows = np.repeat(np.arange(self.n), self.degrees())
        mask = rows < self.indices
        return list(zip(rows[mask].tolist(), self.indices[mask].tolist()))

    def edge_set(self):
        return set(self.edges())

    def to_csr(self):
        data = np.ones(len(self.indices))
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    @property
    def csr(self):
        """Cached sparse adjacency (read-only use)."""
        if self._csr is None:
            self._csr = self.to_csr()
        return self._csr

    def __eq__(self, other):
        return (isinstance(other, Layer) and self.n == other.n
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    def __repr__(self):
        return f"Layer(n={self.n}, edges={self.n_edges})"


@dataclass(frozen=True)
class GraphSpec:
    """Recipe for one layer.

    ``mean_degree`` is the target average degree for generated topologies;
    ``path`` is only used by ``edge-list-file``.
    """

    topology: str = "erdos-renyi"
    n: int = 1000
    mean_degree: float = 4.0
    seed: int = 0
    path: str = None

    def validate(self):
        if self.topology not in TOPOLOGIES:
            raise ConfigurationError(f"unknown topology {self.topology!r}", "topology")
        if self.topology == "edge-list-file":
            if not self.path:
                raise ConfigurationError("edge-list-file topology needs a path", "path")
            return
        if self.n < 2:
            raise ConfigurationError("need at least 2 nodes", "n")
        if self.mean_degree < 0 or not math.isfinite(self.mean_degree):
            raise ConfigurationError("mean degree must be non-negative", "mean_degree")
        if self.mean_degree >= self.n - 1:
            raise ConfigurationError("mean degree must be below n - 1", "mean_degree")
        if self.topology == "barabasi-albert" and self.mean_degree <= 0:
            raise ConfigurationError("barabasi-albert needs a positive mean degree",
                                     "mean_degree")


def attachment_count(mean_degree):
    """Edges added per new node in the preferential-attachment model."""
    return max(1, int(math.floor(mean_degree / 2.0 + 0.5)))


def generate_layer(spec):
    """Generate (or load) a single layer from ``spec``.

    Erdős–Rényi uses G(n, p) with ``p = mean_degree / (n - 1)``; isolated
    nodes are kept. Barabási–Albert attaches ``round(mean_degree / 2)`` edges
    per new node. Output depends only on ``spec``, seed included.
    """
    spec.validate()
    if spec.topology == "edge-list-file":
        layer = load_edge_list(spec.path)
        if spec.n and layer.n != spec.n:
            raise ConfigurationError(
                f"file has {layer.n} nodes, expected {spec.n}", "n")
        return layer
    if spec.topology == "erdos-renyi":
        p = spec.mean_degree / (spec.n - 1)
        graph = nx.fast_gnp_random_graph(spec.n, p, seed=int(spec.seed))
    else:
        m = attachment_count(spec.mean_degree)
        graph = nx.barabasi_albert_graph(spec.n, m, seed=int(spec.seed))
    return Layer.from_networkx(graph, spec.n)


@dataclass(frozen=True)
class MultiplexNetwork:
    """Virtual-contact layer A and physical-contact layer B on the same nodes."""

    layer_a: Layer
    layer_b: Layer
    n: int = field(init=False)

    def __post_init__(self):
        if self.layer_a.n != self.layer_b.n:
            raise ConfigurationError(
                f"layer sizes differ ({self.layer_a.n} vs {self.layer_b.n})", "n")
        object.__setattr__(self, "n", self.layer_a.n)


def build_multiplex(layer_a_spec, layer_b_spec):
    if (layer_a_spec.topology != "edge-list-file" and layer_b_spec.topology != "edge-list-file"
            and layer_a_spec.n != layer_b_spec.n):
        raise ConfigurationError(
            f"layer sizes differ ({layer_a_spec.n} vs {layer_b_spec.n})", "n")
    return MultiplexNetwork(generate_layer(layer_a_spec), generate_layer(layer_b_spec))


def degree_sequence(layer):
    return layer.degrees().tolist()


def load_edge_list(path):
    """Read an edge-list file.

    The first meaningful line holds the node count; every further non-empty
    line is ``i j``. Lines starting with ``#`` are skipped and duplicate edges
    collapse.
    """
    n = None
    edges = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if n is None:
                if len(parts) != 1:
                    raise EdgeListParseError("expected node count", lineno)
                try:
                    n = int(parts[0])
                except ValueError:
                    raise EdgeListParseError(f"bad node count {parts[0]!r}", lineno) from None
                if n < 1:
                    raise EdgeListParseError("node count must be positive", lineno)
                continue
            if len(parts) != 2:
                raise EdgeListParseError(f"expected 'i j', got {line!r}", lineno)
            try:
                i, j = int(parts[0]), int(parts[1])
            except ValueError:
                raise EdgeListParseError(f"non-integer node index in {line!r}", lineno) from None
            if i < 0 or j < 0 or i >= n or j >= n:
                raise EdgeListParseError(f"node index outside 0..{n - 1}", lineno)
            if i == j:
                raise EdgeListParseError(f"self-loop on node {i}", lineno)
            edges.append((i, j))
    if n is None:
        raise EdgeListParseError("missing node count", 1)
    return Layer.from_edges(n, edges)


def format_edge_list(layer):
    lines = [str(layer.n)]
    lines.extend(f"{i} {j}" for i, j in layer.edges())
    return "\n".join(lines) + "\n"


def save_edge_list(layer, path):
    """Write ``layer`` in canonical form (sorted ``i < j`` pairs), atomically."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_edge_list(layer))
    os.replace(tmp, path)
