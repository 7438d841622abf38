"""Connectivity graphs, per-edge objective terms and pathway elements.

A pathway element is the real vector ``(kappa, omega)`` where ``kappa[e]`` is
the canonical index of edge ``e`` (as a float) and ``omega[e]`` the expected
value of that edge's clause. It is the input-space point for the kernel
machinery in :mod:`gatepath.kernel`.
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuit import probabilities, qubit_count_of
from .errors import ConfigError, DecodeError, StructuralError

SCHEMA_VERSION = 1
DECODE_FLAG_DEVIATION = 0.25

# clause value as a function of the two endpoint bits
CLAUSES = {
    "cut": lambda bi, bj: bi != bj,
    "uncut": lambda bi, bj: bi == bj,
}


@dataclass(frozen=True)
class ConnectivityGraph:
    """Undirected graph with edges stored as sorted ``(i, j)`` pairs, ``i < j``."""

    vertex_count: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        edges = tuple((int(i), int(j)) for i, j in self.edges)
        object.__setattr__(self, "edges", edges)
        if self.vertex_count < 1:
            raise StructuralError("graph needs at least one vertex")
        for i, j in edges:
            if not 0 <= i < j < self.vertex_count:
                raise StructuralError(f"edge ({i}, {j}) violates 0 <= i < j < {self.vertex_count}")
        if len(set(edges)) != len(edges):
            raise StructuralError("duplicate edges")
        if list(edges) != sorted(edges):
            raise StructuralError("edges must be in lexicographic order")

    @classmethod
    def from_pairs(cls, vertex_count: int, pairs) -> ConnectivityGraph:
        """Canonicalize arbitrary pairs: orient ``i < j``, sort, drop duplicates."""
        canon = sorted({(min(i, j), max(i, j)) for i, j in pairs if i != j})
        return cls(vertex_count, tuple(canon))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def index_of(self, edge: tuple[int, int]) -> int:
        return self.edges.index(tuple(edge))


@dataclass(frozen=True)
class ObjectiveSpec:
    """Diagonal objective ``C(z) = sum_e w_e * clause_e(bit_i(z), bit_j(z))``."""

    graph: ConnectivityGraph
    weights: tuple[float, ...]
    clauses: tuple[str, ...] = field(default=())

    def __post_init__(self):
        weights = tuple(float(w) for w in self.weights)
        clauses = tuple(self.clauses) or ("cut",) * len(weights)
        if len(weights) != self.graph.edge_count or len(clauses) != len(weights):
            raise StructuralError(
                f"{self.graph.edge_count} edges but {len(weights)} weights and "
                f"{len(clauses)} clause kinds"
            )
        unknown = set(clauses) - CLAUSES.keys()
        if unknown:
            raise StructuralError(f"unknown clause kinds {sorted(unknown)}")
        if not all(np.isfinite(weights)):
            raise StructuralError("edge weights must be finite")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "clauses", clauses)

    @classmethod
    def maxcut(cls, graph: ConnectivityGraph, weights: Sequence[float] | None = None) -> ObjectiveSpec:
        if weights is None:
            weights = (1.0,) * graph.edge_count
        return cls(graph, tuple(weights))

    @property
    def qubit_count(self) -> int:
        return self.graph.vertex_count

    @functools.cached_property
    def _terms(self) -> np.ndarray:
        n = self.qubit_count
        z = np.arange(1 << n, dtype=np.int64)
        terms = np.empty((self.graph.edge_count, 1 << n))
        for e, ((i, j), w, kind) in enumerate(zip(self.graph.edges, self.weights, self.clauses)):
            terms[e] = w * CLAUSES[kind]((z >> i) & 1, (z >> j) & 1)
        terms.setflags(write=False)
        return terms

    def term_diagonals(self) -> np.ndarray:
        """Per-edge clause values, shape ``(edge_count, 2**n)``."""
        return self._terms

    def diagonal(self) -> np.ndarray:
        return self._terms.sum(axis=0)

    def to_json(self) -> dict:
        uniform = len(set(self.clauses)) <= 1
        if uniform:
            edges = [[i, j, w] for (i, j), w in zip(self.graph.edges, self.weights)]
        else:
            edges = [[i, j, w, k] for (i, j), w, k in zip(self.graph.edges, self.weights, self.clauses)]
        doc = {"schema": SCHEMA_VERSION, "vertices": self.graph.vertex_count, "edges": edges}
        if uniform and self.clauses and self.clauses[0] != "cut":
            doc["clause"] = self.clauses[0]
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> ObjectiveSpec:
        """Parse the graph/objective document; edge order must already be canonical."""
        if doc.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
            raise ConfigError(f"unsupported graph schema {doc.get('schema')!r}")
        try:
            n = int(doc["vertices"])
            rows = doc["edges"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed graph document: {exc}") from exc
        default = doc.get("clause", "cut")
        pairs, weights, kinds = [], [], []
        for row in rows:
            if len(row) not in (3, 4):
                raise ConfigError(f"edge row {row!r} must be [i, j, w] or [i, j, w, clause]")
            pairs.append((int(row[0]), int(row[1])))
            weights.append(float(row[2]))
            kinds.append(row[3] if len(row) == 4 else default)
        try:
            graph = ConnectivityGraph(n, tuple(pairs))
            return cls(graph, tuple(weights), tuple(kinds))
        except StructuralError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> ObjectiveSpec:
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def decompose_objective(state: np.ndarray, objective: ObjectiveSpec) -> np.ndarray:
    """Per-edge expectations ``Omega_e`` in canonical edge order."""
    state = np.asarray(state, dtype=np.complex128)
    if qubit_count_of(state) != objective.qubit_count:
        raise StructuralError(
            f"objective acts on {objective.qubit_count} qubits, state has {qubit_count_of(state)}"
        )
    return objective.term_diagonals() @ probabilities(state)


def estimate_decomposition(samples, objective: ObjectiveSpec) -> np.ndarray:
    """Shot-average of every edge clause over measured samples."""
    terms = objective.term_diagonals()
    total = sum(s.count for s in samples)
    acc = np.zeros(terms.shape[0])
    for s in samples:
        acc += s.count * terms[:, s.bitstring]
    return acc / total


@dataclass(frozen=True)
class PathwayElement:
    kappa: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        kappa = np.asarray(self.kappa, dtype=np.float64)
        omega = np.asarray(self.omega, dtype=np.float64)
        if kappa.ndim != 1 or kappa.shape != omega.shape or kappa.size == 0:
            raise StructuralError(
                f"kappa {kappa.shape} and omega {omega.shape} must be equal-length vectors"
            )
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "omega", omega)

    @classmethod
    def from_vector(cls, upsilon) -> PathwayElement:
        v = np.asarray(upsilon, dtype=np.float64)
        if v.ndim != 1 or v.size % 2 or v.size == 0:
            raise StructuralError(f"pathway vector must have even positive length, got {v.shape}")
        m = v.size // 2
        return cls(v[:m], v[m:])

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.kappa, self.omega])

    @property
    def total(self) -> float:
        return float(self.omega.sum())


@dataclass(frozen=True)
class DecodedPathway:
    edge_indices: tuple[int, ...]
    omega: np.ndarray
    total: float
    deviations: np.ndarray
    flagged: tuple[int, ...]
    edges: tuple[tuple[int, int], ...] | None = None


def encode_element(graph: ConnectivityGraph, omega) -> PathwayElement:
    omega = np.asarray(omega, dtype=np.float64)
    if omega.shape != (graph.edge_count,):
        raise StructuralError(f"omega has shape {omega.shape}, graph has {graph.edge_count} edges")
    return PathwayElement(np.arange(graph.edge_count, dtype=np.float64), omega)


def decode_element(element, graph: ConnectivityGraph | None = None) -> DecodedPathway:
    """Round ``kappa`` onto canonical edge indices and total the ``omega`` block.

    Entries whose rounding moved them by more than 0.25 are listed in
    ``flagged``. Indices that collide or leave ``[0, |S|)`` raise
    :class:`DecodeError`.
    """
    if not isinstance(element, PathwayElement):
        element = PathwayElement.from_vector(element)
    m = element.kappa.size
    if graph is not None and graph.edge_count != m:
        raise StructuralError(f"element has {m} edges, graph has {graph.edge_count}")
    rounded = np.floor(element.kappa + 0.5)
    deviations = np.abs(element.kappa - rounded)
    indices = tuple(int(k) for k in rounded)
    bad = [k for k in indices if not 0 <= k < m]
    if bad:
        raise DecodeError(f"decoded edge indices {bad} outside [0, {m})")
    if len(set(indices)) != m:
        dupes = sorted({k for k in indices if indices.count(k) > 1})
        raise DecodeError(f"decoded edge indices collide at {dupes}")
    flagged = tuple(int(e) for e in np.flatnonzero(deviations > DECODE_FLAG_DEVIATION))
    edges = tuple(graph.edges[k] for k in indices) if graph is not None else None
    return DecodedPathway(
        edge_indices=indices,
        omega=element.omega.copy(),
        total=float(element.omega.sum()),
        deviations=deviations,
        flagged=flagged,
        edges=edges,
    )
