"""Problem instances: MaxCut graphs and the alternating-layer circuit."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..circuit import GateSequence, GateSpec, PauliString, uniform_state, zero_state
from ..errors import ConfigError
from ..pathway import ConnectivityGraph, ObjectiveSpec

KINDS = ("maxcut-ring", "maxcut-random")
MIN_SIZE, MAX_SIZE = 2, 14


@dataclass(frozen=True)
class Instance:
    graph: ConnectivityGraph
    objective: ObjectiveSpec
    circuit: GateSequence
    initial_state: str = "zero"

    @property
    def parameter_count(self) -> int:
        return self.circuit.parameter_count

    def input_state(self) -> np.ndarray:
        n = self.graph.vertex_count
        return uniform_state(n) if self.initial_state == "plus" else zero_state(n)

    def to_dict(self) -> dict:
        return {
            "graph": self.objective.to_json(),
            "circuit": self.circuit.to_dict(),
            "initial_state": self.initial_state,
        }


def ring_graph(size: int) -> ConnectivityGraph:
    if size == 2:
        return ConnectivityGraph(2, ((0, 1),))
    return ConnectivityGraph.from_pairs(size, [(i, (i + 1) % size) for i in range(size)])


def random_graph(size: int, seed: int, p: float = 0.5) -> ConnectivityGraph:
    """Erdos-Renyi graph; redraws from the same stream until it has an edge."""
    rng = np.random.default_rng(seed)
    pairs = [(i, j) for i in range(size) for j in range(i + 1, size)]
    while True:
        keep = rng.random(len(pairs)) < p
        if keep.any():
            return ConnectivityGraph(size, tuple(e for e, k in zip(pairs, keep) if k))


def alternating_circuit(graph: ConnectivityGraph, layers: int = 1, parameters: str = "per-gate") -> GateSequence:
    """``layers`` rounds of one ZZ rotation per edge followed by one X rotation per qubit.

    With ``per-gate`` parameters every gate owns its angle
    (``L = layers * (|S| + n)``); ``shared`` uses one angle per block (``L = 2 * layers``).
    """
    n = graph.vertex_count
    gates: list[GateSpec] = []
    k = 0
    for layer in range(layers):
        for i, j in graph.edges:
            idx = k if parameters == "per-gate" else 2 * layer
            gates.append(GateSpec(PauliString.on(n, {i: "Z", j: "Z"}), idx))
            k += 1
        for q in range(n):
            idx = k if parameters == "per-gate" else 2 * layer + 1
            gates.append(GateSpec(PauliString.on(n, {q: "X"}), idx))
            k += 1
    count = k if parameters == "per-gate" else 2 * layers
    return GateSequence(tuple(gates), n, count)


def generate_instance(kind: str, size: int, seed: int = 0, *, layers: int = 1,
                      parameters: str = "per-gate", initial_state: str = "zero") -> Instance:
    if kind not in KINDS:
        raise ConfigError(f"unknown instance kind {kind!r}; expected one of {KINDS}")
    if not MIN_SIZE <= size <= MAX_SIZE:
        raise ConfigError(f"instance size {size} outside [{MIN_SIZE}, {MAX_SIZE}]")
    graph = ring_graph(size) if kind == "maxcut-ring" else random_graph(size, seed)
    return Instance(graph, ObjectiveSpec.maxcut(graph), alternating_circuit(graph, layers, parameters), initial_state)


def instance_from_config(cfg: dict) -> Instance:
    inst, circ = cfg["instance"], cfg["circuit"]
    source = inst.get("graph")
    if source is None:
        return generate_instance(inst["kind"], inst["size"], inst["seed"], layers=circ["layers"],
                                 parameters=circ["parameters"], initial_state=circ["initial_state"])
    objective = ObjectiveSpec.from_json(source) if isinstance(source, dict) else ObjectiveSpec.load(source)
    if objective.qubit_count > MAX_SIZE:
        raise ConfigError(f"graph has {objective.qubit_count} vertices; at most {MAX_SIZE} supported")
    circuit = alternating_circuit(objective.graph, circ["layers"], circ["parameters"])
    return Instance(objective.graph, objective, circuit, circ["initial_state"])
