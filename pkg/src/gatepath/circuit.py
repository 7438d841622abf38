"""Statevector simulation of circuits built from Pauli-string rotations.

Conventions
-----------
* A state on ``n`` qubits is a complex128 array of length ``2**n``.
* Qubit ``q`` is bit ``q`` of the basis index ``z`` (qubit 0 is the least
  significant bit). ``PauliString.from_label("XZ")`` therefore puts ``X`` on
  qubit 0 and ``Z`` on qubit 1, which is the reverse of the usual ket order.
* A gate with generator ``P`` and angle ``t`` is ``exp(-i t P)``. Because
  ``P @ P == I`` it is applied as ``cos(t) psi - i sin(t) P psi``.
"""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import StructuralError

NORM_TOL = 1e-10
_PAULI_LETTERS = frozenset("IXYZ")


@functools.lru_cache(maxsize=256)
def _basis_indices(qubit_count: int) -> np.ndarray:
    idx = np.arange(1 << qubit_count, dtype=np.int64)
    idx.setflags(write=False)
    return idx


@functools.lru_cache(maxsize=1024)
def _phase_vector(qubit_count: int, phase_mask: int, y_count: int) -> np.ndarray:
    idx = _basis_indices(qubit_count)
    parity = np.bitwise_count(idx & phase_mask) & 1
    phase = (1j) ** (y_count % 4) * (1 - 2 * parity.astype(np.float64))
    phase.setflags(write=False)
    return phase


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis; ``ops[q]`` acts on qubit ``q``."""

    ops: tuple[str, ...]

    def __post_init__(self):
        ops = tuple(str(o).upper() for o in self.ops)
        if not ops:
            raise StructuralError("a Pauli string needs at least one qubit")
        bad = [o for o in ops if o not in _PAULI_LETTERS]
        if bad:
            raise StructuralError(f"unknown Pauli letters {bad}")
        object.__setattr__(self, "ops", ops)

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        return cls(tuple(label))

    @classmethod
    def on(cls, qubit_count: int, factors: dict[int, str]) -> PauliString:
        """Build a string that is identity except on the qubits in ``factors``."""
        ops = ["I"] * qubit_count
        for q, letter in factors.items():
            if not 0 <= q < qubit_count:
                raise StructuralError(f"qubit {q} outside [0, {qubit_count})")
            ops[q] = letter
        return cls(tuple(ops))

    @property
    def qubit_count(self) -> int:
        return len(self.ops)

    @property
    def label(self) -> str:
        return "".join(self.ops)

    @property
    def is_identity(self) -> bool:
        return all(o == "I" for o in self.ops)

    @functools.cached_property
    def _masks(self) -> tuple[int, int, int]:
        flip = phase = 0
        y_count = 0
        for q, o in enumerate(self.ops):
            if o in "XY":
                flip |= 1 << q
            if o in "ZY":
                phase |= 1 << q
            if o == "Y":
                y_count += 1
        return flip, phase, y_count

    def apply(self, state: np.ndarray) -> np.ndarray:
        """Return ``P @ state`` without forming the matrix."""
        n = self.qubit_count
        if state.shape != (1 << n,):
            raise StructuralError(
                f"state of length {state.shape[0]} does not match {n} qubits"
            )
        flip, phase_mask, y_count = self._masks
        weighted = _phase_vector(n, phase_mask, y_count) * state
        if flip == 0:
            return weighted
        out = np.empty_like(weighted)
        out[_basis_indices(n) ^ flip] = weighted
        return out


@dataclass(frozen=True)
class GateSpec:
    generator: PauliString
    parameter_index: int


@dataclass(frozen=True)
class GateSequence:
    """Gates in application order; ``gates[0]`` acts first.

    ``parameter_count`` defaults to ``len(gates)``; several gates may share a
    parameter when it is set explicitly.
    """

    gates: tuple[GateSpec, ...]
    qubit_count: int
    parameter_count: int | None = None

    def __post_init__(self):
        gates = tuple(self.gates)
        object.__setattr__(self, "gates", gates)
        if self.qubit_count < 1:
            raise StructuralError("qubit_count must be positive")
        if self.parameter_count is None:
            object.__setattr__(self, "parameter_count", len(gates))
        for k, gate in enumerate(gates):
            if gate.generator.qubit_count != self.qubit_count:
                raise StructuralError(
                    f"gate {k} acts on {gate.generator.qubit_count} qubits, "
                    f"sequence has {self.qubit_count}"
                )
            if not 0 <= gate.parameter_index < self.parameter_count:
                raise StructuralError(
                    f"gate {k} parameter index {gate.parameter_index} outside "
                    f"[0, {self.parameter_count})"
                )
            if gate.generator.is_identity:
                warnings.warn(
                    f"gate {k} has an identity generator and only adds a global phase",
                    stacklevel=2,
                )

    def __len__(self) -> int:
        return len(self.gates)

    def to_dict(self) -> dict:
        return {
            "qubit_count": self.qubit_count,
            "parameter_count": self.parameter_count,
            "gates": [[g.generator.label, g.parameter_index] for g in self.gates],
        }

    @classmethod
    def from_dict(cls, data: dict) -> GateSequence:
        gates = tuple(GateSpec(PauliString.from_label(lbl), int(i)) for lbl, i in data["gates"])
        return cls(gates, int(data["qubit_count"]), int(data["parameter_count"]))


class MeasurementSample(NamedTuple):
    bitstring: int
    count: int


def zero_state(qubit_count: int) -> np.ndarray:
    state = np.zeros(1 << qubit_count, dtype=np.complex128)
    state[0] = 1.0
    return state


def basis_state(qubit_count: int, z: int) -> np.ndarray:
    if not 0 <= z < (1 << qubit_count):
        raise StructuralError(f"basis index {z} outside register of {qubit_count} qubits")
    state = np.zeros(1 << qubit_count, dtype=np.complex128)
    state[z] = 1.0
    return state


def uniform_state(qubit_count: int) -> np.ndarray:
    dim = 1 << qubit_count
    return np.full(dim, 1.0 / np.sqrt(dim), dtype=np.complex128)


def qubit_count_of(state: np.ndarray) -> int:
    if state.ndim != 1:
        raise StructuralError(f"state must be a vector, got shape {state.shape}")
    dim = state.shape[0]
    n = dim.bit_length() - 1
    if dim != 1 << n or n < 1:
        raise StructuralError(f"state length {dim} is not a power of two >= 2")
    return n


def check_state(state, qubit_count: int | None = None) -> np.ndarray:
    """Coerce to a complex vector and verify shape and unit norm."""
    state = np.asarray(state, dtype=np.complex128)
    n = qubit_count_of(state)
    if qubit_count is not None and n != qubit_count:
        raise StructuralError(f"state has {n} qubits, expected {qubit_count}")
    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > NORM_TOL:
        raise StructuralError(f"state norm {norm!r} differs from 1 by more than {NORM_TOL}")
    return state


def apply_pauli_rotation(state: np.ndarray, generator: PauliString, angle: float) -> np.ndarray:
    """Apply ``exp(-i angle P)`` to ``state``."""
    state = check_state(state, generator.qubit_count)
    return _rotate(state, generator, float(angle))


def _rotate(state: np.ndarray, generator: PauliString, angle: float) -> np.ndarray:
    if angle == 0.0:
        return state.copy()
    return np.cos(angle) * state - 1j * np.sin(angle) * generator.apply(state)


def build_state(
    seq: GateSequence,
    theta: Sequence[float] | np.ndarray,
    initial: np.ndarray | None = None,
) -> np.ndarray:
    """Return ``U_L(theta) ... U_1(theta) |initial>``; default input is ``|0...0>``."""
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (seq.parameter_count,):
        raise StructuralError(
            f"parameter vector has shape {theta.shape}, sequence needs ({seq.parameter_count},)"
        )
    if not np.all(np.isfinite(theta)):
        raise StructuralError("parameter vector contains non-finite entries")
    if initial is None:
        state = zero_state(seq.qubit_count)
    else:
        state = check_state(initial, seq.qubit_count)
    for gate in seq.gates:
        state = _rotate(state, gate.generator, theta[gate.parameter_index])
    return state


def probabilities(state: np.ndarray) -> np.ndarray:
    return np.abs(state) ** 2


def objective_value(state: np.ndarray, objective) -> float:
    """Exact expectation of the diagonal objective operator in ``state``."""
    state = np.asarray(state, dtype=np.complex128)
    diag = objective.diagonal()
    if diag.shape != state.shape:
        raise StructuralError(
            f"objective acts on {objective.qubit_count} qubits, state has "
            f"{qubit_count_of(state)}"
        )
    return float(probabilities(state) @ diag)


def measure(state: np.ndarray, shots: int, seed: int) -> list[MeasurementSample]:
    """Sample computational-basis outcomes; only observed bitstrings are returned."""
    if shots < 1:
        raise StructuralError("shots must be >= 1")
    probs = probabilities(np.asarray(state, dtype=np.complex128))
    probs = probs / probs.sum()
    counts = np.random.default_rng(seed).multinomial(shots, probs)
    return [MeasurementSample(int(z), int(counts[z])) for z in np.flatnonzero(counts)]


def estimate_objective(samples: Sequence[MeasurementSample], objective) -> float:
    """Shot-average of ``C(z)`` over measured samples."""
    diag = objective.diagonal()
    total = sum(s.count for s in samples)
    return float(sum(s.count * diag[s.bitstring] for s in samples) / total)


def state_to_json(state: np.ndarray) -> list[list[float]]:
    return [[float(a.real), float(a.imag)] for a in np.asarray(state)]


def state_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise StructuralError("expected a list of [re, im] pairs")
    return check_state(arr[:, 0] + 1j * arr[:, 1])
