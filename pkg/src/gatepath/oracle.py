"""Brute-force reference implementations used for verification.

Everything here deliberately avoids the fast code paths: Pauli strings become
dense Kronecker products, rotations are exponentiated through an
eigendecomposition, objectives are evaluated bit by bit in Python. Only
practical for a handful of qubits.
"""

from __future__ import annotations

import itertools

import numpy as np

_SINGLE = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def pauli_matrix(ops) -> np.ndarray:
    """Dense matrix of a Pauli string; ``ops[0]`` acts on the least significant bit."""
    mat = np.ones((1, 1), dtype=np.complex128)
    for letter in reversed(tuple(ops)):
        mat = np.kron(mat, _SINGLE[letter])
    return mat


def expm_hermitian(H: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i t H)`` for Hermitian ``H`` via its eigendecomposition."""
    w, V = np.linalg.eigh(H)
    return (V * np.exp(-1j * t * w)[None, :]) @ V.conj().T


def rotation_matrix(ops, angle: float) -> np.ndarray:
    return expm_hermitian(pauli_matrix(ops), angle)


def circuit_unitary(gates, theta, qubit_count: int) -> np.ndarray:
    """Product of dense gate unitaries, first gate rightmost.

    ``gates`` is a sequence of ``(ops, parameter_index)`` pairs.
    """
    U = np.eye(1 << qubit_count, dtype=np.complex128)
    for ops, idx in gates:
        U = rotation_matrix(ops, theta[idx]) @ U
    return U


def clause_value(kind: str, bi: int, bj: int) -> float:
    if kind == "cut":
        return float(bi != bj)
    if kind == "uncut":
        return float(bi == bj)
    raise ValueError(kind)


def objective_table(vertex_count: int, edges, weights, clauses=None) -> np.ndarray:
    """``C(z)`` for every bitstring, enumerated one assignment at a time."""
    clauses = clauses or ["cut"] * len(edges)
    table = np.zeros(1 << vertex_count)
    for bits in itertools.product((0, 1), repeat=vertex_count):
        z = sum(b << q for q, b in enumerate(bits))
        table[z] = sum(w * clause_value(k, bits[i], bits[j]) for (i, j), w, k in zip(edges, weights, clauses))
    return table


def edge_expectations(state, vertex_count: int, edges, weights, clauses=None) -> np.ndarray:
    clauses = clauses or ["cut"] * len(edges)
    probs = np.abs(np.asarray(state)) ** 2
    out = np.zeros(len(edges))
    for z, p in enumerate(probs):
        for e, ((i, j), w, k) in enumerate(zip(edges, weights, clauses)):
            out[e] += p * w * clause_value(k, (z >> i) & 1, (z >> j) & 1)
    return out


def central_difference(fn, x, h: float = 1e-6) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    grad = np.empty_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        grad[k] = (fn(x + e) - fn(x - e)) / (2 * h)
    return grad


def grid_argmin(fn_batch, lo, hi, points_per_axis: int = 400) -> np.ndarray:
    """Minimizer of a vectorized 2-D function over a regular grid on ``[lo, hi]``."""
    gx = np.linspace(lo[0], hi[0], points_per_axis)
    gy = np.linspace(lo[1], hi[1], points_per_axis)
    grid = np.stack(np.meshgrid(gx, gy, indexing="ij"), axis=-1).reshape(-1, 2)
    return grid[int(np.argmin(fn_batch(grid)))]


def feature_distance_sq(model, x, coefficients) -> float:
    """``|phi_c(x) - sum_i c_i phi_c(x_i)|^2`` in the centered feature space, by explicit expansion."""
    Kc = model.centered
    kx = model.centered_test_kernel(x)[0]
    kxx = model.centered_self_kernel(x)[0]
    c = np.asarray(coefficients)
    return float(kxx - 2 * kx @ c + c @ Kc @ c)
