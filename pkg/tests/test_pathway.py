import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gatepath import oracle
from gatepath.circuit import basis_state, measure, objective_value, uniform_state, zero_state
from gatepath.errors import ConfigError, DecodeError, StructuralError
from gatepath.pathway import (
    ConnectivityGraph,
    ObjectiveSpec,
    PathwayElement,
    decode_element,
    decompose_objective,
    encode_element,
    estimate_decomposition,
)

TRIANGLE = ConnectivityGraph(3, ((0, 1), (0, 2), (1, 2)))
SINGLE = ConnectivityGraph(2, ((0, 1),))


def random_state(rng, n):
    v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return v / np.linalg.norm(v)


@st.composite
def objectives(draw, max_n=8):
    n = draw(st.integers(2, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    keep = draw(st.lists(st.sampled_from(pairs), min_size=1, max_size=len(pairs), unique=True))
    graph = ConnectivityGraph.from_pairs(n, keep)
    weights = draw(st.lists(st.floats(-3, 3, allow_nan=False), min_size=graph.edge_count, max_size=graph.edge_count))
    clauses = draw(st.lists(st.sampled_from(["cut", "uncut"]), min_size=graph.edge_count, max_size=graph.edge_count))
    return ObjectiveSpec(graph, tuple(weights), tuple(clauses))


class TestGraph:
    def test_from_pairs_canonicalizes(self):
        g = ConnectivityGraph.from_pairs(4, [(3, 0), (2, 1), (0, 1), (1, 0)])
        assert g.edges == ((0, 1), (0, 3), (1, 2))

    @pytest.mark.parametrize("edges", [((1, 0),), ((0, 1), (0, 1)), ((0, 2), (0, 1)), ((0, 5),)])
    def test_rejects_non_canonical(self, edges):
        with pytest.raises(StructuralError):
            ConnectivityGraph(3, edges)

    def test_index_of(self):
        assert TRIANGLE.index_of((1, 2)) == 2


class TestObjectiveSpec:
    @settings(max_examples=30, deadline=None)
    @given(objectives(max_n=6))
    def test_diagonal_matches_brute_force(self, obj):
        table = oracle.objective_table(obj.qubit_count, obj.graph.edges, obj.weights, list(obj.clauses))
        assert np.allclose(obj.diagonal(), table, atol=1e-12)

    def test_terms_sum_to_diagonal(self):
        obj = ObjectiveSpec.maxcut(TRIANGLE, [1.0, 2.0, 0.5])
        assert np.array_equal(obj.term_diagonals().sum(axis=0), obj.diagonal())

    def test_json_round_trip(self):
        obj = ObjectiveSpec(TRIANGLE, (1.0, 2.5, -0.5), ("cut", "uncut", "cut"))
        assert ObjectiveSpec.from_json(json.loads(json.dumps(obj.to_json()))) == obj

    def test_json_uniform_clause(self):
        obj = ObjectiveSpec(SINGLE, (1.0,), ("uncut",))
        doc = obj.to_json()
        assert doc["clause"] == "uncut" and doc["edges"] == [[0, 1, 1.0]]
        assert ObjectiveSpec.from_json(doc) == obj

    @pytest.mark.parametrize("doc", [
        {"vertices": 3, "edges": [[1, 2, 1.0], [0, 1, 1.0]]},
        {"vertices": 3, "edges": [[0, 1]]},
        {"edges": []},
        {"schema": 2, "vertices": 2, "edges": [[0, 1, 1.0]]},
    ])
    def test_bad_documents(self, doc):
        with pytest.raises(ConfigError):
            ObjectiveSpec.from_json(doc)

    def test_weight_count_mismatch(self):
        with pytest.raises(StructuralError):
            ObjectiveSpec.maxcut(TRIANGLE, [1.0])


class TestDecompose:
    def test_single_cut_edge(self):
        assert decompose_objective(basis_state(2, 0b10), ObjectiveSpec.maxcut(SINGLE)).tolist() == [1.0]

    def test_triangle_all_zero(self):
        assert decompose_objective(zero_state(3), ObjectiveSpec.maxcut(TRIANGLE)).tolist() == [0.0, 0.0, 0.0]

    def test_triangle_uniform_superposition(self):
        # each edge is cut in 4 of the 8 bitstrings
        omega = decompose_objective(uniform_state(3), ObjectiveSpec.maxcut(TRIANGLE))
        assert np.allclose(omega, [0.5, 0.5, 0.5], atol=1e-15)

    def test_matches_bitwise_oracle(self):
        rng = np.random.default_rng(0)
        obj = ObjectiveSpec(TRIANGLE, (0.3, 1.7, 2.0), ("cut", "uncut", "cut"))
        psi = random_state(rng, 3)
        ref = oracle.edge_expectations(psi, 3, TRIANGLE.edges, obj.weights, list(obj.clauses))
        assert np.max(np.abs(decompose_objective(psi, obj) - ref)) <= 1e-14

    @settings(max_examples=40, deadline=None)
    @given(objectives(max_n=10), st.integers(0, 2**31))
    def test_additivity(self, obj, seed):
        psi = random_state(np.random.default_rng(seed), obj.qubit_count)
        assert abs(decompose_objective(psi, obj).sum() - objective_value(psi, obj)) <= 1e-10

    @settings(max_examples=30, deadline=None)
    @given(objectives(max_n=6), st.integers(0, 2**31), st.floats(0, 2 * np.pi))
    def test_global_phase_invariance(self, obj, seed, phase):
        psi = random_state(np.random.default_rng(seed), obj.qubit_count)
        a = decompose_objective(psi, obj)
        b = decompose_objective(np.exp(1j * phase) * psi, obj)
        assert np.max(np.abs(a - b)) <= 1e-12

    def test_estimate_converges_for_basis_state(self):
        obj = ObjectiveSpec.maxcut(TRIANGLE)
        psi = basis_state(3, 0b001)
        assert np.array_equal(estimate_decomposition(measure(psi, 64, seed=1), obj), decompose_objective(psi, obj))

    def test_dimension_mismatch(self):
        with pytest.raises(StructuralError):
            decompose_objective(zero_state(2), ObjectiveSpec.maxcut(TRIANGLE))


class TestElements:
    def test_encode_triangle(self):
        el = encode_element(TRIANGLE, [0, 0, 0])
        assert el.vector.tolist() == [0, 1, 2, 0, 0, 0]

    def test_encode_single_edge(self):
        assert encode_element(SINGLE, [0.7]).vector.tolist() == [0.0, 0.7]

    def test_encode_length_mismatch(self):
        with pytest.raises(StructuralError):
            encode_element(TRIANGLE, [0.1, 0.2])

    def test_decode_rounds_kappa(self):
        dec = decode_element([0.02, 0.98, 2.01, 0.4, 0.1, 0.2], TRIANGLE)
        assert dec.edge_indices == (0, 1, 2)
        assert dec.total == pytest.approx(0.7, abs=1e-15)
        assert dec.edges == TRIANGLE.edges
        assert dec.flagged == ()

    def test_decode_plain(self):
        dec = decode_element([0.0, 0.5])
        assert dec.edge_indices == (0,) and dec.total == 0.5

    def test_decode_out_of_range(self):
        with pytest.raises(DecodeError, match="outside"):
            decode_element([0.6, 0.3], SINGLE)

    def test_decode_collision(self):
        with pytest.raises(DecodeError, match="collide"):
            decode_element([0.1, 0.2, 2.0, 0, 0, 0], TRIANGLE)

    def test_decode_flags_large_rounding(self):
        dec = decode_element([0.0, 1.3, 2.0, 0, 0, 0], TRIANGLE)
        assert dec.flagged == (1,)

    def test_decode_half_rounds_up(self):
        assert decode_element([0.5, 0.4, 0, 0]).edge_indices == (1, 0)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=12))
    def test_round_trip_exact(self, omega):
        m = len(omega)
        graph = ConnectivityGraph.from_pairs(m + 1, [(0, k) for k in range(1, m + 1)])
        dec = decode_element(encode_element(graph, omega), graph)
        assert dec.edge_indices == tuple(range(m))
        assert dec.omega.tolist() == [float(w) for w in omega]

    def test_odd_vector_rejected(self):
        with pytest.raises(StructuralError):
            PathwayElement.from_vector([0.0, 1.0, 2.0])
