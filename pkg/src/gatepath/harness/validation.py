"""Invariant suite run by ``gatepath validate``.

Every module invariant is checked on small seeded problems. Each check reports
the worst observed value against its tolerance; the transcript contains no
timings so two runs with the same config print the same text.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.spatial import Delaunay

from .. import oracle
from ..circuit import (
    GateSequence,
    GateSpec,
    PauliString,
    apply_pauli_rotation,
    build_state,
    measure,
    objective_value,
)
from ..kernel import (
    KernelFunction,
    center_kernel_matrix,
    fit_kernel_model,
    literal_centering,
    median_sigma,
    project_coefficients,
    projection_residual,
)
from ..pathway import ObjectiveSpec, decode_element, decompose_objective, encode_element
from ..preimage import PreImageConfig, distance, gradient, iterate_once, solve_preimage
from ..regression import decompose_theta, fit_chi, parallel_sine, target_theta
from .config import make_config
from .instance import random_graph, ring_graph
from .report import dumps
from .runner import build_context, run, run_ratio_test, run_state_determination


@dataclass(frozen=True)
class CheckResult:
    module: str
    name: str
    passed: bool
    value: float
    tol: float
    note: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{self.module:<11}{self.name:<34}{status}  {self.value:.3e} (tol {self.tol:.0e})"
        return f"{text}  {self.note}" if self.note else text


@dataclass
class ValidationReport:
    results: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def transcript(self) -> str:
        header = f"{'module':<11}{'invariant':<34}result  worst"
        failed = sum(not r.passed for r in self.results)
        footer = f"{len(self.results) - failed}/{len(self.results)} invariants passed"
        return "\n".join([header] + [r.line() for r in self.results] + [footer]) + "\n"


def _random_state(rng, n: int) -> np.ndarray:
    v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return v / np.linalg.norm(v)


def _random_pauli(rng, n: int) -> PauliString:
    while True:
        ops = "".join(rng.choice(list("IXYZ"), size=n))
        if set(ops) != {"I"}:
            return PauliString(tuple(ops))


def _random_circuit(rng, max_qubits: int, max_gates: int) -> tuple[GateSequence, np.ndarray]:
    n = int(rng.integers(1, max_qubits + 1))
    g = int(rng.integers(1, max_gates + 1))
    gates = tuple(GateSpec(_random_pauli(rng, n), k) for k in range(g))
    return GateSequence(gates, n, g), rng.uniform(-np.pi, np.pi, g)


def _random_objective(rng, n: int) -> ObjectiveSpec:
    graph = ring_graph(n) if rng.random() < 0.5 else random_graph(n, int(rng.integers(2**31)))
    return ObjectiveSpec.maxcut(graph, rng.uniform(0.5, 2.0, graph.edge_count))


# circuit ---------------------------------------------------------------------

def _oracle_build_state(rng, centering):
    worst = 0.0
    for _ in range(60):
        seq, theta = _random_circuit(rng, 3, 6)
        U = oracle.circuit_unitary([(g.generator.ops, g.parameter_index) for g in seq.gates], theta, seq.qubit_count)
        psi0 = _random_state(rng, seq.qubit_count)
        worst = max(worst, float(np.max(np.abs(build_state(seq, theta, psi0) - U @ psi0))))
    return worst


def _norm_preservation(rng, centering):
    worst = 0.0
    for _ in range(100):
        seq, theta = _random_circuit(rng, 10, 20)
        worst = max(worst, abs(float(np.linalg.norm(build_state(seq, theta))) - 1.0))
    return worst


def _rotation_composition(rng, centering):
    worst = 0.0
    for _ in range(40):
        n = int(rng.integers(1, 7))
        P, psi = _random_pauli(rng, n), _random_state(rng, n)
        a, b = rng.uniform(-np.pi, np.pi, 2)
        two = apply_pauli_rotation(apply_pauli_rotation(psi, P, a), P, b)
        worst = max(worst, float(np.max(np.abs(two - apply_pauli_rotation(psi, P, a + b)))))
    return worst


def _rotation_inverse(rng, centering):
    worst = 0.0
    for _ in range(40):
        n = int(rng.integers(1, 7))
        P, psi = _random_pauli(rng, n), _random_state(rng, n)
        a = rng.uniform(-np.pi, np.pi)
        back = apply_pauli_rotation(apply_pauli_rotation(psi, P, a), P, -a)
        worst = max(worst, float(np.max(np.abs(back - psi))))
    return worst


def _objective_bounds(rng, centering):
    worst = 0.0
    for _ in range(40):
        n = int(rng.integers(2, 7))
        obj = _random_objective(rng, n)
        table = oracle.objective_table(n, obj.graph.edges, obj.weights)
        f = objective_value(_random_state(rng, n), obj)
        worst = max(worst, table.min() - f, f - table.max())
    return max(worst, 0.0)


def _measure_determinism(rng, centering):
    psi = _random_state(rng, 4)
    seed = int(rng.integers(2**31))
    return 0.0 if measure(psi, 500, seed) == measure(psi, 500, seed) else 1.0


# pathway ---------------------------------------------------------------------

def _pathway_additivity(rng, centering):
    worst = 0.0
    for _ in range(30):
        n = int(rng.integers(2, 11))
        obj = _random_objective(rng, n)
        psi = _random_state(rng, n)
        worst = max(worst, abs(float(decompose_objective(psi, obj).sum()) - objective_value(psi, obj)))
    return worst


def _pathway_oracle(rng, centering):
    worst = 0.0
    for _ in range(15):
        n = int(rng.integers(2, 6))
        obj = _random_objective(rng, n)
        psi = _random_state(rng, n)
        ref = oracle.edge_expectations(psi, n, obj.graph.edges, obj.weights)
        worst = max(worst, float(np.max(np.abs(decompose_objective(psi, obj) - ref))))
    return worst


def _encode_decode(rng, centering):
    worst = 0.0
    for _ in range(30):
        obj = _random_objective(rng, int(rng.integers(2, 9)))
        omega = rng.uniform(0.0, 2.0, obj.graph.edge_count)
        dec = decode_element(encode_element(obj.graph, omega).vector, obj.graph)
        if dec.edge_indices != tuple(range(obj.graph.edge_count)):
            return float("inf")
        worst = max(worst, float(np.max(np.abs(dec.omega - omega))))
    return worst


def _global_phase(rng, centering):
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(2, 8))
        obj = _random_objective(rng, n)
        psi = _random_state(rng, n)
        rotated = np.exp(1j * rng.uniform(0, 2 * np.pi)) * psi
        worst = max(worst, float(np.max(np.abs(decompose_objective(rotated, obj) - decompose_objective(psi, obj)))))
    return worst


# regression ------------------------------------------------------------------

def _pinv_identities(rng, centering):
    worst = 0.0
    for _ in range(30):
        L = int(rng.integers(1, 12))
        thetas = rng.standard_normal((int(rng.integers(1, 20)), L))
        model = fit_chi(thetas, rng.standard_normal(thetas.shape[0]))
        A = model.chi[None, :]
        P = model.pinv[:, None]
        worst = max(
            worst,
            float(np.max(np.abs(A @ P @ A - A))),
            float(np.max(np.abs(P @ A @ P - P))),
            float(np.max(np.abs((A @ P).T - A @ P))),
            float(np.max(np.abs((P @ A).T - P @ A))),
        )
    return worst


def _decomposition(rng, centering):
    worst = 0.0
    for _ in range(50):
        L = int(rng.integers(1, 12))
        chi_true = rng.standard_normal(L)
        thetas = rng.standard_normal((L + 3, L))
        model = fit_chi(thetas, thetas @ chi_true)
        theta0 = rng.standard_normal(L)
        f0 = float(theta0 @ model.chi)
        split = decompose_theta(theta0, model, f0)
        worst = max(worst, float(np.max(np.abs(split.f_component + split.null_component - theta0))),
                    abs(float(model.chi @ split.null_component)))
    return worst


def _target_identity(rng, centering):
    worst = 0.0
    for _ in range(50):
        L = int(rng.integers(1, 12))
        model = fit_chi(rng.standard_normal((L + 2, L)), rng.standard_normal(L + 2))
        theta0 = rng.standard_normal(L)
        f0 = float(theta0 @ model.chi)
        f_star = f0 + float(rng.normal())
        theta_star = target_theta(theta0, model, f0, f_star)
        worst = max(worst, abs(float(model.chi @ theta_star) - f_star),
                    parallel_sine(theta_star - theta0, model.chi))
    return worst


def _local_linearity(cfg: dict):
    def check(rng, centering):
        local = make_config({
            "instance": {"kind": "maxcut-ring", "size": 2},
            "circuit": {"layers": 1},
            "training": {"size": 2},
            "state": {"theta0": "random", "seed": cfg["validate"]["seed"], "ratio_steps": [0.04, 0.02, 0.01, 0.005, 0.0025]},
            "regression": {"method": "local-difference"},
        })
        ctx = build_context(local)
        run_state_determination(ctx)
        spread = run_ratio_test(ctx)["max_over_min"]
        return float("inf") if spread is None else spread
    return check


# kernel ----------------------------------------------------------------------

def _training_sets(rng, count: int):
    for _ in range(count):
        N = int(rng.integers(5, 41))
        D = int(rng.integers(1, 9))
        yield rng.standard_normal((N, D))


def _centering_sums(rng, centering):
    worst = 0.0
    for X in _training_sets(rng, 15):
        K = KernelFunction.rbf(median_sigma(X)).matrix(X, X)
        Kc = centering(K)
        worst = max(worst, float(np.max(np.abs(Kc.sum(axis=0)))), float(np.max(np.abs(Kc.sum(axis=1)))))
    return worst


def _centering_idempotence(rng, centering):
    worst = 0.0
    for X in _training_sets(rng, 15):
        K = KernelFunction.poly(2, 1.0).matrix(X, X)
        Kc = centering(K)
        worst = max(worst, float(np.max(np.abs(centering(Kc) - Kc))) / max(1.0, float(np.max(np.abs(Kc)))))
    return worst


def _eigen_residual(rng, centering):
    worst = 0.0
    for X in _training_sets(rng, 15):
        model = fit_kernel_model(X, KernelFunction.rbf(median_sigma(X)), centering=centering)
        N = model.training_size
        lam = model.eigenvalues[: model.positive_count]
        resid = model.centered @ model.alphas - model.alphas * (N * lam)[None, :]
        worst = max(worst, float(np.max(np.linalg.norm(resid, axis=0))) / (N * lam[0]))
    return worst


def _trace_identity(rng, centering):
    worst = 0.0
    for X in _training_sets(rng, 15):
        model = fit_kernel_model(X, KernelFunction.rbf(median_sigma(X)), centering=centering)
        total = model.training_size * float(model.eigenvalues.sum())
        worst = max(worst, abs(total - float(np.trace(model.centered))) / max(1.0, float(np.trace(model.centered))))
    return worst


def _reconstruction(rng, centering):
    worst = 0.0
    for X in _training_sets(rng, 10):
        model = fit_kernel_model(X, KernelFunction.rbf(median_sigma(X)), centering=centering)
        full = model.with_components(model.positive_count)
        worst = max(worst, float(np.max(np.abs(projection_residual(X, full)))))
    return worst


def _reconstruction_oracle(rng, centering):
    # kernel-trick residual against explicit expansion of the feature-space distance
    worst = 0.0
    for X in _training_sets(rng, 5):
        model = fit_kernel_model(X, KernelFunction.rbf(median_sigma(X)), retain=3, centering=centering)
        x = X[0] + 0.1 * rng.standard_normal(X.shape[1])
        _, ell = project_coefficients(x, model)
        worst = max(worst, abs(projection_residual(x, model) - oracle.feature_distance_sq(model, x, ell)))
    return worst


def _reconstruction_monotone(rng, centering):
    worst = 0.0
    for X in _training_sets(rng, 8):
        model = fit_kernel_model(X, KernelFunction.rbf(median_sigma(X)), centering=centering)
        res = np.array([projection_residual(X[0], model.with_components(n)) for n in range(1, model.positive_count + 1)])
        worst = max(worst, float(np.max(np.diff(res), initial=0.0)))
    return max(worst, 0.0)


def _gram_psd(rng, centering):
    worst = 0.0
    for X in _training_sets(rng, 10):
        for kfun in (KernelFunction.rbf(median_sigma(X)), KernelFunction.poly(2, 1.0)):
            K = kfun.matrix(X, X)
            worst = max(worst, -float(np.linalg.eigvalsh(K).min()) / max(1.0, float(np.abs(K).max())))
    return max(worst, 0.0)


# preimage --------------------------------------------------------------------

def _cluster_model(rng, centering, kind: str = "rbf", dim: int = 2):
    centers = rng.uniform(-2, 2, (3, dim))
    X = np.vstack([c + 0.4 * rng.standard_normal((8, dim)) for c in centers])
    kfun = KernelFunction.rbf(median_sigma(X)) if kind == "rbf" else KernelFunction.poly(2, 1.0)
    return fit_kernel_model(X, kfun, centering=centering), X


def _gradient_fd(rng, centering):
    worst = 0.0
    for m in range(6):
        model, X = _cluster_model(rng, centering, "rbf" if m % 2 == 0 else "poly", dim=int(rng.integers(2, 5)))
        u0 = X[int(rng.integers(len(X)))] + 0.1 * rng.standard_normal(X.shape[1])
        phi = float(rng.choice([0.0, 0.5]))
        for _ in range(5):
            x = u0 + 0.5 * rng.standard_normal(X.shape[1])
            g = gradient(x, model, u0, phi)
            fd = oracle.central_difference(lambda y: distance(y, model, u0, phi), x, 1e-5)
            worst = max(worst, float(np.linalg.norm(g - fd) / max(np.linalg.norm(fd), 1e-8)))
    return worst


def _fixed_point(rng, centering):
    worst = 0.0
    for _ in range(8):
        model, X = _cluster_model(rng, centering)
        u0 = X[int(rng.integers(len(X)))] + 0.05 * rng.standard_normal(2)
        cfg = PreImageConfig(tol=1e-10, max_iterations=2000)
        res = solve_preimage(model, u0, cfg)
        if not res.converged:
            continue
        worst = max(worst, float(np.linalg.norm(iterate_once(res.solution, model, u0, res.phi_used) - res.solution)) / cfg.tol)
    return worst


def _regularizer_limit(rng, centering):
    worst = 0.0
    for _ in range(5):
        model, X = _cluster_model(rng, centering)
        u0 = X[int(rng.integers(len(X)))] + 0.3 * rng.standard_normal(2)
        scale = float(np.max(np.abs(model.gram)))
        d = [float(np.linalg.norm(solve_preimage(model, u0, PreImageConfig(phi=f * scale, tol=1e-14)).solution - u0))
             for f in (1e3, 1e6)]
        if not d[1] < d[0] or d[1] > 1e-6:
            return float("inf") if not d[1] < d[0] else d[1]
        worst = max(worst, d[1])
    return worst


def _grid_oracle(rng, centering):
    worst = 0.0
    for _ in range(4):
        model, X = _cluster_model(rng, centering)
        u0 = X[int(rng.integers(len(X)))] + 0.1 * rng.standard_normal(2)
        res = solve_preimage(model, u0, PreImageConfig(tol=1e-10, max_iterations=2000))
        if not res.converged:
            continue
        lo, hi = X.min(axis=0), X.max(axis=0)
        pad = 0.2 * (hi - lo)
        best = oracle.grid_argmin(lambda G: distance(G, model, u0, 0.0), lo - pad, hi + pad, 200)
        step = float(np.max((hi - lo + 2 * pad) / 199))
        # a 200-point grid resolves the minimizer to about one cell
        worst = max(worst, float(np.linalg.norm(res.solution - best)) / (1e-2 + step))
    return worst


def _hull_property(rng, centering):
    violations = 0
    for _ in range(6):
        model, X = _cluster_model(rng, centering)
        hull = Delaunay(X)
        u0 = X[int(rng.integers(len(X)))] + 0.1 * rng.standard_normal(2)
        res = solve_preimage(model, u0, PreImageConfig(max_iterations=200, restart="none"))
        x = u0.copy()
        for nonneg in res.nonnegative_trace:
            x = iterate_once(x, model, u0, 0.0)
            if nonneg and hull.find_simplex(x, tol=1e-9) < 0:
                violations += 1
    return float(violations)


# harness ---------------------------------------------------------------------

def _training_consistency(cfg: dict):
    def check(rng, centering):
        small = make_config({**{k: cfg[k] for k in ("instance", "circuit", "measurement")}, "training": {"size": 20}})
        small["measurement"]["mode"] = "exact"
        ctx = build_context(small)
        obj = ctx.instance.objective
        table = oracle.objective_table(obj.qubit_count, obj.graph.edges, obj.weights, list(obj.clauses) or None)
        worst = 0.0
        for s in ctx.training:
            worst = max(worst, abs(float(s.upsilon[obj.graph.edge_count:].sum()) - s.f),
                        table.min() - s.f, s.f - table.max())
        return max(worst, 0.0)
    return check


def _report_determinism(cfg: dict):
    def check(rng, centering):
        small = make_config(cfg)
        small["training"]["size"] = min(small["training"]["size"], 30)
        first, _ = run(small, "full")
        again, _ = run(make_config(first), "full")
        return 0.0 if dumps(first) == dumps(again) else 1.0
    return check


def _checks(cfg: dict) -> list[tuple[str, str, Callable, float]]:
    return [
        ("circuit", "dense-oracle-equivalence", _oracle_build_state, 1e-10),
        ("circuit", "norm-preservation", _norm_preservation, 1e-10),
        ("circuit", "rotation-composition", _rotation_composition, 1e-10),
        ("circuit", "rotation-inverse", _rotation_inverse, 1e-10),
        ("circuit", "objective-within-bounds", _objective_bounds, 1e-10),
        ("circuit", "measurement-determinism", _measure_determinism, 0.0),
        ("pathway", "additivity", _pathway_additivity, 1e-10),
        ("pathway", "edge-values-oracle", _pathway_oracle, 1e-10),
        ("pathway", "encode-decode-round-trip", _encode_decode, 0.0),
        ("pathway", "global-phase-invariance", _global_phase, 1e-12),
        ("regression", "pseudoinverse-identities", _pinv_identities, 1e-12),
        ("regression", "decomposition-completeness", _decomposition, 1e-10),
        ("regression", "target-identity-and-parallel", _target_identity, 1e-10),
        ("regression", "local-linearity-ratio", _local_linearity(cfg), 10.0),
        ("kernel", "centering-zero-sums", _centering_sums, 1e-9),
        ("kernel", "centering-idempotence", _centering_idempotence, 1e-10),
        ("kernel", "gram-positive-semidefinite", _gram_psd, 1e-10),
        ("kernel", "eigen-residual", _eigen_residual, 1e-8),
        ("kernel", "trace-identity", _trace_identity, 1e-8),
        ("kernel", "full-reconstruction", _reconstruction, 1e-8),
        ("kernel", "residual-vs-expansion", _reconstruction_oracle, 1e-9),
        ("kernel", "reconstruction-monotone", _reconstruction_monotone, 1e-10),
        ("preimage", "gradient-finite-difference", _gradient_fd, 1e-5),
        ("preimage", "fixed-point-self-consistency", _fixed_point, 1.0),
        ("preimage", "regularizer-limit", _regularizer_limit, 1e-6),
        ("preimage", "grid-oracle", _grid_oracle, 1.0),
        ("preimage", "hull-when-weights-nonnegative", _hull_property, 0.0),
        ("harness", "training-additivity-bounds", _training_consistency(cfg), 1e-10),
        ("harness", "report-determinism", _report_determinism(cfg), 0.0),
    ]


def run_validation(cfg: dict | None = None) -> ValidationReport:
    """Run every invariant check; exceptions inside a check count as failures."""
    cfg = cfg or make_config()
    centering = literal_centering if cfg["validate"]["corrupt_centering"] else center_kernel_matrix
    base = int(cfg["validate"]["seed"])
    results = []
    for k, (module, name, fn, tol) in enumerate(_checks(cfg)):
        rng = np.random.default_rng([base, k])
        try:
            value = float(fn(rng, centering))
            note = ""
        except Exception as exc:  # noqa: BLE001 - a crashing check is a failed check
            value, note = float("inf"), f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(module, name, bool(value <= tol), value, tol, note))
    return ValidationReport(results)


__all__ = ["CheckResult", "ValidationReport", "run_validation"]
