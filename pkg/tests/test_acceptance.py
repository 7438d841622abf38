"""Exit criteria, one test per criterion. The terminal summary prints one line each."""

import json
import subprocess
import sys
import time

import numpy as np
import pytest

from gatepath import oracle
from gatepath.circuit import GateSequence, GateSpec, PauliString, build_state, objective_value
from gatepath.harness.config import make_config
from gatepath.harness.instance import random_graph, ring_graph
from gatepath.harness.report import validate_report
from gatepath.harness.runner import build_context, run_ratio_test, run_state_determination
from gatepath.kernel import (
    KernelFunction,
    center_kernel_matrix,
    fit_kernel_model,
    kernel_matrix,
    median_sigma,
    projection_residual,
)
from gatepath.pathway import ObjectiveSpec, decompose_objective
from gatepath.preimage import PreImageConfig, distance, gradient, solve_preimage
from gatepath.regression import decompose_theta, fit_chi, parallel_sine, target_theta


def _random_circuit(rng, max_qubits, max_gates):
    n = int(rng.integers(1, max_qubits + 1))
    count = int(rng.integers(1, max_gates + 1))
    gates = []
    for k in range(count):
        ops = tuple(rng.choice(list("IXYZ"), size=n))
        if set(ops) == {"I"}:
            ops = ("X",) + ops[1:]
        gates.append(GateSpec(PauliString(ops), k))
    return GateSequence(tuple(gates), n, count), rng.uniform(-np.pi, np.pi, count)


def _random_state(rng, n):
    v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return v / np.linalg.norm(v)


def _clusters(rng, dim=2, per=15, spread=0.25):
    centers = rng.uniform(-1, 1, (3, dim))
    return np.vstack([c + spread * rng.standard_normal((per, dim)) for c in centers]), centers


def _run_cli(*args, cwd):
    return subprocess.run([sys.executable, "-m", "gatepath", *args], cwd=cwd, capture_output=True, text=True)


@pytest.mark.acceptance(1)
def test_simulator_matches_dense_oracle():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        seq, theta = _random_circuit(rng, 3, 6)
        U = oracle.circuit_unitary([(g.generator.ops, g.parameter_index) for g in seq.gates], theta, seq.qubit_count)
        expected = U[:, 0]
        worst = max(worst, float(np.max(np.abs(build_state(seq, theta) - expected))))
    elapsed = time.perf_counter() - start
    print(f"max amplitude error {worst:.2e}, {elapsed:.2f} s")
    assert worst <= 1e-10
    assert elapsed <= 5.0


@pytest.mark.acceptance(2)
def test_norm_preservation():
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(1000):
        seq, theta = _random_circuit(rng, 10, 20)
        worst = max(worst, abs(float(np.linalg.norm(build_state(seq, theta))) - 1.0))
    print(f"max |norm - 1| {worst:.2e}")
    assert worst <= 1e-10


@pytest.mark.acceptance(3)
def test_pathway_additivity():
    rng = np.random.default_rng(103)
    worst = 0.0
    for k in range(100):
        n = int(rng.integers(2, 13))
        graph = ring_graph(n) if k % 2 == 0 else random_graph(n, int(rng.integers(2**31)))
        objective = ObjectiveSpec.maxcut(graph, rng.uniform(0.1, 3.0, graph.edge_count))
        psi = _random_state(rng, n)
        worst = max(worst, abs(float(decompose_objective(psi, objective).sum()) - objective_value(psi, objective)))
    print(f"max |sum omega - f| {worst:.2e}")
    assert worst <= 1e-10


@pytest.mark.acceptance(4)
def test_regression_algebraic_contract():
    rng = np.random.default_rng(104)
    completeness = null = identity = sine = 0.0
    for _ in range(100):
        L = int(rng.integers(1, 30))
        thetas = rng.uniform(0, 2 * np.pi, (int(rng.integers(L, 2 * L + 2)), L))
        chi_true = rng.standard_normal(L)
        model = fit_chi(thetas, thetas @ chi_true)
        theta0 = rng.uniform(0, 2 * np.pi, L)
        f0 = float(theta0 @ model.chi)
        split = decompose_theta(theta0, model, f0)
        f_star = f0 + float(rng.normal())
        theta_star = target_theta(theta0, model, f0, f_star)
        completeness = max(completeness, float(np.max(np.abs(split.f_component + split.null_component - theta0))))
        null = max(null, abs(float(model.chi @ split.null_component)))
        identity = max(identity, abs(float(model.chi @ theta_star) - f_star))
        sine = max(sine, parallel_sine(theta_star - theta0, model.chi))
    print(f"completeness {completeness:.2e}, null {null:.2e}, identity {identity:.2e}, sine {sine:.2e}")
    assert completeness <= 1e-12
    assert null <= 1e-10
    assert identity <= 1e-10
    assert sine <= 1e-10


@pytest.mark.acceptance(5)
def test_local_linearity_ratio():
    cfg = make_config({
        "instance": {"kind": "maxcut-ring", "size": 2},
        "circuit": {"layers": 1},
        "training": {"size": 2},
        "state": {"theta0": "random", "ratio_steps": [0.04, 0.02, 0.01]},
        "regression": {"method": "local-difference"},
    })
    ctx = build_context(cfg)
    run_state_determination(ctx)
    ratio = run_ratio_test(ctx)
    print("gap/step^2:", [round(r["gap_over_step_sq"], 6) for r in ratio["rows"]], "max/min", ratio["max_over_min"])
    assert ratio["max_over_min"] is not None
    assert ratio["max_over_min"] <= 10.0


@pytest.mark.acceptance(6)
def test_kernel_centering_and_eigenproblem():
    rng = np.random.default_rng(106)
    sums = eig = trace = 0.0
    for k in range(50):
        N = int(rng.integers(2, 101))
        D = int(rng.integers(1, 21))
        X = rng.standard_normal((N, D))
        kfun = KernelFunction.rbf(median_sigma(X)) if k % 2 == 0 else KernelFunction.poly(2, 1.0)
        model = fit_kernel_model(X, kfun)
        Kc = model.centered
        sums = max(sums, float(np.max(np.abs(Kc.sum(axis=1)))))
        lam = model.eigenvalues[: model.positive_count]
        resid = Kc @ model.alphas - model.alphas * (N * lam)[None, :]
        eig = max(eig, float(np.max(np.linalg.norm(resid, axis=0))) / (N * lam[0]))
        trace = max(trace, abs(N * float(model.eigenvalues.sum()) - float(np.trace(Kc))))
    print(f"row sums {sums:.2e}, eigen residual / N lam_max {eig:.2e}, trace {trace:.2e}")
    assert sums <= 1e-9
    assert eig <= 1e-8
    assert trace <= 1e-8


@pytest.mark.acceptance(7)
def test_full_reconstruction_of_training_points():
    rng = np.random.default_rng(107)
    worst = 0.0
    for _ in range(20):
        N = int(rng.integers(3, 51))
        X = rng.standard_normal((N, int(rng.integers(1, 6))))
        model = fit_kernel_model(X, KernelFunction.rbf(median_sigma(X)))
        full = model.with_components(model.positive_count)
        worst = max(worst, float(np.max(np.abs(projection_residual(X, full)))))
    print(f"max projection distance {worst:.2e}")
    assert worst <= 1e-8


@pytest.mark.acceptance(8)
def test_preimage_matches_grid_minimizer():
    start = time.perf_counter()
    errors, failed = [], 0
    for seed in range(20):
        rng = np.random.default_rng(1080 + seed)
        X, centers = _clusters(rng)
        model = fit_kernel_model(X, KernelFunction.rbf(median_sigma(X)))
        u0 = centers[0] + 0.1 * rng.standard_normal(2)
        result = solve_preimage(model, u0, PreImageConfig())
        if not result.converged:
            failed += 1
            continue
        lo, hi = X.min(axis=0), X.max(axis=0)
        pad = 0.2 * (hi - lo)
        best = oracle.grid_argmin(lambda G: distance(G, model, u0, 0.0), lo - pad, hi + pad, 400)
        errors.append(float(np.linalg.norm(result.solution - best)))
    elapsed = time.perf_counter() - start
    print(f"non-converged {failed}/20, max distance to grid argmin {max(errors):.2e}, {elapsed:.1f} s")
    assert failed < 5
    assert max(errors) <= 1e-2
    assert elapsed <= 60.0


@pytest.mark.acceptance(9)
def test_gradient_against_finite_differences():
    rng = np.random.default_rng(109)
    worst = 0.0
    for m in range(10):
        dim = int(rng.integers(2, 6))
        X, centers = _clusters(rng, dim=dim, per=8, spread=0.5)
        kfun = KernelFunction.rbf(median_sigma(X)) if m % 2 == 0 else KernelFunction.poly(int(rng.integers(2, 4)), 1.0)
        model = fit_kernel_model(X, kfun)
        u0 = centers[0]
        phi = [0.0, 0.3][m % 2]
        for _ in range(10):
            x = u0 + 0.5 * rng.standard_normal(dim)
            g = gradient(x, model, u0, phi)
            fd = oracle.central_difference(lambda y: distance(y, model, u0, phi), x, 1e-5)
            worst = max(worst, float(np.linalg.norm(g - fd) / np.linalg.norm(fd)))
    print(f"max relative deviation {worst:.2e}")
    assert worst <= 1e-5


@pytest.mark.acceptance(10)
def test_regularizer_limit():
    worst = 0.0
    for seed in range(10):
        rng = np.random.default_rng(1100 + seed)
        X, centers = _clusters(rng)
        model = fit_kernel_model(X, KernelFunction.rbf(median_sigma(X)))
        u0 = centers[1] + 0.3 * rng.standard_normal(2)
        scale = float(np.max(np.abs(kernel_matrix(X, model.kernel))))
        moved = [
            float(np.linalg.norm(solve_preimage(model, u0, PreImageConfig(phi=f * scale, tol=1e-14)).solution - u0))
            for f in (1e3, 1e6)
        ]
        assert moved[1] < moved[0]
        worst = max(worst, moved[1])
    print(f"max |x* - u0| at 1e6 scale {worst:.2e}")
    assert worst <= 1e-6


@pytest.fixture(scope="module")
def desk_runs(tmp_path_factory):
    root = tmp_path_factory.mktemp("desk")
    config = root / "config.json"
    config.write_text(json.dumps({
        "instance": {"kind": "maxcut-ring", "size": 4},
        "circuit": {"layers": 1},
        "training": {"size": 100},
        "preimage": {"max_iterations": 500},
    }))
    runs = []
    for name in ("a", "b"):
        start = time.perf_counter()
        proc = _run_cli("full", "--config", str(config), "--out", str(root / name), "--quiet", cwd=root)
        runs.append((proc, time.perf_counter() - start, root / name / "report.json"))
    return root, config, runs


@pytest.mark.acceptance(11)
def test_end_to_end_desk_run(desk_runs):
    root, config, runs = desk_runs
    proc, elapsed, path = runs[0]
    assert proc.returncode == 0, proc.stderr
    report = json.loads(path.read_text())
    validate_report(report)
    check = _run_cli("validate", "--config", str(config), "--quiet", cwd=root)
    print(f"full run {elapsed:.2f} s, validate exit {check.returncode}")
    assert elapsed <= 30.0
    assert check.returncode == 0, check.stdout + check.stderr


@pytest.mark.acceptance(12)
def test_repeat_runs_are_byte_identical(desk_runs):
    _, _, runs = desk_runs
    (pa, _, a), (pb, _, b) = runs
    assert pa.returncode == 0 and pb.returncode == 0
    assert a.read_bytes() == b.read_bytes()
