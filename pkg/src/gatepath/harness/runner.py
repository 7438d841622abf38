"""End-to-end runs: training data, target-parameter determination, pathway recovery."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..circuit import build_state, estimate_objective, measure, objective_value
from ..errors import ConfigError, DecodeError
from ..kernel import KernelFunction, KernelModel, fit_kernel_model, median_sigma
from ..pathway import decode_element, decompose_objective, encode_element, estimate_decomposition
from ..preimage import extremum_check, solve_preimage
from ..regression import RegressionModel, decompose_theta, fit_chi, parallel_sine, target_theta
from .config import SCHEMA_VERSION, preimage_config
from .instance import Instance, instance_from_config


@dataclass(frozen=True)
class TrainingSample:
    theta: np.ndarray
    f: float
    upsilon: np.ndarray


class Evaluator:
    """Objective and per-edge values of a parameter vector, exact or shot-based.

    Shot mode draws one sub-seed per call from a seeded stream, so results
    depend only on the base seed and the order of calls.
    """

    def __init__(self, instance: Instance, mode: str = "exact", shots: int = 1024, seed: int = 0):
        self.instance = instance
        self.mode = mode
        self.shots = shots
        self._rng = np.random.default_rng(seed)

    def state(self, theta) -> np.ndarray:
        return build_state(self.instance.circuit, theta, self.instance.input_state())

    def __call__(self, theta) -> tuple[float, np.ndarray]:
        psi = self.state(theta)
        objective = self.instance.objective
        if self.mode == "exact":
            return objective_value(psi, objective), decompose_objective(psi, objective)
        samples = measure(psi, self.shots, int(self._rng.integers(2**63)))
        return estimate_objective(samples, objective), estimate_decomposition(samples, objective)


def sample_training_set(instance: Instance, size: int, *, seed: int, distribution: str = "uniform",
                        low: float = 0.0, high: float = 2 * np.pi, scale: float = 1.0,
                        evaluator: Evaluator | None = None) -> list[TrainingSample]:
    """Draw ``size`` parameter vectors i.i.d. and simulate each one."""
    evaluator = evaluator or Evaluator(instance)
    rng = np.random.default_rng(seed)
    L = instance.parameter_count
    if distribution == "uniform":
        thetas = rng.uniform(low, high, size=(size, L))
    else:
        thetas = rng.normal(0.0, scale, size=(size, L))
    samples = []
    for theta in thetas:
        f, omega = evaluator(theta)
        samples.append(TrainingSample(theta, f, encode_element(instance.graph, omega).vector))
    return samples


@dataclass
class RunContext:
    """Everything derived from a config that more than one section needs."""

    config: dict
    instance: Instance
    evaluator: Evaluator
    training: list[TrainingSample]
    theta0: np.ndarray
    f0: float
    omega0: np.ndarray
    timings: dict = field(default_factory=dict)
    regression_model: RegressionModel | None = None
    theta_star: np.ndarray | None = None
    _kernel_model: KernelModel | None = None

    @property
    def upsilon0(self) -> np.ndarray:
        return encode_element(self.instance.graph, self.omega0).vector

    def kernel_model(self) -> KernelModel:
        if self._kernel_model is None:
            self._kernel_model = _fit_kernel(self.config, np.array([s.upsilon for s in self.training]))
        return self._kernel_model


def _fit_kernel(cfg: dict, X: np.ndarray):
    k = cfg["kernel"]
    if k["kind"] == "rbf":
        sigma = median_sigma(X) if k["sigma"] == "auto" else float(k["sigma"])
        kfun = KernelFunction.rbf(sigma)
    else:
        kfun = KernelFunction.poly(k["degree"], k["offset"])
    return fit_kernel_model(X, kfun, k["retain"])


def _initial_theta(cfg: dict, L: int) -> np.ndarray:
    spec = cfg["state"]["theta0"]
    if spec == "zero":
        return np.zeros(L)
    if spec == "random":
        return np.random.default_rng(cfg["state"]["seed"]).uniform(0.0, 2 * np.pi, L)
    theta = np.asarray(spec, dtype=np.float64)
    if theta.shape != (L,):
        raise ConfigError(f"state.theta0 has {theta.size} entries, circuit has {L} parameters")
    return theta


def build_context(cfg: dict) -> RunContext:
    t0 = time.perf_counter()
    instance = instance_from_config(cfg)
    m = cfg["measurement"]
    evaluator = Evaluator(instance, m["mode"], m["shots"], m["seed"])
    theta0 = _initial_theta(cfg, instance.parameter_count)
    f0, omega0 = evaluator(theta0)
    tr = cfg["training"]
    training = sample_training_set(instance, tr["size"], seed=tr["seed"], distribution=tr["distribution"],
                                   low=tr["low"], high=tr["high"], scale=tr["scale"], evaluator=evaluator)
    ctx = RunContext(cfg, instance, evaluator, training, theta0, f0, omega0)
    ctx.timings["setup"] = time.perf_counter() - t0
    return ctx


def fit_regression(ctx: RunContext):
    method = ctx.config["regression"]["method"]
    if method == "min-norm-single":
        return fit_chi([ctx.theta0], [ctx.f0], method)
    if method == "least-squares-batch":
        thetas = np.vstack([ctx.theta0] + [s.theta for s in ctx.training])
        fs = np.array([ctx.f0] + [s.f for s in ctx.training])
        return fit_chi(thetas, fs, method)
    if method == "local-difference":
        h = float(ctx.config["regression"]["probe_step"])
        L = ctx.theta0.size
        probes = ctx.theta0 + np.vstack([h * np.eye(L), -h * np.eye(L)])
        fs = np.array([ctx.evaluator(theta)[0] for theta in probes])
        return fit_chi(probes, fs, method, origin=(ctx.theta0, ctx.f0))
    return fit_chi([ctx.theta0], [ctx.f0], method, kernel_model=ctx.kernel_model(), anchor=ctx.upsilon0)


def _target_value(ctx: RunContext) -> float:
    s = ctx.config["state"]
    return float(s["target"]) if s["target"] is not None else ctx.f0 + float(s["step"])


def run_state_determination(ctx: RunContext) -> dict:
    """Target parameters for the configured objective value, with residuals."""
    t0 = time.perf_counter()
    model = fit_regression(ctx)
    f_star = _target_value(ctx)
    theta_star = target_theta(ctx.theta0, model, ctx.f0, f_star)
    split = decompose_theta(ctx.theta0, model, ctx.f0)
    f_sim, _ = ctx.evaluator(theta_star)
    chi = model.chi
    predicted = float(chi @ ctx.theta0) + (f_star - ctx.f0)
    section = {
        "theta0": ctx.theta0.tolist(),
        "f0": ctx.f0,
        "f_star": f_star,
        "theta_star": theta_star.tolist(),
        "regression": model.to_dict(),
        "decomposition": {
            "f_component": split.f_component.tolist(),
            "null_component": split.null_component.tolist(),
            "completeness_residual": float(np.max(np.abs(split.f_component + split.null_component - ctx.theta0))),
            "null_space_residual": float(chi @ split.null_component),
            "fit_residual_at_theta0": split.residual,
        },
        "identity_residual": float(chi @ theta_star) - predicted,
        "target_residual": float(chi @ theta_star) - f_star,
        "update_parallel_sine": parallel_sine(theta_star - ctx.theta0, chi),
        "f_sim": f_sim,
        "gap": abs(f_sim - f_star),
    }
    ctx.timings["state"] = time.perf_counter() - t0
    ctx.theta_star = theta_star
    ctx.regression_model = model
    return section


def run_ratio_test(ctx: RunContext, steps=None) -> dict:
    """Gap ``|f_sim(theta*) - f*|`` for shrinking steps ``f* - f0``.

    ``gap / step^2`` stays bounded when the update is second-order accurate;
    ``gap / step`` is reported alongside so a first-order gap is visible.
    """
    steps = [float(s) for s in (steps or ctx.config["state"]["ratio_steps"])]
    model = ctx.regression_model or fit_regression(ctx)
    rows = []
    for step in steps:
        theta_star = target_theta(ctx.theta0, model, ctx.f0, ctx.f0 + step)
        f_sim, _ = ctx.evaluator(theta_star)
        gap = abs(f_sim - (ctx.f0 + step))
        rows.append({"step": step, "f_sim": f_sim, "gap": gap,
                     "gap_over_step": gap / step, "gap_over_step_sq": gap / step**2})
    ratios = np.array([r["gap_over_step_sq"] for r in rows])
    if np.all(ratios == 0):
        spread = 1.0
    elif np.any(ratios == 0):
        spread = None  # unbounded spread
    else:
        spread = float(ratios.max() / ratios.min())
    return {"rows": rows, "max_over_min": spread}


def run_pathway(ctx: RunContext) -> dict:
    """Pre-image of the projected anchor pathway, decoded and compared with the simulator."""
    if ctx.theta_star is None:
        run_state_determination(ctx)
    t0 = time.perf_counter()
    model = ctx.kernel_model()
    upsilon0 = ctx.upsilon0
    pcfg = preimage_config(ctx.config)
    result = solve_preimage(model, upsilon0, pcfg)
    diag = extremum_check(result, model, upsilon0, result.phi_used)
    theta_star = ctx.theta_star
    f_sim, omega_sim = ctx.evaluator(theta_star)

    section = {
        "upsilon0": upsilon0.tolist(),
        "kernel": model.summary(),
        "preimage": result.to_dict(),
        "extremum": diag.to_dict(),
        "theta_star": theta_star.tolist(),
        "omega_sim": omega_sim.tolist(),
        "total_sim": f_sim,
    }
    try:
        decoded = decode_element(result.solution, ctx.instance.graph)
    except DecodeError as exc:
        section["decoded"] = None
        section["decode_error"] = str(exc)
    else:
        section["decoded"] = {
            "edge_indices": list(decoded.edge_indices),
            "edges": [list(e) for e in decoded.edges],
            "omega": decoded.omega.tolist(),
            "total": decoded.total,
            "kappa_deviation": decoded.deviations.tolist(),
            "flagged": list(decoded.flagged),
        }
        # decoded entry p belongs to edge edge_indices[p]
        deviation = decoded.omega - omega_sim[list(decoded.edge_indices)]
        section["edge_deviation"] = deviation.tolist()
        section["max_abs_deviation"] = float(np.max(np.abs(deviation)))
        section["total_deviation"] = decoded.total - f_sim
    ctx.timings["pathway"] = time.perf_counter() - t0
    return section


def run(cfg: dict, command: str = "full") -> tuple[dict, RunContext]:
    """Execute ``determine-state``, ``pathway`` or ``full`` and assemble the report."""
    ctx = build_context(cfg)
    report = {
        "schema": SCHEMA_VERSION,
        "command": command,
        "config": cfg,
        "instance": ctx.instance.to_dict(),
        "training": {
            "size": len(ctx.training),
            "f_min": min(s.f for s in ctx.training),
            "f_max": max(s.f for s in ctx.training),
        },
    }
    if command in ("determine-state", "full"):
        report["state"] = run_state_determination(ctx)
        report["ratio_test"] = run_ratio_test(ctx)
    if command in ("pathway", "full"):
        report["pathway"] = run_pathway(ctx)
    report["status"] = _status(report)
    return report, ctx


def _status(report: dict) -> str:
    pathway = report.get("pathway")
    if pathway is not None:
        if pathway["preimage"]["failure"] == "denominator-collapse":
            return "numerical-failure"
        if pathway.get("decoded") is None:
            return "numerical-failure"
    return "ok"


__all__ = [
    "Evaluator",
    "RunContext",
    "TrainingSample",
    "build_context",
    "run",
    "run_pathway",
    "run_ratio_test",
    "run_state_determination",
    "sample_training_set",
]
