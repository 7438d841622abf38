"""Regularized pre-image of a kernel-PCA projection by fixed-point iteration.

Given a fitted :class:`~gatepath.kernel.KernelModel` and an anchor ``u0``, the
feature-space target is the training mean plus the projection of
``phi(u0) - mean`` onto the retained components. In terms of the uncentered
training maps it is ``sum_i g_i phi(x_i)`` with ``g = ell + 1/N``.

The minimized objective (constants dropped) is::

    d(x) = K(x, x) - 2 sum_i g_i K(x, x_i) + Phi (x.x - 2 x.u0)

Writing half its gradient as ``b(x) x - sum_i w_i(x) x_i + Phi (x - u0)`` gives
the update ``x <- (sum_i w_i x_i + Phi u0) / (b + Phi)``, whose fixed points
are exactly the stationary points of ``d``. For the rbf kernel
``w_i = g_i K(x, x_i) / sigma^2`` and ``b = sum_i w_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DenominatorCollapseError, ProjectionZeroError, StructuralError
from .kernel import KernelFunction, KernelModel, project_coefficients

DENOMINATOR_FLOOR = 1e-12
PROJECTION_FLOOR = 1e-12
RESTART_POLICIES = ("none", "perturb", "grow-phi")


@dataclass(frozen=True)
class PreImageConfig:
    phi: float = 0.0
    max_iterations: int = 500
    tol: float = 1e-8
    restart: str = "grow-phi"
    restart_factor: float = 10.0
    perturb_scale: float = 1e-2
    max_restarts: int = 3
    seed: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.phi) and self.phi >= 0):
            raise StructuralError(f"phi must be finite and >= 0, got {self.phi}")
        if self.max_iterations < 1:
            raise StructuralError("max_iterations must be >= 1")
        if not self.tol > 0:
            raise StructuralError("tol must be positive")
        if self.restart not in RESTART_POLICIES:
            raise StructuralError(f"restart must be one of {RESTART_POLICIES}")


@dataclass(frozen=True)
class FeatureTarget:
    """Feature-space element ``sum_i coefficients[i] * phi(points[i])``."""

    points: np.ndarray
    coefficients: np.ndarray
    kernel: KernelFunction
    beta: np.ndarray | None = None

    @property
    def input_dim(self) -> int:
        return self.points.shape[1]


@dataclass
class PreImageResult:
    solution: np.ndarray
    iterations_used: int
    converged: bool
    gradient_norm_at_solution: float
    distance_trace: list[float] = field(default_factory=list)
    step_trace: list[float] = field(default_factory=list)
    denominator_trace: list[float] = field(default_factory=list)
    nonnegative_trace: list[bool] = field(default_factory=list)
    restarts: int = 0
    phi_used: float = 0.0
    failure: str | None = None

    @property
    def distance_monotone(self) -> bool:
        d = np.asarray(self.distance_trace)
        return bool(np.all(np.diff(d) <= 1e-12 * (1 + np.abs(d[:-1])))) if d.size > 1 else True

    def trace_rows(self) -> list[tuple[int, float, float, float]]:
        return [
            (r + 1, d, s, D)
            for r, (d, s, D) in enumerate(zip(self.distance_trace, self.step_trace, self.denominator_trace))
        ]

    def to_dict(self) -> dict:
        return {
            "solution": self.solution.tolist(),
            "iterations_used": self.iterations_used,
            "converged": self.converged,
            "gradient_norm_at_solution": self.gradient_norm_at_solution,
            "restarts": self.restarts,
            "phi_used": self.phi_used,
            "failure": self.failure,
            "distance_monotone": self.distance_monotone,
            "all_weights_nonnegative": bool(all(self.nonnegative_trace)),
            "distance_trace": list(self.distance_trace),
            "step_trace": list(self.step_trace),
            "denominator_trace": list(self.denominator_trace),
        }


@dataclass(frozen=True)
class ExtremumDiagnostic:
    epsilon: np.ndarray
    sigma_weights: np.ndarray
    gradient_norm_at_extremum: float
    distance_to_solution: float
    inconclusive: bool
    iterations: int

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon.tolist(),
            "sigma_weights": self.sigma_weights.tolist(),
            "gradient_norm_at_extremum": self.gradient_norm_at_extremum,
            "distance_to_solution": self.distance_to_solution,
            "inconclusive": self.inconclusive,
            "iterations": self.iterations,
        }


def feature_target(model: KernelModel, upsilon0) -> FeatureTarget:
    """Mean-restored projection of ``phi(upsilon0)`` as a training-map expansion."""
    beta, ell = project_coefficients(upsilon0, model)
    coeffs = ell + (1.0 - ell.sum()) / model.training_size
    return FeatureTarget(model.training_set, coeffs, model.kernel, beta)


def _resolve(source, upsilon0) -> FeatureTarget:
    if isinstance(source, FeatureTarget):
        return source
    if isinstance(source, KernelModel):
        return feature_target(source, upsilon0)
    raise TypeError(f"expected KernelModel or FeatureTarget, got {type(source).__name__}")


def _stationary_terms(target: FeatureTarget, x: np.ndarray) -> tuple[np.ndarray, float]:
    """Weights ``w_i`` and scale ``b`` of the half-gradient at ``x`` (single point)."""
    kern = target.kernel
    if kern.kind == "rbf":
        w = target.coefficients * (-2.0 * kern.derivative(x, target.points)[0])
        return w, float(w.sum())
    w = target.coefficients * kern.derivative(x, target.points)[0]
    return w, float(kern.diag_derivative(x)[0])


def distance(x, source, upsilon0, phi: float) -> float | np.ndarray:
    """Regularized squared feature-space distance with ``x``-independent terms dropped.

    ``x`` may be a single point or a batch of shape ``(M, D)``.
    """
    upsilon0 = np.asarray(upsilon0, dtype=np.float64)
    t = _resolve(source, upsilon0)
    X = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if X.shape[1] != t.input_dim:
        raise StructuralError(f"point dimension {X.shape[1]} != {t.input_dim}")
    val = (
        t.kernel.diag(X)
        - 2.0 * t.kernel.matrix(X, t.points) @ t.coefficients
        + phi * (np.einsum("ij,ij->i", X, X) - 2.0 * X @ upsilon0)
    )
    return float(val[0]) if np.ndim(x) == 1 else val


def gradient(x, source, upsilon0, phi: float) -> np.ndarray:
    """Exact gradient of :func:`distance` with respect to ``x``."""
    x = np.asarray(x, dtype=np.float64)
    upsilon0 = np.asarray(upsilon0, dtype=np.float64)
    t = _resolve(source, upsilon0)
    w, b = _stationary_terms(t, x)
    return 2.0 * (b * x - w @ t.points + phi * (x - upsilon0))


def _step(t: FeatureTarget, x: np.ndarray, upsilon0: np.ndarray, phi: float):
    w, b = _stationary_terms(t, x)
    denom = b + phi
    if not denom > DENOMINATOR_FLOOR:
        raise DenominatorCollapseError(denom)
    return (w @ t.points + phi * upsilon0) / denom, denom, bool(np.all(w >= 0))


def iterate_once(prev, source, upsilon0, phi: float) -> np.ndarray:
    """One fixed-point update evaluated at the previous iterate."""
    prev = np.asarray(prev, dtype=np.float64)
    upsilon0 = np.asarray(upsilon0, dtype=np.float64)
    nxt, _, _ = _step(_resolve(source, upsilon0), prev, upsilon0, phi)
    return nxt


def solve_preimage(source, upsilon0, config: PreImageConfig | None = None) -> PreImageResult:
    """Iterate from ``upsilon0`` until the step falls below ``config.tol``.

    Each attempt runs at most ``max_iterations`` updates. A denominator
    collapse triggers the restart policy (at most ``max_restarts`` times):
    ``grow-phi`` multiplies the regularizer, ``perturb`` restarts from a
    jittered anchor. The distance trace is recorded as-is; it need not be
    monotone.
    """
    config = config or PreImageConfig()
    upsilon0 = np.asarray(upsilon0, dtype=np.float64)
    t = _resolve(source, upsilon0)
    if upsilon0.shape != (t.input_dim,):
        raise StructuralError(f"anchor has shape {upsilon0.shape}, model input dimension is {t.input_dim}")
    if t.beta is not None and not np.any(np.abs(t.beta) > PROJECTION_FLOOR):
        raise ProjectionZeroError("projection of the anchor onto the retained components is zero")

    rng = np.random.default_rng(config.seed)
    phi = float(config.phi)
    result = PreImageResult(upsilon0.copy(), 0, False, float("nan"), phi_used=phi)
    x = upsilon0.copy()
    while True:
        try:
            for _ in range(config.max_iterations):
                nxt, denom, nonneg = _step(t, x, upsilon0, phi)
                step = float(np.linalg.norm(nxt - x))
                x = nxt
                result.iterations_used += 1
                result.denominator_trace.append(denom)
                result.step_trace.append(step)
                result.nonnegative_trace.append(nonneg)
                result.distance_trace.append(distance(x, t, upsilon0, phi))
                if step <= config.tol:
                    result.converged = True
                    break
            if not result.converged:
                result.failure = "max-iterations"
            break
        except DenominatorCollapseError as exc:
            if config.restart == "none" or result.restarts >= config.max_restarts:
                result.failure = "denominator-collapse"
                break
            result.restarts += 1
            if config.restart == "grow-phi":
                # phi = 0 cannot grow multiplicatively; seed it from the collapsed denominator
                phi = config.restart_factor * max(phi, abs(exc.denominator), 1e-6)
                x = upsilon0.copy()
            else:
                x = upsilon0 + config.perturb_scale * rng.standard_normal(upsilon0.shape)

    result.solution = x
    result.phi_used = phi
    result.gradient_norm_at_solution = float(np.linalg.norm(gradient(x, t, upsilon0, phi)))
    return result


def extremum_check(result: PreImageResult, source, upsilon0, phi: float | None = None,
                   *, max_iterations: int = 1000, tol: float = 1e-12) -> ExtremumDiagnostic:
    """Self-consistent weighted mean ``eps = sum_i s_i x_i / sum_j s_j`` seeded at the solution.

    ``s_i`` are the fixed-point weights at ``eps`` without the regularizer.
    The reported gradient norm is that of the unregularized distance at
    ``eps``. Purely diagnostic: the solution is not modified. ``phi`` is
    accepted for signature symmetry and is not used in the weights.
    """
    del phi
    upsilon0 = np.asarray(upsilon0, dtype=np.float64)
    t = _resolve(source, upsilon0)
    eps = np.asarray(result.solution, dtype=np.float64).copy()
    inconclusive = False
    used = 0
    w, _ = _stationary_terms(t, eps)
    for used in range(1, max_iterations + 1):
        total = w.sum()
        if abs(total) < DENOMINATOR_FLOOR:
            inconclusive = True
            break
        nxt = (w @ t.points) / total
        moved = float(np.linalg.norm(nxt - eps))
        eps = nxt
        w, _ = _stationary_terms(t, eps)
        if moved <= tol * (1.0 + np.linalg.norm(eps)):
            break
    return ExtremumDiagnostic(
        epsilon=eps,
        sigma_weights=w,
        gradient_norm_at_extremum=float(np.linalg.norm(gradient(eps, t, upsilon0, 0.0))),
        distance_to_solution=float(np.linalg.norm(eps - result.solution)),
        inconclusive=inconclusive,
        iterations=used,
    )
