"""Linear objective model ``f(theta) = theta . chi`` and the target-parameter update.

The update moves ``theta0`` only along ``chi``::

    theta* = theta0 + pinv(chi) * (f* - f0),    pinv(chi) = chi / |chi|^2

so the component of ``theta0`` orthogonal to ``chi`` is left untouched.
Whether the simulated objective actually reaches ``f*`` depends on how
linear it is around ``theta0``; callers should measure that gap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFitError, SingularityError, StructuralError

METHODS = ("min-norm-single", "least-squares-batch", "local-difference", "kernel-coefficients")


@dataclass(frozen=True)
class RegressionModel:
    chi: np.ndarray
    fit_method: str
    provenance: str
    residual: float = 0.0  # ||Theta chi - f|| over the training equations
    rank: int | None = None

    def __post_init__(self):
        chi = np.asarray(self.chi, dtype=np.float64)
        if chi.ndim != 1 or chi.size == 0:
            raise StructuralError(f"chi must be a non-empty vector, got shape {chi.shape}")
        if not np.all(np.isfinite(chi)):
            raise DegenerateFitError("chi has non-finite entries")
        if not np.any(chi):
            raise DegenerateFitError("chi is identically zero; the target update is undefined")
        if self.fit_method not in METHODS:
            raise StructuralError(f"unknown fit method {self.fit_method!r}")
        object.__setattr__(self, "chi", chi)

    @property
    def pinv(self) -> np.ndarray:
        return vector_pseudoinverse(self.chi)

    def predict(self, theta) -> float:
        return float(np.asarray(theta, dtype=np.float64) @ self.chi)

    def to_dict(self) -> dict:
        return {
            "chi": self.chi.tolist(),
            "method": self.fit_method,
            "provenance": self.provenance,
            "residual": self.residual,
            "rank": self.rank,
        }


@dataclass(frozen=True)
class ThetaDecomposition:
    f_component: np.ndarray
    null_component: np.ndarray
    residual: float  # theta0 . chi - f0; zero when theta0 is consistent with the model


def vector_pseudoinverse(chi) -> np.ndarray:
    """Moore-Penrose pseudoinverse of a nonzero vector, ``chi / |chi|^2``."""
    chi = np.asarray(chi, dtype=np.float64)
    sq = float(chi @ chi)
    if sq == 0.0:
        raise SingularityError("pseudoinverse of the zero vector")
    return chi / sq


def fit_chi(thetas, fs, method: str = "least-squares-batch", *,
            kernel_model=None, anchor=None, origin=None) -> RegressionModel:
    """Fit the regression coefficients from ``(theta_i, f_i)`` samples.

    Parameters
    ----------
    thetas
        Array of shape ``(N, L)`` (a single vector is promoted to ``N = 1``).
    fs
        Objective values, length ``N``.
    method
        ``"min-norm-single"`` solves ``theta0 . chi = f0`` for one sample with
        the minimum-norm solution. ``"least-squares-batch"`` returns the
        SVD-based minimum-norm least-squares solution. ``"local-difference"``
        does the same on differences ``(theta_i - theta0) . chi = f_i - f0``
        relative to ``origin = (theta0, f0)``; with symmetric probes
        ``theta0 +- h e_k`` this is the central-difference gradient, so the
        update is second-order accurate near ``theta0``. ``"kernel-coefficients"``
        sets ``chi_j = sum_i alpha_i^j Kc(anchor, x_i)`` for every positive
        eigencomponent ``j`` of ``kernel_model`` (zero-padded to ``N``), which
        requires ``L == N``.
    origin
        Only for ``"local-difference"``: the pair ``(theta0, f0)``.
    kernel_model, anchor
        Only for ``"kernel-coefficients"``: a fitted
        :class:`~gatepath.kernel.KernelModel` and the input-space point at
        which the coefficients are evaluated.
    """
    thetas = np.atleast_2d(np.asarray(thetas, dtype=np.float64))
    fs = np.atleast_1d(np.asarray(fs, dtype=np.float64))
    if thetas.shape[0] != fs.shape[0] or thetas.shape[0] == 0:
        raise StructuralError(f"{thetas.shape[0]} parameter vectors for {fs.shape[0]} objective values")
    n_samples, n_params = thetas.shape

    if method == "min-norm-single":
        if n_samples != 1:
            raise StructuralError(f"min-norm-single takes exactly one sample, got {n_samples}")
        theta0, f0 = thetas[0], fs[0]
        sq = float(theta0 @ theta0)
        if sq == 0.0:
            raise DegenerateFitError("theta0 is the zero vector; theta0 . chi = f0 has no usable solution")
        chi = theta0 * (f0 / sq)
        provenance = "single sample, minimum-norm solution of theta0 . chi = f0"
        rank = 1
    elif method == "least-squares-batch":
        if not np.any(thetas):
            raise DegenerateFitError("stacked parameter matrix is all zero")
        chi, _, rank, _ = np.linalg.lstsq(thetas, fs, rcond=None)
        rank = int(rank)
        provenance = f"{n_samples} samples, minimum-norm least squares (rank {rank})"
    elif method == "local-difference":
        if origin is None:
            raise StructuralError("local-difference needs origin=(theta0, f0)")
        theta0 = np.asarray(origin[0], dtype=np.float64)
        if theta0.shape != (n_params,):
            raise StructuralError(f"origin has shape {theta0.shape}, samples have {n_params} parameters")
        thetas = thetas - theta0
        fs = fs - float(origin[1])
        if not np.any(thetas):
            raise DegenerateFitError("all probes coincide with the origin")
        chi, _, rank, _ = np.linalg.lstsq(thetas, fs, rcond=None)
        rank = int(rank)
        provenance = f"{n_samples} probes around theta0, least squares on differences (rank {rank})"
    elif method == "kernel-coefficients":
        from .kernel import project_coefficients

        if kernel_model is None or anchor is None:
            raise StructuralError("kernel-coefficients needs kernel_model and anchor")
        size = kernel_model.training_size
        if n_params != size:
            raise StructuralError(
                f"kernel-coefficients gives {size} coefficients but theta has {n_params} entries"
            )
        full = kernel_model.with_components(kernel_model.positive_count)
        beta, _ = project_coefficients(anchor, full)
        chi = np.zeros(size)
        chi[: beta.size] = beta
        rank = int(beta.size)
        provenance = (
            "kernel eigen-coefficients evaluated at the anchor point as a proxy for the "
            "unknown target element"
        )
    else:
        raise StructuralError(f"unknown fit method {method!r}; expected one of {METHODS}")

    if not np.any(chi):
        raise DegenerateFitError(f"{method} produced an all-zero chi")
    residual = float(np.linalg.norm(thetas @ chi - fs))
    return RegressionModel(chi, method, provenance, residual, rank)


def decompose_theta(theta0, model: RegressionModel, f0: float) -> ThetaDecomposition:
    theta0 = _check_theta(theta0, model)
    f_component = model.pinv * float(f0)
    return ThetaDecomposition(
        f_component=f_component,
        null_component=theta0 - f_component,
        residual=float(theta0 @ model.chi - f0),
    )


def target_theta(theta0, model: RegressionModel, f0: float, f_star: float) -> np.ndarray:
    theta0 = _check_theta(theta0, model)
    return theta0 + model.pinv * (float(f_star) - float(f0))


def parallel_sine(u, v) -> float:
    """Sine of the angle between two vectors; 0 if either is zero."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    u, v = u / nu, v / nv
    # rejection norm; sqrt(1 - cos^2) loses half the digits near parallel
    return float(min(1.0, np.linalg.norm(u - (u @ v) * v)))


def _check_theta(theta0, model: RegressionModel) -> np.ndarray:
    theta0 = np.asarray(theta0, dtype=np.float64)
    if theta0.shape != model.chi.shape:
        raise StructuralError(f"theta0 has shape {theta0.shape}, chi has {model.chi.shape}")
    return theta0
