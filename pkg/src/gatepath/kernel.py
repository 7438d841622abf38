"""Kernel PCA over pathway vectors.

The centered eigenproblem is ``Kc @ alpha = N * lam * alpha`` with
``Kc = H K H`` and ``H = I - 1/N``. Eigenvectors are rescaled so that the
feature-space components ``V_k = sum_i alpha_i^k (phi(x_i) - mean)`` have unit
norm, i.e. ``N * lam_k * alpha_k @ alpha_k == 1``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .errors import DegenerateTrainingSetError, StructuralError

EIGEN_CUTOFF = 1e-12
DEFAULT_VARIANCE = 0.99


@dataclass(frozen=True)
class KernelFunction:
    """``rbf``: ``exp(-|x - y|^2 / (2 sigma^2))``; ``poly``: ``(x.y + offset)^degree``."""

    kind: str = "rbf"
    sigma: float = 1.0
    degree: int = 2
    offset: float = 1.0

    def __post_init__(self):
        if self.kind == "rbf":
            if not self.sigma > 0:
                raise StructuralError(f"rbf width must be positive, got {self.sigma}")
        elif self.kind == "poly":
            if int(self.degree) != self.degree or self.degree < 1:
                raise StructuralError(f"polynomial degree must be an integer >= 1, got {self.degree}")
            if self.offset < 0:
                raise StructuralError(f"polynomial offset must be >= 0, got {self.offset}")
        else:
            raise StructuralError(f"unknown kernel kind {self.kind!r}")

    @classmethod
    def rbf(cls, sigma: float) -> KernelFunction:
        return cls("rbf", sigma=float(sigma))

    @classmethod
    def poly(cls, degree: int, offset: float = 1.0) -> KernelFunction:
        return cls("poly", degree=int(degree), offset=float(offset))

    def matrix(self, X, Y) -> np.ndarray:
        X, Y = np.atleast_2d(X), np.atleast_2d(Y)
        if self.kind == "rbf":
            return np.exp(-cdist(X, Y, "sqeuclidean") / (2.0 * self.sigma**2))
        return (X @ Y.T + self.offset) ** self.degree

    def __call__(self, x, y) -> float:
        return float(self.matrix(x, y)[0, 0])

    def diag(self, X) -> np.ndarray:
        """``K(x, x)`` for each row of ``X``."""
        X = np.atleast_2d(X)
        if self.kind == "rbf":
            return np.ones(X.shape[0])
        return (np.einsum("ij,ij->i", X, X) + self.offset) ** self.degree

    def derivative(self, X, Y) -> np.ndarray:
        """Derivative of ``K`` w.r.t. ``|x-y|^2`` (rbf) or ``x.y`` (poly)."""
        if self.kind == "rbf":
            return -self.matrix(X, Y) / (2.0 * self.sigma**2)
        X, Y = np.atleast_2d(X), np.atleast_2d(Y)
        return self.degree * (X @ Y.T + self.offset) ** (self.degree - 1)

    def diag_derivative(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        if self.kind == "rbf":
            return np.full(X.shape[0], -1.0 / (2.0 * self.sigma**2))
        return self.degree * (np.einsum("ij,ij->i", X, X) + self.offset) ** (self.degree - 1)

    def to_dict(self) -> dict:
        if self.kind == "rbf":
            return {"kind": "rbf", "sigma": self.sigma}
        return {"kind": "poly", "degree": self.degree, "offset": self.offset}


def median_sigma(X) -> float:
    """Median pairwise distance; falls back to 1.0 when all points coincide."""
    d = pdist(np.atleast_2d(X))
    d = d[d > 0]
    return float(np.median(d)) if d.size else 1.0


def kernel_matrix(training_set, kfun: KernelFunction) -> np.ndarray:
    X = np.asarray(training_set, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise StructuralError(f"need at least two training vectors, got shape {X.shape}")
    K = kfun.matrix(X, X)
    return 0.5 * (K + K.T)


def center_kernel_matrix(K) -> np.ndarray:
    """``H K H`` with ``H = I - J/N``; rows and columns of the result sum to zero."""
    K = np.asarray(K, dtype=np.float64)
    col = K.mean(axis=0)
    row = K.mean(axis=1)
    Kc = K - col[None, :] - row[:, None] + K.mean()
    return 0.5 * (Kc + Kc.T)


def literal_centering(K) -> np.ndarray:
    """``K - IK - KI + IKI`` with ``I = eye - ones`` (unscaled).

    Algebraically this equals ``J K J``: every entry becomes the grand sum of
    ``K``. Kept only as a negative control for the validation suite.
    """
    K = np.asarray(K, dtype=np.float64)
    N = K.shape[0]
    calI = np.eye(N) - np.ones((N, N))
    return K - calI @ K - K @ calI + calI @ K @ calI


def eigendecompose(centered) -> tuple[np.ndarray, np.ndarray]:
    """Solve ``Kc alpha = N lam alpha``.

    Returns all ``N`` eigenvalues ``lam`` in descending order and the rescaled
    eigenvectors (columns) for those with ``lam > 1e-12``.
    """
    Kc = np.asarray(centered, dtype=np.float64)
    N = Kc.shape[0]
    mu, vecs = np.linalg.eigh(0.5 * (Kc + Kc.T))
    order = np.argsort(mu)[::-1]
    mu, vecs = mu[order], vecs[:, order]
    lam = mu / N
    keep = lam > EIGEN_CUTOFF
    if not np.any(keep):
        raise DegenerateTrainingSetError(
            "centered kernel matrix has no eigenvalue above 1e-12 (training points indistinguishable)"
        )
    alphas = vecs[:, keep] / np.sqrt(mu[keep])[None, :]
    return lam, alphas


@dataclass(frozen=True)
class KernelModel:
    training_set: np.ndarray
    kernel: KernelFunction
    gram: np.ndarray
    centered: np.ndarray
    eigenvalues: np.ndarray
    alphas: np.ndarray
    n_components: int

    def __post_init__(self):
        if not 1 <= self.n_components <= self.alphas.shape[1]:
            raise StructuralError(
                f"n_components={self.n_components} outside [1, {self.alphas.shape[1]}]"
            )

    @property
    def training_size(self) -> int:
        return self.training_set.shape[0]

    @property
    def input_dim(self) -> int:
        return self.training_set.shape[1]

    @property
    def positive_count(self) -> int:
        return self.alphas.shape[1]

    @property
    def retained_alphas(self) -> np.ndarray:
        return self.alphas[:, : self.n_components]

    @property
    def retained_eigenvalues(self) -> np.ndarray:
        return self.eigenvalues[: self.n_components]

    def with_components(self, n: int) -> KernelModel:
        return replace(self, n_components=int(n))

    @functools.cached_property
    def _gram_means(self) -> tuple[np.ndarray, float]:
        return self.gram.mean(axis=0), float(self.gram.mean())

    def test_kernel(self, X) -> np.ndarray:
        """Uncentered ``K(x, x_i)``, shape ``(M, N)``."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.input_dim:
            raise StructuralError(f"input has dimension {X.shape[1]}, model expects {self.input_dim}")
        return self.kernel.matrix(X, self.training_set)

    def centered_test_kernel(self, X) -> np.ndarray:
        """Centered evaluations consistent with ``Kc``; shape ``(M, N)``."""
        Kx = self.test_kernel(X)
        col, grand = self._gram_means
        return Kx - Kx.mean(axis=1, keepdims=True) - col[None, :] + grand

    def centered_self_kernel(self, X) -> np.ndarray:
        """Squared norm of the centered feature map of each row of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        _, grand = self._gram_means
        return self.kernel.diag(X) - 2.0 * self.test_kernel(X).mean(axis=1) + grand

    def summary(self) -> dict:
        return {
            "kernel": self.kernel.to_dict(),
            "training_size": self.training_size,
            "input_dim": self.input_dim,
            "n_components": self.n_components,
            "positive_components": self.positive_count,
            "retained_eigenvalues": self.retained_eigenvalues.tolist(),
        }


def retained_count(eigenvalues, variance: float = DEFAULT_VARIANCE) -> int:
    """Smallest ``n`` whose leading positive eigenvalues reach ``variance`` of their sum."""
    lam = np.asarray(eigenvalues)
    lam = lam[lam > EIGEN_CUTOFF]
    cum = np.cumsum(lam) / lam.sum()
    return int(min(lam.size, np.searchsorted(cum, variance - 1e-12) + 1))


def fit_kernel_model(
    training_set,
    kfun: KernelFunction,
    retain: int | str = "auto",
    *,
    variance: float = DEFAULT_VARIANCE,
    centering: Callable[[np.ndarray], np.ndarray] = center_kernel_matrix,
) -> KernelModel:
    X = np.array(training_set, dtype=np.float64)
    K = kernel_matrix(X, kfun)
    Kc = centering(K)
    lam, alphas = eigendecompose(Kc)
    if retain == "auto":
        n = retained_count(lam, variance)
    else:
        n = min(int(retain), alphas.shape[1])
    return KernelModel(X, kfun, K, Kc, lam, alphas, n)


def project_coefficients(x, model: KernelModel) -> tuple[np.ndarray, np.ndarray]:
    """Projection ``beta_k`` onto the retained components and ``ell_i = sum_k beta_k alpha_i^k``.

    For a single point returns vectors of length ``n`` and ``N``; for a batch
    ``(M, D)`` returns ``(M, n)`` and ``(M, N)``.
    """
    x = np.asarray(x, dtype=np.float64)
    A = model.retained_alphas
    beta = model.centered_test_kernel(x) @ A
    ell = beta @ A.T
    if x.ndim == 1:
        return beta[0], ell[0]
    return beta, ell


def projection_residual(x, model: KernelModel) -> np.ndarray | float:
    """Squared feature-space distance between ``x`` and its projection.

    Evaluated with the kernel trick as ``Kc(x, x) - |beta|^2``.
    """
    x = np.asarray(x, dtype=np.float64)
    beta, _ = project_coefficients(np.atleast_2d(x), model)
    res = model.centered_self_kernel(x) - np.einsum("ij,ij->i", beta, beta)
    return float(res[0]) if x.ndim == 1 else res
