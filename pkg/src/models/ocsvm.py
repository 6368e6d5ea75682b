"""
One-class SVM head on random Fourier features
Margin, decision, hinge-form primal objective and its analytic gradients
"""

from typing import Tuple

import numpy as np

from src.errors import ArgumentError
from src.models.rff import RffMap

NORMAL = 1
ANOMALY = -1


class OcSvmHead:
    """Hyperplane weights ``w`` (length 2D), offset ``rho`` and regularization ``nu``"""

    def __init__(self, w: np.ndarray, rho: float, nu: float):
        if not 0.0 < nu <= 1.0:
            raise ArgumentError(f"nu must lie in (0, 1], got {nu}")
        w = np.array(w, dtype=np.float64, copy=True)
        if w.ndim != 1 or w.shape[0] < 1:
            raise ArgumentError(f"w must be a non-empty vector, got shape {w.shape}")
        self.w = w
        # one-element array so the optimizer can update it in place
        self.rho_param = np.array([rho], dtype=np.float64)
        self.nu = float(nu)

    @classmethod
    def zeros(cls, feature_dim: int, nu: float) -> "OcSvmHead":
        return cls(np.zeros(feature_dim), 0.0, nu)

    @property
    def rho(self) -> float:
        return float(self.rho_param[0])

    @property
    def feature_dim(self) -> int:
        return self.w.shape[0]

    def parameters(self, prefix: str = "head.") -> dict:
        return {f"{prefix}w": self.w, f"{prefix}rho": self.rho_param}

    def _check_row(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        if z.ndim != 1 or z.shape[0] != self.feature_dim:
            raise ArgumentError(
                f"Expected a feature vector of length {self.feature_dim}, got shape {z.shape}"
            )
        return z

    def _check_batch(self, Z: np.ndarray) -> np.ndarray:
        Z = np.asarray(Z, dtype=np.float64)
        if Z.ndim != 2 or Z.shape[1] != self.feature_dim:
            raise ArgumentError(
                f"Expected feature rows of length {self.feature_dim}, got shape {Z.shape}"
            )
        if Z.shape[0] == 0:
            raise ArgumentError("Empty batch")
        return Z


def margin(head: OcSvmHead, z: np.ndarray) -> float:
    """g = w.z - rho"""
    z = head._check_row(z)
    return float(np.dot(head.w, z) - head.rho)


def margins(head: OcSvmHead, Z: np.ndarray) -> np.ndarray:
    Z = head._check_batch(Z)
    return Z @ head.w - head.rho


def decide(head: OcSvmHead, z: np.ndarray) -> int:
    """+1 (normal) when the margin is non-negative, -1 (anomaly) otherwise"""
    return NORMAL if margin(head, z) >= 0.0 else ANOMALY


def decisions(scores: np.ndarray) -> np.ndarray:
    return np.where(np.asarray(scores) >= 0.0, NORMAL, ANOMALY)


def _hinge_terms(head: OcSvmHead, Z: np.ndarray) -> np.ndarray:
    return head.rho - Z @ head.w


def svm_objective(head: OcSvmHead, Z: np.ndarray) -> float:
    """0.5 ||w||^2 - rho + 1/(nu n) sum_i max(0, rho - w.z_i), n = batch size"""
    Z = head._check_batch(Z)
    n = Z.shape[0]
    hinge = np.maximum(0.0, _hinge_terms(head, Z))
    return float(0.5 * np.dot(head.w, head.w) - head.rho + hinge.sum() / (head.nu * n))


def _active(head: OcSvmHead, Z: np.ndarray) -> np.ndarray:
    # the subgradient at the kink is taken as 0
    return _hinge_terms(head, Z) > 0.0


def svm_param_grads(head: OcSvmHead, Z: np.ndarray) -> Tuple[np.ndarray, float]:
    """Subgradients of :func:`svm_objective` w.r.t. w and rho"""
    Z = head._check_batch(Z)
    n = Z.shape[0]
    active = _active(head, Z)
    coef = 1.0 / (head.nu * n)
    grad_w = head.w - coef * Z[active].sum(axis=0)
    grad_rho = -1.0 + coef * float(np.count_nonzero(active))
    return grad_w, grad_rho


def svm_feature_grad(head: OcSvmHead, Z: np.ndarray) -> np.ndarray:
    """Gradient of :func:`svm_objective` w.r.t. every feature row"""
    Z = head._check_batch(Z)
    n = Z.shape[0]
    active = _active(head, Z).astype(np.float64)
    return -(active[:, None] * head.w[None, :]) / (head.nu * n)


def margin_input_grad(head: OcSvmHead, rff: RffMap, x: np.ndarray) -> np.ndarray:
    """
    Gradient of g(z(x)) w.r.t. the latent vector x

    dg/dx_k = sqrt(1/D) sum_j omega_jk [-w_j sin(omega_j.x) + w_{j+D} cos(omega_j.x)]
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != rff.input_dim:
        raise ArgumentError(f"Expected a latent vector of length {rff.input_dim}, got {x.shape}")
    if head.feature_dim != rff.output_dim:
        raise ArgumentError(
            f"Head expects {head.feature_dim} features but the map produces {rff.output_dim}"
        )
    D = rff.n_frequencies
    projection = rff.omegas @ x
    coeff = -head.w[:D] * np.sin(projection) + head.w[D:] * np.cos(projection)
    return np.sqrt(1.0 / D) * (coeff @ rff.omegas)
