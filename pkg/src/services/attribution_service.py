"""
Attribution Service
Gradients of the OC-SVM margin with respect to the raw input features,
the rules for reading them, and gradient maps for image-shaped rows
"""

from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np
from loguru import logger

from src.errors import ArgumentError, ContractError
from src.models.ae1svm import Ae1SvmModel
from src.models.network import DenseLayer
from src.models.ocsvm import OcSvmHead, margin_input_grad
from src.models.rff import RffMap


@dataclass
class AttributionResult:
    gradient: np.ndarray
    positive_part: np.ndarray
    negative_part: np.ndarray
    sample_index: int

    @classmethod
    def from_gradient(cls, gradient: np.ndarray, sample_index: int = 0) -> "AttributionResult":
        gradient = np.asarray(gradient, dtype=np.float64)
        return cls(
            gradient=gradient,
            positive_part=np.maximum(gradient, 0.0),
            negative_part=np.maximum(-gradient, 0.0),
            sample_index=sample_index,
        )


@dataclass
class GradientMaps:
    positive: np.ndarray
    negative: np.ndarray
    full: np.ndarray

    def items(self) -> List[Tuple[str, np.ndarray]]:
        return [("positive", self.positive), ("negative", self.negative), ("full", self.full)]


def layer_grad(layer: DenseLayer, input: np.ndarray) -> np.ndarray:  # noqa: A002
    """
    Jacobian of a dense layer at ``input`` (fan_out x fan_in)

    Entry (n, m) is w_mn * act'(u_n): w_mn u_n (1 - u_n) for sigmoid,
    w_mn (1 - u_n^2) for tanh, w_mn for identity.
    """
    x = np.asarray(input, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != layer.fan_in:
        raise ArgumentError(f"Expected an input of length {layer.fan_in}, got shape {x.shape}")
    u = layer.forward(x[None, :])[0]
    return layer.activation.derivative_from_output(u)[:, None] * layer.weights.T


def _check_model(model: Ae1SvmModel) -> None:
    if not model.fitted:
        raise ContractError("Model has not been trained or loaded from a trained file")
    if model.encoder.output_dim != model.rff.input_dim or model.rff.output_dim != model.head.feature_dim:
        raise ContractError("Model components have inconsistent dimensions")


def end_to_end_grad(model: Ae1SvmModel, raw_sample: np.ndarray, sample_index: int = 0) -> AttributionResult:
    """
    d margin / d raw input for one sample, by chaining layer Jacobians

    The chain runs through the min-max scaling, every encoder layer and the
    RFF map into the margin.
    """
    _check_model(model)
    x = np.asarray(raw_sample, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.input_dim:
        raise ArgumentError(f"Expected a sample of length {model.input_dim}, got shape {x.shape}")

    current = model.scaler.transform(x)
    jacobian = np.diag(1.0 / model.scaler.data_range)
    for layer in model.encoder.layers:
        jacobian = layer_grad(layer, current) @ jacobian
        current = layer.forward(current[None, :])[0]

    gradient = margin_input_grad(model.head, model.rff, current) @ jacobian
    return AttributionResult.from_gradient(gradient, sample_index)


def batch_gradients(model: Ae1SvmModel, samples: np.ndarray) -> np.ndarray:
    """End-to-end margin gradients for many rows at once, by backpropagation"""
    _check_model(model)
    X = model._check_width(samples)
    latent, cache = model.encoder.forward(model.scaler.transform(X))
    d_latent = _margin_latent_grads(model.head, model.rff, latent)
    _, d_scaled = model.encoder.backward(cache, d_latent)
    return d_scaled / model.scaler.data_range


def _margin_latent_grads(head: OcSvmHead, rff: RffMap, latent: np.ndarray) -> np.ndarray:
    # margin is linear in the features, so its feature gradient is w on every row
    upstream = np.broadcast_to(head.w, (latent.shape[0], head.feature_dim))
    return rff.backward(latent, upstream)


def gradient_map(result: AttributionResult, height: int, width: int) -> GradientMaps:
    """Row-major positive, negative and unsigned (|grad|) grids"""
    size = result.gradient.shape[0]
    if height < 1 or width < 1 or height * width != size:
        raise ArgumentError(
            f"Shape {height}x{width} does not hold a gradient of length {size}",
            {"height": height, "width": width, "length": size},
        )
    return GradientMaps(
        positive=result.positive_part.reshape(height, width),
        negative=result.negative_part.reshape(height, width),
        full=np.abs(result.gradient).reshape(height, width),
    )


def rank_features(result: AttributionResult, feature_names: List[str], top_k: int = 5) -> List[Dict]:
    """
    Features ordered by |gradient|, largest contribution first

    A positive gradient means the value sits below the normal level, a
    negative one means it exceeds it.
    """
    order = np.argsort(-np.abs(result.gradient), kind="stable")[:max(top_k, 0)]
    ranking = []
    for rank, idx in enumerate(order, start=1):
        value = float(result.gradient[idx])
        ranking.append({
            "rank": rank,
            "feature": feature_names[idx],
            "index": int(idx),
            "gradient": value,
            "direction": "below_normal" if value > 0 else ("above_normal" if value < 0 else "neutral"),
        })
    return ranking


class AttributionService:
    """Explains model decisions row by row"""

    def explain_rows(self, model: Ae1SvmModel, samples: np.ndarray, indices: List[int]) -> List[AttributionResult]:
        _check_model(model)
        X = model._check_width(samples)
        logger.info(f"Computing end-to-end gradients for {len(indices)} row(s)")
        gradients = batch_gradients(model, X[indices]) if indices else np.zeros((0, X.shape[1]))
        return [AttributionResult.from_gradient(g, i) for g, i in zip(gradients, indices)]


# Global attribution service instance
attribution_service = AttributionService()
