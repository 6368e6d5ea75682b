"""
Dense feed-forward networks
Layers, activations, Xavier initialization, reconstruction loss,
backpropagation and the Adam optimizer. Everything runs in float64.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit

from src.errors import ArgumentError, ContractError, TrainingError
from src.utils.seeding import Stream, derive_seed


class Activation(str, Enum):
    SIGMOID = "sigmoid"
    TANH = "tanh"
    IDENTITY = "identity"

    def apply(self, pre: np.ndarray) -> np.ndarray:
        if self is Activation.SIGMOID:
            return expit(pre)
        if self is Activation.TANH:
            return np.tanh(pre)
        return np.array(pre, dtype=np.float64, copy=True)

    def derivative_from_output(self, u: np.ndarray) -> np.ndarray:
        """Derivative of the activation written in terms of its output u"""
        if self is Activation.SIGMOID:
            return u * (1.0 - u)
        if self is Activation.TANH:
            return 1.0 - u * u
        return np.ones_like(u)


def xavier_init(fan_in: int, fan_out: int, rng_seed: int) -> np.ndarray:
    """
    Xavier/Glorot uniform initialization

    Entries are uniform on [-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))].
    """
    if fan_in < 1 or fan_out < 1:
        raise ArgumentError(
            f"Layer dimensions must be positive, got fan_in={fan_in}, fan_out={fan_out}"
        )
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    rng = np.random.default_rng(rng_seed)
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


@dataclass
class DenseLayer:
    """Affine map followed by an elementwise activation; weights are fan_in x fan_out"""

    weights: np.ndarray
    biases: np.ndarray
    activation: Activation = Activation.SIGMOID

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.biases = np.asarray(self.biases, dtype=np.float64)
        self.activation = Activation(self.activation)
        if self.weights.ndim != 2 or self.biases.shape != (self.weights.shape[1],):
            raise ArgumentError(
                f"Bias shape {self.biases.shape} does not match weights {self.weights.shape}"
            )

    @property
    def fan_in(self) -> int:
        return self.weights.shape[0]

    @property
    def fan_out(self) -> int:
        return self.weights.shape[1]

    def forward(self, x: np.ndarray) -> np.ndarray:
        return self.activation.apply(x @ self.weights + self.biases)


@dataclass
class LayerGrads:
    weights: np.ndarray
    biases: np.ndarray


@dataclass
class ForwardCache:
    """Per-layer inputs and outputs of one forward pass"""

    owner_id: int
    generation: int
    inputs: List[np.ndarray]
    outputs: List[np.ndarray]
    batch: np.ndarray


class DenseNetwork:
    """Stack of dense layers; a network with no layers is the identity map"""

    def __init__(self, layers: Sequence[DenseLayer], input_dim: Optional[int] = None):
        self.layers: List[DenseLayer] = list(layers)
        if not self.layers and (input_dim is None or input_dim < 1):
            raise ArgumentError("A network without layers needs a positive input_dim")
        for i in range(1, len(self.layers)):
            if self.layers[i - 1].fan_out != self.layers[i].fan_in:
                raise ArgumentError(
                    f"Layer {i - 1} outputs {self.layers[i - 1].fan_out} values "
                    f"but layer {i} expects {self.layers[i].fan_in}"
                )
        if self.layers and input_dim is not None and input_dim != self.layers[0].fan_in:
            raise ArgumentError(f"input_dim={input_dim} does not match first layer")
        self._input_dim = self.layers[0].fan_in if self.layers else int(input_dim)
        self.generation = 0

    @classmethod
    def from_dims(
        cls,
        dims: Sequence[int],
        activation: Union[Activation, str] = Activation.SIGMOID,
        seed: int = 0,
        stream: int = Stream.ENCODER_INIT,
    ) -> "DenseNetwork":
        """Xavier-initialized network through ``dims`` with zero biases"""
        dims = [int(d) for d in dims]
        if not dims or any(d < 1 for d in dims):
            raise ArgumentError(f"Layer dimensions must be positive, got {dims}")
        layers = [
            DenseLayer(
                weights=xavier_init(dims[i], dims[i + 1], derive_seed(seed, stream, i)),
                biases=np.zeros(dims[i + 1]),
                activation=Activation(activation),
            )
            for i in range(len(dims) - 1)
        ]
        return cls(layers, input_dim=dims[0])

    @classmethod
    def identity(cls, dim: int) -> "DenseNetwork":
        return cls([], input_dim=dim)

    @property
    def layer_dims(self) -> List[int]:
        return [self._input_dim] + [layer.fan_out for layer in self.layers]

    @property
    def input_dim(self) -> int:
        return self._input_dim

    @property
    def output_dim(self) -> int:
        return self.layer_dims[-1]

    def forward(self, batch: np.ndarray) -> Tuple[np.ndarray, ForwardCache]:
        batch = np.asarray(batch, dtype=np.float64)
        if batch.ndim != 2 or batch.shape[1] != self._input_dim:
            raise ArgumentError(
                f"Expected a batch with {self._input_dim} columns, got shape {batch.shape}"
            )
        inputs, outputs = [], []
        current = batch
        for layer in self.layers:
            inputs.append(current)
            current = layer.forward(current)
            outputs.append(current)
        cache = ForwardCache(id(self), self.generation, inputs, outputs, batch)
        return current, cache

    def predict(self, batch: np.ndarray) -> np.ndarray:
        return self.forward(batch)[0]

    def backward(
        self, cache: ForwardCache, upstream_grad: np.ndarray
    ) -> Tuple[List[LayerGrads], np.ndarray]:
        """Gradients of a scalar loss given d(loss)/d(output) for the cached batch"""
        if cache.owner_id != id(self) or cache.generation != self.generation:
            raise ContractError("Forward cache does not belong to the current network state")
        if len(cache.inputs) != len(self.layers):
            raise ContractError("Forward cache layer count does not match the network")
        expected = cache.outputs[-1].shape if self.layers else cache.batch.shape
        upstream = np.asarray(upstream_grad, dtype=np.float64)
        if upstream.shape != expected:
            raise ContractError(
                f"Upstream gradient shape {upstream.shape} does not match output {expected}"
            )

        grads: List[LayerGrads] = [None] * len(self.layers)  # type: ignore[list-item]
        for i in reversed(range(len(self.layers))):
            layer = self.layers[i]
            delta = upstream * layer.activation.derivative_from_output(cache.outputs[i])
            grads[i] = LayerGrads(weights=cache.inputs[i].T @ delta, biases=delta.sum(axis=0))
            upstream = delta @ layer.weights.T
        return grads, upstream

    def parameters(self, prefix: str = "") -> Dict[str, np.ndarray]:
        """Live parameter arrays keyed by name; updating them in place updates the network"""
        params: Dict[str, np.ndarray] = {}
        for i, layer in enumerate(self.layers):
            params[f"{prefix}{i}.weights"] = layer.weights
            params[f"{prefix}{i}.biases"] = layer.biases
        return params

    @staticmethod
    def named_gradients(grads: Sequence[LayerGrads], prefix: str = "") -> Dict[str, np.ndarray]:
        named: Dict[str, np.ndarray] = {}
        for i, g in enumerate(grads):
            named[f"{prefix}{i}.weights"] = g.weights
            named[f"{prefix}{i}.biases"] = g.biases
        return named

    def bump_generation(self) -> None:
        """Mark parameters as changed; caches from earlier passes become stale"""
        self.generation += 1

    def copy(self) -> "DenseNetwork":
        layers = [
            DenseLayer(layer.weights.copy(), layer.biases.copy(), layer.activation)
            for layer in self.layers
        ]
        return DenseNetwork(layers, input_dim=self._input_dim)


def reconstruction_loss(x: np.ndarray, x_rec: np.ndarray) -> float:
    """Mean over rows of the squared Euclidean distance ||x - x_rec||^2"""
    x = np.asarray(x, dtype=np.float64)
    x_rec = np.asarray(x_rec, dtype=np.float64)
    if x.shape != x_rec.shape or x.ndim != 2 or x.shape[0] == 0:
        raise ArgumentError(f"Shape mismatch: {x.shape} vs {x_rec.shape}")
    diff = x - x_rec
    return float(np.mean(np.sum(diff * diff, axis=1)))


def reconstruction_grad(x: np.ndarray, x_rec: np.ndarray) -> np.ndarray:
    """d reconstruction_loss / d x_rec"""
    return 2.0 * (x_rec - x) / x.shape[0]


@dataclass
class AdamState:
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    first_moment: Dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("learning_rate", "beta1", "beta2", "epsilon"):
            if not getattr(self, name) > 0:
                raise ArgumentError(f"Adam {name} must be positive, got {getattr(self, name)}")


def adam_step(
    params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray], state: AdamState
) -> Tuple[Dict[str, np.ndarray], AdamState]:
    """One bias-corrected Adam update, applied to ``params`` in place"""
    for name, g in grads.items():
        if name not in params:
            raise ArgumentError(f"Gradient for unknown parameter {name!r}")
        if g.shape != params[name].shape:
            raise ArgumentError(
                f"Gradient shape {g.shape} does not match parameter {name!r} {params[name].shape}"
            )
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"Non-finite gradient for parameter {name!r}")

    state.step_count += 1
    t = state.step_count
    correction1 = 1.0 - state.beta1 ** t
    correction2 = 1.0 - state.beta2 ** t

    for name, g in grads.items():
        param = params[name]
        if name not in state.first_moment:
            state.first_moment[name] = np.zeros_like(param)
            state.second_moment[name] = np.zeros_like(param)
        m = state.first_moment[name]
        v = state.second_moment[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        m_hat = m / correction1
        v_hat = v / correction2
        np.subtract(param, state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon), out=param)

    return params, state


class AdamOptimizer:
    """Adam over a named parameter dict"""

    def __init__(self, learning_rate: float = 0.001, beta1: float = 0.9,
                 beta2: float = 0.999, epsilon: float = 1e-8):
        self.state = AdamState(learning_rate, beta1, beta2, epsilon)

    def step(self, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]) -> None:
        adam_step(params, grads, self.state)
