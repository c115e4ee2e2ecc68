"""
Dense (leaky-)ReLU classifier.

A network is an immutable list of ``(W, b)`` layers with ``W`` shaped
``[out x in]``. Every hidden layer is followed by the configured activation;
the last layer produces logits. Because the activations are piecewise linear,
the logits are a piecewise-affine function of the input.
"""

import logging
from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np
from numpy.typing import NDArray
from scipy.special import expit

from network.config import NetworkConfig, Activation, OutputHead, TemperatureConfig

logger = logging.getLogger(__name__)

Layer = Tuple[NDArray[np.float64], NDArray[np.float64]]


@dataclass(frozen=True)
class Network:
    """Parameters plus architecture. Arrays are treated as read-only."""
    config: NetworkConfig
    layers: Tuple[Layer, ...]

    def __post_init__(self):
        dims = self.config.layer_dims
        if len(self.layers) != len(dims) - 1:
            raise ValueError(f"Expected {len(dims) - 1} layers, got {len(self.layers)}")
        for i, (weight, bias) in enumerate(self.layers):
            if weight.shape != (dims[i + 1], dims[i]) or bias.shape != (dims[i + 1],):
                raise ValueError(f"Layer {i} has shapes {weight.shape}/{bias.shape}, "
                                 f"expected {(dims[i + 1], dims[i])}/{(dims[i + 1],)}")
            if not (np.all(np.isfinite(weight)) and np.all(np.isfinite(bias))):
                raise ValueError(f"Layer {i} has non-finite parameters")

    @property
    def parameters(self) -> List[NDArray[np.float64]]:
        """Flat parameter list ``[W1, b1, W2, b2, ...]``."""
        return [p for layer in self.layers for p in layer]

    def with_parameters(self, params: List[NDArray[np.float64]]) -> "Network":
        """Build a network of the same architecture from a flat parameter list."""
        layers = tuple((np.asarray(params[2 * i], dtype=np.float64), np.asarray(params[2 * i + 1], dtype=np.float64))
                       for i in range(len(params) // 2))
        return Network(config=self.config, layers=layers)


def init_network(config: NetworkConfig, seed: int) -> Network:
    """
    Initialize a network with He-scaled uniform weights and zero biases.

    Weights are drawn from U(-sqrt(6/fan_in), sqrt(6/fan_in)), which has
    variance 2/fan_in.

    Args:
        config: Architecture
        seed: RNG seed

    Returns:
        Freshly initialized network
    """
    rng = np.random.default_rng(int(seed))
    dims = config.layer_dims
    layers = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / fan_in)
        weight = rng.uniform(-limit, limit, size=(fan_out, fan_in))
        layers.append((weight, np.zeros(fan_out)))
    return Network(config=config, layers=tuple(layers))


def activate(z: NDArray[np.float64], config: NetworkConfig) -> NDArray[np.float64]:
    if config.activation is Activation.LEAKY_RELU:
        return np.where(z > 0, z, config.slope * z)
    return np.maximum(z, 0.0)


def activation_derivative(z: NDArray[np.float64], config: NetworkConfig) -> NDArray[np.float64]:
    if config.activation is Activation.LEAKY_RELU:
        return np.where(z > 0, 1.0, config.slope)
    return (z > 0).astype(np.float64)


def _check_batch(net: Network, batch: NDArray[np.float64]) -> NDArray[np.float64]:
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[1] != net.config.input_dim:
        raise ValueError(f"Batch must have shape (n, {net.config.input_dim}), got {batch.shape}")
    return batch


def forward_pass(net: Network, batch: NDArray[np.float64]) -> Tuple[List[NDArray], List[NDArray]]:
    """
    Run the network and keep intermediate values for backpropagation.

    Returns:
        ``(inputs, pre_activations)``: ``inputs[i]`` feeds layer ``i``;
        ``pre_activations[i]`` is ``inputs[i] @ W_i.T + b_i`` (the last one
        being the logits)
    """
    batch = _check_batch(net, batch)
    inputs = [batch]
    pre_activations = []
    last = len(net.layers) - 1
    for i, (weight, bias) in enumerate(net.layers):
        z = inputs[-1] @ weight.T + bias
        pre_activations.append(z)
        if i < last:
            inputs.append(activate(z, net.config))
    return inputs, pre_activations


def forward_logits(net: Network, batch: NDArray[np.float64]) -> NDArray[np.float64]:
    """Logits for a batch of shape ``(n, input_dim)``."""
    return forward_pass(net, batch)[1][-1]


def activation_pattern(net: Network, batch: NDArray[np.float64]) -> NDArray[np.bool_]:
    """Boolean matrix of active hidden units per sample; identifies the linear region."""
    _, pre_activations = forward_pass(net, batch)
    if len(pre_activations) == 1:
        return np.zeros((np.asarray(batch).shape[0], 0), dtype=bool)
    return np.hstack([z > 0 for z in pre_activations[:-1]])


def region_affine_map(net: Network, x: NDArray[np.float64]) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    Affine map ``(A, c)`` with ``f(y) = A y + c`` on the linear region containing ``x``.

    Args:
        net: Network
        x: Single input vector

    Returns:
        Jacobian ``A`` of shape ``(num_classes, input_dim)`` and offset ``c``
    """
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    _, pre_activations = forward_pass(net, x)
    A = np.eye(net.config.input_dim)
    c = np.zeros(net.config.input_dim)
    last = len(net.layers) - 1
    for i, (weight, bias) in enumerate(net.layers):
        A = weight @ A
        c = weight @ c + bias
        if i < last:
            gate = activation_derivative(pre_activations[i][0], net.config)
            A = gate[:, None] * A
            c = gate * c
    return A, c


def softmax(logits: NDArray[np.float64], temp: Union[TemperatureConfig, float, None] = None) -> NDArray[np.float64]:
    """
    Temperature-scaled softmax over the last axis, stabilized by max-subtraction.

    Args:
        logits: Vector or ``(n, d)`` matrix of finite logits
        temp: Temperature (default 1)

    Returns:
        Score vectors of the same shape
    """
    T = temp.T if isinstance(temp, TemperatureConfig) else TemperatureConfig(1.0 if temp is None else float(temp)).T
    z = np.asarray(logits, dtype=np.float64) / T
    z = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=-1, keepdims=True)


def predict_scores(net: Network, features: NDArray[np.float64],
                   temp: Union[TemperatureConfig, float, None] = None) -> NDArray[np.float64]:
    """Prediction score vectors (one row per sample) of a softmax classifier."""
    if net.config.output is not OutputHead.SOFTMAX:
        raise ValueError("predict_scores needs a softmax network")
    return softmax(forward_logits(net, features), temp)


def predict_probability(net: Network, features: NDArray[np.float64]) -> NDArray[np.float64]:
    """Sigmoid output of a single-unit network, one value per sample."""
    if net.config.output is not OutputHead.SIGMOID:
        raise ValueError("predict_probability needs a sigmoid network")
    return expit(forward_logits(net, features)[:, 0])


def accuracy(net: Network, dataset) -> float:
    """
    Fraction of argmax-correct predictions; ties resolve to the lowest class index.

    Args:
        net: Softmax classifier
        dataset: ``LabeledDataset``

    Returns:
        Accuracy in [0, 1]
    """
    if len(dataset) == 0:
        raise ValueError("Accuracy of an empty dataset is undefined")
    predictions = np.argmax(forward_logits(net, dataset.features), axis=1)
    return float(np.mean(predictions == dataset.labels))
