from dataclasses import dataclass, field, asdict
from enum import Enum
from typing import Tuple, Dict, Any, Optional


class Activation(Enum):
    """Hidden-layer activation."""
    RELU = "relu"
    LEAKY_RELU = "leaky_relu"


class OutputHead(Enum):
    """Output nonlinearity the loss is paired with."""
    SOFTMAX = "softmax"
    SIGMOID = "sigmoid"


DEFAULT_LEAKY_SLOPE = 0.01


@dataclass(frozen=True)
class NetworkConfig:
    """Architecture of a dense (leaky-)ReLU classifier."""
    input_dim: int
    hidden_dims: Tuple[int, ...]
    num_classes: int
    activation: Activation = Activation.RELU
    slope: float = DEFAULT_LEAKY_SLOPE
    output: OutputHead = OutputHead.SOFTMAX

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims", tuple(int(h) for h in self.hidden_dims))
        object.__setattr__(self, "activation", Activation(self.activation))
        object.__setattr__(self, "output", OutputHead(self.output))

        if self.input_dim < 1:
            raise ValueError(f"input_dim must be positive, got {self.input_dim}")
        if any(h < 1 for h in self.hidden_dims):
            raise ValueError(f"hidden_dims must be positive, got {self.hidden_dims}")
        if self.output is OutputHead.SOFTMAX and self.num_classes < 2:
            raise ValueError(f"num_classes must be >= 2 for a softmax head, got {self.num_classes}")
        if self.output is OutputHead.SIGMOID and self.num_classes != 1:
            raise ValueError("A sigmoid head has exactly one output unit")
        if self.activation is Activation.LEAKY_RELU and not 0.0 < self.slope < 1.0:
            raise ValueError(f"leaky_relu slope must be in (0, 1), got {self.slope}")

    @property
    def layer_dims(self) -> Tuple[int, ...]:
        return (self.input_dim,) + self.hidden_dims + (self.num_classes,)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "input_dim": self.input_dim,
            "hidden_dims": list(self.hidden_dims),
            "num_classes": self.num_classes,
            "activation": self.activation.value,
            "slope": self.slope,
            "output": self.output.value,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "NetworkConfig":
        return cls(
            input_dim=int(data["input_dim"]),
            hidden_dims=tuple(data.get("hidden_dims", ())),
            num_classes=int(data["num_classes"]),
            activation=Activation(data.get("activation", "relu")),
            slope=float(data.get("slope", DEFAULT_LEAKY_SLOPE)),
            output=OutputHead(data.get("output", "softmax")),
        )


@dataclass(frozen=True)
class OptimizerSpec:
    """Adam (with its moment constants) or plain SGD."""
    name: str = "adam"
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.name not in ("adam", "sgd"):
            raise ValueError(f"Unknown optimizer: {self.name}")
        if not self.lr > 0:
            raise ValueError(f"Learning rate must be positive, got {self.lr}")
        if self.name == "adam":
            if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
                raise ValueError("Adam betas must be in [0, 1)")
            if not self.eps > 0:
                raise ValueError("Adam eps must be positive")


@dataclass(frozen=True)
class EarlyStopping:
    """Stop when the best epoch loss has not improved by ``min_delta`` for ``patience`` epochs."""
    min_delta: float = 5e-4
    patience: int = 15

    def __post_init__(self):
        if self.patience < 1:
            raise ValueError("patience must be at least 1")
        if self.min_delta < 0:
            raise ValueError("min_delta must be non-negative")


@dataclass(frozen=True)
class TrainConfig:
    """Training recipe; identical for target and shadow models."""
    epochs: int = 100
    batch_size: int = 64
    optimizer: OptimizerSpec = field(default_factory=OptimizerSpec)
    label_smoothing: float = 0.0
    l2_lambda: float = 0.0
    seed: int = 42
    early_stopping: Optional[EarlyStopping] = None

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError(f"epochs must be non-negative, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be positive, got {self.batch_size}")
        if not 0.0 <= self.label_smoothing < 1.0:
            raise ValueError(f"label smoothing must be in [0, 1), got {self.label_smoothing}")
        if self.l2_lambda < 0:
            raise ValueError(f"l2_lambda must be non-negative, got {self.l2_lambda}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class TemperatureConfig:
    """Softmax temperature; 1 means no scaling."""
    T: float = 1.0

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"Temperature must be positive, got {self.T}")
