"""
Typed experiment configuration.

``ExperimentConfig.from_dict`` turns the merged YAML/JSON mapping into frozen
dataclasses. Every validation failure is a ``ConfigError`` naming the dotted
key; ``LoadedConfig.annotate`` adds the source line.
"""

import copy
import logging
from dataclasses import dataclass, replace
from typing import Any, Dict, Optional, Tuple, Union

from attacks.top3_attack import Top3Settings
from data.dataset import MixtureSpec
from data.transforms import split_sizes
from metrics.calibration import BinningKey
from network import (
    Activation,
    NetworkConfig,
    OptimizerSpec,
    TemperatureConfig,
    TrainConfig,
)
from utils.config_loader import ConfigLoader, LoadedConfig
from utils.errors import ConfigError

logger = logging.getLogger(__name__)

SCENARIO_KINDS = ("standard", "label_smoothing", "temperature", "l2")
EVAL_KINDS = ("held_out", "fake", "shifted", "uniform_noise", "permuted", "scaled")
RESERVED_DATASET_NAMES = ("members", "shadow")
MAX_SEED = 2**64 - 1


def _typed(value: Any, kind: type, key: str) -> Any:
    """Coerce a config value to ``kind`` or raise a ConfigError naming ``key``."""
    if value is None:
        raise ConfigError(f"Missing value, expected {kind.__name__}", key=key)
    if kind is bool:
        if isinstance(value, bool):
            return value
        raise ConfigError(f"Expected true/false, got {value!r}", key=key)
    if isinstance(value, bool):
        raise ConfigError(f"Expected {kind.__name__}, got {value!r}", key=key)
    try:
        if kind is int:
            number = float(value) if isinstance(value, str) else value
            if isinstance(number, float) and not number.is_integer():
                raise ValueError
            return int(number)
        if kind is float:
            # PyYAML reads exponent literals such as 1e-3 as strings
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"Expected {kind.__name__}, got {value!r}", key=key)


def _section(data: Dict[str, Any], key: str) -> Dict[str, Any]:
    value = data.get(key.rsplit(".", 1)[-1])
    if not isinstance(value, dict):
        raise ConfigError("Expected a mapping", key=key)
    return value


def _build(key: str, factory, *args, **kwargs):
    try:
        return factory(*args, **kwargs)
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e), key=key)


@dataclass(frozen=True)
class ScenarioSpec:
    """Exactly one calibration or defense setting, applied to target and shadow alike."""
    id: str
    kind: str = "standard"
    value: Optional[float] = None

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ConfigError(f"Unknown scenario kind '{self.kind}' (expected one of {', '.join(SCENARIO_KINDS)})",
                              key="scenario.kind")
        if self.kind != "standard" and self.value is None:
            raise ConfigError(f"Scenario '{self.id}' needs a value", key="scenario.value")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ScenarioSpec":
        value = data.get("value")
        return cls(id=_typed(data.get("id"), str, "scenario.id"),
                   kind=_typed(data.get("kind"), str, "scenario.kind"),
                   value=None if value is None else _typed(value, float, "scenario.value"))

    def apply(self, training: TrainConfig, temperature: TemperatureConfig) -> Tuple[TrainConfig, TemperatureConfig]:
        if self.kind == "label_smoothing":
            return _build("scenario.value", replace, training, label_smoothing=self.value), temperature
        if self.kind == "l2":
            return _build("scenario.value", replace, training, l2_lambda=self.value), temperature
        if self.kind == "temperature":
            return training, _build("scenario.value", TemperatureConfig, T=self.value)
        return training, temperature

    def to_dict(self) -> Dict[str, Any]:
        return {"id": self.id, "kind": self.kind, "value": self.value}


@dataclass(frozen=True)
class DataSettings:
    num_classes: int
    dim: int
    radius: float
    std: float
    n_samples: int
    split_fractions: Tuple[float, ...]

    def mixture_spec(self) -> MixtureSpec:
        return MixtureSpec.on_circle(num_classes=self.num_classes, radius=self.radius, std=self.std, dim=self.dim)

    def split_sizes(self) -> Dict[str, int]:
        sizes = split_sizes(self.n_samples, self.split_fractions)
        return dict(zip(("target_train", "target_test", "shadow_train", "shadow_test"), sizes.tolist()))


@dataclass(frozen=True)
class EvalDatasetSpec:
    """One nonmember evaluation dataset."""
    name: str
    kind: str
    offset: Union[float, Tuple[float, ...], None] = None
    delta: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        offset = list(self.offset) if isinstance(self.offset, tuple) else self.offset
        return {k: v for k, v in (("name", self.name), ("kind", self.kind), ("offset", offset), ("delta", self.delta))
                if v is not None}


@dataclass(frozen=True)
class EvaluationSettings:
    n_eval: int
    ece_bins: int
    ece_binning: BinningKey
    include_shadow: bool
    datasets: Tuple[EvalDatasetSpec, ...]


@dataclass(frozen=True)
class SweepSettings:
    deltas: Tuple[float, ...]
    n_samples: int


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one run needs; target and shadow share ``network`` and ``training``."""
    name: str
    seed: int
    scenario: ScenarioSpec
    output_dir: Optional[str]
    data: DataSettings
    network: NetworkConfig
    training: TrainConfig
    temperature: TemperatureConfig
    top3: Top3Settings
    evaluation: EvaluationSettings
    sweep: SweepSettings

    @classmethod
    def from_dict(cls, raw: Dict[str, Any], scenario: Dict[str, Any],
                  loaded: Optional[LoadedConfig] = None) -> "ExperimentConfig":
        """
        Build and validate a config from a merged mapping and a scenario definition.

        Args:
            raw: Merged experiment mapping
            scenario: The ``scenario`` section of a scenario file
            loaded: Source of ``raw``; used to attach line numbers to errors

        Returns:
            Validated configuration with the scenario applied
        """
        try:
            return cls._parse(raw, scenario)
        except ConfigError as e:
            raise loaded.annotate(e) if loaded is not None else e

    @classmethod
    def _parse(cls, raw: Dict[str, Any], scenario_raw: Dict[str, Any]) -> "ExperimentConfig":
        experiment = _section(raw, "experiment")
        seed = _typed(experiment.get("seed"), int, "experiment.seed")
        if not 0 <= seed <= MAX_SEED:
            raise ConfigError("Seed must be an unsigned 64-bit integer", key="experiment.seed")
        output_dir = experiment.get("output_dir")

        data = cls._parse_data(_section(raw, "data"))
        network_section = _section(raw, "network")
        hidden = network_section.get("hidden_dims")
        if not isinstance(hidden, list) or not hidden:
            raise ConfigError("hidden_dims must be a non-empty list", key="network.hidden_dims")
        network = _build("network", NetworkConfig,
                         input_dim=data.dim,
                         hidden_dims=tuple(_typed(h, int, f"network.hidden_dims[{i}]") for i, h in enumerate(hidden)),
                         num_classes=data.num_classes,
                         activation=cls._enum(Activation, network_section.get("activation"), "network.activation"),
                         slope=_typed(network_section.get("slope", 0.01), float, "network.slope"))

        training_section = _section(raw, "training")
        optimizer_section = _section(training_section, "training.optimizer")
        optimizer = _build("training.optimizer", OptimizerSpec,
                           name=_typed(optimizer_section.get("name"), str, "training.optimizer.name"),
                           lr=_typed(optimizer_section.get("lr"), float, "training.optimizer.lr"),
                           beta1=_typed(optimizer_section.get("beta1"), float, "training.optimizer.beta1"),
                           beta2=_typed(optimizer_section.get("beta2"), float, "training.optimizer.beta2"),
                           eps=_typed(optimizer_section.get("eps"), float, "training.optimizer.eps"))
        epochs = _typed(training_section.get("epochs"), int, "training.epochs")
        if epochs < 1:
            raise ConfigError("epochs must be positive", key="training.epochs")
        training = _build("training", TrainConfig,
                          epochs=epochs,
                          batch_size=_typed(training_section.get("batch_size"), int, "training.batch_size"),
                          optimizer=optimizer,
                          label_smoothing=_typed(training_section.get("label_smoothing"), float,
                                                 "training.label_smoothing"),
                          l2_lambda=_typed(training_section.get("l2_lambda"), float, "training.l2_lambda"),
                          seed=0)
        temperature = _build("temperature", TemperatureConfig, T=_typed(raw.get("temperature"), float, "temperature"))

        scenario = ScenarioSpec.from_dict(scenario_raw)
        training, temperature = scenario.apply(training, temperature)

        top3_section = _section(_section(raw, "attacks"), "attacks.top3")
        top3 = _build("attacks.top3", Top3Settings,
                      hidden_units=_typed(top3_section.get("hidden_units"), int, "attacks.top3.hidden_units"),
                      lr=_typed(top3_section.get("lr"), float, "attacks.top3.lr"),
                      batch_size=_typed(top3_section.get("batch_size"), int, "attacks.top3.batch_size"),
                      max_epochs=_typed(top3_section.get("max_epochs"), int, "attacks.top3.max_epochs"),
                      min_delta=_typed(top3_section.get("min_delta"), float, "attacks.top3.min_delta"),
                      patience=_typed(top3_section.get("patience"), int, "attacks.top3.patience"),
                      cutoff=_typed(top3_section.get("cutoff"), float, "attacks.top3.cutoff"))

        evaluation = cls._parse_evaluation(_section(raw, "evaluation"), data)
        sweep = cls._parse_sweep(_section(raw, "sweep"))

        return cls(name=_typed(experiment.get("name"), str, "experiment.name"), seed=seed, scenario=scenario,
                   output_dir=None if output_dir is None else str(output_dir), data=data, network=network,
                   training=training, temperature=temperature, top3=top3, evaluation=evaluation, sweep=sweep)

    @staticmethod
    def _enum(enum_type, value, key):
        try:
            return enum_type(value)
        except ValueError:
            options = ", ".join(member.value for member in enum_type)
            raise ConfigError(f"Invalid value {value!r} (expected one of {options})", key=key)

    @staticmethod
    def _parse_data(section: Dict[str, Any]) -> DataSettings:
        mixture = _section(section, "data.mixture")
        fractions = section.get("split_fractions")
        if not isinstance(fractions, list) or len(fractions) != 4:
            raise ConfigError("split_fractions must list four fractions", key="data.split_fractions")
        settings = DataSettings(
            num_classes=_typed(mixture.get("num_classes"), int, "data.mixture.num_classes"),
            dim=_typed(mixture.get("dim"), int, "data.mixture.dim"),
            radius=_typed(mixture.get("radius"), float, "data.mixture.radius"),
            std=_typed(mixture.get("std"), float, "data.mixture.std"),
            n_samples=_typed(section.get("n_samples"), int, "data.n_samples"),
            split_fractions=tuple(_typed(f, float, f"data.split_fractions[{i}]") for i, f in enumerate(fractions)),
        )
        if settings.num_classes < 2:
            raise ConfigError("At least two classes are required", key="data.mixture.num_classes")
        if settings.dim < 2:
            raise ConfigError("dim must be at least 2", key="data.mixture.dim")
        if not settings.std > 0:
            raise ConfigError("std must be positive", key="data.mixture.std")
        if settings.n_samples < 4:
            raise ConfigError("n_samples must be at least 4", key="data.n_samples")
        try:
            sizes = settings.split_sizes()
        except ValueError as e:
            raise ConfigError(str(e), key="data.split_fractions")
        empty = [name for name, size in sizes.items() if size == 0]
        if empty:
            raise ConfigError(f"Split fractions leave empty splits: {', '.join(empty)}", key="data.split_fractions")
        return settings

    @classmethod
    def _parse_evaluation(cls, section: Dict[str, Any], data: DataSettings) -> EvaluationSettings:
        n_eval = _typed(section.get("n_eval"), int, "evaluation.n_eval")
        sizes = data.split_sizes()
        if not 1 <= n_eval <= min(sizes["target_train"], sizes["target_test"]):
            raise ConfigError(f"n_eval must be between 1 and the target split size "
                              f"({min(sizes['target_train'], sizes['target_test'])})", key="evaluation.n_eval")
        ece_bins = _typed(section.get("ece_bins"), int, "evaluation.ece_bins")
        if ece_bins < 1:
            raise ConfigError("ece_bins must be positive", key="evaluation.ece_bins")

        entries = section.get("datasets")
        if not isinstance(entries, list) or not entries:
            raise ConfigError("datasets must be a non-empty list", key="evaluation.datasets")
        datasets = []
        for i, entry in enumerate(entries):
            key = f"evaluation.datasets[{i}]"
            if not isinstance(entry, dict):
                raise ConfigError("Expected a mapping", key=key)
            unknown = set(entry) - {"name", "kind", "offset", "delta"}
            if unknown:
                raise ConfigError(f"Unknown dataset keys: {', '.join(sorted(unknown))}",
                                  key=f"{key}.{sorted(unknown)[0]}")
            name = _typed(entry.get("name"), str, f"{key}.name")
            kind = _typed(entry.get("kind"), str, f"{key}.kind")
            if kind not in EVAL_KINDS:
                raise ConfigError(f"Unknown dataset kind '{kind}' (expected one of {', '.join(EVAL_KINDS)})",
                                  key=f"{key}.kind")
            if name in RESERVED_DATASET_NAMES or name in [d.name for d in datasets]:
                raise ConfigError(f"Dataset name '{name}' is reserved or duplicated", key=f"{key}.name")
            offset = delta = None
            if kind == "shifted":
                offset = cls._parse_offset(entry.get("offset"), data.dim, f"{key}.offset")
            if kind == "scaled":
                delta = _typed(entry.get("delta"), float, f"{key}.delta")
                if not delta > 0:
                    raise ConfigError("delta must be positive", key=f"{key}.delta")
            datasets.append(EvalDatasetSpec(name=name, kind=kind, offset=offset, delta=delta))

        return EvaluationSettings(
            n_eval=n_eval,
            ece_bins=ece_bins,
            ece_binning=cls._enum(BinningKey, section.get("ece_binning"), "evaluation.ece_binning"),
            include_shadow=_typed(section.get("include_shadow"), bool, "evaluation.include_shadow"),
            datasets=tuple(datasets),
        )

    @staticmethod
    def _parse_offset(value: Any, dim: int, key: str) -> Union[float, Tuple[float, ...]]:
        """A scalar added to every feature, or one entry per feature."""
        if isinstance(value, list):
            if len(value) != dim:
                raise ConfigError(f"Offset list needs one entry per feature (data.mixture.dim = {dim}), "
                                  f"got {len(value)}", key=key)
            return tuple(_typed(v, float, f"{key}[{j}]") for j, v in enumerate(value))
        return _typed(value, float, key)

    @staticmethod
    def _parse_sweep(section: Dict[str, Any]) -> SweepSettings:
        deltas = section.get("deltas")
        if not isinstance(deltas, list) or not deltas:
            raise ConfigError("deltas must be a non-empty list", key="sweep.deltas")
        values = tuple(_typed(d, float, f"sweep.deltas[{i}]") for i, d in enumerate(deltas))
        for i, value in enumerate(values):
            if not value > 0 or (i and value <= values[i - 1]):
                raise ConfigError("deltas must be positive and strictly ascending", key=f"sweep.deltas[{i}]")
        n_samples = _typed(section.get("n_samples"), int, "sweep.n_samples")
        if n_samples < 1:
            raise ConfigError("n_samples must be positive", key="sweep.n_samples")
        return SweepSettings(deltas=values, n_samples=n_samples)

    def to_dict(self) -> Dict[str, Any]:
        """Resolved configuration (defaults expanded, scenario applied) for the manifest."""
        return {
            "experiment": {"name": self.name, "seed": self.seed, "output_dir": self.output_dir},
            "scenario": self.scenario.to_dict(),
            "data": {
                "mixture": {"num_classes": self.data.num_classes, "dim": self.data.dim,
                            "radius": self.data.radius, "std": self.data.std},
                "n_samples": self.data.n_samples,
                "split_fractions": list(self.data.split_fractions),
            },
            "network": self.network.to_dict(),
            "training": {
                "epochs": self.training.epochs,
                "batch_size": self.training.batch_size,
                "optimizer": {"name": self.training.optimizer.name, "lr": self.training.optimizer.lr,
                              "beta1": self.training.optimizer.beta1, "beta2": self.training.optimizer.beta2,
                              "eps": self.training.optimizer.eps},
                "label_smoothing": self.training.label_smoothing,
                "l2_lambda": self.training.l2_lambda,
            },
            "temperature": self.temperature.T,
            "attacks": {"top3": {
                "hidden_units": self.top3.hidden_units, "lr": self.top3.lr, "batch_size": self.top3.batch_size,
                "max_epochs": self.top3.max_epochs, "min_delta": self.top3.min_delta,
                "patience": self.top3.patience, "cutoff": self.top3.cutoff,
            }},
            "evaluation": {
                "n_eval": self.evaluation.n_eval,
                "ece_bins": self.evaluation.ece_bins,
                "ece_binning": self.evaluation.ece_binning.value,
                "include_shadow": self.evaluation.include_shadow,
                "datasets": [d.to_dict() for d in self.evaluation.datasets],
            },
            "sweep": {"deltas": list(self.sweep.deltas), "n_samples": self.sweep.n_samples},
        }


def load_experiment(loader: ConfigLoader, config_path: Optional[str] = None, seed: Optional[int] = None,
                    scenario: Optional[str] = None) -> ExperimentConfig:
    """
    Load, merge and validate an experiment config; CLI overrides win over file values.

    Args:
        loader: Config loader rooted at the repository
        config_path: Optional user config (YAML or JSON)
        seed: ``--seed`` override
        scenario: ``--scenario`` override (scenario file id)

    Returns:
        Validated configuration
    """
    loaded = loader.load_experiment_config(config_path)
    raw = copy.deepcopy(loaded.data)
    experiment = raw.setdefault("experiment", {})
    if seed is not None:
        experiment["seed"] = seed
    scenario_id = scenario or experiment.get("scenario") or "standard"
    config = ExperimentConfig.from_dict(raw, loader.load_scenario(str(scenario_id)), loaded)
    logger.info(f"Experiment '{config.name}': scenario={config.scenario.id} seed={config.seed}")
    return config
