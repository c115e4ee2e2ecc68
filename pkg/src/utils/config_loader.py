import os
import copy
import json
import hashlib
import yaml
import logging
from dataclasses import dataclass, field
from typing import Dict, Any, Optional, List
from pathlib import Path
from dotenv import load_dotenv

from utils.errors import ConfigError

logger = logging.getLogger(__name__)


@dataclass
class LoadedConfig:
    """A parsed configuration mapping plus the source line of every key."""
    data: Dict[str, Any]
    source: Optional[Path] = None
    key_lines: Dict[str, int] = field(default_factory=dict)

    def line_of(self, key: Optional[str]) -> Optional[int]:
        """
        Find the source line for a dotted key, falling back to its closest known parent.

        Args:
            key: Dotted key path such as ``training.optimizer.lr``

        Returns:
            1-based line number or None if the key is not from a file
        """
        while key:
            if key in self.key_lines:
                return self.key_lines[key]
            if "[" in key and key.endswith("]"):
                key = key[:key.rindex("[")]
            elif "." in key:
                key = key.rsplit(".", 1)[0]
            else:
                break
        return None

    def annotate(self, error: ConfigError) -> ConfigError:
        """Attach the source line of the failing key to a ConfigError."""
        if error.line is not None:
            return error
        return error.with_line(self.line_of(error.key))


class ConfigLoader:
    """Handles loading and validation of configuration files."""

    def __init__(self, env_path: Optional[str] = None, base_path: Optional[Path] = None):
        """
        Initialize ConfigLoader with environment variables.

        Args:
            env_path: Path to .env file (optional)
            base_path: Repository root holding the ``config`` directory
        """
        if env_path:
            load_dotenv(env_path)
        else:
            load_dotenv()

        self.base_path = Path(base_path) if base_path else Path(__file__).parent.parent.parent
        self.config_cache: Dict[str, Dict[str, Any]] = {}

    @property
    def config_dir(self) -> Path:
        return self.base_path / "config"

    def load_main_config(self) -> Dict[str, Any]:
        """
        Load the main configuration file.

        Returns:
            Dictionary containing main configuration
        """
        if "main" in self.config_cache:
            return self.config_cache["main"]

        config_path = self.config_dir / "main_config.yaml"

        try:
            config = self._load_yaml_file(config_path).data
            config = self._apply_env_overrides(config)
            self._validate_main_config(config)

            self.config_cache["main"] = config
            logger.debug("Main configuration loaded successfully")
            return config

        except Exception as e:
            logger.error(f"Failed to load main configuration: {e}")
            raise

    def load_experiment_config(self, config_path: Optional[str] = None) -> LoadedConfig:
        """
        Load an experiment config and deep-merge it over the shipped defaults.

        YAML and JSON files are both accepted. Keys that do not exist in the
        defaults are rejected with the offending key and line.

        Args:
            config_path: Optional user config path; defaults only when omitted

        Returns:
            Merged configuration with key line numbers of the user file
        """
        defaults = self._load_yaml_file(self.config_dir / "experiment.yaml")
        if not config_path:
            return defaults

        path = Path(config_path)
        if not path.exists():
            raise ConfigError(f"Config file not found: {path}")

        user = self._load_yaml_file(path)
        merged = self._merge(copy.deepcopy(defaults.data), user.data, user, prefix="")
        logger.info(f"Experiment configuration loaded: {path}")
        return LoadedConfig(data=merged, source=path, key_lines=user.key_lines)

    def load_scenario(self, scenario_id: str) -> Dict[str, Any]:
        """
        Load a scenario definition by id.

        Args:
            scenario_id: File stem under the scenarios directory

        Returns:
            The ``scenario`` section of the scenario file
        """
        if f"scenario:{scenario_id}" in self.config_cache:
            return self.config_cache[f"scenario:{scenario_id}"]

        scenario_path = self._scenario_dir() / f"{scenario_id}.yaml"
        if not scenario_path.exists():
            available = ", ".join(self.get_scenario_ids()) or "none"
            raise ConfigError(f"Unknown scenario '{scenario_id}' (available: {available})", key="scenario")

        loaded = self._load_yaml_file(scenario_path)
        scenario = loaded.data.get("scenario")
        if not isinstance(scenario, dict) or not scenario.get("id") or not scenario.get("kind"):
            raise ConfigError("Scenario file needs a 'scenario' section with 'id' and 'kind'",
                              key="scenario", line=loaded.line_of("scenario"))

        self.config_cache[f"scenario:{scenario_id}"] = scenario
        logger.debug(f"Scenario loaded: {scenario_id}")
        return scenario

    def get_scenario_ids(self) -> List[str]:
        scenario_dir = self._scenario_dir()
        if not scenario_dir.exists():
            return []
        return sorted(p.stem for p in scenario_dir.glob("*.yaml"))

    def _scenario_dir(self) -> Path:
        main = self.config_cache.get("main", {})
        configured = main.get("paths", {}).get("scenarios")
        if not configured:
            return self.config_dir / "scenarios"
        configured = Path(configured)
        return configured if configured.is_absolute() else self.base_path / configured

    def _load_yaml_file(self, file_path: Path) -> LoadedConfig:
        """
        Load a YAML (or JSON) file together with the line number of every key.

        Args:
            file_path: Path to the file

        Returns:
            Parsed content and key lines
        """
        try:
            with open(file_path, 'r', encoding='utf-8') as f:
                text = f.read()
        except IOError as e:
            raise ConfigError(f"Cannot read file {file_path}: {e}")

        try:
            data = yaml.safe_load(text) or {}
            node = yaml.compose(text)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            line = mark.line + 1 if mark is not None else None
            raise ConfigError(f"Invalid YAML in {file_path}: {getattr(e, 'problem', e)}", line=line)

        if not isinstance(data, dict):
            raise ConfigError(f"Top level of {file_path} must be a mapping", line=1)

        key_lines: Dict[str, int] = {}
        if node is not None:
            self._collect_key_lines(node, "", key_lines)
        return LoadedConfig(data=data, source=Path(file_path), key_lines=key_lines)

    def _collect_key_lines(self, node: yaml.Node, prefix: str, key_lines: Dict[str, int]) -> None:
        if isinstance(node, yaml.MappingNode):
            for key_node, value_node in node.value:
                key = f"{prefix}.{key_node.value}" if prefix else str(key_node.value)
                key_lines[key] = key_node.start_mark.line + 1
                self._collect_key_lines(value_node, key, key_lines)
        elif isinstance(node, yaml.SequenceNode):
            for index, item in enumerate(node.value):
                key = f"{prefix}[{index}]"
                key_lines[key] = item.start_mark.line + 1
                self._collect_key_lines(item, key, key_lines)

    def _merge(self, base: Dict[str, Any], override: Dict[str, Any],
               source: LoadedConfig, prefix: str) -> Dict[str, Any]:
        """Deep-merge ``override`` into ``base``; lists and scalars replace wholesale."""
        for key, value in override.items():
            dotted = f"{prefix}.{key}" if prefix else str(key)
            if key not in base:
                raise ConfigError("Unknown configuration key", key=dotted, line=source.line_of(dotted))
            if isinstance(base[key], dict):
                if not isinstance(value, dict):
                    raise ConfigError("Expected a mapping", key=dotted, line=source.line_of(dotted))
                self._merge(base[key], value, source, dotted)
            else:
                base[key] = value
        return base

    def _apply_env_overrides(self, config: Dict[str, Any]) -> Dict[str, Any]:
        """
        Apply environment variable overrides to configuration.

        Args:
            config: Original configuration dictionary

        Returns:
            Configuration with environment overrides applied
        """
        if os.getenv("MIA_OUTPUT_DIRECTORY"):
            config.setdefault("paths", {})["output_directory"] = os.getenv("MIA_OUTPUT_DIRECTORY")
        if os.getenv("MIA_LOGS_DIRECTORY"):
            config.setdefault("paths", {})["logs"] = os.getenv("MIA_LOGS_DIRECTORY")

        if os.getenv("MIA_LOG_LEVEL"):
            config.setdefault("logging", {})["level"] = os.getenv("MIA_LOG_LEVEL")
        if os.getenv("MIA_LOG_TO_CONSOLE"):
            config.setdefault("logging", {})["console"] = \
                os.getenv("MIA_LOG_TO_CONSOLE").lower() == "true"
        if os.getenv("MIA_LOG_TO_FILE"):
            config.setdefault("logging", {})["file"] = \
                os.getenv("MIA_LOG_TO_FILE").lower() == "true"

        if os.getenv("MIA_PROGRESS"):
            config.setdefault("progress", {})["enabled"] = \
                os.getenv("MIA_PROGRESS").lower() == "true"

        return config

    def _validate_main_config(self, config: Dict[str, Any]) -> None:
        """
        Validate main configuration structure.

        Raises:
            ConfigError: If configuration is invalid
        """
        for section in ["paths", "logging", "output"]:
            if section not in config:
                raise ConfigError("Missing required configuration section", key=section)

        if not config["paths"].get("output_directory"):
            raise ConfigError("Output directory not specified", key="paths.output_directory")

        level = str(config["logging"].get("level", "INFO")).upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ConfigError(f"Invalid log level: {level}", key="logging.level")

        logger.debug("Main configuration validation passed")


def config_hash(config: Dict[str, Any]) -> str:
    """SHA-256 of the canonical JSON form of a resolved config."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
