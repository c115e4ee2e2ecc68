import sys
from pathlib import Path

import numpy as np
import pytest
import yaml

REPO_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO_ROOT / "src"))

from core.experiment_config import load_experiment  # noqa: E402
from data import MixtureSpec, generate_mixture  # noqa: E402
from utils.config_loader import ConfigLoader  # noqa: E402
from helpers import TINY_EXPERIMENT  # noqa: E402


@pytest.fixture(autouse=True)
def quiet_logging(monkeypatch):
    """Keep test runs from writing log files into the working directory."""
    monkeypatch.setenv("MIA_LOG_TO_FILE", "false")
    monkeypatch.setenv("MIA_LOG_TO_CONSOLE", "false")


@pytest.fixture
def loader():
    return ConfigLoader(base_path=REPO_ROOT)


@pytest.fixture
def main_config(loader):
    config = loader.load_main_config()
    config["logging"]["file"] = False
    return config


@pytest.fixture
def tiny_config_file(tmp_path):
    path = tmp_path / "tiny.yaml"
    path.write_text(yaml.safe_dump(TINY_EXPERIMENT, sort_keys=False), encoding="utf-8")
    return path


@pytest.fixture
def tiny_config(loader, tiny_config_file):
    return load_experiment(loader, str(tiny_config_file))


@pytest.fixture
def toy_dataset():
    spec = MixtureSpec.on_circle(num_classes=4, radius=2.0, std=1.0, dim=3)
    return generate_mixture(spec, 120, seed=11)


@pytest.fixture
def separable_dataset():
    spec = MixtureSpec.on_circle(num_classes=4, radius=6.0, std=0.5, dim=2)
    return generate_mixture(spec, 200, seed=5)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
