import logging
from pathlib import Path

from attacks.base_attack import AttackKind, BaseAttack
from attacks.threshold_attack import ThresholdAttack
from attacks.top3_attack import Top3Attack
from network.serialization import network_from_payload, read_param_file, write_param_file
from utils.errors import ModelFormatError

logger = logging.getLogger(__name__)


def save_attack(attack: BaseAttack, path: Path) -> Path:
    """Write a fitted attack in the parameter file format (header kind ``attack``)."""
    header, arrays = attack.to_payload()
    header = dict(header, kind="attack")
    return write_param_file(path, header, arrays)


def load_attack(path: Path) -> BaseAttack:
    header, arrays = read_param_file(path)
    if header.get("kind") != "attack":
        raise ModelFormatError(f"{path}: expected an attack file, found '{header.get('kind')}'")
    try:
        variant = AttackKind(header["variant"])
        if variant is AttackKind.TOP3:
            return Top3Attack(network=network_from_payload(header, arrays), cutoff=float(header["cutoff"]))
        if arrays:
            raise ModelFormatError(f"{path}: threshold attacks carry no arrays")
        return ThresholdAttack(statistic=variant, tau=float(header["tau"]))
    except ModelFormatError:
        raise
    except (KeyError, ValueError) as e:
        raise ModelFormatError(f"{path}: invalid attack header: {e}")
