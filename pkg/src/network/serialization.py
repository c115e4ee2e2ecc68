"""
Versioned parameter files (layout documented in docs/MODEL_FORMAT.md).

    offset  size  content
    0       8     magic b"MIAPARAM"
    8       4     format version, uint32 little-endian
    12      4     header length H in bytes, uint32 little-endian
    16      H     UTF-8 JSON header (sorted keys); "arrays" lists every array shape
    16+H    ...   arrays back to back, row-major, little-endian float64

Networks store ``{"kind": "network", "network": <config>}`` in the header;
attack models add their own fields next to an optional embedded network.
"""

import json
import struct
import logging
from pathlib import Path
from typing import Any, Dict, List, Tuple

import numpy as np
from numpy.typing import NDArray

from network.config import NetworkConfig
from network.model import Network
from utils.errors import ModelFormatError

logger = logging.getLogger(__name__)

MAGIC = b"MIAPARAM"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<8sII")


def write_param_file(path: Path, header: Dict[str, Any], arrays: List[NDArray[np.float64]]) -> Path:
    """
    Write a header plus float64 arrays.

    Args:
        path: Target file
        header: JSON-serializable metadata (the ``arrays`` key is filled in here)
        arrays: Arrays to store in order

    Returns:
        Path written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = dict(header)
    header["arrays"] = [list(np.shape(a)) for a in arrays]
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")

    with open(path, "wb") as f:
        f.write(_PREFIX.pack(MAGIC, FORMAT_VERSION, len(header_bytes)))
        f.write(header_bytes)
        for array in arrays:
            f.write(np.ascontiguousarray(array, dtype="<f8").tobytes(order="C"))
    logger.debug(f"Parameter file written: {path}")
    return path


def read_param_file(path: Path) -> Tuple[Dict[str, Any], List[NDArray[np.float64]]]:
    """
    Read a parameter file written by ``write_param_file``.

    Raises:
        ModelFormatError: On bad magic, unsupported version, or truncated data
    """
    data = Path(path).read_bytes()
    if len(data) < _PREFIX.size:
        raise ModelFormatError(f"{path}: file too short")
    magic, version, header_len = _PREFIX.unpack_from(data, 0)
    if magic != MAGIC:
        raise ModelFormatError(f"{path}: not a parameter file (bad magic)")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"{path}: unsupported format version {version}")

    offset = _PREFIX.size
    try:
        header = json.loads(data[offset:offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ModelFormatError(f"{path}: corrupt header: {e}")
    offset += header_len

    arrays = []
    for shape in header.get("arrays", []):
        count = int(np.prod(shape)) if shape else 1
        nbytes = 8 * count
        if offset + nbytes > len(data):
            raise ModelFormatError(f"{path}: truncated array data")
        arrays.append(np.frombuffer(data, dtype="<f8", count=count, offset=offset).astype(np.float64).reshape(shape))
        offset += nbytes
    if offset != len(data):
        raise ModelFormatError(f"{path}: {len(data) - offset} trailing bytes")
    return header, arrays


def save_network(net: Network, path: Path, extra_header: Dict[str, Any] = None) -> Path:
    header = {"kind": "network", "network": net.config.to_dict()}
    if extra_header:
        header.update(extra_header)
    return write_param_file(path, header, net.parameters)


def network_from_payload(header: Dict[str, Any], arrays: List[NDArray[np.float64]]) -> Network:
    try:
        config = NetworkConfig.from_dict(header["network"])
        layers = tuple((arrays[2 * i], arrays[2 * i + 1]) for i in range(len(arrays) // 2))
        return Network(config=config, layers=layers)
    except (KeyError, ValueError) as e:
        raise ModelFormatError(f"Invalid network payload: {e}")


def load_network(path: Path) -> Network:
    header, arrays = read_param_file(path)
    if header.get("kind") != "network":
        raise ModelFormatError(f"{path}: expected a network file, found '{header.get('kind')}'")
    return network_from_payload(header, arrays)
