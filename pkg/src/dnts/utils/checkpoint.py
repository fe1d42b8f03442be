"""Named-parameter checkpoint file.

Layout (little endian):
    b"DNTSCKPT" | u32 version | u32 header length | JSON header | payload
    header = {"version", "config", "metadata", "params": [{"name", "shape", "dtype", "offset", "nbytes"}]}
"""

import json
import struct
from pathlib import Path

import numpy as np
import torch
from torch import nn

from dnts.errors import CorruptFileError, SchemaVersionError

MAGIC = b"DNTSCKPT"
VERSION = 1

_DTYPES = {"float32": "<f4", "float64": "<f8", "int64": "<i8"}


def save_checkpoint(path: str | Path, model: nn.Module, config: dict, metadata: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    params, chunks, offset = [], [], 0
    for name, tensor in model.state_dict().items():
        array = tensor.detach().cpu().numpy()
        dtype = str(array.dtype)
        assert dtype in _DTYPES, f"unsupported parameter dtype {dtype} ({name})"
        data = np.ascontiguousarray(array, dtype=_DTYPES[dtype]).tobytes()
        params.append({"name": name, "shape": list(array.shape), "dtype": dtype, "offset": offset, "nbytes": len(data)})
        chunks.append(data)
        offset += len(data)
    header = json.dumps(
        {"version": VERSION, "config": config, "metadata": metadata or {}, "params": params},
        sort_keys=True,
    ).encode()
    with open(path, "wb") as w:
        w.write(MAGIC + struct.pack("<II", VERSION, len(header)) + header)
        for data in chunks:
            w.write(data)
    return path


def load_checkpoint(path: str | Path) -> tuple[dict[str, torch.Tensor], dict, dict]:
    """Returns (state_dict, config, metadata)."""
    path = Path(path)
    buffer = path.read_bytes()
    if buffer[: len(MAGIC)] != MAGIC:
        raise CorruptFileError(f"{path}: not a DNTS checkpoint")
    try:
        version, header_len = struct.unpack_from("<II", buffer, len(MAGIC))
        if version != VERSION:
            raise SchemaVersionError(str(path), version, VERSION)
        start = len(MAGIC) + 8
        header = json.loads(buffer[start : start + header_len])
        payload = memoryview(buffer)[start + header_len :]
        state_dict = {}
        for param in header["params"]:
            lo, hi = param["offset"], param["offset"] + param["nbytes"]
            if hi > len(payload):
                raise CorruptFileError(f"{path}: truncated payload for {param['name']}")
            array = np.frombuffer(payload[lo:hi], dtype=_DTYPES[param["dtype"]]).reshape(param["shape"])
            state_dict[param["name"]] = torch.from_numpy(array.copy())
    except (CorruptFileError, SchemaVersionError):
        raise
    except (struct.error, KeyError, TypeError, ValueError) as e:
        raise CorruptFileError(f"{path}: {e}") from e
    return state_dict, header["config"], header["metadata"]
