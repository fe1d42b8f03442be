"""Length-prefixed binary blocks for training examples.

File layout (little endian):
    b"DNTSEXMP" | u32 schema version | u32 example count | example*
    example = u32 header length | JSON header | u32 block count | block*
    block   = u16 name length | name | u8 dtype code (b"f" float32, b"i" int32) | u8 ndim | u32 dims | payload
"""

from __future__ import annotations

import json
import struct
from collections.abc import Sequence
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from dnts.errors import CorruptFileError, SchemaVersionError

from .descendants import DescendantIndex
from .examples import TrainingExample

MAGIC = b"DNTSEXMP"
SCHEMA_VERSION = 1

_DTYPES = {b"f": np.dtype("<f4"), b"i": np.dtype("<i4")}


def _pack_block(name: str, array: NDArray) -> bytes:
    code = b"f" if np.issubdtype(array.dtype, np.floating) else b"i"
    data = np.ascontiguousarray(array, dtype=_DTYPES[code])
    encoded = name.encode()
    head = struct.pack(f"<H{len(encoded)}scB", len(encoded), encoded, code, data.ndim)
    return head + struct.pack(f"<{data.ndim}I", *data.shape) + data.tobytes()


def _pack_example(example: TrainingExample) -> bytes:
    header = json.dumps(
        {
            "item": example.item,
            "start_day": example.start_day,
            "window": example.window,
            "horizon": example.horizon,
        },
        sort_keys=True,
    ).encode()
    blocks = {
        "members": example.members,
        "X": example.X,
        "Y_hist": example.Y_hist,
        "input_active": example.input_active,
        "input_edges": example.input_edges,
        "input_descendants": example.input_descendants.pairs,
        "y": example.y,
        "x_true": example.x_true,
        "l": example.l,
        "target_descendants": example.target_descendants.pairs,
    }
    out = [struct.pack("<I", len(header)), header, struct.pack("<I", len(blocks))]
    out.extend(_pack_block(name, array) for name, array in blocks.items())
    return b"".join(out)


class _Reader:
    def __init__(self, buffer: bytes):
        self.buffer = buffer
        self.offset = 0

    def unpack(self, fmt: str) -> tuple:
        values = struct.unpack_from(fmt, self.buffer, self.offset)
        self.offset += struct.calcsize(fmt)
        return values

    def read(self, nbytes: int) -> bytes:
        if self.offset + nbytes > len(self.buffer):
            raise CorruptFileError("unexpected end of data")
        chunk = self.buffer[self.offset : self.offset + nbytes]
        self.offset += nbytes
        return chunk

    def block(self) -> tuple[str, NDArray]:
        (name_len,) = self.unpack("<H")
        name = self.read(name_len).decode()
        code, ndim = self.unpack("<cB")
        if code not in _DTYPES:
            raise CorruptFileError(f"unknown dtype code {code!r} in block {name}")
        shape = self.unpack(f"<{ndim}I")
        dtype = _DTYPES[code]
        count = int(np.prod(shape, dtype=np.int64))
        array = np.frombuffer(self.read(count * dtype.itemsize), dtype=dtype).reshape(shape)
        return name, array


def _unpack_example(reader: _Reader) -> TrainingExample:
    (header_len,) = reader.unpack("<I")
    header = json.loads(reader.read(header_len))
    (num_blocks,) = reader.unpack("<I")
    blocks = dict(reader.block() for _ in range(num_blocks))
    window, horizon, start = int(header["window"]), int(header["horizon"]), int(header["start_day"])
    num_members = len(blocks["members"])
    return TrainingExample(
        item=int(header["item"]),
        start_day=start,
        window=window,
        horizon=horizon,
        members=blocks["members"].astype(np.int64),
        X=blocks["X"].astype(np.float32),
        Y_hist=blocks["Y_hist"].astype(np.float32),
        input_active=blocks["input_active"].astype(np.float32),
        input_edges=blocks["input_edges"].astype(np.int64),
        input_descendants=DescendantIndex(
            num_members,
            tuple(range(start, start + window)),
            blocks["input_descendants"].astype(np.int64),
        ),
        y=blocks["y"].astype(np.float32),
        x_true=blocks["x_true"].astype(np.float32),
        l=blocks["l"].astype(np.float32),
        target_descendants=DescendantIndex(
            num_members,
            tuple(range(start + window, start + window + horizon)),
            blocks["target_descendants"].astype(np.int64),
        ),
    )


def write_examples(path: str | Path, examples: Sequence[TrainingExample]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as w:
        w.write(MAGIC + struct.pack("<II", SCHEMA_VERSION, len(examples)))
        for example in examples:
            w.write(_pack_example(example))


def read_examples(path: str | Path) -> list[TrainingExample]:
    path = Path(path)
    reader = _Reader(path.read_bytes())
    try:
        magic = reader.read(len(MAGIC))
        if magic != MAGIC:
            raise CorruptFileError(f"{path}: bad magic {magic!r}")
        version, count = reader.unpack("<II")
        if version != SCHEMA_VERSION:
            raise SchemaVersionError(str(path), version, SCHEMA_VERSION)
        examples = [_unpack_example(reader) for _ in range(count)]
    except (CorruptFileError, SchemaVersionError):
        raise
    except (struct.error, KeyError, TypeError, ValueError) as e:
        raise CorruptFileError(f"{path}: {e}") from e
    if reader.offset != len(reader.buffer):
        raise CorruptFileError(f"{path}: {len(reader.buffer) - reader.offset} trailing bytes")
    return examples
