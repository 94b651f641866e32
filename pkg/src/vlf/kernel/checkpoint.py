"""Binary parameter checkpoints.

Layout: magic ``VLFK``, format version u32 LE, parameter count u32 LE,
then per parameter: name length u16 LE + UTF-8 name, rank u8, dims as
u32 LE each, values as f64 LE in row-major order.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import ParseError
from .tensor import ParamSet

MAGIC = b"VLFK"
VERSION = 1


def save_params(params: ParamSet, path: str | Path) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(params)))
        for name, value in params.items():
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<B", value.ndim))
            for dim in value.shape:
                fh.write(struct.pack("<I", dim))
            fh.write(np.ascontiguousarray(value, dtype="<f8").tobytes())


def load_params(path: str | Path) -> ParamSet:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise ParseError(f"not a parameter checkpoint: bad magic {data[:4]!r}")
    version, count = struct.unpack_from("<II", data, 4)
    if version != VERSION:
        raise ParseError(f"unsupported checkpoint version {version}")
    offset = 12
    params = ParamSet()
    for _ in range(count):
        (name_len,) = struct.unpack_from("<H", data, offset)
        offset += 2
        name = data[offset : offset + name_len].decode("utf-8")
        offset += name_len
        (rank,) = struct.unpack_from("<B", data, offset)
        offset += 1
        dims = struct.unpack_from(f"<{rank}I", data, offset) if rank else ()
        offset += 4 * rank
        n = int(np.prod(dims)) if rank else 1
        values = np.frombuffer(data, dtype="<f8", count=n, offset=offset).copy()
        offset += 8 * n
        params.add(name, values.reshape(dims))
    return params
