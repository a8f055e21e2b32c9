"""Model files: a JSON header followed by little-endian float64 blocks.

Layout::

    b"ABM1" | uint32 header length | UTF-8 JSON header | float64 blocks

Fitted attributes (trailing underscore) and constructor parameters are stored.
ndarrays become blocks; dataclasses registered with :func:`register` are
stored through their ``to_dict``/``from_dict`` pair.
"""
from __future__ import annotations

import hashlib
import importlib
import json
import struct
from os import PathLike

import numpy as np

MAGIC = b"ABM1"
FORMAT_VERSION = 1
_TYPES: dict[str, type] = {}


def register(cls):
    _TYPES[cls.__name__] = cls
    return cls


def _encode(value, blocks: list):
    if isinstance(value, np.ndarray):
        blocks.append(value)
        return {"__array__": len(blocks) - 1, "dtype": value.dtype.str, "shape": list(value.shape)}
    if type(value).__name__ in _TYPES:
        return {"__type__": type(value).__name__, "value": _encode(value.to_dict(), blocks)}
    if isinstance(value, dict):
        return {"__dict__": [[_encode(k, blocks), _encode(v, blocks)] for k, v in value.items()]}
    if isinstance(value, tuple):
        return {"__tuple__": [_encode(v, blocks) for v in value]}
    if isinstance(value, list):
        return [_encode(v, blocks) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def _decode(value, blocks: list):
    if isinstance(value, list):
        return [_decode(v, blocks) for v in value]
    if not isinstance(value, dict):
        return value
    if "__array__" in value:
        arr = blocks[value["__array__"]].reshape(value["shape"])
        return arr.astype(np.dtype(value["dtype"]))
    if "__type__" in value:
        return _TYPES[value["__type__"]].from_dict(_decode(value["value"], blocks))
    if "__tuple__" in value:
        return tuple(_decode(v, blocks) for v in value["__tuple__"])
    if "__dict__" in value:
        return {_decode(k, blocks): _decode(v, blocks) for k, v in value["__dict__"]}
    raise ValueError(f"unrecognised header node {sorted(value)}")


def dump(model, path: str | PathLike, **extra) -> None:
    """Write ``model`` (an estimator with ``get_params``) to ``path``."""
    blocks: list[np.ndarray] = []
    state = {k: v for k, v in vars(model).items() if k.endswith("_") and not k.startswith("_")}
    header = {
        "format": FORMAT_VERSION,
        "class": f"{type(model).__module__}.{type(model).__qualname__}",
        "params": _encode(model.get_params(deep=False), blocks),
        "state": _encode(state, blocks),
        "extra": _encode(extra, blocks),
    }
    header["blocks"] = [int(b.size) for b in blocks]
    payload = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(payload)))
        fh.write(payload)
        for b in blocks:
            fh.write(np.ascontiguousarray(b, dtype="<f8").tobytes())


def read_header(path: str | PathLike) -> dict:
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ValueError(f"{path} is not a model file")
        (size,) = struct.unpack("<I", fh.read(4))
        return json.loads(fh.read(size).decode("utf-8"))


def load(path: str | PathLike):
    """Rebuild the estimator stored at ``path``."""
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ValueError(f"{path} is not a model file")
        (size,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(size).decode("utf-8"))
        if header["format"] != FORMAT_VERSION:
            raise ValueError(f"unsupported model format {header['format']}")
        blocks = [np.frombuffer(fh.read(8 * n), dtype="<f8") for n in header["blocks"]]
    module, _, name = header["class"].rpartition(".")
    if module.split(".")[0] != __name__.split(".")[0]:
        raise ValueError(f"refusing to load foreign class {header['class']!r}")
    cls = getattr(importlib.import_module(module), name)
    model = cls(**_decode(header["params"], blocks))
    for k, v in _decode(header["state"], blocks).items():
        setattr(model, k, v)
    return model


def file_digest(path: str | PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
