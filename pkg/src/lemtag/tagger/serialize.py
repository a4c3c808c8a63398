"""Versioned binary model container.

Layout (all integers little-endian):

    magic "LMTG" | version u32 | header length u32 | header JSON (utf-8)
    | one raw float32 little-endian block per parameter array

The header carries the task, config, vocab tables, training log and the
ordered array names/shapes; array payloads follow in header order.
"""

from __future__ import annotations

import dataclasses
import json
import struct
from pathlib import Path

import numpy as np
import torch

from ..errors import ModelFormatError, TaskMismatchError
from .training import TrainConfig, TrainedModel, build_module
from .vocab import Vocabularies

MAGIC = b"LMTG"
VERSION = 1


def save_model(model: TrainedModel, path: str | Path) -> None:
    arrays = []
    payloads = []
    for name, tensor in model.module.state_dict().items():
        data = tensor.detach().cpu().numpy()
        if data.dtype != np.float32:
            raise ModelFormatError(f"parameter {name} is {data.dtype}, expected float32")
        arrays.append({"name": name, "shape": list(data.shape)})
        payloads.append(np.ascontiguousarray(data, dtype="<f4").tobytes())

    header = json.dumps(
        {
            "task": model.task,
            "config": dataclasses.asdict(model.config),
            "vocab": model.vocab.to_dict(),
            "history": list(model.history),
            "best_epoch": model.best_epoch,
            "arrays": arrays,
        },
        sort_keys=True,
        separators=(",", ":"),
    ).encode("utf-8")

    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(header)))
        fh.write(header)
        for payload in payloads:
            fh.write(payload)


def load_model(path: str | Path, expected_task: str | None = None) -> TrainedModel:
    """Read a model container back; byte-exact inverse of save_model.

    Raises ModelFormatError on bad magic, version mismatch or truncation,
    and TaskMismatchError when expected_task is given and differs.
    """
    blob = Path(path).read_bytes()
    if len(blob) < 12 or blob[:4] != MAGIC:
        raise ModelFormatError(f"{path}: not a model container")
    version, header_len = struct.unpack("<II", blob[4:12])
    if version != VERSION:
        raise ModelFormatError(f"{path}: unsupported container version {version}")
    if len(blob) < 12 + header_len:
        raise ModelFormatError(f"{path}: truncated header")
    try:
        header = json.loads(blob[12 : 12 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"{path}: corrupt header: {exc}") from None

    task = header["task"]
    if expected_task is not None and task != expected_task:
        raise TaskMismatchError(f"{path}: contains a {task} model, expected {expected_task}")

    config = TrainConfig(**header["config"])
    vocab = Vocabularies.from_dict(header["vocab"])
    module = build_module(config, vocab)

    state = {}
    offset = 12 + header_len
    for entry in header["arrays"]:
        size = int(np.prod(entry["shape"], dtype=np.int64)) * 4 if entry["shape"] else 4
        chunk = blob[offset : offset + size]
        if len(chunk) != size:
            raise ModelFormatError(f"{path}: truncated array {entry['name']}")
        array = np.frombuffer(chunk, dtype="<f4").reshape(entry["shape"]).copy()
        state[entry["name"]] = torch.from_numpy(array)
        offset += size
    if offset != len(blob):
        raise ModelFormatError(f"{path}: {len(blob) - offset} trailing bytes")
    if set(state) != set(module.state_dict()):
        raise ModelFormatError(f"{path}: parameter names do not match the architecture")
    module.load_state_dict(state)
    module.eval()

    return TrainedModel(
        task=task,
        config=config,
        vocab=vocab,
        module=module,
        history=tuple(header["history"]),
        best_epoch=header["best_epoch"],
    )
