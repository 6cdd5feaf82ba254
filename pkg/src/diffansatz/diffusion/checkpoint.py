"""Versioned binary checkpoint (``QDNM``).

Layout, all little-endian: magic, u16 version, u8 length + config id,
u16 tensor count, then per tensor a u16-length name, u8 rank, u32 dims and
float32 data. ADAM moments follow the weights as ``opt.<name>.m`` /
``opt.<name>.v`` plus a scalar ``opt.step``.
"""

import struct

import numpy as np
import torch

from ..errors import CorruptCheckpoint
from ..optim import AdamState
from .nets import DenoiserParams, shape_manifest

MAGIC = b"QDNM"
VERSION = 1


def _pack_tensor(name, arr):
    arr = np.ascontiguousarray(np.asarray(arr, dtype="<f4"))
    raw = name.encode("utf-8")
    head = struct.pack("<H", len(raw)) + raw + struct.pack("<B", arr.ndim)
    head += struct.pack(f"<{arr.ndim}I", *arr.shape)
    return head + arr.tobytes()


def save_checkpoint(params, opt_state, path):
    entries = [(k, v.detach().cpu().numpy()) for k, v in params.tensors.items()]
    if opt_state:
        step = next(iter(opt_state.values())).step_count
        for k in params.tensors:
            s = opt_state[k]
            entries.append((f"opt.{k}.m", s.first_moment.detach().cpu().numpy()))
            entries.append((f"opt.{k}.v", s.second_moment.detach().cpu().numpy()))
        entries.append(("opt.step", np.array(step, dtype=np.float32)))
    cid = params.config_id.encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC + struct.pack("<H", VERSION) + struct.pack("<B", len(cid)) + cid)
        f.write(struct.pack("<H", len(entries)))
        for name, arr in entries:
            f.write(_pack_tensor(name, arr))


class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.data):
            raise CorruptCheckpoint("checkpoint truncated")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load_checkpoint(path, expected_config=None, learning_rate=1e-3):
    """Return ``(params, opt_state)``; ``opt_state`` is None if not stored."""
    with open(path, "rb") as f:
        r = _Reader(f.read())
    if r.take(4) != MAGIC:
        raise CorruptCheckpoint("bad magic")
    (version,) = r.unpack("<H")
    if version != VERSION:
        raise CorruptCheckpoint(f"unsupported version {version}")
    (n,) = r.unpack("<B")
    try:
        config_id = r.take(n).decode("utf-8")
    except UnicodeDecodeError:
        raise CorruptCheckpoint("config id is not UTF-8") from None
    if expected_config is not None and config_id != expected_config:
        raise CorruptCheckpoint(f"config mismatch: file holds {config_id!r}, "
                                f"{expected_config!r} requested")
    (count,) = r.unpack("<H")
    tensors = {}
    for _ in range(count):
        (name_len,) = r.unpack("<H")
        name = r.take(name_len).decode("utf-8", errors="replace")
        (rank,) = r.unpack("<B")
        dims = r.unpack(f"<{rank}I")
        size = int(np.prod(dims, dtype=np.int64))
        arr = np.frombuffer(r.take(4 * size), dtype="<f4").reshape(dims)
        tensors[name] = torch.from_numpy(arr.astype(np.float32))
    if r.pos != len(r.data):
        raise CorruptCheckpoint("trailing bytes after tensor block")

    try:
        manifest = shape_manifest(config_id)
    except ValueError:
        raise CorruptCheckpoint(f"unknown config {config_id!r}") from None
    weights = {k: tensors.pop(k) for k in list(tensors) if not k.startswith("opt.")}
    if {k: tuple(v.shape) for k, v in weights.items()} != manifest:
        raise CorruptCheckpoint(f"tensors do not match the {config_id} shape manifest")
    weights = {k: weights[k] for k in manifest}
    params = DenoiserParams(config_id, weights)

    if not tensors:
        return params, None
    try:
        step = int(tensors.pop("opt.step").item())
        opt_state = {k: AdamState(tensors.pop(f"opt.{k}.m"), tensors.pop(f"opt.{k}.v"), step,
                                  learning_rate=learning_rate)
                     for k in manifest}
    except KeyError as exc:
        raise CorruptCheckpoint(f"optimizer state incomplete: missing {exc}") from None
    if tensors:
        raise CorruptCheckpoint(f"unexpected tensors {sorted(tensors)}")
    for k in manifest:
        if tuple(opt_state[k].first_moment.shape) != manifest[k]:
            raise CorruptCheckpoint(f"optimizer moments for {k} have the wrong shape")
    return params, opt_state
