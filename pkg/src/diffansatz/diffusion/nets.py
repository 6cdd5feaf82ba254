"""Noise-prediction networks.

Parameters live outside the modules as a plain name -> tensor mapping
(``DenoiserParams``); the modules are stateless templates evaluated with
``torch.func.functional_call``. That keeps the optimizer, checkpointing and
gradient checks working on one flat collection of named tensors.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn
from torch.func import functional_call

from ..errors import BadTimestep, ShapeMismatch, ValidationError

SIZE = 28
TIME_DIM = 32


def timestep_embedding(t, dim=TIME_DIM, dtype=torch.float32):
    """Sinusoidal embedding of integer timesteps, shape (batch, dim)."""
    t = torch.as_tensor(np.asarray(t, dtype=float).reshape(-1), dtype=dtype)
    half = dim // 2
    freqs = torch.exp(-math.log(10000.0) * torch.arange(half, dtype=dtype) / half)
    args = t[:, None] * freqs[None, :]
    return torch.cat([torch.sin(args), torch.cos(args)], dim=1)


class MlpDenoiser(nn.Module):
    """Two hidden layers plus a time-gated copy of the input.

    The hidden path can only reach a ``hidden``-dimensional subspace of the
    784 outputs, while the noise to predict is isotropic; ``out.skip`` adds
    ``gain(t) * x`` so the component orthogonal to the data is reachable.
    """

    def __init__(self, hidden=256):
        super().__init__()
        self.fc1 = nn.Linear(SIZE * SIZE + TIME_DIM, hidden)
        self.fc2 = nn.Linear(hidden, hidden)
        self.out = nn.ModuleDict({"proj": nn.Linear(hidden, SIZE * SIZE),
                                  "skip": nn.Linear(TIME_DIM, 1)})

    def forward(self, x, temb):
        flat = x.reshape(x.shape[0], -1)
        h = F.silu(self.fc1(torch.cat([flat, temb], dim=1)))
        h = F.silu(self.fc2(h))
        return (self.out["proj"](h) + self.out["skip"](temb) * flat).reshape(x.shape)


class Block(nn.Module):
    """3x3 conv -> GroupNorm(8) -> + time bias -> SiLU."""

    def __init__(self, c_in, c_out, stride=1):
        super().__init__()
        self.conv = nn.Conv2d(c_in, c_out, 3, stride=stride, padding=1)
        self.norm = nn.GroupNorm(8, c_out)
        self.time = nn.Linear(TIME_DIM, c_out)

    def forward(self, x, temb):
        h = self.norm(self.conv(x))
        return F.silu(h + self.time(temb)[:, :, None, None])


class UNetDenoiser(nn.Module):
    """28 -> 14 -> 7 -> 14 -> 28 with skip concatenations, widths 32/64."""

    def __init__(self, c1=32, c2=64):
        super().__init__()
        self.stem = Block(1, c1)
        self.down1 = Block(c1, c2, stride=2)
        self.down2 = Block(c2, c2, stride=2)
        self.mid = Block(c2, c2)
        self.up1 = Block(2 * c2, c1)
        self.up2 = Block(2 * c1, c1)
        self.out = nn.Conv2d(c1, 1, 3, padding=1)

    def forward(self, x, temb):
        a = self.stem(x[:, None], temb)
        b = self.down1(a, temb)
        h = self.mid(self.down2(b, temb), temb)
        h = F.interpolate(h, scale_factor=2, mode="nearest")
        h = self.up1(torch.cat([h, b], dim=1), temb)
        h = F.interpolate(h, scale_factor=2, mode="nearest")
        h = self.up2(torch.cat([h, a], dim=1), temb)
        return self.out(h)[:, 0]


CONFIGS = {"mlp-small": MlpDenoiser, "unet-small": UNetDenoiser}
FINAL_LAYER = {"mlp-small": "out", "unet-small": "out"}
_TEMPLATES = {}


def template(config_id):
    if config_id not in CONFIGS:
        raise ValidationError(f"unknown denoiser config {config_id!r}; choose from {sorted(CONFIGS)}")
    if config_id not in _TEMPLATES:
        _TEMPLATES[config_id] = CONFIGS[config_id]()
    return _TEMPLATES[config_id]


def shape_manifest(config_id):
    """Ordered name -> shape mapping of a config's trainable tensors."""
    return {name: tuple(p.shape) for name, p in template(config_id).named_parameters()}


@dataclass
class DenoiserParams:
    config_id: str
    tensors: dict = field(default_factory=dict)

    def check(self):
        manifest = shape_manifest(self.config_id)
        got = {k: tuple(v.shape) for k, v in self.tensors.items()}
        if got != manifest:
            raise ShapeMismatch(f"tensors do not match the {self.config_id} manifest")
        for k, v in self.tensors.items():
            if not torch.isfinite(v).all():
                raise ValidationError(f"non-finite entries in {k}")

    def to(self, dtype):
        return DenoiserParams(self.config_id, {k: v.detach().to(dtype) for k, v in self.tensors.items()})


def _fans(name, shape):
    if len(shape) == 4:  # conv: out, in, kh, kw
        rf = shape[2] * shape[3]
        return shape[1] * rf, shape[0] * rf
    return shape[1], shape[0]


def init_params(config_id, rng, zero_final=True):
    """Glorot-uniform weights, zero biases, unit norm scales.

    With ``zero_final`` the output layer starts at zero, so the network
    initially predicts zero noise everywhere.
    """
    tensors = {}
    final = FINAL_LAYER[config_id] + "."
    for name, shape in shape_manifest(config_id).items():
        if ".norm." in name and name.endswith("weight"):
            arr = np.ones(shape)
        elif name.endswith("bias") or (zero_final and name.startswith(final)):
            arr = np.zeros(shape)
        else:
            fan_in, fan_out = _fans(name, shape)
            limit = math.sqrt(6.0 / (fan_in + fan_out))
            arr = rng.uniform(-limit, limit, size=shape)
        tensors[name] = torch.tensor(arr, dtype=torch.float32)
    return DenoiserParams(config_id, tensors)


def predict_eps(params, x_t, t):
    """Predicted noise for ``x_t`` of shape (batch, 28, 28) or (28, 28)."""
    x = torch.as_tensor(x_t)
    single = x.ndim == 2
    if single:
        x = x[None]
    if x.ndim != 3 or tuple(x.shape[1:]) != (SIZE, SIZE):
        raise ShapeMismatch(f"expected (batch, {SIZE}, {SIZE}) input, got {tuple(x.shape)}")
    t_arr = np.broadcast_to(np.asarray(t), (x.shape[0],))
    if np.any(t_arr < 1):
        raise BadTimestep(f"timesteps must be >= 1, got {t}")
    temb = timestep_embedding(t_arr, dtype=x.dtype)
    out = functional_call(template(params.config_id), params.tensors, (x, temb))
    return out[0] if single else out
