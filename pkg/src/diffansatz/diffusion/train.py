"""Epsilon-prediction training and ancestral sampling."""

import csv
import logging
import math
from dataclasses import dataclass

import numpy as np
import torch

from .. import rng as rngmod
from ..errors import NonFiniteLoss, ShapeMismatch, ValidationError
from ..optim import AdamState, adam_step
from .nets import SIZE, DenoiserParams, predict_eps
from .schedule import forward_noise

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    steps: int = 2000
    batch_size: int = 64
    learning_rate: float = 1e-3
    seed: int = 0
    T: int = 1000
    log_every: int = 0

    def __post_init__(self):
        if self.steps < 1 or self.batch_size < 1:
            raise ValidationError("steps and batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValidationError("learning_rate must be positive")


def init_opt_state(params, learning_rate=1e-3):
    return {k: AdamState.zeros_like(v.detach(), learning_rate=learning_rate)
            for k, v in params.tensors.items()}


def diffusion_loss(params, x0, t, eps, schedule):
    """Mean squared error between the drawn and the predicted noise."""
    x_t = forward_noise(x0, t, eps, schedule)
    return torch.mean((eps - predict_eps(params, x_t, t)) ** 2)


def train_step(params, x0, schedule, rng, opt_state):
    """One ADAM step on a batch of clean images (batch, 28, 28).

    Returns ``(params', opt_state', loss)``.
    """
    x0 = torch.as_tensor(x0)
    if x0.ndim != 3 or x0.shape[0] == 0 or tuple(x0.shape[1:]) != (SIZE, SIZE):
        raise ShapeMismatch(f"expected non-empty (batch, {SIZE}, {SIZE}) batch, got {tuple(x0.shape)}")
    batch = x0.shape[0]
    t = rng.integers(1, schedule.T + 1, size=batch)
    eps = torch.as_tensor(rngmod.gaussian(rng, tuple(x0.shape)), dtype=x0.dtype)
    names = list(params.tensors)
    leaves = {k: params.tensors[k].detach().requires_grad_(True) for k in names}
    loss = diffusion_loss(DenoiserParams(params.config_id, leaves), x0, t, eps, schedule)
    value = loss.detach().item()
    if not math.isfinite(value):
        raise NonFiniteLoss(f"loss became {value}")
    grads = torch.autograd.grad(loss, [leaves[k] for k in names])
    new_tensors, new_state = {}, {}
    with torch.no_grad():
        for k, g in zip(names, grads):
            new_tensors[k], new_state[k] = adam_step(leaves[k].detach(), g, opt_state[k])
    return DenoiserParams(params.config_id, new_tensors), new_state, value


def train(params, images, schedule, config, opt_state=None):
    """Fixed-budget training loop; batches are drawn with replacement.

    ``images`` is a (count, 28, 28) array of normalized images. Returns
    ``(params, opt_state, losses)``.
    """
    data = torch.as_tensor(np.asarray(images), dtype=torch.float32)
    if opt_state is None:
        opt_state = init_opt_state(params, config.learning_rate)
    rng = rngmod.stream(config.seed, "train")
    losses = []
    for step in range(config.steps):
        idx = rng.integers(0, data.shape[0], size=config.batch_size)
        params, opt_state, loss = train_step(params, data[idx], schedule, rng, opt_state)
        losses.append(loss)
        if config.log_every and (step + 1) % config.log_every == 0:
            log.info("step %d loss %.5f", step + 1, float(np.mean(losses[-config.log_every:])))
    return params, opt_state, losses


def write_losses(losses, path):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["step", "loss"])
        for i, loss in enumerate(losses, start=1):
            w.writerow([i, f"{loss:.9g}"])


@torch.no_grad()
def sample(params, schedule, count, seed, batch_size=64, eps_model=None):
    """Ancestral sampling from pure noise; returns (count, 28, 28) float32.

    Image i draws all of its noise from stream (seed, "sample", i), so its
    result does not depend on ``count`` or ``batch_size``. ``eps_model``
    overrides the network (used to test the recursion itself).
    """
    predict = eps_model or (lambda x, t: predict_eps(params, x, t))
    out = []
    for start in range(0, count, batch_size):
        ids = range(start, min(count, start + batch_size))
        rngs = [rngmod.stream(seed, "sample", i) for i in ids]
        x = _noise(rngs)
        for t in range(schedule.T, 0, -1):
            alpha = schedule.alpha[t - 1]
            coef = (1.0 - alpha) / math.sqrt(1.0 - schedule.alpha_bar[t - 1])
            x = (x - coef * predict(x, t)) / math.sqrt(alpha)
            if t > 1:
                x = x + schedule.sigma[t - 1] * _noise(rngs)
        out.append(x)
    return torch.cat(out).numpy() if out else np.zeros((0, SIZE, SIZE), dtype=np.float32)


def _noise(rngs):
    return torch.as_tensor(np.stack([rngmod.gaussian(r, (SIZE, SIZE)) for r in rngs]),
                           dtype=torch.float32)
