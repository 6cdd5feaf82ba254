"""Linear noise schedule and the closed-form forward process.

Timesteps are 1-based throughout: ``beta[t - 1]`` is the variance added at
step ``t``.
"""

from dataclasses import dataclass

import numpy as np
import torch

from ..errors import BadTimestep, InvalidRange, ShapeMismatch


@dataclass(frozen=True)
class NoiseSchedule:
    T: int
    beta: np.ndarray
    alpha: np.ndarray
    alpha_bar: np.ndarray
    sigma: np.ndarray


def make_schedule(T=1000, beta_start=1e-4, beta_end=0.01):
    if T < 2:
        raise InvalidRange("T must be >= 2")
    if not 0.0 < beta_start <= beta_end < 1.0:
        raise InvalidRange(f"need 0 < beta_start <= beta_end < 1, got {beta_start}, {beta_end}")
    steps = np.arange(T, dtype=float)
    beta = beta_start + (beta_end - beta_start) * steps / (T - 1)
    alpha = 1.0 - beta
    return NoiseSchedule(T, beta, alpha, np.cumprod(alpha), np.sqrt(beta))


def _lookup(values, t, like):
    """Per-item coefficient broadcast against ``like`` (batch-first)."""
    t_arr = np.asarray(t)
    if np.any(t_arr < 1) or np.any(t_arr > len(values)):
        raise BadTimestep(f"timestep outside 1..{len(values)}: {t}")
    coef = values[t_arr - 1]
    if isinstance(like, torch.Tensor):
        coef = torch.as_tensor(coef, dtype=like.dtype)
        if coef.ndim:
            coef = coef.reshape(-1, *([1] * (like.ndim - 1)))
        return coef
    if coef.ndim:
        coef = coef.reshape(-1, *([1] * (np.ndim(like) - 1)))
    return coef


def forward_noise(x0, t, eps, schedule):
    """sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps.

    ``t`` may be a scalar or one timestep per batch item; works on numpy
    arrays and torch tensors.
    """
    if tuple(x0.shape) != tuple(eps.shape):
        raise ShapeMismatch(f"eps shape {tuple(eps.shape)} does not match x0 {tuple(x0.shape)}")
    ab = schedule.alpha_bar
    return _lookup(np.sqrt(ab), t, x0) * x0 + _lookup(np.sqrt(1.0 - ab), t, x0) * eps
