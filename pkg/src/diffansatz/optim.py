"""Bias-corrected ADAM shared by VQE and diffusion training.

Works on anything supporting elementwise arithmetic and ``** 0.5``, so the
same update serves numpy parameter vectors and torch tensors.
"""

from dataclasses import dataclass, replace
from typing import Any

from .errors import LengthMismatch


@dataclass(frozen=True)
class AdamState:
    first_moment: Any
    second_moment: Any
    step_count: int = 0
    learning_rate: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def zeros_like(cls, theta, **hyper):
        return cls(theta * 0, theta * 0, 0, **hyper)


def _shape(x):
    return tuple(getattr(x, "shape", (len(x),)))


def adam_step(theta, grad, state):
    """Return ``(theta', state')``; inputs are not modified."""
    if _shape(theta) != _shape(grad) or _shape(theta) != _shape(state.first_moment):
        raise LengthMismatch(f"theta {_shape(theta)}, grad {_shape(grad)}, "
                             f"moments {_shape(state.first_moment)}")
    t = state.step_count + 1
    m = state.beta1 * state.first_moment + (1.0 - state.beta1) * grad
    v = state.beta2 * state.second_moment + (1.0 - state.beta2) * (grad * grad)
    m_hat = m / (1.0 - state.beta1**t)
    v_hat = v / (1.0 - state.beta2**t)
    theta = theta - state.learning_rate * m_hat / (v_hat**0.5 + state.epsilon)
    return theta, replace(state, first_moment=m, second_moment=v, step_count=t)
