"""VQE loop: parameter-shift gradients, ADAM updates, random baselines."""

import csv
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, Gate
from .errors import ValidationError
from .optim import AdamState, adam_step
from .simulator import expectation, gate_angles, run_gate_angles

SHIFT = np.pi / 2
EARLY_STOP_TOL = 1e-9
EARLY_STOP_WINDOW = 5


@dataclass(frozen=True)
class VqeConfig:
    max_iters: int = 100
    learning_rate: float = 0.1
    seed: int = 0
    init_mode: str = "uniform"  # "uniform" in [-0.1, 0.1) or "zeros"
    init_scale: float = 0.1
    restarts: int = 1  # independent initialisations; the best run is kept


@dataclass
class VqeResult:
    best_energy: float
    best_theta: np.ndarray
    trace: list
    iterations_run: int
    converged_reason: str  # "max_iters", "tolerance" or "no_parameters"


def energy(circuit, h, theta):
    return expectation(run_gate_angles(circuit, gate_angles(circuit, theta)), h)


def parameter_shift_grad(circuit, h, theta):
    """Exact gradient for Rz(θ) = exp(-iθ/2 Z) gates.

    Each Rz occurrence is shifted by ±π/2 on its own, and the shifts are summed into
    its parameter, so shared parameters are handled too.
    """
    angles = gate_angles(circuit, theta)
    grad = np.zeros(circuit.n_params)
    for k, g in enumerate(circuit.gates):
        if g.kind != "Rz":
            continue
        shifted = list(angles)
        shifted[k] = angles[k] + SHIFT
        plus = expectation(run_gate_angles(circuit, shifted), h)
        shifted[k] = angles[k] - SHIFT
        minus = expectation(run_gate_angles(circuit, shifted), h)
        grad[g.param_index] += 0.5 * (plus - minus)
    return grad


def initial_theta(n_params, config, rng):
    if config.init_mode == "zeros":
        return np.zeros(n_params)
    if config.init_mode == "uniform":
        return rng.uniform(-config.init_scale, config.init_scale, size=n_params)
    raise ValidationError(f"unknown init_mode {config.init_mode!r}")


def run_vqe(circuit, h, config=VqeConfig(), rng=None):
    """Minimise <H> over the circuit parameters.

    The trace holds the energy at the start of each iteration. A circuit
    without parameters is scored once. With several restarts, each draws
    its initial angles from the same stream in turn and the result with the
    lowest best energy is returned (the earliest on ties).
    """
    if circuit.n_qubits != h.n_qubits:
        raise ValidationError(f"circuit has {circuit.n_qubits} qubits, Hamiltonian {h.n_qubits}")
    if config.max_iters < 1:
        raise ValidationError("max_iters must be >= 1")
    if config.restarts < 1:
        raise ValidationError("restarts must be >= 1")
    if circuit.n_params == 0:
        e = energy(circuit, h, [])
        return VqeResult(e, np.zeros(0), [e], 1, "no_parameters")
    if rng is None:
        rng = np.random.default_rng(config.seed)
    best = None
    for _ in range(config.restarts):
        result = _descend(circuit, h, config, initial_theta(circuit.n_params, config, rng))
        if best is None or result.best_energy < best.best_energy:
            best = result
    return best


def _descend(circuit, h, config, theta):
    state = AdamState.zeros_like(theta, learning_rate=config.learning_rate)
    trace = []
    best_energy, best_theta = np.inf, theta
    reason = "max_iters"
    calm = 0
    for _ in range(config.max_iters):
        e = energy(circuit, h, theta)
        if trace and abs(e - trace[-1]) < EARLY_STOP_TOL:
            calm += 1
        else:
            calm = 0
        trace.append(e)
        if e < best_energy:
            best_energy, best_theta = e, theta.copy()
        if calm >= EARLY_STOP_WINDOW:
            reason = "tolerance"
            break
        theta, state = adam_step(theta, parameter_shift_grad(circuit, h, theta), state)
    return VqeResult(best_energy, best_theta, trace, len(trace), reason)


def random_baseline(n_qubits, gate_count, rng):
    """``gate_count`` gates with kinds uniform over {H, Hy, CX, Rz}.

    Qubits are drawn uniformly without replacement within a gate; each Rz
    gets a fresh parameter index.
    """
    if gate_count < 1:
        raise ValidationError("gate_count must be >= 1")
    if n_qubits < 2:
        raise ValidationError("random baselines need at least 2 qubits")
    kinds = ("H", "Hy", "CX", "Rz")
    gates = []
    n_params = 0
    for _ in range(gate_count):
        kind = kinds[rng.integers(0, 4)]
        if kind == "CX":
            c, t = rng.choice(n_qubits, size=2, replace=False)
            gates.append(Gate("CX", (c, t)))
        elif kind == "Rz":
            gates.append(Gate("Rz", (rng.integers(0, n_qubits),), n_params))
            n_params += 1
        else:
            gates.append(Gate(kind, (rng.integers(0, n_qubits),)))
    return Circuit(n_qubits, tuple(gates))


def write_trace(result, path):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["iteration", "energy"])
        for i, e in enumerate(result.trace):
            w.writerow([i, f"{e:.17g}"])


def read_trace(path):
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    return [float(r["energy"]) for r in rows]
