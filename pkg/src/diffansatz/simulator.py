"""Dense statevector simulation and Pauli-sum Hamiltonians.

Pauli strings act on amplitude vectors through bit masks: for a string with
X-mask x, Z-mask z and y Y-letters, P|k> = i^y (-1)^popcount(k & z) |k ^ x>.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .circuit import H, HY, parse_pauli_string
from .errors import (LengthMismatch, MissingParameter, NonHermitianResidue, ParseError,
                     QubitMismatch, TooManyQubits, ValidationError)

MAX_QUBITS = 24
GROUND_MAX_QUBITS = 10


@dataclass
class Statevector:
    n_qubits: int
    amplitudes: np.ndarray

    @property
    def norm(self):
        return float(np.linalg.norm(self.amplitudes))


def init_state(n_qubits):
    if n_qubits < 1:
        raise ValidationError("n_qubits must be positive")
    if n_qubits > MAX_QUBITS:
        raise TooManyQubits(f"statevector limited to {MAX_QUBITS} qubits")
    amps = np.zeros(2**n_qubits, dtype=complex)
    amps[0] = 1.0
    return Statevector(n_qubits, amps)


def _apply_1q(psi, mat, q, n):
    v = psi.reshape(2**q, 2, 2 ** (n - q - 1))
    a0 = v[:, 0, :]
    a1 = v[:, 1, :]
    out = np.empty_like(v)
    out[:, 0, :] = mat[0, 0] * a0 + mat[0, 1] * a1
    out[:, 1, :] = mat[1, 0] * a0 + mat[1, 1] * a1
    return out.reshape(-1)


def _apply_rz(psi, q, n, theta):
    v = psi.reshape(2**q, 2, 2 ** (n - q - 1)).copy()
    v[:, 0, :] *= np.exp(-0.5j * theta)
    v[:, 1, :] *= np.exp(0.5j * theta)
    return v.reshape(-1)


def _apply_cx(psi, c, t, n):
    out = psi.copy()
    v = out.reshape((2,) * n)
    index = [slice(None)] * n
    index[c] = 1
    sub = v[tuple(index)]
    axis = t if t < c else t - 1
    sub[...] = np.flip(sub, axis=axis).copy()
    return out


def _apply(psi, gate, n, theta_value):
    if gate.kind == "H":
        return _apply_1q(psi, H, gate.qubits[0], n)
    if gate.kind == "Hy":
        return _apply_1q(psi, HY, gate.qubits[0], n)
    if gate.kind == "CX":
        return _apply_cx(psi, gate.qubits[0], gate.qubits[1], n)
    if theta_value is None:
        raise MissingParameter(f"{gate!r} needs a parameter value")
    return _apply_rz(psi, gate.qubits[0], n, theta_value)


def apply_gate(state, gate, theta_value=None):
    if gate.kind != "Rz" and theta_value is not None:
        raise ValidationError(f"{gate.kind} takes no parameter")
    if max(gate.qubits) >= state.n_qubits:
        raise QubitMismatch(f"{gate!r} out of range for {state.n_qubits} qubits")
    return Statevector(state.n_qubits, _apply(state.amplitudes, gate, state.n_qubits, theta_value))


def run_gate_angles(circuit, angles):
    """Run with one angle per gate occurrence (``None`` for fixed gates)."""
    n = circuit.n_qubits
    psi = init_state(n).amplitudes
    for g, a in zip(circuit.gates, angles):
        psi = _apply(psi, g, n, a)
    return Statevector(n, psi)


def gate_angles(circuit, theta):
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.size != circuit.n_params:
        raise ValidationError(f"expected {circuit.n_params} parameters, got {theta.size}")
    return [float(theta[g.param_index]) if g.kind == "Rz" else None for g in circuit.gates]


def run_circuit(circuit, theta=()):
    return run_gate_angles(circuit, gate_angles(circuit, theta))


@dataclass(frozen=True)
class PauliSum:
    n_qubits: int
    terms: tuple = field(default=())

    def __post_init__(self):
        merged = {}
        for coef, p in self.terms:
            if isinstance(p, str):
                p = parse_pauli_string(p)
            if p.n_qubits != self.n_qubits:
                raise QubitMismatch(f"term {p} has {p.n_qubits} qubits, expected {self.n_qubits}")
            coef = float(coef)
            if not np.isfinite(coef):
                raise ValidationError(f"non-finite coefficient for {p}")
            merged[p] = merged.get(p, 0.0) + coef
        object.__setattr__(self, "terms", tuple((c, p) for p, c in merged.items()))

    def __len__(self):
        return len(self.terms)

    @cached_property
    def _masks(self):
        n = self.n_qubits
        idx = np.arange(2**n, dtype=np.int64)
        out = []
        for coef, p in self.terms:
            x = z = 0
            ny = 0
            for q, c in enumerate(p.letters):
                bit = 1 << (n - 1 - q)
                if c in "XY":
                    x |= bit
                if c in "YZ":
                    z |= bit
                ny += c == "Y"
            sign = 1.0 - 2.0 * (np.bitwise_count(idx & z) & 1)
            out.append((coef, idx ^ x, (1j) ** ny * sign))
        return out

    def dense(self):
        if self.n_qubits > GROUND_MAX_QUBITS:
            raise TooManyQubits(f"dense Hamiltonian limited to {GROUND_MAX_QUBITS} qubits")
        dim = 2**self.n_qubits
        mat = np.zeros((dim, dim), dtype=complex)
        cols = np.arange(dim)
        for coef, rows, phase in self._masks:
            mat[rows, cols] += coef * phase
        return mat


def expectation_complex(state, h):
    """Sum of h_i <psi|P_i|psi> without discarding the imaginary part."""
    amps = state.amplitudes if isinstance(state, Statevector) else np.asarray(state)
    n = state.n_qubits if isinstance(state, Statevector) else int(np.log2(amps.size))
    if n != h.n_qubits:
        raise QubitMismatch(f"state has {n} qubits, Hamiltonian {h.n_qubits}")
    total = 0j
    for coef, perm, phase in h._masks:
        total += coef * np.vdot(amps[perm], phase * amps)
    return complex(total)


def expectation(state, h):
    value = expectation_complex(state, h)
    if abs(value.imag) > 1e-8:
        raise NonHermitianResidue(f"imaginary residue {value.imag:.3e}")
    return value.real


def ground_energy(h):
    """Smallest eigenvalue of the dense Hamiltonian (LAPACK Hermitian solver)."""
    if h.n_qubits > GROUND_MAX_QUBITS:
        raise TooManyQubits(f"ground_energy limited to {GROUND_MAX_QUBITS} qubits")
    return float(np.linalg.eigvalsh(h.dense())[0])


def parse_ham(text):
    """Parse the ``.ham`` format: ``<coefficient> <pauli_string>`` per line."""
    terms = []
    n = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected '<coefficient> <pauli>', got {raw!r}", lineno)
        try:
            coef = float(parts[0])
        except ValueError:
            raise ParseError(f"bad coefficient {parts[0]!r}", lineno) from None
        if not np.isfinite(coef):
            raise ParseError(f"non-finite coefficient {parts[0]!r}", lineno)
        try:
            p = parse_pauli_string(parts[1])
        except ValidationError as exc:
            raise ParseError(str(exc), lineno) from None
        if n is None:
            n = p.n_qubits
        elif p.n_qubits != n:
            raise LengthMismatch(f"line {lineno}: string {p} has length {p.n_qubits}, expected {n}")
        terms.append((coef, p))
    if n is None:
        raise ParseError("no terms found")
    return PauliSum(n, tuple(terms))


def read_ham(path):
    with open(path, encoding="utf-8") as f:
        return parse_ham(f.read())
