"""Circuit intermediate representation, column layout and dense oracles.

Bit ordering: qubit 0 is the most significant bit of a basis-state index,
so the dense matrix of ``A`` on qubit 0 and ``B`` on qubit 1 is
``kron(A, B)``.
"""

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidLetter, TooManyQubits, ValidationError

PAULI_LETTERS = "IXYZ"
GATE_KINDS = ("H", "Hy", "CX", "Rz")
ORACLE_MAX_QUBITS = 6

_SQ2 = 1.0 / np.sqrt(2.0)
I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = _SQ2 * np.array([[1, 1], [1, -1]], dtype=complex)
# Hermitian involution (Y + Z)/sqrt(2); conjugates Y <-> Z.
HY = _SQ2 * np.array([[1, -1j], [1j, -1]], dtype=complex)
PAULI_MATRICES = {"I": I2, "X": X, "Y": Y, "Z": Z}


def rz_matrix(theta):
    """exp(-i theta/2 Z)."""
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]])


@dataclass(frozen=True)
class PauliString:
    letters: str

    @property
    def n_qubits(self):
        return len(self.letters)

    @property
    def weight(self):
        return sum(1 for c in self.letters if c != "I")

    @property
    def support(self):
        """Indices of the non-identity letters, ascending."""
        return tuple(q for q, c in enumerate(self.letters) if c != "I")

    def __str__(self):
        return self.letters


def parse_pauli_string(text):
    if not text:
        raise InvalidLetter("empty Pauli string")
    bad = sorted({c for c in text if c not in PAULI_LETTERS})
    if bad:
        raise InvalidLetter(f"invalid Pauli letter(s) {bad!r} in {text!r}")
    return PauliString(text)


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple
    param_index: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.kind not in GATE_KINDS:
            raise ValidationError(f"unknown gate kind {self.kind!r}")
        arity = 2 if self.kind == "CX" else 1
        if len(self.qubits) != arity:
            raise ValidationError(f"{self.kind} takes {arity} qubit(s), got {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise ValidationError(f"negative qubit index in {self.qubits}")
        if self.kind == "CX" and self.qubits[0] == self.qubits[1]:
            raise ValidationError("CX control and target must differ")
        if (self.kind == "Rz") != (self.param_index is not None):
            raise ValidationError("param_index must be present exactly for Rz")
        if self.param_index is not None and self.param_index < 0:
            raise ValidationError("param_index must be non-negative")

    def __repr__(self):
        qs = ",".join(map(str, self.qubits))
        if self.kind == "Rz":
            return f"Rz[{self.param_index}]({qs})"
        return f"{self.kind}({qs})"


@dataclass(frozen=True)
class Circuit:
    """Ordered gates on ``n_qubits`` qubits.

    ``moments`` optionally pins each gate to a column index (non-decreasing,
    gap-free, starting at 0). Circuits built column by column (UCC blocks,
    decoded images) carry it; others are laid out by ``layout_columns``.
    """

    n_qubits: int
    gates: tuple = ()
    moments: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n_qubits < 1:
            raise ValidationError("n_qubits must be positive")
        for g in self.gates:
            if max(g.qubits) >= self.n_qubits:
                raise ValidationError(f"{g!r} out of range for {self.n_qubits} qubits")
        used = {g.param_index for g in self.gates if g.kind == "Rz"}
        if used != set(range(len(used))):
            raise ValidationError(f"param indices {sorted(used)} are not 0..n-1")
        if self.moments is not None:
            moments = tuple(int(m) for m in self.moments)
            object.__setattr__(self, "moments", moments)
            self._check_moments(moments)

    def _check_moments(self, moments):
        if len(moments) != len(self.gates):
            raise ValidationError("one moment index per gate required")
        prev = -1
        busy = set()
        for g, m in zip(self.gates, moments):
            if m not in (prev, prev + 1) or (prev == -1 and m != 0):
                raise ValidationError(f"moment indices must count up from 0 without gaps: {moments}")
            if m != prev:
                busy = set()
            if not busy.isdisjoint(g.qubits):
                raise ValidationError(f"{g!r} shares a qubit with another gate in column {m}")
            busy.update(g.qubits)
            prev = m

    @classmethod
    def from_columns(cls, n_qubits, columns):
        gates = []
        moments = []
        for m, col in enumerate(c for c in columns if c):
            gates.extend(col)
            moments.extend([m] * len(col))
        return cls(n_qubits, tuple(gates), tuple(moments))

    @property
    def n_params(self):
        return len({g.param_index for g in self.gates if g.kind == "Rz"})

    def __len__(self):
        return len(self.gates)

    def to_dict(self):
        gates = []
        for i, g in enumerate(self.gates):
            d = {"kind": g.kind, "qubits": list(g.qubits)}
            if g.param_index is not None:
                d["param_index"] = g.param_index
            if self.moments is not None:
                d["column"] = self.moments[i]
            gates.append(d)
        return {"n_qubits": self.n_qubits, "gates": gates}

    @classmethod
    def from_dict(cls, d):
        gates = [Gate(g["kind"], tuple(g["qubits"]), g.get("param_index")) for g in d["gates"]]
        moments = None
        if gates and all("column" in g for g in d["gates"]):
            moments = tuple(g["column"] for g in d["gates"])
        return cls(int(d["n_qubits"]), tuple(gates), moments)


def dump_circuits(circuits, path):
    """Write a JSON list of circuits; ``None`` entries are kept as ``null``."""
    data = [None if c is None else c.to_dict() for c in circuits]
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f)
        f.write("\n")


def load_circuits(path):
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    if isinstance(data, dict):
        data = [data]
    return [None if d is None else Circuit.from_dict(d) for d in data]


@dataclass(frozen=True)
class ColumnLayout:
    columns: tuple

    def __len__(self):
        return len(self.columns)

    def flatten(self):
        return tuple(g for col in self.columns for g in col)


def layout_columns(circuit):
    """Group gates into columns of disjoint qubits.

    Pinned ``moments`` are used as given. Otherwise gates are packed in
    program order: a gate joins the newest column when it touches none of
    that column's qubits, else it opens a new column. Gates never move ahead
    of an earlier column, so the packing is deterministic and idempotent.
    """
    if circuit.moments is not None:
        columns = [[] for _ in range(circuit.moments[-1] + 1 if circuit.moments else 0)]
        for g, m in zip(circuit.gates, circuit.moments):
            columns[m].append(g)
        return ColumnLayout(tuple(tuple(c) for c in columns))
    columns = []
    busy = set()
    for g in circuit.gates:
        if columns and busy.isdisjoint(g.qubits):
            columns[-1].append(g)
            busy.update(g.qubits)
        else:
            columns.append([g])
            busy = set(g.qubits)
    return ColumnLayout(tuple(tuple(c) for c in columns))


def _check_oracle_size(n):
    if n > ORACLE_MAX_QUBITS:
        raise TooManyQubits(f"dense oracle limited to {ORACLE_MAX_QUBITS} qubits, got {n}")


def _embed(ops, n):
    mats = [ops.get(q, I2) for q in range(n)]
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def gate_matrix(gate, n_qubits, theta_value=None):
    """Dense 2^N x 2^N matrix of one gate."""
    if gate.kind == "CX":
        c, t = gate.qubits
        p0 = np.diag([1.0, 0.0]).astype(complex)
        p1 = np.diag([0.0, 1.0]).astype(complex)
        return _embed({c: p0}, n_qubits) + _embed({c: p1, t: X}, n_qubits)
    q = gate.qubits[0]
    if gate.kind == "H":
        return _embed({q: H}, n_qubits)
    if gate.kind == "Hy":
        return _embed({q: HY}, n_qubits)
    return _embed({q: rz_matrix(theta_value)}, n_qubits)


def circuit_unitary(circuit, theta=()):
    n = circuit.n_qubits
    _check_oracle_size(n)
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.size != circuit.n_params:
        raise ValidationError(f"expected {circuit.n_params} parameters, got {theta.size}")
    u = np.eye(2**n, dtype=complex)
    for g in circuit.gates:
        value = theta[g.param_index] if g.kind == "Rz" else None
        u = gate_matrix(g, n, value) @ u
    return u


def pauli_matrix(p):
    if isinstance(p, str):
        p = parse_pauli_string(p)
    _check_oracle_size(p.n_qubits)
    return _embed({q: PAULI_MATRICES[c] for q, c in enumerate(p.letters)}, p.n_qubits)
