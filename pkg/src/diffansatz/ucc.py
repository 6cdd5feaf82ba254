"""Random Pauli strings and their UCC exponential blocks.

A block for Pauli string P implements exp(-i theta/2 P): basis changes
(H for X, Hy for Y), a CX ladder accumulating parity of the non-identity
qubits onto the last one, a central Rz, then the mirror image.
"""

from dataclasses import dataclass

from . import rng as rngmod
from .circuit import Circuit, Gate, PauliString
from .errors import AllIdentity, ValidationError

_BASIS_GATE = {"X": "H", "Y": "Hy"}


@dataclass(frozen=True)
class DatasetSpec:
    n_qubits: int
    count: int = 10_000
    seed: int = 0
    blocks_per_circuit: int = 1

    def __post_init__(self):
        if self.n_qubits < 2:
            raise ValidationError("dataset needs n_qubits >= 2")
        if self.count < 1:
            raise ValidationError("dataset count must be >= 1")
        if self.blocks_per_circuit < 1:
            raise ValidationError("blocks_per_circuit must be >= 1")


def sample_pauli_string(n_qubits, rng):
    """Uniform letters, redrawing the whole string while it is all identity."""
    while True:
        idx = rng.integers(0, 4, size=n_qubits)
        if idx.any():
            return PauliString("".join("IXYZ"[i] for i in idx))


def ucc_columns(p, param_index=0):
    """Columns of the block: basis | ladder... | Rz | mirrored ladder | basis."""
    support = p.support
    if not support:
        raise AllIdentity(f"Pauli string {p} has weight 0")
    basis = tuple(Gate(_BASIS_GATE[p.letters[q]], (q,)) for q in support if p.letters[q] in _BASIS_GATE)
    ladder = [(Gate("CX", (a, b)),) for a, b in zip(support, support[1:])]
    center = [(Gate("Rz", (support[-1],), param_index),)]
    return [basis] + ladder + center + ladder[::-1] + [basis]


def build_ucc_block(p, param_index=0):
    return Circuit.from_columns(p.n_qubits, ucc_columns(p, param_index))


def concatenate_blocks(strings):
    """One circuit holding a UCC block per string, each with its own parameter."""
    n = strings[0].n_qubits
    columns = []
    for i, p in enumerate(strings):
        if p.n_qubits != n:
            raise ValidationError("all strings must share one length")
        columns.extend(ucc_columns(p, i))
    return Circuit.from_columns(n, columns)


def generate_corpus(spec):
    """``spec.count`` circuits; item i is drawn from stream (seed, "corpus", i)."""
    out = []
    for i in range(spec.count):
        rng = rngmod.stream(spec.seed, "corpus", i)
        strings = [sample_pauli_string(spec.n_qubits, rng) for _ in range(spec.blocks_per_circuit)]
        out.append(concatenate_blocks(strings))
    return out
