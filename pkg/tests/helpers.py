"""Random instances shared by several test modules."""

import numpy as np

from diffansatz.circuit import Circuit, Gate
from diffansatz.simulator import PauliSum, Statevector


def random_circuit(n, n_gates, rng):
    gates, k = [], 0
    for _ in range(n_gates):
        kind = ("H", "Hy", "CX", "Rz")[rng.integers(4)]
        if kind == "CX":
            c, t = rng.choice(n, 2, replace=False)
            gates.append(Gate("CX", (int(c), int(t))))
        elif kind == "Rz":
            gates.append(Gate("Rz", (int(rng.integers(n)),), k))
            k += 1
        else:
            gates.append(Gate(kind, (int(rng.integers(n)),)))
    return Circuit(n, tuple(gates))


def random_state(n, rng):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return Statevector(n, v / np.linalg.norm(v))


def random_sum(n, n_terms, rng):
    terms = [(float(rng.normal()), "".join(rng.choice(list("IXYZ"), n))) for _ in range(n_terms)]
    return PauliSum(n, tuple(terms))
