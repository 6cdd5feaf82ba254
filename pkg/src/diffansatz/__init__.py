"""Generative ansatz design: UCC circuits as images, a diffusion model over
them, and VQE evaluation of the decoded circuits against random baselines."""

from .circuit import Circuit, ColumnLayout, Gate, PauliString, circuit_unitary, layout_columns, \
    parse_pauli_string, pauli_matrix
from .codec import decode_image, encode_circuit, normalize_to_28
from .optim import AdamState, adam_step
from .simulator import PauliSum, Statevector, apply_gate, expectation, ground_energy, init_state, \
    run_circuit
from .ucc import DatasetSpec, build_ucc_block, generate_corpus, sample_pauli_string
from .vqe import VqeConfig, VqeResult, parameter_shift_grad, random_baseline, run_vqe

__version__ = "0.1.0"
