import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diffansatz.circuit import (HY, Circuit, Gate, circuit_unitary, dump_circuits, layout_columns,
                                load_circuits, parse_pauli_string, pauli_matrix)
from diffansatz.errors import InvalidLetter, TooManyQubits, ValidationError
from diffansatz.simulator import Statevector, apply_gate, run_circuit
from diffansatz.ucc import build_ucc_block
from helpers import random_circuit


class TestPauliString:
    def test_parse(self):
        p = parse_pauli_string("XXYZ")
        assert p.n_qubits == 4
        assert p.letters == "XXYZ"
        assert p.weight == 4

    def test_identity_parses(self):
        p = parse_pauli_string("IIII")
        assert p.weight == 0

    @pytest.mark.parametrize("text", ["XQ", "", "xz"])
    def test_bad_letters(self, text):
        with pytest.raises(InvalidLetter):
            parse_pauli_string(text)


class TestGateAndCircuit:
    def test_cx_needs_distinct_qubits(self):
        with pytest.raises(ValidationError):
            Gate("CX", (1, 1))

    def test_param_only_on_rz(self):
        with pytest.raises(ValidationError):
            Gate("H", (0,), 0)
        with pytest.raises(ValidationError):
            Gate("Rz", (0,))

    def test_qubit_range(self):
        with pytest.raises(ValidationError):
            Circuit(2, (Gate("H", (2,)),))

    def test_param_indices_contiguous(self):
        with pytest.raises(ValidationError):
            Circuit(1, (Gate("Rz", (0,), 1),))
        c = Circuit(1, (Gate("Rz", (0,), 1), Gate("Rz", (0,), 0)))
        assert c.n_params == 2

    def test_json_roundtrip(self, tmp_path, rng):
        circuits = [random_circuit(3, 12, rng) for _ in range(5)]
        circuits.append(build_ucc_block(parse_pauli_string("XZY")))
        circuits.append(None)
        path = tmp_path / "c.json"
        dump_circuits(circuits, path)
        assert load_circuits(path) == circuits

    def test_json_field_order(self):
        d = build_ucc_block(parse_pauli_string("XZ")).to_dict()
        assert list(d) == ["n_qubits", "gates"]
        assert list(d["gates"][2])[:3] == ["kind", "qubits", "param_index"]
        json.dumps(d)


class TestLayout:
    def test_disjoint_share_column(self):
        c = Circuit(2, (Gate("H", (0,)), Gate("H", (1,))))
        assert len(layout_columns(c)) == 1

    def test_same_qubit_splits(self):
        c = Circuit(1, (Gate("H", (0,)), Gate("Rz", (0,), 0)))
        assert len(layout_columns(c)) == 2

    def test_ucc_xxyz_columns(self):
        layout = layout_columns(build_ucc_block(parse_pauli_string("XXYZ")))
        kinds = [[(g.kind, g.qubits) for g in col] for col in layout.columns]
        basis = [("H", (0,)), ("H", (1,)), ("Hy", (2,))]
        assert kinds == [basis, [("CX", (0, 1))], [("CX", (1, 2))], [("CX", (2, 3))],
                         [("Rz", (3,))], [("CX", (2, 3))], [("CX", (1, 2))], [("CX", (0, 1))], basis]

    def test_idempotent(self, rng):
        for _ in range(50):
            c = random_circuit(4, 20, rng)
            first = layout_columns(c)
            again = layout_columns(Circuit(4, first.flatten()))
            assert again == first
            for col in first.columns:
                qs = [q for g in col for q in g.qubits]
                assert len(qs) == len(set(qs))
            assert len(first.flatten()) == len(c.gates)


class TestOracles:
    def test_empty_is_identity(self):
        np.testing.assert_array_equal(circuit_unitary(Circuit(2, ())), np.eye(4))

    def test_hadamard(self):
        u = circuit_unitary(Circuit(1, (Gate("H", (0,)),)))
        np.testing.assert_allclose(u, np.array([[1, 1], [1, -1]]) / np.sqrt(2), atol=1e-15)

    def test_cx_bit_order(self):
        u = circuit_unitary(Circuit(2, (Gate("CX", (0, 1)),)))
        expected = np.eye(4)[[0, 1, 3, 2]]
        np.testing.assert_array_equal(u, expected)

    def test_hy_conjugates_y_to_z(self):
        np.testing.assert_allclose(HY @ pauli_matrix("Y") @ HY, pauli_matrix("Z"), atol=1e-15)
        np.testing.assert_allclose(HY @ HY, np.eye(2), atol=1e-15)

    def test_pauli_matrices(self):
        np.testing.assert_array_equal(pauli_matrix("Z"), np.diag([1, -1]))
        np.testing.assert_array_equal(pauli_matrix("XX"), np.fliplr(np.eye(4)))
        np.testing.assert_array_equal(pauli_matrix("Y"), np.array([[0, -1j], [1j, 0]]))

    @settings(max_examples=60, deadline=None)
    @given(st.text(alphabet="IXYZ", min_size=1, max_size=4))
    def test_pauli_involution(self, letters):
        m = pauli_matrix(letters)
        np.testing.assert_allclose(m, m.conj().T, atol=0)
        np.testing.assert_allclose(m @ m, np.eye(2 ** len(letters)), atol=1e-12)

    def test_size_limit(self):
        with pytest.raises(TooManyQubits):
            pauli_matrix("Z" * 7)
        with pytest.raises(TooManyQubits):
            circuit_unitary(Circuit(7, ()))

    def test_unitarity(self, rng):
        for _ in range(30):
            c = random_circuit(4, 25, rng)
            u = circuit_unitary(c, rng.uniform(-3, 3, c.n_params))
            assert np.abs(u.conj().T @ u - np.eye(16)).max() < 1e-12

    def test_bit_order_matches_simulator(self, rng):
        for _ in range(1000):
            n = int(rng.integers(2, 5))
            c = random_circuit(n, int(rng.integers(0, 10)), rng)
            theta = rng.uniform(-3, 3, c.n_params)
            k = int(rng.integers(2**n))
            state = Statevector(n, np.eye(2**n, dtype=complex)[k])
            for g in c.gates:
                state = apply_gate(state, g, theta[g.param_index] if g.kind == "Rz" else None)
            assert np.abs(state.amplitudes - circuit_unitary(c, theta)[:, k]).max() <= 1e-10

    def test_run_circuit_matches_unitary(self, rng):
        for _ in range(100):
            c = random_circuit(4, 15, rng)
            theta = rng.uniform(-3, 3, c.n_params)
            psi = run_circuit(c, theta).amplitudes
            assert np.abs(psi - circuit_unitary(c, theta)[:, 0]).max() <= 1e-10
