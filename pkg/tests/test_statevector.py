"""Tests for the dense statevector and gate application kernels."""

import numpy as np
import pytest

from loschmidt.statevector import (
    Circuit,
    LocalGate,
    StateVector,
    apply_gate,
    apply_layer,
    apply_matrix,
    inner_product,
    pack_layers,
    product_state,
)

RNG = np.random.default_rng(20240817)

X = np.array([[0, 1], [1, 0]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def random_state(n, rng=RNG):
    amps = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return StateVector(n, amps / np.linalg.norm(amps))


def random_unitary(dim, rng=RNG):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def embed_dense(matrix, sites, n):
    """Independent oracle: embed a local matrix into the full 2^n space by
    summing over basis transitions."""
    k = len(sites)
    full = np.zeros((2**n, 2**n), dtype=complex)
    for col in range(2**n):
        loc = sum(((col >> s) & 1) << j for j, s in enumerate(sites))
        base = col
        for s in sites:
            base &= ~(1 << s)
        for locp in range(2**k):
            row = base
            for j, s in enumerate(sites):
                row |= ((locp >> j) & 1) << s
            full[row, col] += matrix[locp, loc]
    return full


class TestProductState:
    def test_single_up(self):
        state = product_state(["up"])
        assert np.allclose(state.amplitudes, [1, 0])

    def test_two_up(self):
        state = product_state(["up", "up"])
        expected = np.zeros(4)
        expected[0] = 1
        assert np.allclose(state.amplitudes, expected)

    def test_x_plus(self):
        state = product_state(["x+"])
        assert np.allclose(state.amplitudes, [1 / np.sqrt(2), 1 / np.sqrt(2)])

    def test_down_sets_site_bit(self):
        # site 1 down -> amplitude at index 2 (bit 1 set)
        state = product_state(["up", "down", "up"])
        assert state.amplitudes[2] == 1.0

    def test_zero_qubits(self):
        with pytest.raises(ValueError, match="zero qubits"):
            product_state([])

    def test_norm_one(self):
        state = product_state(["x+", "y-", "down", [0.6, 0.8j]])
        assert abs(state.norm() - 1.0) < 1e-12


class TestApplyGate:
    def test_identity(self):
        state = random_state(3)
        gate = LocalGate((1,), np.eye(2))
        out = apply_gate(state, gate)
        assert np.allclose(out.amplitudes, state.amplitudes)

    def test_pauli_x_site0(self):
        state = product_state(["up", "up"])
        out = apply_gate(state, LocalGate((0,), X))
        expected = np.zeros(4)
        expected[1] = 1
        assert np.allclose(out.amplitudes, expected)

    def test_hadamard_involution(self):
        state = random_state(4)
        gate = LocalGate((0,), H)
        out = apply_gate(apply_gate(state, gate), gate)
        assert np.max(np.abs(out.amplitudes - state.amplitudes)) < 1e-12

    def test_out_of_range(self):
        state = random_state(2)
        with pytest.raises(ValueError, match="out of range"):
            apply_gate(state, LocalGate((2,), X))

    def test_duplicate_sites(self):
        state = random_state(2)
        with pytest.raises(ValueError, match="distinct"):
            LocalGate((1, 1), np.eye(4))
        with pytest.raises(ValueError, match="duplicate"):
            apply_matrix(state, np.eye(4), (1, 1))

    def test_matches_dense_embedding(self):
        # locality oracle: gate application == dense 2^N x 2^N matrix action
        for n in range(2, 7):
            state = random_state(n)
            for _ in range(4):
                k = int(RNG.integers(1, 3))
                sites = tuple(RNG.choice(n, size=k, replace=False))
                mat = random_unitary(2**k)
                out = apply_matrix(state, mat, sites)
                expected = embed_dense(mat, sites, n) @ state.amplitudes
                assert np.max(np.abs(out.amplitudes - expected)) < 1e-12

    def test_norm_preservation(self):
        for _ in range(10):
            n = int(RNG.integers(1, 7))
            state = random_state(n)
            k = min(n, int(RNG.integers(1, 3)))
            sites = tuple(RNG.choice(n, size=k, replace=False))
            gate = LocalGate(sites, random_unitary(2**k))
            out = apply_gate(state, gate)
            assert abs(out.norm() - 1.0) < 1e-10

    def test_disjoint_supports_commute(self):
        for n in (4, 6):
            state = random_state(n)
            g1 = LocalGate((0, 1), random_unitary(4))
            g2 = LocalGate((n - 2, n - 1), random_unitary(4))
            ab = apply_gate(apply_gate(state, g1), g2)
            ba = apply_gate(apply_gate(state, g2), g1)
            assert np.max(np.abs(ab.amplitudes - ba.amplitudes)) < 1e-12

    def test_nonunitary_flag_enforced(self):
        with pytest.raises(ValueError, match="unitar"):
            LocalGate((0,), np.array([[1, 0], [0, 2.0]]))
        # allowed when flagged non-unitary
        LocalGate((0,), np.array([[1, 0], [0, 2.0]]), unitary=False)


class TestInnerProduct:
    def test_self_overlap(self):
        state = random_state(5)
        assert abs(inner_product(state, state) - 1.0) < 1e-12

    def test_orthogonal(self):
        up = product_state(["up"])
        down = product_state(["down"])
        assert inner_product(up, down) == 0

    def test_conjugate_symmetry(self):
        for _ in range(5):
            a, b = random_state(4), random_state(4)
            assert abs(inner_product(a, b) - np.conj(inner_product(b, a))) < 1e-12

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            inner_product(random_state(2), random_state(3))


class TestLayers:
    def test_pack_layers_brickwork(self):
        gates = [LocalGate((i, i + 1), np.eye(4)) for i in range(5)]
        layers = pack_layers(gates)
        assert [len(l) for l in layers] == [3, 2]

    def test_pack_layers_ordered_preserves_overlap_order(self):
        gates = [LocalGate((i, i + 1), np.eye(4)) for i in range(3)]
        layers = pack_layers(gates, ordered=True)
        assert [len(l) for l in layers] == [1, 1, 1]

    def test_layer_disjointness_enforced(self):
        g = LocalGate((0, 1), np.eye(4))
        with pytest.raises(ValueError, match="overlapping"):
            Circuit(3, layers=[[g, LocalGate((1,), np.eye(2))]])

    def test_apply_layer_equals_sequential(self):
        state = random_state(4)
        layer = [LocalGate((0, 1), random_unitary(4)), LocalGate((2, 3), random_unitary(4))]
        out = apply_layer(state, layer)
        seq = apply_gate(apply_gate(state, layer[0]), layer[1])
        assert np.allclose(out.amplitudes, seq.amplitudes)
