"""Unit tests for the state-vector circuit engine."""

import math

import numpy as np
import pytest

from qmf import amplify, qsim
from qmf.errors import CapExceededError, ValidationError


def random_state(num_qubits, seed):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=1 << num_qubits) + 1j * rng.normal(size=1 << num_qubits)
    amps /= np.linalg.norm(amps)
    return qsim.StateVector(num_qubits, amps)


def dense_fourier(p):
    d = 1 << p
    grid = np.outer(np.arange(d), np.arange(d))
    return np.exp(2j * np.pi * grid / d) / math.sqrt(d)


class TestLayout:
    def test_standard_layout(self):
        lay = qsim.RegisterLayout.standard(6, 5)
        assert (list(lay.template), lay.ancilla, list(lay.counting)) == (
            list(range(6)), 6, list(range(7, 12)))
        assert lay.num_qubits == 12

    def test_overlap_rejected(self):
        with pytest.raises(ValidationError):
            qsim.RegisterLayout(template=range(0, 3), ancilla=2, counting=range(3, 4))

    def test_gap_rejected(self):
        with pytest.raises(ValidationError):
            qsim.RegisterLayout(template=range(0, 3), ancilla=4, counting=range(5, 6))


class TestInitState:
    def test_two_qubit_template_uniform(self):
        state = qsim.init_state(qsim.RegisterLayout.standard(2, 0))
        probs = qsim.marginal_probs(state, range(0, 2))
        np.testing.assert_allclose(probs, 0.25, atol=1e-15)
        # ancilla in |->: equal weight, opposite sign
        v = state.amps.reshape(2, 4)
        np.testing.assert_allclose(v[1], -v[0], atol=1e-15)

    def test_full_register_uniform_modulus(self):
        state = qsim.init_state(qsim.RegisterLayout.standard(6, 5))
        assert state.amps.size == 1 << 12
        np.testing.assert_allclose(np.abs(state.amps) ** 2, 2.0**-12, atol=1e-15)

    def test_norm(self):
        state = qsim.init_state(qsim.RegisterLayout.standard(4, 3))
        assert state.norm_sq() == pytest.approx(1.0, abs=1e-12)

    def test_cap(self):
        with pytest.raises(CapExceededError):
            qsim.init_state(qsim.RegisterLayout.standard(20, 10), cap=26)


class TestApplyGate:
    def test_h_involution(self):
        state = random_state(4, 1)
        ref = state.amps.copy()
        qsim.apply_gate(state, "H", 2)
        qsim.apply_gate(state, "H", 2)
        np.testing.assert_allclose(state.amps, ref, atol=1e-12)

    def test_x_flips_basis_state(self):
        amps = np.zeros(2, complex)
        amps[0] = 1.0
        state = qsim.StateVector(1, amps)
        qsim.apply_gate(state, "X", 0)
        np.testing.assert_allclose(state.amps, [0.0, 1.0])

    def test_cnot_truth_table(self):
        for control_val, expect_flip in ((0, False), (1, True)):
            amps = np.zeros(4, complex)
            amps[control_val << 1] = 1.0  # qubit 1 is the control
            state = qsim.StateVector(2, amps)
            qsim.apply_gate(state, "CNOT", 0, controls=[1])
            target = (control_val << 1) | (1 if expect_flip else 0)
            assert state.amps[target] == 1.0

    def test_mcz_matches_dense_matrix(self):
        state = random_state(4, 2)
        ref = state.amps.copy()
        qsim.apply_gate(state, "MCZ", [0], controls=[1, 2, 3])
        dense = np.eye(16, dtype=complex)
        dense[15, 15] = -1.0
        np.testing.assert_allclose(state.amps, dense @ ref, atol=1e-12)

    def test_mcx_matches_dense_matrix(self):
        state = random_state(3, 3)
        ref = state.amps.copy()
        qsim.apply_gate(state, "MCX", 0, controls=[1, 2])
        dense = np.eye(8, dtype=complex)
        dense[[6, 7], [6, 7]] = 0.0
        dense[6, 7] = dense[7, 6] = 1.0
        np.testing.assert_allclose(state.amps, dense @ ref, atol=1e-12)

    def test_index_collision_rejected(self):
        state = random_state(3, 4)
        with pytest.raises(ValidationError):
            qsim.apply_gate(state, "CNOT", 1, controls=[1])

    def test_unknown_gate(self):
        with pytest.raises(ValidationError):
            qsim.apply_gate(random_state(2, 5), "T", 0)


class TestStringOracle:
    def test_two_low_bit_variants_flip(self):
        layout = qsim.RegisterLayout.standard(6, 0)
        spec = qsim.StringOracleSpec("000110", 1)
        state = qsim.init_state(layout)
        ref = state.amps.copy()
        qsim.string_oracle(state, layout, spec)
        signs = (state.amps / ref).reshape(2, 64).real
        flipped = sorted(set(np.flatnonzero(np.isclose(signs[0], -1.0)).tolist()))
        assert flipped == [6, 7]
        assert sorted(spec.matching_states().tolist()) == [6, 7]

    def test_ignore_all_flips_everything(self):
        layout = qsim.RegisterLayout.standard(3, 0)
        state = qsim.init_state(layout)
        ref = state.amps.copy()
        qsim.string_oracle(state, layout, qsim.StringOracleSpec("101", 3))
        np.testing.assert_allclose(state.amps, -ref, atol=1e-14)

    def test_exact_match_equals_dense_oracle(self):
        # dense reference: X fold/sandwich layers around an MCX unitary
        layout = qsim.RegisterLayout.standard(4, 0)
        spec = qsim.StringOracleSpec("1011", 0)
        state = random_state(5, 6)
        ref = state.amps.copy()
        qsim.string_oracle(state, layout, spec)

        def x_on(bits):
            m = np.eye(1)
            for q in reversed(range(5)):
                m = np.kron(m, np.array([[0, 1], [1, 0]]) if q in bits else np.eye(2))
            return m

        data = 0b1011
        fold = x_on([j for j in range(4) if (data >> j) & 1])
        sandwich = x_on(range(4))
        mcx = np.eye(32)
        a, b = 0b01111, 0b11111  # all template bits set, ancilla 0/1
        mcx[[a, b], [a, b]] = 0.0
        mcx[a, b] = mcx[b, a] = 1.0
        u = fold @ sandwich @ mcx @ sandwich @ fold
        np.testing.assert_allclose(state.amps, u @ ref, atol=1e-12)

    def test_phase_flip_on_prepared_ancilla_matches_diagonal(self):
        # with the ancilla prepared in |->, the oracle acts as the
        # diagonal +-1 operator on the template register
        layout = qsim.RegisterLayout.standard(4, 0)
        spec = qsim.StringOracleSpec("1011", 0)
        state = qsim.init_state(layout)
        ref = state.amps.copy()
        qsim.string_oracle(state, layout, spec)
        signs = np.ones(16)
        signs[0b1011] = -1.0
        np.testing.assert_allclose(state.amps.reshape(2, 16), ref.reshape(2, 16) * signs,
                                   atol=1e-12)

    def test_involution(self):
        layout = qsim.RegisterLayout.standard(5, 2)
        spec = qsim.StringOracleSpec("01101", 1)
        state = qsim.init_state(layout)
        ref = state.amps.copy()
        qsim.string_oracle(state, layout, spec)
        qsim.string_oracle(state, layout, spec)
        np.testing.assert_allclose(state.amps, ref, atol=1e-12)


class TestDiffusion:
    def test_uniform_state_is_fixed_point(self):
        layout = qsim.RegisterLayout.standard(3, 0)
        state = qsim.init_state(layout)
        ref = state.amps.copy()
        qsim.diffusion(state, layout)
        np.testing.assert_allclose(state.amps, ref, atol=1e-12)

    def test_involution(self):
        layout = qsim.RegisterLayout.standard(3, 0)
        state = random_state(4, 7)
        ref = state.amps.copy()
        qsim.diffusion(state, layout)
        qsim.diffusion(state, layout)
        np.testing.assert_allclose(state.amps, ref, atol=1e-12)

    def test_matches_dense_reflection(self):
        layout = qsim.RegisterLayout.standard(3, 0)
        state = random_state(4, 8)
        ref = state.amps.reshape(2, 8).copy()
        qsim.diffusion(state, layout)
        dense = 2.0 / 8.0 * np.ones((8, 8)) - np.eye(8)
        np.testing.assert_allclose(state.amps.reshape(2, 8), ref @ dense.T, atol=1e-12)


class TestGroverIteration:
    def test_four_entry_search_is_exact(self):
        layout = qsim.RegisterLayout.standard(2, 0)
        state = qsim.init_state(layout)
        qsim.grover_iteration(state, layout, qsim.StringOracleSpec("11", 0))
        probs = qsim.marginal_probs(state, layout.template)
        np.testing.assert_allclose(probs, [0, 0, 0, 1.0], atol=1e-12)

    def test_marked_probability_matches_analytic(self):
        state, layout = qsim.search_state(6, 1, "000110", 4)
        probs = qsim.marginal_probs(state, layout.template)
        marked = probs[[6, 7]].sum()
        expected = amplify.p_match(amplify.theta_of(64, 2), 4)
        assert marked == pytest.approx(expected, abs=1e-9)

    def test_state_stays_in_matched_unmatched_plane(self):
        state, layout = qsim.search_state(6, 1, "000110", 3)
        block = state.amps.reshape(2, 64)[0]  # ancilla-0 block
        matched = block[[6, 7]]
        unmatched = np.delete(block, [6, 7])
        assert np.std(matched) < 1e-10
        assert np.std(unmatched) < 1e-10


class TestControlledPowers:
    def test_single_counting_qubit_interference(self):
        # one controlled iteration: after the 1-qubit inverse transform
        # the counting qubit reads cos^2(theta) / sin^2(theta)
        state, layout = qsim.counting_state(4, 1, "0110", 1)
        probs = qsim.marginal_probs(state, layout.counting)
        theta = amplify.theta_of(16, 2)
        np.testing.assert_allclose(
            probs, [math.cos(theta) ** 2, math.sin(theta) ** 2], atol=1e-9
        )

    def test_ladder_applies_geometric_sum_of_iterations(self, monkeypatch):
        calls = []
        original = qsim.grover_iteration

        def spy(state, layout, spec, control=None):
            calls.append(control)
            return original(state, layout, spec, control)

        monkeypatch.setattr(qsim, "grover_iteration", spy)
        layout = qsim.RegisterLayout.standard(3, 5)
        state = qsim.init_state(layout)
        qsim.controlled_grover_powers(state, layout, qsim.StringOracleSpec("011", 0))
        assert len(calls) == 31
        assert all(c is not None for c in calls)

    def test_distribution_depends_only_on_match_count(self):
        a, lay = qsim.counting_state(4, 1, "0101", 4)
        b, _ = qsim.counting_state(4, 1, "1010", 4)
        np.testing.assert_allclose(
            qsim.marginal_probs(a, lay.counting),
            qsim.marginal_probs(b, lay.counting), atol=1e-12)


class TestQft:
    def test_round_trip(self):
        state = random_state(4, 9)
        ref = state.amps.copy()
        qsim.qft(state, range(4))
        qsim.inverse_qft(state, range(4))
        np.testing.assert_allclose(state.amps, ref, atol=1e-12)

    def test_zero_state_maps_to_uniform(self):
        amps = np.zeros(8, complex)
        amps[0] = 1.0
        state = qsim.StateVector(3, amps)
        qsim.qft(state, range(3))
        np.testing.assert_allclose(state.amps, 1 / math.sqrt(8), atol=1e-12)

    def test_matches_dense_matrices(self):
        f = dense_fourier(3)
        state = random_state(3, 10)
        ref = state.amps.copy()
        qsim.qft(state, range(3))
        np.testing.assert_allclose(state.amps, f @ ref, atol=1e-12)
        state2 = qsim.StateVector(3, ref.copy())
        qsim.inverse_qft(state2, range(3))
        np.testing.assert_allclose(state2.amps, np.conj(f) @ ref, atol=1e-12)

    def test_embedded_register(self):
        state = random_state(6, 11)
        ref = state.amps.reshape(8, 8).copy()  # axis 0: qubits 3..5
        qsim.inverse_qft(state, range(3, 6))
        np.testing.assert_allclose(
            state.amps.reshape(8, 8), np.conj(dense_fourier(3)) @ ref, atol=1e-12)


class TestMeasure:
    def test_deterministic_state(self):
        amps = np.zeros(8, complex)
        amps[5] = 1.0
        state = qsim.StateVector(3, amps)
        result = qsim.measure(state, range(0, 3), 100, np.random.default_rng(0))
        assert result.counts == {"101": 100}

    def test_uniform_marginal_within_three_sigma(self):
        state = qsim.init_state(qsim.RegisterLayout.standard(2, 0))
        result = qsim.measure(state, range(0, 2), 100_000, np.random.default_rng(1))
        sigma = math.sqrt(0.25 * 0.75 / 100_000)
        for c in result.counts.values():
            assert abs(c / 100_000 - 0.25) < 3 * sigma

    def test_counting_marginal_equals_analytic_distribution(self):
        state, layout = qsim.counting_state(6, 1, "000110", 5)
        probs = qsim.marginal_probs(state, layout.counting)
        expected = amplify.counting_distribution(64, 2, 5).probs
        np.testing.assert_allclose(probs, expected, atol=1e-9)

    def test_shot_frequencies_converge_to_marginals(self):
        state, layout = qsim.counting_state(5, 1, "00110", 5)
        probs = qsim.marginal_probs(state, layout.counting)
        shots = 200_000
        result = qsim.measure(state, layout.counting, shots, np.random.default_rng(2))
        for b, prob in enumerate(probs):
            if prob < 1e-12:
                continue
            sigma = math.sqrt(prob * (1 - prob) / shots)
            freq = result.counts.get(format(b, "05b"), 0) / shots
            assert abs(freq - prob) < 5 * sigma + 1e-9

    def test_shots_validated(self):
        state = qsim.init_state(qsim.RegisterLayout.standard(2, 0))
        with pytest.raises(ValidationError):
            qsim.measure(state, range(0, 2), 0, np.random.default_rng(0))


class TestEndToEnd:
    def test_counting_modes_at_conjugate_pair(self):
        state, layout = qsim.counting_state(6, 1, "000110", 5)
        probs = qsim.marginal_probs(state, layout.counting)
        assert int(np.argmax(probs)) in (2, 30)
        assert probs[2] == pytest.approx(probs[30], abs=1e-12)

    def test_single_match_five_bits(self):
        state, layout = qsim.counting_state(5, 0, "00110", 5)
        probs = qsim.marginal_probs(state, layout.counting)
        assert int(np.argmax(probs)) in (2, 30)

    def test_ignore_all_concentrates_at_half_register(self):
        state, layout = qsim.counting_state(3, 3, "000", 4)
        probs = qsim.marginal_probs(state, layout.counting)
        assert probs[8] == pytest.approx(1.0, abs=1e-9)

    def test_search_recovers_matching_pair(self):
        rng = np.random.default_rng(3)
        result = qsim.run_search_circuit(6, 1, "000110", 4, 2048, rng)
        hits = result.counts.get("000110", 0) + result.counts.get("000111", 0)
        assert hits / 2048 > 0.99 - 3 * math.sqrt(0.99 * 0.01 / 2048)

    def test_search_success_probability_low_iteration_case(self):
        state, layout = qsim.search_state(5, 2, "00110", 1)
        probs = qsim.marginal_probs(state, layout.template)
        success = probs[qsim.StringOracleSpec("00110", 2).matching_states()].sum()
        assert success == pytest.approx(amplify.p_match(amplify.theta_of(32, 4), 1),
                                        abs=1e-12)
        assert success == pytest.approx(0.7885, abs=0.03)

    def test_zero_iterations_is_uniform(self):
        state, layout = qsim.search_state(4, 1, "0011", 0)
        probs = qsim.marginal_probs(state, layout.template)
        np.testing.assert_allclose(probs, 1 / 16, atol=1e-12)

    def test_norm_preserved_through_deep_circuit(self):
        state, layout = qsim.counting_state(6, 1, "000110", 7)
        assert abs(state.norm_sq() - 1.0) < 1e-10

    def test_register_cap(self):
        with pytest.raises(CapExceededError):
            qsim.run_counting_circuit(20, 0, "0" * 20, 10, 1,
                                      np.random.default_rng(0), cap=26)
