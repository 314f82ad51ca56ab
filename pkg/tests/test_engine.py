import math

import numpy as np
import pytest
import scipy.linalg as sla

from conftest import kron_observable, random_observable, random_state_array
from sqoa.encoding import PauliString, observable
from sqoa.engine import (
    Statevector,
    apply_observable,
    apply_single_pauli_mixer,
    expectation,
    expm_apply,
    from_bitstring,
    lanczos_ground,
    pauli_expectation,
    prepare_initial_state,
    sample_counts,
    to_bitstring,
)
from sqoa.errors import ValidationError
from sqoa.graph import Graph, generate_regular_graph, greedy_coloring
from sqoa.encoding import build_encoding, build_relaxed_hamiltonian


def single_edge_packed():
    g = Graph(2, ((0, 1),))
    return build_relaxed_hamiltonian(g, build_encoding(g, greedy_coloring(g), 3))


class TestStatevector:
    def test_norm_enforced(self):
        with pytest.raises(ValidationError):
            Statevector(np.array([1.0, 1.0], dtype=complex), 1)

    def test_shape_enforced(self):
        with pytest.raises(ValidationError):
            Statevector(np.array([1.0, 0.0], dtype=complex), 2)

    def test_bitstring_convention(self):
        # qubit 0 is the least significant bit, printed rightmost
        assert to_bitstring(1, 3) == "001"
        assert to_bitstring(4, 3) == "100"
        assert from_bitstring("001") == 1


class TestInitialStates:
    def test_x_mixer_plus_state(self):
        v = prepare_initial_state(1, "X")
        assert np.allclose(v.amplitudes, [1 / math.sqrt(2)] * 2)

    def test_y_mixer_i_state(self):
        v = prepare_initial_state(1, "Y")
        assert np.allclose(v.amplitudes, [1 / math.sqrt(2), 1j / math.sqrt(2)])

    def test_z_mixer_zero_state(self):
        v = prepare_initial_state(2, "Z")
        expected = np.zeros(4)
        expected[0] = 1.0
        assert np.allclose(v.amplitudes, expected)

    def test_y_state_is_product(self):
        v = prepare_initial_state(3, "Y")
        one = np.array([1, 1j]) / math.sqrt(2)
        prod = np.kron(np.kron(one, one), one)
        assert np.allclose(v.amplitudes, prod)


class TestApply:
    def test_x_flips(self):
        h = observable([(1.0, PauliString.from_label("X"))], 0.0, 1)
        v = Statevector(np.array([1, 0], dtype=complex), 1)
        assert np.allclose(apply_observable(h, v), [0, 1])

    def test_y_phase(self):
        h = observable([(1.0, PauliString.from_label("Y"))], 0.0, 1)
        v = Statevector(np.array([1, 0], dtype=complex), 1)
        assert np.allclose(apply_observable(h, v), [0, 1j])

    def test_single_edge_action_on_00(self):
        h = single_edge_packed()
        v = Statevector(np.array([1, 0, 0, 0], dtype=complex), 2)
        assert np.allclose(apply_observable(h, v), [-0.5, 0, 0, 1.5])

    def test_matches_kron_oracle(self):
        rng = np.random.default_rng(10)
        for _ in range(40):
            nq = int(rng.integers(1, 6))
            h = random_observable(rng, nq, int(rng.integers(1, 10)))
            arr = random_state_array(rng, nq)
            out = apply_observable(h, Statevector(arr, nq))
            assert np.allclose(out, kron_observable(h) @ arr, atol=1e-12)

    def test_width_mismatch(self):
        h = single_edge_packed()
        with pytest.raises(ValidationError):
            apply_observable(h, prepare_initial_state(3, "X"))


class TestExpectation:
    def test_plus_x_plus(self):
        h = observable([(1.0, PauliString.from_label("X"))], 0.0, 1)
        assert expectation(h, prepare_initial_state(1, "X")) == pytest.approx(1.0)

    def test_zero_zero_on_single_edge(self):
        h = single_edge_packed()
        v = Statevector(np.array([1, 0, 0, 0], dtype=complex), 2)
        assert expectation(h, v) == pytest.approx(-0.5)

    def test_variational_bound_over_random_states(self):
        rng = np.random.default_rng(11)
        h = random_observable(rng, 4, 8)
        e_min = np.linalg.eigvalsh(kron_observable(h))[0]
        for _ in range(100):
            v = Statevector(random_state_array(rng, 4), 4)
            assert expectation(h, v) >= e_min - 1e-10

    def test_pauli_expectation_matches_dense(self):
        rng = np.random.default_rng(12)
        for _ in range(30):
            nq = int(rng.integers(1, 5))
            ps = PauliString(int(rng.integers(1 << nq)), int(rng.integers(1 << nq)), nq)
            arr = random_state_array(rng, nq)
            from conftest import kron_string

            dense = np.vdot(arr, kron_string(ps) @ arr).real
            assert pauli_expectation(Statevector(arr, nq), ps) == pytest.approx(dense, abs=1e-12)


class TestExpmApply:
    def test_zero_time_identity(self):
        h = single_edge_packed()
        v = prepare_initial_state(2, "X")
        w = expm_apply(h, 0.0, v)
        assert np.allclose(w.amplitudes, v.amplitudes)

    def test_x_half_pi(self):
        h = observable([(1.0, PauliString.from_label("X"))], 0.0, 1)
        v = Statevector(np.array([1, 0], dtype=complex), 1)
        w = expm_apply(h, math.pi / 2, v)
        assert np.allclose(w.amplitudes, [0, -1j], atol=1e-12)

    def test_single_edge_vs_dense(self):
        h = single_edge_packed()
        v = Statevector(np.array([1, 0, 0, 0], dtype=complex), 2)
        w = expm_apply(h, 0.37, v, tol=1e-10)
        dense = sla.expm(-1j * 0.37 * kron_observable(h)) @ v.amplitudes
        assert np.linalg.norm(w.amplitudes - dense) < 1e-10

    def test_krylov_vs_dense_random(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            nq = int(rng.integers(1, 7))
            h = random_observable(rng, nq, int(rng.integers(1, 12)))
            arr = random_state_array(rng, nq)
            t = float(rng.uniform(-3, 3))
            w = expm_apply(h, t, Statevector(arr, nq), tol=1e-10)
            dense = sla.expm(-1j * t * kron_observable(h)) @ arr
            assert np.linalg.norm(w.amplitudes - dense) < 1e-8

    def test_norm_preserved(self):
        rng = np.random.default_rng(14)
        for _ in range(10):
            h = random_observable(rng, 5, 8)
            v = Statevector(random_state_array(rng, 5), 5)
            w = expm_apply(h, float(rng.uniform(-4, 4)), v, tol=1e-10)
            assert abs(np.linalg.norm(w.amplitudes) - 1.0) < 1e-10

    def test_energy_conserved(self):
        rng = np.random.default_rng(15)
        for _ in range(10):
            h = random_observable(rng, 5, 8)
            v = Statevector(random_state_array(rng, 5), 5)
            w = expm_apply(h, float(rng.uniform(-4, 4)), v, tol=1e-10)
            assert expectation(h, w) == pytest.approx(expectation(h, v), abs=1e-9)

    def test_rejects_nonpositive_tol(self):
        h = single_edge_packed()
        with pytest.raises(ValidationError):
            expm_apply(h, 0.1, prepare_initial_state(2, "X"), tol=0.0)


class TestMixer:
    def test_zero_angle_identity(self):
        v = prepare_initial_state(3, "Y")
        w = apply_single_pauli_mixer("X", 0.0, v)
        assert np.allclose(w.amplitudes, v.amplitudes)

    def test_x_half_pi_on_00(self):
        v = Statevector(np.array([1, 0, 0, 0], dtype=complex), 2)
        w = apply_single_pauli_mixer("X", math.pi / 2, v)
        expected = np.zeros(4, dtype=complex)
        expected[3] = -1.0  # (-i)^2
        assert np.allclose(w.amplitudes, expected, atol=1e-12)

    def test_matches_expm_on_pauli_sum(self):
        rng = np.random.default_rng(16)
        for mixer in ("X", "Y", "Z"):
            h = observable(
                [(1.0, PauliString.single(q, mixer, 4)) for q in range(4)], 0.0, 4
            )
            for _ in range(5):
                beta = float(rng.uniform(-3, 3))
                v = Statevector(random_state_array(rng, 4), 4)
                direct = apply_single_pauli_mixer(mixer, beta, v)
                via_expm = expm_apply(h, beta, v, tol=1e-12)
                assert np.linalg.norm(direct.amplitudes - via_expm.amplitudes) < 1e-10


class TestLanczosGround:
    def test_single_edge_ground(self):
        energy, state = lanczos_ground(single_edge_packed(), seed=0, tol=1e-10)
        assert energy == pytest.approx(-2.0, abs=1e-9)
        assert abs(np.linalg.norm(state.amplitudes) - 1.0) < 1e-9

    def test_k4_ising_equals_negative_maxcut(self):
        g = generate_regular_graph(4, 3, 0)
        h = build_relaxed_hamiltonian(g, build_encoding(g, greedy_coloring(g), 1))
        energy, _ = lanczos_ground(h, seed=1, tol=1e-10)
        assert energy == pytest.approx(-4.0, abs=1e-9)

    def test_offset_only(self):
        h = observable([], 2.5, 3)
        energy, state = lanczos_ground(h, seed=2, tol=1e-10)
        assert energy == pytest.approx(2.5, abs=1e-12)
        assert abs(np.linalg.norm(state.amplitudes) - 1.0) < 1e-9

    def test_matches_dense_diagonalization(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            nq = int(rng.integers(1, 7))
            h = random_observable(rng, nq, int(rng.integers(1, 12)))
            energy, state = lanczos_ground(h, seed=int(rng.integers(1 << 30)), tol=1e-10)
            dense = np.linalg.eigvalsh(kron_observable(h))[0]
            assert abs(energy - dense) < 1e-8
            resid = np.linalg.norm(
                kron_observable(h) @ state.amplitudes - energy * state.amplitudes
            )
            assert resid < 1e-8

    def test_qubit_cap(self):
        h = observable([(1.0, PauliString.from_label("X" * 5))], 0.0, 5)
        with pytest.raises(ValidationError):
            lanczos_ground(h, max_qubits=4)


class TestSampling:
    def test_deterministic_state_all_counts_on_00(self):
        v = Statevector(np.array([1, 0, 0, 0], dtype=complex), 2)
        s = sample_counts(v, 1000, seed=3)
        assert s.counts == {"00": 1000}

    def test_plus_state_three_sigma(self):
        v = prepare_initial_state(1, "X")
        s = sample_counts(v, 10**6, seed=42)
        assert abs(s.counts["0"] - 500_000) < 3 * 500

    def test_seed_determinism(self):
        v = prepare_initial_state(4, "X")
        a = sample_counts(v, 5000, seed=9)
        b = sample_counts(v, 5000, seed=9)
        assert a.counts == b.counts

    def test_shot_conservation_over_random_states(self):
        rng = np.random.default_rng(18)
        for trial in range(100):
            nq = int(rng.integers(1, 5))
            v = Statevector(random_state_array(rng, nq), nq)
            s = sample_counts(v, 50, seed=trial)
            assert sum(s.counts.values()) == s.shots == 50

    def test_rejects_zero_shots(self):
        with pytest.raises(ValidationError):
            sample_counts(prepare_initial_state(1, "X"), 0)
