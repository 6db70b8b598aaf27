"""Noise channels, evolution, measurement, and distribution metrics."""

import math

import numpy as np
import pytest

from vqslack.circuit import Gate, GateKind, TimedGate, schedule_alap, unitary_of
from vqslack.noise import NoiseModel, NoiseModelError
from vqslack.sim import (
    CountsDistribution,
    DensityMatrix,
    SimulationError,
    apply_gate,
    apply_idle,
    evolve,
    hellinger_fidelity,
    measure_distribution,
    pauli_expectation,
    sample_distribution,
)
from conftest import random_gate_list


def bell_circuit():
    gates = [Gate(GateKind.H, (0,)), Gate(GateKind.CX, (0, 1))]
    return schedule_alap(gates, 2)


class TestNoiseModel:
    def test_t2_bound_enforced(self):
        with pytest.raises(NoiseModelError, match="2\\*T1"):
            NoiseModel(n_qubits=1, t1=50e-6, t2=150e-6)

    def test_file_round_trip(self, tmp_path):
        nm = NoiseModel.default(3)
        path = tmp_path / "noise.json"
        nm.save(path)
        back = NoiseModel.load(path)
        assert back.n_qubits == 3
        assert np.allclose(back.t1, nm.t1)
        assert back.detuning_mode == nm.detuning_mode
        assert np.allclose(back.readout_p01, nm.readout_p01)
        assert back.durations == nm.durations

    def test_infinite_times_round_trip(self, tmp_path):
        nm = NoiseModel.noiseless(2)
        path = tmp_path / "noise.json"
        nm.save(path)
        back = NoiseModel.load(path)
        assert np.all(np.isinf(back.t1)) and np.all(np.isinf(back.t2))

    def test_missing_file(self, tmp_path):
        with pytest.raises(NoiseModelError, match="not found"):
            NoiseModel.load(tmp_path / "nope.json")

    def test_dephasing_rate_clamped(self):
        nm = NoiseModel(n_qubits=1, t1=50e-6, t2=100e-6)  # T2 = 2 T1: pure damping
        assert nm.dephasing_rate(0) == 0.0


class TestApplyGate:
    def test_ideal_x_flips(self):
        nm = NoiseModel.noiseless(1)
        rho = DensityMatrix.ground(1)
        g = TimedGate(GateKind.X, (0,), 0, 1)
        out = apply_gate(rho, g, nm)
        assert out.data[1, 1] == pytest.approx(1.0)

    def test_full_depolarizing_mixes(self):
        nm = NoiseModel.noiseless(1)
        nm.p_1q = 1.0
        rho = DensityMatrix.ground(1)
        out = apply_gate(rho, TimedGate(GateKind.X, (0,), 0, 1), nm)
        assert np.allclose(out.data, np.eye(2) / 2)

    def test_depolarizing_closed_form(self):
        # D_p(|1><1|) with p = 0.1 keeps <1|rho|1> = 0.95
        nm = NoiseModel.noiseless(1)
        nm.p_1q = 0.1
        rho = DensityMatrix.ground(1)
        out = apply_gate(rho, TimedGate(GateKind.X, (0,), 0, 1), nm)
        assert out.data[1, 1].real == pytest.approx(0.95)
        out.validate()


class TestApplyIdle:
    def test_zero_time_is_identity(self):
        nm = NoiseModel.default(1)
        rho = DensityMatrix.ground(1)
        out = apply_idle(rho, 0, 0.0, nm)
        assert np.array_equal(out.data, rho.data)

    def test_t1_half_life(self):
        t1 = 80e-6
        nm = NoiseModel(n_qubits=1, t1=t1, t2=2 * t1 * (1 - 1e-15))
        excited = DensityMatrix(1, np.diag([0.0, 1.0]).astype(complex))
        out = apply_idle(excited, 0, t1 * math.log(2), nm)
        assert out.data[1, 1].real == pytest.approx(0.5, abs=1e-12)

    def test_dephasing_decay_at_t2(self):
        # T1 = inf: coherence decays as exp(-t/T2); at t = T2 it is e^-1 / 2
        t2 = 70e-6
        nm = NoiseModel(n_qubits=1, t1=np.inf, t2=t2)
        plus = DensityMatrix(1, np.full((2, 2), 0.5, dtype=complex))
        out = apply_idle(plus, 0, t2, nm)
        assert abs(out.data[0, 1]) == pytest.approx(math.exp(-1) / 2, abs=1e-12)

    def test_detuning_phase(self):
        nm = NoiseModel.noiseless(1)
        plus = DensityMatrix(1, np.full((2, 2), 0.5, dtype=complex))
        out = apply_idle(plus, 0, 1e-6, nm, omega_realized=2 * np.pi * 1e5)
        expected_phase = 2 * np.pi * 1e5 * 1e-6
        assert out.data[0, 1] == pytest.approx(0.5 * np.exp(-1j * expected_phase))


class TestEvolve:
    def test_noiseless_h_gives_plus(self):
        nm = NoiseModel.noiseless(1)
        tc = schedule_alap([Gate(GateKind.H, (0,))], 1)
        rho = evolve(tc, [], nm)
        assert np.allclose(rho.data, np.full((2, 2), 0.5))

    def test_matches_unitary_conjugation_on_random_circuits(self, rng):
        for _ in range(25):
            n = int(rng.integers(1, 5))
            gates = random_gate_list(rng, n, int(rng.integers(1, 18)))
            tc = schedule_alap(gates, n)
            nm = NoiseModel.noiseless(n)
            params = rng.uniform(-np.pi, np.pi, len(tc.parameters))
            rho = evolve(tc, params, nm)
            u = unitary_of(tc, params)
            expect = np.outer(u[:, 0], u[:, 0].conj())
            # trace distance below 1e-9
            diff = rho.data - expect
            tdist = 0.5 * np.abs(np.linalg.eigvalsh(diff)).sum()
            assert tdist < 1e-9

    def test_channel_invariants_hold_under_default_noise(self, rng):
        nm = NoiseModel.default(3)
        gates = random_gate_list(rng, 3, 14)
        tc = schedule_alap(gates, 3, nm.durations)
        params = rng.uniform(-np.pi, np.pi, len(tc.parameters))
        rho = evolve(tc, params, nm, seed=5)
        rho.validate(atol=1e-9)

    def test_systematic_mode_single_realization(self):
        nm = NoiseModel(n_qubits=1, t1=np.inf, t2=np.inf, detuning_mode="systematic",
                        detuning_omega=1e4, realizations=17)
        tc = schedule_alap([Gate(GateKind.H, (0,)), Gate(GateKind.MEASURE, (0,))], 1)
        a = evolve(tc, [], nm, seed=0)
        b = evolve(tc, [], nm, seed=99)  # seed is irrelevant without sampling
        assert np.array_equal(a.data, b.data)

    def test_quasi_static_seeded_determinism(self):
        nm = NoiseModel.default(2)
        tc = bell_circuit()
        a = evolve(tc, [], nm, seed=7)
        b = evolve(tc, [], nm, seed=7)
        c = evolve(tc, [], nm, seed=8)
        assert np.array_equal(a.data, b.data)
        assert not np.array_equal(a.data, c.data)

    def test_zero_realizations_rejected(self):
        nm = NoiseModel.default(1)
        tc = schedule_alap([Gate(GateKind.H, (0,))], 1)
        with pytest.raises(SimulationError, match="realizations"):
            evolve(tc, [], nm, realizations=0)

    def test_dimension_limit(self):
        nm = NoiseModel.noiseless(11)
        with pytest.raises(SimulationError, match="10 qubits"):
            evolve(schedule_alap([Gate(GateKind.X, (10,))], 11), [], nm)


class TestMeasurement:
    def test_ground_state_point_mass(self):
        nm = NoiseModel.noiseless(2)
        dist = measure_distribution(DensityMatrix.ground(2), nm)
        assert dist.as_dict() == {"00": 1.0}

    def test_plus_state_uniform(self):
        nm = NoiseModel.noiseless(1)
        plus = DensityMatrix(1, np.full((2, 2), 0.5, dtype=complex))
        dist = measure_distribution(plus, nm)
        assert dist.probs == pytest.approx([0.5, 0.5])

    def test_readout_flips(self):
        nm = NoiseModel.noiseless(1)
        nm.readout_p01 = np.array([0.02])
        dist = measure_distribution(DensityMatrix.ground(1), nm)
        assert dist.probs == pytest.approx([0.98, 0.02])

    def test_full_confusion_override_matches_tensor(self, rng):
        nm = NoiseModel.default(2)
        a = nm.full_confusion()
        p = rng.random(4)
        p /= p.sum()
        assert nm.apply_readout(p) == pytest.approx(a @ p)

    def test_sampling_deterministic_under_seed(self):
        dist = CountsDistribution(1, np.array([0.5, 0.5]))
        a = sample_distribution(dist, 1000, seed=3)
        b = sample_distribution(dist, 1000, seed=3)
        assert np.array_equal(a.probs, b.probs)
        assert a.shots == 1000


class TestPauliExpectation:
    def test_z_on_ground(self):
        assert pauli_expectation(DensityMatrix.ground(1), "Z") == pytest.approx(1.0)

    def test_x_on_plus(self):
        plus = DensityMatrix(1, np.full((2, 2), 0.5, dtype=complex))
        assert pauli_expectation(plus, "X") == pytest.approx(1.0)

    def test_bell_state_correlations(self):
        nm = NoiseModel.noiseless(2)
        rho = evolve(bell_circuit(), [], nm)
        assert pauli_expectation(rho, "ZZ") == pytest.approx(1.0)
        assert pauli_expectation(rho, "ZI") == pytest.approx(0.0, abs=1e-12)
        assert pauli_expectation(rho, "XX") == pytest.approx(1.0)

    def test_bad_string_rejected(self):
        with pytest.raises(SimulationError, match="length"):
            pauli_expectation(DensityMatrix.ground(1), "ZZ")
        with pytest.raises(SimulationError, match="letter"):
            pauli_expectation(DensityMatrix.ground(1), "Q")


class TestHellinger:
    def test_identical_distributions(self):
        d = CountsDistribution(1, np.array([0.3, 0.7]))
        assert hellinger_fidelity(d, d) == pytest.approx(1.0)

    def test_disjoint_supports(self):
        a = CountsDistribution(1, np.array([1.0, 0.0]))
        b = CountsDistribution(1, np.array([0.0, 1.0]))
        assert hellinger_fidelity(a, b) == 0.0

    def test_point_mass_vs_uniform(self):
        a = CountsDistribution(1, np.array([1.0, 0.0]))
        b = CountsDistribution(1, np.array([0.5, 0.5]))
        assert hellinger_fidelity(a, b) == pytest.approx(0.5)


class TestEchoBehavior:
    """Interaction of the detuning channel with pulse placement."""

    def _echo_fidelities(self, nm, window, positions=8, seed=0):
        from vqslack.microbench import spin_echo_sweep

        return spin_echo_sweep(nm, positions, window, seed=seed).fidelities

    def test_markovian_dephasing_is_position_independent(self):
        nm = NoiseModel(n_qubits=1, t1=np.inf, t2=80e-6, detuning_mode="none")
        fids = self._echo_fidelities(nm, 799, positions=8)
        assert max(fids) - min(fids) < 1e-9

    def test_systematic_detuning_refocuses_at_center(self):
        nm = NoiseModel(
            n_qubits=1, t1=np.inf, t2=np.inf,
            detuning_mode="systematic", detuning_omega=2 * np.pi * 5e3,
        )
        fids = self._echo_fidelities(nm, 800, positions=9)
        assert int(np.argmax(fids)) == 4
        assert fids[4] == pytest.approx(1.0, abs=1e-9)

    def test_depolarizing_monotonicity_on_micro_benchmark(self):
        from vqslack.microbench import dd_window_circuit

        fids = []
        for p in (0.0, 3e-4, 3e-3):
            nm = NoiseModel(n_qubits=1, t1=100e-6, t2=80e-6, detuning_mode="none", p_1q=p)
            tc = dd_window_circuit(nm, 420)
            ideal = measure_distribution(evolve(tc, [], NoiseModel.noiseless(1)), NoiseModel.noiseless(1))
            fids.append(hellinger_fidelity(ideal, measure_distribution(evolve(tc, [], nm), nm)))
        assert fids[0] >= fids[1] >= fids[2]
