"""DD insertion geometry, combined shift+fill, and readout correction."""

import numpy as np
import pytest

from vqslack.circuit import (
    Gate,
    GateKind,
    IdleWindow,
    extract_idle_windows,
    gate_unitary,
    schedule_alap,
    trace_fidelity,
    unitary_of,
)
from vqslack.microbench import dd_round_sweep, dd_window_circuit
from vqslack.mitigation import (
    DDSequenceKind,
    MitigationConfig,
    MitigationError,
    WindowSetting,
    apply_config,
    dd_pulse_offsets,
    insert_dd,
    max_rounds,
    mem_calibrate,
    mem_correct,
    window_key,
)
from vqslack.noise import NoiseModel
from vqslack.sim import CountsDistribution, sample_distribution
from conftest import random_gate_list


def window_circuit(window: int, n_qubits: int = 1):
    gates = [Gate(GateKind.H, (0,)), Gate(GateKind.DELAY, (0,), delay=window)]
    gates += [Gate(GateKind.H, (0,))]
    gates += [Gate(GateKind.MEASURE, (q,)) for q in range(n_qubits)]
    tc = schedule_alap(gates, n_qubits)
    return tc, extract_idle_windows(tc, 1)[0]


class TestSequences:
    @pytest.mark.parametrize("kind", list(DDSequenceKind))
    def test_pulses_compose_to_identity_up_to_phase(self, kind):
        u = np.eye(2, dtype=complex)
        for pulse in kind.pulses:
            u = gate_unitary(pulse) @ u
        assert abs(abs(np.trace(u)) - 2.0) < 1e-12


class TestMaxRounds:
    def test_xy4_counts(self):
        tc, w = window_circuit(8)
        assert max_rounds(w, DDSequenceKind.XY4, tc) == 2

    def test_too_small_window(self):
        tc, w = window_circuit(1)
        assert max_rounds(w, DDSequenceKind.XX, tc) == 0

    def test_large_window(self):
        tc, w = window_circuit(799)
        assert max_rounds(w, DDSequenceKind.XX, tc) == 399


class TestInsertDd:
    def test_offsets_four_cycle_window_one_xx_round(self):
        # gap = (4 - 2) / 3 = 2/3; per-pulse rounding lands the pair at [1, 2]
        assert dd_pulse_offsets(4, 2, 1) == [1, 2]

    def test_offsets_equal_gaps_when_exact(self):
        assert dd_pulse_offsets(5, 2, 1) == [1, 3]

    def test_insertion_preserves_unitary(self):
        tc, w = window_circuit(12)
        for kind in DDSequenceKind:
            for rounds in (1, 2):
                out = insert_dd(tc, w, kind, rounds)
                assert trace_fidelity(unitary_of(tc), unitary_of(out)) >= 1 - 1e-10

    def test_max_rounds_fill_leaves_no_slack(self):
        tc, w = window_circuit(40)
        cap = max_rounds(w, DDSequenceKind.XX, tc)
        out = insert_dd(tc, w, DDSequenceKind.XX, cap)
        inserted = [g for g in out.gates if w.start <= g.start < w.end]
        assert len(inserted) == 2 * cap
        # all residual idle is rounding slack: less than pulses + 1 cycles
        used = sum(g.duration for g in inserted)
        assert w.length - used < len(inserted) + 1

    def test_rounds_out_of_range(self):
        tc, w = window_circuit(8)
        with pytest.raises(MitigationError, match="exceed capacity"):
            insert_dd(tc, w, DDSequenceKind.XX, 5)
        with pytest.raises(MitigationError, match="rounds >= 1"):
            insert_dd(tc, w, DDSequenceKind.XX, 0)


class TestApplyConfig:
    def _movable_circuit(self, window=20):
        gates = [
            Gate(GateKind.H, (0,)),
            Gate(GateKind.DELAY, (0,), delay=window),
            Gate(GateKind.X, (0,)),
            Gate(GateKind.H, (0,)),
            Gate(GateKind.MEASURE, (0,)),
        ]
        tc = schedule_alap(gates, 1)
        return tc, extract_idle_windows(tc, 2)

    def test_empty_config_is_identity(self):
        tc, ws = self._movable_circuit()
        assert apply_config(tc, ws, MitigationConfig()) == tc

    def test_baseline_settings_are_identity(self):
        tc, ws = self._movable_circuit()
        cfg = MitigationConfig({window_key(w): WindowSetting(None, 0, 1.0) for w in ws})
        assert apply_config(tc, ws, cfg) == tc

    def test_shift_plus_dd_fills_both_residuals(self):
        tc, ws = self._movable_circuit(21)
        w = ws[0]
        cfg = MitigationConfig({window_key(w): WindowSetting(DDSequenceKind.XX, 4, 0.5)})
        out = apply_config(tc, ws, cfg)
        assert len(out.gates) == len(tc.gates) + 8  # 4 XX rounds = 8 pulses
        moved = [g for g in out.gates if g.kind is GateKind.X and g.start == w.start + 10]
        assert len(moved) == 1  # boundary gate at round(0.5 * 21) cycles in
        # the round budget splits evenly over the 10/11-cycle residuals
        left = [g for g in out.gates if g not in tc.gates and g.start < w.start + 10]
        right = [g for g in out.gates if g not in tc.gates and g.start > w.start + 10]
        assert len(left) == 4 and len(right) == 4
        assert trace_fidelity(unitary_of(tc), unitary_of(out)) >= 1 - 1e-10

    def test_unknown_window_rejected(self):
        tc, ws = self._movable_circuit()
        cfg = MitigationConfig({(0, 1, 2): WindowSetting(None, 0, 1.0)})
        with pytest.raises(MitigationError, match="unknown window"):
            apply_config(tc, ws, cfg)

    def test_semantic_preservation_randomized(self, rng):
        kinds = list(DDSequenceKind)
        done = 0
        while done < 40:
            n = int(rng.integers(1, 5))
            gates = random_gate_list(rng, n, int(rng.integers(4, 16)))
            tc = schedule_alap(gates, n)
            windows = extract_idle_windows(tc, 2)
            if not windows:
                continue
            cfg = MitigationConfig()
            for w in windows:
                kind = kinds[int(rng.integers(len(kinds)))]
                cap = max_rounds(w, kind, tc)
                rounds = int(rng.integers(cap + 1))
                following = tc.gates[w.following]
                movable = following.kind not in (GateKind.CX, GateKind.MEASURE)
                fraction = float(rng.choice([0.0, 0.25, 0.5, 0.75, 1.0])) if movable else None
                cfg.settings[window_key(w)] = WindowSetting(kind if rounds else None, rounds, fraction)
            out = apply_config(tc, windows, cfg)
            params = rng.uniform(-np.pi, np.pi, len(tc.parameters))
            fid = trace_fidelity(unitary_of(tc, params), unitary_of(out, params))
            assert fid >= 1 - 1e-10
            done += 1

    def test_round_trip_records(self):
        tc, ws = self._movable_circuit()
        cfg = MitigationConfig(
            {window_key(ws[0]): WindowSetting(DDSequenceKind.XY4, 2, 0.25)}
        )
        back = MitigationConfig.from_records(cfg.to_records())
        assert back == cfg


class TestDdSweepShapes:
    """Fidelity-vs-rounds shapes under the relevant noise regimes."""

    def test_zero_noise_flat_at_one(self):
        nm = NoiseModel.noiseless(1)
        sweep = dd_round_sweep(nm, DDSequenceKind.XX, window_cycles=40)
        assert max(sweep.fidelities) == pytest.approx(1.0, abs=1e-12)
        assert min(sweep.fidelities) == pytest.approx(1.0, abs=1e-12)

    def test_gate_error_only_non_increasing(self):
        nm = NoiseModel(n_qubits=1, t1=np.inf, t2=np.inf, detuning_mode="none", p_1q=3e-4)
        sweep = dd_round_sweep(nm, DDSequenceKind.XX)
        diffs = np.diff(sweep.fidelities)
        assert np.all(diffs <= 1e-12)

    def test_default_noise_non_monotone_with_gain_and_loss(self):
        nm = NoiseModel.default(1)
        sweep = dd_round_sweep(nm, DDSequenceKind.XX, seed=0)
        fids = np.array(sweep.fidelities)
        assert sweep.argmax > 0
        assert fids.max() > fids[0]          # gain region exists
        assert fids.min() < fids[0] - 1e-9   # loss region exists
        assert np.any(np.diff(fids) > 0) and np.any(np.diff(fids) < 0)

    def test_xy4_best_at_least_xx_best(self):
        nm = NoiseModel.default(1)
        xx = dd_round_sweep(nm, DDSequenceKind.XX, seed=0)
        xy4 = dd_round_sweep(nm, DDSequenceKind.XY4, seed=0)
        assert max(xy4.fidelities) >= max(xx.fidelities) - 1e-6


class TestMem:
    def test_ideal_readout_gives_identity(self):
        nm = NoiseModel.noiseless(2)
        assert np.allclose(mem_calibrate(2, nm), np.eye(4))

    def test_single_qubit_symmetric_flips(self):
        nm = NoiseModel.noiseless(1)
        nm.readout_p01 = np.array([0.02])
        nm.readout_p10 = np.array([0.02])
        a = mem_calibrate(1, nm)
        assert a == pytest.approx(np.array([[0.98, 0.02], [0.02, 0.98]]))

    def test_two_qubit_product_is_kron(self):
        nm = NoiseModel.noiseless(2)
        nm.readout_p01 = np.array([0.02, 0.05])
        nm.readout_p10 = np.array([0.03, 0.01])
        a = mem_calibrate(2, nm)
        a0 = np.array([[0.98, 0.03], [0.02, 0.97]])
        a1 = np.array([[0.95, 0.01], [0.05, 0.99]])
        assert a == pytest.approx(np.kron(a0, a1))
        assert mem_calibrate(2, nm, tensored=True) == pytest.approx(np.kron(a0, a1))

    def test_correct_identity_is_noop(self):
        raw = CountsDistribution(1, np.array([0.3, 0.7]))
        out = mem_correct(raw, np.eye(2))
        assert out.probs == pytest.approx(raw.probs)

    def test_exact_inversion_recovers_truth(self, rng):
        nm = NoiseModel.noiseless(2)
        nm.readout_p01 = np.full(2, 0.02)
        nm.readout_p10 = np.full(2, 0.02)
        a = nm.full_confusion()
        p = rng.random(4)
        p /= p.sum()
        raw = CountsDistribution(2, a @ p)
        out = mem_correct(raw, a)
        assert np.abs(out.probs - p).max() < 1e-9

    def test_sampled_correction_tightens_tv(self, rng):
        nm = NoiseModel.noiseless(2)
        nm.readout_p01 = np.full(2, 0.02)
        nm.readout_p10 = np.full(2, 0.02)
        a = nm.full_confusion()
        p = np.array([0.55, 0.25, 0.15, 0.05])
        raw = sample_distribution(CountsDistribution(2, a @ p), 65536, seed=11)
        corrected = mem_correct(raw, a)
        tv_before = 0.5 * np.abs(raw.probs - p).sum()
        tv_after = 0.5 * np.abs(corrected.probs - p).sum()
        assert tv_after < 0.02
        assert tv_after < tv_before

    def test_singular_matrix_falls_back_with_warning(self):
        raw = CountsDistribution(1, np.array([0.5, 0.5]))
        singular = np.array([[0.5, 0.5], [0.5, 0.5]])
        with pytest.warns(UserWarning, match="singular"):
            out = mem_correct(raw, singular)
        assert out.probs.sum() == pytest.approx(1.0)

    def test_full_calibration_size_limit(self):
        nm = NoiseModel.noiseless(7)
        with pytest.raises(MitigationError, match="tensored"):
            mem_calibrate(7, nm)
