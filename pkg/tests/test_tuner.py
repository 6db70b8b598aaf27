"""SPSA behavior, the per-window sweeps, and the two-stage flow."""

import numpy as np
import pytest

from vqslack.circuit import Gate, GateKind, extract_idle_windows, schedule_alap
from vqslack.mitigation import DDSequenceKind, apply_config
from vqslack.noise import NoiseModel
from vqslack.observables import (
    AnsatzSpec,
    exact_ground_energy,
    objective,
    su2_ansatz,
    tfim_hamiltonian,
)
from vqslack.tuner import (
    GridSpec,
    SpsaSettings,
    TunerError,
    run_experiment,
    spsa_minimize,
    tune_windows,
    wrap_angles,
)


def measured_ansatz(spec, durations=None):
    gates = su2_ansatz(spec) + [Gate(GateKind.MEASURE, (q,)) for q in range(spec.n_qubits)]
    return schedule_alap(gates, spec.n_qubits, durations)


class TestSpsa:
    def test_quadratic_converges(self):
        trace = spsa_minimize(
            lambda t: float(np.sum(t**2)),
            np.ones(4),
            SpsaSettings(max_iters=200, seed=1),
        )
        assert trace.best_objective < 1e-3
        assert trace.best_objective == min(trace.values)

    def test_constant_function_keeps_start(self):
        theta0 = np.array([0.3, -0.8])
        trace = spsa_minimize(lambda t: 5.0, theta0, SpsaSettings(max_iters=50, seed=0))
        assert trace.best_objective == 5.0
        assert np.allclose(trace.best_theta, theta0)

    def test_small_vqe_reaches_ground_energy(self):
        h = tfim_hamiltonian(2, 1, 1)
        e0, _ = exact_ground_energy(h)
        nm = NoiseModel.noiseless(2)
        tc = measured_ansatz(AnsatzSpec(2, 1, "circular"))
        rng = np.random.default_rng(0)
        trace = spsa_minimize(
            lambda t: objective(tc, t, h, nm, mode="exact", seed=0),
            rng.uniform(-0.5, 0.5, len(tc.parameters)),
            SpsaSettings(max_iters=200, seed=0),
        )
        assert trace.best_objective == pytest.approx(e0, abs=1e-2)
        assert trace.best_objective >= e0 - 1e-9

    def test_non_finite_objective_aborts_with_trace(self):
        calls = {"n": 0}

        def f(t):
            calls["n"] += 1
            return float("nan") if calls["n"] > 12 else float(np.sum(t**2))

        trace = spsa_minimize(f, np.ones(3), SpsaSettings(max_iters=100, seed=0))
        assert trace.aborted
        assert len(trace.values) >= 1

    def test_angles_stay_wrapped(self):
        trace = spsa_minimize(
            lambda t: float(np.cos(t).sum()),
            np.full(3, 3.0),
            SpsaSettings(max_iters=60, seed=2),
        )
        assert np.all(trace.best_theta <= np.pi) and np.all(trace.best_theta > -np.pi)

    def test_wrap_angles_half_open_interval(self):
        wrapped = wrap_angles(np.array([np.pi, -np.pi, 3 * np.pi, 0.0]))
        assert wrapped == pytest.approx([np.pi, np.pi, np.pi, 0.0])

    def test_settings_validation(self):
        with pytest.raises(TunerError):
            SpsaSettings(max_iters=0)
        with pytest.raises(TunerError):
            SpsaSettings(c=-1.0)
        with pytest.raises(TunerError):
            SpsaSettings(alpha=1.5)


class TestTuneWindows:
    def _setup(self, noise):
        h = tfim_hamiltonian(3, 1, 1)
        tc = measured_ansatz(AnsatzSpec(3, 2, "circular"), noise.durations)
        windows = extract_idle_windows(tc, 2)
        assert windows, "fixture circuit must have targetable windows"
        rng = np.random.default_rng(3)
        theta = rng.uniform(-np.pi, np.pi, len(tc.parameters))
        return tc, h, windows, theta

    def test_zero_noise_selects_baseline_everywhere(self):
        nm = NoiseModel.noiseless(3)
        tc, h, windows, theta = self._setup(nm)
        cfg, records = tune_windows(
            tc, theta, h, windows, nm,
            kinds=(DDSequenceKind.XX, DDSequenceKind.XY4), tune_fraction=True, seed=0,
        )
        for st in cfg.settings.values():
            assert st.is_baseline()
        for rec in records:
            assert rec.best_objective == pytest.approx(rec.baseline_objective, abs=1e-9)

    def test_selected_never_worse_than_baseline(self):
        nm = NoiseModel.default(3)
        tc, h, windows, theta = self._setup(nm)
        cfg, records = tune_windows(
            tc, theta, h, windows, nm,
            kinds=(DDSequenceKind.XY4,), tune_fraction=True, seed=1,
        )
        for rec in records:
            assert rec.best_objective <= rec.baseline_objective + 1e-9

    def test_sweep_contains_baseline_and_one_round(self):
        nm = NoiseModel.default(3)
        tc, h, windows, theta = self._setup(nm)
        grid = GridSpec(gate_fractions=3, dd_round_values=4, joint_cap=64)
        from vqslack.tuner import _window_candidates, _window_movable

        for w in windows:
            cands = _window_candidates(
                w, _window_movable(tc, w), tc, (DDSequenceKind.XX,), True, grid
            )
            rounds = {c.dd_rounds for c in cands}
            fractions = {c.gate_fraction for c in cands}
            assert 0 in rounds
            from vqslack.mitigation import max_rounds

            if max_rounds(w, DDSequenceKind.XX, tc) >= 1:
                assert 1 in rounds
            assert 1.0 in fractions or fractions == {None}

    def test_systematic_detuning_selects_centered_pulse(self):
        # single-window micro-benchmark, position-only sweep: the refocusing
        # argmin is the centered pulse
        nm = NoiseModel(
            n_qubits=1, t1=np.inf, t2=np.inf,
            detuning_mode="systematic", detuning_omega=2 * np.pi * 5e3,
        )
        gates = [
            Gate(GateKind.H, (0,)),
            Gate(GateKind.DELAY, (0,), delay=800),
            Gate(GateKind.X, (0,)),
            Gate(GateKind.H, (0,)),
            Gate(GateKind.MEASURE, (0,)),
        ]
        tc = schedule_alap(gates, 1, nm.durations)
        windows = extract_idle_windows(tc, 2)
        from vqslack.observables import PauliHamiltonian

        h = PauliHamiltonian.from_terms(1, [(-1.0, "Z")])  # minimized by refocusing
        cfg, _ = tune_windows(
            tc, np.array([]), h, windows, nm,
            GridSpec(gate_fractions=9), tune_fraction=True, seed=0,
        )
        (setting,) = cfg.settings.values()
        assert setting.gate_fraction == pytest.approx(0.5)

    def test_joint_sweep_respects_cap(self):
        nm = NoiseModel.default(3)
        tc, h, windows, theta = self._setup(nm)
        grid = GridSpec(gate_fractions=9, dd_round_values=16, joint_cap=64)
        _, records = tune_windows(
            tc, theta, h, windows, nm,
            kinds=(DDSequenceKind.XY4,), tune_fraction=True, grid=grid, seed=0,
        )
        for rec in records:
            assert rec.candidates <= 64


class TestRunExperiment:
    def _run(self, noise, ladder, seed=0, reps=1, iters=40, resamplings=1):
        h = tfim_hamiltonian(2, 1, 1)
        tc = measured_ansatz(AnsatzSpec(2, reps, "circular"), noise.durations)
        return run_experiment(
            tc, h, noise,
            SpsaSettings(max_iters=iters, seed=seed, resamplings=resamplings),
            GridSpec(gate_fractions=3, dd_round_values=4, joint_cap=16),
            seed=seed,
            ladder=ladder,
        ), h

    def test_zero_noise_ladder_collapses(self):
        nm = NoiseModel.noiseless(2)
        outcome, h = self._run(
            nm, ladder=("no_em", "baseline_mem", "dd1_xx", "vaqem_gs_xy"),
            seed=1, iters=250, resamplings=2,
        )
        e0, _ = exact_ground_energy(h)
        values = [entry["objective"] for entry in outcome.ladder.values()]
        assert max(values) - min(values) < 1e-9
        assert values[0] == pytest.approx(e0, abs=1e-2)

    def test_ladder_entries_and_dominance(self):
        nm = NoiseModel.default(2)
        outcome, h = self._run(nm, ladder=("no_em", "baseline_mem", "dd1_xx", "dd1_xy4", "vaqem_dd", "vaqem_gs", "vaqem_gs_xy"))
        assert set(outcome.ladder) == {
            "no_em", "baseline_mem", "dd1_xx", "dd1_xy4", "vaqem_dd", "vaqem_gs", "vaqem_gs_xy",
        }
        for recs in outcome.window_records.values():
            for rec in recs:
                assert rec.best_objective <= rec.baseline_objective + 1e-9
        assert outcome.ladder["baseline_mem"]["improvement_ratio"] == pytest.approx(0.0, abs=1e-12)

    def test_soundness_of_reported_objectives(self):
        nm = NoiseModel.default(2)
        outcome, h = self._run(nm, ladder=("baseline_mem", "vaqem_dd"))
        e0, _ = exact_ground_energy(h)
        assert outcome.trace.best_objective >= e0 - 1e-9
        for entry in outcome.ladder.values():
            assert entry["objective_exact"] >= e0 - 1e-9

    def test_reproducible_under_seed(self):
        nm = NoiseModel.default(2)
        a, _ = self._run(nm, ladder=("baseline_mem", "vaqem_gs"), seed=5)
        b, _ = self._run(nm, ladder=("baseline_mem", "vaqem_gs"), seed=5)
        assert a.trace.values == b.trace.values
        assert np.array_equal(a.theta_star, b.theta_star)
        assert a.ladder == b.ladder
        assert a.mitigation == b.mitigation

    def test_unknown_ladder_entry_rejected(self):
        nm = NoiseModel.noiseless(2)
        with pytest.raises(TunerError, match="unknown ladder"):
            self._run(nm, ladder=("nope",))
