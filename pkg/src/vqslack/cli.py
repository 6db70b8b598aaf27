"""Command-line entry point.

Subcommands: ``vqe`` (full two-stage experiment), ``spin-echo`` and
``dd-sweep`` (the single-qubit micro-benchmarks), ``mem-check`` (readout
calibration round trip). Every command writes one JSON result document;
exit codes are 0 (success), 2 (config/input error), 3 (runtime failure).
All randomness flows from the single seed, so reruns are byte-identical
except for the ``run_meta`` section.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .circuit import Gate, GateKind, schedule_alap
from .config import (
    SCHEMA_VERSION,
    ConfigError,
    ExperimentConfig,
    result_document,
    write_result,
)
from .microbench import (
    DD_SWEEP_WINDOW_CYCLES,
    SPIN_ECHO_WINDOW_CYCLES,
    dd_round_sweep,
    spin_echo_sweep,
)
from .mitigation import DDSequenceKind, mem_calibrate, mem_correct
from .noise import NoiseModel, NoiseModelError
from .observables import ObservableError
from .sim import CountsDistribution, evolve, measure_distribution, sample_distribution
from .tuner import run_experiment
from .observables import su2_ansatz

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _load_noise(path: str | None, n_qubits: int) -> NoiseModel:
    if path is None:
        return NoiseModel.default(n_qubits)
    return NoiseModel.load(path)


def _bench_doc(kind: str, payload: dict, seed: int) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "seed": seed,
        **payload,
        "run_meta": {"timestamp": datetime.now(timezone.utc).isoformat()},
    }


def cmd_vqe(args: argparse.Namespace) -> int:
    config = ExperimentConfig.load(args.config)
    if args.noise:
        noise = NoiseModel.load(args.noise)
        if noise.n_qubits != config.ansatz.n_qubits:
            raise ConfigError(
                f"noise model in {args.noise} is for {noise.n_qubits} qubits, "
                f"ansatz has {config.ansatz.n_qubits}"
            )
        config.noise = noise
    if args.seed is not None:
        config.seed = args.seed
        config.spsa.seed = args.seed
    if args.ladder:
        names = tuple(x.strip() for x in args.ladder.split(",") if x.strip())
        from .tuner import LADDER_NAMES

        unknown = set(names) - set(LADDER_NAMES)
        if unknown:
            raise ConfigError(f"unknown ladder entries {sorted(unknown)}")
        config.ladder = names
    if args.grid is not None:
        from .tuner import GridSpec

        config.grid = GridSpec(
            gate_fractions=args.grid,
            dd_round_values=config.grid.dd_round_values,
            joint_cap=config.grid.joint_cap,
        )

    gates = su2_ansatz(config.ansatz) + [
        Gate(GateKind.MEASURE, (q,)) for q in range(config.ansatz.n_qubits)
    ]
    tc = schedule_alap(gates, config.ansatz.n_qubits, config.noise.durations)
    outcome = run_experiment(
        tc,
        config.hamiltonian,
        config.noise,
        config.spsa,
        config.grid,
        seed=config.seed,
        stage1_noiseless=config.stage1_noiseless,
        ladder=config.ladder,
        shots=config.shots,
    )
    write_result(result_document(config, outcome), args.out)
    print(f"wrote {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_spin_echo(args: argparse.Namespace) -> int:
    noise = _load_noise(args.noise, 1)
    sweep = spin_echo_sweep(noise, args.positions, args.window_cycles, seed=args.seed)
    doc = _bench_doc(
        "spin_echo",
        {
            "noise": noise.to_dict(),
            "window_cycles": args.window_cycles,
            "positions": sweep.labels,
            "fidelities": sweep.fidelities,
            "argmax_index": sweep.argmax,
            "argmax_fraction": sweep.labels[sweep.argmax],
        },
        args.seed,
    )
    write_result(doc, args.out)
    print(f"wrote {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_dd_sweep(args: argparse.Namespace) -> int:
    noise = _load_noise(args.noise, 1)
    kind = DDSequenceKind(args.kind)
    sweep = dd_round_sweep(noise, kind, args.window_cycles, seed=args.seed)
    doc = _bench_doc(
        "dd_sweep",
        {
            "noise": noise.to_dict(),
            "window_cycles": args.window_cycles,
            "dd_kind": kind.value,
            "rounds": [int(r) for r in sweep.labels],
            "fidelities": sweep.fidelities,
            "argmax_rounds": int(sweep.labels[sweep.argmax]),
        },
        args.seed,
    )
    write_result(doc, args.out)
    print(f"wrote {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_mem_check(args: argparse.Namespace) -> int:
    noise = _load_noise(args.noise, args.n)
    if noise.n_qubits != args.n:
        raise ConfigError(f"noise model is for {noise.n_qubits} qubits, requested n={args.n}")
    calib = mem_calibrate(args.n, noise, shots=None if args.exact else args.shots, seed=args.seed)

    # Test distribution: a partially rotated product state, known exactly.
    gates = [Gate(GateKind.RY, (q,), angle=0.7 + 0.3 * q) for q in range(args.n)]
    gates += [Gate(GateKind.MEASURE, (q,)) for q in range(args.n)]
    tc = schedule_alap(gates, args.n, noise.durations)
    noiseless = NoiseModel.noiseless(args.n, noise.durations)
    truth = measure_distribution(evolve(tc, [], noiseless), noiseless)
    raw = measure_distribution(evolve(tc, [], noise, seed=args.seed), noise)
    if not args.exact:
        raw = sample_distribution(raw, args.shots, seed=args.seed)
    corrected = mem_correct(raw, calib)

    def tv(a: CountsDistribution, b: CountsDistribution) -> float:
        return 0.5 * float(np.abs(a.probs - b.probs).sum())

    doc = _bench_doc(
        "mem_check",
        {
            "noise": noise.to_dict(),
            "n_qubits": args.n,
            "shots": None if args.exact else args.shots,
            "tv_before": tv(raw, truth),
            "tv_after": tv(corrected, truth),
            "calibration_matrix": [[round(v, 12) for v in row] for row in calib.tolist()],
        },
        args.seed,
    )
    write_result(doc, args.out)
    print(f"tv before={doc['tv_before']:.6g} after={doc['tv_after']:.6g}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vqslack",
        description="Variationally tuned idle-window error mitigation on a noisy simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("vqe", help="run the two-stage experiment from a config file")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--noise", help="noise model JSON (overrides the config)")
    p.add_argument("--out", required=True, help="result JSON path")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--ladder", help="comma-separated subset of ladder entries")
    p.add_argument("--grid", type=int, default=None, help="gate-position sweep points")
    p.set_defaults(func=cmd_vqe)

    p = sub.add_parser("spin-echo", help="movable-pulse position sweep on one idle window")
    p.add_argument("--noise", help="noise model JSON (default: builtin defaults)")
    p.add_argument("--positions", type=int, default=9)
    p.add_argument("--window-cycles", type=int, default=SPIN_ECHO_WINDOW_CYCLES)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_spin_echo)

    p = sub.add_parser("dd-sweep", help="DD round-count sweep on one idle window")
    p.add_argument("--noise", help="noise model JSON (default: builtin defaults)")
    p.add_argument("--kind", choices=[k.value for k in DDSequenceKind], default="xy4")
    p.add_argument("--window-cycles", type=int, default=DD_SWEEP_WINDOW_CYCLES)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_dd_sweep)

    p = sub.add_parser("mem-check", help="readout calibration and correction round trip")
    p.add_argument("--n", type=int, default=2, help="qubit count")
    p.add_argument("--noise", help="noise model JSON (default: builtin defaults)")
    p.add_argument("--shots", type=int, default=65536)
    p.add_argument("--exact", action="store_true", help="infinite-shot mode")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_mem_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, NoiseModelError, ObservableError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
