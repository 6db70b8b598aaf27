"""Benchmark the compiled kernels against the pure-numpy fallback.

Times the individual hot operations at several qubit counts plus one full
noisy evolution of a representative 4-qubit experiment circuit, and prints a
table with the speedup of the compiled backend.

Usage: python benchmarks/bench_kernels.py [--repeats 200]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from vqslack._kernels import available_backends
from vqslack.circuit import Gate, GateKind, gate_unitary, schedule_alap
from vqslack.noise import NoiseModel
from vqslack.observables import AnsatzSpec, su2_ansatz
from vqslack.sim import evolve


def _random_rho(n: int, rng: np.random.Generator) -> np.ndarray:
    dim = 2**n
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return np.ascontiguousarray(rho / np.trace(rho))


def time_op(fn, repeats: int) -> float:
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats


def bench_kernels(repeats: int) -> list[tuple[str, dict[str, float]]]:
    rng = np.random.default_rng(0)
    h = gate_unitary(GateKind.H)
    cx = gate_unitary(GateKind.CX)
    rows = []
    for n in (4, 6, 8, 10):
        rho0 = _random_rho(n, rng)
        cases = {
            f"1q unitary (n={n})": lambda mod, r: mod.apply_unitary_1q(r, h, n // 2, n),
            f"2q unitary (n={n})": lambda mod, r: mod.apply_unitary_2q(r, cx, 0, n - 1, n),
            f"idle channels (n={n})": lambda mod, r: (
                mod.rz_phase(r, 0, 0.01, n),
                mod.amplitude_damp(r, 0, 1e-4, n),
                mod.phase_damp(r, 0, 1e-4, n),
            ),
            f"pauli expectation (n={n})": lambda mod, r: mod.pauli_expectation(
                r, np.array([3] * n, dtype=np.int64), n
            ),
        }
        reps = max(4, repeats // (1 << max(0, n - 6)))
        for label, call in cases.items():
            timings = {}
            for name, mod in available_backends().items():
                r = rho0.copy()
                timings[name] = time_op(lambda: call(mod, r), reps)
            rows.append((label, timings))
    return rows


def bench_evolve(repeats: int) -> list[tuple[str, dict[str, float]]]:
    import os

    noise = NoiseModel.default(4)
    gates = su2_ansatz(AnsatzSpec(4, 2, "circular"))
    gates += [Gate(GateKind.MEASURE, (q,)) for q in range(4)]
    tc = schedule_alap(gates, 4, noise.durations)
    params = np.linspace(-1, 1, len(tc.parameters))
    timings = {}
    import vqslack._kernels as kern

    for name, mod in available_backends().items():
        saved = {
            attr: getattr(kern, attr)
            for attr in (
                "apply_unitary_1q",
                "apply_unitary_2q",
                "depolarize_1q",
                "depolarize_2q",
                "amplitude_damp",
                "phase_damp",
                "rz_phase",
                "pauli_expectation",
            )
        }
        for attr in saved:
            setattr(kern, attr, getattr(mod, attr))
        try:
            timings[name] = time_op(
                lambda: evolve(tc, params, noise, realizations=8, seed=1), max(2, repeats // 50)
            )
        finally:
            for attr, fn in saved.items():
                setattr(kern, attr, fn)
    return [("full evolve, 4q ansatz, 8 realizations", timings)]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends: {', '.join(sorted(backends))}")
    if "fast" not in backends:
        print("compiled backend not built; showing pure-python timings only")

    rows = bench_kernels(args.repeats) + bench_evolve(args.repeats)
    width = max(len(label) for label, _ in rows)
    header = f"{'operation':<{width}}  {'pure':>12}  {'fast':>12}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for label, timings in rows:
        pure_t = timings.get("pure")
        fast_t = timings.get("fast")
        fast_s = f"{fast_t * 1e6:10.2f}us" if fast_t else "-"
        ratio = f"{pure_t / fast_t:7.2f}x" if fast_t else "-"
        print(f"{label:<{width}}  {pure_t * 1e6:10.2f}us  {fast_s:>12}  {ratio:>8}")


if __name__ == "__main__":
    main()
