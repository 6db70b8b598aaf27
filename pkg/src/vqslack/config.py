"""Experiment configuration and result files.

Both are JSON documents. The result file is canonical (sorted keys, fixed
separators) and fully reproducible from the echoed config: rerunning with the
same seed yields byte-identical bytes except for the ``run_meta`` section,
which holds wall-clock data (timestamp and stage timings).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .noise import NoiseModel
from .observables import AnsatzSpec, PauliHamiltonian, load_hamiltonian, tfim_hamiltonian
from .tuner import LADDER_NAMES, ExperimentOutcome, GridSpec, SpsaSettings

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Raised for unreadable, malformed, or inconsistent experiment configs."""


@dataclass
class ExperimentConfig:
    ansatz: AnsatzSpec
    hamiltonian: PauliHamiltonian
    noise: NoiseModel
    spsa: SpsaSettings
    grid: GridSpec = GridSpec()
    seed: int = 0
    ladder: tuple[str, ...] = LADDER_NAMES
    stage1_noiseless: bool = False
    shots: int | None = None
    echo: dict = field(default_factory=dict)  # the dict this config was built from

    @classmethod
    def from_dict(cls, d: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        base = base_dir or Path.cwd()
        try:
            ans = d["ansatz"]
            spec = AnsatzSpec(
                n_qubits=int(ans["n_qubits"]),
                reps=int(ans["reps"]),
                entanglement=ans.get("entanglement", "circular"),
            )
            ham = d["hamiltonian"]
            kind = ham.get("kind", "tfim")
            if kind == "tfim":
                h = tfim_hamiltonian(
                    int(ham.get("n", spec.n_qubits)),
                    float(ham.get("coupling", 1.0)),
                    float(ham.get("field", 1.0)),
                )
            elif kind == "file":
                h = load_hamiltonian(base / ham["path"])
            else:
                raise ConfigError(f"unknown hamiltonian kind {kind!r}")
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad experiment config: {exc}") from exc

        if h.n_qubits != spec.n_qubits:
            raise ConfigError(
                f"hamiltonian acts on {h.n_qubits} qubits but the ansatz has {spec.n_qubits}"
            )

        if "noise_path" in d:
            noise = NoiseModel.load(base / d["noise_path"])
        elif "noise" in d:
            noise = NoiseModel.from_dict(d["noise"])
        else:
            noise = NoiseModel.default(spec.n_qubits)
        if noise.n_qubits != spec.n_qubits:
            raise ConfigError(
                f"noise model is for {noise.n_qubits} qubits but the ansatz has {spec.n_qubits}"
            )

        seed = int(d.get("seed", 0))
        sp = d.get("spsa", {})
        spsa = SpsaSettings(
            max_iters=int(sp.get("max_iters", 300)),
            a=sp.get("a"),
            c=float(sp.get("c", 0.1)),
            A=sp.get("A"),
            alpha=float(sp.get("alpha", 0.602)),
            gamma=float(sp.get("gamma", 0.101)),
            first_step=float(sp.get("first_step", 0.1)),
            resamplings=int(sp.get("resamplings", 1)),
            seed=int(sp.get("seed", seed)),
        )
        gr = d.get("grid", {})
        grid = GridSpec(
            gate_fractions=int(gr.get("gate_fractions", 9)),
            dd_round_values=int(gr.get("dd_round_values", 16)),
            joint_cap=int(gr.get("joint_cap", 64)),
        )
        ladder = tuple(d.get("ladder", LADDER_NAMES))
        unknown = set(ladder) - set(LADDER_NAMES)
        if unknown:
            raise ConfigError(f"unknown ladder entries {sorted(unknown)}; known: {LADDER_NAMES}")
        shots = d.get("shots")
        return cls(
            ansatz=spec,
            hamiltonian=h,
            noise=noise,
            spsa=spsa,
            grid=grid,
            seed=seed,
            ladder=ladder,
            stage1_noiseless=bool(d.get("stage1_noiseless", False)),
            shots=int(shots) if shots is not None else None,
            echo=d,
        )

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        try:
            data = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {p}: {exc}") from None
        return cls.from_dict(data, base_dir=p.parent)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def inputs_hash(config: ExperimentConfig) -> str:
    payload = {"config": config.echo, "noise": config.noise.to_dict()}
    return hashlib.sha256(canonical_json(payload).encode()).hexdigest()


def _round_floats(obj, digits: int = 12):
    if isinstance(obj, float):
        return round(obj, digits)
    if isinstance(obj, dict):
        return {k: _round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v, digits) for v in obj]
    return obj


def result_document(
    config: ExperimentConfig, outcome: ExperimentOutcome, kind: str = "vqe"
) -> dict:
    """Assemble the machine-readable result; deterministic except run_meta."""
    windows = [
        {"qubit": w.qubit, "start": w.start, "end": w.end} for w in outcome.windows
    ]
    window_records = {
        name: [
            {
                "window": list(rec.window),
                "movable": rec.movable,
                "dd_kind": rec.chosen.dd_kind.value if rec.chosen.dd_kind else None,
                "dd_rounds": rec.chosen.dd_rounds,
                "gate_fraction": rec.chosen.gate_fraction,
                "baseline_objective": rec.baseline_objective,
                "best_objective": rec.best_objective,
                "candidates": rec.candidates,
            }
            for rec in recs
        ]
        for name, recs in outcome.window_records.items()
    }
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "seed": config.seed,
        "inputs_hash": inputs_hash(config),
        "config": config.echo,
        "noise": config.noise.to_dict(),
        "e0": outcome.e0,
        "ladder": outcome.ladder,
        "theta_star": list(np.asarray(outcome.theta_star, dtype=float)),
        "trace": {
            "values": outcome.trace.values,
            "theta_hashes": outcome.trace.theta_hashes,
            "best_objective": outcome.trace.best_objective,
            "evaluations": outcome.trace.evaluations,
            "aborted": outcome.trace.aborted,
        },
        "windows": windows,
        "window_records": window_records,
        "mitigation": {
            name: cfg.to_records() for name, cfg in outcome.mitigation.items()
        },
        "run_meta": {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "timings_s": outcome.timings,
        },
    }
    return _round_floats(doc)


def write_result(doc: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n")


def strip_run_meta(doc: dict) -> dict:
    out = dict(doc)
    out.pop("run_meta", None)
    return out
