"""Kernel backend selection.

The compiled extension (``_fast``) is preferred when it imported cleanly; the
pure-numpy module is the fallback and the reference the extension is tested
against. Set ``VQSLACK_KERNELS=pure`` or ``=fast`` to force a backend.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import pure

try:
    from . import _fast
except ImportError:  # extension not built; numpy fallback stays active
    _fast = None


def available_backends() -> dict[str, ModuleType]:
    out = {"pure": pure}
    if _fast is not None:
        out["fast"] = _fast
    return out


def load_backend(name: str) -> ModuleType:
    backends = available_backends()
    if name not in backends:
        raise ValueError(f"kernel backend {name!r} not available (have: {sorted(backends)})")
    return backends[name]


def _select() -> ModuleType:
    forced = os.environ.get("VQSLACK_KERNELS", "").strip().lower()
    if forced:
        return load_backend(forced)
    return _fast if _fast is not None else pure


_impl = _select()

BACKEND = _impl.NAME
apply_unitary_1q = _impl.apply_unitary_1q
apply_unitary_2q = _impl.apply_unitary_2q
depolarize_1q = _impl.depolarize_1q
depolarize_2q = _impl.depolarize_2q
amplitude_damp = _impl.amplitude_damp
phase_damp = _impl.phase_damp
rz_phase = _impl.rz_phase
pauli_expectation = _impl.pauli_expectation
