"""Pure-numpy density-matrix kernels.

Reference implementation of the hot-loop operations; the compiled backend in
``_fast.pyx`` mirrors these signatures exactly. All functions mutate ``rho``
(a C-contiguous complex128 matrix of shape ``(2**n, 2**n)``) in place.

Bit convention: qubit 0 is the most significant bit of the basis index, so
basis state ``|q0 q1 ... q_{n-1}>`` has index ``int("".join(bits), 2)``.
"""

from __future__ import annotations

import numpy as np

NAME = "pure"


def _split(rho: np.ndarray, q: int, n: int) -> np.ndarray:
    """View with row/col axes split around qubit q: (A, 2, B, A, 2, B)."""
    a = 1 << q
    b = 1 << (n - q - 1)
    return rho.reshape(a, 2, b, a, 2, b)


def apply_unitary_1q(rho: np.ndarray, u: np.ndarray, q: int, n: int) -> None:
    """rho <- (U rho U†) with U acting on qubit q."""
    v = _split(rho, q, n)
    out = np.einsum("ab,ibjkcl,dc->iajkdl", u, v, u.conj())
    rho[...] = out.reshape(rho.shape)


def apply_unitary_2q(rho: np.ndarray, u: np.ndarray, q0: int, q1: int, n: int) -> None:
    """rho <- (U rho U†) with the 4x4 U ordered as |q0 q1>."""
    lo, hi = (q0, q1) if q0 < q1 else (q1, q0)
    u4 = u.reshape(2, 2, 2, 2)
    if q0 > q1:  # align u's qubit slots with (lo, hi) axis order
        u4 = u4.transpose(1, 0, 3, 2)
    a = 1 << lo
    b = 1 << (hi - lo - 1)
    c = 1 << (n - hi - 1)
    dim = rho.shape[0]
    v = rho.reshape(a, 2, b, 2, c, dim)
    v = np.einsum("pqrs,arbsct->apbqct", u4, v)
    v = v.reshape(dim, a, 2, b, 2, c)
    v = np.einsum("pqrs,iarbsc->iapbqc", u4.conj(), v)
    rho[...] = v.reshape(rho.shape)


def depolarize_1q(rho: np.ndarray, q: int, p: float, n: int) -> None:
    """rho <- (1-p) rho + p (I/2 tensor Tr_q rho)."""
    v = _split(rho, q, n)
    t = v[:, 0, :, :, 0, :] + v[:, 1, :, :, 1, :]
    v *= 1.0 - p
    v[:, 0, :, :, 0, :] += (p / 2.0) * t
    v[:, 1, :, :, 1, :] += (p / 2.0) * t


def depolarize_2q(rho: np.ndarray, q0: int, q1: int, p: float, n: int) -> None:
    """Two-qubit depolarizing on (q0, q1)."""
    lo, hi = (q0, q1) if q0 < q1 else (q1, q0)
    a = 1 << lo
    b = 1 << (hi - lo - 1)
    c = 1 << (n - hi - 1)
    v = rho.reshape(a, 2, b, 2, c, a, 2, b, 2, c)
    t = (
        v[:, 0, :, 0, :, :, 0, :, 0, :]
        + v[:, 0, :, 1, :, :, 0, :, 1, :]
        + v[:, 1, :, 0, :, :, 1, :, 0, :]
        + v[:, 1, :, 1, :, :, 1, :, 1, :]
    )
    v *= 1.0 - p
    for x in (0, 1):
        for y in (0, 1):
            v[:, x, :, y, :, :, x, :, y, :] += (p / 4.0) * t


def amplitude_damp(rho: np.ndarray, q: int, gamma: float, n: int) -> None:
    """Amplitude damping with decay probability gamma on qubit q."""
    v = _split(rho, q, n)
    s = np.sqrt(1.0 - gamma)
    v[:, 0, :, :, 0, :] += gamma * v[:, 1, :, :, 1, :]
    v[:, 0, :, :, 1, :] *= s
    v[:, 1, :, :, 0, :] *= s
    v[:, 1, :, :, 1, :] *= 1.0 - gamma


def phase_damp(rho: np.ndarray, q: int, lam: float, n: int) -> None:
    """Pure dephasing: off-diagonals in qubit q scale by (1 - lam)."""
    v = _split(rho, q, n)
    v[:, 0, :, :, 1, :] *= 1.0 - lam
    v[:, 1, :, :, 0, :] *= 1.0 - lam


def rz_phase(rho: np.ndarray, q: int, theta: float, n: int) -> None:
    """Coherent Z rotation by theta on qubit q (diagonal fast path)."""
    v = _split(rho, q, n)
    ph = np.exp(-1j * theta)
    v[:, 0, :, :, 1, :] *= ph
    v[:, 1, :, :, 0, :] *= np.conj(ph)


def pauli_expectation(rho: np.ndarray, codes: np.ndarray, n: int) -> complex:
    """Tr[P rho] for the Pauli string given as codes (0=I, 1=X, 2=Y, 3=Z)."""
    dim = rho.shape[0]
    idx = np.arange(dim)
    xmask = 0
    amp = np.ones(dim, dtype=np.complex128)
    for q in range(n):
        code = int(codes[q])
        if code == 0:
            continue
        bit = (idx >> (n - q - 1)) & 1
        if code == 1:
            xmask |= 1 << (n - q - 1)
        elif code == 2:
            xmask |= 1 << (n - q - 1)
            amp *= 1j * (1.0 - 2.0 * bit)
        else:
            amp *= 1.0 - 2.0 * bit
    return complex(np.sum(amp * rho[idx, idx ^ xmask]))
