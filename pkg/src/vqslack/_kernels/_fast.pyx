# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled density-matrix kernels; signatures mirror ``pure.py``.

All loops run over bit-decomposed flat indices so no temporaries of the full
matrix size are allocated (except in apply_unitary_2q, which gathers 4x4
blocks in registers).
"""

import numpy as np

from libc.math cimport cos, sin, sqrt

NAME = "fast"

ctypedef double complex cplx


cdef inline Py_ssize_t _expand(Py_ssize_t base, Py_ssize_t mask) nogil:
    # Insert a zero bit at the position given by mask into base.
    return ((base & ~(mask - 1)) << 1) | (base & (mask - 1))


def apply_unitary_1q(cplx[:, ::1] rho, cplx[:, ::1] u, int q, int n):
    cdef Py_ssize_t dim = 1 << n
    cdef Py_ssize_t mask = 1 << (n - q - 1)
    cdef Py_ssize_t half = dim >> 1
    cdef Py_ssize_t b, i0, i1, j
    cdef cplx u00 = u[0, 0], u01 = u[0, 1], u10 = u[1, 0], u11 = u[1, 1]
    cdef cplx c00 = u00.conjugate(), c01 = u01.conjugate()
    cdef cplx c10 = u10.conjugate(), c11 = u11.conjugate()
    cdef cplx t0, t1
    with nogil:
        for b in range(half):
            i0 = _expand(b, mask)
            i1 = i0 | mask
            for j in range(dim):
                t0 = rho[i0, j]
                t1 = rho[i1, j]
                rho[i0, j] = u00 * t0 + u01 * t1
                rho[i1, j] = u10 * t0 + u11 * t1
        for b in range(half):
            i0 = _expand(b, mask)
            i1 = i0 | mask
            for j in range(dim):
                t0 = rho[j, i0]
                t1 = rho[j, i1]
                rho[j, i0] = t0 * c00 + t1 * c01
                rho[j, i1] = t0 * c10 + t1 * c11


def apply_unitary_2q(cplx[:, ::1] rho, cplx[:, ::1] u, int q0, int q1, int n):
    cdef Py_ssize_t dim = 1 << n
    cdef Py_ssize_t m0 = 1 << (n - q0 - 1)
    cdef Py_ssize_t m1 = 1 << (n - q1 - 1)
    cdef Py_ssize_t mlo = m0 if m0 < m1 else m1
    cdef Py_ssize_t mhi = m0 if m0 > m1 else m1
    cdef Py_ssize_t quarter = dim >> 2
    cdef Py_ssize_t b, base, j, r, c
    cdef Py_ssize_t idx[4]
    cdef cplx acc[4]
    cdef cplx t[4]
    cdef cplx uc[4][4]
    for r in range(4):
        for c in range(4):
            uc[r][c] = u[r, c]
    with nogil:
        for b in range(quarter):
            base = _expand(_expand(b, mlo), mhi)
            # idx[k] indexes the |q0 q1> = |k>> block, k = 2*bit(q0)+bit(q1)
            idx[0] = base
            idx[1] = base | m1
            idx[2] = base | m0
            idx[3] = base | m0 | m1
            for j in range(dim):
                for r in range(4):
                    t[r] = rho[idx[r], j]
                for r in range(4):
                    acc[r] = uc[r][0] * t[0] + uc[r][1] * t[1] + uc[r][2] * t[2] + uc[r][3] * t[3]
                for r in range(4):
                    rho[idx[r], j] = acc[r]
        for b in range(quarter):
            base = _expand(_expand(b, mlo), mhi)
            idx[0] = base
            idx[1] = base | m1
            idx[2] = base | m0
            idx[3] = base | m0 | m1
            for j in range(dim):
                for r in range(4):
                    t[r] = rho[j, idx[r]]
                for r in range(4):
                    acc[r] = (
                        t[0] * uc[r][0].conjugate()
                        + t[1] * uc[r][1].conjugate()
                        + t[2] * uc[r][2].conjugate()
                        + t[3] * uc[r][3].conjugate()
                    )
                for r in range(4):
                    rho[j, idx[r]] = acc[r]


def depolarize_1q(cplx[:, ::1] rho, int q, double p, int n):
    cdef Py_ssize_t dim = 1 << n
    cdef Py_ssize_t mask = 1 << (n - q - 1)
    cdef Py_ssize_t half = dim >> 1
    cdef Py_ssize_t br, bc, r0, r1, c0, c1
    cdef double keep = 1.0 - p
    cdef cplx s
    with nogil:
        for br in range(half):
            r0 = _expand(br, mask)
            r1 = r0 | mask
            for bc in range(half):
                c0 = _expand(bc, mask)
                c1 = c0 | mask
                s = rho[r0, c0] + rho[r1, c1]
                rho[r0, c0] = keep * rho[r0, c0] + (p / 2.0) * s
                rho[r1, c1] = keep * rho[r1, c1] + (p / 2.0) * s
                rho[r0, c1] = keep * rho[r0, c1]
                rho[r1, c0] = keep * rho[r1, c0]


def depolarize_2q(cplx[:, ::1] rho, int q0, int q1, double p, int n):
    cdef Py_ssize_t dim = 1 << n
    cdef Py_ssize_t m0 = 1 << (n - q0 - 1)
    cdef Py_ssize_t m1 = 1 << (n - q1 - 1)
    cdef Py_ssize_t mlo = m0 if m0 < m1 else m1
    cdef Py_ssize_t mhi = m0 if m0 > m1 else m1
    cdef Py_ssize_t quarter = dim >> 2
    cdef Py_ssize_t br, bc, rbase, cbase, k, l
    cdef Py_ssize_t ridx[4]
    cdef Py_ssize_t cidx[4]
    cdef double keep = 1.0 - p
    cdef cplx s
    with nogil:
        for br in range(quarter):
            rbase = _expand(_expand(br, mlo), mhi)
            ridx[0] = rbase
            ridx[1] = rbase | m1
            ridx[2] = rbase | m0
            ridx[3] = rbase | m0 | m1
            for bc in range(quarter):
                cbase = _expand(_expand(bc, mlo), mhi)
                cidx[0] = cbase
                cidx[1] = cbase | m1
                cidx[2] = cbase | m0
                cidx[3] = cbase | m0 | m1
                s = 0
                for k in range(4):
                    s = s + rho[ridx[k], cidx[k]]
                for k in range(4):
                    for l in range(4):
                        rho[ridx[k], cidx[l]] = keep * rho[ridx[k], cidx[l]]
                for k in range(4):
                    rho[ridx[k], cidx[k]] = rho[ridx[k], cidx[k]] + (p / 4.0) * s


def amplitude_damp(cplx[:, ::1] rho, int q, double gamma, int n):
    cdef Py_ssize_t dim = 1 << n
    cdef Py_ssize_t mask = 1 << (n - q - 1)
    cdef Py_ssize_t half = dim >> 1
    cdef Py_ssize_t br, bc, r0, r1, c0, c1
    cdef double s = sqrt(1.0 - gamma)
    with nogil:
        for br in range(half):
            r0 = _expand(br, mask)
            r1 = r0 | mask
            for bc in range(half):
                c0 = _expand(bc, mask)
                c1 = c0 | mask
                rho[r0, c0] = rho[r0, c0] + gamma * rho[r1, c1]
                rho[r0, c1] = s * rho[r0, c1]
                rho[r1, c0] = s * rho[r1, c0]
                rho[r1, c1] = (1.0 - gamma) * rho[r1, c1]


def phase_damp(cplx[:, ::1] rho, int q, double lam, int n):
    cdef Py_ssize_t dim = 1 << n
    cdef Py_ssize_t mask = 1 << (n - q - 1)
    cdef Py_ssize_t half = dim >> 1
    cdef Py_ssize_t br, bc, r0, r1, c0, c1
    cdef double keep = 1.0 - lam
    with nogil:
        for br in range(half):
            r0 = _expand(br, mask)
            r1 = r0 | mask
            for bc in range(half):
                c0 = _expand(bc, mask)
                c1 = c0 | mask
                rho[r0, c1] = keep * rho[r0, c1]
                rho[r1, c0] = keep * rho[r1, c0]


def rz_phase(cplx[:, ::1] rho, int q, double theta, int n):
    cdef Py_ssize_t dim = 1 << n
    cdef Py_ssize_t mask = 1 << (n - q - 1)
    cdef Py_ssize_t half = dim >> 1
    cdef Py_ssize_t br, bc, r0, r1, c0, c1
    cdef cplx ph = cos(theta) - 1j * sin(theta)
    cdef cplx phc = ph.conjugate()
    with nogil:
        for br in range(half):
            r0 = _expand(br, mask)
            r1 = r0 | mask
            for bc in range(half):
                c0 = _expand(bc, mask)
                c1 = c0 | mask
                rho[r0, c1] = ph * rho[r0, c1]
                rho[r1, c0] = phc * rho[r1, c0]


def pauli_expectation(cplx[:, ::1] rho, codes, int n):
    cdef Py_ssize_t dim = 1 << n
    cdef Py_ssize_t xmask = 0
    cdef Py_ssize_t b, q, bit
    cdef int code
    cdef cplx acc = 0
    cdef cplx amp
    cdef long[::1] cview = np.ascontiguousarray(codes, dtype=np.int64)
    for q in range(n):
        if cview[q] == 1 or cview[q] == 2:
            xmask |= 1 << (n - q - 1)
    with nogil:
        for b in range(dim):
            amp = 1.0
            for q in range(n):
                code = <int> cview[q]
                if code == 0 or code == 1:
                    continue
                bit = (b >> (n - q - 1)) & 1
                if code == 2:
                    amp = amp * (1j * (1.0 - 2.0 * bit))
                else:
                    amp = amp * (1.0 - 2.0 * bit)
            acc = acc + amp * rho[b, b ^ xmask]
    return complex(acc)
