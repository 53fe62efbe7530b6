# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled RK4 stepping of the GKSL equation for small dense matrices."""
import numpy as np
cimport numpy as cnp

ctypedef double complex cplx


cdef void _rhs(const cplx[:, ::1] heff, const cplx[:, :, ::1] jumps,
               const cplx[:, ::1] rho, cplx[:, ::1] out, cplx[:, ::1] tmp) noexcept nogil:
    # out = -i (heff rho - rho heff^dagger) + sum_k L rho L^dagger
    cdef Py_ssize_t d = rho.shape[0], nj = jumps.shape[0]
    cdef Py_ssize_t i, j, m, k
    cdef cplx acc, a2
    for i in range(d):
        for j in range(d):
            acc = 0
            for m in range(d):
                acc = acc + heff[i, m] * rho[m, j] - rho[i, m] * heff[j, m].conjugate()
            out[i, j] = -1j * acc
    for k in range(nj):
        for i in range(d):
            for j in range(d):
                a2 = 0
                for m in range(d):
                    a2 = a2 + jumps[k, i, m] * rho[m, j]
                tmp[i, j] = a2
        for i in range(d):
            for j in range(d):
                a2 = 0
                for m in range(d):
                    a2 = a2 + tmp[i, m] * jumps[k, j, m].conjugate()
                out[i, j] = out[i, j] + a2


def rk4_integrate(cnp.ndarray hamiltonian, cnp.ndarray jumps, cnp.ndarray rho0,
                  double dt, Py_ssize_t n_steps):
    """Return ``n_steps + 1`` states; every state is re-symmetrised."""
    cdef Py_ssize_t d = rho0.shape[0]
    cdef Py_ssize_t s, i, j
    h = np.array(hamiltonian, dtype=np.complex128, order="C")
    ls = np.array(jumps, dtype=np.complex128, order="C").reshape(-1, d, d)
    heff_arr = h - 0.5j * np.einsum("kji,kjl->il", ls.conj(), ls) if ls.shape[0] else h.copy()
    heff_arr = np.ascontiguousarray(heff_arr)
    out_arr = np.empty((n_steps + 1, d, d), dtype=np.complex128)
    out_arr[0] = rho0
    cdef cplx[:, ::1] heff = heff_arr
    cdef cplx[:, :, ::1] L = ls
    cdef cplx[:, :, ::1] out = out_arr
    cdef cplx[:, ::1] k1 = np.empty((d, d), dtype=np.complex128)
    cdef cplx[:, ::1] k2 = np.empty((d, d), dtype=np.complex128)
    cdef cplx[:, ::1] k3 = np.empty((d, d), dtype=np.complex128)
    cdef cplx[:, ::1] k4 = np.empty((d, d), dtype=np.complex128)
    cdef cplx[:, ::1] y = np.empty((d, d), dtype=np.complex128)
    cdef cplx[:, ::1] tmp = np.empty((d, d), dtype=np.complex128)
    cdef cplx[:, ::1] cur
    cdef cplx a, b
    cdef double half = 0.5 * dt, sixth = dt / 6.0
    with nogil:
        for s in range(n_steps):
            cur = out[s]
            _rhs(heff, L, cur, k1, tmp)
            for i in range(d):
                for j in range(d):
                    y[i, j] = cur[i, j] + half * k1[i, j]
            _rhs(heff, L, y, k2, tmp)
            for i in range(d):
                for j in range(d):
                    y[i, j] = cur[i, j] + half * k2[i, j]
            _rhs(heff, L, y, k3, tmp)
            for i in range(d):
                for j in range(d):
                    y[i, j] = cur[i, j] + dt * k3[i, j]
            _rhs(heff, L, y, k4, tmp)
            for i in range(d):
                for j in range(d):
                    out[s + 1, i, j] = cur[i, j] + sixth * (
                        k1[i, j] + 2 * k2[i, j] + 2 * k3[i, j] + k4[i, j])
            for i in range(d):
                for j in range(i, d):
                    a = out[s + 1, i, j]
                    b = out[s + 1, j, i]
                    a = 0.5 * (a + b.conjugate())
                    out[s + 1, i, j] = a
                    out[s + 1, j, i] = a.conjugate()
    return out_arr
