# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled strip-system kernels: residual and Jacobian value assembly.

Mirrors ``fallback`` exactly, including the value ordering documented in
``structure``.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def residual_field(double[:, ::1] h, double dq, double dp, int beta, int m,
                   double head):
    cdef Py_ssize_t n_q = h.shape[0]
    cdef Py_ssize_t npp = h.shape[1]
    cdef Py_ssize_t n_p = npp - 1
    out_arr = np.empty((n_q, npp), dtype=np.float64)
    cdef double[:, ::1] out = out_arr

    cdef double inv2dq = 1.0 / (2.0 * dq)
    cdef double inv2dp = 1.0 / (2.0 * dp)
    cdef double invdq2 = 1.0 / (dq * dq)
    cdef double invdp2 = 1.0 / (dp * dp)
    cdef double inv4 = 1.0 / (4.0 * dq * dp)

    cdef Py_ssize_t i, j, ip, im
    cdef double a, b, c, e, f, b1, bm

    for i in range(n_q):
        ip = i + 1 if i + 1 < n_q else 0
        im = i - 1 if i > 0 else n_q - 1
        out[i, 0] = h[i, 0]
        for j in range(1, n_p):
            a = (h[ip, j] - h[im, j]) * inv2dq
            b = (h[i, j + 1] - h[i, j - 1]) * inv2dp
            c = (h[ip, j] - 2.0 * h[i, j] + h[im, j]) * invdq2
            e = (h[i, j + 1] - 2.0 * h[i, j] + h[i, j - 1]) * invdp2
            f = (h[ip, j + 1] - h[im, j + 1] - h[ip, j - 1] + h[im, j - 1]) * inv4
            out[i, j] = (1.0 + a * a) * e - 2.0 * a * b * f + b * b * c \
                - beta * b * b * b
        a = (h[ip, n_p] - h[im, n_p]) * inv2dq
        b1 = (3.0 * h[i, n_p] - 4.0 * h[i, n_p - 1] + h[i, n_p - 2]) * inv2dp
        bm = b1 if m == 1 else b1 * b1
        out[i, n_p] = (1.0 + a * a) / (2.0 * bm) + h[i, n_p] - head
    return out_arr


def jacobian_values(double[:, ::1] h, double dq, double dp, int beta, int m):
    cdef Py_ssize_t n_q = h.shape[0]
    cdef Py_ssize_t npp = h.shape[1]
    cdef Py_ssize_t n_p = npp - 1
    cdef Py_ssize_t nint = n_q * (n_p - 1)
    vals_arr = np.empty(n_q + 9 * nint + 5 * n_q, dtype=np.float64)
    cdef double[::1] vals = vals_arr

    cdef double inv2dq = 1.0 / (2.0 * dq)
    cdef double inv2dp = 1.0 / (2.0 * dp)
    cdef double invdq2 = 1.0 / (dq * dq)
    cdef double invdp2 = 1.0 / (dp * dp)
    cdef double inv4 = 1.0 / (4.0 * dq * dp)

    cdef Py_ssize_t i, j, ip, im, base, idx
    cdef Py_ssize_t off_int = n_q
    cdef Py_ssize_t off_top = n_q + 9 * nint
    cdef double a, b, c, e, f
    cdef double dN_da, dN_db, dN_dc, dN_de, dN_df
    cdef double b1, bm, dG_da, dG_db1

    for i in range(n_q):
        vals[i] = 1.0

    for i in range(n_q):
        ip = i + 1 if i + 1 < n_q else 0
        im = i - 1 if i > 0 else n_q - 1
        base = i * (n_p - 1)
        for j in range(1, n_p):
            a = (h[ip, j] - h[im, j]) * inv2dq
            b = (h[i, j + 1] - h[i, j - 1]) * inv2dp
            c = (h[ip, j] - 2.0 * h[i, j] + h[im, j]) * invdq2
            e = (h[i, j + 1] - 2.0 * h[i, j] + h[i, j - 1]) * invdp2
            f = (h[ip, j + 1] - h[im, j + 1] - h[ip, j - 1] + h[im, j - 1]) * inv4

            dN_da = 2.0 * a * e - 2.0 * b * f
            dN_db = -2.0 * a * f + 2.0 * b * c - 3.0 * beta * b * b
            dN_dc = b * b
            dN_de = 1.0 + a * a
            dN_df = -2.0 * a * b

            idx = base + (j - 1)
            vals[off_int + 0 * nint + idx] = -2.0 * dN_dc * invdq2 - 2.0 * dN_de * invdp2
            vals[off_int + 1 * nint + idx] = dN_da * inv2dq + dN_dc * invdq2
            vals[off_int + 2 * nint + idx] = -dN_da * inv2dq + dN_dc * invdq2
            vals[off_int + 3 * nint + idx] = dN_db * inv2dp + dN_de * invdp2
            vals[off_int + 4 * nint + idx] = -dN_db * inv2dp + dN_de * invdp2
            vals[off_int + 5 * nint + idx] = dN_df * inv4
            vals[off_int + 6 * nint + idx] = -dN_df * inv4
            vals[off_int + 7 * nint + idx] = -dN_df * inv4
            vals[off_int + 8 * nint + idx] = dN_df * inv4

        a = (h[ip, n_p] - h[im, n_p]) * inv2dq
        b1 = (3.0 * h[i, n_p] - 4.0 * h[i, n_p - 1] + h[i, n_p - 2]) * inv2dp
        bm = b1 if m == 1 else b1 * b1
        dG_da = a / bm
        dG_db1 = -m * (1.0 + a * a) / (2.0 * bm * b1)
        vals[off_top + 0 * n_q + i] = 1.0 + dG_db1 * 3.0 * inv2dp
        vals[off_top + 1 * n_q + i] = dG_da * inv2dq
        vals[off_top + 2 * n_q + i] = -dG_da * inv2dq
        vals[off_top + 3 * n_q + i] = dG_db1 * (-4.0 * inv2dp)
        vals[off_top + 4 * n_q + i] = dG_db1 * inv2dp
    return vals_arr
