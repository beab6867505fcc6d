# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled loop kernels for the 1-d convolution forward/backward passes."""

import numpy as np


def conv1d_forward(double[:, ::1] x, double[:, :, ::1] w, double[::1] b,
                   Py_ssize_t stride):
    """Valid cross-correlation of x (cin, t) with w (cout, cin, k) plus bias."""
    cdef Py_ssize_t cin = x.shape[0]
    cdef Py_ssize_t t = x.shape[1]
    cdef Py_ssize_t cout = w.shape[0]
    cdef Py_ssize_t k = w.shape[2]
    cdef Py_ssize_t tp = (t - k) // stride + 1

    y_arr = np.empty((cout, tp), dtype=np.float64)
    cdef double[:, ::1] y = y_arr
    cdef Py_ssize_t o, i, j, kk, base
    cdef double acc

    for o in range(cout):
        for j in range(tp):
            base = j * stride
            acc = b[o]
            for i in range(cin):
                for kk in range(k):
                    acc += w[o, i, kk] * x[i, base + kk]
            y[o, j] = acc
    return y_arr


def conv1d_backward(double[:, ::1] x, double[:, :, ::1] w, Py_ssize_t stride,
                    double[:, ::1] gy):
    """Gradients of the valid cross-correlation: returns (gx, gw, gb)."""
    cdef Py_ssize_t cin = x.shape[0]
    cdef Py_ssize_t t = x.shape[1]
    cdef Py_ssize_t cout = w.shape[0]
    cdef Py_ssize_t k = w.shape[2]
    cdef Py_ssize_t tp = gy.shape[1]

    gx_arr = np.zeros((cin, t), dtype=np.float64)
    gw_arr = np.zeros((cout, cin, k), dtype=np.float64)
    gb_arr = np.zeros(cout, dtype=np.float64)
    cdef double[:, ::1] gx = gx_arr
    cdef double[:, :, ::1] gw = gw_arr
    cdef double[::1] gb = gb_arr
    cdef Py_ssize_t o, i, j, kk, base
    cdef double g

    for o in range(cout):
        for j in range(tp):
            base = j * stride
            g = gy[o, j]
            gb[o] += g
            for i in range(cin):
                for kk in range(k):
                    gw[o, i, kk] += g * x[i, base + kk]
                    gx[i, base + kk] += g * w[o, i, kk]
    return gx_arr, gw_arr, gb_arr
