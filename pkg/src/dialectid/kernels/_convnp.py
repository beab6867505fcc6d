"""Vectorized numpy fallback for the 1-d convolution kernels."""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def conv1d_forward(x, w, b, stride):
    """Valid cross-correlation of x (cin, t) with w (cout, cin, k) plus bias."""
    k = w.shape[2]
    windows = sliding_window_view(x, k, axis=1)[:, ::stride, :]  # (cin, tp, k)
    return np.tensordot(w, windows, axes=([1, 2], [0, 2])) + b[:, None]


def conv1d_backward(x, w, stride, gy):
    """Gradients of the valid cross-correlation: returns (gx, gw, gb)."""
    k = w.shape[2]
    tp = gy.shape[1]
    windows = sliding_window_view(x, k, axis=1)[:, ::stride, :]
    gw = np.tensordot(gy, windows, axes=([1], [1]))  # (cout, cin, k)
    gb = gy.sum(axis=1)
    # Scatter-add the weight-smeared output gradient back onto the input.
    gx = np.zeros_like(x)
    wg = np.tensordot(w, gy, axes=([0], [0]))  # (cin, k, tp)
    for kk in range(k):
        gx[:, kk:kk + stride * tp:stride] += wg[:, kk, :]
    return gx, gw, gb
