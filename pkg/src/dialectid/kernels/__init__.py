"""1-d convolution kernels: compiled core with a numpy fallback.

The compiled extension is preferred when present. Set DIALECTID_KERNELS=numpy
to force the fallback, or DIALECTID_KERNELS=ext to fail loudly if the
extension was not built.
"""

import os

import numpy as np

from . import _convnp

_choice = os.environ.get("DIALECTID_KERNELS", "").strip().lower()
if _choice not in ("", "ext", "numpy"):
    raise ValueError(f"DIALECTID_KERNELS must be 'ext' or 'numpy', got {_choice!r}")

_ext = None
if _choice != "numpy":
    try:
        from . import _convext as _ext
    except ImportError:
        _ext = None
if _choice == "ext" and _ext is None:
    raise ImportError("DIALECTID_KERNELS=ext but the compiled kernels are not built")

backend = "ext" if _ext is not None else "numpy"
_impl = _ext if _ext is not None else _convnp


def conv1d_forward(x, w, b, stride=1):
    """Valid (no padding) cross-correlation along time.

    Args:
        x: input, shape (in_channels, t), float64.
        w: filters, shape (out_channels, in_channels, kernel_width), float64.
        b: biases, shape (out_channels,), float64.
        stride: positive step between filter applications.

    Returns:
        output of shape (out_channels, (t - kernel_width)//stride + 1).
    """
    k = w.shape[2]
    if x.shape[1] < k:
        raise ValueError(
            f"input too short for conv1d: {x.shape[1]} frames, kernel needs >= {k}"
        )
    return _impl.conv1d_forward(np.ascontiguousarray(x), w, b, stride)


def conv1d_backward(x, w, stride, gy):
    """Backward pass of conv1d_forward; returns (grad_x, grad_w, grad_b)."""
    return _impl.conv1d_backward(np.ascontiguousarray(x), w, stride,
                                 np.ascontiguousarray(gy))
