"""
Dense float64 layer primitives.

Every ``*_forward`` returns ``(output, cache)``; the matching ``*_backward``
takes the upstream gradient and the cache and returns the input gradient
plus a dict of parameter gradients. Arrays are NCHW, row-major.

Convolutions go through an im2col view (``sliding_window_view``) and a
single ``tensordot`` contracting input channels, then kernel rows, then
kernel columns, so the reduction order is fixed.
"""

from typing import Any

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

Cache = dict[str, Any]


def conv2d_forward(
    x: np.ndarray, weight: np.ndarray, bias: np.ndarray, padding: int
) -> tuple[np.ndarray, Cache]:
    kh, kw = weight.shape[2:]
    xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding))) if padding else x
    # (N, C, H', W', kh, kw)
    patches = sliding_window_view(xp, (kh, kw), axis=(2, 3))
    out = np.tensordot(patches, weight, axes=([1, 4, 5], [1, 2, 3]))  # (N, H', W', O)
    out = out.transpose(0, 3, 1, 2) + bias[None, :, None, None]
    return np.ascontiguousarray(out), {
        "patches": patches,
        "weight": weight,
        "padding": padding,
        "x_shape": x.shape,
    }


def conv2d_backward(dout: np.ndarray, cache: Cache) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    patches = cache["patches"]
    weight = cache["weight"]
    padding = cache["padding"]
    n, c, h, w = cache["x_shape"]
    kh, kw = weight.shape[2:]
    out_h, out_w = dout.shape[2:]

    d_weight = np.tensordot(dout, patches, axes=([0, 2, 3], [0, 2, 3]))  # (O, C, kh, kw)
    d_bias = dout.sum(axis=(0, 2, 3))

    dxp = np.zeros((n, c, h + 2 * padding, w + 2 * padding))
    for i in range(kh):
        for j in range(kw):
            contrib = np.tensordot(dout, weight[:, :, i, j], axes=([1], [0]))  # (N, H', W', C)
            dxp[:, :, i : i + out_h, j : j + out_w] += contrib.transpose(0, 3, 1, 2)
    dx = dxp[:, :, padding : padding + h, padding : padding + w] if padding else dxp
    return np.ascontiguousarray(dx), {"weight": d_weight, "bias": d_bias}


def affine_forward(x: np.ndarray, scale: np.ndarray, shift: np.ndarray) -> tuple[np.ndarray, Cache]:
    out = x * scale[None, :, None, None] + shift[None, :, None, None]
    return out, {"x": x, "scale": scale}


def affine_backward(dout: np.ndarray, cache: Cache) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    x, scale = cache["x"], cache["scale"]
    return dout * scale[None, :, None, None], {
        "scale": (dout * x).sum(axis=(0, 2, 3)),
        "shift": dout.sum(axis=(0, 2, 3)),
    }


def relu_forward(x: np.ndarray) -> tuple[np.ndarray, Cache]:
    mask = x > 0
    return np.where(mask, x, 0.0), {"mask": mask}


def relu_backward(dout: np.ndarray, cache: Cache) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    return np.where(cache["mask"], dout, 0.0), {}


def maxpool2x2_forward(x: np.ndarray) -> tuple[np.ndarray, Cache]:
    n, c, h, w = x.shape
    windows = x.reshape(n, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(
        n, c, h // 2, w // 2, 4
    )
    # First maximum wins on ties
    winner = windows.argmax(axis=-1)
    out = np.take_along_axis(windows, winner[..., None], axis=-1)[..., 0]
    return out, {"winner": winner, "x_shape": x.shape}


def maxpool2x2_backward(dout: np.ndarray, cache: Cache) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    n, c, h, w = cache["x_shape"]
    winner = cache["winner"]
    routed = np.zeros((n, c, h // 2, w // 2, 4))
    np.put_along_axis(routed, winner[..., None], dout[..., None], axis=-1)
    dx = routed.reshape(n, c, h // 2, w // 2, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h, w)
    return dx, {}


def global_avg_pool_forward(x: np.ndarray) -> tuple[np.ndarray, Cache]:
    return x.mean(axis=(2, 3)), {"x_shape": x.shape}


def global_avg_pool_backward(
    dout: np.ndarray, cache: Cache
) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    n, c, h, w = cache["x_shape"]
    dx = np.broadcast_to(dout[:, :, None, None] / (h * w), (n, c, h, w))
    return np.array(dx), {}


def dense_forward(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> tuple[np.ndarray, Cache]:
    return x @ weight.T + bias[None, :], {"x": x, "weight": weight}


def dense_backward(dout: np.ndarray, cache: Cache) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    x, weight = cache["x"], cache["weight"]
    return dout @ weight, {"weight": dout.T @ x, "bias": dout.sum(axis=0)}


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row softmax; ``-inf`` columns get probability exactly 0."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def softmax_backward(dprobs: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """Gradient w.r.t. logits given the gradient w.r.t. softmax output."""
    inner = (dprobs * probs).sum(axis=1, keepdims=True)
    return probs * (dprobs - inner)
