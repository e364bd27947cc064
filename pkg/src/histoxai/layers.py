"""Layer zoo: forward and backward passes for a closed set of layer types.

Each layer is a plain object holding its parameters (float64 numpy arrays)
and hyper-parameters. ``forward(x, train)`` returns ``(output, cache)``;
``backward(grad_out, cache)`` returns ``(grad_input, param_grads)`` where
``param_grads`` maps parameter names to gradient arrays (or is None for
parameter-free layers). Layers never store activations on themselves, so
inference is read-only and safe to run concurrently; only BatchNorm2D in
train mode mutates layer state (its running statistics).

Convolution is cross-correlation (no kernel flip), the universal
deep-learning convention. Max-pool ties break toward the first element in
a row-major scan of the window.
"""

from __future__ import annotations

import numpy as np

from .tensor import DTYPE, as_tensor4, check_finite


def he_uniform(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    """He-uniform sample: U(-limit, limit) with limit = sqrt(6 / fan_in)."""
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape).astype(DTYPE)


class Conv2D:
    """2-D cross-correlation with per-output-channel bias.

    Weights have shape (out_channels, in_channels, k, k). The forward pass
    goes through an im2col buffer and a single matmul so the hot loop is
    BLAS; the backward pass is the exact adjoint (col2im scatter-add).
    """

    kind = "conv2d"

    def __init__(self, in_channels: int, out_channels: int, kernel: int = 3,
                 stride: int = 1, padding: int = 0):
        if kernel < 1 or stride < 1 or padding < 0:
            raise ValueError("kernel/stride must be >= 1 and padding >= 0")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel = kernel
        self.stride = stride
        self.padding = padding
        self.weight = np.zeros((out_channels, in_channels, kernel, kernel), dtype=DTYPE)
        self.bias = np.zeros(out_channels, dtype=DTYPE)

    def init_params(self, rng: np.random.Generator) -> None:
        fan_in = self.in_channels * self.kernel * self.kernel
        self.weight = he_uniform(rng, self.weight.shape, fan_in)
        self.bias = np.zeros(self.out_channels, dtype=DTYPE)

    def params(self):
        return [("weight", self.weight), ("bias", self.bias)]

    def out_size(self, h: int, w: int) -> tuple[int, int]:
        k, s, p = self.kernel, self.stride, self.padding
        if (h + 2 * p - k) % s or (w + 2 * p - k) % s:
            raise ValueError(
                f"conv output dims not integral: input {h}x{w}, "
                f"kernel {k}, stride {s}, padding {p}")
        return (h + 2 * p - k) // s + 1, (w + 2 * p - k) // s + 1

    def forward(self, x, train):
        x = as_tensor4(x, "conv input")
        n, c, h, w = x.shape
        if c != self.in_channels:
            raise ValueError(
                f"conv expects {self.in_channels} input channels, got {c}")
        h_out, w_out = self.out_size(h, w)
        cols = _im2col(x, self.kernel, self.stride, self.padding, h_out, w_out)
        w2 = self.weight.reshape(self.out_channels, -1)
        out = cols @ w2.T + self.bias            # (n, h'w', out_c)
        out = out.transpose(0, 2, 1).reshape(n, self.out_channels, h_out, w_out)
        if __debug__:
            check_finite(out, "conv2d forward")
        return out, (x.shape, cols)

    def backward(self, grad_out, cache):
        x_shape, cols = cache
        n, _, h, w = x_shape
        n_g, oc, h_out, w_out = grad_out.shape
        if (oc, h_out * w_out) != (self.out_channels, cols.shape[1]):
            raise ValueError(f"conv grad_out shape {grad_out.shape} mismatch")
        g2 = grad_out.reshape(n, oc, h_out * w_out).transpose(0, 2, 1)  # (n, h'w', oc)
        grad_bias = grad_out.sum(axis=(0, 2, 3))
        grad_weight = (g2.reshape(-1, oc).T @ cols.reshape(-1, cols.shape[2]))
        grad_weight = grad_weight.reshape(self.weight.shape)
        grad_cols = g2 @ self.weight.reshape(oc, -1)     # (n, h'w', c*k*k)
        grad_x = _col2im(grad_cols, x_shape, self.kernel, self.stride,
                         self.padding, h_out, w_out)
        if __debug__:
            check_finite(grad_x, "conv2d backward")
        return grad_x, {"weight": grad_weight, "bias": grad_bias}

    def spec(self):
        return {"kind": self.kind, "in_channels": self.in_channels,
                "out_channels": self.out_channels, "kernel": self.kernel,
                "stride": self.stride, "padding": self.padding}


def _im2col(x, k, stride, pad, h_out, w_out):
    """Unfold (n, c, h, w) into (n, h_out*w_out, c*k*k) patch rows."""
    n, c = x.shape[:2]
    if pad:
        x = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    win = np.lib.stride_tricks.sliding_window_view(x, (k, k), axis=(2, 3))
    win = win[:, :, ::stride, ::stride]               # (n, c, h', w', k, k)
    cols = win.transpose(0, 2, 3, 1, 4, 5).reshape(n, h_out * w_out, c * k * k)
    return np.ascontiguousarray(cols)


def _col2im(cols, x_shape, k, stride, pad, h_out, w_out):
    """Adjoint of _im2col: scatter-add patch rows back onto the image."""
    n, c, h, w = x_shape
    hp, wp = h + 2 * pad, w + 2 * pad
    gx = np.zeros((n, c, hp, wp), dtype=DTYPE)
    cols6 = cols.reshape(n, h_out, w_out, c, k, k).transpose(0, 3, 1, 2, 4, 5)
    for i in range(k):
        for j in range(k):
            gx[:, :, i:i + stride * h_out:stride,
               j:j + stride * w_out:stride] += cols6[:, :, :, :, i, j]
    if pad:
        gx = gx[:, :, pad:pad + h, pad:pad + w]
    return gx


class MaxPool2D:
    """2x2 max pooling with stride 2; ties go to the first element in
    row-major window order. Backward routes gradient only to the argmax."""

    kind = "maxpool2d"
    size = 2
    stride = 2

    def params(self):
        return []

    def forward(self, x, train):
        x = as_tensor4(x, "pool input")
        n, c, h, w = x.shape
        if h % 2 or w % 2:
            raise ValueError(f"pool needs even spatial dims, got {h}x{w}")
        win = (x.reshape(n, c, h // 2, 2, w // 2, 2)
                .transpose(0, 1, 2, 4, 3, 5)
                .reshape(n, c, h // 2, w // 2, 4))
        idx = win.argmax(axis=-1)
        out = np.take_along_axis(win, idx[..., None], axis=-1)[..., 0]
        return out, (x.shape, idx)

    def backward(self, grad_out, cache):
        x_shape, idx = cache
        n, c, h, w = x_shape
        if grad_out.shape != idx.shape:
            raise ValueError(f"pool grad_out shape {grad_out.shape} mismatch")
        win = np.zeros((n, c, h // 2, w // 2, 4), dtype=DTYPE)
        np.put_along_axis(win, idx[..., None], grad_out[..., None], axis=-1)
        gx = (win.reshape(n, c, h // 2, w // 2, 2, 2)
                 .transpose(0, 1, 2, 4, 3, 5)
                 .reshape(n, c, h, w))
        return gx, None

    def spec(self):
        return {"kind": self.kind}


class ReLU:
    """Elementwise max(0, x); backward masks positions where input <= 0."""

    kind = "relu"

    def params(self):
        return []

    def forward(self, x, train):
        mask = x > 0
        return np.where(mask, x, 0.0), mask

    def backward(self, grad_out, cache):
        return np.where(cache, grad_out, 0.0), None

    def spec(self):
        return {"kind": self.kind}


class BatchNorm2D:
    """Per-channel batch normalization with learnable scale/shift.

    Train mode normalizes by the batch statistics of the current call and
    blends them into running statistics with the given momentum; eval mode
    uses the running statistics and fails loudly if none were ever
    recorded. Batch variance is the biased (population) estimate, used for
    both normalization and the running buffers.
    """

    kind = "batchnorm"

    def __init__(self, channels: int, momentum: float = 0.1, eps: float = 1e-5):
        self.channels = channels
        self.momentum = momentum
        self.eps = eps
        self.gamma = np.ones(channels, dtype=DTYPE)
        self.beta = np.zeros(channels, dtype=DTYPE)
        self.running_mean = np.zeros(channels, dtype=DTYPE)
        self.running_var = np.ones(channels, dtype=DTYPE)
        self.initialized = False

    def params(self):
        return [("gamma", self.gamma), ("beta", self.beta)]

    def forward(self, x, train):
        x = as_tensor4(x, "batchnorm input")
        if x.shape[1] != self.channels:
            raise ValueError(
                f"batchnorm expects {self.channels} channels, got {x.shape[1]}")
        if train:
            mean = x.mean(axis=(0, 2, 3))
            var = x.var(axis=(0, 2, 3))
            m = self.momentum
            self.running_mean = (1 - m) * self.running_mean + m * mean
            self.running_var = (1 - m) * self.running_var + m * var
            self.initialized = True
        else:
            if not self.initialized:
                raise RuntimeError(
                    "batchnorm eval before any train step: running stats unset")
            mean, var = self.running_mean, self.running_var
        inv = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mean[None, :, None, None]) * inv[None, :, None, None]
        out = self.gamma[None, :, None, None] * xhat + self.beta[None, :, None, None]
        if __debug__:
            check_finite(out, "batchnorm forward")
        return out, (xhat, inv, train)

    def backward(self, grad_out, cache):
        xhat, inv, was_train = cache
        if grad_out.shape != xhat.shape:
            raise ValueError(f"batchnorm grad_out shape {grad_out.shape} mismatch")
        dgamma = (grad_out * xhat).sum(axis=(0, 2, 3))
        dbeta = grad_out.sum(axis=(0, 2, 3))
        scale = (self.gamma * inv)[None, :, None, None]
        if was_train:
            n, _, h, w = grad_out.shape
            m = n * h * w
            gx = scale * (grad_out
                          - dbeta[None, :, None, None] / m
                          - xhat * dgamma[None, :, None, None] / m)
        else:
            gx = scale * grad_out
        return gx, {"gamma": dgamma, "beta": dbeta}

    def spec(self):
        return {"kind": self.kind, "channels": self.channels,
                "momentum": self.momentum, "eps": self.eps}


class Flatten:
    """(n, c, h, w) -> (n, c*h*w), row-major."""

    kind = "flatten"

    def params(self):
        return []

    def forward(self, x, train):
        n = x.shape[0]
        return x.reshape(n, -1), x.shape

    def backward(self, grad_out, cache):
        return grad_out.reshape(cache), None

    def spec(self):
        return {"kind": self.kind}


class Dense:
    """Affine map y = W x + b on flattened inputs; W is (out, in)."""

    kind = "dense"

    def __init__(self, in_features: int, out_features: int):
        self.in_features = in_features
        self.out_features = out_features
        self.weight = np.zeros((out_features, in_features), dtype=DTYPE)
        self.bias = np.zeros(out_features, dtype=DTYPE)

    def init_params(self, rng: np.random.Generator) -> None:
        self.weight = he_uniform(rng, self.weight.shape, self.in_features)
        self.bias = np.zeros(self.out_features, dtype=DTYPE)

    def params(self):
        return [("weight", self.weight), ("bias", self.bias)]

    def forward(self, x, train):
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise ValueError(
                f"dense expects (n, {self.in_features}), got {x.shape}")
        out = x @ self.weight.T + self.bias
        if __debug__:
            check_finite(out, "dense forward")
        return out, x

    def backward(self, grad_out, cache):
        x = cache
        if grad_out.shape != (x.shape[0], self.out_features):
            raise ValueError(f"dense grad_out shape {grad_out.shape} mismatch")
        grad_weight = grad_out.T @ x
        grad_bias = grad_out.sum(axis=0)
        grad_x = grad_out @ self.weight
        return grad_x, {"weight": grad_weight, "bias": grad_bias}

    def spec(self):
        return {"kind": self.kind, "in_features": self.in_features,
                "out_features": self.out_features}


class Softmax:
    """Row softmax with max-subtraction for overflow safety."""

    kind = "softmax"

    def params(self):
        return []

    def forward(self, x, train):
        if np.isnan(x).any():
            raise FloatingPointError("softmax got NaN logits")
        probs = softmax(x)
        return probs, probs

    def backward(self, grad_out, cache):
        # full Jacobian-vector product; training uses the fused
        # cross-entropy path instead (see cross_entropy_grad)
        p = cache
        return p * (grad_out - (grad_out * p).sum(axis=-1, keepdims=True)), None

    def spec(self):
        return {"kind": self.kind}


class ResidualBegin:
    """Marker opening a residual block; the network stacks the incoming
    activation here and ResidualAdd later adds it back."""

    kind = "residual-begin"

    def params(self):
        return []

    def spec(self):
        return {"kind": self.kind}


class ResidualAdd:
    """Marker closing a residual block: output = branch + stacked skip."""

    kind = "residual-add"

    def params(self):
        return []

    def spec(self):
        return {"kind": self.kind}


def softmax(logits: np.ndarray) -> np.ndarray:
    """Exp-normalize along the last axis. Finite inputs in, (0,1) out."""
    z = np.asarray(logits, dtype=DTYPE)
    if np.isnan(z).any():
        raise FloatingPointError("softmax got NaN input")
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy_loss(probs: np.ndarray, true_classes) -> float:
    """Mean negative log-likelihood of the true class.

    ``probs`` is (n, k) softmax output (or a single (k,) vector);
    ``true_classes`` the matching class indices.
    """
    p, idx = _as_batch(probs, true_classes)
    with np.errstate(divide="ignore"):
        losses = -np.log(p[np.arange(len(idx)), idx])
    return float(losses.mean())


def cross_entropy_grad(probs: np.ndarray, true_classes) -> np.ndarray:
    """Gradient of the mean cross-entropy at the logits: (p - onehot) / n.

    This is the fused softmax+cross-entropy backward; feed it to the
    network's backward pass starting below the softmax layer.
    """
    p, idx = _as_batch(probs, true_classes)
    grad = p.copy()
    grad[np.arange(len(idx)), idx] -= 1.0
    grad /= len(idx)
    return grad if np.asarray(probs).ndim == 2 else grad[0]


def _as_batch(probs, true_classes):
    p = np.asarray(probs, dtype=DTYPE)
    if p.ndim == 1:
        p = p[None, :]
    idx = np.atleast_1d(np.asarray(true_classes, dtype=np.intp))
    if len(idx) != p.shape[0]:
        raise ValueError("one true class per probability row required")
    if idx.min() < 0 or idx.max() >= p.shape[1]:
        raise ValueError(f"class index out of range for {p.shape[1]} classes")
    return p, idx


def sgd_step(params, grads, learning_rate: float) -> None:
    """In-place w <- w - lr * g over aligned parameter/gradient lists.

    Order of the lists is the deterministic update order.
    """
    if learning_rate <= 0:
        raise ValueError("learning rate must be > 0")
    if len(params) != len(grads):
        raise ValueError("params and grads must align")
    for w, g in zip(params, grads):
        if w.shape != g.shape:
            raise ValueError(f"param/grad shape mismatch: {w.shape} vs {g.shape}")
        w -= learning_rate * g
