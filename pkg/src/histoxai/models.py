"""Classifier families at desk scale, plus the SGD training loop.

Three families, all ending in dense -> softmax over two classes and all
placing their final conv stage on the 8x8 feature grid (64 input / three
2x2 pools) so class-evidence heatmaps upsample cleanly:

* ``plain-cnn``   -- conv/relu/pool pyramid, one conv per stage.
* ``mini-vgg``    -- two 3x3 convs per stage before each 2x2 pool; no
                     other kernel size appears anywhere.
* ``mini-resnet`` -- batchnormed stem and transitions with two residual
                     blocks (identity skips).

Widths are per pooling stage, default (8, 16, 32): deliberately small so
a full train/evaluate cycle stays in CPU-minutes.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import layers as L
from .layers import cross_entropy_grad, cross_entropy_loss, sgd_step
from .network import Network
from .tensor import as_tensor4, stream_rng

FAMILIES = ("plain-cnn", "mini-resnet", "mini-vgg")


class DivergenceError(RuntimeError):
    """Training loss left the reals (NaN/Inf)."""


@dataclass(frozen=True)
class ArchitectureSpec:
    """What to build: family, input geometry, stage widths, init seed."""

    family: str
    input_shape: tuple[int, int, int] = (3, 64, 64)
    classes: int = 2
    widths: tuple[int, ...] = (8, 16, 32)
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(
                f"unknown family {self.family!r}; expected one of {FAMILIES}")
        c, h, w = self.input_shape
        if c != 3:
            raise ValueError("models expect 3-channel input")
        if len(self.widths) != 3 or any(x < 1 for x in self.widths):
            raise ValueError("widths must be three positive stage widths")
        if h % 8 or w % 8 or h < 8 or w < 8:
            raise ValueError(
                f"input {h}x{w} does not divide through three 2x2 pools")
        if self.classes != 2:
            raise ValueError("binary classifiers only")


@dataclass
class TrainHistory:
    """Per-epoch record of one training run."""

    loss: list[float] = field(default_factory=list)
    train_accuracy: list[float] = field(default_factory=list)
    val_accuracy: list[float | None] = field(default_factory=list)
    seconds: list[float] = field(default_factory=list)

    @property
    def epochs(self) -> int:
        return len(self.loss)

    @property
    def total_seconds(self) -> float:
        return float(sum(self.seconds))


def build(spec: ArchitectureSpec) -> Network:
    """Construct and He-initialize a network for the given spec.

    Pure given the spec: same spec yields the identical structure and,
    through the seeded init stream, bit-identical parameters.
    """
    w1, w2, w3 = spec.widths
    _, h, w = spec.input_shape
    conv = lambda ci, co: L.Conv2D(ci, co, kernel=3, stride=1, padding=1)

    if spec.family == "plain-cnn":
        layers = [
            conv(3, w1), L.ReLU(), L.MaxPool2D(),
            conv(w1, w2), L.ReLU(), L.MaxPool2D(),
            conv(w2, w3), L.ReLU(), L.MaxPool2D(),
            conv(w3, w3), L.ReLU(),
        ]
    elif spec.family == "mini-vgg":
        layers = []
        ci = 3
        for wo in (w1, w2, w3):
            layers += [conv(ci, wo), L.ReLU(), conv(wo, wo), L.ReLU(),
                       L.MaxPool2D()]
            ci = wo
        layers += [conv(w3, w3), L.ReLU()]
    else:  # mini-resnet
        def res_block(ch):
            return [L.ResidualBegin(),
                    conv(ch, ch), L.BatchNorm2D(ch), L.ReLU(),
                    conv(ch, ch), L.BatchNorm2D(ch),
                    L.ResidualAdd(), L.ReLU()]
        layers = [conv(3, w1), L.BatchNorm2D(w1), L.ReLU(), L.MaxPool2D()]
        layers += res_block(w1)
        layers += [L.MaxPool2D(), conv(w1, w2), L.BatchNorm2D(w2), L.ReLU()]
        layers += res_block(w2)
        layers += [L.MaxPool2D(), conv(w2, w3), L.BatchNorm2D(w3), L.ReLU()]

    feat = w3 * (h // 8) * (w // 8)
    layers += [L.Flatten(), L.Dense(feat, spec.classes), L.Softmax()]

    net = Network(layers, meta={
        "family": spec.family,
        "input_shape": list(spec.input_shape),
        "classes": spec.classes,
        "widths": list(spec.widths),
        "seed": spec.seed,
    })
    rng = stream_rng(spec.seed, "init")
    for lay in net.layers:
        if hasattr(lay, "init_params"):
            lay.init_params(rng)
    net.meta["num_params"] = net.num_params()
    return net


def train(net: Network, data, lr: float = 0.01, epochs: int = 30,
          batch: int = 16, seed: int = 0, val_data=None,
          log=None) -> tuple[Network, TrainHistory]:
    """Minibatch SGD with seeded shuffling; deterministic given the seed.

    ``data`` (and optional ``val_data``) is anything with ``images``
    (n,3,h,w in [0,1]) and ``labels`` (n, ints) attributes, or an
    (images, labels) pair. ``lr = 0`` is allowed and performs no updates.
    Raises DivergenceError as soon as an epoch loss is not finite.
    """
    images, labels = _images_labels(data)
    n = len(labels)
    if n == 0:
        raise ValueError("empty training set")
    if len(np.unique(labels)) < 2:
        raise ValueError("training data must contain both classes")
    if epochs < 1 or batch < 1:
        raise ValueError("epochs and batch must be >= 1")
    if lr < 0:
        raise ValueError("negative learning rate")

    params = [arr for _, _, arr in net.parameters()]
    rng = stream_rng(seed, "shuffle")
    history = TrainHistory()
    for epoch in range(epochs):
        t0 = time.perf_counter()
        perm = rng.permutation(n)
        loss_sum = 0.0
        hits = 0
        for lo in range(0, n, batch):
            sel = perm[lo:lo + batch]
            x, y = images[sel], labels[sel]
            try:
                probs, caches = net.forward(x, train=True)
                loss_sum += cross_entropy_loss(probs, y) * len(sel)
                hits += int((probs.argmax(axis=1) == y).sum())
                if lr > 0:
                    grad = cross_entropy_grad(probs, y)
                    _, grads = net.backward_from_logits(grad, caches)
                    sgd_step(params, net.grad_list(grads), lr)
            except FloatingPointError as exc:
                raise DivergenceError(
                    f"training diverged at epoch {epoch + 1}: {exc}") from None
        epoch_loss = loss_sum / n
        if not np.isfinite(epoch_loss):
            raise DivergenceError(
                f"training diverged at epoch {epoch + 1}: loss={epoch_loss}")
        val_acc = None
        if val_data is not None:
            vx, vy = _images_labels(val_data)
            cls, _, _ = classify(net, vx)
            val_acc = float((cls == vy).mean())
        history.loss.append(float(epoch_loss))
        history.train_accuracy.append(hits / n)
        history.val_accuracy.append(val_acc)
        history.seconds.append(time.perf_counter() - t0)
        if log is not None:
            msg = (f"epoch {epoch + 1:3d}/{epochs}  loss {epoch_loss:.4f}  "
                   f"train acc {hits / n:.3f}")
            if val_acc is not None:
                msg += f"  val acc {val_acc:.3f}"
            log(msg)
    return net, history


@dataclass
class ActivationCache:
    """Per-call inference record: every conv feature map (by layer index)
    plus the raw layer caches needed to run a backward sweep."""

    conv_maps: dict[int, np.ndarray]
    layer_caches: list
    layer_outputs: list
    logits: np.ndarray
    probs: np.ndarray


def classify(net: Network, images) -> tuple[np.ndarray, np.ndarray, ActivationCache]:
    """Eval-mode inference. Returns (classes, probabilities, cache).

    Classes are argmax of softmax with ties broken toward the lower
    index. The cache retains one feature map per conv layer so heatmap
    computation can reuse this forward pass.
    """
    x = as_tensor4(images, "classify input")
    probs, caches, outputs = net.forward_recorded(x, train=False)
    logits_idx = net.last_layer_of_kind("dense")
    cache = ActivationCache(
        conv_maps={i: outputs[i] for i, lay in enumerate(net.layers)
                   if lay.kind == "conv2d"},
        layer_caches=caches,
        layer_outputs=outputs,
        logits=outputs[logits_idx],
        probs=probs,
    )
    return probs.argmax(axis=1), probs, cache


def _images_labels(data):
    if isinstance(data, tuple):
        images, labels = data
    else:
        images, labels = data.images, data.labels
    images = as_tensor4(images, "training images")
    labels = np.asarray(labels, dtype=np.intp)
    if len(labels) != images.shape[0]:
        raise ValueError("images/labels length mismatch")
    return images, labels


def parse_widths(text: str) -> tuple[int, ...]:
    """Parse a '8,16,32' style stage-width string."""
    try:
        widths = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise ValueError(f"bad widths {text!r}; expected e.g. '8,16,32'") from None
    return widths
