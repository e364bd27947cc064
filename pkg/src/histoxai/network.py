"""Sequential network with optional residual skips, plus checkpoint I/O.

The network is a flat list of layers. Residual connections are expressed
with two marker layers: ``residual-begin`` remembers the activation
flowing past it, ``residual-add`` adds that remembered activation to the
branch output. Markers may nest; backward mirrors the stack.

Checkpoints are numpy ``.npz`` containers carrying a JSON header (layer
descriptors plus free-form metadata) and one entry per parameter array,
so a round trip restores value-identical weights.
"""

from __future__ import annotations

import io
import json
import os

import numpy as np

from . import layers as L
from .tensor import DTYPE

CHECKPOINT_FORMAT = "histoxai-checkpoint"
CHECKPOINT_VERSION = 1

_LAYER_KINDS = {
    "conv2d": L.Conv2D,
    "maxpool2d": L.MaxPool2D,
    "relu": L.ReLU,
    "batchnorm": L.BatchNorm2D,
    "dense": L.Dense,
    "flatten": L.Flatten,
    "softmax": L.Softmax,
    "residual-begin": L.ResidualBegin,
    "residual-add": L.ResidualAdd,
}


class Network:
    """Ordered layer list with forward/backward and parameter plumbing."""

    def __init__(self, layers_, meta: dict | None = None):
        self.layers = list(layers_)
        self.meta = dict(meta or {})
        depth = 0
        for lay in self.layers:
            if lay.kind == "residual-begin":
                depth += 1
            elif lay.kind == "residual-add":
                depth -= 1
                if depth < 0:
                    raise ValueError("residual-add without matching residual-begin")
        if depth != 0:
            raise ValueError("unclosed residual-begin marker")

    # ---------------------------------------------------------- forward

    def forward(self, x, train: bool = False):
        """Run all layers; returns (output, caches)."""
        out, caches, _ = self._run(x, train, record=False)
        return out, caches

    def forward_recorded(self, x, train: bool = False):
        """Like forward but also returns every layer's output activation.

        ``outputs[i]`` is the tensor produced by ``self.layers[i]``; marker
        layers record the tensor flowing through them.
        """
        return self._run(x, train, record=True)

    def _run(self, x, train, record):
        caches = [None] * len(self.layers)
        outputs = [None] * len(self.layers) if record else None
        skips = []
        for i, lay in enumerate(self.layers):
            if lay.kind == "residual-begin":
                skips.append(x)
            elif lay.kind == "residual-add":
                skip = skips.pop()
                if skip.shape != x.shape:
                    raise ValueError(
                        f"residual shapes differ: skip {skip.shape} vs "
                        f"branch {x.shape}")
                x = x + skip
            else:
                x, caches[i] = lay.forward(x, train)
            if record:
                outputs[i] = x
        return x, caches, outputs

    # --------------------------------------------------------- backward

    def backward(self, grad_out, caches, start_layer: int | None = None,
                 stop_at_layer: int | None = None):
        """Reverse-mode sweep.

        ``grad_out`` is the gradient w.r.t. the output of ``start_layer``
        (default: the last layer). If ``stop_at_layer`` is given the sweep
        halts there and the first return value is the gradient w.r.t. that
        layer's *output* (its own backward is not applied); otherwise it is
        the gradient w.r.t. the network input. Second return value maps
        layer index -> {param name: gradient array}.
        """
        if start_layer is None:
            start_layer = len(self.layers) - 1
        grads: dict[int, dict] = {}
        skip_grads = []
        g = grad_out
        for i in range(start_layer, -1, -1):
            if stop_at_layer is not None and i == stop_at_layer:
                return g, grads
            lay = self.layers[i]
            if lay.kind == "residual-add":
                skip_grads.append(g)
            elif lay.kind == "residual-begin":
                g = g + skip_grads.pop()
            else:
                g, pg = lay.backward(g, caches[i])
                if pg:
                    grads[i] = pg
        return g, grads

    def backward_from_logits(self, grad_logits, caches):
        """Backward for the fused softmax+cross-entropy path: the caller
        computed the gradient at the logits, so the final softmax layer is
        skipped."""
        if not self.layers or self.layers[-1].kind != "softmax":
            raise ValueError("network does not end in a softmax layer")
        return self.backward(grad_logits, caches,
                             start_layer=len(self.layers) - 2)

    # ------------------------------------------------------- parameters

    def parameters(self):
        """Ordered [(layer_index, name, array)] of trainable parameters."""
        out = []
        for i, lay in enumerate(self.layers):
            for name, arr in lay.params():
                out.append((i, name, arr))
        return out

    def num_params(self) -> int:
        return sum(arr.size for _, _, arr in self.parameters())

    def grad_list(self, grads: dict[int, dict]):
        """Gradient arrays aligned with parameters(); missing entries are
        zero (a parameter the sweep never reached)."""
        out = []
        for i, name, arr in self.parameters():
            g = grads.get(i, {}).get(name)
            out.append(g if g is not None else np.zeros_like(arr))
        return out

    def last_layer_of_kind(self, kind: str) -> int:
        for i in range(len(self.layers) - 1, -1, -1):
            if self.layers[i].kind == kind:
                return i
        raise ValueError(f"network has no {kind!r} layer")

    # ------------------------------------------------------- checkpoint

    def save(self, path: str | os.PathLike) -> None:
        header = {
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "layers": [lay.spec() for lay in self.layers],
            "meta": self.meta,
        }
        arrays = {"header": np.frombuffer(
            json.dumps(header, sort_keys=True).encode(), dtype=np.uint8)}
        for i, lay in enumerate(self.layers):
            for name, arr in lay.params():
                arrays[f"L{i}.{name}"] = arr
            if lay.kind == "batchnorm":
                arrays[f"L{i}.running_mean"] = lay.running_mean
                arrays[f"L{i}.running_var"] = lay.running_var
                arrays[f"L{i}.initialized"] = np.array(
                    1 if lay.initialized else 0, dtype=np.int64)
        buf = io.BytesIO()
        np.savez(buf, **arrays)
        with open(path, "wb") as fh:
            fh.write(buf.getvalue())

    @classmethod
    def load(cls, path: str | os.PathLike) -> "Network":
        if not os.path.exists(path):
            raise FileNotFoundError(f"checkpoint not found: {path}")
        try:
            with np.load(path) as zf:
                arrays = {k: zf[k] for k in zf.files}
        except (OSError, ValueError) as exc:
            raise ValueError(f"unreadable checkpoint {path}: {exc}") from None
        if "header" not in arrays:
            raise ValueError(f"checkpoint {path} has no header entry")
        try:
            header = json.loads(bytes(arrays["header"]).decode())
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ValueError(f"corrupt checkpoint header in {path}: {exc}") from None
        if header.get("format") != CHECKPOINT_FORMAT:
            raise ValueError(f"{path} is not a {CHECKPOINT_FORMAT} file")
        if header.get("version") != CHECKPOINT_VERSION:
            raise ValueError(
                f"unsupported checkpoint version {header.get('version')!r}")
        layers_ = [_layer_from_spec(s) for s in header["layers"]]
        net = cls(layers_, meta=header.get("meta") or {})
        for i, lay in enumerate(net.layers):
            for name, arr in lay.params():
                key = f"L{i}.{name}"
                if key not in arrays:
                    raise ValueError(f"checkpoint missing array {key}")
                val = arrays[key]
                if val.shape != arr.shape:
                    raise ValueError(
                        f"checkpoint array {key} has shape {val.shape}, "
                        f"expected {arr.shape}")
                setattr(lay, name, val.astype(DTYPE))
            if lay.kind == "batchnorm":
                for name in ("running_mean", "running_var"):
                    key = f"L{i}.{name}"
                    if key not in arrays:
                        raise ValueError(f"checkpoint missing array {key}")
                    setattr(lay, name, arrays[key].astype(DTYPE))
                lay.initialized = bool(arrays.get(f"L{i}.initialized", 0))
        return net


def _layer_from_spec(spec: dict):
    kind = spec.get("kind")
    if kind not in _LAYER_KINDS:
        raise ValueError(f"unknown layer kind in checkpoint: {kind!r}")
    kwargs = {k: v for k, v in spec.items() if k != "kind"}
    try:
        return _LAYER_KINDS[kind](**kwargs)
    except TypeError as exc:
        raise ValueError(f"bad {kind} descriptor in checkpoint: {exc}") from None
