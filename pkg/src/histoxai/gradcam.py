"""Class-evidence heatmaps from conv feature maps (Grad-CAM).

The recipe, for a chosen conv layer with feature maps A^k and a target
class c:

1. backprop the pre-softmax class score y^c down to the chosen layer,
2. alpha_k = spatial mean of dy^c/dA^k (global average pooling),
3. raw map = relu(sum_k alpha_k * A^k),
4. min-max normalize to [0,1]; a constant raw map normalizes to all
   zeros ("no evidence anywhere", not "evidence everywhere"),
5. bilinear corner-aligned upsample to input resolution.

Everything here is pure and read-only on the network, so images can be
explained concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import Network
from .tensor import DTYPE, as_tensor4

# Fixed 256-entry jet-like colormap: dark blue (cold) through cyan,
# yellow, to dark red (hot). Generated from a closed form so the table
# is bit-stable; values are 8-bit RGB rows.
_T = np.arange(256, dtype=DTYPE) / 255.0
JET_LUT = np.stack([
    np.clip(1.5 - np.abs(4.0 * _T - 3.0), 0.0, 1.0),
    np.clip(1.5 - np.abs(4.0 * _T - 2.0), 0.0, 1.0),
    np.clip(1.5 - np.abs(4.0 * _T - 1.0), 0.0, 1.0),
], axis=1)
JET_LUT = np.rint(JET_LUT * 255.0).astype(np.uint8)
del _T


@dataclass
class Heatmap:
    """Normalized class-evidence map at conv resolution plus its
    full-resolution bilinear upsample."""

    values: np.ndarray      # (h', w') in [0, 1]; exactly 0 if degenerate
    source_layer: int       # index of the conv layer explained
    target_class: int
    upsampled: np.ndarray   # (H, W) in [0, 1]
    alphas: np.ndarray      # (k,) channel weights, kept for audit sidecars


@dataclass
class LocalizationResult:
    score: float            # fraction of heatmap mass inside the mask
    degenerate: bool        # True when the heatmap is all zeros


def cam_from_activations(maps: np.ndarray, grads: np.ndarray):
    """Steps 2-4 above as a pure function.

    ``maps`` and ``grads`` are (k, h', w'): the chosen layer's feature
    maps and the class-score gradient w.r.t. them. Returns
    (normalized_map, alphas).
    """
    maps = np.asarray(maps, dtype=DTYPE)
    grads = np.asarray(grads, dtype=DTYPE)
    if maps.ndim != 3 or maps.shape != grads.shape:
        raise ValueError(
            f"need matching (k,h,w) maps/grads, got {maps.shape} vs {grads.shape}")
    alphas = grads.mean(axis=(1, 2))
    raw = np.maximum((alphas[:, None, None] * maps).sum(axis=0), 0.0)
    lo, hi = raw.min(), raw.max()
    span = hi - lo
    if not span > 1e-300:        # constant (incl. all-zero) map
        return np.zeros_like(raw), alphas
    return (raw - lo) / span, alphas


def gradcam_compute(net: Network, image, target_class: int,
                    layer: int | None = None, cache=None) -> Heatmap:
    """Heatmap of class evidence for ``target_class`` on one image.

    ``image`` is one image, (c, h, w) or (1, c, h, w). ``layer`` indexes
    into ``net.layers`` and must be a conv layer; default is the last
    conv layer (deepest features explain best). ``cache`` may carry a
    previous ``classify`` result for this exact image to skip the
    forward pass.
    """
    image = np.asarray(image, dtype=DTYPE)
    if image.ndim == 3:
        image = image[None]
    x = as_tensor4(image, "explained image")
    if x.shape[0] != 1:
        raise ValueError(f"one image at a time, got batch of {x.shape[0]}")
    if layer is None:
        layer = net.last_layer_of_kind("conv2d")
    if not (0 <= layer < len(net.layers)):
        raise ValueError(f"layer index {layer} out of range")
    if net.layers[layer].kind != "conv2d":
        raise ValueError(
            f"layer {layer} is {net.layers[layer].kind!r}, not conv2d")

    if cache is None:
        _, caches, outputs = net.forward_recorded(x, train=False)
    else:
        caches, outputs = cache.layer_caches, cache.layer_outputs
        if outputs[layer].shape[0] != 1:
            raise ValueError("cache was built for a batch, not one image")

    dense_idx = net.last_layer_of_kind("dense")
    logits = outputs[dense_idx]
    if not (0 <= target_class < logits.shape[1]):
        raise ValueError(f"target class {target_class} out of range")
    onehot = np.zeros_like(logits)
    onehot[0, target_class] = 1.0
    grad_at_layer, _ = net.backward(onehot, caches, start_layer=dense_idx,
                                    stop_at_layer=layer)

    values, alphas = cam_from_activations(outputs[layer][0], grad_at_layer[0])
    up = upsample_bilinear(values, x.shape[2], x.shape[3])
    return Heatmap(values=values, source_layer=layer,
                   target_class=int(target_class), upsampled=up,
                   alphas=alphas)


def upsample_bilinear(a: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Corner-aligned bilinear resize of a 2-D map.

    Corners map to corners, so the coarse min/max survive (to float
    round-off) whenever the scale factor is integral.
    """
    a = np.asarray(a, dtype=DTYPE)
    if a.ndim != 2:
        raise ValueError(f"expected 2-D map, got shape {a.shape}")
    h, w = a.shape
    yi = np.linspace(0.0, h - 1.0, out_h) if h > 1 else np.zeros(out_h)
    xi = np.linspace(0.0, w - 1.0, out_w) if w > 1 else np.zeros(out_w)
    y0 = np.floor(yi).astype(np.intp)
    x0 = np.floor(xi).astype(np.intp)
    y0 = np.minimum(y0, h - 1)
    x0 = np.minimum(x0, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (yi - y0)[:, None]
    fx = (xi - x0)[None, :]
    return (a[np.ix_(y0, x0)] * (1 - fy) * (1 - fx)
            + a[np.ix_(y0, x1)] * (1 - fy) * fx
            + a[np.ix_(y1, x0)] * fy * (1 - fx)
            + a[np.ix_(y1, x1)] * fy * fx)


def colormap(values: np.ndarray) -> np.ndarray:
    """Map [0,1] values through the jet-like table to (..., 3) uint8."""
    v = np.asarray(values, dtype=DTYPE)
    if v.min() < 0 or v.max() > 1:
        raise ValueError("colormap input must lie in [0, 1]")
    idx = np.rint(v * 255.0).astype(np.intp)
    return JET_LUT[idx]


def overlay(heatmap, image, alpha: float = 0.4) -> np.ndarray:
    """Blend a colormapped heatmap over an image.

    ``heatmap`` is a Heatmap (its upsampled plane is used) or a 2-D array
    in [0,1]; ``image`` is (3, H, W) float in [0,1] or (H, W, 3) uint8.
    Returns (H, W, 3) uint8: (1-alpha)*image + alpha*colormap(h), clamped.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0,1], got {alpha}")
    h = heatmap.upsampled if isinstance(heatmap, Heatmap) else np.asarray(heatmap)
    img = _as_rgb255(image)
    if h.shape != img.shape[:2]:
        raise ValueError(
            f"heatmap {h.shape} does not match image {img.shape[:2]}")
    blend = (1.0 - alpha) * img + alpha * colormap(h).astype(DTYPE)
    return np.rint(np.clip(blend, 0.0, 255.0)).astype(np.uint8)


def localization_score(heatmap, mask: np.ndarray) -> LocalizationResult:
    """Fraction of total heatmap mass inside a binary region mask.

    All-zero heatmaps cannot be localized; those return score 0 with the
    degenerate flag set.
    """
    h = heatmap.upsampled if isinstance(heatmap, Heatmap) else np.asarray(heatmap, dtype=DTYPE)
    m = np.asarray(mask)
    if m.shape != h.shape:
        raise ValueError(f"mask {m.shape} does not match heatmap {h.shape}")
    m = m.astype(bool)
    total = float(h.sum())
    if total <= 0.0:
        return LocalizationResult(score=0.0, degenerate=True)
    return LocalizationResult(score=float(h[m].sum()) / total, degenerate=False)


def alpha_sidecar_text(heatmap: Heatmap) -> str:
    """Channel-weight dump written next to each overlay for audit."""
    lines = [f"layer={heatmap.source_layer} class={heatmap.target_class} "
             f"channels={len(heatmap.alphas)}"]
    lines += [f"alpha[{k}]={a:.17g}" for k, a in enumerate(heatmap.alphas)]
    return "\n".join(lines) + "\n"


def _as_rgb255(image) -> np.ndarray:
    """Accept (3,H,W) floats in [0,1] or (H,W,3) uint8; return float64
    (H,W,3) in 0..255."""
    img = np.asarray(image)
    if img.ndim != 3:
        raise ValueError(f"expected an RGB image, got shape {img.shape}")
    if img.dtype == np.uint8:
        if img.shape[2] != 3:
            raise ValueError(f"uint8 image must be (H,W,3), got {img.shape}")
        return img.astype(DTYPE)
    if img.shape[0] != 3:
        raise ValueError(f"float image must be (3,H,W), got {img.shape}")
    if img.min() < 0 or img.max() > 1:
        raise ValueError("float image values must lie in [0,1]")
    return np.transpose(img, (1, 2, 0)).astype(DTYPE) * 255.0
