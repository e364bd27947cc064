"""Synthetic two-class "tissue texture" images with ground-truth masks.

Healthy images are pink-hued correlated noise (a value-noise pyramid —
several octaves of seeded coarse grids, bilinearly upsampled and
summed). Diseased images start from the same base texture and add 3-8
darker, bluish, soft-edged elliptical blobs; the union of blob interiors
is recorded as a binary ground-truth mask, which is what makes heatmap
localization objectively checkable.

Two deliberate properties of the generator:

* every image gets a random global brightness offset, so a global
  mean-intensity threshold stays a weak classifier (the classes must be
  separated by local structure, not exposure);
* pixel values are quantized to the 1/255 grid at generation time, so a
  PNG save/load round trip is the identity.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from PIL import Image

from .gradcam import upsample_bilinear
from .tensor import DTYPE, stream_rng

HEALTHY, DISEASED = 0, 1
_CLASS_DIRS = {HEALTHY: "healthy", DISEASED: "diseased"}


@dataclass(frozen=True)
class GenParams:
    """Generator knobs; defaults are the documented dataset contract."""

    size: int = 64
    octaves: tuple[int, ...] = (4, 8, 16, 32)
    octave_weights: tuple[float, ...] = (1.0, 0.5, 0.25, 0.125)
    blob_count: tuple[int, int] = (3, 8)
    blob_radius: tuple[float, float] = (2.5, 8.5)
    blob_area_fraction: tuple[float, float] = (0.01, 0.20)
    brightness_jitter: float = 0.08
    blob_strength: float = 0.85


@dataclass
class LabeledImage:
    image: np.ndarray                 # (3, s, s) float64 in [0, 1]
    label: int                        # 0 healthy / 1 diseased
    name: str                         # stable stem, e.g. "diseased_0031"
    blob_mask: np.ndarray | None = None   # (s, s) bool, diseased only


@dataclass
class LabeledSet:
    items: list[LabeledImage]
    seed: int | None = None
    note: str = ""
    _stack: tuple | None = field(default=None, init=False, repr=False)

    def __len__(self):
        return len(self.items)

    def _stacked(self):
        if self._stack is None:
            imgs = np.stack([it.image for it in self.items]).astype(DTYPE)
            labels = np.array([it.label for it in self.items], dtype=np.intp)
            self._stack = (imgs, labels)
        return self._stack

    @property
    def images(self) -> np.ndarray:
        return self._stacked()[0]

    @property
    def labels(self) -> np.ndarray:
        return self._stacked()[1]

    def take(self, indices) -> "LabeledSet":
        return LabeledSet([self.items[i] for i in indices],
                          seed=self.seed, note=self.note)


def generate(n: int, seed: int, params: GenParams | None = None) -> LabeledSet:
    """n/2 healthy + n/2 diseased images, fully determined by the seed."""
    if n < 2:
        raise ValueError("need at least 2 images (one per class)")
    if n % 2:
        raise ValueError(f"n must be even for a balanced set, got {n}")
    p = params or GenParams()
    if p.blob_area_fraction[0] <= 0 or p.blob_area_fraction[1] >= 1:
        raise ValueError("blob area fraction range must sit inside (0, 1)")
    rng = stream_rng(seed, "data")
    half = n // 2
    items = []
    for i in range(half):
        img = _quantize(_base_texture(rng, p))
        items.append(LabeledImage(img, HEALTHY, f"healthy_{i:04d}"))
    for i in range(half):
        img, mask = _diseased_image(rng, p)
        items.append(LabeledImage(_quantize(img), DISEASED,
                                  f"diseased_{i:04d}", blob_mask=mask))
    return LabeledSet(items, seed=seed,
                      note=f"synthetic texture set (n={n}, seed={seed})")


def split(data: LabeledSet, train_fraction: float = 0.8,
          seed: int = 0) -> tuple[LabeledSet, LabeledSet]:
    """Stratified, seeded, disjoint and exhaustive train/test split."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0,1), got {train_fraction}")
    rng = stream_rng(seed, "shuffle")
    train_idx, test_idx = [], []
    labels = data.labels
    for cls in sorted(set(labels.tolist())):
        idx = np.flatnonzero(labels == cls)
        idx = idx[rng.permutation(len(idx))]
        k = int(round(len(idx) * train_fraction))
        if k == 0 or k == len(idx):
            raise ValueError(
                f"split leaves class {cls} empty on one side "
                f"({len(idx)} items at fraction {train_fraction})")
        train_idx += idx[:k].tolist()
        test_idx += idx[k:].tolist()
    train = data.take(sorted(train_idx))
    test = data.take(sorted(test_idx))
    train.note = data.note + " [train split]"
    test.note = data.note + " [test split]"
    return train, test


# ------------------------------------------------------------- texture

def _base_texture(rng, p: GenParams) -> np.ndarray:
    """Pink-hued multi-octave value noise, (3, s, s) in [0, 1]."""
    s = p.size
    f = np.zeros((s, s), dtype=DTYPE)
    for cells, w in zip(p.octaves, p.octave_weights):
        grid = rng.uniform(0.0, 1.0, size=(cells, cells))
        f += w * upsample_bilinear(grid, s, s)
    lo, hi = f.min(), f.max()
    f = (f - lo) / (hi - lo) if hi > lo else np.zeros_like(f)
    img = np.stack([
        0.72 + 0.24 * f,       # red: dominant, eosin-like
        0.52 + 0.22 * f,       # green: weakest
        0.62 + 0.22 * f,       # blue: in between -> overall pink
    ])
    jitter = rng.uniform(-p.brightness_jitter, p.brightness_jitter)
    return np.clip(img + jitter, 0.0, 1.0)


def _diseased_image(rng, p: GenParams) -> tuple[np.ndarray, np.ndarray]:
    """Base texture plus blob clusters; returns (image, binary mask)."""
    img = _base_texture(rng, p)
    s = p.size
    lo_px = p.blob_area_fraction[0] * s * s
    hi_px = p.blob_area_fraction[1] * s * s
    yy, xx = np.mgrid[0:s, 0:s].astype(DTYPE)
    for _ in range(200):
        count = int(rng.integers(p.blob_count[0], p.blob_count[1] + 1))
        blobs = [_draw_blob_params(rng, p) for _ in range(count)]
        mask = np.zeros((s, s), dtype=bool)
        for cx, cy, rx, ry, theta, _ in blobs:
            mask |= _ellipse_field(xx, yy, cx, cy, rx, ry, theta) <= 1.0
        if lo_px <= mask.sum() <= hi_px:
            break
    else:
        raise RuntimeError("could not draw a blob set in the area range "
                           f"[{lo_px:.0f}, {hi_px:.0f}] px after 200 tries")
    for cx, cy, rx, ry, theta, color in blobs:
        d = _ellipse_field(xx, yy, cx, cy, rx, ry, theta)
        w = np.clip((1.0 - d) / 0.35, 0.0, 1.0) * p.blob_strength
        img = img * (1.0 - w) + color[:, None, None] * w
    return np.clip(img, 0.0, 1.0), mask


def _draw_blob_params(rng, p: GenParams):
    s = p.size
    cx, cy = rng.uniform(0.125 * s, 0.875 * s, size=2)
    rx, ry = rng.uniform(p.blob_radius[0], p.blob_radius[1], size=2)
    theta = rng.uniform(0.0, np.pi)
    color = np.array([0.30, 0.22, 0.48], dtype=DTYPE) + rng.uniform(
        -0.05, 0.05, size=3)
    return cx, cy, rx, ry, theta, color


def _ellipse_field(xx, yy, cx, cy, rx, ry, theta):
    """Quadratic form of a rotated ellipse; <= 1 inside."""
    dx, dy = xx - cx, yy - cy
    u = dx * np.cos(theta) + dy * np.sin(theta)
    v = -dx * np.sin(theta) + dy * np.cos(theta)
    return (u / rx) ** 2 + (v / ry) ** 2


def _quantize(img: np.ndarray) -> np.ndarray:
    return np.rint(img * 255.0) / 255.0


# ----------------------------------------------------------------- I/O

def write_png(path, array: np.ndarray) -> None:
    """8-bit PNG from (H,W,3) uint8, (3,H,W) [0,1] floats, or a 2-D
    grayscale plane (bool or uint8)."""
    a = np.asarray(array)
    if a.ndim == 3 and a.dtype != np.uint8:
        a = np.rint(np.clip(a, 0.0, 1.0) * 255.0).astype(np.uint8).transpose(1, 2, 0)
    elif a.ndim == 2 and a.dtype == bool:
        a = a.astype(np.uint8) * 255
    Image.fromarray(a).save(path, format="PNG")


def read_png(path) -> np.ndarray:
    """PNG -> uint8 array: (H,W,3) for RGB, (H,W) for grayscale."""
    try:
        with Image.open(path) as im:
            im = im.convert("RGB") if im.mode not in ("L", "RGB") else im
            return np.asarray(im.copy())
    except (OSError, SyntaxError) as exc:
        raise ValueError(f"unreadable image {path}: {exc}") from None


def save_dir(data: LabeledSet, root) -> None:
    """Write `<root>/healthy/*.png`, `<root>/diseased/*.png` and
    `<root>/masks/*.png` (masks for diseased items only)."""
    root = os.fspath(root)
    for sub in ("healthy", "diseased", "masks"):
        os.makedirs(os.path.join(root, sub), exist_ok=True)
    for it in data.items:
        cls_dir = _CLASS_DIRS[it.label]
        write_png(os.path.join(root, cls_dir, it.name + ".png"), it.image)
        if it.label == DISEASED and it.blob_mask is not None:
            write_png(os.path.join(root, "masks", it.name + ".png"),
                      it.blob_mask)


def load_dir(root) -> LabeledSet:
    """Read the directory layout written by save_dir.

    Files are enumerated in lexicographic order for determinism. Masks
    are matched to diseased images by filename; a mask paired with a
    healthy image draws a warning and is ignored.
    """
    root = os.fspath(root)
    masks = {}
    mask_dir = os.path.join(root, "masks")
    if os.path.isdir(mask_dir):
        for fname in sorted(os.listdir(mask_dir)):
            if fname.endswith(".png"):
                masks[fname[:-4]] = os.path.join(mask_dir, fname)
    items = []
    for label in (HEALTHY, DISEASED):
        cls_dir = os.path.join(root, _CLASS_DIRS[label])
        if not os.path.isdir(cls_dir):
            raise FileNotFoundError(f"missing class directory: {cls_dir}")
        names = sorted(f for f in os.listdir(cls_dir) if f.endswith(".png"))
        if not names:
            raise ValueError(f"empty class directory: {cls_dir}")
        for fname in names:
            stem = fname[:-4]
            rgb = read_png(os.path.join(cls_dir, fname))
            if rgb.ndim != 3:
                raise ValueError(
                    f"expected RGB image in {cls_dir}: {fname} is grayscale")
            img = rgb.astype(DTYPE).transpose(2, 0, 1) / 255.0
            mask = None
            if stem in masks:
                if label == HEALTHY:
                    warnings.warn(
                        f"mask for healthy image {stem!r} ignored",
                        stacklevel=2)
                else:
                    mask = read_png(masks[stem])
                    if mask.ndim != 2:
                        raise ValueError(f"mask {masks[stem]} is not grayscale")
                    mask = mask > 127
            items.append(LabeledImage(img, label, stem, blob_mask=mask))
    return LabeledSet(items, note=f"loaded from {root}")


# -------------------------------------------------------------- baseline

def mean_intensity_baseline(train: LabeledSet, test: LabeledSet) -> float:
    """Test accuracy of the best global mean-intensity threshold rule.

    The threshold and its orientation are chosen on the train split by
    exhaustive scan over midpoints; this is the degenerate-shortcut
    detector — the generator is supposed to keep this weak (< 0.75).
    """
    tr_m = train.images.mean(axis=(1, 2, 3))
    te_m = test.images.mean(axis=(1, 2, 3))
    tr_y, te_y = train.labels, test.labels
    cuts = np.unique(tr_m)
    cuts = np.concatenate([[cuts[0] - 1e-9],
                           (cuts[:-1] + cuts[1:]) / 2,
                           [cuts[-1] + 1e-9]])
    best = (-1.0, None, None)
    for thr in cuts:
        for orient in (1, 0):   # 1: below-threshold -> diseased
            pred = np.where(tr_m <= thr, orient, 1 - orient)
            acc = float((pred == tr_y).mean())
            if acc > best[0]:
                best = (acc, thr, orient)
    _, thr, orient = best
    pred = np.where(te_m <= thr, orient, 1 - orient)
    return float((pred == te_y).mean())
