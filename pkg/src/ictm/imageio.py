"""Image loading and result rendering (PNG / PGM in, PNG out).

Label maps are written as paletted PNGs whose pixel values are the phase
indices, so a written map re-read with :func:`load_label_map` reproduces
the in-memory LabelField exactly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .fields import GridSpec, LabelField, ScalarField

# Distinct colors for up to 10 phases; indices beyond that cycle.
PHASE_COLORS = [
    (31, 119, 180),
    (255, 127, 14),
    (44, 160, 44),
    (214, 39, 40),
    (148, 103, 189),
    (140, 86, 75),
    (227, 119, 194),
    (127, 127, 127),
    (188, 189, 34),
    (23, 190, 207),
]


def load_image(path) -> ScalarField:
    """Load a grayscale image as a ScalarField on the default domain.

    Multichannel inputs are reduced to luminance by averaging the color
    channels.  Values are kept in the file's native range (e.g. 0..255 for
    8-bit files); rescaling to [0, 1] is a separate, optional step.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"input image not found: {path}")
    try:
        with Image.open(path) as img:
            arr = np.asarray(img, dtype=np.float64)
    except UnidentifiedImageError as exc:
        raise ValueError(f"unsupported or corrupt image file: {path}") from exc
    except OSError as exc:
        raise ValueError(f"failed to decode image {path}: {exc}") from exc
    if arr.ndim == 3:
        arr = arr[:, :, :3].mean(axis=2)
    if arr.ndim != 2 or arr.shape[0] < 2 or arr.shape[1] < 2:
        raise ValueError(f"image {path} has unusable shape {arr.shape}")
    grid = GridSpec.default(arr.shape[1], arr.shape[0])
    return ScalarField(grid, arr)


def save_image(path, field: ScalarField) -> None:
    """Write a field with values in [0, 1] as an 8-bit grayscale PNG."""
    data = np.clip(np.round(field.values * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path)


def _palette() -> list[int]:
    flat = []
    for i in range(256):
        flat.extend(PHASE_COLORS[i % len(PHASE_COLORS)])
    return flat


def save_label_map(path, lf: LabelField) -> None:
    """Write phase indices as a paletted PNG (index-exact round trip)."""
    if lf.num_phases > 256:
        raise ValueError("label maps support at most 256 phases")
    img = Image.fromarray(lf.labels.astype(np.uint8), mode="P")
    img.putpalette(_palette())
    img.save(path)


def load_label_map(path, num_phases: int | None = None) -> LabelField:
    """Read a label image written by :func:`save_label_map` (or any image
    whose pixel values are phase indices)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"label image not found: {path}")
    with Image.open(path) as img:
        if img.mode not in ("P", "L", "I", "I;16"):
            img = img.convert("L")
        arr = np.asarray(img).astype(np.int64)
    if num_phases is None:
        num_phases = max(int(arr.max()) + 1, 2)
    grid = GridSpec.default(arr.shape[1], arr.shape[0])
    return LabelField(grid, num_phases, arr)


def boundary_mask(lf: LabelField) -> np.ndarray:
    """Pixels with a 4-connected neighbor in a different phase (no wrap)."""
    lab = lf.labels
    mask = np.zeros(lab.shape, dtype=bool)
    mask[:-1, :] |= lab[:-1, :] != lab[1:, :]
    mask[1:, :] |= lab[1:, :] != lab[:-1, :]
    mask[:, :-1] |= lab[:, :-1] != lab[:, 1:]
    mask[:, 1:] |= lab[:, 1:] != lab[:, :-1]
    return mask


def save_overlay(path, image: ScalarField, lf: LabelField) -> None:
    """Draw phase boundaries over the (rescaled) input image."""
    lo, hi = image.min(), image.max()
    base = (image.values - lo) / (hi - lo) if hi > lo else np.zeros(image.grid.shape)
    rgb = np.repeat(
        np.clip(np.round(base * 255.0), 0, 255).astype(np.uint8)[:, :, None], 3, axis=2
    )
    edge = boundary_mask(lf)
    for i in range(lf.num_phases):
        sel = edge & (lf.labels == i)
        rgb[sel] = PHASE_COLORS[i % len(PHASE_COLORS)]
    Image.fromarray(rgb, mode="RGB").save(path)
