"""Synthetic test images with exact ground truth.

The generators build a piecewise two-level "true" image I on a known
partition, then distort it as

    f = b * I + noise        (multiplicative bias)
    f = I + bias + noise     (additive bias)

with a smooth low-frequency bias profile and optional white Gaussian
noise.  Everything is deterministic given the seed.
"""

from __future__ import annotations

import numpy as np

from .fields import GridSpec, LabelField, ScalarField


def bias_profile(grid: GridSpec) -> np.ndarray:
    """Smooth profile in [-1, 1] spanning the domain (half a period per axis)."""
    x, y = grid.coords()
    return np.sin(np.pi * x / grid.domain_length_x) * np.sin(
        np.pi * y / grid.domain_length_y
    )


def _distort(
    clean: np.ndarray,
    grid: GridSpec,
    bias_strength: float,
    bias_kind: str,
    noise_sigma: float,
    seed: int,
) -> np.ndarray:
    if bias_kind not in ("multiplicative", "additive"):
        raise ValueError(f"unknown bias kind: {bias_kind!r}")
    values = clean.copy()
    if bias_strength != 0.0:
        profile = bias_profile(grid)
        if bias_kind == "multiplicative":
            values = (1.0 + bias_strength * profile) * values
        else:
            values = values + bias_strength * profile
    if noise_sigma > 0.0:
        rng = np.random.default_rng(seed)
        values = values + rng.normal(0.0, noise_sigma, size=values.shape)
    return values


def star_image(
    size: int = 128,
    points: int = 5,
    outer: float = 0.8,
    inner: float = 0.35,
    levels: tuple[float, float] = (0.3, 0.7),
    bias_strength: float = 0.0,
    bias_kind: str = "multiplicative",
    noise_sigma: float = 0.0,
    seed: int = 0,
) -> tuple[ScalarField, LabelField]:
    """Star-shaped foreground on a flat background, with ground truth.

    The star boundary is r(theta) = pi * (c0 + c1 * cos(points * theta))
    with c0, c1 from the ``outer``/``inner`` radius fractions.
    """
    if not 0 < inner < outer <= 1:
        raise ValueError(f"need 0 < inner < outer <= 1, got {inner}, {outer}")
    grid = GridSpec.default(size, size)
    x, y = grid.coords()
    r = np.hypot(x, y)
    theta = np.arctan2(y, x)
    boundary = np.pi * (
        0.5 * (outer + inner) + 0.5 * (outer - inner) * np.cos(points * theta)
    )
    inside = r < boundary
    clean = np.where(inside, levels[1], levels[0])
    values = _distort(clean, grid, bias_strength, bias_kind, noise_sigma, seed)
    return (
        ScalarField(grid, values),
        LabelField(grid, 2, inside.astype(np.int64)),
    )


def split_image(
    size: int = 128,
    levels: tuple[float, float] = (0.0, 1.0),
    orientation: str = "vertical",
    fraction: float = 0.5,
    noise_sigma: float = 0.0,
    seed: int = 0,
) -> tuple[ScalarField, LabelField]:
    """Flat two-level image split along one axis, with ground truth."""
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")
    grid = GridSpec.default(size, size)
    iy, ix = np.indices(grid.shape)
    if orientation == "vertical":
        second = ix >= int(round(fraction * grid.width))
    elif orientation == "horizontal":
        second = iy >= int(round(fraction * grid.height))
    else:
        raise ValueError(f"unknown orientation: {orientation!r}")
    clean = np.where(second, levels[1], levels[0])
    values = _distort(clean, grid, 0.0, "multiplicative", noise_sigma, seed)
    return (
        ScalarField(grid, values),
        LabelField(grid, 2, second.astype(np.int64)),
    )
