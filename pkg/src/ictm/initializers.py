"""Initial segmentations for the solver.

All initializers are deterministic given their arguments (the seed only
matters for the "random" kind).  Any partition works as a starting point;
these are the shapes used throughout the tests and demos.
"""

from __future__ import annotations

import numpy as np

from .fields import GridSpec, LabelField

KINDS = ("checkerboard", "circles", "stripes", "random", "from-file")


def initialize(
    kind: str, grid: GridSpec, num_phases: int, seed: int = 0, **kwargs
) -> LabelField:
    """Build an initial LabelField.

    kinds and their keyword options:
      checkerboard  block (pixels, default min(width, height) // 8)
      circles       count (default 2), radius (physical units, default auto);
                    disjoint circles assigned phases 1..n-1 cycling, on a
                    phase-0 background
      stripes       width (pixels, default width // (3 * num_phases))
      random        per-pixel uniform phase, seeded
      from-file     path to a label image written by save_label_map
    """
    if num_phases < 2:
        raise ValueError(f"num_phases must be >= 2, got {num_phases}")
    if kind == "checkerboard":
        block = int(kwargs.pop("block", max(1, min(grid.width, grid.height) // 8)))
        labels = _checkerboard(grid, num_phases, block)
    elif kind == "circles":
        count = int(kwargs.pop("count", 2))
        radius = kwargs.pop("radius", None)
        labels = _circles(grid, num_phases, count, radius)
    elif kind == "stripes":
        width = int(kwargs.pop("width", max(1, grid.width // (3 * num_phases))))
        labels = _stripes(grid, num_phases, width)
    elif kind == "random":
        rng = np.random.default_rng(seed)
        labels = rng.integers(0, num_phases, size=grid.shape)
    elif kind == "from-file":
        from .imageio import load_label_map

        path = kwargs.pop("path")
        lf = load_label_map(path, num_phases)
        if lf.grid.shape != grid.shape:
            raise ValueError(
                f"label file {path} has shape {lf.grid.shape}, expected {grid.shape}"
            )
        labels = lf.labels
    else:
        raise ValueError(f"unknown initializer kind: {kind!r} (choose from {KINDS})")
    if kwargs:
        raise ValueError(f"unused initializer options: {sorted(kwargs)}")
    return LabelField(grid, num_phases, labels)


def _checkerboard(grid: GridSpec, n: int, block: int) -> np.ndarray:
    if block < 1:
        raise ValueError(f"block size must be >= 1, got {block}")
    iy, ix = np.indices(grid.shape)
    return (ix // block + iy // block) % n


def _stripes(grid: GridSpec, n: int, width: int) -> np.ndarray:
    if width < 1:
        raise ValueError(f"stripe width must be >= 1, got {width}")
    _, ix = np.indices(grid.shape)
    return (ix // width) % n


def _circles(grid: GridSpec, n: int, count: int, radius) -> np.ndarray:
    if count < 1:
        raise ValueError(f"circle count must be >= 1, got {count}")
    x, y = grid.coords()
    labels = np.zeros(grid.shape, dtype=np.int64)
    cols = int(np.ceil(np.sqrt(count)))
    rows = int(np.ceil(count / cols))
    cell_w = grid.domain_length_x / cols
    cell_h = grid.domain_length_y / rows
    # Cap the radius so the circles stay disjoint on the layout lattice.
    cap = 0.45 * min(cell_w, cell_h) if count > 1 else 0.5 * min(
        grid.domain_length_x, grid.domain_length_y
    )
    if radius is None:
        r = 0.3 * min(cell_w, cell_h) if count > 1 else 0.25 * min(
            grid.domain_length_x, grid.domain_length_y
        )
    else:
        r = min(float(radius), cap)
    for k in range(count):
        cx = -0.5 * grid.domain_length_x + (k % cols + 0.5) * cell_w
        cy = -0.5 * grid.domain_length_y + (k // cols + 0.5) * cell_h
        inside = (x - cx) ** 2 + (y - cy) ** 2 < r**2
        labels[inside] = 1 + k % (n - 1)
    return labels
