"""Grid geometry and the two field types everything else operates on.

Images, potentials, fitting functions and bias fields are real-valued
functions sampled on a regular pixel grid covering a rectangular physical
domain.  The default domain is [-pi, pi] x [-pi, pi]; for non-square images
the vertical extent is scaled so pixels stay square, which keeps isotropic
convolution kernels isotropic.  Kernel times/radii are expressed in these
physical units unless stated otherwise.

A segmentation into n phases is stored as one phase index per pixel
(``LabelField``).  This encodes the n binary indicator functions u_1..u_n
with sum(u_i) = 1 everywhere by construction; indicators are materialized
on demand with :func:`indicator`.

Both field types are immutable after construction (backing arrays are
locked), so they are safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Pixel grid mapped onto a rectangular physical domain."""

    width: int
    height: int
    domain_length_x: float
    domain_length_y: float

    def __post_init__(self):
        if self.width < 2 or self.height < 2:
            raise ValueError(
                f"grid must be at least 2x2, got {self.width}x{self.height}"
            )
        for name in ("domain_length_x", "domain_length_y"):
            length = float(getattr(self, name))
            if not np.isfinite(length) or length <= 0.0:
                raise ValueError(f"{name} must be finite and positive, got {length}")

    @classmethod
    def default(cls, width: int, height: int) -> "GridSpec":
        """[-pi, pi] horizontally, vertical extent chosen so pixels are square."""
        return cls(width, height, 2.0 * np.pi, 2.0 * np.pi * height / width)

    @property
    def shape(self) -> tuple[int, int]:
        """Array shape (rows, cols) = (height, width)."""
        return (self.height, self.width)

    @property
    def num_pixels(self) -> int:
        return self.width * self.height

    @property
    def hx(self) -> float:
        return self.domain_length_x / self.width

    @property
    def hy(self) -> float:
        return self.domain_length_y / self.height

    @property
    def pixel_area(self) -> float:
        return self.hx * self.hy

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Pixel-center coordinates (X, Y) as (height, width) arrays.

        Node-centered: x_i = -Lx/2 + i*hx, so x = 0 lies on the grid for
        even widths.
        """
        x = -0.5 * self.domain_length_x + self.hx * np.arange(self.width)
        y = -0.5 * self.domain_length_y + self.hy * np.arange(self.height)
        return np.meshgrid(x, y)


def _as_locked(values, dtype, grid: GridSpec) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    if arr.ndim == 1 and arr.size == grid.num_pixels:
        arr = arr.reshape(grid.shape)
    if arr.shape != grid.shape:
        raise ValueError(f"values shape {arr.shape} does not match grid {grid.shape}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real-valued function sampled on a :class:`GridSpec` (row-major)."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        arr = _as_locked(self.values, np.float64, self.grid)
        if not np.all(np.isfinite(arr)):
            raise ValueError("ScalarField values must be finite (no NaN/Inf)")
        object.__setattr__(self, "values", arr)

    @classmethod
    def constant(cls, grid: GridSpec, value: float) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(value)))

    def min(self) -> float:
        return float(self.values.min())

    def max(self) -> float:
        return float(self.values.max())

    def mean(self) -> float:
        return float(self.values.mean())

    def integral(self) -> float:
        """Integral over the physical domain (sum times pixel area)."""
        return float(self.values.sum()) * self.grid.pixel_area


@dataclass(frozen=True, eq=False)
class LabelField:
    """Partition of the grid into ``num_phases`` segments, one index per pixel."""

    grid: GridSpec
    num_phases: int
    labels: np.ndarray

    def __post_init__(self):
        if self.num_phases < 2:
            raise ValueError(f"num_phases must be >= 2, got {self.num_phases}")
        arr = _as_locked(self.labels, np.int64, self.grid)
        if arr.min() < 0 or arr.max() >= self.num_phases:
            raise ValueError(
                f"labels must lie in [0, {self.num_phases}), "
                f"got range [{arr.min()}, {arr.max()}]"
            )
        object.__setattr__(self, "labels", arr)

    def phase_mask(self, i: int) -> np.ndarray:
        """Boolean mask of pixels in phase ``i``."""
        self._check_phase(i)
        return self.labels == i

    def phase_counts(self) -> np.ndarray:
        """Pixel count per phase, length ``num_phases``."""
        return np.bincount(self.labels.ravel(), minlength=self.num_phases)

    def occupied_phases(self) -> int:
        return int(np.count_nonzero(self.phase_counts()))

    def _check_phase(self, i: int) -> None:
        if not 0 <= i < self.num_phases:
            raise ValueError(f"phase index {i} out of range [0, {self.num_phases})")


def indicator(lf: LabelField, i: int) -> ScalarField:
    """Binary indicator u_i of phase ``i`` as a ScalarField with values in {0, 1}."""
    return ScalarField(lf.grid, lf.phase_mask(i).astype(np.float64))


def normalize_image(raw: ScalarField) -> ScalarField:
    """Affine rescale to [0, 1]; a constant image maps to constant 0."""
    lo, hi = raw.min(), raw.max()
    if hi == lo:
        return ScalarField.constant(raw.grid, 0.0)
    return ScalarField(raw.grid, (raw.values - lo) / (hi - lo))


def changed_pixels(a: LabelField, b: LabelField) -> int:
    """Number of pixels whose phase differs between two label fields."""
    if a.grid != b.grid:
        raise ValueError(f"grid mismatch: {a.grid} vs {b.grid}")
    if a.num_phases != b.num_phases:
        raise ValueError(
            f"phase count mismatch: {a.num_phases} vs {b.num_phases}"
        )
    return int(np.count_nonzero(a.labels != b.labels))
