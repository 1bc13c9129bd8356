"""Convolution kernels and their spectral application on the periodic grid.

Three kernel kinds are used by the segmentation energies:

* :class:`HeatKernel` -- the heat semigroup exp(tau * Laplacian).  Built
  directly in frequency space as exp(-tau * |xi|^2) on the periodic
  frequency lattice of the physical domain, which is the exact discrete
  solution operator of u_t = Laplacian(u) at time tau.  Spatially this is
  the Gaussian exp(-|x|^2 / (4 tau)) / (4 pi tau); tau has units of
  length^2.  Mass is exactly 1.

* :class:`GaussianFilter` -- a conventional low-pass filter with standard
  deviation ``sigma`` in *pixel* units, sampled on a (4 ceil(sigma) + 1)^2
  window, normalized to unit sum and periodized onto the grid.  This is
  the filter local intensity fitting models are calibrated against.

* :class:`DiskKernel` -- the sharp indicator of |x| < rho with ``rho`` in
  physical units, sampled with a center-of-pixel inclusion test.  It is
  deliberately unnormalized and applied as a plain sum over the window:
  convolving the constant 1 returns the number of pixels inside the disk
  (approximately pi rho^2 divided by the pixel area).  This raw-count
  convention is what the locally statistical model's stock parameter
  values are calibrated against.

All convolutions are circular (periodic boundary), evaluated with real
FFTs.  An optional mirror mode reflects the field onto a doubled grid
before convolving, for images with strong contrast across the frame edge.

Operators are cached per (kernel, grid) pair and are immutable, so they
can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from .fields import GridSpec, ScalarField


@dataclass(frozen=True)
class HeatKernel:
    """Heat semigroup at time ``tau`` (physical length^2 units)."""

    tau: float

    def __post_init__(self):
        if not (np.isfinite(self.tau) and self.tau > 0):
            raise ValueError(f"tau must be positive, got {self.tau}")


@dataclass(frozen=True)
class GaussianFilter:
    """Low-pass Gaussian filter, ``sigma`` = standard deviation in pixels."""

    sigma: float

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class DiskKernel:
    """Indicator of the disk |x| < radius, ``radius`` in physical units."""

    radius: float

    def __post_init__(self):
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"radius must be positive, got {self.radius}")


KernelSpec = Union[HeatKernel, GaussianFilter, DiskKernel]


def _wrapped_offsets(n: int, h: float, length: float) -> np.ndarray:
    """Signed physical offsets of grid nodes from node 0, wrapped to [-L/2, L/2)."""
    off = h * np.arange(n)
    return (off + 0.5 * length) % length - 0.5 * length


def _heat_symbol(tau: float, grid: GridSpec) -> np.ndarray:
    fy = 2.0 * np.pi * np.fft.fftfreq(grid.height, d=grid.hy)
    fx = 2.0 * np.pi * np.fft.rfftfreq(grid.width, d=grid.hx)
    return np.exp(-tau * (fy[:, None] ** 2 + fx[None, :] ** 2))


def _gaussian_kernel_image(sigma: float, grid: GridSpec) -> np.ndarray:
    # Separable window, periodized by wrapped accumulation so windows larger
    # than the grid remain valid.
    reach = 2 * int(np.ceil(sigma))
    offs = np.arange(-reach, reach + 1)
    w1d = np.exp(-(offs.astype(np.float64) ** 2) / (2.0 * sigma**2))
    wx = np.zeros(grid.width)
    np.add.at(wx, offs % grid.width, w1d)
    wy = np.zeros(grid.height)
    np.add.at(wy, offs % grid.height, w1d)
    img = np.outer(wy, wx)
    return img / img.sum()


def _disk_kernel_image(radius: float, grid: GridSpec) -> np.ndarray:
    dx = _wrapped_offsets(grid.width, grid.hx, grid.domain_length_x)
    dy = _wrapped_offsets(grid.height, grid.hy, grid.domain_length_y)
    r2 = dy[:, None] ** 2 + dx[None, :] ** 2
    return (r2 < radius**2).astype(np.float64)


class ConvOperator:
    """A kernel bound to a grid as a precomputed frequency-domain multiplier."""

    def __init__(self, spec: KernelSpec, grid: GridSpec):
        if isinstance(spec, HeatKernel):
            symbol = _heat_symbol(spec.tau, grid)
        elif isinstance(spec, GaussianFilter):
            symbol = np.fft.rfft2(_gaussian_kernel_image(spec.sigma, grid)).real
        elif isinstance(spec, DiskKernel):
            symbol = np.fft.rfft2(_disk_kernel_image(spec.radius, grid)).real
        else:
            raise TypeError(f"unknown kernel spec: {spec!r}")
        symbol.flags.writeable = False
        self.spec = spec
        self.grid = grid
        self.symbol = symbol

    @property
    def mass(self) -> float:
        """Symbol at zero frequency; the result of convolving the constant 1."""
        return float(self.symbol[0, 0])

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Circular convolution of a raw (height, width) array."""
        spectrum = np.fft.rfft2(values)
        spectrum *= self.symbol
        return np.fft.irfft2(spectrum, s=self.grid.shape)

    def apply_mirrored(self, values: np.ndarray) -> np.ndarray:
        """Convolution with the field reflected onto a doubled grid first."""
        h, w = self.grid.shape
        big = build_operator(self.spec, _doubled_grid(self.grid))
        padded = np.pad(values, ((0, h), (0, w)), mode="symmetric")
        return big.apply(padded)[:h, :w]

    def spatial_kernel(self) -> np.ndarray:
        """Discrete cyclic-convolution weights, centered at index (0, 0).

        ``apply(f)[p] == sum_q spatial_kernel()[p - q mod shape] * f[q]``
        exactly (up to FFT roundoff), for every kernel kind.
        """
        return np.fft.irfft2(self.symbol, s=self.grid.shape)

    def __repr__(self) -> str:
        return f"ConvOperator({self.spec!r}, {self.grid.width}x{self.grid.height})"


def _doubled_grid(grid: GridSpec) -> GridSpec:
    return GridSpec(
        2 * grid.width,
        2 * grid.height,
        2 * grid.domain_length_x,
        2 * grid.domain_length_y,
    )


@lru_cache(maxsize=128)
def build_operator(spec: KernelSpec, grid: GridSpec) -> ConvOperator:
    """Build (or fetch from cache) the spectral operator for ``spec`` on ``grid``."""
    return ConvOperator(spec, grid)


def convolve(
    op: ConvOperator, field: ScalarField, boundary: str = "periodic"
) -> ScalarField:
    """Convolve a field with the operator's kernel.

    ``boundary`` is "periodic" (default, matches the spectral construction)
    or "mirror" (reflect across the frame edge before convolving).
    """
    if field.grid != op.grid:
        raise ValueError(f"grid mismatch: field {field.grid} vs operator {op.grid}")
    if boundary == "periodic":
        out = op.apply(field.values)
    elif boundary == "mirror":
        out = op.apply_mirrored(field.values)
    else:
        raise ValueError(f"unknown boundary mode: {boundary!r}")
    return ScalarField(field.grid, out)
