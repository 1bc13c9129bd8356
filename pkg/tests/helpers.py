"""Independent reference implementations used as test oracles.

Everything here deliberately avoids the library's FFT path: convolutions
are dense direct summations, kernels are sampled from their closed-form
definitions, and energies are accumulated with explicit loops.
"""

from __future__ import annotations

import numpy as np

from ictm import (
    ChanVese,
    GridSpec,
    LabelField,
    LocalGlobalFitting,
    LocalIntensityFitting,
    LocallyStatistical,
    ScalarField,
)


def dense_convolve(weights: np.ndarray, arr: np.ndarray) -> np.ndarray:
    """Direct cyclic convolution, out[p] = sum_q weights[(p - q) % shape] arr[q]."""
    h, w = arr.shape
    out = np.empty_like(arr, dtype=np.float64)
    for j in range(h):
        for i in range(w):
            shifted = np.roll(np.roll(weights, j, axis=0), i, axis=1)
            out[j, i] = float((shifted * arr).sum())
    return out


def wrapped_offsets(n: int, h: float, length: float) -> np.ndarray:
    off = h * np.arange(n)
    return (off + 0.5 * length) % length - 0.5 * length


def sampled_heat_weights(grid: GridSpec, tau: float, wraps: int = 2) -> np.ndarray:
    """Cyclic weights for the continuous heat kernel: periodized samples of
    exp(-|x|^2 / (4 tau)) / (4 pi tau), times the pixel area."""
    dx = wrapped_offsets(grid.width, grid.hx, grid.domain_length_x)
    dy = wrapped_offsets(grid.height, grid.hy, grid.domain_length_y)
    total = np.zeros(grid.shape)
    for a in range(-wraps, wraps + 1):
        for b in range(-wraps, wraps + 1):
            r2 = (dy[:, None] + b * grid.domain_length_y) ** 2 + (
                dx[None, :] + a * grid.domain_length_x
            ) ** 2
            total += np.exp(-r2 / (4.0 * tau)) / (4.0 * np.pi * tau)
    return total * grid.pixel_area


def sampled_gaussian_filter_weights(grid: GridSpec, sigma: float) -> np.ndarray:
    """Truncated pixel-space Gaussian window, unit sum, periodized by loops."""
    reach = 2 * int(np.ceil(sigma))
    weights = np.zeros(grid.shape)
    for j in range(-reach, reach + 1):
        for i in range(-reach, reach + 1):
            weights[j % grid.height, i % grid.width] += np.exp(
                -(i * i + j * j) / (2.0 * sigma * sigma)
            )
    return weights / weights.sum()


def sampled_disk_weights(grid: GridSpec, radius_phys: float) -> np.ndarray:
    """Disk indicator samples (cyclic weights; plain counts, no area factor)."""
    dx = wrapped_offsets(grid.width, grid.hx, grid.domain_length_x)
    dy = wrapped_offsets(grid.height, grid.hy, grid.domain_length_y)
    inside = (dy[:, None] ** 2 + dx[None, :] ** 2) < radius_phys**2
    return inside.astype(np.float64)


def brute_potentials(model, image: ScalarField) -> np.ndarray:
    """Dense double-sum evaluation of the fidelity densities F_i."""
    grid = image.grid
    f = image.values
    n = model.num_phases
    out = np.empty((n,) + grid.shape)
    if isinstance(model, ChanVese):
        for i in range(n):
            out[i] = (model.means[i] - f) ** 2
    elif isinstance(model, LocalIntensityFitting):
        weights = sampled_gaussian_filter_weights(grid, model.sigma)
        for i in range(n):
            c = model.fits[i].values
            out[i] = model.mu[i] * dense_convolve(
                weights, c * c
            ) - 2.0 * model.mu[i] * f * dense_convolve(weights, c)
            out[i] += model.mu[i] * f * f * weights.sum()
    elif isinstance(model, LocalGlobalFitting):
        local = brute_potentials(model.local, image)
        for i in range(n):
            out[i] = (
                model.omega * (model.global_means[i] - f) ** 2
                + (1.0 - model.omega) * local[i]
            )
    elif isinstance(model, LocallyStatistical):
        weights = sampled_disk_weights(grid, model.rho * grid.hx)
        mass = weights.sum()
        b = model.bias.values
        conv_b = dense_convolve(weights, b)
        conv_b2 = dense_convolve(weights, b * b)
        for i in range(n):
            c = model.means[i]
            nu = model.deviations[i]
            out[i] = mass * np.log(nu) + (
                f * f * mass - 2.0 * c * f * conv_b + c * c * conv_b2
            ) / (2.0 * nu**2)
    else:
        raise TypeError(f"no oracle for {type(model)}")
    return out


def brute_fidelity_energy(model, image: ScalarField, labels: LabelField) -> float:
    pots = brute_potentials(model, image)
    area = image.grid.pixel_area
    total = 0.0
    for j in range(image.grid.height):
        for i in range(image.grid.width):
            total += pots[labels.labels[j, i], j, i] * area
    return total


def brute_regularizer_energy(labels: LabelField, tau: float, lam: float) -> float:
    """Dense double-sum of the interface energy with the sampled heat kernel."""
    grid = labels.grid
    weights = sampled_heat_weights(grid, tau)
    area = grid.pixel_area
    total = 0.0
    for i in range(labels.num_phases):
        u = (labels.labels == i).astype(np.float64)
        conv = dense_convolve(weights, 1.0 - u)
        total += float((u * conv).sum()) * area
    return lam * np.sqrt(np.pi / tau) * total


def random_instance(model_name: str, seed: int, size: int = 32, num_phases: int = 2):
    """A random image, segmentation and freshly initialized model."""
    rng = np.random.default_rng(seed)
    grid = GridSpec.default(size, size)
    image = ScalarField(grid, rng.random(grid.shape))
    labels = LabelField(grid, num_phases, rng.integers(0, num_phases, grid.shape))
    if model_name == "cv":
        model = ChanVese.initial(num_phases)
    elif model_name == "lif":
        model = LocalIntensityFitting.initial(grid, num_phases, sigma=2.5)
    elif model_name == "lgif":
        model = LocalGlobalFitting.initial(grid, num_phases, sigma=2.5, omega=0.4)
    elif model_name == "lsac":
        model = LocallyStatistical.initial(grid, num_phases, rho=4.0)
    else:
        raise ValueError(model_name)
    return image, labels, model
