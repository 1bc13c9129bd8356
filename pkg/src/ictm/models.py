"""Fidelity models: the data-attachment energies and their parameter updates.

Each model owns a parameter bundle Theta and supplies two things to the
solver:

* ``update_theta(image, labels)`` -- the coordinate-descent minimizer of the
  fidelity energy over Theta with the segmentation held fixed (closed form
  for the first three models, one Gauss-Seidel sweep for the locally
  statistical one).  Returns a new model value; models are immutable.
* ``potential(image, i)`` -- the pointwise fidelity density F_i(x), so the
  fidelity energy is sum_i integral(u_i * F_i).

The four models:

* :class:`ChanVese` ("cv"): F_i = (C_i - f)^2 with one constant per phase;
  the update is the phase mean of the image.
* :class:`LocalIntensityFitting` ("lif"): per-phase fitting *functions*
  C_i(x), compared against the image through a Gaussian window G of pixel
  std-dev sigma.  F_i(x) = mu_i * [(G*C_i^2)(x) - 2 f(x) (G*C_i)(x)
  + f(x)^2], the window integral of (C_i(y) - f(x))^2 around x.  The update
  C_i = (G*(u_i f) + eps) / (G*u_i + eps) is the exact minimizer up to the
  eps-regularization that keeps empty-neighborhood quotients defined.
* :class:`LocalGlobalFitting` ("lgif"): convex blend of the two above with
  weight omega on the global term; the two parameter sets decouple, so both
  closed-form updates apply unchanged.
* :class:`LocallyStatistical` ("lsac"): local Gaussian statistics with a
  multiplicative bias field, f ~ b(x) C_i + noise(nu_i), observed through a
  disk window of radius rho (pixels).  F_i(x) = M log(nu_i)
  + [f^2 M - 2 f C_i (I*b) + C_i^2 (I*b^2)](x) / (2 nu_i^2), where I* is
  the plain sum over the disk window and M its pixel count.  One
  Gauss-Seidel sweep updates C -> nu -> b, using the
  previous bias in the C and nu updates and the fresh C, nu in the b
  update; each sub-step is an exact coordinate minimization, so the sweep
  never increases the fidelity energy.

Empty phases keep their previous parameters (the energy does not depend on
them, and keeping state avoids phases teleporting across the image).
"""

from __future__ import annotations

import abc
from dataclasses import dataclass, replace
from functools import cached_property
from typing import ClassVar

import numpy as np

from .fields import GridSpec, LabelField, ScalarField
from .kernels import ConvOperator, DiskKernel, GaussianFilter, build_operator

# Lower clamp for noise levels: the nu update reaches zero on regions the
# model fits exactly, which would blow up the 1/nu^2 terms.
DEFAULT_NU_FLOOR = 1e-4
# Regularizer added to the denominator of the bias update, which can
# degenerate where no phase has support inside the disk window.
BIAS_DENOM_EPS = 1e-8


def _require_finite(what: str, arr: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise RuntimeError(f"non-finite values produced in {what} update")
    return arr


def _locked(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.float64)
    out.flags.writeable = False
    return out


def _phase_weights(n: int, mu) -> np.ndarray:
    mu_arr = np.broadcast_to(np.asarray(mu, dtype=np.float64), (n,)).copy()
    if not np.all(mu_arr > 0):
        raise ValueError(f"phase weights must be positive, got {mu_arr}")
    return mu_arr


class FidelityModel(abc.ABC):
    """Common interface of the four fidelity energies."""

    name: ClassVar[str]

    @property
    @abc.abstractmethod
    def num_phases(self) -> int: ...

    @abc.abstractmethod
    def update_theta(self, image: ScalarField, labels: LabelField) -> "FidelityModel":
        """Minimize the fidelity energy over the parameters, labels fixed."""

    @abc.abstractmethod
    def potential(self, image: ScalarField, phase: int) -> ScalarField:
        """Pointwise fidelity density F_phase(x)."""

    def potential_stack(self, image: ScalarField) -> np.ndarray:
        """All potentials as one (num_phases, height, width) array."""
        return np.stack(
            [self.potential(image, i).values for i in range(self.num_phases)]
        )

    def fidelity_energy(self, image: ScalarField, labels: LabelField) -> float:
        """sum_i integral(u_i * F_i) over the physical domain."""
        self._check_grids(image, labels)
        area = image.grid.pixel_area
        total = 0.0
        for i in range(self.num_phases):
            mask = labels.labels == i
            if mask.any():
                total += float(self.potential(image, i).values[mask].sum()) * area
        return total

    def _check_grids(self, image: ScalarField, labels: LabelField) -> None:
        if image.grid != labels.grid:
            raise ValueError("image and labels live on different grids")
        if labels.num_phases != self.num_phases:
            raise ValueError(
                f"model has {self.num_phases} phases, labels {labels.num_phases}"
            )

    def _check_phase(self, phase: int) -> None:
        if not 0 <= phase < self.num_phases:
            raise ValueError(f"phase {phase} out of range [0, {self.num_phases})")


def _phase_means(
    image: ScalarField, labels: LabelField, previous: np.ndarray
) -> np.ndarray:
    """Mean image intensity per phase; empty phases keep their previous value."""
    counts = labels.phase_counts()
    sums = np.bincount(
        labels.labels.ravel(),
        weights=image.values.ravel(),
        minlength=labels.num_phases,
    )
    means = previous.astype(np.float64).copy()
    occupied = counts > 0
    means[occupied] = sums[occupied] / counts[occupied]
    return _require_finite("phase mean", means)


@dataclass(eq=False)
class ChanVese(FidelityModel):
    """Piecewise-constant fit: one intensity constant per phase."""

    means: np.ndarray

    name: ClassVar[str] = "cv"

    def __post_init__(self):
        self.means = _locked(np.atleast_1d(self.means))
        if self.means.ndim != 1 or self.means.size < 2:
            raise ValueError("need at least two phase constants")
        if not np.all(np.isfinite(self.means)):
            raise ValueError("phase constants must be finite")

    @classmethod
    def initial(cls, num_phases: int) -> "ChanVese":
        return cls(np.zeros(num_phases))

    @property
    def num_phases(self) -> int:
        return self.means.size

    def update_theta(self, image: ScalarField, labels: LabelField) -> "ChanVese":
        self._check_grids(image, labels)
        return ChanVese(_phase_means(image, labels, self.means))

    def potential(self, image: ScalarField, phase: int) -> ScalarField:
        self._check_phase(phase)
        return ScalarField(image.grid, (self.means[phase] - image.values) ** 2)


@dataclass(eq=False)
class LocalIntensityFitting(FidelityModel):
    """Per-phase fitting functions seen through a Gaussian window."""

    fits: tuple[ScalarField, ...]
    sigma: float
    mu: np.ndarray
    eps: float = 1e-6

    name: ClassVar[str] = "lif"

    def __post_init__(self):
        self.fits = tuple(self.fits)
        if len(self.fits) < 2:
            raise ValueError("need at least two fitting functions")
        grid = self.fits[0].grid
        if any(f.grid != grid for f in self.fits):
            raise ValueError("fitting functions live on different grids")
        self.mu = _locked(_phase_weights(len(self.fits), self.mu))
        if self.eps <= 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        GaussianFilter(self.sigma)  # validates sigma

    @classmethod
    def initial(
        cls, grid: GridSpec, num_phases: int, sigma: float, mu=1.0, eps: float = 1e-6
    ) -> "LocalIntensityFitting":
        zero = ScalarField.constant(grid, 0.0)
        return cls((zero,) * num_phases, sigma, _phase_weights(num_phases, mu), eps)

    @property
    def num_phases(self) -> int:
        return len(self.fits)

    @property
    def grid(self) -> GridSpec:
        return self.fits[0].grid

    def _window(self, grid: GridSpec) -> ConvOperator:
        return build_operator(GaussianFilter(self.sigma), grid)

    def update_theta(
        self, image: ScalarField, labels: LabelField
    ) -> "LocalIntensityFitting":
        self._check_grids(image, labels)
        window = self._window(image.grid)
        f = image.values
        fits = []
        for i in range(self.num_phases):
            u = (labels.labels == i).astype(np.float64)
            c = (window.apply(u * f) + self.eps) / (window.apply(u) + self.eps)
            fits.append(ScalarField(image.grid, _require_finite("fitting", c)))
        return replace(self, fits=tuple(fits))

    def potential(self, image: ScalarField, phase: int) -> ScalarField:
        self._check_phase(phase)
        if image.grid != self.grid:
            raise ValueError("image grid does not match fitting functions")
        window = self._window(image.grid)
        f = image.values
        c = self.fits[phase].values
        pot = window.apply(c * c) - 2.0 * f * window.apply(c) + f * f * window.mass
        return ScalarField(image.grid, self.mu[phase] * pot)


@dataclass(eq=False)
class LocalGlobalFitting(FidelityModel):
    """Blend of global phase constants and local fitting functions."""

    local: LocalIntensityFitting
    global_means: np.ndarray
    omega: float

    name: ClassVar[str] = "lgif"

    def __post_init__(self):
        self.global_means = _locked(np.atleast_1d(self.global_means))
        if self.global_means.size != self.local.num_phases:
            raise ValueError("global constants do not match local phase count")
        if not 0.0 <= self.omega <= 1.0:
            raise ValueError(f"omega must lie in [0, 1], got {self.omega}")

    @classmethod
    def initial(
        cls,
        grid: GridSpec,
        num_phases: int,
        sigma: float,
        omega: float,
        mu=1.0,
        eps: float = 1e-6,
    ) -> "LocalGlobalFitting":
        local = LocalIntensityFitting.initial(grid, num_phases, sigma, mu, eps)
        return cls(local, np.zeros(num_phases), omega)

    @property
    def num_phases(self) -> int:
        return self.local.num_phases

    def update_theta(
        self, image: ScalarField, labels: LabelField
    ) -> "LocalGlobalFitting":
        self._check_grids(image, labels)
        # The global and local terms depend on disjoint parameters, so both
        # closed-form updates remain exact under the blend.
        return LocalGlobalFitting(
            self.local.update_theta(image, labels),
            _phase_means(image, labels, self.global_means),
            self.omega,
        )

    def potential(self, image: ScalarField, phase: int) -> ScalarField:
        self._check_phase(phase)
        global_part = (self.global_means[phase] - image.values) ** 2
        local_part = self.local.potential(image, phase).values
        return ScalarField(
            image.grid, self.omega * global_part + (1.0 - self.omega) * local_part
        )


@dataclass(eq=False)
class LocallyStatistical(FidelityModel):
    """Local Gaussian statistics with a multiplicative bias field.

    ``rho`` is the disk-window radius in pixels (converted to physical
    units through the grid spacing when the window operator is built).
    """

    means: np.ndarray
    deviations: np.ndarray
    bias: ScalarField
    rho: float
    nu_floor: float = DEFAULT_NU_FLOOR

    name: ClassVar[str] = "lsac"

    def __post_init__(self):
        self.means = _locked(np.atleast_1d(self.means))
        self.deviations = _locked(np.atleast_1d(self.deviations))
        if self.means.size != self.deviations.size or self.means.size < 2:
            raise ValueError("means and deviations must share length >= 2")
        if self.nu_floor <= 0:
            raise ValueError(f"nu_floor must be positive, got {self.nu_floor}")
        if not np.all(self.deviations >= self.nu_floor):
            raise ValueError("deviations must be >= nu_floor")
        if self.rho <= 0:
            raise ValueError(f"rho must be positive, got {self.rho}")

    @classmethod
    def initial(
        cls,
        grid: GridSpec,
        num_phases: int,
        rho: float,
        nu_floor: float = DEFAULT_NU_FLOOR,
    ) -> "LocallyStatistical":
        # Unbiased start: flat bias field, unit noise levels.
        return cls(
            np.zeros(num_phases),
            np.ones(num_phases),
            ScalarField.constant(grid, 1.0),
            rho,
            nu_floor,
        )

    @property
    def num_phases(self) -> int:
        return self.means.size

    def _window(self, grid: GridSpec) -> ConvOperator:
        if grid != self.bias.grid:
            raise ValueError("grid does not match the bias field")
        return build_operator(DiskKernel(self.rho * grid.hx), grid)

    @cached_property
    def _bias_convs(self) -> tuple[np.ndarray, np.ndarray]:
        """Disk-window convolutions of b and b^2, shared by all phases."""
        window = self._window(self.bias.grid)
        b = self.bias.values
        return window.apply(b), window.apply(b * b)

    def update_theta(
        self, image: ScalarField, labels: LabelField
    ) -> "LocallyStatistical":
        self._check_grids(image, labels)
        window = self._window(image.grid)
        mass = window.mass
        f = image.values
        conv_b, conv_b2 = self._bias_convs  # previous bias field
        counts = labels.phase_counts()
        masks = [labels.labels == i for i in range(self.num_phases)]

        # Phase constants (previous bias held fixed).
        means = self.means.copy()
        for i, mask in enumerate(masks):
            if counts[i] == 0:
                continue
            denom = float(conv_b2[mask].sum())
            if denom > 0.0:
                means[i] = float((conv_b * f)[mask].sum()) / denom
        _require_finite("phase constant", means)

        # Noise levels (fresh constants, previous bias), clamped from below.
        deviations = self.deviations.copy()
        for i, mask in enumerate(masks):
            if counts[i] == 0:
                continue
            residual = (
                f * f * mass - 2.0 * means[i] * f * conv_b + means[i] ** 2 * conv_b2
            )
            var = float(residual[mask].sum()) / (mass * counts[i])
            deviations[i] = max(np.sqrt(max(var, 0.0)), self.nu_floor)
        _require_finite("noise level", deviations)

        # Bias field (fresh constants and noise levels), pointwise quotient.
        num = np.zeros_like(f)
        den = np.full_like(f, BIAS_DENOM_EPS)
        for i, mask in enumerate(masks):
            if counts[i] == 0:
                continue
            u = mask.astype(np.float64)
            weight = means[i] / deviations[i] ** 2
            num += weight * window.apply(f * u)
            den += weight * means[i] * window.apply(u)
        bias = ScalarField(image.grid, _require_finite("bias field", num / den))

        return LocallyStatistical(means, deviations, bias, self.rho, self.nu_floor)

    def potential(self, image: ScalarField, phase: int) -> ScalarField:
        self._check_phase(phase)
        window = self._window(image.grid)
        mass = window.mass
        f = image.values
        conv_b, conv_b2 = self._bias_convs
        c = self.means[phase]
        nu = self.deviations[phase]
        quad = f * f * mass - 2.0 * c * f * conv_b + c * c * conv_b2
        return ScalarField(image.grid, mass * np.log(nu) + quad / (2.0 * nu**2))
