"""Parametric drift fields for scalar drift-diffusion processes.

Two families are supported: linear drifts ``rate * x`` and gradient drifts
``-potential'(x)`` for quartic polynomial potentials. Both carry the constant
diffusion coefficient ``sigma`` and, when confining, expose the stationary
density ``exp(-2 * potential / sigma^2)`` normalized on a grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .grids import Grid, Density, normalized_density


@dataclass(frozen=True)
class QuarticPotential:
    """Polynomial potential ``c0 + c1 x + c2 x^2 + c3 x^3 + c4 x^4``.

    Confinement (value growing to +inf in both tails) is decidable from the
    coefficients: either ``c4 > 0``, or ``c4 == c3 == 0`` with ``c2 > 0``.
    """

    coeffs: tuple[float, float, float, float, float]

    def __post_init__(self):
        c = tuple(float(v) for v in self.coeffs)
        if len(c) != 5:
            raise ValueError(f"expected 5 coefficients c0..c4, got {len(c)}")
        object.__setattr__(self, "coeffs", c)

    def __call__(self, x):
        c0, c1, c2, c3, c4 = self.coeffs
        return c0 + x * (c1 + x * (c2 + x * (c3 + x * c4)))

    def derivative(self, x):
        _, c1, c2, c3, c4 = self.coeffs
        return c1 + x * (2.0 * c2 + x * (3.0 * c3 + x * 4.0 * c4))

    @property
    def confining(self) -> bool:
        _, _, c2, c3, c4 = self.coeffs
        return c4 > 0.0 or (c4 == 0.0 and c3 == 0.0 and c2 > 0.0)


@dataclass(frozen=True)
class LinearDrift:
    """Drift ``rate * x`` with diffusion coefficient ``sigma``.

    Confining (mean-reverting) iff ``rate < 0``; the matching potential is
    ``-rate * x^2 / 2``.
    """

    rate: float
    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    def drift(self, x):
        return self.rate * np.asarray(x, dtype=float)

    def drift_derivative(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.rate)

    def potential(self, x):
        return -self.rate * np.asarray(x, dtype=float) ** 2 / 2.0

    @property
    def confining(self) -> bool:
        return self.rate < 0.0


@dataclass(frozen=True)
class GradientDrift:
    """Drift ``-potential'(x)`` with diffusion coefficient ``sigma``."""

    potential_spec: QuarticPotential
    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    def drift(self, x):
        return -self.potential_spec.derivative(np.asarray(x, dtype=float))

    def drift_derivative(self, x):
        x = np.asarray(x, dtype=float)
        _, _, c2, c3, c4 = self.potential_spec.coeffs
        return -(2.0 * c2 + x * (6.0 * c3 + x * 12.0 * c4))

    def potential(self, x):
        return self.potential_spec(np.asarray(x, dtype=float))

    @property
    def confining(self) -> bool:
        return self.potential_spec.confining


DriftModel = Union[LinearDrift, GradientDrift]


def double_well_drift(sigma: float = 1.0) -> GradientDrift:
    """The symmetric double well ``x^4/4 - x^2/2`` (minima at x = +/-1)."""
    return GradientDrift(QuarticPotential((0.0, 0.0, -0.5, 0.0, 0.25)), sigma=sigma)


def drift_at(model: DriftModel, x):
    """Drift field of the model evaluated at ``x`` (scalar or array)."""
    return model.drift(x)


def invariant_density(model: DriftModel, grid: Grid) -> Density:
    """Stationary density ``exp(-2 potential / sigma^2)`` normalized on the grid.

    Raises for non-confining models, whose stationary measure is not
    normalizable.
    """
    if not model.confining:
        raise ValueError(f"model is not confining: {model!r}")
    log_values = -2.0 * model.potential(grid.x) / model.sigma**2
    # subtract the max before exponentiating so steep potentials do not underflow
    values = np.exp(log_values - log_values.max())
    return normalized_density(grid, values)
