"""
State vectors and inner-product algebra.

Two realizations of a Hilbert-space element are supported:

- ``FiniteState``: a vector in C^K.
- ``GridState``: a complex function sampled on a uniform periodic 1-D grid.
  The inner product is the Riemann sum ``dx * sum(conj(a) * b)``, which is
  exact for band-limited periodic functions and consistent with the
  spectral derivative used by the NLSE model.

States are immutable: the sample arrays are copied and flagged read-only.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Union

import numpy as np

from .errors import DimensionError, GridTooSmallError, ZeroVectorError

# Norms at or below ZERO_NORM_SCALE * sqrt(dimension) are refused by normalize().
ZERO_NORM_SCALE = 1e-12


def _frozen_complex(values, ndim: int = 1) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128, copy=True)
    if arr.ndim != ndim:
        raise DimensionError(f"expected a {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("state amplitudes must be finite")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid: point i sits at ``x_min + i * dx``."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ValueError("grid requires x_max > x_min")
        n = self.n_points
        if n < 8 or n & (n - 1):
            raise ValueError(f"n_points must be a power of two >= 8, got {n}")

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @cached_property
    def x(self) -> np.ndarray:
        x = self.x_min + self.dx * np.arange(self.n_points)
        x.flags.writeable = False
        return x

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        k = 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)
        k.flags.writeable = False
        return k

    def refined(self) -> "Grid":
        """Same interval with twice the points."""
        return Grid(self.x_min, self.x_max, 2 * self.n_points)


@dataclass(frozen=True, eq=False)
class FiniteState:
    """Vector of K complex amplitudes (K >= 1)."""

    components: np.ndarray

    def __post_init__(self):
        arr = _frozen_complex(self.components)
        if arr.size < 1:
            raise DimensionError("a finite state needs at least one component")
        object.__setattr__(self, "components", arr)

    @property
    def data(self) -> np.ndarray:
        return self.components

    @property
    def dimension(self) -> int:
        return self.components.size

    @property
    def weight(self) -> float:
        return 1.0

    def like(self, values) -> "FiniteState":
        """New state of the same realization holding ``values``."""
        return FiniteState(values)

    def __repr__(self):
        return f"FiniteState({np.array2string(self.components, precision=6)})"


@dataclass(frozen=True, eq=False)
class GridState:
    """Complex samples of a wavefunction on a ``Grid``."""

    grid: Grid
    samples: np.ndarray

    def __post_init__(self):
        arr = _frozen_complex(self.samples)
        if arr.size != self.grid.n_points:
            raise DimensionError(
                f"{arr.size} samples given for a grid of {self.grid.n_points} points"
            )
        object.__setattr__(self, "samples", arr)

    @property
    def data(self) -> np.ndarray:
        return self.samples

    @property
    def dimension(self) -> int:
        return self.grid.n_points

    @property
    def weight(self) -> float:
        return self.grid.dx

    @property
    def x_min(self) -> float:
        return self.grid.x_min

    @property
    def x_max(self) -> float:
        return self.grid.x_max

    @property
    def n_points(self) -> int:
        return self.grid.n_points

    def like(self, values) -> "GridState":
        return GridState(self.grid, values)

    def check_tails(self, guard: float = 1e-12) -> None:
        """Raise GridTooSmallError if the edge samples exceed ``guard`` times the peak."""
        mags = np.abs(self.samples)
        peak = mags.max()
        if peak > 0 and max(mags[0], mags[-1]) > guard * peak:
            raise GridTooSmallError(
                f"edge amplitude {max(mags[0], mags[-1]) / peak:.3e} of peak exceeds {guard:g}"
            )

    def __repr__(self):
        return f"GridState({self.grid}, |max|={np.abs(self.samples).max():.6g})"


State = Union[FiniteState, GridState]


def check_compatible(a: State, b: State) -> None:
    """Raise DimensionError unless ``a`` and ``b`` live in the same space."""
    if type(a) is not type(b):
        raise DimensionError(f"cannot pair {type(a).__name__} with {type(b).__name__}")
    if isinstance(a, GridState):
        if a.grid != b.grid:
            raise DimensionError(f"grid mismatch: {a.grid} vs {b.grid}")
    elif a.dimension != b.dimension:
        raise DimensionError(f"dimension mismatch: {a.dimension} vs {b.dimension}")


def inner_product(a: State, b: State) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    check_compatible(a, b)
    return complex(a.weight * np.vdot(a.data, b.data))


def norm(a: State) -> float:
    ip = a.weight * np.vdot(a.data, a.data)
    scale = max(1.0, abs(ip.real))
    assert abs(ip.imag) < 1e-12 * scale, "self inner product not real"
    return float(np.sqrt(ip.real))


def zero_threshold(a: State) -> float:
    return ZERO_NORM_SCALE * np.sqrt(a.dimension)


def normalize(a: State) -> State:
    n = norm(a)
    if n <= zero_threshold(a):
        raise ZeroVectorError(f"cannot normalize a state of norm {n:.3e}")
    return a.like(a.data / n)
