"""Spatial grid and the symmetric potential families.

All computations use hbar = m = 1.  Hard walls are represented by the
Dirichlet boundary of the grid, so every sampled potential is finite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import DomainError, SymmetryError

MIN_GRID_POINTS = 16
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class UnitSystem:
    hbar: float = 1.0
    mass: float = 1.0
    length_unit: float = 1.0

    @property
    def planck(self) -> float:
        return 2 * math.pi * self.hbar

    @property
    def ground_energy(self) -> float:
        """Ground energy pi^2 hbar^2 / (2 m L^2) of a hard-wall box of width L."""
        return math.pi**2 * self.hbar**2 / (2 * self.mass * self.length_unit**2)

    def box_energy(self, level: int) -> float:
        return level**2 * self.ground_energy


@dataclass(frozen=True)
class Grid:
    """Uniform mesh of ``n`` interior points; the wavefunction vanishes at both ends."""

    n: int
    x_min: float
    x_max: float

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n + 1)

    @property
    def center(self) -> float:
        return 0.5 * (self.x_min + self.x_max)

    @property
    def points(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(1, self.n + 1)

    @property
    def offsets(self) -> np.ndarray:
        """Signed distance of each point from the center, exactly antisymmetric under mirroring."""
        return (np.arange(1, self.n + 1) - 0.5 * (self.n + 1)) * self.dx

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    def to_dict(self) -> dict:
        return {"n": self.n, "x_min": self.x_min, "x_max": self.x_max}


def build_grid(n: int, x_min: float = 0.0, x_max: float = 1.0, *,
               min_points: int = MIN_GRID_POINTS) -> Grid:
    if int(n) != n or n < min_points:
        raise DomainError(f"grid needs at least {min_points} interior points, got {n}")
    if not (math.isfinite(x_min) and math.isfinite(x_max)) or x_max <= x_min:
        raise DomainError(f"invalid grid interval [{x_min}, {x_max}]")
    return Grid(int(n), float(x_min), float(x_max))


# -- potential families -------------------------------------------------------

@dataclass(frozen=True)
class InfiniteBox:
    L: float = 1.0

    variant = "infinite_box"

    def __post_init__(self):
        if not self.L > 0:
            raise DomainError("box width must be positive")

    def domain(self) -> tuple[float, float]:
        return 0.0, self.L


@dataclass(frozen=True)
class DoubleBox:
    """Hard-wall box of width ``L`` with a finite central barrier."""

    L: float = 1.0
    barrier_width: float = 0.1
    barrier_height: float = 500.0

    variant = "double_box"

    def __post_init__(self):
        if not self.L > 0:
            raise DomainError("box width must be positive")
        if self.barrier_height < 0:
            raise DomainError("barrier_height must be >= 0")
        if not 0 <= self.barrier_width < self.L:
            raise DomainError("barrier_width must lie in [0, L)")

    def domain(self) -> tuple[float, float]:
        return 0.0, self.L

    def with_barrier(self, height: float) -> "DoubleBox":
        return DoubleBox(self.L, self.barrier_width, height)


@dataclass(frozen=True)
class Biquartic:
    """V(x) = alpha (x - c)^2 + beta (x - c)^4 inside hard walls at +-half_width.

    ``center_offset`` moves c away from the grid midpoint; any nonzero value
    breaks the reflection symmetry and is only useful for testing.
    """

    alpha: float = -20.0
    beta: float = 80.0
    half_width: float = 1.0
    center_offset: float = 0.0

    variant = "biquartic"

    def __post_init__(self):
        if not self.half_width > 0:
            raise DomainError("half_width must be positive")

    def domain(self) -> tuple[float, float]:
        return -self.half_width, self.half_width

    def minima(self) -> tuple[float, float]:
        if self.alpha >= 0 or self.beta <= 0:
            c = self.center_offset
            return c, c
        d = math.sqrt(-self.alpha / (2 * self.beta))
        return self.center_offset - d, self.center_offset + d


PotentialSpec = Union[InfiniteBox, DoubleBox, Biquartic]

_VARIANTS = {cls.variant: cls for cls in (InfiniteBox, DoubleBox, Biquartic)}
_FIELDS = {
    "infinite_box": ("L",),
    "double_box": ("L", "barrier_width", "barrier_height"),
    "biquartic": ("alpha", "beta", "half_width", "center_offset"),
}


def potential_to_dict(spec: PotentialSpec) -> dict:
    out = {"variant": spec.variant}
    for name in _FIELDS[spec.variant]:
        out[name] = float(getattr(spec, name))
    return out


def potential_from_dict(data: dict) -> PotentialSpec:
    data = dict(data)
    variant = data.pop("variant", None)
    if variant not in _VARIANTS:
        raise DomainError(f"unknown potential variant {variant!r}")
    unknown = set(data) - set(_FIELDS[variant])
    if unknown:
        raise DomainError(f"unknown fields for {variant}: {sorted(unknown)}")
    return _VARIANTS[variant](**{k: float(v) for k, v in data.items()})


def grid_for(spec: PotentialSpec, n: int, **kwargs) -> Grid:
    """Grid spanning the natural domain of ``spec``."""
    lo, hi = spec.domain()
    return build_grid(n, lo, hi, **kwargs)


@dataclass(frozen=True)
class PotentialSamples:
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n,):
            raise DomainError("sample count does not match the grid")
        if not np.all(np.isfinite(values)):
            raise DomainError("potential samples must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def shifted(self, constant: float) -> "PotentialSamples":
        return PotentialSamples(self.grid, self.values + constant)


def check_reflection_symmetry(samples: PotentialSamples) -> float:
    """Largest relative mismatch between V(x_i) and its mirror image about the center."""
    v = samples.values
    return float(np.max(np.abs(v - v[::-1]) / (1.0 + np.abs(v))))


def sample_potential(spec: PotentialSpec, grid: Grid, *, check: bool = True) -> PotentialSamples:
    if isinstance(spec, (InfiniteBox, DoubleBox)):
        if abs(grid.width - spec.L) > 1e-12 * spec.L:
            raise DomainError(
                f"grid width {grid.width} does not match the box width {spec.L}")
    d = grid.offsets
    if isinstance(spec, InfiniteBox):
        values = np.zeros(grid.n)
    elif isinstance(spec, DoubleBox):
        values = np.where(np.abs(d) < 0.5 * spec.barrier_width, spec.barrier_height, 0.0)
    elif isinstance(spec, Biquartic):
        s = d - spec.center_offset
        values = spec.alpha * s**2 + spec.beta * s**4
    else:
        raise DomainError(f"unsupported potential {spec!r}")
    samples = PotentialSamples(grid, values)
    if check:
        asym = check_reflection_symmetry(samples)
        if asym > SYMMETRY_TOL:
            raise SymmetryError(f"potential is not reflection symmetric (mismatch {asym:.3e})")
    return samples
