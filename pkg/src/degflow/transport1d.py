"""Density and quantile representations of probability measures on the line.

A probability density is stored as point values on a strictly increasing grid
(trapezoid mass); a quantile function is stored at the midpoint levels
omega_i = (i - 1/2)/n, which avoids evaluating quantiles at 0 and 1 where
they may be infinite for unbounded densities.  The quadratic Wasserstein
distance between two measures is the L2 distance of their quantile vectors,
computed exactly at matching resolution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import ndtri

from .errors import DomainError, MassError, MonotonicityError, ShapeError

__all__ = [
    "DensityProfile",
    "QuantileProfile",
    "density_to_quantiles",
    "quantiles_to_density",
    "wasserstein2",
    "second_moment",
    "l1_distance",
    "uniform_quantiles",
    "gaussian_quantiles",
    "gaussian_density",
    "uniform_density",
    "bump_density",
]

_FMT = "%.17g"  # full float64 round-trip, keeps CSV output byte-reproducible


def _freeze(arr) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class DensityProfile:
    """Nonnegative density sampled on a strictly increasing grid.

    `mass` defaults to the trapezoid integral; conversion routines that know
    the exact mass of the represented measure (change of variables, cell
    arithmetic) set it explicitly and record the discrepancy to the trapezoid
    value in `mass_deviation` as a discretization-quality diagnostic.
    """

    grid: np.ndarray
    values: np.ndarray
    mass: float = None  # type: ignore[assignment]
    mass_deviation: float | None = None
    normalized: bool = False

    def __post_init__(self):
        grid = _freeze(self.grid)
        values = _freeze(self.values)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if grid.ndim != 1 or grid.shape != values.shape:
            raise ShapeError("grid and values must be 1d arrays of equal length")
        if grid.size < 2:
            raise ShapeError("density profile needs at least two grid points")
        if not np.all(np.diff(grid) > 0):
            raise DomainError("density grid must be strictly increasing")
        if not np.all(np.isfinite(grid)) or not np.all(np.isfinite(values)):
            raise DomainError("density profile contains non-finite entries")
        if values.min() < -1e-12:
            raise DomainError(f"density values must be nonnegative, min={values.min()}")
        if self.mass is None:
            object.__setattr__(self, "mass", float(np.trapz(values, grid)))
        if self.normalized and abs(self.mass - 1.0) > 1e-6:
            raise MassError(f"profile flagged normalized but mass={self.mass}")

    def interp(self, y) -> np.ndarray:
        """Linear interpolation with zero extension outside the grid."""
        return np.interp(np.asarray(y, dtype=float), self.grid, self.values, left=0.0, right=0.0)

    def to_csv(self, path) -> None:
        data = np.column_stack([self.grid, self.values])
        np.savetxt(path, data, delimiter=",", header="grid,value", comments="", fmt=_FMT)

    @classmethod
    def from_csv(cls, path, **kwargs) -> "DensityProfile":
        with open(path) as fh:
            header = fh.readline().strip()
        if header != "grid,value":
            raise ValueError(f"expected header 'grid,value', got {header!r}")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(grid=data[:, 0], values=data[:, 1], **kwargs)


@dataclass(frozen=True)
class QuantileProfile:
    """Strictly increasing quantile values at the n midpoint levels (i-1/2)/n."""

    values: np.ndarray

    def __post_init__(self):
        values = _freeze(self.values)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size < 2:
            raise ShapeError("quantile profile must be a 1d array with n >= 2")
        if not np.all(np.isfinite(values)):
            raise MonotonicityError("quantile values must be finite")
        if not np.all(np.diff(values) > 0):
            raise MonotonicityError("quantile values must be strictly increasing")

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def omegas(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) / self.n

    def mean(self) -> float:
        return float(self.values.mean())

    def second_moment(self) -> float:
        return float(np.mean(self.values**2))

    def shifted(self, c: float) -> "QuantileProfile":
        return QuantileProfile(self.values + c)

    def to_csv(self, path) -> None:
        data = np.column_stack([self.omegas, self.values])
        np.savetxt(path, data, delimiter=",", header="omega,Y", comments="", fmt=_FMT)

    @classmethod
    def from_csv(cls, path) -> "QuantileProfile":
        with open(path) as fh:
            header = fh.readline().strip()
        if header != "omega,Y":
            raise ValueError(f"expected header 'omega,Y', got {header!r}")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        n = data.shape[0]
        expected = (np.arange(n) + 0.5) / n
        if not np.allclose(data[:, 0], expected, atol=1e-9):
            raise ValueError("omega column is not the midpoint grid (i-1/2)/n")
        return cls(values=data[:, 1])


def density_to_quantiles(rho: DensityProfile, n: int) -> QuantileProfile:
    """Invert the trapezoid CDF of `rho` at the n midpoint levels.

    The CDF is piecewise linear; each level is inverted on the first segment
    whose upper CDF value exceeds it, which realizes the infimum convention
    (flat vacuum regions resolve to their right endpoint).
    """
    if abs(rho.mass - 1.0) > 1e-6:
        raise MassError(f"density mass {rho.mass} deviates from 1 beyond 1e-6")
    y, v = rho.grid, rho.values
    seg = 0.5 * (v[1:] + v[:-1]) * np.diff(y)
    R = np.concatenate([[0.0], np.cumsum(seg)])
    R /= R[-1]
    om = (np.arange(n) + 0.5) / n
    idx = np.searchsorted(R, om, side="right")
    idx = np.clip(idx, 1, len(R) - 1)
    den = R[idx] - R[idx - 1]
    frac = (om - R[idx - 1]) / den
    Y = y[idx - 1] + frac * (y[idx] - y[idx - 1])
    if not np.all(np.diff(Y) > 0):
        raise MonotonicityError("inverted CDF produced ties; density too degenerate for this n")
    return QuantileProfile(values=Y)


def quantiles_to_density(Y: QuantileProfile, extend: str = "mirror") -> DensityProfile:
    """Piecewise-constant density 1/(n * gap) on the cells between quantiles.

    The n-1 interior cells carry mass 1 - 1/n in exact cell arithmetic.  With
    `extend="mirror"` (default) two half-width end cells at the same density
    are appended and the represented mass is exactly 1; with `extend="drop"`
    the deficit of 1/n is left in place.  The stored `mass` is the exact cell
    mass; the trapezoid-vs-cell discrepancy is reported in `mass_deviation`.
    """
    vals = Y.values
    dw = 1.0 / Y.n
    d = np.diff(vals)
    dens = dw / d
    mids = 0.5 * (vals[1:] + vals[:-1])
    if extend == "mirror":
        grid = np.concatenate([[vals[0] - 0.25 * d[0]], mids, [vals[-1] + 0.25 * d[-1]]])
        heights = np.concatenate([[dens[0]], dens, [dens[-1]]])
        cell_mass = 1.0
    elif extend == "drop":
        grid = mids
        heights = dens
        cell_mass = 1.0 - dw
    else:
        raise ValueError(f"unknown extension mode {extend!r}")
    dev = abs(float(np.trapz(heights, grid)) - cell_mass)
    return DensityProfile(grid=grid, values=heights, mass=cell_mass, mass_deviation=dev)


def wasserstein2(A: QuantileProfile, B: QuantileProfile) -> float:
    """Quadratic Wasserstein distance between equal-resolution quantile profiles."""
    if A.n != B.n:
        raise ShapeError(f"quantile resolutions differ: {A.n} vs {B.n}")
    return float(np.sqrt(np.mean((A.values - B.values) ** 2)))


def second_moment(rho: DensityProfile) -> float:
    """Trapezoid integral of y^2 rho(y)."""
    return float(np.trapz(rho.grid**2 * rho.values, rho.grid))


def l1_distance(a: DensityProfile, b: DensityProfile) -> float:
    """L1 distance of two profiles, both read as piecewise linear with zero tails."""
    knots = np.union1d(a.grid, b.grid)
    fine = np.union1d(knots, 0.5 * (knots[1:] + knots[:-1]))
    return float(np.trapz(np.abs(a.interp(fine) - b.interp(fine)), fine))


def uniform_quantiles(lo: float, hi: float, n: int) -> QuantileProfile:
    if not hi > lo:
        raise DomainError("uniform support needs hi > lo")
    om = (np.arange(n) + 0.5) / n
    return QuantileProfile(values=lo + (hi - lo) * om)


def gaussian_quantiles(mean: float, sigma: float, n: int) -> QuantileProfile:
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    om = (np.arange(n) + 0.5) / n
    return QuantileProfile(values=mean + sigma * ndtri(om))


def gaussian_density(mean: float, sigma: float, lo: float, hi: float, n: int = 2001) -> DensityProfile:
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    y = np.linspace(lo, hi, n)
    v = np.exp(-0.5 * ((y - mean) / sigma) ** 2) / (sigma * np.sqrt(2 * np.pi))
    return DensityProfile(grid=y, values=v)


def uniform_density(lo: float, hi: float, n: int = 2001, pad: float = 0.0) -> DensityProfile:
    """Unit-mass top-hat on [lo, hi], optionally padded with zero-density margins."""
    if not hi > lo:
        raise DomainError("uniform support needs hi > lo")
    if pad > 0:
        eps = 1e-12 * (hi - lo)
        y = np.concatenate(
            [[lo - pad, lo - eps], np.linspace(lo, hi, n), [hi + eps, hi + pad]]
        )
        v = np.concatenate([[0.0, 0.0], np.full(n, 1.0 / (hi - lo)), [0.0, 0.0]])
        return DensityProfile(grid=y, values=v)
    y = np.linspace(lo, hi, n)
    return DensityProfile(grid=y, values=np.full(n, 1.0 / (hi - lo)))


def bump_density(center: float, width: float, n: int = 2001, span: tuple[float, float] | None = None) -> DensityProfile:
    """C^1 raised-cosine bump of unit mass supported on [center - width/2, center + width/2]."""
    if not width > 0:
        raise DomainError("bump width must be positive")
    if span is None:
        span = (center - width, center + width)
    y = np.linspace(span[0], span[1], n)
    t = (y - center) / width
    v = np.where(np.abs(t) < 0.5, (2.0 / width) * np.cos(np.pi * t) ** 2, 0.0)
    return DensityProfile(grid=y, values=v)
