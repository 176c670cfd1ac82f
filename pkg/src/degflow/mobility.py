"""Mobility functions on (-1, 1): structural checks and decay classification.

The mobility is the spatial coefficient that multiplies the flux and vanishes
at both ends of the interval.  The built-in family is g(x) = (1-x^2)^(p/2);
arbitrary mobilities can be supplied with analytic first and second
derivatives.  Whether the reciprocal 1/g is integrable up to the endpoint
("slow decay") or not ("fast decay") decides if the coordinate transform maps
onto the whole real line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DomainError, InconclusiveError

__all__ = [
    "MobilityFunction",
    "DecayClass",
    "AssumptionReport",
    "power_mobility",
    "custom_mobility",
    "check_assumptions",
    "classify_decay",
    "interior_grid",
]


def interior_grid(n: int) -> np.ndarray:
    """Uniform grid of n points on (-1, 1), endpoints excluded at distance 1/(n+1).

    Second derivatives of admissible mobilities may blow up at the endpoints,
    so every grid-based certification in this package samples strictly inside
    the interval.
    """
    d = 1.0 / (n + 1)
    return np.linspace(-1.0 + d, 1.0 - d, n)


@dataclass(frozen=True)
class DecayClass:
    """Result of the endpoint-integrability classification of 1/g.

    kind is "fast" (integral of 1/g diverges at the endpoint), "slow"
    (converges, with `half_width` the value of the integral from 0 to 1),
    or "unknown" when the heuristic for custom mobilities is inconclusive.
    """

    kind: str
    half_width: float = math.inf

    @property
    def is_fast(self) -> bool:
        return self.kind == "fast"

    @property
    def is_slow(self) -> bool:
        return self.kind == "slow"


@dataclass(frozen=True)
class MobilityFunction:
    """A C^2 mobility g on (-1, 1) with its analytic derivatives.

    `value`, `deriv1`, `deriv2` are vectorized callables.  Automatic
    differentiation is deliberately not offered: double finite differencing
    is too noisy near the degenerate endpoints, so custom mobilities must
    bring their own derivatives.
    """

    value: Callable[[np.ndarray], np.ndarray]
    deriv1: Callable[[np.ndarray], np.ndarray]
    deriv2: Callable[[np.ndarray], np.ndarray]
    kind: str = "custom"
    p: float | None = None

    def __call__(self, x):
        return self.value(x)

    @cached_property
    def decay_class(self) -> DecayClass:
        return classify_decay(self)


def power_mobility(p: float) -> MobilityFunction:
    """The reference family g(x) = (1-x^2)^(p/2), p > 0."""
    if not p > 0:
        raise DomainError(f"power mobility requires p > 0, got {p}")
    h = p / 2.0

    def g(x):
        return (1.0 - np.asarray(x) ** 2) ** h

    def g1(x):
        x = np.asarray(x)
        return -p * x * (1.0 - x**2) ** (h - 1.0)

    def g2(x):
        x = np.asarray(x)
        return p * (1.0 - x**2) ** (h - 2.0) * ((p - 1.0) * x**2 - 1.0)

    return MobilityFunction(value=g, deriv1=g1, deriv2=g2, kind="power", p=float(p))


def custom_mobility(value, deriv1, deriv2) -> MobilityFunction:
    return MobilityFunction(value=value, deriv1=deriv1, deriv2=deriv2, kind="custom")


@dataclass(frozen=True)
class AssumptionReport:
    """Grid-based certification of the structural mobility assumptions.

    These are necessary-condition checks on an interior grid, not proofs.
    `c_g` is the grid supremum of (g')^2 - g g'' and `g3_min` its grid
    infimum; the second must be >= -1e-10 for the convexity-of-a condition
    to pass.
    """

    g1_ok: bool
    g3_ok: bool
    c_g: float
    g3_min: float
    grid_n: int
    g_at_zero: float
    edge_values: tuple[float, float]

    @property
    def all_ok(self) -> bool:
        return self.g1_ok and self.g3_ok


def check_assumptions(g: MobilityFunction, grid_n: int = 1001) -> AssumptionReport:
    """Certify normalization/maximum-at-zero and convexity-of-a conditions on a grid."""
    if grid_n < 16:
        raise ValueError("grid_n must be at least 16")
    x = interior_grid(grid_n)
    gv = np.asarray(g(x), dtype=float)
    if not np.all(np.isfinite(gv)) or np.any(gv < 0.0):
        bad = x[~(np.isfinite(gv) & (gv >= 0.0))][0]
        raise DomainError(f"mobility is negative or non-finite at x={bad!r}")
    g0 = float(g(np.asarray(0.0)))
    g1_ok = abs(g0 - 1.0) <= 1e-12 and float(gv.max()) <= 1.0 + 1e-12

    q = np.asarray(g.deriv1(x), dtype=float) ** 2 - gv * np.asarray(g.deriv2(x), dtype=float)
    g3_min = float(q.min())
    c_g = float(q.max())
    g3_ok = bool(np.all(np.isfinite(q))) and g3_min >= -1e-10

    return AssumptionReport(
        g1_ok=bool(g1_ok),
        g3_ok=bool(g3_ok),
        c_g=c_g,
        g3_min=g3_min,
        grid_n=grid_n,
        g_at_zero=g0,
        edge_values=(float(gv[0]), float(gv[-1])),
    )


def _power_half_width(p: float) -> float:
    """Integral of 1/g from 0 to 1 for the power family with p < 2.

    The substitution z = 1 - s^2 turns the endpoint singularity into the
    integrable factor s^(1-p), which adaptive quadrature resolves to full
    precision.
    """
    def f(s):
        return 2.0 * s ** (1.0 - p) * (2.0 - s * s) ** (-p / 2.0)

    val, _ = integrate.quad(f, 0.0, 1.0, epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


def classify_decay(g: MobilityFunction, tol: float = 1e-8) -> DecayClass:
    """Classify the mobility as fast or slow decay via the endpoint integrability of 1/g.

    The power family uses the closed-form rule (fast iff p >= 2) and computes
    the finite integral by singularity-removing quadrature in the slow case.
    Custom mobilities are probed by truncated integrals up to 1 - 2^-k,
    k = 4..24: geometrically decaying increments mean convergence (slow),
    non-decaying increments mean divergence (fast), anything in between is
    reported as unknown.  Divergence of an improper integral is not decidable
    numerically in general, so the custom path is a heuristic by design.
    """
    if g.kind == "power":
        if g.p >= 2.0:
            return DecayClass("fast")
        return DecayClass("slow", _power_half_width(g.p))

    ks = np.arange(4, 25)
    uppers = 1.0 - 2.0 ** (-ks.astype(float))
    increments = []
    lo = 0.0
    total = 0.0
    for hi in uppers:
        try:
            piece, _ = integrate.quad(
                lambda z: 1.0 / g(z), lo, hi, epsabs=1e-12, epsrel=1e-10, limit=400
            )
        except Exception as exc:  # quadrature blew up: cannot classify
            raise InconclusiveError(f"tail quadrature failed near z={hi}: {exc}") from exc
        if not math.isfinite(piece):
            raise InconclusiveError(f"tail quadrature non-finite near z={hi}")
        increments.append(piece)
        total += piece
        lo = hi
    inc = np.asarray(increments[1:])  # increments between successive truncations
    if np.any(inc <= 0.0):
        # 1/g > 0, so nonpositive increments mean quadrature noise at saturation
        raise InconclusiveError("tail increments not positive; quadrature saturated")
    if inc[-1] < tol * max(total, 1.0):
        # remainder already below tolerance: converged
        return DecayClass("slow", total)
    ratios = inc[1:] / inc[:-1]
    r = float(np.median(ratios[-8:]))
    if r <= 0.9:
        # geometric tail: extrapolate the remainder
        tail = float(inc[-1]) * r / (1.0 - r)
        return DecayClass("slow", total + tail)
    if r >= 0.98:
        return DecayClass("fast")
    return DecayClass("unknown")
