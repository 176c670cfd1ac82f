"""Coordinate transform that absorbs the mobility into the diffusion nonlinearity.

The map y = alpha(x) = int_0^x dz/g(z) sends (-1, 1) onto the whole line for
fast-decay mobilities.  Under the mass-preserving scaling rho(alpha(x)) =
g(x) u(x), the original degenerate equation becomes one with linear mobility
and coefficient a(y) = 1/g(alpha^{-1}(y)) >= 1 inside the nonlinearity.

Logarithmic derivatives of a are always computed through the x-side
identities a'/a = -g' and a''/a = (g')^2 - g g'' rather than by
differentiating a numerically: a grows like a power of cosh and direct
differencing overflows long before the identities do.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, special

from .errors import ConvergenceError, DomainError, SlowDecayError
from .mobility import MobilityFunction, interior_grid
from .transport1d import DensityProfile

__all__ = [
    "PotentialSpec",
    "CoordinateMap",
    "CoefficientField",
    "zero_potential",
    "quadratic_potential",
    "custom_potential",
    "build_map",
    "build_coefficients",
    "constant_coefficients",
    "rescale_u_to_rho",
    "rescale_rho_to_u",
]


@dataclass(frozen=True)
class PotentialSpec:
    """External potential W on (-1, 1), nonnegative and C^2, with derivatives."""

    value: Callable[[np.ndarray], np.ndarray]
    deriv1: Callable[[np.ndarray], np.ndarray]
    deriv2: Callable[[np.ndarray], np.ndarray]
    kind: str = "custom"
    c: float | None = None

    def __call__(self, x):
        return self.value(x)


def zero_potential() -> PotentialSpec:
    z = lambda x: np.zeros_like(np.asarray(x, dtype=float))
    return PotentialSpec(value=z, deriv1=z, deriv2=z, kind="zero")


def quadratic_potential(c: float) -> PotentialSpec:
    """W(x) = c x^2 with c >= 0 (nonnegativity of W is an assumption, not a choice)."""
    if c < 0:
        raise DomainError("quadratic potential requires c >= 0 to keep W nonnegative")
    return PotentialSpec(
        value=lambda x: c * np.asarray(x, dtype=float) ** 2,
        deriv1=lambda x: 2.0 * c * np.asarray(x, dtype=float),
        deriv2=lambda x: np.full_like(np.asarray(x, dtype=float), 2.0 * c),
        kind="quadratic",
        c=float(c),
    )


def custom_potential(value, deriv1, deriv2) -> PotentialSpec:
    return PotentialSpec(value=value, deriv1=deriv1, deriv2=deriv2, kind="custom")


@dataclass(frozen=True)
class CoordinateMap:
    """Strictly increasing bijection alpha: (-1, 1) -> R with its inverse."""

    mobility: MobilityFunction
    alpha: Callable[[np.ndarray], np.ndarray]
    alpha_inv: Callable[[np.ndarray], np.ndarray]


def _power_alpha(p: float):
    """alpha for g = (1-x^2)^(p/2) via the Gauss hypergeometric series.

    alpha(x) = x * 2F1(1/2, p/2; 3/2; x^2); agrees with adaptive quadrature of
    1/g to machine precision and is vectorized, which the per-step solvers
    rely on.
    """
    def alpha(x):
        x = np.asarray(x, dtype=float)
        return x * special.hyp2f1(0.5, p / 2.0, 1.5, x * x)

    return alpha


def _bracketed_newton_inverse(alpha, g: MobilityFunction, quad_tol: float, max_iter: int = 80):
    """Invert a strictly increasing alpha with alpha' = 1/g by safeguarded Newton.

    Newton steps x -> x - (alpha(x) - y) * g(x) are clipped into a per-point
    bracket that shrinks monotonically, so convergence does not depend on the
    seed.  Residuals are measured in y (the integral), per the map's contract.
    """

    one_in = float(np.nextafter(1.0, 0.0))

    def alpha_inv(y):
        y_arr = np.asarray(y, dtype=float)
        scalar = y_arr.ndim == 0
        yv = np.atleast_1d(y_arr).astype(float)
        # tanh saturates to exactly 1.0 for large y, where alpha diverges
        x = np.clip(np.tanh(yv), -one_in, one_in)
        lo = np.full_like(yv, -1.0)
        hi = np.full_like(yv, 1.0)
        tol = np.maximum(quad_tol, 8.0 * np.finfo(float).eps * np.abs(yv))
        with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
            for _ in range(max_iter):
                F = alpha(x) - yv
                hi = np.where(F > 0, np.minimum(hi, x), hi)
                lo = np.where(F < 0, np.maximum(lo, x), lo)
                if np.all(np.abs(F) <= tol):
                    break
                xn = x - F * np.asarray(g(x), dtype=float)
                bad = ~np.isfinite(xn) | (xn <= lo) | (xn >= hi)
                xn = np.where(bad, 0.5 * (lo + hi), xn)
                x = xn
            else:
                worst = float(np.max(np.abs(alpha(x) - yv)))
                raise ConvergenceError(f"coordinate inversion stalled, residual {worst:.3e}")
        return float(x[0]) if scalar else x

    return alpha_inv


def _custom_alpha_pair(g: MobilityFunction, quad_tol: float):
    """Quadrature-based alpha and inverse for user-supplied fast-decay mobilities.

    A graded anchor table toward the endpoints keeps each per-call quadrature
    short; this path favors robustness over speed.
    """
    anchors_x = np.concatenate([[0.0], 1.0 - 2.0 ** (-np.arange(1, 31, dtype=float))])
    pieces = [
        integrate.quad(lambda z: 1.0 / g(z), a, b, epsabs=quad_tol * 0.1, epsrel=1e-12, limit=400)[0]
        for a, b in zip(anchors_x[:-1], anchors_x[1:])
    ]
    anchors_y = np.concatenate([[0.0], np.cumsum(pieces)])

    def alpha_scalar(x: float) -> float:
        s = 1.0 if x >= 0 else -1.0
        ax = abs(x)
        k = int(np.searchsorted(anchors_x, ax, side="right") - 1)
        k = min(max(k, 0), len(anchors_x) - 1)
        tail, _ = integrate.quad(
            lambda z: 1.0 / g(z), anchors_x[k], ax, epsabs=quad_tol * 0.1, epsrel=1e-12, limit=400
        )
        return s * (anchors_y[k] + tail)

    def alpha(x):
        x_arr = np.asarray(x, dtype=float)
        if x_arr.ndim == 0:
            return alpha_scalar(float(x_arr))
        return np.array([alpha_scalar(v) for v in x_arr.ravel()]).reshape(x_arr.shape)

    return alpha, _bracketed_newton_inverse(alpha, g, quad_tol)


def build_map(g: MobilityFunction, quad_tol: float = 1e-12) -> CoordinateMap:
    """Construct alpha and its inverse; requires a fast-decay mobility."""
    decay = g.decay_class
    if not decay.is_fast:
        raise SlowDecayError(
            f"coordinate transform onto R needs fast decay, classification was {decay.kind!r}"
        )
    if g.kind == "power" and g.p == 2.0:
        alpha = lambda x: np.arctanh(np.asarray(x, dtype=float))
        alpha_inv = lambda y: np.tanh(np.asarray(y, dtype=float))
        return CoordinateMap(mobility=g, alpha=alpha, alpha_inv=alpha_inv)
    if g.kind == "power":
        alpha = _power_alpha(g.p)
        return CoordinateMap(
            mobility=g, alpha=alpha, alpha_inv=_bracketed_newton_inverse(alpha, g, quad_tol)
        )
    alpha, alpha_inv = _custom_alpha_pair(g, quad_tol)
    return CoordinateMap(mobility=g, alpha=alpha, alpha_inv=alpha_inv)


@dataclass(frozen=True)
class CoefficientField:
    """Transformed data of the rescaled equation: a(y), its log-derivatives, V(y).

    a_ratio1 = a'/a and a_ratio2 = a''/a; `L_bound` is the grid supremum of
    [g^2 W']_x and `lambda_gw1` the grid infimum of g^2 W'' + g g' W', the two
    potential/mobility compatibility constants used by the a-priori estimates.
    """

    a: Callable[[np.ndarray], np.ndarray]
    a_ratio1: Callable[[np.ndarray], np.ndarray]
    a_ratio2: Callable[[np.ndarray], np.ndarray]
    V: Callable[[np.ndarray], np.ndarray]
    V_d1: Callable[[np.ndarray], np.ndarray]
    V_d2: Callable[[np.ndarray], np.ndarray]
    L_bound: float
    lambda_gw1: float
    map: CoordinateMap | None = None
    potential: PotentialSpec | None = None

    def a_bundle(self, y):
        """(a, a'/a, a''/a) at y with a single coordinate inversion."""
        if self.map is None:
            y = np.asarray(y, dtype=float)
            return self.a(y), self.a_ratio1(y), self.a_ratio2(y)
        mob = self.map.mobility
        x = self.map.alpha_inv(y)
        gx = np.asarray(mob(x), dtype=float)
        g1 = np.asarray(mob.deriv1(x), dtype=float)
        g2 = np.asarray(mob.deriv2(x), dtype=float)
        return 1.0 / gx, -g1, g1 * g1 - gx * g2

    def v_bundle(self, y):
        """(V, V', V'') at y with a single coordinate inversion."""
        if self.map is None:
            y = np.asarray(y, dtype=float)
            return self.V(y), self.V_d1(y), self.V_d2(y)
        mob, W = self.map.mobility, self.potential
        x = self.map.alpha_inv(y)
        gx = np.asarray(mob(x), dtype=float)
        g1 = np.asarray(mob.deriv1(x), dtype=float)
        W0 = np.asarray(W(x), dtype=float)
        W1 = np.asarray(W.deriv1(x), dtype=float)
        W2 = np.asarray(W.deriv2(x), dtype=float)
        return W0, gx * W1, gx * gx * W2 + gx * g1 * W1


def build_coefficients(
    cmap: CoordinateMap, W: PotentialSpec | None = None, grid_n: int = 2001
) -> CoefficientField:
    """Assemble the transformed coefficient field from a map and a potential."""
    if W is None:
        W = zero_potential()
    mob = cmap.mobility
    x = interior_grid(grid_n)
    Wv = np.asarray(W(x), dtype=float)
    if np.any(Wv < -1e-14) or not np.all(np.isfinite(Wv)):
        bad = x[~((Wv >= -1e-14) & np.isfinite(Wv))][0]
        raise DomainError(f"potential must be nonnegative and finite, violated at x={bad}")
    gx = np.asarray(mob(x), dtype=float)
    g1 = np.asarray(mob.deriv1(x), dtype=float)
    g2 = np.asarray(mob.deriv2(x), dtype=float)
    W1 = np.asarray(W.deriv1(x), dtype=float)
    W2 = np.asarray(W.deriv2(x), dtype=float)
    gw1 = gx * gx * W2 + gx * g1 * W1           # transformed V''
    flux_deriv = 2.0 * gx * g1 * W1 + gx * gx * W2  # [g^2 W']_x
    L_bound = float(flux_deriv.max())
    lambda_gw1 = float(gw1.min())

    def _x(y):
        return cmap.alpha_inv(y)

    field = CoefficientField(
        a=lambda y: 1.0 / np.asarray(mob(_x(y)), dtype=float),
        a_ratio1=lambda y: -np.asarray(mob.deriv1(_x(y)), dtype=float),
        a_ratio2=lambda y: _a_ratio2(mob, _x(y)),
        V=lambda y: np.asarray(W(_x(y)), dtype=float),
        V_d1=lambda y: _v_d1(mob, W, _x(y)),
        V_d2=lambda y: _v_d2(mob, W, _x(y)),
        L_bound=L_bound,
        lambda_gw1=lambda_gw1,
        map=cmap,
        potential=W,
    )
    return field


def _a_ratio2(mob, x):
    g1 = np.asarray(mob.deriv1(x), dtype=float)
    return g1 * g1 - np.asarray(mob(x), dtype=float) * np.asarray(mob.deriv2(x), dtype=float)


def _v_d1(mob, W, x):
    return np.asarray(mob(x), dtype=float) * np.asarray(W.deriv1(x), dtype=float)


def _v_d2(mob, W, x):
    gx = np.asarray(mob(x), dtype=float)
    W1 = np.asarray(W.deriv1(x), dtype=float)
    return gx * gx * np.asarray(W.deriv2(x), dtype=float) + gx * np.asarray(mob.deriv1(x), dtype=float) * W1


def constant_coefficients(
    V: Callable | None = None,
    V_d1: Callable | None = None,
    V_d2: Callable | None = None,
    probe: tuple[float, float, int] = (-30.0, 30.0, 3001),
) -> CoefficientField:
    """Test coefficient field with a identically 1 (no admissible mobility produces it).

    Isolates the solvers against exact heat / Fokker-Planck solutions.  The
    potential callables act directly in y; the compatibility constants are
    estimated on a probe grid.
    """
    zero = lambda y: np.zeros_like(np.asarray(y, dtype=float))
    one = lambda y: np.ones_like(np.asarray(y, dtype=float))
    V = V or zero
    V_d1 = V_d1 or zero
    V_d2 = V_d2 or zero
    ys = np.linspace(*probe)
    v2 = np.asarray(V_d2(ys), dtype=float)
    return CoefficientField(
        a=one,
        a_ratio1=zero,
        a_ratio2=zero,
        V=V,
        V_d1=V_d1,
        V_d2=V_d2,
        L_bound=float(v2.max()),     # with a == 1, a [V'/a]_y reduces to V''
        lambda_gw1=float(v2.min()),
        map=None,
        potential=None,
    )


def harmonic_coefficients(omega: float = 1.0) -> CoefficientField:
    """Constant-a field with the confining potential V(y) = omega * y^2 / 2."""
    return constant_coefficients(
        V=lambda y: 0.5 * omega * np.asarray(y, dtype=float) ** 2,
        V_d1=lambda y: omega * np.asarray(y, dtype=float),
        V_d2=lambda y: np.full_like(np.asarray(y, dtype=float), omega),
    )


def rescale_u_to_rho(u: DensityProfile, cmap: CoordinateMap) -> DensityProfile:
    """Push a density in the original variable to the transformed one.

    rho(alpha(x)) = g(x) u(x) on the image grid.  The change of variables is
    exactly mass preserving, so the stored mass is carried over unchanged; the
    y-side trapezoid value is only a quadrature of the same measure on a
    stretched grid and its deviation is reported, not corrected.
    """
    x = u.grid
    if x[0] <= -1.0 or x[-1] >= 1.0:
        raise DomainError("original-variable profile must live strictly inside (-1, 1)")
    g = np.asarray(cmap.mobility(x), dtype=float)
    y = np.asarray(cmap.alpha(x), dtype=float)
    rho = g * u.values
    dev = abs(float(np.trapz(rho, y)) - u.mass)
    return DensityProfile(grid=y, values=rho, mass=u.mass, mass_deviation=dev)


def rescale_rho_to_u(rho: DensityProfile, cmap: CoordinateMap) -> DensityProfile:
    """Pull a transformed density back: u(x) = a(alpha(x)) rho(alpha(x))."""
    x = np.asarray(cmap.alpha_inv(rho.grid), dtype=float)
    g = np.asarray(cmap.mobility(x), dtype=float)
    u = rho.values / g
    dev = abs(float(np.trapz(u, x)) - rho.mass)
    return DensityProfile(grid=x, values=u, mass=rho.mass, mass_deviation=dev)
