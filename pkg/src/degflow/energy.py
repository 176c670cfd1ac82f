"""Internal energies, the transformed free energy, and the norms it controls.

Two energy families are supported: s log s (driving linear diffusion) and
s^m/(m-1) for m > 1 (porous-medium pressure).  The reduced function
psi(z) = phi(z)/z is what the quantile-space solver actually minimizes; its
closed forms are log z and z^(m-1)/(m-1).

The s log s entropy violates the lower growth sandwich that the power family
satisfies; it is admitted anyway because the linear special cases and the
flow-interchange diagnostics need it, and carries `linear_case=True` so the
growth check can skip the lower bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import xlogy

from .errors import DomainError, MonotonicityError, NonFiniteError
from .transform import CoefficientField
from .transport1d import DensityProfile, QuantileProfile

__all__ = [
    "InternalEnergy",
    "entropy_energy",
    "power_energy",
    "energy_density_form",
    "energy_quantile_form",
    "entropy",
    "weighted_lm_norm",
]


@dataclass(frozen=True)
class InternalEnergy:
    """A convex free-energy density phi with derivatives and reduced form psi.

    growth = (m, mu, c_m, C_mu) records the two-sided power sandwich on phi''.
    `z_psi_d1` and `z2_psi_d2` are z psi'(z) and z^2 psi''(z) in closed form;
    the convexity Hessian is assembled from these combinations because they
    stay bounded where the raw factors would overflow (z = a/q can be huge).
    """

    kind: str
    m: float
    phi: Callable[[np.ndarray], np.ndarray]
    phi_d1: Callable[[np.ndarray], np.ndarray]
    phi_d2: Callable[[np.ndarray], np.ndarray]
    psi: Callable[[np.ndarray], np.ndarray]
    psi_d1: Callable[[np.ndarray], np.ndarray]
    psi_d2: Callable[[np.ndarray], np.ndarray]
    z_psi_d1: Callable[[np.ndarray], np.ndarray]
    z2_psi_d2: Callable[[np.ndarray], np.ndarray]
    growth: tuple[float, float, float, float]
    linear_case: bool = False


def entropy_energy() -> InternalEnergy:
    """phi(s) = s log s extended by phi(0) = 0; psi(z) = log z."""
    return InternalEnergy(
        kind="entropy",
        m=1.0,
        phi=lambda s: xlogy(np.asarray(s, dtype=float), np.asarray(s, dtype=float)),
        phi_d1=lambda s: np.log(np.asarray(s, dtype=float)) + 1.0,
        phi_d2=lambda s: 1.0 / np.asarray(s, dtype=float),
        psi=lambda z: np.log(np.asarray(z, dtype=float)),
        psi_d1=lambda z: 1.0 / np.asarray(z, dtype=float),
        psi_d2=lambda z: -1.0 / np.asarray(z, dtype=float) ** 2,
        z_psi_d1=lambda z: np.ones_like(np.asarray(z, dtype=float)),
        z2_psi_d2=lambda z: -np.ones_like(np.asarray(z, dtype=float)),
        growth=(1.0, 1.0, 1.0, 1.0),
        linear_case=True,
    )


def power_energy(m: float) -> InternalEnergy:
    """phi(s) = s^m/(m-1) for m > 1; psi(z) = z^(m-1)/(m-1)."""
    if not m > 1.0:
        raise DomainError(f"power energy requires m > 1, got {m}")
    m = float(m)
    return InternalEnergy(
        kind="power",
        m=m,
        phi=lambda s: np.asarray(s, dtype=float) ** m / (m - 1.0),
        phi_d1=lambda s: m * np.asarray(s, dtype=float) ** (m - 1.0) / (m - 1.0),
        phi_d2=lambda s: m * np.asarray(s, dtype=float) ** (m - 2.0),
        psi=lambda z: np.asarray(z, dtype=float) ** (m - 1.0) / (m - 1.0),
        psi_d1=lambda z: np.asarray(z, dtype=float) ** (m - 2.0),
        psi_d2=lambda z: (m - 2.0) * np.asarray(z, dtype=float) ** (m - 3.0),
        z_psi_d1=lambda z: np.asarray(z, dtype=float) ** (m - 1.0),
        z2_psi_d2=lambda z: (m - 2.0) * np.asarray(z, dtype=float) ** (m - 1.0),
        growth=(m, m, m, m),
    )


def energy_density_form(rho: DensityProfile, coeff: CoefficientField, en: InternalEnergy) -> float:
    """Free energy integral phi(a rho)/a + V rho by trapezoid on the profile grid.

    The integrand is forced to 0 wherever rho vanishes (phi(0) = 0 for both
    families), which also keeps inf * 0 products out of the far tails where a
    may overflow.
    """
    y, v = rho.grid, rho.values
    a = np.asarray(coeff.a(y), dtype=float)
    pos = v > 0.0
    w = np.zeros_like(v)
    if np.any(pos):
        s = a[pos] * v[pos]
        w[pos] = en.phi(s) / a[pos]
    w = w + np.asarray(coeff.V(y), dtype=float) * v
    if not np.all(np.isfinite(w)):
        bad = y[~np.isfinite(w)][0]
        raise NonFiniteError(f"free-energy integrand non-finite at y={bad}")
    return float(np.trapz(w, y))


def energy_quantile_form(Y: QuantileProfile, coeff: CoefficientField, en: InternalEnergy) -> float:
    """Free energy in quantile variables: midpoint rule over the n-1 cells.

    Sum_i dw * psi(a(mid_i) dw / gap_i) + Sum_k dw * V(Y_k).  Agrees with the
    density form on the induced piecewise-constant density to first order in
    1/n.
    """
    vals = Y.values
    d = np.diff(vals)
    if np.any(d <= 0):
        raise MonotonicityError("quantile values must be strictly increasing")
    dw = 1.0 / Y.n
    mids = 0.5 * (vals[1:] + vals[:-1])
    a_m = np.asarray(coeff.a(mids), dtype=float)
    z = a_m * dw / d
    total = dw * float(np.sum(en.psi(z))) + dw * float(np.sum(np.asarray(coeff.V(vals), dtype=float)))
    if not np.isfinite(total):
        raise NonFiniteError("quantile-form free energy is non-finite")
    return total


def entropy(rho: DensityProfile) -> float:
    """Boltzmann entropy integral rho log rho with 0 log 0 = 0."""
    return float(np.trapz(xlogy(rho.values, rho.values), rho.grid))


def weighted_lm_norm(rho: DensityProfile, coeff: CoefficientField, m: float) -> float:
    """Weighted norm integral a^(m-1) rho^m, the quantity the Gronwall bound controls.

    Evaluated as (a rho)^(m-1) * rho so vacuum regions contribute exactly 0
    even where a alone would overflow.
    """
    if not m > 1.0:
        raise DomainError(f"weighted L^m norm requires m > 1, got {m}")
    y, v = rho.grid, rho.values
    a = np.asarray(coeff.a(y), dtype=float)
    pos = v > 0.0
    w = np.zeros_like(v)
    if np.any(pos):
        w[pos] = (a[pos] * v[pos]) ** (m - 1.0) * v[pos]
    if not np.all(np.isfinite(w)):
        raise NonFiniteError("weighted L^m integrand overflowed")
    return float(np.trapz(w, y))
