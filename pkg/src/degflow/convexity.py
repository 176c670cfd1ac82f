"""Certification of displacement convexity moduli for the transformed energy.

Convexity of the flow functional along Wasserstein geodesics reduces, in
quantile variables, to joint convexity of

    f(p, q) = psi(a(p)/q) + V(p) - (lambda/2) p^2       on  R x R_+,

so the certificates here are sign conditions on the 2x2 Hessian of f.  All
Hessian entries are assembled from the bounded combinations z psi'(z),
z^2 psi''(z) (z = a/q) and the x-side identities a'/a = -g',
a''/a = (g')^2 - g g'', which avoids forming a' or a'' directly.

Grid certification is necessary-condition testing, not proof: results are
reported as "certified on grid" over a declared (p, q) rectangle, with q
log-spaced because the entries are not q-homogeneous outside the linear case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .energy import InternalEnergy, entropy_energy, power_energy
from .errors import DomainError, SlowDecayError
from .mobility import MobilityFunction, interior_grid
from .transform import CoefficientField, PotentialSpec, zero_potential

__all__ = [
    "Condition",
    "ConvexityReport",
    "hessian_f",
    "heat_lambda",
    "fokker_planck_lambdas",
    "porous_medium_conditions",
    "convexity_report",
]

PSD_RTOL = 1e-9  # sign tolerance relative to the magnitude of the entries involved


@dataclass(frozen=True)
class Condition:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ConvexityReport:
    """Outcome of a convexity certification sweep.

    `lambda_best` is the largest modulus for which the Hessian is positive
    semidefinite at every grid point (bisection refined to 1e-6);
    `lambda_formula` is the special-case closed-form value when the regime has
    one; `psd_grid` holds the pointwise PSD booleans at the lambda the report
    was asked to certify.
    """

    lambda_best: float
    psd_grid: np.ndarray
    regime: str
    conditions: tuple[Condition, ...]
    grid_meta: dict
    m: float | None = None
    lambda_formula: float | None = None

    @property
    def all_conditions_pass(self) -> bool:
        return all(c.passed for c in self.conditions)


def hessian_f(p: float, q: float, coeff: CoefficientField, en: InternalEnergy, lam: float) -> np.ndarray:
    """Hessian of f(p, q) = psi(a(p)/q) + V(p) - lam/2 p^2 as a 2x2 array."""
    if not q > 0:
        raise DomainError(f"hessian requires q > 0, got {q}")
    a, r1, r2 = coeff.a_bundle(p)
    _, _, V2 = coeff.v_bundle(p)
    a, r1, r2, V2 = (float(np.asarray(v)) for v in (a, r1, r2, V2))
    z = a / q
    A = float(np.asarray(en.z2_psi_d2(z)))
    B = float(np.asarray(en.z_psi_d1(z)))
    h11 = r1 * r1 * A + r2 * B + V2 - lam
    h12 = -r1 * (A + B) / q
    h22 = (A + 2.0 * B) / (q * q)
    return np.array([[h11, h12], [h12, h22]])


def _refined_min(fun, xs: np.ndarray) -> float:
    """Grid minimum of a smooth scalar function, polished by bounded search."""
    vals = np.asarray([fun(x) for x in xs], dtype=float)
    i = int(np.argmin(vals))
    best = float(vals[i])
    lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(fun, bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-12})
        best = min(best, float(res.fun))
    return best


def heat_lambda(g: MobilityFunction, grid_n: int = 4097) -> float:
    """Convexity modulus of the transformed pure-diffusion flow: -sup_x g g''.

    For the power family the expression -g g'' = p (1-x^2)^(p-2) (1-(p-1)x^2)
    extends continuously to [-1, 1] when p >= 2, so the infimum is taken over
    the closed interval and refined by local minimization.
    """
    if not g.decay_class.is_fast:
        raise SlowDecayError("heat convexity modulus is defined for fast-decay mobilities")
    if g.kind == "power":
        p = g.p

        def h(x):
            return (1.0 - x * x) ** (p - 2.0) * (1.0 - (p - 1.0) * x * x)

        xs = np.linspace(0.0, 1.0, grid_n)  # even in x, endpoint limit included
        return p * _refined_min(h, xs)
    xs = interior_grid(grid_n)

    def neg_gg2(x):
        return -float(np.asarray(g(x))) * float(np.asarray(g.deriv2(x)))

    return _refined_min(neg_gg2, xs)


def fokker_planck_lambdas(
    g: MobilityFunction, W: PotentialSpec, grid_n: int = 4097
) -> tuple[float, float]:
    """Split modulus for linear drift-diffusion: diffusive part and potential part.

    Returns (lambda_d, lambda_w) with lambda_d = inf(-g g'') and
    lambda_w = inf(g^2 W'' + g g' W'); the certified modulus is their sum.
    """
    lambda_d = heat_lambda(g, grid_n)
    xs = interior_grid(grid_n)

    def pot_term(x):
        gx = float(np.asarray(g(x)))
        return gx * gx * float(np.asarray(W.deriv2(x))) + gx * float(np.asarray(g.deriv1(x))) * float(
            np.asarray(W.deriv1(x))
        )

    lambda_w = _refined_min(pot_term, xs)
    return lambda_d, lambda_w


def _x_side_arrays(g: MobilityFunction, W: PotentialSpec, n_p: int) -> dict:
    """Hessian ingredients sampled on a uniform interior x-grid."""
    x = interior_grid(n_p)
    gx = np.asarray(g(x), dtype=float)
    g1 = np.asarray(g.deriv1(x), dtype=float)
    g2 = np.asarray(g.deriv2(x), dtype=float)
    W1 = np.asarray(W.deriv1(x), dtype=float)
    W2 = np.asarray(W.deriv2(x), dtype=float)
    return {
        "x": x,
        "a": 1.0 / gx,
        "r1": -g1,
        "r2": g1 * g1 - gx * g2,
        "V2": gx * gx * W2 + gx * g1 * W1,
    }


def _hessian_base(arrays: dict, en: InternalEnergy, q_grid: np.ndarray):
    """H11 at lambda=0, H12, H22 on the (p, q) product grid."""
    a = arrays["a"][:, None]
    r1 = arrays["r1"][:, None]
    r2 = arrays["r2"][:, None]
    V2 = arrays["V2"][:, None]
    q = q_grid[None, :]
    z = a / q
    A = np.asarray(en.z2_psi_d2(z), dtype=float)
    B = np.asarray(en.z_psi_d1(z), dtype=float)
    h11 = r1 * r1 * A + r2 * B + V2
    h12 = -r1 * (A + B) / q
    h22 = (A + 2.0 * B) / (q * q)
    return h11, h12, h22


def _psd_mask(h11_0, h12, h22, lam: float) -> np.ndarray:
    tol11 = PSD_RTOL * (np.abs(h11_0) + abs(lam) + 1.0)
    det0 = h11_0 * h22 - h12 * h12
    tol_det = PSD_RTOL * (np.abs(h11_0) * h22 + abs(lam) * np.abs(h22) + h12 * h12 + 1.0)
    return (h22 > 0) & (h11_0 - lam >= -tol11) & (det0 - lam * h22 >= -tol_det)


def _certify_lambda(h11_0, h12, h22, refine_tol: float = 1e-6) -> float:
    """Largest lambda with an all-true PSD grid, located by bracketed bisection."""
    with np.errstate(divide="ignore", invalid="ignore"):
        det0 = h11_0 * h22 - h12 * h12
        cap = np.where(h22 > 0, det0 / h22, -np.inf)
    seed = float(min(h11_0.min(), cap.min()))
    if not np.isfinite(seed):
        return float("-inf")
    lo, hi = seed - 1.0, seed + 1.0
    for _ in range(60):
        if _psd_mask(h11_0, h12, h22, lo).all():
            break
        lo -= 2.0 * (hi - lo)
    for _ in range(60):
        if not _psd_mask(h11_0, h12, h22, hi).all():
            break
        hi += 2.0 * (hi - lo)
    while hi - lo > refine_tol:
        mid = 0.5 * (lo + hi)
        if _psd_mask(h11_0, h12, h22, mid).all():
            lo = mid
        else:
            hi = mid
    return lo


def _grid_meta(arrays: dict, g: MobilityFunction, q_grid: np.ndarray) -> dict:
    meta = {
        "n_p": int(arrays["x"].size),
        "n_q": int(q_grid.size),
        "q_min": float(q_grid[0]),
        "q_max": float(q_grid[-1]),
        "x_min": float(arrays["x"][0]),
        "x_max": float(arrays["x"][-1]),
        "note": "p-grid is the image of the uniform interior x-grid; certified on grid only",
    }
    if g.kind == "power" and g.p >= 2.0:
        from .transform import _power_alpha

        alpha = np.arctanh if g.p == 2.0 else _power_alpha(g.p)
        meta["p_min"] = float(alpha(arrays["x"][0]))
        meta["p_max"] = float(alpha(arrays["x"][-1]))
    return meta


def porous_medium_conditions(
    m: float,
    g: MobilityFunction,
    W: PotentialSpec | None = None,
    lam: float | None = None,
    n_p: int = 64,
    n_q: int = 64,
    q_range: tuple[float, float] = (1e-3, 1e3),
) -> ConvexityReport:
    """Classify the porous-medium convexity region and certify PSD on a grid.

    The sign structure decouples: the determinant needs g^(1/m) concave
    (p <= 2m for the power family), the (1,1) entry needs g^(2-m) convex for
    m > 2 or concave for m < 2, and the potential must dominate the modulus,
    g^2 W'' + g g' W' - lambda >= 0.  When `lam` is omitted it is set to the
    grid infimum of the potential term so the margin condition is tight.
    """
    if not m > 1.0:
        raise DomainError(f"porous-medium exponent must satisfy m > 1, got {m}")
    W = W or zero_potential()
    en = power_energy(m)
    arrays = _x_side_arrays(g, W, n_p)
    if lam is None:
        lam = float(arrays["V2"].min())

    conditions: list[Condition] = []
    p_mob = g.p if g.kind == "power" else None

    # determinant sign: concavity of g^(1/m)
    det_quant = (m - 1.0) * arrays["r1"] ** 2 - m * (arrays["r1"] ** 2 - arrays["r2"])
    # (m-1)(g')^2 - m g''g, written via r1 = -g', r2 = (g')^2 - g g''
    if p_mob is not None:
        ok = p_mob <= 2.0 * m
        detail = f"power rule p <= 2m: p={p_mob}, 2m={2 * m}"
    else:
        ok = bool(det_quant.min() >= -1e-10)
        detail = f"grid min of (m-1)(g')^2 - m g g'' = {det_quant.min():.3e}"
    conditions.append(Condition("g_pow_1_over_m_concave", bool(ok), detail))

    # (1,1) entry sign: curvature of g^(2-m)
    h11_quant = (m - 1.0) * arrays["r1"] ** 2 - (arrays["r1"] ** 2 - arrays["r2"])
    if abs(m - 2.0) < 1e-12:
        ok = bool(h11_quant.min() >= -1e-10)  # equals (g')^2 - g g'' >= 0, assumption (g3)
        conditions.append(
            Condition("h11_term_nonneg", ok, f"grid min (g')^2 - g g'' = {h11_quant.min():.3e}")
        )
    elif m > 2.0:
        if p_mob is not None:
            conditions.append(Condition("g_pow_2_minus_m_convex", True, "holds for every p when m > 2"))
        else:
            ok = bool(h11_quant.min() >= -1e-10)
            conditions.append(Condition("g_pow_2_minus_m_convex", ok, f"grid min = {h11_quant.min():.3e}"))
    else:
        if p_mob is not None:
            ok = p_mob < 2.0 / (2.0 - m)
            detail = f"power rule p < 2/(2-m): p={p_mob}, 2/(2-m)={2.0 / (2.0 - m):.6g}"
        else:
            ok = bool(h11_quant.min() >= -1e-10)
            detail = f"grid min = {h11_quant.min():.3e}"
        conditions.append(Condition("g_pow_2_minus_m_concave", bool(ok), detail))

    margin = float(arrays["V2"].min()) - lam
    conditions.append(
        Condition("potential_margin_nonneg", margin >= -1e-12, f"inf(g^2 W'' + g g' W') - lambda = {margin:.3e}")
    )

    q_grid = np.geomspace(q_range[0], q_range[1], n_q)
    h11_0, h12, h22 = _hessian_base(arrays, en, q_grid)
    psd = _psd_mask(h11_0, h12, h22, lam)
    tol11 = PSD_RTOL * (np.abs(h11_0) + abs(lam) + 1.0)
    h11_ok = bool(((h11_0 - lam) >= -tol11).all())
    det0 = h11_0 * h22 - h12 * h12
    tol_det = PSD_RTOL * (np.abs(h11_0) * h22 + abs(lam) * np.abs(h22) + h12 * h12 + 1.0)
    det_ok = bool(((det0 - lam * h22) >= -tol_det).all())
    conditions.append(Condition("h11_psd_on_grid", h11_ok, f"lambda={lam:.6g}"))
    conditions.append(Condition("det_psd_on_grid", det_ok, f"lambda={lam:.6g}"))

    return ConvexityReport(
        lambda_best=_certify_lambda(h11_0, h12, h22),
        psd_grid=psd,
        regime="porous_medium",
        conditions=tuple(conditions),
        grid_meta=_grid_meta(arrays, g, q_grid),
        m=m,
        lambda_formula=lam,
    )


def convexity_report(
    g: MobilityFunction,
    W: PotentialSpec | None,
    en: InternalEnergy,
    n_p: int = 64,
    n_q: int = 64,
    q_range: tuple[float, float] = (1e-3, 1e3),
) -> ConvexityReport:
    """Regime-dispatching certification used by the command-line surface."""
    W = W or zero_potential()
    if en.kind == "power":
        return porous_medium_conditions(en.m, g, W, n_p=n_p, n_q=n_q, q_range=q_range)

    arrays = _x_side_arrays(g, W, n_p)
    q_grid = np.geomspace(q_range[0], q_range[1], n_q)
    h11_0, h12, h22 = _hessian_base(arrays, en, q_grid)
    lambda_best = _certify_lambda(h11_0, h12, h22)

    if W.kind == "zero":
        lam = heat_lambda(g)
        conditions = (
            Condition("lambda_closed_form", True, f"-sup g g'' = {lam:.9g}"),
            Condition(
                "offdiagonal_vanishes",
                bool(np.abs(h12).max() <= 1e-12),
                "log-entropy Hessian is diagonal",
            ),
            Condition("psd_at_formula_lambda", bool(_psd_mask(h11_0, h12, h22, lam).all()), ""),
        )
        return ConvexityReport(
            lambda_best=lambda_best,
            psd_grid=_psd_mask(h11_0, h12, h22, lam),
            regime="heat",
            conditions=conditions,
            grid_meta=_grid_meta(arrays, g, q_grid),
            lambda_formula=lam,
        )

    lam_d, lam_w = fokker_planck_lambdas(g, W)
    lam = lam_d + lam_w
    conditions = (
        Condition("diffusive_modulus", True, f"inf(-g g'') = {lam_d:.9g}"),
        Condition("potential_modulus", True, f"inf(g^2 W'' + g g' W') = {lam_w:.9g}"),
        Condition("psd_at_formula_lambda", bool(_psd_mask(h11_0, h12, h22, lam).all()), ""),
    )
    return ConvexityReport(
        lambda_best=lambda_best,
        psd_grid=_psd_mask(h11_0, h12, h22, lam),
        regime="linear_fp",
        conditions=conditions,
        grid_meta=_grid_meta(arrays, g, q_grid),
        lambda_formula=lam,
    )
