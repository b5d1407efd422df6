"""Collocation solver for the nonlocal boundary value problem.

The coefficient depends on u only through the scalar z = (b * u^p(.))(1),
so the problem splits into an inner Hammerstein solve with z frozen
(damped Picard on the Green-kernel integral operator) and an outer scalar
fixed-point search for self-consistent z inside [rho1, rho2].
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from . import certify as _certify
from .errors import DivergenceError, HypothesisError
from .grid import GridFunction, trapezoid_weights

DEFAULT_NODES = 257
DEFAULT_SCAN = 64
TOL_INNER = 1e-10
TOL_OUTER = 1e-10
MAX_INNER_ITERS = 10_000
_OMEGA_FLOOR = 1.0 / 64.0

LOC_TOL = 1e-6
CONE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SolutionProfile:
    """A self-consistent solution with its verification flags."""

    u: GridFunction
    z_star: float
    residual_sup: float
    sup_norm: float
    localization_ok: bool
    cone_ok: bool
    annulus_ok: bool
    localization: tuple[float, float]

    def to_report(self) -> dict:
        return {
            "z_star": self.z_star,
            "residual_sup": self.residual_sup,
            "sup_norm": self.sup_norm,
            "localization_ok": self.localization_ok,
            "cone_ok": self.cone_ok,
            "annulus_ok": self.annulus_ok,
            "localization": list(self.localization),
            "n_nodes": self.u.size,
        }


@lru_cache(maxsize=8)
def _green_matrix(boundary, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Collocation nodes and G(t_i, s_j) w_j with trapezoid weights."""
    t = np.linspace(0.0, 1.0, n)
    g = np.asarray(boundary.green_eval(t[:, None], t[None, :]), dtype=float)
    return t, g * trapezoid_weights(n)[None, :]


def _coefficient_at(spec, z: float) -> float:
    return float(spec.A.eval({"t": float(z)}))


def apply_T(spec, u: GridFunction, z: float) -> GridFunction:
    """One application of the integral operator with the nonlocal value frozen at z."""
    az = _coefficient_at(spec, z)
    if az <= 0.0:
        raise HypothesisError(f"degenerate coefficient A({z:.6g}) = {az:.6g}")
    nodes, gw = _green_matrix(spec.boundary, u.size)
    fvals = np.asarray(spec.f.eval({"t": nodes, "u": u.values}), dtype=float)
    if np.any(fvals < 0.0):
        raise HypothesisError("f evaluated negative along the iterate")
    return GridFunction(nodes, (spec.lam / az) * (gw @ fvals))


def inner_solve(spec, z: float, u0: Optional[GridFunction] = None,
                n: int = DEFAULT_NODES, tol_inner: float = TOL_INNER,
                max_iters: int = MAX_INNER_ITERS) -> GridFunction:
    """Solve u = T_z u by damped Picard iteration for frozen z."""
    az = _coefficient_at(spec, z)
    if az <= 0.0:
        raise HypothesisError(f"degenerate coefficient A({z:.6g}) = {az:.6g}")
    if u0 is None:
        u0 = GridFunction.constant(n, _certify.localization_bounds(spec)[0].m_rho)
    u = u0
    omega = 1.0
    prev_diff = np.inf
    stall = 0
    diff = np.inf
    for _ in range(max_iters):
        tu = apply_T(spec, u, z)
        diff = float(np.max(np.abs(tu.values - u.values)))
        if diff < tol_inner:
            return u
        if diff >= prev_diff * (1.0 - 1e-12):
            stall += 1
            if stall >= 3 and omega > _OMEGA_FLOOR:
                omega = max(_OMEGA_FLOOR, 0.5 * omega)
                stall = 0
        else:
            stall = 0
        u = GridFunction(u.nodes, (1.0 - omega) * u.values + omega * tu.values)
        prev_diff = diff
    raise DivergenceError(
        f"inner iteration did not converge in {max_iters} steps at z={z:.6g}", diff)


def _phi(spec, z: float, n: int, tol_inner: float, quad_tol: float) -> float:
    u = inner_solve(spec, z, n=n, tol_inner=tol_inner)
    return spec.kernel.nonlocal_value(u, spec.profile.p, tol=quad_tol)


def verify_profile(spec, u: GridFunction, z_star: float,
                   loc_tol: float = LOC_TOL, cone_tol: float = CONE_TOL
                   ) -> tuple[bool, bool, bool, float]:
    """Localization, cone-membership, annulus and residual checks; never raises."""
    b1, b2, _, _ = _certify.localization_bounds(spec)
    sup = u.sup_norm()
    localization_ok = (b1.m_rho - loc_tol <= sup <= b2.M_upper + loc_tol)
    bm = spec.boundary
    cone_ok = bool(
        np.all(u.values >= -cone_tol)
        and u.min_on(bm.alpha, bm.beta) >= bm.eta0 * sup - cone_tol
        and u.integral() >= bm.C0 * sup - cone_tol
    )
    annulus_ok = spec.rho1 < z_star < spec.rho2
    residual_sup = float(np.max(np.abs(u.values - apply_T(spec, u, z_star).values)))
    return localization_ok, cone_ok, annulus_ok, residual_sup


def _make_profile(spec, z_star: float, n: int, tol_inner: float) -> SolutionProfile:
    u = inner_solve(spec, z_star, n=n, tol_inner=tol_inner)
    b1, b2, _, _ = _certify.localization_bounds(spec)
    loc_ok, cone_ok, ann_ok, res = verify_profile(spec, u, z_star)
    return SolutionProfile(
        u=u, z_star=z_star, residual_sup=res, sup_norm=u.sup_norm(),
        localization_ok=loc_ok, cone_ok=cone_ok, annulus_ok=ann_ok,
        localization=(b1.m_rho, b2.M_upper),
    )


def outer_solve(spec, n: int = DEFAULT_NODES, scan_points: int = DEFAULT_SCAN,
                tol_outer: float = TOL_OUTER, tol_inner: float = TOL_INNER,
                quad_tol: float = 1e-10,
                max_workers: Optional[int] = None) -> list[SolutionProfile]:
    """Locate all self-consistent nonlocal values in [rho1, rho2].

    Scans z on a grid (skipping z with A(z) <= 0), brackets sign changes
    of phi(z) - z, and bisects each bracket.  Returns every root found;
    an empty list means no self-consistent solution was located, which is
    a report, not an error.
    """
    if max_workers is None:
        max_workers = max(1, int(os.environ.get("KVGE_THREADS", "1")))
    zs = np.linspace(spec.rho1, spec.rho2, scan_points)
    valid = np.array([_coefficient_at(spec, z) > 0.0 for z in zs])

    def g(z: float) -> float:
        return _phi(spec, float(z), n, tol_inner, quad_tol) - float(z)

    gvals: list[Optional[float]] = [None] * len(zs)
    idx = [i for i in range(len(zs)) if valid[i]]
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            for i, val in zip(idx, pool.map(lambda i: g(zs[i]), idx)):
                gvals[i] = val
    else:
        for i in idx:
            gvals[i] = g(zs[i])

    roots: list[float] = []
    for i in range(len(zs) - 1):
        if not (valid[i] and valid[i + 1]):
            continue
        glo, ghi = gvals[i], gvals[i + 1]
        if glo == 0.0:
            roots.append(float(zs[i]))
            continue
        if glo * ghi > 0.0:
            continue
        lo, hi = float(zs[i]), float(zs[i + 1])
        flo = glo
        abandoned = False
        while hi - lo > tol_outer:
            mid = 0.5 * (lo + hi)
            if _coefficient_at(spec, mid) <= 0.0:
                abandoned = True  # coefficient dips nonpositive inside the bracket
                break
            fm = g(mid)
            if flo * fm <= 0.0:
                hi = mid
            else:
                lo, flo = mid, fm
        if not abandoned:
            roots.append(0.5 * (lo + hi))
    if gvals[-1] == 0.0:
        roots.append(float(zs[-1]))

    deduped: list[float] = []
    for r in roots:
        if all(abs(r - r0) > 10.0 * tol_outer for r0 in deduped):
            deduped.append(r)
    return [_make_profile(spec, r, n, tol_inner) for r in deduped]
