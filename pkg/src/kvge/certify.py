"""Evaluate the existence-certificate inequalities for a concrete problem.

For each growth regime there is a pair of conditions: a forcing condition
at the inner level rho1 (condition 1) and a smallness condition at the
outer level rho2 (condition 2).  A passing certificate implies a positive
solution with nonlocal value between rho1 and rho2 and sup-norm inside
the reported localization interval.  The admissible lambda window is the
exact inversion of the two conditions, which are monotone in lambda.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import varexp
from .errors import EmptyBoxError, HypothesisError, ValidationError
from .expr import Expression, parse
from .green import BoundaryModel
from .kernel import CONSTANT_ONE, Kernel
from .varexp import (
    BOUND_CONVEX_M,
    BOUND_MBAR,
    BOUND_MSTAR,
    CONCAVE,
    CONVEX,
    MIXED,
    ExponentProfile,
    RhoBounds,
)

T2_8 = "t2.8"
T3_6 = "t3.6"
T4_4 = "t4.4"
C2_10 = "c2.10"
C2_11 = "c2.11"

_POSITIVITY_SAMPLES = 1000
_CONSTANT_P_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Full problem data: coefficients, exponent, kernel, boundary, levels."""

    A: Expression
    f: Expression
    profile: ExponentProfile
    kernel: Kernel
    boundary: BoundaryModel
    lam: float
    rho1: float
    rho2: float
    q: Optional[float] = None

    def __post_init__(self):
        if not (0.0 < self.rho1 < self.rho2):
            raise ValidationError("need 0 < rho1 < rho2")
        if self.lam < 0.0:
            raise ValidationError("need lambda >= 0")
        if not self.A.variables <= {"t"}:
            raise ValidationError("A must be an expression in t only")
        if not self.f.variables <= {"t", "u"}:
            raise ValidationError("f must be an expression in t and u")

    @classmethod
    def build(cls, A: str, f: str, p: str, kernel: Kernel, boundary: BoundaryModel,
              lam: float, rho1: float, rho2: float, q: Optional[float] = None,
              p_bounds: Optional[tuple[float, float]] = None) -> "ProblemSpec":
        return cls(
            A=parse(A, {"t"}),
            f=parse(f, {"t", "u"}),
            profile=ExponentProfile.from_expression(p, p_bounds),
            kernel=kernel, boundary=boundary,
            lam=float(lam), rho1=float(rho1), rho2=float(rho2), q=q,
        )

    def with_lambda(self, lam: float) -> "ProblemSpec":
        return ProblemSpec(self.A, self.f, self.profile, self.kernel,
                           self.boundary, lam, self.rho1, self.rho2, self.q)


@dataclass(frozen=True)
class BoxExtremum:
    """An extremal value of f over a [t] x [u] box."""

    t_range: tuple[float, float]
    u_range: tuple[float, float]
    value: float


@dataclass(frozen=True, eq=False)
class Certificate:
    """Evaluated conditions, boxes, window and localization for one theorem."""

    theorem: str
    condition1_lhs: float
    condition1_rhs: float
    condition2_lhs: float
    condition2_rhs: float
    f_min_box: BoxExtremum
    f_max_box: BoxExtremum
    A_rho1: float
    A_rho2: float
    positivity_ok: bool
    passed: bool
    lambda_window: Optional[tuple[float, float]]
    localization: tuple[float, float]
    margin: float = 0.0
    extras: dict = field(default_factory=dict)

    def to_report(self) -> dict:
        """Stable-schema dictionary with every named certificate quantity."""
        x = self.extras
        return {
            "theorem": self.theorem,
            "pass": self.passed,
            "margin": self.margin,
            "eta0": x["eta0"],
            "C0": x["C0"],
            "GM": x["GM"],
            "partial_GM": x["partial_GM"],
            "mass": x["mass"],
            "partial_mass": x["partial_mass"],
            "reverse_holder_norm": x["reverse_holder_norm"],
            "q_used": x["q_used"],
            "bound_kind": x["bound_kind"],
            "eps_rho1": x["eps_rho1"],
            "m_rho1": x["m_rho1"],
            "M_rho1": x["M_rho1"],
            "M_rho2": x["M_rho2"],
            "f_min": {"t_range": list(self.f_min_box.t_range),
                      "u_range": list(self.f_min_box.u_range),
                      "value": self.f_min_box.value},
            "f_max": {"t_range": list(self.f_max_box.t_range),
                      "u_range": list(self.f_max_box.u_range),
                      "value": self.f_max_box.value},
            "A_rho1": self.A_rho1,
            "A_rho2": self.A_rho2,
            "positivity_ok": self.positivity_ok,
            "condition1": {"lhs": self.condition1_lhs, "rhs": self.condition1_rhs,
                           "pass": x["condition1_pass"]},
            "condition2": {"lhs": self.condition2_lhs, "rhs": self.condition2_rhs,
                           "pass": x["condition2_pass"],
                           "branch_p_minus": x["condition2_branch_p_minus"],
                           "branch_p_plus": x["condition2_branch_p_plus"]},
            "condition1_variant_with_minus_one": x.get("condition1_variant_with_minus_one"),
            "lambda_window": list(self.lambda_window) if self.lambda_window else None,
            "localization": list(self.localization),
        }


# --- box extrema ----------------------------------------------------------

def extremal_f(f: Expression, t_range: tuple[float, float],
               u_range: tuple[float, float], mode: str,
               grid: int = 201, refinements: int = 3) -> BoxExtremum:
    """Grid extremum of f over a box with local 5x refinement rounds."""
    t_lo, t_hi = t_range
    u_lo, u_hi = u_range
    if u_lo > u_hi or t_lo > t_hi:
        raise EmptyBoxError(
            f"empty box [{t_lo}, {t_hi}] x [{u_lo}, {u_hi}] in extremal search")
    if mode not in ("min", "max"):
        raise ValidationError(f"unknown extremal mode {mode!r}")
    sign = 1.0 if mode == "max" else -1.0

    def sample(ts, us):
        T, U = np.meshgrid(ts, us, indexing="ij")
        vals = np.asarray(f.eval({"t": T, "u": U}), dtype=float)
        if np.any(vals < 0.0):
            i = np.unravel_index(int(np.argmin(vals)), vals.shape)
            raise HypothesisError(
                f"f is negative at (t, u) = ({T[i]:.6g}, {U[i]:.6g})")
        k = np.unravel_index(int(np.argmax(sign * vals)), vals.shape)
        return float(T[k]), float(U[k]), float(vals[k])

    ts = np.linspace(t_lo, t_hi, grid)
    us = np.linspace(u_lo, u_hi, grid)
    tb, ub, best = sample(ts, us)
    ct = (t_hi - t_lo) / (grid - 1) if grid > 1 else 0.0
    cu = (u_hi - u_lo) / (grid - 1) if grid > 1 else 0.0
    for _ in range(refinements):
        if ct == 0.0 and cu == 0.0:
            break
        ts = np.linspace(max(t_lo, tb - ct), min(t_hi, tb + ct), 11)
        us = np.linspace(max(u_lo, ub - cu), min(u_hi, ub + cu), 11)
        tb2, ub2, v = sample(ts, us)
        if sign * v > sign * best:
            tb, ub, best = tb2, ub2, v
        ct /= 5.0
        cu /= 5.0
    return BoxExtremum((t_lo, t_hi), (u_lo, u_hi), best)


# --- shared machinery -------------------------------------------------------

def select_theorem(spec: ProblemSpec) -> str:
    """Pick the applicable result for the spec's regime and kernel."""
    regime = spec.profile.regime
    if regime == CONVEX:
        if spec.kernel.kind == CONSTANT_ONE:
            if spec.profile.is_constant(_CONSTANT_P_TOL):
                return C2_11
            return C2_10
        return T2_8
    if regime == CONCAVE:
        return T3_6
    return T4_4


def _pick_bound_kind(theorem: str) -> str:
    if theorem in (C2_10, C2_11):
        return BOUND_MSTAR
    if theorem == T2_8:
        return BOUND_CONVEX_M
    return BOUND_MBAR


def _q_for(spec: ProblemSpec, theorem: str, kind: str) -> float:
    prof, kern = spec.profile, spec.kernel
    if kind == BOUND_MSTAR:
        # M-star is the q -> p- limit; no free exponent remains
        return prof.p_minus
    if spec.q is not None:
        q = float(spec.q)
        if theorem == T2_8 and not (1.0 < q < prof.p_minus):
            raise ValidationError(f"q={q} outside (1, p-) = (1, {prof.p_minus})")
        if theorem == T4_4 and not (1.0 < q < prof.p_plus):
            raise ValidationError(f"q={q} outside (1, p+) = (1, {prof.p_plus})")
        if theorem == T3_6 and q <= 1.0:
            raise ValidationError(f"q={q} must exceed 1")
        return q
    return varexp.default_q(kern, prof)


def localization_bounds(spec: ProblemSpec, theorem: Optional[str] = None,
                        bound_kind: Optional[str] = None
                        ) -> tuple[RhoBounds, RhoBounds, float, str]:
    """Localization pairs at rho1/rho2 for the applicable theorem."""
    theorem = theorem or select_theorem(spec)
    kind = bound_kind or _pick_bound_kind(theorem)
    q = _q_for(spec, theorem, kind)
    bm = spec.boundary
    b1 = varexp.rho_bounds(spec.rho1, spec.kernel, spec.profile, q, kind,
                           bm.C0, bm.eta0, bm.alpha, bm.beta)
    b2 = varexp.rho_bounds(spec.rho2, spec.kernel, spec.profile, q, kind,
                           bm.C0, bm.eta0, bm.alpha, bm.beta)
    return b1, b2, q, kind


def _check_positivity(spec: ProblemSpec) -> tuple[float, float, bool]:
    ts = np.linspace(spec.rho1, spec.rho2, _POSITIVITY_SAMPLES + 2)
    vals = np.asarray(spec.A.eval({"t": ts}), dtype=float)
    A1, A2 = float(vals[0]), float(vals[-1])
    if A1 <= 0.0 or A2 <= 0.0:
        raise HypothesisError(
            f"A must be positive at the levels rho1/rho2; got A(rho1)={A1:.6g}, "
            f"A(rho2)={A2:.6g}")
    return A1, A2, bool(np.all(vals > 0.0))


def _window_condition2(rho2: float, mass: float, p_minus: float, p_plus: float,
                       K2: float) -> float:
    R2 = rho2 / mass
    x_max = R2 ** (1.0 / p_plus) if R2 >= 1.0 else R2 ** (1.0 / p_minus)
    return x_max / K2 if K2 > 0.0 else math.inf


def _assemble(spec: ProblemSpec, theorem: str, margin: float, grid: int,
              bound_kind: Optional[str] = None) -> Certificate:
    prof, kern, bm = spec.profile, spec.kernel, spec.boundary
    pm, pp = prof.p_minus, prof.p_plus
    b1, b2, q_used, kind = localization_bounds(spec, theorem, bound_kind)

    mass = kern.mass()
    B_ab = kern.partial_conv_mass(bm.alpha, bm.beta)
    gm = bm.GM()
    pgm = bm.partial_GM()
    rh = kern.reverse_holder_norm(q_used) if q_used > 1.0 else math.nan
    A1, A2, positivity_ok = _check_positivity(spec)

    f_min = extremal_f(spec.f, (bm.alpha, bm.beta),
                       (bm.eta0 * b1.m_rho, b1.M_upper), "min", grid)
    f_max = extremal_f(spec.f, (0.0, 1.0), (0.0, b2.M_upper), "max", grid)
    if f_max.value < f_min.value - 1e-12:
        raise ValidationError(
            "inconsistent extremal search: max of f below min of f on nested boxes")

    x1 = spec.lam * f_min.value * pgm / A1
    x2 = spec.lam * f_max.value * gm / A2
    branch_lo, branch_hi = x2 ** pm, x2 ** pp

    if theorem in (T2_8, C2_10, C2_11):
        cond1_lhs = (2.0 ** (1.0 - pp) * x1 ** pm - 1.0) * B_ab
        cond1_rhs = spec.rho1 / bm.eta0 ** pp
        cond2_lhs = max(branch_lo, branch_hi) * mass
        cond2_rhs = spec.rho2
    elif theorem == T3_6:
        cond1_lhs = (x1 ** pm - 1.0) * B_ab
        cond1_rhs = spec.rho1 / bm.eta0 ** pp
        cond2_lhs = max(branch_lo, branch_hi)
        cond2_rhs = spec.rho2 / mass
    else:  # T4_4: as printed, without the "-1" term
        cond1_lhs = bm.eta0 ** pp * x1 ** pm * B_ab
        cond1_rhs = spec.rho1
        cond2_lhs = max(branch_lo, branch_hi)
        cond2_rhs = spec.rho2 / mass

    cond1_pass = cond1_lhs > cond1_rhs * (1.0 + margin)
    cond2_pass = cond2_lhs * (1.0 + margin) < cond2_rhs
    passed = bool(cond1_pass and cond2_pass and positivity_ok)

    # exact lambda inversion (the boxes do not depend on lambda)
    K1 = f_min.value * pgm / A1
    K2 = f_max.value * gm / A2
    window: Optional[tuple[float, float]] = None
    if K1 > 0.0:
        base = spec.rho1 / (bm.eta0 ** pp * B_ab)
        if theorem in (T2_8, C2_10, C2_11):
            lam_min = ((base + 1.0) * 2.0 ** (pp - 1.0)) ** (1.0 / pm) / K1
        elif theorem == T3_6:
            lam_min = (base + 1.0) ** (1.0 / pm) / K1
        else:
            lam_min = base ** (1.0 / pm) / K1
        lam_max = _window_condition2(spec.rho2, mass, pm, pp, K2)
        if lam_min < lam_max:
            window = (lam_min, lam_max)

    extras = {
        "eta0": bm.eta0, "C0": bm.C0, "GM": gm, "partial_GM": pgm,
        "mass": mass, "partial_mass": B_ab,
        "reverse_holder_norm": rh, "q_used": q_used, "bound_kind": kind,
        "eps_rho1": b1.eps, "m_rho1": b1.m_rho,
        "M_rho1": b1.M_upper, "M_rho2": b2.M_upper,
        "condition1_pass": bool(cond1_pass), "condition2_pass": bool(cond2_pass),
        "condition2_branch_p_minus": branch_lo, "condition2_branch_p_plus": branch_hi,
    }
    if theorem == T4_4:
        # the tighter variant that keeps the "-1" of the concave condition
        v_lhs = (x1 ** pm - 1.0) * B_ab
        v_rhs = spec.rho1 / bm.eta0 ** pp
        extras["condition1_variant_with_minus_one"] = {
            "lhs": v_lhs, "rhs": v_rhs, "pass": bool(v_lhs > v_rhs * (1.0 + margin)),
        }
    else:
        extras["condition1_variant_with_minus_one"] = None

    return Certificate(
        theorem=theorem,
        condition1_lhs=cond1_lhs, condition1_rhs=cond1_rhs,
        condition2_lhs=cond2_lhs, condition2_rhs=cond2_rhs,
        f_min_box=f_min, f_max_box=f_max,
        A_rho1=A1, A_rho2=A2,
        positivity_ok=positivity_ok, passed=passed,
        lambda_window=window,
        localization=(b1.m_rho, b2.M_upper),
        margin=margin, extras=extras,
    )


# --- public checks -----------------------------------------------------------

def _require_regime(spec: ProblemSpec, regime: str, theorem: str):
    if spec.profile.regime != regime:
        raise ValidationError(
            f"{theorem} needs the {regime} regime, got {spec.profile.regime}")


def check_theorem_2_8(spec: ProblemSpec, margin: float = 0.0, grid: int = 201,
                      bound_kind: str = BOUND_CONVEX_M) -> Certificate:
    """Convex-regime certificate with a general kernel.

    bound_kind selects the sup-norm bound feeding the boxes: the default
    reverse-Hoelder bound, or the constant-kernel M-star limit.
    """
    _require_regime(spec, CONVEX, T2_8)
    return _assemble(spec, T2_8, margin, grid, bound_kind=bound_kind)


def check_corollary_2_10(spec: ProblemSpec, margin: float = 0.0, grid: int = 201
                         ) -> Certificate:
    """Constant-kernel convex certificate with the sharp M-star bound."""
    _require_regime(spec, CONVEX, C2_10)
    if spec.kernel.kind != CONSTANT_ONE:
        raise ValidationError("c2.10 requires the constant-one kernel")
    return _assemble(spec, C2_10, margin, grid)


def check_corollary_2_11(spec: ProblemSpec, margin: float = 0.0, grid: int = 201
                         ) -> Certificate:
    """Constant-kernel, constant-exponent certificate."""
    _require_regime(spec, CONVEX, C2_11)
    if spec.kernel.kind != CONSTANT_ONE:
        raise ValidationError("c2.11 requires the constant-one kernel")
    if not spec.profile.is_constant(_CONSTANT_P_TOL):
        raise ValidationError("c2.11 requires a constant exponent")
    return _assemble(spec, C2_11, margin, grid)


def check_theorem_3_6(spec: ProblemSpec, margin: float = 0.0, grid: int = 201
                      ) -> Certificate:
    """Concave-regime certificate."""
    _require_regime(spec, CONCAVE, T3_6)
    return _assemble(spec, T3_6, margin, grid)


def check_theorem_4_4(spec: ProblemSpec, margin: float = 0.0, grid: int = 201
                      ) -> Certificate:
    """Mixed-regime certificate (condition 1 as printed, no -1 term)."""
    _require_regime(spec, MIXED, T4_4)
    return _assemble(spec, T4_4, margin, grid)


_CHECKS = {
    T2_8: check_theorem_2_8,
    T3_6: check_theorem_3_6,
    T4_4: check_theorem_4_4,
    C2_10: check_corollary_2_10,
    C2_11: check_corollary_2_11,
}


def check_certificate(spec: ProblemSpec, theorem: str = "auto",
                      margin: float = 0.0, grid: int = 201) -> Certificate:
    """Run the regime-appropriate (or the requested) certificate check."""
    label = select_theorem(spec) if theorem == "auto" else theorem
    if label not in _CHECKS:
        raise ValidationError(f"unknown theorem {theorem!r}")
    return _CHECKS[label](spec, margin=margin, grid=grid)


def lambda_window(spec: ProblemSpec, theorem: str = "auto",
                  grid: int = 201) -> Optional[tuple[float, float]]:
    """Exact admissible lambda interval for the requested certificate."""
    return check_certificate(spec, theorem=theorem, grid=grid).lambda_window
