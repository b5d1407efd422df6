"""Variable-exponent analysis: p bounds, regimes, and sup-norm bounds.

Provides the exponent profile (p-, p+, regime), the boundary-layer
correction eps(rho, b), the lower bound m_rho on ||u||_inf over the
nonlocal level set, the three upper bounds (convex M, concave/mixed
M-bar, constant-kernel M-star), the comparison function phi(q), and the
pointwise variable-to-constant power inequalities behind them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import HypothesisError, ValidationError
from .expr import Expression, parse
from .kernel import Kernel

CONVEX = "convex"      # 1 < p- <= p+
CONCAVE = "concave"    # 0 < p- <= p+ <= 1
MIXED = "mixed"        # 0 < p- < 1 < p+

BOUND_CONVEX_M = "convex_M"
BOUND_MBAR = "concave_mixed_Mbar"
BOUND_MSTAR = "special_Mstar"

_EXTRACT_GRID = 100_001
_PROFILE_CHECK_GRID = 10_001
_Q_GRID_STEP = 1e-3


def _golden_extremum(f, a: float, b: float, sign: float, tol: float = 1e-12) -> float:
    """Extremal value of f on [a, b] (sign=+1 for max, -1 for min)."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = sign * f(x1), sign * f(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = sign * f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = sign * f(x1)
    return sign * max(f1, f2)


def extract_bounds(p: Expression) -> tuple[float, float]:
    """Min/max of p over [0, 1]: dense grid plus golden-section refinement."""
    t = np.linspace(0.0, 1.0, _EXTRACT_GRID)
    vals = np.asarray(p.eval({"t": t}), dtype=float)
    if np.any(vals <= 0.0):
        bad = float(t[np.argmin(vals)])
        raise HypothesisError(f"exponent p is nonpositive at t={bad:.6g}")
    h = 1.0 / (_EXTRACT_GRID - 1)
    i_min, i_max = int(np.argmin(vals)), int(np.argmax(vals))
    scalar = lambda x: p.eval({"t": float(x)})
    lo = _golden_extremum(scalar, max(0.0, t[i_min] - h), min(1.0, t[i_min] + h), -1.0)
    hi = _golden_extremum(scalar, max(0.0, t[i_max] - h), min(1.0, t[i_max] + h), +1.0)
    return min(lo, float(vals[i_min])), max(hi, float(vals[i_max]))


@dataclass(frozen=True)
class ExponentProfile:
    """Exponent p with validated global bounds p- <= p(t) <= p+ and regime."""

    p: Expression
    p_minus: float
    p_plus: float
    regime: str

    def __post_init__(self):
        if not (0.0 < self.p_minus <= self.p_plus):
            raise ValidationError("need 0 < p_minus <= p_plus")
        expected = classify_regime(self.p_minus, self.p_plus)
        if self.regime != expected:
            raise ValidationError(
                f"regime {self.regime!r} inconsistent with bounds "
                f"({self.p_minus}, {self.p_plus}); expected {expected!r}")
        t = np.linspace(0.0, 1.0, _PROFILE_CHECK_GRID)
        vals = np.asarray(self.p.eval({"t": t}), dtype=float)
        if np.any(vals < self.p_minus - 1e-9) or np.any(vals > self.p_plus + 1e-9):
            raise ValidationError("declared bounds do not contain p([0, 1])")

    @classmethod
    def from_expression(cls, p, bounds_override: Optional[tuple[float, float]] = None
                        ) -> "ExponentProfile":
        """Build from an expression in t; override widens to user-declared bounds."""
        e = parse(p, {"t"}) if isinstance(p, str) else p
        lo, hi = extract_bounds(e)
        if bounds_override is not None:
            pm, pp = bounds_override
            if pm > lo + 1e-9 or pp < hi - 1e-9:
                raise ValidationError(
                    f"override ({pm}, {pp}) does not contain the computed "
                    f"range ({lo:.10g}, {hi:.10g}) of p")
            lo, hi = float(pm), float(pp)
        return cls(e, lo, hi, classify_regime(lo, hi))

    def is_constant(self, tol: float = 1e-12) -> bool:
        return abs(self.p_plus - self.p_minus) <= tol


def classify_regime(p_minus: float, p_plus: float) -> str:
    if p_minus > 1.0:
        return CONVEX
    if p_plus <= 1.0:
        return CONCAVE
    if p_minus < 1.0 < p_plus:
        return MIXED
    raise ValidationError(
        "bounds with p_minus = 1 < p_plus fit no growth regime; "
        "override p_minus slightly below 1 to select the mixed regime")


# --- scalar bound functions -------------------------------------------------

def eps(rho: float, mass: float, p_minus: float, p_plus: float) -> float:
    """Boundary-layer correction added to (rho/mass)^(1/p+)."""
    if rho <= 0.0 or mass <= 0.0:
        raise ValidationError("need rho > 0 and mass > 0")
    if p_minus == p_plus:
        return 0.0  # the two powers coincide identically
    r = rho / mass
    if r ** (1.0 / p_plus) < 1.0:
        return r ** (1.0 / p_minus) - r ** (1.0 / p_plus)
    return 0.0


def m_rho_value(rho: float, mass: float, p_minus: float, p_plus: float) -> float:
    # (rho/mass)^(1/p+) + eps collapses branchwise to a single power
    r = rho / mass
    if r ** (1.0 / p_plus) < 1.0:
        return r ** (1.0 / p_minus)
    return r ** (1.0 / p_plus)


def m_rho(rho: float, kernel: Kernel, profile: ExponentProfile) -> float:
    """Lower bound on ||u||_inf when (b * u^p(.))(1) = rho."""
    return m_rho_value(rho, kernel.mass(), profile.p_minus, profile.p_plus)


def M_rho_convex(rho: float, kernel: Kernel, q: float, profile: ExponentProfile,
                 C0: float) -> float:
    """Convex-regime upper bound on ||u||_inf over the rho level set."""
    if profile.regime != CONVEX:
        raise ValidationError("convex upper bound needs the convex regime")
    if not (1.0 < q < profile.p_minus):
        raise ValidationError(f"need q in (1, p-) = (1, {profile.p_minus}), got {q}")
    rh = kernel.reverse_holder_norm(q)
    if not math.isfinite(rh):
        raise HypothesisError(f"kernel power 1/(1-q) is not integrable at q={q}")
    pm, pp = profile.p_minus, profile.p_plus
    bracket = rho ** (1.0 / q) * rh ** ((q - 1.0) / q) + 1.0
    return (1.0 / C0) * 2.0 ** ((pp - q) / pm) * bracket ** (q / pm)


def M_star(rho: float, profile: ExponentProfile, C0: float) -> float:
    """Constant-kernel limit of the convex bound (q -> p-)."""
    if profile.regime != CONVEX:
        raise ValidationError("M-star needs the convex regime")
    pm, pp = profile.p_minus, profile.p_plus
    return (1.0 / C0) * 2.0 ** ((pp - pm) / pm) * (rho ** (1.0 / pm) + 1.0)


def M_bar(rho: float, kernel: Kernel, q: float, profile: ExponentProfile,
          eta0: float, alpha: float, beta: float) -> float:
    """Concave/mixed-regime upper bound on ||u||_inf over the rho level set."""
    if profile.regime == CONVEX:
        raise ValidationError("M-bar applies to the concave and mixed regimes")
    if q <= 1.0:
        raise ValidationError("need q > 1")
    if profile.regime == MIXED and q >= profile.p_plus:
        raise ValidationError(f"mixed regime needs q in (1, p+) = (1, {profile.p_plus})")
    rh = kernel.reverse_holder_norm(q)
    if not math.isfinite(rh):
        raise HypothesisError(f"kernel power 1/(1-q) is not integrable at q={q}")
    pm = profile.p_minus
    bracket = rho ** (1.0 / q) * rh ** ((q - 1.0) / q) + 1.0
    return (1.0 / eta0) * (beta - alpha) ** (-q / pm) * bracket ** (q / pm)


def phi(q: float, rho: float, profile: ExponentProfile, C0: float) -> float:
    """Comparison function whose q -> p- limit is the sharp constant-kernel bound."""
    pm, pp = profile.p_minus, profile.p_plus
    return phi_value(q, rho, pm, pp, C0)


def phi_value(q, rho: float, p_minus: float, p_plus: float, C0: float):
    """phi on scalars or numpy arrays of q."""
    q = np.asarray(q, dtype=float)
    if np.any((q <= 1.0) | (q >= p_minus)):
        raise ValidationError("need q in (1, p-)")
    if rho <= 0.0:
        raise ValidationError("need rho > 0")
    out = (1.0 / C0) * np.exp(
        math.log(2.0) * (p_plus - q) / p_minus
        + (q / p_minus) * np.log(rho ** (1.0 / q) + 1.0)
    )
    if out.ndim == 0:
        return float(out)
    return out


def default_q(kernel: Kernel, profile: ExponentProfile, max_scan: int = 200) -> float:
    """Reverse-Hoelder exponent used when the problem does not pin one.

    Convex regime: largest q on the grid {p- - k/1000} with a finite
    reverse-Hoelder norm (larger q sharpens the constant-kernel bound).
    Concave: q = 2.  Mixed: q = min(2, (1 + p+)/2), inside (1, p+).
    """
    if profile.regime == CONCAVE:
        return 2.0
    if profile.regime == MIXED:
        return min(2.0, 0.5 * (1.0 + profile.p_plus))
    for k in range(1, max_scan + 1):
        q = profile.p_minus - k * _Q_GRID_STEP
        if q <= 1.0:
            break
        if math.isfinite(kernel.reverse_holder_norm(q)):
            return q
    raise HypothesisError(
        "no q in (1, p-) with an integrable kernel power was found")


@dataclass(frozen=True)
class RhoBounds:
    """The localization pair (m_rho, M_upper) at one level rho."""

    rho: float
    eps: float
    m_rho: float
    M_upper: float
    q_used: float
    bound_kind: str

    def __post_init__(self):
        if self.rho <= 0.0:
            raise ValidationError("need rho > 0")
        if self.m_rho <= 0.0 or self.M_upper < self.m_rho:
            raise HypothesisError(
                f"empty localization box at rho={self.rho}: "
                f"m={self.m_rho:.6g} > M={self.M_upper:.6g}")


def rho_bounds(rho: float, kernel: Kernel, profile: ExponentProfile, q: float,
               bound_kind: str, C0: float, eta0: float, alpha: float,
               beta: float) -> RhoBounds:
    """Assemble the localization pair for the requested bound kind."""
    mass = kernel.mass()
    e = eps(rho, mass, profile.p_minus, profile.p_plus)
    m = m_rho_value(rho, mass, profile.p_minus, profile.p_plus)
    if bound_kind == BOUND_CONVEX_M:
        M = M_rho_convex(rho, kernel, q, profile, C0)
    elif bound_kind == BOUND_MSTAR:
        M = M_star(rho, profile, C0)
    elif bound_kind == BOUND_MBAR:
        M = M_bar(rho, kernel, q, profile, eta0, alpha, beta)
    else:
        raise ValidationError(f"unknown bound kind {bound_kind!r}")
    return RhoBounds(rho, e, m, M, q, bound_kind)


# --- pointwise variable-to-constant power inequalities ------------------------

def power_lower_convex(y, p_t, q: float, p_minus: float, p_plus: float):
    """Lower bound for y^(p(t)/q) when 1 <= q < p- and p > 1."""
    if not (1.0 <= q < p_minus) or p_minus <= 1.0:
        raise ValidationError("need 1 <= q < p- with p- > 1")
    y = np.asarray(y, dtype=float)
    out = 2.0 ** (1.0 - p_plus / q) * y ** (p_minus / q) - 1.0
    return float(out) if out.ndim == 0 else out


def power_lower_concave(y, p_t, q: float, p_minus: float):
    """Lower bound for y^(p(t)/q) when q >= 1 and 0 < p <= 1."""
    if q < 1.0 or not (0.0 < p_minus <= 1.0):
        raise ValidationError("need q >= 1 and 0 < p- <= 1")
    y = np.asarray(y, dtype=float)
    out = y ** (p_minus / q) - 1.0
    return float(out) if out.ndim == 0 else out


def power_bounds_mixed(y, p_t, q: float, p_minus: float, p_plus: float):
    """Two-sided bounds for y^(p(t)/q) in the mixed regime, 1 <= q < p+."""
    if not (1.0 <= q < p_plus) or not (0.0 < p_minus < 1.0 < p_plus):
        raise ValidationError("need 1 <= q < p+ and p- < 1 < p+")
    y = np.asarray(y, dtype=float)
    lo = y ** (p_minus / q) - 1.0
    hi = 2.0 ** (p_plus / q - 1.0) * (y ** (p_plus / q) + 1.0)
    if lo.ndim == 0:
        return float(lo), float(hi)
    return lo, hi
