"""Convolution weights b and the nonlocal functional (b * u^p(.))(1).

A kernel provides its mass, its reverse-Hoelder norms, and quadrature of
b(1-s) u(s)^p(s).  Closed forms are used for the constant and fractional
(power-law) kernels; expression kernels fall back to adaptive quadrature
on graded meshes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import quadrature as quad
from .errors import HypothesisError, ValidationError
from .expr import Expression, parse
from .grid import GridFunction

CONSTANT_ONE = "one"
RIEMANN_LIOUVILLE = "riemann_liouville"
EXPRESSION = "expression"

# grading for generic expression kernels with possible endpoint singularities
_EXPR_GRADE = 4.0
_LOAD_CHECK_SAMPLES = 2001


@dataclass(frozen=True)
class Kernel:
    """Weight b on (0, 1]: constant one, power-law t^(a-1)/Gamma(a), or expression."""

    kind: str
    order: Optional[float] = None
    expression: Optional[Expression] = None
    quadrature_nodes: int = 64

    def __post_init__(self):
        if self.quadrature_nodes < 1:
            raise ValidationError("quadrature_nodes must be positive")
        if self.kind == CONSTANT_ONE:
            return
        if self.kind == RIEMANN_LIOUVILLE:
            if self.order is None or not (0.0 < self.order < 1.0):
                raise ValidationError("fractional kernel order must lie in (0, 1)")
            return
        if self.kind == EXPRESSION:
            if self.expression is None:
                raise ValidationError("expression kernel needs an expression in t")
            t = np.linspace(1e-9, 1.0, _LOAD_CHECK_SAMPLES)
            vals = np.asarray(self.expression.eval({"t": t}), dtype=float)
            if np.any(vals < 0.0):
                bad = float(t[np.argmin(vals)])
                raise HypothesisError(f"kernel is negative at t={bad:.6g}")
            if self.mass() <= 0.0:
                raise HypothesisError("kernel mass must be positive")
            return
        raise ValidationError(f"unknown kernel kind {self.kind!r}")

    # --- constructors ----------------------------------------------------

    @classmethod
    def constant_one(cls, quadrature_nodes: int = 64) -> "Kernel":
        return cls(CONSTANT_ONE, quadrature_nodes=quadrature_nodes)

    @classmethod
    def riemann_liouville(cls, order: float, quadrature_nodes: int = 64) -> "Kernel":
        return cls(RIEMANN_LIOUVILLE, order=order, quadrature_nodes=quadrature_nodes)

    @classmethod
    def from_expression(cls, source, quadrature_nodes: int = 64) -> "Kernel":
        e = parse(source, {"t"}) if isinstance(source, str) else source
        return cls(EXPRESSION, expression=e, quadrature_nodes=quadrature_nodes)

    # --- pointwise values -------------------------------------------------

    def values(self, t: np.ndarray) -> np.ndarray:
        """b(t) at interior points t in (0, 1)."""
        t = np.asarray(t, dtype=float)
        if self.kind == CONSTANT_ONE:
            return np.ones_like(t)
        if self.kind == RIEMANN_LIOUVILLE:
            return t ** (self.order - 1.0) / math.gamma(self.order)
        return np.asarray(self.expression.eval({"t": t}), dtype=float)

    # --- integrals ---------------------------------------------------------

    def mass(self, tol: float = quad.DEFAULT_TOL) -> float:
        """(b * 1)(1), i.e. the integral of b over (0, 1]."""
        if self.kind == CONSTANT_ONE:
            return 1.0
        if self.kind == RIEMANN_LIOUVILLE:
            return 1.0 / math.gamma(self.order + 1.0)
        value, _ = quad.adaptive_gl(
            self.values,
            lambda n: quad.graded_mesh(0.0, 1.0, n, _EXPR_GRADE, "both"),
            n0=self.quadrature_nodes, atol=tol, rtol=tol,
        )
        return value

    def partial_conv_mass(self, a: float, b: float, tol: float = quad.DEFAULT_TOL) -> float:
        """Integral of b(1-t) over [a, b] (a sub-mass of the convolution weight)."""
        if not (0.0 <= a < b <= 1.0):
            raise ValidationError("need 0 <= a < b <= 1")
        if self.kind == CONSTANT_ONE:
            return b - a
        if self.kind == RIEMANN_LIOUVILLE:
            al = self.order
            return ((1.0 - a) ** al - (1.0 - b) ** al) / math.gamma(al + 1.0)
        lo, hi = 1.0 - b, 1.0 - a
        value, _ = quad.adaptive_gl(
            self.values,
            lambda n: quad.graded_mesh(lo, hi, n, _EXPR_GRADE, "both"),
            n0=self.quadrature_nodes, atol=tol, rtol=tol,
        )
        return value

    def reverse_holder_norm(self, q: float, tol: float = quad.DEFAULT_TOL) -> float:
        """Integral of b^(1/(1-q)) over (0, 1]; inf when divergence is detected."""
        if q <= 1.0:
            raise ValidationError("reverse-Hoelder exponent q must be > 1")
        if self.kind == CONSTANT_ONE:
            return 1.0
        if self.kind == RIEMANN_LIOUVILLE:
            # (t^(a-1)/Gamma(a))^(1/(1-q)) = Gamma(a)^(1/(q-1)) t^((1-a)/(q-1))
            e0 = (1.0 - self.order) / (q - 1.0)
            return math.gamma(self.order) ** (1.0 / (q - 1.0)) / (e0 + 1.0)
        expo = 1.0 / (1.0 - q)

        def integrand(t: np.ndarray) -> np.ndarray:
            bv = self.values(t)
            with np.errstate(divide="ignore", over="ignore"):
                return np.power(bv, expo)

        value, _ = quad.adaptive_gl(
            integrand,
            lambda n: quad.graded_mesh(0.0, 1.0, n, _EXPR_GRADE, "both"),
            n0=self.quadrature_nodes, atol=tol, rtol=tol,
            detect_divergence=True,
        )
        return value

    def nonlocal_value(self, u: GridFunction, p: Expression,
                       tol: float = quad.DEFAULT_TOL) -> float:
        """(b * u^p(.))(1) = integral of b(1-s) u(s)^p(s) over [0, 1].

        u is interpolated linearly between its nodes; power-law kernels
        integrate on a mesh graded toward the singular endpoint s = 1.
        """
        if np.any(u.values < 0.0):
            raise ValidationError("negative u sample in nonlocal functional")

        # Work in sigma = 1 - s, which puts the kernel singularity at the
        # left endpoint without reconstructing it by cancellation.  Panel
        # edges align with the kinks of the interpolant, and the graded
        # substitution sigma = tau^grade smooths the endpoint singularity.
        if self.kind == CONSTANT_ONE:
            grade = 1.0
        elif self.kind == RIEMANN_LIOUVILLE:
            grade = 2.0 / self.order
        else:
            grade = _EXPR_GRADE
        sigma_breaks = (1.0 - u.nodes)[::-1]
        tau_breaks = sigma_breaks ** (1.0 / grade) if grade != 1.0 else sigma_breaks
        jac = grade

        def integrand(tau: np.ndarray) -> np.ndarray:
            sigma = tau**grade if grade != 1.0 else tau
            s = 1.0 - sigma
            ps = np.asarray(p.eval({"t": s}), dtype=float)
            if np.any(ps <= 0.0):
                raise HypothesisError("exponent p must be positive on [0, 1]")
            us = u.interp(s)
            out = self.values(sigma) * np.power(us, ps)
            if grade != 1.0:
                out = out * (jac * tau ** (grade - 1.0))
            return out

        base = tau_breaks.size - 1
        mesh = lambda n: quad.subdivide(tau_breaks, max(1, round(n / base)))
        value, _ = quad.adaptive_gl(integrand, mesh, n0=base, atol=tol, rtol=tol)
        return value
