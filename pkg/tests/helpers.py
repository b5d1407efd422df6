"""Shared test utilities: AST generators, cone samples, shooting oracle."""

from __future__ import annotations

import numpy as np

from kvge.expr import BinOp, Call, Const, Neg, Num, Var
from kvge.grid import GridFunction

_BINOPS = ["+", "-", "*", "/", "^"]
_CALLS1 = ["sin", "cos", "tan", "exp", "ln", "sqrt", "abs"]
_CALLS2 = ["min", "max", "pow"]


def random_ast(rng: np.random.Generator, depth: int, variables=("t",)):
    """A random well-formed AST; literals are nonnegative like the lexer's."""
    if depth <= 0 or rng.random() < 0.3:
        r = rng.random()
        if r < 0.5:
            value = float(rng.integers(0, 10)) if rng.random() < 0.5 \
                else round(float(rng.uniform(0, 10)), 4)
            return Num(value)
        if r < 0.8 and variables:
            return Var(str(rng.choice(list(variables))))
        return Const(str(rng.choice(["pi", "e"])))
    r = rng.random()
    if r < 0.55:
        op = str(rng.choice(_BINOPS))
        return BinOp(op, random_ast(rng, depth - 1, variables),
                     random_ast(rng, depth - 1, variables))
    if r < 0.7:
        return Neg(random_ast(rng, depth - 1, variables))
    if r < 0.9:
        fn = str(rng.choice(_CALLS1))
        return Call(fn, (random_ast(rng, depth - 1, variables),))
    fn = str(rng.choice(_CALLS2))
    return Call(fn, (random_ast(rng, depth - 1, variables),
                     random_ast(rng, depth - 1, variables)))


def make_cone_function(rng: np.random.Generator, boundary, n: int = 65,
                       n_sources: int = 6) -> GridFunction:
    """Random member of the cone: a nonnegative blend of Green columns.

    Every column t -> G(t, s) satisfies the Harnack and averaging
    inequalities, and both survive nonnegative superposition, so the
    result is cone-shaped by construction (verified by the caller).
    """
    t = np.linspace(0.0, 1.0, n)
    s_src = rng.uniform(0.05, 0.95, size=n_sources)
    weights = rng.uniform(0.1, 2.0, size=n_sources)
    vals = np.zeros(n)
    for s, w in zip(s_src, weights):
        vals += w * np.asarray(boundary.green_eval(t, np.full(n, s)), dtype=float)
    return GridFunction(t, vals)


def cone_membership(u: GridFunction, boundary, tol: float = 1e-12) -> bool:
    sup = u.sup_norm()
    return (u.min_on(boundary.alpha, boundary.beta) >= boundary.eta0 * sup - tol
            and u.integral() >= boundary.C0 * sup - tol)


def rescale_to_level(kernel, u: GridFunction, p_expr, rho: float,
                     rel_tol: float = 1e-12) -> tuple[GridFunction, float]:
    """Bisection on the scale factor until (b * (cu)^p(.))(1) = rho.

    Returns the rescaled function and the achieved level (evaluated, not
    the target, so bound checks carry no bisection slop).
    """
    value = lambda c: kernel.nonlocal_value(u.scaled(c), p_expr)
    c_lo, c_hi = 1.0, 1.0
    while value(c_hi) < rho:
        c_hi *= 2.0
        if c_hi > 1e12:
            raise RuntimeError("rescale bracket blew up")
    while value(c_lo) > rho:
        c_lo /= 2.0
        if c_lo < 1e-12:
            raise RuntimeError("rescale bracket vanished")
    for _ in range(80):
        mid = 0.5 * (c_lo + c_hi)
        if value(mid) < rho:
            c_lo = mid
        else:
            c_hi = mid
        if c_hi - c_lo <= rel_tol * c_hi:
            break
    c = 0.5 * (c_lo + c_hi)
    scaled = u.scaled(c)
    return scaled, kernel.nonlocal_value(scaled, p_expr)


def shooting_solution(f, lam: float, n_nodes: int, substeps: int = 16) -> np.ndarray:
    """Dirichlet two-point solve of -u'' = lam f(t, u) by RK4 shooting.

    f is a plain Python callable; the secant iteration drives u(1) to 0.
    Returns u at the n_nodes uniform grid points.
    """

    def integrate(slope: float) -> np.ndarray:
        h = 1.0 / ((n_nodes - 1) * substeps)
        u, v = 0.0, slope
        t = 0.0
        out = np.empty(n_nodes)
        out[0] = 0.0
        k = 0
        for i in range(1, n_nodes):
            for _ in range(substeps):
                def rhs(tt, uu, vv):
                    return vv, -lam * f(tt, uu)
                k1u, k1v = rhs(t, u, v)
                k2u, k2v = rhs(t + h / 2, u + h / 2 * k1u, v + h / 2 * k1v)
                k3u, k3v = rhs(t + h / 2, u + h / 2 * k2u, v + h / 2 * k2v)
                k4u, k4v = rhs(t + h, u + h * k3u, v + h * k3v)
                u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u)
                v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
                t += h
                k += 1
            out[i] = u
        return out

    s0, s1 = 0.0, 1.0
    e0 = integrate(s0)[-1]
    e1 = integrate(s1)[-1]
    for _ in range(60):
        if abs(e1 - e0) < 1e-300:
            break
        s2 = s1 - e1 * (s1 - s0) / (e1 - e0)
        s0, e0 = s1, e1
        s1 = s2
        e1 = integrate(s1)[-1]
        if abs(e1) < 1e-14:
            break
    return integrate(s1)
