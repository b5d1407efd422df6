"""Piecewise-linear grid functions on a uniform mesh of [0, 1]."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ValidationError


def trapezoid_weights(n: int) -> np.ndarray:
    """Trapezoid weights for n uniform nodes on [0, 1]."""
    h = 1.0 / (n - 1)
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


@dataclass(frozen=True)
class GridFunction:
    """Nonnegative values on a uniform node grid, linear in between."""

    nodes: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        if nodes.ndim != 1 or nodes.size < 2 or nodes.shape != values.shape:
            raise ValidationError("grid function needs matching 1-d nodes/values, size >= 2")
        if not (np.isclose(nodes[0], 0.0) and np.isclose(nodes[-1], 1.0)):
            raise ValidationError("grid must span [0, 1]")
        h = np.diff(nodes)
        if not np.allclose(h, h[0], rtol=1e-9, atol=1e-12):
            raise ValidationError("grid must be uniform")
        if not np.all(np.isfinite(values)):
            raise ValidationError("grid values must be finite")
        if np.any(values < 0.0):
            raise ValidationError("grid values must be nonnegative")

    @classmethod
    def constant(cls, n: int, value: float) -> "GridFunction":
        return cls(np.linspace(0.0, 1.0, n), np.full(n, float(value)))

    @classmethod
    def from_callable(cls, n: int, fn: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        t = np.linspace(0.0, 1.0, n)
        return cls(t, np.asarray(fn(t), dtype=float))

    @property
    def size(self) -> int:
        return self.nodes.size

    def interp(self, s) -> np.ndarray:
        return np.interp(s, self.nodes, self.values)

    def sup_norm(self) -> float:
        return float(self.values.max())

    def integral(self) -> float:
        """Exact integral of the piecewise-linear interpolant."""
        return float(trapezoid_weights(self.size) @ self.values)

    def min_on(self, a: float, b: float) -> float:
        """Exact minimum of the interpolant over [a, b] in [0, 1]."""
        inside = self.values[(self.nodes > a) & (self.nodes < b)]
        cands = [float(self.interp(a)), float(self.interp(b))]
        if inside.size:
            cands.append(float(inside.min()))
        return min(cands)

    def scaled(self, c: float) -> "GridFunction":
        return GridFunction(self.nodes, c * self.values)
