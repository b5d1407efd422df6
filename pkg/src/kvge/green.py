"""Green's functions for the boundary data and their cone constants.

Two closed-form kernels are built in (Dirichlet and right-focal) plus
tabulated kernels on a uniform grid with bilinear interpolation.  From G
we derive: the upper envelope over t, the Harnack constant eta0 on
[alpha, beta], the coercivity/averaging constant C0, and the maxima of
full and partial s-integrals used by the certificate conditions.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import HypothesisError, ValidationError

DIRICHLET = "dirichlet"
RIGHT_FOCAL = "right_focal"
TABULATED = "tabulated"

PAPER_SUP = "paper_sup"
COERCIVE_INF = "coercive_inf"

_DENSE_SAMPLES = 4096
_ENDPOINT_MARGIN = 1e-6
_MIN_TABLE = 33

_trapz = np.trapezoid if hasattr(np, "trapezoid") else np.trapz


def _golden_max(f, a: float, b: float, tol: float = 1e-12) -> tuple[float, float]:
    """Golden-section maximization of a unimodal f on [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
    x = 0.5 * (a + b)
    return x, f(x)


@dataclass(frozen=True)
class BoundaryModel:
    """Green's function G plus the constants eta0, C0 on a window [alpha, beta]."""

    kind: str
    alpha: float
    beta: float
    c0_mode: str = COERCIVE_INF
    table_t: Optional[np.ndarray] = None
    table_s: Optional[np.ndarray] = None
    table_g: Optional[np.ndarray] = None
    eta0: float = field(init=False, default=0.0)
    C0: float = field(init=False, default=0.0)

    def __post_init__(self):
        if not (0.0 <= self.alpha < self.beta <= 1.0):
            raise ValidationError("need 0 <= alpha < beta <= 1")
        if self.c0_mode not in (PAPER_SUP, COERCIVE_INF):
            raise ValidationError(f"unknown C0 mode {self.c0_mode!r}")
        if self.kind == TABULATED:
            self._check_table()
        elif self.kind not in (DIRICHLET, RIGHT_FOCAL):
            raise ValidationError(f"unknown boundary kind {self.kind!r}")
        object.__setattr__(self, "eta0", self._compute_eta0())
        object.__setattr__(self, "C0", self.compute_C0(self.c0_mode))
        if not (0.0 < self.eta0 <= 1.0 + 1e-12):
            raise HypothesisError(f"eta0 = {self.eta0:.6g} outside (0, 1]")
        if not (0.0 < self.C0 <= 1.0 + 1e-12):
            raise HypothesisError(f"C0 = {self.C0:.6g} outside (0, 1]")

    def _check_table(self):
        t, s, g = self.table_t, self.table_s, self.table_g
        if t is None or s is None or g is None:
            raise ValidationError("tabulated kernel needs t nodes, s nodes and values")
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        g = np.asarray(g, dtype=float)
        object.__setattr__(self, "table_t", t)
        object.__setattr__(self, "table_s", s)
        object.__setattr__(self, "table_g", g)
        if t.size < _MIN_TABLE or s.size < _MIN_TABLE:
            raise ValidationError(f"tabulated grid must be at least {_MIN_TABLE}x{_MIN_TABLE}")
        if g.shape != (t.size, s.size):
            raise ValidationError("table shape must be (len(t), len(s)), row-major in t")
        for name, x in (("t", t), ("s", s)):
            if not (np.isclose(x[0], 0.0) and np.isclose(x[-1], 1.0)):
                raise ValidationError(f"tabulated {name}-grid must span [0, 1]")
            d = np.diff(x)
            if not np.allclose(d, d[0], rtol=1e-9, atol=1e-12):
                raise ValidationError(f"tabulated {name}-grid must be uniform")
        if np.any(~np.isfinite(g)) or np.any(g < 0.0):
            raise ValidationError("tabulated G values must be finite and nonnegative")

    # --- constructors ------------------------------------------------------

    @classmethod
    def dirichlet(cls, alpha: float, beta: float, c0_mode: str = COERCIVE_INF):
        return cls(DIRICHLET, alpha, beta, c0_mode)

    @classmethod
    def right_focal(cls, alpha: float, beta: float, c0_mode: str = COERCIVE_INF):
        return cls(RIGHT_FOCAL, alpha, beta, c0_mode)

    @classmethod
    def tabulated(cls, t, s, g, alpha: float, beta: float, c0_mode: str = COERCIVE_INF):
        return cls(TABULATED, alpha, beta, c0_mode, table_t=np.asarray(t),
                   table_s=np.asarray(s), table_g=np.asarray(g))

    @classmethod
    def from_csv(cls, path, alpha: float, beta: float, c0_mode: str = COERCIVE_INF):
        r"""Load a tabulated G from CSV: header `t\s,<s values>`, rows `t,<G row>`."""
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or not rows[0] or rows[0][0] not in ("t\\s", "t\\\\s"):
            raise ValidationError(r"CSV header must start with 't\s'")
        s = np.array([float(x) for x in rows[0][1:]])
        t = np.array([float(r[0]) for r in rows[1:]])
        g = np.array([[float(x) for x in r[1:]] for r in rows[1:]])
        return cls.tabulated(t, s, g, alpha, beta, c0_mode)

    # --- pointwise evaluation ------------------------------------------------

    def green_eval(self, t, s):
        """G(t, s) for t, s in [0, 1] (scalars or broadcastable arrays)."""
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        if np.any((t < 0) | (t > 1)) or np.any((s < 0) | (s > 1)):
            raise ValidationError("green_eval arguments must lie in [0, 1]")
        if self.kind == DIRICHLET:
            out = np.where(t <= s, t * (1.0 - s), s * (1.0 - t))
        elif self.kind == RIGHT_FOCAL:
            out = np.minimum(t, s)
        else:
            out = self._bilinear(t, s)
        if out.ndim == 0:
            return float(out)
        return out

    def _bilinear(self, t, s):
        tt, ss = self.table_t, self.table_s
        g = self.table_g
        t = np.clip(t, 0.0, 1.0)
        s = np.clip(s, 0.0, 1.0)
        it = np.clip(np.searchsorted(tt, t, side="right") - 1, 0, tt.size - 2)
        js = np.clip(np.searchsorted(ss, s, side="right") - 1, 0, ss.size - 2)
        wt = (t - tt[it]) / (tt[it + 1] - tt[it])
        ws = (s - ss[js]) / (ss[js + 1] - ss[js])
        return ((1 - wt) * (1 - ws) * g[it, js] + wt * (1 - ws) * g[it + 1, js]
                + (1 - wt) * ws * g[it, js + 1] + wt * ws * g[it + 1, js + 1])

    # --- envelope and cone constants ----------------------------------------

    def script_g(self, s):
        """Upper envelope over t: max_t G(t, s)."""
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        if np.any((s_arr < 0) | (s_arr > 1)):
            raise ValidationError("script_g argument must lie in [0, 1]")
        if self.kind == DIRICHLET:
            out = s_arr * (1.0 - s_arr)
        elif self.kind == RIGHT_FOCAL:
            out = s_arr.copy()
        else:
            out = self._tab_t_max(s_arr)
        if np.ndim(s) == 0:
            return float(out[0])
        return out

    def _tab_t_max(self, s_arr: np.ndarray) -> np.ndarray:
        # bilinear G is piecewise linear in t, so the node max is exact for
        # the interpolant; a parabolic pass refines smooth underlying kernels
        tt = self.table_t
        cols = self._bilinear(tt[:, None], s_arr[None, :])  # (nt, ns)
        idx = np.argmax(cols, axis=0)
        best = cols[idx, np.arange(cols.shape[1])]
        ht = tt[1] - tt[0]
        for k, i in enumerate(idx):
            if 0 < i < tt.size - 1:
                y0, y1, y2 = cols[i - 1, k], cols[i, k], cols[i + 1, k]
                denom = y0 - 2.0 * y1 + y2
                if denom < 0.0:
                    tx = float(np.clip(tt[i] + 0.5 * (y0 - y2) / denom * ht, 0.0, 1.0))
                    best[k] = max(best[k], float(self._bilinear(np.asarray(tx),
                                                                np.asarray(s_arr[k]))))
        return best

    def _compute_eta0(self) -> float:
        if self.kind == DIRICHLET:
            eta = min(self.alpha, 1.0 - self.beta)
        elif self.kind == RIGHT_FOCAL:
            eta = self.alpha
        else:
            eta = self._eta0_from_grid()
        if eta <= 0.0:
            raise HypothesisError(
                f"Harnack constant is nonpositive on [{self.alpha}, {self.beta}]")
        return eta

    def _eta0_from_grid(self) -> float:
        s = np.linspace(_ENDPOINT_MARGIN, 1.0 - _ENDPOINT_MARGIN, _DENSE_SAMPLES)
        tt = self.table_t
        inner = tt[(tt > self.alpha) & (tt < self.beta)]
        t_cand = np.concatenate(([self.alpha], inner, [self.beta]))
        vals = self._bilinear(t_cand[:, None], s[None, :])
        mins = vals.min(axis=0)
        env = self.script_g(s)
        mask = env > 0.0
        if not np.any(mask):
            raise HypothesisError("upper envelope vanishes on the sample grid")
        return float(np.min(mins[mask] / env[mask]))

    def t_integral(self, s):
        """Integral of G(t, s) dt over [0, 1] for fixed s."""
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        if self.kind == DIRICHLET:
            out = s_arr * (1.0 - s_arr) / 2.0
        elif self.kind == RIGHT_FOCAL:
            out = s_arr - s_arr**2 / 2.0
        else:
            cols = self._bilinear(self.table_t[:, None], s_arr[None, :])
            out = _trapz(cols, self.table_t, axis=0)
        if np.ndim(s) == 0:
            return float(out[0])
        return out

    def compute_C0(self, mode: Optional[str] = None) -> float:
        """Ratio of the t-average of G to its t-max: sup or inf over s."""
        mode = mode or self.c0_mode
        if mode not in (PAPER_SUP, COERCIVE_INF):
            raise ValidationError(f"unknown C0 mode {mode!r}")
        if self.kind == DIRICHLET:
            return 0.5  # ratio s(1-s)/2 : s(1-s) is constant
        if self.kind == RIGHT_FOCAL:
            # ratio (s - s^2/2)/s = 1 - s/2 on (0, 1)
            return 1.0 if mode == PAPER_SUP else 0.5
        s = np.linspace(_ENDPOINT_MARGIN, 1.0 - _ENDPOINT_MARGIN, _DENSE_SAMPLES)
        env = self.script_g(s)
        mask = env > 0.0
        ratio = self.t_integral(s)[mask] / env[mask]
        val = float(ratio.max() if mode == PAPER_SUP else ratio.min())
        if val <= 0.0:
            raise HypothesisError("C0 is nonpositive")
        return val

    # --- s-integral maxima ----------------------------------------------------

    def s_partial_integral(self, tau: float, a: float, b: float) -> float:
        """Integral of G(tau, s) ds over [a, b]."""
        if self.kind == DIRICHLET:
            if b <= tau:
                return (1.0 - tau) * (b * b - a * a) / 2.0
            if a >= tau:
                return tau * ((1.0 - a) ** 2 - (1.0 - b) ** 2) / 2.0
            return ((1.0 - tau) * (tau * tau - a * a) / 2.0
                    + tau * ((1.0 - tau) ** 2 - (1.0 - b) ** 2) / 2.0)
        if self.kind == RIGHT_FOCAL:
            if b <= tau:
                return (b * b - a * a) / 2.0
            if a >= tau:
                return tau * (b - a)
            return (tau * tau - a * a) / 2.0 + tau * (b - tau)
        ss = self.table_s
        inner = ss[(ss > a) & (ss < b)]
        pts = np.concatenate(([a], inner, [b]))
        row = self._bilinear(np.full(pts.shape, tau), pts)
        return float(_trapz(row, pts))

    def _max_over_tau(self, a: float, b: float) -> float:
        taus = np.linspace(0.0, 1.0, _DENSE_SAMPLES + 1)
        vals = np.array([self.s_partial_integral(t, a, b) for t in taus])
        i = int(np.argmax(vals))
        lo = taus[max(0, i - 1)]
        hi = taus[min(taus.size - 1, i + 1)]
        _, fx = _golden_max(lambda t: self.s_partial_integral(t, a, b), lo, hi)
        return max(float(vals[i]), fx)

    def GM(self) -> float:
        """max over tau of the full s-integral of G(tau, .)."""
        return self._max_over_tau(0.0, 1.0)

    def partial_GM(self, a: Optional[float] = None, b: Optional[float] = None) -> float:
        """max over tau of the s-integral of G(tau, .) over [alpha, beta]."""
        a = self.alpha if a is None else a
        b = self.beta if b is None else b
        return self._max_over_tau(a, b)
