"""Natural cubic interpolating splines."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def solve_tridiagonal(sub, diag, sup, rhs) -> np.ndarray:
    """Thomas algorithm. ``sub[0]`` and ``sup[-1]`` are ignored."""
    n = len(diag)
    c = np.zeros(n)
    d = np.zeros(n)
    c[0] = sup[0] / diag[0] if n > 1 else 0.0
    d[0] = rhs[0] / diag[0]
    for i in range(1, n):
        denom = diag[i] - sub[i] * c[i - 1]
        if i < n - 1:
            c[i] = sup[i] / denom
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom
    out = np.zeros(n)
    out[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        out[i] = d[i] - c[i] * out[i + 1]
    return out


@dataclass(frozen=True, eq=False)
class Spline:
    """Natural cubic spline through ``(knots, values)``.

    On segment i the curve is ``a + b*t + c*t**2 + d*t**3`` with
    ``t = x - knots[i]``. Outside the knot range it continues along the
    tangent line at the nearest end knot.
    """

    knots: np.ndarray
    values: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    @classmethod
    def fit(cls, knots, values) -> "Spline":
        w = np.asarray(knots, dtype=np.float64)
        v = np.asarray(values, dtype=np.float64)
        if w.ndim != 1 or w.shape != v.shape or w.size < 2:
            raise ValueError("need matching 1-D knot and value arrays of length >= 2")
        h = np.diff(w)
        if np.any(h <= 0):
            raise ValueError("knots must be strictly increasing")
        k = w.size
        # second derivatives M, with M[0] = M[-1] = 0
        m2 = np.zeros(k)
        if k > 2:
            slope = np.diff(v) / h
            rhs = 6.0 * np.diff(slope)
            diag = 2.0 * (h[:-1] + h[1:])
            sub = np.concatenate([[0.0], h[1:-1]])
            sup = np.concatenate([h[1:-1], [0.0]])
            m2[1:-1] = solve_tridiagonal(sub, diag, sup, rhs)
        a = v[:-1].copy()
        b = np.diff(v) / h - h * (2.0 * m2[:-1] + m2[1:]) / 6.0
        c = m2[:-1] / 2.0
        d = np.diff(m2) / (6.0 * h)
        return cls(w, v, a, b, c, d)

    def _end_slopes(self) -> tuple[float, float]:
        h = self.knots[-1] - self.knots[-2]
        right = self.b[-1] + 2 * self.c[-1] * h + 3 * self.d[-1] * h * h
        return float(self.b[0]), float(right)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        w = self.knots
        seg = np.clip(np.searchsorted(w, x, side="right") - 1, 0, w.size - 2)
        t = x - w[seg]
        y = self.a[seg] + t * (self.b[seg] + t * (self.c[seg] + t * self.d[seg]))
        lo_slope, hi_slope = self._end_slopes()
        y = np.where(x < w[0], self.values[0] + lo_slope * (x - w[0]), y)
        y = np.where(x > w[-1], self.values[-1] + hi_slope * (x - w[-1]), y)
        return y

    def second_derivative(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        w = self.knots
        seg = np.clip(np.searchsorted(w, x, side="right") - 1, 0, w.size - 2)
        t = x - w[seg]
        inside = (x >= w[0]) & (x <= w[-1])
        return np.where(inside, 2 * self.c[seg] + 6 * self.d[seg] * t, 0.0)


def random_spline(seed: int | np.random.Generator, n_knots: int = 10, knot_range=(-3.0, 3.0)) -> Spline:
    """Spline through ``n_knots`` equally spaced knots with values drawn from U(0, 1)."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    w = np.linspace(knot_range[0], knot_range[1], n_knots)
    v = rng.uniform(0.0, 1.0, size=n_knots)
    return Spline.fit(w, v)
