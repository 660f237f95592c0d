"""Convex-analysis layer over a sampled pressure curve t -> P(t).

Conventions: chi(mu_s) = -P'(s), h(mu_s) = P(s) - s P'(s), and the level-1
Lyapunov rate for the ensemble of k_t is I(x) = P(t) + t x - h(mu_{s_x}),
where s_x solves chi(mu_{s_x}) = x. A rate of +inf is returned as ``math.inf``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DegenerateCurve, NegativeRate, OutOfDomain, OutOfRange

DEGENERATE_TOL = 1e-10
DEFAULT_GRID = (-3.0, 3.0, 0.05)
SENTINEL = float(np.finfo(float).max)
GOLDEN = (math.sqrt(5) - 1) / 2


def default_grid(lo=DEFAULT_GRID[0], hi=DEFAULT_GRID[1], step=DEFAULT_GRID[2]) -> np.ndarray:
    k = int(round((hi - lo) / step))
    return lo + step * np.arange(k + 1)


@dataclass(eq=False)
class PressureCurve:
    """P sampled on a uniform t-grid, with an optional exact evaluator between nodes."""

    t: np.ndarray
    values: np.ndarray
    evaluator: Callable[[float], float] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.t.size < 5 or self.t.shape != self.values.shape:
            raise ValueError("a pressure curve needs >= 5 samples on its grid")
        steps = np.diff(self.t)
        if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * max(1.0, abs(steps[0])):
            raise ValueError("t-grid must be sorted and uniform")

    @classmethod
    def from_function(cls, fn, grid, meta=None) -> "PressureCurve":
        grid = np.asarray(grid, dtype=float)
        return cls(grid, np.array([fn(t) for t in grid]), fn, dict(meta or {}))

    @property
    def step(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def interior(self) -> tuple[float, float]:
        """Parameters where dP (two-step stencil) is defined."""
        h = self.step
        return float(self.t[0] + 2 * h), float(self.t[-1] - 2 * h)

    def __call__(self, t: float) -> float:
        if self.evaluator is not None:
            return float(self.evaluator(t))
        k = (t - self.t[0]) / self.step
        i = int(round(k))
        if abs(k - i) > 1e-9 or not 0 <= i < self.t.size:
            raise OutOfDomain(f"t={t!r} is not a grid node of a sample-only curve")
        return float(self.values[i])

    @property
    def is_degenerate(self) -> bool:
        """Affine within rounding, as for maps conjugate to z^d."""
        return bool(np.max(np.abs(np.diff(self.values, 2))) <= DEGENERATE_TOL)

    def second_differences(self) -> np.ndarray:
        return np.diff(self.values, 2)

    def to_csv(self, derivative=True) -> str:
        buf = io.StringIO()
        for k, v in self.meta.items():
            buf.write(f"# {k}={v}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "P", "dP_est"])
        lo, hi = self.interior
        for t, p in zip(self.t, self.values):
            d = dP(self, t) if derivative and lo - 1e-12 <= t <= hi + 1e-12 else ""
            w.writerow([repr(float(t)), repr(float(p)), repr(d) if d != "" else ""])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "PressureCurve":
        meta, rows = {}, []
        for line in text.splitlines():
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                meta[k] = v
            elif line and not line.startswith("t,"):
                rows.append(line.split(","))
        t = [float(r[0]) for r in rows]
        P = [float(r[1]) for r in rows]
        return cls(np.array(t), np.array(P), None, meta)


def dP(curve: PressureCurve, t: float) -> float:
    """Central difference at step h (grid spacing) with one Richardson level."""
    h = curve.step
    lo, hi = curve.interior
    if not lo - 1e-12 <= t <= hi + 1e-12:
        raise OutOfDomain(f"t={t!r} is within 2h of the grid edge [{curve.t[0]}, {curve.t[-1]}]")
    d1 = (curve(t + h) - curve(t - h)) / (2 * h)
    d2 = (curve(t + 2 * h) - curve(t - 2 * h)) / (4 * h)
    return (4 * d1 - d2) / 3


def chi(curve: PressureCurve, s: float) -> float:
    """Lyapunov exponent of the equilibrium state mu_s."""
    return -dP(curve, s)


def entropy_of_s(curve: PressureCurve, s: float) -> float:
    """h(mu_s) = P(s) + s chi(mu_s)."""
    return curve(s) + s * chi(curve, s)


def lyapunov_range(curve: PressureCurve) -> tuple[float, float]:
    """(chi at the largest interior s, chi at the smallest): the resolvable x-range."""
    lo, hi = curve.interior
    return chi(curve, hi), chi(curve, lo)


def solve_s_x(curve: PressureCurve, x: float, tol: float = 1e-9) -> float:
    """The s with chi(mu_s) = x, by bisection on the nonincreasing map s -> -dP(s)."""
    if curve.is_degenerate:
        raise DegenerateCurve("affine pressure curve: s_x is undefined")
    s_lo, s_hi = curve.interior
    x_min, x_max = chi(curve, s_hi), chi(curve, s_lo)
    if not x_min <= x <= x_max:
        raise OutOfRange(x, x_min, x_max)
    a, b = s_lo, s_hi  # chi(a) >= x >= chi(b)
    for _ in range(200):
        mid = 0.5 * (a + b)
        r = chi(curve, mid) - x
        if abs(r) <= tol or b - a < 1e-15:
            return mid
        if r > 0:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def rate_level1(curve: PressureCurve, t: float, x: float) -> float:
    """Level-1 Lyapunov rate of the k_t ensembles; ``math.inf`` off the domain."""
    if curve.is_degenerate:
        slope = chi(curve, 0.5 * sum(curve.interior))
        return 0.0 if abs(x - slope) <= 1e-9 else math.inf
    try:
        s = solve_s_x(curve, x)
    except OutOfRange:
        return math.inf
    return curve(t) + t * x - entropy_of_s(curve, s)


def legendre_sup(curve: PressureCurve, t: float, x: float, tol: float = 1e-11) -> float:
    """sup_s { s x - (P(t - s) - P(t)) } over the grid-resolvable s.

    Golden-section search on the concave objective, then bisection on its
    derivative x + P'(t - s). A maximizer pinned to the bracket edge means
    the supremum is not attained inside the curve's domain: ``math.inf``.
    """
    lo, hi = curve.interior  # range of u = t - s
    Pt = curve(t)

    def phi(u):
        return (t - u) * x - curve(u) + Pt

    a, b = lo, hi
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = phi(c), phi(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = phi(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = phi(d)
    u = 0.5 * (a + b)
    edge = 1e-6 * (hi - lo)
    if u - lo < edge or hi - u < edge:
        # flat objective (affine curve at its slope) is the one bounded edge case
        if abs(phi(lo) - phi(hi)) <= 1e-12 and abs(phi(u)) <= 1e-12:
            return max(0.0, phi(u))
        return math.inf
    # refine: phi'(u) = -(x + P'(u)), increasing P' => single sign change
    a, b = max(lo, u - 64 * tol), min(hi, u + 64 * tol)
    ga, gb = x + dP(curve, a), x + dP(curve, b)
    if ga < 0 < gb:
        for _ in range(60):
            mid = 0.5 * (a + b)
            if x + dP(curve, mid) < 0:
                a = mid
            else:
                b = mid
        u = 0.5 * (a + b)
    return phi(u)


def rate_curve_rows(curve: PressureCurve, t: float, xs, dual_check: bool = False) -> list[dict]:
    rows = []
    for x in xs:
        I = rate_level1(curve, t, x)
        row = {"x": float(x), "I": I, "infinite": math.isinf(I)}
        if not curve.is_degenerate and not math.isinf(I):
            s = solve_s_x(curve, x)
            row.update(s_x=s, h=entropy_of_s(curve, s))
        else:
            row.update(s_x=None, h=None)
        if dual_check:
            L = legendre_sup(curve, t, x)
            row["legendre"] = L
            row["gap"] = abs(I - L) if not (math.isinf(I) or math.isinf(L)) else (0.0 if I == L else math.inf)
        rows.append(row)
    return rows


def interior_x_grid(curve: PressureCurve, count: int = 40) -> np.ndarray:
    """``count`` points strictly inside the resolvable Lyapunov range."""
    x_min, x_max = lyapunov_range(curve)
    return np.linspace(x_min, x_max, count + 2)[1:-1]


# -- level 2 -------------------------------------------------------------------

@dataclass(frozen=True)
class MuS:
    """Equilibrium state of k_s on a map."""

    s: float


@dataclass(frozen=True)
class Bernoulli:
    probs: tuple[float, ...]

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
            raise ValueError("Bernoulli probabilities must be a probability vector")


@dataclass(frozen=True, eq=False)
class Markov:
    matrix: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.matrix, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1] or np.any(P < 0):
            raise ValueError("transition matrix must be square and nonnegative")
        if np.max(np.abs(P.sum(axis=1) - 1)) > 1e-12:
            raise ValueError("transition rows must sum to 1 within 1e-12")
        object.__setattr__(self, "matrix", P)

    def stationary(self) -> np.ndarray:
        w, v = np.linalg.eig(self.matrix.T)
        k = int(np.argmin(np.abs(w - 1)))
        pi = np.real(v[:, k])
        return pi / pi.sum()


def _xlogx(p):
    p = np.asarray(p, dtype=float)
    return np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)


def measure_entropy(mu, curve: PressureCurve | None = None) -> float:
    """Closed-form entropy for the representable invariant measures."""
    if isinstance(mu, MuS):
        if curve is None:
            raise ValueError("MuS entropy needs a pressure curve")
        return entropy_of_s(curve, mu.s)
    if isinstance(mu, Bernoulli):
        return float(-_xlogx(mu.probs).sum())
    if isinstance(mu, Markov):
        pi = mu.stationary()
        return float(-(pi[:, None] * _xlogx(mu.matrix)).sum())
    raise TypeError(f"unsupported measure {mu!r}")


def rate_level2(pressure: float, mu, mean: float, entropy: float | None = None,
                curve: PressureCurve | None = None, tol: float = 1e-6) -> float:
    """P(f) - mu(f) - h(mu); ``NegativeRate`` below ``-tol`` flags inconsistent inputs."""
    h = measure_entropy(mu, curve) if entropy is None else entropy
    r = pressure - mean - h
    if r < -tol:
        raise NegativeRate(f"rate {r:.3g} < 0: pressure, mean and entropy are inconsistent")
    return r


def binary_entropy(p: float) -> float:
    return float(-_xlogx([p, 1 - p]).sum())


def indicator_rate_full_shift(x: float, m: int = 2) -> float:
    """Cramer rate of the frequency of one symbol under the uniform Bernoulli measure."""
    if not 0 <= x <= 1:
        return math.inf
    q = np.array([x] + [(1 - x) / (m - 1)] * (m - 1))
    return float(_xlogx(q).sum() + math.log(m))


def rate_curve_csv(curve: PressureCurve, t: float, xs, meta: dict | None = None) -> str:
    """Columns x, I, s_x, h, infinite; +inf rates are written as the sentinel."""
    buf = io.StringIO()
    for k, v in {**curve.meta, "t": t, **(meta or {})}.items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "I", "s_x", "h", "infinite"])
    for row in rate_curve_rows(curve, t, xs):
        inf = row["infinite"]
        w.writerow([repr(row["x"]), repr(SENTINEL if inf else row["I"]),
                    "" if row["s_x"] is None else repr(row["s_x"]),
                    "" if row["h"] is None else repr(row["h"]), int(inf)])
    return buf.getvalue()
