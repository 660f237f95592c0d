"""Finite orbit sets J_n: periodic points, n-fold preimages, and (eps, n)-separated sets."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numba import njit

from . import maps
from .errors import CapExceeded, RootFindingDiverged
from .maps import Family, MapSpec

CARD_CAP = 1 << 22
PERIODIC_RESIDUAL = 1e-9
DIVERGED_RESIDUAL = 1e-8
DUPLICATE_TOL = 1e-7
CRITICAL_TOL = 1e-6
ABERTH_SWEEPS = 500
START_RADIUS = 1.2
DEFAULT_EPS = 0.05
GRID_MAX = 1024


@dataclass(eq=False)
class OrbitSet:
    method: str  # "periodic" | "preimage" | "separated"
    horizon: int
    points: np.ndarray
    map: MapSpec
    params: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.points)

    @cached_property
    def orbits(self) -> np.ndarray:
        """(N, n) matrix of T^i y for i < n."""
        return maps.orbit(self.map, self.points, self.horizon)

    @cached_property
    def log_derivs(self) -> np.ndarray:
        """L_n(y) = log|(T^n)'(y)| for every point."""
        return maps.log_deriv_sums(self.map, self.orbits)

    def to_json(self) -> str:
        doc = {
            "method": self.method,
            "n": self.horizon,
            "count": len(self.points),
            "map": str(self.map),
            "params": self.params,
            "points": [[float(z.real), float(z.imag)] for z in self.points],
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "OrbitSet":
        doc = json.loads(text)
        pts = np.array([complex(a, b) for a, b in doc["points"]], dtype=complex)
        if len(pts) != doc["count"]:
            raise ValueError("count does not match number of points")
        return cls(doc["method"], int(doc["n"]), pts, MapSpec.parse(doc["map"]), doc.get("params", {}))


def _check_cap(m: MapSpec, n: int):
    if n < 1:
        raise ValueError("n must be >= 1")
    if m.degree ** n > CARD_CAP:
        raise CapExceeded(f"d^n = {m.degree}^{n} exceeds {CARD_CAP}")


# -- periodic points ---------------------------------------------------------

def _quad_orbit_data(z, c, n):
    """T^n(z), (T^n)'(z) and d/dc T^n(z) for z^2 + c."""
    w = z.copy()
    dz = np.ones_like(z)
    dc = np.zeros_like(z)
    for _ in range(n):
        dc = 2 * w * dc + 1
        dz = 2 * w * dz
        w = w * w + c
    return w, dz, dc


def _newton_ratio(z, c, n):
    """(T^n(z) - z) / ((T^n)'(z) - 1), overflow-safe for escaping z.

    Tracks r = (T^k)'/T^k instead of the derivative itself, so points far
    outside the Julia set give the limiting ratio 1/r instead of inf/inf.
    """
    w = z.copy()
    r = np.ones_like(z)
    big = np.zeros(z.shape, dtype=bool)
    with np.errstate(all="ignore"):
        r = np.where(z != 0, 1.0 / z, 0)
        zero_start = z == 0
        for _ in range(n):
            w2 = w * w
            r = np.where(big, 2 * r, 2 * r * w2 / (w2 + c))
            w = np.where(big, w, w2 + c)
            big |= np.abs(w) > 1e100
        u = np.where(big, 0, 1.0 / w)
        ratio = (1 - z * u) / (r - u)
    # zero start or an orbit hitting 0 exactly: fall back to the direct form
    bad = ~np.isfinite(ratio) | zero_start
    if bad.any():
        wb, db, _ = _quad_orbit_data(z[bad], c, n)
        with np.errstate(all="ignore"):
            ratio[bad] = (wb - z[bad]) / (db - 1)
    return ratio


def _aberth_sum(z: np.ndarray, block: int = 256) -> np.ndarray:
    """sum_{j != i} 1/(z_i - z_j) in row blocks."""
    n = z.size
    out = np.empty_like(z)
    for a in range(0, n, block):
        b = min(a + block, n)
        diff = z[a:b, None] - z[None, :]
        rows = np.arange(b - a)
        diff[rows, rows + a] = np.inf
        with np.errstate(divide="ignore", invalid="ignore"):
            out[a:b] = (1.0 / diff).sum(axis=1)
    return out


def _aberth(z, c, n, sweeps, tol=1e-12):
    """Jacobi-style Aberth-Ehrlich sweeps on T^n(z) - z from the given guesses."""
    for k in range(sweeps):
        ratio = _newton_ratio(z, c, n)
        step = ratio / (1 - ratio * _aberth_sum(z))
        step[~np.isfinite(step)] = 0
        z = z - step
        if np.max(np.abs(step)) <= tol * max(1.0, np.max(np.abs(z))):
            return z, k + 1, True
    return z, sweeps, False


def _circle_start(n_roots: int) -> np.ndarray:
    k = np.arange(n_roots)
    jitter = 0.05 * np.sin(12.9898 * (k + 1))
    return START_RADIUS * np.exp(2j * math.pi * (k + 0.5 + jitter) / n_roots)


def _continuation_start(c: complex, n: int, steps: int) -> np.ndarray:
    """Track all roots of T^n(z) = z along c' = c s, s from 0 to 1."""
    N = 2 ** n
    z = np.concatenate([np.exp(2j * math.pi * np.arange(N - 1) / (N - 1)), [0j]])
    for k in range(1, steps + 1):
        c0, c1 = c * (k - 1) / steps, c * k / steps
        _, dz, dc = _quad_orbit_data(z, c0, n)
        z = z - dc / (dz - 1) * (c1 - c0)
        for _ in range(3):
            w, dz, _ = _quad_orbit_data(z, c1, n)
            z = z - (w - z) / (dz - 1)
    return z


def _near_pairs(z: np.ndarray, tol: float) -> list[tuple[int, int]]:
    order = np.argsort(z.real, kind="stable")
    zs = z[order]
    pairs = []
    for i in range(len(zs)):
        j = i + 1
        while j < len(zs) and zs[j].real - zs[i].real <= tol:
            if abs(zs[j] - zs[i]) <= tol:
                pairs.append((int(order[i]), int(order[j])))
            j += 1
    return pairs


def _dedupe(z: np.ndarray, tol: float) -> np.ndarray:
    pairs = _near_pairs(z, tol)
    if not pairs:
        return z
    drop = {max(a, b) for a, b in pairs}
    keep = np.array([i for i in range(len(z)) if i not in drop])
    return z[keep]


def _quadratic_cycle_roots(c: complex, n: int) -> np.ndarray:
    N = 2 ** n
    # inside |c| < 1/4 the straight path from 0 stays in the main cardioid
    if abs(c) < 0.25:
        z0 = _continuation_start(c, n, steps=max(20, 4 * n))
        z, _, ok = _aberth(z0, c, n, sweeps=8)
        if ok and not _near_pairs(z, DUPLICATE_TOL):
            return z
    z, _, ok = _aberth(_circle_start(N), c, n, sweeps=ABERTH_SWEEPS)
    return z


def _polish(z, c, n, rounds=2):
    for _ in range(rounds):
        w, dz, _ = _quad_orbit_data(z, c, n)
        with np.errstate(all="ignore"):
            step = (w - z) / (dz - 1)
        step[~np.isfinite(step)] = 0
        z = z - step
    return z


def _repelling(m: MapSpec, z: np.ndarray, n: int) -> np.ndarray:
    orb = maps.orbit(m, z, n)
    near_crit = np.min(np.abs(orb), axis=1) < CRITICAL_TOL
    if near_crit.any():
        warnings.warn(
            f"{int(near_crit.sum())} cycle point(s) within {CRITICAL_TOL:g} of the critical point excluded",
            RuntimeWarning,
            stacklevel=3,
        )
    z, orb = z[~near_crit], orb[~near_crit]
    L = maps.log_deriv_sums(m, orb)
    return z[L > 0]


def periodic_points(m: MapSpec, n: int) -> OrbitSet:
    """Repelling solutions of T^n(z) = z."""
    _check_cap(m, n)
    if m.family is Family.POWER:
        N = m.degree ** n - 1
        pts = np.exp(2j * math.pi * np.arange(N) / N)
        return OrbitSet("periodic", n, pts, m)
    c = m.c
    z = _polish(_quadratic_cycle_roots(c, n), c, n)
    w, _, _ = _quad_orbit_data(z, c, n)
    resid = np.abs(w - z)
    if not np.all(np.isfinite(resid)) or resid.max() > DIVERGED_RESIDUAL:
        raise RootFindingDiverged(f"max residual {np.nanmax(resid):.3g} after root finding")
    z = _dedupe(z, DUPLICATE_TOL)
    return OrbitSet("periodic", n, _repelling(m, z, n), m)


# -- preimages -----------------------------------------------------------------

def preimage_set(m: MapSpec, base: complex, n: int) -> OrbitSet:
    """T^{-n}(base) with multiplicity, exactly d^n points."""
    _check_cap(m, n)
    base = complex(base)
    if m.family is Family.POWER and abs(abs(base) - 1) > 1e-3:
        raise ValueError(f"base {base!r} is not within 1e-3 of the unit circle")
    if m.family is Family.QUADRATIC and abs(maps.iterate(m, base, 64)) > 1e6:
        raise ValueError(f"base {base!r} escapes, so it is not on the Julia set")
    level = np.array([base])
    for _ in range(n):
        level = maps.preimage_array(m, level).ravel()
    return OrbitSet("preimage", n, level, m, {"base": [base.real, base.imag]})


# -- separated sets -------------------------------------------------------------

def bowen_distance(m: MapSpec, x: complex, y: complex, n: int) -> float:
    """max_{0 <= i < n} |T^i x - T^i y|."""
    best = 0.0
    for _ in range(n):
        best = max(best, abs(x - y))
        x, y = maps.apply(m, x), maps.apply(m, y)
    return best


@njit(cache=True)
def _greedy_pack(orb, eps, kx, ky, gx, gy):
    # admitted points are chained per eps-cell of their starting point
    N, n = orb.shape
    head = -np.ones(gx * gy, np.int64)
    nxt = -np.ones(N, np.int64)
    admitted = np.zeros(N, np.bool_)
    for i in range(N):
        ok = True
        for dx in range(-1, 2):
            cx = kx[i] + dx
            if cx < 0 or cx >= gx:
                continue
            for dy in range(-1, 2):
                cy = ky[i] + dy
                if cy < 0 or cy >= gy:
                    continue
                j = head[cx * gy + cy]
                while j >= 0:
                    close = True
                    for t in range(n):
                        if abs(orb[i, t] - orb[j, t]) >= eps:
                            close = False
                            break
                    if close:
                        ok = False
                        break
                    j = nxt[j]
                if not ok:
                    break
            if not ok:
                break
        if ok:
            admitted[i] = True
            cell = kx[i] * gy + ky[i]
            nxt[i] = head[cell]
            head[cell] = i
    return admitted


def separated_set(m: MapSpec, n: int, eps: float = DEFAULT_EPS, sample_size: int = 10_000,
                  seed: int = 0) -> OrbitSet:
    """Greedy (eps, n)-separated packing of ``sample_julia`` in sample order.

    Each candidate is admitted iff its Bowen distance to every admitted point
    is >= eps, so the output is maximal relative to the sample.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not eps > 0:
        raise ValueError("eps must be positive")
    if eps >= 0.3:
        warnings.warn(f"eps={eps} is above the 0.3 expansivity-safe range", RuntimeWarning, stacklevel=2)
    cand = np.array(maps.sample_julia(m, sample_size, seed))
    orb = maps.orbit(m, cand, n)
    # d_n >= |x - y|, so only admitted points in neighbouring cells (side >= eps) can conflict;
    # the side floor keeps the cell grid at most ~GRID_MAX^2 for tiny eps
    extent = max(float(np.ptp(cand.real)), float(np.ptp(cand.imag)), eps)
    side = max(eps, extent / GRID_MAX)
    kx = np.floor(cand.real / side).astype(np.int64)
    ky = np.floor(cand.imag / side).astype(np.int64)
    kx -= kx.min()
    ky -= ky.min()
    keep = _greedy_pack(orb, float(eps), kx, ky, int(kx.max()) + 1, int(ky.max()) + 1)
    params = {"eps": eps, "sample_size": sample_size, "seed": seed}
    return OrbitSet("separated", n, cand[keep], m, params)


def build_orbit_set(m: MapSpec, method: str, n: int, *, base: complex | None = None,
                    eps: float = DEFAULT_EPS, sample_size: int = 10_000, seed: int = 0) -> OrbitSet:
    if method == "periodic":
        return periodic_points(m, n)
    if method == "preimage":
        return preimage_set(m, maps.repelling_fixed_point(m) if base is None else base, n)
    if method == "separated":
        return separated_set(m, n, eps, sample_size, seed)
    raise ValueError(f"unknown orbit method {method!r}")
