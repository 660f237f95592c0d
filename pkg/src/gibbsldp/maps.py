"""Rational-map dynamics for the power maps z^d and the quadratic family z^2 + c.

Everything here works on Python complex scalars and on numpy complex arrays.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from ._numerics import SplitMix64
from .errors import DerivativeVanishes

BURN_IN = 50
DERIV_FLOOR = 1e-30


class Family(enum.Enum):
    POWER = "powermap"
    QUADRATIC = "quadratic"


@dataclass(frozen=True)
class MapSpec:
    family: Family
    degree: int
    c: complex = 0j

    def __post_init__(self):
        if self.degree < 2:
            raise ValueError(f"degree must be >= 2, got {self.degree}")
        if self.family is Family.QUADRATIC and self.degree != 2:
            raise ValueError("quadratic family has degree 2")
        if self.family is Family.POWER and self.c != 0:
            raise ValueError("power maps carry no parameter")

    @classmethod
    def power(cls, d: int) -> "MapSpec":
        return cls(Family.POWER, int(d))

    @classmethod
    def quadratic(cls, c: complex) -> "MapSpec":
        return cls(Family.QUADRATIC, 2, complex(c))

    @classmethod
    def parse(cls, text: str) -> "MapSpec":
        """Parse ``powermap:d`` or ``quadratic:c`` (c may be complex, e.g. ``0.1+0.05j``)."""
        name, sep, arg = text.partition(":")
        if not sep or not arg:
            raise ValueError(f"bad map string {text!r}")
        name = name.strip().lower()
        if name in ("powermap", "power"):
            return cls.power(int(arg))
        if name in ("quadratic", "quad"):
            return cls.quadratic(complex(arg.replace(" ", "")))
        raise ValueError(f"unknown map family {name!r}")

    @property
    def certified(self) -> bool:
        """True where the Julia set is known to be a quasicircle (|c| < 1/4)."""
        return self.family is Family.POWER or abs(self.c) < 0.25

    def __str__(self) -> str:
        if self.family is Family.POWER:
            return f"powermap:{self.degree}"
        c = self.c
        return f"quadratic:{c.real!r}" if c.imag == 0 else f"quadratic:{c!r}"


def _ipow(z, k: int):
    # binary exponentiation so scalars and arrays round identically
    result = None
    base = z
    while k:
        if k & 1:
            result = base if result is None else result * base
        k >>= 1
        if k:
            base = base * base
    return result


def apply(m: MapSpec, z):
    if m.family is Family.POWER:
        return _ipow(z, m.degree)
    return z * z + m.c


def derivative(m: MapSpec, z):
    if m.family is Family.POWER:
        return m.degree * _ipow(z, m.degree - 1)
    return 2 * z


def iterate(m: MapSpec, z, n: int):
    for _ in range(n):
        z = apply(m, z)
    return z


def orbit(m: MapSpec, points, n: int) -> np.ndarray:
    """Array of shape (len(points), n) holding T^0 y, ..., T^{n-1} y."""
    z = np.asarray(points, dtype=complex).ravel()
    out = np.empty((z.size, n), dtype=complex)
    for i in range(n):
        out[:, i] = z
        if i + 1 < n:
            z = apply(m, z)
    return out


def log_abs_derivative(m: MapSpec, z):
    """log|T'(z)| evaluated pointwise."""
    if m.family is Family.POWER:
        return math.log(m.degree) + (m.degree - 1) * np.log(np.abs(z))
    return math.log(2.0) + np.log(np.abs(z))


def log_deriv_birkhoff(m: MapSpec, z: complex, n: int) -> float:
    """log|(T^n)'(z)| accumulated term by term along the orbit."""
    if n < 1:
        raise ValueError("n must be >= 1")
    total = 0.0
    for _ in range(n):
        dz = abs(derivative(m, z))
        if dz < DERIV_FLOOR:
            raise DerivativeVanishes(f"|T'| = {dz:g} at {z!r}")
        total += math.log(dz)
        z = apply(m, z)
    return total


def log_deriv_sums(m: MapSpec, orbit_matrix: np.ndarray) -> np.ndarray:
    """Row sums of log|T'| over an orbit matrix from :func:`orbit`."""
    dz = np.abs(derivative(m, orbit_matrix))
    if orbit_matrix.size and dz.min() < DERIV_FLOOR:
        raise DerivativeVanishes(f"|T'| = {dz.min():g} on an orbit")
    return np.log(dz).sum(axis=1)


def _newton_refine(m: MapSpec, w, z):
    d = derivative(m, w)
    if d == 0:
        return w
    return w - (apply(m, w) - z) / d


def preimages(m: MapSpec, z: complex) -> list[complex]:
    """All d solutions of T(w) = z with multiplicity, principal branch first."""
    z = complex(z)
    if m.family is Family.POWER:
        d = m.degree
        if z == 0:
            return [0j] * d
        r = abs(z) ** (1.0 / d)
        theta = cmath.phase(z)
        roots = [cmath.rect(r, (theta + 2 * math.pi * k) / d) for k in range(d)]
    else:
        s = cmath.sqrt(z - m.c)
        roots = [s, -s]
    return [_newton_refine(m, w, z) for w in roots]


def preimage_array(m: MapSpec, z: np.ndarray) -> np.ndarray:
    """Vectorized :func:`preimages`: shape (len(z), d), same branch order."""
    z = np.asarray(z, dtype=complex).ravel()
    if m.family is Family.POWER:
        d = m.degree
        r = np.abs(z) ** (1.0 / d)
        theta = np.angle(z)
        k = np.arange(d)
        w = r[:, None] * np.exp(1j * (theta[:, None] + 2 * math.pi * k[None, :]) / d)
    else:
        s = np.sqrt(z - m.c)
        w = np.stack([s, -s], axis=1)
    zz = np.broadcast_to(z[:, None], w.shape)
    dw = derivative(m, w)
    safe = dw != 0
    step = np.zeros_like(w)
    step[safe] = (apply(m, w[safe]) - zz[safe]) / dw[safe]
    return w - step


def repelling_fixed_point(m: MapSpec) -> complex:
    if m.family is Family.POWER:
        return 1 + 0j
    disc = cmath.sqrt(1 - 4 * m.c)
    p1, p2 = (1 + disc) / 2, (1 - disc) / 2
    return p1 if abs(p1) >= abs(p2) else p2


def sample_julia(m: MapSpec, count: int, seed: int) -> list[complex]:
    """Approximate Julia-set points by random inverse iteration.

    Starts at a repelling fixed point, applies a uniformly chosen preimage
    branch per step and drops the first ``BURN_IN`` steps.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = SplitMix64(seed)
    z = repelling_fixed_point(m)
    out = []
    for step in range(BURN_IN + count):
        z = preimages(m, z)[rng.below(m.degree)]
        if step >= BURN_IN:
            out.append(z)
    return out


def hyperbolicity_probe(m: MapSpec, n: int, samples: int, seed: int) -> float:
    """min over sampled Julia points of (1/n) log|(T^n)'|; > 0 suggests expansion."""
    if n < 1:
        raise ValueError("n must be >= 1")
    pts = sample_julia(m, samples, seed)
    return float(np.min(log_deriv_sums(m, orbit(m, pts, n)))) / n
