"""Pressure estimators over orbit sets and configuration ensembles, plus exact oracles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._numerics import logsumexp
from .errors import CapExceeded, NonConvergence
from .gibbs import ConfigSet, Kt, _label, birkhoff_sums, horizon
from .maps import MapSpec
from .orbitsets import OrbitSet, build_orbit_set
from .ratefn import PressureCurve, default_grid
from .shift import Box, Extension, Periodic, ShiftPotential, ShiftSpec

TRANSFER_CAP = 1 << 14
POWER_TOL = 1e-12
POWER_MAX_ITER = 100_000


@dataclass
class PressureEstimate:
    value: float
    horizon: int
    method: str
    potential: str = "0"
    successive_diff: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"non-finite pressure estimate {self.value!r}")

    def __float__(self) -> float:
        return self.value


def _estimate(source, pot, workers: int) -> PressureEstimate:
    if len(source) == 0:
        raise ValueError("empty orbit set")
    n = horizon(source)
    S = birkhoff_sums(source, pot)
    return PressureEstimate(logsumexp(S, workers=workers) / n, n, source.method, _label(pot))


def pressure_estimate(orbit: OrbitSet, pot=None, workers: int = 1) -> PressureEstimate:
    """(1/n) log sum_{y in J_n} exp(S_n pot(y))."""
    return _estimate(orbit, pot, workers)


def shift_pressure_estimate(spec: ShiftSpec, box: Box, pot: ShiftPotential | None = None,
                            extension: Extension = Periodic(), workers: int = 1) -> PressureEstimate:
    """(1/|box|) log sum over all configurations on the box of exp(sum_box pot)."""
    return _estimate(ConfigSet(spec, box, extension), pot, workers)


def pressure_sequence(estimates: list[PressureEstimate]) -> list[PressureEstimate]:
    """Fill ``successive_diff`` along a list ordered by horizon."""
    for prev, cur in zip(estimates, estimates[1:]):
        cur.successive_diff = abs(cur.value - prev.value)
    return estimates


def _transfer_structure(spec: ShiftSpec, pot: ShiftPotential):
    """Per-state successor indices and log-weights for the range-r transfer matrix.

    States are words of length r; the word a_0..a_{r-1} moves to a_1..a_r with
    weight exp(pot(a_0..a_r)).
    """
    if spec.dimension != 1 or pot.dimension != 1:
        raise ValueError("transfer matrices are for one-dimensional shifts")
    m = spec.alphabet_size
    if pot.alphabet_size != m:
        raise ValueError("potential alphabet differs from the shift alphabet")
    offs = np.array([w[0] for w in pot.window])
    offs -= offs.min()
    r = int(offs.max())
    if m ** r > TRANSFER_CAP:
        raise CapExceeded(f"transfer matrix {m}^{r} exceeds {TRANSFER_CAP} states")
    words = np.arange(m ** (r + 1))
    digits = np.stack([(words // m ** (r - i)) % m for i in range(r + 1)], axis=1)
    code = np.zeros(words.size, dtype=np.int64)
    for o in offs:
        code = code * m + digits[:, o]
    logw = pot.table[code].reshape(m ** r, m)
    nxt = ((np.arange(m ** r)[:, None] * m + np.arange(m)[None, :]) % (m ** r)).astype(np.int64)
    return nxt, logw


def transfer_matrix_pressure(spec: ShiftSpec, pot: ShiftPotential | None = None,
                             tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER) -> float:
    """log of the Perron eigenvalue of the transfer matrix, by power iteration."""
    if pot is None:
        pot = ShiftPotential.constant(0.0, spec.alphabet_size)
    nxt, logw = _transfer_structure(spec, pot)
    shift = float(logw.max())
    W = np.exp(logw - shift)
    v = np.ones(nxt.shape[0])
    lam = None
    for _ in range(max_iter):
        u = (W * v[nxt]).sum(axis=1)
        norm = float(np.linalg.norm(u))
        new = norm / float(np.linalg.norm(v))
        v = u / norm
        if lam is not None and abs(new - lam) <= tol * new:
            return math.log(new) + shift
        lam = new
    raise NonConvergence(f"power iteration did not settle in {max_iter} steps")


def transfer_matrix(spec: ShiftSpec, pot: ShiftPotential) -> np.ndarray:
    """Dense transfer matrix; for tests and small ranges."""
    nxt, logw = _transfer_structure(spec, pot)
    A = np.zeros((nxt.shape[0],) * 2)
    for s in range(nxt.shape[0]):
        for a in range(nxt.shape[1]):
            A[s, nxt[s, a]] += math.exp(logw[s, a])
    return A


def factorization_pressure(pot: ShiftPotential) -> float:
    """log sum_s exp(f(s)) for a single-site potential."""
    if len(pot.window) != 1:
        raise ValueError("factorization needs a single-site potential")
    return logsumexp(pot.table)


def curve_from_orbit(orbit: OrbitSet, t_grid=None) -> PressureCurve:
    """P(t) for k_t, reusing the orbit set's cached log-derivative sums across t."""
    grid = default_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    if grid.size < 5 or np.any(np.diff(grid) <= 0):
        raise ValueError("t-grid must be sorted with at least 5 points")
    L = orbit.log_derivs
    n = orbit.horizon

    def P(t: float) -> float:
        return logsumexp(-t * L) / n

    meta = {"map": str(orbit.map), "method": orbit.method, "n": n,
            "seed": orbit.params.get("seed", "")}
    return PressureCurve.from_function(P, grid, meta)


def pressure_curve(m: MapSpec, method: str = "periodic", n: int = 12, t_grid=None,
                   **orbit_kwargs) -> PressureCurve:
    return curve_from_orbit(build_orbit_set(m, method, n, **orbit_kwargs), t_grid)


def kt_estimate(orbit: OrbitSet, t: float) -> PressureEstimate:
    return pressure_estimate(orbit, Kt(t))
