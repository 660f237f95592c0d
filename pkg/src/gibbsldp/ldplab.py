"""Finite-size large-deviation estimators.

Tail and deviation sets use non-strict inequalities (|avg - center| >= eps,
L_n/n >= x, ...). A tolerance of 1e-12 absorbs rounding in the averages, so
that lattice-valued observables such as symbol frequencies land on the
intended side of the threshold.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._numerics import logsumexp
from .errors import EmptyEvent, OutOfRange
from .gibbs import (LYAPUNOV, ConfigSet, Kt, ReferenceMeasure, TestFamily, WeightedEnsemble,
                    _label, birkhoff_sums, ensemble_mean, gibbs_weights, horizon, weakstar_distances)
from .maps import Family, MapSpec
from .orbitsets import OrbitSet
from . import ratefn as R

EDGE_TOL = 1e-12
MC_CHUNK = 1 << 16
SIDE_TOL = 1e-6


@dataclass
class DeviationReport:
    """One finite-horizon estimate with its asymptotic prediction."""

    kind: str
    n: int
    threshold: dict
    estimate: float
    event_count: int
    total_count: int
    prediction: float | None = None
    note: str = ""

    @property
    def gap(self) -> float | None:
        if self.prediction is None or math.isinf(self.prediction):
            return None
        return abs(self.estimate - self.prediction)

    def row(self) -> dict:
        d = asdict(self)
        thr = d.pop("threshold")
        d.update({f"thr_{k}": v for k, v in thr.items()})
        d["gap"] = self.gap
        return d


def _event(kind, n, threshold, logw, mask, prediction=None, note=""):
    count = int(mask.sum())
    if count == 0:
        raise EmptyEvent(f"{kind}: no atoms satisfy {threshold}")
    est = logsumexp(logw[mask]) / n
    return DeviationReport(kind, n, dict(threshold), est, count, int(mask.size), prediction, note)


def _potential_t(pot) -> float | None:
    if pot is None:
        return 0.0
    return pot.t if isinstance(pot, Kt) else None


def deviation_prob(nu: WeightedEnsemble, k, center: float, eps: float,
                   curve: R.PressureCurve | None = None,
                   rate: Callable[[float], float] | None = None) -> DeviationReport:
    """(1/n) log nu{ |S_n k / n - center| >= eps }.

    The prediction -min(I(center + eps), I(center - eps)) comes from ``rate``
    if given, else from the level-1 Lyapunov rate on ``curve`` when k = k_{-1}
    and the ensemble potential is some k_t (or zero).
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    avg = nu.pairings(k)
    mask = np.abs(avg - center) >= eps - EDGE_TOL
    if rate is None and curve is not None and k is not None and _label(k) == LYAPUNOV.label:
        t = _potential_t(nu.potential)
        if t is not None:
            rate = lambda x: R.rate_level1(curve, t, x)  # noqa: E731
    pred = None
    if rate is not None:
        pred = -min(rate(center + eps), rate(center - eps))
    return _event("deviation", nu.horizon, {"center": center, "eps": eps}, nu.log_weights, mask, pred)


def complement_prob(nu: WeightedEnsemble, k, center: float, eps: float) -> DeviationReport:
    """The complementary event |avg - center| < eps."""
    avg = nu.pairings(k)
    mask = np.abs(avg - center) < eps - EDGE_TOL
    return _event("deviation-complement", nu.horizon, {"center": center, "eps": eps}, nu.log_weights, mask)


def binomial_deviation_log_prob(n: int, center: float, eps: float, p: float = 0.5) -> float:
    """Exact (1/n) log P(|j/n - center| >= eps), j ~ Binomial(n, p), in rational arithmetic."""
    from fractions import Fraction

    q = Fraction(p).limit_denominator(10 ** 12)
    total = Fraction(0)
    for j in range(n + 1):
        if abs(j - n * center) >= n * eps - n * EDGE_TOL:
            total += math.comb(n, j) * q ** j * (1 - q) ** (n - j)
    if total == 0:
        return -math.inf
    # big-int logs stay exact in range where a float of the ratio would underflow
    return (math.log(total.numerator) - math.log(total.denominator)) / n


def _side_mask(values: np.ndarray, x: float, side: str) -> np.ndarray:
    side = side.lower()
    if side == "above":
        return values >= x - EDGE_TOL
    if side == "below":
        return values <= x + EDGE_TOL
    raise ValueError(f"side must be 'above' or 'below', got {side!r}")


def _tail_prediction(curve, t, x, side):
    """h(mu_{s_x}) - t x where the side rule holds; P(t) when the tail holds the mean."""
    try:
        s = R.solve_s_x(curve, x)
    except OutOfRange:
        return None, "x outside resolvable Lyapunov range"
    # s = t belongs to both sides; bisection leaves s_x within ~1e-9 of t there
    valid = s <= t + SIDE_TOL if side.lower() == "above" else s >= t - SIDE_TOL
    if valid:
        return R.entropy_of_s(curve, s) - t * x, f"s_x={s:.6g}"
    return curve(t), f"s_x={s:.6g}; tail contains chi(mu_t), limit is P(t)"


def lyapunov_tail_weighted(orbit: OrbitSet, t: float, x: float, side: str = "above",
                           curve: R.PressureCurve | None = None) -> DeviationReport:
    """(1/n) log sum over the tail {L_n(y)/n >= x} (or <= x) of |(T^n)'(y)|^{-t}."""
    n = orbit.horizon
    L = orbit.log_derivs
    mask = _side_mask(L / n, x, side)
    pred, note = (None, "")
    if curve is not None and not curve.is_degenerate:
        pred, note = _tail_prediction(curve, t, x, side)
    elif curve is not None:
        pred = R.entropy_of_s(curve, 0.0) - t * x
    return _event("lyapunov-tail", n, {"t": t, "x": x, "side": side.lower()}, -t * L, mask, pred, note)


def entropy_by_counting(orbit: OrbitSet, x: float, side: str = "above",
                        curve: R.PressureCurve | None = None) -> DeviationReport:
    """(1/n) log Card of the Lyapunov tail; the t = 0 case of the weighted tail."""
    rep = lyapunov_tail_weighted(orbit, 0.0, x, side, curve)
    rep.kind = "entropy-count"
    return rep


def _pairing_matrix(source, fam: TestFamily) -> np.ndarray:
    n = horizon(source)
    return np.stack([birkhoff_sums(source, g) / n for g in fam.members], axis=1)


def entropy_by_ball_counting(source, reference: ReferenceMeasure, eps: float, fam: TestFamily,
                             f=None) -> DeviationReport:
    """(1/n) log sum_{rho(mu_y, ref) < eps} exp(S_n f(y)) - ref(f).

    With f = 0 this is (1/n) log of the number of atoms in the ball.
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if isinstance(source, WeightedEnsemble):
        source = source.source
    n = horizon(source)
    dist = weakstar_distances(_pairing_matrix(source, fam), reference.vector(fam), fam)
    mask = dist < eps
    S = birkhoff_sums(source, f)
    offset = 0.0 if f is None else reference.pair(f)
    rep = _event("ball-count", n, {"eps": eps, "reference": reference.name}, S, mask)
    rep.estimate -= offset
    rep.note = f"min distance {float(dist.min()):.4g}"
    return rep


# -- Monte Carlo under the maximal-entropy measure of z^d -------------------------

@dataclass
class MCEstimate:
    value: float
    stderr: float
    n: int
    samples: int
    infinite: bool = False


def _turn_chunks(N: int, seed: int):
    """Uniform turns in [0, 1), in fixed-size chunks with spawned substreams."""
    n_chunks = -(-N // MC_CHUNK)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    for i, ss in enumerate(children):
        size = min(MC_CHUNK, N - i * MC_CHUNK)
        yield np.random.default_rng(ss).random(size)


def _mc_sums(m: MapSpec, n: int, N: int, seed: int, g) -> np.ndarray:
    """S_n g along uniform circle samples; z^d acts on turns as u -> d u mod 1."""
    if m.family is not Family.POWER:
        raise ValueError("Monte Carlo reference needs a power map (uniform circle measure)")
    d = m.degree
    out = []
    for u in _turn_chunks(N, seed):
        S = np.zeros(u.size)
        for _ in range(n):
            z = np.exp(2j * math.pi * u)
            S += g.values(m, z) if not isinstance(g, Kt) else -g.t * np.full(u.size, math.log(d))
            u = (d * u) % 1.0
        out.append(S)
    return np.concatenate(out)


def mc_birkhoff_reference(m: MapSpec, n: int, N: int, seed: int, g=None) -> MCEstimate:
    """(1/n) log mean exp(S_n g) under the uniform circle measure, with a delta-method stderr."""
    if g is None:
        return MCEstimate(0.0, 0.0, n, N)
    S = _mc_sums(m, n, N, seed, g)
    shift = float(S.max())
    w = np.exp(S - shift)
    mean = float(w.mean())
    se = float(w.std(ddof=1)) / math.sqrt(N) / mean / n if N > 1 else math.inf
    return MCEstimate(shift / n + math.log(mean) / n, se, n, N)


def mc_event_log_prob(m: MapSpec, n: int, N: int, seed: int, k, center: float, eps: float) -> MCEstimate:
    """(1/n) log mu_0{ |S_n k / n - center| >= eps }; -inf (flagged) for a null event."""
    S = _mc_sums(m, n, N, seed, k) / n
    hits = int((np.abs(S - center) >= eps - EDGE_TOL).sum())
    if hits == 0:
        return MCEstimate(-math.inf, 0.0, n, N, infinite=True)
    p = hits / N
    return MCEstimate(math.log(p) / n, math.sqrt((1 - p) / (N * p)) / n, n, N)


# -- barycenters ----------------------------------------------------------------------

@dataclass
class BarycenterRow:
    n: int
    means: dict
    successive_diff: float | None = None
    gap: float | None = None


def barycenter_convergence(build: Callable[[int], object], f, horizons: Sequence[int],
                           battery: Sequence, target: dict | None = None,
                           workers: int = 1) -> list[BarycenterRow]:
    """Ensemble means of a test battery at each horizon.

    ``build(n)`` returns the orbit source at horizon n. ``target`` maps
    battery labels to limit values; the gap reported is the max over those.
    """
    if len(horizons) < 2:
        raise ValueError("need at least two horizons")
    rows: list[BarycenterRow] = []
    for n in horizons:
        nu = gibbs_weights(build(n), f, workers=workers)
        means = {g.label: ensemble_mean(nu, g) for g in battery}
        row = BarycenterRow(n, means)
        if rows:
            row.successive_diff = max(abs(means[k] - rows[-1].means[k]) for k in means)
        if target:
            row.gap = max(abs(means[k] - v) for k, v in target.items())
        rows.append(row)
    return rows


def shift_marginal_exact(values) -> np.ndarray:
    """Single-site Gibbs marginal e^{f(s)} / Z."""
    v = np.asarray(values, dtype=float)
    return np.exp(v - logsumexp(v))
