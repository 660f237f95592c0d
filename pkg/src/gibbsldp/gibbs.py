"""Empirical measures, Birkhoff sums, Gibbs weights and the ensembles built from them.

Empirical measures are never stored as atom lists. An ensemble keeps its
orbit source and computes pairings mu_i(g) = S_n(g)(y_i)/n on demand.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import maps
from ._numerics import logsumexp
from .maps import MapSpec
from .orbitsets import OrbitSet
from .shift import Box, Extension, Periodic, ShiftPotential, ShiftSpec, birkhoff_sums_batch, config_batches


# -- potentials on the Julia set -----------------------------------------------

class MapPotential:
    label: str

    def values(self, m: MapSpec, z):
        raise NotImplementedError

    def __add__(self, other: "MapPotential") -> "Sum":
        return Sum((self, other))


@dataclass(frozen=True)
class Kt(MapPotential):
    """k_t = -t log|T'|; Kt(-1) is the Lyapunov observable log|T'|."""

    t: float

    @property
    def label(self) -> str:
        return f"k_{self.t!r}"

    def values(self, m, z):
        return -self.t * maps.log_abs_derivative(m, z)


LYAPUNOV = Kt(-1.0)


@dataclass(frozen=True)
class Poly(MapPotential):
    """Real polynomial sum a * (Re z)^i (Im z)^j of total degree <= 4."""

    terms: tuple[tuple[int, int, float], ...]
    name: str = ""

    def __post_init__(self):
        if any(i < 0 or j < 0 or i + j > 4 for i, j, _ in self.terms):
            raise ValueError("polynomial potentials have degree <= 4")

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        return "poly:" + "+".join(f"{a!r}*x^{i}y^{j}" for i, j, a in self.terms)

    @classmethod
    def constant(cls, a: float) -> "Poly":
        return cls(((0, 0, float(a)),), f"const:{a!r}")

    @classmethod
    def re_power(cls, j: int, coef: float = 1.0) -> "Poly":
        terms = tuple((j - k, k, coef * math.comb(j, k) * (-1) ** (k // 2)) for k in range(0, j + 1, 2))
        return cls(terms, f"Re z^{j}" if coef == 1 else f"{coef!r}*Re z^{j}")

    @classmethod
    def im_power(cls, j: int, coef: float = 1.0) -> "Poly":
        terms = tuple((j - k, k, coef * math.comb(j, k) * (-1) ** (k // 2)) for k in range(1, j + 1, 2))
        return cls(terms, f"Im z^{j}" if coef == 1 else f"{coef!r}*Im z^{j}")

    @classmethod
    def parse(cls, text: str) -> "Poly":
        """``re:j:coef`` / ``im:j:coef`` / ``const:a``."""
        head, _, rest = text.partition(":")
        if head == "const":
            return cls.constant(float(rest))
        j, _, coef = rest.partition(":")
        coef = float(coef) if coef else 1.0
        if head == "re":
            return cls.re_power(int(j), coef)
        if head == "im":
            return cls.im_power(int(j), coef)
        raise ValueError(f"bad polynomial potential {text!r}")

    def values(self, m, z):
        z = np.asarray(z)
        x, y = z.real, z.imag
        out = np.zeros(z.shape)
        for i, j, a in self.terms:
            out = out + a * x ** i * y ** j
        return out


@dataclass(frozen=True)
class Sum(MapPotential):
    parts: tuple

    @property
    def label(self) -> str:
        return "+".join(p.label for p in self.parts)

    def values(self, m, z):
        return sum(p.values(m, z) for p in self.parts)


def _disk_sup(pot: MapPotential, m: MapSpec) -> float:
    r = np.linspace(0, 1, 11)[:, None]
    th = np.linspace(0, 2 * math.pi, 181)[None, :]
    z = (r * np.exp(1j * th)).ravel()
    return float(np.max(np.abs(pot.values(m, z))))


@dataclass(frozen=True)
class TestFamily:
    """Ordered test functions g_1..g_J defining the weak* distance."""

    __test__ = False  # not a pytest class

    members: tuple
    scales: tuple[float, ...]

    def __post_init__(self):
        if not 1 <= len(self.members) <= 16:
            raise ValueError("a test family has 1..16 members")
        if len(self.scales) != len(self.members):
            raise ValueError("one scale per member")

    @property
    def labels(self) -> list[str]:
        return [g.label for g in self.members]

    @property
    def weights(self) -> np.ndarray:
        return 0.5 ** np.arange(1, len(self.members) + 1)

    @classmethod
    def of(cls, members, m: MapSpec | None = None) -> "TestFamily":
        scales = []
        for g in members:
            if isinstance(g, ShiftPotential):
                scales.append(g.sup)
            else:
                scales.append(_disk_sup(g, m or MapSpec.power(2)))
        return cls(tuple(members), tuple(scales))

    def metadata(self) -> dict:
        return {"members": self.labels, "scales": list(self.scales)}


def default_family() -> TestFamily:
    """Re z^j, Im z^j for j = 1..4 followed by the constant 1; every scale is 1."""
    members = []
    for j in range(1, 5):
        members += [Poly.re_power(j), Poly.im_power(j)]
    members.append(Poly.constant(1.0))
    return TestFamily(tuple(members), (1.0,) * len(members))


def single_site_family(alphabet_size: int = 2, dimension: int = 1) -> TestFamily:
    """Indicators 1[xi_0 = s] for s = 1..m-1."""
    members = tuple(ShiftPotential.indicator(s, alphabet_size, dimension) for s in range(1, alphabet_size))
    return TestFamily(members, tuple(1.0 for _ in members))


# -- orbit sources ----------------------------------------------------------------

@dataclass(frozen=True)
class ConfigSet:
    """All configurations on a box: Per_Lambda (Periodic) or cylinder representatives (Padded)."""

    spec: ShiftSpec
    box: Box
    extension: Extension = field(default_factory=Periodic)

    @property
    def volume(self) -> int:
        return self.box.volume

    def __len__(self) -> int:
        return self.spec.alphabet_size ** self.box.volume

    @property
    def method(self) -> str:
        return "periodic-configs" if isinstance(self.extension, Periodic) else "padded-configs"


Source = Union[OrbitSet, ConfigSet]


def horizon(source: Source) -> int:
    return source.horizon if isinstance(source, OrbitSet) else source.volume


def birkhoff_sum(m: MapSpec, pot: MapPotential, y: complex, n: int) -> float:
    """S_n(pot)(y) = sum_{i<n} pot(T^i y)."""
    if isinstance(pot, Kt):
        return -pot.t * maps.log_deriv_birkhoff(m, y, n)
    return float(np.sum(pot.values(m, maps.orbit(m, [y], n)[0])))


def birkhoff_sums(source: Source, pot) -> np.ndarray:
    """S_n(pot) at every atom of the source; ``pot=None`` is the zero potential."""
    if pot is None:
        return np.zeros(len(source))
    if isinstance(source, OrbitSet):
        if isinstance(pot, Kt):
            return -pot.t * source.log_derivs
        if isinstance(pot, Sum):
            return sum(birkhoff_sums(source, p) for p in pot.parts)
        return pot.values(source.map, source.orbits).sum(axis=1)
    return np.concatenate([birkhoff_sums_batch(pot, block, source.box, source.extension)
                           for block in config_batches(source.spec, source.box)])


def _label(pot) -> str:
    return "0" if pot is None else pot.label


# -- measures -------------------------------------------------------------------

@dataclass(frozen=True)
class EmpiricalMeasure:
    """mu_{y,n} = (1/n) sum_{i<n} delta_{T^i y}, known only through its pairings."""

    map: MapSpec
    base: complex
    horizon: int

    def pair(self, g) -> float:
        return birkhoff_sum(self.map, g, self.base, self.horizon) / self.horizon


@dataclass(frozen=True, eq=False)
class ShiftEmpiricalMeasure:
    """mu_{xi,Lambda} = (1/|Lambda|) sum_{x in Lambda} delta_{tau^x xi}."""

    config: object  # BoxConfig

    def pair(self, g: ShiftPotential) -> float:
        cfg = self.config
        return float(birkhoff_sums_batch(g, cfg.symbols[None], cfg.box, cfg.extension)[0]) / cfg.box.volume


@dataclass(frozen=True)
class ReferenceMeasure:
    """A measure given only by its pairings, keyed by potential label."""

    pairings: dict
    name: str = "reference"

    def pair(self, g) -> float:
        try:
            return float(self.pairings[g.label])
        except KeyError:
            raise ValueError(f"reference {self.name!r} has no pairing for {g.label!r}") from None

    def vector(self, fam: TestFamily) -> np.ndarray:
        return np.array([self.pair(g) for g in fam.members])


def uniform_circle_reference(fam: TestFamily | None = None) -> ReferenceMeasure:
    """Lebesgue measure on |z| = 1: every non-constant Re/Im z^j moment vanishes."""
    fam = fam or default_family()
    m = MapSpec.power(2)
    th = 2 * math.pi * np.arange(4096) / 4096
    z = np.exp(1j * th)
    pairings = {}
    for g in fam.members:
        v = float(np.mean(g.values(m, z)))
        pairings[g.label] = 0.0 if abs(v) < 1e-12 else v
    pairings[LYAPUNOV.label] = float(np.mean(LYAPUNOV.values(m, z)))
    return ReferenceMeasure(pairings, "uniform-circle")


def bernoulli_reference(probs, fam: TestFamily | None = None) -> ReferenceMeasure:
    """Bernoulli product measure on the full shift, paired with single-site indicators."""
    probs = np.asarray(probs, dtype=float)
    fam = fam or single_site_family(len(probs))
    pairings = {}
    for g in fam.members:
        if len(g.window) != 1:
            raise ValueError("Bernoulli reference pairs only with single-site potentials")
        pairings[g.label] = float(np.dot(probs, g.table))
    return ReferenceMeasure(pairings, "bernoulli:" + ",".join(repr(float(p)) for p in probs))


def pairing_vector(mu, fam: TestFamily) -> np.ndarray:
    if isinstance(mu, ReferenceMeasure):
        return mu.vector(fam)
    return np.array([mu.pair(g) for g in fam.members])


def weakstar_distances(P: np.ndarray, ref: np.ndarray, fam: TestFamily) -> np.ndarray:
    """Row-wise distance between pairing vectors P (shape (N, J)) and ``ref`` (shape (J,))."""
    scale = 1.0 + np.asarray(fam.scales)
    terms = np.minimum(1.0, np.abs(np.atleast_2d(P) - ref) / scale)
    return terms @ fam.weights


def weakstar_distance(mu, nu, fam: TestFamily) -> float:
    """sum_j 2^-j min(1, |mu(g_j) - nu(g_j)| / (1 + scale_j)).

    Balls of radius at most 2^-J never hit the truncation, so they are convex.
    """
    return float(weakstar_distances(pairing_vector(mu, fam), pairing_vector(nu, fam), fam)[0])


# -- ensembles --------------------------------------------------------------------

@dataclass(eq=False)
class WeightedEnsemble:
    """nu_{n,f} = sum_y p_{n,f}(y) delta_{mu_{y,n}} with log-space weights."""

    source: Source
    potential: object
    log_weights: np.ndarray
    _pairings: dict = field(default_factory=dict, repr=False)

    @property
    def horizon(self) -> int:
        return horizon(self.source)

    @property
    def method(self) -> str:
        return self.source.method

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def __len__(self) -> int:
        return len(self.log_weights)

    def pairings(self, g) -> np.ndarray:
        """mu_i(g) for every atom."""
        key = _label(g)
        if key not in self._pairings:
            self._pairings[key] = birkhoff_sums(self.source, g) / self.horizon
        return self._pairings[key]

    def to_json(self, observables=()) -> str:
        doc = {
            "horizon": self.horizon,
            "method": self.method,
            "f": _label(self.potential),
            "atoms": len(self),
            "log_weights": self.log_weights.tolist(),
            "pairings": {g.label: self.pairings(g).tolist() for g in observables},
        }
        return json.dumps(doc)


def gibbs_weights(source: Source, pot=None, workers: int = 1) -> WeightedEnsemble:
    """p_{n,f}(y) = exp(S_n f(y)) / sum_z exp(S_n f(z)), stored as logs."""
    if len(source) == 0:
        raise ValueError("empty orbit set")
    S = birkhoff_sums(source, pot)
    return WeightedEnsemble(source, pot, S - logsumexp(S, workers=workers))


def ensemble_mean(nu: WeightedEnsemble, g) -> float:
    """Barycenter of nu paired with g: sum_i w_i mu_i(g)."""
    return float(np.dot(nu.weights, nu.pairings(g)))
