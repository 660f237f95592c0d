"""The full shift on S^{Z^l} (l = 1, 2): boxes, extended configurations, finite-range potentials."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Union

import numpy as np

from .errors import CapExceeded

ENUM_CAP = 1 << 24
METRIC_RADIUS = 64
MAX_WINDOW = 8


@dataclass(frozen=True)
class ShiftSpec:
    alphabet_size: int = 2
    dimension: int = 1
    delta: float = 0.5

    def __post_init__(self):
        if self.alphabet_size < 2:
            raise ValueError("alphabet_size must be >= 2")
        if self.dimension not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")

    @classmethod
    def parse(cls, text: str) -> "ShiftSpec":
        """Parse ``m=2,l=1[,delta=0.5]``."""
        kw = {}
        for part in filter(None, (p.strip() for p in text.split(","))):
            key, _, val = part.partition("=")
            if key == "m":
                kw["alphabet_size"] = int(val)
            elif key == "l":
                kw["dimension"] = int(val)
            elif key == "delta":
                kw["delta"] = float(val)
            else:
                raise ValueError(f"unknown shift key {key!r}")
        return cls(**kw)

    def __str__(self) -> str:
        return f"m={self.alphabet_size},l={self.dimension},delta={self.delta!r}"


@dataclass(frozen=True)
class Box:
    sides: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "sides", tuple(int(s) for s in self.sides))
        if not self.sides or any(s < 1 for s in self.sides):
            raise ValueError(f"box sides must be >= 1, got {self.sides}")

    @classmethod
    def cube(cls, n: int, dimension: int) -> "Box":
        return cls((n,) * dimension)

    @classmethod
    def parse(cls, text: str) -> "Box":
        return cls(tuple(int(s) for s in text.lower().split("x")))

    @property
    def dimension(self) -> int:
        return len(self.sides)

    @property
    def volume(self) -> int:
        return math.prod(self.sides)

    def sites(self) -> np.ndarray:
        """Lattice sites of the box, shape (volume, l), in lexicographic order."""
        grids = np.meshgrid(*[np.arange(s) for s in self.sides], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)


@dataclass(frozen=True)
class Periodic:
    pass


@dataclass(frozen=True)
class Padded:
    background: int = 0


Extension = Union[Periodic, Padded]


def parse_extension(text: str) -> Extension:
    name, _, arg = text.partition(":")
    if name == "periodic":
        return Periodic()
    if name == "padded":
        return Padded(int(arg) if arg else 0)
    raise ValueError(f"unknown extension {text!r}")


def _read(symbols: np.ndarray, sides, extension: Extension, x: np.ndarray) -> np.ndarray:
    """Symbols at integer sites x (shape (..., l)) under the extension rule.

    ``symbols`` may carry leading batch axes in front of the box axes.
    """
    x = np.asarray(x)
    l = len(sides)
    if isinstance(extension, Periodic):
        idx = tuple(np.mod(x[..., i], sides[i]) for i in range(l))
        return symbols[(Ellipsis,) + idx]
    inside = np.ones(x.shape[:-1], dtype=bool)
    for i in range(l):
        inside &= (x[..., i] >= 0) & (x[..., i] < sides[i])
    idx = tuple(np.where(inside, x[..., i], 0) for i in range(l))
    vals = symbols[(Ellipsis,) + idx]
    return np.where(inside, vals, extension.background)


@dataclass(frozen=True, eq=False)
class BoxConfig:
    box: Box
    symbols: np.ndarray
    extension: Extension = field(default_factory=Periodic)

    def __post_init__(self):
        sym = np.asarray(self.symbols, dtype=np.int64).reshape(self.box.sides)
        object.__setattr__(self, "symbols", sym)

    def read(self, x) -> int:
        x = np.atleast_1d(np.asarray(x, dtype=np.int64))
        return int(_read(self.symbols, self.box.sides, self.extension, x))

    def read_many(self, xs) -> np.ndarray:
        return _read(self.symbols, self.box.sides, self.extension, np.asarray(xs, dtype=np.int64))


@dataclass(frozen=True, eq=False)
class TranslatedView:
    """The configuration tau^y xi, read lazily through ``base``'s extension."""

    base: BoxConfig
    offset: tuple[int, ...]

    def read(self, x) -> int:
        return self.base.read(np.asarray(x) + np.asarray(self.offset))

    def read_many(self, xs) -> np.ndarray:
        return self.base.read_many(np.asarray(xs) + np.asarray(self.offset))

    def on_box(self) -> np.ndarray:
        return self.read_many(self.base.box.sites()).reshape(self.base.box.sides)


def translate(cfg: BoxConfig, y) -> TranslatedView:
    """(tau^y xi)_x = xi_{x+y}."""
    y = tuple(int(v) for v in np.atleast_1d(y))
    if len(y) != cfg.box.dimension:
        raise ValueError("offset dimension does not match the box")
    return TranslatedView(cfg, y)


def _check_enum(spec: ShiftSpec, box: Box) -> int:
    if box.dimension != spec.dimension:
        raise ValueError("box dimension does not match the shift")
    count = spec.alphabet_size ** box.volume
    if count > ENUM_CAP:
        raise CapExceeded(f"{spec.alphabet_size}^{box.volume} configurations exceed {ENUM_CAP}")
    return count


def config_block(spec: ShiftSpec, box: Box, start: int, stop: int) -> np.ndarray:
    """Configurations with lexicographic index in [start, stop), shape (k, *sides).

    The first site (in ``Box.sites`` order) is the most significant digit.
    """
    m, v = spec.alphabet_size, box.volume
    idx = np.arange(start, stop, dtype=np.int64)[:, None]
    if m & (m - 1) == 0:
        bits = m.bit_length() - 1
        digits = (idx >> (bits * np.arange(v - 1, -1, -1, dtype=np.int64))) & (m - 1)
    else:
        digits = (idx // m ** np.arange(v - 1, -1, -1, dtype=np.int64)) % m
    return digits.astype(np.int8).reshape((-1,) + box.sides)


def config_batches(spec: ShiftSpec, box: Box, batch: int = 1 << 16) -> Iterator[np.ndarray]:
    count = _check_enum(spec, box)
    for start in range(0, count, batch):
        yield config_block(spec, box, start, min(start + batch, count))


def enumerate_configs(spec: ShiftSpec, box: Box, extension: Extension = Periodic()) -> Iterator[BoxConfig]:
    """All m^|box| configurations in lexicographic order.

    ``Periodic`` realizes the periodic-configuration sets; ``Padded`` gives one
    representative per box cylinder, a maximal separated set for any eps < delta.
    """
    for block in config_batches(spec, box):
        for sym in block:
            yield BoxConfig(box, sym, extension)


@dataclass(frozen=True, eq=False)
class ShiftPotential:
    """Locally constant potential: value depends on the symbols at ``window`` offsets.

    ``table[k]`` is the value for the pattern whose base-m digits, read in
    window order with the first offset most significant, encode k.
    """

    alphabet_size: int
    window: tuple[tuple[int, ...], ...]
    table: np.ndarray
    label: str = "f"

    def __post_init__(self):
        win = tuple(tuple(int(c) for c in np.atleast_1d(w)) for w in self.window)
        object.__setattr__(self, "window", win)
        tab = np.asarray(self.table, dtype=float).ravel()
        object.__setattr__(self, "table", tab)
        if not 1 <= len(win) <= MAX_WINDOW:
            raise ValueError(f"window size must be in [1, {MAX_WINDOW}]")
        if len({len(w) for w in win}) != 1:
            raise ValueError("window offsets have mixed dimensions")
        if tab.size != self.alphabet_size ** len(win):
            raise ValueError(f"table needs {self.alphabet_size ** len(win)} entries, got {tab.size}")

    @property
    def dimension(self) -> int:
        return len(self.window[0])

    @property
    def sup(self) -> float:
        return float(np.max(np.abs(self.table)))

    @classmethod
    def single_site(cls, values, dimension: int = 1, label: str | None = None) -> "ShiftPotential":
        values = np.asarray(values, dtype=float)
        lab = label or "single:" + ",".join(repr(float(v)) for v in values)
        return cls(len(values), ((0,) * dimension,), values, lab)

    @classmethod
    def constant(cls, a: float, alphabet_size: int = 2, dimension: int = 1) -> "ShiftPotential":
        return cls(alphabet_size, ((0,) * dimension,), np.full(alphabet_size, float(a)), f"const:{a!r}")

    @classmethod
    def indicator(cls, symbol: int, alphabet_size: int = 2, dimension: int = 1) -> "ShiftPotential":
        tab = np.zeros(alphabet_size)
        tab[symbol] = 1.0
        return cls(alphabet_size, ((0,) * dimension,), tab, f"1[x0={symbol}]")

    @classmethod
    def nearest_neighbor(cls, beta: float, alphabet_size: int = 2, dimension: int = 1) -> "ShiftPotential":
        """beta * 1[xi_0 = xi_{e_i}], summed over the l coordinate directions (Ising-type)."""
        m = alphabet_size
        origin = (0,) * dimension
        units = [tuple(1 if j == i else 0 for j in range(dimension)) for i in range(dimension)]
        window = (origin,) + tuple(units)
        table = np.zeros(m ** len(window))
        for k, pattern in enumerate(itertools.product(range(m), repeat=len(window))):
            table[k] = beta * sum(pattern[0] == pattern[1 + i] for i in range(dimension))
        return cls(m, window, table, f"nn:{beta!r}")

    @classmethod
    def from_json(cls, doc, alphabet_size: int = 2, label: str = "file") -> "ShiftPotential":
        """Load ``{window: [[dx, dy], ...], values: {key: real}}``.

        Keys are base-m digit strings, one digit per window offset; missing
        keys default to 0.
        """
        if isinstance(doc, str):
            doc = json.loads(doc)
        m = int(doc.get("alphabet_size", alphabet_size))
        window = tuple(tuple(w) for w in doc["window"])
        table = np.zeros(m ** len(window))
        for key, val in doc["values"].items():
            if len(key) != len(window) or any(not ch.isdigit() or int(ch) >= m for ch in key):
                raise ValueError(f"bad pattern key {key!r}")
            table[int(key, m)] = float(val)
        return cls(m, window, table, doc.get("label", label))

    def to_json(self) -> dict:
        m, w = self.alphabet_size, len(self.window)
        values = {}
        for k in range(self.table.size):
            digits = np.base_repr(k, base=m).rjust(w, "0")
            values[digits] = float(self.table[k])
        return {"alphabet_size": m, "window": [list(o) for o in self.window], "values": values,
                "label": self.label}

    def __call__(self, cfg, at=None) -> float:
        """Value at ``cfg`` (a BoxConfig or TranslatedView), read at site ``at`` (default origin)."""
        at = np.zeros(self.dimension, dtype=np.int64) if at is None else np.asarray(at)
        reads = cfg.read_many(np.asarray(self.window) + at)
        code = 0
        for s in reads:
            code = code * self.alphabet_size + int(s)
        return float(self.table[code])

    def range(self) -> int:
        """Span of the window in a 1-D shift, minus one."""
        offs = [w[0] for w in self.window]
        return max(offs) - min(offs)


def birkhoff_sums_batch(pot: ShiftPotential, symbols: np.ndarray, box: Box,
                        extension: Extension = Periodic()) -> np.ndarray:
    """sum_{x in box} pot(tau^x xi) for a batch of configurations (shape (k, *sides))."""
    if pot.dimension != box.dimension:
        raise ValueError("potential and box dimensions differ")
    m = pot.alphabet_size
    if len(pot.window) == 1 and not any(pot.window[0]):
        # single site at the origin: reads are the box symbols themselves
        return pot.table[symbols.reshape(symbols.shape[0], -1)].sum(axis=1)
    sites = box.sites()
    code = np.zeros((symbols.shape[0], sites.shape[0]), dtype=np.int64)
    for w in pot.window:
        reads = _read(symbols, box.sides, extension, sites + np.asarray(w))
        code = code * m + reads
    return pot.table[code].sum(axis=1)


def birkhoff_sum_shift(pot: ShiftPotential, cfg: BoxConfig) -> float:
    return float(birkhoff_sums_batch(pot, cfg.symbols[None], cfg.box, cfg.extension)[0])


def _shell_sites(dimension: int, radius: int):
    rng = np.arange(-radius, radius + 1)
    grids = np.meshgrid(*([rng] * dimension), indexing="ij")
    xs = np.stack([g.ravel() for g in grids], axis=1)
    return xs, np.max(np.abs(xs), axis=1)


def metric_rho(spec: ShiftSpec, xi, eta) -> float:
    """delta^r, r the smallest sup-norm |x| of a site where xi and eta differ.

    Differences are searched within radius ``METRIC_RADIUS``; none found gives 0.
    """
    xs, r = _shell_sites(spec.dimension, METRIC_RADIUS)
    differ = xi.read_many(xs) != eta.read_many(xs)
    if not differ.any():
        return 0.0
    return spec.delta ** int(r[differ].min())
