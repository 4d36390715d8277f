"""Finite-support step distributions on a free group or a product of two.

Single-group measures (:class:`SRW`, :class:`LazySRW`, single-group
:class:`Table`) describe ``μ`` on ``F_m``. Product measures
(:class:`ProductMeasure`, :class:`NoiseMixture`, :class:`DiagonalPush`,
pair :class:`Table`) describe ``π`` on ``F_m × F_m'``; each exposes its two
marginals and a sampler that returns atom indices into the factor tables, so
the vectorised walkers never touch Python objects in the inner loop.

Weights may be given as floats or :class:`fractions.Fraction`; exact
arithmetic is preserved by :meth:`MeasureSpec.support` when the inputs are
rational.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Tuple, Union

import numpy as np

from .batch import pad_words
from .errors import UnsupportedSpecError
from .groups import FreeGroup, KillLastGenerator, ProductElement, ReducedWord, free_reduce

Number = Union[float, Fraction]
WEIGHT_TOL = 1e-12


def _check_weights(weights, what):
    total = sum(weights)
    if any(w <= 0 for w in weights):
        raise ValueError(f"{what}: weights must be strictly positive")
    if abs(float(total) - 1.0) > WEIGHT_TOL:
        raise ValueError(f"{what}: weights sum to {float(total)!r}, not 1")


class MeasureSpec:
    """Common interface. Subclasses are frozen dataclasses."""

    is_product = False

    # single-group API
    def atoms(self) -> Tuple[list, list]:
        raise NotImplementedError

    @property
    def groups(self) -> tuple:
        raise NotImplementedError

    @property
    def radial(self) -> bool:
        return False

    def support(self):
        """``[(atom, weight), ...]`` with atoms as letter tuples (or pairs)."""
        words, weights = self.atoms()
        return list(zip(words, weights))

    def to_config(self) -> dict:
        raise NotImplementedError


class SingleMeasure(MeasureSpec):
    @cached_property
    def table(self) -> np.ndarray:
        return pad_words(self.atoms()[0])

    @cached_property
    def probs(self) -> np.ndarray:
        p = np.array([float(w) for w in self.atoms()[1]])
        return p / p.sum()

    @property
    def group(self) -> FreeGroup:
        return self.groups[0]

    def sample_indices(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.choice(len(self.probs), size=size, p=self.probs)

    @property
    def max_step_length(self) -> int:
        return max(len(w) for w in self.atoms()[0])

    def weight_of(self, word) -> Number:
        word = tuple(word)
        return sum((w for a, w in self.support() if a == word), 0)


@dataclass(frozen=True)
class SRW(SingleMeasure):
    """Uniform measure on the ``2m`` generators and their inverses."""

    rank: int

    def __post_init__(self):
        FreeGroup(self.rank)

    @property
    def groups(self):
        return (FreeGroup(self.rank),)

    @property
    def radial(self):
        return True

    @property
    def hold(self):
        return 0

    def atoms(self):
        g = FreeGroup(self.rank)
        return [(x,) for x in g.letters], [Fraction(1, 2 * self.rank)] * (2 * self.rank)

    def to_config(self):
        return {"variant": "SRW", "rank": self.rank}


@dataclass(frozen=True)
class LazySRW(SingleMeasure):
    """Simple random walk that stays put with probability ``hold``."""

    rank: int
    hold: Number

    def __post_init__(self):
        FreeGroup(self.rank)
        if not 0 < self.hold < 1:
            raise ValueError("holding probability must lie in (0, 1)")

    @property
    def groups(self):
        return (FreeGroup(self.rank),)

    @property
    def radial(self):
        return True

    def atoms(self):
        g = FreeGroup(self.rank)
        move = (1 - self.hold) / (2 * self.rank)
        return [()] + [(x,) for x in g.letters], [self.hold] + [move] * (2 * self.rank)

    def to_config(self):
        return {"variant": "LazySRW", "rank": self.rank, "hold": _num_out(self.hold)}


@dataclass(frozen=True)
class SingleTable(SingleMeasure):
    """Explicit finite measure on one free group; duplicate atoms are merged."""

    rank: int
    words: tuple
    weights: tuple

    def __post_init__(self):
        g = FreeGroup(self.rank)
        merged = {}
        for w, p in zip(self.words, self.weights):
            key = free_reduce(w)
            ReducedWord(key, g)
            merged[key] = merged.get(key, 0) + p
        object.__setattr__(self, "words", tuple(merged))
        object.__setattr__(self, "weights", tuple(merged.values()))
        _check_weights(self.weights, "SingleTable")

    @classmethod
    def uniform(cls, rank: int, words) -> "SingleTable":
        words = [tuple(w.letters) if isinstance(w, ReducedWord) else tuple(w) for w in words]
        return cls(rank, tuple(words), tuple([Fraction(1, len(words))] * len(words)))

    @property
    def groups(self):
        return (FreeGroup(self.rank),)

    def atoms(self):
        return list(self.words), list(self.weights)

    def to_config(self):
        return {
            "variant": "Table",
            "rank": self.rank,
            "atoms": [list(w) for w in self.words],
            "weights": [_num_out(p) for p in self.weights],
        }


def point_mass(rank: int, word) -> SingleTable:
    word = tuple(word.letters) if isinstance(word, ReducedWord) else tuple(word)
    return SingleTable(rank, (word,), (Fraction(1),))


class ProductSpec(MeasureSpec):
    """A measure on ``Γ × Γ*``; subclasses define the coupling of coordinates."""

    is_product = True

    def marginals(self) -> Tuple[SingleMeasure, SingleMeasure]:
        raise NotImplementedError

    @property
    def groups(self):
        a, b = self.marginals()
        return (a.group, b.group)

    @cached_property
    def factor_tables(self) -> Tuple[np.ndarray, np.ndarray]:
        a, b = self.marginals()
        return a.table, b.table

    def sample_indices(self, rng: np.random.Generator, size: int):
        """Atom indices into ``factor_tables`` for ``size`` i.i.d. steps."""
        raise NotImplementedError

    def support(self):
        """Flattened joint support ``[((w1, w2), weight), ...]``."""
        raise NotImplementedError

    def atoms(self):
        sup = self.support()
        return [a for a, _ in sup], [w for _, w in sup]

    @property
    def max_step_length(self) -> int:
        a, b = self.marginals()
        return max(a.max_step_length, b.max_step_length)


@dataclass(frozen=True)
class ProductMeasure(ProductSpec):
    """Independent coordinates: ``μ × μ*``."""

    first: SingleMeasure
    second: SingleMeasure

    def marginals(self):
        return self.first, self.second

    def sample_indices(self, rng, size):
        return self.first.sample_indices(rng, size), self.second.sample_indices(rng, size)

    def support(self):
        return [((a, b), p * q) for a, p in self.first.support() for b, q in self.second.support()]

    def to_config(self):
        return {"variant": "ProductMeasure", "first": self.first.to_config(), "second": self.second.to_config()}


@dataclass(frozen=True)
class NoiseMixture(ProductSpec):
    """``ρ·μ×μ + (1-ρ)·μ_diag`` on ``Γ × Γ``."""

    rho: Number
    base: SingleMeasure

    def __post_init__(self):
        if not 0 <= self.rho <= 1:
            raise ValueError("rho must lie in [0, 1]")

    def marginals(self):
        return self.base, self.base

    def sample_indices(self, rng, size):
        i = self.base.sample_indices(rng, size)
        indep = rng.random(size) < float(self.rho)
        j = np.where(indep, self.base.sample_indices(rng, size), i)
        return i, j

    def support(self):
        sup = self.base.support()
        out = []
        for a, p in sup:
            for b, q in sup:
                w = self.rho * p * q + ((1 - self.rho) * p if a == b else 0)
                if w > 0:
                    out.append(((a, b), w))
        return out

    def to_config(self):
        return {"variant": "NoiseMixture", "rho": _num_out(self.rho), "base": self.base.to_config()}


@dataclass(frozen=True)
class DiagonalPush(ProductSpec):
    """Pushforward of ``μ`` on ``F_{m+1}`` under ``x ↦ (x, Π(x))``."""

    base: SingleMeasure

    def __post_init__(self):
        if self.base.group.rank < 2:
            raise ValueError("DiagonalPush needs a base measure on a free group of rank >= 2")

    @property
    def hom(self) -> KillLastGenerator:
        return KillLastGenerator(self.base.group)

    @cached_property
    def _image(self) -> SingleMeasure:
        if isinstance(self.base, SRW):
            m = self.base.rank - 1
            return _ImageMeasure(LazySRW(m, Fraction(1, m + 1)), self)
        return _ImageMeasure(None, self)

    def marginals(self):
        return self.base, self._image

    @cached_property
    def factor_tables(self):
        words = self.base.atoms()[0]
        images = [free_reduce(self.hom.letter_image(x) for x in w) for w in words]
        return self.base.table, pad_words(images, max(1, max(len(w) for w in images)))

    def sample_indices(self, rng, size):
        i = self.base.sample_indices(rng, size)
        return i, i

    def support(self):
        return [((a, free_reduce(self.hom.letter_image(x) for x in a)), p) for a, p in self.base.support()]

    def to_config(self):
        return {"variant": "DiagonalPush", "base": self.base.to_config()}


@dataclass(frozen=True)
class Swapped(ProductSpec):
    """``inner`` with its two coordinates exchanged."""

    inner: ProductSpec

    def marginals(self):
        a, b = self.inner.marginals()
        return b, a

    @cached_property
    def factor_tables(self):
        a, b = self.inner.factor_tables
        return b, a

    def sample_indices(self, rng, size):
        i, j = self.inner.sample_indices(rng, size)
        return j, i

    def support(self):
        return [((b, a), w) for (a, b), w in self.inner.support()]

    def to_config(self):
        return {"variant": "Swapped", "inner": self.inner.to_config()}


class _ImageMeasure(SingleMeasure):
    """Second marginal of a :class:`DiagonalPush`; radial when the base is SRW."""

    def __init__(self, radial_twin, parent: DiagonalPush):
        self._twin = radial_twin
        self._parent = parent

    @property
    def groups(self):
        return (self._parent.hom.target,)

    @property
    def radial(self):
        return self._twin is not None

    @property
    def rank(self):
        return self._parent.hom.target.rank

    @property
    def hold(self):
        return self._twin.hold if self._twin is not None else None

    def atoms(self):
        merged = {}
        for (_, b), p in self._parent.support():
            merged[b] = merged.get(b, 0) + p
        return list(merged), list(merged.values())

    def as_radial(self):
        return self._twin

    def __eq__(self, other):
        return isinstance(other, _ImageMeasure) and other._parent == self._parent

    def __hash__(self):
        return hash(("image", self._parent))

    def to_config(self):
        return (self._twin or SingleTable(self.rank, *map(tuple, self.atoms()))).to_config()


@dataclass(frozen=True)
class Table(ProductSpec):
    """Explicit finite measure on ``F_m × F_m'`` given by pairs of words."""

    ranks: tuple
    pairs: tuple
    weights: tuple

    def __post_init__(self):
        g1, g2 = FreeGroup(self.ranks[0]), FreeGroup(self.ranks[1])
        merged = {}
        for (a, b), p in zip(self.pairs, self.weights):
            key = (free_reduce(a), free_reduce(b))
            ReducedWord(key[0], g1)
            ReducedWord(key[1], g2)
            merged[key] = merged.get(key, 0) + p
        object.__setattr__(self, "pairs", tuple(merged))
        object.__setattr__(self, "weights", tuple(merged.values()))
        _check_weights(self.weights, "Table")

    @cached_property
    def _index(self):
        firsts = sorted({a for a, _ in self.pairs})
        seconds = sorted({b for _, b in self.pairs})
        fi = {w: i for i, w in enumerate(firsts)}
        si = {w: i for i, w in enumerate(seconds)}
        i = np.array([fi[a] for a, _ in self.pairs])
        j = np.array([si[b] for _, b in self.pairs])
        return firsts, seconds, i, j

    def marginals(self):
        m1, m2 = {}, {}
        for (a, b), p in zip(self.pairs, self.weights):
            m1[a] = m1.get(a, 0) + p
            m2[b] = m2.get(b, 0) + p
        return (
            SingleTable(self.ranks[0], tuple(m1), tuple(m1.values())),
            SingleTable(self.ranks[1], tuple(m2), tuple(m2.values())),
        )

    @cached_property
    def factor_tables(self):
        firsts, seconds, _, _ = self._index
        return pad_words(firsts), pad_words(seconds)

    def sample_indices(self, rng, size):
        _, _, i, j = self._index
        p = np.array([float(w) for w in self.weights])
        k = rng.choice(len(p), size=size, p=p / p.sum())
        return i[k], j[k]

    def support(self):
        return list(zip(self.pairs, self.weights))

    def to_config(self):
        return {
            "variant": "Table",
            "ranks": list(self.ranks),
            "atoms": [[list(a), list(b)] for a, b in self.pairs],
            "weights": [_num_out(p) for p in self.weights],
        }


def radial_params(spec: SingleMeasure):
    """``(rank, hold)`` for radially symmetric measures, else raise."""
    if isinstance(spec, SRW):
        return spec.rank, 0.0
    if isinstance(spec, LazySRW):
        return spec.rank, float(spec.hold)
    if isinstance(spec, _ImageMeasure) and spec.radial:
        return radial_params(spec.as_radial())
    raise UnsupportedSpecError(f"{type(spec).__name__} is not radially symmetric")


def as_elements(spec: ProductSpec):
    """Joint support as :class:`ProductElement` atoms."""
    g1, g2 = spec.groups
    return [(ProductElement(ReducedWord(a, g1), ReducedWord(b, g2)), w) for (a, b), w in spec.support()]


def _num_out(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else x.numerator
    return x


def parse_number(x) -> Number:
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, int):
        return Fraction(x)
    return x


def spec_from_config(cfg: dict) -> MeasureSpec:
    """Inverse of ``to_config``."""
    v = cfg.get("variant")
    if v == "SRW":
        return SRW(int(cfg["rank"]))
    if v == "LazySRW":
        return LazySRW(int(cfg["rank"]), parse_number(cfg["hold"]))
    if v == "ProductMeasure":
        return ProductMeasure(spec_from_config(cfg["first"]), spec_from_config(cfg["second"]))
    if v == "NoiseMixture":
        return NoiseMixture(parse_number(cfg["rho"]), spec_from_config(cfg["base"]))
    if v == "DiagonalPush":
        return DiagonalPush(spec_from_config(cfg["base"]))
    if v == "Swapped":
        return Swapped(spec_from_config(cfg["inner"]))
    if v == "Table":
        weights = tuple(parse_number(w) for w in cfg["weights"])
        if "ranks" in cfg:
            pairs = tuple((tuple(a), tuple(b)) for a, b in cfg["atoms"])
            return Table(tuple(cfg["ranks"]), pairs, weights)
        return SingleTable(int(cfg["rank"]), tuple(tuple(a) for a in cfg["atoms"]), weights)
    raise ValueError(f"unknown measure variant {v!r}")
