"""Free groups, their products, and the tree geometry of their Cayley graphs.

Letters are signed generator indices: ``k`` is the k-th generator (1-based)
and ``-k`` its inverse. Words are stored as flat tuples, always freely
reduced. Every Cayley tree here is 0-hyperbolic, so Gromov products at the
identity are common-prefix lengths and all boundary computations are exact
as long as the boundary approximation is deep enough.
"""
from __future__ import annotations

import math
import string
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from .errors import IndeterminateError, SpecMismatchError, UnsupportedBaseError

__all__ = [
    "FreeGroup",
    "ReducedWord",
    "ProductElement",
    "BoundaryApprox",
    "TruncatedInt",
    "KillLastGenerator",
    "common_prefix_length",
    "free_reduce",
    "word_multiply",
    "word_distance",
    "gromov_product",
    "quasi_metric",
    "product_quasi_metric",
    "product_distance",
    "shadow_contains",
    "busemann",
    "apply_homomorphism",
]

_NAMES = string.ascii_lowercase


def common_prefix_length(a: Sequence[int], b: Sequence[int]) -> int:
    n = min(len(a), len(b))
    if n <= 32:
        for i in range(n):
            if a[i] != b[i]:
                return i
        return n
    if a[:n] == b[:n]:
        return n
    lo, hi = 0, n  # a[:lo] == b[:lo], a[:hi] != b[:hi]
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if a[lo:mid] == b[lo:mid]:
            lo = mid
        else:
            hi = mid
    return lo


def free_reduce(letters: Iterable[int]) -> tuple:
    """Stack-based free reduction of an arbitrary letter sequence."""
    out: list = []
    for x in letters:
        if x == 0:
            continue
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


@dataclass(frozen=True)
class FreeGroup:
    """The free group on ``rank`` generators."""

    rank: int

    def __post_init__(self):
        if not isinstance(self.rank, int) or self.rank < 1:
            raise ValueError(f"rank must be a positive integer, got {self.rank!r}")

    @property
    def alphabet_size(self) -> int:
        return 2 * self.rank

    @property
    def letters(self) -> tuple:
        return tuple(range(1, self.rank + 1)) + tuple(-k for k in range(1, self.rank + 1))

    def identity(self) -> "ReducedWord":
        return ReducedWord((), self)

    def generator(self, k: int) -> "ReducedWord":
        return ReducedWord((k,), self)

    def word(self, letters: Union[str, Iterable[int]]) -> "ReducedWord":
        """Build a reduced word from a letter string (``"abA"``) or signed ints."""
        if isinstance(letters, str):
            letters = self.parse(letters)
        return ReducedWord.from_letters(letters, self)

    def parse(self, text: str) -> tuple:
        out = []
        for ch in text:
            if ch.isspace() or ch in "·*.":
                continue
            k = _NAMES.find(ch.lower()) + 1
            if k == 0 or k > self.rank:
                raise ValueError(f"letter {ch!r} is not in the alphabet of F_{self.rank}")
            out.append(k if ch.islower() else -k)
        return tuple(out)

    def sphere_size(self, k: int) -> int:
        """Number of reduced words of length ``k``."""
        if k == 0:
            return 1
        return 2 * self.rank * (2 * self.rank - 1) ** (k - 1)

    def sphere(self, k: int):
        """Iterate over all reduced words of length ``k`` (lexicographic)."""
        letters = self.letters

        def rec(prefix):
            if len(prefix) == k:
                yield prefix
                return
            for x in letters:
                if prefix and prefix[-1] == -x:
                    continue
                yield from rec(prefix + (x,))

        for t in rec(()):
            yield ReducedWord(t, self)

    # space-model surface: distance, Gromov product, boundary-prefix extraction
    def distance(self, x: "ReducedWord", y: "ReducedWord") -> int:
        return word_distance(x, y)

    def gromov_product(self, x, y, base=None):
        return gromov_product(x, y, base)

    def boundary_prefix(self, point: "BoundaryApprox", depth: int) -> "ReducedWord":
        if depth > point.depth:
            raise IndeterminateError(f"requested depth {depth} exceeds approximation depth {point.depth}")
        return point.prefix.prefix(depth)

    def __str__(self):
        return f"F_{self.rank}"


@dataclass(frozen=True)
class ReducedWord:
    """An element of a free group as its freely reduced spelling."""

    letters: tuple
    group: FreeGroup

    def __post_init__(self):
        m = self.group.rank
        prev = 0
        for x in self.letters:
            if not (1 <= abs(x) <= m):
                raise ValueError(f"letter {x} out of range for {self.group}")
            if x == -prev:
                raise ValueError(f"letters {prev},{x} cancel; word is not reduced")
            prev = x

    @classmethod
    def from_letters(cls, letters: Iterable[int], group: FreeGroup) -> "ReducedWord":
        return cls(free_reduce(letters), group)

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, i):
        return self.letters[i]

    def __mul__(self, other: "ReducedWord") -> "ReducedWord":
        return word_multiply(self, other)

    def __invert__(self) -> "ReducedWord":
        return self.inverse()

    def __pow__(self, n: int) -> "ReducedWord":
        base = self if n >= 0 else self.inverse()
        out = self.group.identity()
        for _ in range(abs(n)):
            out = out * base
        return out

    def inverse(self) -> "ReducedWord":
        return ReducedWord(tuple(-x for x in reversed(self.letters)), self.group)

    def prefix(self, k: int) -> "ReducedWord":
        return ReducedWord(self.letters[:k], self.group)

    def is_identity(self) -> bool:
        return not self.letters

    def __str__(self):
        if not self.letters:
            return "ε"
        return "".join(_NAMES[x - 1] if x > 0 else _NAMES[-x - 1].upper() for x in self.letters)

    def __repr__(self):
        return f"ReducedWord({str(self)!r}, F_{self.group.rank})"


@dataclass(frozen=True)
class ProductElement:
    """An element ``(x, y)`` of a product of two free groups."""

    first: ReducedWord
    second: ReducedWord

    def __mul__(self, other: "ProductElement") -> "ProductElement":
        return ProductElement(self.first * other.first, self.second * other.second)

    def inverse(self) -> "ProductElement":
        return ProductElement(self.first.inverse(), self.second.inverse())

    def __invert__(self):
        return self.inverse()

    @property
    def groups(self) -> tuple:
        return (self.first.group, self.second.group)

    def __str__(self):
        return f"({self.first}, {self.second})"


@dataclass(frozen=True)
class BoundaryApprox:
    """A boundary point known through its reduced prefix of length ``depth``.

    The object stands for the cylinder of all infinite reduced words that
    extend ``prefix``; anything that would need more letters raises
    :class:`IndeterminateError`.
    """

    prefix: ReducedWord
    depth: int = field(default=-1)

    def __post_init__(self):
        if self.depth == -1:
            object.__setattr__(self, "depth", len(self.prefix))
        if self.depth < 1 or len(self.prefix) != self.depth:
            raise ValueError(f"prefix length {len(self.prefix)} must equal depth {self.depth} >= 1")

    @property
    def group(self) -> FreeGroup:
        return self.prefix.group

    @property
    def letters(self) -> tuple:
        return self.prefix.letters

    @classmethod
    def periodic(cls, group: FreeGroup, pattern: Union[str, Sequence[int]], depth: int) -> "BoundaryApprox":
        """Depth-``depth`` approximation of the periodic point ``pattern^∞``."""
        letters = group.parse(pattern) if isinstance(pattern, str) else tuple(pattern)
        out = []
        while len(out) < depth:
            out.extend(letters)
        return cls(ReducedWord(tuple(out[:depth]), group), depth)

    @classmethod
    def from_letters(cls, group: FreeGroup, letters: Sequence[int]) -> "BoundaryApprox":
        return cls(ReducedWord(tuple(int(x) for x in letters), group))

    def __str__(self):
        return f"{self.prefix}…@{self.depth}"


class TruncatedInt(int):
    """An integer that is only a lower bound: the true value may be larger."""

    truncated = True

    def __repr__(self):
        return f"TruncatedInt(>={int(self)})"


Point = Union[ReducedWord, BoundaryApprox]


def _check_same(*items) -> FreeGroup:
    groups = {it.group for it in items}
    if len(groups) != 1:
        raise SpecMismatchError(f"operands live in different groups: {sorted(str(g) for g in groups)}")
    return groups.pop()


def word_multiply(x: ReducedWord, y: ReducedWord) -> ReducedWord:
    """Reduced form of ``x·y``; cancellation works outward from the junction."""
    g = _check_same(x, y)
    a, b = x.letters, y.letters
    i, n = 0, min(len(a), len(b))
    while i < n and a[-1 - i] == -b[i]:
        i += 1
    return ReducedWord(a[: len(a) - i] + b[i:], g)


def word_distance(x: ReducedWord, y: ReducedWord) -> int:
    _check_same(x, y)
    return len(x) + len(y) - 2 * common_prefix_length(x.letters, y.letters)


def gromov_product(x: Point, y: Point, base: ReducedWord = None):
    """Gromov product ``(x|y)_base``.

    For two group elements this is ``(d(x,b) + d(b,y) - d(x,y)) / 2``, an
    integer on trees. Boundary arguments are only accepted at the identity
    base, where the product is the common-prefix length; if that length
    reaches the depth of an approximation the answer is a
    :class:`TruncatedInt` lower bound.
    """
    _check_same(x, y)
    boundary = isinstance(x, BoundaryApprox) or isinstance(y, BoundaryApprox)
    if base is not None:
        _check_same(x, base)
        if boundary and base.letters:
            raise UnsupportedBaseError("boundary Gromov products are only supported at the identity")
    if not boundary:
        if base is None or not base.letters:
            return common_prefix_length(x.letters, y.letters)
        two = word_distance(x, base) + word_distance(base, y) - word_distance(x, y)
        return two // 2
    cp = common_prefix_length(x.letters, y.letters)
    limit = min(len(x.letters), len(y.letters))
    if cp < limit:
        return cp
    # cp equals the shorter spelling: exact only if that side is a group element
    if isinstance(x, ReducedWord) and len(x.letters) == limit:
        return cp
    if isinstance(y, ReducedWord) and len(y.letters) == limit:
        return cp
    return TruncatedInt(cp)


def quasi_metric(x: Point, y: Point) -> float:
    """``exp(-(x|y)_o)``, and 0 when the two arguments coincide.

    Two boundary approximations with equal prefixes are treated as the same
    boundary point.
    """
    _check_same(x, y)
    if type(x) is type(y) and x.letters == y.letters:
        return 0.0
    return math.exp(-int(gromov_product(x, y)))


def product_quasi_metric(p: tuple, q: tuple) -> float:
    """Max of the factor quasi-metrics for pairs ``(first, second)``."""
    return max(quasi_metric(p[0], q[0]), quasi_metric(p[1], q[1]))


def product_distance(x: ProductElement, y: ProductElement) -> int:
    return max(word_distance(x.first, y.first), word_distance(x.second, y.second))


def _exact_product_with_boundary(x: ReducedWord, eta: BoundaryApprox) -> int:
    _check_same(x, eta)
    cp = common_prefix_length(x.letters, eta.letters)
    if cp == len(x.letters) or cp < eta.depth:
        return cp
    raise IndeterminateError(f"depth {eta.depth} cannot resolve (x|η)_o for |x|={len(x)}")


def shadow_contains(x: ReducedWord, R: float, eta: BoundaryApprox) -> bool:
    """Whether ``η`` lies in the shadow ``O(x, R)``, i.e. ``(o|η)_x < R``.

    On a tree ``(o|η)_x = |x| - (x|η)_o``; the answer is exact whenever the
    prefix of ``η`` resolves ``(x|η)_o``.
    """
    return len(x) - _exact_product_with_boundary(x, eta) < R


def busemann(x: ReducedWord, eta: BoundaryApprox) -> int:
    """Horospherical value ``β_η(x) = |x| - 2(x|η)_o``."""
    return len(x) - 2 * _exact_product_with_boundary(x, eta)


@dataclass(frozen=True)
class KillLastGenerator:
    """The surjection ``F_{m+1} -> F_m`` fixing ``g_1..g_m`` and killing ``g_{m+1}``."""

    source: FreeGroup

    def __post_init__(self):
        if self.source.rank < 2:
            raise ValueError("source rank must be at least 2")

    @property
    def target(self) -> FreeGroup:
        return FreeGroup(self.source.rank - 1)

    def letter_image(self, x: int) -> int:
        return 0 if abs(x) == self.source.rank else x

    def __call__(self, x: ReducedWord) -> ReducedWord:
        if x.group != self.source:
            raise SpecMismatchError(f"homomorphism expects {self.source}, got {x.group}")
        return ReducedWord.from_letters((self.letter_image(a) for a in x.letters), self.target)


def apply_homomorphism(hom: KillLastGenerator, x: ReducedWord) -> ReducedWord:
    return hom(x)
