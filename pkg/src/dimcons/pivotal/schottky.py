"""Schottky sets on free groups: construction, certification and search.

Certification of conditions (1) and (2) uses an exact counting bound. For
``s ∈ S`` the point ``s·y`` either keeps the first ``C + 1`` letters of ``s``
(then ``(x|s·y)_o > C`` forces ``x`` to share that prefix) or ``y`` cancels
all but at most ``C`` letters of ``s`` (then ``y`` starts with the inverse of
``s[C:]``). Hence the number of bad ``s`` is at most ``A + B``, where ``A`` is
the largest number of elements sharing a ``(C+1)``-prefix and ``B`` the
longest chain of the words ``inverse(s[C:])`` under the prefix order. The same
bound is applied to ``S⁻¹`` for condition (2). An adversarial search over
``x, y`` built from the elements themselves backs the bound with concrete
witnesses.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from ..errors import NoCertificateError
from ..groups import FreeGroup, ReducedWord, common_prefix_length, free_reduce


def _inv(w: tuple) -> tuple:
    return tuple(-a for a in reversed(w))


def _mul(u: tuple, v: tuple) -> tuple:
    return free_reduce(u + v)


@dataclass
class Counterexample:
    condition: int
    detail: str
    x: tuple = ()
    y: tuple = ()
    bad: int = 0


@dataclass
class SchottkyCertificate:
    S: tuple
    rank: int
    eps: float
    C: int
    D: int
    evidence: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.S)

    def words(self) -> List[ReducedWord]:
        g = FreeGroup(self.rank)
        return [ReducedWord(s, g) for s in self.S]


def _max_shared_prefix(words, k: int) -> int:
    counts = {}
    for w in words:
        counts[w[:k]] = counts.get(w[:k], 0) + 1
    return max(counts.values())


def _max_prefix_chain(words) -> int:
    """Longest chain ``w_1 ⊑ w_2 ⊑ ...`` under the prefix order (with multiplicity)."""
    ws = sorted(words, key=len)
    best = {}
    out = 0
    for w in ws:
        b = 1 + max((best[w[:i]] for i in range(len(w)) if w[:i] in best), default=0)
        b = max(b, best.get(w, 0) + 1) if w in best else b
        best[w] = b
        out = max(out, b)
    return out


def bad_bound(words, C: int) -> int:
    return _max_shared_prefix(words, C + 1) + _max_prefix_chain([_inv(w[C:]) for w in words])


def _head(s: tuple, y: tuple, k: int) -> tuple:
    """First ``k`` letters of the reduced product ``s·y``."""
    c = common_prefix_length(_inv(s[-len(y):]) if y else (), y) if y else 0
    return (s[: len(s) - c] + y[c:])[:k]


def count_bad(words, x: tuple, y: tuple, C: int) -> int:
    """``#{s : (x | s·y)_o > C}`` computed exactly."""
    if len(x) <= C:
        return 0
    key = x[: C + 1]
    return sum(_head(s, y, C + 1) == key for s in words)


def adversarial_search(words, C: int, rng: np.random.Generator, trials: int = 500):
    """Largest bad count found over structured and random ``(x, y)``."""
    words = list(words)
    best = (0, (), ())
    cands = []
    # y cancels one element, x follows another: the worst configuration for the bound
    for _ in range(trials):
        s1, s2 = words[rng.integers(len(words))], words[rng.integers(len(words))]
        cut = int(rng.integers(0, C + 1))
        y = _mul(_inv(s2[cut:]), s1)
        x = _mul(s2[:cut], s1)[: C + 2]
        cands.append((x, y))
        cands.append((s1[: C + 1], ()))
    for x, y in cands:
        b = count_bad(words, x, y, C)
        if b > best[0]:
            best = (b, x, y)
    return best


def schottky_certify(S: Sequence, eps: float, C: int, D: int, rank: Optional[int] = None,
                     seed: int = 0, trials: int = 500):
    """Certificate for an ``(eps, C, D)``-Schottky set, or the first counterexample."""
    words = [tuple(s.letters) if isinstance(s, ReducedWord) else tuple(s) for s in S]
    if not words:
        raise ValueError("S must be nonempty")
    rank = rank or max(abs(a) for w in words for a in w)
    n = len(words)
    allowed = math.floor(eps * n + 1e-12)
    for w in words:
        if len(free_reduce(w)) < D:
            return Counterexample(3, f"|s| = {len(free_reduce(w))} < D = {D}", x=w)
    rng = np.random.default_rng(seed)
    evidence = {"allowed_bad": allowed}
    for cond, ws in ((1, words), (2, [_inv(w) for w in words])):
        found, x, y = adversarial_search(ws, C, rng, trials)
        if found > allowed:
            return Counterexample(cond, f"{found} elements turn back (allowed {allowed})", x, y, found)
        bound = bad_bound(ws, C)
        evidence[f"condition{cond}"] = {"bound": bound, "adversarial_max": found}
        if bound > allowed:
            return Counterexample(cond, f"counting bound {bound} exceeds {allowed}; not certified", x, y, found)
    gp = max((common_prefix_length(a, b) for i, a in enumerate(words) for b in words[i + 1:]), default=0)
    evidence["max_pairwise_product"] = gp
    return SchottkyCertificate(tuple(words), rank, eps, C, D, evidence)


def build_schottky_words(rank: int, count: int, length: int, C: int, seed: int = 0) -> List[tuple]:
    """``count`` reduced words of the given length with distinct ``(C+1)``-prefixes and suffixes."""
    g = FreeGroup(rank)
    k = C + 1
    pool = [tuple(w.letters) for w in g.sphere(k)]
    if count > len(pool):
        raise NoCertificateError(f"only {len(pool)} distinct prefixes of length {k} in rank {rank}")
    rng = np.random.default_rng(seed)
    pre = [pool[i] for i in rng.permutation(len(pool))[:count]]
    suf = [pool[i] for i in rng.permutation(len(pool))[:count]]
    letters = list(g.letters)
    out = []
    for p, q in zip(pre, suf):
        mid_len = length - 2 * k
        while True:
            mid = [p[-1]]
            for _ in range(mid_len):
                mid.append(int(rng.choice([a for a in letters if a != -mid[-1]])))
            mid = mid[1:]
            w = p + tuple(mid) + q
            if len(free_reduce(w)) == len(w):
                break
        out.append(w)
    return out


def search_schottky(support: Sequence, weights: Sequence[float], eps: float, C: int, D: int,
                    rank: int, max_M: int = 8, seed: int = 0, budget: int = 200000):
    """Find ``M <= max_M`` and a certified Schottky set inside ``supp λ^{*M}``.

    Products of ``M`` support words are enumerated (or sampled when there are
    more than ``budget``) and kept greedily when their ``(C+1)``-prefix, the
    prefix of their inverse and the key ``inverse(s[C:])`` are all new.
    """
    support = [tuple(w) for w in support]
    rng = np.random.default_rng(seed)
    target = max(int(math.ceil(2 / eps)), 1)
    max_len = max(len(w) for w in support)
    for M in range(1, max_M + 1):
        if M * max_len < D:
            continue
        total = len(support) ** M
        if total <= budget:
            idx = np.array(np.unravel_index(np.arange(total), (len(support),) * M)).T
        else:
            idx = rng.integers(0, len(support), size=(budget, M))
        chosen, keys = [], set()
        for row in idx:
            w = ()
            for i in row:
                w = _mul(w, support[i])
            if len(w) < D:
                continue
            ks = {("p", w[: C + 1]), ("q", _inv(w)[: C + 1]), ("t", _inv(w[C:])), ("u", w[: len(w) - C])}
            if ks & keys:
                continue
            keys |= ks
            chosen.append(w)
            if len(chosen) >= target:
                break
        if len(chosen) >= target:
            cert = schottky_certify(chosen, eps, C, D, rank, seed)
            if isinstance(cert, SchottkyCertificate):
                cert.evidence["M"] = M
                return cert
    raise NoCertificateError(f"no ({eps}, {C}, {D})-Schottky set found in supp λ^*M for M <= {max_M}")
