"""(C, D)-chains and chain shadows on free-group Cayley trees.

Membership in the chain shadow ``CS_x(y, C)`` (with ``D = 2C + 1``) is
decided from three numbers only: ``|y|``, ``|z|`` and ``(y|z)`` measured from
``x``. On a tree every point reachable by a chain is reachable by a chain of
at most two steps ``x → x_1 → z`` where ``x_1`` sits at distance ``t`` along
``[x, z]`` followed by a side excursion of length ``e <= C``. The brute-force
search in :func:`chain_shadow_by_search` checks this against the definition.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..groups import ReducedWord, common_prefix_length, free_reduce, gromov_product, word_distance


@dataclass(frozen=True)
class ChainParams:
    C: float
    D: float

    @property
    def chain_consequences_apply(self) -> bool:
        return self.D >= 2 * self.C + 1


@dataclass(frozen=True)
class ChainCheck:
    ok: bool
    violation: Optional[int] = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def is_chain(points: Sequence[ReducedWord], params: ChainParams) -> ChainCheck:
    """Check the two chain conditions; the index of the first bad point is returned.

    When the chain is valid and ``D >= 2C + 1`` the consequences
    ``d(x_0, x_n) >= n`` and ``(x_0|x_n)_{x_1} <= C`` are asserted.
    """
    if len(points) < 2:
        raise ValueError("a chain needs at least two points")
    for i in range(1, len(points)):
        if word_distance(points[i - 1], points[i]) < params.D:
            return ChainCheck(False, i, "short step")
        if i < len(points) - 1 and gromov_product(points[i - 1], points[i + 1], points[i]) > params.C:
            return ChainCheck(False, i, "turn")
    if params.chain_consequences_apply:
        n = len(points) - 1
        assert word_distance(points[0], points[-1]) >= n, "chain does not make linear progress"
        assert gromov_product(points[0], points[-1], points[1]) <= params.C, "chain endpoint turns back"
    return ChainCheck(True)


def _side_distance(ly: int, py: int, t: int, e: int) -> int:
    """Distance from y to the geodesic from x to x_1 (branch at ``t``, excursion ``e``)."""
    if t == py and py < ly:
        return ly - t - min(e, ly - t)
    return ly - min(py, t)


def chain_shadow_metric(ly: int, lz: int, py: int, C: int) -> bool:
    """Tree criterion for ``z ∈ CS_x(y, C)`` from ``|y|, |z|, (y|z)`` seen from ``x``."""
    C = int(C)
    D = 2 * C + 1
    if lz == 0:
        return True
    if lz >= D and _side_distance(ly, py, lz, 0) <= C:
        return True
    for t in range(lz + 1):
        for e in range(C + 1):
            if t + e >= D and lz - t + e >= D and _side_distance(ly, py, t, e) <= C:
                return True
    return False


def chain_shadow_contains(x: ReducedWord, y: ReducedWord, C: float, z: ReducedWord) -> bool:
    """Whether ``z`` lies in the chain shadow of ``y`` seen from ``x``."""
    xi = x.inverse()
    yy, zz = xi * y, xi * z
    return chain_shadow_metric(len(yy), len(zz), common_prefix_length(yy.letters, zz.letters), C)


# ---------------------------------------------------------------- brute force oracle

def _neighbourhood(core: set, radius: int, rank: int) -> list:
    letters = [k for k in range(1, rank + 1)] + [-k for k in range(1, rank + 1)]
    seen = set(core)
    frontier = list(core)
    for _ in range(radius):
        nxt = []
        for w in frontier:
            for a in letters:
                v = free_reduce(w + (a,))
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        frontier = nxt
    return sorted(seen, key=lambda w: (len(w), w))


def _distance_matrix(nodes: list) -> np.ndarray:
    width = max(1, max(len(v) for v in nodes))
    buf = np.zeros((len(nodes), width), dtype=np.int8)
    lens = np.array([len(v) for v in nodes])
    for i, v in enumerate(nodes):
        buf[i, : len(v)] = v
    eq = (buf[:, None, :] == buf[None, :, :]) & (buf[:, None, :] != 0)
    cp = np.cumprod(eq, axis=2).sum(axis=2)
    return lens[:, None] + lens[None, :] - 2 * cp


def chain_shadow_by_search(y: tuple, z: tuple, C: int, rank: int = 2, slack: Optional[int] = None) -> bool:
    """Breadth-first search over all ``(C, 2C+1)``-chains from ``o`` to ``z``.

    Interior points of such a chain lie within ``C`` of the geodesic
    ``[o, z]``: for ``0 < i < n`` the chain conditions give
    ``(x_0|x_{i+1})_{x_i} <= C`` and ``(x_{i+1}|x_n)_{x_i} >= D - C > C``, and
    the tree inequality then forces ``(x_0|x_n)_{x_i} <= C``. So the search
    runs over the ``slack``-neighbourhood of ``[o, z]`` (``slack = C`` is
    enough; larger values only cross-check). States are consecutive pairs of
    chain points, since the turn condition looks one point back.
    """
    y, z = tuple(y), tuple(z)
    if not z:
        return True
    D = 2 * C + 1
    slack = C if slack is None else slack
    nodes = _neighbourhood({z[:i] for i in range(len(z) + 1)}, slack, rank)
    index = {v: i for i, v in enumerate(nodes)}
    dm = _distance_matrix(nodes + [y])
    iy = len(nodes)
    o, iz = index[()], index[z]
    dm_n = dm[:iy, :iy]
    # (o | x_1)_y <= C  <=>  d(y,o) + d(y,x_1) - d(o,x_1) <= 2C
    starts = np.nonzero((dm_n[o] >= D) & (dm[iy, o] + dm[iy, :iy] - dm_n[o] <= 2 * C))[0]
    if iz in starts:
        return True
    seen = np.zeros((iy, iy), dtype=bool)
    seen[o, starts] = True
    queue = deque((o, int(v)) for v in starts)
    while queue:
        prev, cur = queue.popleft()
        # (prev | nxt)_cur <= C
        ok = (dm_n[cur] >= D) & (dm_n[cur, prev] + dm_n[cur] - dm_n[prev] <= 2 * C) & ~seen[cur]
        nxt = np.nonzero(ok)[0]
        if ok[iz]:
            return True
        seen[cur, nxt] = True
        queue.extend((cur, int(v)) for v in nxt)
    return False


def canonical_pair(ly: int, lz: int, py: int):
    """Representatives ``(y, z)`` in ``F_2`` with the given lengths and Gromov product."""
    z = (1,) * lz
    if py < min(ly, lz):
        y = (1,) * py + (2,) * (ly - py)
    else:
        y = (1,) * ly
    return y, z
