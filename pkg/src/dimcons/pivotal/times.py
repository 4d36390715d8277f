"""Pivotal times, pivoted classes and the audit of their chain structure.

Points are reduced words held as int8 arrays so that the long positions of
the coupled walk stay cheap to multiply and compare. Notation follows the
inductive construction: with ``s_i = a_i b_i`` and interleaving words ``u_i``,

    y_n^- = u_0 s_1 u_1 ... s_{n-1} u_{n-1},   y_n = y_n^- a_n,   y_n^+ = y_n^- a_n b_n,

and ``y_{n+1}^- = y_n^+ u_n``. When no earlier pivotal time exists the
previous marker is the base point ``o``.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import ConstantViolationError, EnumerationBudgetError
from .chains import chain_shadow_metric

EMPTY = np.zeros(0, dtype=np.int8)


def arr(w) -> np.ndarray:
    return np.asarray(tuple(w), dtype=np.int8)


def cp(u: np.ndarray, v: np.ndarray) -> int:
    k = min(len(u), len(v))
    if k == 0:
        return 0
    eq = u[:k] == v[:k]
    return k if eq.all() else int(np.argmin(eq))


def mul(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    k = min(len(u), len(v))
    if k == 0:
        return np.concatenate([u, v])
    eq = u[::-1][:k] == -v[:k]
    c = k if eq.all() else int(np.argmin(eq))
    return np.concatenate([u[: len(u) - c], v[c:]])


def dist(u: np.ndarray, v: np.ndarray) -> int:
    return len(u) + len(v) - 2 * cp(u, v)


def gp(p: np.ndarray, q: np.ndarray, base: np.ndarray) -> float:
    """Gromov product ``(p|q)_base``."""
    return (dist(base, p) + dist(base, q) - dist(p, q)) / 2


def in_chain_shadow(x: np.ndarray, y: np.ndarray, C: float, z: np.ndarray) -> bool:
    ly, lz = dist(x, y), dist(x, z)
    py = (ly + lz - dist(y, z)) // 2
    return chain_shadow_metric(ly, lz, py, C)


def chain_ok(points: Sequence[np.ndarray], C: float, D: float) -> Tuple[bool, int]:
    for i in range(1, len(points)):
        if dist(points[i - 1], points[i]) < D:
            return False, i
        if i < len(points) - 1 and gp(points[i - 1], points[i + 1], points[i]) > C:
            return False, i
    return True, -1


@dataclass(frozen=True)
class PivotalConstants:
    C0: int = 4
    D: int = 81
    eps: float = 0.01

    def check(self, min_D: Optional[int] = None):
        need = 20 * self.C0 + 1 if min_D is None else min_D
        if self.D < need:
            raise ConstantViolationError(f"D = {self.D} < {need} required for C0 = {self.C0}")


@dataclass
class PivotalStep:
    n: int
    P: tuple
    lgc: bool
    truncated_to: Optional[int]


@dataclass
class PivotalState:
    """Result of running the induction up to time ``n``."""

    constants: PivotalConstants
    steps: List[PivotalStep]
    markers: Dict[int, Tuple[np.ndarray, np.ndarray, np.ndarray]]
    endpoint: np.ndarray  # y_{n+1}^-

    @property
    def P(self) -> tuple:
        return self.steps[-1].P if self.steps else ()

    def chain_points(self, P: Optional[tuple] = None, endpoint: Optional[np.ndarray] = None):
        P = self.P if P is None else P
        pts = [EMPTY]
        for j, k in enumerate(P):
            ym, yk, _ = self.markers[k]
            if j > 0:
                pts.append(ym)
            pts.append(yk)
        pts.append(self.endpoint if endpoint is None else endpoint)
        return pts


def pivotal_times(a: Sequence, b: Sequence, u: Sequence, constants: PivotalConstants = PivotalConstants(),
                  min_D: Optional[int] = None, audit: bool = True) -> PivotalState:
    """Run the pivotal-time induction for ``n = len(a)`` Schottky steps.

    ``u`` must hold ``n + 1`` interleaving words ``u_0..u_n``. With ``audit``
    every intermediate state is checked: the set either grows by ``n`` or is
    an initial segment of the previous one, and the marker sequence
    ``o, y_{k_1}, y_{k_2}^-, y_{k_2}, ..., y_{n+1}^-`` is a
    ``(2C_0, D - 2C_0)``-chain.
    """
    constants.check(min_D)
    n_steps = len(a)
    if len(b) != n_steps or len(u) != n_steps + 1:
        raise ValueError("need len(a) == len(b) == len(u) - 1")
    C0, D = constants.C0, constants.D
    a = [arr(x) for x in a]
    b = [arr(x) for x in b]
    u = [arr(x) for x in u]
    markers: Dict[int, Tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
    steps: List[PivotalStep] = []
    P: tuple = ()
    y_minus = u[0]
    for n in range(1, n_steps + 1):
        y_n = mul(y_minus, a[n - 1])
        y_plus = mul(y_n, b[n - 1])
        y_next = mul(y_plus, u[n])
        markers[n] = (y_minus, y_n, y_plus)
        y_k = markers[P[-1]][1] if P else EMPTY
        lgc = (
            gp(y_k, y_n, y_minus) <= C0
            and gp(y_minus, y_plus, y_n) <= C0
            and gp(y_n, y_next, y_plus) <= C0
        )
        trunc = None
        if lgc:
            newP = P + (n,)
        else:
            newP = ()
            for m in reversed(P):
                _, ym, ymp = markers[m]
                if in_chain_shadow(ym, ymp, C0, y_next):
                    newP = tuple(k for k in P if k <= m)
                    trunc = m
                    break
        if audit:
            assert newP == P + (n,) or newP == P[: len(newP)], "pivotal set must grow by n or truncate"
        steps.append(PivotalStep(n, newP, lgc, trunc))
        P = newP
        y_minus = y_next
        if audit and P:
            state = PivotalState(constants, steps, markers, y_minus)
            ok, where = chain_ok(state.chain_points(), 2 * C0, D - 2 * C0)
            assert ok, f"marker sequence fails the chain audit at point {where} (n={n}, P={P})"
    return PivotalState(constants, steps, markers, y_minus)


# ---------------------------------------------------------------- pivoted classes

@dataclass
class PivotedClass:
    P: tuple
    A: Dict[int, tuple]
    members: Optional[list] = None
    collisions: Optional[int] = None
    product_structure: Optional[bool] = None
    symmetric: Optional[bool] = None

    def min_pivot_size(self) -> int:
        return min((len(self.A[i]) for i in self.P), default=0)


def _key(w) -> tuple:
    return tuple(int(x) for x in w)


def single_site_sets(S: Sequence, a_idx: Sequence[int], b: Sequence, u: Sequence,
                     constants: PivotalConstants, min_D: Optional[int] = None) -> Dict[int, tuple]:
    """``A_i`` from single replacements: letters ``a`` that keep the pivotal times."""
    S = [tuple(s) for s in S]
    base = pivotal_times([S[i] for i in a_idx], b, u, constants, min_D, audit=False).P
    out = {}
    for i in range(len(a_idx)):
        if i + 1 not in base:
            out[i + 1] = (a_idx[i],)
            continue
        keep = []
        for j in range(len(S)):
            trial = list(a_idx)
            trial[i] = j
            if pivotal_times([S[k] for k in trial], b, u, constants, min_D, audit=False).P == base:
                keep.append(j)
        out[i + 1] = tuple(keep)
    return out


def pivoted_class(S: Sequence, a_idx: Sequence[int], b: Sequence, u: Sequence,
                  constants: PivotalConstants, min_D: Optional[int] = None,
                  budget: int = 100_000, check_symmetry: int = 8) -> PivotedClass:
    """Full enumeration of the sequences pivoted from ``s̄``.

    Every choice of ``a`` at the pivotal times is tried; members are those with
    the same pivotal set. Reports endpoint collisions (injectivity), whether
    the class is the product of its ``A_i`` sets, and whether membership is
    symmetric on a few members.
    """
    S = [tuple(s) for s in S]
    state = pivotal_times([S[i] for i in a_idx], b, u, constants, min_D, audit=False)
    P = state.P
    total = len(S) ** len(P)
    if total > budget:
        raise EnumerationBudgetError(f"{total} sequences exceed the budget {budget}")

    def members_of(idx):
        Pn = pivotal_times([S[i] for i in idx], b, u, constants, min_D, audit=False).P
        out = []
        for combo in product(range(len(S)), repeat=len(Pn)):
            trial = list(idx)
            for k, j in zip(Pn, combo):
                trial[k - 1] = j
            st = pivotal_times([S[i] for i in trial], b, u, constants, min_D, audit=False)
            if st.P == Pn:
                out.append((tuple(trial), _key(st.endpoint)))
        return out

    mem = members_of(list(a_idx))
    ends = [e for _, e in mem]
    collisions = len(ends) - len(set(ends))
    A = {i + 1: tuple(sorted({m[0][i] for m in mem})) for i in range(len(a_idx))}
    prod_size = 1
    for k in P:
        prod_size *= len(A[k])
    symmetric = True
    seqs = [m[0] for m in mem]
    for other in seqs[:check_symmetry]:
        if tuple(a_idx) not in {m[0] for m in members_of(list(other))}:
            symmetric = False
            break
    return PivotedClass(P, A, seqs, collisions, prod_size == len(mem), symmetric)
