"""Harmonic measures on free-group boundaries and walks conditioned on a limit.

SRW and lazy SRW on ``F_m`` share the hitting measure
``ν(cyl(w)) = (1/2m)(2m-1)^(-(|w|-1))``; its Radon–Nikodym cocycle is
``dxν/dν(η) = (2m-1)^(-β_η(x))``. These closed forms are checked against a
first-step linear system before anything relies on them.

Boundary points are sampled by running walks until the depth-``T`` prefix
has stabilised: a walker must first reach length ``T + slack`` and then keep
length ``>= T + guard`` throughout a confirmation window (``guard`` is the
longest step). Leaving a sphere and
coming back ``slack`` levels has probability ``(2m-1)^-slack``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .batch import StackBatch, common_prefix_lengths
from .errors import DepthExhaustedError, SamplingError, UnsupportedSpecError
from .groups import BoundaryApprox, FreeGroup, ProductElement, ReducedWord, busemann, free_reduce
from .measures import MeasureSpec, ProductSpec, radial_params
from .rng import chunked_map, stream

KERNEL_TOL = 1e-9


# ---------------------------------------------------------------- exact measure

def exact_cylinder_mass(m: int, w) -> float:
    """Hitting-measure mass of the cylinder of ``w`` for SRW on ``F_m``."""
    k = len(w)
    if k == 0:
        return 1.0
    return 1.0 / (2 * m) * float(2 * m - 1) ** (-(k - 1))


def return_probability(m: int, tol: float = 1e-15) -> float:
    """Probability that SRW on ``F_m`` ever steps back to its parent (minimal root)."""
    r = 0.0
    for _ in range(100000):
        nxt = 1.0 / (2 * m) + (2 * m - 1) / (2 * m) * r * r
        if abs(nxt - r) < tol:
            return nxt
        r = nxt
    return r


def cylinder_mass_by_first_step(m: int, w) -> float:
    """Oracle for :func:`exact_cylinder_mass` from a first-step linear system.

    ``g_j`` is the hitting probability of ``cyl(w)`` started from the length-``j``
    prefix of ``w``; walkers that leave the path return with probability ``r``.
    """
    k = len(w)
    if k == 0:
        return 1.0
    r = return_probability(m) if m > 1 else 1.0
    A = np.zeros((k + 1, k + 1))
    b = np.zeros(k + 1)
    s = 1.0 / (2 * m)
    A[0, 0] = 1 - s * (2 * m - 1) * r
    if k >= 1:
        A[0, 1] = -s
    for j in range(1, k):
        A[j, j] = 1 - s * (2 * m - 2) * r
        A[j, j + 1] -= s
        A[j, j - 1] -= s
    A[k, k] = 1.0
    A[k, k - 1] = -r
    b[k] = 1 - r
    return float(np.linalg.solve(A, b)[0])


@dataclass(frozen=True)
class RNDerivativeValue:
    x: ReducedWord
    eta: BoundaryApprox
    exact: Fraction

    @property
    def value(self) -> float:
        return float(self.exact)


def rn_derivative(m: int, x: ReducedWord, eta: BoundaryApprox) -> RNDerivativeValue:
    """``dxν/dν(η) = (2m-1)^(-β_η(x))``, exact as a fraction."""
    if x.group.rank != m or eta.group.rank != m:
        from .errors import SpecMismatchError

        raise SpecMismatchError("rank mismatch in rn_derivative")
    beta = busemann(x, eta)
    return RNDerivativeValue(x, eta, Fraction(2 * m - 1) ** (-beta))


def rn_by_cylinders(m: int, x: ReducedWord, eta: BoundaryApprox, k: int) -> float:
    """``ν(x⁻¹·cyl(η_k)) / ν(cyl(η_k))`` for a depth ``k`` with ``k > (x|η)``."""
    pre = eta.letters[:k]
    moved = free_reduce(tuple(-a for a in reversed(x.letters)) + pre)
    return exact_cylinder_mass(m, moved) / exact_cylinder_mass(m, pre)


# ---------------------------------------------------------------- boundary sampling

def _stabilise(step, batches, T: int, slack: int, window: int, max_steps: int, coords=None, guard: int = 1):
    """Drive ``step(active_idx)`` until every walker's depth-``T`` prefix is certain.

    ``batches`` are StackBatch objects updated in place by ``step``; ``coords``
    selects which ones must stabilise. A step can dip ``guard`` letters below
    its end length, so the prefix counts as untouched while lengths stay
    ``>= T + guard``. Returns the frozen prefixes.
    """
    coords = list(range(len(batches))) if coords is None else coords
    size = len(batches[0])
    out = [np.zeros((size, T), dtype=np.int8) for _ in coords]
    reached = np.full(size, -1, dtype=np.int64)  # step at which T + slack was reached
    active = np.arange(size)
    t = 0
    while len(active):
        if t >= max_steps:
            raise SamplingError(f"{len(active)} walkers did not stabilise within {max_steps} steps")
        step(active)
        t += 1
        lens = np.stack([batches[c].length[active] for c in coords])
        low = lens.min(axis=0)
        fell = (reached[active] >= 0) & (low < T + guard)
        reached[active[fell]] = -1
        start = (reached[active] < 0) & (low >= T + slack)
        reached[active[start]] = t
        done = (reached[active] >= 0) & (t - reached[active] >= window)
        if done.any():
            rows = active[done]
            for o, c in zip(out, coords):
                o[rows] = batches[c].buf[rows, :T]
            active = active[~done]
    return out


def boundary_sample_batch(spec: MeasureSpec, T: int, size: int, rng: np.random.Generator,
                          slack: int = 20, window: int = 20, max_steps: Optional[int] = None):
    """Depth-``T`` prefixes of ``size`` independent boundary limits (one array per coordinate)."""
    if T < 1:
        raise ValueError("depth must be positive")
    tables = spec.factor_tables if spec.is_product else (spec.table,)
    groups = spec.groups
    batches = [StackBatch(size, g.rank, 2 * (T + slack) + 16) for g in groups]
    max_steps = max_steps or 200 * (T + slack + window) + 2000

    def step(active):
        idx = spec.sample_indices(rng, len(active))
        idx = idx if spec.is_product else (idx,)
        for b, table, ix in zip(batches, tables, idx):
            b.apply_words(table, ix, active)

    guard = max(t.shape[1] for t in tables)
    return _stabilise(step, batches, T, max(slack, guard + 1), window, max_steps, guard=guard)


def boundary_sample(spec: MeasureSpec, T: int, seed: int, **kw):
    """A single boundary approximation (a pair for product measures)."""
    prefixes = boundary_sample_batch(spec, T, 1, stream(seed), **kw)
    pts = tuple(BoundaryApprox.from_letters(g, p[0]) for g, p in zip(spec.groups, prefixes))
    return pts if spec.is_product else pts[0]


def boundary_samples(spec: MeasureSpec, T: int, n: int, seed: int, chunk: int = 8192, **kw):
    """``n`` boundary prefixes drawn in reproducible chunks."""
    parts = chunked_map(lambda rng, size, _: boundary_sample_batch(spec, T, size, rng, **kw), n, seed, chunk)
    return tuple(np.concatenate([p[c] for p in parts]) for c in range(len(parts[0])))


# ---------------------------------------------------------------- conditioned walk

@dataclass(frozen=True)
class DoobWalkSpec:
    """The walk ``π`` conditioned on its second coordinate converging to ``eta``."""

    base: ProductSpec
    eta: BoundaryApprox

    def __post_init__(self):
        if not self.base.is_product:
            raise UnsupportedSpecError("conditioning needs a product measure")
        second = self.base.marginals()[1]
        radial_params(second)  # closed-form RN derivative exists only for radial marginals
        if second.group != self.eta.group:
            from .errors import SpecMismatchError

            raise SpecMismatchError("eta lives in the wrong group")

    @property
    def depth(self) -> int:
        return self.eta.depth

    @property
    def rank(self) -> int:
        return self.eta.group.rank

    def atoms(self):
        """Joint atoms: index into first table, second-coordinate letter, weight."""
        t1, _ = self.base.factor_tables
        rows = {tuple(int(a) for a in r if a != 0): i for i, r in enumerate(t1)}
        first, second, weights = [], [], []
        for (a, b), w in self.base.support():
            if len(b) > 1:
                raise UnsupportedSpecError("second marginal must be nearest-neighbour")
            first.append(rows[a])
            second.append(b[0] if b else 0)
            weights.append(w)
        return np.array(first), np.array(second, dtype=np.int8), weights

    def kernel_table(self):
        """Row ``f`` holds the conditioned step law when ``x*⁻¹η`` starts with letter ``f``."""
        first, second, weights = self.atoms()
        m = self.rank
        letters = FreeGroup(m).letters
        q = Fraction(2 * m - 1)
        table = {}
        for f in letters:
            row = []
            for s, w in zip(second, weights):
                factor = 1 if s == 0 else (q if s == f else 1 / q)
                row.append(w * factor)
            total = sum(row)
            if abs(float(total) - 1.0) > KERNEL_TOL:
                raise AssertionError(f"conditioned kernel sums to {float(total)} for first letter {f}")
            table[f] = row
        return first, second, table


def first_letter_of_translate(x_letters: np.ndarray, x_len: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """First letter of ``x⁻¹η`` for rows of a StackBatch buffer."""
    depth = len(eta)
    cp = common_prefix_lengths(x_letters[:, :depth], eta)
    on_path = cp >= x_len
    if np.any(on_path & (x_len >= depth)):
        raise DepthExhaustedError(f"conditioned walk reached depth {depth}; use a deeper eta")
    rows = np.arange(len(x_len))
    last = x_letters[rows, np.maximum(x_len - 1, 0)]
    ahead = eta[np.minimum(x_len, depth - 1)]
    return np.where(on_path, ahead, -last).astype(np.int8)


def doob_kernel(spec: DoobWalkSpec, state: ProductElement) -> dict:
    """Exact transition law from ``state`` as ``{step (pair of tuples): weight}``."""
    x = state.second
    cp = 0
    while cp < min(len(x), spec.depth) and x.letters[cp] == spec.eta.letters[cp]:
        cp += 1
    if cp == len(x):
        if len(x) >= spec.depth:
            raise DepthExhaustedError("state beyond eta depth")
        f = spec.eta.letters[len(x)]
    else:
        f = -x.letters[-1]
    q = Fraction(2 * spec.rank - 1)
    out = {}
    for (a, b), w in spec.base.support():
        s = b[0] if b else 0
        factor = 1 if s == 0 else (q if s == f else 1 / q)
        out[(a, b)] = out.get((a, b), 0) + w * factor
    return out


def doob_path_probability(spec: DoobWalkSpec, steps) -> Fraction:
    """Probability of a step sequence under the conditioned chain."""
    g1, g2 = spec.base.groups
    pos = ProductElement(g1.identity(), g2.identity())
    p = Fraction(1)
    for a, b in steps:
        p *= doob_kernel(spec, pos).get((a, b), 0)
        pos = pos * ProductElement(ReducedWord.from_letters(a, g1), ReducedWord.from_letters(b, g2))
    return p


class _DoobBatch:
    def __init__(self, spec: DoobWalkSpec, size: int, capacity: int):
        self.spec = spec
        self.first_idx, self.second_letter, table = spec.kernel_table()
        letters = FreeGroup(spec.rank).letters
        self.row_of = np.zeros(2 * spec.rank + 1, dtype=np.int64)
        cum = []
        for i, f in enumerate(letters):
            self.row_of[f + spec.rank] = i
            c = np.cumsum([float(w) for w in table[f]])
            cum.append(c / c[-1])
        self.cum = np.array(cum)
        self.t1 = spec.base.factor_tables[0]
        self.eta = np.array(spec.eta.letters, dtype=np.int8)
        g1, g2 = spec.base.groups
        self.b1 = StackBatch(size, g1.rank, capacity)
        self.b2 = StackBatch(size, g2.rank, capacity)

    def step(self, active, rng):
        b2 = self.b2
        if b2.buf.shape[1] < len(self.eta):
            b2._ensure(len(self.eta))
        f = first_letter_of_translate(b2.buf[active, : len(self.eta)], b2.length[active], self.eta)
        rows = self.row_of[f.astype(np.int64) + self.spec.rank]
        u = rng.random(len(active))
        j = (self.cum[rows] < u[:, None]).sum(axis=1)
        j = np.minimum(j, self.cum.shape[1] - 1)
        self.b1.apply_words(self.t1, self.first_idx[j], active)
        b2.apply(self.second_letter[j], active)


def doob_trajectory(spec: DoobWalkSpec, n: int, seed: int):
    """One conditioned trajectory of ``n`` steps."""
    from .walks import Trajectory

    rng = stream(seed)
    batch = _DoobBatch(spec, 1, max(16, 2 * n + 8))
    g1, g2 = spec.base.groups
    pos = [ProductElement(g1.identity(), g2.identity())]
    steps = []
    active = np.array([0])
    for _ in range(n):
        batch.step(active, rng)
        new = ProductElement(batch.b1.word(0), batch.b2.word(0))
        steps.append(pos[-1].inverse() * new)
        pos.append(new)
    return Trajectory(tuple(steps), tuple(pos), int(seed))


def doob_boundary_batch(spec: DoobWalkSpec, T: int, size: int, rng: np.random.Generator,
                        slack: int = 20, window: int = 20, max_steps: Optional[int] = None) -> np.ndarray:
    """Depth-``T`` prefixes of the first-coordinate limits of conditioned walkers."""
    batch = _DoobBatch(spec, size, 2 * (T + slack) + 16)
    max_steps = max_steps or 200 * (T + slack + window) + 2000
    guard = batch.t1.shape[1]
    return _stabilise(lambda act: batch.step(act, rng), [batch.b1, batch.b2], T, max(slack, guard + 1), window,
                      max_steps, coords=[0], guard=guard)[0]


def doob_boundary_samples(spec: DoobWalkSpec, T: int, n: int, seed: int, chunk: int = 8192, **kw) -> np.ndarray:
    parts = chunked_map(lambda rng, size, _: doob_boundary_batch(spec, T, size, rng, **kw), n, seed, chunk)
    return np.concatenate(parts)
