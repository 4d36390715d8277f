"""Trajectories, drift and entropy of random walks on ``Γ`` and ``Γ × Γ*``.

Exact quantities come from the radial birth-death recursion (SRW and lazy
SRW depend on a word only through its length). Monte Carlo estimators run
many walkers at once on :class:`~dimcons.batch.StackBatch`.

For the noise mixture the joint law ``π_n`` has no radial reduction, so
``π_n(w̄_n)`` is estimated by a particle filter that runs bridges from the
identity to ``w̄_n``. Its proposal uses the product of the two exact
single-coordinate bridge probabilities as a look-ahead; the estimator is
unbiased for ``π_n(w̄_n)`` and exact when the coordinates are independent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .batch import StackBatch
from .errors import UnsupportedSpecError
from .groups import ProductElement, ReducedWord, free_reduce
from .measures import (
    DiagonalPush,
    MeasureSpec,
    NoiseMixture,
    ProductMeasure,
    ProductSpec,
    SingleMeasure,
    radial_params,
)
from .rng import chunked_map, stream

NEG_INF = -np.inf


# ---------------------------------------------------------------- sampling

@dataclass(frozen=True)
class Trajectory:
    steps: tuple
    positions: tuple
    seed: int

    def __len__(self):
        return len(self.steps)


def sample_trajectory(spec: MeasureSpec, n: int, seed: int) -> Trajectory:
    """One walk of ``n`` steps from the identity, fully determined by ``seed``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    rng = stream(seed)
    if spec.is_product:
        g1, g2 = spec.groups
        t1, t2 = spec.factor_tables
        i, j = spec.sample_indices(rng, n)
        steps = [
            ProductElement(ReducedWord.from_letters(t1[a], g1), ReducedWord.from_letters(t2[b], g2))
            for a, b in zip(i, j)
        ]
        pos = [ProductElement(g1.identity(), g2.identity())]
    else:
        g = spec.group
        i = spec.sample_indices(rng, n)
        steps = [ReducedWord.from_letters(spec.table[a], g) for a in i]
        pos = [g.identity()]
    for s in steps:
        pos.append(pos[-1] * s)
    return Trajectory(tuple(steps), tuple(pos), int(seed))


def _tables(spec: MeasureSpec):
    return spec.factor_tables if spec.is_product else (spec.table,)


def _indices(spec: MeasureSpec, rng, size):
    out = spec.sample_indices(rng, size)
    return out if spec.is_product else (out,)


def simulate_positions(spec: MeasureSpec, n: int, size: int, rng: np.random.Generator, block: int = 512):
    """Endpoints ``w̄_n`` of ``size`` independent walks, one batch per coordinate."""
    tables = _tables(spec)
    groups = spec.groups
    cap = max(16, min(n * max(t.shape[1] for t in tables), 4096) + 8)
    batches = [StackBatch(size, g.rank, cap) for g in groups]
    done = 0
    while done < n:
        b = min(block, n - done)
        idx = _indices(spec, rng, size * b)
        idx = [ix.reshape(b, size) for ix in idx]
        for t in range(b):
            for batch, table, ix in zip(batches, tables, idx):
                batch.apply_words(table, ix[t])
        done += b
    return batches


# ---------------------------------------------------------------- drift

@dataclass(frozen=True)
class DriftReport:
    n: int
    trials: int
    estimates: tuple
    stderrs: tuple

    @property
    def estimate(self) -> float:
        return self.estimates[0]

    @property
    def stderr(self) -> float:
        return self.stderrs[0]


def drift_estimate(spec: MeasureSpec, n: int, trials: int, seed: int, chunk: int = 64) -> DriftReport:
    """Mean of ``|z_n| / n`` over independent walks, per coordinate."""
    if n < 1 or trials < 1:
        raise ValueError("n and trials must be positive")

    def work(rng, size, _):
        return np.stack([b.length / n for b in simulate_positions(spec, n, size, rng)])

    vals = np.concatenate(chunked_map(work, trials, seed, chunk), axis=1)
    est = tuple(float(v) for v in vals.mean(axis=1))
    se = tuple(float(v.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0 for v in vals)
    return DriftReport(n, trials, est, se)


# ---------------------------------------------------------------- radial

def log_sphere_size(rank: int, k) -> np.ndarray:
    """``log N(k)`` with ``N(k) = 2m(2m-1)^(k-1)`` and ``N(0) = 1``."""
    k = np.asarray(k, dtype=float)
    with np.errstate(invalid="ignore"):
        out = math.log(2 * rank) + (k - 1) * math.log(2 * rank - 1)
    return np.where(k == 0, 0.0, out)


def _radial_steps(rank: int, hold: float):
    m2 = 2 * rank
    lh = math.log(hold) if hold > 0 else NEG_INF
    out0 = math.log1p(-hold)
    out = math.log1p(-hold) + math.log((m2 - 1) / m2)
    inn = math.log1p(-hold) - math.log(m2)
    return lh, out0, out, inn


def iter_radial_logs(rank: int, hold: float, n_max: int):
    """Yield ``log p(n, ·)`` (length ``n+1``) for ``n = 0..n_max``."""
    lh, out0, out, inn = _radial_steps(rank, hold)
    cur = np.array([0.0])
    yield cur
    for n in range(1, n_max + 1):
        nxt = np.full(n + 1, NEG_INF)
        stay = cur + lh
        nxt[: n] = stay
        moved_out = cur + out
        moved_out[0] = cur[0] + out0
        nxt[1:] = np.logaddexp(nxt[1:], moved_out)
        if n >= 2:
            nxt[: n - 1] = np.logaddexp(nxt[: n - 1], cur[1:] + inn)
        cur = nxt
        yield cur


def radial_log_table(rank: int, hold: float, n_max: int, width: Optional[int] = None) -> np.ndarray:
    """Matrix ``L[n, k] = log p(n, k)``, padded with ``-inf``."""
    width = n_max + 2 if width is None else width
    out = np.full((n_max + 1, width), NEG_INF)
    for n, row in enumerate(iter_radial_logs(rank, hold, n_max)):
        out[n, : min(width, n + 1)] = row[:width]
    return out


@dataclass(frozen=True)
class RadialProfile:
    n: int
    log_masses: np.ndarray

    @property
    def masses(self) -> np.ndarray:
        return np.exp(self.log_masses)


def radial_profile(spec: SingleMeasure, n: int) -> RadialProfile:
    """Exact law of ``|w_n|`` for SRW and lazy SRW."""
    rank, hold = radial_params(spec)
    last = None
    for last in iter_radial_logs(rank, hold, n):
        pass
    return RadialProfile(n, last)


def _entropy_from_logs(rank: int, logs: np.ndarray) -> float:
    ok = np.isfinite(logs)
    lp = logs[ok]
    k = np.nonzero(ok)[0]
    return -math.fsum(np.exp(lp) * (lp - log_sphere_size(rank, k)))


def radial_entropies(rank: int, hold: float, n_max: int) -> np.ndarray:
    """``H(μ_n)`` for ``n = 0..n_max``."""
    return np.array([_entropy_from_logs(rank, row) for row in iter_radial_logs(rank, hold, n_max)])


# ---------------------------------------------------------------- exact small-n joint law

def exact_joint_law(spec: MeasureSpec, n: int, max_support: int = 2_000_000) -> dict:
    """Law of ``w̄_n`` by repeated convolution (oracle for small ``n``)."""
    support = spec.support()
    law = {((), ()) if spec.is_product else (): 1.0}
    for _ in range(n):
        nxt = {}
        for pos, p in law.items():
            for step, q in support:
                if spec.is_product:
                    key = (free_reduce(pos[0] + step[0]), free_reduce(pos[1] + step[1]))
                else:
                    key = free_reduce(pos + step)
                nxt[key] = nxt.get(key, 0.0) + p * q
        if len(nxt) > max_support:
            from .errors import EnumerationBudgetError

            raise EnumerationBudgetError(f"support exceeds {max_support} at n={n}")
        law = nxt
    return law


def shannon(probs) -> float:
    p = np.asarray([float(x) for x in probs])
    p = p[p > 0]
    return -math.fsum(p * np.log(p))


# ---------------------------------------------------------------- noise-mixture bridge filter

def _mixture_atoms(spec: NoiseMixture):
    letters1, letters2, logw = [], [], []
    for (a, b), w in spec.support():
        letters1.append(a[0] if a else 0)
        letters2.append(b[0] if b else 0)
        logw.append(math.log(float(w)))
    return np.array(letters1, dtype=np.int8), np.array(letters2, dtype=np.int8), np.array(logw)


def _reversed_batch(batch: StackBatch, rows: np.ndarray, rank: int) -> StackBatch:
    words = []
    for r in rows:
        L = int(batch.length[r])
        words.append(tuple(int(x) for x in batch.buf[r, :L][::-1]))
    return StackBatch.from_words(words, rank)


def mixture_log_prob(spec: NoiseMixture, first: StackBatch, second: StackBatch, n: int,
                     particles: int, rng: np.random.Generator, log_b: np.ndarray = None) -> np.ndarray:
    """Particle estimates of ``log π_n(x, y)`` for every row of the two batches."""
    rank, hold = radial_params(spec.base)
    T, P = len(first), particles
    if log_b is None:
        log_b = bridge_log_table(rank, hold, n)
    l1, l2, lw = _mixture_atoms(spec)
    rows = np.repeat(np.arange(T), P)
    R1 = _reversed_batch(first, rows, rank)
    R2 = _reversed_batch(second, rows, rank)
    total = log_b[n, first.length] + log_b[n, second.length]
    offsets = np.arange(T)[:, None]
    for r in range(n, 0, -1):
        d1, d2 = R1.length, R2.length
        t1, t2 = R1.top(), R2.top()
        nd1 = np.where(l1[None, :] == 0, d1[:, None], np.where(t1[:, None] == l1[None, :], d1[:, None] - 1, d1[:, None] + 1))
        nd2 = np.where(l2[None, :] == 0, d2[:, None], np.where(t2[:, None] == l2[None, :], d2[:, None] - 1, d2[:, None] + 1))
        logw = lw[None, :] + log_b[r - 1, nd1] + log_b[r - 1, nd2]
        logz = logsumexp(logw, axis=1)
        logg = (logz - log_b[r, d1] - log_b[r, d2]).reshape(T, P)
        total = total + logsumexp(logg, axis=1) - math.log(P)
        # resample by the look-ahead weight, then move with the adapted proposal
        g = np.exp(logg - logg.max(axis=1, keepdims=True))
        cum = np.cumsum(g, axis=1)
        cum = cum / cum[:, -1:] + offsets
        u = (rng.random((T, 1)) + np.arange(P)[None, :]) / P + offsets
        pick = np.minimum(np.searchsorted(cum.ravel(), u.ravel()), T * P - 1)
        pick = np.maximum(pick, offsets.repeat(P, axis=1).ravel() * P)
        R1, R2 = R1.take(pick), R2.take(pick)
        logw = logw[pick]
        logz = logz[pick]
        pr = np.exp(logw - logz[:, None])
        j = (np.cumsum(pr, axis=1) < rng.random((T * P, 1))).sum(axis=1)
        j = np.minimum(j, len(lw) - 1)
        R1.apply(-l1[j])
        R2.apply(-l2[j])
    return total


def bridge_log_table(rank: int, hold: float, n: int) -> np.ndarray:
    """``log b_r(d)``: log-probability that ``r`` steps hit one given word of length ``d``."""
    L = radial_log_table(rank, hold, n, width=n + 3)
    return L - log_sphere_size(rank, np.arange(n + 3))[None, :]


def mixture_entropy_samples(spec: NoiseMixture, n: int, trials: int, seed: int,
                            particles: int = 128, chunk: int = 64) -> np.ndarray:
    """Samples of ``-log π̂_n(w̄_n)`` for independent ``w̄_n``."""
    rank, hold = radial_params(spec.base)
    log_b = bridge_log_table(rank, hold, n)

    def work(rng, size, _):
        b1, b2 = simulate_positions(spec, n, size, rng)
        return -mixture_log_prob(spec, b1, b2, n, particles, rng, log_b)

    return np.concatenate(chunked_map(work, trials, seed, chunk))


# ---------------------------------------------------------------- entropy

@dataclass(frozen=True)
class EntropyReport:
    method: str
    n: int
    estimate: float
    stderr: Optional[float] = None
    diagnostics: dict = field(default_factory=dict)


def _radial_parts(spec: MeasureSpec):
    """Radial factors whose entropies add up to ``H(π_n)``, or ``None``."""
    try:
        if not spec.is_product:
            return [radial_params(spec)]
        if isinstance(spec, ProductMeasure):
            return [radial_params(spec.first), radial_params(spec.second)]
        if isinstance(spec, DiagonalPush):
            return [radial_params(spec.base)]
        if isinstance(spec, NoiseMixture):
            if spec.rho == 0:
                return [radial_params(spec.base)]
            if spec.rho == 1:
                return [radial_params(spec.base)] * 2
    except UnsupportedSpecError:
        return None
    return None


def exact_entropy(spec: MeasureSpec, n: int) -> Optional[float]:
    """``H(π_n)`` when the law reduces to radial factors, else ``None``."""
    parts = _radial_parts(spec)
    if parts is None:
        return None
    total = 0.0
    for rank, hold in parts:
        last = None
        for last in iter_radial_logs(rank, hold, n):
            pass
        total += _entropy_from_logs(rank, last)
    return total


def _is_point_mass(spec: MeasureSpec) -> bool:
    return len(spec.support()) == 1


def entropy_rate(spec: MeasureSpec, method: str = "exact-radial", n: int = 2500, trials: int = 200,
                 seed: int = 0, particles: int = 128) -> EntropyReport:
    """Estimate the asymptotic entropy ``h``.

    ``exact-radial``
        ``H(π_{n+1}) - H(π_n)`` from the radial recursion.
    ``mc-plugin``
        mean of ``-log π_n(w̄_n) / n`` over sampled endpoints.
    ``mc-increment``
        ``(Ĥ(π_{2n}) - Ĥ(π_n)) / n`` from two plug-in runs; removes most of the
        ``O(log n / n)`` bias of ``mc-plugin``.
    """
    if _is_point_mass(spec):
        return EntropyReport(method, n, 0.0, 0.0 if method != "exact-radial" else None)
    if method == "exact-radial":
        parts = _radial_parts(spec)
        if parts is None:
            raise UnsupportedSpecError(f"exact-radial needs radial factors, got {type(spec).__name__}")
        est = 0.0
        for rank, hold in parts:
            H = radial_entropies(rank, hold, n + 1)
            est += H[n + 1] - H[n]
        return EntropyReport(method, n, max(0.0, float(est)))
    if method == "mc-plugin":
        s = _plugin_samples(spec, n, trials, seed, particles)
        return EntropyReport(method, n, max(0.0, float(s.mean() / n)), float(s.std(ddof=1) / n / math.sqrt(len(s))),
                             {"trials": trials})
    if method == "mc-increment":
        a = _plugin_samples(spec, n, trials, seed, particles)
        b = _plugin_samples(spec, 2 * n, trials, seed + 1, particles)
        est = (b.mean() - a.mean()) / n
        se = math.sqrt(a.var(ddof=1) / len(a) + b.var(ddof=1) / len(b)) / n
        return EntropyReport(method, n, max(0.0, float(est)), float(se),
                             {"H_n": float(a.mean()), "H_2n": float(b.mean()), "trials": trials})
    raise UnsupportedSpecError(f"unknown entropy method {method!r}")


def _plugin_samples(spec: MeasureSpec, n: int, trials: int, seed: int, particles: int) -> np.ndarray:
    """Samples of ``-log π_n(w̄_n)``."""
    if isinstance(spec, NoiseMixture) and 0 < spec.rho < 1:
        return mixture_entropy_samples(spec, n, trials, seed, particles)
    parts = _radial_parts(spec)
    if parts is None:
        raise UnsupportedSpecError(f"mc-plugin cannot evaluate π_n for {type(spec).__name__}")
    if spec.is_product and isinstance(spec, (DiagonalPush, NoiseMixture)):
        coords = [0] * len(parts) if isinstance(spec, DiagonalPush) or spec.rho == 0 else [0, 1]
    else:
        coords = list(range(len(parts)))
    logs = [None] * len(parts)
    for i, (rank, hold) in enumerate(parts):
        logs[i] = radial_log_table(rank, hold, n, width=n + 2)[n] - log_sphere_size(rank, np.arange(n + 2))

    def work(rng, size, _):
        batches = simulate_positions(spec, n, size, rng)
        return -sum(logs[i][batches[c].length] for i, c in enumerate(coords))

    return np.concatenate(chunked_map(work, trials, seed, 64))


# ---------------------------------------------------------------- conditional entropy

@dataclass(frozen=True)
class ConditionalEntropyReport:
    n: int
    estimate: float
    stderr: float
    method: str
    joint: float
    second: float


def conditional_entropy_estimate(spec: ProductSpec, n: int, trials: int = 400, seed: int = 0,
                                 particles: int = 128) -> ConditionalEntropyReport:
    """``H(w_n | w*_n) / n = (H(w̄_n) - H(w*_n)) / n``."""
    if not spec.is_product:
        raise UnsupportedSpecError("conditional entropy needs a product measure")
    second = exact_entropy(spec.marginals()[1], n)
    joint = exact_entropy(spec, n)
    if joint is not None and second is not None:
        est = max(0.0, (joint - second) / n)
        return ConditionalEntropyReport(n, est, 0.0, "exact-radial", joint, second)
    if isinstance(spec, NoiseMixture) and second is not None:
        s = mixture_entropy_samples(spec, n, trials, seed, particles)
        joint = float(s.mean())
        se = float(s.std(ddof=1) / math.sqrt(len(s)) / n)
        return ConditionalEntropyReport(n, max(0.0, (joint - second) / n), se, "particle-plugin", joint, second)
    law = exact_joint_law(spec, n)
    marg = {}
    for (a, b), p in law.items():
        marg[b] = marg.get(b, 0.0) + p
    joint, second = shannon(law.values()), shannon(marg.values())
    return ConditionalEntropyReport(n, max(0.0, (joint - second) / n), 0.0, "exact-enumeration", joint, second)
