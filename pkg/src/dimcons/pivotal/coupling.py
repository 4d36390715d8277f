"""Block coupling of a product walk with a Schottky-driven walk, and the entropy-gap bound.

The step law is split as ``π = α·λ×λ* + (1-α)·π_0``. With a certified Schottky
set ``S ⊂ supp λ^{*M}`` and ``N = 2M`` steps per block, a block is a *Schottky
block* (flag ``ε = 1``) with probability ``α^N β``; its first coordinate is
then ``s = a·b`` with ``a, b`` uniform on ``S``. The remaining blocks make up
the interleaving words ``u_j``. The number of pivotal times among the Schottky
letters seen by time ``n`` gives the lower bound ``κ log((1 - 2ε) #S)`` on
``h(π) - h*``.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from ..errors import UnsupportedSpecError
from ..groups import free_reduce
from ..measures import NoiseMixture, ProductMeasure, ProductSpec, SingleMeasure
from ..rng import chunked_map
from .schottky import SchottkyCertificate, search_schottky
from .times import EMPTY, PivotalConstants, arr, mul, pivotal_times


def decompose(spec: ProductSpec):
    """``(α, λ)`` with ``π = α·λ×λ* + (1-α)·π_0``; first coordinates are ``μ``-distributed either way."""
    if isinstance(spec, ProductMeasure):
        return 1.0, spec.first
    if isinstance(spec, NoiseMixture):
        if spec.rho == 0:
            raise UnsupportedSpecError("ρ = 0 has no independent component")
        return float(spec.rho), spec.base
    raise UnsupportedSpecError(f"no product decomposition known for {type(spec).__name__}")


def convolution_power(lam: SingleMeasure, M: int, budget: int = 2_000_000) -> Dict[tuple, float]:
    """Exact ``λ^{*M}`` as a dict of reduced words."""
    words, weights = lam.atoms()
    if len(words) ** M > budget:
        raise UnsupportedSpecError(f"λ^*{M} has too many terms to enumerate")
    law = {(): 1.0}
    for _ in range(M):
        nxt: Dict[tuple, float] = {}
        for w, p in law.items():
            for v, q in zip(words, weights):
                key = free_reduce(w + tuple(v))
                nxt[key] = nxt.get(key, 0.0) + p * float(q)
        law = nxt
    return law


def schottky_beta(lam: SingleMeasure, cert: SchottkyCertificate) -> float:
    """Largest ``β`` with ``β·λ_S^{*2} ≤ λ^{*2M}``, from ``λ^{*M}(s) ≥ min_S λ^{*M}``."""
    M = cert.evidence.get("M", 1)
    law = convolution_power(lam, M)
    low = min(law.get(tuple(s), 0.0) for s in cert.S)
    return min(1.0, (len(cert.S) * low) ** 2)


class _Residual:
    """Sampler for ``λ_0 = (λ^{*N} - β λ_S^{*2}) / (1 - β)`` by rejection."""

    def __init__(self, lam: SingleMeasure, S: Sequence[tuple], beta: float, N: int):
        self.words = [arr(w) for w in lam.atoms()[0]]
        self.probs = np.asarray([float(p) for p in lam.atoms()[1]])
        self.beta = beta
        self.N = N
        self.full = convolution_power(lam, N)
        pairs = Counter(free_reduce(tuple(a) + tuple(b)) for a in S for b in S)
        self.schottky = {k: v / len(S) ** 2 for k, v in pairs.items()}

    def sample(self, rng) -> np.ndarray:
        while True:
            idx = rng.choice(len(self.words), size=self.N, p=self.probs)
            g = EMPTY
            for i in idx:
                g = mul(g, self.words[i])
            key = tuple(int(x) for x in g)
            accept = 1 - self.beta * self.schottky.get(key, 0.0) / self.full[key]
            if rng.random() < accept:
                return g


@dataclass
class CouplingSetup:
    alpha: float
    beta: float
    M: int
    certificate: SchottkyCertificate
    constants: PivotalConstants

    @property
    def N(self) -> int:
        return 2 * self.M

    @property
    def flag_probability(self) -> float:
        return self.alpha ** self.N * self.beta


def setup_coupling(spec: ProductSpec, constants: PivotalConstants = PivotalConstants(), max_M: int = 8,
                   seed: int = 0, certificate: Optional[SchottkyCertificate] = None) -> CouplingSetup:
    """Decompose ``π``, find a Schottky set in ``supp λ^{*M}`` and compute ``β``."""
    alpha, lam = decompose(spec)
    if certificate is None:
        words, weights = lam.atoms()
        certificate = search_schottky(words, [float(w) for w in weights], constants.eps, constants.C0,
                                      constants.D, lam.group.rank, max_M, seed)
    M = certificate.evidence.get("M", 1)
    beta = schottky_beta(lam, certificate)
    if beta <= 0:
        raise UnsupportedSpecError("Schottky set is not inside supp λ^*M")
    return CouplingSetup(alpha, beta, M, certificate, constants)


def coupled_trace(spec: ProductSpec, setup: CouplingSetup, n: int, rng: np.random.Generator,
                  audit: bool = False, residual: Optional[_Residual] = None):
    """One realisation up to walk time ``n``: returns ``(τ(n), #P_{τ(n)}, min #A_i proxy)``.

    Only first coordinates enter the pivotal construction, so second
    coordinates are not simulated.
    """
    _, lam = decompose(spec)
    words = [arr(w) for w in lam.atoms()[0]]
    probs = np.asarray([float(p) for p in lam.atoms()[1]])
    S = [arr(s) for s in setup.certificate.S]
    N = setup.N
    blocks = n // N
    flags = rng.random(blocks) < setup.flag_probability
    p_plain = (1 - setup.alpha ** N) / (1 - setup.flag_probability) if setup.flag_probability < 1 else 1.0
    a_seq, b_seq, u_seq = [], [], []
    u = EMPTY
    for f in flags:
        if f:
            i, j = rng.integers(len(S), size=2)
            a_seq.append(S[i])
            b_seq.append(S[j])
            u_seq.append(u)
            u = EMPTY
        elif residual is not None and rng.random() >= p_plain:
            u = mul(u, residual.sample(rng))
        else:
            for k in rng.choice(len(words), size=N, p=probs):
                u = mul(u, words[k])
    for k in rng.choice(len(words), size=n - blocks * N, p=probs):
        u = mul(u, words[k])
    u_seq.append(u)
    state = pivotal_times(a_seq, b_seq, u_seq, setup.constants, audit=audit)
    return len(a_seq), len(state.P)


@dataclass
class PivotalReport:
    ns: list
    trials: int
    tau: Dict[int, np.ndarray]
    pivots: Dict[int, np.ndarray]
    kappa_hat: float
    tail_frequency: Dict[int, float]
    gap_bound: float
    setup: CouplingSetup
    extra: dict = field(default_factory=dict)

    def curve(self) -> list:
        """``(n, mean #P/n, stderr, mean τ/n)`` rows."""
        rows = []
        for n in self.ns:
            p = self.pivots[n] / n
            rows.append((n, float(p.mean()), float(p.std(ddof=1) / math.sqrt(len(p))) if len(p) > 1 else 0.0,
                         float(self.tau[n].mean() / n)))
        return rows


def pivotal_stats_and_entropy_gap(spec: ProductSpec, ns: Sequence[int] = (200, 400, 800), trials: int = 2000,
                                  seed: int = 0, constants: PivotalConstants = PivotalConstants(),
                                  kappa_fraction: float = 0.75, audit_trials: int = 0,
                                  setup: Optional[CouplingSetup] = None) -> PivotalReport:
    """Empirical law of ``#P_{τ(n)}`` and the implied entropy-gap lower bound.

    ``κ̂`` is ``kappa_fraction`` times the mean of ``#P_{τ(n)}/n`` at the
    largest ``n``; the tail frequency of ``{#P_{τ(n)} ≤ κ̂ n}`` is reported for
    every ``n``. The first ``audit_trials`` traces at each ``n`` run with the
    chain audit switched on.
    """
    setup = setup or setup_coupling(spec, constants, seed=seed)
    _, lam = decompose(spec)
    residual = _Residual(lam, setup.certificate.S, setup.beta, setup.N) if setup.beta < 1 else None
    tau, piv = {}, {}
    for k, n in enumerate(ns):
        def work(rng, size, chunk, n=n):
            out = []
            for t in range(size):
                audit = chunk * 64 + t < audit_trials
                out.append(coupled_trace(spec, setup, n, rng, audit, residual))
            return out

        res = [r for part in chunked_map(work, trials, seed + 7919 * (k + 1), 64) for r in part]
        tau[n] = np.array([r[0] for r in res])
        piv[n] = np.array([r[1] for r in res])
    n_max = max(ns)
    kappa = kappa_fraction * float(np.mean(piv[n_max] / n_max))
    tails = {n: float(np.mean(piv[n] <= kappa * n)) for n in ns}
    gap = kappa * math.log((1 - 2 * constants.eps) * len(setup.certificate.S)) if kappa > 0 else 0.0
    return PivotalReport(list(ns), trials, tau, piv, kappa, tails, gap, setup)
