"""Statistical and exhaustive checks shared by the test-suite and ``self-test``.

Every ``criterion_*`` function runs one acceptance check at its documented
scale and returns a :class:`CheckResult`. The exhaustive geometry checks are
also exposed individually so the fast self-test can reuse them.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Dict, List, Optional

import numpy as np

from . import harmonic
from .batch import common_prefix_lengths
from .conservation import conditional_dimension_estimate, dimension_conservation_report
from .dimension import ball_mass_and_dimension_fit, exact_srw_fit
from .groups import BoundaryApprox, FreeGroup, ReducedWord, free_reduce, shadow_contains
from .measures import SRW, DiagonalPush, LazySRW, NoiseMixture, SingleTable
from .walks import conditional_entropy_estimate, drift_estimate, entropy_rate, exact_entropy

LOG3 = math.log(3)
LOG5 = math.log(5)


@dataclass
class CheckResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        shown = ", ".join(f"{k}={_fmt(v)}" for k, v in self.details.items())
        return f"{status} {self.name}: {shown} ({self.seconds:.1f}s)"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_fmt(x)}" for k, x in v.items()) + "}"
    return str(v)


def _timed(name: str, fn: Callable[[], tuple]) -> CheckResult:
    t = time.perf_counter()
    ok, details = fn()
    return CheckResult(name, bool(ok), details, time.perf_counter() - t)


# ---------------------------------------------------------------- exhaustive oracles

def first_step_oracle(max_depth: int = 4) -> tuple:
    """Closed-form cylinder masses against the first-step linear system."""
    worst = 0.0
    for m in (2, 3):
        g = FreeGroup(m)
        for k in range(1, max_depth + 1 if m == 2 else 3):
            for w in g.sphere(k):
                a = harmonic.exact_cylinder_mass(m, w.letters)
                b = harmonic.cylinder_mass_by_first_step(m, w.letters)
                worst = max(worst, abs(a - b) / b)
    return worst < 1e-9, {"max_rel_error": worst}


def exact_fit_oracle() -> tuple:
    fit = exact_srw_fit(2, range(2, 23))
    err = abs(fit.slope - LOG3)
    return err < 1e-6, {"slope": fit.slope, "error": err}


def shadow_ball_sandwich(depth: int = 12) -> tuple:
    """``O(x, R)`` equals ``B(ξ, e^{-|x|+R})`` on depth-``depth`` cylinders, with ``C = 1``.

    By transitivity of the tree's automorphisms ``ξ`` is fixed to ``a^∞``; all
    ``η`` of the given depth are enumerated. The library ``shadow_contains`` is
    checked against the vectorised answer on every ``η`` of depth 6.
    """
    g = FreeGroup(2)
    etas = np.array([w.letters for w in g.sphere(depth)], dtype=np.int8)
    xi = np.ones(depth, dtype=np.int8)
    cp = common_prefix_lengths(etas, xi)
    checked = 0
    for k in range(0, depth):
        for R in range(1, depth - k + 1):
            shadow = k - np.minimum(cp, k) < R
            ball = cp > k - R  # q(ξ, η) < e^{-k+R}
            if not np.array_equal(shadow, ball):
                return False, {"x_length": k, "R": R}
            checked += len(etas)
    small = [w.letters for w in g.sphere(6)]
    xi_b = BoundaryApprox.periodic(g, (1,), 6)
    for k in range(0, 5):
        x = ReducedWord((1,) * k, g)
        for R in range(1, 6 - k):
            for e in small:
                eta = BoundaryApprox.from_letters(g, e)
                c = _cp(e, xi_b.letters)
                if shadow_contains(x, R, eta) != (c > k - R):
                    return False, {"library_mismatch": (k, R, e)}
    return True, {"cases": checked, "depth": depth}


def _cp(a, b) -> int:
    n = 0
    for u, v in zip(a, b):
        if u != v:
            break
        n += 1
    return n


def chain_shadow_oracle(max_z: int = 12, Cs=(0, 1, 2)) -> tuple:
    from .pivotal.chains import canonical_pair, chain_shadow_by_search, chain_shadow_metric

    n = 0
    for C in Cs:
        for lz in range(max_z + 1):
            for ly in range(max_z + 3):
                for py in range(min(ly, lz) + 1):
                    y, z = canonical_pair(ly, lz, py)
                    if chain_shadow_metric(ly, lz, py, C) != chain_shadow_by_search(y, z, C):
                        return False, {"C": C, "ly": ly, "lz": lz, "py": py}
                    n += 1
    return True, {"instances": n}


def rn_cocycle_oracle(max_len: int = 3, eta_depth: int = 16) -> tuple:
    """``value(xy, η) = value(x, η)·value(y, x⁻¹η)`` for all ``|x|, |y| <= max_len``."""
    g = FreeGroup(2)
    words = [w for k in range(max_len + 1) for w in g.sphere(k)]
    etas = [BoundaryApprox.periodic(g, p, eta_depth) for p in ((1,), (2,), (-1,), (-2,), (1, 2), (2, -1), (1, 1, -2))]
    n = 0
    for eta in etas:
        for x in words:
            moved = BoundaryApprox.from_letters(g, free_reduce(x.inverse().letters + eta.letters)[: eta_depth - max_len])
            for y in words:
                lhs = harmonic.rn_derivative(2, x * y, eta).exact
                rhs = harmonic.rn_derivative(2, x, eta).exact * harmonic.rn_derivative(2, y, moved).exact
                if lhs != rhs:
                    return False, {"x": str(x), "y": str(y), "eta": str(eta)}
                n += 1
    return True, {"triples": n}


def doob_cylinder_oracle(max_n: int = 3) -> tuple:
    """``P^η(path) = P(path)·(dw̄_nν*/dν*)(η)`` for every path of length ``<= max_n``."""
    g = FreeGroup(2)
    eta = BoundaryApprox.periodic(g, (1,), 32)
    n_paths = 0
    for spec in (NoiseMixture(Fraction(1, 2), SRW(2)), NoiseMixture(Fraction(1), SRW(2)),
                 NoiseMixture(Fraction(0), SRW(2))):
        dspec = harmonic.DoobWalkSpec(spec, eta)
        support = spec.support()
        for n in range(1, max_n + 1):
            total = Fraction(0)
            for path in product(support, repeat=n):
                steps = [a for a, _ in path]
                base = Fraction(1)
                for _, w in path:
                    base *= Fraction(w)
                second = ReducedWord(free_reduce(sum((b for _, b in steps), ())), g)
                rn = harmonic.rn_derivative(2, second, eta).exact
                cond = harmonic.doob_path_probability(dspec, steps)
                if cond != base * rn:
                    return False, {"spec": type(spec).__name__, "path": steps}
                total += cond
                n_paths += 1
            if total != 1:
                return False, {"n": n, "total": float(total)}
    return True, {"paths": n_paths}


# ---------------------------------------------------------------- acceptance criteria

def criterion_1(seed: int = 0) -> CheckResult:
    def run():
        t = time.perf_counter()
        a = drift_estimate(SRW(3), 20_000, 200, seed)
        elapsed = time.perf_counter() - t
        b = drift_estimate(LazySRW(2, Fraction(1, 3)), 20_000, 200, seed + 1)
        ok = abs(a.estimate - 2 / 3) <= 0.01 and abs(b.estimate - 1 / 3) <= 0.01 and elapsed < 10
        return ok, {"srw_f3": a.estimate, "lazy_f2": b.estimate, "srw_seconds": elapsed}

    return _timed("1 drift closed forms", run)


def criterion_2(seed: int = 0) -> CheckResult:
    def run():
        a = entropy_rate(SRW(3), "exact-radial", 2500).estimate
        b = entropy_rate(LazySRW(2, Fraction(1, 3)), "exact-radial", 2500).estimate
        ok = abs(a - 2 / 3 * LOG5) <= 5e-3 and abs(b - LOG3 / 3) <= 5e-3
        details = {"srw_f3": a, "lazy_f2": b}
        n = 500
        for name, sp in (("srw_f3", SRW(3)), ("lazy_f2", LazySRW(2, Fraction(1, 3)))):
            mc = entropy_rate(sp, "mc-plugin", n, trials=2000, seed=seed)
            ref = exact_entropy(sp, n) / n
            z = abs(mc.estimate - ref) / mc.stderr
            details[f"{name}_plugin_z"] = z
            ok = ok and z <= 3
        return ok, details

    return _timed("2 entropy closed forms", run)


def criterion_3(seed: int = 0) -> CheckResult:
    def run():
        x = harmonic.boundary_samples(SRW(2), 24, 100_000, seed)
        fit = ball_mass_and_dimension_fit(x, rng=np.random.default_rng(seed))
        exact = exact_srw_fit(2, range(2, 23)).slope
        ok = abs(fit.slope / LOG3 - 1) <= 0.05 and abs(exact - LOG3) <= 1e-6
        return ok, {"sampled": fit.slope, "exact": exact, "window": f"{fit.js[0]}..{fit.js[-1]}"}

    return _timed("3 single-factor dimension", run)


def criterion_4(seed: int = 0) -> CheckResult:
    def run():
        t = time.perf_counter()
        r = conditional_dimension_estimate(DiagonalPush(SRW(3)), None, 50_000, 24, 128, seed)
        elapsed = time.perf_counter() - t
        target = LOG5 - 0.5 * LOG3
        r0 = conditional_dimension_estimate(NoiseMixture(Fraction(0), SRW(2)), None, 50_000, 24, 128, seed,
                                            depth_doubling=False)
        ok = abs(r.dimension / target - 1) <= 0.10 and abs(r0.dimension) <= 0.05 and elapsed < 600
        return ok, {"diagonal_f3_f2": r.dimension, "target": target, "rho0": r0.dimension,
                    "depth_check": r.depth_check["difference"] if r.depth_check else None}

    return _timed("4 conditional dimension", run)


def mixture_entropy(seed: int = 0, n: int = 200, trials: int = 400) -> float:
    """The mc-increment estimate of ``h(π^{1/2})`` on ``F_2 × F_2``."""
    return entropy_rate(NoiseMixture(Fraction(1, 2), SRW(2)), "mc-increment", n, trials, seed).estimate


def criterion_5(seed: int = 0, h_half: Optional[float] = None) -> CheckResult:
    def run():
        details = {}
        ex = dimension_conservation_report(DiagonalPush(SRW(3)), samples=400_000, etas=1, seed=seed)
        target = LOG5 + 0.5 * LOG3
        ok = abs(ex.dim_joint / target - 1) <= 0.10
        details["diagonal_f3_f2"] = ex.dim_joint
        h = mixture_entropy(seed) if h_half is None else h_half
        details["h_half"] = h
        for rho, ref in ((Fraction(0), LOG3), (Fraction(1), 2 * LOG3), (Fraction(1, 2), h / 0.5)):
            r = dimension_conservation_report(NoiseMixture(rho, SRW(2)), seed=seed, h=h if rho == Fraction(1, 2) else None)
            good = abs(r.dim_joint / ref - 1) <= 0.10 and abs(r.residual) <= 0.1
            ok = ok and good
            details[f"rho={rho}"] = {"dim": r.dim_joint, "target": ref, "residual": r.residual}
        return ok, details

    return _timed("5 product dimension and conservation", run)


_PIVOTAL_CACHE: Dict[tuple, object] = {}


def schottky_mixture(seed: int = 0):
    from .pivotal.schottky import build_schottky_words

    words = build_schottky_words(2, 200, 81, 4, seed)
    return NoiseMixture(Fraction(1, 2), SingleTable.uniform(2, words))


def pivotal_report(seed: int = 0, trials: int = 1000):
    key = (seed, trials)
    if key not in _PIVOTAL_CACHE:
        from .pivotal.coupling import pivotal_stats_and_entropy_gap

        _PIVOTAL_CACHE[key] = pivotal_stats_and_entropy_gap(schottky_mixture(seed), (200, 400, 800), trials, seed)
    return _PIVOTAL_CACHE[key]


def criterion_6(seed: int = 0) -> CheckResult:
    def run():
        c = conditional_entropy_estimate(NoiseMixture(Fraction(1, 2), SRW(2)), 20, trials=400, seed=seed)
        lower = c.estimate - 2.326 * c.stderr
        rep = pivotal_report(seed)
        ok = lower >= 0.05 and rep.gap_bound > 0
        return ok, {"conditional_entropy": c.estimate, "lower_99": lower, "gap_bound": rep.gap_bound}

    return _timed("6 entropy gap", run)


def chain_audit(traces: int = 1000, seed: int = 0) -> tuple:
    """Random traces with the chain audit on; half use adversarial cancelling ``u``."""
    from .pivotal.schottky import build_schottky_words
    from .pivotal.times import PivotalConstants, pivotal_times

    rng = np.random.default_rng(seed)
    S = build_schottky_words(2, 200, 81, 4, seed)
    letters = [1, 2, -1, -2]
    truncations = 0
    for t in range(traces):
        n = int(rng.integers(1, 21))
        a = [S[i] for i in rng.integers(len(S), size=n)]
        b = [S[i] for i in rng.integers(len(S), size=n)]
        u = []
        for i in range(n + 1):
            if t % 2 and i > 0 and rng.random() < 0.5:
                cut = int(rng.integers(1, 2 * len(b[i - 1]) + 1))
                back = tuple(-x for x in reversed(a[i - 1] + b[i - 1]))[:cut]
                u.append(free_reduce(back))
            else:
                k = int(rng.integers(0, 8))
                w = []
                for _ in range(k):
                    w.append(int(rng.choice([x for x in letters if not w or x != -w[-1]])))
                u.append(tuple(w))
        try:
            state = pivotal_times(a, b, u, PivotalConstants(), audit=True)
        except AssertionError as exc:
            return False, {"trace": t, "error": str(exc)}
        truncations += sum(1 for s in state.steps if s.truncated_to is not None or (not s.lgc and not s.P))
    return True, {"traces": traces, "non_growth_steps": truncations}


def injectivity_check(max_n: int = 4, seed: int = 0) -> tuple:
    """Endpoint injectivity on full pivoted classes with ``#S = 8`` and ``D = 10 C_0 + 1``."""
    from .pivotal.schottky import build_schottky_words
    from .pivotal.times import PivotalConstants, pivoted_class

    C0 = 4
    D = 10 * C0 + 1
    consts = PivotalConstants(C0, D)
    rng = np.random.default_rng(seed)
    S = build_schottky_words(2, 8, D, C0, seed)
    members = collisions = 0
    for n in range(1, max_n + 1):
        for _ in range(3):
            a_idx = list(rng.integers(len(S), size=n))
            b = [S[i] for i in rng.integers(len(S), size=n)]
            u = [() for _ in range(n + 1)]
            cls = pivoted_class(S, a_idx, b, u, consts, min_D=D)
            members += len(cls.members)
            collisions += cls.collisions
    return collisions == 0, {"members": members, "collisions": collisions}


def criterion_7(seed: int = 0) -> CheckResult:
    def run():
        ok1, d1 = chain_audit(1000, seed)
        ok2, d2 = injectivity_check(4, seed)
        rep = pivotal_report(seed)
        f = [rep.tail_frequency[n] for n in rep.ns]
        ok3 = rep.kappa_hat > 0 and all(x > y for x, y in zip(f, f[1:]))
        return ok1 and ok2 and ok3, {"audit": d1, "injectivity": d2, "kappa_hat": rep.kappa_hat,
                                     "tail_frequency": {str(n): rep.tail_frequency[n] for n in rep.ns}}

    return _timed("7 pivotal machinery", run)


def criterion_8(seed: int = 0) -> CheckResult:
    def run():
        results = {
            "sandwich": shadow_ball_sandwich(12),
            "chain_shadow": chain_shadow_oracle(12),
            "rn_cocycle": rn_cocycle_oracle(3),
            "doob_cylinder": doob_cylinder_oracle(3),
        }
        ok = all(r[0] for r in results.values())
        return ok, {k: ("ok" if r[0] else r[1]) for k, r in results.items()}

    return _timed("8 geometry oracles", run)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8]


def fast_checks() -> List[CheckResult]:
    """Oracle-equivalence and small exhaustive suites (the fast self-test)."""
    out = [
        _timed("first-step oracle for cylinder masses", first_step_oracle),
        _timed("exact-mass dimension fit", exact_fit_oracle),
        _timed("shadow-ball sandwich (depth 10)", lambda: shadow_ball_sandwich(10)),
        _timed("chain shadow vs chain search (|z| <= 10)", lambda: chain_shadow_oracle(10, (0, 1))),
        _timed("RN cocycle (length <= 2)", lambda: rn_cocycle_oracle(2)),
        _timed("Doob cylinder identity (n <= 2)", lambda: doob_cylinder_oracle(2)),
    ]
    return out
