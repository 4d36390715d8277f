from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dimcons.errors import ConstantViolationError, EnumerationBudgetError
from dimcons.groups import free_reduce
from dimcons.measures import SRW, NoiseMixture, ProductMeasure, SingleTable
from dimcons.pivotal import (ChainParams, Counterexample, PivotalConstants, SchottkyCertificate,
                             build_schottky_words, chain_shadow_contains, is_chain, pivotal_times, pivoted_class,
                             schottky_certify, setup_coupling)
from dimcons.pivotal.chains import chain_shadow_by_search
from dimcons.pivotal.coupling import coupled_trace, decompose, pivotal_stats_and_entropy_gap
from dimcons.pivotal.times import single_site_sets

from conftest import F2, words

D = 81
A_D = (1,) * D


def inv(w):
    return tuple(-x for x in reversed(w))


# ------------------------------------------------------------ chains

def test_is_chain_corner():
    pts = [F2.identity(), F2.word("a" * 10), F2.word("a" * 10 + "b" * 10)]
    assert is_chain(pts, ChainParams(0, 10))


def test_is_chain_backtrack_fails_at_one():
    pts = [F2.identity(), F2.word("a" * 10), F2.word("a" * 5 + "b")]
    check = is_chain(pts, ChainParams(0, 10))
    assert not check and check.violation == 1


@settings(max_examples=60)
@given(st.lists(words(max_size=12), min_size=1, max_size=6))
def test_true_chains_progress(pieces):
    # a chain built from reduced corners: each step is a fresh long word
    pts = [F2.identity()]
    for w in pieces:
        step = F2.word("a" * 6) * w * F2.word("b" * 6)
        pts.append(pts[-1] * step)
    check = is_chain(pts, ChainParams(3, 7))
    if check:
        assert len((pts[0].inverse() * pts[-1])) >= len(pts) - 1


def test_chain_shadow_examples():
    o, a = F2.identity(), F2.word("a")
    assert chain_shadow_contains(o, a, 0, o)
    assert chain_shadow_contains(o, a, 0, F2.word("a" * 8))
    assert not chain_shadow_contains(o, a, 0, F2.word("b" * 8))


@settings(max_examples=80)
@given(words(max_size=7), words(max_size=7), st.integers(0, 2))
def test_chain_shadow_matches_search(y, z, C):
    if not y.letters:
        return
    assert chain_shadow_contains(F2.identity(), y, C, z) == chain_shadow_by_search(y.letters, z.letters, C)


@settings(max_examples=60)
@given(words(max_size=6), words(max_size=6), words(max_size=6), st.integers(0, 2))
def test_chain_shadow_translation_invariant(x, y, z, C):
    g = F2.word("abA")
    assert chain_shadow_contains(x, y, C, z) == chain_shadow_contains(g * x, g * y, C, g * z)


# ------------------------------------------------------------ Schottky sets

def test_schottky_200_words_certified():
    S = build_schottky_words(2, 200, 81, 4, 0)
    cert = schottky_certify(S, 0.01, 4, 81)
    assert isinstance(cert, SchottkyCertificate) and cert.size == 200


def test_schottky_short_word_fails_condition_3():
    S = build_schottky_words(2, 50, 81, 4, 0)
    S[7] = S[7][:40]
    res = schottky_certify(S, 0.02, 4, 81)
    assert isinstance(res, Counterexample) and res.condition == 3


def test_schottky_aligned_words_fail_condition_1():
    S = [(1,) * 81] * 100
    res = schottky_certify(S, 0.01, 4, 81)
    assert isinstance(res, Counterexample) and res.condition == 1
    assert res.bad > 1


def test_constants_checked():
    with pytest.raises(ConstantViolationError):
        pivotal_times([A_D], [A_D], [(), ()], PivotalConstants(4, 40))


# ------------------------------------------------------------ pivotal times

def test_pivotal_times_start_empty():
    st_ = pivotal_times([], [], [()])
    assert st_.P == ()


@pytest.mark.parametrize("n", [1, 3, 6])
def test_aligned_powers_are_all_pivotal(n):
    state = pivotal_times([A_D] * n, [A_D] * n, [()] * (n + 1))
    assert state.P == tuple(range(1, n + 1))
    assert all(s.lgc for s in state.steps)


def test_cancellation_truncates():
    S = build_schottky_words(2, 200, 81, 4, 1)
    a, b = [S[0], S[1]], [S[2], S[3]]
    back = free_reduce(inv(a[1] + b[1]))[:120]
    state = pivotal_times(a, b, [(), (), back])
    before, after = state.steps[0].P, state.steps[1].P
    assert before and 2 not in after
    assert state.steps[1].truncated_to is not None
    assert after == before[: len(after)]


def test_audit_on_random_traces():
    S = build_schottky_words(2, 200, 81, 4, 2)
    rng = np.random.default_rng(0)
    for _ in range(60):
        n = int(rng.integers(1, 12))
        a = [S[i] for i in rng.integers(200, size=n)]
        b = [S[i] for i in rng.integers(200, size=n)]
        u = [()]
        for i in range(n):
            if rng.random() < 0.4:
                u.append(free_reduce(inv(a[i] + b[i]))[: int(rng.integers(1, 162))])
            else:
                u.append(tuple(int(x) for x in rng.choice([1, 2], size=int(rng.integers(0, 5)))))
        pivotal_times(a, b, u, audit=True)


# ------------------------------------------------------------ pivoted classes

def test_non_pivotal_index_is_frozen():
    S = build_schottky_words(2, 8, 41, 4, 0)
    consts = PivotalConstants(4, 41)
    b = [S[1], S[2]]
    back = free_reduce(inv(S[0] + b[0]))
    A = single_site_sets(S, [0, 3], b, [(), back, ()], consts, min_D=41)
    state = pivotal_times([S[0], S[3]], b, [(), back, ()], consts, min_D=41, audit=False)
    assert set(A) - set(state.P)
    for i, members in A.items():
        if i not in state.P:
            assert members == ([0, 3][i - 1],)


def test_pivot_sets_are_large():
    S = build_schottky_words(2, 200, 81, 4, 0)
    rng = np.random.default_rng(1)
    a_idx = list(rng.integers(200, size=3))
    b = [S[i] for i in rng.integers(200, size=3)]
    A = single_site_sets(S, a_idx, b, [()] * 4, PivotalConstants())
    state = pivotal_times([S[i] for i in a_idx], b, [()] * 4, audit=False)
    assert state.P
    for i in state.P:
        assert len(A[i]) >= 196


def test_endpoint_injectivity_small():
    S = build_schottky_words(2, 8, 41, 4, 0)
    consts = PivotalConstants(4, 41)
    cls = pivoted_class(S, [0, 5], [S[1], S[2]], [(), (), ()], consts, min_D=41)
    assert cls.collisions == 0
    assert len(cls.members) == 8 ** len(cls.P)
    assert cls.product_structure


def test_pivoted_class_budget():
    S = build_schottky_words(2, 200, 81, 4, 0)
    with pytest.raises(EnumerationBudgetError):
        pivoted_class(S, [0, 1, 2], [S[3]] * 3, [()] * 4, PivotalConstants(), budget=1000)


# ------------------------------------------------------------ coupling

@pytest.fixture(scope="module")
def schottky_uniform():
    return SingleTable.uniform(2, build_schottky_words(2, 200, 81, 4, 0))


def test_decompose(schottky_uniform):
    assert decompose(NoiseMixture(Fraction(1, 2), schottky_uniform))[0] == 0.5
    assert decompose(ProductMeasure(schottky_uniform, SRW(2)))[0] == 1.0


def test_coupling_flags_and_gap(schottky_uniform):
    spec = NoiseMixture(Fraction(1, 2), schottky_uniform)
    setup = setup_coupling(spec)
    assert setup.M == 1 and setup.beta == pytest.approx(1.0)
    assert setup.flag_probability == pytest.approx(0.25)
    tau, piv = coupled_trace(spec, setup, 400, np.random.default_rng(0))
    assert 0 <= piv <= tau <= 200


def test_product_measure_pivots_grow_linearly(schottky_uniform):
    spec = ProductMeasure(schottky_uniform, SRW(2))
    rep = pivotal_stats_and_entropy_gap(spec, (50, 100), 64, 0)
    rows = rep.curve()
    # every block is flagged when α = β = 1
    assert all(r[3] == pytest.approx(0.5) for r in rows)
    assert rows[-1][1] >= 0.25
    assert rep.gap_bound > 0


def test_pivotal_report_reproducible(schottky_uniform):
    spec = NoiseMixture(Fraction(1, 2), schottky_uniform)
    a = pivotal_stats_and_entropy_gap(spec, (40,), 70, 5)
    b = pivotal_stats_and_entropy_gap(spec, (40,), 70, 5)
    assert np.array_equal(a.pivots[40], b.pivots[40])
