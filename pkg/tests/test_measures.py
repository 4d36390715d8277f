from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import chisquare

from dimcons.config import build_measure
from dimcons.groups import FreeGroup, KillLastGenerator, ReducedWord
from dimcons.measures import (SRW, DiagonalPush, LazySRW, NoiseMixture, ProductMeasure, SingleTable, Swapped,
                              point_mass, spec_from_config)
from dimcons.rng import stream
from dimcons.walks import sample_trajectory

SPECS = [
    SRW(2),
    SRW(3),
    LazySRW(2, Fraction(1, 3)),
    point_mass(2, (1,)),
    SingleTable(2, ((1, 2), (-1,), (2,)), (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4))),
    ProductMeasure(SRW(2), LazySRW(2, Fraction(1, 3))),
    NoiseMixture(Fraction(1, 2), SRW(2)),
    NoiseMixture(0, SRW(2)),
    DiagonalPush(SRW(3)),
    Swapped(DiagonalPush(SRW(3))),
]


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: type(s).__name__)
def test_config_round_trip(spec):
    assert spec_from_config(spec.to_config()) == spec


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: type(s).__name__)
def test_support_weights_sum_to_one(spec):
    assert sum(float(p) for _, p in spec.support()) == pytest.approx(1.0, abs=1e-12)


def test_bad_weights_rejected():
    with pytest.raises(ValueError):
        SingleTable(2, ((1,), (2,)), (0.5, 0.6))


def _chi2_p(observed, expected_probs, n):
    keep = np.asarray(expected_probs) > 0
    return chisquare(np.asarray(observed)[keep], np.asarray(expected_probs)[keep] * n).pvalue


def _marginal_law(marg):
    words, weights = marg.atoms()
    law = {}
    for w, p in zip(words, weights):
        key = tuple(w)
        law[key] = law.get(key, 0.0) + float(p)
    return law


@pytest.mark.parametrize("spec", [s for s in SPECS if s.is_product], ids=lambda s: type(s).__name__)
def test_marginals_match_declared_law(spec):
    n = 100_000
    i, j = spec.sample_indices(stream(11), n)
    for table, idx, marg in zip(spec.factor_tables, (i, j), spec.marginals()):
        rows = table[idx]
        keys = [tuple(int(x) for x in r if x != 0) for r in rows]
        law = _marginal_law(marg)
        cats = sorted(law)
        counts = {c: 0 for c in cats}
        for k in keys:
            counts[k] += 1
        if len(cats) > 1:
            assert _chi2_p([counts[c] for c in cats], [law[c] for c in cats], n) > 1e-3


def test_noise_mixture_unequal_frequency():
    spec = NoiseMixture(Fraction(1, 2), SRW(2))
    n = 100_000
    i, j = spec.sample_indices(stream(3), n)
    t1, t2 = spec.factor_tables
    unequal = np.any(t1[i] != t2[j], axis=1).mean()
    # independent draws coincide with probability 1/4
    assert unequal == pytest.approx(0.5 * 0.75, abs=0.01)


def test_diagonal_push_second_is_projection():
    spec = DiagonalPush(SRW(3))
    traj = sample_trajectory(spec, 200, 5)
    pi = KillLastGenerator(FreeGroup(3))
    for p in traj.positions:
        assert p.second == pi(p.first)


def test_zero_steps_gives_identity():
    traj = sample_trajectory(SRW(2), 0, 0)
    assert len(traj.positions) == 1 and traj.positions[0].is_identity()


def test_trajectory_deterministic():
    a = sample_trajectory(NoiseMixture(Fraction(1, 2), SRW(2)), 50, 7)
    b = sample_trajectory(NoiseMixture(Fraction(1, 2), SRW(2)), 50, 7)
    assert a == b


def test_schottky_uniform_shorthand():
    spec = build_measure({"variant": "NoiseMixture", "rho": "1/2",
                          "base": {"variant": "SchottkyUniform", "count": 20, "length": 41, "C": 4}})
    assert len(spec.base.atoms()[0]) == 20
    assert all(len(w) == 41 for w in spec.base.atoms()[0])


@given(st.fractions(0, 1, max_denominator=12), st.integers(2, 4))
def test_noise_mixture_round_trip_property(rho, rank):
    spec = NoiseMixture(rho, SRW(rank))
    assert spec_from_config(spec.to_config()) == spec
