import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dimcons.measures import SRW, LazySRW, NoiseMixture, ProductMeasure, SingleTable, point_mass
from dimcons.walks import (conditional_entropy_estimate, drift_estimate, entropy_rate, exact_entropy,
                           exact_joint_law, radial_entropies, radial_profile, shannon)

LOG3, LOG5 = math.log(3), math.log(5)


def test_radial_profile_small_cases():
    assert radial_profile(SRW(2), 1).masses[1] == pytest.approx(1.0)
    p2 = radial_profile(SRW(2), 2).masses
    assert p2[0] == pytest.approx(0.25)
    assert p2[2] == pytest.approx(0.75)


def test_radial_profile_against_enumeration():
    # length law from brute-force convolution
    law = exact_joint_law(SRW(2), 6)
    by_len = np.zeros(7)
    for w, p in law.items():
        by_len[len(w)] += p
    assert np.allclose(radial_profile(SRW(2), 6).masses[:7], by_len, atol=1e-13)
    lazy = exact_joint_law(LazySRW(2, Fraction(1, 3)), 5)
    by_len = np.zeros(6)
    for w, p in lazy.items():
        by_len[len(w)] += p
    assert np.allclose(radial_profile(LazySRW(2, Fraction(1, 3)), 5).masses[:6], by_len, atol=1e-13)


@pytest.mark.parametrize("n", [1, 10, 100, 1000])
def test_radial_profile_normalised(n):
    assert radial_profile(SRW(3), n).masses.sum() == pytest.approx(1.0, abs=1e-10)


def test_exact_entropy_matches_enumeration():
    law = exact_joint_law(SRW(2), 5)
    assert exact_entropy(SRW(2), 5) == pytest.approx(shannon(law.values()), abs=1e-10)


def test_drift_point_mass_is_exact():
    rep = drift_estimate(point_mass(2, (1,)), 100, 10, 0)
    assert rep.estimate == 1.0 and rep.stderr == 0.0


def test_drift_srw_small():
    rep = drift_estimate(SRW(3), 2000, 100, 1)
    assert rep.estimate == pytest.approx(2 / 3, abs=0.02)


def test_drift_reproducible_and_thread_independent(monkeypatch):
    a = drift_estimate(SRW(2), 300, 130, 9)
    monkeypatch.setenv("DIMCONS_THREADS", "4")
    b = drift_estimate(SRW(2), 300, 130, 9)
    assert a == b


@settings(max_examples=8)
@given(st.sampled_from([SRW(2), SRW(3), LazySRW(2, Fraction(1, 3)),
                        SingleTable(2, ((1, 1), (-2,), (2, 1)), (0.5, 0.25, 0.25))]),
       st.integers(20, 200), st.integers(0, 1000))
def test_drift_subadditive_consistent(spec, n, seed):
    a = drift_estimate(spec, n, 64, seed)
    b = drift_estimate(spec, 2 * n, 64, seed + 1)
    assert b.estimate <= a.estimate + 2 * (a.stderr + b.stderr) + 1e-12


def test_entropy_increments_monotone_and_converged():
    for rank in (2, 3):
        H = radial_entropies(rank, 0.0, 5001 if rank == 2 else 2001)
        inc = np.diff(H)
        assert np.all(np.diff(inc[1:2000]) <= 1e-12)
        if rank == 2:
            assert abs(inc[2500] - inc[5000]) <= 1e-3


def test_entropy_point_mass_zero():
    assert entropy_rate(point_mass(2, (1, 2)), "exact-radial", 100).estimate == 0.0


def test_entropy_lazy_closed_form():
    rep = entropy_rate(LazySRW(2, Fraction(1, 3)), "exact-radial", 2500)
    assert rep.estimate == pytest.approx(LOG3 / 3, abs=5e-3)


def test_mc_plugin_matches_entropy_of_n_step_law():
    n = 200
    rep = entropy_rate(SRW(2), "mc-plugin", n, 400, 2)
    assert abs(rep.estimate - exact_entropy(SRW(2), n) / n) <= 3 * rep.stderr


def test_conditional_entropy_examples():
    assert conditional_entropy_estimate(NoiseMixture(0, SRW(2)), 20).estimate == 0.0
    prod = ProductMeasure(SRW(2), SRW(2))
    h = 0.5 * LOG3
    e1 = conditional_entropy_estimate(prod, 200).estimate
    e2 = conditional_entropy_estimate(prod, 1000).estimate
    assert h < e2 < e1 and e2 - h < 0.01


def test_conditional_entropy_enumeration_path():
    spec = NoiseMixture(Fraction(1, 2), SRW(2))
    n = 4
    law = exact_joint_law(spec, n)
    marg = {}
    for (a, b), p in law.items():
        marg[b] = marg.get(b, 0.0) + p
    direct = (shannon(law.values()) - shannon(marg.values())) / n
    rep = conditional_entropy_estimate(spec, n, trials=2000, seed=0)
    assert abs(rep.estimate - direct) <= 4 * rep.stderr + 0.02
