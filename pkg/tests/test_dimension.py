import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.base import clone

from dimcons.dimension import (LocalDimensionEstimator, ball_counts, ball_mass_and_dimension_fit, exact_srw_fit,
                               fit_masses)
from dimcons.errors import DimconsError
from dimcons.harmonic import boundary_samples
from dimcons.measures import SRW, ProductMeasure

LOG3, LOG5 = math.log(3), math.log(5)


@pytest.fixture(scope="module")
def srw2_large():
    return boundary_samples(SRW(2), 24, 400_000, 0)[0]


def test_exact_masses_give_log3():
    fit = exact_srw_fit(2, range(2, 23))
    assert abs(fit.slope - LOG3) < 1e-6
    assert fit.residual < 1e-9


def test_exact_masses_rank3():
    assert abs(exact_srw_fit(3, range(2, 23)).slope - LOG5) < 1e-6


@given(st.floats(0.1, 5.0), st.integers(0, 5), st.integers(3, 20))
def test_power_law_masses_recover_exponent(alpha, j0, width):
    js = np.arange(j0, j0 + width)
    fit = fit_masses(js, np.exp(-alpha * js))
    assert fit.slope == pytest.approx(alpha, rel=1e-9)


def test_srw3_sampled_slope():
    (x,) = boundary_samples(SRW(3), 24, 100_000, 1)
    fit = ball_mass_and_dimension_fit(x, rng=np.random.default_rng(0))
    assert abs(fit.slope - LOG5) <= 0.05 * LOG5


def test_masses_nondecreasing_in_radius():
    (x,) = boundary_samples(SRW(2), 16, 20_000, 2)
    fit = ball_mass_and_dimension_fit(x, rng=np.random.default_rng(1))
    # js ascend, radii descend
    assert np.all(np.diff(fit.masses) <= 0)
    counts = ball_counts((x,), [0, 1, 2], range(0, 16))
    assert np.all(np.diff(counts, axis=1) <= 0)


def test_product_balls_are_products_of_factor_balls():
    a, b = boundary_samples(ProductMeasure(SRW(2), SRW(2)), 10, 3000, 3)
    js = range(0, 10)
    both = ball_counts((a, b), [5], js)[0]
    for k, j in enumerate(js):
        in_a = np.all(a[:, : j + 1] == a[5, : j + 1], axis=1)
        in_b = np.all(b[:, : j + 1] == b[5, : j + 1], axis=1)
        in_a[5] = in_b[5] = False
        assert both[k] == np.sum(in_a & in_b)


def test_centers_dimension_constant(srw2_large):
    fit = ball_mass_and_dimension_fit(srw2_large, 50, min_hits=20, rng=np.random.default_rng(0))
    assert fit.centers == 50
    assert fit.center_std <= 0.05


def test_window_shrinks_with_warning():
    (x,) = boundary_samples(SRW(2), 24, 2000, 4)
    fit = ball_mass_and_dimension_fit(x, rng=np.random.default_rng(0))
    assert fit.js[-1] < 22
    assert any("shrunk" in w for w in fit.warnings)


def test_empty_window_raises():
    (x,) = boundary_samples(SRW(2), 4, 50, 5)
    with pytest.raises(DimconsError):
        ball_mass_and_dimension_fit(x, j_min=2, j_max=3, min_hits=10_000, rng=np.random.default_rng(0))


def test_estimator_api():
    (x,) = boundary_samples(SRW(2), 20, 50_000, 6)
    est = LocalDimensionEstimator(min_hits=10, random_state=3)
    assert est.get_params()["min_hits"] == 10
    est.fit(x)
    assert abs(est.dimension_ - LOG3) <= 0.05 * LOG3
    twin = clone(est).fit(x)
    assert twin.dimension_ == est.dimension_
    assert est.set_params(j_min=3).j_min == 3


def test_plot_rows_are_log_pairs():
    fit = exact_srw_fit(2, range(2, 6))
    rows = fit.plot_rows()
    assert rows[0][0] == -2.0
    assert rows[0][1] == pytest.approx(math.log(fit.masses[0]))
