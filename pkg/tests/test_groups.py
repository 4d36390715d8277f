import math
import random

import pytest
from hypothesis import given, strategies as st

from dimcons.errors import IndeterminateError, SpecMismatchError, UnsupportedBaseError
from dimcons.groups import (BoundaryApprox, FreeGroup, KillLastGenerator, ProductElement, ReducedWord,
                            TruncatedInt, busemann, common_prefix_length, free_reduce, gromov_product,
                            product_quasi_metric, quasi_metric, shadow_contains, word_distance)

from conftest import F2, F3, raw_letters, words


def test_multiply_examples(f2):
    ab = f2.word("ab")
    assert (ab * f2.word("BA")).is_identity()
    assert str(ab * f2.word("a")) == "aba"


def test_distance_examples(f2):
    assert word_distance(f2.identity(), f2.word("ab")) == 2
    assert word_distance(f2.word("ab"), f2.word("aba")) == 1


def test_gromov_product_examples(f2):
    assert gromov_product(f2.word("ab"), f2.word("aba")) == 2
    x = f2.word("abAAb")
    assert gromov_product(x, x) == len(x)
    xi = BoundaryApprox.periodic(f2, "a", 8)
    zeta = BoundaryApprox.from_letters(f2, f2.parse("aab") + (2,) * 5)
    assert gromov_product(xi, zeta) == 2


def test_boundary_product_truncates_when_undecided(f2):
    xi = BoundaryApprox.periodic(f2, "a", 8)
    v = gromov_product(xi, BoundaryApprox.periodic(f2, "a", 8))
    assert isinstance(v, TruncatedInt) and int(v) == 8


def test_boundary_product_needs_identity_base(f2):
    with pytest.raises(UnsupportedBaseError):
        gromov_product(BoundaryApprox.periodic(f2, "a", 4), f2.word("a"), base=f2.word("b"))


def test_quasi_metric_examples(f2):
    xi = BoundaryApprox.periodic(f2, "ab", 6)
    assert quasi_metric(xi, xi) == 0
    assert quasi_metric(f2.word("ab"), f2.word("aba")) == pytest.approx(math.exp(-2))


def test_shadow_examples(f2):
    a3 = f2.word("aaa")
    assert shadow_contains(a3, 1, BoundaryApprox.periodic(f2, "a", 8))
    assert not shadow_contains(a3, 3, BoundaryApprox.periodic(f2, "b", 8))
    rnd = random.Random(1)
    for _ in range(50):
        eta = BoundaryApprox.from_letters(f2, free_reduce(rnd.choice((1, -1, 2, -2)) for _ in range(40))[:8] or (1,))
        if len(eta.letters) >= 1:
            assert shadow_contains(a3, 3.5, eta)


def test_shadow_needs_resolving_depth(f2):
    with pytest.raises(IndeterminateError):
        shadow_contains(f2.word("aaaa"), 1, BoundaryApprox.periodic(f2, "a", 2))


def test_busemann_examples(f2):
    a_inf = BoundaryApprox.periodic(f2, "a", 2)
    assert busemann(f2.word("a"), a_inf) == -1
    assert busemann(f2.identity(), a_inf) == 0
    assert busemann(f2.word("b"), a_inf) == 1


def test_kill_last_generator(f3, f2):
    pi = KillLastGenerator(f3)
    assert pi(f3.word("c")).is_identity()
    assert pi(f3.word("ab")) == f2.word("ab")
    assert pi(f3.word("acA")).is_identity()


def test_group_mismatch_raises(f2, f3):
    with pytest.raises(SpecMismatchError):
        f2.word("a") * f3.word("a")


def test_non_reduced_word_rejected(f2):
    with pytest.raises(ValueError):
        ReducedWord((1, -1), f2)


def test_sphere_sizes(f2):
    for k in range(6):
        assert len(list(f2.sphere(k))) == f2.sphere_size(k)


def test_product_element_multiplication(f2):
    p = ProductElement(f2.word("ab"), f2.word("b"))
    assert (p * p.inverse()).first.is_identity()
    assert (p * p.inverse()).second.is_identity()


# ------------------------------------------------------------ properties

@given(raw_letters(3))
def test_reduction_confluent(xs):
    # reducing pieces first and then the whole gives the same word
    rnd = random.Random(len(xs))
    cut = rnd.randint(0, len(xs))
    assert free_reduce(free_reduce(xs[:cut]) + free_reduce(xs[cut:])) == free_reduce(xs)


@given(raw_letters(3))
def test_reduction_matches_stack_oracle(xs):
    out = []
    for x in xs:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    assert free_reduce(xs) == tuple(out)


@given(words(), words(), words())
def test_associativity_and_identity(x, y, z):
    assert (x * y) * z == x * (y * z)
    assert x * F2.identity() == x
    assert (x * x.inverse()).is_identity()


@given(words(), words())
def test_distance_symmetric(x, y):
    assert word_distance(x, y) == word_distance(y, x)
    assert word_distance(x, y) == len(x.inverse() * y)


@given(words(), words(), words())
def test_zero_hyperbolicity(x, y, z):
    assert gromov_product(x, y) >= min(gromov_product(x, z), gromov_product(z, y))


@given(words(), words())
def test_product_formula_is_common_prefix(x, y):
    two = len(x) + len(y) - word_distance(x, y)
    assert two % 2 == 0
    assert two // 2 == common_prefix_length(x.letters, y.letters)


@given(words(), words(), words())
def test_product_at_base_is_translate(x, y, w):
    assert gromov_product(x, y, base=w) == gromov_product(w.inverse() * x, w.inverse() * y)


@given(words(3), words(3))
def test_projection_is_homomorphism(x, y):
    pi = KillLastGenerator(F3)
    assert pi(x * y) == pi(x) * pi(y)


@given(words(), words(), words(), words())
def test_product_quasi_metric_is_max(x, y, u, v):
    assert product_quasi_metric((x, y), (u, v)) == max(quasi_metric(x, u), quasi_metric(y, v))


@given(words(max_size=10), st.integers(0, 12), words(max_size=30))
def test_shadow_is_product_threshold(x, R, tail):
    letters = (x * tail).letters
    if len(letters) <= len(x) + 1:
        return
    eta = BoundaryApprox.from_letters(F2, letters)
    cp = common_prefix_length(x.letters, eta.letters)
    assert shadow_contains(x, R, eta) == (len(x) - cp < R)
    if R > len(x):
        assert shadow_contains(x, R, eta)
