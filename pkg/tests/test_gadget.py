import itertools
from fractions import Fraction

import numpy as np
import pytest
from gmpy2 import mpfr, mpq
from hypothesis import given
from hypothesis import strategies as st

from pnormcut.gadget import (deficiency_bound, distance_to_signs, gadget_matrix, gadget_value,
                             gadget_values, pair_inequality_terms, sphere_samples)
from pnormcut.norms import power_sum
from pnormcut.numerics import as_p, precision


def test_n2_rows_follow_display_order():
    assert gadget_matrix(2).f.tolist() == [[1, -1], [1, 1], [-1, 1], [1, 1]]


def test_structure():
    for n in range(2, 9):
        a = gadget_matrix(n).f
        assert a.shape == (2 * n, n)
        assert (np.count_nonzero(a, axis=1) == 2).all()
        if n > 2:
            assert (np.count_nonzero(a, axis=0) == 4).all()
        assert gadget_matrix(n).is_ternary()
    assert gadget_matrix(5).nnz() == 20 and gadget_matrix(5).shape == (10, 5)


def test_all_ones_image():
    y = gadget_matrix(3).f @ np.ones(3)
    assert sorted(y.tolist()) == [0, 0, 0, 2, 2, 2]


def test_rejects_small_n():
    with pytest.raises(ValueError):
        gadget_matrix(1)
    with pytest.raises(ValueError):
        gadget_value([1], 3)


@pytest.mark.parametrize("x, p, expected", [
    ((1, 1, 1), 3, 24), ((1, -1, 1), 3, 24), ((-1, -1, 1), 3, 24),
    ((1, 0), 2, 4), ((1, 0, 0, 0, 0), 3, 4),
])
def test_gadget_value_examples(x, p, expected):
    assert gadget_value(x, p, 64) == expected


def test_sign_vectors_attain_n_two_p():
    for n in range(2, 7):
        for x in itertools.product((-1, 1), repeat=n):
            assert gadget_value(x, 3) == n * 8


@given(st.lists(st.floats(-5, 5), min_size=2, max_size=8), st.sampled_from(["2", "5/2", "3", "4"]))
def test_gadget_value_equals_matrix_power_sum(x, p):
    direct = gadget_value(x, p, 128)
    via_matrix = power_sum(gadget_matrix(len(x)).matvec(x), p, 128)
    with precision(160):
        assert abs(direct - via_matrix) <= mpfr(2) ** -100 * max(direct, mpfr(1))
    batch = gadget_values(np.array([x]), float(as_p(p)))[0]
    assert np.isclose(batch, float(direct), rtol=1e-10, atol=1e-12)


class TestPairInequality:
    @pytest.mark.parametrize("x, y, p, expected", [
        (1, 1, 3, (8, 8, 0)), (1, 0, 2, (2, 2, 0)), (2, 1, 3, (28, 36, 4)),
    ])
    def test_examples(self, x, y, p, expected):
        assert pair_inequality_terms(x, y, p) == pytest.approx(expected)

    def test_rejects_small_p(self):
        with pytest.raises(ValueError):
            pair_inequality_terms(1.0, 2.0, 1.5)

    @given(st.floats(-100, 100), st.floats(-100, 100), st.floats(2, 10))
    def test_inequality(self, x, y, p):
        lhs, bound, err = pair_inequality_terms(x, y, p)
        assert err >= -1e-12
        assert lhs <= bound - err + 1e-12 * max(bound, 1e-300)


class TestDeficiency:
    def test_examples(self):
        assert deficiency_bound(5, 2, Fraction(1, 3)) == 20
        with precision(200):
            assert deficiency_bound(3, 3, Fraction(1, 2), 150) == mpfr(24 - mpq(1, 96), 150)
            assert deficiency_bound(2, 4, Fraction(1, 4), 150) == mpfr(32 - mpq(3, 512), 150)

    @pytest.mark.parametrize("c", [0, Fraction(3, 4), -1])
    def test_rejects_c(self, c):
        with pytest.raises(ValueError):
            deficiency_bound(3, 3, c)

    def test_rejects_p(self):
        with pytest.raises(ValueError):
            deficiency_bound(3, Fraction(3, 2), Fraction(1, 4))


@given(st.integers(2, 8), st.sampled_from(["5/2", "3", "4"]), st.integers(0, 2**32 - 1))
def test_sphere_points_obey_cap_and_deficiency(n, p, seed):
    y = sphere_samples(n, p, 200, np.random.default_rng(seed))
    pf = float(as_p(p))
    assert np.allclose((np.abs(y) ** pf).sum(axis=1), n)
    vals = gadget_values(y, pf)
    cap = n * 2 ** pf
    assert (vals <= cap + 1e-9).all()
    c = np.minimum(distance_to_signs(y), 0.5)
    bound = cap - 3 * (pf - 2) * c ** 2 / (2 ** pf * n * n)
    assert (vals <= bound + 1e-9).all()


def test_distance_to_signs():
    assert distance_to_signs(np.array([1.0, -1.0])) == 0
    assert distance_to_signs(np.array([0.9, -1.2])) == pytest.approx(0.2)
