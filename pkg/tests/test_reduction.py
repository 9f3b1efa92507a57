import math
from fractions import Fraction

import numpy as np
import pytest
from gmpy2 import mpfr, mpq
from hypothesis import given
from hypothesis import strategies as st

from pnormcut.gadget import gadget_matrix
from pnormcut.graph import (complete_graph, cycle_graph, incidence_matrix, maxcut_bruteforce,
                            parse_graph, path_graph, random_connected_graph)
from pnormcut.matrix import DenseMatrix
from pnormcut.norms import (infinity_p_norm_exact, objective_power, p_norm_ascent, power_sum,
                            root_p)
from pnormcut.numerics import as_p, precision
from pnormcut.reduction import (BlockSpec, ConstructionError, InsufficientPrecisionError,
                                build_z, build_zdoublestar, build_zstar, build_ztilde,
                                ceil_rational_power, decode_maxcut, decode_maxcut_from_inftyp,
                                default_alpha, pad_square, pipeline_record,
                                required_epsilon_inftyp, required_epsilon_pnorm, round_to_signs,
                                rounding_gap, solve_maxcut_via_pnorm, sphere_distance_hp)

K3 = parse_graph("3 3\n1 2\n2 3\n1 3")


def rel(a, b, bits=400):
    with precision(bits):
        return abs(mpfr(a) - mpfr(b)) / abs(mpfr(b))


class TestBuilders:
    def test_ztilde_k3(self):
        inst = build_ztilde(K3, 3)
        assert inst.matrix.shape == (9, 3)
        assert inst.incidence_weight == mpq(1, 1259712)
        bottom = inst.matrix.exact[6:]
        assert bottom[0, 0] == mpq(1, 1259712) and bottom[0, 1] == mpq(-1, 1259712)
        assert inst.matrix.exact[:6].tolist() == gadget_matrix(3).exact.tolist()

    def test_ztilde_k4_p4(self):
        assert build_ztilde(complete_graph(4), 4).incidence_weight == mpq(1, 8388608)

    def test_ztilde_preconditions(self):
        with pytest.raises(ConstructionError):
            build_ztilde(path_graph(2), 3)
        with pytest.raises(ConstructionError, match="p must exceed 2 for this construction"):
            build_ztilde(K3, 2)

    def test_z_k3_alpha_10(self):
        inst = build_z(K3, 3, 10)
        assert inst.matrix.shape == (9, 3)
        assert set(inst.matrix.f[:6].ravel().tolist()) == {0, 10, -10}
        assert inst.matrix.f[6:].tolist() == incidence_matrix(K3).f.tolist()
        assert inst.bits == 82 and inst.provenance == "z"

    def test_default_alpha(self):
        assert build_z(K3, 3).alpha == 1259712 == default_alpha(3, 3)
        assert default_alpha(4, "5/2") == 20971520

    def test_z_preconditions(self):
        with pytest.raises(ConstructionError):
            build_z(K3, 2)
        with pytest.raises(ConstructionError):
            build_z(K3, 3, Fraction(1, 2))

    def test_zstar_rounds_weight_up(self):
        inst = build_zstar(complete_graph(4), 3)
        assert inst.alpha == 64 * 3 * 4 ** 8
        inst = build_zstar(random_connected_graph(3, np.random.default_rng(0)), "7/3")
        expected = math.ceil(Fraction(64) * Fraction(7, 3) * 3 ** 8 / Fraction(1, 3))
        assert inst.alpha == expected and inst.provenance == "zstar"

    def test_zdoublestar_k8(self):
        inst = build_zdoublestar(K3, 3, 8)
        assert inst.matrix.shape == (51, 3) and inst.matrix.is_ternary()
        assert inst.alpha == 2
        weighted = DenseMatrix(np.vstack([2 * gadget_matrix(3).f, incidence_matrix(K3).f]))
        x = np.random.default_rng(0).standard_normal(3)
        assert rel(objective_power(inst.matrix, x, 3, 128),
                   objective_power(weighted, x, 3, 128)) < 1e-30
        a = p_norm_ascent(inst.matrix, 3)
        b = p_norm_ascent(weighted, 3)
        assert rel(a.value, b.value) < 1e-12

    def test_zdoublestar_k1(self):
        inst = build_zdoublestar(K3, 3, 1)
        stacked = np.vstack([gadget_matrix(3).f, incidence_matrix(K3).f])
        assert inst.matrix.f.tolist() == stacked.tolist()

    def test_zdoublestar_default_is_virtual(self):
        inst = build_zdoublestar(K3, 3)
        assert isinstance(inst.matrix, BlockSpec)
        assert inst.repetitions == 1259712 ** 3
        assert inst.matrix.rows == 6 * 1259712 ** 3 + 3
        with precision(300):
            assert abs(inst.alpha - 1259712) < mpfr(2) ** -100
        with pytest.raises(ConstructionError):
            inst.matrix.materialize()

    def test_metadata(self):
        meta = build_z(K3, 3, 10).metadata()
        assert meta["rows"] == 9 and meta["alpha"] == "10" and not meta["virtual"]


@given(st.fractions(min_value=1, max_value=10**4, max_denominator=50),
       st.sampled_from(["2", "5/2", "3", "7/3"]))
def test_ceil_rational_power(r, p):
    p = as_p(p)
    k = ceil_rational_power(r, p)
    # k**b >= r**a > (k-1)**b, i.e. k = ceil(r**(a/b)), checked in exact integers.
    a, b = p.numerator, p.denominator
    target = Fraction(r) ** a
    assert k ** b >= target and (k - 1) ** b < target


class TestBlockSpec:
    @given(st.integers(1, 30), st.integers(0, 2**32 - 1))
    def test_replication_identity(self, k, seed):
        rng = np.random.default_rng(seed)
        m = DenseMatrix(rng.uniform(-1, 1, (3, 4)))
        spec = BlockSpec(((gadget_matrix(4), k, 1), (m, 1, 1)))
        x = rng.standard_normal(4)
        lhs = spec.power_sum(x, 3, 128)
        rhs = power_sum(spec.materialize().matvec(x), 3, 128)
        assert rel(lhs, rhs) < mpfr(2) ** -100

    def test_effective_weight(self):
        spec = BlockSpec(((gadget_matrix(3), 27, mpq(1, 2)), (gadget_matrix(3), 1, 1)))
        assert spec.effective_weights(3, 100)[0] == mpfr(mpq(3, 2), 100)
        assert spec.shape == (6 * 27 + 6, 3)

    def test_validation(self):
        with pytest.raises(ValueError):
            BlockSpec(((gadget_matrix(3), 0, 1),))
        with pytest.raises(ValueError):
            BlockSpec(((gadget_matrix(3), 1, 1), (gadget_matrix(4), 1, 1)))


class TestPadding:
    def test_examples(self):
        assert pad_square(DenseMatrix([[1, -1]])).f.tolist() == [[1, -1], [0, 0]]
        p = pad_square(DenseMatrix(np.ones((3, 2))))
        assert p.shape == (3, 3) and p.f[:, 2].tolist() == [0, 0, 0]

    def test_k4_norm_unchanged(self):
        m = incidence_matrix(complete_graph(4))
        padded = pad_square(m)
        assert padded.shape == (6, 6)
        a = infinity_p_norm_exact(m, 3, bits=128).value
        b = infinity_p_norm_exact(padded, 3, bits=128).value
        assert a == b


class TestEpsilons:
    def test_pnorm_n3_p3(self):
        exact = 1 / (mpq(132) ** 3 * 27 * mpq(3) ** 27 * 3) / (132 * 3 * mpq(3) ** 8)
        assert rel(required_epsilon_pnorm(3, 3, 200), exact) < mpfr(2) ** -190

    def test_pnorm_n3_p4(self):
        exact = 1 / (mpq(132) ** 4 * 2 ** 4 * mpq(3) ** 35 * 4) / (132 * 2 * mpq(3) ** 8)
        assert rel(required_epsilon_pnorm(3, 4, 200), exact) < mpfr(2) ** -190

    def test_pnorm_fractional_p_against_mpmath(self):
        import mpmath
        with mpmath.workprec(300):
            p = mpmath.mpf(5) / 2
            r = p / (p - 2)
            ref = 1 / (mpmath.mpf(132) ** p * r ** p * mpmath.mpf(5) ** (8 * p + 3) * p) \
                / (132 * r * mpmath.mpf(5) ** 8)
            got = required_epsilon_pnorm(5, "5/2", 200)
            num, den = got.as_integer_ratio()
            assert abs(mpmath.mpf(num) / den - ref) / ref < mpmath.mpf(2) ** -190

    def test_pnorm_monotone_and_preconditions(self):
        assert required_epsilon_pnorm(4, 3) < required_epsilon_pnorm(3, 3)
        with pytest.raises(ConstructionError):
            required_epsilon_pnorm(3, 2)
        with pytest.raises(ValueError):
            required_epsilon_pnorm(2, 3)

    @pytest.mark.parametrize("p, delta, expected", [
        ("1", 1, mpq(1, 34)), ("2", 1, mpq(1, 136)), ("3", Fraction(1, 2), mpq(1, 402)),
    ])
    def test_inftyp(self, p, delta, expected):
        assert rel(required_epsilon_inftyp(p, delta, 200), expected) < mpfr(2) ** -195

    def test_inftyp_rejects_delta(self):
        with pytest.raises(ValueError):
            required_epsilon_inftyp(3, 0)


class TestDecode:
    def test_k3_sign_maximum(self):
        f = root_p(mpfr(mpq(24016, 3), 200), 3, 200)
        res = decode_maxcut(f, 3, 3, 10, 100)
        assert res.maxcut_rounded == 2 and res.rounding_valid
        assert abs(float(res.maxcut_estimate) - 2) < 1e-20

    def test_c4_bipartition(self):
        # ||Zx||^3 = alpha^3 n 2^3 + 2^3 cut = 32000 + 32 at the bipartition; divide by ||x||^3 = 4.
        f = root_p(mpfr(8008, 200), 3, 200)
        res = decode_maxcut(f, 4, 3, 10, 100)
        assert res.maxcut_rounded == 4 and res.rounding_valid

    def test_refuses_low_precision(self):
        f = root_p(mpfr(mpq(24016, 3), 200), 3, 200)
        with pytest.raises(InsufficientPrecisionError):
            decode_maxcut(f, 3, 3, 10, 60)
        with pytest.raises(InsufficientPrecisionError):
            decode_maxcut(mpfr(f, 60), 3, 3, 10, 100)

    def test_declared_error_widens_bound(self):
        f = root_p(mpfr(mpq(24016, 3), 200), 3, 200)
        tight = decode_maxcut(f, 3, 3, 10, 100)
        loose = decode_maxcut(f, 3, 3, 10, 100, rel_error=Fraction(1, 10**6))
        assert loose.additive_error_bound > tight.additive_error_bound
        assert loose.rounding_valid  # 1/72 + (3/8) f^3 * 3e-6 is about 0.023
        coarse = decode_maxcut(f, 3, 3, 10, 100, rel_error=Fraction(1, 10**4))
        assert not coarse.rounding_valid
        with pytest.raises(ValueError):
            decode_maxcut(f, 3, 3, 10, 100, rel_error=1)

    def test_inftyp_examples(self):
        f = 2 * root_p(mpfr(2, 100), 3, 100)
        res = decode_maxcut_from_inftyp(f, 3, bits=90)
        assert res.maxcut_rounded == 2 and abs(float(res.maxcut_estimate) - 2) < 1e-20
        assert decode_maxcut_from_inftyp(0, 3).maxcut_rounded == 0
        assert decode_maxcut_from_inftyp(2, "5/2").maxcut_estimate == 1

    def test_inftyp_declared_error(self):
        res = decode_maxcut_from_inftyp(4, 2, rel_error=Fraction(1, 1000))
        c = 2 * 2 * 0.001
        assert float(res.additive_error_bound) == pytest.approx(c * 4 / (1 - c))


def test_round_to_signs():
    assert round_to_signs((0.99, -1.02, 0.8)) == (1, -1, 1)
    assert round_to_signs((0, -0.5)) == (1, -1)


def test_sphere_distance():
    assert sphere_distance_hp((2, -2, 2), 3, 64) == 0
    # (1, 0) rescales to (sqrt 2, 0): the zero coordinate is 1 away from +-1.
    assert float(sphere_distance_hp((1, 0), 2, 64)) == pytest.approx(1)
    assert float(sphere_distance_hp((1, 0.5), 2, 64)) == pytest.approx(1 - math.sqrt(0.4))


class TestPipeline:
    @pytest.mark.parametrize("g, p, alpha, expected", [
        (K3, 3, 10, 2), (cycle_graph(5), 3, 10, 4), (complete_graph(4), "5/2", 10**4, 4),
        (K3, 3, None, 2), (cycle_graph(5), 3, None, 4),
    ])
    def test_examples(self, g, p, alpha, expected):
        res = solve_maxcut_via_pnorm(g, p, alpha)
        assert res.maxcut_rounded == expected == maxcut_bruteforce(g).value
        assert res.rounding_valid and res.witness_cut.value == expected
        inst = res.details["instance"]
        gap = rounding_gap(inst.matrix, res.details["witness"], as_p(p), res.details["polish_bits"])
        assert 0 <= gap <= mpq(1, g.n ** 2)

    def test_record(self):
        res = solve_maxcut_via_pnorm(K3, 3, 10)
        rec = pipeline_record(K3, res)
        for key in ("n", "p", "alpha", "bits", "f", "maxcut_estimate", "maxcut_rounded",
                    "witness", "method", "timings"):
            assert key in rec
        assert rec["maxcut_rounded"] == 2 and rec["alpha"] == "10"
