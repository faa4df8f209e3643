import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from qhardy import (EvaluationError, ExtremalFamily, LatticeFunction, NonConvergent, QParams,
                    improper_integral, interval_integral, jackson_integral, make_extremal,
                    q_number)
from qhardy.errors import DomainError


def power(s, support="all"):
    return LatticeFunction(lambda t: np.power(t, s), "positive", support,
                           lambda lt: (s * np.asarray(lt), 1.0), f"t^{s}")


ONE = LatticeFunction(lambda t: 1.0, "positive", "all", name="one")


class TestJackson:
    @pytest.mark.parametrize("q", [0.1, 0.5, 0.9])
    def test_constant(self, q):
        assert jackson_integral(ONE, 1.0, QParams(q)).value == pytest.approx(1.0, rel=1e-14)

    def test_square(self):
        r = jackson_integral(power(2), 1.0, QParams(0.5))
        assert r.value == pytest.approx(4 / 7, rel=1e-15)

    def test_inverse_sqrt(self):
        r = jackson_integral(power(-0.5), 1.0, QParams(0.5))
        assert r.value == pytest.approx(1 + math.sqrt(0.5), rel=1e-14)

    @pytest.mark.parametrize("q", [0.3, 0.5, 0.8])
    @pytest.mark.parametrize("s", [-0.9, -0.5, 0.0, 0.7, 2.0, 5.5])
    @pytest.mark.parametrize("x", [0.3, 1.0, 7.0])
    def test_power_rule(self, s, x, q):
        p = QParams(q)
        r = jackson_integral(power(s), x, p)
        assert r.value == pytest.approx(x ** (s + 1) / q_number(s + 1, p), rel=1e-12)

    def test_against_direct_sum(self):
        f = lambda t: mp.sin(t) + 2  # noqa: E731
        lf = LatticeFunction(lambda t: np.sin(t) + 2, "positive")
        got = jackson_integral(lf, 1.3, QParams(0.6))
        ref = oracles.jackson(f, 1.3, 0.6, n=400)
        assert abs(got.value - float(ref)) <= max(got.abs_error, 1e-15)

    def test_error_bound_covers_truncation(self):
        p = QParams(0.9, eps_tail=1e-6)
        r = jackson_integral(power(0.5), 1.0, p)
        exact = 1 / q_number(1.5, p)
        assert abs(r.value - exact) <= r.abs_error

    def test_non_finite_sample(self):
        bad = LatticeFunction(lambda t: np.where(t < 0.01, np.inf, 1.0))
        with pytest.raises(EvaluationError):
            jackson_integral(bad, 1.0, QParams(0.5))

    def test_positivity_contract(self):
        bad = LatticeFunction(lambda t: np.where(t < 0.3, -1.0, 1.0), "positive")
        with pytest.raises(EvaluationError):
            jackson_integral(bad, 1.0, QParams(0.5))

    def test_k_max_exhausted(self):
        with pytest.raises(NonConvergent):
            jackson_integral(power(-0.999999), 1.0, QParams(0.5, k_max=50))

    def test_needs_positive_x(self):
        with pytest.raises(DomainError):
            jackson_integral(ONE, 0.0, QParams(0.5))


class TestImproper:
    def test_extremal_square(self):
        f = make_extremal(ExtremalFamily("power-unit", 2.0))
        assert improper_integral(f, QParams(0.5)).value == pytest.approx(4 / 7, rel=1e-15)

    def test_unit_indicator(self):
        f = make_extremal(ExtremalFamily("power-unit", 0.0))
        assert improper_integral(f, QParams(0.5)).value == pytest.approx(1.0, rel=1e-15)

    def test_slow_tail_diverges(self):
        # t^-0.5 on [1, inf): (1-q) sum_m q^(-m/2) grows without bound
        f = make_extremal(ExtremalFamily("power-tail", -0.5))
        with pytest.raises(NonConvergent) as info:
            improper_integral(f, QParams(0.5))
        assert info.value.tail == "large-t"

    def test_tail_value(self):
        # t^-1.5 on [1, inf): (1-q) sum_{m>=0} q^(m/2); dropping the node t = 1
        # leaves sqrt(q) + q at q = 1/2
        f = make_extremal(ExtremalFamily("power-tail", -1.5))
        q = 0.5
        ref = oracles.lattice_sum(lambda m: (1 - mp.mpf(q)) * mp.mpf(q) ** (0.5 * m), 0, 300)
        got = improper_integral(f, QParams(q))
        assert got.value == pytest.approx(float(ref), rel=1e-14)
        open_tail = interval_integral(f, 1.0, math.inf, QParams(q))
        assert open_tail.value == pytest.approx(math.sqrt(q) + q, rel=1e-14)

    def test_small_t_divergence_named(self):
        with pytest.raises(NonConvergent) as info:
            improper_integral(make_extremal(ExtremalFamily("power-unit", -1.0)),
                              QParams(0.5, k_max=2000))
        assert info.value.tail == "small-t"

    def test_two_sided_power(self):
        f = make_extremal(ExtremalFamily("power-two", -0.4, -3.0))
        q = 0.7
        qq = mp.mpf(q)
        ref = (1 - qq) * (oracles.lattice_sum(lambda k: qq ** (0.6 * k), 0, 2000)
                          + oracles.lattice_sum(lambda k: qq ** (-2 * k), -400, -1))
        assert improper_integral(f, QParams(q)).value == pytest.approx(float(ref), rel=1e-13)


class TestInterval:
    def test_constant(self):
        assert interval_integral(ONE, 0.5, 1.0, QParams(0.5)).value == pytest.approx(0.5)

    def test_constant_to_infinity_diverges(self):
        with pytest.raises(NonConvergent):
            interval_integral(ONE, 1.0, math.inf, QParams(0.5))

    def test_inverse_square_tail(self):
        f = make_extremal(ExtremalFamily("power-tail", -2.0))
        q = 0.5
        ref = oracles.lattice_sum(lambda k: (1 - mp.mpf(q)) * mp.mpf(q) ** (-k), -200, -1)
        got = interval_integral(f, 1.0, math.inf, QParams(q))
        assert got.value == pytest.approx(float(ref), rel=1e-14)
        assert got.value == pytest.approx(0.5, rel=1e-14)

    def test_bad_bounds(self):
        with pytest.raises(DomainError):
            interval_integral(ONE, 1.0, 0.5, QParams(0.5))


class TestExtremal:
    def test_unit_indicator(self):
        f = make_extremal(ExtremalFamily("power-unit", 0.0))
        assert list(f(np.array([0.25, 1.0, 2.0]))) == [1.0, 1.0, 0.0]

    def test_tail(self):
        f = make_extremal(ExtremalFamily("power-tail", -1.0))
        assert f(2.0) == 0.5 and f(0.5) == 0.0

    def test_two_piece(self):
        f = make_extremal(ExtremalFamily("power-two", -0.4, 1.0))
        assert f(0.5) == pytest.approx(0.5 ** -0.4) and f(2.0) == pytest.approx(2.0)

    def test_power_two_requires_beta2(self):
        with pytest.raises(ValueError):
            ExtremalFamily("power-two", 1.0)

    def test_log_evaluator_matches(self):
        for fam in (ExtremalFamily("power-unit", 1.3), ExtremalFamily("power-tail", -2.0),
                    ExtremalFamily("power-two", 0.5, -3.0), ExtremalFamily("power-plain", -0.2)):
            f = make_extremal(fam)
            lt = np.log(np.array([0.1, 0.5, 1.0, 3.0]))
            la, sg = f.log_samples(lt)
            assert np.allclose(sg * np.exp(la), f(np.exp(lt)), rtol=1e-14)


TEST_FUNCS = [
    make_extremal(ExtremalFamily("power-two", -0.3, -2.5)),
    make_extremal(ExtremalFamily("power-unit", 1.0)),
    LatticeFunction(lambda t: 1 / (1 + t * t), "positive", name="lorentz"),
    LatticeFunction(lambda t: np.exp(-t) * np.sqrt(t), "nonneg", name="sqrt-exp"),
]


class TestInvariants:
    @pytest.mark.parametrize("f", TEST_FUNCS, ids=lambda f: f.name)
    @pytest.mark.parametrize("q", [0.3, 0.7])
    def test_additivity(self, f, q):
        p = QParams(q)
        whole = improper_integral(f, p)
        head = jackson_integral(f, 1.0, p)
        # the part over (1, inf) summed directly over k <= -1
        qq = mp.mpf(q)
        upper = (1 - qq) * oracles.lattice_sum(
            lambda k: qq ** k * float(f(float(qq ** k))), -120, -1)
        err = whole.abs_error + head.abs_error + 1e-15 * abs(whole.value)
        assert abs(whole.value - (head.value + float(upper))) <= err
        tail = interval_integral(f, 1.0, math.inf, p)
        assert abs(whole.value - head.value - tail.value) <= err + tail.abs_error

    @pytest.mark.parametrize("c", [-2.0, 0.5, 10.0])
    @pytest.mark.parametrize("f", TEST_FUNCS, ids=lambda f: f.name)
    def test_homogeneity(self, f, c):
        p = QParams(0.6)
        base = improper_integral(f, p).value
        assert improper_integral(f.scaled(c), p).value == pytest.approx(c * base, rel=1e-13)

    def test_linearity(self):
        p = QParams(0.6)
        f, g = TEST_FUNCS[2], TEST_FUNCS[3]
        h = LatticeFunction(lambda t: 3 * f(t) - 0.5 * g(t), "unrestricted")
        ref = 3 * jackson_integral(f, 2.0, p).value - 0.5 * jackson_integral(g, 2.0, p).value
        assert jackson_integral(h, 2.0, p).value == pytest.approx(ref, rel=1e-13)

    @pytest.mark.parametrize("ell", [0.25, 2.0, 8.0])
    @pytest.mark.parametrize("f", TEST_FUNCS[2:], ids=lambda f: f.name)
    def test_scaling(self, f, ell):
        p = QParams(0.6)
        lhs = jackson_integral(f, ell, p).value
        rhs = ell * jackson_integral(f.dilated(ell), 1.0, p).value
        assert lhs == pytest.approx(rhs, rel=1e-12)

    @given(st.floats(-0.95, 4.0), st.floats(0.05, 0.95), st.floats(0.01, 50.0))
    def test_power_rule_property(self, s, q, x):
        p = QParams(q)
        got = jackson_integral(power(s), x, p)
        assert got.value == pytest.approx(x ** (s + 1) / q_number(s + 1, p), rel=1e-11)

    @given(st.floats(0.0, 3.0), st.floats(0.0, 3.0), st.floats(0.2, 0.9))
    def test_monotonicity(self, a, b, q):
        p = QParams(q)
        lo, hi = sorted((a, b))
        f = LatticeFunction(lambda t: np.exp(-t) * (1 + hi), "nonneg")
        g = LatticeFunction(lambda t: np.exp(-t) * (1 + lo), "nonneg")
        rf, rg = improper_integral(f, p), improper_integral(g, p)
        assert rf.value >= rg.value - (rf.abs_error + rg.abs_error)
