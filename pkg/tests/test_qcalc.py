import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpf

from qfreud.context import ConvergenceError, QDomainError, make_context
from qfreud.qcalc import (jackson_bilateral, pochhammer_inf,
                          pochhammer_inf_multi, q_derivative, q_integer)

TOL = mpf("1e-25")


def direct_pochhammer(x, p, stop=mpf("1e-30")):
    # independent oracle: plain partial product until the factor is trivial
    acc = mpf(1)
    xp = mpf(x)
    while abs(xp) >= stop:
        acc *= 1 - xp
        xp *= p
    return acc


class TestPochhammer:
    def test_zero_argument(self, ctx):
        assert pochhammer_inf(0, ctx.q, ctx) == 1

    def test_unit_argument_vanishes(self, ctx):
        assert pochhammer_inf(1, ctx.q, ctx) == 0

    def test_half_half_against_direct_product(self, ctx):
        with ctx.workprec():
            want = direct_pochhammer("0.5", mpf("0.5"))
            got = pochhammer_inf(mpf("0.5"), mpf("0.5"), ctx)
            assert abs(got / want - 1) < TOL
            assert abs(got - mpf("0.2887880950866024")) < mpf("1e-15")

    def test_against_mpmath_qp(self, ctx):
        with ctx.workprec():
            got = pochhammer_inf(mpf("0.3"), ctx.q, ctx)
            want = mpmath.qp(mpf("0.3"), ctx.q)
            assert abs(got / want - 1) < TOL

    def test_divergent_base_rejected(self, ctx):
        with pytest.raises(QDomainError):
            pochhammer_inf(0.5, 1.0, ctx)

    def test_multi_argument_composes(self, ctx):
        with ctx.workprec():
            got = pochhammer_inf_multi((mpf("0.2"), mpf("-0.4")), ctx.q, ctx)
            want = pochhammer_inf(mpf("0.2"), ctx.q, ctx) * \
                pochhammer_inf(mpf("-0.4"), ctx.q, ctx)
            assert abs(got / want - 1) < TOL

    @settings(max_examples=15, deadline=None)
    @given(st.floats(min_value=-3.0, max_value=3.0).filter(lambda x: abs(x - 1) > 1e-3))
    def test_telescoping(self, ctx, x):
        # (qx; q)_inf / (x; q)_inf = 1/(1-x)
        with ctx.workprec():
            xx = mpf(repr(x))
            lhs = pochhammer_inf(ctx.q * xx, ctx.q, ctx) / pochhammer_inf(xx, ctx.q, ctx)
            assert abs(lhs * (1 - xx) - 1) < TOL


class TestQInteger:
    @pytest.mark.parametrize("n,want", [(1, "1"), (2, "1.5"), (3, "1.75"), (0, "0")])
    def test_small_values_at_half(self, n, want):
        assert q_integer(n, mpf("0.5")) == mpf(want)

    def test_negative_index(self):
        # [-1]_q = (q^{-1}-1)/(q-1) = -1/q
        assert abs(q_integer(-1, mpf("0.5")) + 2) < mpf("1e-15")

    def test_inverse_base(self):
        q = mpf("0.5")
        assert abs(q_integer(2, 1 / q) - 3) < mpf("1e-15")

    def test_unit_base_rejected(self):
        with pytest.raises(QDomainError):
            q_integer(3, 1)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(min_value=-8, max_value=8), st.integers(min_value=-8, max_value=8))
    def test_addition_law(self, ctx, n, m):
        # [n+m]_q = [n]_q + q^n [m]_q
        with ctx.workprec():
            q = ctx.q
            lhs = q_integer(n + m, q)
            rhs = q_integer(n, q) + q ** n * q_integer(m, q)
            assert abs(lhs - rhs) < TOL


class TestQDerivative:
    def test_constant(self, ctx):
        assert q_derivative(lambda x: mpf(7), ctx.mpf(2), ctx) == 0

    def test_square_at_one(self, ctx):
        with ctx.workprec():
            got = q_derivative(lambda x: x * x, ctx.mpf(1), ctx)
            assert abs(got - q_integer(2, ctx.q)) < TOL

    def test_monomial_law_cube(self, ctx):
        with ctx.workprec():
            got = q_derivative(lambda x: x ** 3, ctx.mpf(2), ctx)
            assert abs(got - q_integer(3, ctx.q) * 4) < TOL

    def test_inverse_base_variant(self, ctx):
        with ctx.workprec():
            qi = 1 / ctx.q
            got = q_derivative(lambda x: x ** 3, ctx.mpf(2), ctx, base=qi)
            assert abs(got - q_integer(3, qi) * 4) < TOL

    def test_origin_rejected(self, ctx):
        with pytest.raises(QDomainError):
            q_derivative(lambda x: x, ctx.mpf(0), ctx)


class TestJackson:
    def test_odd_integrand_cancels_exactly(self, ctx):
        val, _ = jackson_bilateral(lambda x: x ** 3, 1, ctx)
        assert val == 0

    def test_weighted_constant_against_doubled_context(self, ctx):
        from qfreud.specfun import weight_w
        with ctx.workprec():
            val, tail = jackson_bilateral(lambda x: weight_w(x, ctx), 1, ctx)
            assert val > 0
            assert tail < ctx.trunc_tol * val
        big = ctx.doubled()
        with big.workprec():
            ref, _ = jackson_bilateral(lambda x: weight_w(x, big), 1, big)
        with ctx.workprec():
            assert abs(val / ref - 1) < ctx.trunc_tol

    def test_quartic_moment_identity(self, ctx):
        # int x^4 w = (1/q - 1) int w on the same lattice
        from qfreud.specfun import weight_w
        with ctx.workprec():
            lhs, _ = jackson_bilateral(lambda x: x ** 4 * weight_w(x, ctx), 1, ctx)
            rhs, _ = jackson_bilateral(lambda x: weight_w(x, ctx), 1, ctx)
            assert abs(lhs / ((1 / ctx.q - 1) * rhs) - 1) < TOL

    @settings(max_examples=10, deadline=None)
    @given(st.floats(min_value=-2, max_value=2), st.floats(min_value=-2, max_value=2))
    def test_linearity(self, ctx, u, v):
        from qfreud.specfun import weight_w
        with ctx.workprec():
            uu, vv = mpf(repr(u)), mpf(repr(v))
            f = lambda x: weight_w(x, ctx)
            g = lambda x: x * x * weight_w(x, ctx)
            lhs, _ = jackson_bilateral(lambda x: uu * f(x) + vv * g(x), 1, ctx)
            f0, _ = jackson_bilateral(f, 1, ctx)
            g0, _ = jackson_bilateral(g, 1, ctx)
            assert abs(lhs - (uu * f0 + vv * g0)) < TOL * (1 + abs(lhs))

    def test_lattice_dilation_by_q_power(self, ctx):
        # int f(q^m x) d_q x = q^{-m} int f(u) d_q u when the dilation is a
        # lattice power (same node family, shifted index)
        from qfreud.specfun import weight_w
        with ctx.workprec():
            q2 = ctx.q ** 2
            lhs, _ = jackson_bilateral(lambda x: weight_w(q2 * x, ctx), 1, ctx)
            rhs, _ = jackson_bilateral(lambda x: weight_w(x, ctx), 1, ctx)
            assert abs(lhs * q2 / rhs - 1) < TOL

    def test_tail_violation_flagged(self, ctx):
        # a constant integrand diverges on the q^{-m} side
        with pytest.raises(ConvergenceError):
            jackson_bilateral(lambda x: mpf(1), 1, ctx)


class TestDoubling:
    def test_doubling_changes_results_below_trunc_tol(self, ctx):
        from qfreud.specfun import hq_series, weight_w
        big = ctx.doubled()
        with ctx.workprec():
            z = ctx.mpc("0.37", "0.21")
            pairs = [
                (pochhammer_inf(mpf("0.7"), ctx.q, ctx), pochhammer_inf(mpf("0.7"), big.q, big)),
                (hq_series(z, ctx), hq_series(z, big)),
                (weight_w(z, ctx), weight_w(z, big)),
            ]
            for a, b in pairs:
                assert abs(a / b - 1) < ctx.trunc_tol
