import random

import pytest
from mpmath import mp, mpf, mpc

from qfreud.context import ConvergenceError, QDomainError
from qfreud.qcalc import pochhammer_inf
from qfreud import specfun as sf

TOL = mpf("1e-25")


def annulus_points(ctx, count, seed=7, r_lo=0.55, r_hi=0.95):
    """Deterministic pseudo-random points in q < |z| < 1, away from the
    real axis (lattice poles) and the origin."""
    rng = random.Random(seed)
    pts = []
    with ctx.workprec():
        while len(pts) < count:
            r = mpf(repr(rng.uniform(r_lo, r_hi)))
            theta = mpf(repr(rng.uniform(0.06, 0.44)))
            pts.append(r * mp.expjpi(theta))
    return pts


class TestHqSeries:
    def test_q_periodicity(self, ctx):
        with ctx.workprec():
            for z in annulus_points(ctx, 20):
                d = abs(sf.hq_series(ctx.q * z, ctx) - sf.hq_series(z, ctx))
                assert d < TOL

    def test_purely_imaginary_on_unit_and_sqrtq_circles(self, ctx):
        with ctx.workprec():
            for j in range(16):
                e = mp.expjpi(mpf(2 * j + 1) / 16)
                assert abs(sf.hq_series(e, ctx).real) < TOL
                assert abs(sf.hq_series(mp.sqrt(ctx.q) * e, ctx).real) < TOL

    def test_zero_at_sqrt_q(self, ctx):
        with ctx.workprec():
            assert abs(sf.hq_series(mp.sqrt(ctx.q), ctx)) < TOL

    def test_pole_guard(self, ctx):
        with ctx.workprec():
            with pytest.raises(QDomainError):
                sf.hq_series(ctx.q ** 3 * (1 + mpf("1e-20")), ctx)
            # deliberate limits may opt out
            sf.hq_series(ctx.q ** 3 * (1 + mpf("1e-20")), ctx, check_poles=False)

    def test_origin_rejected(self, ctx):
        with pytest.raises(QDomainError):
            sf.hq_series(0, ctx)


class TestHqProduct:
    def test_matches_series_at_random_points(self, ctx, funs):
        with ctx.workprec():
            for z in annulus_points(ctx, 20, seed=11):
                assert abs(funs.hq_prod(z) / sf.hq_series(z, ctx) - 1) < TOL

    def test_zeros_on_half_shifted_lattice(self, ctx, funs):
        with ctx.workprec():
            for k in (-1, 0, 1, 2):
                z = ctx.q ** (k + mpf(1) / 2)
                assert abs(funs.hq_prod(z)) < TOL

    def test_calibration_stable_and_matches_residue_form(self, ctx):
        # matching residues at z=1 gives c1 = -2 (q^2;q^2)^2 / (q;q^2)^2
        with ctx.workprec():
            c1, spread = sf.calibrate_c1(ctx)
            assert spread < TOL
            q2 = ctx.q ** 2
            closed = -2 * pochhammer_inf(q2, q2, ctx) ** 2 / \
                pochhammer_inf(ctx.q, q2, ctx) ** 2
            assert abs(c1 / closed - 1) < TOL


class TestWeightAndProducts:
    def test_w_at_zero(self, ctx):
        assert sf.weight_w(0, ctx) == 1

    def test_g_vanishes_at_one(self, ctx):
        assert abs(sf.gfun(1, ctx)) == 0

    def test_w_step_identity(self, ctx):
        with ctx.workprec():
            z = ctx.mpf("1.3")
            lhs = sf.weight_w(ctx.q * z, ctx) / sf.weight_w(z, ctx)
            assert abs(lhs - (1 + z ** 4)) < TOL

    def test_g_step_identity(self, ctx):
        with ctx.workprec():
            z = ctx.mpc("1.3", "0.4")
            assert abs(sf.gfun(ctx.q * z, ctx) + z ** -2 * sf.gfun(z, ctx)) < TOL

    def test_omega_step_identity(self, ctx):
        with ctx.workprec():
            z = ctx.mpc("0.8", "0.3")
            assert abs(sf.omegafun(ctx.q * z, ctx) - z ** 4 * sf.omegafun(z, ctx)) < TOL

    def test_g_iterated_identity_chain(self, ctx):
        # g(q^{-n/2} z) (-1)^{n/2} q^{n^2/4 + n/2} z^{-n} = g(z), even n <= 12
        with ctx.workprec():
            z = ctx.mpc("0.9", "0.35")
            g0 = sf.gfun(z, ctx)
            for n in range(2, 13, 2):
                half = n // 2
                lhs = sf.gfun(ctx.q ** (-half) * z, ctx) * (-1) ** half \
                    * ctx.q ** (n * n / mpf(4) + half) * z ** (-n)
                assert abs(lhs / g0 - 1) < TOL

    def test_weight_omega_relation(self, ctx):
        # w(z) z^{2n} q^{n(n/2-1)} = (-q^4 z^{-4}; q^4) omega(z q^{n/2}), even n
        with ctx.workprec():
            z = ctx.mpc("1.45", "0.5")
            q4 = ctx.q ** 4
            poch = pochhammer_inf(-q4 / z ** 4, q4, ctx)
            for n in (2, 6, 10):
                half = n // 2
                lhs = sf.weight_w(z, ctx) * z ** (2 * n) * ctx.q ** (n * (half - 1))
                rhs = poch * sf.omegafun(z * ctx.q ** half, ctx)
                assert abs(lhs / rhs - 1) < TOL

    def test_w_pole_rejected(self, ctx):
        with ctx.workprec():
            with pytest.raises(QDomainError):
                sf.weight_w(mp.expjpi(mpf(1) / 4), ctx)


class TestLimitConstants:
    def test_product_is_one(self, ctx):
        lim = sf.limit_c0_calH(ctx)
        with ctx.workprec():
            assert lim.product_error < 1000 * TOL

    def test_shell_deltas_decrease_geometrically(self, ctx):
        lim = sf.limit_c0_calH(ctx)
        with ctx.workprec():
            # convergence rate is q^4 per shell
            q4 = float(ctx.q) ** 4
            head = lim.c0_deltas[:6]
            for d1, d2 in zip(head, head[1:]):
                assert float(d2 / d1) < 4 * q4

    def test_offset_richardson_agreement(self, ctx):
        # calH via offsets eps and eps/2 must agree after extrapolation
        with ctx.workprec():
            q = ctx.q

            def calh_at(z):
                gh = sf.gfun(z, ctx) * sf.hq_series(z, ctx, check_poles=False)
                return sf.omegafun(z, ctx) * gh * gh

            eps = ctx.pole_offset
            v1 = (calh_at(q * (1 + eps)) + calh_at(q * (1 - eps))) / 2
            v2 = (calh_at(q * (1 + eps / 2)) + calh_at(q * (1 - eps / 2))) / 2
            assert abs(v1 / v2 - 1) < TOL


class TestRayScan:
    def test_pi_over_4_structure(self, ctx):
        with ctx.workprec():
            q = ctx.q
            zeros = [q ** (mpf(k) / 2) for k in (-1, 0, 1, 2)]
            mids = [q ** (mpf(2 * k + 1) / 4) for k in (-1, 0, 1)]
            rows = sf.hq_ray_scan(zeros + mids, mp.pi / 4, ctx)
            for r, re, im in rows[:4]:
                assert abs(re) < TOL
            for r, re, im in rows[4:]:
                assert abs(re) > mpf("0.001")

    def test_ray_symmetries(self, ctx):
        # Re flips sign between pi/4 and 3pi/4; Im is shared
        with ctx.workprec():
            r = mpf("0.83")
            v1 = sf.hq_series(r * mp.expjpi(mpf(1) / 4), ctx)
            v3 = sf.hq_series(r * mp.expjpi(mpf(3) / 4), ctx)
            v1m = sf.hq_series(r * mp.expjpi(mpf(-1) / 4), ctx)
            assert abs(v1.real + v3.real) < TOL
            assert abs(v1.imag - v3.imag) < TOL
            assert abs(v1.real - v1m.real) < TOL
            assert abs(v1.imag + v1m.imag) < TOL
            assert abs(v1.imag) > mpf("0.1")
