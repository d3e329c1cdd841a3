"""The q-periodic kernel h_q, the quartic weight w, the auxiliary products
g and omega, their q-difference identities, and the limit constants tying
them together.

All four functions are built from infinite Pochhammer products or bilateral
lattice sums and satisfy one-step q-difference equations:

    h_q(qz) = h_q(z)          w(qz) = (1+z^4) w(z)
    g(qz)  = -z^{-2} g(z)     omega(qz) = z^4 omega(z)

h_q has simple poles on the lattice +-q^k; g has simple zeros there; their
product is regular, which is how the lattice limits c0 and calH below are
evaluated (symmetric off-lattice offsets, extrapolated).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from mpmath import mp, mpf, mpc

from .context import ConvergenceError, Point, QContext, QDomainError, Scalar
from .qcalc import pochhammer_inf


def hq_series(z, ctx: QContext, *, check_poles: bool = True) -> Point:
    """Bilateral sum  h_q(z) = sum_k 2 z q^k / (z^2 - q^{2k}).

    Terms decay geometrically on both tails once q^k leaves the annulus
    containing |z|; cutoffs from the context must cover that annulus.
    """
    with ctx.workprec():
        zz = z if isinstance(z, (mpf, mpc)) else ctx.mpc(z)
        if zz == 0:
            raise QDomainError("h_q undefined at z=0")
        q = ctx.q
        guard = ctx.guard_radius
        z2 = zz * zz
        total = mpc(0)
        qk = q ** (-ctx.kneg)
        for _ in range(-ctx.kneg, ctx.kpos + 1):
            den = z2 - qk * qk
            if check_poles and abs(den) < guard * qk:
                raise QDomainError(
                    f"h_q evaluation too close to a lattice pole near |q^k|={mp.nstr(qk, 8)}")
            total += 2 * zz * qk / den
            qk = qk * q
        return total


def _ray_pole_guard(z4, ctx: QContext, name: str, negative_powers: bool):
    # Poles sit where -z^4 hits q^{-4j} (j >= 0; all j in Z when
    # negative_powers).  Compare y = -z^4 against the nearest such shell.
    with ctx.workprec():
        y = -z4
        ay = abs(y)
        if ay == 0:
            return
        guard = ctx.guard_radius
        q4 = ctx.q ** 4
        mstar = int(mp.nint(mp.log(ay) / mp.log(q4)))
        for m in (mstar - 1, mstar, mstar + 1):
            if m > 0 and not negative_powers:
                continue
            if abs(y - q4 ** m) < guard * q4 ** m:
                raise QDomainError(f"{name} evaluated too close to a pole ray")


def weight_w(x, ctx: QContext, *, check_poles: bool = True) -> Point:
    """Quartic weight w(x) = 1/(-x^4; q^4)_inf; even, poles on diagonal rays."""
    with ctx.workprec():
        q4 = ctx.q ** 4
        xx = x if isinstance(x, (mpf, mpc)) else ctx.mpc(x)
        if check_poles:
            _ray_pole_guard(xx ** 4, ctx, "w", negative_powers=False)
        den = pochhammer_inf(-(xx ** 4), q4, ctx)
        if den == 0:
            raise QDomainError("w evaluated at a pole (diagonal ray point)")
        return 1 / den


def gfun(z, ctx: QContext) -> Point:
    """g(z) = (z^2; q^2)_inf (q^2 z^{-2}; q^2)_inf, zeros at +-q^k, k in Z."""
    with ctx.workprec():
        q2 = ctx.q ** 2
        zz = z if isinstance(z, (mpf, mpc)) else ctx.mpc(z)
        if zz == 0:
            raise QDomainError("g undefined at z=0")
        z2 = zz * zz
        return pochhammer_inf(z2, q2, ctx) * pochhammer_inf(q2 / z2, q2, ctx)


def omegafun(t, ctx: QContext, *, check_poles: bool = True) -> Point:
    """omega(t) = 1/(-t^4, -q^4 t^{-4}; q^4)_inf."""
    with ctx.workprec():
        q4 = ctx.q ** 4
        tt = t if isinstance(t, (mpf, mpc)) else ctx.mpc(t)
        if tt == 0:
            raise QDomainError("omega undefined at t=0")
        t4 = tt ** 4
        if check_poles:
            _ray_pole_guard(t4, ctx, "omega", negative_powers=True)
        den = pochhammer_inf(-t4, q4, ctx) * pochhammer_inf(-q4 / t4, q4, ctx)
        if den == 0:
            raise QDomainError("omega evaluated at a pole (diagonal ray point)")
        return 1 / den


def _hq_product_raw(z, ctx: QContext) -> Point:
    # Unnormalised product form z (qz^2, qz^-2; q^2) / (z^2, q^2 z^-2; q^2).
    with ctx.workprec():
        q = ctx.q
        q2 = q * q
        zz = z if isinstance(z, (mpf, mpc)) else ctx.mpc(z)
        z2 = zz * zz
        num = zz * pochhammer_inf(q * z2, q2, ctx) * pochhammer_inf(q / z2, q2, ctx)
        den = pochhammer_inf(z2, q2, ctx) * pochhammer_inf(q2 / z2, q2, ctx)
        if den == 0:
            raise QDomainError("h_q product form evaluated at a lattice pole")
        return num / den


_C1_POINTS = ((0.35, 0.40), (0.55, 0.95), (0.80, 0.30), (1.30, 0.70),
              (0.45, 1.90), (0.72, 2.50), (1.05, 1.30), (1.60, 0.15),
              (0.90, 2.10), (0.60, 0.55))


def calibrate_c1(ctx: QContext):
    """Fix the proportionality constant between the series and product forms.

    The ratio series/product is a constant c1; it is measured at one
    reference point and verified at ten others spread over the annulus.
    Returns ``(c1, spread)`` with spread = max relative disagreement.
    """
    with ctx.workprec():
        zstar = ctx.mpf("0.4") * mp.expjpi(mpf(1) / 8)
        c1 = hq_series(zstar, ctx) / _hq_product_raw(zstar, ctx)
        spread = mpf(0)
        for r, theta in _C1_POINTS:
            zz = ctx.mpf(r) * mp.expjpi(ctx.mpf(theta) / mp.pi)
            ratio = hq_series(zz, ctx) / _hq_product_raw(zz, ctx)
            spread = max(spread, abs(ratio / c1 - 1))
        if spread > 1000 * ctx.trunc_tol:
            raise ConvergenceError(
                f"series/product calibration unstable, spread {mp.nstr(spread, 8)}")
        return c1, spread


def hq_product(z, ctx: QContext, c1=None) -> Point:
    """Product-form evaluation of h_q using the calibrated constant c1."""
    if c1 is None:
        c1, _ = calibrate_c1(ctx)
    with ctx.workprec():
        return c1 * _hq_product_raw(z, ctx)


@dataclass(frozen=True)
class LimitConstants:
    """c0 (lattice limit of 1/(g^2 w h_q^2)) and calH (= omega g^2 h_q^2 at q)."""
    c0: Point
    cal_h: Point
    product_error: Scalar       # |c0 * cal_h - 1|
    c0_deltas: tuple            # successive |c0_k - c0_{k-1}| (diagnostic)


def _regularized(fn, z0, ctx: QContext, eps=None):
    # Symmetric +-eps offsets cancel the odd term of the local expansion,
    # leaving an O(eps^2) error far below trunc_tol.
    with ctx.workprec():
        e = ctx.pole_offset if eps is None else eps
        return (fn(z0 * (1 + e)) + fn(z0 * (1 - e))) / 2


def limit_c0_calH(ctx: QContext, *, k_start: int = 6, k_max: int | None = None) -> LimitConstants:
    """Evaluate c0 = lim_k 1/(g^2 w h_q^2)(q^{-k}) and calH = (omega g^2 h_q^2)(q).

    Both expressions mix a simple zero of g with a simple pole of h_q, so
    each is computed at z0(1 +- eps) and averaged.  c0's shell estimates
    converge like q^{4k}; a non-convergence error is raised if successive
    deltas stop decreasing.
    """
    with ctx.workprec():
        q = ctx.q

        def c0_at(z):
            gh = gfun(z, ctx) * hq_series(z, ctx, check_poles=False)
            return 1 / (gh * gh * weight_w(z, ctx))

        if k_max is None:
            # q^{4(k_max+1)} below 1e-30 keeps the limit error negligible
            # next to the 1e-22 acceptance comparisons downstream.
            k_max = int(mp.ceil(30 * mp.log(10) / (4 * mp.log(1 / q)))) + 2
            k_max = min(k_max, ctx.kneg - int(mp.ceil(mp.log(ctx.trunc_tol) / mp.log(q))) - 8)
        if k_max <= k_start:
            raise ConvergenceError("lattice cutoffs too small for the c0 limit")

        prev = None
        deltas = []
        for k in range(k_start, k_max + 1):
            est = _regularized(c0_at, q ** (-k), ctx)
            if prev is not None:
                deltas.append(abs(est - prev))
            prev = est
        if len(deltas) >= 3 and not deltas[-1] < deltas[0]:
            raise ConvergenceError("c0 shell estimates are not converging")
        c0 = prev

        def calh_at(z):
            gh = gfun(z, ctx) * hq_series(z, ctx, check_poles=False)
            return omegafun(z, ctx) * gh * gh

        cal_h = _regularized(calh_at, q, ctx)
        return LimitConstants(c0=c0, cal_h=cal_h,
                              product_error=abs(c0 * cal_h - 1),
                              c0_deltas=tuple(deltas))


def hq_ray_scan(r_grid, angle, ctx: QContext):
    """Scan h_q along the ray z = r e^{i*angle}; rows of (r, Re, Im)."""
    with ctx.workprec():
        ea = mp.expjpi(ctx.mpf(angle) / mp.pi)
        rows = []
        for r in r_grid:
            z = ctx.mpf(r) * ea
            val = hq_series(z, ctx)
            rows.append((ctx.mpf(r), val.real, val.imag))
        return rows


@dataclass
class SpecialFunctionSet:
    """Handles for h_q, w, g, omega bound to one context, plus cached c1."""

    ctx: QContext
    c1: Point = field(default=None)
    c1_spread: Scalar = field(default=None)

    def __post_init__(self):
        if self.c1 is None:
            self.c1, self.c1_spread = calibrate_c1(self.ctx)

    def hq(self, z, *, check_poles: bool = True) -> Point:
        return hq_series(z, self.ctx, check_poles=check_poles)

    def hq_prod(self, z) -> Point:
        return hq_product(z, self.ctx, c1=self.c1)

    def w(self, x, *, check_poles: bool = True) -> Point:
        return weight_w(x, self.ctx, check_poles=check_poles)

    def g(self, z) -> Point:
        return gfun(z, self.ctx)

    def omega(self, t, *, check_poles: bool = True) -> Point:
        return omegafun(t, self.ctx, check_poles=check_poles)
