"""Near-field and far-field parametrix matrices, their boundary/limit
checks, and the glue residual measuring how far the rescaled far-field
solution sits from the near-field one along a separating contour.

Matrices are 2x2 tuples ((a, b), (c, d)).  The near-field matrix lives in
the unscaled variable z, the far-field one in t = z q^{n/2}; gluing happens
on a circle in the intermediate variable zeta = z q^{n/4}.
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import mp, mpf, mpc

from .context import ConvergenceError, Point, QContext, QDomainError, Scalar
from .qcalc import pochhammer_inf
from .series import ConnectionConstants, SeriesBundle, build_series_bundle, solve_connection
from .specfun import LimitConstants, SpecialFunctionSet, limit_c0_calH

INTERIOR = "interior"
EXTERIOR = "exterior"


def mat_mul(m1, m2):
    (a, b), (c, d) = m1
    (e, f), (g, h) = m2
    return ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))


def mat_inv(m):
    (a, b), (c, d) = m
    det = a * d - b * c
    if det == 0:
        raise ConvergenceError("singular 2x2 matrix")
    return ((d / det, -b / det), (-c / det, a / det))


def mat_dev_from_identity(m) -> Scalar:
    (a, b), (c, d) = m
    return max(abs(a - 1), abs(b), abs(c), abs(d - 1))


@dataclass(frozen=True)
class ContourSpec:
    """Sampling circle for the glue contour.

    The radius must keep the circle an appropriate separating curve:
    strictly between the lattice shells at 1 and 1/q.  Sample angles sit at
    odd multiples of pi/(2*samples), which keeps them away from both the
    real lattice directions and the diagonal pole rays of the weight.
    """
    radius: Scalar
    angles: tuple

    @classmethod
    def default(cls, ctx: QContext, samples: int = 32) -> "ContourSpec":
        with ctx.workprec():
            rho = ctx.q ** (mpf(-1) / 4)
            angles = tuple(mpf(2 * i + 1) / (2 * samples) * 2 for i in range(samples))
            return cls(radius=rho, angles=angles)  # angles as multiples of pi

    def validate(self, ctx: QContext):
        with ctx.workprec():
            if not (1 < self.radius < 1 / ctx.q):
                raise QDomainError("contour radius must lie strictly between "
                                   "the lattice shells 1 and 1/q")

    def points(self, ctx: QContext):
        with ctx.workprec():
            return tuple(self.radius * mp.expjpi(a) for a in self.angles)


@dataclass(frozen=True)
class ParametrixData:
    """Everything needed to evaluate both parametrices for one context."""
    ctx: QContext
    funs: SpecialFunctionSet
    bundle: SeriesBundle
    constants: ConnectionConstants
    limits: LimitConstants


def build_parametrix(ctx: QContext) -> ParametrixData:
    funs = SpecialFunctionSet(ctx)
    bundle = build_series_bundle(ctx)
    constants = solve_connection(ctx, bundle=bundle, funs=funs)
    limits = limit_c0_calH(ctx)
    return ParametrixData(ctx=ctx, funs=funs, bundle=bundle,
                          constants=constants, limits=limits)


def nearfield_jump(z, data: ParametrixData, *, check_poles: bool = True):
    """Jump factor [[1/g, w g h_q], [0, g]]; unimodular by construction."""
    with data.ctx.workprec():
        g = data.funs.g(z)
        return ((1 / g, data.funs.w(z, check_poles=check_poles) * g
                 * data.funs.hq(z, check_poles=check_poles)), (mpc(0), g))


def nearfield_eval(z, region: str, data: ParametrixData, *, check_poles: bool = True):
    """Near-field matrix: interior branch

        [[a/eta2,        lam2/(eta2 lam1) w b],
         [lam3 b,        lam4 w a           ]]

    with lam3 = c0/eta4; the exterior branch is that matrix times the jump
    factor.  Off-lattice z only; near the weight's pole rays use symmetric
    offsets and average.
    """
    ctx, bd, cc = data.ctx, data.bundle, data.constants
    with ctx.workprec():
        eta2, eta4 = cc.eta[1], cc.eta[3]
        lam1, lam2 = cc.lam[0], cc.lam[1]
        lam3 = data.limits.c0 / eta4
        lam4 = lam3 * (cc.lam[3] / cc.lam[2])
        av, bv, wv = bd.a(z), bd.b(z), data.funs.w(z, check_poles=check_poles)
        inner = ((av / eta2, lam2 / (eta2 * lam1) * wv * bv),
                 (lam3 * bv, lam4 * wv * av))
        if region == INTERIOR:
            return inner
        if region == EXTERIOR:
            return mat_mul(inner, nearfield_jump(z, data, check_poles=check_poles))
        raise QDomainError(f"unknown region {region!r}")


def farfield_eval(t, region: str, data: ParametrixData, *, check_poles: bool = True):
    """Far-field matrix: interior branch

        [[a_inf/g,                    mu2 calH psi_odd],
         [b_inf/(g mu4 calH c_psi),   vpsi_even/c_psi ]]

    and exterior = interior * diag(g, 1/g)."""
    ctx, bd, cc = data.ctx, data.bundle, data.constants
    with ctx.workprec():
        mu2, mu4 = cc.mu[1], cc.mu[3]
        cal_h = data.limits.cal_h
        cpsi = cc.c_psi
        gv = data.funs.g(t)
        a_over_g = bd.a_inf(t) / gv
        b_over_g = bd.b_inf(t) / gv
        inner = ((a_over_g, mu2 * cal_h * bd.psi_odd(t)),
                 (b_over_g / (mu4 * cal_h * cpsi), bd.vpsi_even(t) / cpsi))
        if region == INTERIOR:
            return inner
        if region == EXTERIOR:
            return ((a_over_g * gv, inner[0][1] / gv),
                    (inner[1][0] * gv, inner[1][1] / gv))
        raise QDomainError(f"unknown region {region!r}")


def glue_correction(z, ctx: QContext) -> Point:
    """Column correction (-q^4 z^{-4}; q^4)_inf aligning the far-field
    residue structure with the rescaled problem, written in the near
    variable z = t q^{-n/2}.  Equals w(z) z^{2n} q^{n(n/2-1)} / omega(t)."""
    with ctx.workprec():
        q4 = ctx.q ** 4
        return pochhammer_inf(-q4 / z ** 4, q4, ctx)


def glue_jump(s, n: int, data: ParametrixData):
    """J_R(s) = tilde{W}_near(s q^{-n/4})^{-1} tilde{W}_far(s q^{n/4})."""
    if n % 2 or n < 4:
        raise QDomainError("glue requires even n >= 4")
    ctx = data.ctx
    with ctx.workprec():
        shift = ctx.q ** (mpf(n) / 4)
        z = s / shift
        t = s * shift
        near = nearfield_eval(z, EXTERIOR, data)
        mu2 = data.constants.mu[1]
        cpsi_inv = 1 / data.constants.c_psi
        near_t = ((mu2 * near[0][0], mu2 * near[0][1]),
                  (cpsi_inv * near[1][0], cpsi_inv * near[1][1]))
        far = farfield_eval(t, INTERIOR, data)
        kappa = glue_correction(z, ctx)
        far_t = ((far[0][0], far[0][1] * kappa), (far[1][0], far[1][1] * kappa))
        return mat_mul(mat_inv(near_t), far_t)


def glue_residual(n: int, contour: ContourSpec, data: ParametrixData) -> Scalar:
    """sup over contour samples of max-entry |J_R(s) - I|."""
    contour.validate(data.ctx)
    with data.ctx.workprec():
        worst = mpf(0)
        for s in contour.points(data.ctx):
            worst = max(worst, mat_dev_from_identity(glue_jump(s, n, data)))
        return worst


def glue_residual_table(n_values, contour: ContourSpec, data: ParametrixData):
    """Rows (n, residual, ratio to the previous n); ratio fitted over +4 steps."""
    with data.ctx.workprec():
        rows = []
        prev = None
        for n in n_values:
            r = glue_residual(n, contour, data)
            rows.append((n, r, (r / prev) if prev is not None else None))
            prev = r
        return rows
