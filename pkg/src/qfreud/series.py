"""Power-series solutions of the six q-difference equations behind the
near-field and far-field parametrices, plus the connection constants that
express each solution family in the other's basis.

Every series below is produced by a two-term coefficient recurrence derived
by substituting sum c_i z^{+-i} into its defining equation and collecting
powers.  The recurrences preserve parity exactly (coefficients of the wrong
parity stay bit-zero), and each emitted series can be pushed back through
its equation to measure a residual, which is the primary correctness oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from mpmath import mp, mpf, mpc

from .context import ConvergenceError, Point, QContext, QDomainError, Scalar
from .specfun import SpecialFunctionSet

ASCENDING = "ascending"     # sum c_i z^i, expansion at 0
DESCENDING = "descending"   # sum c_i z^-i, expansion at infinity

ENTIRE = "entire"
PUNCTURED = "punctured"     # analytic on C \ {0}
ABS_GT_Q = "abs_gt_q"       # converges for |z| > q only


@dataclass(frozen=True)
class PowerSeries:
    """Truncated one-sided power series with parity and validity metadata."""

    name: str
    kind: str                # ASCENDING or DESCENDING
    parity: str              # "even" | "odd"
    coeffs: tuple            # index i holds the z^{+-i} coefficient
    q: Scalar
    validity: str

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        """Horner evaluation in z (ascending) or 1/z (descending)."""
        u = z if self.kind == ASCENDING else 1 / z
        acc = mpf(0)
        for c in reversed(self.coeffs):
            acc = acc * u + c
        return acc

    def in_domain(self, z) -> bool:
        if self.validity == ENTIRE:
            return True
        if z == 0:
            return False
        if self.validity == ABS_GT_Q:
            return abs(z) > self.q
        return True

    def tail_ratio(self, z) -> Scalar:
        """|last kept term| / max partial term; >=1 signals a divergent tail."""
        u = abs(z) if self.kind == ASCENDING else 1 / abs(z)
        top = mpf(0)
        up = mpf(1)
        last = mpf(0)
        for c in self.coeffs:
            t = abs(c) * up
            top = max(top, t)
            if c != 0:
                last = t
            up *= u
        return last / top if top > 0 else mpf(0)


def _run_recurrence(step, m: int, seed_even: bool) -> list:
    # step(i, c2, c4) -> coefficient i from neighbours i-2, i-4.
    coeffs = [mpf(0)] * (m + 1)
    coeffs[0 if seed_even else 1] = mpf(1)
    for i in range(2, m + 1):
        c2 = coeffs[i - 2]
        c4 = coeffs[i - 4] if i >= 4 else mpf(0)
        if c2 == 0 and c4 == 0:
            continue  # opposite parity stays exactly zero
        coeffs[i] = step(i, c2, c4)
    return coeffs


def series_ab(m: int, ctx: QContext):
    """Entire even/odd solutions of the near-origin equation

        y(z/q^2) + ((1+1/q) z^2/q^3 - (1+1/q)) y(z/q) + (1 + z^4/q^4) y(z)/q = 0,

    normalised so the first nonzero Taylor coefficient is 1.
    """
    if m < 4:
        raise QDomainError("series order must be at least 4")
    with ctx.workprec():
        q = ctx.q
        qi = 1 / q

        def step(i, c2, c4):
            den = q ** (-2 * i + 1) - (1 + q) * q ** (-i) + 1
            # den * q^{2i-1} = (1-q^i)(1-q^{i-1}) > 0 for i >= 2
            return -((1 + qi) * q ** (-i) * c2 + q ** (-4) * c4) / den

        a = PowerSeries("a", ASCENDING, "even",
                        tuple(_run_recurrence(step, m, True)), q, ENTIRE)
        b = PowerSeries("b", ASCENDING, "odd",
                        tuple(_run_recurrence(step, m, False)), q, ENTIRE)
        return a, b


def series_phi(m: int, ctx: QContext):
    """Even/odd descending solutions (valid on C \\ {0}) of the equation
    satisfied by y*g*w when y solves the near-origin equation."""
    with ctx.workprec():
        q = ctx.q

        def step(i, c2, c4):
            den = q - (1 + q) * q ** i + q ** (2 * i)
            return -(q * (1 + q) * q ** i * c2 + q ** (2 * i) * c4) / den

        even = PowerSeries("phi_even", DESCENDING, "even",
                           tuple(_run_recurrence(step, m, True)), q, PUNCTURED)
        odd = PowerSeries("phi_odd", DESCENDING, "odd",
                          tuple(_run_recurrence(step, m, False)), q, PUNCTURED)
        return even, odd


def series_varphi(m: int, ctx: QContext):
    """Even/odd descending solutions (valid for |z| > q) of the equation
    satisfied by y/g.  Coefficients settle into |u_i| ~ q^i, so the series
    converges only outside the circle |z| = q."""
    with ctx.workprec():
        q = ctx.q
        q5 = q ** 5

        def step(i, c2, c4):
            den = q - (1 + q) * q ** i + q ** (2 * i)
            return -((1 + q) * q ** (i + 1) * c2 + q5 * c4) / den

        even = PowerSeries("varphi_even", DESCENDING, "even",
                           tuple(_run_recurrence(step, m, True)), q, ABS_GT_Q)
        odd = PowerSeries("varphi_odd", DESCENDING, "odd",
                          tuple(_run_recurrence(step, m, False)), q, ABS_GT_Q)
        return even, odd


def series_farfield(m: int, ctx: QContext):
    """Descending solutions a_inf (even) and b_inf (odd) of the two far-field
    equations; both series converge on C \\ {0}."""
    with ctx.workprec():
        q = ctx.q

        def step_a(i, c2, c4):
            return -((1 + q) * q ** i * c2 + q ** (2 * i - 1) * c4) / (1 - q ** i)

        def step_b(i, c2, c4):
            return -((1 + q) * q ** i * c2 + q ** (2 * i - 1) * c4) / (1 - q ** (i - 1))

        a_inf = PowerSeries("a_inf", DESCENDING, "even",
                            tuple(_run_recurrence(step_a, m, True)), q, PUNCTURED)
        b_inf = PowerSeries("b_inf", DESCENDING, "odd",
                            tuple(_run_recurrence(step_b, m, False)), q, PUNCTURED)
        return a_inf, b_inf


def series_psi(m: int, ctx: QContext):
    """Entire ascending solutions of the two wrapped far-field equations:
    (psi_even, psi_odd) for the first, (vpsi_even, vpsi_odd) for the second.

    Single-term recurrences: c_i = -q^{i-1} c_{i-2} / ((1-q^i)(1-q^{i-1}))
    for the first equation and -q^{i-2} c_{i-2} / (...) for the second.
    """
    with ctx.workprec():
        q = ctx.q

        def step_psi(i, c2, c4):
            return -q ** (i - 1) * c2 / ((1 - q ** i) * (1 - q ** (i - 1)))

        def step_vpsi(i, c2, c4):
            return -q ** (i - 2) * c2 / ((1 - q ** i) * (1 - q ** (i - 1)))

        out = []
        for nm, step, even in (("psi_even", step_psi, True), ("psi_odd", step_psi, False),
                               ("vpsi_even", step_vpsi, True), ("vpsi_odd", step_vpsi, False)):
            out.append(PowerSeries(nm, ASCENDING, "even" if even else "odd",
                                   tuple(_run_recurrence(step, m, even)), q, ENTIRE))
        return tuple(out)


# ---------------------------------------------------------------------------
# Defining q-difference equations, used as residual oracles.

def _eq_near0(f, z, q):
    qi = 1 / q
    return (f(z / q ** 2)
            + (qi ** 3 * z * z * (1 + qi) - (1 + qi)) * f(z / q)
            + qi * (1 + qi ** 4 * z ** 4) * f(z))


def _eq_phi(f, z, q):
    qi = 1 / q
    return ((q ** 6 * z ** -4 + q ** -2) * f(z / q ** 2)
            + (z ** -2 * q * (1 + q) - qi * (1 + qi)) * f(z / q)
            + qi * f(z))


def _eq_varphi(f, z, q):
    qi = 1 / q
    return (q ** -5 * f(z / q ** 2)
            + qi * (z ** -2 * (1 + qi) - qi ** 3 * (1 + qi)) * f(z / q)
            + (z ** -4 + q ** -4) * f(z))


def _eq_far_a(f, t, q):
    return f(t / q ** 2) * q ** 7 * t ** -4 - (1 - q ** 2 * (q + 1) * t ** -2) * f(t / q) + f(t)


def _eq_far_b(f, t, q):
    return f(t / q ** 2) * q ** 7 * t ** -4 - (1 / q - q ** 2 * (q + 1) * t ** -2) * f(t / q) + f(t)


def _eq_psi(f, t, q):
    return q * f(t / q ** 2) + (t * t / q ** 2 - (1 + q)) * f(t / q) + f(t)


def _eq_vpsi(f, t, q):
    return q * f(t / q ** 2) + (t * t / q ** 3 - (1 + q)) * f(t / q) + f(t)


EQUATIONS = {
    "a": _eq_near0, "b": _eq_near0,
    "phi_even": _eq_phi, "phi_odd": _eq_phi,
    "varphi_even": _eq_varphi, "varphi_odd": _eq_varphi,
    "a_inf": _eq_far_a, "b_inf": _eq_far_b,
    "psi_even": _eq_psi, "psi_odd": _eq_psi,
    "vpsi_even": _eq_vpsi, "vpsi_odd": _eq_vpsi,
}


def equation_residual(series: PowerSeries, z, ctx: QContext) -> Scalar:
    """Relative residual of a series in its own defining equation at z.

    The equation shifts the argument to z/q and z/q^2, both further from the
    origin, so validity of z implies validity of the shifted points for
    every series kind used here.
    """
    with ctx.workprec():
        if not series.in_domain(z):
            raise QDomainError(f"{series.name} evaluated outside its validity domain")
        eq = EQUATIONS[series.name]
        q = ctx.q
        res = eq(series, z, q)
        scale = max(abs(series(z)), abs(series(z / q)), abs(series(z / q ** 2)), mpf("1e-300"))
        return abs(res) / scale


# ---------------------------------------------------------------------------
# Series bundle and connection constants.

@dataclass(frozen=True)
class SeriesBundle:
    """All twelve series at one truncation order, bound to one context."""
    ctx: QContext
    a: PowerSeries
    b: PowerSeries
    phi_even: PowerSeries
    phi_odd: PowerSeries
    varphi_even: PowerSeries
    varphi_odd: PowerSeries
    a_inf: PowerSeries
    b_inf: PowerSeries
    psi_even: PowerSeries
    psi_odd: PowerSeries
    vpsi_even: PowerSeries
    vpsi_odd: PowerSeries

    def all(self):
        return (self.a, self.b, self.phi_even, self.phi_odd, self.varphi_even,
                self.varphi_odd, self.a_inf, self.b_inf, self.psi_even,
                self.psi_odd, self.vpsi_even, self.vpsi_odd)


def build_series_bundle(ctx: QContext, m: int | None = None) -> SeriesBundle:
    m = ctx.series_order() if m is None else m
    a, b = series_ab(m, ctx)
    phi_e, phi_o = series_phi(m, ctx)
    var_e, var_o = series_varphi(m, ctx)
    a_inf, b_inf = series_farfield(m, ctx)
    psi_e, psi_o, vpsi_e, vpsi_o = series_psi(m, ctx)
    return SeriesBundle(ctx, a, b, phi_e, phi_o, var_e, var_o,
                        a_inf, b_inf, psi_e, psi_o, vpsi_e, vpsi_o)


@dataclass(frozen=True)
class ConnectionConstants:
    """Scalars linking the series families, with solve provenance.

    eta: a/g and b/g in the (varphi, h_q varphi) basis
    lam: phi_even/odd over g*w in the (a, h_q b) basis
    mu:  a_inf/g and b_inf/g in the (psi, h_q psi) bases
    c_psi: limit of vpsi_even/g at infinity
    """
    eta: tuple      # eta1..eta4
    lam: tuple      # lam1..lam4
    mu: tuple       # mu1..mu4
    c_psi: Point
    c_psi_err: Scalar
    residuals: dict          # relation name -> held-out relative residual
    lam_ratio_err: Scalar    # max deviation of lam2/lam1, lam4/lam3 from -h_q b/a at e^{i pi/4}
    sample_points: tuple


def _solve_2x2(basis1, basis2, rhs, pts, ctx: QContext, relation: str):
    with ctx.workprec():
        z1, z2 = pts
        m11, m12 = basis1(z1), basis2(z1)
        m21, m22 = basis1(z2), basis2(z2)
        det = m11 * m22 - m12 * m21
        norm = max(abs(m11), abs(m12), abs(m21), abs(m22))
        if det == 0 or norm * norm / abs(det) > mpf(10) ** 6:
            raise ConvergenceError(f"ill-conditioned 2x2 solve for {relation}")
        r1, r2 = rhs(z1), rhs(z2)
        c1 = (r1 * m22 - r2 * m12) / det
        c2 = (m11 * r2 - m21 * r1) / det
        return c1, c2


def _relative_residual(lhs, rhs, z):
    denom = max(abs(lhs), abs(rhs))
    return abs(lhs - rhs) / denom if denom > 0 else mpf(0)


def default_sample_points(ctx: QContext):
    """Two solve points and one held-out validator, off every singular set."""
    with ctx.workprec():
        e6 = mp.expjpi(mpf(1) / 6)
        e3 = mp.expjpi(mpf(1) / 3)
        return (2 * e6, 3 * e6, ctx.mpf("2.5") * e3)


def solve_connection(ctx: QContext, bundle: SeriesBundle | None = None,
                     funs: SpecialFunctionSet | None = None,
                     sample_points=None) -> ConnectionConstants:
    """Solve the six two-term decompositions for eta, lam, mu; validate each
    at a held-out point; cross-check the lam ratios against -h_q b/a at
    e^{i pi/4}; and estimate c_psi along a lattice-avoiding ray."""
    bundle = bundle or build_series_bundle(ctx)
    funs = funs or SpecialFunctionSet(ctx)
    with ctx.workprec():
        pts = sample_points or default_sample_points(ctx)
        z1, z2, zheld = pts
        hq, g, w = funs.hq, funs.g, funs.w
        bd = bundle

        relations = {
            "near_a": (lambda z: hq(z) * bd.varphi_odd(z), bd.varphi_even,
                       lambda z: bd.a(z) / g(z)),
            "near_b": (bd.varphi_odd, lambda z: hq(z) * bd.varphi_even(z),
                       lambda z: bd.b(z) / g(z)),
            "phi_even": (lambda z: g(z) * w(z) * hq(z) * bd.b(z),
                         lambda z: g(z) * w(z) * bd.a(z), bd.phi_even),
            "phi_odd": (lambda z: g(z) * w(z) * hq(z) * bd.a(z),
                        lambda z: g(z) * w(z) * bd.b(z), bd.phi_odd),
            "far_a": (lambda t: hq(t) * bd.psi_odd(t), bd.psi_even,
                      lambda t: bd.a_inf(t) / g(t)),
            "far_b": (bd.vpsi_odd, lambda t: hq(t) * bd.vpsi_even(t),
                      lambda t: bd.b_inf(t) / g(t)),
        }
        coef = {}
        residuals = {}
        for name, (b1, b2, rhs) in relations.items():
            c1, c2 = _solve_2x2(b1, b2, rhs, (z1, z2), ctx, name)
            coef[name] = (c1, c2)
            residuals[name] = _relative_residual(
                c1 * b1(zheld) + c2 * b2(zheld), rhs(zheld), zheld)

        eta = (*coef["near_a"], *coef["near_b"])                # eta1, eta2, eta3, eta4
        lam = (coef["phi_odd"][0], coef["phi_odd"][1],          # lam1, lam2
               coef["phi_even"][0], coef["phi_even"][1])        # lam3, lam4
        mu = (*coef["far_a"], *coef["far_b"])                   # mu1..mu4

        # Analyticity of phi_even (resp. phi_odd) at the weight's pole rays
        # forces lam4 a + lam3 h_q b = 0 (resp. lam1 h_q a + lam2 b = 0) at
        # e^{i pi/4}, pinning each ratio to its own cancellation value.
        zpi4 = mp.expjpi(mpf(1) / 4)
        hq4, a4, b4 = hq(zpi4), bd.a(zpi4), bd.b(zpi4)
        ratio_even = -hq4 * b4 / a4
        ratio_odd = -hq4 * a4 / b4
        lam_ratio_err = max(abs(lam[1] / lam[0] - ratio_odd) / abs(ratio_odd),
                            abs(lam[3] / lam[2] - ratio_even) / abs(ratio_even))

        c_psi, c_psi_err = estimate_c_psi(ctx, bundle=bundle, funs=funs)
        return ConnectionConstants(eta=eta, lam=lam, mu=mu, c_psi=c_psi,
                                   c_psi_err=c_psi_err, residuals=residuals,
                                   lam_ratio_err=lam_ratio_err,
                                   sample_points=tuple(pts))


def estimate_c_psi(ctx: QContext, bundle: SeriesBundle | None = None,
                   funs: SpecialFunctionSet | None = None,
                   levels: int = 4, j_max: int = 40):
    """Limit of vpsi_even(t)/g(t) along arg t = pi/8 as |t| -> infinity.

    Samples at |t| = q^{-j-1/2} stay a fixed angular distance from the
    lattice +-q^k.  The deviation from the limit is a series in q^j, so a
    few levels of geometric Richardson extrapolation collapse it; iteration
    stops once the last extrapolation step moves the estimate by less than
    a spent tolerance.  Returns ``(value, error_estimate)``.
    """
    bundle = bundle or build_series_bundle(ctx)
    funs = funs or SpecialFunctionSet(ctx)
    with ctx.workprec():
        q = ctx.q
        ray = mp.expjpi(mpf(1) / 8)
        stop = max(ctx.trunc_tol, mpf("1e-28"))
        vals = []
        prev_ext = None
        err = None
        for j in range(j_max + 1):
            t = q ** (-j - mpf(1) / 2) * ray
            vals.append(bundle.vpsi_even(t) / funs.g(t))
            if len(vals) < levels + 2:
                continue
            ext = list(vals)
            for lev in range(1, levels + 1):
                r = q ** lev
                ext = [(ext[i + 1] - r * ext[i]) / (1 - r) for i in range(len(ext) - 1)]
            if prev_ext is not None:
                err = abs(ext[-1] - prev_ext)
                if err < stop * abs(ext[-1]):
                    return ext[-1], err
            prev_ext = ext[-1]
        if err is None or not err < abs(prev_ext):
            raise ConvergenceError("c_psi ray limit did not converge")
        return prev_ext, err
