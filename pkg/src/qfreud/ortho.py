"""Moments, monic orthogonal polynomials on shifted lattices {+-c q^k},
norms, recurrence coefficients, second-kind functions and the polynomial
difference identities they satisfy.

Construction is by the three-term recurrence with lattice inner products
(numerically benign: every norm is a sum of positive terms).  The
Hankel-determinant construction from raw moments is kept as an independent
low-degree oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from mpmath import mp, mpf, mpc

from .context import (ConvergenceError, Point, PrecisionLossError, QContext,
                      QDomainError, Scalar)
from .qcalc import q_integer
from .specfun import hq_series, weight_w


@lru_cache(maxsize=32)
def _weight_table(c: Scalar, ctx: QContext):
    """Nodes c q^k (ascending k) paired with w(c q^k) q^k; the dominant cost
    of every inner product, shared across all degrees for one (c, ctx)."""
    with ctx.workprec():
        q = ctx.q
        nodes, wq = [], []
        qk = q ** (-ctx.kneg)
        for _ in range(-ctx.kneg, ctx.kpos + 1):
            x = c * qk
            nodes.append(x)
            wq.append(weight_w(x, ctx).real * qk)
            qk = qk * q
        return tuple(nodes), tuple(wq)


@dataclass(frozen=True)
class MomentTable:
    """Even moments m_{2j} of w(c x) d_q x; odd moments are exact zeros."""
    c: Scalar
    moments: tuple          # length 2K+1, index j holds m_j
    normalized: bool
    tail: Scalar

    def m(self, j: int) -> Scalar:
        return self.moments[j]

    def normalized_copy(self) -> "MomentTable":
        m0 = self.moments[0]
        return MomentTable(self.c, tuple(x / m0 for x in self.moments), True, self.tail / m0)


def compute_moments(c, two_k: int, ctx: QContext) -> MomentTable:
    """Moment table m_0..m_{2K} over the lattice {+-c q^k}.

    The integrand x^{2j} w(x) is even, so each moment is twice the
    positive-lattice sum; odd moments vanish by parity and are returned as
    exact zeros.
    """
    with ctx.workprec():
        cc = c if isinstance(c, (mpf, mpc)) else ctx.mpf(c)
        nodes, wq = _weight_table(cc, ctx)
        moments = [mpf(0)] * (two_k + 1)
        tail = mpf(0)
        for j in range(0, two_k + 1, 2):
            total = mpf(0)
            for x, wk in zip(nodes, wq):
                total += (x ** j) * wk
            total = 2 * total
            moments[j] = total
            # boundary terms of the bilateral sum bound the neglected tails
            tail = max(tail, 2 * abs(nodes[-1] ** j * wq[-1]) / (1 - ctx.q),
                       2 * abs(nodes[0] ** j * wq[0]))
        scale = moments[0]
        if tail > ctx.trunc_tol * scale:
            raise ConvergenceError("moment tail bound violated; enlarge cutoffs")
        return MomentTable(c=cc, moments=tuple(moments), normalized=False, tail=tail)


@dataclass(frozen=True)
class MonicPolySeq:
    """Monic orthogonal family P_0..P_N on the lattice {+-c q^k}.

    coeffs[n][j] is the z^j coefficient of P_n (exact zero when n-j is odd),
    gamma[n] the squared norm, alpha[n] = gamma[n]/gamma[n-1] with the
    convention alpha[0] = 0.
    """
    c: Scalar
    n_max: int
    coeffs: tuple
    gamma: tuple
    alpha: tuple
    precision_bits: int

    def eval(self, n: int, z):
        acc = mpf(0)
        for cj in reversed(self.coeffs[n]):
            acc = acc * z + cj
        return acc


def build_polys(c, n: int, ctx: QContext, max_retries: int = 2) -> MonicPolySeq:
    """Three-term recurrence build: P_{k+1} = x P_k - alpha_k P_{k-1}.

    A non-positive norm means the working precision cannot separate the
    norms' dynamic range; the build restarts at doubled precision (the
    deterministic recovery policy) up to ``max_retries`` times.
    """
    attempt = ctx
    for retry in range(max_retries + 1):
        try:
            return _build_polys_once(c, n, attempt)
        except PrecisionLossError:
            if retry == max_retries:
                raise
            attempt = attempt.doubled()


def _build_polys_once(c, n: int, ctx: QContext) -> MonicPolySeq:
    with ctx.workprec():
        cc = c if isinstance(c, (mpf, mpc)) else ctx.mpf(c)
        nodes, wq = _weight_table(cc, ctx)

        def norm(vals):
            total = mpf(0)
            for v, wk in zip(vals, wq):
                total += v * v * wk
            return 2 * total

        coeffs = [(mpf(1),)]
        vals_prev = tuple(mpf(1) for _ in nodes)
        gamma = [norm(vals_prev)]
        alpha = [mpf(0)]
        if gamma[0] <= 0:
            raise PrecisionLossError("gamma_0 not positive")
        if n >= 1:
            coeffs.append((mpf(0), mpf(1)))
            vals = tuple(nodes)
            gamma.append(norm(vals))
            alpha.append(gamma[1] / gamma[0])
            for k in range(1, n):
                ak = alpha[k]
                nxt = tuple(x * v - ak * u for x, v, u in zip(nodes, vals, vals_prev))
                ck = (mpf(0),) + coeffs[k]
                cprev = coeffs[k - 1] + (mpf(0), mpf(0))
                coeffs.append(tuple(cj - ak * pj for cj, pj in zip(ck, cprev)))
                g = norm(nxt)
                if not g > 0:
                    raise PrecisionLossError(
                        f"gamma_{k + 1} not positive at {ctx.precision_bits} bits")
                gamma.append(g)
                alpha.append(g / gamma[k])
                vals_prev, vals = vals, nxt
        return MonicPolySeq(c=cc, n_max=n, coeffs=tuple(coeffs),
                            gamma=tuple(gamma), alpha=tuple(alpha),
                            precision_bits=ctx.precision_bits)


def verify_orthogonality(seq: MonicPolySeq, ctx: QContext) -> Scalar:
    """Max over n != m of |<P_n, P_m>| / sqrt(gamma_n gamma_m).

    P values are re-evaluated from the stored coefficients (independent of
    the recurrence path used during the build).
    """
    with ctx.workprec():
        nodes, wq = _weight_table(seq.c, ctx)
        vals = [[seq.eval(k, x) for x in nodes] for k in range(seq.n_max + 1)]
        worst = mpf(0)
        for nn in range(seq.n_max + 1):
            for m in range(nn + 1, seq.n_max + 1):
                if (nn - m) % 2:
                    continue  # opposite parity cancels exactly
                total = mpf(0)
                for vn, vm, wk in zip(vals[nn], vals[m], wq):
                    total += vn * vm * wk
                worst = max(worst, 2 * abs(total) / mp.sqrt(seq.gamma[nn] * seq.gamma[m]))
        return worst


def second_kind(seq: MonicPolySeq, n: int, z, ctx: QContext, *,
                interior: bool = False, check_poles: bool = True) -> Point:
    """Jackson-sum Cauchy transform  int P_n(x) w(x) / (z - x) d_q x.

    With ``interior=True`` the meromorphic continuation across the contour
    is returned instead: the transform minus P_n(z) w(z) h_q(z/c)/c, whose
    poles at the enclosed lattice points cancel those of the sum.
    """
    with ctx.workprec():
        nodes, wq = _weight_table(seq.c, ctx)
        zz = z if isinstance(z, (mpf, mpc)) else ctx.mpc(z)
        sign = -1 if n % 2 else 1
        guard = ctx.guard_radius
        total = mpc(0)
        for x, wk in zip(nodes, wq):
            d1 = zz - x
            d2 = zz + x
            if check_poles and (abs(d1) < guard or abs(d2) < guard):
                raise QDomainError("second_kind evaluated too close to the lattice")
            pv = seq.eval(n, x)
            total += wk * (pv / d1 + sign * pv / d2)
        if interior:
            total -= seq.eval(n, zz) * weight_w(zz, ctx) * \
                hq_series(zz / seq.c, ctx, check_poles=check_poles) / seq.c
        return total


def _coeff_scale(*vecs) -> Scalar:
    return max((abs(x) for v in vecs for x in v), default=mpf(0))


def ladder_check(seq: MonicPolySeq, n: int, ctx: QContext) -> Scalar:
    """Coefficient residual of the lowering identity

        D_{1/q} P_n = [n]_{1/q} P_{n-1}
                      + q^{n-3}/(1/q - 1) * alpha_n alpha_{n-1} alpha_{n-2} P_{n-3},

    scaled by the largest coefficient appearing in either side.
    """
    if n < 3:
        raise QDomainError("ladder_check needs n >= 3")
    with ctx.workprec():
        q = ctx.q
        qi = 1 / q
        deriv = [seq.coeffs[n][j] * q_integer(j, qi) for j in range(1, n + 1)]
        t1 = [q_integer(n, qi) * cj for cj in seq.coeffs[n - 1]]
        fac = q ** (n - 3) / (qi - 1) * seq.alpha[n] * seq.alpha[n - 1] * seq.alpha[n - 2]
        t2 = [fac * cj for cj in seq.coeffs[n - 3]]
        resid = mpf(0)
        for j in range(n):
            r = deriv[j]
            if j < len(t1):
                r -= t1[j]
            if j < len(t2):
                r -= t2[j]
            resid = max(resid, abs(r))
        return resid / _coeff_scale(deriv, t1, t2)


def pnqdiff_check(seq: MonicPolySeq, n: int, z_samples, ctx: QContext) -> Scalar:
    """Max scaled residual of the one-step shift identity

        P_n(z/q) = (1 - q^{n-3} z^2 alpha_n) P_n(z)
                   + ((q^{-n}-1) z - z alpha_n alpha_{n-1} q^{n-3}
                      + z^3 alpha_n q^{n-3}) P_{n-1}(z).
    """
    if n < 1:
        raise QDomainError("pnqdiff_check needs n >= 1")
    with ctx.workprec():
        q = ctx.q
        an = seq.alpha[n]
        an1 = seq.alpha[n - 1] if n >= 1 else mpf(0)
        worst = mpf(0)
        for z in z_samples:
            zz = z if isinstance(z, (mpf, mpc)) else ctx.mpc(z)
            lhs = seq.eval(n, zz / q)
            c_n = (1 - q ** (n - 3) * zz * zz * an) * seq.eval(n, zz)
            c_n1 = ((q ** (-n) - 1) * zz - zz * an * an1 * q ** (n - 3)
                    + zz ** 3 * an * q ** (n - 3)) * seq.eval(n - 1, zz)
            scale = max(abs(lhs), abs(c_n), abs(c_n1), mpf("1e-300"))
            worst = max(worst, abs(lhs - c_n - c_n1) / scale)
        return worst


# ---------------------------------------------------------------------------
# Hankel-determinant oracle (low degree only).

def hankel_poly(table: MomentTable, n: int, ctx: QContext):
    """Monic P_n from raw moments by solving <P_n, x^i> = 0, i < n."""
    with ctx.workprec():
        if n == 0:
            return (mpf(1),)
        rows = mp.matrix(n, n)
        rhs = mp.matrix(n, 1)
        for i in range(n):
            for j in range(n):
                rows[i, j] = table.m(i + j)
            rhs[i] = -table.m(i + n)
        sol = mp.lu_solve(rows, rhs)
        return tuple(sol[j] for j in range(n)) + (mpf(1),)


def hankel_gamma(table: MomentTable, n: int, ctx: QContext) -> Scalar:
    """gamma_n = <P_n, x^n> with P_n from the Hankel construction."""
    with ctx.workprec():
        coeffs = hankel_poly(table, n, ctx)
        return sum(cj * table.m(n + j) for j, cj in enumerate(coeffs))
