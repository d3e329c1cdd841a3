"""q-calculus primitives: Pochhammer products, q-integers, q-derivatives and
bilateral Jackson summation on (shifted) q-lattices."""

from __future__ import annotations

from mpmath import mp, mpf, mpc

from .context import ConvergenceError, Point, QContext, QDomainError, Scalar

_MAX_FACTORS = 10_000_000  # safety stop, never reached for sane contexts


def pochhammer_inf(x, qpow, ctx: QContext):
    """Infinite product prod_{j>=0} (1 - x*qpow^j), truncated adaptively.

    Factors are multiplied until the tail's multiplicative perturbation,
    bounded by exp(sum_{j>=J} |x| qpow^j) - 1 ~ |x| qpow^J / (1-qpow),
    drops below ``ctx.trunc_tol``.
    """
    with ctx.workprec():
        qp = mpf(qpow) if not isinstance(qpow, (mpf, mpc)) else qpow
        if abs(qp) >= 1:
            raise QDomainError(f"pochhammer base must satisfy |qpow|<1, got {qpow}")
        xp = ctx.mpc(x) if isinstance(x, complex) else (
            x if isinstance(x, (mpf, mpc)) else ctx.mpf(x))
        if xp == 0:
            return mpf(1)
        acc = mpf(1)
        bound = ctx.trunc_tol * (1 - abs(qp))
        j = 0
        while abs(xp) >= bound:
            f = 1 - xp
            if f == 0:
                return f * 0  # exact zero of matching type
            acc *= f
            xp *= qp
            j += 1
            if j > _MAX_FACTORS:  # pragma: no cover
                raise ConvergenceError("pochhammer_inf failed to truncate")
        return acc


def pochhammer_inf_multi(xs, qpow, ctx: QContext):
    """Product of Pochhammer symbols sharing one base: (x1, x2, ...; qpow)."""
    acc = mpf(1)
    for x in xs:
        acc = acc * pochhammer_inf(x, qpow, ctx)
    return acc


def q_integer(n: int, qval) -> Scalar:
    """[n]_q = (q^n - 1)/(q - 1); valid for negative n and for base 1/q."""
    qv = qval if isinstance(qval, (mpf, mpc)) else mpf(repr(qval) if isinstance(qval, float) else qval)
    if qv == 1:
        raise QDomainError("q_integer undefined at qval=1")
    return (qv ** n - 1) / (qv - 1)


def q_derivative(f, x, ctx: QContext, base=None):
    """Two-point q-derivative (f(base*x) - f(x)) / (x*(base-1)).

    ``base`` defaults to ctx.q; pass 1/ctx.q for the inverse-base variant.
    """
    with ctx.workprec():
        b = ctx.q if base is None else base
        if x == 0:
            raise QDomainError("q_derivative requires x != 0")
        return (f(b * x) - f(x)) / (x * (b - 1))


def jackson_bilateral(f, c, ctx: QContext, *, check_tail: bool = True):
    """Bilateral Jackson sum  sum_k [f(c q^k) + f(-c q^k)] q^k.

    k runs from -ctx.kneg to ctx.kpos in ascending order (fixed order keeps
    the reduction deterministic).  Returns ``(value, tail_estimate)`` where
    the estimate combines the outermost retained terms of both tails.
    Raises :class:`ConvergenceError` when the boundary terms are not below
    ``trunc_tol`` relative to the running sum (the declared tail bound
    demonstrably fails for this integrand).
    """
    with ctx.workprec():
        q = ctx.q
        cc = c if isinstance(c, (mpf, mpc)) else ctx.mpf(c)
        total = mpf(0)
        first_term = last_term = mpf(0)
        qk = q ** (-ctx.kneg)
        for k in range(-ctx.kneg, ctx.kpos + 1):
            x = cc * qk
            term = (f(x) + f(-x)) * qk
            total = total + term
            if k == -ctx.kneg:
                first_term = term
            qk = qk * q
        last_term = term
        # Positive tail is geometric with ratio <= q (f bounded near 0);
        # negative tail decays super-exponentially, so its first omitted
        # term is bounded by the last retained one.
        tail = abs(last_term) * q / (1 - q) + abs(first_term)
        scale = max(abs(total), mpf(1))
        if check_tail and tail > ctx.trunc_tol * scale:
            raise ConvergenceError(
                f"jackson tail estimate {mp.nstr(tail, 8)} exceeds "
                f"trunc_tol x scale ({mp.nstr(ctx.trunc_tol * scale, 8)})")
        return total, tail
