"""The multiplicative-lattice discrete Painleve equation satisfied by the
recurrence coefficients: residual evaluation, forward iteration from initial
data, the scaled-limit diagnostic q^n alpha_n -> q, and the lattice-shift
discrimination ratio."""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import mp, mpf

from .context import ConvergenceError, QContext, Scalar
from .ortho import MonicPolySeq, build_polys


def painleve_residual(a_prev, a_n, a_next, n: int, q):
    """LHS minus RHS of

        a_n (a_{n+1} + q^{n-1} a_n + q^{-2} a_{n-1}
             - q^{2n-3} a_{n+1} a_n a_{n-1}) = (q^{-n} - 1) q^{1-n}.

    Pure arithmetic in whatever numeric type the caller supplies (mpf,
    Fraction, ...), so exact inputs give exact residuals.
    """
    lhs = a_n * (a_next + q ** (n - 1) * a_n + a_prev / q ** 2
                 - q ** (2 * n - 3) * a_next * a_n * a_prev)
    rhs = (q ** (-n) - 1) * q ** (1 - n)
    return lhs - rhs


@dataclass(frozen=True)
class AlphaOrbit:
    """A solution slice alpha_0..alpha_N with provenance metadata."""
    label: str              # shift value as a string, or "iterated"
    q: Scalar
    alphas: tuple           # alpha[0] = 0 by the seeding convention
    provenance: str         # "moments" | "forward-iteration"
    positive: tuple         # per-entry positivity flags (alpha_0 exempt)

    @property
    def n_max(self) -> int:
        return len(self.alphas) - 1

    def residual(self, n: int) -> Scalar:
        return painleve_residual(self.alphas[n - 1], self.alphas[n],
                                 self.alphas[n + 1], n, self.q)


def orbit_from_seq(seq: MonicPolySeq, ctx: QContext) -> AlphaOrbit:
    with ctx.workprec():
        return AlphaOrbit(label=mp.nstr(seq.c, 12), q=ctx.q, alphas=seq.alpha,
                          provenance="moments",
                          positive=tuple(a > 0 for a in seq.alpha[1:]))


def orbit_from_moments(c, n: int, ctx: QContext) -> AlphaOrbit:
    return orbit_from_seq(build_polys(c, n, ctx), ctx)


def iterate_forward(alpha1, n: int, ctx: QContext) -> AlphaOrbit:
    """Drive the equation forward from (alpha_0=0, alpha_1):

        a_{n+1} = [(q^{-n}-1) q^{1-n} - q^{n-1} a_n^2 - q^{-2} a_n a_{n-1}]
                  / [a_n (1 - q^{2n-3} a_n a_{n-1})].

    Raises :class:`ConvergenceError` when a denominator falls under the
    blow-up guard (genuine singularity approach vs. rounding is decided by
    the 2^{-precision/2} threshold).
    """
    with ctx.workprec():
        q = ctx.q
        a1 = alpha1 if isinstance(alpha1, mpf) else ctx.mpf(alpha1)
        if not a1 > 0:
            raise ConvergenceError("forward iteration needs alpha_1 > 0")
        guard = mpf(2) ** (-(ctx.precision_bits // 2))
        alphas = [mpf(0), a1]
        for k in range(1, n):
            a_n, a_prev = alphas[k], alphas[k - 1]
            den = a_n * (1 - q ** (2 * k - 3) * a_n * a_prev)
            scale = max(abs(a_n), mpf(1))
            if abs(den) < guard * scale:
                raise ConvergenceError(f"forward iteration blow-up at n={k + 1}")
            num = (q ** (-k) - 1) * q ** (1 - k) - q ** (k - 1) * a_n * a_n \
                - a_n * a_prev / q ** 2
            alphas.append(num / den)
        return AlphaOrbit(label="iterated", q=q, alphas=tuple(alphas),
                          provenance="forward-iteration",
                          positive=tuple(a > 0 for a in alphas[1:]))


def limit_diagnostic(orbit: AlphaOrbit, ctx: QContext):
    """Rows (n, q^n alpha_n, |q^n alpha_n - q| / q^{n/2}) for n >= 1.

    The middle column approaches q; the right column is the deviation in
    units of the expected q^{n/2} correction scale and should stay bounded.
    """
    with ctx.workprec():
        q = orbit.q
        rows = []
        for n in range(1, orbit.n_max + 1):
            scaled = q ** n * orbit.alphas[n]
            rows.append((n, scaled, abs(scaled - q) / q ** (mpf(n) / 2)))
        return rows


def shift_discrimination(c_list, n: int, ctx: QContext, *, tail_count: int = 5):
    """Discrimination ratios r_n(c) = (alpha_n^{(c)} - alpha_n^{(1)}) /
    (q^{1-n} - alpha_n^{(1)}) against the reference lattice c=1.

    Returns ``(rows, tails)`` where rows are (c, n, alpha_n, q^n alpha_n, r_n)
    and tails maps each c to min |r_n| over the last ``tail_count`` even n.
    Both orbits of each pair are built at the same shared precision.
    """
    with ctx.workprec():
        q = ctx.q
        base = build_polys(1, n, ctx)
        rows = []
        tails = {}
        for c in c_list:
            seq = build_polys(c, n, ctx)
            r_even = []
            for k in range(1, n + 1):
                denom = q ** (1 - k) - base.alpha[k]
                r = (seq.alpha[k] - base.alpha[k]) / denom
                rows.append((seq.c, k, seq.alpha[k], q ** k * seq.alpha[k], r))
                if k % 2 == 0:
                    r_even.append(abs(r))
            tails[mp.nstr(seq.c, 12)] = min(r_even[-tail_count:])
        return rows, tails
