"""Shared configuration for all lattice computations.

A :class:`QContext` pins down the base ``q``, the working precision in bits,
the truncation tolerance used to stop infinite products and series, and the
bilateral lattice cutoffs (largest ``k`` in sums over ``q^k`` and largest
``m`` in sums over ``q^{-m}``).  Everything downstream is a pure function of
its inputs and a context, so results are reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from mpmath import mp, mpf, mpc

# Arbitrary-precision scalar types used throughout the package.  mpmath
# floats carry an unbounded exponent, which matters here: norms scale like
# q^{-n(n-1)/2} and weight values like q^{2m^2}, far outside double range.
Scalar = mpf
Point = mpc


class QDomainError(ValueError):
    """An input violates an operation's domain (bad q, lattice collision...)."""


class ConvergenceError(ArithmeticError):
    """A truncated sum, limit or solve failed its declared accuracy bound."""


class PrecisionLossError(ArithmeticError):
    """A computed quantity lost a structural property such as positivity."""


@dataclass(frozen=True)
class QContext:
    """Immutable numerical configuration shared by every operation."""

    q: Scalar
    precision_bits: int
    trunc_tol: Scalar
    kpos: int
    kneg: int

    def __post_init__(self):
        if not (0 < self.q < 1):
            raise QDomainError(f"q must lie in (0,1), got {self.q}")
        if self.precision_bits <= 0:
            raise QDomainError("precision_bits must be positive")
        if not (0 < self.trunc_tol < 1):
            raise QDomainError("trunc_tol must lie in (0,1)")
        if self.kpos <= 0 or self.kneg <= 0:
            raise QDomainError("lattice cutoffs must be positive")

    # -- helpers ------------------------------------------------------------

    def workprec(self):
        """Context manager setting the working precision for a computation."""
        return mp.workprec(self.precision_bits)

    def mpf(self, x) -> Scalar:
        with self.workprec():
            return mpf(x if not isinstance(x, float) else repr(x))

    def mpc(self, re, im=0) -> Point:
        with self.workprec():
            return mpc(self.mpf(re) if not isinstance(re, (mpf, mpc)) else re,
                       self.mpf(im) if not isinstance(im, (mpf, mpc)) else im)

    @property
    def guard_radius(self) -> Scalar:
        # Keeps condition numbers of downstream solves bounded.
        with self.workprec():
            return 10 * mp.sqrt(self.trunc_tol)

    @property
    def pole_offset(self) -> Scalar:
        """Relative offset used when a limit is taken onto a lattice point."""
        with self.workprec():
            return mpf(2) ** (-(self.precision_bits // 4))

    def series_order(self) -> int:
        """Default truncation order for power-series solutions."""
        with self.workprec():
            return int(mp.ceil(mp.log(self.trunc_tol) / mp.log(self.q))) + 8

    def doubled(self) -> "QContext":
        """Same tolerances at twice the precision and twice the cutoffs.

        Re-running an operation on ``ctx.doubled()`` and comparing is the
        standard oracle for "did the declared tail bounds actually hold".
        """
        return replace(self, precision_bits=2 * self.precision_bits,
                       kpos=2 * self.kpos, kneg=2 * self.kneg)


def default_precision_bits(q: float, n_max: int) -> int:
    # gamma_n spans q^{+-n(n-1)/2}; orthogonalisation cancels across that
    # whole range, so the mantissa must cover n_max^2*log2(1/q) plus slack.
    return max(1024, math.ceil(n_max * n_max * math.log2(1.0 / float(q))) + 512)


def make_context(q, n_max: int = 30, precision_bits: int | None = None,
                 trunc_tol="1e-55", kpos: int | None = None,
                 kneg: int | None = None) -> QContext:
    """Build a :class:`QContext` with cutoffs sized for degrees up to ``n_max``.

    ``kpos`` is driven by the geometric decay q^k of positive-lattice tails,
    shifted by ``n_max`` so that evaluation points as large as q^{-n_max/4}
    and lattice-limit shells stay covered.  ``kneg`` must beat the
    super-exponential weight decay w(q^{-m}) <= q^{2m(m-1)} against the
    polynomial growth x^{2n_max}, which gives a quadratic condition in m.
    """
    qf = float(q)
    if not (0 < qf < 1):
        raise QDomainError(f"q must lie in (0,1), got {q}")
    bits = precision_bits or default_precision_bits(qf, n_max)
    tolf = float(mpf(trunc_tol))
    big_l = math.ceil(math.log(tolf) / math.log(qf))
    if kpos is None:
        kpos = big_l + n_max + 32
    if kneg is None:
        c = 2 * n_max + 3
        m_weight = math.ceil((c + math.sqrt(c * c + 8 * big_l)) / 4) + 8
        kneg = max(m_weight, big_l + n_max + 32)
    with mp.workprec(bits):
        return QContext(q=mpf(q if not isinstance(q, float) else repr(q)),
                        precision_bits=bits,
                        trunc_tol=mpf(trunc_tol),
                        kpos=int(kpos), kneg=int(kneg))
