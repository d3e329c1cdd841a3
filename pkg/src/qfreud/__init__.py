"""High-precision numerics for q-Freud II orthogonal polynomials on shifted
q-lattices: moments and recurrence coefficients, the associated discrete
Painleve equation, power-series parametrices of the underlying
Riemann-Hilbert problem, and desk-scale verification of their asymptotics."""

__version__ = "0.1.0"

from .context import (ConvergenceError, Point, PrecisionLossError, QContext,
                      QDomainError, Scalar, make_context)

__all__ = ["QContext", "make_context", "Scalar", "Point", "QDomainError",
           "ConvergenceError", "PrecisionLossError", "__version__"]
