"""Physicist Hermite polynomials and their weighted orthogonality."""
from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .errors import DomainError

#: Guard on the polynomial order; |H_n| overflows doubles near n ~ 150.
MAX_ORDER = 64


def _check_order(n):
    if isinstance(n, bool) or int(n) != n:
        raise DomainError(f"Hermite order must be an integer, got {n!r}")
    n = int(n)
    if n < 0 or n > MAX_ORDER:
        raise DomainError(f"Hermite order {n} outside [0, {MAX_ORDER}]")
    return n


def hermite_eval(n, x):
    """Evaluate H_n(x) by the upward three-term recurrence.

    ``x`` may be a scalar or an array; a float is returned for scalar input.
    """
    n = _check_order(n)
    xa = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(xa)):
        raise DomainError("Hermite argument must be finite")
    value = hermite_table(n, xa)[n]
    return float(value) if value.ndim == 0 else value


def hermite_table(nmax, x):
    """Stack of H_0(x) .. H_nmax(x) along a new leading axis."""
    nmax = _check_order(nmax)
    return _kernels.hermite_table(nmax, x)


def hermite_norm(n):
    """Closed form of the weighted squared norm, sqrt(pi) * 2**n * n!."""
    n = _check_order(n)
    return math.sqrt(math.pi) * 2.0 ** n * math.factorial(n)


def hermite_orthogonality_check(m, n):
    """Integral of H_m H_n exp(-x^2) over the real line by Gauss-Hermite quadrature.

    The node count is chosen so the rule is exact for the degree m + n
    integrand; the result equals ``hermite_norm(n)`` when m == n and zero
    otherwise, up to round-off.
    """
    m = _check_order(m)
    n = _check_order(n)
    nodes, weights = np.polynomial.hermite.hermgauss((m + n) // 2 + 2)
    table = hermite_table(max(m, n), nodes)
    return float(np.sum(weights * table[m] * table[n]))
