"""Regularized incomplete gamma functions.

Both ``P(a, x) = gamma(a, x) / Gamma(a)`` and its complement ``Q = 1 - P``
are evaluated elementwise on numpy arrays.  The power series is used for
``x < a + 1`` and a modified-Lentz continued fraction otherwise, so that
whichever of ``P`` and ``Q`` is small is computed directly without
cancellation.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gammaln

from .errors import DomainError

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 1000


def _prefactor(a, x):
    # x**a * exp(-x) / Gamma(a), in log space
    with np.errstate(divide="ignore"):
        return np.exp(a * np.log(x) - x - gammaln(a))


def _series(a, x):
    """P(a, x) by the power series; accurate for x < a + 1."""
    ap = a.copy()
    term = 1.0 / a
    total = term.copy()
    active = np.ones(a.shape, dtype=bool)
    for _ in range(_MAX_ITER):
        ap = ap + 1.0
        term = np.where(active, term * x / ap, 0.0)
        total = total + term
        active &= np.abs(term) >= np.abs(total) * _EPS
        if not active.any():
            break
    return total * _prefactor(a, x)


def _continued_fraction(a, x):
    """Q(a, x) by Lentz's method; accurate for x >= a + 1."""
    b = x + 1.0 - a
    c = np.full(a.shape, 1.0 / _TINY)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(a.shape, dtype=bool)
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = b + an / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = np.where(active, d * c, 1.0)
        h = h * delta
        active &= np.abs(delta - 1.0) >= _EPS
        if not active.any():
            break
    return h * _prefactor(a, x)


def _both(a, x):
    a, x = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(x, dtype=float))
    if np.any(~(a > 0)):
        raise DomainError("incomplete gamma requires a > 0")
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise DomainError("incomplete gamma requires x >= 0")
    a = a.astype(float).ravel()
    x = x.astype(float).ravel()
    p = np.zeros_like(x)
    q = np.ones_like(x)

    inf = np.isinf(x)
    p[inf], q[inf] = 1.0, 0.0

    ser = (x > 0) & (x < a + 1.0)
    if ser.any():
        p[ser] = _series(a[ser], x[ser])
        q[ser] = 1.0 - p[ser]

    cf = (x >= a + 1.0) & ~inf
    if cf.any():
        q[cf] = _continued_fraction(a[cf], x[cf])
        p[cf] = 1.0 - q[cf]

    return np.clip(p, 0.0, 1.0), np.clip(q, 0.0, 1.0)


def _shape_like(value, a, x):
    shape = np.broadcast(np.asarray(a), np.asarray(x)).shape
    value = value.reshape(shape)
    return float(value) if value.ndim == 0 else value


def regularized_lower_incomplete_gamma(a, x):
    """Return ``P(a, x)`` for ``a > 0`` and ``x >= 0`` (scalars or arrays).

    >>> round(regularized_lower_incomplete_gamma(1.0, 1.0), 6)
    0.632121
    """
    p, _ = _both(a, x)
    return _shape_like(p, a, x)


def incomplete_gamma_pair(a, x):
    """``(P(a, x), Q(a, x))`` from a single evaluation."""
    p, q = _both(a, x)
    return _shape_like(p, a, x), _shape_like(q, a, x)


def regularized_upper_incomplete_gamma(a, x):
    """Return ``Q(a, x) = 1 - P(a, x)``, computed without cancellation."""
    _, q = _both(a, x)
    return _shape_like(q, a, x)
