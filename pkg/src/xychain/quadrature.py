"""Trapezoidal rules on one period, refined by doubling.

For analytic periodic integrands the trapezoid converges geometrically, so
the difference of two successive estimates is a reliable error bound once
the grid resolves the integrand.
"""

from __future__ import annotations

import numpy as np

from .errors import AccuracyFailure


def _start_points(n_min: int) -> int:
    n = 16
    while n < n_min:
        n *= 2
    return n


def periodic_trapezoid(f, tol: float = 1e-12, *, period=(-np.pi, np.pi),
                       n_min: int = 16, max_points: int = 2 ** 22):
    """Integrate a vectorized periodic ``f`` over one period.

    Returns ``(value, error_estimate)``. Raises :class:`AccuracyFailure`
    carrying the best estimate if the grid limit is reached first.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    a, b = period
    L = b - a
    n = _start_points(n_min)
    x = a + L * np.arange(n) / n
    total = np.sum(f(x))
    prev = L * total / n
    err = np.inf
    while True:
        if 2 * n > max_points:
            raise AccuracyFailure("periodic trapezoid did not converge", estimate=prev, error=err)
        # the new nodes are the midpoints of the current ones
        x = a + L * (np.arange(n) + 0.5) / n
        total = total + np.sum(f(x))
        n *= 2
        cur = L * total / n
        err = abs(cur - prev)
        if err < tol:
            return cur, err
        prev = cur


def periodic_trapezoid_2d(f, tol: float = 1e-12, *, n_min: int = 16,
                          max_points: int = 4096):
    """Tensor-product trapezoid over ``[-pi, pi)^2`` for a vectorized ``f(p, q)``.

    ``f`` receives two 1D node arrays and must return the full ``(n, n)``
    table of values. Each doubling re-evaluates the whole table.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    n = _start_points(n_min)
    prev = None
    err = np.inf
    while n <= max_points:
        x = -np.pi + 2 * np.pi * np.arange(n) / n
        cur = (2 * np.pi / n) ** 2 * np.sum(f(x, x))
        if prev is not None:
            err = abs(cur - prev)
            if err < tol:
                return cur, err
        prev = cur
        n *= 2
    raise AccuracyFailure("2D periodic trapezoid did not converge", estimate=prev, error=err)
