"""Hurwitz zeta, log-gamma, and zeta-regularized Matsubara determinants.

``hurwitz_zeta`` uses the Euler-Maclaurin formula with principal-branch
powers ``(n + a)^(-s) = exp(-s Log(n + a))``; ``loggamma`` is the analytic
log-gamma that matches this branch choice, so that
``d/ds zeta(s, a) at s = 0`` equals ``loggamma(a) - log(2 pi) / 2`` for every
admissible complex ``a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate

from .errors import AccuracyFailure, InvalidArgument, PoleError, SingularityError
from .model import Statistics


def _bernoulli_even(n_max: int) -> list[Fraction]:
    """B_0, B_2, ..., B_{2 n_max} as exact fractions (Akiyama-Tanigawa)."""
    size = 2 * n_max + 1
    a = [Fraction(0)] * (size + 1)
    B = []
    for m in range(size + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        B.append(a[0])
    # the algorithm yields B_1 = +1/2; only even indices are used
    return [B[2 * k] for k in range(n_max + 1)]


_B2K = _bernoulli_even(9)  # through B_18; B_18 is the error-estimate term
# Euler-Maclaurin coefficients B_2k / (2k)!
_EM_COEF = [float(_B2K[k] / math.factorial(2 * k)) for k in range(10)]
# Stirling coefficients B_2k / (2k (2k - 1))
_STIRLING_COEF = [0.0] + [float(_B2K[k] / (2 * k * (2 * k - 1))) for k in range(1, 10)]
_EM_ORDER = 8  # corrections through B_16
_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


@dataclass(frozen=True)
class HurwitzResult:
    value: complex
    error_estimate: float


def _check_a(a: complex) -> complex:
    a = complex(a)
    if a.imag == 0 and a.real <= 0 and a.real == round(a.real):
        raise InvalidArgument(f"Hurwitz parameter a={a} is a non-positive integer")
    return a


def _shift(a: complex, s: complex) -> int:
    # large enough for the Bernoulli tail to converge, small enough that the
    # growing head terms for Re s < 0 do not cancel away digits
    target = 10.0 + abs(s)
    N = 0
    while abs(N + a) < target or (N + a).real < 1.0:
        N += 1
    return N


def hurwitz_zeta(s: complex, a: complex, derivative: int = 0) -> HurwitzResult:
    """``sum_{n >= 0} (n + a)^(-s)`` continued to all ``s != 1``.

    With ``derivative=1`` the s-derivative of the same Euler-Maclaurin
    expression is returned; it is exact to the same order as the value.
    """
    s = complex(s)
    a = _check_a(a)
    if s == 1:
        raise PoleError("Hurwitz zeta has a pole at s = 1")
    if derivative not in (0, 1):
        raise InvalidArgument("derivative must be 0 or 1")
    N = _shift(a, s)
    n = np.arange(N) + a
    if N:
        logn = np.log(n)
        powers = np.exp(-s * logn)
        head = np.sum(powers) if derivative == 0 else -np.sum(logn * powers)
        scale = float(np.sum(np.abs(powers) * (1 + np.abs(logn))))
    else:
        head = 0.0
        scale = 0.0
    x = N + a
    lx = np.log(x)
    xs = np.exp(-s * lx)  # x^(-s)
    if derivative == 0:
        total = head + x * xs / (s - 1) + 0.5 * xs
    else:
        total = (head + x * xs * (-lx / (s - 1) - 1 / (s - 1) ** 2)
                 - 0.5 * lx * xs)
    # Bernoulli tail: B_2k/(2k)! * (s)_{2k-1} * x^(-s-2k+1)
    poch = s  # rising factorial (s)(s+1)...(s+2k-2)
    dpoch = 1.0 + 0j  # its derivative in s
    last = 0.0
    for k in range(1, _EM_ORDER + 2):
        xpow = xs * np.exp(-(2 * k - 1) * lx)
        if derivative == 0:
            term = _EM_COEF[k] * poch * xpow
        else:
            term = _EM_COEF[k] * (dpoch - poch * lx) * xpow
        if k <= _EM_ORDER:
            total += term
        else:
            last = abs(term)
        # extend (s)_{2k-1} to (s)_{2k+1}
        f1, f2 = s + 2 * k - 1, s + 2 * k
        dpoch = dpoch * f1 * f2 + poch * (f1 + f2)
        poch = poch * f1 * f2
    # truncation (first dropped term) plus rounding in the cancelling head/tail
    scale += abs(x * xs / (s - 1)) * (1 + abs(lx))
    return HurwitzResult(complex(total), float(last + 4 * np.finfo(float).eps * scale))


def loggamma(z: complex) -> complex:
    """Analytic ``log Gamma(z)`` (branch cut on the negative real axis).

    Stirling series through B_16 after shifting to ``Re z >= 10`` with the
    recurrence ``loggamma(z) = loggamma(z + 1) - Log(z)``.
    """
    z = _check_a(z)
    shift = 0.0 + 0j
    while z.real < 10.0 or abs(z) < 10.0:
        shift += np.log(z)
        z += 1
    lz = np.log(z)
    val = (z - 0.5) * lz - z + _HALF_LOG_2PI
    zinv2 = 1 / (z * z)
    zp = 1 / z
    for k in range(1, _EM_ORDER + 1):
        val += _STIRLING_COEF[k] * zp
        zp *= zinv2
    return complex(val - shift)


def hurwitz_zeta_sprime0(a: complex) -> complex:
    """``d/ds zeta(s, a)`` at ``s = 0``, i.e. ``loggamma(a) - log(2 pi) / 2``."""
    return loggamma(a) - _HALF_LOG_2PI


def _log_two_pi_over_i(beta: float) -> complex:
    # Log(beta / (2 pi i)) on the principal branch
    return complex(math.log(beta / (2 * math.pi)), -math.pi / 2)


def matsubara_logdet_mode(E: float, beta: float, statistics: Statistics,
                          c: int = -1) -> complex:
    """``-d/ds`` at ``s = 0`` of ``sum_omega (i omega - E)^(-s)`` for one mode.

    The frequency sum is split into two Hurwitz series (plus the doubly
    counted ``omega = 0`` term for bosons). The result is
    ``log(1 + exp(c beta E))`` (F) or ``log(1 - exp(c beta E))`` (B) modulo
    ``2 pi i``; ``c`` fixes the branch of ``(-1)^s = exp(i pi c s)``.
    """
    if c not in (-1, 1):
        raise InvalidArgument("c must be +1 or -1")
    if not beta > 0:
        raise InvalidArgument("beta must be positive")
    x = beta * E / (2 * math.pi)
    L = _log_two_pi_over_i(beta)
    if statistics is Statistics.F:
        a, b = 0.5 + 1j * x, 0.5 - 1j * x
    else:
        if E == 0:
            raise SingularityError("bosonic mode with E = 0 has log(1 - 1)")
        a, b = 1j * x, -1j * x
    za, zb = hurwitz_zeta(0, a).value, hurwitz_zeta(0, b).value
    dza, dzb = hurwitz_zeta_sprime0(a), hurwitz_zeta_sprime0(b)
    # d/ds [ e^{sL} (zeta(s,a) + e^{i pi c s} zeta(s,b)) ] at s = 0
    dzeta = L * (za + zb) + dza + dzb + 1j * math.pi * c * zb
    if statistics is Statistics.B:
        # minus the double-counted omega = 0 term (-E)^(-s)
        dzeta += np.log(complex(-E))
    return -dzeta


def matsubara_logdet_series(E, beta: float, statistics: Statistics, c: int = -1) -> complex:
    """Sum of :func:`matsubara_logdet_mode` over an array of mode energies.

    Equals ``sum log(1 + exp(c beta E_q))`` (F) or ``sum log(1 - exp(c beta E_q))``
    (B) up to multiples of ``2 pi i``, so ``exp`` of the result is
    unambiguous.
    """
    E = np.atleast_1d(np.asarray(E, dtype=float))
    if statistics is Statistics.B and np.any(E == 0):
        raise SingularityError("bosonic mode with E = 0 has log(1 - 1)")
    return complex(sum(matsubara_logdet_mode(float(e), beta, statistics, c) for e in E))


def integer_zeta_measure() -> complex:
    """``2 zeta(0) + 1``, the regularized number of points of Z (zero)."""
    return 2 * hurwitz_zeta(0, 1).value + 1


# --- single-mode Mellin construction ------------------------------------


def _fermi_gaussian_sum(t: float, beta: float) -> float:
    """``sum_{omega_F} exp(-omega^2 t)`` over fermionic Matsubara frequencies.

    Small t uses the Poisson-resummed form to avoid summing many terms and to
    isolate the ``beta / (2 sqrt(pi t))`` leading behaviour.
    """
    if t < 0.1:
        return _poisson_prefactor(t, beta) * (1.0 + 2.0 * _poisson_tail(t, beta))
    total = 0.0
    n = 0
    while True:
        w = math.pi * (2 * n + 1) / beta
        term = math.exp(-w * w * t)
        total += 2 * term
        if term <= 1e-18 * total:
            return total
        n += 1


def _poisson_prefactor(t: float, beta: float) -> float:
    return beta / (2.0 * math.sqrt(math.pi * t))


def _poisson_tail(t: float, beta: float) -> float:
    """``sum_{k >= 1} (-1)^k exp(-beta^2 k^2 / (4 t))``."""
    total = 0.0
    k = 1
    while True:
        term = math.exp(-beta * beta * k * k / (4.0 * t))
        total += term if k % 2 == 0 else -term
        if term <= 1e-18:
            return total
        k += 1


@dataclass(frozen=True)
class MellinResult:
    """Regularized single-mode determinant.

    ``logdet_abs`` is log Det^(1/2)(omega^2 + lambda^2), ``phase`` is the real
    coefficient p in Det(i omega + lambda) = exp(logdet_abs - p), and ``det``
    is that value. ``error`` is the quadrature error estimate.
    """

    logdet_abs: float
    phase: float
    det: complex
    error: float


def single_mode_mellin(lam: float, beta: float, tol: float = 1e-6, c: int = -1) -> MellinResult:
    """Mellin-integral value of ``log Det^(1/2)(omega_F^2 + lambda^2)`` and the phase.

    The integral over ``t in [1, inf)`` uses the direct frequency sum, the
    one over ``(0, 1]`` uses ``rho(t)`` (trace minus ``beta / (2 sqrt(pi t))``)
    after ``t = u^2``, and the remainder contributes ``beta / (2 sqrt(pi))``.
    """
    lam = float(lam)
    if lam == 0:
        raise InvalidArgument("lambda must be nonzero")
    if not (beta > 0 and tol > 0):
        raise InvalidArgument("beta and tol must be positive")

    def upper(t):
        return _fermi_gaussian_sum(t, beta) * math.exp(-lam * lam * t) / t

    def lower(u):
        # rho(t) dt / t with t = u^2, dt / t = 2 du / u
        if u == 0.0:
            return 0.0
        t = u * u
        pre = _poisson_prefactor(t, beta)
        if t < 0.1:
            rho = pre * (math.expm1(-lam * lam * t)
                         + 2.0 * math.exp(-lam * lam * t) * _poisson_tail(t, beta))
        else:
            rho = _fermi_gaussian_sum(t, beta) * math.exp(-lam * lam * t) - pre
        return 2.0 * rho / u

    quad_tol = min(tol, 1e-8) * 1e-3
    I1, e1 = integrate.quad(upper, 1.0, np.inf, epsabs=quad_tol, epsrel=1e-13, limit=400)
    I2, e2 = integrate.quad(lower, 0.0, 1.0, epsabs=quad_tol, epsrel=1e-13, limit=400)
    logdet_abs = -0.5 * I1 - 0.5 * I2 + beta / (2.0 * math.sqrt(math.pi))
    err = 0.5 * (e1 + e2)
    exact = abs(beta * lam) / 2 + math.log1p(math.exp(-abs(beta * lam)))
    if not abs(logdet_abs - exact) <= tol:
        raise AccuracyFailure(
            f"Mellin construction off by {abs(logdet_abs - exact):.3e} > tol={tol}",
            estimate=logdet_abs, error=abs(logdet_abs - exact))
    # phase = (1/2) [L(lambda) - L(-lambda)] with L(l) = -d/ds sum (i omega + l)^(-s);
    # splitting log(-1) off every frequency adds i pi (2 zeta(0) + 1) / 2 = 0
    L_plus = matsubara_logdet_mode(-lam, beta, Statistics.F, c)
    L_minus = matsubara_logdet_mode(lam, beta, Statistics.F, c)
    phase = 0.5 * (L_plus - L_minus) + 0.5j * math.pi * integer_zeta_measure()
    phase = float(phase.real)
    det = complex(np.exp(logdet_abs - phase))
    return MellinResult(logdet_abs, phase, det, err)
