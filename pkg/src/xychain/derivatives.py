"""Closed-form alpha-derivatives at alpha = 0, moments of Q(m) and z-correlators.

Finite chains use the full four-sector assembly; bosonic sectors enter as
derivatives of the regular product ``G_B Z_B / Z_F`` so zero modes need no
special casing. Thermodynamic limits are one-dimensional periodic
quadratures.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import InternalInconsistency, InvalidArgument
from .genfunc import _check_bose, nambu_data
from .model import ChainSpec, Sector, Statistics, sector_data
from .partition import log_product
from .quadrature import periodic_trapezoid


def _check_order(order) -> int:
    if order not in (1, 2):
        raise InvalidArgument(f"order must be 1 or 2, got {order!r}")
    return order


# --------------------------------------------------------------------------
# determinant derivatives of one sector


def xx_occupation(spec: ChainSpec, sector: Sector, statistics: Statistics) -> np.ndarray:
    """``(1 +- e^{beta eps_q})^{-1}`` over the sector grid."""
    _, sd, _ = sector_data(spec.replace(gamma=0.0), sector)
    x = spec.beta * sd.eps
    if statistics is Statistics.F:
        return expit(-x)
    _check_bose(sd.eps, spec.beta)
    return -1.0 / np.expm1(x)


def dlogdet_alpha0_xx(spec: ChainSpec, sector: Sector, statistics: Statistics,
                      order: int = 1) -> float:
    """``D^{(n)}(0) / D(0)`` for ``D(alpha) = det[I + (e^alpha - 1) Q n]``.

    ``order=1``: ``tr(Q n)``; ``order=2``: ``tr(Q n) + tr^2(Q n) - tr(Q n Q n)``
    with ``n = (1 +- e^{beta eps})^{-1}``. ``spec.gamma`` is ignored.
    """
    _check_order(order)
    n = xx_occupation(spec, sector, statistics)
    _, _, ker = sector_data(spec, sector)
    Q = ker.Qm
    t1 = float(np.diag(Q) @ n)
    if order == 1:
        return t1
    QQ = Q * Q.T
    return t1 + t1 * t1 - float(n @ QQ @ n)


def _xy_traces(spec: ChainSpec, sector: Sector, statistics: Statistics):
    """``tr(X N)``, ``tr(X N X N)`` and ``tr(g (Q x 1) g^T N)`` of the Nambu form."""
    nd = nambu_data(spec, sector, statistics)
    XN = nd.X * nd.N[None, :]
    Y = nd.P @ nd.g.T
    return float(np.trace(XN)), float(np.sum(XN * XN.T)), float(np.diag(Y) @ nd.N)


def dlogdet_alpha0_xy(spec: ChainSpec, sector: Sector, statistics: Statistics,
                      order: int = 1) -> float:
    """``D^{(n)}(0) / D(0)`` for ``D(alpha) = det^{1/2}(I + Mt(alpha))``.

    ``order=1``: ``-tr(X N) / 2`` with ``X = g (Q x sigma3) g^T`` and ``N =
    (1 +- e^{-beta E x sigma3})^{-1}``. ``order=2``: ``tr(g (Q x 1) g^T N) / 2 +
    tr^2(X N) / 4 - tr(X N X N) / 2``.
    """
    _check_order(order)
    t1, t2, t0 = _xy_traces(spec, sector, statistics)
    if order == 1:
        return -0.5 * t1
    return 0.5 * t0 + 0.25 * t1 * t1 - 0.5 * t2


def _k_prime_diag(spec: ChainSpec, sector: Sector, statistics: Statistics):
    """``d`` of ``K'(0) = (Q / 2) diag(d)``, and the kernel."""
    _, sd, ker = sector_data(spec, sector)
    t = np.tanh(0.5 * spec.beta * sd.E)
    if statistics is Statistics.B:
        _check_bose(sd.E, spec.beta)
        t = 1.0 / t
    return 1 - np.exp(1j * sd.theta) * t, ker.Qm


def genfunc_alpha_derivatives(spec: ChainSpec, sector: Sector, statistics: Statistics,
                              form: str = "K") -> tuple[float, float]:
    """``(G'(0), G''(0))`` of one sector functional.

    ``form="K"`` uses ``K'(0) = (Q / 2) diag(1 - e^{i theta} t)``:
    ``G' = tr K'``, ``G'' = tr^2 K' + tr K' - tr(K' K')``.
    ``form="M"`` uses the Nambu kernel: ``G' = (m + tr Mt') / 2`` and
    ``G'' = (m + tr Mt')^2 / 4 + tr Mt'' / 2 - tr(Mt' Mt') / 2``.
    """
    if form == "K":
        d, Q = _k_prime_diag(spec, sector, statistics)
        tr1 = np.diag(Q) @ d / 2
        tr2 = d @ (Q * Q.T) @ d / 4
        g1, g2 = tr1, tr1 * tr1 + tr1 - tr2
    elif form == "M":
        t1, t2, t0 = _xy_traces(spec, sector, statistics)
        m = spec.m
        g1 = 0.5 * (m - t1)
        g2 = 0.25 * (m - t1) ** 2 + 0.5 * t0 - 0.5 * t2
    else:
        raise InvalidArgument(f"form must be 'K' or 'M', got {form!r}")
    return float(np.real(g1)), float(np.real(g2))


def _excluded_products(t: np.ndarray):
    """``P_i = prod_{k != i} t_k`` and ``P_ij = prod_{k != i, j} t_k`` without dividing by zero."""
    n = len(t)
    zero = t == 0
    nz = int(zero.sum())
    pnz = float(np.prod(t[~zero]))
    safe = np.where(zero, 1.0, t)
    Pi = np.zeros(n)
    Pij = np.zeros((n, n))
    if nz == 0:
        Pi = pnz / safe
        Pij = pnz / np.outer(safe, safe)
    elif nz == 1:
        a = int(np.flatnonzero(zero)[0])
        Pi[a] = pnz
        Pij[a, :] = pnz / safe
        Pij[:, a] = pnz / safe
    elif nz == 2:
        a, b = np.flatnonzero(zero)
        Pij[a, b] = Pij[b, a] = pnz
    np.fill_diagonal(Pij, 0.0)
    return Pi, Pij


def bose_product_derivatives(spec: ChainSpec, sector: Sector) -> tuple[float, float, float]:
    """``R(0), R'(0), R''(0)`` of ``R(alpha) = G_B Z_B / Z_F``.

    ``R = det[T + (e^alpha - 1) Q diag(u)]`` with ``T = diag(tanh(beta E / 2))``
    and ``u = (t - e^{i theta}) / 2``. Expanding in ``a = e^alpha - 1`` gives
    ``R = R0 + c1 a + c2 a^2 + ...``, so ``R' = c1`` and ``R'' = c1 + 2 c2``;
    the coefficients are sums of principal minors of ``Q diag(u)`` times
    products of the remaining ``t``, finite even when some ``t`` vanish.
    """
    _, sd, ker = sector_data(spec, sector)
    t = np.tanh(0.5 * spec.beta * sd.E)
    u = 0.5 * (t - np.exp(1j * sd.theta))
    Q = ker.Qm
    Pi, Pij = _excluded_products(t)
    r0 = float(np.prod(t))
    c1 = np.diag(Q) * u @ Pi
    diag = np.diag(Q) * u
    minors = np.outer(diag, diag) - (Q * Q.T) * np.outer(u, u)
    c2 = 0.5 * np.sum(minors * Pij)
    return r0, float(np.real(c1)), float(np.real(c1 + 2 * c2))


# --------------------------------------------------------------------------
# moments and correlators of a finite chain


def q_moments(spec: ChainSpec, form: str = "K") -> tuple[float, float]:
    """Thermal ``<Q(m)>`` and ``<Q(m)^2>`` from the four-sector assembly.

    Examples
    --------
    >>> q_moments(ChainSpec(M=4, m=0, h=0.3))
    (0.0, 0.0)
    """
    if spec.m == 0:
        return 0.0, 0.0
    logzf, n1, n2, den = [], [], [], []
    for sector in Sector:
        _, sd, _ = sector_data(spec, sector)
        _, zfl = log_product(sd.E, spec.beta, Statistics.F)
        g1, g2 = genfunc_alpha_derivatives(spec, sector, Statistics.F, form)
        r0, r1, r2 = bose_product_derivatives(spec, sector)
        s = sector.sign
        logzf.append(zfl)
        n1.append(g1 + s * r1)
        n2.append(g2 + s * r2)
        den.append(1.0 + s * r0)
    w = np.exp(np.array(logzf) - max(logzf))
    d = float(np.dot(w, den))
    if not d > 0:
        raise InternalInconsistency(f"assembled partition function not positive ({d!r})")
    return float(np.dot(w, n1) / d), float(np.dot(w, n2) / d)


def sigma_z(spec: ChainSpec) -> float:
    """``<sigma^z_m> = 1 - 2 (<Q(m)> - <Q(m-1)>)``; needs ``m >= 1``."""
    if spec.m < 1:
        raise InvalidArgument("sigma_z needs m >= 1")
    q1 = q_moments(spec)[0]
    q0 = q_moments(spec.replace(m=spec.m - 1))[0]
    return 1.0 - 2.0 * (q1 - q0)


def zz_correlator(spec: ChainSpec, n: int) -> float:
    """``<sigma^z_{n+1} sigma^z_1> = 2 D2 <Q^2(n)> + 2 sigma_z - 1`` on the finite chain.

    ``D2 f(n) = f(n+1) - 2 f(n) + f(n-1)``; requires ``1 <= n <= M - 1``.
    """
    if not 1 <= n <= spec.M - 1:
        raise InvalidArgument(f"separation must satisfy 1 <= n <= M-1, got {n}")
    q2 = [q_moments(spec.replace(m=k))[1] for k in (n - 1, n, n + 1)]
    sz = sigma_z(spec.replace(m=1))
    return 2.0 * (q2[2] - 2 * q2[1] + q2[0]) + 2.0 * sz - 1.0


@dataclass
class ThermalCorrelators:
    """Thermal z-observables of one finite chain."""

    sigma_z: float
    zz: dict = field(default_factory=dict)
    q1: float = 0.0
    q2: float = 0.0


def thermal_correlators(spec: ChainSpec, separations=None) -> ThermalCorrelators:
    """``sigma_z``, ``zz(n)`` for the requested separations, and moments at ``spec.m``."""
    seps = range(1, spec.M) if separations is None else separations
    q1, q2 = q_moments(spec)
    sz = sigma_z(spec.replace(m=1))
    Q2 = {k: q_moments(spec.replace(m=k))[1] for k in range(spec.M + 1)} if separations is None \
        else {}

    def q2_at(k):
        if k not in Q2:
            Q2[k] = q_moments(spec.replace(m=k))[1]
        return Q2[k]

    zz = {int(n): 2.0 * (q2_at(n + 1) - 2 * q2_at(n) + q2_at(n - 1)) + 2.0 * sz - 1.0
          for n in seps}
    return ThermalCorrelators(sz, zz, q1, q2)


# --------------------------------------------------------------------------
# thermodynamic limit


def _cos_sin_theta_tanh(q, gamma: float, h: float, beta: float):
    """``cos(theta) tanh(beta E / 2)`` and ``sin(theta) tanh(beta E / 2)``."""
    eps = h - np.cos(q)
    gam = gamma * np.sin(q)
    E = np.hypot(eps, gam)
    th = np.tanh(0.5 * beta * E)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(E > 0, th / E, 0.5 * beta)
    return eps * r, -gam * r


def _check_limit_args(beta: float, tol: float) -> None:
    if not beta > 0:
        raise InvalidArgument("thermodynamic limits need beta > 0")
    if not tol > 0:
        raise InvalidArgument("tol must be positive")


def sigma_z_limit(gamma: float, h: float, beta: float, tol: float = 1e-12) -> float:
    """``(1 / 2 pi) int cos(theta_q) tanh(beta E_q / 2) dq``."""
    _check_limit_args(beta, tol)
    val, _ = periodic_trapezoid(lambda q: _cos_sin_theta_tanh(q, gamma, h, beta)[0],
                                tol * 2 * np.pi)
    return float(val / (2 * np.pi))


def sigma_z_limit_xx(h: float, beta: float, tol: float = 1e-12) -> float:
    """``1 - (1 / pi) int dq / (1 + e^{beta eps_q})``."""
    _check_limit_args(beta, tol)
    val, _ = periodic_trapezoid(lambda q: expit(-beta * (h - np.cos(q))), tol * np.pi)
    return float(1.0 - val / np.pi)


def _fourier(f, n: int, tol: float) -> complex:
    """``int_{-pi}^{pi} e^{i n q} f(q) dq`` with the grid resolving the oscillation."""
    val, _ = periodic_trapezoid(lambda q: np.exp(1j * n * q) * f(q), tol,
                                n_min=4 * (n + 1))
    return complex(val)


def zz_connected_limit(gamma: float, h: float, beta: float, n: int, tol: float = 1e-12) -> float:
    """``(1 / 4 pi^2) iint cos n(p - q) (S_p S_q - C_p C_q) dp dq``.

    ``C = 1 - cos(theta) tanh``, ``S = sin(theta) tanh``. Because ``cos n(p - q)
    = Re e^{inp} e^{-inq}`` the double integral is ``|S_n|^2 - |C_n|^2`` with
    ``X_n = int e^{inq} X_q dq``, which is also exactly what a tensor-product
    trapezoid rule yields on a uniform grid.
    """
    _check_limit_args(beta, tol)
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InvalidArgument(f"separation n must be an integer >= 1, got {n!r}")
    n = int(n)
    itol = tol * np.pi  # keeps the combined error of the two moduli below tol

    def C(q):
        return 1 - _cos_sin_theta_tanh(q, gamma, h, beta)[0]

    def S(q):
        return _cos_sin_theta_tanh(q, gamma, h, beta)[1]

    Sn, Cn = _fourier(S, n, itol), _fourier(C, n, itol)
    return float((abs(Sn) ** 2 - abs(Cn) ** 2) / (4 * np.pi ** 2))


def zz_correlator_limit(gamma: float, h: float, beta: float, n: int, tol: float = 1e-12) -> float:
    """``<sigma^z_{n+1} sigma^z_1>`` of the infinite XY chain."""
    sz = sigma_z_limit(gamma, h, beta, tol)
    return sz * sz + zz_connected_limit(gamma, h, beta, n, tol)


def zz_correlator_limit_xx(h: float, beta: float, n: int, tol: float = 1e-12) -> float:
    """``(sigma^z)^2 - (1 / pi^2) |int e^{i n q} / (1 + e^{beta eps_q}) dq|^2``."""
    _check_limit_args(beta, tol)
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InvalidArgument(f"separation n must be an integer >= 1, got {n!r}")
    sz = sigma_z_limit_xx(h, beta, tol)
    F = _fourier(lambda q: expit(-beta * (h - np.cos(q))), int(n), tol * np.pi / 2)
    return float(sz * sz - abs(F) ** 2 / np.pi ** 2)


def q_moments_limit(gamma: float, h: float, beta: float, m: int,
                    tol: float = 1e-12) -> tuple[float, float]:
    """``<Q(m)>`` and ``<Q(m)^2>`` of the infinite chain from the limit correlators.

    ``<Q> = m (1 - sigma_z) / 2`` and ``<Q^2> = sum_{j,k <= m} <n_j n_k>`` with
    ``<n_j n_k> = (1 - 2 sigma_z + zz(|j - k|)) / 4``.
    """
    if isinstance(m, bool) or int(m) != m or m < 0:
        raise InvalidArgument(f"m must be a non-negative integer, got {m!r}")
    sz = sigma_z_limit(gamma, h, beta, tol)
    rho = 0.5 * (1 - sz)
    q2 = m * rho
    for d in range(1, m):
        zz = sz * sz + zz_connected_limit(gamma, h, beta, d, tol)
        q2 += 2 * (m - d) * (1 - 2 * sz + zz) / 4
    return m * rho, q2

