"""Sector generating functionals and their assembly into ``G(alpha, m)``.

Each sector (PLUS / MINUS) and statistics (F / B) contributes
``G Z = Tr(e^{alpha Q} [(-1)^N] e^{-beta H_sector})``. Three independent
representations of ``G`` are provided:

* ``MxM``: ``det[I + (e^alpha - 1) (Q / 2) diag(1 - e^{i theta} t_q)]`` with
  ``t = tanh(beta E / 2)`` (F) or ``coth(beta E / 2)`` (B).
* ``2Mx2M``: ``e^{alpha m / 2} det^{1/2}(I + Mt(alpha))`` on the Nambu space,
  the root continued from ``alpha = 0`` along ``alpha * t``.
* ``series``: the trace-log expansion of the same 2M determinant truncated at
  order ``K``.

The assembly never divides by ``Z_B``: bosonic pieces enter through the
finite products ``G_B Z_B / Z_F``, so vanishing modes are harmless.

Nambu indices are ``2 * iq + spinor`` (spinor fastest).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.special import expit

from .errors import AccuracyFailure, InternalInconsistency, InvalidArgument, SingularityError
from .model import (ChainSpec, Sector, Statistics, bogoliubov_matrix,
                    sector_data)
from .partition import SECTOR_TERMS, log_product

NEAR_ZERO = 1e-10
MAX_PHASE_STEPS = 2 ** 16
# below this beta |E| the bosonic functional alone is a ratio of two nearly
# vanishing traces; assembly then uses the joint numerator instead
SOFT_BOSE = 1e-3
# roots below this size are returned as zero; their branch is immaterial
ZERO_ROOT = 1e-13


class SeriesDivergenceWarning(RuntimeWarning):
    """Trace-log series evaluated outside its disk of convergence."""


@dataclass(frozen=True)
class Representation:
    """Which determinant form evaluates the sector functionals.

    Parameters
    ----------
    kind : {"MxM", "2Mx2M", "series"}
    K : int
        Truncation order, used only by ``"series"``.
    """

    kind: str = "MxM"
    K: int = 12

    def __post_init__(self):
        if self.kind not in ("MxM", "2Mx2M", "series"):
            raise InvalidArgument(f"unknown representation {self.kind!r}")
        if isinstance(self.K, bool) or int(self.K) != self.K or self.K < 1:
            raise InvalidArgument(f"series order K must be an integer >= 1, got {self.K!r}")

    @classmethod
    def parse(cls, text: str) -> "Representation":
        """``"MxM"``, ``"2Mx2M"``, ``"series"`` or ``"series:K"``."""
        kind, _, k = text.partition(":")
        aliases = {"mxm": "MxM", "2mx2m": "2Mx2M", "twomxtwom": "2Mx2M", "series": "series"}
        if kind.lower() not in aliases:
            raise InvalidArgument(f"unknown representation {text!r}")
        try:
            return cls(aliases[kind.lower()], int(k) if k else 12)
        except ValueError:
            raise InvalidArgument(f"bad series order in {text!r}") from None

    def __str__(self):
        return f"series:{self.K}" if self.kind == "series" else self.kind


@dataclass(frozen=True)
class SectorResult:
    """``G`` of one sector together with ``Z`` and the product ``G Z``.

    ``G`` is NaN when ``Z = 0`` (a bosonic zero mode); ``GZ`` is always finite.
    """

    sector: Sector
    statistics: Statistics
    G: complex
    Z: float
    GZ: complex


# --------------------------------------------------------------------------
# shared ingredients


def _tanh_half(spec: ChainSpec, E: np.ndarray) -> np.ndarray:
    return np.tanh(0.5 * spec.beta * E)


def _check_bose(E: np.ndarray, beta: float) -> None:
    if beta == 0 or np.min(np.abs(E)) < NEAR_ZERO:
        raise SingularityError("bosonic factor with vanishing energy; use the G Z product form")


def _occupation_factor(E: np.ndarray, beta: float, statistics: Statistics) -> np.ndarray:
    """``1 - e^{i theta} t`` without the angle: ``t = tanh`` (F) or ``coth`` (B)."""
    t = np.tanh(0.5 * beta * E)
    if statistics is Statistics.F:
        return t
    _check_bose(E, beta)
    return 1.0 / t


def mxm_kernel(spec: ChainSpec, sector: Sector, statistics: Statistics) -> np.ndarray:
    """``K = (e^alpha - 1) (Q / 2) diag(1 - e^{i theta} t)``; ``G = det(I + K)``."""
    _, sd, ker = sector_data(spec, sector)
    t = _occupation_factor(sd.E, spec.beta, statistics)
    d = 1 - np.exp(1j * sd.theta) * t
    return np.expm1(spec.alpha) * (ker.Qm / 2) * d[None, :]


def _det(A: np.ndarray) -> complex:
    return complex(np.linalg.det(A))


def genfunc_xx_sector(spec: ChainSpec, sector: Sector, statistics: Statistics) -> complex:
    """XX sector functional ``det[I + (e^alpha - 1) Q (I +- e^{beta eps})^{-1}]``.

    ``spec.gamma`` is ignored; only the band energies ``eps_q = h - cos q`` enter.

    Examples
    --------
    >>> genfunc_xx_sector(ChainSpec(M=4, m=2, h=0.5, beta=0.0, alpha=1.0),
    ...                   Sector.PLUS, Statistics.F)   # ((1 + e) / 2)^2
    (3.4564...+0j)
    """
    if spec.alpha == 0:
        return 1.0 + 0j
    _, sd, ker = sector_data(spec.replace(gamma=0.0), sector)
    x = spec.beta * sd.eps
    if statistics is Statistics.F:
        occ = expit(-x)
    else:
        _check_bose(sd.eps, spec.beta)
        occ = -1.0 / np.expm1(x)
    n = spec.M
    return _det(np.eye(n) + np.expm1(spec.alpha) * ker.Qm * occ[None, :])


def genfunc_xy_sector_M(spec: ChainSpec, sector: Sector, statistics: Statistics) -> complex:
    """``det_M[I + (e^alpha - 1)(Q / 2) diag(1 - e^{i theta} tanh(beta E / 2))]`` (F).

    B replaces tanh by coth and raises :class:`SingularityError` at a zero
    mode; :func:`joint_numerator_M` gives the regular product instead.
    """
    if spec.alpha == 0:
        return 1.0 + 0j
    return _det(np.eye(spec.M) + mxm_kernel(spec, sector, statistics))


def joint_numerator_M(spec: ChainSpec, sector: Sector, statistics: Statistics) -> complex:
    """``G Z / Z_F`` of a sector in a form regular at vanishing energies.

    F: ``G_F``. B: ``det[diag(t) + (e^alpha - 1)(Q / 2) diag(t - e^{i theta})]``
    with ``t = tanh(beta E / 2)``, which equals ``G_B prod t``.
    """
    if statistics is Statistics.F:
        return genfunc_xy_sector_M(spec, sector, statistics)
    _, sd, ker = sector_data(spec, sector)
    t = _tanh_half(spec, sd.E)
    A = np.diag(t).astype(complex) + np.expm1(spec.alpha) * (ker.Qm / 2) * \
        (t - np.exp(1j * sd.theta))[None, :]
    return _det(A)


# --------------------------------------------------------------------------
# 2M x 2M Nambu form


@dataclass(frozen=True, eq=False)
class NambuData:
    """Ingredients of the 2M determinant of one sector.

    ``g`` is the Bogoliubov rotation, ``P = g (Q x 1)``, ``X = g (Q x sigma3) g^T``,
    ``lam`` the Nambu energies ``(E, -E)`` per momentum and ``N`` the
    statistical factor ``1 / (1 +- e^{-beta lam})``.
    """

    m: int
    g: np.ndarray
    P: np.ndarray
    X: np.ndarray
    lam: np.ndarray
    N: np.ndarray


def nambu_data(spec: ChainSpec, sector: Sector, statistics: Statistics) -> NambuData:
    _, sd, ker = sector_data(spec, sector)
    g = bogoliubov_matrix(sd.theta)
    P = g @ np.kron(ker.Qm, np.eye(2))
    X = g @ np.kron(ker.Qm, np.diag([1.0, -1.0])) @ g.T
    lam = np.kron(sd.E, [1.0, -1.0])
    x = spec.beta * lam
    if statistics is Statistics.F:
        N = expit(x)
    else:
        _check_bose(sd.E, spec.beta)
        N = -1.0 / np.expm1(-x)
    return NambuData(spec.m, g, P, X, lam, N)


def _spinor_weights(alpha: complex, n: int) -> np.ndarray:
    return np.tile(np.array([np.expm1(-alpha), np.expm1(alpha)]), n)


def nambu_kernel(nd: NambuData, alpha: complex) -> np.ndarray:
    """``Mt(alpha) = g [Q x diag(e^{-alpha} - 1, e^{alpha} - 1)] g^T diag(N)``."""
    d = _spinor_weights(alpha, len(nd.lam) // 2)
    return (nd.P * d[None, :]) @ (nd.g.T * nd.N[None, :])


def _track_sqrt(value_at, steps: int, max_segments: int = MAX_PHASE_STEPS):
    """Continue ``sqrt`` of ``f(t)`` from ``f(0) = 1`` (root +1) to ``t = 1``.

    ``value_at(t)`` returns ``(phase_factor, log_abs, dlog)`` with ``dlog =
    d log f / dt``; entries may be arrays of independent functions tracked
    together. The path starts as ``steps`` equal segments. A segment is
    accepted when ``|dlog| dt < pi/4`` at both ends and the measured phase
    increment agrees with the trapezoid estimate from ``dlog``; otherwise it
    is bisected. The derivative check catches windings around near-zeros that
    a phase comparison modulo 2 pi cannot see. If any root at ``t = 1`` is
    smaller than ``ZERO_ROOT`` all roots are returned as zero, since callers
    multiply them.
    """
    if isinstance(steps, bool) or int(steps) != steps or steps < 2:
        raise InvalidArgument(f"phase_steps must be an integer >= 2, got {steps!r}")
    sgn1, log1, _ = value_at(1.0)
    if np.any(np.asarray(sgn1) == 0) or np.any(0.5 * np.asarray(log1) < np.log(ZERO_ROOT)):
        return np.zeros(np.shape(log1))
    cache = {}

    def at(t):
        if t not in cache:
            sgn, logabs, dlog = value_at(t)
            if np.any(sgn == 0) or not np.all(np.isfinite(dlog)):
                raise SingularityError("determinant vanishes on the continuation path")
            cache[t] = (np.asarray(sgn), np.asarray(logabs), np.asarray(dlog))
        return cache[t]

    nodes = np.linspace(0.0, 1.0, int(steps) + 1)
    todo = [(float(a), float(b)) for a, b in zip(nodes[-2::-1], nodes[:0:-1])]
    phi = 0.0
    while todo:
        a, b = todo.pop()
        (fa, _, ga), (fb, _, gb) = at(a), at(b)
        dt = b - a
        inc = np.angle(fb / fa)
        pred = 0.5 * dt * (ga + gb).imag
        if (np.all(np.abs(ga) * dt < np.pi / 4) and np.all(np.abs(gb) * dt < np.pi / 4)
                and np.all(np.abs(inc - pred) < 0.5)):
            phi = phi + inc
            continue
        if dt < 1.0 / max_segments:
            raise AccuracyFailure("square-root phase tracking did not stabilize",
                                  estimate=None, error=float(np.max(np.abs(inc - pred))))
        mid = 0.5 * (a + b)
        todo.append((mid, b))
        todo.append((a, mid))
    return np.exp(0.5 * (at(1.0)[1] + 1j * phi))


def _paths(alpha: complex):
    """Straight path ``t alpha`` first, then two detours bent off either side.

    The continued roots are entire in ``alpha``, so every path from 0 gives the
    same value; detours only matter when a zero sits on the straight segment,
    as happens for real ``alpha`` in bosonic sectors.
    """
    side = 1j * alpha / abs(alpha) * max(1.0, abs(alpha))
    for bend in (0.0, 0.5 * side, -0.5 * side):
        yield (lambda t, b=bend: alpha * t + b * t * (1 - t),
               lambda t, b=bend: alpha + b * (1 - 2 * t))


def _track_paths(make_value_at, alpha: complex, steps: int):
    """Run :func:`_track_sqrt` along :func:`_paths` until one succeeds."""
    err = None
    for a, da in _paths(alpha):
        try:
            return _track_sqrt(make_value_at(a, da), steps)
        except (SingularityError, AccuracyFailure) as e:
            err = e
    raise err


def nambu_sqrt_det(nd: NambuData, alpha: complex, phase_steps: int = 8) -> complex:
    """``det^{1/2}(I + Mt(alpha))`` continued from ``alpha = 0``."""
    n2 = len(nd.lam)
    right = nd.g.T * nd.N[None, :]
    eye = np.eye(n2)

    def make(a, da):
        def slog(t):
            at, dat = a(t), da(t)
            W = eye + (nd.P * _spinor_weights(at, n2 // 2)[None, :]) @ right
            dw = np.tile(np.array([-dat * np.exp(-at), dat * np.exp(at)]), n2 // 2)
            dW = (nd.P * dw[None, :]) @ right
            sgn, logabs = np.linalg.slogdet(W)
            try:
                return sgn, logabs, np.trace(np.linalg.solve(W, dW))
            except np.linalg.LinAlgError:
                return 0.0, -np.inf, np.nan
        return slog

    return complex(_track_paths(make, alpha, phase_steps))


def genfunc_xy_sector_2M(spec: ChainSpec, sector: Sector, statistics: Statistics,
                         phase_steps: int = 8) -> complex:
    """``e^{alpha m / 2} det^{1/2}(I + Mt(alpha))`` with a tracked square root.

    Raises
    ------
    SingularityError
        B statistics with a vanishing mode.
    AccuracyFailure
        The root could not be continued within ``MAX_PHASE_STEPS`` segments.
    """
    if isinstance(phase_steps, bool) or int(phase_steps) != phase_steps or phase_steps < 2:
        raise InvalidArgument(f"phase_steps must be an integer >= 2, got {phase_steps!r}")
    if spec.alpha == 0:
        return 1.0 + 0j
    nd = nambu_data(spec, sector, statistics)
    return complex(np.exp(spec.alpha * spec.m / 2) * nambu_sqrt_det(nd, spec.alpha, phase_steps))


# --------------------------------------------------------------------------
# trace-log series


def series_terms(spec: ChainSpec, sector: Sector, statistics: Statistics, K: int) -> np.ndarray:
    """``(-1)^{k-1} / k * tr Mt(alpha)^k`` for ``k = 1..K``."""
    if isinstance(K, bool) or int(K) != K or K < 1:
        raise InvalidArgument(f"K must be an integer >= 1, got {K!r}")
    nd = nambu_data(spec, sector, statistics)
    T = nambu_kernel(nd, spec.alpha)
    out = np.empty(int(K), dtype=complex)
    P = np.eye(len(T), dtype=complex)
    for k in range(1, int(K) + 1):
        P = P @ T
        out[k - 1] = (-1) ** (k - 1) / k * np.trace(P)
    return out


def series_radius(spec: ChainSpec, sector: Sector, statistics: Statistics) -> float:
    """Spectral radius of ``Mt(alpha)``; the series converges when it is below 1.

    The truncation error after ``K`` terms is roughly ``rho^{K+1} / (K + 1)``.
    Bosonic sectors with ``beta E`` small have large statistical factors and
    a correspondingly small radius in ``alpha``.
    """
    nd = nambu_data(spec, sector, statistics)
    return float(np.max(np.abs(np.linalg.eigvals(nambu_kernel(nd, spec.alpha)))))


def genfunc_series(spec: ChainSpec, sector: Sector, statistics: Statistics, K: int = 12) -> complex:
    """``e^{alpha m / 2} exp(1/2 sum_{k<=K} (-1)^{k-1}/k tr Mt^k)``.

    Accurate to ``O(alpha^{K+1})`` inside the disk of convergence. Emits
    :class:`SeriesDivergenceWarning` when the spectral radius of ``Mt`` is at
    least 1, where the partial sums do not converge.
    """
    if isinstance(K, bool) or int(K) != K or K < 1:
        raise InvalidArgument(f"K must be an integer >= 1, got {K!r}")
    if spec.alpha == 0:
        return 1.0 + 0j
    terms = series_terms(spec, sector, statistics, K)
    rho = series_radius(spec, sector, statistics)
    if rho >= 1:
        warnings.warn(f"trace-log series diverges (spectral radius {rho:.3g})",
                      SeriesDivergenceWarning, stacklevel=2)
    return complex(np.exp(spec.alpha * spec.m / 2 + 0.5 * terms.sum()))


# --------------------------------------------------------------------------
# full window m = M


def full_window_product(spec: ChainSpec, sector: Sector, statistics: Statistics = Statistics.F,
                        phase_steps: int = 8) -> complex:
    """Closed product for ``m = M``.

    ``e^{alpha M / 2} prod_q [cosh^2(alpha/2) - sinh(alpha) cos(theta_q) t_q
    + sinh^2(alpha/2) t_q^2]^{1/2}`` with ``t = tanh(beta E / 2)`` (F) or
    ``coth`` (B); every root is continued from ``alpha = 0``.
    """
    _, sd, _ = sector_data(spec, sector)
    t = _occupation_factor(sd.E, spec.beta, statistics)
    c = np.cos(sd.theta)
    alpha = spec.alpha
    if alpha == 0:
        return 1.0 + 0j

    def make(path, dpath):
        def slog(s):
            a, da = path(s), dpath(s)
            f = np.cosh(a / 2) ** 2 - np.sinh(a) * c * t + np.sinh(a / 2) ** 2 * t * t
            df = da * (0.5 * np.sinh(a) * (1 + t * t) - np.cosh(a) * c * t)
            r = np.abs(f)
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(r > 0, f / r, 0), np.log(r), df / f
        return slog

    roots = _track_paths(make, alpha, phase_steps)
    return complex(np.exp(alpha * spec.M / 2) * np.prod(roots))


# --------------------------------------------------------------------------
# literal Matsubara series (diagnostic)


def _opitz_offdiag(diag: np.ndarray, sup: np.ndarray, k: int, f) -> np.ndarray:
    """Top-right block of ``f`` applied to the k-block bidiagonal matrix."""
    n = len(diag)
    B = np.zeros((k * n, k * n))
    for j in range(k):
        B[j * n:(j + 1) * n, j * n:(j + 1) * n] = np.diag(diag)
        if j + 1 < k:
            B[j * n:(j + 1) * n, (j + 1) * n:(j + 2) * n] = sup
    return f(B)[:n, (k - 1) * n:]


def frequency_series_terms(spec: ChainSpec, sector: Sector, statistics: Statistics,
                           K: int) -> np.ndarray:
    """Order-by-order terms of the frequency-space expansion of ``log G``.

    Term ``k`` is ``alpha^k / (2k) tr(f(B_k)_{1k} X)`` with ``B_k`` block
    bidiagonal (``beta Lambda`` on the diagonal, ``-X`` above it) and
    ``f(x) = 1 / (1 +- e^x)``. Their sum is the expansion of
    :func:`frequency_series_resummed`, which agrees with the true ``G`` only to
    first order in ``alpha`` because the exponent ``alpha Q - beta H`` is
    resummed jointly.
    """
    nd = nambu_data(spec, sector, statistics)
    sgn = 1.0 if statistics is Statistics.F else -1.0

    def f(B):
        return np.linalg.inv(np.eye(len(B)) + sgn * expm(B))

    out = np.empty(int(K), dtype=complex)
    for k in range(1, int(K) + 1):
        blk = _opitz_offdiag(spec.beta * nd.lam, -nd.X, k, f) if k > 1 else \
            np.diag(1.0 / (1.0 + sgn * np.exp(spec.beta * nd.lam)))
        out[k - 1] = spec.alpha ** k / (2 * k) * np.trace(blk @ nd.X)
    return out


def frequency_series_resummed(spec: ChainSpec, sector: Sector, statistics: Statistics) -> complex:
    """``e^{alpha m / 2} [det(I +- e^{-beta Lambda + alpha X}) / det(I +- e^{-beta Lambda})]^{1/2}``."""
    nd = nambu_data(spec, sector, statistics)
    sgn = 1.0 if statistics is Statistics.F else -1.0
    L = np.diag(spec.beta * nd.lam)
    num = np.linalg.slogdet(np.eye(len(L)) + sgn * expm(-L + spec.alpha * nd.X))
    den = np.linalg.slogdet(np.eye(len(L)) + sgn * expm(-L))
    ratio = num[0] / den[0] * np.exp(num[1] - den[1])
    return complex(np.exp(spec.alpha * spec.m / 2) * np.sqrt(ratio))


# --------------------------------------------------------------------------
# assembly


def _sector_G(spec, sector, statistics, rep: Representation) -> complex:
    if rep.kind == "MxM":
        return genfunc_xy_sector_M(spec, sector, statistics)
    if rep.kind == "2Mx2M":
        return genfunc_xy_sector_2M(spec, sector, statistics)
    return genfunc_series(spec, sector, statistics, rep.K)


def _bose_ratio(spec, sector, rep: Representation) -> complex:
    """``G_B Z_B / Z_F`` of one sector."""
    _, sd, _ = sector_data(spec, sector)
    if rep.kind == "MxM" or spec.beta * np.min(np.abs(sd.E)) < SOFT_BOSE:
        return joint_numerator_M(spec, sector, Statistics.B)
    return _sector_G(spec, sector, Statistics.B, rep) * np.prod(_tanh_half(spec, sd.E))


def sector_results(spec: ChainSpec, representation: Representation | None = None) -> list:
    """:class:`SectorResult` for the four traces in assembly order."""
    rep = representation or Representation()
    out = []
    for sector, stats, _ in SECTOR_TERMS:
        _, sd, _ = sector_data(spec, sector)
        zs, zl = log_product(sd.E, spec.beta, stats)
        Z = float(zs * np.exp(zl)) if zs else 0.0
        if stats is Statistics.F:
            G = _sector_G(spec, sector, stats, rep)
            GZ = G * Z
        else:
            _, zfl = log_product(sd.E, spec.beta, Statistics.F)
            GZ = _bose_ratio(spec, sector, rep) * np.exp(zfl)
            G = GZ / Z if Z != 0 else complex("nan")
        out.append(SectorResult(sector, stats, complex(G), Z, complex(GZ)))
    return out


def assemble_generating_functional(spec: ChainSpec,
                                   representation: Representation | None = None) -> complex:
    """``G(alpha, m) = (2Z)^{-1} (G+_F Z+_F + G-_F Z-_F + G+_B Z+_B - G-_B Z-_B)``.

    Numerator and denominator are both formed relative to the larger F
    partition function, so neither large ``M`` nor bosonic zero modes cause
    overflow or division by zero.

    Raises
    ------
    InternalInconsistency
        If the assembled partition function is not positive.
    """
    rep = representation or Representation()
    logzf, num_parts, den_parts = [], [], []
    for sector in Sector:
        _, sd, _ = sector_data(spec, sector)
        _, zfl = log_product(sd.E, spec.beta, Statistics.F)
        sigma = sector.sign
        gf = _sector_G(spec, sector, Statistics.F, rep)
        rb = _bose_ratio(spec, sector, rep)
        logzf.append(zfl)
        num_parts.append(gf + sigma * rb)
        den_parts.append(1.0 + sigma * np.prod(_tanh_half(spec, sd.E)))
    shift = max(logzf)
    w = np.exp(np.array(logzf) - shift)
    den = float(np.dot(w, den_parts))
    if not den > 0:
        raise InternalInconsistency(f"assembled partition function not positive ({den!r})")
    return complex(np.dot(w, num_parts) / den)
