"""Sector and total partition functions, free energy per site.

All products over momenta are accumulated as sums of logarithms with a
separate sign so that chains with ``M`` in the thousands stay finite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import zeta
from .errors import InternalInconsistency, InvalidArgument
from .model import ChainSpec, Sector, Statistics, build_momentum_grid, dispersion
from .quadrature import periodic_trapezoid


@dataclass(frozen=True)
class SectorPartition:
    """``Z`` of one sector and statistics. ``value`` may be <= 0 only for B."""

    sector: Sector
    statistics: Statistics
    value: float


def sector_energies(spec: ChainSpec, sector: Sector) -> np.ndarray:
    """Quasi-particle energies of a sector, signed at q = 0 and q = pi."""
    return dispersion(spec, build_momentum_grid(spec.M, sector)).E


def log_2cosh(x):
    """``log(2 cosh x)`` without overflow."""
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2 * ax))


def log_abs_2sinh(x):
    """``log|2 sinh x|``; ``-inf`` at zero."""
    ax = np.abs(x)
    with np.errstate(divide="ignore"):
        return ax + np.log(-np.expm1(-2 * ax))


def log_product(E: np.ndarray, beta: float, statistics: Statistics) -> tuple[int, float]:
    """Sign and log-magnitude of ``prod 2cosh(beta E / 2)`` or ``prod 2sinh(beta E / 2)``."""
    x = 0.5 * beta * np.asarray(E, dtype=float)
    if statistics is Statistics.F:
        return 1, float(np.sum(log_2cosh(x)))
    if np.any(x == 0):
        return 0, -np.inf
    sign = 1 if np.count_nonzero(x < 0) % 2 == 0 else -1
    return sign, float(np.sum(log_abs_2sinh(x)))


def log_sector_partition(spec: ChainSpec, sector: Sector,
                         statistics: Statistics) -> tuple[int, float]:
    """``(sign, log|Z|)`` of one sector; sign 0 means ``Z = 0`` exactly."""
    return log_product(sector_energies(spec, sector), spec.beta, statistics)


def sector_partition(spec: ChainSpec, sector: Sector, statistics: Statistics) -> float:
    """``prod_q 2cosh(beta E_q / 2)`` (F) or ``prod_q 2sinh(beta E_q / 2)`` (B).

    Overflows to ``inf`` for long chains; :func:`log_sector_partition` does not.

    Examples
    --------
    >>> round(sector_partition(ChainSpec(M=4, beta=0.0), Sector.PLUS, Statistics.F), 12)
    16.0
    """
    sign, logabs = log_sector_partition(spec, sector, statistics)
    with np.errstate(over="ignore"):
        return float(sign * np.exp(logabs)) if sign else 0.0


def sector_partition_record(spec: ChainSpec, sector: Sector,
                            statistics: Statistics) -> SectorPartition:
    return SectorPartition(sector, statistics, sector_partition(spec, sector, statistics))


# (sector, statistics, sign with which the trace enters 2Z)
SECTOR_TERMS = (
    (Sector.PLUS, Statistics.F, 1),
    (Sector.MINUS, Statistics.F, 1),
    (Sector.PLUS, Statistics.B, 1),
    (Sector.MINUS, Statistics.B, -1),
)


def _log_terms(spec: ChainSpec):
    out = []
    for sector, stats, w in SECTOR_TERMS:
        sign, logabs = log_sector_partition(spec, sector, stats)
        out.append((w * sign, logabs))
    return out


def log_total_partition(spec: ChainSpec) -> float:
    """``log Z`` with ``Z = (Z+_F + Z-_F + Z+_B - Z-_B) / 2``.

    Raises
    ------
    InternalInconsistency
        If cancellation leaves a non-positive total.
    """
    terms = _log_terms(spec)
    shift = max(l for s, l in terms if s)
    acc = sum(s * np.exp(l - shift) for s, l in terms if s)
    if not acc > 0:
        raise InternalInconsistency(f"total partition function not positive ({acc!r} e^{shift})")
    return float(np.log(acc) + shift - np.log(2.0))


def total_partition(spec: ChainSpec) -> float:
    """``Tr exp(-beta H)`` of the spin chain."""
    return float(np.exp(log_total_partition(spec)))


def free_energy(spec: ChainSpec) -> float:
    """Free energy per site ``-log Z / (beta M)`` of the finite chain."""
    if not spec.beta > 0:
        raise InvalidArgument("free energy needs beta > 0")
    return -log_total_partition(spec) / (spec.beta * spec.M)


def band_energy(q, gamma: float, h: float):
    """``E_q = sqrt((h - cos q)^2 + gamma^2 sin^2 q)`` on a continuous momentum."""
    return np.hypot(h - np.cos(q), gamma * np.sin(q))


def free_energy_limit(gamma: float, h: float, beta: float, tol: float = 1e-12) -> float:
    """Free energy per site of the infinite chain.

    ``F = -(1 / 2 pi beta) int_0^pi log(2 (1 + cosh beta E_q)) dq``, evaluated
    as the equivalent full-period integral of ``log 2cosh(beta E_q / 2)``.
    """
    if not beta > 0:
        raise InvalidArgument("free_energy_limit needs beta > 0")
    if not tol > 0:
        raise InvalidArgument("tol must be positive")
    # the integrand enters with weight 1/(2 pi beta); rescale the tolerance
    scale = 1.0 / (2 * np.pi * beta)
    val, _ = periodic_trapezoid(lambda q: log_2cosh(0.5 * beta * band_energy(q, gamma, h)),
                                tol / scale)
    return float(-scale * val)


def ground_state_energy(E: np.ndarray) -> float:
    """``E_0 = -sum_q E_q / 2`` of one sector."""
    return float(-0.5 * np.sum(E))


def regularized_logdet_partition(spec: ChainSpec, sector: Sector, statistics: Statistics,
                                 c: int = -1) -> complex:
    """Zeta-regularized Matsubara log-determinant of one sector.

    Equals ``sum_q log(1 + e^{c beta E_q})`` (F) or ``sum_q log(1 - e^{c beta E_q})``
    (B); ``exp(result + c beta E_0)`` is the sector partition function. The
    value is complex because a B factor can be negative.

    Raises
    ------
    SingularityError
        B statistics with a vanishing energy.
    """
    if not spec.beta > 0:
        raise InvalidArgument("regularized log-determinant needs beta > 0")
    if c not in (1, -1):
        raise InvalidArgument(f"c must be +1 or -1, got {c!r}")
    return zeta.matsubara_logdet_series(sector_energies(spec, sector), spec.beta, statistics, c)


def partition_from_logdet(spec: ChainSpec, sector: Sector, statistics: Statistics,
                          c: int = -1) -> complex:
    """``exp(logdet + c beta E_0)``; recovers the sector partition function."""
    E = sector_energies(spec, sector)
    L = regularized_logdet_partition(spec, sector, statistics, c)
    return complex(np.exp(L + c * spec.beta * ground_state_energy(E)))
