"""Self-contained verification suite grouped by identity class.

Every check compares two independently computed numbers and records the
residual. A class passes when its largest residual is within the class
tolerance. Random instances come from a seeded generator, so reports are
reproducible.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import derivatives as dv
from . import genfunc as gf
from . import oracle, partition, zeta
from .errors import InvalidArgument
from .model import ChainSpec, Sector, Statistics


@dataclass
class IdentityClass:
    name: str
    tolerance: float
    residuals: list = field(default_factory=list)

    def add(self, residual: float) -> None:
        self.residuals.append(float(residual))

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)

    @property
    def passed(self) -> bool:
        return bool(self.residuals) and self.max_residual <= self.tolerance


def _rel(a, b) -> float:
    return abs(a - b) / max(1.0, abs(b))


def random_spec(rng: np.random.Generator, M: int) -> ChainSpec:
    """Random instance from the sampling box used throughout the checks."""
    r = math.sqrt(rng.uniform())
    phi = 2 * math.pi * rng.uniform()
    alpha = r * complex(math.cos(phi), math.sin(phi))
    return ChainSpec(M=M, m=int(rng.integers(0, M + 1)), gamma=rng.uniform(-1, 1),
                     h=rng.uniform(0, 2), beta=rng.uniform(0.1, 5), alpha=alpha)


def _sizes(max_M: int):
    return list(range(2, max_M + 1, 2))


def check_oracle(max_M: int, tol: float, rng, samples: int) -> IdentityClass:
    c = IdentityClass("oracle", tol)
    for M in _sizes(max_M):
        for i in range(samples):
            spec = random_spec(rng, M)
            if i == 0:
                spec = spec.replace(alpha=1j * math.pi)
            ed = oracle.SpinChainED(M, spec.gamma, spec.h)
            g0 = ed.generating_functional(spec.alpha, spec.m, spec.beta)
            for rep in ("MxM", "2Mx2M"):
                c.add(_rel(gf.assemble_generating_functional(spec, gf.Representation(rep)), g0))
            c.add(_rel(partition.total_partition(spec), ed.partition(spec.beta)))
            q1, q2 = ed.q_moments(spec.m, spec.beta)
            m1, m2 = dv.q_moments(spec)
            c.add(abs(m1 - q1) / max(1.0, q1))
            c.add(abs(m2 - q2) / max(1.0, q2))
    return c


def check_reductions(max_M: int, rng, samples: int) -> IdentityClass:
    c = IdentityClass("reductions", 1e-9)
    for M in _sizes(max_M):
        for _ in range(samples):
            spec = random_spec(rng, M)
            full = spec.replace(m=M, alpha=1j * math.pi)
            for sector in Sector:
                zf = partition.sector_partition(spec, sector, Statistics.F)
                zb = partition.sector_partition(spec, sector, Statistics.B)
                c.add(abs(gf.genfunc_xy_sector_M(full, sector, Statistics.F) - zb / zf))
                c.add(_rel(gf.full_window_product(spec.replace(m=M), sector),
                           gf.genfunc_xy_sector_M(spec.replace(m=M), sector, Statistics.F)))
                xx = spec.replace(gamma=0.0, h=1.0 + 1.5 * rng.uniform())
                for st in Statistics:
                    c.add(_rel(gf.genfunc_xx_sector(xx, sector, st),
                               gf.genfunc_xy_sector_M(xx, sector, st)))
                small = spec.replace(alpha=0.1 * spec.alpha / max(abs(spec.alpha), 1e-300))
                for st in Statistics:
                    if st is Statistics.B and min(abs(partition.sector_energies(spec, sector))) \
                            < gf.NEAR_ZERO:
                        continue
                    ref = gf.genfunc_xy_sector_M(spec, sector, st)
                    c.add(_rel(gf.genfunc_xy_sector_2M(spec, sector, st), ref))
                    if gf.series_radius(small, sector, st) < 0.2:
                        with warnings.catch_warnings():
                            warnings.simplefilter("ignore", gf.SeriesDivergenceWarning)
                            c.add(_rel(gf.genfunc_series(small, sector, st, 12),
                                       gf.genfunc_xy_sector_M(small, sector, st)))
    return c


def check_derivatives(max_M: int, rng, samples: int) -> IdentityClass:
    c = IdentityClass("derivatives", 1e-9)
    for M in _sizes(max_M):
        for _ in range(samples):
            spec = random_spec(rng, M)
            for sector in Sector:
                a = dv.genfunc_alpha_derivatives(spec, sector, Statistics.F, "K")
                b = dv.genfunc_alpha_derivatives(spec, sector, Statistics.F, "M")
                c.add(max(_rel(a[0], b[0]), _rel(a[1], b[1])))
            if M >= 4:
                ed = oracle.SpinChainED(M, spec.gamma, spec.h)
                n = int(rng.integers(1, M))
                sz, zz = ed.correlators(1, 1 + n, spec.beta)
                c.add(abs(dv.sigma_z(spec.replace(m=1)) - sz))
                c.add(abs(dv.zz_correlator(spec, n) - zz))
    return c


def check_zeta(rng, samples: int) -> IdentityClass:
    c = IdentityClass("zeta", 1e-10)
    for _ in range(samples):
        a = complex(rng.uniform(0.1, 5), rng.uniform(-5, 5))
        c.add(abs(zeta.hurwitz_zeta(0, a).value - (0.5 - a)))
        c.add(abs(zeta.hurwitz_zeta(0, a, derivative=1).value - zeta.hurwitz_zeta_sprime0(a)))
    for M in (4, 8):
        spec = random_spec(rng, M)
        for sector in Sector:
            for st in Statistics:
                z = partition.sector_partition(spec, sector, st)
                zf = partition.sector_partition(spec, sector, Statistics.F)
                c.add(abs(partition.partition_from_logdet(spec, sector, st) - z) / zf)
    for lam in (0.1, 1.0, 5.0):
        for beta in (0.5, 1.0, 2.0):
            r = zeta.single_mode_mellin(lam, beta)
            c.add(abs(r.det - (1 + math.exp(-beta * lam))))
    c.add(abs(zeta.integer_zeta_measure()))
    return c


def check_limits(tol: float) -> IdentityClass:
    c = IdentityClass("limits", 1e-6)
    for gamma, h, beta in ((0.5, 1.5, 1.0), (0.0, 1.2, 1.0), (0.8, 0.4, 2.0)):
        d = 1e-5
        dF = (partition.free_energy_limit(gamma, h + d, beta, tol)
              - partition.free_energy_limit(gamma, h - d, beta, tol)) / (2 * d)
        c.add(abs(dv.sigma_z_limit(gamma, h, beta, tol) + 2 * dF))
    for h in (0.5, 1.5):
        c.add(abs(dv.sigma_z_limit(0.0, h, 1.0, tol) - dv.sigma_z_limit_xx(h, 1.0, tol)))
        for n in (1, 3):
            c.add(abs(dv.zz_correlator_limit(0.0, h, 1.0, n, tol)
                      - dv.zz_correlator_limit_xx(h, 1.0, n, tol)))
    return c


def run_verification(max_M: int = 8, tol: float = 1e-10, seed: int = 0,
                     samples: int = 20) -> list[IdentityClass]:
    """Run every identity class; the oracle class uses ``tol``."""
    if isinstance(max_M, bool) or int(max_M) != max_M or not 2 <= max_M <= oracle.MAX_SITES:
        raise InvalidArgument(f"max_M must be an integer in [2, {oracle.MAX_SITES}], got {max_M!r}")
    if not tol > 0:
        raise InvalidArgument("tol must be positive")
    rng = np.random.default_rng(seed)
    return [
        check_oracle(int(max_M), tol, rng, samples),
        check_reductions(int(max_M), rng, samples),
        check_derivatives(int(max_M), rng, samples),
        check_zeta(rng, 4 * samples),
        check_limits(1e-12),
    ]
