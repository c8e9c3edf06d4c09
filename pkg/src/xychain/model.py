"""Problem instances, momentum grids, Bogoliubov data and the projector kernel.

Conventions used everywhere in the package:

* Sites are ``1..M`` with periodic spin boundary conditions; ``M`` is even.
* The Jordan-Wigner particle is a down spin, so ``Q(m)`` counts down spins on
  the first ``m`` sites.
* Momenta are stored as ``q = pi * k / M`` with integer numerators ``k`` so
  that ``q = 0`` and ``q = pi`` are exact and kernel differences ``p - q`` are
  formed from integers.
* Grids are sorted ascending; matrix indices follow that order.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument


class Sector(enum.Enum):
    """Fermionic boundary condition ``c_{M+1} = -c_1`` (PLUS) or ``+c_1`` (MINUS)."""

    PLUS = "+"
    MINUS = "-"

    @property
    def sign(self) -> int:
        """+1 for PLUS, -1 for MINUS (the sign the B trace enters Z with)."""
        return 1 if self is Sector.PLUS else -1


class Statistics(enum.Enum):
    """Trace without (F) or with (B) the fermion parity ``(-1)^N`` inserted."""

    F = "F"
    B = "B"


@dataclass(frozen=True)
class ChainSpec:
    """A full problem instance.

    Parameters
    ----------
    M : int
        Number of sites, even and >= 2.
    m : int
        Length of the counting window ``Q(m)``, ``0 <= m <= M``.
    gamma : float
        Anisotropy; ``gamma = 0`` is the XX chain.
    h : float
        Magnetic field, ``h >= 0``.
    beta : float
        Inverse temperature. Zero is accepted here; operations that need
        ``beta > 0`` check it themselves.
    alpha : complex
        Counting parameter of the generating functional.
    """

    M: int
    m: int = 0
    gamma: float = 0.0
    h: float = 0.0
    beta: float = 1.0
    alpha: complex = 0.0

    def __post_init__(self):
        M, m = self.M, self.m
        if isinstance(M, bool) or int(M) != M:
            raise InvalidArgument(f"M must be an integer, got {M!r}")
        if isinstance(m, bool) or int(m) != m:
            raise InvalidArgument(f"m must be an integer, got {m!r}")
        object.__setattr__(self, "M", int(M))
        object.__setattr__(self, "m", int(m))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "alpha", complex(self.alpha))
        if self.M < 2 or self.M % 2:
            raise InvalidArgument(f"M must be even and >= 2, got {self.M}")
        if not 0 <= self.m <= self.M:
            raise InvalidArgument(f"m must satisfy 0 <= m <= M={self.M}, got {self.m}")
        if not np.isfinite(self.gamma):
            raise InvalidArgument("gamma must be finite")
        if not (np.isfinite(self.h) and self.h >= 0):
            raise InvalidArgument(f"h must be finite and >= 0, got {self.h}")
        if not (np.isfinite(self.beta) and self.beta >= 0):
            raise InvalidArgument(f"beta must be finite and >= 0, got {self.beta}")
        if not np.isfinite(self.alpha):
            raise InvalidArgument("alpha must be finite")

    def replace(self, **changes) -> "ChainSpec":
        fields = dict(M=self.M, m=self.m, gamma=self.gamma, h=self.h,
                      beta=self.beta, alpha=self.alpha)
        fields.update(changes)
        return ChainSpec(**fields)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MomentumGrid:
    """Quasi-momenta ``q = pi * k / M`` of one sector, ascending."""

    sector: Sector
    M: int
    k: np.ndarray
    q: np.ndarray

    @property
    def special(self) -> np.ndarray:
        """Mask of the self-conjugate momenta q = 0 and q = pi."""
        return (self.k == 0) | (self.k == self.M)

    def __len__(self):
        return self.M


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Per-momentum band energy, pairing, quasi-particle energy and angle."""

    eps: np.ndarray
    gam: np.ndarray
    E: np.ndarray
    theta: np.ndarray


@dataclass(frozen=True, eq=False)
class ProjectorKernel:
    """Momentum-space matrix of the projector on the first ``m`` sites."""

    m: int
    Qm: np.ndarray


def build_momentum_grid(M: int, sector: Sector) -> MomentumGrid:
    """Quasi-momenta of the PLUS (antiperiodic) or MINUS (periodic) sector.

    >>> build_momentum_grid(4, Sector.MINUS).q / np.pi
    array([-0.5,  0. ,  0.5,  1. ])
    """
    if isinstance(M, bool) or int(M) != M or M < 2 or M % 2:
        raise InvalidArgument(f"M must be an even integer >= 2, got {M!r}")
    M = int(M)
    l = np.arange(1, M + 1)
    if sector is Sector.PLUS:
        k = 2 * l - 1 - M
    else:
        k = 2 * l - M
    q = np.pi * (k / M)
    return MomentumGrid(sector, M, _frozen(k), _frozen(q))


def dispersion(spec: ChainSpec, grid: MomentumGrid) -> SpectralData:
    """Band energy, pairing amplitude, quasi-particle energy and Bogoliubov angle.

    ``theta`` is the argument of ``eps - 1j * gam`` so that ``cos(theta) * E =
    eps`` and ``sin(theta) * E = -gam``. At q = 0, pi the pairing vanishes, the
    energy keeps its sign (``E = eps``) and ``theta = 0``.
    """
    if grid.M != spec.M:
        raise InvalidArgument(f"grid built for M={grid.M}, spec has M={spec.M}")
    special = grid.special
    sin_q = np.where(special, 0.0, np.sin(grid.q))
    cos_q = np.cos(grid.q)
    cos_q[grid.k == 0] = 1.0
    cos_q[grid.k == grid.M] = -1.0
    eps = spec.h - cos_q
    gam = spec.gamma * sin_q
    E = np.where(special, eps, np.hypot(eps, gam))
    # + 0.0 turns -0.0 into +0.0 so that gamma = 0, eps < 0 gives theta = +pi
    theta = np.where(special, 0.0, np.arctan2(-gam + 0.0, eps))
    return SpectralData(_frozen(eps), _frozen(gam), _frozen(E), _frozen(theta))


def projector_kernel(grid: MomentumGrid, m: int) -> ProjectorKernel:
    """``Q_pq = sin(m (p - q) / 2) / (M sin((p - q) / 2))`` with ``Q_qq = m / M``."""
    M = grid.M
    if isinstance(m, bool) or int(m) != m or not 0 <= m <= M:
        raise InvalidArgument(f"m must satisfy 0 <= m <= M={M}, got {m!r}")
    m = int(m)
    d = grid.k[:, None] - grid.k[None, :]
    half = np.pi * d / (2 * M)
    off = d != 0
    Q = np.full(d.shape, m / M)
    Q[off] = np.sin(m * half[off]) / (M * np.sin(half[off]))
    if m == M:
        # sin(M x) / sin(x) vanishes identically off the diagonal on these grids
        Q = np.eye(M)
    elif m == 0:
        Q = np.zeros((M, M))
    return ProjectorKernel(m, _frozen(Q))


def bogoliubov_block(theta: float) -> np.ndarray:
    """Rotation ``exp(-1j * theta / 2 * sigma_y)`` as a real 2x2 matrix."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]])


def bogoliubov_matrix(theta: np.ndarray) -> np.ndarray:
    """Block-diagonal 2M x 2M rotation; index ``2 * iq + spinor``."""
    n = len(theta)
    g = np.zeros((2 * n, 2 * n))
    c, s = np.cos(np.asarray(theta) / 2), np.sin(np.asarray(theta) / 2)
    idx = 2 * np.arange(n)
    g[idx, idx] = c
    g[idx, idx + 1] = -s
    g[idx + 1, idx] = s
    g[idx + 1, idx + 1] = c
    return g


def sector_data(spec: ChainSpec, sector: Sector):
    """Grid, spectral data and kernel of one sector in a single call."""
    grid = build_momentum_grid(spec.M, sector)
    return grid, dispersion(spec, grid), projector_kernel(grid, spec.m)
