"""Dense exact diagonalization: the ground truth for every determinant formula.

Basis states are integers ``s`` in ``[0, 2^M)``; bit ``k`` (site ``k + 1``) is
set when that spin points down, i.e. when the Jordan-Wigner mode ``k`` is
occupied. In this basis ``c_k = prod_{j<k} sigma^z_j sigma^+_k`` acts with the
usual fermionic sign ``(-1)^(number of occupied modes below k)``, so the spin
and fermion pictures share one matrix representation and can be compared
operator by operator.

Nothing here touches momentum space.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidArgument, ResourceLimit
from .model import ChainSpec, Sector

MAX_SITES = 12


def _check_size(M: int) -> None:
    if M > MAX_SITES:
        raise ResourceLimit(f"dense diagonalization capped at M={MAX_SITES}, got {M}")
    if M < 2 or M % 2:
        raise InvalidArgument(f"M must be even and >= 2, got {M}")


def _states(M: int) -> np.ndarray:
    return np.arange(2 ** M, dtype=np.int64)


def occupations(M: int) -> np.ndarray:
    """``(2^M, M)`` table of mode occupations (1 = spin down)."""
    s = _states(M)
    return ((s[:, None] >> np.arange(M)) & 1).astype(np.int64)


def _popcount_below(s: np.ndarray, k: int) -> np.ndarray:
    """Number of set bits of ``s`` strictly below bit ``k``."""
    return sum(((s >> j) & 1) for j in range(k)) if k else np.zeros_like(s)


class _FermionOps:
    """Vectorized action of normal-ordered fermion bilinears on all basis states."""

    def __init__(self, M: int):
        self.M = M
        self.s = _states(M)
        self.sign_below = [1 - 2 * (_popcount_below(self.s, k) % 2) for k in range(M)]

    def annihilate(self, states, signs, k):
        occ = (states >> k) & 1
        sgn = signs * self.sign_below[k][states] * occ
        return states & ~(1 << k), sgn

    def create(self, states, signs, k):
        occ = (states >> k) & 1
        sgn = signs * self.sign_below[k][states] * (1 - occ)
        return states | (1 << k), sgn

    def add_term(self, H, coef, ops):
        """Add ``coef * o_1 o_2 ...`` to H; ``ops`` lists (kind, mode), rightmost acts first."""
        states = self.s.copy()
        signs = np.ones_like(states)
        for kind, k in reversed(ops):
            if kind == "c":
                states, signs = self.annihilate(states, signs, k)
            else:
                states, signs = self.create(states, signs, k)
        nz = signs != 0
        np.add.at(H, (states[nz], self.s[nz]), coef * signs[nz])


def build_spin_hamiltonian(M: int, gamma: float, h: float) -> np.ndarray:
    """``H = H_0 + gamma H_1 - h S^z`` on the periodic chain, as a real dense matrix.

    Built from spin flips directly (no fermion signs), so it serves as an
    independent check on the sector decomposition.
    """
    _check_size(M)
    s = _states(M)
    dim = 2 ** M
    H = np.zeros((dim, dim))
    occ = occupations(M)
    # -h S^z = -(h/2) sum_k (1 - 2 n_k)
    H[s, s] = -0.5 * h * (M - 2 * occ.sum(axis=1))
    for n in range(M):
        a, b = n, (n + 1) % M
        na, nb = (s >> a) & 1, (s >> b) & 1
        flip = s ^ ((1 << a) | (1 << b))
        # sigma^+_a sigma^-_b + h.c.: one down spin hops between a and b
        hop = na != nb
        np.add.at(H, (flip[hop], s[hop]), -0.5)
        # sigma^+ sigma^+ + sigma^- sigma^-: both spins flip together
        pair = na == nb
        np.add.at(H, (flip[pair], s[pair]), -0.5 * gamma)
    return H


def build_sector_hamiltonian(M: int, gamma: float, h: float, sector: Sector) -> np.ndarray:
    """Fermionic ``H^+`` (``c_{M+1} = -c_1``) or ``H^-`` (``c_{M+1} = +c_1``) on the full Fock space."""
    _check_size(M)
    ops = _FermionOps(M)
    dim = 2 ** M
    H = np.zeros((dim, dim))
    bc = -1.0 if sector is Sector.PLUS else 1.0
    for k in range(M):
        k1 = (k + 1) % M
        w = bc if k == M - 1 else 1.0
        # -1/2 [c^dag_k c_{k+1} + c^dag_{k+1} c_k + gamma (c_{k+1} c_k + c^dag_k c^dag_{k+1})]
        ops.add_term(H, -0.5 * w, [("d", k), ("c", k1)])
        ops.add_term(H, -0.5 * w, [("d", k1), ("c", k)])
        ops.add_term(H, -0.5 * gamma * w, [("c", k1), ("c", k)])
        ops.add_term(H, -0.5 * gamma * w, [("d", k), ("d", k1)])
        ops.add_term(H, h, [("d", k), ("c", k)])
    H[np.diag_indices(dim)] -= h * M / 2
    return H


def parity_diagonal(M: int) -> np.ndarray:
    """Diagonal of ``(-1)^N``."""
    return 1 - 2 * (occupations(M).sum(axis=1) % 2)


def q_diagonal(M: int, m: int) -> np.ndarray:
    """Diagonal of ``Q(m) = sum_{k <= m} (1 - sigma^z_k) / 2``."""
    if not 0 <= m <= M:
        raise InvalidArgument(f"m must satisfy 0 <= m <= M={M}, got {m}")
    return occupations(M)[:, :m].sum(axis=1)


def sigma_z_diagonal(M: int, site: int) -> np.ndarray:
    """Diagonal of ``sigma^z`` at 1-based ``site``."""
    if not 1 <= site <= M:
        raise InvalidArgument(f"site must be in 1..{M}, got {site}")
    return 1 - 2 * occupations(M)[:, site - 1]


@dataclass(frozen=True)
class Eigensystem:
    values: np.ndarray
    vectors: np.ndarray

    def weights(self, beta: float) -> tuple[np.ndarray, float]:
        """Shifted Boltzmann weights ``exp(-beta (lambda - lambda_min))`` and the shift."""
        lo = self.values.min()
        return np.exp(-beta * (self.values - lo)), lo

    def populations(self) -> np.ndarray:
        """``|<s|v_j>|^2`` laid out as (basis state, eigenvector)."""
        return np.abs(self.vectors) ** 2

    def thermal_average(self, diag: np.ndarray, beta: float) -> complex:
        """``Tr(D e^{-beta H}) / Tr(e^{-beta H})`` for a diagonal operator D."""
        w, _ = self.weights(beta)
        per_state = diag @ self.populations()
        return complex(per_state @ w / w.sum())

    def residual(self, H: np.ndarray) -> float:
        return float(np.abs(H @ self.vectors - self.vectors * self.values).max())


class SpinChainED:
    """Eigendecomposition of the spin chain, reused across beta, alpha and m."""

    def __init__(self, M: int, gamma: float, h: float):
        _check_size(M)
        self.M, self.gamma, self.h = M, float(gamma), float(h)

    @cached_property
    def hamiltonian(self) -> np.ndarray:
        return build_spin_hamiltonian(self.M, self.gamma, self.h)

    @cached_property
    def eig(self) -> Eigensystem:
        vals, vecs = np.linalg.eigh(self.hamiltonian)
        return Eigensystem(vals, vecs)

    def partition(self, beta: float) -> float:
        w, lo = self.eig.weights(beta)
        return float(w.sum() * np.exp(-beta * lo))

    def generating_functional(self, alpha: complex, m: int, beta: float) -> complex:
        q = q_diagonal(self.M, m)
        return self.eig.thermal_average(np.exp(complex(alpha) * q), beta)

    def q_moments(self, m: int, beta: float) -> tuple[float, float]:
        q = q_diagonal(self.M, m).astype(float)
        return (self.eig.thermal_average(q, beta).real,
                self.eig.thermal_average(q * q, beta).real)

    def correlators(self, a: int, b: int, beta: float) -> tuple[float, float]:
        za = sigma_z_diagonal(self.M, a).astype(float)
        zb = sigma_z_diagonal(self.M, b).astype(float)
        return (self.eig.thermal_average(za, beta).real,
                self.eig.thermal_average(za * zb, beta).real)


class SectorED:
    """Eigendecomposition of one fermionic sector Hamiltonian, split by parity."""

    def __init__(self, M: int, gamma: float, h: float, sector: Sector):
        _check_size(M)
        self.M, self.gamma, self.h, self.sector = M, float(gamma), float(h), sector

    @cached_property
    def hamiltonian(self) -> np.ndarray:
        return build_sector_hamiltonian(self.M, self.gamma, self.h, self.sector)

    @cached_property
    def blocks(self):
        """Per parity: (basis indices, eigenvalues, eigenvectors)."""
        par = parity_diagonal(self.M)
        out = {}
        for p in (1, -1):
            idx = np.flatnonzero(par == p)
            vals, vecs = np.linalg.eigh(self.hamiltonian[np.ix_(idx, idx)])
            out[p] = (idx, vals, vecs)
        return out

    def traces(self, alpha: complex, m: int, beta: float):
        """``(Tr e^{aQ} e^{-bH}, Tr e^{aQ} (-1)^N e^{-bH})`` for this sector."""
        q = q_diagonal(self.M, m)
        eq = np.exp(complex(alpha) * q)
        parts = {}
        for p, (idx, vals, vecs) in self.blocks.items():
            per_state = eq[idx] @ (np.abs(vecs) ** 2)
            parts[p] = per_state @ np.exp(-beta * vals)
        return complex(parts[1] + parts[-1]), complex(parts[1] - parts[-1])


def oracle_generating_functional(spec: ChainSpec) -> complex:
    """``Tr(e^{alpha Q(m)} e^{-beta H}) / Tr(e^{-beta H})`` by full diagonalization."""
    ed = SpinChainED(spec.M, spec.gamma, spec.h)
    return ed.generating_functional(spec.alpha, spec.m, spec.beta)


def oracle_partition(spec: ChainSpec) -> float:
    return SpinChainED(spec.M, spec.gamma, spec.h).partition(spec.beta)


def oracle_sector_traces(spec: ChainSpec, sector: Sector) -> dict:
    """``{"GZ_F", "GZ_B", "Z_F", "Z_B"}`` of one sector (alpha and m from ``spec``)."""
    ed = SectorED(spec.M, spec.gamma, spec.h, sector)
    gzf, gzb = ed.traces(spec.alpha, spec.m, spec.beta)
    zf, zb = ed.traces(0.0, 0, spec.beta)
    return {"GZ_F": gzf, "GZ_B": gzb, "Z_F": zf.real, "Z_B": zb.real}


def oracle_correlators(spec: ChainSpec, sites: tuple[int, int]) -> tuple[float, float]:
    """Thermal ``<sigma^z_a>`` and ``<sigma^z_a sigma^z_b>``."""
    a, b = sites
    return SpinChainED(spec.M, spec.gamma, spec.h).correlators(a, b, spec.beta)


def oracle_q_moments(spec: ChainSpec) -> tuple[float, float]:
    """Thermal ``<Q(m)>`` and ``<Q(m)^2>``."""
    return SpinChainED(spec.M, spec.gamma, spec.h).q_moments(spec.m, spec.beta)
