import numpy as np
import pytest
from numpy.testing import assert_allclose

from oracles import PauliChain, pauli_hamiltonian
from xychain import InvalidArgument, ResourceLimit
from xychain import oracle
from xychain.model import ChainSpec, Sector


@pytest.mark.parametrize("M,gamma,h", [(2, 0.3, 0.7), (4, -0.8, 1.3), (6, 0.0, 0.4)])
def test_spin_hamiltonian_spectrum_matches_pauli_form(M, gamma, h):
    a = np.linalg.eigvalsh(oracle.build_spin_hamiltonian(M, gamma, h))
    b = np.linalg.eigvalsh(pauli_hamiltonian(M, gamma, h))
    assert_allclose(a, b, atol=1e-12)


@pytest.mark.parametrize("M,gamma,h", [(4, 0.6, 0.9), (6, -0.2, 1.7)])
def test_sector_projection_reassembles_spin_chain(M, gamma, h):
    # H = P+ H+ + P- H- with P+- the even/odd parity projectors
    even = oracle.parity_diagonal(M) == 1
    Hp = oracle.build_sector_hamiltonian(M, gamma, h, Sector.PLUS)
    Hm = oracle.build_sector_hamiltonian(M, gamma, h, Sector.MINUS)
    Hs = oracle.build_spin_hamiltonian(M, gamma, h)
    assert_allclose(Hs[np.ix_(even, even)], Hp[np.ix_(even, even)], atol=1e-14)
    assert_allclose(Hs[np.ix_(~even, ~even)], Hm[np.ix_(~even, ~even)], atol=1e-14)
    # both sector Hamiltonians conserve parity
    assert np.all(Hp[np.ix_(even, ~even)] == 0)


def test_generating_functional_matches_pauli_chain():
    rng = np.random.default_rng(11)
    for M in (2, 4, 6):
        gamma, h, beta = rng.uniform(-1, 1), rng.uniform(0, 2), rng.uniform(0.1, 5)
        ed = oracle.SpinChainED(M, gamma, h)
        pc = PauliChain(M, gamma, h)
        for m in range(M + 1):
            alpha = complex(rng.normal(), rng.normal())
            ref = pc.genfunc(alpha, m, beta)
            assert abs(ed.generating_functional(alpha, m, beta) - ref) <= 1e-12 * max(1, abs(ref))


def test_sector_traces_sum_to_partition():
    spec = ChainSpec(M=6, m=3, gamma=0.4, h=0.8, beta=1.7, alpha=0.3 - 0.2j)
    parts = {s: oracle.oracle_sector_traces(spec, s) for s in Sector}
    G = 0.5 * (parts[Sector.PLUS]["GZ_F"] + parts[Sector.MINUS]["GZ_F"]
               + parts[Sector.PLUS]["GZ_B"] - parts[Sector.MINUS]["GZ_B"])
    Z = 0.5 * (parts[Sector.PLUS]["Z_F"] + parts[Sector.MINUS]["Z_F"]
               + parts[Sector.PLUS]["Z_B"] - parts[Sector.MINUS]["Z_B"])
    assert Z == pytest.approx(oracle.oracle_partition(spec), rel=1e-12)
    assert abs(G / Z - oracle.oracle_generating_functional(spec)) < 1e-12


def test_correlators_match_pauli_chain():
    M, gamma, h, beta = 6, 0.7, 0.6, 2.2
    ed = oracle.SpinChainED(M, gamma, h)
    pc = PauliChain(M, gamma, h)
    for b in range(2, M + 1):
        sz, zz = ed.correlators(1, b, beta)
        assert sz == pytest.approx(pc.average(pc.sz[0], beta).real, abs=1e-12)
        assert zz == pytest.approx(pc.average(pc.sz[0] * pc.sz[b - 1], beta).real, abs=1e-12)


def test_eigensystem_residual_small():
    ed = oracle.SpinChainED(8, 0.3, 1.1)
    assert ed.eig.residual(ed.hamiltonian) < 1e-12


def test_q_moments_at_infinite_temperature():
    # every spin is independent and unbiased at beta = 0
    q1, q2 = oracle.SpinChainED(6, 0.5, 1.0).q_moments(4, 0.0)
    assert q1 == pytest.approx(2.0)
    assert q2 - q1 ** 2 == pytest.approx(1.0)


def test_size_limits():
    with pytest.raises(ResourceLimit):
        oracle.SpinChainED(oracle.MAX_SITES + 2, 0.0, 0.0)
    with pytest.raises(InvalidArgument):
        oracle.SpinChainED(5, 0.0, 0.0)
    with pytest.raises(InvalidArgument):
        oracle.q_diagonal(4, 5)


def test_oracle_partition_is_trace():
    spec = ChainSpec(M=4, gamma=0.2, h=0.5, beta=0.9)
    w = np.linalg.eigvalsh(pauli_hamiltonian(4, 0.2, 0.5))
    assert oracle.oracle_partition(spec) == pytest.approx(np.exp(-0.9 * w).sum(), rel=1e-13)
