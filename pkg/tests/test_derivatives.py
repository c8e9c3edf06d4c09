import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import PauliChain, mp_fd_log_derivatives
from xychain import InvalidArgument, SingularityError
from xychain import derivatives as dv
from xychain import genfunc as gf
from xychain.model import ChainSpec, Sector, Statistics
from xychain.partition import free_energy_limit

specs = st.builds(ChainSpec, M=st.sampled_from([2, 4, 6, 8]), m=st.just(0),
                  gamma=st.floats(-1, 1), h=st.floats(0, 2), beta=st.floats(0.1, 5))


def with_window(spec, data):
    return spec.replace(m=data.draw(st.integers(1, spec.M)))


def rel(a, b):
    return abs(a - b) / max(1.0, abs(b))


@settings(max_examples=15, deadline=None)
@given(specs, st.data())
def test_xy_log_derivatives_match_finite_differences(spec, data):
    spec = with_window(spec, data)
    for sector in Sector:
        for stats in Statistics:
            try:
                D1 = dv.dlogdet_alpha0_xy(spec, sector, stats, 1)
                D2 = dv.dlogdet_alpha0_xy(spec, sector, stats, 2)
            except SingularityError:
                continue
            d1, d2 = mp_fd_log_derivatives(spec, sector, stats)
            assert rel(spec.m / 2 + D1, d1) < 1e-5
            assert rel(D2 - D1 ** 2, d2) < 1e-5


@settings(max_examples=15, deadline=None)
@given(specs, st.data())
def test_xx_log_derivatives_match_finite_differences(spec, data):
    spec = with_window(spec, data).replace(gamma=0.0)
    for sector in Sector:
        for stats in Statistics:
            try:
                D1 = dv.dlogdet_alpha0_xx(spec, sector, stats, 1)
                D2 = dv.dlogdet_alpha0_xx(spec, sector, stats, 2)
            except SingularityError:
                continue
            d1, d2 = mp_fd_log_derivatives(spec, sector, stats, xx=True)
            assert rel(D1, d1) < 1e-5
            assert rel(D2 - D1 ** 2, d2) < 1e-5


@settings(max_examples=50, deadline=None)
@given(specs, st.data())
def test_kernel_and_nambu_derivative_forms_agree(spec, data):
    spec = with_window(spec, data)
    for sector in Sector:
        a = dv.genfunc_alpha_derivatives(spec, sector, Statistics.F, "K")
        b = dv.genfunc_alpha_derivatives(spec, sector, Statistics.F, "M")
        assert rel(a[0], b[0]) < 1e-12 and rel(a[1], b[1]) < 1e-12


def test_derivatives_against_complex_step():
    # G'(0) and G''(0) of the sector functional from a contour average
    spec = ChainSpec(M=6, m=4, gamma=0.5, h=0.7, beta=1.5)
    r, n = 0.05, 64
    z = r * np.exp(2j * np.pi * np.arange(n) / n)
    for sector in Sector:
        G = np.array([gf.genfunc_xy_sector_M(spec.replace(alpha=a), sector, Statistics.F)
                      for a in z])
        c1 = np.mean(G * z ** -1).real
        c2 = 2 * np.mean(G * z ** -2).real
        g1, g2 = dv.genfunc_alpha_derivatives(spec, sector, Statistics.F)
        assert g1 == pytest.approx(c1, abs=1e-12)
        assert g2 == pytest.approx(c2, abs=1e-12)


@pytest.mark.parametrize("h", [0.6, 1.0])
def test_bose_product_derivatives(h):
    # h = 1 has a vanishing periodic-sector mode; the product stays regular
    spec = ChainSpec(M=6, m=3, gamma=0.4, h=h, beta=1.2)
    r, n = 0.05, 64
    z = r * np.exp(2j * np.pi * np.arange(n) / n)
    for sector in Sector:
        R = np.array([gf.joint_numerator_M(spec.replace(alpha=a), sector, Statistics.B)
                      for a in z])
        r0, r1, r2 = dv.bose_product_derivatives(spec, sector)
        assert r0 == pytest.approx(np.mean(R).real, abs=1e-12)
        assert r1 == pytest.approx(np.mean(R * z ** -1).real, abs=1e-12)
        assert r2 == pytest.approx(2 * np.mean(R * z ** -2).real, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(specs)
def test_moments_and_correlators_match_pauli_chain(spec):
    pc = PauliChain(spec.M, spec.gamma, spec.h)
    for m in range(spec.M + 1):
        q = pc.q(m)
        q1, q2 = dv.q_moments(spec.replace(m=m))
        assert q1 == pytest.approx(pc.average(q, spec.beta).real, abs=1e-10)
        assert q2 == pytest.approx(pc.average(q * q, spec.beta).real, abs=1e-10)
    sz = pc.average(pc.sz[0], spec.beta).real
    assert dv.sigma_z(spec.replace(m=1)) == pytest.approx(sz, abs=1e-10)
    tc = dv.thermal_correlators(spec)
    for n in range(1, spec.M):
        ref = pc.average(pc.sz[0] * pc.sz[n], spec.beta).real
        assert dv.zz_correlator(spec, n) == pytest.approx(ref, abs=1e-10)
        assert tc.zz[n] == pytest.approx(ref, abs=1e-10)


def test_translation_invariance_of_magnetization():
    spec = ChainSpec(M=8, gamma=0.3, h=0.9, beta=2.0)
    vals = [dv.sigma_z(spec.replace(m=m)) for m in range(1, 9)]
    assert np.ptp(vals) < 1e-12


def test_infinite_temperature_correlators():
    spec = ChainSpec(M=6, gamma=0.3, h=0.9, beta=0.0)
    tc = dv.thermal_correlators(spec, [1, 2])
    assert tc.sigma_z == pytest.approx(0.0, abs=1e-14)
    assert tc.zz[1] == pytest.approx(0.0, abs=1e-14)


def test_argument_checks():
    spec = ChainSpec(M=4, m=2, gamma=0.2, h=0.5)
    with pytest.raises(InvalidArgument):
        dv.dlogdet_alpha0_xy(spec, Sector.PLUS, Statistics.F, 3)
    with pytest.raises(InvalidArgument):
        dv.genfunc_alpha_derivatives(spec, Sector.PLUS, Statistics.F, "Q")
    with pytest.raises(InvalidArgument):
        dv.sigma_z(spec.replace(m=0))
    with pytest.raises(InvalidArgument):
        dv.zz_correlator(spec, 4)
    with pytest.raises(InvalidArgument):
        dv.zz_connected_limit(0.2, 0.5, 1.0, 0)


# --------------------------------------------------------------------------
# thermodynamic limit


@pytest.mark.parametrize("gamma,h,beta", [(0.5, 1.5, 1.0), (1.0, 0.4, 3.0), (0.3, 0.6, 0.5),
                                          (-0.7, 1.3, 2.0)])
def test_limits_reproduce_long_chain(gamma, h, beta):
    spec = ChainSpec(M=1024, gamma=gamma, h=h, beta=beta)
    tc = dv.thermal_correlators(spec, [1, 2, 5])
    assert tc.sigma_z == pytest.approx(dv.sigma_z_limit(gamma, h, beta), abs=1e-3)
    for n in (1, 2, 5):
        assert tc.zz[n] == pytest.approx(dv.zz_correlator_limit(gamma, h, beta, n), abs=1e-3)


@pytest.mark.parametrize("h", [0.3, 0.9, 1.0, 1.7])
def test_xx_limits_match_general_limits(h):
    assert dv.sigma_z_limit_xx(h, 1.3) == pytest.approx(dv.sigma_z_limit(0.0, h, 1.3), abs=1e-8)
    for n in (1, 2, 7):
        assert dv.zz_correlator_limit_xx(h, 1.3, n) == pytest.approx(
            dv.zz_correlator_limit(0.0, h, 1.3, n), abs=1e-8)


@pytest.mark.parametrize("gamma,h,beta", [(0.5, 1.5, 1.0), (0.0, 0.8, 2.0), (0.9, 0.2, 4.0)])
def test_magnetization_is_field_derivative(gamma, h, beta):
    d = 1e-5
    dF = (free_energy_limit(gamma, h + d, beta) - free_energy_limit(gamma, h - d, beta)) / (2 * d)
    assert dv.sigma_z_limit(gamma, h, beta) == pytest.approx(-2 * dF, abs=1e-6)


def test_limit_quadrature_against_scipy():
    from scipy.integrate import quad

    gamma, h, beta, n = 0.6, 0.8, 1.7, 3

    def parts(q):
        E = math.hypot(h - math.cos(q), gamma * math.sin(q))
        th = math.tanh(beta * E / 2)
        return (h - math.cos(q)) / E * th, -gamma * math.sin(q) / E * th

    sz = quad(lambda q: parts(q)[0], -math.pi, math.pi, epsabs=1e-13)[0] / (2 * math.pi)
    assert dv.sigma_z_limit(gamma, h, beta) == pytest.approx(sz, abs=1e-12)
    Cn = quad(lambda q: math.cos(n * q) * (1 - parts(q)[0]), -math.pi, math.pi, epsabs=1e-13)[0]
    Sn = quad(lambda q: math.sin(n * q) * parts(q)[1], -math.pi, math.pi, epsabs=1e-13)[0]
    ref = (Sn ** 2 - Cn ** 2) / (4 * math.pi ** 2)
    assert dv.zz_connected_limit(gamma, h, beta, n) == pytest.approx(ref, abs=1e-12)


def test_limit_moments_match_long_chain():
    q1, q2 = dv.q_moments_limit(0.5, 1.4, 1.0, 5)
    f1, f2 = dv.q_moments(ChainSpec(M=512, m=5, gamma=0.5, h=1.4, beta=1.0))
    assert q1 == pytest.approx(f1, abs=1e-8)
    assert q2 == pytest.approx(f2, abs=1e-8)
