"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line that is printed in the terminal summary.
"""

import math
import time
import warnings

import mpmath as mp
import numpy as np
import pytest

from oracles import mp_fd_log_derivatives
from xychain import derivatives as dv
from xychain import genfunc as gf
from xychain import oracle, partition, zeta
from xychain.cli import main
from xychain.genfunc import Representation
from xychain.model import ChainSpec, Sector, Statistics
from xychain.verify import random_spec

SIZES = (2, 4, 6, 8)
N_SPECS = 50


def rel(a, b):
    return abs(a - b) / max(1.0, abs(b))


def spec_batch(seed, M, n=N_SPECS, parity_every=5):
    """``n`` random instances; every ``parity_every``-th one has ``alpha = i pi``."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        s = random_spec(rng, M)
        out.append(s.replace(alpha=1j * math.pi) if i % parity_every == 0 else s)
    return out


def test_oracle_equivalence(acceptance_report):
    start = time.perf_counter()
    worst = {"MxM": 0.0, "2Mx2M": 0.0}
    count = 0
    for M in SIZES:
        for spec in spec_batch(100 + M, M):
            ref = oracle.oracle_generating_functional(spec)
            for kind in worst:
                got = gf.assemble_generating_functional(spec, Representation(kind))
                worst[kind] = max(worst[kind], abs(got - ref) / max(1.0, abs(ref)))
            count += 1
    elapsed = time.perf_counter() - start
    ok = max(worst.values()) <= 1e-10 and elapsed <= 120
    acceptance_report("1 oracle equivalence", ok,
                      f"{count} specs, max rel err MxM {worst['MxM']:.1e}, "
                      f"2Mx2M {worst['2Mx2M']:.1e} (tol 1e-10), {elapsed:.1f} s (limit 120 s)")
    assert ok


def test_partition_identities(acceptance_report):
    worst_sector = worst_total = 0.0
    for M in SIZES:
        for spec in spec_batch(200 + M, M):
            for sector in Sector:
                tr = oracle.oracle_sector_traces(spec, sector)
                for stats, key in ((Statistics.F, "Z_F"), (Statistics.B, "Z_B")):
                    z = partition.sector_partition(spec, sector, stats)
                    worst_sector = max(worst_sector, rel(z, tr[key]))
            ref = oracle.oracle_partition(spec)
            worst_total = max(worst_total, abs(partition.total_partition(spec) - ref) / ref)
    worst_inf = 0.0
    for M in (2, 4, 6, 8, 10, 12, 100, 1000):
        for gamma, h in ((0.0, 0.0), (0.7, 1.3), (-1.0, 2.0)):
            z = partition.total_partition(ChainSpec(M=M, gamma=gamma, h=h, beta=0.0))
            worst_inf = max(worst_inf, abs(z - 2.0 ** M) / 2.0 ** M)
    ok = worst_sector <= 1e-10 and worst_total <= 1e-10 and worst_inf <= 1e-12
    acceptance_report("2 partition identities", ok,
                      f"sector {worst_sector:.1e}, total {worst_total:.1e} (tol 1e-10); "
                      f"Z(beta=0)/2^M - 1 {worst_inf:.1e} (tol 1e-12)")
    assert ok


def test_reduction_identities(acceptance_report):
    rng = np.random.default_rng(3)
    a = b = c = 0.0
    d = {"MxM/2Mx2M": 0.0, "MxM/series": 0.0, "2Mx2M/series": 0.0}
    skipped = checked = 0
    for M in SIZES:
        for _ in range(N_SPECS):
            spec = random_spec(rng, M)
            full = spec.replace(m=M)
            for sector in Sector:
                # (a) m = M, alpha = i pi
                zf = partition.sector_partition(spec, sector, Statistics.F)
                zb = partition.sector_partition(spec, sector, Statistics.B)
                gp = gf.genfunc_xy_sector_M(full.replace(alpha=1j * math.pi), sector,
                                            Statistics.F)
                a = max(a, rel(gp, zb / zf))
                # (b) gamma = 0 through the general and the XX formulas
                xx = spec.replace(gamma=0.0)
                for stats in Statistics:
                    if stats is Statistics.B and np.min(np.abs(
                            partition.sector_energies(xx, sector))) < gf.NEAR_ZERO:
                        continue
                    b = max(b, rel(gf.genfunc_xx_sector(xx, sector, stats),
                                   gf.genfunc_xy_sector_M(xx, sector, stats)))
                # (c) closed product against the determinant at m = M
                c = max(c, rel(gf.full_window_product(full, sector),
                               gf.genfunc_xy_sector_M(full, sector, Statistics.F)))
                # (d) the three representations at |alpha| <= 0.1
                small = spec.replace(alpha=0.1 * math.sqrt(rng.uniform())
                                     * np.exp(2j * math.pi * rng.uniform()))
                for stats in Statistics:
                    if stats is Statistics.B:
                        soft = small.beta * np.min(np.abs(
                            partition.sector_energies(small, sector))) < gf.SOFT_BOSE
                        # K = 12 reaches 1e-9 only when rho^13 / 13 < 1e-9
                        if soft or gf.series_radius(small, sector, stats) >= 0.2:
                            skipped += 1
                            continue
                    checked += 1
                    vm = gf.genfunc_xy_sector_M(small, sector, stats)
                    v2 = gf.genfunc_xy_sector_2M(small, sector, stats)
                    with warnings.catch_warnings():
                        warnings.simplefilter("error", gf.SeriesDivergenceWarning)
                        vs = gf.genfunc_series(small, sector, stats, 12)
                    d["MxM/2Mx2M"] = max(d["MxM/2Mx2M"], rel(v2, vm))
                    d["MxM/series"] = max(d["MxM/series"], rel(vs, vm))
                    d["2Mx2M/series"] = max(d["2Mx2M/series"], rel(vs, v2))
    ok = a <= 1e-12 and b <= 1e-10 and c <= 1e-10 and max(d.values()) <= 1e-9
    acceptance_report("3 reduction identities", ok,
                      f"(a) {a:.1e} (tol 1e-12), (b) {b:.1e}, (c) {c:.1e} (tol 1e-10), "
                      f"(d) {max(d.values()):.1e} (tol 1e-9) over {checked} sector values; "
                      f"{skipped} bosonic sectors outside the series disk excluded")
    assert ok


def test_derivative_identities(acceptance_report):
    rng = np.random.default_rng(4)
    fd = 0.0
    n_fd = 0
    for M in SIZES:
        for _ in range(6):
            spec = random_spec(rng, M)
            spec = spec.replace(m=int(rng.integers(1, M + 1)))
            for sector in Sector:
                for stats in Statistics:
                    for xx in (False, True):
                        s = spec.replace(gamma=0.0) if xx else spec
                        f = dv.dlogdet_alpha0_xx if xx else dv.dlogdet_alpha0_xy
                        try:
                            D1, D2 = f(s, sector, stats, 1), f(s, sector, stats, 2)
                        except gf.SingularityError:
                            continue
                        d1, d2 = mp_fd_log_derivatives(s, sector, stats, xx=xx)
                        off = 0.0 if xx else s.m / 2
                        fd = max(fd, rel(off + D1, d1), rel(D2 - D1 ** 2, d2))
                        n_fd += 1
    forms = 0.0
    for M in SIZES:
        for spec in spec_batch(400 + M, M, parity_every=N_SPECS + 1):
            for sector in Sector:
                k1, k2 = dv.genfunc_alpha_derivatives(spec, sector, Statistics.F, "K")
                m1, m2 = dv.genfunc_alpha_derivatives(spec, sector, Statistics.F, "M")
                forms = max(forms, rel(k1, m1), rel(k2, m2))
    ok = fd <= 1e-5 and forms <= 1e-12
    acceptance_report("4 derivative identities", ok,
                      f"closed forms vs finite differences {fd:.1e} over {n_fd} sectors "
                      f"(tol 1e-5); kernel vs Nambu forms {forms:.1e} (tol 1e-12)")
    assert ok


def test_correlators(acceptance_report):
    rng = np.random.default_rng(5)
    finite = 0.0
    points = 0
    while points < 6:
        gamma, h, beta = rng.uniform(-1, 1), rng.uniform(0, 2), rng.uniform(0.1, 5)
        if abs(h - 1) < 0.2 and abs(gamma) < 0.2:
            continue
        tc = dv.thermal_correlators(ChainSpec(M=1024, gamma=gamma, h=h, beta=beta), [1, 2, 5])
        finite = max(finite, abs(tc.sigma_z - dv.sigma_z_limit(gamma, h, beta)))
        for n in (1, 2, 5):
            finite = max(finite, abs(tc.zz[n] - dv.zz_correlator_limit(gamma, h, beta, n)))
        points += 1
    xx = 0.0
    for h in np.linspace(0, 2, 9):
        for beta in (0.3, 1.0, 4.0):
            xx = max(xx, abs(dv.sigma_z_limit_xx(h, beta) - dv.sigma_z_limit(0.0, h, beta)))
            for n in (1, 2, 3, 8):
                xx = max(xx, abs(dv.zz_correlator_limit_xx(h, beta, n)
                                 - dv.zz_correlator_limit(0.0, h, beta, n)))
    # magnetization per site <S^z>/M = <sigma^z>/2 against -dF/dh
    thermo = 0.0
    dh = 1e-5
    for gamma, h, beta in ((0.5, 1.5, 1.0), (0.0, 0.8, 2.0), (0.9, 0.2, 4.0), (-0.4, 1.1, 0.3)):
        dF = (partition.free_energy_limit(gamma, h + dh, beta)
              - partition.free_energy_limit(gamma, h - dh, beta)) / (2 * dh)
        thermo = max(thermo, abs(0.5 * dv.sigma_z_limit(gamma, h, beta) + dF))
    ok = finite <= 1e-3 and xx <= 1e-8 and thermo <= 1e-6
    acceptance_report("5 correlators", ok,
                      f"M=1024 vs limit {finite:.1e} (tol 1e-3); XX limits {xx:.1e} (tol 1e-8); "
                      f"<sigma^z>/2 + dF/dh {thermo:.1e} (tol 1e-6)")
    assert ok


def test_zeta_suite(acceptance_report):
    rng = np.random.default_rng(6)
    z0 = z1 = 0.0
    for _ in range(100):
        a = complex(rng.uniform(0.01, 10), rng.uniform(-10, 10))
        z0 = max(z0, abs(zeta.hurwitz_zeta(0, a).value - (0.5 - a)))
        ref = complex(mp.loggamma(a)) - 0.5 * math.log(2 * math.pi)
        z1 = max(z1, abs(zeta.hurwitz_zeta(0, a, derivative=1).value - ref))
    logdet = 0.0
    for M in SIZES:
        for spec in spec_batch(600 + M, M, n=10):
            for sector in Sector:
                for stats in Statistics:
                    z = partition.sector_partition(spec, sector, stats)
                    E = partition.sector_energies(spec, sector)
                    L = zeta.matsubara_logdet_series(E, spec.beta, stats)
                    # log Z = L - beta E_0 up to 2 pi i (branch c = -1)
                    logz = L - spec.beta * partition.ground_state_energy(E)
                    diff = logz - complex(np.log(complex(z)))
                    logdet = max(logdet, abs(diff.real),
                                 abs((diff.imag + math.pi) % (2 * math.pi) - math.pi))
    mellin = det = 0.0
    for lam in (0.1, 1.0, 5.0):
        for beta in (0.5, 1.0, 2.0):
            r = zeta.single_mode_mellin(lam, beta)
            mellin = max(mellin, abs(r.logdet_abs - math.log(2 * math.cosh(beta * lam / 2))))
            det = max(det, abs(r.det - (1 + math.exp(-beta * lam))))
    ok = z0 <= 1e-10 and z1 <= 1e-10 and logdet <= 1e-10 and mellin <= 1e-6 and det <= 1e-6
    acceptance_report("6 zeta suite", ok,
                      f"zeta(0,a) {z0:.1e}, zeta'(0,a) {z1:.1e}, Matsubara log-det {logdet:.1e} "
                      f"(tol 1e-10); Mellin {mellin:.1e}, det {det:.1e} (tol 1e-6)")
    assert ok


@pytest.mark.slow
def test_verify_command(acceptance_report, capsys):
    start = time.perf_counter()
    code = main(["verify", "-o", "-"])
    out = capsys.readouterr().out
    elapsed = time.perf_counter() - start
    ok = code == 0 and "FAIL" not in out and elapsed <= 300
    acceptance_report("7 verify command", ok,
                      f"exit {code}, {elapsed:.1f} s (limit 300 s)")
    assert ok
