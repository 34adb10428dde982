"""One test per acceptance criterion, each at its stated tolerance.

The terminal summary (see ``conftest.py``) prints a PASS/FAIL line per criterion.
"""

import time

import numpy as np
import pytest

from routhe import config, continuous as cont, experiments as ex, fdms, forms
from routhe import geometry as geo, reduction as red, symmetry as sym, systems

MU = systems.CENTRAL_RUN["mu"]


@pytest.fixture(scope="module")
def cfg():
    return config.load()


def test_criterion_1_bar_closed_form_flow(cfg):
    start = time.perf_counter()
    rs = ex.bar(cfg)[3]
    pts = fdms.run(rs.reduced, cfg.tau0, cfg.tau1, 100).points
    closed = [np.array(cfg.tau0), np.array(cfg.tau1)]
    for _ in range(100):
        closed.append(2 * closed[-1] - closed[-2])
    elapsed = time.perf_counter() - start
    assert np.max(np.abs(pts - np.array(closed))) <= 1e-10
    assert elapsed < 1.0


def test_criterion_2_momentum_conservation(cfg):
    sysd, se, _, _, mu2 = ex.bar(cfg)
    q0, q1 = red.bar_seed_from_reduced(cfg.tau0, cfg.tau1, mu2)
    P = fdms.run(sysd, q0, q1, 100).points
    J0 = sym.momentum(sysd, se, P[0], P[1])
    drift = max(np.max(np.abs(sym.momentum(sysd, se, a, b) - J0)) for a, b in zip(P[:-1], P[1:]))
    assert drift <= 1e-10


def test_criterion_3_routh_certificate(cfg):
    mp = ex.central(cfg).reduced.reduced
    cert = forms.detect_routh(mp)
    assert cert.is_routh
    for r in (0.3, 1.0, 2.5):
        np.testing.assert_allclose(cert.beta(np.array([r])), 0.0, atol=1e-12)
    c = 0.3
    cert = forms.detect_routh(systems.synthetic_routh(c))
    assert cert.is_routh
    np.testing.assert_allclose(cert.beta(np.array([0.2, -0.6])), [[0, 2 * c], [-2 * c, 0]], atol=1e-8)
    cert = forms.detect_routh(systems.dissipative(0.5))
    assert not cert.is_routh and cert.literal["3"] >= 0.4


def test_criterion_4_symplectic_preservation(cfg):
    rs = ex.bar(cfg)[3]
    for s, q0, q1 in ((rs.reduced, cfg.tau0, cfg.tau1),
                      (systems.bar(), np.zeros(3), np.array([0.1, 0.5, 0.2])),
                      (systems.synthetic_routh(0.3), cfg.q0, cfg.q1)):
        res = forms.check_preservation(s, "omega_plus_corrected", q0, q1, 50,
                                       forms.detect_routh(s, forms.default_probes(s.dim, n=16)))
        assert res.defect <= 1e-8
    res = forms.check_preservation(systems.dissipative(0.5), "omega_f_plus", cfg.q0, cfg.q1, 50)
    assert res.defect >= 1e-3
    assert res.mismatch <= 1e-8


def test_criterion_5_midpoint_routhian_identity(cfg):
    V, _ = systems.sextic_potential(cfg.alpha, cfg.beta)
    samples = np.random.default_rng(2024).uniform(0.1, 3.0, size=(1000, 2))
    assert red.midpoint_identity_check(MU, cfg.m, cfg.step, samples, V) <= 1e-12
    mp = ex.central(cfg).reduced.reduced
    gamma = systems.central_gamma(MU, cfg.m, cfg.step)
    for r0, r1 in samples[:50]:
        a, b = np.array([r0]), np.array([r1])
        fm = geo.to_float(mp.f_minus(a, b))
        fp = geo.to_float(mp.f_plus(a, b))
        np.testing.assert_allclose(fm, geo.to_float(geo.d1(gamma, a, b)), atol=1e-10)
        np.testing.assert_allclose(fp, geo.to_float(geo.d2(gamma, a, b)), atol=1e-10)


def test_criterion_6_reduction_correspondence(cfg):
    cs = ex.central(cfg)
    q0, q1 = red.central_seed(cfg.r0, cfg.eta0, cfg.r1, MU)
    rep = red.verify_reduction(cs.unreduced, cs.setup, MU, cs.reduced, 500, q0, q1)
    assert rep.max_discrepancy <= 1e-8
    sysd, _, tr, rs, mu2 = ex.bar(cfg)
    q0, q1 = red.bar_seed_from_reduced(cfg.tau0, cfg.tau1, mu2)
    assert red.verify_reduction(sysd, tr, mu2, rs, 100, q0, q1).max_discrepancy <= 1e-9


def test_criterion_7_central_potential_run(cfg):
    start = time.perf_counter()
    assert abs(cfg.m * cfg.r0 ** 2 * cfg.etadot0 - MU) <= 1e-12
    cs = ex.central(cfg)
    N = cfg.n_steps
    times, methods = ex._central_methods(cfg, cs, N)
    r_mp = methods["mp"]()
    Y = methods["rk4"]()
    methods["oracle"]()
    E_rk4 = np.array([cont.routhian_energy(cs.continuous, *y) for y in Y])
    assert E_rk4[-1] - E_rk4[0] < 0
    E_mp = ex.mp_energy(cs, r_mp)
    t_mid = (times[:-1] + times[1:]) / 2
    mp, rk = ex.energy_summary(t_mid, E_mp), ex.energy_summary(times, E_rk4)
    E_exact = cont.routhian_energy(cs.continuous, cfg.r0, cfg.rdot0)
    assert abs(mp.mean - E_exact) <= mp.amplitude
    assert abs(mp.drift) <= 0.1 * abs(rk.drift)
    assert time.perf_counter() - start < 5.0


def test_criterion_8_convergence_orders(cfg):
    start = time.perf_counter()
    rows, failures = ex.convergence(cfg, (0.2, 0.1, 0.05, 0.025), 10.0)
    elapsed = time.perf_counter() - start
    assert not failures
    hs = [r.h for r in rows]
    order_mp = ex.fitted_order(hs, [r.err_mp for r in rows])
    order_rk4 = ex.fitted_order(hs, [r.err_rk4 for r in rows])
    assert elapsed < 30.0
    assert 1.8 <= order_mp <= 2.2, f"MP order {order_mp:.3f}"
    assert 3.7 <= order_rk4 <= 4.3, f"RK4 order {order_rk4:.3f} (MP {order_mp:.3f})"


def test_criterion_9_regularity_iff_nondegeneracy(cfg):
    rng = np.random.default_rng(9)

    def planar_points():
        pts = [(rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2)) for _ in range(35)]
        for _ in range(15):
            a = rng.uniform(-1, 1, 2)
            b = a.copy()
            b[rng.integers(2)] += rng.uniform(-1, 1)
            pts.append((a, b))
        return pts

    cases = [(s, planar_points()) for s in
             (systems.cubic(), systems.synthetic_routh(), systems.dissipative())]
    cases.append((ex.central(cfg).reduced.reduced,
                  [(rng.uniform(0.1, 3, 1), rng.uniform(0.1, 3, 1)) for _ in range(50)]))
    cases.append((systems.bar(), [(rng.normal(size=3), rng.normal(size=3)) for _ in range(50)]))
    singular = 0
    for s, pts in cases:
        assert forms.regularity_agreement(s, pts) == []
        singular += sum(not fdms.regularity_matrices(s, a, b).is_regular for a, b in pts)
    assert singular > 0


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
