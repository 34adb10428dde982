import numpy as np
import pytest

from routhe import dual, fdms, geometry as geo, reduction as red, symmetry as sym, systems

RUN = systems.CENTRAL_RUN


def bar_setup(m=1.0, h=0.2):
    tr, _ = sym.SE2Symmetry().isotropy([0.0, 2.5, 0.0])
    return systems.bar(m, 1.0, h), tr


def central_newton(h=0.2):
    # no closed form: the connection is found by Newton's method
    V, _ = systems.sextic_potential()
    return systems.central_mp(1.0, h, V), sym.TranslationSymmetry(2, 1)


def test_bar_isotropy_momentum_example():
    s, tr = bar_setup()
    J = sym.momentum(s, tr, np.array([0.0, 1.0, 0.0]), np.array([0.3, 1.5, -0.2]))
    assert J[0] == pytest.approx(2.5)


def test_free_particle_momentum_is_constant():
    s = systems.free_particle(2.0, 0.5)
    tr = sym.TranslationSymmetry(1, 0)
    traj = fdms.run(s, [0.0], [0.3], 20).points
    J = [sym.momentum(s, tr, a, b)[0] for a, b in zip(traj[:-1], traj[1:])]
    np.testing.assert_allclose(J, 2.0 * 0.3 / 0.5, atol=1e-12)


def test_momentum_rejects_non_invariant_lagrangian():
    s = fdms.DiscreteSystem(lambda a, b: (b[0] - a[0]) ** 2 + b[0] ** 2,
                            geo.euclidean(1))
    with pytest.raises(sym.InvarianceViolation):
        sym.momentum(s, sym.TranslationSymmetry(1, 0), [0.0], [1.0])


def test_momentum_from_initial_conditions():
    # continuous data: m r0^2 etadot0 is the momentum level exactly
    assert 1.0 * 0.2 ** 2 * -2.85 == pytest.approx(RUN["mu"], abs=1e-12)
    s, tr = central_newton()
    h = RUN["h"]
    q0 = np.array([0.2, 1.5708])
    q1 = np.array([0.201, 1.5708 + h * -2.85])
    J = sym.momentum(s, tr, q0, q1)[0]
    assert J == pytest.approx(RUN["mu"], abs=1e-3)


def test_se2_momentum_is_equivariant():
    s = systems.bar(1.3, 0.7, 0.2)
    se = sym.SE2Symmetry()
    rng = np.random.default_rng(0)
    samples = [(rng.normal(size=3), rng.normal(size=3), rng.normal(size=3)) for _ in range(30)]
    assert sym.check_equivariance(s, se, samples) <= 1e-10


def test_translation_momentum_equivariance_is_invariance():
    s, tr = central_newton()
    rng = np.random.default_rng(1)
    samples = [(rng.normal(size=1), rng.uniform(0.5, 1.5, 2), rng.uniform(0.5, 1.5, 2))
               for _ in range(10)]
    assert sym.check_equivariance(s, tr, samples) <= 1e-12


class ScalingAction(sym.TranslationSymmetry):
    """Claims translation generators but scales the coordinate instead."""

    def act(self, g, q):
        q = np.array(q, dtype=object)
        q[self.index] = q[self.index] * dual.exp(np.asarray(g, dtype=object).ravel()[0])
        return q


def test_broken_action_is_detected():
    s, _ = bar_setup()
    bad = ScalingAction(3, 1)
    rng = np.random.default_rng(2)
    samples = [(rng.uniform(0.5, 1.0, 1), rng.normal(size=3), rng.normal(size=3))
               for _ in range(10)]
    assert sym.check_equivariance(s, bad, samples) > 1e-2


def test_coadjoint_matches_differentiated_conjugation():
    se = sym.SE2Symmetry()
    rng = np.random.default_rng(3)
    for _ in range(10):
        g, mu = rng.normal(size=3), rng.normal(size=3)
        conj = lambda v: se.compose(g, se.compose(v, se.inverse(g)))
        Ad = geo.to_float(dual.jacobian(conj, np.zeros(3)))
        np.testing.assert_allclose(Ad, se.adjoint(g), atol=1e-14)
        Ad_inv = geo.to_float(dual.jacobian(
            lambda v: se.compose(se.inverse(g), se.compose(v, g)), np.zeros(3)))
        np.testing.assert_allclose(se.coadjoint(g, mu), Ad_inv.T @ mu, atol=1e-14)


def test_group_axioms():
    se = sym.SE2Symmetry()
    rng = np.random.default_rng(4)
    for _ in range(10):
        g, k, l, q = (rng.normal(size=3) for _ in range(4))
        f = geo.to_float
        np.testing.assert_allclose(f(se.compose(se.compose(g, k), l)),
                                   f(se.compose(g, se.compose(k, l))), atol=1e-13)
        np.testing.assert_allclose(f(se.compose(g, se.inverse(g))), 0.0, atol=1e-14)
        np.testing.assert_allclose(f(se.act(se.compose(g, k), q)), f(se.act(g, se.act(k, q))),
                                   atol=1e-13)
        np.testing.assert_allclose(f(se.act(se.identity(), q)), q)
    tr = sym.TranslationSymmetry(2, 1)
    np.testing.assert_allclose(geo.to_float(tr.act(tr.compose([1.0], [2.0]), [0.5, 0.0])), [0.5, 3.0])


def test_isotropy_of_se2_momentum():
    se = sym.SE2Symmetry()
    mu = np.array([0.3, 2.5, 0.0])
    vals = np.linspace(-1.0, 1.0, 5)
    grid = [np.array([a, x, b]) for a in vals for x in vals for b in vals]
    fixed = sym.isotropy_grid(se, mu, grid)
    assert len(fixed) == 5
    assert all(g[0] == 0 and g[2] == 0 for g in fixed)
    tr, pairing = se.isotropy(mu)
    assert tr.index == 1 and pairing == 2.5
    with pytest.raises(NotImplementedError):
        se.isotropy([0.0, 1.0, 0.5])


def test_bar_connection_example():
    s, tr = bar_setup()
    tr.closed_connection = sym.bar_connection(1.0, 0.2)
    q0, q1 = np.zeros(3), np.array([0.0, 1.0, 0.0])
    assert sym.connection_A_mu(s, tr, 2.5, q0, q1) == pytest.approx(0.5)
    tr.closed_connection = None
    assert sym.connection_A_mu(s, tr, 2.5, q0, q1) == pytest.approx(0.5, abs=1e-13)


def test_newton_connection_matches_closed_form():
    s, tr = central_newton()
    closed = sym.central_connection(1.0, 0.2)
    rng = np.random.default_rng(5)
    for _ in range(20):
        q0, q1 = rng.uniform(0.3, 2.0, 2), rng.uniform(0.3, 2.0, 2)
        g = sym.connection_A_mu(s, tr, RUN["mu"], q0, q1)
        assert g == pytest.approx(closed(q0, q1, RUN["mu"]), abs=1e-12)


def test_connection_vanishes_on_the_level_set_and_only_there():
    s, tr = central_newton()
    rng = np.random.default_rng(6)
    mu = RUN["mu"]
    for _ in range(20):
        q0, q1 = rng.uniform(0.3, 2.0, 2), rng.uniform(0.3, 2.0, 2)
        level = sym.momentum(s, tr, q0, q1)[0]
        assert abs(sym.connection_A_mu(s, tr, level, q0, q1)) <= 1e-10
        g = sym.connection_A_mu(s, tr, mu, q0, q1)
        q1h = geo.to_float(tr.act([-g], q1))
        assert abs(sym.momentum(s, tr, q0, q1h)[0] - mu) <= 1e-10
        if abs(level - mu) > 1e-6:
            assert abs(g) > 1e-10


def test_connection_equivariance():
    s, tr = central_newton()
    rng = np.random.default_rng(7)
    for _ in range(10):
        q0, q1 = rng.uniform(0.3, 2.0, 2), rng.uniform(0.3, 2.0, 2)
        g0, g1 = rng.normal(size=2)
        lhs = sym.connection_A_mu(s, tr, -0.114, geo.to_float(tr.act([g0], q0)),
                                  geo.to_float(tr.act([g1], q1)))
        rhs = g1 + sym.connection_A_mu(s, tr, -0.114, q0, q1) - g0
        assert lhs == pytest.approx(rhs, abs=1e-10)


def test_connection_without_root():
    # J_mu does not depend on the group coordinate of q1
    s = fdms.DiscreteSystem(lambda a, b: (b[0] - a[0]) ** 2, geo.euclidean(2))
    with pytest.raises(sym.NoSolution):
        sym.connection_A_mu(s, sym.TranslationSymmetry(2, 1), 1.0, np.zeros(2), np.ones(2))


def test_horizontal_lift():
    _, tr = bar_setup()
    conn = sym.bar_principal(tr, 0.7)
    dq = geo.to_float(sym.horizontal_lift(conn, np.zeros(3), [1.0, 2.0]))
    np.testing.assert_allclose(dq, [1.0, 1.4, 2.0])
    np.testing.assert_array_equal(geo.to_float(sym.horizontal_lift(conn, np.zeros(3), [0.0, 0.0])), 0.0)
    rng = np.random.default_rng(8)
    t3 = sym.TranslationSymmetry(3, 2)
    for c in (conn, sym.twisted_principal(t3)):
        for _ in range(5):
            q = rng.normal(size=3)
            dq = sym.horizontal_lift(c, q, rng.normal(size=2))
            assert abs(geo.to_float(c(q, dq))) <= 1e-14


def test_momentum_conserved_along_bar_trajectory():
    s, _ = bar_setup()
    se = sym.SE2Symmetry()
    q0, q1 = red.bar_seed_from_reduced([0.0, 0.0], [0.1, 0.2], 2.5)
    P = fdms.run(s, q0, q1, 100).points
    J0 = sym.momentum(s, se, P[0], P[1])
    worst = max(np.max(np.abs(sym.momentum(s, se, a, b) - J0)) for a, b in zip(P[:-1], P[1:]))
    assert worst <= 1e-10


def test_momentum_conserved_along_central_trajectory():
    s, tr = central_newton()
    q0, q1 = red.central_seed(0.2, 1.5708, 0.201, RUN["mu"])
    P = fdms.run(s, q0, q1, 500).points
    J = np.array([sym.momentum(s, tr, a, b)[0] for a, b in zip(P[:-1], P[1:])])
    assert J[0] == pytest.approx(RUN["mu"], abs=1e-12)
    assert np.max(np.abs(J - J[0])) <= 1e-9


def test_mu_good_probe_finds_a_single_root():
    s, tr = bar_setup()
    grid = np.linspace(-3, 3, 61)
    assert sym.mu_good_probe(s, tr, 2.5, np.array([0.1, 0.2, 0.3]), grid) == 1
    s, tr = central_newton()
    assert sym.mu_good_probe(s, tr, RUN["mu"], np.array([0.8, 0.1]), grid) == 1
