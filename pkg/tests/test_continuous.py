import numpy as np
import pytest
from scipy.integrate import solve_ivp

from routhe import continuous as cont, systems

MU = systems.CENTRAL_RUN["mu"]


@pytest.fixture(scope="module")
def sextic():
    V, dV = systems.sextic_potential(0.1, 2.0)
    return cont.ContinuousReducedSystem(1.0, V, dV, MU)


@pytest.fixture(scope="module")
def oracle_run(sextic):
    ts = np.linspace(0.0, 100.0, 501)
    sol = cont.adaptive_solve(cont.rhs(sextic), [0.2, 0.01], (0.0, 100.0), 1e-12, t_eval=ts)
    return ts, cont.sample(sol, ts)


def test_rhs_examples(sextic):
    harmonic = cont.ContinuousReducedSystem(1.0, lambda r: r * r / 2, lambda r: r, 0.0)
    assert cont.reduced_rhs(harmonic, 1.0, 0.0) == (0.0, -1.0)
    # mu^2 / r^3 = 1.6245 and V'(0.2) = 2303/15625 exactly
    rdot, rddot = cont.reduced_rhs(sextic, 0.2, 0.01)
    assert rdot == 0.01
    assert rddot == pytest.approx(1.6245 - 2303 / 15625, abs=1e-12)
    assert rddot == pytest.approx(1.477108, abs=1e-12)
    # circular orbit where the centrifugal term balances V'
    flat = cont.ContinuousReducedSystem(1.0, lambda r: 0.0 * r, lambda r: 0.0 * r, 1.0)
    assert cont.reduced_rhs(flat, 1.0, 0.0)[1] == pytest.approx(1.0)
    with pytest.raises(ValueError, match="positive"):
        cont.reduced_rhs(sextic, 0.0, 1.0)


def test_energy_examples(sextic):
    assert cont.routhian_energy(sextic, 0.2, 0.01) == pytest.approx(0.1778664, abs=1e-12)
    free = cont.ContinuousReducedSystem(2.0, lambda r: 0.0 * r, lambda r: 0.0 * r, 0.0)
    assert cont.routhian_energy(free, 1.0, 3.0) == pytest.approx(9.0)
    # Routhian energy is rdot * dR/drdot - R
    R = systems.routhian(MU)
    r, v = 0.7, -0.3
    assert cont.routhian_energy(sextic, r, v) == pytest.approx(v * v - R(r, v), abs=1e-15)


def test_rk4_single_step():
    y = cont.rk4_step(lambda t, y: y, 0.0, [1.0], 0.1)
    assert y[0] == pytest.approx(1 + 0.1 + 0.01 / 2 + 0.001 / 6 + 0.0001 / 24, abs=1e-15)


def test_adaptive_oscillator_is_periodic():
    f = lambda t, y: np.array([y[1], -y[0]])
    sol = cont.adaptive_solve(f, [1.0, 0.0], (0.0, 2 * np.pi), 1e-12)
    np.testing.assert_allclose(sol.y[-1], [1.0, 0.0], atol=1e-10)
    mid = sol(np.pi / 3)[0]
    np.testing.assert_allclose(mid, [np.cos(np.pi / 3), -np.sin(np.pi / 3)], atol=1e-9)


def test_adaptive_hits_requested_times():
    f = lambda t, y: -y
    ts = [0.25, 0.5, 1.0]
    sol = cont.adaptive_solve(f, [1.0], (0.0, 1.0), 1e-10, t_eval=ts)
    assert set(ts) <= set(sol.t)
    np.testing.assert_allclose(cont.sample(sol, ts)[:, 0], np.exp(-np.array(ts)), rtol=1e-9)


def test_oracle_conserves_energy(sextic, oracle_run):
    _, Y = oracle_run
    E = np.array([cont.routhian_energy(sextic, r, v) for r, v in Y])
    assert np.max(np.abs(E - E[0])) <= 1e-10


def test_oracle_agrees_with_scipy(sextic, oracle_run):
    ts, Y = oracle_run
    ref = solve_ivp(cont.rhs(sextic), (0.0, 100.0), [0.2, 0.01], method="DOP853",
                    rtol=1e-13, atol=1e-13, t_eval=ts)
    np.testing.assert_allclose(Y, ref.y.T, atol=1e-8)


@pytest.mark.xfail(strict=True, reason="global error grows to about 100 tol over t = 100")
def test_oracle_self_consistency_within_ten_tol(sextic):
    f = cont.rhs(sextic)
    a = cont.adaptive_solve(f, [0.2, 0.01], (0.0, 100.0), 1e-12).y[-1]
    b = cont.adaptive_solve(f, [0.2, 0.01], (0.0, 100.0), 5e-13).y[-1]
    assert np.max(np.abs(a - b)) <= 10 * 1e-12


def test_oracle_self_consistency_scales_with_tol(sextic):
    f = cont.rhs(sextic)
    ref = solve_ivp(f, (0.0, 100.0), [0.2, 0.01], method="DOP853", rtol=3e-14, atol=1e-14).y[:, -1]
    errs = [np.max(np.abs(cont.adaptive_solve(f, [0.2, 0.01], (0.0, 100.0), tol).y[-1] - ref))
            for tol in (1e-8, 1e-10)]
    assert errs[1] < errs[0] / 10
    assert errs[1] <= 1e3 * 1e-10


def test_rk4_energy_decreases(sextic):
    Y = cont.rk4_solve(cont.rhs(sextic), [0.2, 0.01], 0.2, 500)
    assert cont.routhian_energy(sextic, *Y[-1]) < cont.routhian_energy(sextic, *Y[0])


def test_rk4_is_fourth_order_on_a_smooth_problem():
    f = lambda t, y: np.array([y[1], -y[0]])
    exact = np.array([np.cos(2.0), -np.sin(2.0)])
    errs = [np.max(np.abs(cont.rk4_solve(f, [1.0, 0.0], 2.0 / n, n)[-1] - exact)) for n in (20, 40, 80)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all((orders > 3.9) & (orders < 4.1))


def test_step_underflow_at_blow_up():
    with pytest.raises(cont.StepUnderflow):
        cont.adaptive_solve(lambda t, y: y * y, [1.0], (0.0, 2.0), 1e-10)


def test_rk4_order_on_reduced_system_reaches_four_on_finer_steps(sextic):
    # on h = 0.2 ... 0.025 the fitted slope is about 4.46; the local order settles towards 4
    f = cont.rhs(sextic)
    ref = solve_ivp(f, (0.0, 10.0), [0.2, 0.01], method="DOP853", rtol=3e-14, atol=1e-15).y[0, -1]
    hs = np.array([0.025, 0.0125, 0.00625, 0.003125])
    errs = [abs(cont.rk4_solve(f, [0.2, 0.01], h, round(10 / h))[-1, 0] - ref) for h in hs]
    local = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.diff(local) < 0)
    assert 3.7 <= np.polyfit(np.log(hs), np.log(errs), 1)[0] <= 4.3
