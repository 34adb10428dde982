# Planar motion in the sextic potential V(r) = alpha r^2 (r^2 - beta)^2
#
# The angle eta is cyclic. Reducing the midpoint discretization at
# mu = m r0^2 etadot0 gives a forced system in r alone. We compare it with
# RK4 on the continuous reduced equation over t in [0, 100] with h = 0.2.

import numpy as np

from routhe import config, continuous as cont, experiments as ex

cfg = config.load()
cs = ex.central(cfg)
N = cfg.n_steps
times, methods = ex._central_methods(cfg, cs, N)
r_mp = methods["mp"]()
Y_rk4 = methods["rk4"]()
Y_ref = methods["oracle"]()

E_ref = cont.routhian_energy(cs.continuous, cfg.r0, cfg.rdot0)
E_mp = ex.mp_energy(cs, r_mp)
E_rk4 = np.array([cont.routhian_energy(cs.continuous, *y) for y in Y_rk4])

mp = ex.energy_summary((times[:-1] + times[1:]) / 2, E_mp)
rk = ex.energy_summary(times, E_rk4)
print(f"energy of the initial data   {E_ref:.7f}")
print(f"midpoint: mean {mp.mean:.7f}  oscillation {mp.amplitude:.2e}  drift {mp.drift:+.2e}")
print(f"RK4:      change {rk.endpoint_change:+.2e}  drift {rk.drift:+.2e}")
print(f"max |r - r_exact|: midpoint {np.max(np.abs(r_mp - Y_ref[:, 0])):.3e}, "
      f"RK4 {np.max(np.abs(Y_rk4[:, 0] - Y_ref[:, 0])):.3e}")

# Global error at t = 10 for a sequence of halved steps.
rows, _ = ex.convergence(cfg)
hs = [r.h for r in rows]
print("fitted orders: midpoint", round(ex.fitted_order(hs, [r.err_mp for r in rows]), 3),
      " RK4", round(ex.fitted_order(hs, [r.err_rk4 for r in rows]), 3))
