"""Forced discrete mechanical systems and their Newton-based local flow."""

from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .geometry import Chart, ChartDomainError


class SolverError(RuntimeError):
    """Base class for failures of the discrete flow."""

    def __init__(self, msg, index=None, residual=None):
        super().__init__(msg)
        self.index = index
        self.residual = residual


class NonConvergence(SolverError):
    pass


class SingularJacobian(SolverError):
    pass


def _zero_force(q0, q1):
    return np.zeros(len(q0), dtype=object)


@dataclass(frozen=True)
class DiscreteSystem:
    """A forced discrete mechanical system ``(Q, L_d, f_d)``.

    ``lagrangian(q0, q1)`` returns a scalar. ``force_minus(q0, q1)`` is the
    covector at ``q0`` and ``force_plus(q0, q1)`` the covector at ``q1``; both
    return sequences of length ``chart.dim``. All three must be written with
    operations that accept dual numbers (use :mod:`routhe.dual` functions or
    numpy ufuncs on object arrays) so they can be differentiated.
    """

    lagrangian: object
    chart: Chart
    force_minus: object = None
    force_plus: object = None
    name: str = ""

    @property
    def dim(self):
        return self.chart.dim

    @property
    def forced(self):
        return self.force_minus is not None or self.force_plus is not None

    def f_minus(self, q0, q1):
        if self.force_minus is None:
            return _zero_force(q0, q1)
        return np.asarray(self.force_minus(q0, q1), dtype=object)

    def f_plus(self, q0, q1):
        if self.force_plus is None:
            return _zero_force(q0, q1)
        return np.asarray(self.force_plus(q0, q1), dtype=object)

    def with_force(self, force_minus, force_plus, name=None):
        return DiscreteSystem(self.lagrangian, self.chart, force_minus, force_plus,
                              name or self.name)

    def unforced(self):
        return DiscreteSystem(self.lagrangian, self.chart, name=self.name)


@dataclass
class SolverConfig:
    tol: float = 1e-12
    max_iter: int = 50
    damping: float = 1.0
    cond_limit: float = geo.COND_LIMIT


@dataclass
class StepInfo:
    iterations: int
    residual: float


@dataclass
class Trajectory:
    points: np.ndarray
    iterations: list = field(default_factory=list)
    residuals: list = field(default_factory=list)

    def __len__(self):
        return len(self.points)

    @property
    def max_residual(self):
        return max(self.residuals, default=0.0)


def _obj(q):
    return np.asarray(q, dtype=object)


def del_residual(sys, q0, q1, q2):
    """Forced discrete Euler-Lagrange residual, a covector at ``q1``."""
    for name, q in (("q0", q0), ("q1", q1), ("q2", q2)):
        sys.chart.check(q, name)
    q0, q1, q2 = _obj(q0), _obj(q1), _obj(q2)
    return (geo.d2(sys.lagrangian, q0, q1) + geo.d1(sys.lagrangian, q1, q2)
            + sys.f_plus(q0, q1) + sys.f_minus(q1, q2))


def legendre_plus(sys, q0, q1):
    q0, q1 = _obj(q0), _obj(q1)
    return geo.d2(sys.lagrangian, q0, q1) + sys.f_plus(q0, q1)


def legendre_minus(sys, q0, q1):
    q0, q1 = _obj(q0), _obj(q1)
    return -geo.d1(sys.lagrangian, q0, q1) - sys.f_minus(q0, q1)


@dataclass
class Regularity:
    B_plus: np.ndarray
    B_minus: np.ndarray
    is_regular: bool


def regularity_matrices(sys, q0, q1, cond_limit=geo.COND_LIMIT):
    """The two bilinear maps whose nondegeneracy is regularity.

    ``B_plus[i, j] = d^2 L/dq0^j dq1^i + d f+_i/dq0^j`` and
    ``B_minus[i, j] = -d^2 L/dq1^j dq0^i - d f-_i/dq1^j``.
    """
    q0, q1 = _obj(q0), _obj(q1)
    mixed = geo.to_float(geo.d1d2(sys.lagrangian, q0, q1))
    B_plus = mixed + geo.to_float(geo.jac1(sys.f_plus, q0, q1))
    B_minus = -mixed.T - geo.to_float(geo.jac2(sys.f_minus, q0, q1))
    ok = geo.is_nonsingular(B_plus, cond_limit) and geo.is_nonsingular(B_minus, cond_limit)
    return Regularity(B_plus, B_minus, bool(ok))


def step(sys, q0, q1, cfg=None, guess=None, info=False):
    """Solve the forced DEL equations for ``q2`` given ``(q0, q1)``.

    Newton's method started from the chart extrapolation ``2 q1 - q0``. The
    Jacobian is ``d(residual)/dq2``; it is singular exactly when the minus
    Legendre transform is, i.e. when regularity is lost along the path.
    """
    cfg = cfg or SolverConfig()
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    sys.chart.check(q0, "q0")
    sys.chart.check(q1, "q1")
    fixed = geo.to_float(legendre_plus(sys, q0, q1))
    q2 = 2 * q1 - q0 if guess is None else np.asarray(guess, dtype=float)

    def resid(z):
        return fixed - legendre_minus(sys, q1, z)

    res = np.inf
    for it in range(cfg.max_iter + 1):
        try:
            sys.chart.check(q2, "Newton iterate q2")
        except ChartDomainError as exc:
            raise NonConvergence(str(exc), residual=res) from exc
        r = geo.to_float(resid(q2))
        res = float(np.max(np.abs(r))) if r.size else 0.0
        if res <= cfg.tol:
            return (q2, StepInfo(it, res)) if info else q2
        if it == cfg.max_iter:
            break
        J = geo.to_float(geo.jac2(lambda a, b: resid(b), q1, q2))
        try:
            dq = geo.solve(J, r, cfg.cond_limit)
        except geo.SingularMatrixError as exc:
            raise SingularJacobian(f"Newton matrix singular: {exc}", residual=res) from exc
        q2 = q2 - cfg.damping * dq
    raise NonConvergence(
        f"no convergence after {cfg.max_iter} iterations (residual {res:.3e})", residual=res
    )


def run(sys, q0, q1, N, cfg=None):
    """Iterate :func:`step` ``N`` times; the trajectory holds ``N + 2`` points."""
    pts = [np.asarray(q0, dtype=float), np.asarray(q1, dtype=float)]
    traj = Trajectory(np.empty((0, sys.dim)))
    for k in range(N):
        try:
            q2, si = step(sys, pts[-2], pts[-1], cfg, info=True)
        except SolverError as exc:
            exc.index = k
            traj.points = np.array(pts)
            exc.trajectory = traj
            raise
        pts.append(q2)
        traj.iterations.append(si.iterations)
        traj.residuals.append(si.residual)
    traj.points = np.array(pts)
    return traj
