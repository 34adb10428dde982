"""Two-forms on Q x Q, Routh forces and flow-preservation checks.

A two-form at a point is stored as an antisymmetric matrix ``M`` acting by
``omega(u, v) = u @ M @ v``. On ``Q x Q`` the ordering is ``(dq0, dq1)``.
The coordinate expression ``c_ji dq^j ^ dq^i`` summed over all index pairs
is stored as ``C - C.T`` with ``C[j, i] = c_ji``.
"""

from dataclasses import dataclass

import numpy as np

from . import fdms
from . import geometry as geo


class InconsistentBeta(ValueError):
    """The two expressions of the Routh potential disagree."""


class NotRouth(ValueError):
    pass


def antisym(C):
    """Matrix of ``sum_{j,i} C[j, i] dq^j ^ dq^i``."""
    C = np.asarray(C, dtype=float)
    return C - C.T


def exterior_derivative(alpha, x, step=1e-5):
    """Finite-difference exterior derivative of a 1-form ``alpha(x) -> covector``.

    Independent of the dual-number backend; used as a test oracle.
    """
    J = geo.fd_jacobian(lambda z: np.asarray(alpha(z), dtype=float), x, step)
    return J.T - J


def exterior_derivative_2form(beta, x, step=1e-5):
    """``d beta`` as a fully antisymmetric array ``T[a, b, c]`` (finite differences)."""
    x = np.asarray(x, dtype=float)
    n = x.size
    dB = np.zeros((n, n, n))
    for a in range(n):
        e = np.zeros(n)
        e[a] = step
        dB[a] = (np.asarray(beta(x + e)) - np.asarray(beta(x - e))) / (2 * step)
    # (d beta)(u, v, w) = sum over cyclic permutations of d_a beta_bc
    return dB + dB.transpose(1, 2, 0) + dB.transpose(2, 0, 1)


def blocks(top_left, top_right, bottom_right):
    n = top_left.shape[0]
    M = np.zeros((2 * n, 2 * n))
    M[:n, :n] = top_left
    M[:n, n:] = top_right
    M[n:, :n] = -top_right.T
    M[n:, n:] = bottom_right
    return M


def omega_Ld(sys, q0, q1):
    """Symplectic form of the unforced discrete Lagrangian."""
    B = -geo.to_float(geo.d1d2(sys.lagrangian, q0, q1)).T
    n = B.shape[0]
    return blocks(np.zeros((n, n)), B, np.zeros((n, n)))


def omega_f_plus(sys, q0, q1):
    """``omega^+_f = -d theta^+_f``; block form ``[[0, B], [-B^T, D]]``."""
    P = geo.to_float(geo.d1d2(sys.lagrangian, q0, q1)) + geo.to_float(geo.jac1(sys.f_plus, q0, q1))
    Jp = geo.to_float(geo.jac2(sys.f_plus, q0, q1))
    n = P.shape[0]
    return blocks(np.zeros((n, n)), -P.T, Jp - Jp.T)


def omega_f_minus(sys, q0, q1):
    """``omega^-_f = -d theta^-_f``; block form ``[[A, B], [-B^T, 0]]``."""
    mixed = geo.to_float(geo.d1d2(sys.lagrangian, q0, q1))
    B = -(mixed.T + geo.to_float(geo.jac2(sys.f_minus, q0, q1)))
    Jm = geo.to_float(geo.jac1(sys.f_minus, q0, q1))
    n = B.shape[0]
    return blocks(Jm.T - Jm, B, np.zeros((n, n)))


def force_form(sys):
    """``f_d`` as a 1-form on ``Q x Q`` in the stacked coordinates ``(q0, q1)``."""
    n = sys.dim

    def f(z):
        z = np.asarray(z)
        q0, q1 = z[:n], z[n:]
        return np.concatenate([geo.to_float(sys.f_minus(q0, q1)), geo.to_float(sys.f_plus(q0, q1))])

    return f


def df_ad(sys, q0, q1):
    """``d f_d`` on ``Q x Q`` from dual-number Jacobians of the force."""
    Jm0 = geo.to_float(geo.jac1(sys.f_minus, q0, q1))
    Jm1 = geo.to_float(geo.jac2(sys.f_minus, q0, q1))
    Jp0 = geo.to_float(geo.jac1(sys.f_plus, q0, q1))
    Jp1 = geo.to_float(geo.jac2(sys.f_plus, q0, q1))
    J = np.block([[Jm0, Jm1], [Jp0, Jp1]])
    return J.T - J


def df_fd(sys, q0, q1, step=1e-5):
    return exterior_derivative(force_form(sys), np.concatenate([q0, q1]), step)


# -- Routh forces ------------------------------------------------------------

@dataclass
class RouthCertificate:
    """Outcome of :func:`detect_routh`.

    ``violations`` holds the worst residual of each defining condition of a
    Routh force (mixed block of ``df`` vanishes; the two diagonal blocks
    depend on one slot only; the two expressions of ``beta`` agree).
    ``literal`` holds the residuals of the coordinate conditions applied to
    the raw (non-antisymmetrized) force Jacobians; they are diagnostics and
    are stricter than the Routh property itself.
    """

    is_routh: bool
    max_violation: float
    violations: dict
    literal: dict
    system: object = None
    tol: float = 1e-8

    def beta(self, q):
        """Matrix of the Routh potential at ``q``."""
        if not self.is_routh:
            raise NotRouth("force is not of Routh type")
        return beta_from_minus(self.system, q, q)


def beta_from_minus(sys, q0, q1):
    return antisym(geo.to_float(geo.jac1(sys.f_minus, q0, q1)).T)


def beta_from_plus(sys, q0, q1):
    return -antisym(geo.to_float(geo.jac2(sys.f_plus, q0, q1)).T)


def default_probes(dim, n=64, low=-1.0, high=1.0, seed=0, chart=None):
    """Quasi-random pairs ``(q0, q1)`` from a scrambled Sobol sequence."""
    from scipy.stats import qmc

    pts = qmc.Sobol(2 * dim, scramble=True, seed=seed).random(n)
    pts = low + (high - low) * pts
    return [(p[:dim], p[dim:]) for p in pts]


def _slot_derivative_of_matrix(fn, q0, q1, slot):
    # max over directions of |d/dq_slot fn(q0, q1)|, with dual numbers
    from . import dual

    base = q1 if slot == 1 else q0
    worst = 0.0
    for k in range(len(base)):
        t = dual.new_tag()
        e = np.zeros(len(base))
        e[k] = 1.0
        z = dual.seed(base, e, t)
        args = (q0, z) if slot == 1 else (z, q1)
        M = fn(*args)
        d = geo.to_float(dual.tangent(M, t))
        worst = max(worst, float(np.max(np.abs(d))) if d.size else 0.0)
    return worst


def detect_routh(sys, probe_points=None, tol=1e-8):
    """Decide whether ``f_d`` is a Routh force by sampling probe pairs."""
    n = sys.dim
    if probe_points is None:
        lo, hi = (0.5, 2.0) if sys.chart.positive else (-1.0, 1.0)
        probe_points = default_probes(n, low=lo, high=hi)

    def jm0(a, b):
        return geo.jac1(sys.f_minus, a, b)

    def jp1(a, b):
        return geo.jac2(sys.f_plus, a, b)

    def anti_m(a, b):
        J = jm0(a, b)
        return J.T - J

    def anti_p(a, b):
        J = jp1(a, b)
        return J.T - J

    v = dict(mixed=0.0, locality=0.0, consistency=0.0)
    lit = {"1": 0.0, "2": 0.0, "3": 0.0}
    for q0, q1 in probe_points:
        q0 = np.asarray(q0, float)
        q1 = np.asarray(q1, float)
        Jp0 = geo.to_float(geo.jac1(sys.f_plus, q0, q1))
        Jm1 = geo.to_float(geo.jac2(sys.f_minus, q0, q1))
        Jm0 = geo.to_float(jm0(q0, q1))
        Jp1 = geo.to_float(jp1(q0, q1))
        c1 = float(np.max(np.abs(Jp0 - Jm1.T))) if n else 0.0
        v["mixed"] = max(v["mixed"], c1)
        lit["1"] = max(lit["1"], c1)
        lit["3"] = max(lit["3"], float(np.max(np.abs(-Jm0 - Jp1))))
        lit["2"] = max(lit["2"],
                       _slot_derivative_of_matrix(jm0, q0, q1, 1),
                       _slot_derivative_of_matrix(jp1, q0, q1, 0))
        v["locality"] = max(v["locality"],
                            _slot_derivative_of_matrix(anti_m, q0, q1, 1),
                            _slot_derivative_of_matrix(anti_p, q0, q1, 0))
        # beta(q) from f- at (q, q1) against beta(q) from f+ at (q0, q)
        for q in (q0, q1):
            bm = beta_from_minus(sys, q, q1)
            bp = beta_from_plus(sys, q0, q)
            v["consistency"] = max(v["consistency"], float(np.max(np.abs(bm - bp))))
    partial_ok = v["mixed"] <= tol and v["locality"] <= tol
    if partial_ok and v["consistency"] > tol:
        raise InconsistentBeta(
            f"beta from f- and f+ differ by {v['consistency']:.3e} (tol {tol:.0e})"
        )
    worst = max(v.values())
    return RouthCertificate(partial_ok and worst <= tol, worst, v, lit, sys, tol)


def omega_plus_corrected(sys, cert, q0, q1):
    """``omega^+ = omega^+_f - pr_2^* beta`` for a Routh force."""
    if not cert.is_routh:
        raise NotRouth("omega_plus_corrected needs a Routh certificate")
    M = omega_f_plus(sys, q0, q1)
    n = sys.dim
    M[n:, n:] -= cert.beta(np.asarray(q1, float))
    return M


def omega_minus_corrected(sys, cert, q0, q1):
    if not cert.is_routh:
        raise NotRouth("omega_minus_corrected needs a Routh certificate")
    M = omega_f_minus(sys, q0, q1)
    n = sys.dim
    M[:n, :n] -= cert.beta(np.asarray(q0, float))
    return M


def canonical_pullback(sys, q0, q1):
    """Pull back ``dq ^ dp`` on ``T*Q`` through the plus Legendre transform."""
    n = sys.dim
    z = np.concatenate([np.asarray(q0, float), np.asarray(q1, float)])

    def leg(w):
        a, b = w[:n], w[n:]
        return np.concatenate([b, fdms.legendre_plus(sys, a, b)])

    from . import dual

    T = geo.to_float(dual.jacobian(leg, z))
    omega_Q = blocks(np.zeros((n, n)), np.eye(n), np.zeros((n, n)))
    return T.T @ omega_Q @ T


# -- flow tangent map and preservation --------------------------------------

def residual_jacobians(sys, q0, q1, q2):
    """``J_i = d(residual)/dq_i`` at a triple, ``i = 0, 1, 2``."""
    from . import dual

    q0, q1, q2 = (np.asarray(q, float) for q in (q0, q1, q2))
    J0 = dual.jacobian(lambda z: fdms.del_residual(sys, z, q1, q2), q0)
    J1 = dual.jacobian(lambda z: fdms.del_residual(sys, q0, z, q2), q1)
    J2 = dual.jacobian(lambda z: fdms.del_residual(sys, q0, q1, z), q2)
    return geo.to_float(J0), geo.to_float(J1), geo.to_float(J2)


def flow_jacobian(sys, q0, q1, q2=None, cfg=None):
    """Tangent map of ``(q0, q1) -> (q1, q2)`` by implicit differentiation."""
    if q2 is None:
        q2 = fdms.step(sys, q0, q1, cfg)
    J0, J1, J2 = residual_jacobians(sys, q0, q1, q2)
    n = sys.dim
    try:
        lower = -geo.solve(J2, np.hstack([J0, J1]))
    except geo.SingularMatrixError as exc:
        raise fdms.SingularJacobian(str(exc)) from exc
    T = np.zeros((2 * n, 2 * n))
    T[:n, n:] = np.eye(n)
    T[n:, :] = lower
    return T


def tangent_pairs(dim2, n_random=8, seed=0):
    rng = np.random.default_rng(seed)
    E = np.eye(dim2)
    pairs = [(E[a], E[b]) for a in range(dim2) for b in range(a + 1, dim2)]
    for _ in range(n_random):
        u = rng.normal(size=dim2)
        v = rng.normal(size=dim2)
        pairs.append((u / np.linalg.norm(u), v / np.linalg.norm(v)))
    return pairs


@dataclass
class PreservationResult:
    """``defect``: worst relative change of the form along the flow.

    ``mismatch``: worst relative difference between that change and the
    pulled-back ``-d f_d`` predicted for a general force; only filled for
    ``form_kind="omega_f_plus"``.
    """

    defect: float
    mismatch: float
    steps: int
    points: np.ndarray


FORM_KINDS = ("omega_Ld", "omega_f_plus", "omega_f_minus", "omega_plus_corrected",
              "omega_minus_corrected")


def check_preservation(sys, form_kind, q0, q1, n_steps, cert=None, cfg=None, n_random=8,
                       seed=0, df="ad"):
    """Compare a two-form before and after each flow step along a trajectory.

    For every step ``(q_{k-1}, q_k) -> (q_k, q_{k+1})`` and every tangent
    pair ``(u, v)``, computes ``omega_{k}(T F u, T F v) - omega_{k-1}(u, v)``
    normalized by ``|omega_{k-1}| |u| |v|`` (Frobenius norm).
    """
    if form_kind not in FORM_KINDS:
        raise ValueError(f"unknown form kind {form_kind!r}")
    if form_kind in ("omega_plus_corrected", "omega_minus_corrected"):
        if cert is None:
            cert = detect_routh(sys)

    def form(a, b):
        if form_kind == "omega_Ld":
            return omega_Ld(sys, a, b)
        if form_kind == "omega_f_plus":
            return omega_f_plus(sys, a, b)
        if form_kind == "omega_f_minus":
            return omega_f_minus(sys, a, b)
        if form_kind == "omega_plus_corrected":
            return omega_plus_corrected(sys, cert, a, b)
        return omega_minus_corrected(sys, cert, a, b)

    traj = fdms.run(sys, q0, q1, n_steps, cfg)
    P = traj.points
    pairs = tangent_pairs(2 * sys.dim, n_random, seed)
    defect = 0.0
    mismatch = 0.0
    M_prev = form(P[0], P[1])
    for k in range(1, len(P) - 1):
        T = flow_jacobian(sys, P[k - 1], P[k], P[k + 1])
        M_next = form(P[k], P[k + 1])
        change = T.T @ M_next @ T - M_prev
        scale = max(np.linalg.norm(M_prev), np.finfo(float).tiny)
        if form_kind == "omega_f_plus":
            dF = df_ad(sys, P[k], P[k + 1]) if df == "ad" else df_fd(sys, P[k], P[k + 1])
            predicted = T.T @ (-dF) @ T
        for u, v in pairs:
            w = np.linalg.norm(u) * np.linalg.norm(v) * scale
            defect = max(defect, abs(u @ change @ v) / w)
            if form_kind == "omega_f_plus":
                mismatch = max(mismatch, abs(u @ (change - predicted) @ v) / w)
        M_prev = M_next
    return PreservationResult(defect, mismatch, n_steps, P)


def is_nondegenerate(M, cond_limit=geo.COND_LIMIT):
    return geo.is_nonsingular(M, cond_limit)


def regularity_agreement(sys, points, cert=None, cond_limit=geo.COND_LIMIT):
    """Compare the regularity flag with nondegeneracy of ``omega^+`` and ``omega^-``.

    For a Routh force the corrected forms are used; otherwise the plain
    forced forms. Returns the list of ``(q0, q1, is_regular, nondegenerate)``
    where the two verdicts disagree.
    """
    if cert is None and sys.forced:
        cert = detect_routh(sys)
    routh = cert is not None and cert.is_routh
    bad = []
    for q0, q1 in points:
        reg = fdms.regularity_matrices(sys, q0, q1, cond_limit).is_regular
        if routh:
            plus = omega_plus_corrected(sys, cert, q0, q1)
            minus = omega_minus_corrected(sys, cert, q0, q1)
        else:
            plus = omega_f_plus(sys, q0, q1)
            minus = omega_f_minus(sys, q0, q1)
        nondeg = is_nondegenerate(plus, cond_limit) and is_nondegenerate(minus, cond_limit)
        if reg != nondeg:
            bad.append((q0, q1, reg, nondeg))
    return bad
