"""Concrete discrete systems used throughout the library and its tests."""

import numpy as np

from .fdms import DiscreteSystem
from .geometry import Chart, euclidean

BAR_CHART = Chart("bar-S1xR2", 3, angles=(0,), labels=("phi", "x", "y"))
BAR_REDUCED_CHART = Chart("bar-reduced", 2, angles=(0,), labels=("phi", "y"))
CENTRAL_CHART = Chart("central-(r,eta)", 2, positive=(0,), angles=(1,), labels=("r", "eta"))
REDUCED_R_CHART = Chart("reduced-r", 1, positive=(0,), labels=("r",))

# parameters and initial data of the reference central-potential run
CENTRAL_RUN = dict(alpha=0.1, beta=2.0, m=1.0, h=0.2, mu=-0.114,
                   r0=0.2, eta0=1.5708, rdot0=0.01, etadot0=-2.85, r1=0.201, t_end=100.0)


def free_particle(m=1.0, h=1.0, dim=1):
    def L(q0, q1):
        d = q1 - q0
        return m * sum(d * d) / (2 * h)

    return DiscreteSystem(L, euclidean(dim), name="free-particle")


def bar(m=1.0, J=1.0, h=0.2):
    """Planar bar, coordinates ``(phi, x, y)``; invariant under SE(2)."""

    def L(q0, q1):
        dphi = q1[0] - q0[0]
        dx = q1[1] - q0[1]
        dy = q1[2] - q0[2]
        return m / (2 * h) * (dx * dx + dy * dy) + J / (2 * h) * dphi * dphi

    return DiscreteSystem(L, BAR_CHART, name="bar")


def bar_reduced_closed_form(mu2, nu, m=1.0, J=1.0, h=0.2):
    """Reduced bar on ``tau = (phi, y)`` with the force ``-mu2 nu dy0 + mu2 nu dy1``."""
    c = (mu2 * h / m) ** 2

    def L(t0, t1):
        dphi = t1[0] - t0[0]
        dy = t1[1] - t0[1]
        return m / (2 * h) * (c + dy * dy) + J / (2 * h) * dphi * dphi

    def fm(t0, t1):
        return [0.0 * t0[0], -mu2 * nu + 0.0 * t0[1]]

    def fp(t0, t1):
        return [0.0 * t1[0], mu2 * nu + 0.0 * t1[1]]

    return DiscreteSystem(L, BAR_REDUCED_CHART, fm, fp, name="bar-reduced")


def sextic_potential(alpha=0.1, beta=2.0):
    """``V(r) = alpha r^2 (r^2 - beta)^2`` and its derivative."""

    def V(r):
        s = r * r - beta
        return alpha * r * r * s * s

    def dV(r):
        return 2 * alpha * r * (r * r - beta) * (3 * r * r - beta)

    return V, dV


def central_mp(m=1.0, h=0.2, V=None):
    """Midpoint discretization of the planar central-potential Lagrangian in ``(r, eta)``."""
    if V is None:
        V, _ = sextic_potential()

    def L(q0, q1):
        rb = (q0[0] + q1[0]) / 2
        vr = (q1[0] - q0[0]) / h
        ve = (q1[1] - q0[1]) / h
        return h * (m / 2 * (vr * vr + rb * rb * ve * ve) - V(rb))

    return DiscreteSystem(L, CENTRAL_CHART, name="central-mp")


def central_reduced_mp(mu, m=1.0, h=0.2, V=None):
    """Closed-form reduced midpoint system on ``r`` with its centrifugal force."""
    if V is None:
        V, _ = sextic_potential()
    k = 8 * h * mu * mu / m

    def L(t0, t1):
        s = t0[0] + t1[0]
        vr = (t1[0] - t0[0]) / h
        return h * (m / 2 * (vr * vr + (mu / m) ** 2 * (2 / s) ** 2) - V(s / 2))

    def f(t0, t1):
        s = t0[0] + t1[0]
        return [k / (s * s * s)]

    return DiscreteSystem(L, REDUCED_R_CHART, f, f, name="central-reduced-mp")


def central_gamma(mu, m=1.0, h=0.2):
    """Potential of the reduced midpoint force: ``f = d gamma``."""

    def gamma(t0, t1):
        s = t0[0] + t1[0]
        return -4 * h * mu * mu / (m * s * s)

    return gamma


def central_absorbed_mp(mu, m=1.0, h=0.2, V=None):
    """Unforced system with Lagrangian ``L_reduced + gamma``."""
    red = central_reduced_mp(mu, m, h, V)
    gamma = central_gamma(mu, m, h)

    def L(t0, t1):
        return red.lagrangian(t0, t1) + gamma(t0, t1)

    return DiscreteSystem(L, REDUCED_R_CHART, name="central-absorbed-mp")


def routhian(mu, m=1.0, V=None):
    """Reduced Routhian ``R(r, rdot) = m/2 rdot^2 - V(r) - mu^2/(2 m r^2)``."""
    if V is None:
        V, _ = sextic_potential()

    def R(r, rdot):
        return m / 2 * rdot * rdot - V(r) - mu * mu / (2 * m * r * r)

    return R


def _quadratic(h, m=1.0):
    def L(q0, q1):
        d = q1 - q0
        return m * sum(d * d) / (2 * h)

    return L


def synthetic_routh(c=0.3, h=0.1):
    """``R^2`` system with a non-closed Routh force of potential ``2c dx^dy``."""

    def fm(q0, q1):
        return [-c * q0[1], c * q0[0]]

    def fp(q0, q1):
        return [c * q1[1], -c * q1[0]]

    return DiscreteSystem(_quadratic(h), euclidean(2, "synthetic-R2"), fm, fp,
                          name="synthetic-routh")


def dissipative(kappa=0.5, h=0.1):
    """Linear friction ``f+ = -kappa (q1 - q0) dq1``; not of Routh type."""

    def fp(q0, q1):
        return [-kappa * (q1[i] - q0[i]) for i in range(2)]

    return DiscreteSystem(_quadratic(h), euclidean(2, "synthetic-R2"), None, fp,
                          name="dissipative")


def gradient_force(gamma):
    """Split ``d gamma`` on ``Q x Q`` into its two slot covectors."""
    from . import geometry as geo

    def fm(q0, q1):
        return geo.d1(gamma, q0, q1)

    def fp(q0, q1):
        return geo.d2(gamma, q0, q1)

    return fm, fp


def synthetic_3d(m=1.0, h=0.1, k=1.0):
    """``R^3`` system invariant under translations in ``z``.

    The potential acts on ``(x, y)`` only, evaluated at the midpoint.
    """

    def L(q0, q1):
        d = q1 - q0
        xb = (q0[0] + q1[0]) / 2
        yb = (q0[1] + q1[1]) / 2
        return m * sum(d * d) / (2 * h) - h * k * (xb * xb + 2 * yb * yb + xb * yb) / 2

    return DiscreteSystem(L, Chart("R3", 3, labels=("x", "y", "z")), name="synthetic-3d")


def cubic(h=0.1, c=0.3):
    """``R^2`` system with cubic kinetic term and the synthetic Routh force.

    Its mixed Hessian ``-diag(2 (q1 - q0) / h)`` is singular whenever a
    coordinate does not move, so regularity fails on a hypersurface.
    """

    def L(q0, q1):
        d = q1 - q0
        return sum(d * d * d) / (3 * h)

    r = synthetic_routh(c, h)
    return DiscreteSystem(L, euclidean(2, "cubic-R2"), r.force_minus, r.force_plus, name="cubic")
