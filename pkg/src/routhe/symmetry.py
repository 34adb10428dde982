"""Group actions, discrete momentum maps and the affine discrete connection.

Two symmetry instances are provided: a one-parameter translation along a
coordinate axis (abelian) and SE(2) acting on the planar bar
configuration space ``(phi, x, y)``.
"""

from dataclasses import dataclass

import numpy as np

from . import dual
from . import geometry as geo
from .dual import cos, sin


class InvarianceViolation(ValueError):
    """The two expressions of the discrete momentum map disagree."""


class NoSolution(RuntimeError):
    """The defining equation of the affine discrete connection has no root."""


class TranslationSymmetry:
    """The group ``R`` acting on ``Q`` by ``q -> q + g e_index``.

    ``connection`` may supply a closed form ``A(q0, q1, mu)`` for the affine
    discrete connection; otherwise it is found by Newton's method.
    """

    lie_dim = 1

    def __init__(self, dim, index, connection=None, name=None):
        self.dim = dim
        self.index = index
        self.closed_connection = connection
        self.name = name or f"translation-{index}"

    def identity(self):
        return np.zeros(1)

    def compose(self, g, h):
        return np.asarray(g) + np.asarray(h)

    def inverse(self, g):
        return -np.asarray(g)

    def act(self, g, q):
        q = np.array(q, dtype=object)
        q[self.index] = q[self.index] + np.asarray(g, dtype=object).ravel()[0]
        return q

    def generators(self, q):
        e = np.zeros((1, self.dim))
        e[0, self.index] = 1.0
        return e

    def coadjoint(self, g, mu):
        return np.asarray(mu)

    # quotient coordinates: drop the group coordinate
    @property
    def quotient_dim(self):
        return self.dim - 1

    def project(self, q):
        q = np.asarray(q)
        return np.delete(q, self.index, axis=-1)

    def lift_base(self, tau):
        tau = np.asarray(tau, dtype=object)
        return np.insert(tau, self.index, 0.0)


class SE2Symmetry:
    """SE(2) with elements ``(alpha, a, b)`` acting on ``(phi, x, y)``."""

    lie_dim = 3
    dim = 3
    name = "SE(2)"

    def identity(self):
        return np.zeros(3)

    def compose(self, g, h):
        al, a, b = g
        be, a2, b2 = h
        return np.array([al + be, a2 * cos(al) - b2 * sin(al) + a,
                         a2 * sin(al) + b2 * cos(al) + b], dtype=object)

    def inverse(self, g):
        al, a, b = g
        return np.array([-al, -(a * cos(al) + b * sin(al)), a * sin(al) - b * cos(al)],
                        dtype=object)

    def act(self, g, q):
        al, a, b = g
        phi, x, y = q
        return np.array([phi + al, x * cos(al) - y * sin(al) + a,
                         x * sin(al) + y * cos(al) + b], dtype=object)

    def generators(self, q):
        phi, x, y = (float(dual.primal(v)) for v in q)
        return np.array([[1.0, -y, x], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])

    def adjoint(self, g):
        """Matrix of ``Ad_g`` in the basis of the Lie algebra."""
        al, a, b = (float(v) for v in g)
        c, s = np.cos(al), np.sin(al)
        return np.array([[1.0, 0.0, 0.0], [b, c, -s], [-a, s, c]])

    def coadjoint(self, g, mu):
        """The covector ``xi -> <mu, Ad_{g^-1} xi>``.

        Writing ``Ad*_g`` for the transpose of ``Ad_g`` this is
        ``Ad*_{g^-1} mu``, the action under which the momentum map is
        equivariant: ``J(g q0, g q1) = coadjoint(g, J(q0, q1))``.
        """
        al, a, b = (float(v) for v in g)
        m1, m2, m3 = mu
        c, s = np.cos(al), np.sin(al)
        return np.array([m1 + m2 * (a * s - b * c) + m3 * (a * c + b * s),
                         m2 * c - m3 * s, m2 * s + m3 * c])

    def isotropy(self, mu, tol=1e-14):
        """``G_mu`` for ``mu = (mu1, mu2, 0)``, ``mu2 != 0``: translations in ``x``.

        Returns the translation symmetry and the pairing value ``mu2``.
        """
        m1, m2, m3 = mu
        if abs(m3) > tol or abs(m2) <= tol:
            raise NotImplementedError("only mu = (mu1, mu2, 0) with mu2 != 0 is supported")
        return TranslationSymmetry(3, 1, name="SE(2)_mu"), float(m2)


def momentum(sys, setup, q0, q1, tol=1e-8):
    """Discrete momentum map ``J_d(q0, q1)`` as a vector of length ``lie_dim``.

    Computed as ``D2 L_d(q0, q1) xi_Q(q1)`` and checked against
    ``-D1 L_d(q0, q1) xi_Q(q0)``.
    """
    q0 = np.asarray(q0, float)
    q1 = np.asarray(q1, float)
    p1 = geo.to_float(geo.d2(sys.lagrangian, q0, q1))
    p0 = geo.to_float(geo.d1(sys.lagrangian, q0, q1))
    jp = setup.generators(q1) @ p1
    jm = -(setup.generators(q0) @ p0)
    gap = float(np.max(np.abs(jp - jm)))
    if gap > tol * max(1.0, float(np.max(np.abs(jp)))):
        raise InvarianceViolation(f"D2 and -D1 momentum expressions differ by {gap:.3e}")
    return jp


def check_equivariance(sys, setup, samples):
    """Max of ``|J(g q0, g q1) - Ad*_{g^-1} J(q0, q1)|`` over samples ``(g, q0, q1)``.

    ``setup.coadjoint(g, mu)`` must return ``Ad*_{g^-1} mu``.
    """
    worst = 0.0
    for g, q0, q1 in samples:
        lhs = momentum(sys, setup, geo.to_float(setup.act(g, q0)),
                       geo.to_float(setup.act(g, q1)), tol=np.inf)
        rhs = setup.coadjoint(g, momentum(sys, setup, q0, q1, tol=np.inf))
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def _mu_momentum(sys, setup, q0, q1):
    """``J_mu`` for a one-parameter translation group, dual-number friendly."""
    return geo.d2(sys.lagrangian, q0, q1)[setup.index]


def connection_A_mu(sys, setup, mu, q0, q1, tol=1e-13, max_iter=50):
    """The affine discrete connection of ``J_mu`` for a translation group.

    Returns the scalar ``g`` with ``J_mu(q0, q1 - g e_index) = mu``. Inputs may
    carry dual numbers; the Newton iteration is then continued in dual
    arithmetic for a few extra steps so derivatives are exact.
    """
    if setup.closed_connection is not None:
        return setup.closed_connection(q0, q1, mu)
    q0 = np.asarray(q0, dtype=object)
    q1 = np.asarray(q1, dtype=object)

    def F(g):
        return _mu_momentum(sys, setup, q0, setup.act(-g, q1)) - mu

    g = 0.0
    for it in range(max_iter):
        fg = F(g)
        dfg = dual.derivative(F, g)
        if dual.primal(dfg) == 0:
            raise NoSolution("J_mu is flat along the group orbit (not G_mu-regular)")
        g = g - fg / dfg
        if abs(dual.primal(fg)) <= tol * max(1.0, abs(dual.primal(mu))):
            break
    else:
        raise NoSolution(f"Newton for the discrete connection did not converge ({dual.primal(fg):.3e})")
    # dual parts double their order of accuracy per step
    if not dual.is_plain([g, *q0, *q1]):
        for _ in range(4):
            g = g - F(g) / dual.derivative(F, g)
    return g


def bar_connection(m, h):
    """Closed form ``A_mu(q0, q1) = x1 - x0 - mu h / m`` for the bar."""

    def A(q0, q1, mu):
        return q1[1] - q0[1] - mu * h / m

    return A


def central_connection(m, h):
    """Closed form for the midpoint central-potential system."""

    def A(q0, q1, mu):
        rb = (q0[0] + q1[0]) / 2
        return q1[1] - q0[1] - mu * h / (m * rb * rb)

    return A


@dataclass
class PrincipalConnection:
    """A principal connection on ``Q -> Q/R`` for a translation group.

    ``form(q)`` returns the coefficients of the connection 1-form, normalized
    so that its value on the generator is one.
    """

    setup: TranslationSymmetry
    form: object
    name: str = ""

    def __call__(self, q, dq):
        return sum(a * b for a, b in zip(self.form(q), dq))

    def mu_form(self, mu):
        return lambda q: mu * np.asarray(geo.to_float(self.form(q)))


def horizontal_lift(conn, q, delta_tau):
    """The horizontal vector at ``q`` projecting onto ``delta_tau``."""
    c = conn.setup.index
    A = conn.form(q)
    dq = conn.setup.lift_base(delta_tau)
    s = 0.0
    for j in range(len(dq)):
        if j != c:
            s = s + A[j] * dq[j]
    dq[c] = -s / A[c]
    return dq


def bar_principal(setup, nu):
    return PrincipalConnection(setup, lambda q: [0.0, 1.0, -nu], name=f"bar(nu={nu})")


def central_principal(setup):
    return PrincipalConnection(setup, lambda q: [0.0, 1.0], name="d eta")


def twisted_principal(setup):
    """``dz + x dy`` on ``R^3``; its curvature ``dx ^ dy`` is nonzero."""
    return PrincipalConnection(setup, lambda q: [0.0 * q[0], q[0], 1.0], name="dz + x dy")


def isotropy_grid(setup, mu, grid, tol=1e-12):
    """Elements of ``grid`` fixed by the coadjoint action on ``mu``."""
    return [g for g in grid if np.max(np.abs(setup.coadjoint(g, mu) - np.asarray(mu))) <= tol]


def mu_good_probe(sys, setup, mu, q, grid):
    """Count sign changes of ``J_mu(q, g q) - mu`` over a grid of group coordinates.

    A single sign change supports (but cannot prove) uniqueness of the
    group element required by the mu-good condition.
    """
    vals = []
    for g in grid:
        qq = geo.to_float(setup.act([g], q))
        vals.append(float(geo.to_float(geo.d2(sys.lagrangian, q, qq))[setup.index]) - mu)
    vals = np.array(vals)
    return int(np.sum(np.sign(vals[1:]) != np.sign(vals[:-1])))
