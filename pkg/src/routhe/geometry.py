"""Charts, derivative operators on Q x Q and small dense linear algebra.

Points of ``Q`` are plain coordinate vectors in a single chart. The partial
derivative operators ``d1``/``d2`` act on functions ``F(q0, q1)`` and are
computed by forward-mode dual numbers; :func:`fd_d1`/:func:`fd_d2` are the
central-difference cross-check backend.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import dual

COND_LIMIT = 1e12


class ChartDomainError(ValueError):
    """A point (or a finite-difference probe) left the chart domain."""


class SingularMatrixError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class Chart:
    """A coordinate chart of dimension ``dim``.

    ``positive`` lists coordinates constrained to be > 0 (radii);
    ``angles`` lists coordinates that are angles stored unwrapped on the
    covering space, so differences ``q1 - q0`` need no branch handling.
    """

    name: str
    dim: int
    positive: tuple = ()
    angles: tuple = ()
    labels: tuple = field(default=())

    def check(self, q, what="point"):
        q = np.asarray(q)
        if q.shape != (self.dim,):
            raise ChartDomainError(
                f"{what} has shape {q.shape}, chart {self.name!r} expects ({self.dim},)"
            )
        for i in self.positive:
            if not dual.primal(q[i]) > 0:
                raise ChartDomainError(
                    f"{what} leaves chart {self.name!r}: coordinate {i} = {dual.primal(q[i])!r} <= 0"
                )
        return q


def euclidean(dim, name=None):
    return Chart(name or f"R{dim}", dim)


def _column(values, n):
    out = np.atleast_1d(np.asarray(values, dtype=object))
    if out.shape != (n,):
        raise ValueError(f"expected {n} components, got shape {out.shape}")
    return out


def d1(F, q0, q1):
    """Covector ``dF/dq0`` at ``(q0, q1)``."""
    q1 = np.asarray(q1, dtype=object)
    return dual.gradient(lambda z: F(z, q1), q0)


def d2(F, q0, q1):
    """Covector ``dF/dq1`` at ``(q0, q1)``."""
    q0 = np.asarray(q0, dtype=object)
    return dual.gradient(lambda z: F(q0, z), q1)


def d1d2(F, q0, q1):
    """Mixed second derivative with entry ``(i, j) = d^2 F / dq0^j dq1^i``.

    This is the layout of the regularity matrix: row index on the ``q1``
    slot, column index on the ``q0`` slot.
    """
    q1 = np.asarray(q1, dtype=object)
    return dual.jacobian(lambda z: d2(F, z, q1), q0)


def d2d1(F, q0, q1):
    """Entry ``(i, j) = d^2 F / dq1^j dq0^i``; equals ``d1d2(F).T``."""
    q0 = np.asarray(q0, dtype=object)
    return dual.jacobian(lambda z: d1(F, q0, z), q1)


def jac1(G, q0, q1):
    """Jacobian of a vector field ``G(q0, q1)`` w.r.t. ``q0``: ``[i, j] = dG_i/dq0^j``."""
    q1 = np.asarray(q1, dtype=object)
    return dual.jacobian(lambda z: G(z, q1), q0)


def jac2(G, q0, q1):
    q0 = np.asarray(q0, dtype=object)
    return dual.jacobian(lambda z: G(q0, z), q1)


def to_float(a):
    return dual.as_float_array(a)


# -- finite-difference backend --------------------------------------------

def fd_step(x):
    return np.finfo(float).eps ** (1 / 3) * max(1.0, abs(x))


def fd_gradient(f, x, step=None, chart=None):
    """Central-difference gradient of scalar ``f`` at float vector ``x``."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        hi = fd_step(x[i]) if step is None else step
        xp, xm = x.copy(), x.copy()
        xp[i] += hi
        xm[i] -= hi
        if chart is not None:
            chart.check(xp, f"probe +e{i}")
            chart.check(xm, f"probe -e{i}")
        g[i] = (f(xp) - f(xm)) / (2 * hi)
    return g


def fd_jacobian(f, x, step=None):
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        hi = fd_step(x[i]) if step is None else step
        xp, xm = x.copy(), x.copy()
        xp[i] += hi
        xm[i] -= hi
        cols.append((np.asarray(f(xp), float) - np.asarray(f(xm), float)) / (2 * hi))
    return np.stack(cols, axis=-1)


def fd_d1(F, q0, q1, step=None, chart=None):
    q1 = np.asarray(q1, float)
    return fd_gradient(lambda z: F(z, q1), q0, step, chart)


def fd_d2(F, q0, q1, step=None, chart=None):
    q0 = np.asarray(q0, float)
    return fd_gradient(lambda z: F(q0, z), q1, step, chart)


# -- linear algebra ---------------------------------------------------------

def condition(A):
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.linalg.cond(A)
    return c if np.isfinite(c) else np.inf


def is_nonsingular(A, cond_limit=COND_LIMIT):
    return condition(A) <= cond_limit


def solve(A, b, cond_limit=COND_LIMIT):
    """Solve ``A x = b`` by LU with partial pivoting, refusing ill-conditioned ``A``."""
    A = np.asarray(A, dtype=float)
    c = condition(A)
    if c > cond_limit:
        raise SingularMatrixError(f"matrix condition estimate {c:.3e} exceeds {cond_limit:.0e}")
    lu, piv = scipy.linalg.lu_factor(A)
    return scipy.linalg.lu_solve((lu, piv), np.asarray(b, dtype=float))
