"""Forward-mode dual numbers with nesting support.

Each :class:`Dual` carries a ``tag``. When two duals with different tags
meet in an arithmetic operation, the one with the larger tag is treated as
the outer number and the other as a scalar coefficient. Tags are handed out
in increasing order by :func:`new_tag`, so a derivative seeded *inside*
another derivative computation always wraps the outer one. This avoids
perturbation confusion when derivatives are nested (second and third
derivatives of discrete Lagrangians, derivatives through Newton solves).

The elementary functions in this module (``sin``, ``cos``, ...) accept
plain floats, numpy arrays and duals. Duals also expose ``.sin()`` etc. so
that ``numpy.sin`` works on object arrays of duals.
"""

import itertools
import math

import numpy as np

_tags = itertools.count(1)


def new_tag():
    return next(_tags)


class Dual:
    __slots__ = ("re", "du", "tag")

    def __init__(self, re, du=0.0, tag=0):
        self.re = re
        self.du = du
        self.tag = tag

    def __repr__(self):
        return f"Dual({self.re!r}, {self.du!r}, tag={self.tag})"

    def _split(self, other):
        # Returns (a_re, a_du, b_re, b_du, tag) with both operands viewed at
        # the outermost tag.
        if isinstance(other, Dual):
            if other.tag == self.tag:
                return self.re, self.du, other.re, other.du, self.tag
            if other.tag > self.tag:
                return self, 0.0, other.re, other.du, other.tag
        return self.re, self.du, other, 0.0, self.tag

    def __add__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        a, da, b, db, t = self._split(other)
        return Dual(a + b, da + db, t)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        a, da, b, db, t = self._split(other)
        return Dual(a - b, da - db, t)

    def __rsub__(self, other):
        return Dual(other - self.re, -self.du, self.tag)

    def __mul__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        a, da, b, db, t = self._split(other)
        return Dual(a * b, da * b + a * db, t)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        a, da, b, db, t = self._split(other)
        q = a / b
        return Dual(q, (da - q * db) / b, t)

    def __rtruediv__(self, other):
        q = other / self.re
        return Dual(q, -q * self.du / self.re, self.tag)

    def __neg__(self):
        return Dual(-self.re, -self.du, self.tag)

    def __pos__(self):
        return self

    def __pow__(self, p):
        if isinstance(p, Dual):
            return exp(p * log(self))
        if p == 2:
            return self * self
        return Dual(self.re ** p, p * self.re ** (p - 1) * self.du, self.tag)

    def __rpow__(self, base):
        return exp(self * math.log(base))

    def __abs__(self):
        return -self if primal(self) < 0 else self

    # comparisons act on the primal value so that branches in user code see
    # the same path as a float evaluation would
    def __lt__(self, other):
        return primal(self) < primal(other)

    def __le__(self, other):
        return primal(self) <= primal(other)

    def __gt__(self, other):
        return primal(self) > primal(other)

    def __ge__(self, other):
        return primal(self) >= primal(other)

    def __float__(self):
        return float(primal(self))

    def sin(self):
        return Dual(sin(self.re), cos(self.re) * self.du, self.tag)

    def cos(self):
        return Dual(cos(self.re), -sin(self.re) * self.du, self.tag)

    def exp(self):
        e = exp(self.re)
        return Dual(e, e * self.du, self.tag)

    def log(self):
        return Dual(log(self.re), self.du / self.re, self.tag)

    def sqrt(self):
        s = sqrt(self.re)
        return Dual(s, self.du / (2 * s), self.tag)

    def tan(self):
        t = tan(self.re)
        return Dual(t, (1 + t * t) * self.du, self.tag)

    def arctan(self):
        return Dual(atan(self.re), self.du / (1 + self.re * self.re), self.tag)


def primal(x):
    """Strip every dual layer and return the underlying float."""
    while isinstance(x, Dual):
        x = x.re
    return x


def _unary(name, fn):
    def f(x):
        if isinstance(x, Dual):
            return getattr(x, name)()
        if isinstance(x, np.ndarray):
            if x.dtype == object:
                return np.array([f(v) for v in x.ravel()], dtype=object).reshape(x.shape)
            return getattr(np, name)(x)
        return fn(x)

    f.__name__ = name
    return f


sin = _unary("sin", math.sin)
cos = _unary("cos", math.cos)
exp = _unary("exp", math.exp)
log = _unary("log", math.log)
sqrt = _unary("sqrt", math.sqrt)
tan = _unary("tan", math.tan)
atan = _unary("arctan", math.atan)


def _parts(v, tag):
    if isinstance(v, Dual) and v.tag == tag:
        return v.re, v.du
    return v, 0.0


def atan2(y, x):
    if not isinstance(y, Dual) and not isinstance(x, Dual):
        return math.atan2(y, x)
    t = max(v.tag for v in (y, x) if isinstance(v, Dual))
    yr, dy = _parts(y, t)
    xr, dx = _parts(x, t)
    return Dual(atan2(yr, xr), (xr * dy - yr * dx) / (xr * xr + yr * yr), t)


def seed(x, direction, tag):
    """Return ``x + eps * direction`` as an object array of duals."""
    x = np.asarray(x, dtype=object)
    direction = np.asarray(direction)
    out = np.empty(x.shape, dtype=object)
    for i in range(x.size):
        out.flat[i] = Dual(x.flat[i], direction.flat[i], tag)
    return out


def tangent(y, tag):
    """Extract the derivative part of ``y`` w.r.t. the perturbation ``tag``.

    Works element-wise on sequences. Components that do not depend on the
    perturbation yield zero.
    """
    if isinstance(y, Dual):
        return y.du if y.tag == tag else 0.0
    if isinstance(y, (list, tuple, np.ndarray)):
        arr = np.asarray(y, dtype=object)
        out = np.empty(arr.shape, dtype=object)
        for i in range(arr.size):
            out.flat[i] = tangent(arr.flat[i], tag)
        return out
    return 0.0


def value(y, tag):
    """Drop the ``tag`` perturbation from ``y`` (keeping outer ones)."""
    if isinstance(y, Dual):
        return y.re if y.tag == tag else y
    if isinstance(y, (list, tuple, np.ndarray)):
        arr = np.asarray(y, dtype=object)
        out = np.empty(arr.shape, dtype=object)
        for i in range(arr.size):
            out.flat[i] = value(arr.flat[i], tag)
        return out
    return y


def as_float_array(y):
    arr = np.asarray(y, dtype=object)
    return np.array([float(primal(v)) for v in arr.ravel()], dtype=float).reshape(arr.shape)


def is_plain(arr):
    """True if no entry of ``arr`` is a dual."""
    arr = np.asarray(arr, dtype=object)
    return not any(isinstance(v, Dual) for v in arr.ravel())


def derivative(f, x):
    """d f / d x at scalar ``x`` (``f`` may return a scalar or a sequence)."""
    t = new_tag()
    return tangent(f(Dual(x, 1.0, t)), t)


def jacobian(f, x):
    """Jacobian ``J[i, j] = d f_i / d x_j`` by one forward pass per column.

    ``x`` may itself hold duals from an enclosing differentiation; the
    returned entries then carry those outer perturbations.
    """
    x = np.asarray(x, dtype=object)
    n = x.size
    cols = []
    for j in range(n):
        t = new_tag()
        e = np.zeros(n)
        e[j] = 1.0
        y = f(seed(x, e, t))
        cols.append(np.atleast_1d(tangent(y, t)))
    return np.stack(cols, axis=-1)


def gradient(f, x):
    """Gradient of a scalar function; returns an object array of length n."""
    return jacobian(lambda z: [f(z)], x)[0]
