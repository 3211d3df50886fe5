"""Scalar math kernel: curvature-labeled trigonometry and forward-mode duals.

The whole library works on a 6-dimensional phase space, so the dual scalar
``KScalar`` carries exactly six partial derivatives and one evaluation yields
a full gradient.  All elementary functions below accept either a plain float
or a ``KScalar`` and propagate derivatives through the chain rule.

Curvature-labeled trigonometry: for a real label ``kappa``,

    ckappa(kappa, x) = cos(sqrt(kappa) x)          kappa > 0
                     = 1                           kappa = 0
                     = cosh(sqrt(-kappa) x)        kappa < 0

and ``skappa`` is the matching sine with ``skappa -> x`` in the flat limit.
Both are analytic in ``kappa`` (they are even series in ``sqrt(kappa) x``),
which is what lets a single real-valued code path cover spherical, flat and
hyperbolic/Lorentzian cases without complex arithmetic.
"""

from __future__ import annotations

import math

import numpy as np

NVARS = 6

# Taylor-branch thresholds for removable singularities.  Below these the
# direct formulas would divide nearly-cancelling quantities in the derivative
# channel; the truncated series is exact to well below double precision.
_KTRIG_TAYLOR = 1e-8     # on u = kappa * x**2
_SINHC_TAYLOR = 1e-5     # on u = z * q**2
_EXPM1C_TAYLOR = 1e-5


class KernelError(Exception):
    """Base class for kernel-level numerical errors."""


class PoleError(KernelError, ZeroDivisionError):
    """A trig ratio was evaluated at a pole (coordinate chart breakdown)."""


class DomainError(KernelError, ValueError):
    """An argument left the mathematical domain of an operation."""


_ZEROS = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


class KScalar:
    """A scalar with six exact phase-space partials (forward-mode dual).

    ``val`` is the value, ``d`` a 6-tuple of partials with respect to the
    phase-space slots (q1, q2, q3, p1, p2, p3) or their chart equivalents.
    Arithmetic follows the product/quotient/chain rules exactly.
    """

    __slots__ = ("val", "d")

    def __init__(self, val, d=_ZEROS):
        self.val = val
        self.d = d

    @staticmethod
    def seed(val, slot):
        d = [0.0] * NVARS
        d[slot] = 1.0
        return KScalar(val, tuple(d))

    # -- arithmetic -------------------------------------------------------
    def __add__(self, o):
        if isinstance(o, KScalar):
            a, b = self.d, o.d
            return KScalar(self.val + o.val,
                           (a[0] + b[0], a[1] + b[1], a[2] + b[2],
                            a[3] + b[3], a[4] + b[4], a[5] + b[5]))
        return KScalar(self.val + o, self.d)

    __radd__ = __add__

    def __neg__(self):
        a = self.d
        return KScalar(-self.val, (-a[0], -a[1], -a[2], -a[3], -a[4], -a[5]))

    def __sub__(self, o):
        if isinstance(o, KScalar):
            a, b = self.d, o.d
            return KScalar(self.val - o.val,
                           (a[0] - b[0], a[1] - b[1], a[2] - b[2],
                            a[3] - b[3], a[4] - b[4], a[5] - b[5]))
        return KScalar(self.val - o, self.d)

    def __rsub__(self, o):
        a = self.d
        return KScalar(o - self.val, (-a[0], -a[1], -a[2], -a[3], -a[4], -a[5]))

    def __mul__(self, o):
        a = self.d
        if isinstance(o, KScalar):
            b = o.d
            u, v = self.val, o.val
            return KScalar(u * v,
                           (v * a[0] + u * b[0], v * a[1] + u * b[1],
                            v * a[2] + u * b[2], v * a[3] + u * b[3],
                            v * a[4] + u * b[4], v * a[5] + u * b[5]))
        return KScalar(self.val * o, (o * a[0], o * a[1], o * a[2],
                                      o * a[3], o * a[4], o * a[5]))

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, KScalar):
            a, b = self.d, o.d
            u, v = self.val, o.val
            w = 1.0 / v
            c = -u * w * w
            return KScalar(u * w,
                           (w * a[0] + c * b[0], w * a[1] + c * b[1],
                            w * a[2] + c * b[2], w * a[3] + c * b[3],
                            w * a[4] + c * b[4], w * a[5] + c * b[5]))
        return self * (1.0 / o)

    def __rtruediv__(self, o):
        a = self.d
        u = self.val
        c = -o / (u * u)
        return KScalar(o / u, (c * a[0], c * a[1], c * a[2],
                               c * a[3], c * a[4], c * a[5]))

    def __pow__(self, n):
        u = self.val
        c = n * u ** (n - 1)
        a = self.d
        return KScalar(u ** n, (c * a[0], c * a[1], c * a[2],
                                c * a[3], c * a[4], c * a[5]))

    # -- comparisons act on the value part --------------------------------
    def __lt__(self, o):
        return self.val < (o.val if isinstance(o, KScalar) else o)

    def __le__(self, o):
        return self.val <= (o.val if isinstance(o, KScalar) else o)

    def __gt__(self, o):
        return self.val > (o.val if isinstance(o, KScalar) else o)

    def __ge__(self, o):
        return self.val >= (o.val if isinstance(o, KScalar) else o)

    def __abs__(self):
        return -self if self.val < 0 else self

    def __repr__(self):
        return f"KScalar({self.val!r}, d={self.d!r})"


def _chain(x, val, dval):
    a = x.d
    return KScalar(val, (dval * a[0], dval * a[1], dval * a[2],
                         dval * a[3], dval * a[4], dval * a[5]))


def value_of(x):
    return x.val if isinstance(x, KScalar) else x


# -- elementary functions (float | KScalar) -------------------------------

def exp(x):
    if isinstance(x, KScalar):
        v = math.exp(x.val)
        return _chain(x, v, v)
    return math.exp(x)


def log(x):
    if isinstance(x, KScalar):
        return _chain(x, math.log(x.val), 1.0 / x.val)
    return math.log(x)


def sqrt(x):
    if isinstance(x, KScalar):
        v = math.sqrt(x.val)
        return _chain(x, v, 0.5 / v)
    return math.sqrt(x)


def sin(x):
    if isinstance(x, KScalar):
        return _chain(x, math.sin(x.val), math.cos(x.val))
    return math.sin(x)


def cos(x):
    if isinstance(x, KScalar):
        return _chain(x, math.cos(x.val), -math.sin(x.val))
    return math.cos(x)


def sinh(x):
    if isinstance(x, KScalar):
        return _chain(x, math.sinh(x.val), math.cosh(x.val))
    return math.sinh(x)


def cosh(x):
    if isinstance(x, KScalar):
        return _chain(x, math.cosh(x.val), math.sinh(x.val))
    return math.cosh(x)


def arcsin(x):
    if isinstance(x, KScalar):
        return _chain(x, math.asin(x.val), 1.0 / math.sqrt(1.0 - x.val * x.val))
    return math.asin(x)


def arcsinh(x):
    if isinstance(x, KScalar):
        return _chain(x, math.asinh(x.val), 1.0 / math.sqrt(1.0 + x.val * x.val))
    return math.asinh(x)


def arctan(x):
    if isinstance(x, KScalar):
        return _chain(x, math.atan(x.val), 1.0 / (1.0 + x.val * x.val))
    return math.atan(x)


def arctanh(x):
    if isinstance(x, KScalar):
        return _chain(x, math.atanh(x.val), 1.0 / (1.0 - x.val * x.val))
    return math.atanh(x)


def sinhc(u):
    """sinh(u)/u with its removable singularity at u = 0 handled."""
    if abs(value_of(u)) < _SINHC_TAYLOR:
        u2 = u * u
        return 1.0 + u2 * (1.0 / 6.0) + u2 * u2 * (1.0 / 120.0)
    return sinh(u) / u


def expm1c(u):
    """(exp(u) - 1)/u with its removable singularity at u = 0 handled."""
    v = value_of(u)
    if abs(v) < _EXPM1C_TAYLOR:
        return 1.0 + u * (0.5 + u * (1.0 / 6.0 + u * (1.0 / 24.0 + u / 120.0)))
    if isinstance(u, KScalar):
        return (exp(u) - 1.0) / u
    return math.expm1(u) / u


def log1pc(u):
    """log(1 + u)/u with its removable singularity at u = 0 handled."""
    v = value_of(u)
    if abs(v) < _EXPM1C_TAYLOR:
        return 1.0 + u * (-0.5 + u * (1.0 / 3.0 + u * (-0.25 + u / 5.0)))
    if isinstance(u, KScalar):
        return log(1.0 + u) / u
    return math.log1p(v) / v


def _circ_cos(u):
    """cos(sqrt(u)) continued evenly to u < 0 (= cosh(sqrt(-u)))."""
    v = value_of(u)
    if abs(v) < _KTRIG_TAYLOR:
        return 1.0 + u * (-0.5 + u * (1.0 / 24.0 - u / 720.0))
    if v > 0.0:
        return cos(sqrt(u))
    return cosh(sqrt(-u))


def _circ_sinc(u):
    """sin(sqrt(u))/sqrt(u) continued evenly to u < 0."""
    v = value_of(u)
    if abs(v) < _KTRIG_TAYLOR:
        return 1.0 + u * (-1.0 / 6.0 + u * (1.0 / 120.0 - u / 5040.0))
    if v > 0.0:
        s = sqrt(u)
        return sin(s) / s
    s = sqrt(-u)
    return sinh(s) / s


def ckappa(kappa, x):
    """Generalized cosine C_kappa(x); total in both arguments."""
    return _circ_cos(kappa * x * x)


def skappa(kappa, x):
    """Generalized sine S_kappa(x); S_0(x) = x."""
    return x * _circ_sinc(kappa * x * x)


# A trig factor below this is indistinguishable from an exact pole in
# doubles (cos(pi/2) evaluates to ~6e-17); treat it as chart breakdown.
_POLE_EPS = 1e-14


def tkappa(kappa, x):
    """Generalized tangent S_kappa/C_kappa; raises PoleError at C = 0."""
    c = ckappa(kappa, x)
    if abs(value_of(c)) < _POLE_EPS:
        raise PoleError(f"tkappa pole: C_kappa vanishes at kappa={kappa}, x={x}")
    return skappa(kappa, x) / c


def cotkappa(kappa, x):
    """Generalized cotangent C_kappa/S_kappa; raises PoleError at S = 0.

    This is the factor written as lambda/tan(lambda x) in curved-Kepler
    potentials; it stays real for every real curvature label.
    """
    s = skappa(kappa, x)
    if abs(value_of(s)) < _POLE_EPS:
        raise PoleError(f"cotkappa pole: S_kappa vanishes at kappa={kappa}, x={x}")
    return ckappa(kappa, x) / s


# -- inverse maps (plain floats only; used by chart transforms) ------------

def asink(kappa, s):
    """Inverse of skappa in x: returns x with S_kappa(x) = s, x >= 0 branch."""
    u = kappa * s * s
    if abs(u) < _KTRIG_TAYLOR:
        return s * (1.0 + u / 6.0 + 3.0 * u * u / 40.0)
    if kappa > 0.0:
        arg = math.sqrt(kappa) * s
        if abs(arg) > 1.0:
            raise DomainError(f"asink: |sqrt(kappa) s| = {arg} > 1")
        return math.asin(arg) / math.sqrt(kappa)
    return math.asinh(math.sqrt(-kappa) * s) / math.sqrt(-kappa)


def atank(kappa, t):
    """Inverse of tkappa in x: returns x with T_kappa(x) = t."""
    u = kappa * t * t
    if abs(u) < _KTRIG_TAYLOR:
        return t * (1.0 - u / 3.0 + u * u / 5.0)
    if kappa > 0.0:
        return math.atan(math.sqrt(kappa) * t) / math.sqrt(kappa)
    arg = math.sqrt(-kappa) * t
    if abs(arg) >= 1.0:
        raise DomainError(f"atank: |sqrt(-kappa) t| = {arg} >= 1")
    return math.atanh(arg) / math.sqrt(-kappa)


class KappaLabel:
    """A real curvature label with its trig pair bundled for convenience."""

    __slots__ = ("kappa",)

    def __init__(self, kappa):
        self.kappa = float(kappa)

    def c(self, x):
        return ckappa(self.kappa, x)

    def s(self, x):
        return skappa(self.kappa, x)

    def t(self, x):
        return tkappa(self.kappa, x)

    def __repr__(self):
        return f"KappaLabel({self.kappa})"
