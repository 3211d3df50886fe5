"""Hamiltonian families on 3D curved spaces, charts, metrics and curvature.

Charts
------
BELTRAMI          (q1, q2, q3):  the chart where the many-body coalgebra
                  realization lives; restricted to the open positive octant.
POLAR_VARIABLE    (rho, theta, phi): geodesic-polar-like chart of the
                  variable-curvature spaces.
POLAR_CONSTANT    (r, theta, phi): geodesic polar chart of the constant-
                  curvature spaces, reached from POLAR_VARIABLE through the
                  radial map  C_z(r) * C_{-z}(rho) = 1.

Normalization
-------------
Every named family is normalized so that H = (1/2) g^{ij} p_i p_j + V with
g the chart metric returned by :func:`metric` (which keeps the overall
factor 2 of the Beltrami-chart line element).  In the flat limit z -> 0 the
constant-curvature Kepler family becomes the textbook  H = p^2/2 - k/r  in
polar coordinates.  The Beltrami-chart expressions are the exact canonical
pullbacks of the polar ones; relative to the raw coalgebra family
Hcal = J+ f(zJ-)/2 + U(zJ-) the kinetic part therefore carries a factor
1/4 (see the chart transform) while the Kepler potential enters as 2U.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import kernel
from .coalgebra import three_site_closed_form
from .kernel import DomainError, KScalar
from .phase import (Chart, ChartMismatchError, ChartSingularityError,
                    Observable, PhaseState, ckappa, coordinate, cotkappa,
                    exp, expm1c, skappa, sqrt)

__all__ = [
    "SpaceParams", "PRESETS", "Family", "HamiltonianSpec", "hamiltonian",
    "to_polar", "from_polar", "metric", "curvature", "CurvatureResult",
    "radial_reduction", "RadialSystem", "chart_guard",
]

# (kappa1, kappa2) signs of the six constant-curvature spaces.
PRESETS = {
    "spherical": (1.0, 1.0),
    "euclidean": (0.0, 1.0),
    "hyperbolic": (-1.0, 1.0),
    "antidesitter": (1.0, -1.0),
    "minkowski": (0.0, -1.0),
    "desitter": (-1.0, -1.0),
}


@dataclass(frozen=True)
class SpaceParams:
    """Deformation z (= kappa1), signature label kappa2, Kepler coupling gamma."""

    z: float
    kappa2: float
    gamma: float = 0.0

    def __post_init__(self):
        if self.kappa2 == 0.0:
            raise DomainError("kappa2 = 0 is a degenerate (non-relativistic) "
                              "metric and is not supported")

    @property
    def kappa1(self):
        return self.z

    @property
    def k(self):
        """Kepler coupling of the polar-chart potential, k = 2 sqrt(2) gamma."""
        return 2.0 * math.sqrt(2.0) * self.gamma

    @classmethod
    def preset(cls, name, gamma=0.0):
        try:
            kappa1, kappa2 = PRESETS[name]
        except KeyError:
            raise DomainError(f"unknown preset {name!r}; "
                              f"choose from {sorted(PRESETS)}") from None
        return cls(z=kappa1, kappa2=kappa2, gamma=gamma)


class Family(enum.Enum):
    FREE_NC = "free-nc"
    FREE_CC = "free-cc"
    KEPLER_NC = "kepler-nc"
    KEPLER_CC = "kepler-cc"
    CUSTOM = "custom"


_NC_FAMILIES = (Family.FREE_NC, Family.KEPLER_NC)
_CC_FAMILIES = (Family.FREE_CC, Family.KEPLER_CC)


@dataclass(frozen=True)
class HamiltonianSpec:
    """A Hamiltonian family selection with its space parameters.

    For ``Family.CUSTOM``, ``f`` is a scalar function of u = z J- with
    f(u) -> 1 as u -> 0 and ``potential`` a function (z, jminus) whose z -> 0
    limit is -gamma/sqrt(jminus); both limits are checked numerically.
    """

    family: Family
    params: SpaceParams
    f: object = None
    potential: object = None

    def __post_init__(self):
        if self.family is Family.CUSTOM:
            if self.f is None or self.potential is None:
                raise DomainError("custom family needs both f and potential")
            for jm in (0.5, 1.7, 3.2):
                if abs(self.f(1e-10 * jm) - 1.0) > 1e-8:
                    raise DomainError("custom f does not tend to 1 as z -> 0")
                want = -self.params.gamma / math.sqrt(jm)
                got = self.potential(1e-10, jm)
                if abs(got - want) > 1e-8 * max(1.0, abs(want)):
                    raise DomainError("custom potential does not tend to "
                                      "-gamma/sqrt(q^2) as z -> 0")

    def compatible_charts(self):
        if self.family in _NC_FAMILIES:
            return (Chart.BELTRAMI, Chart.POLAR_VARIABLE)
        if self.family in _CC_FAMILIES:
            return (Chart.BELTRAMI, Chart.POLAR_CONSTANT)
        return (Chart.BELTRAMI,)


def _check_chart(spec, chart):
    if chart not in spec.compatible_charts():
        raise ChartMismatchError(
            f"{spec.family.value} is not defined on chart {chart.value}")


# Polar coordinate observables (names only; slots are positional).
_RAD = coordinate(0, "r")
_TH = coordinate(1, "theta")
_PH = coordinate(2, "phi")
_PRAD = coordinate(3, "p_r")
_PTH = coordinate(4, "p_theta")
_PPH = coordinate(5, "p_phi")


def _beltrami_kepler_potential(params):
    """2 U(zJ-): pullback of the polar Kepler terms to the Beltrami chart."""
    z, gamma = params.z, params.gamma
    r3 = three_site_closed_form(z)
    jm = r3.jminus
    return -2.0 * gamma / sqrt(jm * expm1c(2.0 * z * jm))


def hamiltonian(spec, chart):
    """The family Hamiltonian as an observable on the requested chart."""
    _check_chart(spec, chart)
    params = spec.params
    z, kappa2, k = params.z, params.kappa2, params.k

    if chart is Chart.BELTRAMI:
        r3 = three_site_closed_form(z)
        jm, jp = r3.jminus, r3.jplus
        if spec.family is Family.CUSTOM:
            f, pot = spec.f, spec.potential
            fn_f = Observable(lambda *s: f((z * jm).fn(*s)))
            fn_u = Observable(lambda *s: pot(z, jm.fn(*s)))
            h = jp * fn_f + 2.0 * fn_u
        elif spec.family is Family.FREE_NC:
            h = 0.25 * jp
        elif spec.family is Family.FREE_CC:
            h = 0.25 * jp * exp(z * jm)
        elif spec.family is Family.KEPLER_NC:
            h = 0.25 * jp + exp(2.0 * z * jm) * _beltrami_kepler_potential(params)
        else:  # KEPLER_CC
            h = 0.25 * jp * exp(z * jm) + _beltrami_kepler_potential(params)
        return h.renamed(f"H[{spec.family.value}]").with_chart(Chart.BELTRAMI)

    s2 = skappa(kappa2, _TH)
    angular = _PTH * _PTH + _PPH * _PPH / (s2 * s2)
    if chart is Chart.POLAR_VARIABLE:
        cm = ckappa(-z, _RAD)
        sm = skappa(-z, _RAD)
        h = 0.5 * cm * (_PRAD * _PRAD + angular / (kappa2 * sm * sm))
        if spec.family is Family.KEPLER_NC:
            h = h - k * cm * cm / sm
    else:  # POLAR_CONSTANT
        sz = skappa(z, _RAD)
        h = 0.5 * (_PRAD * _PRAD + angular / (kappa2 * sz * sz))
        if spec.family is Family.KEPLER_CC:
            h = h - k * cotkappa(z, _RAD)
    return h.renamed(f"H[{spec.family.value}]").with_chart(chart)


# --------------------------------------------------------------------------
# Chart transforms
# --------------------------------------------------------------------------

_AXIS_EPS = 1e-8


def _require_bridge(params):
    if params.kappa2 <= 0.0:
        raise DomainError("the Beltrami chart only exists for kappa2 > 0 "
                          "(the squared-coordinate chart equations have no "
                          "real solution for Lorentzian signature)")


def _beltrami_positions(kind, c, params):
    """Positions (q1, q2, q3) from polar positions; generic arithmetic.

    ``kind`` is the source chart; ``c`` the three polar positions (floats or
    duals).  Uses log1p-stable forms so z = 0 and small z are exact.
    """
    z, kappa2 = params.z, params.kappa2
    rad, th, ph = c
    if kind is Chart.POLAR_CONSTANT:
        s = kernel.tkappa(z, rad)      # S_{-z}(rho) = T_z(r)
    else:
        s = kernel.skappa(-z, rad)
    s2t = kernel.skappa(kappa2, th)
    c2t = kernel.ckappa(kappa2, th)
    sp, cp = kernel.sin(ph), kernel.cos(ph)
    base = s * s * kappa2 * s2t * s2t          # sinh^2(l1 rho) sin^2(l2 th) / z
    w12 = z * base
    w1 = w12 * sp * sp
    q1sq = 0.5 * base * sp * sp * kernel.log1pc(w1)
    w2 = w12 * cp * cp / (1.0 + w1)
    q2sq = 0.5 * base * cp * cp / (1.0 + w1) * kernel.log1pc(w2)
    base3 = s * s * c2t * c2t
    w3 = z * base3 / (1.0 + w12)
    q3sq = 0.5 * base3 / (1.0 + w12) * kernel.log1pc(w3)
    return kernel.sqrt(q1sq), kernel.sqrt(q2sq), kernel.sqrt(q3sq)


def _position_jacobian(kind, pos, params):
    """d q_i / d polar_a, exactly, by dual-number differentiation."""
    duals = [KScalar.seed(float(pos[a]), a) for a in range(3)]
    out = _beltrami_positions(kind, duals, params)
    jac = np.empty((3, 3))
    for i in range(3):
        jac[i, :] = out[i].d[:3]
    return jac


def to_polar(state, params, target):
    """Canonical transform of a Beltrami-chart state into a polar chart.

    Positions follow the squared-coordinate chart equations; momenta follow
    the exact point-transformation rule with the Jacobian of the inverse
    position map differentiated by dual numbers.
    """
    if state.chart is not Chart.BELTRAMI:
        raise ChartMismatchError("to_polar expects a Beltrami-chart state")
    if target not in (Chart.POLAR_VARIABLE, Chart.POLAR_CONSTANT):
        raise ChartMismatchError("target must be a polar chart")
    _require_bridge(params)
    z, kappa2 = params.z, params.kappa2
    q = np.asarray(state.positions)
    p = np.asarray(state.momenta)
    if np.any(q <= 0.0):
        raise DomainError("Beltrami chart is restricted to the open positive "
                          "octant (q_i > 0); integrate in a polar chart to "
                          "cross coordinate planes")
    qq = float(q @ q)
    if qq < _AXIS_EPS ** 2:
        raise ChartSingularityError("origin maps to the polar pole (rho = 0)")
    if q[0] ** 2 + q[1] ** 2 < _AXIS_EPS ** 2:
        raise ChartSingularityError("point on the polar axis (sin(l2 theta)=0)")

    # S_{-z}(rho)^2 = 2 q^2 expm1c(2 z q^2); stable for every real z.
    e_all = kernel.expm1c(2.0 * z * qq)
    s_rho = math.sqrt(2.0 * qq * e_all)
    rad = kernel.asink(-z, s_rho) if target is Chart.POLAR_VARIABLE \
        else kernel.atank(z, s_rho)

    # C_{k2}(theta)^2 = e^{2z(q1^2+q2^2)} q3^2 expm1c(2 z q3^2) / (q^2 expm1c(2 z q^2))
    c2v = (math.exp(2.0 * z * (q[0] ** 2 + q[1] ** 2)) * q[2] ** 2
           * kernel.expm1c(2.0 * z * q[2] ** 2) / (qq * e_all))
    c2v = min(max(c2v, 0.0), 1.0)
    th = math.atan2(math.sqrt(1.0 - c2v), math.sqrt(c2v)) / math.sqrt(kappa2)

    a1 = q[0] ** 2 * kernel.expm1c(2.0 * z * q[0] ** 2)
    a2 = math.exp(2.0 * z * q[0] ** 2) * q[1] ** 2 * kernel.expm1c(2.0 * z * q[1] ** 2)
    ph = math.atan2(math.sqrt(a1), math.sqrt(a2))

    pos = (rad, th, ph)
    jac = _position_jacobian(target, pos, params)
    pol_momenta = jac.T @ p
    return PhaseState(target, pos + tuple(pol_momenta))


def from_polar(state, params):
    """Inverse of :func:`to_polar`; lands in the open positive octant."""
    if state.chart not in (Chart.POLAR_VARIABLE, Chart.POLAR_CONSTANT):
        raise ChartMismatchError("from_polar expects a polar-chart state")
    _require_bridge(params)
    pos = state.positions
    if abs(kernel.skappa(params.kappa2, pos[1])) < _AXIS_EPS:
        raise ChartSingularityError("point on the polar axis")
    if abs(pos[0]) < _AXIS_EPS:
        raise ChartSingularityError("radial pole")
    # The Beltrami image only covers the patch where the radial cosine factor
    # stays positive (r < pi/(2 sqrt(z)) resp. rho < pi/(2 sqrt(-z))).
    if state.chart is Chart.POLAR_CONSTANT:
        if kernel.ckappa(params.z, pos[0]) <= 0.0:
            raise DomainError("state beyond the hemisphere covered by the "
                              "Beltrami chart (C_kappa1(r) <= 0)")
    elif kernel.ckappa(-params.z, pos[0]) <= 0.0:
        raise DomainError("state beyond the chart edge (C_{-kappa1}(rho) <= 0)")
    q = _beltrami_positions(state.chart, pos, params)
    jac = _position_jacobian(state.chart, pos, params)
    p = np.linalg.solve(jac.T, np.asarray(state.momenta))
    return PhaseState(Chart.BELTRAMI, tuple(float(v) for v in q) + tuple(p))


# --------------------------------------------------------------------------
# Metrics and curvature
# --------------------------------------------------------------------------

def metric(chart, kind, point, params):
    """Metric coefficient matrix at a position triple.

    ``kind`` is "nc" (variable curvature) or "cc" (constant curvature).  The
    normalization is the one whose Beltrami-chart coefficients tend to
    2*identity in the flat limit; the free Hamiltonians satisfy
    H = (1/2) p^T g^{-1} p with this g in every chart.
    """
    if kind not in ("nc", "cc"):
        raise DomainError("kind must be 'nc' or 'cc'")
    z, kappa2 = params.z, params.kappa2
    x = [float(v) for v in point]
    if chart is Chart.BELTRAMI:
        q1, q2, q3 = x
        f1 = 2.0 * math.exp(-z * (q2 * q2 + q3 * q3)) / kernel.sinhc(z * q1 * q1)
        f2 = 2.0 * math.exp(z * (q1 * q1 - q3 * q3)) / kernel.sinhc(z * q2 * q2)
        f3 = 2.0 * math.exp(z * (q1 * q1 + q2 * q2)) / kernel.sinhc(z * q3 * q3)
        g = np.diag((f1, f2, f3))
        if kind == "cc":
            g = g * math.exp(-z * (q1 * q1 + q2 * q2 + q3 * q3))
        return g
    if chart is Chart.POLAR_VARIABLE:
        if kind != "nc":
            raise ChartMismatchError("polar-variable chart carries the "
                                     "variable-curvature metric")
        rho, th, _ = x
        cm = kernel.ckappa(-z, rho)
        sm = kernel.skappa(-z, rho)
        s2 = kernel.skappa(kappa2, th)
        if cm == 0.0:
            raise ChartSingularityError("chart edge: C_{-z}(rho) = 0")
        return np.diag((1.0, kappa2 * sm * sm, kappa2 * sm * sm * s2 * s2)) / cm
    if chart is Chart.POLAR_CONSTANT:
        if kind != "cc":
            raise ChartMismatchError("polar-constant chart carries the "
                                     "constant-curvature metric")
        r, th, _ = x
        sz = kernel.skappa(z, r)
        s2 = kernel.skappa(kappa2, th)
        return np.diag((1.0, kappa2 * sz * sz, kappa2 * sz * sz * s2 * s2))
    raise ChartMismatchError(f"no metric on chart {chart}")


def _christoffel(gfn, x, h):
    g = gfn(x)
    try:
        ginv = np.linalg.inv(g)
    except np.linalg.LinAlgError:
        raise ChartSingularityError("metric degenerate at evaluation point")
    dg = np.empty((3, 3, 3))
    for k in range(3):
        xp = x.copy(); xp[k] += h
        xm = x.copy(); xm[k] -= h
        dg[k] = (gfn(xp) - gfn(xm)) / (2.0 * h)
    gamma = np.empty((3, 3, 3))
    for i in range(3):
        for j in range(3):
            for k in range(3):
                acc = 0.0
                for l in range(3):
                    acc += ginv[i, l] * (dg[j][k, l] + dg[k][j, l] - dg[l][j, k])
                gamma[i, j, k] = 0.5 * acc
    return g, gamma


@dataclass(frozen=True)
class CurvatureResult:
    k12: float
    k13: float
    k23: float
    kscalar: float
    closed: dict


def curvature(chart, kind, point, params, h=1e-4):
    """Sectional and scalar curvature by finite-difference Riemann tensor.

    The metric is differenced twice (step h for Christoffel symbols and for
    their derivatives), so the result carries an O(h^2) truncation error;
    closed-form values are attached for the charts where they are known.
    """
    x = np.asarray(point, dtype=float)
    gfn = lambda y: metric(chart, kind, y, params)
    g, gamma = _christoffel(gfn, x, h)
    dgamma = np.empty((3, 3, 3, 3))
    for k in range(3):
        xp = x.copy(); xp[k] += h
        xm = x.copy(); xm[k] -= h
        dgamma[k] = (_christoffel(gfn, xp, h)[1] - _christoffel(gfn, xm, h)[1]) / (2.0 * h)
    # R^i_{jkl} = d_k G^i_{lj} - d_l G^i_{kj} + G^i_{km} G^m_{lj} - G^i_{lm} G^m_{kj}
    riem = np.empty((3, 3, 3, 3))
    for i in range(3):
        for j in range(3):
            for k in range(3):
                for l in range(3):
                    acc = dgamma[k][i, l, j] - dgamma[l][i, k, j]
                    for m in range(3):
                        acc += gamma[i, k, m] * gamma[m, l, j] \
                             - gamma[i, l, m] * gamma[m, k, j]
                    riem[i, j, k, l] = acc
    low = np.einsum("im,mjkl->ijkl", g, riem)

    def sec(i, j):
        denom = g[i, i] * g[j, j] - g[i, j] ** 2
        return low[i, j, i, j] / denom

    ric = np.einsum("ijil->jl", riem)
    kscal = float(np.einsum("jl,jl->", np.linalg.inv(g), ric))
    closed = _closed_curvature(chart, kind, x, params)
    return CurvatureResult(float(sec(0, 1)), float(sec(0, 2)), float(sec(1, 2)),
                           kscal, closed)


def _closed_curvature(chart, kind, x, params):
    z = params.z
    if kind == "cc":
        return {"k12": z, "k13": z, "k23": z, "kscalar": 6.0 * z}
    if chart is Chart.BELTRAMI:
        q1, q2, q3 = x
        qq = q1 * q1 + q2 * q2 + q3 * q3
        e_all = math.exp(2.0 * z * qq)
        e3 = math.exp(2.0 * z * q3 * q3)
        e23 = math.exp(2.0 * z * (q2 * q2 + q3 * q3))
        pref = 0.25 * z * math.exp(-z * qq)
        # k23 is pinned by the trace identity K = 2(K12 + K13 + K23) with
        # K = -5 z sinh(z q^2); the numeric Riemann pipeline confirms it.
        return {
            "k12": pref * (1.0 + e3 - 2.0 * e_all),
            "k13": pref * (2.0 - e3 + e23 - 2.0 * e_all),
            "k23": pref * (2.0 - e23 - e_all),
            "kscalar": -5.0 * z * math.sinh(z * qq),
        }
    if chart is Chart.POLAR_VARIABLE:
        rho = x[0]
        sm = kernel.skappa(-z, rho)
        cm = kernel.ckappa(-z, rho)
        k12 = -0.5 * z * z * sm * sm / cm
        return {"k12": k12, "k13": k12, "k23": 0.5 * k12, "kscalar": 5.0 * k12}
    return {}


# --------------------------------------------------------------------------
# Radial (one-dimensional) reduction
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialSystem:
    """The separated radial Hamiltonian h(r, p_r) at fixed C^(3) = c3."""

    family: Family
    params: SpaceParams
    c3: float
    chart: Chart

    def kinetic_coeff(self, r):
        if self.chart is Chart.POLAR_VARIABLE:
            return 0.5 * kernel.ckappa(-self.params.z, r)
        return 0.5

    def potential(self, r):
        z, kappa2, k = self.params.z, self.params.kappa2, self.params.k
        if self.chart is Chart.POLAR_VARIABLE:
            cm = kernel.ckappa(-z, r)
            sm = kernel.skappa(-z, r)
            v = 0.5 * cm * self.c3 / (kappa2 * sm * sm)
            if self.family is Family.KEPLER_NC:
                v -= k * cm * cm / sm
            return v
        sz = kernel.skappa(z, r)
        v = 0.5 * self.c3 / (kappa2 * sz * sz)
        if self.family is Family.KEPLER_CC:
            v -= k * kernel.cotkappa(z, r)
        return v

    def hamiltonian(self, r, pr):
        return self.kinetic_coeff(r) * pr * pr + self.potential(r)


def radial_reduction(spec, c3):
    """Reduce a family to its radial canonical pair with C^(3) frozen at c3."""
    if c3 < 0:
        raise DomainError("c3 must be >= 0")
    if spec.family is Family.CUSTOM:
        raise DomainError("no radial closed form for custom families")
    chart = Chart.POLAR_VARIABLE if spec.family in _NC_FAMILIES \
        else Chart.POLAR_CONSTANT
    return RadialSystem(spec.family, spec.params, float(c3), chart)


# --------------------------------------------------------------------------
# Chart-domain guard for trajectory integration
# --------------------------------------------------------------------------

def chart_guard(chart, params, eps=1e-6):
    """A callable mapping raw coordinates to a singularity reason or None."""
    z, kappa2 = params.z, params.kappa2

    if chart is Chart.POLAR_CONSTANT:
        def guard(c):
            if abs(kernel.skappa(z, c[0])) < eps:
                return "radial pole: S_kappa1(r) ~ 0"
            if abs(kernel.skappa(kappa2, c[1])) < eps:
                return "polar axis: S_kappa2(theta) ~ 0"
            return None
        return guard
    if chart is Chart.POLAR_VARIABLE:
        def guard(c):
            if abs(kernel.skappa(-z, c[0])) < eps:
                return "radial pole: S_{-kappa1}(rho) ~ 0"
            if abs(kernel.skappa(kappa2, c[1])) < eps:
                return "polar axis: S_kappa2(theta) ~ 0"
            if abs(kernel.ckappa(-z, c[0])) < eps:
                return "chart edge: C_{-kappa1}(rho) ~ 0"
            return None
        return guard

    def guard(c):
        if c[0] ** 2 + c[1] ** 2 + c[2] ** 2 < eps * eps:
            return "collision: q -> 0"
        return None
    return guard
