"""Flat tori, slit-torus surfaces and the diagonal geodesic flow.

A marked flat torus is stored as a base matrix whose columns are the
holonomies of the slopes 0/1 and 1/0, an overall scale, and the accumulated
flow time. The holonomy of p/q at flow time t is

    scale * diag(e^t, e^-t) @ basis @ (q, p).

Keeping the flow time separate from the matrix matters: lattice vectors
that become short after a long flow have huge integer coordinates, and
their holonomy is only accurate if it is computed from the unflowed entries.
Those are converted to exact integer ratios once, so horizontal and vertical
holonomy components are correctly rounded for any integer vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable, Iterator, Literal, Optional, Union

import numpy as np

from .curves import Slope, intersection
from .errors import BalanceUndefined, EmbeddingError

Vec = tuple[float, float]
IntVec = tuple[int, int]
Side = Literal["Y", "Z"]

SQRT2 = math.sqrt(2.0)
#: Anosov map whose unstable direction is the vertical of the counterexample torus.
ANOSOV = ((2, 1), (1, 1))


def _exact_row(row: tuple[float, float]) -> tuple[int, int, int]:
    """Integers (a, b, D) with row == (a / D, b / D) exactly."""
    (na, da), (nb, db) = (float(x).as_integer_ratio() for x in row)
    den = da * db // math.gcd(da, db)
    return na * (den // da), nb * (den // db), den


@dataclass(frozen=True)
class FlatTorus:
    basis: tuple[tuple[float, float], tuple[float, float]]
    scale: float = 1.0
    time: float = 0.0

    def __post_init__(self) -> None:
        b = tuple(tuple(float(x) for x in row) for row in self.basis)
        object.__setattr__(self, "basis", b)
        det = b[0][0] * b[1][1] - b[0][1] * b[1][0]
        if not math.isclose(abs(det), 1.0, rel_tol=1e-9):
            raise ValueError(f"basis must have |det| = 1, got {det!r}")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @classmethod
    def from_columns(cls, hol_0: Vec, hol_inf: Vec, **kw) -> "FlatTorus":
        """Torus with the given holonomies of 0/1 and 1/0."""
        return cls(((hol_0[0], hol_inf[0]), (hol_0[1], hol_inf[1])), **kw)

    @cached_property
    def _rows(self):
        return _exact_row(self.basis[0]), _exact_row(self.basis[1])

    @property
    def matrix(self) -> np.ndarray:
        """Current holonomy matrix (scale and flow applied)."""
        g = np.diag([math.exp(self.time), math.exp(-self.time)])
        return self.scale * g @ np.array(self.basis)

    @property
    def area(self) -> float:
        return self.scale**2

    def holonomy(self, n: IntVec) -> Vec:
        """Holonomy of the lattice vector n = (q, p) at the current time."""
        (a0, b0, d0), (a1, b1, d1) = self._rows
        x = (a0 * n[0] + b0 * n[1]) / d0
        y = (a1 * n[0] + b1 * n[1]) / d1
        return (self.scale * math.exp(self.time) * x, self.scale * math.exp(-self.time) * y)

    def slope_holonomy(self, s: Slope) -> Vec:
        return self.holonomy((s.q, s.p))

    def direction_slope(self, vec: Vec) -> float:
        """Real slope (in marking coordinates) of a direction in the plane."""
        n = np.linalg.solve(np.array(self.basis), np.asarray(vec, dtype=float))
        return _ratio(float(n[1]), float(n[0]))

    @property
    def vertical_slope(self) -> float:
        """Slope of the vertical foliation direction; unchanged by the flow."""
        return self.direction_slope((0.0, 1.0))

    @property
    def horizontal_slope(self) -> float:
        return self.direction_slope((1.0, 0.0))


def _ratio(p: float, q: float) -> float:
    """p / q as a real slope; near-vertical directions become infinity."""
    if abs(p) > abs(q) * 1e15:
        return math.inf
    return p / q


def _norm(v: Vec) -> float:
    return math.hypot(v[0], v[1])


def _cross(u: Vec, v: Vec) -> float:
    return u[0] * v[1] - u[1] * v[0]


@dataclass(frozen=True)
class SlitSurface:
    """Genus-2 surface: two flat tori glued along a slit.

    ``big`` is the piece Z, ``small`` the piece Y. ``slit`` is the slit
    holonomy at surface time 0; the separating curve gamma runs along both
    sides of the slit.
    """

    big: FlatTorus
    small: FlatTorus
    slit: Vec
    rel_twist: int = 0
    time: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "slit", (float(self.slit[0]), float(self.slit[1])))
        if self.slit == (0.0, 0.0):
            raise ValueError("slit holonomy must be nonzero")

    @property
    def slit_holonomy(self) -> Vec:
        return (math.exp(self.time) * self.slit[0], math.exp(-self.time) * self.slit[1])

    @property
    def gamma_length(self) -> float:
        return 2.0 * _norm(self.slit_holonomy)

    def piece(self, side: Side) -> FlatTorus:
        if side == "Y":
            return self.small
        if side == "Z":
            return self.big
        raise ValueError(f"unknown piece {side!r}")

    def slit_balance_time(self) -> float:
        """Flow time from here until the slit is at angle pi/4 (and shortest)."""
        sx, sy = self.slit_holonomy
        if sx == 0 or sy == 0:
            raise BalanceUndefined("slit is horizontal or vertical")
        return 0.5 * math.log(abs(sy) / abs(sx))


Surface = Union[FlatTorus, SlitSurface]


def flow(q: Surface, t: float) -> Surface:
    """Teichmueller geodesic flow: act by diag(e^t, e^-t)."""
    if isinstance(q, FlatTorus):
        return replace(q, time=q.time + t)
    return replace(q, big=flow(q.big, t), small=flow(q.small, t), time=q.time + t)


def flat_length(q: FlatTorus, alpha: Slope) -> tuple[float, float, float]:
    """(length, horizontal length h, vertical length v) of a slope."""
    x, y = q.slope_holonomy(alpha)
    return math.hypot(x, y), abs(x), abs(y)


@dataclass(frozen=True)
class CurveEvolution:
    """Length, twist and modulus data of a curve along a geodesic."""

    curve: Union[Slope, str]
    L: float
    t_bal: float
    T: float = 0.0

    def __post_init__(self) -> None:
        if not self.L > 0:
            raise ValueError("minimum flat length must be positive")
        if self.T < 0:
            raise ValueError("total twist must be nonnegative")

    def length(self, t: float) -> float:
        """Exact torus flat length L * sqrt(cosh 2(t - t_bal))."""
        u = t - self.t_bal
        return self.L * math.exp(0.5 * _log_cosh(2.0 * u))

    def coarse_length(self, t: float) -> float:
        return self.L * math.cosh(t - self.t_bal)


def _log_cosh(u: float) -> float:
    a = abs(u)
    return a + math.log1p(math.exp(-2.0 * a)) - math.log(2.0)


def _sech(u: float) -> float:
    a = abs(u)
    e = math.exp(-a)
    return 2.0 * e / (1.0 + e * e)


def balance_data(q: FlatTorus, alpha: Slope) -> CurveEvolution:
    """Balance time and minimum flat length of ``alpha`` along the flow of ``q``.

    Minimizing h^2 e^{2t} + v^2 e^{-2t} gives t_bal = log(v/h) / 2 and
    L = sqrt(2 h v). The time is measured from ``q`` itself.
    """
    _, h, v = flat_length(q, alpha)
    if h == 0 or v == 0:
        raise BalanceUndefined(f"{alpha} is {'vertical' if h == 0 else 'horizontal'} in q")
    return CurveEvolution(alpha, math.sqrt(2.0 * h * v), 0.5 * math.log(v / h))


def cylinder_modulus_profile(ev: CurveEvolution, t: float) -> float:
    return ev.T * _sech(t - ev.t_bal) ** 2


def cylinder_size_profile(ev: CurveEvolution, t: float) -> float:
    return ev.T * ev.L * _sech(t - ev.t_bal)


def twist_profile(ev: CurveEvolution, t: float) -> float:
    """Twisting accumulated by time t: T / (1 + e^{-2(t - t_bal)})^2."""
    u = 2.0 * (t - ev.t_bal)
    if u >= 0:
        s = 1.0 / (1.0 + math.exp(-u))
    else:
        e = math.exp(u)
        s = e / (1.0 + e)
    return ev.T * s * s


# --- lattice reduction -------------------------------------------------------


def _gauss_reduce(f: Callable[[IntVec], Vec], b1: IntVec, b2: IntVec) -> tuple[IntVec, IntVec]:
    """Lagrange-Gauss reduction of the lattice basis (b1, b2) for |f(.)|^2."""

    def dot(u: Vec, w: Vec) -> float:
        return u[0] * w[0] + u[1] * w[1]

    u, w = f(b1), f(b2)
    nu, nw = dot(u, u), dot(w, w)
    if nu > nw:
        b1, b2, u, w, nu, nw = b2, b1, w, u, nw, nu
    for _ in range(10_000):
        mu = round(dot(u, w) / nu)
        if mu == 0:
            break
        b2 = (b2[0] - mu * b1[0], b2[1] - mu * b1[1])
        w = f(b2)
        nw = dot(w, w)
        if nw < nu:
            b1, b2, u, w, nu, nw = b2, b1, w, u, nw, nu
    return b1, b2


def _ellipse_points(f: Callable[[IntVec], Vec], radius2: float) -> Iterator[IntVec]:
    """All nonzero lattice vectors n with |f(n)|^2 <= radius2 (f linear)."""
    b1, b2 = _gauss_reduce(f, (1, 0), (0, 1))
    u, w = f(b1), f(b2)
    n1 = u[0] ** 2 + u[1] ** 2
    beta = (u[0] * w[0] + u[1] * w[1]) / n1
    # component of b2 orthogonal to b1
    perp2 = (w[0] - beta * u[0]) ** 2 + (w[1] - beta * u[1]) ** 2
    c2max = math.floor(math.sqrt(radius2 / perp2) + 1e-9)
    for c2 in range(-c2max, c2max + 1):
        rest = radius2 - c2 * c2 * perp2
        if rest < 0:
            continue
        centre = -c2 * beta
        half = math.sqrt(rest / n1)
        for c1 in range(math.ceil(centre - half - 1e-9), math.floor(centre + half + 1e-9) + 1):
            if c1 == 0 and c2 == 0:
                continue
            yield (c1 * b1[0] + c2 * b2[0], c1 * b1[1] + c2 * b2[1])


def _primitive_slope(n: IntVec) -> Slope:
    return Slope(n[1], n[0])


def systole(q: FlatTorus, *, rel_tol: float = 1e-12) -> tuple[Slope, float]:
    """Shortest slope and its length; ties go to the smallest ``Slope.key``."""
    b1, _ = _gauss_reduce(q.holonomy, (1, 0), (0, 1))
    best = _norm(q.holonomy(b1))
    radius2 = (best * (1 + rel_tol)) ** 2
    ties = [n for n in _ellipse_points(q.holonomy, radius2) if math.gcd(*n) == 1]
    slope = min(_primitive_slope(n) for n in ties)
    return slope, _norm(q.slope_holonomy(slope))


def restricted_systole(q: FlatTorus, slit: Vec) -> tuple[Slope, float]:
    """Shortest curve of ``q`` that can be drawn disjoint from ``slit``.

    Closed geodesics in the direction of v sweep a cylinder of height
    area/|v|; some member misses the slit exactly when |v x slit| < area.
    """
    s_len = _norm(slit)
    sys_slope, sys_len = systole(q)
    if abs(_cross(q.slope_holonomy(sys_slope), slit)) < q.area:
        return sys_slope, sys_len
    ux, uy = slit[0] / s_len, slit[1] / s_len
    width = q.area / s_len

    def frame(n: IntVec) -> Vec:
        x, y = q.holonomy(n)
        return (x * ux + y * uy, x * uy - y * ux)

    def search(half_len: float) -> Optional[tuple[Slope, float]]:
        # box |x'| <= half_len, |y'| < width sits inside this ellipse
        def g(n: IntVec) -> Vec:
            a, b = frame(n)
            return (a / half_len, b / width)

        found = []
        for n in _ellipse_points(g, 2.0):
            a, b = frame(n)
            if abs(b) < width and abs(a) <= half_len and math.gcd(*n) == 1:
                s = _primitive_slope(n)
                found.append((round(_norm(q.holonomy(n)), 12), s.key, s))
        if not found:
            return None
        _, _, s = min(found)
        return s, _norm(q.slope_holonomy(s))

    # Minkowski: the box with half-length 2 * area / width holds a lattice point
    first = search(2.0 * q.area / width)
    if first is None:  # pragma: no cover - excluded by Minkowski's theorem
        raise RuntimeError("no slit-avoiding curve found")
    refined = search(first[1] * (1 + 1e-9))
    return refined if refined is not None else first


def piece_size(sigma: SlitSurface, side: Side) -> float:
    """Flat length of the shortest essential curve in the slit piece."""
    return restricted_systole(sigma.piece(side), sigma.slit_holonomy)[1]


def expanding_modulus(sigma: SlitSurface, side: Side) -> float:
    """log(size of piece / flat length of gamma); nonpositive means no annulus."""
    return math.log(piece_size(sigma, side) / sigma.gamma_length)


def slit_is_embedded(q: FlatTorus, slit: Vec) -> bool:
    """Margin check used at construction: |slit| < systole / 2."""
    return _norm(slit) < 0.5 * systole(q)[1]


# --- named surfaces ----------------------------------------------------------


def square_torus() -> FlatTorus:
    return FlatTorus(((1.0, 0.0), (0.0, 1.0)))


def torus_from_directions(vertical: float, horizontal: float) -> FlatTorus:
    """Unit-area torus whose vertical / horizontal foliations have the given slopes.

    Balanced so that the lattice directions (1, vertical) and
    (1, horizontal) map to vectors of equal length.
    """
    if vertical == horizontal:
        raise ValueError("foliation directions must differ")
    dirs = np.array([[1.0, 1.0], [horizontal, vertical]])  # columns: (q, p) directions
    inv = np.linalg.inv(dirs)
    c = math.sqrt(abs(np.linalg.det(dirs)))
    m = c * inv
    return FlatTorus(tuple(map(tuple, m.tolist())))


def anosov_torus() -> FlatTorus:
    """Torus on the axis of [[2, 1], [1, 1]], vertical = unstable direction."""
    (a, b), (c, d) = ANOSOV
    tr = a + d
    lam_u = (tr + math.sqrt(tr * tr - 4)) / 2
    lam_s = 1 / lam_u
    # eigenvectors (1, y) of the lattice action on (q, p) coordinates
    y_u = (lam_u - a) / b
    y_s = (lam_s - a) / b
    return torus_from_directions(y_u, y_s)


def torus_from_tau(tau: complex) -> FlatTorus:
    """Unit-area torus with period ratio tau = hol(1/0) / hol(0/1)."""
    if tau.imag <= 0:
        raise ValueError("tau must lie in the upper half-plane")
    r = 1.0 / math.sqrt(tau.imag)
    return FlatTorus.from_columns((r, 0.0), (tau.real * r, tau.imag * r))


def tau_of(q: FlatTorus) -> complex:
    """Point of the upper half-plane representing the marked torus."""
    m = q.matrix
    w0 = complex(m[0, 0], m[1, 0])
    w1 = complex(m[0, 1], m[1, 1])
    tau = w1 / w0
    return tau if tau.imag > 0 else tau.conjugate()


def torus_teich_distance(q1: FlatTorus, q2: FlatTorus) -> float:
    """Exact Teichmueller distance of marked tori: half the hyperbolic distance."""
    a, b = tau_of(q1), tau_of(q2)
    arg = 1 + abs(a - b) ** 2 / (2 * a.imag * b.imag)
    return 0.5 * math.acosh(arg)


def build_counterexample_pair(d: float, c: float, delta: float) -> tuple[SlitSurface, SlitSurface]:
    """The two slit surfaces whose geodesics fail to fellow travel.

    Both glue the Anosov torus T (piece Z) to a copy of T flowed back by
    d/2, respectively 3d/2, and scaled by ``delta`` (piece Y). The slit has
    length c * e^{-d/2} and angle pi/4 in the unflowed copy of T.
    """
    if not d > 0:
        raise ValueError("d must be positive")
    if not 0 < c < 1:
        raise ValueError("c must lie in (0, 1)")
    eps = c * math.exp(-d / 2)
    if not 0 < delta < eps / 10:
        raise ValueError(f"delta must satisfy 0 < delta < c e^(-d/2) / 10 = {eps / 10:.6g}")
    T = anosov_torus()
    slit0 = (eps / SQRT2, eps / SQRT2)
    if not slit_is_embedded(T, slit0):
        raise EmbeddingError(f"slit of length {eps:.6g} does not embed in T")
    out = []
    for offset in (d / 2, 3 * d / 2):
        small = FlatTorus(T.basis, scale=delta, time=-offset)
        slit = (delta * math.exp(-offset) * slit0[0], delta * math.exp(offset) * slit0[1])
        if not slit_is_embedded(T, slit):
            raise EmbeddingError(f"slit of length {_norm(slit):.6g} does not embed in the big piece")
        out.append(SlitSurface(big=T, small=small, slit=slit, rel_twist=0))
    return out[0], out[1]


def perpendicular_slope(q: FlatTorus, alpha: Slope) -> float:
    """Real slope of the flat direction perpendicular to ``alpha``."""
    x, y = q.slope_holonomy(alpha)
    m = q.matrix
    n = np.linalg.solve(m, np.array([-y, x]))
    return _ratio(float(n[1]), float(n[0]))


__all__ = [
    "FlatTorus", "SlitSurface", "CurveEvolution", "flow", "flat_length", "balance_data",
    "systole", "restricted_systole", "expanding_modulus", "piece_size",
    "cylinder_modulus_profile", "cylinder_size_profile", "twist_profile",
    "build_counterexample_pair", "square_torus", "anosov_torus", "torus_from_tau",
    "torus_from_directions", "tau_of", "torus_teich_distance", "perpendicular_slope",
    "slit_is_embedded", "intersection",
]
