"""Per-curve description of a geodesic ray.

Rays are never advanced by repeatedly flowing a floating-point basis: the
surface at parameter t is always ``flow(start, t)``, which keeps long rays
exactly reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from .curves import (
    FOLIATION_MAX_DENOMINATOR,
    Slope,
    annular_projection_distance,
    as_slope,
    continued_fraction,
    convergents,
    farey_distance,
    farey_geodesic,
)
from .coarse import flat_twist
from .errors import BalanceUndefined, NotThick, TwistUndefined, Unbracketed
from .flat import (
    CurveEvolution,
    FlatTorus,
    SlitSurface,
    Surface,
    balance_data,
    expanding_modulus,
    flat_length,
    flow,
    restricted_systole,
    systole,
)

GAMMA = "gamma"
DEFAULT_M0 = 2.0
DEFAULT_DT = 0.1
SCAN_STEP = 0.05
BISECT_TOL = 1e-6


def _quarter_turn(q: Surface) -> Surface:
    """Rotate by 90 degrees; this swaps the vertical and horizontal foliations."""
    if isinstance(q, FlatTorus):
        (a, b), (c, d) = q.basis
        return FlatTorus(((-c, -d), (a, b)), q.scale, -q.time)
    sx, sy = q.slit
    return SlitSurface(_quarter_turn(q.big), _quarter_turn(q.small), (-sy, sx), q.rel_twist, -q.time)


@dataclass(frozen=True)
class GeodesicRay:
    start: Surface
    t_range: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        lo, hi = (float(x) for x in self.t_range)
        if not lo <= hi:
            raise ValueError("t_range must be a nonempty interval")
        object.__setattr__(self, "t_range", (lo, hi))

    def at(self, t: float) -> Surface:
        return flow(self.start, t)

    def torus(self, piece: Optional[str] = None) -> FlatTorus:
        if isinstance(self.start, FlatTorus):
            return self.start
        if piece is None:
            raise ValueError("a piece (Y or Z) is required for slit surfaces")
        return self.start.piece(piece)

    def foliations(self, piece: Optional[str] = None) -> tuple[float, float]:
        """(vertical, horizontal) slopes; the ray tends to the vertical one."""
        q = self.torus(piece)
        return q.vertical_slope, q.horizontal_slope

    def reversed(self) -> "GeodesicRay":
        """Same geodesic run backwards: t -> -t with the foliations swapped."""
        lo, hi = self.t_range
        return GeodesicRay(_quarter_turn(self.start), (-hi, -lo))


def _truncate(x: float) -> Slope:
    return as_slope(x, FOLIATION_MAX_DENOMINATOR)


def total_twist(alpha: Slope, vertical: float, horizontal: float) -> int:
    """T_alpha: relative twisting of the two foliations around alpha."""
    return annular_projection_distance(alpha, _truncate(vertical), _truncate(horizontal))


def evolution_of(G: GeodesicRay, alpha: Union[Slope, str], piece: Optional[str] = None) -> CurveEvolution:
    """Balance time, minimum length and total twist of a curve along ``G``."""
    if alpha == GAMMA:
        if not isinstance(G.start, SlitSurface):
            raise ValueError("gamma only exists on slit surfaces")
        sx, sy = G.start.slit_holonomy
        if sx == 0 or sy == 0:
            raise BalanceUndefined("slit is horizontal or vertical")
        L = 2.0 * math.sqrt(2.0 * abs(sx * sy))
        return CurveEvolution(GAMMA, L, G.start.slit_balance_time(), float(abs(G.start.rel_twist)))
    q = G.torus(piece)
    ev = balance_data(q, alpha)
    vert, horiz = G.foliations(piece)
    return replace(ev, T=float(total_twist(alpha, vert, horiz)))


def piece_modulus(G: GeodesicRay, piece: str, t: float) -> float:
    return expanding_modulus(G.at(t), piece)


@dataclass(frozen=True)
class IsolationInterval:
    piece: str
    interval: Optional[tuple[float, float]]
    threshold: float
    peak: float = math.nan

    @property
    def empty(self) -> bool:
        return self.interval is None

    @property
    def length(self) -> float:
        return 0.0 if self.interval is None else self.interval[1] - self.interval[0]

    @property
    def midpoint(self) -> float:
        if self.interval is None:
            raise ValueError("empty interval has no midpoint")
        return 0.5 * (self.interval[0] + self.interval[1])


def _bisect(f, inside: float, outside: float, tol: float) -> float:
    while abs(outside - inside) > tol:
        mid = 0.5 * (inside + outside)
        if f(mid):
            inside = mid
        else:
            outside = mid
    return inside


def isolation_interval(
    G: GeodesicRay, piece: str, M0: float = DEFAULT_M0, step: float = SCAN_STEP, tol: float = BISECT_TOL
) -> IsolationInterval:
    """Largest interval around the balance time of gamma with M_t(gamma, piece) >= M0.

    Scans outward from the balance time on a grid of ``step`` and bisects
    the first cell where the modulus drops below M0.
    """
    if not M0 > 0:
        raise ValueError("M0 must be positive")
    if not isinstance(G.start, SlitSurface):
        raise ValueError("isolation intervals are defined for slit surfaces")
    lo, hi = G.t_range
    t0 = min(max(G.start.slit_balance_time(), lo), hi)

    def inside(t: float) -> bool:
        return piece_modulus(G, piece, t) >= M0

    peak = piece_modulus(G, piece, t0)
    if peak < M0:
        return IsolationInterval(piece, None, M0, peak)
    ends = []
    for direction, limit in ((-1, lo), (1, hi)):
        t = t0
        while True:
            nxt = t + direction * step
            if direction * (nxt - limit) > 0:
                if inside(limit):
                    raise Unbracketed(f"modulus of {piece} still >= {M0} at t = {limit}")
                nxt = limit
            if not inside(nxt):
                ends.append(_bisect(inside, t, nxt, tol))
                break
            t = nxt
    return IsolationInterval(piece, (ends[0], ends[1]), M0, peak)


@dataclass(frozen=True)
class ShadowSequence:
    times: tuple[float, ...]
    vertices: tuple[Slope, ...]
    lengths: tuple[float, ...] = ()
    twists: tuple[float, ...] = ()
    moduli: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if len(self.times) != len(self.vertices):
            raise ValueError("times and vertices differ in length")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("shadow times must be strictly increasing")

    def compressed(self) -> list[Slope]:
        out: list[Slope] = []
        for v in self.vertices:
            if not out or out[-1] != v:
                out.append(v)
        return out

    def rows(self) -> list[tuple]:
        return list(zip(self.times, self.vertices, self.lengths, self.twists, self.moduli))


def sample_times(t_range: tuple[float, float], dt: float = DEFAULT_DT) -> list[float]:
    lo, hi = t_range
    n = max(int(math.floor((hi - lo) / dt + 1e-9)), 0)
    ts = [lo + k * dt for k in range(n + 1)]
    if hi - ts[-1] > 1e-9:
        ts.append(hi)
    return ts


def _shadow_point(G: GeodesicRay, piece: Optional[str], t: float) -> tuple[Slope, float, float, float]:
    q = G.at(t)
    if isinstance(q, FlatTorus):
        s, ell = systole(q)
        return s, ell, flat_twist(q, s), q.area / (ell * ell)
    if piece is None:
        raise ValueError("a piece (Y or Z) is required for slit surfaces")
    torus = q.piece(piece)
    s, ell = restricted_systole(torus, q.slit_holonomy)
    return s, ell, flat_twist(torus, s), expanding_modulus(q, piece)


def shadow(
    G: GeodesicRay,
    piece: Optional[str] = None,
    times: Optional[Sequence[float]] = None,
    *,
    refine: bool = True,
    max_gap: int = 2,
    min_dt: float = 1e-4,
) -> ShadowSequence:
    """Short-marking slopes of a piece (or of the torus) at the given times.

    With ``refine`` set, midpoints are inserted wherever consecutive vertices
    are more than ``max_gap`` apart in the Farey graph.
    """
    lo, hi = G.t_range
    ts = sorted(set(sample_times(G.t_range) if times is None else times))
    if ts and (ts[0] < lo - 1e-12 or ts[-1] > hi + 1e-12):
        raise ValueError("sample times must lie in the ray's t_range")
    pts = {t: _shadow_point(G, piece, t) for t in ts}
    if refine:
        stack = list(zip(ts, ts[1:]))
        while stack:
            a, b = stack.pop()
            if b - a <= min_dt or farey_distance(pts[a][0], pts[b][0]) <= max_gap:
                continue
            m = 0.5 * (a + b)
            pts[m] = _shadow_point(G, piece, m)
            stack.extend([(a, m), (m, b)])
    ts = sorted(pts)
    cols = list(zip(*(pts[t] for t in ts))) if ts else [(), (), (), ()]
    return ShadowSequence(tuple(ts), *(tuple(c) for c in cols))


@dataclass(frozen=True)
class DefectReport:
    max: int
    mean: float
    argmax: Optional[tuple[Slope, Slope, Slope]]
    n_vertices: int

    def as_dict(self) -> dict:
        return {
            "max": self.max,
            "mean": self.mean,
            "argmax": None if self.argmax is None else [str(v) for v in self.argmax],
            "n_vertices": self.n_vertices,
        }


def _distance_matrix(vs: Sequence[Slope]) -> np.ndarray:
    n = len(vs)
    D = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            D[i, j] = D[j, i] = farey_distance(vs[i], vs[j])
    return D


def defect_summary(vertices: Union[ShadowSequence, Sequence[Slope]]) -> DefectReport:
    """Reverse-triangle defect d(r,s) + d(s,t) - d(r,t) over r < s < t."""
    vs = vertices.compressed() if isinstance(vertices, ShadowSequence) else list(vertices)
    n = len(vs)
    if n < 3:
        return DefectReport(0, 0.0, None, n)
    D = _distance_matrix(vs)
    # E[r, s, t] = D[r, s] + D[s, t] - D[r, t]
    E = D[:, :, None] + D[None, :, :] - D[:, None, :]
    r, s, t = np.ogrid[:n, :n, :n]
    mask = (r < s) & (s < t)
    vals = E[np.broadcast_to(mask, E.shape)]
    k = int(np.argmax(np.where(mask, E, np.iinfo(np.int64).min)))
    i, j, l = np.unravel_index(k, E.shape)
    return DefectReport(int(vals.max()), float(vals.mean()), (vs[i], vs[j], vs[l]), n)


def backtrack_defect(s: ShadowSequence) -> int:
    return defect_summary(s).max


def predict_short_curves(G: GeodesicRay, D1: int, piece: Optional[str] = None) -> list[tuple[Slope, int]]:
    """Slopes whose total twist between the two foliations is at least D1.

    Candidates are the convergents of both foliation slopes; these are the
    only slopes whose annular projections can be large.
    """
    vert, horiz = G.foliations(piece)
    if vert == horiz:
        raise ValueError("foliations must differ")
    cands: set[Slope] = set()
    for x in (vert, horiz):
        s = _truncate(x)
        if not s.is_infinite:
            cands.update(convergents(continued_fraction(s.value)))
    out = []
    for c in sorted(cands):
        try:
            T = total_twist(c, vert, horiz)
        except TwistUndefined:
            continue
        if T >= D1:
            out.append((c, T))
    return out


@dataclass
class OrderReport:
    curves: list[Slope]
    balance_times: list[float]
    geodesic: list[Slope]
    closest_index: list[int]
    distance_to_geodesic: list[int]
    violations: list[tuple[Slope, Slope]] = field(default_factory=list)
    far_from_geodesic: list[Slope] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations and not self.far_from_geodesic

    @property
    def order(self) -> list[Slope]:
        """Tracked curves sorted by balance time."""
        return [c for _, c in sorted(zip(self.balance_times, self.curves), key=lambda x: x[0])]


def isolation_order_check(
    G: GeodesicRay, curves: Optional[Sequence[Slope]] = None, *, D1: int = 10, piece: Optional[str] = None
) -> OrderReport:
    """Compare the time order of short curves with their order along a Farey geodesic.

    The geodesic runs from the truncated horizontal slope (t -> -infinity) to
    the truncated vertical slope (t -> +infinity). Pairs whose closest
    points on it coincide or are adjacent are exempt.
    """
    if curves is None:
        curves = [c for c, _ in predict_short_curves(G, D1, piece)]
    vert, horiz = G.foliations(piece)
    geo = farey_geodesic(_truncate(horiz), _truncate(vert))
    q = G.torus(piece)
    times, idx, dist = [], [], []
    for c in curves:
        times.append(balance_data(q, c).t_bal)
        ds = [farey_distance(c, g) for g in geo]
        m = min(ds)
        dist.append(m)
        idx.append(ds.index(m))
    rep = OrderReport(list(curves), times, geo, idx, dist)
    rep.far_from_geodesic = [c for c, m in zip(curves, dist) if m > 2]
    n = len(curves)
    for i in range(n):
        for j in range(n):
            if times[i] < times[j] and idx[i] > idx[j] + 1:
                rep.violations.append((curves[i], curves[j]))
    return rep


@dataclass
class EndsReport:
    piece: str
    case: int
    interval: IsolationInterval
    d_endpoints: int
    d_foliations: int
    ok: bool
    constant: float

    def as_dict(self) -> dict:
        iv = self.interval.interval
        return {
            "piece": self.piece,
            "case": self.case,
            "interval": None if iv is None else list(iv),
            "d_endpoints": self.d_endpoints,
            "d_foliations": self.d_foliations,
            "ok": self.ok,
            "constant": self.constant,
        }


def ends_consistency_check(
    G: GeodesicRay,
    a: float,
    b: float,
    pieces: Sequence[str] = ("Y", "Z"),
    *,
    M0: float = DEFAULT_M0,
    bound: int = 4,
    min_rate: float = 0.25,
) -> list[EndsReport]:
    """Classify each piece against [a, b] and check the matching distance claim.

    Case 1 (interval inside [a, b]): the piece's projections at a and b must
    be far apart, at least ``min_rate`` per unit of isolation time. Case 2
    (interval disjoint from [a, b]): they stay within ``bound``. The pieces
    must not be isolated at a or b.
    """
    if not isinstance(G.start, SlitSurface):
        raise ValueError("ends check is defined for slit surfaces")
    if a > b:
        raise ValueError("need a <= b")
    out = []
    for piece in pieces:
        for t in (a, b):
            m = piece_modulus(G, piece, t)
            if m >= M0:
                raise NotThick(f"piece {piece} is isolated at t = {t} (M = {m:.3g} >= {M0})")
        iv = isolation_interval(G, piece, M0)
        sa = _shadow_point(G, piece, a)[0]
        sb = _shadow_point(G, piece, b)[0]
        d_ab = farey_distance(sa, sb)
        vert, horiz = G.foliations(piece)
        d_fol = farey_distance(_truncate(vert), _truncate(horiz))
        if iv.interval is not None and a <= iv.interval[0] and iv.interval[1] <= b:
            const = d_ab / iv.length if iv.length > 0 else math.inf
            out.append(EndsReport(piece, 1, iv, d_ab, d_fol, const >= min_rate, const))
        elif iv.interval is None or iv.interval[1] < a or iv.interval[0] > b:
            out.append(EndsReport(piece, 2, iv, d_ab, d_fol, d_ab <= bound, float(d_ab)))
        else:  # pragma: no cover - excluded by the thickness validation
            out.append(EndsReport(piece, 0, iv, d_ab, d_fol, False, math.nan))
    return out
