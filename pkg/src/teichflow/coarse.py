"""Coarse geometry: extremal lengths, short markings and the distance formula."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

from .curves import (
    Slope,
    annular_projection_distance,
    farey_distance,
    farey_geodesic,
    intersection,
    normalized_value,
)
from .errors import GapViolation, TopologyMismatch, TwistUndefined
from .flat import (
    FlatTorus,
    SlitSurface,
    Surface,
    expanding_modulus,
    flat_length,
    perpendicular_slope,
    piece_size,
    restricted_systole,
    systole,
)

GAMMA = "gamma"
DEFAULT_C = 10.0
DEFAULT_EPS0 = 0.1
DEFAULT_EPS1 = 0.01


@dataclass(frozen=True)
class UHPoint:
    """Point of the upper half-plane: x is a twist, y a reciprocal length."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not self.y > 0:
            raise ValueError("upper half-plane points need y > 0")


def hyperbolic_distance(p: UHPoint, q: UHPoint) -> float:
    dx, dy = p.x - q.x, p.y - q.y
    return math.acosh(1.0 + (dx * dx + dy * dy) / (2.0 * p.y * q.y))


def modified_log(a: float) -> float:
    """Natural log, replaced by 1 on a <= e."""
    return 1.0 if a <= math.e else math.log(a)


def threshold(a: float, C: float) -> float:
    """[a]_C: a when a >= C, else 0."""
    return a if a >= C else 0.0


# --- extremal length ---------------------------------------------------------


def extremal_length_torus(q: FlatTorus, alpha: Slope) -> float:
    """Ext of a slope on a flat torus: l^2 / area (exact)."""
    return flat_length(q, alpha)[0] ** 2 / q.area


def piece_extremal_length(sigma: SlitSurface, side: str, alpha: Slope) -> float:
    """(flat length / size of piece)^2 for a curve inside a slit piece."""
    return (flat_length(sigma.piece(side), alpha)[0] / piece_size(sigma, side)) ** 2


def extremal_length_gamma(sigma: SlitSurface) -> float:
    """1 / (Mod E + Mod F + Mod G) with Mod F = 0 for a slit gluing.

    Negative expanding moduli count as zero. If neither side carries an
    expanding annulus the sum vanishes and the result is infinite.
    """
    total = sum(max(expanding_modulus(sigma, s), 0.0) for s in ("Y", "Z"))
    return 1.0 / total if total > 0 else math.inf


# --- thick-thin and markings --------------------------------------------------


@dataclass(frozen=True)
class ThickThin:
    short_set: frozenset
    pieces: frozenset
    eps0: float
    eps1: float


def _candidates(surface: Surface) -> list[tuple[object, float]]:
    """Short-curve candidates with their extremal lengths, shortest first."""
    if isinstance(surface, FlatTorus):
        s, _ = systole(surface)
        return [(s, extremal_length_torus(surface, s))]
    out: list[tuple[object, float]] = [(GAMMA, extremal_length_gamma(surface))]
    for side in ("Y", "Z"):
        s, _ = restricted_systole(surface.piece(side), surface.slit_holonomy)
        out.append(((side, s), piece_extremal_length(surface, side, s)))
    return sorted(out, key=lambda c: c[1])


def _disjoint(a: object, b: object) -> bool:
    # torus slopes always meet; on the slit surface all candidates are disjoint
    if isinstance(a, Slope) and isinstance(b, Slope):
        return intersection(a, b) == 0
    return True


def thick_thin(surface: Surface, eps0: float = DEFAULT_EPS0, eps1: float = DEFAULT_EPS1) -> ThickThin:
    """Greedy (eps0, eps1) thick-thin decomposition.

    Raises ``GapViolation`` if a curve disjoint from the short set still has
    extremal length below eps1.
    """
    if not eps0 > eps1 > 0:
        raise ValueError("need eps0 > eps1 > 0")
    short: list = []
    for c, ext in _candidates(surface):
        if ext <= eps0 and all(_disjoint(c, s) for s in short):
            short.append(c)
    # post-condition; greedy inclusion already makes it hold on these models
    for c, ext in _candidates(surface):
        if c not in short and all(_disjoint(c, s) for s in short) and ext < eps1:
            raise GapViolation(f"curve {c} has extremal length {ext:.3g} < eps1 outside the short set")
    pieces = frozenset({"T"}) if isinstance(surface, FlatTorus) else frozenset({"Y", "Z"})
    ids = frozenset(_curve_id(c) for c in short)
    return ThickThin(ids, pieces, eps0, eps1)


def _curve_id(c: object) -> str:
    if c == GAMMA:
        return GAMMA
    if isinstance(c, Slope):
        return f"T:{c}"
    side, s = c  # type: ignore[misc]
    return f"{side}:{s}"


@dataclass(frozen=True)
class PantsCurve:
    id: str
    piece: Optional[str]
    slope: Optional[Slope]
    ext: float
    twist: float


@dataclass(frozen=True)
class CoarseMarking:
    topology: str
    pants: tuple[PantsCurve, ...]
    short: frozenset
    pieces: tuple[tuple[str, Slope], ...]

    def curve(self, cid: str) -> PantsCurve:
        for p in self.pants:
            if p.id == cid:
                return p
        raise KeyError(cid)

    @property
    def piece_slopes(self) -> dict[str, Slope]:
        return dict(self.pieces)


def flat_twist(q: FlatTorus, alpha: Slope) -> float:
    """Position of the flat-perpendicular transversal in alpha's annular cover."""
    try:
        return float(normalized_value(alpha, perpendicular_slope(q, alpha)))
    except TwistUndefined:  # pragma: no cover - perpendicular never equals alpha
        return 0.0


def short_marking(surface: Surface, eps0: float = DEFAULT_EPS0, eps1: float = DEFAULT_EPS1) -> CoarseMarking:
    tt = thick_thin(surface, eps0, eps1)
    if isinstance(surface, FlatTorus):
        s, _ = systole(surface)
        pc = PantsCurve(f"T:{s}", "T", s, extremal_length_torus(surface, s), flat_twist(surface, s))
        return CoarseMarking("torus", (pc,), tt.short_set, (("T", s),))
    pants = [PantsCurve(GAMMA, None, None, extremal_length_gamma(surface), float(surface.rel_twist))]
    pieces = []
    for side in ("Y", "Z"):
        piece = surface.piece(side)
        s, _ = restricted_systole(piece, surface.slit_holonomy)
        pieces.append((side, s))
        ext = piece_extremal_length(surface, side, s)
        pants.append(PantsCurve(f"{side}:{s}", side, s, ext, flat_twist(piece, s)))
    return CoarseMarking("slit", tuple(pants), tt.short_set, tuple(pieces))


def length_from_marking(mu: CoarseMarking, gamma: Slope, piece: Optional[str] = None) -> float:
    """Ext(gamma) ~ sum over pants curves of (1/l + l * twist^2) * i(alpha, gamma)^2.

    The twist of gamma about alpha is measured against the marking's
    transversal. Only pants curves of ``piece`` are used when it is given.
    """
    total = 0.0
    for pc in mu.pants:
        if pc.slope is None or (piece is not None and pc.piece != piece):
            continue
        if pc.slope == gamma:
            raise ValueError(f"{gamma} is a pants curve; read its length from the marking")
        i = intersection(pc.slope, gamma)
        tw = float(normalized_value(pc.slope, gamma)) - pc.twist
        total += (1.0 / pc.ext + pc.ext * tw * tw) * i * i
    return total


# --- distance formula ----------------------------------------------------------


@dataclass
class DistanceBreakdown:
    C: float
    pieces: dict[str, float] = field(default_factory=dict)
    annuli: dict[str, float] = field(default_factory=dict)
    one_sided: dict[str, float] = field(default_factory=dict)
    common: dict[str, float] = field(default_factory=dict)

    @property
    def total(self) -> float:
        return sum(sum(d.values()) for d in (self.pieces, self.annuli, self.one_sided, self.common))

    def as_dict(self) -> dict:
        return {
            "C": self.C,
            "total": self.total,
            "pieces": dict(sorted(self.pieces.items())),
            "annuli": dict(sorted(self.annuli.items())),
            "one_sided": dict(sorted(self.one_sided.items())),
            "common": dict(sorted(self.common.items())),
        }


def _height(ext: float) -> float:
    # a pants curve with no expanding annulus on either side is not short
    return 1.0 / ext if math.isfinite(ext) else 1.0


def distance_estimate(mx: CoarseMarking, my: CoarseMarking, C: float = DEFAULT_C) -> DistanceBreakdown:
    """Four-term coarse distance between two short markings.

    Pieces contribute thresholded Farey distances between their marking
    slopes; annuli around interior vertices of those Farey geodesics
    contribute thresholded logs of relative twisting; pants curves present on
    one side only contribute log(1/l); shared pants curves contribute the
    hyperbolic distance between (twist difference, 1/l) and (0, 1/k).
    """
    if mx.topology != my.topology or set(mx.piece_slopes) != set(my.piece_slopes):
        raise TopologyMismatch(f"cannot compare {mx.topology} with {my.topology}")
    out = DistanceBreakdown(C)
    px, py = mx.piece_slopes, my.piece_slopes
    for piece in sorted(px):
        a, b = px[piece], py[piece]
        out.pieces[piece] = threshold(farey_distance(a, b), C)
        for alpha in farey_geodesic(a, b)[1:-1]:
            d = annular_projection_distance(alpha, a, b)
            out.annuli[f"{piece}:{alpha}"] = threshold(modified_log(d), C)
    ids_x = {p.id for p in mx.pants}
    ids_y = {p.id for p in my.pants}
    for pc in mx.pants:
        if pc.id not in ids_y:
            out.one_sided[f"x:{pc.id}"] = modified_log(1.0 / pc.ext)
    for pc in my.pants:
        if pc.id not in ids_x:
            out.one_sided[f"y:{pc.id}"] = modified_log(1.0 / pc.ext)
    for pc in mx.pants:
        if pc.id in ids_y:
            qc = my.curve(pc.id)
            p = UHPoint(pc.twist - qc.twist, _height(pc.ext))
            out.common[pc.id] = hyperbolic_distance(p, UHPoint(0.0, _height(qc.ext)))
    return out


@dataclass
class BoundedReport:
    ok: bool
    conditions: dict[str, bool]
    values: dict[str, float]

    def failed(self) -> list[str]:
        return [k for k, v in self.conditions.items() if not v]


def bounded_distance_check(
    x: Surface,
    y: Surface,
    *,
    piece_bound: float = 4,
    ext_ratio: float = 4,
    twist_bound: float = 4,
    eps0: float = 0.5,
    eps1: float = 0.05,
) -> BoundedReport:
    """Test the four hypotheses that force bounded Teichmueller distance.

    (1) equal short sets; (2) piece and annular projections within
    ``piece_bound``; (3) extremal lengths of short curves within
    ``ext_ratio`` of each other; (4) |twist| * Ext within ``twist_bound``.
    """
    mx, my = short_marking(x, eps0, eps1), short_marking(y, eps0, eps1)
    if mx.topology != my.topology:
        raise TopologyMismatch("surfaces have different topology")
    values: dict[str, float] = {}
    conds: dict[str, bool] = {"same_short_set": mx.short == my.short}
    proj = 0.0
    for piece, a in mx.pieces:
        b = my.piece_slopes[piece]
        d = farey_distance(a, b)
        values[f"d_{piece}"] = d
        proj = max(proj, d)
        for alpha in farey_geodesic(a, b)[1:-1]:
            proj = max(proj, annular_projection_distance(alpha, a, b))
    values["max_projection"] = proj
    conds["projections_bounded"] = proj <= piece_bound
    ratio, twist = 1.0, 0.0
    for cid in sorted(mx.short & my.short):
        lx, ly = mx.curve(cid).ext, my.curve(cid).ext
        ratio = max(ratio, lx / ly, ly / lx)
        twist = max(twist, abs(mx.curve(cid).twist - my.curve(cid).twist) * lx)
    values["ext_ratio"] = ratio
    values["twist_times_ext"] = twist
    conds["ext_comparable"] = ratio <= ext_ratio
    conds["twist_bounded"] = twist <= twist_bound
    return BoundedReport(all(conds.values()), conds, values)
