"""Simple closed curves on the torus.

Curves are slopes p/q, the vertices of the Farey graph. Everything here is
exact integer / rational arithmetic.

Conventions
-----------
* A slope p/q is stored with q >= 0 and gcd(|p|, q) = 1; infinity is 1/0.
* Integer matrices act on slopes through the column vector (p, q).
* The positive (right-handed) Dehn twist about ``alpha`` is
  ``M^-1 [[1, 1], [0, 1]] M`` where ``M`` is ``normalize_to_infinity(alpha)``.
  In normalized coordinates it adds one to every finite slope.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .errors import SearchBoundExceeded, TwistUndefined

Matrix = tuple[tuple[int, int], tuple[int, int]]

#: Largest number of pivot vertices a single Farey search may touch.
DEFAULT_MAX_VERTICES = 200_000
#: Fans with more interior vertices than this are compressed to their ends.
FULL_LADDER_LIMIT = 4000
#: Denominator cap used when turning a real direction into a slope.
FOLIATION_MAX_DENOMINATOR = 10**6


@dataclass(frozen=True, order=False)
class Slope:
    p: int
    q: int

    def __post_init__(self) -> None:
        p, q = int(self.p), int(self.q)
        if p == 0 and q == 0:
            raise ValueError("0/0 is not a slope")
        g = math.gcd(p, q)
        p, q = p // g, q // g
        if q < 0 or (q == 0 and p < 0):
            p, q = -p, -q
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @classmethod
    def parse(cls, text: str) -> "Slope":
        text = text.strip()
        if text in ("inf", "oo", "∞"):
            return INF
        if "/" in text:
            num, den = text.split("/", 1)
            return cls(int(num), int(den))
        return cls(int(text), 1)

    @classmethod
    def from_fraction(cls, x: Fraction) -> "Slope":
        return cls(x.numerator, x.denominator)

    @property
    def is_infinite(self) -> bool:
        return self.q == 0

    @property
    def value(self) -> Fraction:
        if self.q == 0:
            raise ZeroDivisionError("slope 1/0 has no finite value")
        return Fraction(self.p, self.q)

    @property
    def key(self) -> tuple[int, int, int]:
        """Sort key: (denominator, numerator), with infinity last."""
        return (1 if self.q == 0 else 0, self.q, self.p)

    def __lt__(self, other: "Slope") -> bool:
        return self.key < other.key

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"

    def __repr__(self) -> str:
        return f"Slope({self.p}/{self.q})"


INF = Slope(1, 0)
ZERO = Slope(0, 1)

SlopeLike = Union[Slope, str, float, Fraction, int]


def as_slope(x: SlopeLike, max_denominator: int = FOLIATION_MAX_DENOMINATOR) -> Slope:
    """Coerce ``x`` to a slope; real numbers are truncated to a rational."""
    if isinstance(x, Slope):
        return x
    if isinstance(x, str):
        return Slope.parse(x)
    if isinstance(x, Fraction):
        return Slope.from_fraction(x)
    if isinstance(x, int):
        return Slope(x, 1)
    if math.isinf(x):
        return INF
    return Slope.from_fraction(Fraction(x).limit_denominator(max_denominator))


def intersection(a: Slope, b: Slope) -> int:
    """Geometric intersection number |ps - qr| of two torus curves."""
    return abs(a.p * b.q - a.q * b.p)


# --- matrices --------------------------------------------------------------


def act(m: Matrix, s: Slope) -> Slope:
    (a, b), (c, d) = m
    return Slope(a * s.p + b * s.q, c * s.p + d * s.q)


def act_real(m: Matrix, x: float) -> float:
    """Moebius action of ``m`` on a real slope (a point of the boundary)."""
    (a, b), (c, d) = m
    if math.isinf(x):
        return math.inf if c == 0 else a / c
    den = c * x + d
    if den == 0:
        return math.inf
    return (a * x + b) / den


def matmul(m: Matrix, n: Matrix) -> Matrix:
    (a, b), (c, d) = m
    (e, f), (g, h) = n
    return ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))


def inverse(m: Matrix) -> Matrix:
    (a, b), (c, d) = m
    det = a * d - b * c
    if det not in (1, -1):
        raise ValueError("matrix is not unimodular")
    return ((d * det, -b * det), (-c * det, a * det))


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        k, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - k * x1
        y0, y1 = y1, y0 - k * y1
    return a, x0, y0


def normalize_to_infinity(alpha: Slope) -> Matrix:
    """An SL(2, Z) matrix sending ``alpha`` to 1/0.

    Built from extended Euclid: with x*p + y*q = 1 the matrix
    [[x, y], [-q, p]] maps (p, q) to (1, 0).
    """
    p, q = alpha.p, alpha.q
    g, x, y = _egcd(p, q)
    if g < 0:
        x, y = -x, -y
    return ((x, y), (-q, p))


def dehn_twist(alpha: Slope, beta: Slope, k: int = 1) -> Slope:
    """Image of ``beta`` under ``k`` positive Dehn twists about ``alpha``."""
    m = normalize_to_infinity(alpha)
    shear = ((1, k), (0, 1))
    return act(matmul(inverse(m), matmul(shear, m)), beta)


# --- continued fractions and the Farey ladder ------------------------------


def continued_fraction(x: Fraction) -> list[int]:
    """Partial quotients [a0; a1, ..., an] of a rational, a0 = floor(x)."""
    num, den = x.numerator, x.denominator
    out = []
    while den:
        a, r = divmod(num, den)
        out.append(a)
        num, den = den, r
    return out


def convergents(cf: Sequence[int]) -> list[Slope]:
    h0, k0, h1, k1 = 0, 1, 1, 0
    out = []
    for a in cf:
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        out.append(Slope(h1, k1))
    return out


def from_continued_fraction(cf: Sequence[int]) -> Fraction:
    x = Fraction(cf[-1])
    for a in reversed(cf[:-1]):
        x = a + 1 / x
    return x


def _fan_indices(a: int, full: bool) -> list[int]:
    if full or a <= 6:
        return list(range(a + 1))
    return [0, 1, 2, a - 2, a - 1, a]


def farey_ladder(x: Fraction, max_vertices: int = DEFAULT_MAX_VERTICES) -> dict[Slope, set[Slope]]:
    """Pivot graph for Farey geodesics from 1/0 to ``x``.

    The vertices are those of the Farey triangles crossed by the hyperbolic
    geodesic from infinity to x: each convergent c_k together with the fan of
    intermediate fractions around it, running from c_{k-1} to c_{k+1}. Edges
    are the fan edges (centre to fan vertex, fan vertex to the next one).
    Long fans keep only the vertices near their two ends; an interior fan
    vertex can always be bypassed through the centre at no extra cost.
    """
    cf = continued_fraction(x)
    full = sum(cf[1:]) <= FULL_LADDER_LIMIT
    adj: dict[Slope, set[Slope]] = {INF: set()}

    def link(u: Slope, v: Slope) -> None:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)

    h_prev, k_prev, h, k = 1, 0, cf[0], 1
    link(INF, Slope(h, k))
    for a in cf[1:]:
        centre = Slope(h, k)
        js = _fan_indices(a, full)
        fan = [Slope(h_prev + j * h, k_prev + j * k) for j in js]
        for v in fan:
            link(centre, v)
        for i in range(len(js) - 1):
            if js[i + 1] == js[i] + 1:
                link(fan[i], fan[i + 1])
        h_prev, k_prev, h, k = h, k, a * h + h_prev, a * k + k_prev
        if len(adj) > max_vertices:
            raise SearchBoundExceeded(f"Farey ladder exceeds {max_vertices} vertices")
    return adj


def _pivot_graph(a: Slope, b: Slope, max_vertices: int) -> dict[Slope, set[Slope]]:
    """Pivot graph between ``a`` and ``b``, in original coordinates."""
    m = normalize_to_infinity(b)
    a_norm = act(m, a)
    minv = inverse(m)
    ladder = farey_ladder(a_norm.value, max_vertices)
    image = {v: act(minv, v) for v in ladder}
    return {image[u]: {image[v] for v in nbrs} for u, nbrs in ladder.items()}


def _bfs(adj: dict[Slope, set[Slope]], source: Slope) -> dict[Slope, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def distance_to_infinity(x: Fraction) -> int:
    """Farey distance from 1/0 to the rational ``x``.

    Along the ladder, the convergent c_k is reached either from c_{k-1}
    (one edge) or by walking the fan from c_{k-2} (a_k edges), so
    D_k = min(D_{k-1} + 1, D_{k-2} + a_k) with D_{-1} = 0 and D_0 = 1.
    """
    cf = continued_fraction(x)
    d_prev, d = 0, 1
    for a in cf[1:]:
        d_prev, d = d, min(d + 1, d_prev + a)
    return d


def farey_distance(a: Slope, b: Slope, max_vertices: int = DEFAULT_MAX_VERTICES) -> int:
    """Graph distance between two slopes in the Farey graph.

    ``max_vertices`` bounds the continued-fraction depth of the search.
    """
    if a == b:
        return 0
    i = intersection(a, b)
    if i == 1:
        return 1
    if i == 0:  # pragma: no cover - equal canonical slopes handled above
        return 0
    x = act(normalize_to_infinity(b), a).value
    if len(continued_fraction(x)) > max_vertices:
        raise SearchBoundExceeded(f"continued fraction deeper than {max_vertices}")
    return distance_to_infinity(x)


def farey_geodesic(a: Slope, b: Slope, max_vertices: int = DEFAULT_MAX_VERTICES) -> list[Slope]:
    """A shortest Farey path from ``a`` to ``b``.

    Ties are broken greedily from ``a``: at each step the smallest
    next vertex in ``Slope.key`` order, which yields the lexicographically
    smallest geodesic through the pivot set.
    """
    if a == b:
        return [a]
    if intersection(a, b) == 1:
        return [a, b]
    adj = _pivot_graph(a, b, max_vertices)
    dist = _bfs(adj, b)
    path = [a]
    cur = a
    while cur != b:
        cur = min(v for v in adj[cur] if dist.get(v) == dist[cur] - 1)
        path.append(cur)
    return path


# --- twisting ----------------------------------------------------------------


def normalized_value(alpha: Slope, x: Union[Slope, float]) -> Union[Fraction, float]:
    """Coordinate of ``x`` in the annular cover of ``alpha`` (alpha sent to 1/0)."""
    m = normalize_to_infinity(alpha)
    if isinstance(x, Slope):
        y = act(m, x)
        if y.is_infinite:
            raise TwistUndefined(f"{x} is disjoint from {alpha}")
        return y.value
    y = act_real(m, x)
    if math.isinf(y):
        raise TwistUndefined(f"direction {x} is parallel to {alpha}")
    return y


def twist_of(alpha: Slope, beta: Slope, origin: Slope) -> int:
    """Signed twisting of ``beta`` about ``alpha`` measured from ``origin``."""
    xb = normalized_value(alpha, beta)
    xo = normalized_value(alpha, origin)
    return math.floor(xb - xo)


def annular_projection_distance(alpha: Slope, beta1: SlopeLike, beta2: SlopeLike) -> int:
    """Relative twisting d_alpha(beta1, beta2) >= 0.

    Real directions are first truncated to slopes of denominator at most
    ``FOLIATION_MAX_DENOMINATOR``.
    """
    b1, b2 = as_slope(beta1), as_slope(beta2)
    x1 = normalized_value(alpha, b1)
    x2 = normalized_value(alpha, b2)
    return math.floor(abs(x1 - x2))
