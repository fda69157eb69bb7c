"""Scenario runners: counterexample sweep, fellow traveling, no-backtracking, ends.

Every scenario returns a :class:`ScenarioReport` whose rows hold the inputs
needed to recompute them, and whose summary is derived from the rows only.
"""

from __future__ import annotations

import cmath
import math
import os
import platform
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__
from .coarse import DEFAULT_C, bounded_distance_check, distance_estimate, extremal_length_torus, short_marking
from .curves import farey_distance, from_continued_fraction
from .descriptor import (
    DEFAULT_M0,
    GeodesicRay,
    defect_summary,
    ends_consistency_check,
    isolation_interval,
    sample_times,
    shadow,
)
from .errors import NotThick
from .flat import (
    FlatTorus,
    anosov_torus,
    build_counterexample_pair,
    flow,
    restricted_systole,
    systole,
    tau_of,
    torus_from_directions,
    torus_from_tau,
)
from .serialize import SCHEMA_VERSION, atomic_write, render_json, render_tsv, tsv_cell

SCENARIOS = ("backtrack", "fellow_travel", "counterexample", "ends_check")
DEFAULT_C_SLIT = 0.1
DEFAULT_DELTA_FACTOR = 100.0
THICK_EPS = 0.1


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    seed: int = 0
    parameters: dict = field(default_factory=dict)
    output_dir: Optional[str] = None

    def __post_init__(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}; choose from {', '.join(SCENARIOS)}")


@dataclass
class ScenarioReport:
    scenario: str
    config: dict
    columns: list[str]
    rows: list[list[Any]]
    summary: dict

    def provenance(self) -> dict:
        return {
            "package": "teichflow",
            "version": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        }

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "scenario": self.scenario,
            "config": self.config,
            "columns": self.columns,
            "rows": self.rows,
            "summary": self.summary,
            "provenance": self.provenance(),
        }

    def to_json(self) -> str:
        return render_json(self.to_dict())

    def to_tsv(self) -> str:
        comments = [f"scenario: {self.scenario}", f"schema_version: {SCHEMA_VERSION}"]
        comments += [f"config.{k}: {tsv_cell(v)}" for k, v in sorted(self.config.items())]
        comments += [f"summary.{k}: {tsv_cell(v)}" for k, v in sorted(self.summary.items())]
        comments += [f"provenance.{k}: {v}" for k, v in sorted(self.provenance().items())]
        return render_tsv(self.columns, self.rows, comments)

    def records(self) -> list[dict]:
        return [dict(zip(self.columns, r)) for r in self.rows]


# --- counterexample ------------------------------------------------------------


def _fit_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    if len(xs) < 2:
        return math.nan
    return float(np.polyfit(np.asarray(xs, float), np.asarray(ys, float), 1)[0])


def run_counterexample(
    d_values: Sequence[float],
    c: float = DEFAULT_C_SLIT,
    delta_factor: float = DEFAULT_DELTA_FACTOR,
    *,
    C: float = DEFAULT_C,
    M0: float = DEFAULT_M0,
) -> ScenarioReport:
    """Sweep the slit-torus pair over d and compare the two geodesics at 0, d, 2d.

    The small piece is scaled by delta = c e^{-d/2} / delta_factor.
    """
    ds = [float(d) for d in d_values]
    if not ds:
        raise ValueError("need at least one value of d")
    for d in ds:
        if not d >= 2:
            raise ValueError(f"d must be >= 2, got {d}")
    if not delta_factor > 10:
        raise ValueError("delta_factor must exceed 10 so that delta < c e^(-d/2) / 10")
    columns = [
        "d", "epsilon", "delta", "est_0", "est_d", "est_2d", "midpoint_lower", "dY_0", "dY_d", "dY_2d",
        "IY_lo", "IY_hi", "IbarY_lo", "IbarY_hi", "bounded_0", "bounded_2d", "bounded_d", "error",
    ]
    rows = []
    for d in sorted(ds):
        eps = c * math.exp(-d / 2)
        delta = eps / delta_factor
        try:
            q0, qb = build_counterexample_pair(d, c, delta)
        except ValueError as exc:
            rows.append([d, eps, delta] + [None] * (len(columns) - 4) + [str(exc)])
            continue
        est, dY, bnd = [], [], []
        for t in (0.0, d, 2 * d):
            x, y = flow(q0, t), flow(qb, t)
            est.append(distance_estimate(short_marking(x), short_marking(y), C).total)
            sy_x = restricted_systole(x.small, x.slit_holonomy)[0]
            sy_y = restricted_systole(y.small, y.slit_holonomy)[0]
            dY.append(farey_distance(sy_x, sy_y))
            bnd.append(bounded_distance_check(x, y).ok)
        iy = isolation_interval(GeodesicRay(q0, (0.0, 2 * d)), "Y", M0).interval
        iby = isolation_interval(GeodesicRay(qb, (0.0, 2 * d)), "Y", M0).interval
        # a point of the second segment within r of x_d would force est_d <~ 2r
        rows.append([d, eps, delta, *est, est[1] / 2, *dY, *(iy or (None, None)), *(iby or (None, None)),
                     bnd[0], bnd[2], bnd[1], ""])
    ok = [dict(zip(columns, r)) for r in rows if not r[-1]]
    bracketed = [r for r in ok if r["IY_lo"] is not None and r["IbarY_lo"] is not None]
    ends = [r[k] for r in ok for k in ("est_0", "est_2d")]
    summary: dict[str, Any] = {"n_ok": len(ok), "n_failed": len(rows) - len(ok)}
    if ok:
        summary.update(
            endpoint_max=max(ends),
            endpoint_min=min(ends),
            endpoint_ratio=max(ends) / min(ends),
            midpoint_dY_slope=_fit_slope([r["d"] for r in ok], [r["dY_d"] for r in ok]),
            midpoint_over_endpoint=[r["dY_d"] / max(r["est_0"], r["est_2d"]) for r in ok],
            interval_max_error=max(
                max(abs(r["IY_lo"]), abs(r["IY_hi"] - r["d"]), abs(r["IbarY_lo"] - r["d"]),
                    abs(r["IbarY_hi"] - 2 * r["d"]))
                for r in bracketed
            ) if bracketed else math.inf,
        )
    config = {"d_values": sorted(ds), "c": c, "delta_factor": delta_factor, "C": C, "M0": M0}
    return ScenarioReport("counterexample", config, columns, rows, summary)


# --- fellow traveling ---------------------------------------------------------


def uh_distance(z: complex, w: complex) -> float:
    return math.acosh(1 + abs(z - w) ** 2 / (2 * z.imag * w.imag))


def _rotate_about_i(theta: float, z: complex) -> complex:
    # elliptic element fixing i; turns tangent directions at i by theta
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return (c * z - s) / (s * z + c)


def _direction_at_i(w: complex) -> float:
    """Angle of the geodesic from i towards w, measured from the upward direction."""
    return -cmath.phase((w - 1j) / (w + 1j))


def uh_step(z: complex, distance: float, angle: float) -> complex:
    """Point at hyperbolic distance ``distance`` from z leaving at ``angle``."""
    p = _rotate_about_i(angle, 1j * math.exp(distance))
    return p * z.imag + z.real


def uh_point_along(z1: complex, z2: complex, s: float) -> complex:
    """Point at fraction ``s`` of the hyperbolic segment from z1 to z2."""
    # move z1 to i, read off direction and length, walk, move back
    w = (z2 - z1.real) / z1.imag
    D = uh_distance(1j, w)
    if D == 0:
        return z1
    return uh_step(z1, s * D, _direction_at_i(w))


def is_thick(q: FlatTorus, eps: float = THICK_EPS) -> bool:
    s, _ = systole(q)
    return extremal_length_torus(q, s) >= eps


def run_fellow_travel(
    lengths: Sequence[float] = (5.0, 10.0, 20.0),
    perturbation: float = 1.0,
    samples: int = 20,
    seed: int = 0,
    *,
    base: Optional[FlatTorus] = None,
    n_match: int = 201,
) -> ScenarioReport:
    """Perturb both endpoints of torus rays by ``perturbation`` and track the divergence.

    Teichmueller space of the torus is the hyperbolic plane with distance
    d_T = d_H / 2, so the perturbed geodesic is a hyperbolic segment. Points
    are matched at equal fractions of the two segments.
    """
    if not 0 <= perturbation <= 1:
        raise ValueError("perturbation must lie in [0, 1]")
    if samples < 1:
        raise ValueError("samples must be positive")
    base = anosov_torus() if base is None else base
    rng = np.random.default_rng(seed)
    angles = rng.uniform(0.0, 2 * math.pi, size=(samples, 2))
    columns = ["length", "sample", "angle_x", "angle_y", "end_div_x", "end_div_y", "max_div"]
    rows = []
    fr = np.linspace(0.0, 1.0, n_match)
    for L in lengths:
        # centred on the base torus, which keeps both ends far from the real axis
        x, y = flow(base, -L / 2), flow(base, L / 2)
        for q in (x, y):
            if not is_thick(q):
                raise NotThick(f"endpoint of the base ray of length {L} is not thick")
        zx, zy = tau_of(x), tau_of(y)
        for k in range(samples):
            ax, ay = angles[k]
            zxb = uh_step(zx, 2 * perturbation, ax)
            zyb = uh_step(zy, 2 * perturbation, ay)
            for z in (zxb, zyb):
                if not is_thick(torus_from_tau(z)):
                    raise NotThick(f"perturbed endpoint {z} is not thick")
            div = [0.5 * uh_distance(uh_point_along(zx, zy, s), uh_point_along(zxb, zyb, s)) for s in fr]
            rows.append([L, k, ax, ay, div[0], div[-1], max(div)])
    by_len = {L: max(r[6] for r in rows if r[0] == L) for L in lengths}
    summary = {
        "D": max(by_len.values()),
        "max_by_length": {str(k): v for k, v in by_len.items()},
        "growth": max(by_len.values()) - min(by_len.values()),
        "max_endpoint_divergence": max(max(r[4], r[5]) for r in rows),
    }
    config = {"lengths": list(lengths), "perturbation": perturbation, "samples": samples, "seed": seed}
    return ScenarioReport("fellow_travel", config, columns, rows, summary)


# --- no-backtracking -------------------------------------------------------------


def random_direction(rng: np.random.Generator, depth: int = 30, max_quotient: int = 9) -> float:
    """A slope in (0, 1) with partial quotients uniform on 1..max_quotient."""
    cf = [0] + [int(a) for a in rng.integers(1, max_quotient + 1, size=depth)]
    return float(from_continued_fraction(cf))


def random_ray_torus(rng: np.random.Generator, depth: int = 30) -> FlatTorus:
    vertical = random_direction(rng, depth)
    horizontal = -1.0 / random_direction(rng, depth)
    return torus_from_directions(vertical, horizontal)


def run_backtrack_suite(n_rays: int, seed: int = 0, t_span: float = 20.0, *, dt: float = 0.1) -> ScenarioReport:
    """Shadows of random torus rays over [0, t_span] and their backtracking defects."""
    if n_rays < 1:
        raise ValueError("n_rays must be >= 1")
    if not t_span > 0:
        raise ValueError("t_span must be positive")
    rng = np.random.default_rng(seed)
    columns = ["ray", "vertical", "horizontal", "n_samples", "n_vertices", "max_defect", "mean_defect",
               "argmax", "max_step"]
    rows = []
    for k in range(n_rays):
        q = random_ray_torus(rng)
        G = GeodesicRay(q, (0.0, t_span))
        s = shadow(G, times=sample_times(G.t_range, dt))
        rep = defect_summary(s)
        vs = s.compressed()
        step = max((farey_distance(a, b) for a, b in zip(vs, vs[1:])), default=0)
        rows.append([k, q.vertical_slope, q.horizontal_slope, len(s.times), rep.n_vertices, rep.max,
                     rep.mean, rep.as_dict()["argmax"], step])
    defects = [r[5] for r in rows]
    summary = {
        "max_defect": max(defects),
        "mean_defect": float(np.mean(defects)),
        "histogram": {str(v): defects.count(v) for v in sorted(set(defects))},
        "max_step": max(r[8] for r in rows),
    }
    config = {"n_rays": n_rays, "seed": seed, "t_span": t_span, "dt": dt}
    return ScenarioReport("backtrack", config, columns, rows, summary)


# --- ends ---------------------------------------------------------------------


def run_ends_check(
    d_values: Sequence[float],
    c: float = DEFAULT_C_SLIT,
    delta_factor: float = DEFAULT_DELTA_FACTOR,
    *,
    M0: float = DEFAULT_M0,
    margin: float = 1.0,
) -> ScenarioReport:
    """Ends check for piece Y along the first counterexample geodesic.

    Two windows per d: [-margin, d + margin], which contains I_Y, and
    [d + margin, 2d], which misses it.
    """
    columns = ["d", "a", "b", "case", "d_endpoints", "interval_lo", "interval_hi", "constant", "ok"]
    rows = []
    for d in sorted(float(x) for x in d_values):
        q0, _ = build_counterexample_pair(d, c, c * math.exp(-d / 2) / delta_factor)
        G = GeodesicRay(q0, (-margin - 2 * d, 4 * d))
        for a, b in ((-margin, d + margin), (d + margin, 2 * d)):
            (rep,) = ends_consistency_check(G, a, b, ("Y",), M0=M0)
            lo, hi = rep.interval.interval or (None, None)
            rows.append([d, a, b, rep.case, rep.d_endpoints, lo, hi, rep.constant, rep.ok])
    summary = {
        "all_ok": all(r[8] for r in rows),
        "case1_min_rate": min((r[7] for r in rows if r[3] == 1), default=None),
        "case2_max_distance": max((r[4] for r in rows if r[3] == 2), default=None),
    }
    config = {"d_values": sorted(float(x) for x in d_values), "c": c, "delta_factor": delta_factor,
              "M0": M0, "margin": margin}
    return ScenarioReport("ends_check", config, columns, rows, summary)


def run_scenario(cfg: ScenarioConfig) -> ScenarioReport:
    """Run one configured scenario; with ``output_dir`` set, also write <scenario>.tsv and .json."""
    p = dict(cfg.parameters)
    if cfg.scenario == "counterexample":
        rep = run_counterexample(p.pop("d_values", (4, 6, 8, 10)), **p)
    elif cfg.scenario == "fellow_travel":
        rep = run_fellow_travel(seed=cfg.seed, **p)
    elif cfg.scenario == "backtrack":
        rep = run_backtrack_suite(p.pop("n_rays", 50), seed=cfg.seed, **p)
    else:
        rep = run_ends_check(p.pop("d_values", (4, 6, 8, 10)), **p)
    if cfg.output_dir:
        base = os.path.join(cfg.output_dir, cfg.scenario)
        atomic_write(base + ".tsv", rep.to_tsv())
        atomic_write(base + ".json", rep.to_json())
    return rep


__all__ = [
    "ScenarioConfig", "ScenarioReport", "run_counterexample", "run_fellow_travel",
    "run_backtrack_suite", "run_ends_check", "run_scenario", "uh_distance", "uh_point_along",
    "uh_step", "random_direction", "random_ray_torus",
]
