"""Acceptance criteria, one test each; every test prints a PASS/FAIL line with its measured constants."""

import math
import random
import time

import numpy as np
import pytest

from oracles import bfs, crossing_count, naive_farey_graph, slopes_up_to
from teichflow.coarse import DEFAULT_C, distance_estimate, extremal_length_torus, short_marking
from teichflow.curves import (
    Slope,
    dehn_twist,
    farey_distance,
    farey_geodesic,
    from_continued_fraction,
    intersection,
    twist_of,
)
from teichflow.descriptor import GeodesicRay, evolution_of, isolation_interval, isolation_order_check
from teichflow.experiments import (
    is_thick,
    random_ray_torus,
    run_backtrack_suite,
    run_counterexample,
    run_fellow_travel,
    uh_step,
)
from teichflow.flat import (
    balance_data,
    build_counterexample_pair,
    cylinder_modulus_profile,
    cylinder_size_profile,
    flat_length,
    flow,
    torus_from_directions,
    torus_from_tau,
    torus_teich_distance,
    twist_profile,
)

SWEEP = [4.0, 6.0, 8.0, 10.0]
GOLDEN = (math.sqrt(5) - 1) / 2


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'}: criterion {n} {detail}")
        return ok

    return emit


def random_tau(rng):
    return complex(rng.uniform(-0.5, 0.5), rng.uniform(0.3, 3.0))


def random_slope(rng, n=40):
    return Slope(int(rng.integers(-n, n + 1)), int(rng.integers(1, n + 1)))


def test_criterion_1_cosh_law(report):
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    ratios = []
    for _ in range(200):
        q = flow(random_ray_torus(rng), float(rng.uniform(-3, 3)))
        alpha = random_slope(rng)
        t = float(rng.uniform(-12, 12))
        ev = balance_data(q, alpha)
        exact = flat_length(flow(q, t), alpha)[0]
        ratios.append(exact / ev.coarse_length(t))
    elapsed = time.perf_counter() - t0
    lo, hi = min(ratios), max(ratios)
    bad = sum(not (1 - 1e-12 <= r <= math.sqrt(2) + 1e-12) for r in ratios)
    ok = report(1, bad == 0 and elapsed < 1.0,
                f"cosh law ratio in [{lo:.6f}, {hi:.6f}], violations={bad}, runtime={elapsed:.3f}s")
    assert ok


def test_criterion_2_profiles(report):
    rng = np.random.default_rng(2)
    violations = 0
    worst_size = 1.0
    peaks = []
    for _ in range(50):
        G = GeodesicRay(random_ray_torus(rng), (-20.0, 20.0))
        alpha = random_slope(rng, 12)
        ev = evolution_of(G, alpha)
        grid = np.linspace(ev.t_bal - 6, ev.t_bal + 6, 100)
        tw = np.array([twist_profile(ev, t) for t in grid])
        mod = np.array([cylinder_modulus_profile(ev, t) for t in grid])
        tol = 1e-12 * max(ev.T, 1.0)
        violations += int(np.sum(np.diff(tw) < -tol))
        k = int(np.argmax(mod))
        violations += int(np.sum(np.diff(mod[: k + 1]) < -tol)) + int(np.sum(np.diff(mod[k:]) > tol))
        violations += int(mod.max() > ev.T + tol)
        violations += int(abs(cylinder_modulus_profile(ev, ev.t_bal) - ev.T) > tol)
        if ev.T > 0:
            peaks.append(abs(grid[k] - ev.t_bal))
        q0 = G.at(0.0)
        for t in grid:
            size = cylinder_size_profile(ev, t)
            prod = cylinder_modulus_profile(ev, t) * flat_length(flow(q0, float(t)), alpha)[0]
            if ev.T == 0:
                violations += int(size != 0)
                continue
            r = size / prod
            worst_size = max(worst_size, r, 1 / r)
            violations += int(not (1 / math.sqrt(2) - 1e-9 <= r <= math.sqrt(2) + 1e-9))
    ok = report(2, violations == 0,
                f"violations={violations}, size/(modulus*length) within factor {worst_size:.6f}, "
                f"max grid peak offset={max(peaks):.3f}")
    assert ok


def test_criterion_3_torus_extremal_length(report):
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(100):
        tau = random_tau(rng)
        t = float(rng.uniform(-5, 5))
        s = random_slope(rng, 30)
        q = flow(torus_from_tau(tau), t)
        # independent holonomy: (s.q + s.p * tau) on the unit-area lattice, then stretched
        h = (s.q + s.p * tau) / math.sqrt(tau.imag)
        sq = (math.exp(t) * h.real) ** 2 + (math.exp(-t) * h.imag) ** 2
        worst = max(worst, abs(extremal_length_torus(q, s) - sq) / sq)
    ok = report(3, worst <= 1e-12, f"max relative error={worst:.3e}")
    assert ok


def test_criterion_4_distance_oracle(report):
    rng = np.random.default_rng(4)
    pairs = []
    while len(pairs) < 100:
        z = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.87, 3.0))
        w = uh_step(z, 2 * rng.uniform(1, 10), rng.uniform(0, 2 * math.pi))
        x, y = torus_from_tau(z), torus_from_tau(w)
        if is_thick(x) and is_thick(y):
            pairs.append((x, y))
    t0 = time.perf_counter()
    exact = np.array([torus_teich_distance(x, y) for x, y in pairs])
    marks = [(short_marking(x), short_marking(y)) for x, y in pairs]
    est = np.array([distance_estimate(mx, my, 1.0).total for mx, my in marks])
    elapsed = time.perf_counter() - t0
    est_default = np.array([distance_estimate(mx, my, DEFAULT_C).total for mx, my in marks])
    assert exact.min() >= 1 - 1e-9 and exact.max() <= 10 + 1e-9
    inside = (est <= 4 * exact + 5) & (est >= exact / 4 - 5)
    slope, icpt = np.polyfit(exact, est, 1)
    d_slope, d_icpt = np.polyfit(exact, est_default, 1)
    ok = report(4, bool(inside.all()) and elapsed < 10.0,
                f"C=1: fit est={slope:.3f}*d+{icpt:.3f}, ratio range [{(est / exact).min():.3f}, "
                f"{(est / exact).max():.3f}], outside={int((~inside).sum())}; "
                f"C={DEFAULT_C:g}: fit est={d_slope:.3f}*d+{d_icpt:.3f}; runtime={elapsed:.2f}s")
    assert ok


def test_criterion_5_no_backtracking(report):
    t0 = time.perf_counter()
    short = run_backtrack_suite(50, seed=5, t_span=20.0)
    t_short = time.perf_counter() - t0
    t0 = time.perf_counter()
    long = run_backtrack_suite(50, seed=5, t_span=40.0)
    t_long = time.perf_counter() - t0
    k20, k40 = short.summary["max_defect"], long.summary["max_defect"]
    ok = report(5, k20 <= 6 and k40 <= k20 and t_short < 60 and t_long < 60,
                f"max defect t_span=20: {k20}, t_span=40: {k40}, runtimes={t_short:.1f}s/{t_long:.1f}s")
    assert ok


def test_criterion_6_counterexample(report):
    t0 = time.perf_counter()
    rep = run_counterexample(SWEEP)
    elapsed = time.perf_counter() - t0
    s = rep.summary
    dY = [r["dY_d"] for r in rep.records()]
    ok = report(6, s["n_ok"] == 4 and s["endpoint_ratio"] <= 1.5 and s["midpoint_dY_slope"] >= 0.5
                and elapsed < 60,
                f"endpoint max/min={s['endpoint_ratio']:.4f}, midpoint d_Y={dY}, "
                f"slope={s['midpoint_dY_slope']:.3f}, runtime={elapsed:.2f}s")
    assert ok


def test_criterion_7_fellow_travel(report):
    rep = run_fellow_travel([5.0, 10.0, 20.0], perturbation=1.0)
    s = rep.summary
    ok = report(7, s["D"] <= 2 and s["growth"] <= 0.1,
                f"D={s['D']:.7f}, per length={s['max_by_length']}, growth={s['growth']:.2e}")
    assert ok


def test_criterion_8_isolation_intervals(report):
    worst = 0.0
    found = []
    for d in SWEEP:
        q0, qb = build_counterexample_pair(d, 0.1, 0.1 * math.exp(-d / 2) / 100)
        a = isolation_interval(GeodesicRay(q0, (0.0, 2 * d)), "Y", M0=2.0).interval
        b = isolation_interval(GeodesicRay(qb, (0.0, 2 * d)), "Y", M0=2.0).interval
        assert a is not None and b is not None
        worst = max(worst, abs(a[0]), abs(a[1] - d), abs(b[0] - d), abs(b[1] - 2 * d))
        found.append(f"d={d:g}:[{a[0]:.2f},{a[1]:.2f}]/[{b[0]:.2f},{b[1]:.2f}]")
    ok = report(8, worst <= 0.5, f"max endpoint error={worst:.4f} " + " ".join(found))
    assert ok


def test_criterion_9_order(report):
    rng = random.Random(9)
    total_violations = 0
    sizes = []
    for _ in range(20):
        cf = [0] + [rng.randint(1, 2) for _ in range(14)]
        for pos in rng.sample(range(1, 8), rng.randint(2, 3)):
            cf[pos] = rng.randint(15, 40)
        G = GeodesicRay(torus_from_directions(float(from_continued_fraction(cf)), -1 / GOLDEN), (-20.0, 20.0))
        rep = isolation_order_check(G)
        assert len(rep.curves) >= 2, cf
        sizes.append(len(rep.curves))
        total_violations += len(rep.violations)
    ok = report(9, total_violations == 0,
                f"20 directions, short curves per ray {min(sizes)}..{max(sizes)}, violations={total_violations}")
    assert ok


def test_criterion_10_exhaustive_small(report):
    verts = slopes_up_to(20, lo=-2, hi=2)
    adj = naive_farey_graph(verts)
    targets = slopes_up_to(20, lo=-1, hi=1)
    failures = 0
    D = np.zeros((len(targets), len(targets)), dtype=np.int16)
    for i, a in enumerate(targets):
        oracle = bfs(adj, a)
        for j, b in enumerate(targets):
            D[i, j] = farey_distance(a, b)
            g = farey_geodesic(a, b)
            failures += int(D[i, j] != oracle[b])
            failures += int(len(g) - 1 != oracle[b] or g[0] != a or g[-1] != b)
            failures += int(any(intersection(u, v) != 1 for u, v in zip(g, g[1:])))
    failures += int(not np.all((D == 0) == np.eye(len(targets), dtype=bool)))
    failures += int(not np.array_equal(D, D.T))
    for j in range(len(targets)):
        failures += int(not np.all(D <= D[:, j : j + 1] + D[j : j + 1, :]))

    rng = random.Random(10)
    small = [s for s in targets if s.q <= 6] + [Slope(1, 0)]
    for a in small:
        for b in small:
            failures += int(intersection(a, b) != intersection(b, a))
            failures += int((intersection(a, b) == 0) != (a == b))
            failures += int(intersection(a, b) != crossing_count(a, b))

    cases = 0
    while cases < 100:
        alpha = Slope(rng.randint(-30, 30), rng.randint(1, 30))
        beta = Slope(rng.randint(-30, 30), rng.randint(1, 30))
        origin = Slope(rng.randint(-30, 30), rng.randint(1, 30))
        if intersection(alpha, beta) == 0 or intersection(alpha, origin) == 0:
            continue
        k = rng.randint(-20, 20)
        failures += int(twist_of(alpha, dehn_twist(alpha, beta, k), origin) != twist_of(alpha, beta, origin) + k)
        cases += 1
    ok = report(10, failures == 0,
                f"{len(targets)} slopes ({len(targets) ** 2} pairs), 100 twist cases, failures={failures}")
    assert ok
