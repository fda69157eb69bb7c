"""Command line interface.

Exit codes: 0 on success, 1 on invalid input (bad flags, rejected
parameters, unreadable or mismatched surface files), 2 on internal errors.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Optional, Sequence

from .coarse import DEFAULT_C, distance_estimate, short_marking
from .descriptor import DEFAULT_M0, GeodesicRay, evolution_of, sample_times, shadow
from .errors import BalanceUndefined, TwistUndefined
from .experiments import (
    ScenarioReport,
    run_backtrack_suite,
    run_counterexample,
    run_ends_check,
    run_fellow_travel,
)
from .flat import FlatTorus, anosov_torus, build_counterexample_pair, flow, torus_from_directions, torus_from_tau
from .serialize import atomic_write, load_surface, marking_to_dict, render_json, render_tsv, surface_to_dict, tsv_cell


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the result here instead of stdout")
    p.add_argument("--out-dir", help="write <command>.tsv / .json report files into this directory")
    p.add_argument("--format", choices=("tsv", "json"), default="tsv")
    p.add_argument("--threshold-C", dest="C", type=float, default=DEFAULT_C)
    p.add_argument("--M0", type=float, default=DEFAULT_M0)
    return p


def _ray_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--surface", help="surface JSON file (default: the Anosov torus)")
    p.add_argument("--vertical", type=float, help="vertical foliation slope (with --horizontal)")
    p.add_argument("--horizontal", type=float)
    p.add_argument("--t-min", type=float, default=0.0)
    p.add_argument("--t-max", type=float, default=10.0)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="teichflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("describe", parents=[common], help="curve evolution table for a ray")
    _ray_args(p)
    p.add_argument("--piece", choices=("Y", "Z"))

    p = sub.add_parser("distance", parents=[common], help="distance estimate between two surfaces")
    p.add_argument("a")
    p.add_argument("b")

    p = sub.add_parser("shadow", parents=[common], help="shadow of a ray in a curve complex")
    _ray_args(p)
    p.add_argument("--piece", choices=("Y", "Z"))
    p.add_argument("--dt", type=float, default=0.1)

    p = sub.add_parser("counterexample", parents=[common], help="slit-torus counterexample sweep")
    p.add_argument("--d", type=_floats, default=[4.0, 6.0, 8.0, 10.0])
    p.add_argument("--c", type=float, default=0.1)
    p.add_argument("--delta-factor", type=float, default=100.0)

    p = sub.add_parser("fellow-travel", parents=[common], help="perturbed torus rays")
    p.add_argument("--lengths", type=_floats, default=[5.0, 10.0, 20.0])
    p.add_argument("--perturbation", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=20)

    p = sub.add_parser("backtrack", parents=[common], help="no-backtracking statistics")
    p.add_argument("--n-rays", type=int, default=50)
    p.add_argument("--t-span", type=float, default=20.0)

    p = sub.add_parser("ends-check", parents=[common], help="ends check on the counterexample")
    p.add_argument("--d", type=_floats, default=[4.0, 6.0, 8.0, 10.0])
    p.add_argument("--c", type=float, default=0.1)
    p.add_argument("--delta-factor", type=float, default=100.0)

    p = sub.add_parser("make-surface", parents=[common], help="write a surface JSON document")
    kind = p.add_mutually_exclusive_group(required=True)
    kind.add_argument("--tau", type=_floats, help="torus with period ratio x,y")
    kind.add_argument("--anosov", action="store_true", help="torus on the axis of [[2,1],[1,1]]")
    kind.add_argument("--counterexample", choices=("first", "second"))
    p.add_argument("--d", type=float, default=4.0)
    p.add_argument("--c", type=float, default=0.1)
    p.add_argument("--delta-factor", type=float, default=100.0)
    p.add_argument("--time", type=float, default=0.0)
    return parser


def _emit(args, text: str) -> None:
    if args.out:
        atomic_write(args.out, text)
    elif args.out_dir:
        atomic_write(os.path.join(args.out_dir, f"{args.command}.{args.format}"), text)
    else:
        sys.stdout.write(text)


def _emit_table(args, title: str, columns: list[str], rows: list[list], extra: Optional[dict] = None) -> None:
    if args.format == "json":
        doc = {"schema_version": 1, "kind": title, "columns": columns, "rows": rows}
        doc.update(extra or {})
        _emit(args, render_json(doc))
    else:
        comments = [f"kind: {title}", "schema_version: 1"]
        comments += [f"{k}: {tsv_cell(v)}" for k, v in sorted((extra or {}).items())]
        _emit(args, render_tsv(columns, rows, comments))


def _emit_report(args, rep: ScenarioReport) -> None:
    if args.out_dir and not args.out:
        base = os.path.join(args.out_dir, args.command)
        atomic_write(base + ".tsv", rep.to_tsv())
        atomic_write(base + ".json", rep.to_json())
        return
    _emit(args, rep.to_json() if args.format == "json" else rep.to_tsv())


def _ray(args) -> GeodesicRay:
    if args.surface:
        q = load_surface(args.surface)
    elif args.vertical is not None or args.horizontal is not None:
        if args.vertical is None or args.horizontal is None:
            raise ValueError("--vertical and --horizontal go together")
        q = torus_from_directions(args.vertical, args.horizontal)
    else:
        q = anosov_torus()
    return GeodesicRay(q, (args.t_min, args.t_max))


def cmd_describe(args) -> None:
    G = _ray(args)
    piece = getattr(args, "piece", None)
    curves: list = sorted(set(shadow(G, piece).vertices))
    if not isinstance(G.start, FlatTorus):
        curves.append("gamma")
    rows = []
    for c in curves:
        try:
            ev = evolution_of(G, c, piece)
        except (BalanceUndefined, TwistUndefined):
            continue
        rows.append([str(c), ev.L, ev.t_bal, ev.T])
    rows.sort(key=lambda r: r[2])
    _emit_table(args, "describe", ["curve", "L", "t_bal", "T"], rows)


def cmd_distance(args) -> None:
    x, y = load_surface(args.a), load_surface(args.b)
    mx, my = short_marking(x), short_marking(y)
    br = distance_estimate(mx, my, args.C)
    rows = [[term, key, val] for term in ("pieces", "annuli", "one_sided", "common")
            for key, val in sorted(getattr(br, term).items())]
    extra = {"total": br.total, "C": args.C}
    if args.format == "json":
        extra.update(marking_x=marking_to_dict(mx), marking_y=marking_to_dict(my))
    _emit_table(args, "distance", ["term", "curve", "value"], rows, extra)


def cmd_shadow(args) -> None:
    G = _ray(args)
    s = shadow(G, args.piece, sample_times(G.t_range, args.dt))
    _emit_table(args, "shadow", ["time", "slope", "length", "twist", "modulus"], [list(r) for r in s.rows()])


def cmd_make_surface(args) -> None:
    if args.tau:
        if len(args.tau) != 2:
            raise ValueError("--tau takes x,y")
        q = torus_from_tau(complex(*args.tau))
    elif args.anosov:
        q = anosov_torus()
    else:
        delta = args.c * math.exp(-args.d / 2) / args.delta_factor
        pair = build_counterexample_pair(args.d, args.c, delta)
        q = pair[0] if args.counterexample == "first" else pair[1]
    _emit(args, render_json(surface_to_dict(flow(q, args.time))))


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cmd = args.command
    if cmd == "describe":
        cmd_describe(args)
    elif cmd == "distance":
        cmd_distance(args)
    elif cmd == "shadow":
        cmd_shadow(args)
    elif cmd == "make-surface":
        cmd_make_surface(args)
    elif cmd == "counterexample":
        _emit_report(args, run_counterexample(args.d, args.c, args.delta_factor, C=args.C, M0=args.M0))
    elif cmd == "fellow-travel":
        _emit_report(args, run_fellow_travel(args.lengths, args.perturbation, args.samples, args.seed))
    elif cmd == "backtrack":
        _emit_report(args, run_backtrack_suite(args.n_rays, args.seed, args.t_span))
    elif cmd == "ends-check":
        _emit_report(args, run_ends_check(args.d, args.c, args.delta_factor, M0=args.M0))
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        return run(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (ValueError, OSError) as exc:
        print(f"teichflow: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"teichflow: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
