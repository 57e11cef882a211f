"""Command line entry point: run a pipeline on a fixture and emit a JSON report.

Exit status: 0 when every check passes, 1 when one fails, 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from typing import Callable

import numpy as np

from . import exact
from .beta import (
    BetaGenericityError,
    BetaSeries,
    beta_classes,
    beta_pairing_closed_form,
    dual_class,
    random_generic_betas,
)
from .cohomology import Cohomology, gamma_todd_residual, presentation_json, total_divisor_residual
from .fixtures import Fixture, FixtureError, load_fixture
from .gamma_series import ConvergenceError, GammaSeries, SeriesTruncation, blocks_distance
from .geometry import GeometryError, choose_generic_v, normalized_volume, points_of_degree_at_most
from .pairing import (
    blocks_json,
    build_pairing_table,
    closed_form_constant,
    cocycle_cases,
    check_cocycle,
    exhaustive_cocycle,
    flipped_xi,
    inverse_residual,
    log_identity_residual,
)
from .special import MAX_ORDER
from .triangulation import box_elements, pl_value

COMMANDS = (
    "describe",
    "triangulate",
    "xi-table",
    "check-cocycle",
    "pairing-const",
    "chi-matrix",
    "verify-duality",
    "verify-bbgkz",
    "beta-pairing",
)


class Report:
    def __init__(self, command: str, fixture: str, heights: str | None, seed: int):
        self.command = command
        self.fixture = fixture
        self.heights = heights
        self.seed = seed
        self.checks: list[dict] = []
        self.data: dict = {}

    def check(self, name: str, residual: float, tol: float, passed: bool | None = None) -> None:
        if passed is None:
            passed = bool(residual <= tol)
        res = residual if math.isfinite(residual) else str(residual)
        self.checks.append({"name": name, "residual": res, "tol": tol, "pass": bool(passed)})

    @property
    def ok(self) -> bool:
        return all(c["pass"] for c in self.checks)

    def to_dict(self, runtime_ms: float | None) -> dict:
        return {
            "command": self.command,
            "fixture": self.fixture,
            "heights": self.heights,
            "checks": self.checks,
            "runtime_ms": runtime_ms,
            "seed": self.seed,
            "data": self.data,
        }


def _cplx(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _heights_names(fx: Fixture, args) -> list[str]:
    return [args.heights] if args.heights else list(fx.heights)


def _trunc(fx: Fixture, args) -> SeriesTruncation:
    return SeriesTruncation(bound=args.bound or fx.bound, order=args.order if args.order is not None else MAX_ORDER)


def _lambdas(fx: Fixture, args) -> list[float]:
    return [args.lam] if args.lam is not None else list(fx.lambdas)


# ------------------------------------------------------------------ commands

def cmd_describe(fx: Fixture, args, rep: Report) -> None:
    cone = fx.cone
    rep.data = {
        "rank": cone.rank,
        "n": cone.n,
        "points": [list(p) for p in cone.points],
        "volume": cone.total_volume,
        "facets": [list(f) for f in cone.facets],
        "triangulations": {},
    }
    for name in _heights_names(fx, args):
        tri = fx.triangulation(name)
        coh = Cohomology(tri)
        rep.data["triangulations"][name] = {
            "maximal_cones": tri.export(),
            "box_size": len(box_elements(tri)),
            "sectors": [{"gamma": list(s.sector.gamma), "dim_H": s.H.dim, "dim_Hc": s.Hc.dim} for s in coh],
        }
        rep.check(f"rank law [{name}]", abs(coh.total_dim - cone.total_volume), 0)
        rep.check(f"dim H = dim Hc [{name}]", abs(coh.total_dim - coh.total_compact_dim), 0)


def cmd_triangulate(fx: Fixture, args, rep: Report) -> None:
    cone = fx.cone
    for name in _heights_names(fx, args):
        tri = fx.triangulation(name)
        rep.data[name] = {
            "heights": [exact.fraction_str(h) for h in tri.heights],
            "maximal_cones": tri.export(),
            "volumes": [normalized_volume(cone, m) for m in sorted(tri.maximal_cones)],
            "pl_values": [exact.fraction_str(pl_value(tri, p)) for p in cone.points],
        }
        rep.check(f"volume sum [{name}]", abs(tri.volume() - cone.total_volume), 0)


def cmd_xi_table(fx: Fixture, args, rep: Report) -> None:
    v = choose_generic_v(fx.cone, args.seed)
    table = build_pairing_table(fx.cone, v)
    rep.data = {"v": [exact.fraction_str(x) for x in v.coords], "entries": table.to_json()}
    bad = sum(
        1
        for e in table.entries
        if abs(e.coeff) != normalized_volume(fx.cone, e.I) or (e.coeff > 0) != (fx.cone.degree(e.c) % 2 == 0)
    )
    rep.check("entries are (-1)^deg(c) Vol_I", bad, 0)


def cmd_check_cocycle(fx: Fixture, args, rep: Report) -> None:
    cone = fx.cone
    v = choose_generic_v(cone, args.seed)
    if args.exhaustive:
        count, worst = exhaustive_cocycle(cone, v)
    else:
        count, worst = 0, 0
        for J, c, d in cocycle_cases(cone):
            if cone.degree(c) > cone.rank // 2 + 1:
                continue
            count += 1
            worst = max(worst, abs(check_cocycle(cone, v, c, d, J)))
    rep.data = {"v": [exact.fraction_str(x) for x in v.coords], "cases": count, "exhaustive": bool(args.exhaustive)}
    rep.check("cocycle sums vanish", worst, 0)
    table = build_pairing_table(cone, v)
    if table.entries and count:
        e = table.entries[0]
        _, flipped = exhaustive_cocycle(cone, v, flipped_xi((e.c, e.d, e.I)))
        rep.data["flipped_entry"] = {"c": list(e.c), "d": list(e.d), "I": [i + 1 for i in e.I], "max_sum": flipped}
        rep.check("flipped sign is detected", flipped, 0, passed=flipped != 0)


def cmd_pairing_const(fx: Fixture, args, rep: Report) -> None:
    tol = args.tol if args.tol is not None else 1e-6
    v = choose_generic_v(fx.cone, args.seed)
    table = build_pairing_table(fx.cone, v)
    for name in _heights_names(fx, args):
        tri = fx.triangulation(name)
        coh = Cohomology(tri)
        K = closed_form_constant(coh, table)
        rep.check(f"log identity [{name}]", log_identity_residual(coh, K), 1e-8)
        gs = GammaSeries(coh, _trunc(fx, args))
        x = _basepoint(tri, _lambdas(fx, args)[-1])
        ts = [1.0, math.e, math.e**2]
        limit = gs.pairing_limit(table, ts, x, tol)
        Kb = {(k, coh[k].dual_index): b for k, b in K.items()}
        on = {key: m for key, m in limit.items() if key in Kb}
        off = {key: m for key, m in limit.items() if key not in Kb}
        rep.check(f"limit = closed form [{name}]", blocks_distance(on, Kb), tol)
        scale = max(float(np.max(np.abs(m))) for m in Kb.values() if m.size)
        off_max = max((float(np.max(np.abs(m))) for m in off.values() if m.size), default=0.0)
        rep.check(f"off-sector blocks vanish [{name}]", off_max / scale, tol)
        rep.data[name] = {"constant": blocks_json(coh, K)}


def cmd_chi_matrix(fx: Fixture, args, rep: Report) -> None:
    for name in _heights_names(fx, args):
        tri = fx.triangulation(name)
        coh = Cohomology(tri)
        blocks = []
        worst_gt = 0.0
        min_sv = math.inf
        for s in coh:
            X = coh.chi_matrix(s.index)
            sv = np.linalg.svd(X, compute_uv=False)
            min_sv = min(min_sv, float(sv.min()) if sv.size else math.inf)
            worst_gt = max(worst_gt, gamma_todd_residual(coh, s.index))
            blocks.append(
                {
                    "gamma": list(s.sector.gamma),
                    "rows": s.H.labels(),
                    "cols": coh[s.dual_index].Hc.labels(),
                    "matrix": [[_cplx(z) for z in row] for row in X],
                }
            )
        rep.data[name] = {"blocks": blocks, "presentations": presentation_json(coh)}
        rep.check(f"chi nondegenerate [{name}]", min_sv, 1e-12, passed=min_sv > 1e-12)
        rep.check(f"Gamma/Todd identity [{name}]", worst_gt, 1e-10)
        rep.check(f"sum of D_i vanishes [{name}]", max(total_divisor_residual(s.H) for s in coh), 0)


def _basepoint(tri, lam: float, shift: float = 0.0):
    from .triangulation import convergence_basepoint

    return convergence_basepoint(tri, lam, [shift] * tri.cone.n)


def cmd_verify_duality(fx: Fixture, args, rep: Report) -> None:
    tol = args.tol if args.tol is not None else 1e-6
    cone = fx.cone
    tables = [build_pairing_table(cone, choose_generic_v(cone, s)) for s in (args.seed, args.seed + 1)]
    lams = _lambdas(fx, args)
    if len(lams) == 1:
        lams = [lams[0], lams[0] + 1, lams[0] + 2]
    for name in _heights_names(fx, args):
        tri = fx.triangulation(name)
        coh = Cohomology(tri)
        K = closed_form_constant(coh, tables[0])
        rep.check(f"inverse of Euler pairing [{name}]", inverse_residual(coh, K), tol)
        gs = GammaSeries(coh, _trunc(fx, args))
        values, tails = [], []
        for j, lam in enumerate(lams):
            P, tail = gs.pairing(tables[0], _basepoint(tri, lam, 0.3 * (-1) ** j * (j > 0)))
            values.append(P)
            tails.append(tail)
        rep.check(f"constancy [{name}]", max(blocks_distance(values[0], v) for v in values[1:]), tol)
        rep.check(f"truncation tail [{name}]", max(tails), 1e-7)
        P2, _ = gs.pairing(tables[1], _basepoint(tri, lams[0]))
        rep.check(f"independent of v [{name}]", blocks_distance(values[0], P2), 1e-8)
        Kb = {(k, coh[k].dual_index): b for k, b in K.items()}
        rep.check(f"series pairing = closed form [{name}]", blocks_distance(values[0], Kb), tol)
        rep.data[name] = {"lambdas": lams, "constant": blocks_json(coh, K)}


def cmd_verify_bbgkz(fx: Fixture, args, rep: Report) -> None:
    tol = args.tol if args.tol is not None else 1e-6
    cone = fx.cone
    for name in _heights_names(fx, args):
        tri = fx.triangulation(name)
        coh = Cohomology(tri)
        gs = GammaSeries(coh, _trunc(fx, args))
        x = _basepoint(tri, _lambdas(fx, args)[-1], 0.2)
        closed = gs.verify_bbgkz(points_of_degree_at_most(cone, 2), x)
        interior = gs.verify_bbgkz(points_of_degree_at_most(cone, 2, interior=True), x, compact=True)
        rep.check(f"Gamma shift [{name}]", closed["shift"], tol)
        rep.check(f"Gamma homogeneity [{name}]", closed["homogeneity"], tol)
        rep.check(f"Gamma-circ shift [{name}]", interior["shift"], tol)
        rep.check(f"Gamma-circ homogeneity [{name}]", interior["homogeneity"], tol)
        rep.data[name] = {"tail": max(closed["tail"], interior["tail"])}


def cmd_beta_pairing(fx: Fixture, args, rep: Report) -> None:
    tol = args.tol if args.tol is not None else 1e-6
    cone = fx.cone
    table = build_pairing_table(cone, choose_generic_v(cone, args.seed))
    for name in _heights_names(fx, args):
        tri = fx.triangulation(name)
        betas = [np.asarray(b) for b in fx.betas] or random_generic_betas(tri, 5, seed=args.seed)
        x = _basepoint(tri, _lambdas(fx, args)[-1], 0.2)
        closed_dev = cross = 0.0
        worst_cond = 0.0
        runs = []
        for beta in betas:
            bs = BetaSeries(tri, beta, bound=args.bound or fx.bound)
            classes, M = bs.pairing_matrix(table, x)
            scale = float(np.max(np.abs(M)))
            for a, bc in enumerate(classes):
                for b, bc2 in enumerate(classes):
                    if bc2 == dual_class(cone, bc):
                        cf = beta_pairing_closed_form(cone, bc, beta)
                        closed_dev = max(closed_dev, abs(M[a, b] - cf) / abs(cf))
                    else:
                        cross = max(cross, abs(M[a, b]) / scale)
            cond = float(np.linalg.cond(M))
            worst_cond = max(worst_cond, cond)
            runs.append({"beta": [_cplx(z) for z in beta], "condition": cond})
        rep.check(f"series = closed form [{name}]", closed_dev, tol)
        rep.check(f"cross pairings vanish [{name}]", cross, tol)
        rep.check(f"pairing matrix nonsingular [{name}]", 1 / worst_cond, 1e-12, passed=math.isfinite(worst_cond) and worst_cond < 1e12)
        rep.data[name] = {"classes": [bc.label() for bc in beta_classes(tri)], "runs": runs}


HANDLERS: dict[str, Callable] = {
    "describe": cmd_describe,
    "triangulate": cmd_triangulate,
    "xi-table": cmd_xi_table,
    "check-cocycle": cmd_check_cocycle,
    "pairing-const": cmd_pairing_const,
    "chi-matrix": cmd_chi_matrix,
    "verify-duality": cmd_verify_duality,
    "verify-bbgkz": cmd_verify_bbgkz,
    "beta-pairing": cmd_beta_pairing,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bbgkz", description="Duality pairing checks for better-behaved GKZ systems.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--fixture", required=True, help="fixture JSON path or bundled name (rank1, a1, conifold, rank2_n4, local_p2)")
    parser.add_argument("--heights", help="name of the height vector (default: all)")
    parser.add_argument("--seed", type=int, default=1, help="seed for the generic vector and random beta")
    parser.add_argument("--lambda", dest="lam", type=float, help="depth of the base point in the convergence region")
    parser.add_argument("--bound", type=int, help="kernel-coordinate truncation bound")
    parser.add_argument("--order", type=int, help="max degree of nilpotent expansions")
    parser.add_argument("--tol", type=float, help="tolerance override for numeric checks")
    parser.add_argument("--out", help="write the report here instead of stdout")
    parser.add_argument("--exhaustive", action="store_true", help="check-cocycle: run every case")
    parser.add_argument("--timing", action="store_true", help="record runtime_ms (reports are no longer byte-identical)")
    return parser


def run_command(argv: list[str] | None = None) -> tuple[dict | None, int]:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return None, 2 if exc.code else 0
    t0 = time.perf_counter()
    try:
        fx = load_fixture(args.fixture)
        if args.heights and args.heights not in fx.heights:
            raise FixtureError(f"unknown heights {args.heights!r}; fixture has {', '.join(fx.heights)}")
        if args.bound is not None and args.bound < 1:
            raise FixtureError("--bound must be >= 1")
        if args.order is not None and not 0 <= args.order <= MAX_ORDER:
            raise FixtureError(f"--order must be in [0, {MAX_ORDER}]")
        rep = Report(args.command, fx.name, args.heights, args.seed)
        HANDLERS[args.command](fx, args, rep)
    except (FixtureError, BetaGenericityError, GeometryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None, 2
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None, 1
    runtime = round((time.perf_counter() - t0) * 1000, 3) if args.timing else None
    report = rep.to_dict(runtime)
    text = json.dumps(report, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return report, 0 if rep.ok else 1


def main(argv: list[str] | None = None) -> int:
    _, code = run_command(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
