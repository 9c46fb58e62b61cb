"""Batch front end: JSON run specs in, CSV/DOT artifacts out.

Exit codes: 0 success, 2 spec error, 3 resource budget exceeded,
4 insufficient radius/depth, 5 internal invariant violation.
Identical spec + parameters + seed always produce byte-identical files.
"""

import argparse
import json
import os
import sys

from . import io as emit
from .balls import DEFAULT_VERTEX_BUDGET, CayleyBall
from .coned import ConedBall, bcp_probe, fineness_probe
from .cusped import CuspedBall, qc3_probe
from .distortion import (
    GrowthFunction,
    distortion_sandwich_check,
    distortion_table,
    superadditive_closure,
)
from .errors import (
    DomainError,
    InsufficientDepthError,
    InsufficientRadiusError,
    InvariantViolationError,
    ResourceBudgetError,
    SpecError,
)
from .groups import group_from_spec
from .hyperbolicity import delta_estimate
from .qc import (
    coset_intersection_bound,
    default_deep_params,
    induced_peripheral_probe,
    qc5_profile,
    saturation,
    transition_criterion_check,
)
from .subgroups import PeripheralStructure, SubgroupSpec
from . import metric


class RunContext:
    """Resolved run spec: group, peripherals, parameters, output dir."""

    def __init__(self, args):
        self.args = args
        try:
            with open(args.spec) as fh:
                self.spec = json.load(fh)
        except FileNotFoundError:
            raise SpecError(f"spec file not found: {args.spec}")
        except json.JSONDecodeError as e:
            raise SpecError(f"spec file is not valid JSON: {e}")
        if "group" not in self.spec:
            raise SpecError("run spec needs a 'group' entry")
        self.group = group_from_spec(self.spec["group"])
        self.peripherals = PeripheralStructure.from_specs(
            self.group, self.spec.get("peripherals", [])
        )
        env_budget = os.environ.get("CORSET_BUDGET")
        self.budget = args.budget or (int(env_budget) if env_budget else DEFAULT_VERTEX_BUDGET)
        if getattr(args, "threads", 1) < 1:
            raise SpecError("--threads must be >= 1")
        os.makedirs(args.out, exist_ok=True)

    def subgroup(self, text):
        named = self.spec.get("subgroups", {})
        if text in named:
            return SubgroupSpec.from_spec(self.group, named[text], name=text)
        words = [w.strip() for w in text.split(",") if w.strip()]
        if not words:
            raise SpecError(f"empty subgroup spec: {text!r}")
        return SubgroupSpec.from_words(self.group, words, name=f"<{text}>")

    def manifest(self, command, **params):
        base = {
            "command": command,
            "group": json.dumps(self.spec["group"], sort_keys=True),
            "peripherals": json.dumps(self.spec.get("peripherals", []), sort_keys=True),
            "budget": self.budget,
            "threads": getattr(self.args, "threads", 1),
        }
        base.update(params)
        return base

    def write(self, name, text):
        path = os.path.join(self.args.out, name)
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
        return path

    def cayley(self, radius):
        return CayleyBall(self.group, radius, self.budget)

    def coned(self, radius, ball=None):
        return ConedBall(ball or self.cayley(radius), self.peripherals)

    def cusped(self, radius, depth, ball=None):
        return CuspedBall(ball or self.cayley(radius), self.peripherals, depth, self.budget)


def _cmd_build_cayley(ctx):
    ball = ctx.cayley(ctx.args.radius)
    man = ctx.manifest("build-cayley", radius=ctx.args.radius, vertices=len(ball))
    ctx.write("cayley.dot", emit.dot_cayley(ball, man))
    ctx.write("cayley.graphml", emit.graphml_cayley(ball, man))
    ctx.write("cayley_distances.csv", emit.distance_table_csv(ball, man))
    return 0


def _cmd_build_coned(ctx):
    coned = ctx.coned(ctx.args.radius)
    man = ctx.manifest(
        "build-coned",
        radius=ctx.args.radius,
        vertices=len(coned),
        cones=len(coned.cones),
    )
    ctx.write("coned.dot", emit.dot_coned(coned, man))
    rows = [
        (j, coned.cone_label(coset), len(coned.cone_members[j]))
        for j, coset in enumerate(coned.cones)
    ]
    ctx.write("coned_cones.csv", emit.csv_report(["cone", "coset", "members"], rows, man))
    return 0


def _cmd_build_cusped(ctx):
    cusped = ctx.cusped(ctx.args.radius, ctx.args.depth)
    man = ctx.manifest(
        "build-cusped",
        radius=ctx.args.radius,
        depth=ctx.args.depth,
        vertices=len(cusped),
        horoballs=len(cusped.cosets),
    )
    ctx.write("cusped.dot", emit.dot_cusped(cusped, man))
    rows = [
        (ci, pi, cid, len(members))
        for ci, (pi, cid, members) in enumerate(cusped.cosets)
    ]
    ctx.write(
        "cusped_horoballs.csv",
        emit.csv_report(["horoball", "peripheral", "coset", "base_points"], rows, man),
    )
    return 0


def _delta_graph(ctx):
    kind = ctx.args.target
    if kind == "cayley":
        return ctx.cayley(ctx.args.radius)
    if kind == "coned":
        return ctx.coned(ctx.args.radius)
    if kind == "cusped":
        if ctx.args.depth is None:
            raise SpecError("delta on the cusped space needs --depth")
        return ctx.cusped(ctx.args.radius, ctx.args.depth)
    raise SpecError(f"unknown delta target {kind!r}")


def _cmd_delta(ctx):
    graph = _delta_graph(ctx)
    est = delta_estimate(
        graph,
        method=ctx.args.method,
        mode=ctx.args.mode,
        size=ctx.args.size,
        seed=ctx.args.seed,
        pool=ctx.args.pool,
    )
    man = ctx.manifest(
        "delta",
        target=ctx.args.target,
        radius=ctx.args.radius,
        depth=ctx.args.depth if ctx.args.target == "cusped" else "",
        method=ctx.args.method,
        mode=ctx.args.mode,
        size=ctx.args.size or "",
        seed=ctx.args.seed,
        pool=ctx.args.pool,
        vertices=est.n_vertices,
    )
    rows = [(ctx.args.radius, est.method, est.mode, est.value)]
    ctx.write("delta.csv", emit.csv_report(["radius", "method", "mode", "delta"], rows, man))
    return 0


def _cmd_bcp(ctx):
    coned = ctx.coned(ctx.args.radius)
    report = bcp_probe(
        coned,
        lam=ctx.args.lam,
        L=ctx.args.L,
        seed=ctx.args.seed,
        pair_cap=ctx.args.pair_cap,
    )
    man = ctx.manifest(
        "bcp",
        radius=ctx.args.radius,
        lam=ctx.args.lam,
        L=report.L,
        seed=ctx.args.seed,
        mode=report.mode,
        pairs=report.pair_count,
        clause1_max=report.clause1_max,
        clause2_max=report.clause2_max,
    )
    ctx.write(
        "bcp.csv",
        emit.csv_report(["L", "clause", "coset", "discrepancy"], report.rows(), man),
    )
    return 0


def _cmd_fineness(ctx):
    coned = ctx.coned(ctx.args.radius)
    origin = ctx.group.parse(ctx.args.edge_origin)
    u = coned.group_vertex(origin)
    if ctx.args.edge_cone is not None:
        v = coned.cone_vertex(ctx.args.edge_cone, origin)
    elif ctx.args.edge_target is not None:
        v = coned.group_vertex(ctx.group.parse(ctx.args.edge_target))
    else:
        raise SpecError("fineness needs --edge-cone or --edge-target")
    radii = [int(r) for r in ctx.args.radii.split(",")]
    rows = []
    for r in radii:
        count = fineness_probe(coned, u, v, ctx.args.length, r)
        rows.append((r, ctx.args.length, count))
    man = ctx.manifest(
        "fineness",
        radius=ctx.args.radius,
        length=ctx.args.length,
        edge_origin=ctx.args.edge_origin,
        edge_cone="" if ctx.args.edge_cone is None else ctx.args.edge_cone,
        edge_target=ctx.args.edge_target or "",
        radii=ctx.args.radii,
    )
    ctx.write("fineness.csv", emit.csv_report(["radius", "length", "count"], rows, man))
    return 0


def _cmd_qc5(ctx):
    radius = ctx.args.radius or ctx.args.nmax + 2
    coned = ctx.coned(radius)
    H = ctx.subgroup(ctx.args.subgroup)
    report = qc5_profile(coned, H, ctx.args.nmax)
    man = ctx.manifest(
        "qc5",
        subgroup=ctx.args.subgroup,
        nmax=ctx.args.nmax,
        radius=radius,
        verdict=report.verdict,
        **{f"param_{k}": v for k, v in report.params.items()},
    )
    rows = [(n, report.table[n]) for n in sorted(report.table)]
    ctx.write("qc5.csv", emit.csv_report(["n", "kappa"], rows, man))
    return 0


def _cmd_transition_qc(ctx):
    radius = ctx.args.radius or ctx.args.nmax + 2
    coned = ctx.coned(radius)
    H = ctx.subgroup(ctx.args.subgroup)
    if ctx.args.R is None:
        eps, R = default_deep_params(coned, ctx.args.eps)
    else:
        eps, R = ctx.args.eps, ctx.args.R
    report = transition_criterion_check(coned, H, eps, R, ctx.args.nmax)
    man = ctx.manifest(
        "transition-qc",
        subgroup=ctx.args.subgroup,
        nmax=ctx.args.nmax,
        radius=radius,
        eps=eps,
        R=R,
        verdict=report.verdict,
    )
    rows = [
        (n, report.table[n], report.extras["hausdorff"][n]) for n in sorted(report.table)
    ]
    ctx.write(
        "transition.csv", emit.csv_report(["n", "kappa_prime", "hausdorff"], rows, man)
    )
    return 0


def _cmd_qc3(ctx):
    radius = ctx.args.radius or ctx.args.nmax + 2
    cusped = ctx.cusped(radius, ctx.args.depth)
    H = ctx.subgroup(ctx.args.subgroup)
    result = qc3_probe(cusped, H, ctx.args.nmax)
    man = ctx.manifest(
        "qc3",
        subgroup=ctx.args.subgroup,
        nmax=ctx.args.nmax,
        radius=radius,
        depth=ctx.args.depth,
    )
    rows = [(n, result["mu"][n]) for n in sorted(result["mu"])]
    ctx.write("qc3.csv", emit.csv_report(["n", "mu"], rows, man))
    return 0


def _cmd_saturation(ctx):
    radius = ctx.args.radius
    coned = ctx.coned(radius)
    target = ctx.group.parse(ctx.args.word)
    path = metric.geodesic(ctx.group, ctx.group.identity(), target)
    sat = saturation(coned, path, ctx.args.threshold)
    man = ctx.manifest(
        "saturation",
        word=ctx.args.word,
        threshold=ctx.args.threshold,
        radius=radius,
        cosets=len(sat.cosets),
    )
    rows = [
        (pi, cid, coned.cone_label((pi, cid))) for pi, cid in sat.cosets
    ]
    ctx.write("saturation.csv", emit.csv_report(["peripheral", "coset", "label"], rows, man))
    return 0


def _cmd_induced(ctx):
    coned = ctx.coned(ctx.args.radius)
    H = ctx.subgroup(ctx.args.subgroup)
    result = induced_peripheral_probe(coned, H)
    man = ctx.manifest(
        "induced",
        subgroup=ctx.args.subgroup,
        radius=ctx.args.radius,
        strong_flag=result["strong_relatively_quasiconvex_flag"],
        radii=",".join(str(r) for r in result["radii"]),
    )
    rows = []
    for rec in result["records"]:
        counts = [rec["counts"][r] for r in result["radii"]]
        gens = " ".join(ctx.group.format(g) for g in rec["generators_found"])
        rows.append((rec["label"], rec["class"], *counts, gens))
    header = ["coset", "class"] + [f"count@{r}" for r in result["radii"]] + ["generators"]
    ctx.write("induced.csv", emit.csv_report(header, rows, man))
    return 0


def _cmd_close_cosets(ctx):
    ball = ctx.cayley(ctx.args.radius)
    x = ctx.group.parse(ctx.args.x)
    y = ctx.group.parse(ctx.args.y)
    H = ctx.subgroup(ctx.args.H)
    K = ctx.subgroup(ctx.args.K)
    result = coset_intersection_bound(ball, x, H, y, K, ctx.args.L, ctx.args.nmax)
    man = ctx.manifest(
        "close-cosets",
        x=ctx.args.x,
        y=ctx.args.y,
        H=ctx.args.H,
        K=ctx.args.K,
        L=ctx.args.L,
        nmax=ctx.args.nmax,
        radius=ctx.args.radius,
    )
    rows = [
        (
            result["L"],
            result["observed"],
            result["previous"],
            int(result["stable"]),
        )
    ]
    ctx.write(
        "close_cosets.csv",
        emit.csv_report(["L", "observed_Lprime", "previous_Lprime", "stable"], rows, man),
    )
    return 0


def _cmd_distortion(ctx):
    H = ctx.subgroup(ctx.args.subgroup)
    table = distortion_table(ctx.group, H, ctx.args.N, budget=ctx.budget)
    man = ctx.manifest("distortion", subgroup=ctx.args.subgroup, N=ctx.args.N)
    rows = [(n, table[n]) for n in range(table.N + 1)]
    ctx.write("distortion.csv", emit.csv_report(["n", "delta"], rows, man))
    return 0


def _cmd_closure(ctx):
    values = [int(v) for v in ctx.args.values.split(",")]
    f = GrowthFunction(values, provenance="synthetic")
    fbar = superadditive_closure(f)
    man = ctx.manifest("closure", values=ctx.args.values, monotonized=f.monotonized)
    rows = [(n, f[n], fbar[n]) for n in range(f.N + 1)]
    ctx.write("closure.csv", emit.csv_report(["n", "f", "f_closure"], rows, man))
    return 0


def _cmd_sandwich(ctx):
    radius = ctx.args.radius or ctx.args.N + 2
    coned = ctx.coned(radius)
    H = ctx.subgroup(ctx.args.subgroup)
    result = distortion_sandwich_check(
        coned, H, ctx.args.N, ctx.args.cmax, budget=ctx.budget
    )
    man = ctx.manifest(
        "sandwich",
        subgroup=ctx.args.subgroup,
        N=ctx.args.N,
        cmax=ctx.args.cmax,
        radius=radius,
        C_lower=result["lower"]["C"],
        C_upper=result["upper"]["C"],
        holds=result["holds"],
    )
    rows = [
        (n, result["f"][n], result["f_closure"][n], result["delta"][n])
        for n in range(ctx.args.N + 1)
    ]
    ctx.write("sandwich.csv", emit.csv_report(["n", "f", "f_closure", "delta"], rows, man))
    return 0


COMMANDS = {
    "build-cayley": _cmd_build_cayley,
    "build-coned": _cmd_build_coned,
    "build-cusped": _cmd_build_cusped,
    "delta": _cmd_delta,
    "bcp": _cmd_bcp,
    "fineness": _cmd_fineness,
    "qc5": _cmd_qc5,
    "transition-qc": _cmd_transition_qc,
    "qc3": _cmd_qc3,
    "saturation": _cmd_saturation,
    "induced": _cmd_induced,
    "close-cosets": _cmd_close_cosets,
    "distortion": _cmd_distortion,
    "closure": _cmd_closure,
    "sandwich": _cmd_sandwich,
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="corset",
        description="Relative-geometry diagnostics on finite group truncations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--spec", required=True, help="JSON run spec file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--budget", type=int, default=None, help="vertex budget")
        p.add_argument("--threads", type=int, default=1, help="worker cap")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("build-cayley")
    common(p)
    p.add_argument("--radius", type=int, required=True)

    p = sub.add_parser("build-coned")
    common(p)
    p.add_argument("--radius", type=int, required=True)

    p = sub.add_parser("build-cusped")
    common(p)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--depth", type=int, required=True)

    p = sub.add_parser("delta")
    common(p)
    p.add_argument("--target", default="cayley", choices=["cayley", "coned", "cusped"])
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--method", default="thin-triangle", choices=["thin-triangle", "four-point"])
    p.add_argument("--mode", default="exhaustive", choices=["exhaustive", "sampled"])
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--pool", type=int, default=512)

    p = sub.add_parser("bcp")
    common(p)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--lam", type=int, default=1)
    p.add_argument("--L", type=int, default=None)
    p.add_argument("--pair-cap", type=int, default=1_000_000)

    p = sub.add_parser("fineness")
    common(p)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--edge-origin", required=True, help="group vertex of the edge")
    p.add_argument("--edge-cone", type=int, default=None, help="peripheral index")
    p.add_argument("--edge-target", default=None, help="group vertex across the edge")
    p.add_argument("--length", type=float, required=True)
    p.add_argument("--radii", required=True, help="comma list of restriction radii")

    p = sub.add_parser("qc5")
    common(p)
    p.add_argument("--subgroup", required=True)
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--radius", type=int, default=None)

    p = sub.add_parser("transition-qc")
    common(p)
    p.add_argument("--subgroup", required=True)
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--radius", type=int, default=None)
    p.add_argument("--eps", type=int, default=1)
    p.add_argument("--R", type=int, default=None)

    p = sub.add_parser("qc3")
    common(p)
    p.add_argument("--subgroup", required=True)
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--radius", type=int, default=None)

    p = sub.add_parser("saturation")
    common(p)
    p.add_argument("--word", required=True)
    p.add_argument("--threshold", type=int, required=True)
    p.add_argument("--radius", type=int, required=True)

    p = sub.add_parser("induced")
    common(p)
    p.add_argument("--subgroup", required=True)
    p.add_argument("--radius", type=int, required=True)

    p = sub.add_parser("close-cosets")
    common(p)
    p.add_argument("--x", default="")
    p.add_argument("--H", required=True)
    p.add_argument("--y", default="")
    p.add_argument("--K", required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--radius", type=int, required=True)

    p = sub.add_parser("distortion")
    common(p)
    p.add_argument("--subgroup", required=True)
    p.add_argument("--N", type=int, required=True)

    p = sub.add_parser("closure")
    common(p)
    p.add_argument("--values", required=True, help="comma list f(0),f(1),...")

    p = sub.add_parser("sandwich")
    common(p)
    p.add_argument("--subgroup", required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--cmax", type=int, default=8)
    p.add_argument("--radius", type=int, default=None)

    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        ctx = RunContext(args)
        return COMMANDS[args.command](ctx)
    except (SpecError, DomainError) as e:
        print(f"spec error: {e}", file=sys.stderr)
        return 2
    except ResourceBudgetError as e:
        print(f"resource budget exceeded: {e}", file=sys.stderr)
        return 3
    except (InsufficientRadiusError, InsufficientDepthError) as e:
        print(f"insufficient radius/depth: {e}", file=sys.stderr)
        return 4
    except InvariantViolationError as e:
        print(f"invariant violation: {e}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
