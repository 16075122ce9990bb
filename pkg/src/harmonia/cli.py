"""``harmonia`` command line: one subcommand per module, JSON/CSV reports.

Exit codes: 0 all checks passed, 1 a check failed (a witness file is
written next to the report), 2 bad input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path


from . import axiom_verifier as av
from . import dahlberg_harness as dh
from . import lattice_domain as ld
from .errors import CheckFailure, HarmoniaError, InputError, NonConvergenceError
from .graph_dirichlet import harmonic_kernel, kernel_to_csv, load_kernel_csv, solve_dirichlet, vertex_label
from .harnack import harnack_index
from .reporting import fmt, write_json
from .union_construction import union_measure
from .weighted_graph import WeightedGraph, load_graph

log = logging.getLogger("harmonia")

EXIT_OK, EXIT_CHECK, EXIT_INPUT = 0, 1, 2


# -- input helpers ----------------------------------------------------------


def _read_json(path, what: str):
    if path is None:
        raise InputError(f"missing --{what}")
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {what} file {path}: {exc}") from exc


def _resolve(g: WeightedGraph, labels) -> set:
    lookup = {vertex_label(v): v for v in g.vertices}
    out = set()
    for lab in labels:
        v = lookup.get(str(lab))
        if v is None:
            raise InputError(f"unknown vertex {lab!r}")
        out.add(v)
    return out


def _domain(g: WeightedGraph, path, what: str = "domain"):
    data = _read_json(path, what)
    interior = data.get("interior") if isinstance(data, dict) else data
    if not isinstance(interior, list):
        raise InputError(f"{what} file needs an 'interior' list")
    return g.subdomain(_resolve(g, interior))


def _boundary_data(g: WeightedGraph, path) -> dict:
    data = _read_json(path, "boundary")
    if not isinstance(data, dict):
        raise InputError("boundary file must map vertex -> value")
    lookup = {vertex_label(v): v for v in g.vertices}
    out = {}
    for lab, val in data.items():
        if lab not in lookup:
            raise InputError(f"unknown vertex {lab!r}")
        try:
            out[lookup[lab]] = float(val)
        except (TypeError, ValueError) as exc:
            raise InputError(f"bad boundary value for {lab!r}") from exc
    return out


def _subset(g: WeightedGraph, spec) -> set:
    if spec is None:
        raise InputError("missing --subset")
    p = Path(spec)
    if p.suffix == ".json" and p.exists():
        labels = _read_json(p, "subset")
    else:
        labels = [s for s in str(spec).split(",") if s]
    return _resolve(g, labels)


def _floats(text, name: str):
    if text is None:
        return None
    try:
        vals = [float(s) for s in str(text).split(",") if s.strip()]
    except ValueError as exc:
        raise InputError(f"--{name} must be a comma separated list of numbers") from exc
    if not vals:
        raise InputError(f"--{name} is empty")
    return vals


def _lattice(path):
    spec = ld.load_domain_spec(path) if path is not None else None
    if spec is None:
        raise InputError("missing --domain")
    return ld.discretize(spec["polygon"], spec["origin"], spec["h"], spec.get("anchor"))


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _finish(out: Path, name: str, report: dict, passed: bool, witnesses=None) -> int:
    write_json(out / f"{name}.json", report)
    if not passed:
        write_json(out / f"{name}_witness.json", witnesses if witnesses is not None else report)
        log.error("%s: check failed, witness written to %s", name, out / f"{name}_witness.json")
        return EXIT_CHECK
    return EXIT_OK


# -- commands ---------------------------------------------------------------


def cmd_solve(args) -> int:
    g = load_graph(args.input)
    d = _domain(g, args.domain)
    f = _boundary_data(g, args.boundary)
    u = solve_dirichlet(g, d, f)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["vertex", "value"])
    for v in sorted(u):
        w.writerow([vertex_label(v), "%.17g" % u[v]])
    (_out(args) / "solution.csv").write_text(buf.getvalue())
    return EXIT_OK


def cmd_kernel(args) -> int:
    g = load_graph(args.input)
    d = _domain(g, args.domain)
    k = harmonic_kernel(g, d, jobs=args.jobs)
    out = _out(args)
    (out / "kernel.csv").write_text(kernel_to_csv(k))
    rep = av.verify_preharmonic(k, g, d)
    summary = {"interior": len(k.interior), "boundary": len(k.boundary), "components": len(k.components),
               "preharmonic": rep.to_dict()}
    return _finish(out, "kernel", summary, rep.passed, rep.witnesses)


def cmd_harnack(args) -> int:
    g = load_graph(args.input)
    d = _domain(g, args.domain)
    a = _subset(g, args.subset)
    k = harmonic_kernel(g, d, jobs=args.jobs)
    rep = harnack_index(k, a, with_table=args.table)
    return _finish(_out(args), "harnack", rep.to_dict(vertex_label), rep.finite)


def cmd_union(args) -> int:
    g = load_graph(args.input)
    d1 = _domain(g, args.domain)
    d2 = _domain(g, args.domain2, "domain2")
    a = _subset(g, args.subset)
    out = _out(args)
    try:
        values, state = union_measure(g, d1, d2, a, tol=args.tol, trace=True)
    except NonConvergenceError as exc:
        (out / "union_trace.csv").write_text(exc.state.trace_csv())
        return _finish(out, "union", {"converged": False, "message": str(exc),
                                      "iterations": exc.state.iteration, "delta": exc.state.delta}, False)
    (out / "union_trace.csv").write_text(state.trace_csv())
    report = {"converged": True, "iterations": state.iteration, "delta": state.delta,
              "min_step": state.min_step, "values": {vertex_label(x): values[x] for x in sorted(values)}}
    return _finish(out, "union", report, True)


def cmd_verify(args) -> int:
    g = load_graph(args.input)
    d = _domain(g, args.domain)
    k = load_kernel_csv(args.kernel, g, d) if args.kernel else harmonic_kernel(g, d, jobs=args.jobs)
    reports = av.run_all(g, d, k=k, seed=args.seed)
    passed = all(r.passed for r in reports)
    body = {"passed": passed, "checks": [r.to_dict() for r in reports]}
    wit = {r.check: r.witnesses for r in reports if not r.passed}
    return _finish(_out(args), "verify", body, passed, wit)


def cmd_lattice(args) -> int:
    dom = _lattice(args.domain)
    k = ld.lattice_kernel(dom, jobs=args.jobs)
    out = _out(args)
    radii = _floats(args.radii, "radii") or ld.default_radii(dom)
    delta = ld.estimate_delta(dom, k, radii, probes=args.probes)
    tsci = ld.verify_tsci(dom, shift=(3, -2), scale=2, kernel=k)
    report = {
        "h": dom.h, "interior": len(dom.interior), "boundary": len(dom.boundary),
        "lipschitz": dom.lipschitz, "s": dom.s, "diameter": dom.diameter, "radii": radii,
        "delta": {"value": delta.delta, "P": delta.witness[0], "r": delta.witness[1], "x": delta.witness[2]},
        "tsci": tsci.to_dict(),
    }
    if args.write_kernel:
        (out / "lattice_kernel.csv").write_text(kernel_to_csv(k))
    return _finish(out, "lattice", report, tsci.passed, tsci.witnesses)


MEASURES = ("area", "corkscrew", "boundary_layer", "uniform_layer")


def _measure(name: str, dom, k, radii):
    if name == "area":
        return dh.area_measure(dom)
    if name == "boundary_layer":
        return dh.boundary_layer_measure(dom, k)
    if name == "uniform_layer":
        return dh.uniform_layer_measure(dom)
    return dh.default_corkscrew_mass(dom, radii)


def cmd_dahlberg(args) -> int:
    dom = _lattice(args.domain)
    k = ld.lattice_kernel(dom, jobs=args.jobs)
    radii = _floats(args.radii, "radii") or ld.default_radii(dom)
    ps = _floats(args.p, "p") or list(dh.P_GRID)
    mu = _measure(args.measure, dom, k, radii)
    family = dh.default_family(dom, k, radii, size=args.family_size, seed=args.seed)
    runs = [dh.check_equivalence(dom, k, mu, p, radii, family) for p in ps]
    passed = all(r.passed for r in runs)
    report = {"h": dom.h, "measure": mu.label, "radii": radii, "family_size": args.family_size,
              "seed": args.seed, "passed": passed, "runs": [r.to_dict() for r in runs]}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "P", "r", "mu_C", "omega_O_Delta", "ratio"])
    for r in runs:
        for p_cell, rad, num, den, ratio in r.carleson.ratios:
            w.writerow([fmt(r.p), vertex_label(p_cell), fmt(rad), fmt(num), fmt(den), fmt(ratio)])
    out = _out(args)
    (out / "carleson_ratios.csv").write_text(buf.getvalue())
    wit = [{"p": r.p, "M": r.M, "bound": r.bound, "link_margins": r.link_margins,
            "chain_witness": r.chain_witness} for r in runs if not r.passed]
    return _finish(out, "dahlberg", report, passed, wit)


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    common.add_argument("--tol", type=float, default=1e-10)

    graph = argparse.ArgumentParser(add_help=False)
    graph.add_argument("--input", required=True, help="graph JSON")
    graph.add_argument("--domain", required=True, help="JSON with the interior vertex list")

    parser = argparse.ArgumentParser(prog="harmonia", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common, graph], help="solve one Dirichlet problem")
    p.add_argument("--boundary", required=True, help="JSON mapping boundary vertex -> value")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("kernel", parents=[common, graph], help="dump the harmonic-measure kernel")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("harnack", parents=[common, graph], help="Harnack index of a vertex set")
    p.add_argument("--subset", required=True, help="comma separated labels or a JSON list file")
    p.add_argument("--table", action="store_true", help="include every pairwise ratio")
    p.set_defaults(func=cmd_harnack)

    p = sub.add_parser("union", parents=[common, graph], help="harmonic measure on a union of two domains")
    p.add_argument("--domain2", required=True)
    p.add_argument("--subset", required=True, help="boundary set A")
    p.set_defaults(func=cmd_union)

    p = sub.add_parser("verify", parents=[common, graph], help="run every axiom check")
    p.add_argument("--kernel", help="kernel CSV to check instead of a fresh solve")
    p.set_defaults(func=cmd_verify)

    lat = argparse.ArgumentParser(add_help=False)
    lat.add_argument("--domain", required=True, help="JSON with polygon, origin and h")
    lat.add_argument("--radii", help="comma separated radii (default: dyadic grid)")

    p = sub.add_parser("lattice", parents=[common, lat], help="discretize a star-like polygon")
    p.add_argument("--probes", type=int, default=32)
    p.add_argument("--write-kernel", action="store_true")
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser("dahlberg", parents=[common, lat], help="Carleson versus strong (p, p) norms")
    p.add_argument("--p", help="comma separated exponents > 1 (default 1.5,2,3)")
    p.add_argument("--family-size", type=int, default=200)
    p.add_argument("--measure", choices=MEASURES, default="area")
    p.set_defaults(func=cmd_dahlberg)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("HARMONIA_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.jobs < 1:
        print("error: --jobs must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CheckFailure as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except HarmoniaError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
