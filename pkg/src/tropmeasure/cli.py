"""Command line front end: scenario files in, deterministic text reports out.

Scenario files are JSON. Every scalar is a string holding an exact rational
("3", "-1/2"); model-function offsets and z(0) values may also be linear
expressions in generators declared under "symbols" (name -> embedding value
used only for ordering). Exit status: 0 success, 1 a check failed, 2 the
input could not be parsed.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from fractions import Fraction
from typing import Sequence

from . import measure as ms
from . import modelfun as mfun
from . import periodic as per
from . import pluriblock as pb
from . import skeleton as skl
from .exactgeom import AffineMap, Polytope, rat
from .gamma import format_value, parse_gamma
from .lattice import BilinearForm, Lattice

FORMAT = "tropmeasure-scenario"
VERSION = 1


class ScenarioError(ValueError):
    """The scenario file is malformed."""


# ---------------------------------------------------------------------------
# Parsing


def _r(x) -> Fraction:
    try:
        return rat(x)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ScenarioError(f"bad rational {x!r}") from exc


def _vec(xs) -> tuple[Fraction, ...]:
    if not isinstance(xs, list):
        raise ScenarioError(f"expected a list, got {xs!r}")
    return tuple(_r(x) for x in xs)


def _matrix(rows) -> list[tuple[Fraction, ...]]:
    if not isinstance(rows, list):
        raise ScenarioError("expected a matrix as a list of rows")
    return [_vec(r) for r in rows]


def _key(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.split(",") if t.strip()) if text else ()


def parse_scenario(doc: dict) -> tuple[ms.Scenario, per.PeriodicDecomposition | None]:
    if doc.get("format") != FORMAT:
        raise ScenarioError(f"not a {FORMAT} document")
    if doc.get("version") != VERSION:
        raise ScenarioError(f"unsupported version {doc.get('version')!r}")
    try:
        symbols = {str(k): float(v) for k, v in doc.get("symbols", {}).items()}
        n, b, d = int(doc["n"]), int(doc["b"]), int(doc["d"])
        lattice = Lattice(_matrix(doc["lattice"]), n)
        forms = [BilinearForm(_matrix(f)) for f in doc["forms"]]
        sk_doc = doc["skeleton"]
        strata = []
        for s in sk_doc["strata"]:
            if "weights" in s:
                weights = {(_key(k) if k != "*" else None): _r(v) for k, v in s["weights"].items()}
            else:
                weights = {None: _r(s.get("weight", "0"))}
            faces = {_key(k): str(v) for k, v in s.get("faces", {}).items()}
            strata.append(skl.Stratum(str(s["id"]), tuple(s["vertices"]), int(s["dim"]), faces, weights))
        sk = skl.SkeletonComplex(d, strata, _r(sk_doc.get("pi_val", "1")))
        maps = {}
        for sid, m in doc["tropical_map"].items():
            lin = _matrix(m["linear"]) if m["linear"] else [() for _ in range(n)]
            maps[sid] = AffineMap(lin, _vec(m["offset"]))
        tm = skl.TropicalMap(lattice, maps)
        dec = None
        if "decomposition" in doc:
            cells = [Polytope.from_vertices(_matrix(c)) for c in doc["decomposition"]["cells"]]
            dec = per.PeriodicDecomposition(lattice, cells)
        mf = None
        if "model_function" in doc:
            mf = _parse_model_function(doc["model_function"], lattice, forms, symbols)
        scn = ms.Scenario(n, b, d, lattice, forms, sk, tm, int(doc.get("deg_f", 1)),
                          name=str(doc.get("name", "")), model_function=mf)
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ScenarioError(f"{type(exc).__name__}: {exc}") from exc
    return scn, dec


def _parse_model_function(doc: dict, lattice: Lattice, forms: list[BilinearForm], symbols):
    form_ref = doc.get("form", 0)
    form = forms[form_ref] if isinstance(form_ref, int) else BilinearForm(_matrix(form_ref))
    if "delaunay" in doc:
        opts = doc["delaunay"] or {}
        shift = _vec(opts["shift"]) if "shift" in opts else None
        return mfun.delaunay_model_function(form, lattice, int(opts.get("radius", 2)), shift)
    z0 = [parse_gamma(z, symbols) for z in doc["z0"]]
    triples = [
        (Polytope.from_vertices(_matrix(c["vertices"])), _vec(c["slope"]), parse_gamma(c["offset"], symbols))
        for c in doc["cells"]
    ]
    return mfun.ModelFunction.from_cells(lattice, triples, mfun.CocycleData(form, lattice, z0))


# ---------------------------------------------------------------------------
# Serialization


def _s(x) -> str:
    return format_value(x)


def _svec(v) -> list[str]:
    return [_s(x) for x in v]


def scenario_to_dict(scn: ms.Scenario, dec: per.PeriodicDecomposition | None = None) -> dict:
    strata = []
    for s in sorted(scn.skeleton, key=lambda s: s.id):
        entry = {"id": s.id, "vertices": list(s.vertices), "dim": s.dim}
        if s.faces:
            entry["faces"] = {",".join(map(str, k)): v for k, v in sorted(s.faces.items())}
        if set(s.weights) == {None}:
            entry["weight"] = _s(s.weights[None])
        else:
            entry["weights"] = {
                ("*" if k is None else ",".join(map(str, k))): _s(v)
                for k, v in sorted(s.weights.items(), key=lambda kv: (kv[0] is None, kv[0] or ()))
            }
        strata.append(entry)
    tmap = {}
    for sid in sorted(scn.tmap.maps):
        f = scn.tmap[sid]
        tmap[sid] = {
            "linear": [_svec(r) for r in f.linear] if f.domain_dim else [],
            "offset": _svec(f.offset),
        }
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "name": scn.name,
        "n": scn.n,
        "b": scn.b,
        "d": scn.d,
        "deg_f": scn.deg_f,
        "lattice": [_svec(v) for v in scn.lattice.basis],
        "forms": [[_svec(r) for r in f.matrix] for f in scn.forms],
        "skeleton": {"pi_val": _s(scn.skeleton.pi_val), "strata": strata},
        "tropical_map": tmap,
    }
    if dec is not None:
        doc["decomposition"] = {"cells": [[_svec(v) for v in c.vertices] for c in dec.cells]}
    mf = scn.model_function
    if mf is not None:
        doc["model_function"] = {
            "form": [_svec(r) for r in mf.form.matrix],
            "z0": [_s(z) for z in mf.cocycle.z0],
            "cells": [
                {"vertices": [_svec(v) for v in c.vertices], "slope": [str(x) for x in p.slope], "offset": _s(p.offset)}
                for c, p in zip(mf.dec.cells, mf.pieces)
            ],
        }
    return doc


def dump(doc: dict) -> str:
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


# ---------------------------------------------------------------------------
# Output helpers


class Output:
    def __init__(self, args):
        self.lines: list[str] = []
        self.rows: list[list[str]] = []
        self.header: list[str] = []
        self.args = args

    def say(self, text: str = "") -> None:
        self.lines.append(text)

    def table(self, header: Sequence[str], rows: Sequence[Sequence]) -> None:
        rows = [[str(c) for c in r] for r in rows]
        self.header, self.rows = list(header), rows
        widths = [max([len(h)] + [len(r[i]) for r in rows]) for i, h in enumerate(header)]
        self.say("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip())
        for r in rows:
            self.say("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())

    def report(self, rep: per.Report) -> bool:
        for line in rep.lines():
            self.say(line)
        return rep.ok

    def flush(self) -> None:
        sys.stdout.write("\n".join(self.lines) + "\n")
        if getattr(self.args, "csv", None) and self.header:
            with open(self.args.csv, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(self.header)
                w.writerows(self.rows)


def _pts(p: Polytope) -> str:
    return ";".join("(" + ",".join(str(x) for x in v) + ")" for v in p.vertices)


def _parse_points(text: str) -> list[tuple[Fraction, ...]]:
    return [tuple(_r(x) for x in part.split(",")) for part in text.split(";") if part.strip()]


def _parse_ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _load(path: str):
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc}") from exc
    return doc, hashlib.sha256(raw).hexdigest()[:16]


def _need_mf(scn: ms.Scenario) -> mfun.ModelFunction:
    if scn.model_function is None:
        raise ScenarioError("this command needs a model_function entry")
    return scn.model_function


# ---------------------------------------------------------------------------
# Commands


def cmd_validate(args, out: Output) -> int:
    scn, dec = _scenario(args, out)
    ok = True
    if dec is not None:
        ok &= out.report(per.validate(dec))
    if scn.model_function is not None:
        ok &= out.report(per.validate(scn.model_function.dec))
        ok &= out.report(mfun.validate(scn.model_function))
        conv = mfun.is_strongly_polyhedral_convex(scn.model_function)
        out.say(f"strongly polyhedral convex: {'yes' if conv else 'no'}")
    ok &= out.report(skl.validate_skeleton(scn.skeleton, scn.tmap))
    return 0 if ok else 1


def cmd_strata(args, out: Output) -> int:
    scn, dec = _scenario(args, out)
    dec = dec or (scn.model_function.dec if scn.model_function else None)
    if dec is not None:
        st = per.strata_poset(dec, scn.n + scn.b)
        rows = [
            (node.dim_stratum, node.face_dim, _pts(node.face))
            for node in sorted(st.nodes.values(), key=lambda x: (-x.dim_stratum, x.key))
        ]
        out.say("Mumford strata of the decomposition")
        out.table(["stratum_dim", "face_dim", "face"], rows)
    if scn.model_function is not None:
        sub = skl.subdivide(scn.skeleton, scn.tmap, scn.model_function.dec)
        counts = skl.refined_strata(sub).count_by_codim()
        out.say("refined skeleton strata by codimension: " + ", ".join(f"{k}:{v}" for k, v in counts.items()))
    nd = skl.nondegenerate_simplices(scn.skeleton, scn.tmap)
    out.say(f"non-degenerate simplices: {len(nd)} of {len(scn.skeleton)}")
    return 0


def cmd_dualize(args, out: Output) -> int:
    scn, _ = _scenario(args, out)
    mf = _need_mf(scn)
    rows = []
    for v in mf.dec.vertex_classes():
        dp = mfun.dual_polytope(mf, v)
        if dp.bounded:
            rows.append(("(" + ",".join(map(str, v)) + ")", _pts(dp.polytope), dp.volume))
        else:
            rows.append(("(" + ",".join(map(str, v)) + ")", "unbounded", "-"))
    out.table(["vertex", "dual_vertices", "volume"], rows)
    return 0


def cmd_tiling(args, out: Output) -> int:
    scn, _ = _scenario(args, out)
    return 0 if out.report(mfun.dual_tiling_check(_need_mf(scn))) else 1


def _bundle_indices(args):
    return _parse_ints(args.bundle_indices) if args.bundle_indices else None


def cmd_measure(args, out: Output) -> int:
    scn, _ = _scenario(args, out)
    mu = ms.canonical_measure(scn, _bundle_indices(args))
    rows = [(p.chart, p.dim, p.density, _pts(p.support)) for p in mu.pieces]
    out.table(["stratum", "dim", "density", "support"], rows)
    out.say(f"total mass: {mu.total_mass()}")
    out.report(ms.positivity_check(scn, mu))
    return 0


def cmd_pushforward(args, out: Output) -> int:
    scn, _ = _scenario(args, out)
    mu = ms.pushforward(ms.canonical_measure(scn, _bundle_indices(args)), scn.tmap, scn.deg_f)
    rows = [(p.dim, p.density, _pts(p.support)) for p in mu.pieces]
    out.table(["dim", "density", "support"], rows)
    out.say(f"total mass: {mu.total_mass()}")
    for note in mu.notes:
        out.say(f"note: {note}")
    try:
        out.report(ms.validate_dimension_bounds(scn, mu))
    except ms.DimensionBoundError as exc:
        out.say(f"dimension bounds: FAIL ({exc})")
        return 1
    return 0


def cmd_limit(args, out: Output) -> int:
    scn, _ = _scenario(args, out)
    mf = _need_mf(scn)
    if not args.omega or not args.stratum:
        raise ScenarioError("limit needs --stratum and --omega")
    omega = Polytope.from_vertices(_parse_points(args.omega))
    m_list = _parse_ints(args.m_list or "1,2,4,8")
    rows = ms.limit_table(scn, mf, args.stratum, omega, m_list)
    out.table(
        ["m", "mu_m", "mu", "abs_error", "bound"],
        [(r.m, r.discrete, r.limit, r.error, r.bound) for r in rows],
    )
    fitted = max((r.error * r.m for r in rows), default=Fraction(0))
    out.say(f"empirical C = max m*error = {fitted}")
    return 0 if all(r.error <= r.bound for r in rows) else 1


def cmd_gen_delaunay(args, out: Output) -> int:
    lattice = Lattice(_parse_points(args.lattice))
    form = BilinearForm(_parse_points(args.form))
    shift = _parse_points(args.shift)[0] if args.shift else None
    scn = ms.haar_scenario(lattice, form, args.b, k=args.k)
    scn.model_function = mfun.delaunay_model_function(form, lattice, shift=shift)
    _emit_scenario(args, out, scn)
    return 0


def cmd_gen_product(args, out: Output) -> int:
    n = args.n
    lattice = Lattice(_parse_points(args.lattice)) if args.lattice else Lattice(
        [tuple(2 if i == j else 0 for i in range(n)) for j in range(n)]
    )
    if args.form:
        form = BilinearForm(_parse_points(args.form))
    else:
        form = BilinearForm([[2]] if n == 1 else [[2 if i == j else (-1 if abs(i - j) == 1 else 0) for i in range(n)] for j in range(n)])
    tri = skl.kuhn_triangulation(lattice, args.k)
    scn, closed = ms.spectrum_scenario(args.b, n, args.m, _r(args.deg), form, tri)
    _emit_scenario(args, out, scn)
    out.say("closed form (mass per fundamental cell of the lattice points in each simplex's span)")
    out.table(["dim", "density", "simplex"], [
        (len(k) - 1, v, ";".join("(" + ",".join(map(str, p)) + ")" for p in k))
        for k, v in sorted(closed.items(), key=lambda kv: (len(kv[0]), kv[0])) if v
    ])
    return 0


def _emit_scenario(args, out: Output, scn: ms.Scenario) -> None:
    text = dump(scenario_to_dict(scn))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        out.say(f"wrote {args.out}")
    else:
        out.say(text.rstrip("\n"))


def cmd_plurisimplex(args, out: Output) -> int:
    doc, digest = _load(args.scenario)
    out.say(f"input: {digest}")
    try:
        levels = [
            [(int(g["size"]), pb.affine_bound(_r(g["const"]), _vec(g.get("coeffs", [])))) for g in lev]
            for lev in doc["plurisimplex"]["levels"]
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"bad plurisimplex spec: {exc}") from exc
    fs = pb.face_strata(pb.BlockSpec.build(levels))
    ps = fs.plurisimplex
    out.say(f"dimension: {ps.dim}")
    out.say(f"vertices: {_pts(ps.polytope)}")
    if ps.dropped:
        out.say("dropped coordinates: " + ", ".join(f"u{k}.{i}.{j}" for k, i, j in ps.dropped))
    out.say("strata by codimension: " + ", ".join(f"{k}:{v}" for k, v in fs.count_by_codim().items()))
    return 0 if out.report(pb.check_face_strata(fs)) else 1


def _scenario(args, out: Output):
    if not args.scenario:
        raise ScenarioError("--scenario is required")
    doc, digest = _load(args.scenario)
    out.say(f"input: {digest}")
    return parse_scenario(doc)


COMMANDS = {
    "validate": cmd_validate,
    "strata": cmd_strata,
    "dualize": cmd_dualize,
    "tiling-check": cmd_tiling,
    "measure": cmd_measure,
    "pushforward": cmd_pushforward,
    "limit": cmd_limit,
    "gen-delaunay": cmd_gen_delaunay,
    "gen-product": cmd_gen_product,
    "plurisimplex": cmd_plurisimplex,
}

CSV_HELP = """CSV columns by command:
  strata       stratum_dim, face_dim, face
  dualize      vertex, dual_vertices, volume
  measure      stratum, dim, density, support
  pushforward  dim, density, support
  limit        m, mu_m, mu, abs_error, bound
  gen-product  dim, density, simplex
Points are written as (x,y,...) joined by ';'; numbers are exact rationals."""


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tropmeasure",
        description="Exact canonical measures on tropical varieties from skeleton data.",
        epilog=CSV_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--scenario", help="scenario JSON file")
    p.add_argument("--csv", help="also write the main table as CSV")
    p.add_argument("--m-list", dest="m_list", help="comma separated scales for limit, e.g. 1,2,4,8")
    p.add_argument("--omega", help="test region for limit as points 'x1,..;y1,..'")
    p.add_argument("--stratum", help="stratum id for limit")
    p.add_argument("--bundle-indices", dest="bundle_indices", help="comma separated bundle indices, one per slot")
    p.add_argument("--timing", action="store_true", help="print elapsed time on stderr")
    g = p.add_argument_group("generators")
    g.add_argument("--out", help="where to write a generated scenario (default: stdout)")
    g.add_argument("--lattice", help="lattice basis vectors as 'a,b;c,d'")
    g.add_argument("--form", help="form matrix rows as 'a,b;c,d'")
    g.add_argument("--shift", help="translation of the Delaunay decomposition")
    g.add_argument("--b", type=int, default=0, help="abelian dimension")
    g.add_argument("--n", type=int, default=1, help="torus rank (gen-product)")
    g.add_argument("--m", type=int, default=0, help="number of cutting sections (gen-product)")
    g.add_argument("--deg", default="1", help="degree of the abelian-part bundle (gen-product)")
    g.add_argument("--k", type=int, default=1, help="Kuhn triangulation step 1/k")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Output(args)
    out.say(f"command: {args.command}")
    start = time.perf_counter()
    try:
        status = COMMANDS[args.command](args, out)
    except (ScenarioError, OSError) as exc:
        out.flush()
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        out.say(f"FAIL: {exc}")
        out.flush()
        return 1
    out.flush()
    if args.timing:
        print(f"elapsed: {time.perf_counter() - start:.3f}s", file=sys.stderr)
    return status


if __name__ == "__main__":
    raise SystemExit(main())
