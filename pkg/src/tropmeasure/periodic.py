"""Lattice-periodic polytopal decompositions of R^n.

A decomposition is stored as finitely many maximal cells, one representative
per class modulo the lattice. Each representative is normalized so that its
lexicographically lowest vertex has lattice coordinates in [0, 1); the
normalized vertex tuple is the cell's key. Faces, refinements, stars and the
strata poset of the associated Mumford model are all derived from these.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import ceil, floor
from typing import Iterable, Sequence

from .exactgeom import (
    Polytope,
    Vec,
    inverse,
    intersect,
    is_face,
    matvec,
    rank,
    solve,
    transpose,
    vec,
    volume,
    vsub,
)
from .lattice import Lattice, covolume

Key = tuple[Vec, ...]


@dataclass
class Report:
    """Outcome of a report-style check: a list of (name, ok, detail) rows."""

    title: str
    checks: list[tuple[str, bool, str]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def add(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append((name, ok, detail))

    def violations(self) -> list[str]:
        return [f"{name}: {detail}" for name, ok, detail in self.checks if not ok]

    def lines(self) -> list[str]:
        out = [self.title]
        for name, ok, detail in self.checks:
            out.append(f"  {name}: {'ok' if ok else 'FAIL'}" + (f" ({detail})" if detail else ""))
        out.extend(f"  note: {n}" for n in self.notes)
        return out

    def __str__(self) -> str:
        return "\n".join(self.lines())


class LatticeFrame:
    """Coordinates relative to a full-rank lattice basis."""

    def __init__(self, lattice: Lattice):
        if lattice.rank != lattice.ambient_dim:
            raise ValueError("periodic decompositions need a full-rank lattice")
        self.lattice = lattice
        self.n = lattice.ambient_dim
        self.inv = inverse(lattice.matrix)

    def coords(self, v: Sequence) -> Vec:
        return matvec(self.inv, v)

    def point(self, k: Sequence[int]) -> Vec:
        return self.lattice.point(k)

    def normalize(self, p: Polytope) -> tuple[Polytope, tuple[int, ...]]:
        """Translate p by -lam so its lowest vertex has coordinates in [0,1)^n."""
        x = self.coords(p.vertices[0])
        k = tuple(floor(c) for c in x)
        if any(k):
            return p.translate(tuple(-c for c in self.point(k))), k
        return p, k

    def key(self, p: Polytope) -> Key:
        return self.normalize(p)[0].vertices

    def box(self, p: Polytope) -> tuple[Vec, Vec]:
        cs = [self.coords(v) for v in p.vertices]
        return (
            tuple(min(c[i] for c in cs) for i in range(self.n)),
            tuple(max(c[i] for c in cs) for i in range(self.n)),
        )

    def offsets_between(self, p: Polytope, q: Polytope, slack: int = 0) -> list[tuple[int, ...]]:
        """Lattice vectors k for which p and q + B k might meet.

        Exact superset: the bounding box of p - q in lattice coordinates.
        """
        plo, phi = self.box(p)
        qlo, qhi = self.box(q)
        ranges = []
        for i in range(self.n):
            lo = ceil(plo[i] - qhi[i]) - slack
            hi = floor(phi[i] - qlo[i]) + slack
            if lo > hi:
                return []
            ranges.append(range(lo, hi + 1))
        return list(itertools.product(*ranges))


@dataclass(frozen=True)
class FaceClass:
    """A face of the decomposition modulo the lattice."""

    key: Key
    polytope: Polytope

    @property
    def dim(self) -> int:
        return self.polytope.dim


class PeriodicDecomposition:
    """A decomposition of R^n invariant under translation by a lattice."""

    def __init__(self, lattice: Lattice, cells: Iterable[Polytope]):
        self.lattice = lattice
        self.frame = LatticeFrame(lattice)
        n = lattice.ambient_dim
        reps: dict[Key, Polytope] = {}
        for c in cells:
            if c.ambient_dim != n:
                raise ValueError("cell of the wrong ambient dimension")
            if c.dim != n:
                raise ValueError("maximal cells must be full dimensional")
            p, _ = self.frame.normalize(c)
            reps.setdefault(p.vertices, p)
        self.cells: tuple[Polytope, ...] = tuple(reps[k] for k in sorted(reps))

    @property
    def n(self) -> int:
        return self.lattice.ambient_dim

    def __repr__(self) -> str:
        return f"PeriodicDecomposition(n={self.n}, cells={len(self.cells)})"

    def same_cells(self, other: "PeriodicDecomposition") -> bool:
        return self.lattice == other.lattice and self.cell_keys() == other.cell_keys()

    def cell_keys(self) -> tuple[Key, ...]:
        return tuple(c.vertices for c in self.cells)

    def translate(self, shift: Sequence) -> "PeriodicDecomposition":
        shift = vec(shift)
        return PeriodicDecomposition(self.lattice, [c.translate(shift) for c in self.cells])

    # -- faces -------------------------------------------------------------

    @cached_property
    def face_classes(self) -> dict[Key, FaceClass]:
        out: dict[Key, FaceClass] = {}
        for cell in self.cells:
            lat = cell.face_lattice
            for idx, d in lat.nodes:
                if d < 0:
                    continue
                face = lat.face_polytope(idx) if d < self.n else cell
                rep, _ = self.frame.normalize(face)
                out.setdefault(rep.vertices, FaceClass(rep.vertices, rep))
        return dict(sorted(out.items()))

    def faces_of_dim(self, k: int) -> list[FaceClass]:
        return [f for f in self.face_classes.values() if f.dim == k]

    def vertex_classes(self) -> list[Vec]:
        return [f.key[0] for f in self.faces_of_dim(0)]

    def is_vertex(self, u: Sequence) -> bool:
        u = vec(u)
        p = Polytope.from_vertices([u])
        return self.frame.key(p) in self.face_classes

    # -- translates around a region -----------------------------------------

    def cells_meeting(self, region: Polytope, slack: int = 0) -> list[tuple[int, tuple[int, ...], Polytope]]:
        """Translated maximal cells that intersect ``region`` (closed sets)."""
        out = []
        for i, cell in enumerate(self.cells):
            for k in self.frame.offsets_between(region, cell, slack):
                t = cell.translate(self.frame.point(k)) if any(k) else cell
                if not intersect(region, t).is_empty:
                    out.append((i, k, t))
        return out

    def locate(self, u: Sequence) -> tuple[int, tuple[int, ...]]:
        """Some (cell index, lattice offset) whose translate contains u."""
        u = vec(u)
        for i, cell in enumerate(self.cells):
            lo, hi = self.frame.box(cell)
            x = self.frame.coords(u)
            ranges = [range(ceil(x[j] - hi[j]), floor(x[j] - lo[j]) + 1) for j in range(self.n)]
            for k in itertools.product(*ranges):
                lam = self.frame.point(k)
                if cell.contains(vsub(u, lam)):
                    return i, k
        raise ValueError(f"point {u} is not covered by the decomposition")


# ---------------------------------------------------------------------------
# Operations


def validate(dec: PeriodicDecomposition) -> Report:
    rep = Report("periodic decomposition")
    total = sum((volume(c) for c in dec.cells), Fraction(0))
    cov = covolume(dec.lattice)
    rep.add("covering", total == cov, f"{total} = {cov}" if total == cov else f"{total} != {cov}")
    bad = []
    active = False
    for i, p in enumerate(dec.cells):
        for j in range(i, len(dec.cells)):
            q = dec.cells[j]
            for k in dec.frame.offsets_between(p, q):
                if i == j and not any(k):
                    continue
                t = q.translate(dec.frame.point(k))
                inter = intersect(p, t)
                if inter.is_empty:
                    continue
                active = True
                if inter.dim == dec.n or not (is_face(inter, p) and is_face(inter, t)):
                    bad.append(f"cells {i},{j} offset {k}")
    rep.add("face-to-face", not bad, "; ".join(bad[:5]))
    rep.add("face-closure", True, "faces are derived from the maximal cells")
    if active:
        rep.notes.append("translate search bounded by lattice-coordinate bounding boxes of cell pairs")
    return rep


def refine(c0: PeriodicDecomposition, c1: PeriodicDecomposition) -> PeriodicDecomposition:
    """Common refinement by cellwise intersection."""
    if c0.lattice != c1.lattice:
        raise ValueError("lattice mismatch")
    cells = []
    for p in c0.cells:
        for _, _, t in c1.cells_meeting(p):
            inter = intersect(p, t)
            if inter.dim == c0.n:
                cells.append(inter)
    return PeriodicDecomposition(c0.lattice, cells)


def scale(dec: PeriodicDecomposition, m: int) -> PeriodicDecomposition:
    """All cells scaled by 1/m; the lattice is kept, so cell classes grow by m^n."""
    if m < 1:
        raise ValueError("m must be a positive integer")
    if m == 1:
        return dec
    inv = Fraction(1, m)
    cells = []
    for c in dec.cells:
        for k in itertools.product(range(m), repeat=dec.n):
            cells.append(c.translate(dec.frame.point(k)).scale(inv))
    return PeriodicDecomposition(dec.lattice, cells)


def star(dec: PeriodicDecomposition, u: Sequence) -> list[Polytope]:
    """Actual translates of the maximal cells having u as a vertex."""
    u = vec(u)
    if not dec.is_vertex(u):
        raise ValueError(f"{u} is not a vertex of the decomposition")
    pt = Polytope.from_vertices([u])
    return sorted(
        (t for _, _, t in dec.cells_meeting(pt) if u in t.vertices),
        key=lambda t: t.vertices,
    )


@dataclass(frozen=True)
class StratumNode:
    key: Key
    face: Polytope
    dim_stratum: int

    @property
    def face_dim(self) -> int:
        return self.face.dim


@dataclass
class MumfordStrata:
    """Strata of a Mumford model, one per open face modulo the lattice.

    ``order`` holds pairs (a, b) meaning stratum a lies in the closure of
    stratum b, which happens exactly when face b is a face of face a.
    """

    nodes: dict[Key, StratumNode]
    order: set[tuple[Key, Key]]

    def components(self) -> list[StratumNode]:
        return [s for s in self.nodes.values() if s.face_dim == 0]

    def of_dim(self, e: int) -> list[StratumNode]:
        return [s for s in self.nodes.values() if s.dim_stratum == e]

    def in_closure(self, a: Key, b: Key) -> bool:
        return a == b or (a, b) in self.order


def strata_poset(dec: PeriodicDecomposition, dim_A: int) -> MumfordStrata:
    if dim_A < dec.n:
        raise ValueError("dimension of the abelian variety is below the torus rank")
    nodes = {}
    order = set()
    for key, fc in dec.face_classes.items():
        nodes[key] = StratumNode(key, fc.polytope, dim_A - fc.dim)
    for key, fc in dec.face_classes.items():
        lat = fc.polytope.face_lattice
        for idx, d in lat.nodes:
            if d < 0 or d == fc.dim:
                continue
            sub = dec.frame.key(lat.face_polytope(idx))
            order.add((key, sub))
    return MumfordStrata(nodes, order)


# ---------------------------------------------------------------------------
# Genericity


class SigmaFamily:
    """A lattice-periodic family of polytopes, closed under taking faces."""

    def __init__(self, lattice: Lattice, polytopes: Iterable[Polytope]):
        self.lattice = lattice
        frame = LatticeFrame(lattice)
        members: dict[Key, Polytope] = {}
        for p in polytopes:
            lat = p.face_lattice
            for idx, d in lat.nodes:
                if d < 0:
                    continue
                face = lat.face_polytope(idx) if d < p.dim else p
                rep, _ = frame.normalize(face)
                members.setdefault(rep.vertices, rep)
        self.polytopes = tuple(members[k] for k in sorted(members))


def _hull_intersection_dim(p: Polytope, q: Polytope) -> int:
    """Dimension of aff(p) cap aff(q), or -1 if the hulls are disjoint."""
    p0, q0 = p.vertices[0], q.vertices[0]
    dp = _direction_basis(p)
    dq = _direction_basis(q)
    cols = dp + [tuple(-x for x in v) for v in dq]
    rhs = vsub(q0, p0)
    if not cols:
        return 0 if rhs == tuple(Fraction(0) for _ in rhs) else -1
    a = transpose(cols)
    if solve(a, rhs) is None:
        return -1
    return len(cols) - rank(cols)


def _direction_basis(p: Polytope) -> list[Vec]:
    p0 = p.vertices[0]
    out: list[Vec] = []
    for v in p.vertices[1:]:
        d = vsub(v, p0)
        if rank(out + [d]) > len(out):
            out.append(d)
    return out


def _pairs(dec: PeriodicDecomposition, sig: SigmaFamily, slack: int):
    for fc in dec.face_classes.values():
        for s in sig.polytopes:
            for k in dec.frame.offsets_between(fc.polytope, s, slack):
                yield fc.polytope, s.translate(dec.frame.point(k))


def is_sigma_generic(dec: PeriodicDecomposition, sig: SigmaFamily) -> bool:
    """Affine-hull conditions over translates within a one-cell margin."""
    n = dec.n
    for delta, sigma in _pairs(dec, sig, slack=1):
        D = delta.dim + sigma.dim - n
        got = _hull_intersection_dim(delta, sigma)
        if D >= 0 and got != D:
            return False
        if D < 0 and got != -1:
            return False
    return True


def is_sigma_transversal(dec: PeriodicDecomposition, sig: SigmaFamily) -> bool:
    n = dec.n
    for delta, sigma in _pairs(dec, sig, slack=0):
        inter = intersect(delta, sigma)
        if not inter.is_empty and inter.dim != delta.dim + sigma.dim - n:
            return False
    return True


__all__ = [
    "FaceClass",
    "LatticeFrame",
    "MumfordStrata",
    "PeriodicDecomposition",
    "Report",
    "SigmaFamily",
    "StratumNode",
    "is_sigma_generic",
    "is_sigma_transversal",
    "refine",
    "scale",
    "star",
    "strata_poset",
    "validate",
]
