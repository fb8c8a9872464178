"""Skeletons of strictly semistable models and their tropical maps.

A skeleton is a set of strata. A stratum with r+1 components carries a
canonical simplex, realized in R^r as

    Sigma_S = {u in R^r_+ : u_1 + ... + u_r <= v(pi)}

with local vertex 0 at the origin and local vertex j at v(pi) e_j. The faces
of Sigma_S are indexed by subsets of local vertex indices; ``faces`` maps
each proper non-empty subset to the stratum that owns that face. A tropical
map assigns each stratum an affine lift into R^n; lifts of a stratum and of
its faces must agree up to a lattice translation.
"""

from __future__ import annotations

import itertools
from math import lcm
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .exactgeom import (
    AffineMap,
    Polytope,
    Vec,
    det,
    faces as face_lattice_of,
    rank,
    rat,
    standard_simplex,
    vec,
    vscale,
    vsub,
)
from .lattice import Lattice
from .periodic import LatticeFrame, PeriodicDecomposition, Report

WeightKey = tuple[int, ...]


@dataclass(frozen=True)
class Stratum:
    """A stratum of the special fibre.

    ``weights`` maps sorted tuples of bundle indices (length ``dim``) to the
    intersection numbers of the abelian-part bundles on the closure; a
    ``None`` key holds a single-bundle shorthand used for every multiset.
    """

    id: str
    vertices: tuple[str, ...]
    dim: int
    faces: Mapping[tuple[int, ...], str] = field(default_factory=dict)
    weights: Mapping[WeightKey | None, Fraction] = field(default_factory=dict)

    @property
    def r(self) -> int:
        return len(self.vertices) - 1

    def weight(self, key: Sequence[int] = ()) -> Fraction:
        key = tuple(sorted(key))
        if key in self.weights:
            return rat(self.weights[key])
        return rat(self.weights.get(None, 0))

    def has_weight(self) -> bool:
        return any(rat(w) != 0 for w in self.weights.values())


class CanonicalSimplex:
    """Sigma_S of dimension r and size v(pi)."""

    def __init__(self, r: int, pi_val):
        self.r = r
        self.pi_val = rat(pi_val)
        if self.pi_val <= 0:
            raise ValueError("v(pi) must be positive")

    @property
    def polytope(self) -> Polytope:
        return standard_simplex(self.r, self.pi_val)

    def vertex(self, j: int) -> Vec:
        z = [Fraction(0)] * self.r
        if j:
            z[j - 1] = self.pi_val
        return tuple(z)

    def barycentric(self, u: Sequence) -> Vec:
        u = vec(u)
        rest = [x / self.pi_val for x in u]
        return (1 - sum(rest, Fraction(0)), *rest)

    def from_barycentric(self, lam: Sequence) -> Vec:
        return tuple(self.pi_val * rat(x) for x in lam[1:])

    def face_coordinates(self, u: Sequence, subset: Sequence[int]) -> Vec:
        """Coordinates of a point on the face ``subset`` in that face's own Sigma."""
        lam = self.barycentric(u)
        return tuple(self.pi_val * lam[j] for j in subset[1:])


class SkeletonComplex:
    def __init__(self, d: int, strata: Sequence[Stratum], pi_val=1):
        self.d = d
        self.strata: dict[str, Stratum] = {}
        for s in strata:
            if s.id in self.strata:
                raise ValueError(f"duplicate stratum id {s.id}")
            self.strata[s.id] = s
        self.pi_val = rat(pi_val)

    def simplex(self, sid: str) -> CanonicalSimplex:
        return CanonicalSimplex(self.strata[sid].r, self.pi_val)

    def components(self) -> list[str]:
        return sorted({v for s in self.strata.values() for v in s.vertices})

    def __iter__(self):
        return iter(self.strata.values())

    def __len__(self) -> int:
        return len(self.strata)


class TropicalMap:
    """Per-stratum affine lifts Sigma_S -> R^n, compatible modulo the lattice."""

    def __init__(self, lattice: Lattice, maps: Mapping[str, AffineMap]):
        self.lattice = lattice
        self.maps = dict(maps)

    def __getitem__(self, sid: str) -> AffineMap:
        return self.maps[sid]

    @property
    def n(self) -> int:
        return self.lattice.ambient_dim

    def linear_columns(self, sid: str) -> list[Vec]:
        return self.maps[sid].columns()

    def rank(self, sid: str) -> int:
        cols = self.linear_columns(sid)
        return rank(cols) if cols else 0


# ---------------------------------------------------------------------------
# Validation


def validate_skeleton(sk: SkeletonComplex, tm: TropicalMap) -> Report:
    rep = Report("skeleton")
    dims = []
    for s in sk:
        if s.dim != sk.d - s.r:
            dims.append(f"{s.id}: dim {s.dim} but simplex dim {s.r}")
    rep.add("dimension formula", not dims, "; ".join(dims))

    faces_bad = []
    for s in sk:
        expected = {
            sub
            for size in range(1, s.r + 1)
            for sub in itertools.combinations(range(s.r + 1), size)
        }
        if set(s.faces) != expected:
            faces_bad.append(f"{s.id}: faces indexed by {sorted(s.faces)}")
            continue
        if len(set(s.vertices)) != len(s.vertices):
            faces_bad.append(f"{s.id}: repeated component")
        for sub, tid in s.faces.items():
            t = sk.strata.get(tid)
            if t is None:
                faces_bad.append(f"{s.id}: unknown face {tid}")
                continue
            if t.vertices != tuple(s.vertices[j] for j in sub):
                faces_bad.append(f"{s.id}: face {sub} -> {tid} has components {t.vertices}")
            # faces of faces must be faces
            for subsub, uid in t.faces.items():
                if s.faces.get(tuple(sub[j] for j in subsub)) != uid:
                    faces_bad.append(f"{s.id}: face {sub} is not closed under faces")
    rep.add("face correspondence", not faces_bad, "; ".join(faces_bad[:5]))

    integ = []
    shape = []
    for s in sk:
        f = tm.maps.get(s.id)
        if f is None:
            shape.append(f"{s.id}: no map")
            continue
        if f.codomain_dim != tm.n or (s.r and f.domain_dim != s.r):
            shape.append(f"{s.id}: map of shape {f.codomain_dim}x{f.domain_dim}")
        if any(x.denominator != 1 for row in f.linear for x in row):
            integ.append(s.id)
    rep.add("map shapes", not shape, "; ".join(shape))
    rep.add("integral linear parts", not integ, ", ".join(integ))

    compat = []
    for s in sk:
        if s.id not in tm.maps:
            continue
        sig = sk.simplex(s.id)
        f = tm[s.id]
        for sub, tid in s.faces.items():
            if tid not in tm.maps:
                continue
            g = tm[tid]
            tsig = sk.simplex(tid)
            diffs = {
                vsub(f(sig.vertex(j)), g(tsig.vertex(i))) for i, j in enumerate(sub)
            }
            if len(diffs) != 1 or not tm.lattice.contains(next(iter(diffs))):
                compat.append(f"{s.id} vs face {tid}")
    rep.add("face compatibility mod lattice", not compat, "; ".join(compat[:5]))
    return rep


def face_translation(sk: SkeletonComplex, tm: TropicalMap, sid: str, sub: tuple[int, ...]) -> Vec:
    """lam with f_S(vertex sub[i]) = f_T(vertex i) + lam."""
    s = sk.strata[sid]
    t = s.faces[sub]
    return vsub(tm[sid](sk.simplex(sid).vertex(sub[0])), tm[t](sk.simplex(t).vertex(0)))


# ---------------------------------------------------------------------------
# Subdivision and refined strata


@dataclass
class SubdivisionCell:
    stratum: str
    polytope: Polytope
    source: tuple[int, tuple[int, ...]]


@dataclass
class SkeletonSubdivision:
    skeleton: SkeletonComplex
    tmap: TropicalMap
    cells: dict[str, list[SubdivisionCell]]


def subdivide(sk: SkeletonComplex, tm: TropicalMap, c1: PeriodicDecomposition) -> SkeletonSubdivision:
    """Preimages of the cells of c1 under each lift, cut down to Sigma_S."""
    if c1.lattice != tm.lattice:
        raise ValueError("lattice mismatch")
    out: dict[str, list[SubdivisionCell]] = {}
    for s in sk:
        sig = sk.simplex(s.id).polytope
        f = tm[s.id]
        image = f.image(sig)
        cells = []
        seen = set()
        for i, k, t in c1.cells_meeting(image):
            if s.r == 0:
                pre = sig
            else:
                pre = f.preimage(t, sig)
            if pre.is_empty or pre.dim != s.r or pre.vertices in seen:
                continue
            seen.add(pre.vertices)
            cells.append(SubdivisionCell(s.id, pre, (i, k)))
        out[s.id] = sorted(cells, key=lambda c: c.polytope.vertices)
    return SkeletonSubdivision(sk, tm, out)


def _carrier(sig: CanonicalSimplex, pts: Sequence[Vec]) -> tuple[int, ...]:
    """Smallest face of Sigma (as local vertex indices) containing the points."""
    support = set()
    for p in pts:
        lam = sig.barycentric(p)
        support.update(j for j, x in enumerate(lam) if x != 0)
    return tuple(sorted(support))


@dataclass
class RefinedStrata:
    """Strata of the refined model, one per open face of the subdivision.

    Keys are (owning stratum id, vertices in that stratum's Sigma coordinates).
    ``order`` holds (a, b) when stratum a lies in the closure of stratum b.
    """

    codim: dict[tuple[str, tuple[Vec, ...]], int]
    order: set[tuple]

    def components(self) -> list:
        return [k for k, c in self.codim.items() if c == 0]

    def count_by_codim(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for c in self.codim.values():
            out[c] = out.get(c, 0) + 1
        return dict(sorted(out.items()))


def _face_key(sk: SkeletonComplex, sid: str, pts: Sequence[Vec]):
    s = sk.strata[sid]
    sig = sk.simplex(sid)
    carrier = _carrier(sig, pts)
    if len(carrier) == s.r + 1:
        return sid, tuple(sorted(pts))
    tid = s.faces[carrier]
    return tid, tuple(sorted(sig.face_coordinates(p, carrier) for p in pts))


def refined_strata(subdiv: SkeletonSubdivision) -> RefinedStrata:
    sk = subdiv.skeleton
    codim: dict = {}
    order: set = set()
    for sid, cells in subdiv.cells.items():
        for cell in cells:
            lat = face_lattice_of(cell.polytope)
            keys = {}
            for idx, d in lat.nodes:
                if d < 0:
                    continue
                pts = [cell.polytope.vertices[i] for i in sorted(idx)]
                key = _face_key(sk, sid, pts)
                keys[idx] = key
                codim[key] = d
            for idx, key in keys.items():
                for jdx, sub in keys.items():
                    if jdx < idx:
                        order.add((key, sub))
    return RefinedStrata(dict(sorted(codim.items(), key=lambda kv: (kv[1], repr(kv[0])))), order)


# ---------------------------------------------------------------------------
# Non-degeneracy and charts


def nondegenerate_simplices(sk: SkeletonComplex, tm: TropicalMap) -> list[str]:
    return sorted(s.id for s in sk if tm.rank(s.id) == s.r and s.has_weight())


@dataclass
class Chart:
    stratum: str
    simplex: Polytope
    lift: AffineMap
    image_key: tuple[Vec, ...]


def canonical_subset_charts(sk: SkeletonComplex, tm: TropicalMap) -> dict[tuple[Vec, ...], list[Chart]]:
    """Charts of the non-degenerate simplices, grouped by image modulo the lattice.

    The list length for a key is the number of sheets over that image.
    """
    frame = LatticeFrame(tm.lattice)
    out: dict[tuple[Vec, ...], list[Chart]] = {}
    for sid in nondegenerate_simplices(sk, tm):
        f = tm[sid]
        if not f.is_injective():
            raise ValueError(f"lift of {sid} is not injective")
        sig = sk.simplex(sid).polytope
        key = frame.key(f.image(sig))
        out.setdefault(key, []).append(Chart(sid, sig, f, key))
    return dict(sorted(out.items()))


# ---------------------------------------------------------------------------
# Generators


def kuhn_triangulation(lattice: Lattice, k: int = 1) -> PeriodicDecomposition:
    """Freudenthal-Kuhn triangulation of step 1/k, periodic under an integer lattice."""
    n = lattice.ambient_dim
    if any(x.denominator != 1 for b in lattice.basis for x in b):
        raise ValueError("lattice must be integral")
    step = Fraction(1, k)
    lo = [min(Fraction(0), *(sum(b[i] for b in bs) for bs in _subsets(lattice.basis))) for i in range(n)]
    hi = [max(Fraction(0), *(sum(b[i] for b in bs) for bs in _subsets(lattice.basis))) for i in range(n)]
    ranges = [range(int(lo[i]) * k, int(hi[i]) * k) for i in range(n)]
    cells = []
    for corner in itertools.product(*ranges):
        base = tuple(Fraction(c, k) for c in corner)
        for perm in itertools.permutations(range(n)):
            pts = [base]
            cur = list(base)
            for axis in perm:
                cur[axis] += step
                pts.append(tuple(cur))
            cells.append(Polytope.from_vertices(pts))
    return PeriodicDecomposition(lattice, cells)


def _subsets(vs):
    for size in range(1, len(vs) + 1):
        for c in itertools.combinations(vs, size):
            yield c


def kkms_index(tri: PeriodicDecomposition) -> int:
    """m_C: every m_C * cell is a unimodular simplex with integral vertices."""
    n = tri.n
    m = 1
    for c in tri.cells:
        if len(c.vertices) != n + 1:
            raise ValueError("not a triangulation")
        for v in c.vertices:
            for x in v:
                m = lcm(m, x.denominator)
    for c in tri.cells:
        v0 = c.vertices[0]
        edges = [vscale(m, vsub(v, v0)) for v in c.vertices[1:]]
        if abs(det(edges)) != 1:
            raise ValueError("triangulation is not of unimodular (KKMS) type")
    return m


def skeleton_from_triangulation(
    tri: PeriodicDecomposition,
    d: int,
    weight: Callable[[Polytope], Mapping | object],
    multiplicity: Callable[[Polytope], int] | None = None,
    linear: Sequence[Sequence] | None = None,
) -> tuple[SkeletonComplex, TropicalMap]:
    """Skeleton whose canonical simplices are the simplices of a periodic triangulation.

    Each face class of ``tri`` becomes a stratum of dimension d - dim(face);
    ``weight`` returns its weight table (or a scalar shorthand). An optional
    ``multiplicity`` duplicates strata of top-dimensional simplices, and an
    optional integer matrix ``linear`` (rows) composes the tropical map with
    u -> linear . u into a larger torus whose lattice contains the image.
    """
    m_c = kkms_index(tri)
    pi_val = Fraction(1, m_c)
    frame = tri.frame
    vertex_ids = {fc.key: f"v{i}" for i, fc in enumerate(tri.faces_of_dim(0))}
    classes = list(tri.face_classes.values())
    ids: dict = {}
    for i, fc in enumerate(sorted(classes, key=lambda f: (f.dim, f.key))):
        ids[fc.key] = f"s{fc.dim}_{i}"

    def comp(v):
        return vertex_ids[frame.key(Polytope.from_vertices([v]))]

    strata = []
    maps = {}
    n = tri.n
    for fc in classes:
        verts = fc.polytope.vertices
        r = len(verts) - 1
        if fc.dim != r:
            raise ValueError("triangulation has a non-simplicial face")
        faces = {}
        for size in range(1, r + 1):
            for sub in itertools.combinations(range(r + 1), size):
                sub_poly = Polytope.from_vertices([verts[j] for j in sub])
                faces[sub] = ids[frame.key(sub_poly)]
        w = weight(fc.polytope)
        table = dict(w) if isinstance(w, Mapping) else {None: rat(w)}
        comps = tuple(comp(v) for v in verts)
        cols = [vscale(m_c, vsub(v, verts[0])) for v in verts[1:]]
        rows = [[c[i] for c in cols] for i in range(n)] if cols else [[] for _ in range(n)]
        f = AffineMap(rows, verts[0])
        if linear is not None:
            lin = [vec(r_) for r_ in linear]
            f = AffineMap(
                [[sum((lrow[a] * f.linear[a][j] for a in range(n)), Fraction(0)) for j in range(r)] for lrow in lin]
                if r
                else [[] for _ in lin],
                tuple(sum((lrow[a] * f.offset[a] for a in range(n)), Fraction(0)) for lrow in lin),
            )
        mult = multiplicity(fc.polytope) if (multiplicity and r == n) else 1
        sid = ids[fc.key]
        for copy in range(mult):
            cid = sid if mult == 1 else f"{sid}#{copy + 1}"
            strata.append(Stratum(cid, comps, d - r, faces, table))
            maps[cid] = f
    strata.sort(key=lambda s: (s.r, s.id))
    return SkeletonComplex(d, strata, pi_val), maps


def torus_skeleton(
    lattice: Lattice, d: int, weight, k: int = 1, multiplicity=None
) -> tuple[SkeletonComplex, TropicalMap]:
    tri = kuhn_triangulation(lattice, k)
    sk, maps = skeleton_from_triangulation(tri, d, weight, multiplicity)
    return sk, TropicalMap(lattice, maps)


def loop_skeleton(
    lattice: Lattice, direction: Sequence[int], segments: int, weight=1, d: int = 1, vertex_weight=0
) -> tuple[SkeletonComplex, TropicalMap]:
    """A closed loop in R^n / lattice through 0 in the given lattice direction."""
    if segments < 2:
        raise ValueError("a loop needs at least two segments")
    direction = vec(direction)
    if not lattice.contains(direction):
        raise ValueError("direction must be a lattice vector")
    pi_val = Fraction(1, segments)
    n = lattice.ambient_dim
    strata = []
    maps = {}
    for j in range(segments):
        strata.append(Stratum(f"p{j}", (f"c{j}",), d, {}, _table(vertex_weight)))
        maps[f"p{j}"] = AffineMap([[] for _ in range(n)], vscale(Fraction(j, segments), direction))
    for j in range(segments):
        a, b = f"c{j}", f"c{(j + 1) % segments}"
        faces = {(0,): f"p{j}", (1,): f"p{(j + 1) % segments}"}
        strata.append(Stratum(f"e{j}", (a, b), d - 1, faces, _table(weight)))
        maps[f"e{j}"] = AffineMap([[x] for x in direction], vscale(Fraction(j, segments), direction))
    return SkeletonComplex(d, strata, pi_val), TropicalMap(lattice, maps)


def _table(w) -> dict:
    return dict(w) if isinstance(w, Mapping) else {None: rat(w)}


def in_relint(sig: CanonicalSimplex, u: Sequence) -> bool:
    return all(x > 0 for x in sig.barycentric(u)) if sig.r else True


__all__ = [
    "CanonicalSimplex",
    "Chart",
    "RefinedStrata",
    "SkeletonComplex",
    "SkeletonSubdivision",
    "Stratum",
    "SubdivisionCell",
    "TropicalMap",
    "canonical_subset_charts",
    "face_translation",
    "in_relint",
    "kkms_index",
    "kuhn_triangulation",
    "loop_skeleton",
    "nondegenerate_simplices",
    "refined_strata",
    "skeleton_from_triangulation",
    "subdivide",
    "torus_skeleton",
    "validate_skeleton",
]
