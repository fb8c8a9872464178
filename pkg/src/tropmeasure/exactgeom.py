"""Exact rational linear algebra and a small convex polytope kernel.

Everything here works over :class:`fractions.Fraction`. Polytopes carry both
a vertex list and an inequality description ``normal . u >= offset``; the
conversion in either direction is done with the double description method on
integer-scaled cones.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import cached_property, reduce
from math import factorial, gcd, lcm
from typing import Iterable, Sequence

Rat = Fraction
Vec = tuple[Fraction, ...]
Mat = tuple[Vec, ...]


def rat(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are rejected: an exact kernel should never see them.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def vec(xs: Iterable) -> Vec:
    return tuple(rat(x) for x in xs)


def mat(rows: Iterable[Iterable]) -> Mat:
    return tuple(vec(r) for r in rows)


def dot(u: Sequence, v: Sequence) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def vsub(u: Sequence, v: Sequence) -> Vec:
    return tuple(a - b for a, b in zip(u, v))


def vadd(u: Sequence, v: Sequence) -> Vec:
    return tuple(a + b for a, b in zip(u, v))


def vscale(c, u: Sequence) -> Vec:
    return tuple(c * a for a in u)


def transpose(m: Sequence[Sequence]) -> Mat:
    return tuple(zip(*m)) if m else ()


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Mat:
    bt = transpose(b)
    return tuple(tuple(dot(row, col) for col in bt) for row in a)


def matvec(a: Sequence[Sequence], v: Sequence) -> Vec:
    return tuple(dot(row, v) for row in a)


def identity(n: int) -> Mat:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def _denominator_lcm(xs: Iterable[Fraction]) -> int:
    return reduce(lcm, (x.denominator for x in xs), 1)


def integer_row(row: Sequence[Fraction]) -> tuple[int, ...]:
    """Scale a rational row to a primitive integer row (same direction)."""
    d = _denominator_lcm(row)
    ints = [int(x * d) for x in row]
    g = reduce(gcd, ints, 0)
    if g > 1:
        ints = [x // g for x in ints]
    return tuple(ints)


def det(m: Sequence[Sequence]) -> Fraction:
    """Determinant by fraction-free (Bareiss) elimination."""
    n = len(m)
    if n == 0:
        return Fraction(1)
    if any(len(r) != n for r in m):
        raise ValueError("determinant of a non-square matrix")
    scale = 1
    rows = []
    for r in m:
        d = _denominator_lcm(rat(x) for x in r)
        scale *= d
        rows.append([int(rat(x) * d) for x in r])
    sign = 1
    prev = 1
    for k in range(n - 1):
        if rows[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if rows[i][k] != 0), None)
            if swap is None:
                return Fraction(0)
            rows[k], rows[swap] = rows[swap], rows[k]
            sign = -sign
        pivot = rows[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                rows[i][j] = (rows[i][j] * pivot - rows[i][k] * rows[k][j]) // prev
            rows[i][k] = 0
        prev = pivot
    return Fraction(sign * rows[n - 1][n - 1], scale)


def rref(m: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and pivot columns."""
    rows = [[rat(x) for x in r] for r in m]
    if not rows:
        return [], []
    ncols = len(rows[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def rank(m: Sequence[Sequence]) -> int:
    return len(rref(m)[1]) if m else 0


def nullspace(m: Sequence[Sequence], ncols: int | None = None) -> list[Vec]:
    """Basis of {x : m x = 0}, as primitive integer-direction rational vectors."""
    if not m:
        if ncols is None:
            raise ValueError("need ncols for an empty matrix")
        return [tuple(Fraction(int(i == j)) for j in range(ncols)) for i in range(ncols)]
    ncols = len(m[0])
    red, piv = rref(m)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for i, p in enumerate(piv):
            x[p] = -red[i][f]
        basis.append(tuple(Fraction(v) for v in integer_row(x)))
    return basis


def solve(a: Sequence[Sequence], b: Sequence) -> Vec | None:
    """One solution of a x = b, or None if inconsistent."""
    if not a:
        return None if any(rat(v) != 0 for v in b) else ()
    ncols = len(a[0])
    aug = [list(r) + [rat(v)] for r, v in zip(a, b)]
    red, piv = rref(aug)
    if ncols in piv:
        return None
    x = [Fraction(0)] * ncols
    for i, p in enumerate(piv):
        x[p] = red[i][ncols]
    return tuple(x)


def inverse(m: Sequence[Sequence]) -> Mat:
    n = len(m)
    aug = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(m)]
    red, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise ValueError("singular matrix")
    return tuple(tuple(r[n:]) for r in red)


# ---------------------------------------------------------------------------
# Double description


def _extreme_rays(rows: list[tuple[int, ...]], dim: int) -> list[tuple[int, ...]]:
    """Extreme rays of the pointed cone {y : a.y >= 0 for a in rows}.

    ``rows`` must have rank ``dim``. Rays come back as primitive integer vectors.
    """
    if not rows:
        raise ValueError("cone without constraints is not pointed")
    # greedy choice of dim independent rows for the initial simplicial cone
    chosen: list[int] = []
    for i, r in enumerate(rows):
        if rank([rows[j] for j in chosen] + [r]) > len(chosen):
            chosen.append(i)
            if len(chosen) == dim:
                break
    if len(chosen) < dim:
        raise ValueError("cone is not pointed")
    inv = inverse([rows[i] for i in chosen])
    rays = [integer_row(col) for col in transpose(inv)]

    def zero_set(ray, upto):
        mask = 0
        for k in upto:
            if sum(a * b for a, b in zip(rows[k], ray)) == 0:
                mask |= 1 << k
        return mask

    done = list(chosen)
    zsets = [zero_set(ray, done) for ray in rays]
    for k in range(len(rows)):
        if k in chosen:
            continue
        a = rows[k]
        vals = [sum(x * y for x, y in zip(a, ray)) for ray in rays]
        pos = [i for i, v in enumerate(vals) if v > 0]
        neg = [i for i, v in enumerate(vals) if v < 0]
        zer = [i for i, v in enumerate(vals) if v == 0]
        if not neg:
            for i in zer:
                zsets[i] |= 1 << k
            done.append(k)
            continue
        new_rays = []
        new_z = []
        for i in pos:
            new_rays.append(rays[i])
            new_z.append(zsets[i])
        for i in zer:
            new_rays.append(rays[i])
            new_z.append(zsets[i] | (1 << k))
        for i in pos:
            for j in neg:
                common = zsets[i] & zsets[j]
                if bin(common).count("1") < dim - 2:
                    continue
                adjacent = True
                for t in range(len(rays)):
                    if t != i and t != j and (zsets[t] & common) == common:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                vi, vj = vals[i], vals[j]
                comb = [vi * y - vj * x for x, y in zip(rays[i], rays[j])]
                g = reduce(gcd, comb, 0)
                comb = tuple(c // g for c in comb)
                new_rays.append(comb)
                new_z.append(common | (1 << k))
        rays, zsets = new_rays, new_z
        done.append(k)
    return rays


# ---------------------------------------------------------------------------
# Polytopes


class Polytope:
    """A bounded convex polytope (possibly empty or lower dimensional).

    ``vertices`` is the irredundant vertex list, sorted. ``halfspaces`` are
    pairs ``(normal, offset)`` meaning ``normal . u >= offset`` and
    ``equations`` pairs meaning ``normal . u == offset``; together they cut
    out the polytope. For full-dimensional polytopes the halfspaces are
    exactly the facets.
    """

    __slots__ = ("ambient_dim", "vertices", "halfspaces", "equations", "_dim", "__dict__")

    def __init__(self, ambient_dim: int, vertices, halfspaces, equations, dim: int):
        self.ambient_dim = ambient_dim
        self.vertices: tuple[Vec, ...] = vertices
        self.halfspaces: tuple[tuple[Vec, Fraction], ...] = halfspaces
        self.equations: tuple[tuple[Vec, Fraction], ...] = equations
        self._dim = dim

    # -- construction ------------------------------------------------------

    @classmethod
    def empty(cls, ambient_dim: int) -> "Polytope":
        return cls(ambient_dim, (), (), (), -1)

    @classmethod
    def from_vertices(cls, points: Iterable[Sequence]) -> "Polytope":
        pts = sorted(set(vec(p) for p in points))
        if not pts:
            raise ValueError("use Polytope.empty for the empty polytope")
        n = len(pts[0])
        if any(len(p) != n for p in pts):
            raise ValueError("points of different dimensions")
        p0 = pts[0]
        diffs = [vsub(p, p0) for p in pts[1:]]
        red, piv = rref(diffs) if diffs else ([], [])
        k = len(piv)
        eqs = []
        for a in nullspace(red, n) if red else nullspace([], n):
            eqs.append((a, dot(a, p0)))
        if k == 0:
            return cls(n, (p0,), (), tuple(eqs), 0)
        # project onto pivot coordinates: injective on the affine hull
        proj = [tuple(p[c] for c in piv) for p in pts]
        facets = _facets_full_dim(proj, k)
        halfspaces = []
        for a, c in facets:
            normal = [Fraction(0)] * n
            for ai, col in zip(a, piv):
                normal[col] = ai
            halfspaces.append((tuple(normal), c))
        # keep only extreme points: tight facet normals must have rank k
        verts = []
        for p, q in zip(pts, proj):
            tight = [a for a, c in facets if dot(a, q) == c]
            if len(tight) >= k and rank(tight) == k:
                verts.append(p)
        return cls(n, tuple(verts), tuple(sorted(halfspaces)), tuple(sorted(eqs)), k)

    @classmethod
    def from_halfspaces(
        cls,
        halfspaces: Iterable[tuple[Sequence, object]],
        ambient_dim: int,
        equations: Iterable[tuple[Sequence, object]] = (),
    ) -> "Polytope":
        """Vertex enumeration for ``{u : a.u >= c}`` (and ``e.u == f``).

        Raises ``ValueError("unbounded")`` for unbounded nonempty input.
        """
        n = ambient_dim
        rows: list[tuple[int, ...]] = []
        for a, c in halfspaces:
            rows.append(integer_row(list(vec(a)) + [-rat(c)]))
        for e, f in equations:
            r = integer_row(list(vec(e)) + [-rat(f)])
            rows.append(r)
            rows.append(tuple(-x for x in r))
        rows.append(tuple([0] * n + [1]))
        rows = [r for r in rows if any(r)]
        # cut away the lineality space so the cone is pointed
        lin = nullspace(rows, n + 1)
        for l in lin:
            r = integer_row(l)
            rows.append(r)
            rows.append(tuple(-x for x in r))
        rays = _extreme_rays(rows, n + 1)
        points = []
        unbounded = bool(lin)
        for ray in rays:
            t = ray[-1]
            if t > 0:
                points.append(tuple(Fraction(x, t) for x in ray[:-1]))
            elif t == 0:
                unbounded = True
        if not points:
            return cls.empty(n)
        if unbounded:
            raise ValueError("unbounded")
        return cls.from_vertices(points)

    # -- basic queries -----------------------------------------------------

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    @property
    def dim(self) -> int:
        return self._dim

    def key(self) -> tuple[Vec, ...]:
        return self.vertices

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Polytope)
            and self.ambient_dim == other.ambient_dim
            and self.vertices == other.vertices
        )

    def __hash__(self) -> int:
        return hash((self.ambient_dim, self.vertices))

    def __repr__(self) -> str:
        vs = ", ".join("(" + ", ".join(str(x) for x in v) + ")" for v in self.vertices)
        return f"Polytope(dim={self.dim}, vertices=[{vs}])"

    def contains(self, u: Sequence) -> bool:
        u = vec(u)
        if self.is_empty:
            return False
        return all(dot(a, u) == c for a, c in self.equations) and all(
            dot(a, u) >= c for a, c in self.halfspaces
        )

    def centroid(self) -> Vec:
        k = len(self.vertices)
        return tuple(sum(v[i] for v in self.vertices) / k for i in range(self.ambient_dim))

    def translate(self, t: Sequence) -> "Polytope":
        t = vec(t)
        if self.is_empty:
            return self
        verts = tuple(vadd(v, t) for v in self.vertices)
        hs = tuple(sorted((a, c + dot(a, t)) for a, c in self.halfspaces))
        eqs = tuple(sorted((a, c + dot(a, t)) for a, c in self.equations))
        return Polytope(self.ambient_dim, verts, hs, eqs, self._dim)

    def scale(self, s) -> "Polytope":
        s = rat(s)
        if s <= 0:
            raise ValueError("scale factor must be positive")
        if self.is_empty:
            return self
        verts = tuple(vscale(s, v) for v in self.vertices)
        hs = tuple(sorted((a, c * s) for a, c in self.halfspaces))
        eqs = tuple(sorted((a, c * s) for a, c in self.equations))
        return Polytope(self.ambient_dim, verts, hs, eqs, self._dim)

    def bounding_box(self) -> tuple[Vec, Vec]:
        lo = tuple(min(v[i] for v in self.vertices) for i in range(self.ambient_dim))
        hi = tuple(max(v[i] for v in self.vertices) for i in range(self.ambient_dim))
        return lo, hi

    @cached_property
    def face_lattice(self) -> "FaceLattice":
        return faces(self)


def _facets_full_dim(points: list[Vec], k: int) -> list[tuple[Vec, Fraction]]:
    """Facets of conv(points) in R^k, assuming the points affinely span R^k."""
    if k == 1:
        xs = [p[0] for p in points]
        return [((Fraction(1),), min(xs)), ((Fraction(-1),), -max(xs))]
    # cone {(a, c) : a.p - c >= 0 for all p}; its extreme rays are the facets
    rows = [integer_row(list(p) + [Fraction(-1)]) for p in points]
    facets = []
    for ray in _extreme_rays(rows, k + 1):
        a = tuple(Fraction(x) for x in ray[:-1])
        if any(a):
            facets.append((a, Fraction(ray[-1])))
    return facets


def dual_representation(p: Polytope, have: str) -> Polytope:
    """Recompute both representations from the one named by ``have``."""
    if p.is_empty:
        return p
    if have == "V":
        return Polytope.from_vertices(p.vertices)
    if have == "H":
        return Polytope.from_halfspaces(p.halfspaces, p.ambient_dim, p.equations)
    raise ValueError("have must be 'V' or 'H'")


# ---------------------------------------------------------------------------
# Faces


class FaceLattice:
    """Faces of a polytope as sets of vertex indices, graded by dimension.

    ``nodes`` is a list of ``(frozenset_of_vertex_indices, dim)`` with the
    empty face first and the polytope last; ``edges`` are the covering pairs
    ``(i, j)`` meaning node i is a facet of node j.
    """

    def __init__(self, polytope: Polytope, nodes, edges):
        self.polytope = polytope
        self.nodes: list[tuple[frozenset[int], int]] = nodes
        self.edges: list[tuple[int, int]] = edges

    def faces_of_dim(self, k: int) -> list[frozenset[int]]:
        return [s for s, d in self.nodes if d == k]

    def f_vector(self) -> tuple[int, ...]:
        top = self.polytope.dim
        return tuple(len(self.faces_of_dim(k)) for k in range(top + 1))

    def face_polytope(self, idx: frozenset[int]) -> Polytope:
        if not idx:
            return Polytope.empty(self.polytope.ambient_dim)
        return Polytope.from_vertices(self.polytope.vertices[i] for i in idx)

    def proper_nonempty(self) -> list[tuple[frozenset[int], int]]:
        top = self.polytope.dim
        return [(s, d) for s, d in self.nodes if 0 <= d < top]


def _affine_dim(points: list[Vec]) -> int:
    if not points:
        return -1
    return rank([vsub(p, points[0]) for p in points[1:]]) if len(points) > 1 else 0


def faces(p: Polytope) -> FaceLattice:
    """Complete face lattice, built by intersecting facet vertex sets."""
    if p.is_empty:
        return FaceLattice(p, [(frozenset(), -1)], [])
    nv = len(p.vertices)
    full = frozenset(range(nv))
    facet_sets = []
    for a, c in p.halfspaces:
        s = frozenset(i for i, v in enumerate(p.vertices) if dot(a, v) == c)
        if s and s != full:
            facet_sets.append(s)
    found = {full}
    frontier = [full]
    while frontier:
        nxt = []
        for f in frontier:
            for s in facet_sets:
                g = f & s
                if g not in found:
                    found.add(g)
                    nxt.append(g)
        frontier = nxt
    found.add(frozenset())
    nodes = []
    for s in found:
        d = _affine_dim([p.vertices[i] for i in sorted(s)])
        nodes.append((s, d))
    nodes.sort(key=lambda t: (t[1], sorted(t[0])))
    index = {s: i for i, (s, _) in enumerate(nodes)}
    edges = []
    by_dim: dict[int, list[frozenset[int]]] = {}
    for s, d in nodes:
        by_dim.setdefault(d, []).append(s)
    for s, d in nodes:
        for t in by_dim.get(d + 1, []):
            if s < t:
                edges.append((index[s], index[t]))
    return FaceLattice(p, nodes, edges)


# ---------------------------------------------------------------------------
# Intersections and volumes


def intersect(p: Polytope, q: Polytope) -> Polytope:
    """Exact intersection; the empty polytope signals disjointness."""
    if p.ambient_dim != q.ambient_dim:
        raise ValueError("dimension mismatch")
    if p.is_empty or q.is_empty:
        return Polytope.empty(p.ambient_dim)
    lo1, hi1 = p.bounding_box()
    lo2, hi2 = q.bounding_box()
    if any(a > d or c > b for a, b, c, d in zip(lo1, hi1, lo2, hi2)):
        return Polytope.empty(p.ambient_dim)
    hs = list(p.halfspaces) + list(q.halfspaces)
    eqs = list(p.equations) + list(q.equations)
    if p.dim == 0:
        return p if q.contains(p.vertices[0]) else Polytope.empty(p.ambient_dim)
    if q.dim == 0:
        return q if p.contains(q.vertices[0]) else Polytope.empty(p.ambient_dim)
    return Polytope.from_halfspaces(hs, p.ambient_dim, eqs)


def triangulate(p: Polytope) -> list[tuple[Vec, ...]]:
    """Pulling triangulation from the lexicographically lowest vertex."""
    if p.is_empty:
        return []
    lat = p.face_lattice
    verts = p.vertices
    memo: dict[frozenset[int], list[tuple[int, ...]]] = {}
    facets_of: dict[frozenset[int], list[frozenset[int]]] = {}
    for i, j in lat.edges:
        facets_of.setdefault(lat.nodes[j][0], []).append(lat.nodes[i][0])
    dims = {s: d for s, d in lat.nodes}

    def tri(face: frozenset[int]) -> list[tuple[int, ...]]:
        if face in memo:
            return memo[face]
        d = dims[face]
        if d == 0:
            out = [(min(face),)]
        elif len(face) == d + 1:
            out = [tuple(sorted(face))]
        else:
            v0 = min(face)  # vertices are sorted, so this is the lex-lowest
            out = []
            for g in facets_of.get(face, []):
                if v0 in g:
                    continue
                for s in tri(g):
                    out.append((v0,) + s)
        memo[face] = out
        return out

    top = frozenset(range(len(verts)))
    return [tuple(verts[i] for i in s) for s in tri(top)]


def _simplex_volume(simplex: Sequence[Vec]) -> Fraction:
    v0 = simplex[0]
    k = len(simplex) - 1
    return abs(det([vsub(v, v0) for v in simplex[1:]])) / factorial(k)


def volume(p: Polytope) -> Fraction:
    """Lebesgue volume in the ambient space (zero unless full dimensional)."""
    if p.is_empty or p.dim < p.ambient_dim:
        return Fraction(0)
    if p.ambient_dim == 0:
        return Fraction(1)
    return sum((_simplex_volume(s) for s in triangulate(p)), Fraction(0))


def coordinates_in_basis(basis: Sequence[Sequence], v: Sequence) -> Vec | None:
    """Coefficients x with sum_j x_j basis[j] = v, or None."""
    cols = [vec(b) for b in basis]
    if not cols:
        return () if all(rat(t) == 0 for t in v) else None
    return solve(transpose(cols), v)


def relative_volume(p: Polytope, basis: Sequence[Sequence]) -> Fraction:
    """Volume in coordinates where the given basis vectors become standard.

    ``basis`` is a list of vectors in the ambient space spanning the
    direction space of the affine hull of ``p``.
    """
    cols = [vec(b) for b in basis]
    if p.is_empty:
        return Fraction(0)
    if cols and rank(cols) != len(cols):
        raise ValueError("basis vectors are linearly dependent")
    if len(cols) != p.dim:
        raise ValueError("basis does not span the affine hull of the polytope")
    if p.dim == 0:
        return Fraction(1)
    v0 = p.vertices[0]
    coords = []
    for v in p.vertices:
        x = coordinates_in_basis(cols, vsub(v, v0))
        if x is None:
            raise ValueError("basis does not span the affine hull of the polytope")
        coords.append(x)
    return volume(Polytope.from_vertices(coords))


def relint_contains(p: Polytope, u: Sequence) -> bool:
    u = vec(u)
    if p.is_empty:
        return False
    if p.dim == 0:
        return u == p.vertices[0]
    return all(dot(a, u) == c for a, c in p.equations) and all(
        dot(a, u) > c for a, c in p.halfspaces
    )


def affine_hull_dim(p: Polytope) -> int:
    return p.dim


def is_face(face: Polytope, p: Polytope) -> bool:
    """Whether ``face`` is a (nonempty) face of ``p``."""
    if face.is_empty:
        return True
    idx = frozenset(i for i, v in enumerate(p.vertices) if v in set(face.vertices))
    if len(idx) != len(face.vertices):
        return False
    return any(s == idx for s, _ in p.face_lattice.nodes)


# ---------------------------------------------------------------------------
# Affine maps


class AffineMap:
    """u -> linear @ u + offset, with ``linear`` given as a list of rows."""

    __slots__ = ("linear", "offset")

    def __init__(self, linear: Sequence[Sequence], offset: Sequence):
        self.linear: Mat = mat(linear)
        self.offset: Vec = vec(offset)
        if self.linear and any(len(r) != len(self.linear[0]) for r in self.linear):
            raise ValueError("ragged matrix")
        if len(self.linear) != len(self.offset):
            raise ValueError("offset length must equal the number of rows")

    @property
    def codomain_dim(self) -> int:
        return len(self.offset)

    @property
    def domain_dim(self) -> int:
        return len(self.linear[0]) if self.linear else 0

    def __call__(self, u: Sequence) -> Vec:
        return vadd(matvec(self.linear, u), self.offset) if self.linear else self.offset

    def columns(self) -> list[Vec]:
        return list(transpose(self.linear)) if self.domain_dim else []

    def image(self, p: Polytope) -> Polytope:
        if p.is_empty:
            return Polytope.empty(self.codomain_dim)
        return Polytope.from_vertices(self(v) for v in p.vertices)

    def is_injective(self) -> bool:
        return rank(self.columns()) == self.domain_dim if self.domain_dim else True

    def preimage(self, p: Polytope, domain: Polytope | None = None) -> Polytope:
        """{u : self(u) in p}, optionally intersected with ``domain``."""
        hs = []
        eqs = []
        cols = self.linear
        for a, c in p.halfspaces:
            hs.append((matvec(transpose(cols), a), c - dot(a, self.offset)))
        for a, c in p.equations:
            eqs.append((matvec(transpose(cols), a), c - dot(a, self.offset)))
        if domain is not None:
            hs.extend(domain.halfspaces)
            eqs.extend(domain.equations)
        # drop trivial rows; an infeasible trivial row empties the set
        clean_h, clean_e = [], []
        for a, c in hs:
            if any(a):
                clean_h.append((a, c))
            elif c > 0:
                return Polytope.empty(self.domain_dim)
        for a, c in eqs:
            if any(a):
                clean_e.append((a, c))
            elif c != 0:
                return Polytope.empty(self.domain_dim)
        return Polytope.from_halfspaces(clean_h, self.domain_dim, clean_e)

    def __eq__(self, other) -> bool:
        return isinstance(other, AffineMap) and (self.linear, self.offset) == (
            other.linear,
            other.offset,
        )

    def __hash__(self) -> int:
        return hash((self.linear, self.offset))

    def __repr__(self) -> str:
        return f"AffineMap(linear={self.linear}, offset={self.offset})"


def cube(n: int, lo=0, hi=1) -> Polytope:
    lo, hi = rat(lo), rat(hi)
    return Polytope.from_vertices(itertools.product([lo, hi], repeat=n))


def standard_simplex(n: int, size=1) -> Polytope:
    size = rat(size)
    pts = [tuple(Fraction(0) for _ in range(n))]
    for i in range(n):
        pts.append(tuple(size if j == i else Fraction(0) for j in range(n)))
    return Polytope.from_vertices(pts)
