"""Piecewise-affine model functions on periodic decompositions.

A model function is fixed by one affine piece per representative maximal
cell together with a cocycle: a symmetric form b and values z_lam(0) on a
lattice basis. On the translate P + lam the function is

    f(v) = m_P . (v - lam) + c_P + q(lam) + b(v - lam, lam)

where q is the quadratic extension of z(0) to the whole lattice. Offsets may
be rationals or symbolic :class:`~tropmeasure.gamma.GammaValue` elements.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Sequence

from .exactgeom import (
    AffineMap,
    Polytope,
    Vec,
    dot,
    intersect,
    inverse,
    rank,
    rat,
    transpose,
    vadd,
    vec,
    volume,
    vsub,
)
from .gamma import GammaValue
from .lattice import BilinearForm, Lattice, covolume, induced_dual_lattice, preimage_lattice
from .periodic import LatticeFrame, PeriodicDecomposition, Report, refine

Scalar = Fraction | GammaValue


def _scalar(x) -> Scalar:
    return x if isinstance(x, GammaValue) else rat(x)


def _simplify(x: Scalar) -> Scalar:
    return x.const if isinstance(x, GammaValue) and x.is_rational else x


class CocycleData:
    """The cocycle z_lam(u) = z_lam(0) + b(u, lam) of a line bundle."""

    def __init__(self, form: BilinearForm, lattice: Lattice, z0: Sequence):
        if len(z0) != lattice.rank:
            raise ValueError("need one z(0) value per lattice basis vector")
        self.form = form
        self.lattice = lattice
        self.z0 = tuple(_simplify(_scalar(z)) for z in z0)
        half = Fraction(1, 2)
        # linear part of q on the basis
        self._lin = tuple(z - half * form(l, l) for z, l in zip(self.z0, lattice.basis))

    def q(self, coeffs: Sequence[int]) -> Scalar:
        """z_lam(0) for lam = sum coeffs[i] * basis[i]."""
        lam = self.lattice.point(coeffs)
        val: Scalar = Fraction(1, 2) * self.form(lam, lam)
        for c, l in zip(coeffs, self._lin):
            if c:
                val = val + c * l
        return _simplify(val)

    def z(self, coeffs: Sequence[int], u: Sequence) -> Scalar:
        return _simplify(self.q(coeffs) + self.form(vec(u), self.lattice.point(coeffs)))

    def __add__(self, other: "CocycleData") -> "CocycleData":
        if self.lattice != other.lattice:
            raise ValueError("lattice mismatch")
        return CocycleData(
            self.form + other.form, self.lattice, [a + b for a, b in zip(self.z0, other.z0)]
        )


@dataclass(frozen=True)
class Piece:
    slope: tuple[int, ...]
    offset: Scalar

    def __call__(self, u: Sequence) -> Scalar:
        return _simplify(self.offset + dot(self.slope, u))


class ModelFunction:
    """A model function; ``pieces[i]`` belongs to ``dec.cells[i]``."""

    def __init__(self, dec: PeriodicDecomposition, pieces: Sequence[Piece], cocycle: CocycleData):
        if len(pieces) != len(dec.cells):
            raise ValueError("need one piece per representative cell")
        if cocycle.lattice != dec.lattice:
            raise ValueError("cocycle lattice differs from the decomposition lattice")
        self.dec = dec
        self.pieces = tuple(pieces)
        self.cocycle = cocycle

    @classmethod
    def from_cells(
        cls, lattice: Lattice, cells: Sequence[tuple[Polytope, Sequence, object]], cocycle: CocycleData
    ) -> "ModelFunction":
        """Build from (cell, slope, offset) triples on arbitrary translates."""
        dec = PeriodicDecomposition(lattice, [c for c, _, _ in cells])
        index = {c.vertices: i for i, c in enumerate(dec.cells)}
        pieces: list[Piece | None] = [None] * len(dec.cells)
        b = cocycle.form
        for cell, slope, offset in cells:
            rep, k = dec.frame.normalize(cell)
            lam = lattice.point(k)
            m = vsub(vec(slope), b.functional(lam))
            c = _scalar(offset) + dot(m, lam) - cocycle.q(k) + b(lam, lam)
            p = Piece(_as_slope(m), _simplify(c))
            i = index[rep.vertices]
            if pieces[i] is None:
                pieces[i] = p
        return cls(dec, pieces, cocycle)

    @property
    def form(self) -> BilinearForm:
        return self.cocycle.form

    @property
    def lattice(self) -> Lattice:
        return self.dec.lattice

    @property
    def n(self) -> int:
        return self.dec.n

    def piece_on(self, i: int, k: Sequence[int]) -> tuple[Vec, Scalar]:
        """(slope, offset) of f on the translate cells[i] + lam(k), as an affine function of v."""
        p = self.pieces[i]
        lam = self.lattice.point(k)
        slope = vadd(vec(p.slope), self.form.functional(lam))
        off = p.offset + self.cocycle.q(k) - dot(p.slope, lam) - self.form(lam, lam)
        return slope, _simplify(off)

    def value_on(self, i: int, k: Sequence[int], v: Sequence) -> Scalar:
        slope, off = self.piece_on(i, k)
        return _simplify(off + dot(slope, vec(v)))

    def evaluate(self, u: Sequence) -> Scalar:
        i, k = self.dec.locate(u)
        return self.value_on(i, k, u)

    def __call__(self, u: Sequence) -> Scalar:
        return self.evaluate(u)

    def __add__(self, other: "ModelFunction") -> "ModelFunction":
        """Tensor product of line bundles: sum of functions on the common refinement."""
        common = refine(self.dec, other.dec)
        cocycle = self.cocycle + other.cocycle
        triples = []
        for cell in common.cells:
            c0 = cell.centroid()
            i0, k0 = self.dec.locate(c0)
            i1, k1 = other.dec.locate(c0)
            s0, o0 = self.piece_on(i0, k0)
            s1, o1 = other.piece_on(i1, k1)
            triples.append((cell, vadd(s0, s1), o0 + o1))
        return ModelFunction.from_cells(self.lattice, triples, cocycle)

    def add_affine(self, slope: Sequence, const=0) -> "ModelFunction":
        """f + slope.u + const; the cocycle constants shift by slope.lam."""
        slope = vec(slope)
        pieces = [Piece(_as_slope(vadd(p.slope, slope)), _simplify(p.offset + _scalar(const))) for p in self.pieces]
        z0 = [z + dot(slope, l) for z, l in zip(self.cocycle.z0, self.lattice.basis)]
        return ModelFunction(self.dec, pieces, CocycleData(self.form, self.lattice, z0))

    def slopes_at(self, u: Sequence) -> list[Vec]:
        """Slopes of the maximal cells having u as a vertex."""
        u = vec(u)
        out = []
        pt = Polytope.from_vertices([u])
        for i, k, t in self.dec.cells_meeting(pt):
            if u in t.vertices:
                out.append(self.piece_on(i, k)[0])
        return out


def _as_slope(m: Sequence) -> tuple:
    return tuple(int(x) if rat(x).denominator == 1 else rat(x) for x in m)


# ---------------------------------------------------------------------------
# Validation


def _adjacent_pairs(mf: ModelFunction):
    """(i, j, k, intersection) for representative cell i against translate j + lam(k)."""
    dec = mf.dec
    for i, p in enumerate(dec.cells):
        for j, q in enumerate(dec.cells):
            for k in dec.frame.offsets_between(p, q):
                if i == j and not any(k):
                    continue
                t = q.translate(dec.frame.point(k))
                inter = intersect(p, t)
                if not inter.is_empty:
                    yield i, j, k, inter


def validate(mf: ModelFunction) -> Report:
    rep = Report("model function")
    bad_int = [
        f"cell {i} slope {p.slope}"
        for i, p in enumerate(mf.pieces)
        if any(rat(x).denominator != 1 for x in p.slope)
    ]
    rep.add("integral slopes", not bad_int, "; ".join(bad_int))
    zero = (0,) * mf.n
    bad_cont = []
    for i, j, k, inter in _adjacent_pairs(mf):
        for v in inter.vertices:
            if mf.value_on(i, zero, v) != mf.value_on(j, k, v):
                bad_cont.append(f"cells {i},{j} offset {k} at {tuple(str(x) for x in v)}")
                break
    rep.add("continuity", not bad_cont, "; ".join(bad_cont[:5]))
    bad_cocycle = []
    for cell in mf.dec.cells:
        for v in cell.vertices:
            for idx in range(mf.lattice.rank):
                k = tuple(int(a == idx) for a in range(mf.lattice.rank))
                lam = mf.lattice.point(k)
                lhs = mf.evaluate(vadd(v, lam))
                rhs = mf.evaluate(v) + mf.cocycle.z(k, v)
                if lhs != rhs:
                    bad_cocycle.append(f"basis {idx} at {tuple(str(x) for x in v)}")
    rep.add("cocycle", not bad_cocycle, "; ".join(bad_cocycle[:5]))
    return rep


def _facet_jumps(mf: ModelFunction):
    """Yield (inward normal of the facet of cell i, slope jump to the neighbour)."""
    dec = mf.dec
    zero = (0,) * mf.n
    for i, j, k, inter in _adjacent_pairs(mf):
        if inter.dim != mf.n - 1:
            continue
        p = dec.cells[i]
        normal = next(a for a, c in p.halfspaces if all(dot(a, v) == c for v in inter.vertices))
        s_in, _ = mf.piece_on(i, zero)
        s_out, _ = mf.piece_on(j, k)
        yield normal, vsub(s_out, s_in)


def is_strongly_polyhedral_convex(mf: ModelFunction) -> bool:
    """Every facet crossing bends upward, and never trivially."""
    for normal, jump in _facet_jumps(mf):
        # jump must be -t * normal with t > 0
        if rank([normal, jump]) > 1:
            return False
        if dot(jump, normal) >= 0:
            return False
    return True


# ---------------------------------------------------------------------------
# Constructors


def _voronoi_window(n: int, radius: int) -> list[tuple[int, ...]]:
    return [k for k in itertools.product(range(-radius, radius + 1), repeat=n) if any(k)]


def delaunay_model_function(
    b: BilinearForm, L: Lattice, search_radius: int = 2, shift: Sequence | None = None
) -> ModelFunction:
    """Tropical theta function u -> max_lam b(u - s, lam) - b(lam, lam)/2.

    Its linearity domains are the b-Voronoi cells of the shifted lattice. The
    window of lattice vectors is checked after the fact: every lam with
    b(lam, lam) <= 4 rho^2 (rho^2 = max b(v, v) over cell vertices) must lie
    in it, otherwise a larger radius is suggested.
    """
    n = L.ambient_dim
    if not b.is_positive_definite_on(L):
        raise ValueError("form is not positive definite on the lattice")
    gram = b.gram(L.basis)
    window = _voronoi_window(n, search_radius)
    hs = []
    for k in window:
        lam = L.point(k)
        hs.append((tuple(-x for x in b.functional(lam)), -Fraction(1, 2) * b(lam, lam)))
    cell = Polytope.from_halfspaces(hs, n)
    rho2 = max(b(v, v) for v in cell.vertices)
    ginv = inverse(gram)
    need = 0
    for i in range(n):
        # |k_i|^2 <= 4 rho^2 (G^-1)_ii on the ellipsoid b(lam, lam) <= 4 rho^2
        bound = 4 * rho2 * ginv[i][i]
        need = max(need, _isqrt_floor(bound))
    if need > search_radius:
        raise ValueError(f"search radius {search_radius} is insufficient; use radius {need}")
    z0 = [Fraction(1, 2) * b(l, l) for l in L.basis]
    if shift is not None:
        s = vec(shift)
        z0 = [z - b(s, l) for z, l in zip(z0, L.basis)]
        cell = cell.translate(s)
    cocycle = CocycleData(b, L, z0)
    return ModelFunction.from_cells(L, [(cell, (0,) * n, 0)], cocycle)


def _isqrt_floor(x: Fraction) -> int:
    """Largest integer t >= 0 with t^2 <= x."""
    x = rat(x)
    t = isqrt(x.numerator // x.denominator)
    while (t + 1) ** 2 <= x:
        t += 1
    return t


def pullback(mf: ModelFunction, linear_columns: Sequence[Sequence], offset: Sequence) -> ModelFunction:
    """g(x) = f(ell x + o) on R^r, periodic under the preimage lattice of ell.

    The preimage lattice must have full rank r (the image is a closed subtorus).
    """
    cols = [vec(c) for c in linear_columns]
    o = vec(offset)
    r = len(cols)
    lam_s = preimage_lattice(cols, mf.lattice)
    if lam_s.rank != r:
        raise ValueError("the image does not close up to a subtorus")
    ell = AffineMap(transpose(cols), o)
    q_form = BilinearForm(mf.form.pullback(cols))
    box = Polytope.from_vertices(ell(lam_s.point(e)) for e in itertools.product((0, 1), repeat=r))
    triples = []
    for i, k, t in mf.dec.cells_meeting(box):
        pre = ell.preimage(t)
        if pre.is_empty or pre.dim != r:
            continue
        slope, off = mf.piece_on(i, k)
        pulled = tuple(dot(c, slope) for c in cols)
        triples.append((pre, pulled, _simplify(off + dot(slope, o))))
    z0 = []
    for mu in lam_s.basis:
        lam = ell(mu)
        lam = vsub(lam, o)
        coeffs = mf.lattice.coordinates(lam)
        kk = tuple(int(c) for c in coeffs)
        z0.append(_simplify(mf.cocycle.q(kk) + mf.form(o, lam)))
    return ModelFunction.from_cells(lam_s, triples, CocycleData(q_form, lam_s, z0))


# ---------------------------------------------------------------------------
# Dual polytopes


@dataclass(frozen=True)
class DualPolytope:
    """The dual polytope of a vertex, or an unbounded marker."""

    polytope: Polytope | None
    bounded: bool

    @property
    def volume(self) -> Fraction:
        if not self.bounded:
            raise ValueError("dual polytope is unbounded")
        p = self.polytope
        return volume(p) if p.dim == p.ambient_dim else Fraction(0)


def local_dual_polytope(cells: Sequence[tuple[Polytope, Sequence]], u: Sequence) -> DualPolytope:
    """{w : w.(x - u) <= g(x) - g(u) for all vertices x of cells at u}.

    ``cells`` are (cell, slope) pairs for the maximal cells having u as a
    vertex, so that g(x) - g(u) = slope.(x - u) inside each cell.
    """
    u = vec(u)
    if not cells:
        raise ValueError("no cells around the vertex")
    r = len(u)
    hs = []
    for cell, slope in cells:
        slope = vec(slope)
        for x in cell.vertices:
            d = vsub(x, u)
            if any(d):
                # w.d <= slope.d  <=>  (-d).w >= -slope.d
                hs.append((tuple(-a for a in d), -dot(slope, d)))
    try:
        p = Polytope.from_halfspaces(hs, r)
    except ValueError as exc:
        if "unbounded" in str(exc):
            return DualPolytope(None, False)
        raise
    return DualPolytope(p, True)


def dual_polytope(mf: ModelFunction, u: Sequence) -> DualPolytope:
    u = vec(u)
    cells = []
    for i, k, t in mf.dec.cells_meeting(Polytope.from_vertices([u])):
        if u in t.vertices:
            cells.append((t, mf.piece_on(i, k)[0]))
    if not cells:
        raise ValueError(f"{u} is not a vertex of the decomposition")
    return local_dual_polytope(cells, u)


def dual_tiling_check(mf: ModelFunction) -> Report:
    """Vertex duals of a periodic convex function tile with the period of b(Lambda, .)."""
    rep = Report("dual tiling")
    dual_lat = induced_dual_lattice(
        [tuple(Fraction(int(i == j)) for i in range(mf.n)) for j in range(mf.n)],
        mf.form,
        mf.lattice,
    )
    target = covolume(dual_lat)
    duals = []
    for v in mf.dec.vertex_classes():
        d = dual_polytope(mf, v)
        if not d.bounded:
            rep.add("bounded", False, f"vertex {tuple(str(x) for x in v)}")
            return rep
        duals.append(d.polytope)
    total = sum((volume(d) if d.dim == mf.n else Fraction(0) for d in duals), Fraction(0))
    rep.add("volume sum", total == target, f"{total} = {target}" if total == target else f"{total} != {target}")
    full = [d for d in duals if d.dim == mf.n]
    overlaps = []
    frame = LatticeFrame(dual_lat)
    for a in range(len(full)):
        for c in range(a, len(full)):
            for k in frame.offsets_between(full[a], full[c]):
                if a == c and not any(k):
                    continue
                t = full[c].translate(dual_lat.point(k))
                if intersect(full[a], t).dim == mf.n:
                    overlaps.append(f"duals {a},{c} offset {k}")
    rep.add("interiors disjoint", not overlaps, "; ".join(overlaps[:5]))
    return rep


__all__ = [
    "CocycleData",
    "DualPolytope",
    "ModelFunction",
    "Piece",
    "delaunay_model_function",
    "dual_polytope",
    "dual_tiling_check",
    "is_strongly_polyhedral_convex",
    "local_dual_polytope",
    "pullback",
    "validate",
]
