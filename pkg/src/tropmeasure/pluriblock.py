"""Plurisimplices of pluristable building blocks.

A block of length l is built level by level. Level k contributes groups of
coordinates u_i = (u_i1, ..., u_in_i) cut out by

    u_ij >= 0,   u_i1 + ... + u_in_i <= A_i(previous coordinates)

where each A_i is affine in the coordinates of levels < k and nonnegative on
the polytope built so far. Coordinates forced to vanish (A_i identically zero
on the previous polytope) are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exactgeom import Polytope, Vec, dot, rat, vec
from .periodic import Report


@dataclass(frozen=True)
class AffineBound:
    """A(u) = coeffs . u + const over the coordinates of earlier levels."""

    coeffs: Vec
    const: Fraction

    def __call__(self, u: Sequence) -> Fraction:
        return dot(self.coeffs, u[: len(self.coeffs)]) + self.const if self.coeffs else self.const


def affine_bound(const, coeffs: Sequence = ()) -> AffineBound:
    return AffineBound(vec(coeffs), rat(const))


@dataclass(frozen=True)
class BlockSpec:
    """levels[k] is a list of (group size n_i, bound A_i) pairs."""

    levels: tuple[tuple[tuple[int, AffineBound], ...], ...]

    @classmethod
    def build(cls, levels: Sequence[Sequence[tuple[int, AffineBound]]]) -> "BlockSpec":
        out = []
        for lev in levels:
            groups = []
            for size, bound in lev:
                if size < 1:
                    raise ValueError("group sizes must be positive")
                groups.append((int(size), bound))
            out.append(tuple(groups))
        return cls(tuple(out))

    @property
    def length(self) -> int:
        return len(self.levels)

    @property
    def total_coordinates(self) -> int:
        return sum(size for lev in self.levels for size, _ in lev)


@dataclass
class Plurisimplex:
    polytope: Polytope
    coordinate_labels: list[tuple[int, int, int]]  # (level, group, index) per kept coordinate
    dropped: list[tuple[int, int, int]]

    @property
    def dim(self) -> int:
        return self.polytope.dim


def build_plurisimplex(spec: BlockSpec) -> Plurisimplex:
    """Exact H-representation of the block polytope, level by level."""
    labels: list[tuple[int, int, int]] = []
    dropped: list[tuple[int, int, int]] = []
    # each bound is expressed in full (undropped) coordinates; keep a map into kept ones
    full_to_kept: list[int | None] = []
    current = Polytope.from_vertices([()])
    hs: list[tuple[Vec, Fraction]] = []
    for k, lev in enumerate(spec.levels):
        prev_full = len(full_to_kept)
        new_labels = []
        new_hs = []
        kept_before = len(labels)
        for g, (size, bound) in enumerate(lev):
            if len(bound.coeffs) > prev_full:
                raise ValueError(f"level {k + 1} bound refers to later coordinates")
            coeffs = list(bound.coeffs) + [Fraction(0)] * (prev_full - len(bound.coeffs))
            values = [_bound_at(coeffs, bound.const, full_to_kept, v) for v in current.vertices]
            if min(values) < 0:
                raise ValueError(f"level {k + 1} group {g + 1}: bound is negative on the previous polytope")
            if max(values) == 0:
                for j in range(size):
                    dropped.append((k + 1, g + 1, j + 1))
                    full_to_kept.append(None)
                continue
            start = kept_before + len(new_labels)
            for j in range(size):
                new_labels.append((k + 1, g + 1, j + 1))
                full_to_kept.append(start + j)
            new_hs.append((coeffs, bound.const, list(range(start, start + size))))
        labels.extend(new_labels)
        dim = len(labels)
        hs = [(tuple(a) + (Fraction(0),) * (dim - len(a)), c) for a, c in hs]
        for j in range(kept_before, dim):
            hs.append((tuple(Fraction(int(i == j)) for i in range(dim)), Fraction(0)))
        for coeffs, const, idx in new_hs:
            # const + coeffs.u_prev - sum u_idx >= 0
            row = [Fraction(0)] * dim
            for fi, c in enumerate(coeffs):
                ki = full_to_kept[fi]
                if ki is not None:
                    row[ki] += c
            for i in idx:
                row[i] -= 1
            hs.append((tuple(row), -const))
        current = Polytope.from_halfspaces(hs, dim) if dim else current
    return Plurisimplex(current, labels, dropped)


def _bound_at(coeffs, const, full_to_kept, kept_point) -> Fraction:
    total = const
    for fi, c in enumerate(coeffs):
        ki = full_to_kept[fi]
        if ki is not None and c:
            total += c * kept_point[ki]
    return total


@dataclass(frozen=True)
class BlockStratum:
    face: frozenset[int]  # vertex indices of the open face
    face_dim: int

    @property
    def codim(self) -> int:
        return self.face_dim


@dataclass
class FaceStrata:
    plurisimplex: Plurisimplex
    strata: list[BlockStratum]

    def components(self) -> list[BlockStratum]:
        return [s for s in self.strata if s.face_dim == 0]

    def count_by_codim(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for s in self.strata:
            out[s.codim] = out.get(s.codim, 0) + 1
        return dict(sorted(out.items()))

    def in_closure(self, a: BlockStratum, b: BlockStratum) -> bool:
        """Stratum a lies in the closure of b exactly when b's face is a face of a's."""
        return b.face <= a.face


def face_strata(spec: BlockSpec) -> FaceStrata:
    ps = build_plurisimplex(spec)
    lat = ps.polytope.face_lattice
    strata = [BlockStratum(idx, d) for idx, d in lat.nodes if d >= 0]
    strata.sort(key=lambda s: (s.face_dim, sorted(s.face)))
    return FaceStrata(ps, strata)


def check_face_strata(fs: FaceStrata) -> Report:
    rep = Report("plurisimplex strata")
    verts = len(fs.plurisimplex.polytope.vertices)
    rep.add("components = vertices", len(fs.components()) == verts, f"{len(fs.components())} = {verts}")
    lat = fs.plurisimplex.polytope.face_lattice
    polys = {st.face: lat.face_polytope(st.face) for st in fs.strata}
    bad = 0
    for a in fs.strata:
        for b in fs.strata:
            geometric = all(polys[a.face].contains(v) for v in polys[b.face].vertices)
            if fs.in_closure(a, b) != geometric:
                bad += 1
    rep.add("order reversing", bad == 0)
    return rep


def semistable_spec(r: int, pi_val) -> BlockSpec:
    """The single-level block whose plurisimplex is the canonical simplex."""
    return BlockSpec.build([[(r, affine_bound(pi_val))]])


__all__ = [
    "AffineBound",
    "BlockSpec",
    "BlockStratum",
    "FaceStrata",
    "Plurisimplex",
    "affine_bound",
    "build_plurisimplex",
    "check_face_strata",
    "face_strata",
    "semistable_spec",
]
