"""Canonical measures on tropical varieties from skeleton data.

The measure on a non-degenerate canonical simplex of dimension r is a
constant multiple of Lebesgue measure on Sigma_S. For d line bundles with
forms b_1..b_d the density is

    r! * sum over r-subsets I of {1..d} of  w(complement of I) * D(Q_I)

where Q_i is the pullback of b_i along the linear part of the lift and D is
the mixed discriminant; for a single bundle this is
d!/(d-r)! * w * vol(Lambda_S^L) / vol(Lambda_S). Discrete approximations come
from dual polytopes of the m-scaled model function.
"""

from __future__ import annotations

import itertools
import weakref
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial, floor, ceil
from typing import Sequence

from .exactgeom import (
    AffineMap,
    Polytope,
    Vec,
    det,
    dot,
    intersect,
    inverse,
    matvec,
    nullspace,
    rank,
    rat,
    relative_volume,
    relint_contains,
    transpose,
    vadd,
    vec,
    volume,
    vscale,
    vsub,
)
from .lattice import (
    BilinearForm,
    Lattice,
    covolume,
    induced_dual_lattice,
    mixed_induced_volume,
    preimage_lattice,
    restricted_lattice,
)
from .modelfun import (
    CocycleData,
    ModelFunction,
    local_dual_polytope,
    dual_polytope,
    is_strongly_polyhedral_convex,
    validate as validate_model_function,
)
from .periodic import LatticeFrame, PeriodicDecomposition, Report
from .skeleton import (
    SkeletonComplex,
    TropicalMap,
    kkms_index,
    nondegenerate_simplices,
    skeleton_from_triangulation,
    in_relint,
)


class TransversalityError(ValueError):
    pass


class DimensionBoundError(ValueError):
    pass


@dataclass
class Scenario:
    n: int
    b: int
    d: int
    lattice: Lattice
    forms: list[BilinearForm]
    skeleton: SkeletonComplex
    tmap: TropicalMap
    deg_f: int = 1
    name: str = ""
    model_function: ModelFunction | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.d > self.n + self.b:
            raise ValueError("d exceeds n + b")
        if len(self.forms) < self.d:
            raise ValueError("need at least one bilinear form per bundle slot")
        if self.skeleton.d != self.d:
            raise ValueError("skeleton dimension differs from d")

    @property
    def single_form(self) -> BilinearForm:
        if any(f != self.forms[0] for f in self.forms):
            raise ValueError("scenario uses several distinct forms")
        return self.forms[0]


# ---------------------------------------------------------------------------
# Measures


@dataclass(frozen=True)
class MeasurePiece:
    """density * (relative Lebesgue measure in ``basis`` coordinates) on ``support``.

    ``chart`` is a stratum id for pieces living on a canonical simplex, or
    ``"torus"`` for pieces in R^n / lattice. Zero-dimensional pieces are atoms
    and their density is the mass.
    """

    chart: str
    support: Polytope
    dim: int
    density: Fraction
    basis: tuple[Vec, ...]

    @property
    def mass(self) -> Fraction:
        if self.dim == 0:
            return self.density
        return self.density * relative_volume(self.support, self.basis)


@dataclass
class PolytopalMeasure:
    pieces: list[MeasurePiece]
    notes: list[str] = field(default_factory=list)

    def total_mass(self) -> Fraction:
        return sum((p.mass for p in self.pieces), Fraction(0))

    def dims(self) -> list[int]:
        return sorted({p.dim for p in self.pieces})

    def by_chart(self) -> dict[str, list[MeasurePiece]]:
        out: dict[str, list[MeasurePiece]] = defaultdict(list)
        for p in self.pieces:
            out[p.chart].append(p)
        return dict(out)


def total_mass(mu) -> Fraction:
    return mu.total_mass()


def _std_basis(r: int) -> tuple[Vec, ...]:
    return tuple(tuple(Fraction(int(i == j)) for i in range(r)) for j in range(r))


def stratum_lattice(scn: Scenario, sid: str) -> Lattice:
    return preimage_lattice(scn.tmap.linear_columns(sid), scn.lattice)


def simplex_density(scn: Scenario, sid: str, bundle_indices: Sequence[int] | None = None) -> Fraction:
    """Density of the canonical measure on Sigma_S (Lebesgue in Sigma coordinates)."""
    s = scn.skeleton.strata[sid]
    r = s.r
    idx = list(bundle_indices) if bundle_indices is not None else list(range(1, scn.d + 1))
    if len(idx) != scn.d:
        raise ValueError("need d bundle indices")
    if not all(1 <= i <= len(scn.forms) for i in idx):
        raise ValueError("bundle index out of range")
    if r == 0:
        return s.weight(idx)
    cols = scn.tmap.linear_columns(sid)
    if rank(cols) != r:
        raise ValueError(f"lift of {sid} is not injective")
    vol_s = covolume(stratum_lattice(scn, sid))
    total = Fraction(0)
    for chosen in itertools.combinations(range(scn.d), r):
        rest = [idx[j] for j in range(scn.d) if j not in chosen]
        w = s.weight(rest)
        if w == 0:
            continue
        forms = [scn.forms[idx[j] - 1] for j in chosen]
        total += w * mixed_induced_volume(cols, forms, scn.lattice) / vol_s
    return factorial(r) * total


def single_bundle_density(scn: Scenario, sid: str) -> Fraction:
    """d!/(d-r)! * w * vol(Lambda_S^L)/vol(Lambda_S), straight from the lattices."""
    s = scn.skeleton.strata[sid]
    r = s.r
    w = s.weight((1,) * s.dim)
    if r == 0:
        return w
    cols = scn.tmap.linear_columns(sid)
    dual = induced_dual_lattice(cols, scn.single_form, scn.lattice)
    ratio = covolume(dual) / covolume(stratum_lattice(scn, sid))
    return Fraction(factorial(scn.d), factorial(scn.d - r)) * w * ratio


def canonical_measure(scn: Scenario, bundle_indices: Sequence[int] | None = None) -> PolytopalMeasure:
    pieces = []
    for sid in nondegenerate_simplices(scn.skeleton, scn.tmap):
        s = scn.skeleton.strata[sid]
        dens = simplex_density(scn, sid, bundle_indices)
        if dens == 0:
            continue
        sig = scn.skeleton.simplex(sid).polytope
        pieces.append(MeasurePiece(sid, sig, s.r, dens, _std_basis(s.r)))
    return PolytopalMeasure(pieces, ["pieces live on canonical simplices in Sigma coordinates"])


def pushforward(mu: PolytopalMeasure, tm: TropicalMap, deg_f: int = 1) -> PolytopalMeasure:
    """Image measure on R^n / lattice; equal image polytopes have densities summed."""
    frame = LatticeFrame(tm.lattice)
    merged: dict[tuple[Vec, ...], list] = {}
    for p in mu.pieces:
        f = tm[p.chart]
        image = f.image(p.support)
        rep, _ = frame.normalize(image)
        if p.dim == 0:
            basis: tuple[Vec, ...] = ()
            dens = p.density
        else:
            cols = f.columns()
            if rank(cols) != p.dim:
                raise ValueError(f"piece on {p.chart} is not mapped injectively")
            basis = restricted_lattice(tm.lattice, cols).basis
            # Jacobian from piece-basis coordinates to canonical-basis coordinates
            jac = [solve_coords(basis, matvec(f.linear, e)) for e in p.basis]
            dens = p.density / abs(det(jac))
        entry = merged.setdefault(rep.vertices, [rep, p.dim, Fraction(0), basis, 0])
        entry[2] += dens * deg_f
        entry[4] += 1
    pieces = [
        MeasurePiece("torus", rep, dim, dens, basis)
        for rep, dim, dens, basis, _ in (merged[k] for k in sorted(merged))
    ]
    notes = ["densities are relative to a basis of the lattice points in each piece's linear span"]
    sheets = sum(1 for v in merged.values() if v[4] > 1)
    if sheets:
        notes.append(f"{sheets} image polytopes carry several sheets; their densities were summed")
    return PolytopalMeasure(pieces, notes)


def solve_coords(basis: Sequence[Vec], v: Sequence) -> Vec:
    from .exactgeom import coordinates_in_basis

    x = coordinates_in_basis(basis, v)
    if x is None:
        raise ValueError("vector outside the span of the basis")
    return x


# ---------------------------------------------------------------------------
# Checks


def haar_check(scn: Scenario) -> Report:
    rep = Report("haar")
    mu = pushforward(canonical_measure(scn), scn.tmap, scn.deg_f)
    dens = {p.density for p in mu.pieces}
    full = all(p.dim == scn.n for p in mu.pieces)
    rep.add("full-dimensional support", full)
    rep.add("constant density", len(dens) == 1, ", ".join(sorted(str(x) for x in dens)))
    total = mu.total_mass()
    expected = haar_expected_total(scn)
    rep.add("total", total == expected, f"{total} (expected {expected})")
    return rep


def haar_expected_total(scn: Scenario) -> Fraction:
    """n! * sum over n-subsets I of w(rest) * mixed volume of b_I(Lambda, .), times deg_f.

    For a single form this is d!/b! * w * vol(b(Lambda, .)). The weight is
    read from any top-dimensional stratum.
    """
    top = [s for s in scn.skeleton if s.r == scn.n and s.has_weight()]
    if not top:
        return Fraction(0)
    s = top[0]
    ident = _std_basis(scn.n)
    idx = list(range(1, scn.d + 1))
    total = Fraction(0)
    for chosen in itertools.combinations(range(scn.d), scn.n):
        rest = [idx[j] for j in range(scn.d) if j not in chosen]
        forms = [scn.forms[j] for j in chosen]
        total += s.weight(rest) * mixed_induced_volume(ident, forms, scn.lattice)
    return factorial(scn.n) * total * scn.deg_f


def validate_dimension_bounds(scn: Scenario, mu_pushed: PolytopalMeasure) -> Report:
    rep = Report("dimension bounds")
    dims = mu_pushed.dims()
    bad = [p for p in mu_pushed.pieces if not (scn.d - scn.b <= p.dim <= scn.d)]
    rep.add("occurring dimensions", True, ", ".join(map(str, dims)))
    if bad:
        raise DimensionBoundError(
            f"support piece of dimension {bad[0].dim} outside [{scn.d - scn.b}, {scn.d}]"
        )
    rep.add("within [d-b, d]", True, f"[{scn.d - scn.b}, {scn.d}]")
    return rep


def positivity_check(scn: Scenario, mu: PolytopalMeasure) -> Report:
    """Under ample forms and positive weights every emitted density is positive."""
    rep = Report("positivity")
    ample = all(f.is_positive_definite_on(scn.lattice) for f in scn.forms)
    weights = [
        rat(w)
        for sid in nondegenerate_simplices(scn.skeleton, scn.tmap)
        for w in scn.skeleton.strata[sid].weights.values()
    ]
    hyp = ample and all(w > 0 for w in weights)
    neg = [p for p in mu.pieces if p.density <= 0]
    rep.add("hypotheses hold", hyp, "forms positive definite, weights positive")
    if hyp:
        rep.add("densities positive", not neg, f"{len(neg)} non-positive")
    return rep


# ---------------------------------------------------------------------------
# Degrees and discrete measures


def _carrier_face(mf: ModelFunction, y: Vec) -> tuple[Polytope, list[tuple[int, tuple[int, ...], Polytope]]]:
    """Smallest closed face of the decomposition containing y, and the cells around it."""
    around = [(i, k, t) for i, k, t in mf.dec.cells_meeting(Polytope.from_vertices([y]))]
    face = around[0][2]
    for _, _, t in around[1:]:
        face = intersect(face, t)
    return face, around


def degree_of_component(
    scn: Scenario, sid: str, u: Sequence, mf: ModelFunction, m: int = 1
) -> Fraction:
    """d!/e! * m^(2e) w * vol of the dual polytope of u for g = f(m f_S(.)).

    Built from the H-representation over the subdivision cells around u.
    """
    s = scn.skeleton.strata[sid]
    sig = scn.skeleton.simplex(sid)
    u = vec(u)
    if not in_relint(sig, u):
        raise ValueError("vertex must lie in the relative interior of its canonical simplex")
    f = scn.tmap[sid]
    w = s.weight((1,) * s.dim) * m ** (2 * s.dim)
    if s.r == 0:
        y = vscale(m, f(u))
        face, _ = _carrier_face(mf, y)
        if face.dim != scn.n:
            raise TransversalityError(f"point stratum {sid} lies on a lower cell of the model")
        return w
    y = vscale(m, f(u))
    face, around = _carrier_face(mf, y)
    _check_transversal(scn, sid, face, f, m)
    local = []
    g = AffineMap([[m * x for x in row] for row in f.linear], vscale(m, f.offset))
    for i, k, t in around:
        pre = g.preimage(t, sig.polytope)
        if pre.dim != s.r:
            continue
        slope = mf.piece_on(i, k)[0]
        pulled = tuple(m * dot(c, slope) for c in f.columns())
        local.append((pre, pulled))
    if not all(u in c.vertices for c, _ in local):
        raise TransversalityError(f"{tuple(map(str, u))} is not a vertex of the subdivision")
    dual = local_dual_polytope(local, u)
    if not dual.bounded:
        raise ValueError("model function is not strictly convex at the vertex")
    return Fraction(factorial(scn.d), factorial(s.dim)) * w * dual.volume


def _check_transversal(scn: Scenario, sid: str, face: Polytope, f: AffineMap, m: int) -> None:
    r = scn.skeleton.strata[sid].r
    if face.dim != scn.n - r:
        raise TransversalityError(
            f"stratum {sid}: image meets a cell of dimension {face.dim}, expected {scn.n - r}"
        )
    dirs = [vsub(v, face.vertices[0]) for v in face.vertices[1:]]
    if rank([vscale(m, c) for c in f.columns()] + dirs) != scn.n:
        raise TransversalityError(f"stratum {sid}: image is not transversal to the cell")


@dataclass(frozen=True)
class Atom:
    stratum: str
    point: Vec
    mass: Fraction


@dataclass
class DiscreteMeasure:
    atoms: list[Atom]
    m: int

    def total_mass(self) -> Fraction:
        return sum((a.mass for a in self.atoms), Fraction(0))

    def mass_in(self, sid: str, region: Polytope) -> Fraction:
        return sum((a.mass for a in self.atoms if a.stratum == sid and region.contains(a.point)), Fraction(0))


class _FaceData:
    """A codim-r face class of the model decomposition with the slopes around it."""

    def __init__(self, mf: ModelFunction, face: Polytope):
        self.face = face
        self.base = face.vertices[0]
        self.dirs = _direction_basis(face)
        self.slopes = [mf.piece_on(i, k)[0] for i, k in _cells_containing(mf.dec, face)]


def _cells_containing(dec: PeriodicDecomposition, face: Polytope) -> list[tuple[int, tuple[int, ...]]]:
    """(cell index, offset) of the maximal translated cells that contain ``face``."""
    frame = dec.frame
    out = []
    for i, cell in enumerate(dec.cells):
        for k in frame.offsets_between(face, cell):
            lam = frame.point(k)
            if all(cell.contains(vsub(v, lam)) for v in face.vertices):
                out.append((i, k))
    return out


_FACE_DATA: "weakref.WeakKeyDictionary[ModelFunction, dict[int, list[_FaceData]]]" = weakref.WeakKeyDictionary()


def _faces_with_slopes(mf: ModelFunction, dim: int) -> list[_FaceData]:
    per_mf = _FACE_DATA.setdefault(mf, {})
    if dim not in per_mf:
        per_mf[dim] = [_FaceData(mf, fc.polytope) for fc in mf.dec.faces_of_dim(dim)]
    return per_mf[dim]


def _direction_basis(p: Polytope) -> list[Vec]:
    p0 = p.vertices[0]
    out: list[Vec] = []
    for v in p.vertices[1:]:
        d = vsub(v, p0)
        if rank(out + [d]) > len(out):
            out.append(d)
    return out


def discrete_measure(
    scn: Scenario,
    mf: ModelFunction,
    m: int,
    strata: Sequence[str] | None = None,
    region: tuple[str, Polytope] | None = None,
) -> DiscreteMeasure:
    """Atoms m^(-2d) deg(Z) at the vertices of the skeleton subdivision by (1/m) C_1.

    Vertices are located exactly: on Sigma_S a vertex is the unique solution
    of m f_S(u) in lam + aff(F) for a face F of codimension r. The dual
    polytope there is m M^T conv(slopes around F) + const, so its volume only
    depends on (S, F). ``region`` restricts the search to one stratum and a
    polytope inside its simplex.
    """
    if m < 1:
        raise ValueError("m must be positive")
    if not is_strongly_polyhedral_convex(mf):
        raise ValueError("model function must be strongly polyhedral convex")
    n, d = scn.n, scn.d
    frame = mf.dec.frame
    scale_mass = Fraction(1, m ** (2 * d))
    atoms: list[Atom] = []
    chosen = list(strata) if strata is not None else nondegenerate_simplices(scn.skeleton, scn.tmap)
    if region is not None:
        chosen = [region[0]]
    for sid in chosen:
        s = scn.skeleton.strata[sid]
        sig = scn.skeleton.simplex(sid)
        f = scn.tmap[sid]
        w = s.weight((1,) * s.dim)
        if w == 0:
            continue
        r = s.r
        if r == 0:
            y = vscale(m, f(()))
            face, _ = _carrier_face(mf, y)
            if face.dim != n:
                raise TransversalityError(f"point stratum {sid} lies on a lower cell of the model")
            if region is None or region[1].contains(()):
                atoms.append(Atom(sid, (), w))
            continue
        faces = _faces_with_slopes(mf, n - r)
        cols = f.columns()
        coef = Fraction(factorial(d), factorial(s.dim)) * w * m ** (2 * s.dim) * scale_mass
        search = region[1] if region is not None else sig.polytope
        for fd in faces:
            # unknowns (u', t): m M u' - D t = base + lam - m off
            system = [vscale(m, c) for c in cols] + [vscale(-1, dvec) for dvec in fd.dirs]
            if rank(system) < n:
                _nontransversal_hits(scn, sid, fd, f, m, frame)
                continue
            inv = inverse(transpose(system))
            dual = Polytope.from_vertices(
                tuple(m * dot(c, sl) for c in cols) for sl in fd.slopes
            )
            dvol = volume(dual) if dual.dim == r else Fraction(0)
            mass = coef * dvol
            if mass == 0:
                continue
            for k, sol in _lattice_solutions(inv, fd, search, f, m, frame, r):
                u = sol[:r]
                if not in_relint(sig, u):
                    continue
                if region is not None and not region[1].contains(u):
                    continue
                y = vadd(fd.base, matvec(transpose(fd.dirs), sol[r:])) if fd.dirs else fd.base
                if not fd.face.contains(y):
                    continue
                if not relint_contains(fd.face, y):
                    raise TransversalityError(
                        f"stratum {sid}: vertex {tuple(map(str, u))} hits the boundary of a model cell"
                    )
                atoms.append(Atom(sid, u, mass))
    atoms.sort(key=lambda a: (a.stratum, a.point))
    return DiscreteMeasure(atoms, m)


def _lattice_solutions(inv, fd: _FaceData, search: Polytope, f: AffineMap, m: int, frame: LatticeFrame, r: int):
    """Lattice offsets k whose solution (u', t) has u' in the search box."""
    n = frame.n
    lat = frame.lattice
    # solution is affine in lam: sol = inv (base - m off) + inv B k
    const = matvec(inv, vsub(fd.base, vscale(m, f.offset)))
    lin = [matvec(inv, b) for b in lat.basis]  # columns, one per basis vector
    # bounding box of the face parameters t
    tcoords = []
    for v in fd.face.vertices:
        tcoords.append(_coords_along(fd, v))
    lo_u, hi_u = search.bounding_box()
    lo = list(lo_u) + [min(t[i] for t in tcoords) for i in range(n - r)]
    hi = list(hi_u) + [max(t[i] for t in tcoords) for i in range(n - r)]
    # k = A^{-1} (sol - const) where A has columns lin
    a_inv = inverse(transpose(lin))
    corners = itertools.product(*[(lo[i], hi[i]) for i in range(n)])
    ks = [matvec(a_inv, vsub(c, const)) for c in corners]
    ranges = [range(ceil(min(k[i] for k in ks)), floor(max(k[i] for k in ks)) + 1) for i in range(n)]
    for k in itertools.product(*ranges):
        sol = const
        for ki, col in zip(k, lin):
            if ki:
                sol = vadd(sol, vscale(ki, col))
        if all(lo[i] <= sol[i] <= hi[i] for i in range(n)):
            # shift the face by -lam: report y relative to the face representative
            yield k, sol


def _coords_along(fd: _FaceData, v: Vec) -> Vec:
    if not fd.dirs:
        return ()
    return solve_coords(fd.dirs, vsub(v, fd.base))


def _nontransversal_hits(scn, sid, fd: _FaceData, f: AffineMap, m: int, frame: LatticeFrame) -> None:
    """Raise if m f_S(relint Sigma_S) meets a translate of a face it is not transversal to."""
    sig = scn.skeleton.simplex(sid)
    g = AffineMap([[m * x for x in row] for row in f.linear], vscale(m, f.offset))
    image = g.image(sig.polytope)
    system = [list(c) for c in g.columns()] + [list(dv) for dv in fd.dirs]
    base_rank = rank(system)
    for k in frame.offsets_between(image, fd.face):
        lam = frame.point(k)
        # affine hulls meet only if the offset lies in the span
        if rank(system + [list(vsub(vadd(fd.base, lam), g.offset))]) > base_rank:
            continue
        pre = g.preimage(fd.face.translate(lam), sig.polytope)
        if pre.is_empty:
            continue
        if any(in_relint(sig, v) for v in pre.vertices) or in_relint(sig, pre.centroid()):
            raise TransversalityError(f"stratum {sid}: image is not transversal to a model cell")


# ---------------------------------------------------------------------------
# Convergence of discrete measures


@dataclass
class LimitRow:
    m: int
    discrete: Fraction
    limit: Fraction
    error: Fraction
    bound: Fraction


def limit_table(
    scn: Scenario, mf: ModelFunction, sid: str, omega: Polytope, m_list: Sequence[int]
) -> list[LimitRow]:
    """mu_m(Omega) against mu(Omega) on a region inside one canonical simplex.

    ``bound`` is a rigorous error bound: the atoms in a (1/m)-translate of a
    fundamental cell of Lambda_S carry exactly the limit mass of that cell, so
    only translates straddling the boundary of Omega contribute error.
    """
    sig = scn.skeleton.simplex(sid)
    if not all(sig.polytope.contains(v) for v in omega.vertices):
        raise ValueError("region must lie in the canonical simplex")
    dens = single_bundle_density(scn, sid)
    limit = dens * volume(omega)
    lam_s = stratum_lattice(scn, sid)
    cell_mass = dens * covolume(lam_s)
    rows = []
    for m in m_list:
        mu = discrete_measure(scn, mf, m, region=(sid, omega))
        got = mu.total_mass()
        nb = _straddling_cells(lam_s, omega, m)
        rows.append(LimitRow(m, got, limit, abs(got - limit), nb * cell_mass / m ** sig.r))
    return rows


def _straddling_cells(lam: Lattice, omega: Polytope, m: int) -> int:
    r = lam.rank
    frame = LatticeFrame(lam)
    lo, hi = frame.box(omega.scale(m))
    ranges = [range(floor(lo[i]) - 1, ceil(hi[i]) + 1) for i in range(r)]
    corners = list(itertools.product((0, 1), repeat=r))
    count = 0
    for k in itertools.product(*ranges):
        pts = [vscale(Fraction(1, m), lam.point(tuple(a + b for a, b in zip(k, c)))) for c in corners]
        if all(omega.contains(p) for p in pts):
            continue
        if any(all(dot(a, p) < c for p in pts) for a, c in omega.halfspaces):
            continue
        count += 1
    return count


# ---------------------------------------------------------------------------
# Product scenarios


def quadratic_interpolation(
    tri: PeriodicDecomposition, form: BilinearForm
) -> ModelFunction:
    """Piecewise-linear interpolation of u -> b(u, u)/2 on a periodic triangulation."""
    half = Fraction(1, 2)
    triples = []
    n = tri.n
    for cell in tri.cells:
        vs = cell.vertices
        v0 = vs[0]
        rows = [vsub(v, v0) for v in vs[1:]]
        rhs = [half * form(v, v) - half * form(v0, v0) for v in vs[1:]]
        slope = matvec(inverse(rows), rhs)
        offset = half * form(v0, v0) - dot(slope, v0)
        triples.append((cell, slope, offset))
    z0 = [half * form(l, l) for l in tri.lattice.basis]
    mf = ModelFunction.from_cells(tri.lattice, triples, CocycleData(form, tri.lattice, z0))
    if n and not validate_model_function(mf).ok:
        raise ValueError("interpolated function is not a valid model function (slopes not integral?)")
    return mf


def _perp_basis(dirs: Sequence[Vec], n: int) -> list[Vec]:
    if not dirs:
        return list(_std_basis(n))
    return nullspace([list(d) for d in dirs], n)


def _slope_hull_volume(mf: ModelFunction, face: Polytope) -> Fraction:
    """Relative volume of conv(slopes of maximal cells containing the face), in Z^n cap face-perp."""
    n = mf.n
    slopes = [
        mf.piece_on(i, k)[0]
        for i, k, t in mf.dec.cells_meeting(face)
        if all(t.contains(v) for v in face.vertices)
    ]
    hull = Polytope.from_vertices(slopes)
    perp = _perp_basis(_direction_basis(face), n)
    if not perp:
        return Fraction(1)
    basis = restricted_lattice(Lattice.standard(n), perp).basis
    if hull.dim != len(basis):
        return Fraction(0)
    return relative_volume(hull, basis)


def spectrum_scenario(
    b: int,
    n: int,
    m: int,
    deg_l1_b1,
    form2: BilinearForm,
    triangulation: PeriodicDecomposition,
) -> tuple[Scenario, dict[tuple[Vec, ...], Fraction]]:
    """Product of a good-reduction factor B1 (dim b) and a totally degenerate factor.

    X is cut out by m generic sections; d = b + n - m. Returns the scenario
    together with closed-form masses per fundamental cell of the lattice
    points in each simplex's span, keyed like the pushforward pieces.
    """
    if not (0 <= m <= min(b, n)):
        raise ValueError("m must lie in [0, min(b, n)]")
    if triangulation.n != n:
        raise ValueError("triangulation dimension differs from n")
    m_c = kkms_index(triangulation)
    deg1 = rat(deg_l1_b1)
    d = b + n - m
    mf = quadratic_interpolation(triangulation, form2)
    if not is_strongly_polyhedral_convex(mf):
        raise ValueError("form is not strongly convex on this triangulation")

    def weight(face: Polytope):
        r = face.dim
        if n - r > m:
            return 0
        if r == n and m == b:
            return 1
        return comb(m, n - r) * deg1 * factorial(n - r) * _slope_hull_volume(mf, face)

    mult = (lambda face: int(deg1)) if m == b else None
    if m == b and deg1.denominator != 1:
        raise ValueError("deg_L1(B1) must be an integer when m = b")
    sk, maps = skeleton_from_triangulation(triangulation, d, weight, mult)
    tm = TropicalMap(triangulation.lattice, maps)
    scn = Scenario(
        n, b, d, triangulation.lattice, [form2] * d, sk, tm, 1,
        name=f"spectrum b={b} n={n} m={m}", model_function=mf,
        meta={"m": m, "deg_l1_b1": str(deg1), "m_c": m_c},
    )
    closed = spectrum_closed_form(b, n, m, deg1, form2, triangulation, mf, m_c)
    return scn, closed


def spectrum_closed_form(
    b: int, n: int, m: int, deg1: Fraction, form: BilinearForm, tri: PeriodicDecomposition,
    mf: ModelFunction, m_c: int,
) -> dict[tuple[Vec, ...], Fraction]:
    """Mass per fundamental cell of Lambda_Delta on each simplex of dim >= n - m.

    Delta^g is cut from the H-representation of the vertex dual polytope by
    the affine space of slopes agreeing with f along Delta.
    """
    d = b + n - m
    v_pi = Fraction(1, m_c)
    out = {}
    for fc in tri.face_classes.values():
        r = fc.dim
        if r < n - m:
            continue
        delta = fc.polytope
        u0 = delta.vertices[0]
        dual_u = dual_polytope(mf, u0).polytope
        dirs = _direction_basis(delta)
        vals = [mf.evaluate(v) for v in delta.vertices]
        eqs = [(vsub(v, u0), val - vals[0]) for v, val in zip(delta.vertices[1:], vals[1:])]
        eqs = [(a, c) for a, c in eqs if any(a)]
        cut = Polytope.from_halfspaces(list(dual_u.halfspaces), n, list(dual_u.equations) + eqs)
        perp = _perp_basis(dirs, n)
        if perp:
            zbasis = restricted_lattice(Lattice.standard(n), perp).basis
            relvol_g = relative_volume(cut, zbasis) if cut.dim == len(perp) else Fraction(0)
        else:
            relvol_g = Fraction(1)
        if r:
            e_basis = restricted_lattice(tri.lattice, dirs).basis
            gram = form.gram(e_basis)
            vol_e = relative_volume(delta, e_basis)
            vol_dual = abs(det(gram)) * vol_e * factorial(r) / v_pi ** r
        else:
            vol_dual = Fraction(1)
        num = factorial(d) * factorial(m) * relvol_g * vol_dual * deg1
        den = factorial(d - r) * factorial(m + r - n)
        out[fc.key] = num / den
    return out


# ---------------------------------------------------------------------------
# Scenario generators


def haar_scenario(lattice: Lattice, form: BilinearForm, b: int, weight=1, k: int = 1, deg_f: int = 1) -> Scenario:
    """X = A with torus part R^n / lattice and abelian part of dimension b."""
    from .skeleton import torus_skeleton

    n = lattice.ambient_dim
    d = n + b
    sk, tm = torus_skeleton(lattice, d, lambda p: weight if p.dim == n else 0, k)
    return Scenario(n, b, d, lattice, [form] * d, sk, tm, deg_f, name=f"haar n={n} b={b}")


def subtorus_scenario(
    lattice: Lattice,
    form: BilinearForm,
    linear: Sequence[Sequence[int]],
    inner: Lattice,
    b: int = 0,
    weight=1,
    k: int = 2,
) -> Scenario:
    """A subtorus-like X: a torus skeleton of R^r / inner composed with an integer map.

    ``k`` must be large enough that no simplex has two vertices in one
    class modulo ``inner``; k = 2 suffices for any integral lattice.
    """
    from .skeleton import kuhn_triangulation

    r = inner.ambient_dim
    n = lattice.ambient_dim
    d = r + b
    tri = kuhn_triangulation(inner, k)
    sk, maps = skeleton_from_triangulation(tri, d, lambda p: weight if p.dim == r else 0, linear=linear)
    for lam in inner.basis:
        img = tuple(sum((rat(row[j]) * lam[j] for j in range(r)), Fraction(0)) for row in linear)
        if not lattice.contains(img):
            raise ValueError("the map does not send the inner lattice into the lattice")
    tm = TropicalMap(lattice, maps)
    return Scenario(n, b, d, lattice, [form] * d, sk, tm, 1, name=f"subtorus r={r} in n={n}")


def loop_scenario(lattice: Lattice, form: BilinearForm, direction: Sequence[int], segments: int, weight=1) -> Scenario:
    from .skeleton import loop_skeleton

    sk, tm = loop_skeleton(lattice, direction, segments, weight)
    n = lattice.ambient_dim
    return Scenario(n, 0, 1, lattice, [form], sk, tm, 1, name=f"loop {tuple(direction)}")


__all__ = [
    "Atom",
    "DimensionBoundError",
    "DiscreteMeasure",
    "LimitRow",
    "MeasurePiece",
    "PolytopalMeasure",
    "Scenario",
    "TransversalityError",
    "canonical_measure",
    "degree_of_component",
    "discrete_measure",
    "haar_check",
    "haar_expected_total",
    "haar_scenario",
    "limit_table",
    "loop_scenario",
    "positivity_check",
    "pushforward",
    "quadratic_interpolation",
    "simplex_density",
    "single_bundle_density",
    "spectrum_closed_form",
    "spectrum_scenario",
    "stratum_lattice",
    "subtorus_scenario",
    "total_mass",
    "validate_dimension_bounds",
]
