"""Lattices, bilinear forms, induced dual lattices and mixed lattice volumes."""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import reduce
from math import factorial, floor, lcm
from typing import Sequence

from .exactgeom import (
    Mat,
    Polytope,
    Vec,
    det,
    dot,
    mat,
    matvec,
    nullspace,
    rank,
    rat,
    solve,
    transpose,
    vadd,
    vec,
    volume,
)


class Lattice:
    """A lattice given by a basis; ``basis`` is a tuple of column vectors."""

    __slots__ = ("basis", "ambient_dim")

    def __init__(self, basis: Sequence[Sequence], ambient_dim: int | None = None):
        cols = tuple(vec(b) for b in basis)
        if cols:
            ambient_dim = len(cols[0])
            if any(len(c) != ambient_dim for c in cols):
                raise ValueError("basis vectors of different lengths")
            if rank(cols) != len(cols):
                raise ValueError("rank-deficient basis")
        elif ambient_dim is None:
            raise ValueError("empty basis needs an ambient dimension")
        self.basis: tuple[Vec, ...] = cols
        self.ambient_dim: int = ambient_dim

    @classmethod
    def standard(cls, n: int) -> "Lattice":
        return cls([tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)], n)

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def matrix(self) -> Mat:
        """Basis as a matrix whose columns are the basis vectors."""
        return transpose(self.basis)

    def coordinates(self, v: Sequence) -> Vec | None:
        """Real coordinates of v in the basis, or None if v is not in the span."""
        if not self.basis:
            return () if all(rat(x) == 0 for x in v) else None
        return solve(self.matrix, vec(v))

    def contains(self, v: Sequence) -> bool:
        x = self.coordinates(v)
        return x is not None and all(c.denominator == 1 for c in x)

    def point(self, coeffs: Sequence[int]) -> Vec:
        out = tuple(Fraction(0) for _ in range(self.ambient_dim))
        for c, b in zip(coeffs, self.basis):
            out = vadd(out, tuple(c * x for x in b))
        return out

    def reduce(self, v: Sequence) -> tuple[Vec, tuple[int, ...]]:
        """Write v = r + B k with the coordinates of r in [0, 1)."""
        x = self.coordinates(v)
        if x is None:
            raise ValueError("vector outside the span of the lattice")
        k = tuple(floor(c) for c in x)
        lam = self.point(k)
        return tuple(a - b for a, b in zip(vec(v), lam)), k

    def __eq__(self, other) -> bool:
        return isinstance(other, Lattice) and same_lattice(self, other)

    def __hash__(self) -> int:
        return hash(hermite_basis(self))

    def __repr__(self) -> str:
        return f"Lattice({[tuple(str(x) for x in b) for b in self.basis]})"


class BilinearForm:
    """Symmetric bilinear form b(u, v) = u^T M v."""

    __slots__ = ("matrix",)

    def __init__(self, matrix: Sequence[Sequence]):
        m = mat(matrix)
        n = len(m)
        if any(len(r) != n for r in m):
            raise ValueError("form matrix must be square")
        if any(m[i][j] != m[j][i] for i in range(n) for j in range(n)):
            raise ValueError("form matrix must be symmetric")
        self.matrix: Mat = m

    @property
    def dim(self) -> int:
        return len(self.matrix)

    def __call__(self, u: Sequence, v: Sequence) -> Fraction:
        return dot(vec(u), matvec(self.matrix, vec(v)))

    def __add__(self, other: "BilinearForm") -> "BilinearForm":
        return BilinearForm(
            [[a + b for a, b in zip(r, s)] for r, s in zip(self.matrix, other.matrix)]
        )

    def scaled(self, c) -> "BilinearForm":
        c = rat(c)
        return BilinearForm([[c * a for a in r] for r in self.matrix])

    def functional(self, lam: Sequence) -> Vec:
        """The gradient of u -> b(u, lam)."""
        return matvec(self.matrix, vec(lam))

    def gram(self, vectors: Sequence[Sequence]) -> Mat:
        return tuple(tuple(self(u, v) for v in vectors) for u in vectors)

    def pullback(self, columns: Sequence[Sequence]) -> Mat:
        """Matrix of b(ell x, ell y) for the linear map with these columns."""
        return self.gram(columns)

    def is_positive_definite_on(self, L: Lattice) -> bool:
        g = self.gram(L.basis)
        return all(det([r[:k] for r in g[:k]]) > 0 for k in range(1, len(g) + 1))

    def __eq__(self, other) -> bool:
        return isinstance(other, BilinearForm) and self.matrix == other.matrix

    def __hash__(self) -> int:
        return hash(self.matrix)

    def __repr__(self) -> str:
        return f"BilinearForm({[[str(x) for x in r] for r in self.matrix]})"


def covolume(L: Lattice, span_basis: Sequence[Sequence] | None = None) -> Fraction:
    """Volume of a fundamental domain.

    For a full-rank lattice this is |det(basis)|. For a lower-rank lattice the
    volume is measured in the coordinates of ``span_basis`` (which must span
    the same subspace).
    """
    if L.rank == 0:
        return Fraction(1)
    if span_basis is None:
        if L.rank != L.ambient_dim:
            raise ValueError("lower-rank lattice needs a basis of its span")
        return abs(det(L.basis))
    span = [vec(b) for b in span_basis]
    if len(span) != L.rank:
        raise ValueError("span basis has the wrong size")
    coords = []
    for b in L.basis:
        x = solve(transpose(span), b)
        if x is None:
            raise ValueError("lattice not contained in the given span")
        coords.append(x)
    return abs(det(coords))


def gram_determinant(L: Lattice) -> Fraction:
    """det(B^T B): the square of the Euclidean covolume."""
    return det([[dot(u, v) for v in L.basis] for u in L.basis])


# ---------------------------------------------------------------------------
# Integer matrices


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def column_hermite(a: list[list[int]]) -> tuple[list[list[int]], list[list[int]], int]:
    """Column-style Hermite reduction.

    Returns (H, U, r) with H = A U, U unimodular, the first r columns of H in
    echelon form and the remaining columns zero.
    """
    m = len(a)
    n = len(a[0]) if a else 0
    h = [row[:] for row in a]
    u = [[int(i == j) for j in range(n)] for i in range(n)]

    def colop(i, j, p, q, r, s):
        # (col_i, col_j) <- (p col_i + q col_j, r col_i + s col_j)
        for mat_ in (h, u):
            for row in mat_:
                x, y = row[i], row[j]
                row[i], row[j] = p * x + q * y, r * x + s * y

    piv = 0
    for row in range(m):
        if piv >= n:
            break
        for j in range(piv + 1, n):
            if h[row][j] == 0:
                continue
            a_, b_ = h[row][piv], h[row][j]
            g, x, y = _ext_gcd(a_, b_)
            colop(piv, j, x, y, -b_ // g, a_ // g)
        if h[row][piv] == 0:
            continue
        if h[row][piv] < 0:
            for mat_ in (h, u):
                for r_ in mat_:
                    r_[piv] = -r_[piv]
        d = h[row][piv]
        for j in range(piv):
            q = h[row][j] // d
            if q:
                for mat_ in (h, u):
                    for r_ in mat_:
                        r_[j] -= q * r_[piv]
        piv += 1
    return h, u, piv


def integer_kernel(a: Sequence[Sequence[int]], ncols: int) -> list[tuple[int, ...]]:
    """A basis of {k in Z^ncols : a k = 0}; it is automatically saturated."""
    if not a:
        return [tuple(int(i == j) for j in range(ncols)) for i in range(ncols)]
    _, u, r = column_hermite([list(map(int, row)) for row in a])
    return [tuple(u[i][j] for i in range(ncols)) for j in range(r, ncols)]


def _integerize(cols: Sequence[Vec]) -> tuple[list[list[int]], int]:
    d = reduce(lcm, (x.denominator for c in cols for x in c), 1)
    return [[int(x * d) for x in c] for c in cols], d


def hermite_basis(L: Lattice) -> tuple[Vec, ...]:
    """Canonical basis (column Hermite normal form) of the lattice."""
    if L.rank == 0:
        return ()
    ints, d = _integerize(L.basis)
    a = [list(r) for r in zip(*ints)]  # rows = coordinates, columns = generators
    h, _, r = column_hermite(a)
    return tuple(tuple(Fraction(h[i][j], d) for i in range(len(h))) for j in range(r))


def lattice_from_generators(gens: Sequence[Sequence], ambient_dim: int) -> Lattice:
    """The lattice generated by a finite (possibly dependent) set of vectors."""
    gens = [vec(g) for g in gens if any(rat(x) != 0 for x in g)]
    if not gens:
        return Lattice([], ambient_dim)
    tmp = Lattice.__new__(Lattice)
    tmp.basis, tmp.ambient_dim = tuple(gens), ambient_dim
    return Lattice(hermite_basis(tmp), ambient_dim)


def same_lattice(a: Lattice, b: Lattice) -> bool:
    """Equality of lattices by mutual membership of basis vectors."""
    if a.ambient_dim != b.ambient_dim or a.rank != b.rank:
        return False
    return all(b.contains(v) for v in a.basis) and all(a.contains(v) for v in b.basis)


# ---------------------------------------------------------------------------
# Sublattices


def restricted_lattice(L: Lattice, subspace_basis: Sequence[Sequence]) -> Lattice:
    """L intersected with the linear span of ``subspace_basis``."""
    for b in subspace_basis:
        for x in b:
            if not isinstance(x, (int, Fraction, str)) or isinstance(x, bool):
                raise ValueError("subspace must be given by rational vectors")
    span = [vec(b) for b in subspace_basis]
    n = L.ambient_dim
    if not span or rank(span) == 0:
        return Lattice([], n)
    # functionals vanishing on the span
    normals = nullspace(span, n)
    if not normals:
        return L
    # k in Z^rank with normals . (B k) = 0
    rows = [[dot(w, b) for b in L.basis] for w in normals]
    d = reduce(lcm, (x.denominator for r in rows for x in r), 1)
    ints = [[int(x * d) for x in r] for r in rows]
    ker = integer_kernel(ints, L.rank)
    return Lattice([_positive(L.point(k)) for k in ker], n)


def _positive(v: Vec) -> Vec:
    lead = next((x for x in v if x != 0), Fraction(0))
    return tuple(-x for x in v) if lead < 0 else v


def preimage_lattice(columns: Sequence[Sequence], L: Lattice) -> Lattice:
    """{x in R^r : ell x in L} for the injective linear map with these columns."""
    cols = [vec(c) for c in columns]
    r = len(cols)
    if r == 0:
        return Lattice([], 0)
    if rank(cols) != r:
        raise ValueError("linear map is not injective")
    image = restricted_lattice(L, cols)
    if image.rank != r:
        raise ValueError("image of the map is not a rational subspace for the lattice")
    ell = transpose(cols)
    return Lattice([solve(ell, w) for w in image.basis], r)


def induced_form_matrix(columns: Sequence[Sequence], b: BilinearForm) -> Mat:
    """Q with Q[i][j] = b(ell e_i, ell e_j)."""
    return b.pullback([vec(c) for c in columns])


def induced_dual_lattice(columns: Sequence[Sequence], b: BilinearForm, L: Lattice) -> Lattice:
    """The lattice of functionals x -> b(ell x, lam) on R^r.

    ``lam`` runs over the lattice points in the image of ``ell``, i.e. over
    ell(Lambda_S) with Lambda_S the preimage lattice. Functionals are written
    in the dual standard coordinates of R^r.
    """
    cols = [vec(c) for c in columns]
    if cols and rank(cols) != len(cols):
        raise ValueError("linear map is not injective (degenerate simplex)")
    lam_s = preimage_lattice(cols, L)
    q = induced_form_matrix(cols, b)
    gens = [matvec(q, mu) for mu in lam_s.basis]
    if gens and rank(gens) != len(gens):
        raise ValueError("form is degenerate on the image")
    return Lattice(gens, len(cols))


# ---------------------------------------------------------------------------
# Mixed volumes


def mixed_lattice_volume(lattices: Sequence[Lattice]) -> Fraction:
    """Mixed volume of the fundamental parallelepipeds of the given bases.

    (1/r!) * sum over index tuples of |det(b^1_{j1}, ..., b^r_{jr})|.
    """
    r = len(lattices)
    if r == 0:
        return Fraction(1)
    if any(L.rank != r or L.ambient_dim != r for L in lattices):
        raise ValueError("need r lattices of rank r in R^r")
    total = Fraction(0)
    for idx in itertools.product(range(r), repeat=r):
        cols = [lattices[i].basis[j] for i, j in enumerate(idx)]
        total += abs(det(cols))
    return total / factorial(r)


def parallelepiped(L: Lattice) -> Polytope:
    pts = []
    for signs in itertools.product((0, 1), repeat=L.rank):
        pts.append(L.point(signs))
    return Polytope.from_vertices(pts)


def minkowski_sum(p: Polytope, q: Polytope) -> Polytope:
    return Polytope.from_vertices(vadd(a, b) for a in p.vertices for b in q.vertices)


def polarization_mixed_volume(lattices: Sequence[Lattice]) -> Fraction:
    """Independent oracle: inclusion-exclusion over Minkowski sums.

    (1/r!) sum_{S} (-1)^{r-|S|} vol(sum_{i in S} P_i) with P_i the
    fundamental parallelepipeds, each sum built as an actual convex hull.
    """
    r = len(lattices)
    if r == 0:
        return Fraction(1)
    boxes = [parallelepiped(L) for L in lattices]
    total = Fraction(0)
    for size in range(1, r + 1):
        for subset in itertools.combinations(range(r), size):
            acc = boxes[subset[0]]
            for i in subset[1:]:
                acc = minkowski_sum(acc, boxes[i])
            total += (-1) ** (r - size) * volume(acc)
    return total / factorial(r)


def mixed_discriminant(matrices: Sequence[Sequence[Sequence]]) -> Fraction:
    """Symmetric multilinear polarization of det on r x r matrices.

    D(Q,...,Q) = det Q, and D is linear in each argument.
    """
    r = len(matrices)
    if r == 0:
        return Fraction(1)
    ms = [mat(m) for m in matrices]
    total = Fraction(0)
    for size in range(1, r + 1):
        for subset in itertools.combinations(range(r), size):
            acc = [[sum((ms[i][a][b] for i in subset), Fraction(0)) for b in range(r)] for a in range(r)]
            total += (-1) ** (r - size) * det(acc)
    return total / factorial(r)


def mixed_induced_volume(
    columns: Sequence[Sequence], forms: Sequence[BilinearForm], L: Lattice
) -> Fraction:
    """Mixed volume of the induced dual lattices of several forms.

    The lattices Lambda_S^{L_i} are all parametrized by Lambda_S, so their
    Minkowski sum is the induced lattice of the summed form; polarizing the
    covolume along that parametrization gives D(Q_1, ..., Q_r) vol(Lambda_S).
    Agrees with ``covolume(induced_dual_lattice(...))`` when all forms are equal.
    """
    cols = [vec(c) for c in columns]
    if len(forms) != len(cols):
        raise ValueError("need one form per dimension of the simplex")
    lam_s = preimage_lattice(cols, L)
    qs = [induced_form_matrix(cols, b) for b in forms]
    return mixed_discriminant(qs) * covolume(lam_s)


__all__ = [
    "BilinearForm",
    "Lattice",
    "column_hermite",
    "covolume",
    "gram_determinant",
    "hermite_basis",
    "induced_dual_lattice",
    "induced_form_matrix",
    "integer_kernel",
    "lattice_from_generators",
    "mixed_discriminant",
    "mixed_induced_volume",
    "mixed_lattice_volume",
    "polarization_mixed_volume",
    "preimage_lattice",
    "restricted_lattice",
    "same_lattice",
]
