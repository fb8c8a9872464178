"""Independent reference computations used only by the tests.

None of these share code paths with the package beyond plain Fractions:
volumes come from explicit determinant formulas, faces from support-set
enumeration, saturations from brute force over small multiples.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import factorial


def det(rows):
    """Laplace expansion; fine for the tiny sizes used in tests."""
    n = len(rows)
    if n == 0:
        return Fraction(1)
    if n == 1:
        return Fraction(rows[0][0])
    total = Fraction(0)
    for j in range(n):
        minor = [r[:j] + r[j + 1 :] for r in rows[1:]]
        total += (-1) ** j * Fraction(rows[0][j]) * det(minor)
    return total


def simplex_volume(pts):
    p0 = pts[0]
    rows = [[Fraction(a) - Fraction(b) for a, b in zip(p, p0)] for p in pts[1:]]
    return abs(det(rows)) / factorial(len(rows))


def support_faces(points, dim):
    """All faces of conv(points) as vertex-index sets, by support functionals.

    For small integer boxes of directions, a subset is a face iff it is the
    argmax set of some direction; directions are enumerated from a grid
    large enough for the polytopes used in tests.
    """
    pts = [tuple(Fraction(x) for x in p) for p in points]
    faces = set()
    rng = range(-3, 4)
    for c in itertools.product(rng, repeat=dim):
        vals = [sum(ci * xi for ci, xi in zip(c, p)) for p in pts]
        best = max(vals)
        faces.add(frozenset(i for i, v in enumerate(vals) if v == best))
    return faces


def saturation_generator(direction, bound=12):
    """Shortest integer vector on the ray through ``direction``."""
    direction = [Fraction(x) for x in direction]
    n = len(direction)
    best = None
    for t in itertools.product(range(-bound, bound + 1), repeat=n):
        if not any(t):
            continue
        if all(t[i] * direction[j] == t[j] * direction[i] for i in range(n) for j in range(n)):
            norm = sum(x * x for x in t)
            if best is None or norm < best[0]:
                best = (norm, t)
    g = best[1]
    sign = 1 if next(x for x in g if x) > 0 else -1
    return tuple(sign * x for x in g)


def quadratic_max(form, lattice_pts, u):
    """max over the given lattice points of b(u, lam) - b(lam, lam)/2."""
    def b(x, y):
        return sum(Fraction(form[i][j]) * x[i] * y[j] for i in range(len(x)) for j in range(len(y)))

    return max(b(u, lam) - Fraction(1, 2) * b(lam, lam) for lam in lattice_pts)


def mixed_discriminant_2x2(q1, q2):
    """D(Q1, Q2) for 2x2 matrices by the explicit formula."""
    return Fraction(q1[0][0] * q2[1][1] + q2[0][0] * q1[1][1] - q1[0][1] * q2[1][0] - q2[0][1] * q1[1][0], 2)
