from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tropmeasure.exactgeom import (
    AffineMap,
    Polytope,
    affine_hull_dim,
    cube,
    det,
    dual_representation,
    faces,
    intersect,
    inverse,
    matmul,
    nullspace,
    rank,
    relative_volume,
    relint_contains,
    solve,
    standard_simplex,
    volume,
)

from oracles import det as det_oracle, simplex_volume, support_faces

small = st.integers(-4, 4)
point2 = st.tuples(small, small)
point3 = st.tuples(small, small, small)


def test_dual_representation_segment():
    p = dual_representation(Polytope.from_vertices([(0,), (1,)]), "V")
    assert sorted(p.halfspaces) == [((F(-1),), F(-1)), ((F(1),), F(0))]


def test_dual_representation_square_from_h():
    hs = [((1, 0), 0), ((-1, 0), -1), ((0, 1), 0), ((0, -1), -1)]
    p = Polytope.from_halfspaces(hs, 2)
    assert p.vertices == ((0, 0), (0, 1), (1, 0), (1, 1))


def test_unbounded_is_reported():
    with pytest.raises(ValueError, match="unbounded"):
        Polytope.from_halfspaces([((1, 0), 0), ((0, 1), 0)], 2)


def test_empty_h_rep():
    assert Polytope.from_halfspaces([((1,), 1), ((-1,), 0)], 1).is_empty


def test_face_counts():
    assert faces(Polytope.from_vertices([(0,), (1,)])).f_vector()[:2] == (2, 1)
    tri = faces(standard_simplex(2))
    assert [len(tri.faces_of_dim(k)) for k in range(3)] == [3, 3, 1]
    # frozen from support-set enumeration
    assert [len(faces(cube(3)).faces_of_dim(k)) for k in range(4)] == [8, 12, 6, 1]


def test_cube_faces_match_support_enumeration():
    c = cube(3)
    ours = {idx for idx, d in c.face_lattice.nodes if 0 <= d}
    assert ours == support_faces(c.vertices, 3)


def test_intersections():
    seg = lambda a, b: Polytope.from_vertices([(a,), (b,)])
    assert intersect(seg(0, 1), seg(1, 2)).vertices == ((1,),)
    sq = cube(2)
    shifted = Polytope.from_vertices([(F(1, 2), 0), (F(3, 2), 0), (F(1, 2), 1), (F(3, 2), 1)])
    assert intersect(sq, shifted) == Polytope.from_vertices([(F(1, 2), 0), (1, 0), (F(1, 2), 1), (1, 1)])
    far = standard_simplex(2).translate((5, 5))
    assert intersect(standard_simplex(2), far).is_empty
    with pytest.raises(ValueError):
        intersect(sq, seg(0, 1))


def test_volumes():
    assert volume(standard_simplex(2)) == F(1, 2)
    diag = Polytope.from_vertices([(0, 0), (2, 2)])
    assert relative_volume(diag, [(1, 1)]) == 2
    with pytest.raises(ValueError):
        relative_volume(diag, [(1, 0)])


def test_relint():
    seg = Polytope.from_vertices([(0, 0), (2, 2)])
    assert relint_contains(seg, (1, 1))
    assert not relint_contains(seg, (0, 0))
    tri = standard_simplex(2)
    assert relint_contains(tri, tri.centroid()) and affine_hull_dim(tri) == 2


def test_linear_algebra_basics():
    m = [[2, 1], [1, 3]]
    assert det(m) == 5
    assert matmul(m, inverse(m)) == ((1, 0), (0, 1))
    assert solve(m, (3, 4)) == (1, 1)
    assert rank([(1, 2), (2, 4)]) == 1
    assert nullspace([(1, 2)], 2) == [(-2, 1)]


def test_affine_map_preimage():
    f = AffineMap([[2]], (1,))
    pre = f.preimage(Polytope.from_vertices([(1,), (3,)]), Polytope.from_vertices([(0,), (5,)]))
    assert pre.vertices == ((0,), (1,))


@settings(max_examples=40, deadline=None)
@given(st.lists(point3, min_size=4, max_size=9))
def test_v_h_round_trip(points):
    p = Polytope.from_vertices(points)
    q = dual_representation(p, "H")
    assert set(q.vertices) == set(p.vertices)
    assert set(dual_representation(q, "V").halfspaces) == set(q.halfspaces)


@settings(max_examples=40, deadline=None)
@given(st.lists(point3, min_size=4, max_size=4))
def test_simplex_volume_matches_determinant(points):
    p = Polytope.from_vertices(points)
    if p.dim < 3:
        assert volume(p) == 0
    else:
        assert volume(p) == simplex_volume(points)


@settings(max_examples=30, deadline=None)
@given(st.lists(point2, min_size=3, max_size=7), point2, st.tuples(small, small, small, small))
def test_volume_translation_and_linear_maps(points, shift, entries):
    p = Polytope.from_vertices(points)
    assert volume(p.translate(shift)) == volume(p)
    a, b, c, d = entries
    m = [[a, b], [c, d]]
    image = AffineMap(m, (0, 0)).image(p)
    assert volume(image) == abs(det_oracle(m)) * volume(p)


@settings(max_examples=30, deadline=None)
@given(st.lists(point2, min_size=3, max_size=6), st.lists(point2, min_size=3, max_size=6))
def test_intersection_commutative_idempotent(a, b):
    p, q = Polytope.from_vertices(a), Polytope.from_vertices(b)
    assert intersect(p, q) == intersect(q, p)
    assert intersect(p, p) == p


@settings(max_examples=30, deadline=None)
@given(point3, st.tuples(small, small, small, small))
def test_relative_volume_change_of_basis(direction, entries):
    u = tuple(F(x) for x in direction)
    v = (F(1), F(-1), F(2))
    if rank([u, v]) < 2:
        return
    p = Polytope.from_vertices([(0, 0, 0), u, v, (u[0] + v[0], u[1] + v[1], u[2] + v[2])])
    a, b, c, d = entries
    if a * d - b * c == 0:
        return
    new = [tuple(a * x + c * y for x, y in zip(u, v)), tuple(b * x + d * y for x, y in zip(u, v))]
    assert relative_volume(p, new) == relative_volume(p, [u, v]) / abs(a * d - b * c)


@settings(max_examples=25, deadline=None)
@given(st.lists(point3, min_size=4, max_size=8))
def test_euler_relation(points):
    p = Polytope.from_vertices(points)
    if p.dim < 1:
        return
    counts = [len(p.face_lattice.faces_of_dim(k)) for k in range(p.dim)]
    assert sum((-1) ** k * c for k, c in enumerate(counts)) == 1 - (-1) ** p.dim
