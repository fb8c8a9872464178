from fractions import Fraction as F
import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tropmeasure.lattice import (
    BilinearForm,
    Lattice,
    covolume,
    induced_dual_lattice,
    lattice_from_generators,
    mixed_discriminant,
    mixed_induced_volume,
    mixed_lattice_volume,
    polarization_mixed_volume,
    preimage_lattice,
    restricted_lattice,
    same_lattice,
)

from oracles import det as det_oracle, mixed_discriminant_2x2, saturation_generator


def test_covolumes():
    assert covolume(Lattice.standard(2)) == 1
    assert covolume(Lattice([(1, 0), (1, 2)])) == 2
    assert covolume(Lattice([(2, 1), (1, 2)])) == 3
    with pytest.raises(ValueError):
        Lattice([(1, 2), (2, 4)])


def test_induced_dual_lattice_examples():
    z = Lattice.standard(1)
    assert covolume(induced_dual_lattice([(1,)], BilinearForm([[1]]), z)) == 1
    assert covolume(induced_dual_lattice([(1,)], BilinearForm([[3]]), z)) == 3
    emb = induced_dual_lattice([(1, 0)], BilinearForm([[1, 0], [0, 1]]), Lattice.standard(2))
    assert covolume(emb) == 1
    with pytest.raises(ValueError):
        induced_dual_lattice([(1, 0), (2, 0)], BilinearForm([[1, 0], [0, 1]]), Lattice.standard(2))


def test_restricted_lattice_examples():
    z2 = Lattice.standard(2)
    assert restricted_lattice(z2, [(1, 1)]).basis in (((1, 1),), ((-1, -1),))
    assert restricted_lattice(z2, [(1, 0)]).basis in (((1, 0),), ((-1, 0),))
    got = restricted_lattice(z2, [(2, 4)]).basis[0]
    assert tuple(abs(x) for x in got) == saturation_generator((2, 4))


@settings(max_examples=30, deadline=None)
@given(st.tuples(st.integers(-5, 5), st.integers(-5, 5)).filter(any))
def test_restricted_lattice_is_saturated(direction):
    gen = restricted_lattice(Lattice.standard(2), [direction]).basis[0]
    oracle = saturation_generator(direction)
    assert gen in (oracle, tuple(-x for x in oracle))


def test_mixed_lattice_volume_examples():
    z2 = Lattice.standard(2)
    l2 = Lattice([(2, 0), (0, 1)])
    assert mixed_lattice_volume([z2, z2]) == 1
    assert mixed_lattice_volume([z2, l2]) == F(3, 2)
    assert polarization_mixed_volume([z2, l2]) == F(3, 2)
    # index-2 refinement of the second lattice: every determinant term halves
    fine = Lattice([(1, 0), (0, F(1, 2))])
    assert mixed_lattice_volume([z2, fine]) == F(3, 4)


def test_lattice_equality_via_hermite_form():
    a = Lattice([(1, 0), (0, 1)])
    b = Lattice([(1, 1), (0, 1)])
    assert same_lattice(a, b)
    assert not same_lattice(a, Lattice([(2, 0), (0, 1)]))
    assert same_lattice(lattice_from_generators([(2, 0), (0, 2), (1, 1)], 2), Lattice([(1, 1), (0, 2)]))


def test_preimage_lattice():
    lam = preimage_lattice([(2,)], Lattice.standard(1))
    assert covolume(lam) == F(1, 2)


ints = st.integers(-3, 3)


def _lattice(entries, r):
    cols = [tuple(entries[i * r + j] for j in range(r)) for i in range(r)]
    if det_oracle([list(c) for c in cols]) == 0:
        return None
    return Lattice(cols)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.lists(ints, min_size=27, max_size=27))
def test_mixed_volume_symmetry_and_diagonal(r, entries):
    lats = [_lattice(entries[k * 9:], r) for k in range(r)]
    if any(l is None for l in lats):
        return
    v = mixed_lattice_volume(lats)
    for perm in itertools.permutations(lats):
        assert mixed_lattice_volume(list(perm)) == v
    assert mixed_lattice_volume([lats[0]] * r) == covolume(lats[0])


def _pd_form(a, b, c):
    # [[a, b], [b, c]] made positive definite
    a, c = abs(a) + 1, abs(c) + 1
    if a * c - b * b <= 0:
        c = b * b + 1
    return BilinearForm([[a, b], [b, c]])


@settings(max_examples=30, deadline=None)
@given(ints, ints, ints, st.tuples(ints, ints, ints, ints))
def test_induced_covolume_independent_of_lattice_basis(a, b, c, u):
    form = _pd_form(a, b, c)
    basis = [(2, 1), (1, 3)]
    unimodular = [[1, u[0]], [0, 1]]
    other = [
        tuple(sum(unimodular[i][j] * basis[i][k] for i in range(2)) for k in range(2)) for j in range(2)
    ]
    cols = [(1, 0), (u[1], 1)]
    one = covolume(induced_dual_lattice(cols, form, Lattice(basis)))
    two = covolume(induced_dual_lattice(cols, form, Lattice(other)))
    assert one == two


@settings(max_examples=30, deadline=None)
@given(st.lists(ints, min_size=8, max_size=8))
def test_mixed_discriminant_against_explicit_formula(xs):
    q1 = [[xs[0], xs[1]], [xs[1], xs[2]]]
    q2 = [[xs[3], xs[4]], [xs[4], xs[5]]]
    assert mixed_discriminant([q1, q2]) == mixed_discriminant_2x2(q1, q2)
    assert mixed_discriminant([q1, q1]) == det_oracle(q1)


def test_mixed_induced_volume_is_multilinear_where_tuple_sum_is_not():
    z2 = Lattice.standard(2)
    cols = [(1, 0), (5, 1)]
    b1 = BilinearForm([[1, 0], [0, 1]])
    b2 = BilinearForm([[1, F(9, 10)], [F(9, 10), 1]])
    mixed = mixed_induced_volume(cols, [b1, b2], z2)
    expand = (
        mixed_induced_volume(cols, [b1 + b2, b1 + b2], z2)
        - mixed_induced_volume(cols, [b1, b1], z2)
        - mixed_induced_volume(cols, [b2, b2], z2)
    ) / 2
    assert mixed == expand
    tuple_sum = mixed_lattice_volume(
        [induced_dual_lattice(cols, b1, z2), induced_dual_lattice(cols, b2, z2)]
    )
    assert tuple_sum != mixed
    # equal forms: both agree with the covolume
    for b in (b1, b2):
        lat = induced_dual_lattice(cols, b, z2)
        assert mixed_lattice_volume([lat, lat]) == covolume(lat) == mixed_induced_volume(cols, [b, b], z2)
