from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tropmeasure.exactgeom import AffineMap, Polytope
from tropmeasure.lattice import BilinearForm, Lattice
from tropmeasure.measure import (
    DimensionBoundError,
    MeasurePiece,
    PolytopalMeasure,
    Scenario,
    TransversalityError,
    canonical_measure,
    degree_of_component,
    discrete_measure,
    haar_check,
    haar_expected_total,
    haar_scenario,
    limit_table,
    loop_scenario,
    positivity_check,
    pushforward,
    spectrum_scenario,
    subtorus_scenario,
    validate_dimension_bounds,
)
from tropmeasure.modelfun import CocycleData, ModelFunction, delaunay_model_function
from tropmeasure.periodic import LatticeFrame
from tropmeasure.skeleton import (
    SkeletonComplex,
    Stratum,
    TropicalMap,
    kuhn_triangulation,
    skeleton_from_triangulation,
    torus_skeleton,
)

Z1 = Lattice.standard(1)
Z2 = Lattice.standard(2)
SHIFT2 = (F(1, 10007), F(3, 10009))


def seg(a, b):
    return Polytope.from_vertices([(F(a),), (F(b),)])


def elliptic(form=3):
    return haar_scenario(Z1, BilinearForm([[form]]), 0, k=2)


def torus2(form=((1, 0), (0, 1))):
    return haar_scenario(Z2, BilinearForm(form), 0, k=2)


def interval_scenario(d=1, b=0, weight=1, form=2):
    strata = [
        Stratum("p0", ("c0",), d),
        Stratum("p1", ("c1",), d),
        Stratum("e", ("c0", "c1"), d - 1, {(0,): "p0", (1,): "p1"}, {None: F(weight)}),
    ]
    maps = {"p0": AffineMap([[]], (0,)), "p1": AffineMap([[]], (0,)), "e": AffineMap([[1]], (0,))}
    sk = SkeletonComplex(d, strata, 1)
    return Scenario(1, b, d, Z1, [BilinearForm([[form]])] * d, sk, TropicalMap(Z1, maps))


def piecewise(breaks, slopes, form, z0):
    """Model function on [0, 1] from breakpoints and slopes, continuous from f(0) = 0."""
    cells, val = [], F(0)
    for a, b, s in zip(breaks, breaks[1:], slopes):
        cells.append((seg(a, b), (s,), val - s * F(a)))
        val += s * (F(b) - F(a))
    return ModelFunction.from_cells(Z1, cells, CocycleData(BilinearForm([[form]]), Z1, [z0]))


def test_elliptic_example():
    scn = elliptic()
    mu = pushforward(canonical_measure(scn), scn.tmap)
    assert {p.density for p in mu.pieces} == {3}
    assert mu.total_mass() == 3 and haar_check(scn).ok


def test_two_torus_example():
    scn = torus2()
    mu = pushforward(canonical_measure(scn), scn.tmap)
    assert {p.density for p in mu.pieces} == {2}
    assert mu.total_mass() == 2 and haar_check(scn).ok


def test_support_is_the_nondegenerate_part():
    tri = kuhn_triangulation(Z1, 2)
    sk, maps = skeleton_from_triangulation(tri, 1, lambda p: 0 if p.dim == 1 else 5)
    scn = Scenario(1, 1, 1, Z1, [BilinearForm([[1]])], sk, TropicalMap(Z1, maps))
    mu = canonical_measure(scn)
    assert mu.dims() == [0] and mu.total_mass() == 10
    rep = validate_dimension_bounds(scn, pushforward(mu, scn.tmap))
    assert ("occurring dimensions", True, "0") in rep.checks


def test_pushforward_examples():
    scn = interval_scenario()
    mu = canonical_measure(scn)
    pushed = pushforward(mu, scn.tmap)
    assert [(p.support, p.density) for p in pushed.pieces] == [(p.support, p.density) for p in mu.pieces]
    # stretch the lift by 2: density halves, mass stays, deg_f multiplies
    stretched = TropicalMap(Z1, dict(scn.tmap.maps, e=AffineMap([[2]], (0,))))
    p2 = pushforward(mu, stretched, deg_f=3)
    assert p2.pieces[0].density == mu.pieces[0].density / 2 * 3
    assert p2.total_mass() == 3 * mu.total_mass()
    tri = kuhn_triangulation(Z1, 2)
    sk, maps = skeleton_from_triangulation(tri, 1, lambda p: 1 if p.dim == 1 else 0, multiplicity=lambda p: 2)
    two = Scenario(1, 0, 1, Z1, [BilinearForm([[1]])], sk, TropicalMap(Z1, maps))
    pushed = pushforward(canonical_measure(two), two.tmap)
    assert len(pushed.pieces) == 2 and {p.density for p in pushed.pieces} == {2}
    assert any("summed" in note for note in pushed.notes)


def test_haar_flags_uneven_weights():
    sk, tm = torus_skeleton(Z2, 2, lambda p: (1 if p.vertices[0] == (0, 0) else 2) if p.dim == 2 else 0, k=2)
    scn = Scenario(2, 0, 2, Z2, [BilinearForm([[1, 0], [0, 1]])] * 2, sk, tm)
    rep = haar_check(scn)
    assert any("constant density" in v for v in rep.violations())


def test_degree_examples():
    scn = interval_scenario(weight=3)
    kinked = piecewise([0, F(1, 2), 1], [0, 2], 2, 1)
    assert degree_of_component(scn, "e", (F(1, 2),), kinked) == 6
    flat = piecewise([0, F(1, 3), F(2, 3), 1], [0, 0, 3], 3, 1)
    assert degree_of_component(scn, "e", (F(1, 3),), flat) == 0
    # d = 2, e = 1: 2!/1! * 3 * length 2
    scn2 = interval_scenario(d=2, b=1, weight=3)
    assert degree_of_component(scn2, "e", (F(1, 2),), kinked) == 12
    with pytest.raises(TransversalityError):
        degree_of_component(scn, "e", (F(1, 4),), kinked)


def test_discrete_measure_elliptic():
    scn = elliptic()
    mf = delaunay_model_function(scn.single_form, Z1, shift=(F(1, 10007),))
    totals = {discrete_measure(scn, mf, m).total_mass() for m in (1, 2, 3, 4)}
    assert totals == {3}


def test_discrete_mass_matches_degree_route():
    scn = torus2(((2, 1), (1, 2)))
    mf = delaunay_model_function(scn.single_form, Z2, shift=SHIFT2)
    for m in (1, 2):
        mu = discrete_measure(scn, mf, m)
        for atom in mu.atoms[:6]:
            deg = degree_of_component(scn, atom.stratum, atom.point, mf, m)
            assert atom.mass == deg / m ** (2 * scn.d)


def test_limit_bound_holds():
    scn = elliptic()
    mf = delaunay_model_function(scn.single_form, Z1, shift=(F(1, 10007),))
    sid = next(s.id for s in scn.skeleton if s.r == 1)
    omega = seg(F(1, 10), F(3, 10))
    for row in limit_table(scn, mf, sid, omega, [1, 2, 4, 8]):
        assert row.error <= row.bound


@settings(max_examples=10, deadline=None)
@given(st.integers(1, 3), st.integers(-1, 1), st.integers(1, 3), st.integers(1, 3), st.integers(-1, 1), st.integers(1, 3))
def test_multilinear_and_symmetric(a, b, c, x, y, z):
    if a * c <= b * b or x * z <= y * y:
        return
    base = torus2()
    b1 = BilinearForm([[a, b], [b, c]])
    b2 = BilinearForm([[x, y], [y, z]])
    b3 = BilinearForm([[1, 0], [0, 2]])

    def dens(forms):
        scn = Scenario(2, 0, 2, Z2, forms, base.skeleton, base.tmap)
        return [p.density for p in canonical_measure(scn).pieces]

    assert dens([b1, b2]) == dens([b2, b1])
    summed = dens([b1 + b2, b3])
    assert summed == [p + q for p, q in zip(dens([b1, b3]), dens([b2, b3]))]


def test_z0_independence():
    scn = torus2(((2, 1), (1, 2)))
    mf = delaunay_model_function(scn.single_form, Z2, shift=SHIFT2)
    other = mf.add_affine((1, -2), F(5, 7))
    assert other.cocycle.z0 != mf.cocycle.z0
    for m in (1, 2):
        one, two = discrete_measure(scn, mf, m), discrete_measure(scn, other, m)
        assert [(a.point, a.mass) for a in one.atoms] == [(a.point, a.mass) for a in two.atoms]


@pytest.mark.parametrize(
    "scn",
    [elliptic(), torus2(), haar_scenario(Z2, BilinearForm([[2, 1], [1, 3]]), 1, k=2),
     loop_scenario(Z2, BilinearForm([[2, 1], [1, 3]]), (1, 2), 3)],
    ids=["elliptic", "torus2", "torus2-b1", "loop"],
)
def test_pushforward_conserves_mass(scn):
    mu = canonical_measure(scn)
    assert pushforward(mu, scn.tmap).total_mass() == mu.total_mass()
    assert positivity_check(scn, mu).ok


def test_dimension_bounds():
    scn = torus2()
    mu = pushforward(canonical_measure(scn), scn.tmap)
    assert mu.dims() == [2] and validate_dimension_bounds(scn, mu).ok
    cube3 = Polytope.from_vertices([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)])
    bad = PolytopalMeasure(mu.pieces + [MeasurePiece("torus", cube3, 3, F(1), ())])
    with pytest.raises(DimensionBoundError):
        validate_dimension_bounds(scn, bad)


def test_haar_total_formula():
    for scn in (elliptic(), torus2(), haar_scenario(Z2, BilinearForm([[2, 1], [1, 3]]), 1, k=2)):
        assert pushforward(canonical_measure(scn), scn.tmap).total_mass() == haar_expected_total(scn)


def test_subtorus_scenario_is_consistent():
    form = BilinearForm([[2, 1, 0], [1, 2, 1], [0, 1, 2]])
    scn = subtorus_scenario(Lattice.standard(3), form, [[1, 0], [0, 1], [1, 1]], Z2)
    mu = pushforward(canonical_measure(scn), scn.tmap)
    assert mu.dims() == [2] and mu.total_mass() == canonical_measure(scn).total_mass()


def test_spectrum_engine_matches_closed_form():
    tri = kuhn_triangulation(Lattice([(2, 0), (0, 2)]), 1)
    scn, closed = spectrum_scenario(1, 2, 1, 3, BilinearForm([[2, -1], [-1, 2]]), tri)
    frame = LatticeFrame(scn.lattice)
    mu = pushforward(canonical_measure(scn), scn.tmap)
    assert mu.dims() == [1, 2]
    assert all(p.density == closed[frame.key(p.support)] for p in mu.pieces)
    with pytest.raises(ValueError):
        spectrum_scenario(1, 2, 2, 3, BilinearForm([[2, -1], [-1, 2]]), tri)
