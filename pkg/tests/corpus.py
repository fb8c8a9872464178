"""Generated scenarios shared by the acceptance tests.

Every scenario comes with a generic model function: the Delaunay function
of its form, translated by a shift with large prime denominators so that
no subdivision vertex lands on a lower-dimensional cell of the model.
"""

from __future__ import annotations

from fractions import Fraction as F

from tropmeasure import measure as ms
from tropmeasure.lattice import BilinearForm, Lattice
from tropmeasure.modelfun import delaunay_model_function
from tropmeasure.skeleton import kuhn_triangulation

PRIMES = (10007, 10009, 10037)
Z1 = Lattice.standard(1)
Z2 = Lattice.standard(2)
Z3 = Lattice.standard(3)
B2 = BilinearForm([[2, 1], [1, 3]])
B3 = BilinearForm([[2, 1, 0], [1, 2, 1], [0, 1, 2]])


def generic_shift(n: int, salt: int = 1):
    return tuple(F(salt + 2 * i, p) for i, p in zip(range(n), PRIMES))


def with_model_function(scn: ms.Scenario, salt: int = 1) -> ms.Scenario:
    scn.model_function = delaunay_model_function(
        scn.forms[0], scn.lattice, search_radius=3, shift=generic_shift(scn.n, salt)
    )
    return scn


def haar_corpus() -> list[ms.Scenario]:
    out = []
    for form in ([[1]], [[2]], [[3]], [[5]]):
        for b in (0, 1):
            out.append(ms.haar_scenario(Z1, BilinearForm(form), b, k=2))
    for lat, form in (
        (Z2, [[1, 0], [0, 1]]),
        (Z2, [[2, 1], [1, 3]]),
        (Lattice([(2, 0), (0, 1)]), [[1, 0], [0, 2]]),
        (Lattice([(1, 1), (0, 2)]), [[2, -1], [-1, 2]]),
    ):
        for b in (0, 1):
            out.append(ms.haar_scenario(lat, BilinearForm(form), b, k=2))
    return out


def loop_corpus() -> list[ms.Scenario]:
    return [ms.loop_scenario(Z2, B2, d, 3) for d in ((1, 0), (1, 1), (1, 2), (2, 1), (1, -1))]


def subtorus_corpus() -> list[ms.Scenario]:
    return [ms.subtorus_scenario(Z3, B3, [[1, 0], [0, 1], [1, 1]], Z2)]


SPECTRUM_CASES = ((1, 1, 0), (1, 1, 1), (1, 2, 1), (2, 2, 1))


def spectrum_form(n: int) -> BilinearForm:
    return BilinearForm([[2]]) if n == 1 else BilinearForm([[2, -1], [-1, 2]])


def spectrum_triangulation(n: int):
    return kuhn_triangulation(Lattice([tuple(2 if i == j else 0 for i in range(n)) for j in range(n)]), 1)


def spectrum_corpus(deg=2) -> list[tuple[ms.Scenario, dict]]:
    out = []
    for b, n, m in SPECTRUM_CASES:
        scn, closed = ms.spectrum_scenario(b, n, m, deg, spectrum_form(n), spectrum_triangulation(n))
        out.append((scn, closed))
    return out


def full_corpus() -> list[ms.Scenario]:
    scns = haar_corpus() + loop_corpus() + subtorus_corpus() + [s for s, _ in spectrum_corpus()]
    return [with_model_function(s, salt=i % 5 + 1) for i, s in enumerate(scns)]
