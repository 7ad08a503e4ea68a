from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import cy3, fractions
from fmcalc.errors import NotNilpotent, NotUnitOne, PresentationMismatch
from fmcalc.ring import QQi, RingPresentation, add, as_fraction, exp_nilpotent, integrate, mul, sqrt_unit

R = cy3("F1").ring
S = cy3("P2").ring


def classes(ring, unit=None):
    coeffs = st.lists(fractions, min_size=len(ring), max_size=len(ring))
    if unit is None:
        return coeffs.map(ring.from_vector)
    return coeffs.map(lambda c: ring.from_vector([unit, *c[1:]]))


@pytest.mark.parametrize("name", ["P2", "F0", "F2", "dP3", "dP6"])
def test_presentation_is_commutative_associative_graded(name):
    ring = cy3(name).ring
    assert ring.grading_ok()
    assert ring.commutativity_failures() == []
    assert ring.associativity_failures() == []


@given(classes(R), classes(R), classes(R))
def test_distributive(a, b, c):
    assert a * (b + c) == a * b + a * c
    assert add(a, b) == b + a
    assert mul(a, b) == b * a


@given(classes(R, unit=0), classes(R, unit=0))
def test_exp_is_a_homomorphism(x, y):
    assert (x + y).exp() == x.exp() * y.exp()
    assert exp_nilpotent(x) == x.exp()


@given(classes(R, unit=1))
def test_sqrt_squares_back(u):
    r = sqrt_unit(u)
    assert r * r == u
    assert r.degree0() == 1


@given(classes(R, unit=Fraction(3, 2)))
def test_inverse(u):
    assert u * u.inverse() == R.one()


@given(classes(R), classes(R))
def test_dual_is_a_ring_involution(a, b):
    assert a.dual().dual() == a
    assert (a * b).dual() == a.dual() * b.dual()


@given(classes(R))
def test_integrate_reads_the_top_component(a):
    assert integrate(a) == a["pt"] == a.integrate()
    assert (a - a.component(3)).integrate() == 0


def test_nilpotency_guards():
    with pytest.raises(NotNilpotent):
        R.one().exp()
    with pytest.raises(NotUnitOne):
        (R.one() * 2).sqrt()
    with pytest.raises(NotNilpotent):
        R.element("Θ").inverse()


def test_rings_do_not_mix():
    with pytest.raises(PresentationMismatch):
        R.one() + S.one()


def test_presentation_rejects_bad_grading():
    with pytest.raises(ValueError):
        RingPresentation([["1"], ["a"], ["b"]], {("a", "a"): {"a": 1}})
    with pytest.raises(ValueError):
        RingPresentation([["1", "x"]], {})


def test_products_above_top_degree_vanish():
    ring = RingPresentation([["1"], ["h"]], {("h", "h"): {}})
    h = ring.element("h")
    assert (h * h).is_zero()
    assert (h * 3).exp() == ring.one() + h * 3


def test_as_fraction_is_strict():
    assert as_fraction("3/6") == Fraction(1, 2)
    assert as_fraction(4) == 4
    for bad in (0.5, True, None):
        with pytest.raises(TypeError):
            as_fraction(bad)


@given(fractions, fractions, fractions, fractions)
def test_gaussian_rationals_form_a_field(a, b, c, d):
    z, w = QQi(a, b), QQi(c, d)
    assert z * w == w * z
    assert z + w - w == z
    if w != 0:
        assert (z / w) * w == z
    assert QQi.lift(a) == a


def test_classes_accept_gaussian_coefficients():
    t = QQi(Fraction(1, 2), 3)
    J = S.element("Θ") * t
    assert (J * J)["Θ·p*H"] == t * t * -3
    assert J.exp().integrate() == (J * J * J).integrate() / 6
