from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import CATALOG, SURFACE_MODELS, cy3
from fmcalc.errors import InconsistentCustomLattice, UnknownCatalogEntry, WrongKind
from fmcalc.geometry import (
    CY3,
    SURFACE,
    build_base,
    build_fibration,
    c2_tangent,
    c2_tangent_formula,
    effective_check,
    elliptic_surface,
    push_to_base,
    todd_base,
    todd_relative,
    todd_total,
)

MINUS_ONE_CURVES = {1: 1, 2: 3, 3: 6, 4: 10, 5: 16, 6: 27, 7: 56, 8: 240}


@pytest.mark.parametrize("name", CATALOG + ["Enriques"])
def test_catalog_invariants(name):
    b = build_base(name)
    assert b.noether_ok()
    assert all(b.pairing[i][j] == b.pairing[j][i] for i in range(b.h11) for j in range(b.h11))
    expected_K2 = {"P2": 9, "Enriques": 0}.get(name, 8 if name.startswith("F") else None)
    if name.startswith("dP"):
        expected_K2 = 9 - int(name[2:])
    assert b.c1_squared == expected_K2
    assert b.c2 == 12 - b.c1_squared  # Noether with χ(O_B) = 1


@pytest.mark.parametrize("k", range(2, 9))
def test_del_pezzo_cone_is_spanned_by_minus_one_curves(k):
    b = build_base(f"dP{k}")
    gens = b.effective_generators
    assert len(gens) == MINUS_ONE_CURVES[k]
    for g in gens:
        assert b.square(g) == -1 and b.dot_c1(g) == 1


def test_del_pezzo_one_adds_the_conic():
    b = build_base("dP1")
    squares = sorted(b.square(g) for g in b.effective_generators)
    assert squares == [-1, 0]


@pytest.mark.parametrize("m", range(4))
def test_hirzebruch_pairing(m):
    b = build_base(f"F{m}")
    assert b.pairing == ((-m, 1), (1, 0))
    assert b.c1 == (2, m + 2)


def test_catalog_name_errors():
    for bad in ("P5", "dP9", "F", "K3"):
        with pytest.raises(UnknownCatalogEntry):
            build_base(bad)
    assert build_base("dp_3").name == build_base("dP3").name


def test_custom_lattice_round_trip_and_errors():
    spec = {
        "divisor_names": ["a", "b"],
        "pairing": [[0, 1], [1, 0]],
        "c1": [2, 2],
        "c2": 4,
        "effective_generators": [[1, 0], [0, 1]],
    }
    b = build_base(spec)
    assert b.c1_squared == 8 and b.name == "custom"
    for broken in (
        {**spec, "pairing": [[0, 1], [2, 0]]},
        {**spec, "c1": [1]},
        {**spec, "effective_generators": []},
        {k: v for k, v in spec.items() if k != "c2"},
    ):
        with pytest.raises(InconsistentCustomLattice):
            build_base(broken)


@pytest.mark.parametrize("name", CATALOG)
def test_threefold_is_calabi_yau(name):
    X = cy3(name)
    td = todd_total(X)
    assert td.component(1).is_zero()
    assert td.integrate() == 0  # χ(O_X) = 0
    assert c2_tangent(X) == c2_tangent_formula(X)


@pytest.mark.parametrize("name", ["P2", "F2", "dP5"])
def test_threefold_relations(name):
    X = cy3(name)
    th, f, pt = X.theta, X.fiber, X.point
    assert th * th == -(th * X.c1)
    assert th * f == pt
    assert f * f == 0
    for i in range(X.base.h11):
        for j in range(X.base.h11):
            Di, Dj = X.pull_divisor(X.base.unit_divisor(i)), X.pull_divisor(X.base.unit_divisor(j))
            assert Di * Dj == f * X.base.pairing[i][j]
        assert th * th * Di == -pt * X.base.dot_c1(X.base.unit_divisor(i))


@pytest.mark.parametrize("name", ["P2", "F1", "dP4"])
def test_projection_formula(name):
    X = cy3(name)
    B = X.base_ring
    for a in X.ring.basis_elements():
        for b in B.basis_elements():
            assert push_to_base(X, a * X.pullback(b)) == push_to_base(X, a) * b
    assert push_to_base(X, X.theta) == B.one()
    assert push_to_base(X, X.point) == B.element("pt")


def test_relative_todd_class_closed_form():
    X = cy3("P2")
    c1, th = X.c1, X.theta
    want = X.one - c1 / 2 + (c1 * c1 * 13 + th * c1 * 12) / 12 - th * c1 * c1 / 2
    assert todd_relative(X) == want
    assert todd_total(X) == want * X.pullback(todd_base(X))


@pytest.mark.parametrize("X", SURFACE_MODELS, ids=lambda X: X.ring.name)
def test_surface_ring(X):
    assert X.kind == SURFACE
    th, f = X.theta, X.fiber
    assert (th * th).integrate() == -X.base.e
    assert (th * f).integrate() == 1
    assert X.c1 == f * X.base.e
    assert todd_total(X).integrate() == X.base.e  # χ(O_S) = e


def test_surface_extras_must_pair_known_classes():
    with pytest.raises(ValueError):
        elliptic_surface(0, 1, extras={"E": {"Z": 1}})


def test_kind_guards():
    S = elliptic_surface(1, 2)
    with pytest.raises(WrongKind):
        S.require(CY3)
    with pytest.raises(WrongKind):
        c2_tangent(S)


def test_enriques_positive_cone():
    b = build_base("Enriques")
    assert b.cone_kind == "positive"
    assert effective_check(b, b.ample).effective
    assert not effective_check(b, [-x for x in b.ample]).effective
    root = [0, 0, 1] + [0] * 7
    assert b.square(root) == -2
    assert not effective_check(b, root).effective


small = st.integers(-8, 8)


@pytest.mark.parametrize("name", ["F2", "dP3", "dP6"])
def test_effectivity_certificates(name):
    b = build_base(name)

    @given(st.lists(small, min_size=b.h11, max_size=b.h11))
    def check(vec):
        res = effective_check(b, vec)
        if res.effective:
            assert all(w >= 0 for w in res.combination)
            total = [sum(w * g[i] for w, g in zip(res.combination, b.effective_generators)) for i in range(b.h11)]
            assert total == [Fraction(v) for v in vec]
        else:
            phi = res.witness["functional"]
            assert all(sum(a * x for a, x in zip(phi, g)) >= 0 for g in b.effective_generators)
            assert sum(a * x for a, x in zip(phi, vec)) < 0
            # the same functional as a divisor class via the pairing
            assert [b.dot(res.separator, b.unit_divisor(i)) for i in range(b.h11)] == list(phi)

    check()


def test_twelve_c1_is_effective_everywhere():
    for name in CATALOG:
        b = build_base(name)
        assert effective_check(b, [12 * c for c in b.c1]).effective
        assert not effective_check(b, [-c for c in b.c1]).effective


def test_build_fibration_accepts_names_and_bases():
    assert build_fibration("P2").base == build_base("P2")
    assert build_fibration(build_base("F1")).kind == CY3
