"""Base surfaces/curves and the intersection rings of their elliptic fibrations.

Degrees are complex codimensions.  For a threefold ``X -> B`` over a surface the
ring basis is ``1 | Θ, p*D_i | Θ·p*D_i, f | pt`` with the relations

    Θ² = -Θ·p*c1(B),   Θ·f = pt,   p*D·p*D' = (D·D')_B f,   f² = 0,

which is the Calabi-Yau specialisation (K̄ = c1(B)) of the section adjunction.
For an elliptic surface over a curve the basis is ``1 | Θ, f, extras | w`` with
``Θ² = -e w`` and ``Θ·f = w``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import isqrt
from typing import Mapping, Sequence

from .cone import cone_membership
from .errors import InconsistentCustomLattice, UnknownCatalogEntry, WrongKind
from .ring import GradedClass, RingPresentation, as_fraction

CY3 = "CY3-over-surface"
SURFACE = "elliptic-surface-over-curve"

Vector = tuple  # tuple of Fractions indexed by the base divisor basis


def _vec(values) -> Vector:
    return tuple(as_fraction(v) for v in values)


@dataclass(frozen=True)
class BaseSurface:
    name: str
    divisor_names: tuple[str, ...]
    pairing: tuple[tuple[Fraction, ...], ...]
    c1: Vector
    c2: Fraction
    effective_generators: tuple[Vector, ...]
    # "polyhedral": cone spanned by effective_generators.
    # "positive": closed positive cone {D : D² >= 0, D·ample >= 0}.
    cone_kind: str = "polyhedral"
    ample: Vector | None = None

    @property
    def h11(self) -> int:
        return len(self.divisor_names)

    def dot(self, u: Sequence, v: Sequence) -> Fraction:
        out = Fraction(0)
        for row, ui in zip(self.pairing, u):
            if ui:
                out += ui * sum((g * vj for g, vj in zip(row, v) if g and vj), Fraction(0))
        return out

    def dot_c1(self, u: Sequence) -> Fraction:
        """u·c1, using the memoised row vector G·c1."""
        g = self.__dict__.get("_c1_row")
        if g is None:
            g = tuple(sum((a * c for a, c in zip(row, self.c1)), Fraction(0)) for row in self.pairing)
            object.__setattr__(self, "_c1_row", g)
        return sum((a * b for a, b in zip(g, u) if a and b), Fraction(0))

    def square(self, u: Sequence) -> Fraction:
        return self.dot(u, u)

    @property
    def c1_squared(self) -> Fraction:
        # frozen dataclass: memoise by hand
        cached = self.__dict__.get("_c1_squared")
        if cached is None:
            cached = self.square(self.c1)
            object.__setattr__(self, "_c1_squared", cached)
        return cached

    def zero_divisor(self) -> Vector:
        return (Fraction(0),) * self.h11

    def unit_divisor(self, i: int) -> Vector:
        return tuple(Fraction(1) if j == i else Fraction(0) for j in range(self.h11))

    def noether_ok(self) -> bool:
        """χ(O_B) = (c1² + c2)/12 is a positive integer for the catalog entries."""
        chi = (self.c1_squared + self.c2) / 12
        return chi.denominator == 1 and chi > 0


@dataclass(frozen=True)
class BaseCurve:
    genus: int
    e: int
    name: str = ""

    def __post_init__(self):
        if self.genus < 0 or self.e < 0:
            raise ValueError("genus and e must be non-negative")

    @property
    def euler(self) -> int:
        return 2 - 2 * self.genus


@dataclass(frozen=True)
class EffectivityResult:
    effective: bool
    combination: tuple[Fraction, ...] | None = None
    # divisor N with N·g >= 0 for all generators and N·D < 0 (polyhedral cones)
    separator: Vector | None = None
    witness: Mapping[str, Fraction] | None = None

    def __bool__(self):
        return self.effective


# --------------------------------------------------------------------------
# catalog


def _minus_one_curves(k: int) -> list[Vector]:
    """All classes dH - Σ a_i E_i on dP_k with C² = -1 and C·c1 = 1.

    From Σa_i = 3d - 1, Σa_i² = d² + 1 and Cauchy-Schwarz, (3d-1)² <= k(d²+1),
    which bounds d; each |a_i| <= sqrt(d² + 1).
    """
    found = []
    d = 0
    while (3 * d - 1) ** 2 <= k * (d * d + 1) or d == 0:
        target_sum = 3 * d - 1
        target_sq = d * d + 1
        bound = isqrt(target_sq)

        def rec(i, partial, s, q):
            if i == k:
                if s == target_sum and q == target_sq:
                    found.append((Fraction(d),) + tuple(Fraction(-a) for a in partial))
                return
            rest = k - i
            for a in range(-bound, bound + 1):
                q2 = q + a * a
                if q2 > target_sq:
                    continue
                s2 = s + a
                # remaining entries must supply target_sum - s2 with square budget target_sq - q2
                need = target_sum - s2
                budget = target_sq - q2
                if need * need > (rest - 1) * budget:
                    continue
                rec(i + 1, partial + [a], s2, q2)

        rec(0, [], 0, 0)
        d += 1
    return found


def _conic_classes(k: int) -> list[Vector]:
    """Classes with C² = 0, C·c1 = 2 in the same box, used when k <= 1."""
    found = []
    for d in range(0, 3):
        for a in itertools.product(range(-2, 3), repeat=k):
            c = (Fraction(d),) + tuple(Fraction(-x) for x in a)
            sq = d * d - sum(x * x for x in a)
            deg = 3 * d - sum(a)
            if sq == 0 and deg == 2:
                found.append(c)
    return found


def _del_pezzo(k: int) -> BaseSurface:
    if not 0 <= k <= 8:
        raise UnknownCatalogEntry(f"dP_{k}: need 0 <= k <= 8")
    names = ("H",) + tuple(f"E{i}" for i in range(1, k + 1))
    n = k + 1
    pairing = tuple(
        tuple(Fraction(1 if i == j == 0 else (-1 if i == j else 0)) for j in range(n)) for i in range(n)
    )
    c1 = (Fraction(3),) + (Fraction(-1),) * k
    if k == 0:
        gens = [(Fraction(1),)]
    else:
        gens = _minus_one_curves(k)
        if k == 1:
            gens += [g for g in _conic_classes(k) if g not in gens]
    return BaseSurface(
        name=f"dP{k}",
        divisor_names=names,
        pairing=pairing,
        c1=c1,
        c2=Fraction(3 + k),
        effective_generators=tuple(sorted(set(gens))),
    )


def _hirzebruch(m: int) -> BaseSurface:
    if m < 0:
        raise UnknownCatalogEntry(f"F_{m}: need m >= 0")
    pairing = ((Fraction(-m), Fraction(1)), (Fraction(1), Fraction(0)))
    return BaseSurface(
        name=f"F{m}",
        divisor_names=("b", "fB"),
        pairing=pairing,
        c1=(Fraction(2), Fraction(m + 2)),
        c2=Fraction(4),
        effective_generators=((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))),
    )


_E8_CARTAN = (
    (2, -1, 0, 0, 0, 0, 0, 0),
    (-1, 2, -1, 0, 0, 0, 0, 0),
    (0, -1, 2, -1, 0, 0, 0, 0),
    (0, 0, -1, 2, -1, 0, 0, 0),
    (0, 0, 0, -1, 2, -1, 0, -1),
    (0, 0, 0, 0, -1, 2, -1, 0),
    (0, 0, 0, 0, 0, -1, 2, 0),
    (0, 0, 0, 0, -1, 0, 0, 2),
)


def _enriques() -> BaseSurface:
    # Num(B) = U ⊕ E8(-1); K_B is 2-torsion, so c1 = 0 rationally.
    names = ("u1", "u2") + tuple(f"r{i}" for i in range(1, 9))
    n = 10
    pairing = [[Fraction(0)] * n for _ in range(n)]
    pairing[0][1] = pairing[1][0] = Fraction(1)
    for i in range(8):
        for j in range(8):
            pairing[2 + i][2 + j] = Fraction(-_E8_CARTAN[i][j])
    zero = (Fraction(0),) * n
    u1 = tuple(Fraction(1) if i == 0 else Fraction(0) for i in range(n))
    u2 = tuple(Fraction(1) if i == 1 else Fraction(0) for i in range(n))
    return BaseSurface(
        name="Enriques",
        divisor_names=names,
        pairing=tuple(tuple(r) for r in pairing),
        c1=zero,
        c2=Fraction(12),
        effective_generators=(u1, u2),
        cone_kind="positive",
        ample=tuple(a + b for a, b in zip(u1, u2)),
    )


_CATALOG_RE = re.compile(r"^(?:(P2)|F_?(\d+)|dP_?(\d+)|(Enriques))$", re.IGNORECASE)


def build_base(spec) -> BaseSurface:
    """Catalog entry by name (``P2``, ``F_m``, ``dP_k``, ``Enriques``) or a custom lattice.

    A custom lattice is a mapping with keys ``divisor_names``, ``pairing``, ``c1``,
    ``c2``, ``effective_generators`` and optionally ``name``.
    """
    if isinstance(spec, BaseSurface):
        return spec
    if isinstance(spec, str):
        m = _CATALOG_RE.match(spec.strip())
        if not m:
            raise UnknownCatalogEntry(f"unknown base surface {spec!r}")
        if m.group(1):
            return replace(_del_pezzo(0), name="P2")
        if m.group(2) is not None:
            return _hirzebruch(int(m.group(2)))
        if m.group(3) is not None:
            return _del_pezzo(int(m.group(3)))
        return _enriques()
    return _custom_base(spec)


def _custom_base(data: Mapping) -> BaseSurface:
    try:
        names = tuple(str(x) for x in data["divisor_names"])
        pairing = tuple(_vec(row) for row in data["pairing"])
        c1 = _vec(data["c1"])
        c2 = as_fraction(data["c2"])
        gens = tuple(_vec(g) for g in data.get("effective_generators", ()))
    except KeyError as exc:
        raise InconsistentCustomLattice(f"custom lattice misses key {exc.args[0]!r}") from None
    n = len(names)
    if len(pairing) != n or any(len(r) != n for r in pairing):
        raise InconsistentCustomLattice("pairing must be h11 x h11")
    if any(pairing[i][j] != pairing[j][i] for i in range(n) for j in range(n)):
        raise InconsistentCustomLattice("pairing is not symmetric")
    if len(c1) != n or any(len(g) != n for g in gens):
        raise InconsistentCustomLattice("c1/generator length differs from h11")
    if not gens:
        raise InconsistentCustomLattice("effective_generators must be nonempty")
    return BaseSurface(
        name=str(data.get("name", "custom")),
        divisor_names=names,
        pairing=pairing,
        c1=c1,
        c2=c2,
        effective_generators=gens,
    )


def catalog_names() -> list[str]:
    return ["P2"] + [f"F{m}" for m in range(4)] + [f"dP{k}" for k in range(1, 9)]


# --------------------------------------------------------------------------
# effectivity


def _solve(matrix, rhs):
    """Exact Gauss-Jordan solve of a square nonsingular system."""
    n = len(matrix)
    a = [list(map(Fraction, row)) + [Fraction(r)] for row, r in zip(matrix, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return tuple(a[r][n] for r in range(n))


def effective_check(base: BaseSurface, divisor: Sequence) -> EffectivityResult:
    """Membership of ``divisor`` in the effective cone of ``base``, with a certificate."""
    d = _vec(divisor)
    if len(d) != base.h11:
        raise ValueError("divisor length differs from h11")
    if base.cone_kind == "positive":
        if all(x == 0 for x in d):
            return EffectivityResult(True, witness={"square": Fraction(0), "degree": Fraction(0)})
        sq = base.square(d)
        deg = base.dot(d, base.ample)
        return EffectivityResult(sq >= 0 and deg > 0, witness={"square": sq, "degree": deg})
    res = cone_membership(base.effective_generators, d)
    if res.member:
        return EffectivityResult(True, combination=res.combination)
    try:
        sep = _solve(base.pairing, res.separator)
    except ZeroDivisionError:
        sep = None
    return EffectivityResult(False, separator=sep, witness={"functional": res.separator})


# --------------------------------------------------------------------------
# fibrations


@dataclass(frozen=True, eq=False)
class FibrationModel:
    kind: str
    base: BaseSurface | BaseCurve
    ring: RingPresentation
    base_ring: RingPresentation
    extra_names: tuple[str, ...] = ()
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    # distinguished classes
    @property
    def one(self) -> GradedClass:
        return self.ring.one()

    @property
    def theta(self) -> GradedClass:
        return self.ring.element("Θ")

    @property
    def fiber(self) -> GradedClass:
        return self.ring.element("f")

    @property
    def point(self) -> GradedClass:
        return self.ring.element("pt" if self.kind == CY3 else "w")

    @property
    def divisor_names(self) -> tuple[str, ...]:
        return self.base.divisor_names if self.kind == CY3 else ()

    def require(self, kind: str):
        if self.kind != kind:
            raise WrongKind(f"operation needs a {kind} model, got {self.kind}")

    def pull_divisor(self, vec: Sequence) -> GradedClass:
        """p*D for a base divisor given by its coefficient vector."""
        self.require(CY3)
        return self.ring.from_dict({f"p*{n}": as_fraction(c) for n, c in zip(self.base.divisor_names, vec)})

    def theta_times(self, vec: Sequence) -> GradedClass:
        """Θ·p*D."""
        self.require(CY3)
        return self.ring.from_dict({f"Θ·p*{n}": as_fraction(c) for n, c in zip(self.base.divisor_names, vec)})

    @property
    def c1(self) -> GradedClass:
        """p*K̄: p*c1(B) on a threefold, e·f on a surface."""
        if self.kind == CY3:
            return self.pull_divisor(self.base.c1)
        return self.fiber * self.base.e

    def pullback(self, a: GradedClass) -> GradedClass:
        if a.ring is not self.base_ring:
            raise ValueError("class does not live on the base")
        out = {"1": a["1"]}
        if self.kind == CY3:
            for n in self.base.divisor_names:
                out[f"p*{n}"] = a[n]
            out["f"] = a["pt"]
        else:
            out["f"] = a["pt"]
        return self.ring.from_dict(out)

    def push(self, a: GradedClass) -> GradedClass:
        return push_to_base(self, a)

    def base_divisor(self, vec: Sequence) -> GradedClass:
        return self.base_ring.from_dict(dict(zip(self.base.divisor_names, _vec(vec))))

    def theta_part(self, a: GradedClass) -> Vector:
        """Coefficient vector of the Θ·p*D_i components."""
        return tuple(a[f"Θ·p*{n}"] for n in self.base.divisor_names)

    def pullback_part(self, a: GradedClass) -> Vector:
        return tuple(a[f"p*{n}"] for n in self.base.divisor_names)


def _base_surface_ring(base: BaseSurface) -> RingPresentation:
    names = base.divisor_names
    products = {}
    for i, j in itertools.combinations_with_replacement(range(base.h11), 2):
        products[(names[i], names[j])] = {"pt": base.pairing[i][j]}
    return RingPresentation([["1"], list(names), ["pt"]], products, name=f"A({base.name})")


def _cy3_ring(base: BaseSurface) -> RingPresentation:
    names = base.divisor_names
    r = base.h11
    pd = [f"p*{n}" for n in names]
    tpd = [f"Θ·p*{n}" for n in names]
    c1 = base.c1
    G = base.pairing
    c1_dot = [sum((G[i][j] * c1[j] for j in range(r)), Fraction(0)) for i in range(r)]
    products: dict = {}
    products[("Θ", "Θ")] = {tpd[i]: -c1[i] for i in range(r)}
    for i in range(r):
        products[("Θ", pd[i])] = {tpd[i]: 1}
        for j in range(i, r):
            products[(pd[i], pd[j])] = {"f": G[i][j]}
        products[("Θ", tpd[i])] = {"pt": -c1_dot[i]}
        for j in range(r):
            products[(pd[i], tpd[j])] = {"pt": G[i][j]}
    products[("Θ", "f")] = {"pt": 1}
    return RingPresentation(
        [["1"], ["Θ"] + pd, tpd + ["f"], ["pt"]], products, name=f"A(X/{base.name})"
    )


def _surface_ring(curve: BaseCurve, extras: Mapping | None) -> tuple[RingPresentation, tuple[str, ...]]:
    extras = dict(extras or {})
    names = tuple(extras.keys())
    products = {
        ("Θ", "Θ"): {"w": -curve.e},
        ("Θ", "f"): {"w": 1},
        ("f", "f"): {"w": 0},
    }
    for n, pairs in extras.items():
        for other, value in pairs.items():
            if other not in ("Θ", "f") and other not in extras:
                raise ValueError(f"extra class {n} pairs with unknown class {other}")
            products[(n, other)] = {"w": as_fraction(value)}
    ring = RingPresentation([["1"], ["Θ", "f", *names], ["w"]], products, name=f"A(S/g={curve.genus},e={curve.e})")
    return ring, names


def build_fibration(base, extras: Mapping | None = None) -> FibrationModel:
    """Presented intersection ring of the elliptic fibration over ``base``.

    ``extras`` (surface case only) declares additional H² classes as
    ``{name: {other_name: pairing}}``, pairings against Θ, f or other extras.
    """
    if isinstance(base, BaseCurve):
        ring, names = _surface_ring(base, extras)
        base_ring = RingPresentation([["1"], ["pt"]], {}, name=f"A(curve g={base.genus})")
        return FibrationModel(SURFACE, base, ring, base_ring, names)
    base = build_base(base)
    return FibrationModel(CY3, base, _cy3_ring(base), _base_surface_ring(base))


def elliptic_surface(genus: int = 0, e: int = 1, extras: Mapping | None = None) -> FibrationModel:
    return build_fibration(BaseCurve(genus, e), extras)


def push_to_base(X: FibrationModel, a: GradedClass) -> GradedClass:
    """p_*: lowers codimension by one; Θ -> 1, Θ·p*D -> D, pt -> pt_B, pullbacks -> 0."""
    if a.ring is not X.ring:
        raise ValueError("class does not live on this fibration")
    if X.kind == CY3:
        out = {"1": a["Θ"], "pt": a["pt"]}
        for n in X.base.divisor_names:
            out[n] = a[f"Θ·p*{n}"]
        return X.base_ring.from_dict(out)
    # surface: a divisor pushes to its fibre degree, the point class to pt_B
    ring = X.ring
    deg = Fraction(0)
    for name in ("Θ", "f", *X.extra_names):
        c = a[name]
        if c:
            deg += c * (ring.element(name) * X.fiber).integrate()
    return X.base_ring.from_dict({"1": deg, "pt": a["w"]})


# --------------------------------------------------------------------------
# Todd classes


def todd_base(X: FibrationModel) -> GradedClass:
    B = X.base_ring
    if X.kind == CY3:
        base = X.base
        c1 = X.base_divisor(base.c1)
        return B.one() + c1 * Fraction(1, 2) + B.element("pt", (base.c1_squared + base.c2) / 12)
    return B.one() + B.element("pt", Fraction(X.base.euler, 2))


def todd_relative(X: FibrationModel) -> GradedClass:
    """Todd class of the virtual relative tangent bundle T_{X/B}."""
    if "td_rel" in X._cache:
        return X._cache["td_rel"]
    if X.kind == CY3:
        c1 = X.c1
        th = X.theta
        td = (
            X.one
            - c1 * Fraction(1, 2)
            + (c1 * c1 * 13 + th * c1 * 12) * Fraction(1, 12)
            - th * c1 * c1 * Fraction(1, 2)
        )
    else:
        e = X.base.e
        td = X.one - X.fiber * Fraction(e, 2) + X.point * e
    X._cache["td_rel"] = td
    return td


def todd_total(X: FibrationModel) -> GradedClass:
    """td(X) = td(T_{X/B}) · p*td(B)."""
    if "td" not in X._cache:
        X._cache["td"] = todd_relative(X) * X.pullback(todd_base(X))
    return X._cache["td"]


def c2_tangent(X: FibrationModel) -> GradedClass:
    X.require(CY3)
    td = todd_total(X)
    if not td.component(1).is_zero():
        raise WrongKind("total space is not Calabi-Yau (c1(X) != 0)")
    return td.component(2) * 12


def c2_tangent_formula(X: FibrationModel) -> GradedClass:
    """12Θ·p*c1 + (11 c1² + c2)_B f, written out directly from the base data."""
    X.require(CY3)
    b = X.base
    return X.theta_times(b.c1) * 12 + X.fiber * (11 * b.c1_squared + b.c2)
