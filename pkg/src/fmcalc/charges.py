"""D-brane charges: effective charges, T-duality matrix, monodromies and central charges."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Sequence

from .errors import DimensionMismatch
from .fm import FORWARD, ChernData3, fm_cy3
from .geometry import CY3, FibrationModel, c2_tangent, todd_total
from .ring import GradedClass, QQi, RingPresentation, as_fraction


def _vec(values) -> tuple:
    return tuple(as_fraction(v) for v in values)


# --------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class ChargeVector:
    n6: Fraction
    n4: tuple
    n2: tuple
    n0: Fraction

    def __post_init__(self):
        object.__setattr__(self, "n6", as_fraction(self.n6))
        object.__setattr__(self, "n0", as_fraction(self.n0))
        object.__setattr__(self, "n4", _vec(self.n4))
        object.__setattr__(self, "n2", _vec(self.n2))
        if len(self.n4) != len(self.n2):
            raise DimensionMismatch("n4 and n2 must have the same length")

    @property
    def h11(self) -> int:
        return len(self.n4)

    def as_tuple(self) -> tuple:
        return (self.n6, *self.n4, *self.n2, self.n0)

    @classmethod
    def from_tuple(cls, values: Sequence) -> "ChargeVector":
        v = _vec(values)
        h = (len(v) - 2) // 2
        if len(v) != 2 * h + 2:
            raise DimensionMismatch("charge tuple has the wrong length")
        return cls(v[0], v[1 : 1 + h], v[1 + h : 1 + 2 * h], v[-1])

    def __add__(self, other):
        return ChargeVector.from_tuple([a + b for a, b in zip(self.as_tuple(), other.as_tuple())])

    def __neg__(self):
        return ChargeVector.from_tuple([-a for a in self.as_tuple()])

    def scale(self, c):
        c = as_fraction(c)
        return ChargeVector.from_tuple([c * a for a in self.as_tuple()])


def _j_ring(k: dict, h: int) -> RingPresentation:
    J = [f"J{a + 1}" for a in range(h)]
    C = [f"C{a + 1}" for a in range(h)]
    products = {}
    for a in range(h):
        for b in range(a, h):
            products[(J[a], J[b])] = {C[c]: k[a, b, c] for c in range(h) if k[a, b, c]}
        for b in range(h):
            if a == b:
                products[(J[a], C[b])] = {"pt": 1}
    return RingPresentation([["1"], J, C, ["pt"]], products, name=f"J-basis(h11={h})")


@dataclass(frozen=True, eq=False)
class PrepotentialData:
    """Large-volume prepotential data in a basis J_a of H²(X).

    ``k`` maps sorted index triples to k_abc; ``c_ab`` defaults to zero.
    ``kappa`` stands for the constant ζ(3)χ/(2(2πi)³) and is carried formally.
    """

    k: dict
    c2J: tuple
    chi: Fraction = Fraction(0)
    c_ab: tuple | None = None
    kappa: str = "κ"
    ring: RingPresentation = field(init=False, repr=False)

    def __post_init__(self):
        c2J = _vec(self.c2J)
        h = len(c2J)
        full = {}
        for (a, b, c) in product(range(h), repeat=3):
            key = tuple(sorted((a, b, c)))
            full[a, b, c] = as_fraction(self.k.get(key, 0))
        for key, val in self.k.items():
            if len(key) != 3 or max(key) >= h or min(key) < 0:
                raise DimensionMismatch(f"k index {key} out of range for h11={h}")
            for perm in product(key, repeat=3):
                if sorted(perm) == sorted(key) and full[perm] != as_fraction(val):
                    raise ValueError(f"k_abc is not symmetric at {key}")
        c_ab = self.c_ab
        if c_ab is None:
            c_ab = tuple((Fraction(0),) * h for _ in range(h))
        c_ab = tuple(_vec(row) for row in c_ab)
        if len(c_ab) != h or any(len(row) != h for row in c_ab):
            raise DimensionMismatch("c_ab must be h11 x h11")
        if any(c_ab[a][b] != c_ab[b][a] for a in range(h) for b in range(h)):
            raise ValueError("c_ab must be symmetric")
        object.__setattr__(self, "k", full)
        object.__setattr__(self, "c2J", c2J)
        object.__setattr__(self, "chi", as_fraction(self.chi))
        object.__setattr__(self, "c_ab", c_ab)
        object.__setattr__(self, "ring", _j_ring(full, h))

    @classmethod
    def from_entries(cls, entries, c2J, chi=0, c_ab=None, kappa="κ") -> "PrepotentialData":
        """``entries`` is an iterable of (a, b, c, value) with 0-based indices."""
        k = {}
        for a, b, c, v in entries:
            key = tuple(sorted((int(a), int(b), int(c))))
            v = as_fraction(v)
            if key in k and k[key] != v:
                raise ValueError(f"conflicting values for k{key}")
            k[key] = v
        return cls(k, c2J, chi, c_ab, kappa)

    @property
    def h11(self) -> int:
        return len(self.c2J)

    def J(self, a: int) -> GradedClass:
        return self.ring.element(f"J{a + 1}")

    def C(self, a: int) -> GradedClass:
        return self.ring.element(f"C{a + 1}")

    @property
    def c2(self) -> GradedClass:
        out = self.ring.zero()
        for b, v in enumerate(self.c2J):
            out = out + self.C(b) * v
        return out

    @property
    def todd(self) -> GradedClass:
        return self.ring.one() + self.c2 / 12

    def divisor(self, coeffs: Sequence) -> GradedClass:
        if len(coeffs) != self.h11:
            raise DimensionMismatch("divisor has the wrong number of components")
        out = self.ring.zero()
        for a, v in enumerate(coeffs):
            out = out + self.J(a) * v
        return out

    def check_class(self, E: GradedClass):
        if E.ring is not self.ring:
            raise DimensionMismatch("class does not live in this prepotential's ring")


@dataclass(frozen=True)
class KahlerPoint:
    t: tuple

    def __post_init__(self):
        object.__setattr__(self, "t", tuple(QQi.lift(v) for v in self.t))

    def shift(self, a: int, by=1) -> "KahlerPoint":
        t = list(self.t)
        t[a] = t[a] + by
        return KahlerPoint(tuple(t))


@dataclass(frozen=True)
class TwistedCharge:
    cls: GradedClass
    coordinates: tuple


# --------------------------------------------------------------------------
# fibration -> prepotential data


def prepotential_from_fibration(X: FibrationModel, chi=None) -> PrepotentialData:
    """J basis (Θ, p*D_1..p*D_r); χ defaults to the Weierstrass value -60 c1².

    Use :func:`to_j_basis` to carry classes of ``X`` into the resulting ring.
    """
    X.require(CY3)
    gens = [X.theta] + [X.pull_divisor(X.base.unit_divisor(i)) for i in range(X.base.h11)]
    h = len(gens)
    k = {}
    for a in range(h):
        for b in range(a, h):
            for c in range(b, h):
                v = (gens[a] * gens[b] * gens[c]).integrate()
                if v:
                    k[a, b, c] = v
    c2 = c2_tangent(X)
    c2J = tuple((c2 * g).integrate() for g in gens)
    if chi is None:
        chi = -60 * X.base.c1_squared
    return PrepotentialData(k, c2J, chi)


def to_j_basis(X: FibrationModel, P: PrepotentialData, ch: GradedClass) -> GradedClass:
    """Rewrite a class on X in P's J basis (H⁴ coordinates via pairing with J_a)."""
    gens = [X.theta] + [X.pull_divisor(X.base.unit_divisor(i)) for i in range(X.base.h11)]
    if len(gens) != P.h11:
        raise DimensionMismatch("prepotential data does not match the fibration")
    out = P.ring.one() * ch.degree0() + P.ring.element("pt") * ch.integrate()
    h1 = ch.component(1)
    h2 = ch.component(2)
    # degree-1: solve in the (Θ, p*D) basis directly; degree-2: pair with J_a
    out = out + P.J(0) * h1["Θ"]
    for i, name in enumerate(X.base.divisor_names):
        out = out + P.J(i + 1) * h1[f"p*{name}"]
    for a, g in enumerate(gens):
        out = out + P.C(a) * (h2 * g).integrate()
    return out


# --------------------------------------------------------------------------
# charge <-> Chern character


def chern_to_charge(E: GradedClass, P: PrepotentialData) -> ChargeVector:
    P.check_class(E)
    h = P.h11
    n6 = E.degree0()
    n4 = tuple(E[f"J{a + 1}"] for a in range(h))
    ch2 = [E[f"C{b + 1}"] for b in range(h)]
    n2 = tuple(ch2[b] - sum(P.c_ab[a][b] * n4[a] for a in range(h)) for b in range(h))
    n0 = -E["pt"] - sum(P.c2J[b] * n4[b] for b in range(h)) / 12
    return ChargeVector(n6, n4, n2, n0)


def charge_to_chern(n: ChargeVector, P: PrepotentialData) -> GradedClass:
    h = P.h11
    if n.h11 != h:
        raise DimensionMismatch(f"charge has h11={n.h11}, prepotential has {h}")
    out = P.ring.one() * n.n6
    for a in range(h):
        out = out + P.J(a) * n.n4[a]
    for b in range(h):
        out = out + P.C(b) * (n.n2[b] + sum(P.c_ab[a][b] * n.n4[a] for a in range(h)))
    ch3 = -n.n0 - sum(P.c2J[b] * n.n4[b] for b in range(h)) / 12
    return out + P.ring.element("pt") * ch3


# --------------------------------------------------------------------------
# central charges


def _tJ(t: KahlerPoint, P: PrepotentialData) -> GradedClass:
    if len(t.t) != P.h11:
        raise DimensionMismatch("Kähler point has the wrong number of components")
    out = P.ring.zero()
    for a, v in enumerate(t.t):
        out = out + P.J(a) * v
    return out


def central_charge_B(E: GradedClass, t: KahlerPoint, P: PrepotentialData) -> QQi:
    """Z(E) = -∫ e^{-tJ} ch(E) (1 + c2/24), with Gaussian-rational coefficients."""
    P.check_class(E)
    weight = (-_tJ(t, P)).exp() * (P.ring.one() + P.c2 / 24)
    return -QQi.lift((weight * E).integrate())


@dataclass(frozen=True)
class PeriodData:
    """Periods ordered like ChargeVector.as_tuple(): Π6, Π4^a, Π2^b, Π0.

    ``formal`` records the κ-multiples left out of ``values``; they cancel from
    the charge contract and are reported only.
    """

    values: tuple
    formal: dict


def period_vector(t: KahlerPoint, P: PrepotentialData) -> PeriodData:
    h = P.h11
    tt = t.t
    k = P.k
    zero = QQi(0)

    cubic = sum((k[a, b, c] * tt[a] * tt[b] * tt[c] for a, b, c in product(range(h), repeat=3)), zero)
    pi6 = cubic / 6 + sum((P.c2J[a] * tt[a] for a in range(h)), zero) / 24
    pi4 = []
    for a in range(h):
        quad = sum((k[a, b, c] * tt[b] * tt[c] for b, c in product(range(h), repeat=2)), zero)
        lin = sum((P.c_ab[a][b] * tt[b] for b in range(h)), zero)
        pi4.append(-quad / 2 + lin + QQi.lift(P.c2J[a] / 24))
    pi2 = [QQi.lift(v) for v in tt]
    pi0 = QQi(1)
    # 2F - t∂F keeps twice the constant term of the prepotential
    formal = {"Π6": f"2{P.kappa}"}
    return PeriodData((pi6, *pi4, *pi2, pi0), formal)


def central_charge_A(n: ChargeVector, t: KahlerPoint, P: PrepotentialData) -> QQi:
    pv = period_vector(t, P).values
    if len(pv) != len(n.as_tuple()):
        raise DimensionMismatch("charge and period vector lengths differ")
    return sum((QQi.lift(a) * p for a, p in zip(n.as_tuple(), pv)), QQi(0))


# --------------------------------------------------------------------------
# monodromies


def euler_pairing(E: GradedClass, todd: GradedClass) -> Fraction:
    return (E * todd).integrate()


def conifold_monodromy(E, X):
    """ch ↦ χ(E)·1 - ch: the ideal-sheaf-of-diagonal kernel in cohomology.

    ``X`` is a CY3 FibrationModel (E ChernData3 or class) or a PrepotentialData
    (E a class in its ring).
    """
    if isinstance(X, PrepotentialData):
        X.check_class(E)
        return X.ring.one() * euler_pairing(E, X.todd) - E
    X.require(CY3)
    cls = E.to_class(X) if isinstance(E, ChernData3) else E
    out = X.one * euler_pairing(cls, todd_total(X)) - cls
    return ChernData3.from_class(X, out) if isinstance(E, ChernData3) else out


def conifold_on_charges(n: ChargeVector, P: PrepotentialData, normalized: bool = True) -> ChargeVector:
    """Induced action on charges; ``normalized`` applies the global sign flip of the shift [1]."""
    out = chern_to_charge(conifold_monodromy(charge_to_chern(n, P), P), P)
    return -out if normalized else out


def lcsl_monodromy(E, D: GradedClass, X: FibrationModel | None = None):
    """Tensoring by O(D): ch ↦ ch·e^D."""
    if isinstance(E, ChernData3):
        if X is None:
            raise ValueError("ChernData3 input needs the fibration model")
        return ChernData3.from_class(X, E.to_class(X) * D.exp())
    return E * D.exp()


def lcsl_on_charges(n: ChargeVector, a: int, P: PrepotentialData, power: int = 1) -> ChargeVector:
    D = P.J(a) * power
    return chern_to_charge(charge_to_chern(n, P) * D.exp(), P)


@dataclass(frozen=True)
class OrbitResult:
    orbit: tuple
    relations: tuple  # (source index, generator name, target index)
    truncated: bool


def monodromy_orbit(
    seed: ChargeVector,
    generators: Sequence[tuple[str, Callable[[ChargeVector], ChargeVector]]],
    max_steps: int,
) -> OrbitResult:
    """Breadth-first closure of ``seed`` under named charge maps, up to ``max_steps`` layers."""
    seen = {seed: 0}
    order = [seed]
    relations = []
    queue = deque([(seed, 0)])
    truncated = False
    while queue:
        node, depth = queue.popleft()
        for name, g in generators:
            image = g(node)
            if image not in seen:
                if depth >= max_steps:
                    truncated = True
                    continue
                seen[image] = len(order)
                order.append(image)
                queue.append((image, depth + 1))
            relations.append((seen[node], name, seen[image]))
    return OrbitResult(tuple(order), tuple(relations), truncated)


# --------------------------------------------------------------------------
# effective charge and T-duality


def effective_charge(E, X: FibrationModel) -> TwistedCharge:
    X.require(CY3)
    ch = E.to_class(X) if isinstance(E, ChernData3) else E
    q = ch * todd_total(X).sqrt()
    return TwistedCharge(q, ChernData3.from_class(X, q).coordinates())


def block_matrix(r: int) -> list[list[Fraction]]:
    """blockdiag([[0,1],[-1,0]]) on the pairs (n,x), (S_i,η_i), (a,s)."""
    size = 2 * r + 4
    M = [[Fraction(0)] * size for _ in range(size)]
    pairs = [(0, 1)] + [(2 + i, 2 + r + i) for i in range(r)] + [(size - 2, size - 1)]
    for i, j in pairs:
        M[i][j] = Fraction(1)
        M[j][i] = Fraction(-1)
    return M


def _matmul(A, B):
    return [[sum((A[i][k] * B[k][j] for k in range(len(B))), Fraction(0)) for j in range(len(B[0]))] for i in range(len(A))]


def _identity(n):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


EFFECTIVE = "effective"
ADIABATIC = "adiabatic"


@dataclass(frozen=True)
class TDualityReport:
    frame: str
    matrix: tuple
    expected: tuple
    x0_columns_match: bool
    full_match: bool
    squares_to_minus_identity: bool
    residual: tuple

    @property
    def ok(self) -> bool:
        return self.x0_columns_match and self.squares_to_minus_identity


def _frame_maps(X: FibrationModel, frame: str):
    K = X.base.c1_squared
    if frame == EFFECTIVE:
        root = todd_total(X).sqrt()
        inv = root.inverse()

        def encode(ch):
            return ChernData3.from_class(X, ch * root).coordinates()

        def decode(coords):
            return ChernData3.from_coordinates(coords).to_class(X) * inv

        def op(ch):
            return fm_cy3(ChernData3.from_class(X, ch), X, FORWARD).to_class(X)

    elif frame == ADIABATIC:
        # half-canonical twist of the transform, rank vector shifted to 1 - (c1²/24) f
        half = (X.c1 / 2).exp()

        def encode(ch):
            c = list(ChernData3.from_class(X, ch).coordinates())
            c[-2] += c[0] * K / 24
            return tuple(c)

        def decode(coords):
            c = list(coords)
            c[-2] -= c[0] * K / 24
            return ChernData3.from_coordinates(c).to_class(X)

        def op(ch):
            return half * fm_cy3(ChernData3.from_class(X, ch), X, FORWARD).to_class(X)

    else:
        raise ValueError(f"unknown frame {frame!r}")
    return encode, decode, op


def tduality_matrix(X: FibrationModel, frame: str = EFFECTIVE) -> TDualityReport:
    """Matrix of the fibrewise transform on charge coordinates (n, x, S, η, a, s).

    ``effective``: conjugation by ch ↦ ch·√td(X).  ``adiabatic``: the transform
    twisted by e^{c1/2} in the basis (1 - (c1²/24) f, Θ, p*D, Θp*D, f, pt).
    Column j is the image of the j-th coordinate vector.
    """
    X.require(CY3)
    r = X.base.h11
    size = 2 * r + 4
    encode, decode, op = _frame_maps(X, frame)
    cols = []
    for j in range(size):
        unit = [Fraction(0)] * size
        unit[j] = Fraction(1)
        cols.append(encode(op(decode(unit))))
    T = [[cols[j][i] for j in range(size)] for i in range(size)]
    M = block_matrix(r)
    residual = [[T[i][j] - M[i][j] for j in range(size)] for i in range(size)]
    x0 = all(T[i][j] == M[i][j] for i in range(size) for j in range(size) if j != 1)
    full = residual == [[0] * size for _ in range(size)]
    sq = _matmul(T, T) == [[-v for v in row] for row in _identity(size)]
    return TDualityReport(
        frame,
        tuple(tuple(row) for row in T),
        tuple(tuple(row) for row in M),
        x0,
        full,
        sq,
        tuple(tuple(row) for row in residual),
    )
