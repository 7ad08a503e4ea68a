"""Hilbert polynomials, Simpson slopes and the numeric stability fragments on elliptic surfaces."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial, gcd, lcm
from typing import Sequence

from .errors import NonPositiveRank, ZeroRank, ZeroSupportDegree
from .fm import FORWARD, INVERSE, ChernData2, ChernData3, fm_surface
from .geometry import SURFACE, FibrationModel, todd_total
from .ring import GradedClass, as_fraction


@dataclass(frozen=True, eq=False)
class Polarization:
    H: GradedClass

    @classmethod
    def surface(cls, X: FibrationModel, a, b) -> "Polarization":
        """H = aΘ + b f on an elliptic surface, a > 0 and b > 0."""
        X.require(SURFACE)
        a, b = as_fraction(a), as_fraction(b)
        if a <= 0 or b <= 0:
            raise ValueError("surface polarization needs a > 0 and b > 0")
        return cls(X.theta * a + X.fiber * b)


def _trim(coeffs: Sequence[Fraction]) -> tuple:
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class HilbertData:
    """P(m) = Σ coeffs[k] m^k, lowest degree first, trailing zeros trimmed."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trim(as_fraction(c) for c in self.coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    @property
    def r(self) -> Fraction:
        s = self.degree
        return Fraction(0) if s < 0 else self.coeffs[s] * factorial(s)

    @property
    def d(self) -> Fraction:
        s = self.degree
        return Fraction(0) if s < 1 else self.coeffs[s - 1] * factorial(s - 1)

    def __call__(self, m) -> Fraction:
        m = as_fraction(m)
        return sum((c * m**k for k, c in enumerate(self.coeffs)), Fraction(0))

    def __add__(self, other: "HilbertData") -> "HilbertData":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return HilbertData(tuple(x + y for x, y in zip(a, b)))

    def scale(self, c) -> "HilbertData":
        c = as_fraction(c)
        return HilbertData(tuple(c * x for x in self.coeffs))

    def __str__(self):
        terms = [f"({c})*m^{k}" for k, c in reversed(list(enumerate(self.coeffs))) if c]
        return " + ".join(terms) if terms else "0"


def _as_class(E, X: FibrationModel) -> GradedClass:
    if isinstance(E, (ChernData2, ChernData3)):
        return E.to_class(X)
    return E


def hilbert_polynomial(E, X: FibrationModel, H: Polarization) -> HilbertData:
    """χ(E(mH)) = ∫ ch(E) e^{mH} td(X), expanded in powers of m."""
    ch = _as_class(E, X) * todd_total(X)
    top = X.ring.top_degree
    coeffs = []
    power = X.one
    for k in range(top + 1):
        coeffs.append((ch * power).integrate() / factorial(k))
        power = power * H.H
    return HilbertData(tuple(coeffs))


def reduced_and_slope(P: HilbertData) -> tuple[HilbertData, Fraction]:
    r = P.r
    if r == 0:
        raise ZeroRank("reduced polynomial needs r(E) != 0")
    return P.scale(1 / r), P.d / r


def support_class(E, X: FibrationModel) -> GradedClass:
    """Reduced support cycle guessed from the lowest nonvanishing Chern component.

    Full support gives the fundamental class.  Otherwise the component is
    divided by the gcd of its coefficients, which is right when the reduced
    support class is primitive; pass ``support`` explicitly when it is not.
    """
    ch = _as_class(E, X)
    if ch.degree0() != 0:
        return X.one
    for k in range(1, X.ring.top_degree + 1):
        part = ch.component(k)
        if not part.is_zero():
            nums = [abs(c.numerator) for c in part.coeffs if c]
            dens = [c.denominator for c in part.coeffs if c]
            content = Fraction(gcd(*nums), lcm(*dens))
            return part / content
    return X.ring.zero()


def polarized_rank(E, X: FibrationModel, H: Polarization, support: GradedClass | None = None) -> Fraction:
    """r(E) / deg_H(Supp E); ``support`` overrides the inferred support cycle."""
    supp = support if support is not None else support_class(E, X)
    codim = next((k for k in range(X.ring.top_degree + 1) if not supp.component(k).is_zero()), None)
    if codim is None:
        raise ZeroSupportDegree("empty support")
    deg = (supp * H.H ** (X.ring.top_degree - codim)).integrate()
    if deg == 0:
        raise ZeroSupportDegree("support has H-degree zero")
    return hilbert_polynomial(E, X, H).r / deg


def poly_compare(p: Sequence, q: Sequence) -> str:
    """Order for m >> 0: compare coefficients from the top degree down."""
    p, q = [as_fraction(x) for x in p], [as_fraction(x) for x in q]
    n = max(len(p), len(q))
    p += [Fraction(0)] * (n - len(p))
    q += [Fraction(0)] * (n - len(q))
    for a, b in zip(reversed(p), reversed(q)):
        if a != b:
            return "<" if a < b else ">"
    return "="


@dataclass(frozen=True)
class TransformedLine:
    linear: Fraction
    constant: Fraction

    @property
    def slope(self) -> Fraction | None:
        return None if self.linear == 0 else self.constant / self.linear

    def as_hilbert(self) -> HilbertData:
        return HilbertData((self.constant, self.linear))


def transformed_hilbert_line(n, c, s, e, c1B, a, b) -> TransformedLine:
    """χ(F̂(mH)) for F of relative degree 0, H = aΘ + b f."""
    n, c, s, e, c1B, a, b = (as_fraction(v) for v in (n, c, s, e, c1B, a, b))
    if a <= 0:
        raise ValueError("a must be positive")
    return TransformedLine(n * b - n * a * e - a * s, c - n * e + n * c1B / 2)


def transformed_class(E: ChernData2, X: FibrationModel) -> ChernData2:
    """ch of the WIT1 transform F̂ = S¹(F): minus the cohomological transform."""
    return -fm_surface(E, X, FORWARD)


@dataclass(frozen=True)
class SurfaceInvariants:
    rank: Fraction
    d: Fraction
    c: Fraction
    s: Fraction


def spectral_surface_invariants(n, ell, r, e, c1B) -> SurfaceInvariants:
    """Invariants (rk, d, c, s) of the transform of a rank-one sheaf on a spectral curve from the closed formula (its s disagrees with the transform)."""
    n = as_fraction(n)
    if n < 1:
        raise NonPositiveRank("n must be >= 1")
    ell, r, e, c1B = (as_fraction(v) for v in (ell, r, e, c1B))
    return SurfaceInvariants(n, Fraction(0), n * e + r - n * c1B / 2, ell - n * e)


def spectral_surface_invariants_by_transform(n, ell, r, X: FibrationModel) -> SurfaceInvariants:
    """Same invariants obtained by running the inverse transform on i_*L.

    The spectral curve is C = nΘ + k f with C·Θ = ℓ, and ch2(i_*L) follows
    from χ(L) = r by Riemann-Roch on X.
    """
    X.require(SURFACE)
    n, ell, r = (as_fraction(v) for v in (n, ell, r))
    e = X.base.e
    k = ell + n * e
    C = X.theta * n + X.fiber * k
    td1 = todd_total(X).component(1)
    ch2 = r - (C * td1).integrate()
    out = fm_surface(ChernData2(0, C, ch2), X, INVERSE)
    return SurfaceInvariants(out.n, out.d, out.c, out.s)


# --------------------------------------------------------------------------
# experimental: destabilising-subsheaf inequality


def destabilizing_numerator(inv: Sequence, sub: Sequence, e, c1B, a, b) -> Fraction:
    """Numerator of μ(Ĝ) - μ(F̂) over positive denominators; positive means destabilising.

    ``inv`` and ``sub`` are (n, c, s) of F and of the subsheaf transform.
    Marked experimental: it mirrors the slope comparison, nothing more.
    """
    n, c, s = (as_fraction(v) for v in inv)
    nb_, cb, sb = (as_fraction(v) for v in sub)
    e, c1B, a, b = (as_fraction(v) for v in (e, c1B, a, b))
    F = transformed_hilbert_line(n, c, s, e, c1B, a, b)
    G = transformed_hilbert_line(nb_, cb, sb, e, c1B, a, b)
    return G.constant * F.linear - F.constant * G.linear


def destabilizing_numerator_expanded(inv, sub, e, c1B, a, b) -> Fraction:
    n, c, s = (as_fraction(v) for v in inv)
    nb_, cb, sb = (as_fraction(v) for v in sub)
    e, c1B, a, b = (as_fraction(v) for v in (e, c1B, a, b))
    return b * (n * cb - nb_ * c) + a * (
        e * (nb_ * c - n * cb) + c * sb - cb * s + e * (nb_ * s - n * sb) + c1B * (n * sb - nb_ * s) / 2
    )


def destabilizing_expression_variant(inv, sub, e, c1B, a, b) -> Fraction:
    """Rearranged inequality with a flipped b-term and unweighted cross term; differs from the slope numerator."""
    n, c, s = (as_fraction(v) for v in inv)
    nb_, cb, sb = (as_fraction(v) for v in sub)
    e, c1B, a, b = (as_fraction(v) for v in (e, c1B, a, b))
    return (nb_ * c - n * cb) * b + a * (
        n * cb - nb_ * c + c * sb - cb * s + e * (nb_ * s - n * sb) + c1B * (n * sb - nb_ * s) / 2
    )


def b0_scan(inv, subs: Sequence, e, c1B, a, b_max: int) -> int | None:
    """Smallest integer b0 <= b_max with no listed subsheaf destabilising for all b in [b0, b_max].

    Purely empirical over the user-supplied subsheaf invariants; not a bound.
    """
    bad = [b for b in range(1, b_max + 1) if any(destabilizing_numerator(inv, sub, e, c1B, a, b) > 0 for sub in subs)]
    if not bad:
        return 1
    return bad[-1] + 1 if bad[-1] < b_max else None
