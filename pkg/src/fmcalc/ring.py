"""Truncated graded-commutative rings over exact rationals.

Every cohomology computation in the package happens in a :class:`RingPresentation`:
a finite basis graded by complex codimension (``0 .. top_degree``) together with
a multiplication table on basis pairs.  Elements are :class:`GradedClass`
instances whose coefficients are :class:`fractions.Fraction` (or
:class:`QQi` when a complex Kähler parameter is involved).  Nothing here ever
touches floating point.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import factorial
from typing import Iterable, Mapping, Sequence, Union

from .errors import NotNilpotent, NotUnitOne, PresentationMismatch


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction; reject floats."""
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot use {value!r} as an exact rational")


class QQi:
    """Gaussian rational ``re + i*im`` with exact parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=Fraction(0), im=Fraction(0)):
        object.__setattr__(self, "re", as_fraction(re))
        object.__setattr__(self, "im", as_fraction(im))

    @classmethod
    def _raw(cls, re: Fraction, im: Fraction) -> "QQi":
        out = object.__new__(cls)
        object.__setattr__(out, "re", re)
        object.__setattr__(out, "im", im)
        return out

    def __setattr__(self, name, value):
        raise AttributeError("QQi is immutable")

    def __repr__(self):
        return f"QQi(re={self.re!r}, im={self.im!r})"

    def __reduce__(self):
        return (QQi, (self.re, self.im))

    @staticmethod
    def lift(x) -> "QQi":
        if isinstance(x, QQi):
            return x
        return QQi._raw(as_fraction(x), Fraction(0))

    def __add__(self, other):
        if isinstance(other, QQi):
            return QQi._raw(self.re + other.re, self.im + other.im)
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return QQi._raw(self.re + other, self.im)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return QQi._raw(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-QQi.lift(other))

    def __rsub__(self, other):
        return QQi.lift(other) - self

    def __mul__(self, other):
        if isinstance(other, QQi):
            return QQi._raw(self.re * other.re - self.im * other.im, self.re * other.im + self.im * other.re)
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return QQi._raw(self.re * other, self.im * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = QQi.lift(other)
        norm = o.re * o.re + o.im * o.im
        return self * QQi(o.re / norm, -o.im / norm)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, QQi)):
            o = QQi.lift(other)
            return self.re == o.re and self.im == o.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im)) if self.im else hash(self.re)

    def __str__(self):
        if not self.im:
            return str(self.re)
        sign = "+" if self.im >= 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


Scalar = Union[Fraction, QQi]


def _coerce_scalar(value):
    if isinstance(value, QQi):
        return value
    return as_fraction(value)


class RingPresentation:
    """A finite graded ring given by basis names and a multiplication table.

    ``basis_by_degree[d]`` lists the basis names of codimension ``d``; degree 0
    must hold exactly one element, the unit.  ``products`` maps a pair of basis
    names to a ``{name: coefficient}`` dict.  Pairs involving the unit are
    implicit, one ordering of each pair suffices, and absent pairs (or pairs
    whose degree exceeds ``top_degree``) multiply to zero.
    """

    def __init__(
        self,
        basis_by_degree: Sequence[Sequence[str]],
        products: Mapping[tuple, Mapping[str, object]],
        name: str = "",
    ):
        if len(basis_by_degree) == 0 or len(basis_by_degree[0]) != 1:
            raise ValueError("degree 0 must contain exactly the unit")
        self.name = name
        self.top_degree = len(basis_by_degree) - 1
        self.basis = tuple(b for layer in basis_by_degree for b in layer)
        self.degrees = tuple(d for d, layer in enumerate(basis_by_degree) for _ in layer)
        if len(set(self.basis)) != len(self.basis):
            raise ValueError("duplicate basis names")
        self.index = {b: i for i, b in enumerate(self.basis)}
        self.unit_name = self.basis[0]
        self.point_indices = tuple(i for i, d in enumerate(self.degrees) if d == self.top_degree)

        n = len(self.basis)
        table: dict[tuple[int, int], tuple] = {}
        for (a, b), result in products.items():
            i, j = self.index[a], self.index[b]
            target = self.degrees[i] + self.degrees[j]
            terms = []
            for name_k, c in result.items():
                k = self.index[name_k]
                if self.degrees[k] != target:
                    raise ValueError(f"{a}*{b} -> {name_k} breaks the grading")
                c = as_fraction(c)
                if c:
                    terms.append((k, c))
            if target > self.top_degree:
                terms = []
            table[(i, j)] = tuple(terms)
            table[(j, i)] = tuple(terms)
        for i in range(n):
            table[(0, i)] = ((i, Fraction(1)),)
            table[(i, 0)] = ((i, Fraction(1)),)
        # dense lookup; missing pairs multiply to zero
        self._mult = [[table.get((i, j), ()) for j in range(n)] for i in range(n)]

    def __repr__(self):
        return f"RingPresentation({self.name or '?'}, basis={list(self.basis)})"

    def __len__(self):
        return len(self.basis)

    # construction helpers ------------------------------------------------
    def zero(self) -> "GradedClass":
        return GradedClass(self, (Fraction(0),) * len(self.basis))

    def one(self) -> "GradedClass":
        return self.element(self.unit_name)

    def element(self, name: str, coefficient=1) -> "GradedClass":
        coeffs = [Fraction(0)] * len(self.basis)
        coeffs[self.index[name]] = _coerce_scalar(coefficient)
        return GradedClass(self, tuple(coeffs))

    def from_dict(self, data: Mapping[str, object]) -> "GradedClass":
        coeffs = [Fraction(0)] * len(self.basis)
        for name, c in data.items():
            coeffs[self.index[name]] = _coerce_scalar(c)
        return GradedClass(self, tuple(coeffs))

    def from_vector(self, values: Sequence) -> "GradedClass":
        if len(values) != len(self.basis):
            raise ValueError("vector length does not match the basis")
        return GradedClass(self, tuple(_coerce_scalar(v) for v in values))

    def basis_elements(self, degree: int | None = None) -> list["GradedClass"]:
        return [
            self.element(b)
            for b, d in zip(self.basis, self.degrees)
            if degree is None or d == degree
        ]

    # structure checks -----------------------------------------------------
    def commutativity_failures(self) -> list[tuple[str, str]]:
        out = []
        for x, y in itertools.combinations(self.basis_elements(), 2):
            if x * y != y * x:
                out.append((x.leading_name(), y.leading_name()))
        return out

    def associativity_failures(self) -> list[tuple[str, str, str]]:
        """Exhaustively compare (xy)z with x(yz) on all basis triples."""
        elems = self.basis_elements()
        out = []
        for x, y, z in itertools.product(elems, repeat=3):
            if (x * y) * z != x * (y * z):
                out.append((x.leading_name(), y.leading_name(), z.leading_name()))
        return out

    def grading_ok(self) -> bool:
        for i, j in itertools.product(range(len(self.basis)), repeat=2):
            for k, _ in self._mult[i][j]:
                if self.degrees[k] != self.degrees[i] + self.degrees[j]:
                    return False
        return True


class GradedClass:
    """Immutable element of a :class:`RingPresentation`."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring: RingPresentation, coeffs: tuple):
        self.ring = ring
        self.coeffs = coeffs

    # arithmetic -----------------------------------------------------------
    def _check(self, other: "GradedClass"):
        if other.ring is not self.ring:
            raise PresentationMismatch(
                f"classes live in different rings ({self.ring.name!r} vs {other.ring.name!r})"
            )

    def __add__(self, other):
        if not isinstance(other, GradedClass):
            if other == 0:
                return self
            other = self.ring.one() * _coerce_scalar(other)
        self._check(other)
        return GradedClass(self.ring, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return GradedClass(self.ring, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, GradedClass):
            c = _coerce_scalar(other)
            return GradedClass(self.ring, tuple(a * c for a in self.coeffs))
        self._check(other)
        ring = self.ring
        out = [Fraction(0)] * len(ring.basis)
        mult = ring._mult
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            row = mult[i]
            for j, b in enumerate(other.coeffs):
                terms = row[j]
                if not b or not terms:
                    continue
                ab = a * b
                for k, c in terms:
                    out[k] = out[k] + (ab if c == 1 else ab * c)
        return GradedClass(ring, tuple(out))

    def __rmul__(self, other):
        return self * other

    def __truediv__(self, other):
        return self * (1 / _coerce_scalar(other) if not isinstance(other, QQi) else QQi(1) / other)

    def __pow__(self, k: int):
        result = self.ring.one()
        for _ in range(k):
            result = result * self
        return result

    def __eq__(self, other):
        if isinstance(other, GradedClass):
            return other.ring is self.ring and all(a == b for a, b in zip(self.coeffs, other.coeffs))
        if other == 0:
            return self.is_zero()
        return NotImplemented

    def __hash__(self):
        return hash((id(self.ring), self.coeffs))

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.coeffs)

    # access ---------------------------------------------------------------
    def __getitem__(self, name: str):
        return self.coeffs[self.ring.index[name]]

    def component(self, degree: int) -> "GradedClass":
        degs = self.ring.degrees
        return GradedClass(
            self.ring,
            tuple(a if d == degree else Fraction(0) for a, d in zip(self.coeffs, degs)),
        )

    def degree0(self):
        return self.coeffs[0]

    def integrate(self):
        """Coefficient of the point class; zero in all other degrees."""
        pts = self.ring.point_indices
        if len(pts) != 1:
            raise ValueError("ring has no unique point class")
        return self.coeffs[pts[0]]

    def to_dict(self) -> dict:
        return {b: a for b, a in zip(self.ring.basis, self.coeffs) if a != 0}

    def leading_name(self) -> str:
        nz = [b for b, a in zip(self.ring.basis, self.coeffs) if a != 0]
        return nz[0] if len(nz) == 1 else repr(self)

    def __repr__(self):
        terms = []
        for b, a in zip(self.ring.basis, self.coeffs):
            if a == 0:
                continue
            if b == self.ring.unit_name:
                terms.append(str(a))
            elif a == 1:
                terms.append(b)
            else:
                terms.append(f"({a})*{b}")
        return " + ".join(terms) if terms else "0"

    # power series ---------------------------------------------------------
    def _series(self, coefficients: Iterable) -> "GradedClass":
        """Evaluate sum_k c_k * self**k, truncated by nilpotency."""
        result = self.ring.zero()
        power = self.ring.one()
        for k, c in enumerate(coefficients):
            if k > self.ring.top_degree:
                break
            if c:
                result = result + power * c
            power = power * self
        return result

    def exp(self) -> "GradedClass":
        if self.degree0() != 0:
            raise NotNilpotent("exp needs a class without degree-0 part")
        return self._series(Fraction(1, factorial(k)) for k in range(self.ring.top_degree + 1))

    def sqrt(self) -> "GradedClass":
        if self.degree0() != 1:
            raise NotUnitOne("sqrt needs degree-0 part equal to 1")
        x = self - self.ring.one()
        coeffs = []
        c = Fraction(1)
        for k in range(self.ring.top_degree + 1):
            coeffs.append(c)
            c = c * (Fraction(1, 2) - k) / (k + 1)
        return x._series(coeffs)

    def inverse(self) -> "GradedClass":
        u = self.degree0()
        if u == 0:
            raise NotNilpotent("class with zero degree-0 part is not invertible")
        inv_u = QQi(1) / u if isinstance(u, QQi) else 1 / u
        x = self * inv_u - self.ring.one()
        return x._series((-1) ** k for k in range(self.ring.top_degree + 1)) * inv_u

    def dual(self) -> "GradedClass":
        """Sign twist (-1)^d on the degree-d part (Chern character of the derived dual)."""
        return GradedClass(
            self.ring,
            tuple(a if d % 2 == 0 else -a for a, d in zip(self.coeffs, self.ring.degrees)),
        )


# functional aliases --------------------------------------------------------
def add(a: GradedClass, b: GradedClass) -> GradedClass:
    return a + b


def mul(a: GradedClass, b: GradedClass) -> GradedClass:
    return a * b


def exp_nilpotent(a: GradedClass) -> GradedClass:
    return a.exp()


def sqrt_unit(a: GradedClass) -> GradedClass:
    return a.sqrt()


def integrate(a: GradedClass):
    return a.integrate()
