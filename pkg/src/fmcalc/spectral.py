"""Spectral-cover bundle invariants on elliptic threefolds and a model scanner."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

from .errors import EmptyRange, NonPositiveRank, NotSUn
from .fm import ChernData3, fm_cy3, grr_transform
from .geometry import CY3, FibrationModel, build_base, build_fibration, c2_tangent, effective_check, todd_total
from .ring import GradedClass, as_fraction


def _vec(values) -> tuple:
    return tuple(as_fraction(v) for v in values)


@dataclass(frozen=True)
class SpectralInput:
    """Rank n, spectral class η, twist λ; ``eta_E`` defaults to the SU(n) value n·c1/2."""

    n: int
    eta: tuple
    lam: Fraction
    eta_E: tuple | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise NonPositiveRank(f"rank must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "eta", _vec(self.eta))
        object.__setattr__(self, "lam", as_fraction(self.lam))
        if self.eta_E is not None:
            object.__setattr__(self, "eta_E", _vec(self.eta_E))


@dataclass(frozen=True, eq=False)
class SpectralBundle:
    input: SpectralInput
    ch: ChernData3
    gamma_S: Fraction
    varpi: Fraction
    c1_V: tuple
    c2_V: GradedClass
    c3_V: Fraction
    a_E: Fraction
    s_E: Fraction
    sheaf: ChernData3 = field(repr=False)

    @property
    def is_sun(self) -> bool:
        return all(v == 0 for v in self.c1_V)


@dataclass(frozen=True)
class FiveBraneClass:
    W_B: tuple
    a_f: Fraction
    identity_ok: bool


def gamma_restricted(inp: SpectralInput, X: FibrationModel) -> Fraction:
    b = X.base
    shifted = tuple(e - inp.n * c for e, c in zip(inp.eta, b.c1))
    return -inp.lam * b.dot(inp.eta, shifted)


def varpi(inp: SpectralInput, X: FibrationModel) -> Fraction:
    b = X.base
    n = inp.n
    shifted = tuple(e - n * c for e, c in zip(inp.eta, b.c1))
    return -b.c1_squared * (n**3 - n) / 24 + (inp.lam**2 - Fraction(1, 4)) * n * b.dot(inp.eta, shifted) / 2


def spectral_sheaf(inp: SpectralInput, X: FibrationModel) -> ChernData3:
    """Chern data of i_*L on the spectral cover C = nΘ + p*η."""
    b = X.base
    n = inp.n
    eta_E = inp.eta_E if inp.eta_E is not None else tuple(Fraction(n, 2) * c for c in b.c1)
    g = gamma_restricted(inp, X)
    a_E = g + b.dot(eta_E, inp.eta) / n
    s_E = n * b.c1_squared / 24 + b.square(eta_E) / (2 * n) - varpi(inp, X)
    return ChernData3(0, n, inp.eta, eta_E, a_E, s_E)


def chern_classes(ch: GradedClass) -> tuple[GradedClass, GradedClass, GradedClass]:
    """(c1, c2, c3) from a Chern character via Newton's identities."""
    p1 = ch.component(1)
    p2 = ch.component(2) * 2
    p3 = ch.component(3) * 6
    c1 = p1
    c2 = (c1 * p1 - p2) / 2
    c3 = (c2 * p1 - c1 * p2 + p3) / 3
    return c1, c2, c3


def build_bundle(inp: SpectralInput, X: FibrationModel, route: str = "closed") -> SpectralBundle:
    """V = transform of the spectral sheaf; ``route`` picks closed formulas or the kernel oracle."""
    X.require(CY3)
    sheaf = spectral_sheaf(inp, X)
    if route == "closed":
        V = fm_cy3(sheaf, X)
    elif route == "oracle":
        V = grr_transform(sheaf, X)
    else:
        raise ValueError(f"unknown route {route!r}")
    c1, c2, c3 = chern_classes(V.to_class(X))
    return SpectralBundle(
        input=inp,
        ch=V,
        gamma_S=gamma_restricted(inp, X),
        varpi=varpi(inp, X),
        c1_V=X.pullback_part(c1),
        c2_V=c2,
        c3_V=c3.integrate(),
        a_E=sheaf.a,
        s_E=sheaf.s,
        sheaf=sheaf,
    )


def sun_closed_form(inp: SpectralInput, X: FibrationModel) -> tuple[GradedClass, Fraction]:
    """c2(V) = Θp*η + ϖ f and c3(V) = -2γ|_S written down directly."""
    c2 = X.theta_times(inp.eta) + X.fiber * varpi(inp, X)
    return c2, -2 * gamma_restricted(inp, X)


def five_brane_class(V: SpectralBundle, X: FibrationModel) -> FiveBraneClass:
    if not V.is_sun:
        raise NotSUn("five-brane class needs c1(V) = 0")
    b = X.base
    W_B = tuple(12 * c - e for c, e in zip(b.c1, V.input.eta))
    a_f = b.c2 + 11 * b.c1_squared - V.varpi
    W = X.theta_times(W_B) + X.fiber * a_f
    return FiveBraneClass(W_B, a_f, c2_tangent(X) - V.c2_V == W)


@dataclass(frozen=True)
class AnomalyReport:
    c1_even: bool
    W_B_effective: bool
    a_f_nonneg: bool
    anomaly_identity: bool
    certificate: object = None

    @property
    def passed(self) -> bool:
        return self.c1_even and self.W_B_effective and self.a_f_nonneg and self.anomaly_identity


def _effective(base, W_B):
    # scans revisit the same W_B = 12c1 - η for every (n, λ); memoise on the base
    cache = base.__dict__.setdefault("_effective_cache", {})
    if W_B not in cache:
        cache[W_B] = effective_check(base, W_B)
    return cache[W_B]


def anomaly_check(V: SpectralBundle, X: FibrationModel, W: FiveBraneClass | None = None) -> AnomalyReport:
    c1_even = all(v.denominator == 1 and v.numerator % 2 == 0 for v in V.c1_V)
    if not V.is_sun:
        return AnomalyReport(c1_even, False, False, False)
    W = W or five_brane_class(V, X)
    eff = _effective(X.base, W.W_B)
    return AnomalyReport(c1_even, eff.effective, W.a_f >= 0, W.identity_ok, eff)


@dataclass(frozen=True)
class GenerationCount:
    signed: Fraction
    value: Fraction
    integral: bool


def n_generations(V: SpectralBundle) -> GenerationCount:
    signed = V.c3_V / 2
    value = abs(signed)
    return GenerationCount(signed, value, value.denominator == 1)


def index_by_hrr(V: SpectralBundle, X: FibrationModel) -> Fraction:
    return (V.ch.to_class(X) * todd_total(X)).integrate()


# --------------------------------------------------------------------------
# scanning


@dataclass(frozen=True)
class ScanRow:
    n: int
    eta: tuple
    lam: Fraction
    c2_theta: tuple
    c2_f: Fraction
    c3: Fraction
    W_B: tuple
    a_f: Fraction
    n_gen: Fraction
    anomaly_pass: bool
    identity_ok: bool
    flags: tuple

    def sort_key(self):
        return (self.n, self.eta, self.lam)

    def as_dict(self) -> dict:
        s = str
        return {
            "n": self.n,
            "eta": [s(v) for v in self.eta],
            "lambda": s(self.lam),
            "c2_theta": [s(v) for v in self.c2_theta],
            "c2_f": s(self.c2_f),
            "c3": s(self.c3),
            "W_B": [s(v) for v in self.W_B],
            "a_f": s(self.a_f),
            "N_gen": s(self.n_gen),
            "anomaly_pass": self.anomaly_pass,
            "identity_ok": self.identity_ok,
            "flags": list(self.flags),
        }


def _row(inp: SpectralInput, X: FibrationModel) -> ScanRow:
    V = build_bundle(inp, X)
    W = five_brane_class(V, X)
    rep = anomaly_check(V, X, W)
    gen = n_generations(V)
    c2_theta = X.theta_part(V.c2_V)
    c2_f = V.c2_V["f"]
    flags = []
    if any(v.denominator != 1 for v in c2_theta) or c2_f.denominator != 1:
        flags.append("non-integral-c2")
    if V.c3_V.denominator != 1:
        flags.append("non-integral-c3")
    if not gen.integral:
        flags.append("non-integral-N_gen")
    return ScanRow(
        inp.n, inp.eta, inp.lam, c2_theta, c2_f, V.c3_V, W.W_B, W.a_f, gen.value, rep.passed, W.identity_ok, tuple(flags)
    )


def _rows_for(args):
    base_spec, items = args
    X = build_fibration(build_base(base_spec))
    return [_row(SpectralInput(n, eta, lam), X) for n, eta, lam in items]


def scan_models(
    X: FibrationModel,
    n_values: Iterable[int],
    eta_ranges: Sequence[Iterable],
    lambdas: Iterable,
    target_n_gen=None,
    require_anomaly: bool = True,
    parallel: int = 0,
    base_spec=None,
) -> list[ScanRow]:
    """Enumerate the (n, η, λ) grid; keep rows passing the filters, sorted by (n, η, λ).

    ``eta_ranges`` gives one iterable of coefficients per base divisor.  With
    ``parallel > 1`` the grid is split across processes; ``base_spec`` (a value
    accepted by build_base) is then required to rebuild X in the workers.
    """
    X.require(CY3)
    n_values = sorted({int(n) for n in n_values})
    etas = sorted(product(*[sorted({as_fraction(v) for v in r}) for r in eta_ranges]))
    lambdas = sorted({as_fraction(v) for v in lambdas})
    if not n_values or not lambdas or not etas or len(eta_ranges) != X.base.h11:
        raise EmptyRange("scan ranges must be non-empty and match h11 of the base")
    grid = [(n, eta, lam) for n in n_values for eta in etas for lam in lambdas]
    if parallel and parallel > 1 and base_spec is not None:
        chunks = [grid[i::parallel] for i in range(parallel)]
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            rows = [r for part in pool.map(_rows_for, [(base_spec, c) for c in chunks]) for r in part]
    else:
        rows = [_row(SpectralInput(n, eta, lam), X) for n, eta, lam in grid]
    target = None if target_n_gen is None else as_fraction(target_n_gen)
    kept = [
        r
        for r in rows
        if (not require_anomaly or r.anomaly_pass) and (target is None or r.n_gen == target)
    ]
    return sorted(kept, key=ScanRow.sort_key)
