import random
from fractions import Fraction

import pytest
from hypothesis import settings, strategies as st

from fmcalc import ChernData2, ChernData3, build_base, build_fibration, catalog_names, elliptic_surface

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

_ACCEPTANCE_LINES: list[str] = []


def record(criterion: int, ok: bool, detail: str = "") -> None:
    line = f"[acceptance {criterion:>2}] {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
    print(line)
    _ACCEPTANCE_LINES.append(line)


def note(criterion: int, text: str) -> None:
    line = f"[acceptance {criterion:>2}] info  {text}"
    print(line)
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


# models are immutable and cheap to share across tests
_MODELS: dict = {}


def cy3(name: str):
    if name not in _MODELS:
        _MODELS[name] = build_fibration(build_base(name))
    return _MODELS[name]


CATALOG = catalog_names()


def rand_frac(rng: random.Random, num=30, den=8) -> Fraction:
    return Fraction(rng.randint(-num, num), rng.randint(1, den))


def rand_cy3_data(rng: random.Random, r: int) -> ChernData3:
    f = lambda: rand_frac(rng)
    return ChernData3(f(), f(), [f() for _ in range(r)], [f() for _ in range(r)], f(), f())


SURFACE_MODELS = [
    elliptic_surface(0, 1),
    elliptic_surface(0, 2),
    elliptic_surface(1, 0),
    elliptic_surface(2, 3, extras={"E": {"E": -2, "Θ": 0, "f": 0}}),
    elliptic_surface(0, 4, extras={"A": {"A": -1, "f": 0}, "B": {"B": -3, "A": 1}}),
]


def rand_surface_data(rng: random.Random, X) -> ChernData2:
    c1 = X.ring.zero()
    for b in X.ring.basis_elements(1):
        c1 = c1 + b * rand_frac(rng)
    return ChernData2(rand_frac(rng), c1, rand_frac(rng))


fractions = st.fractions(min_value=-50, max_value=50, max_denominator=12)


@pytest.fixture
def rng():
    return random.Random(20261016)
