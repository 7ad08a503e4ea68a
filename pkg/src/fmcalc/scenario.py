"""Scenario files: TOML documents describing a fibration and a list of tasks.

Exact numbers are written as integers or ``"p/q"`` strings; floats are
rejected.  Every table is checked against a fixed key set so typos surface as
:class:`UnknownKey` errors with a dotted location.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import BadFraction, DimensionMismatch, ScenarioError, ScenarioSyntaxError, UnknownCatalogEntry, UnknownKey
from .geometry import BaseCurve, BaseSurface, build_base

SCHEMA_VERSION = 1
FORMATS = ("json", "csv", "text")
TASK_KINDS = (
    "transform",
    "spectral",
    "scan",
    "charges",
    "monodromy",
    "stability",
    "factorization-check",
    "tduality",
)

_FRACTION_RE = re.compile(r"^\s*[+-]?\d+(\s*/\s*\d+)?\s*$")


# --------------------------------------------------------------------------
# scalar helpers


def frac(value, loc: str) -> Fraction:
    if isinstance(value, bool) or isinstance(value, float):
        raise BadFraction(f"expected an exact number, got {value!r}", loc)
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str) and _FRACTION_RE.match(value):
        num, _, den = value.replace(" ", "").partition("/")
        if den and int(den) == 0:
            raise BadFraction("zero denominator", loc)
        return Fraction(int(num), int(den) if den else 1)
    raise BadFraction(f"expected an integer or 'p/q' string, got {value!r}", loc)


def frac_list(value, loc: str, length: int | None = None) -> tuple:
    if not isinstance(value, list):
        raise BadFraction(f"expected a list, got {value!r}", loc)
    out = tuple(frac(v, f"{loc}[{i}]") for i, v in enumerate(value))
    if length is not None and len(out) != length:
        raise DimensionMismatch(f"{loc}: expected {length} entries, got {len(out)}")
    return out


def integer(value, loc: str) -> int:
    v = frac(value, loc)
    if v.denominator != 1:
        raise BadFraction(f"expected an integer, got {value!r}", loc)
    return int(v)


def _table(value, loc: str) -> Mapping:
    if not isinstance(value, Mapping):
        raise ScenarioError(f"expected a table, got {value!r}", loc)
    return value


def _check_keys(table: Mapping, allowed, loc: str, required=()):
    for key in table:
        if key not in allowed:
            raise UnknownKey(f"unknown key {key!r} (allowed: {', '.join(sorted(allowed))})", _join(loc, key))
    for key in required:
        if key not in table:
            raise ScenarioError(f"missing required key {key!r}", loc or "<root>")


def _join(loc: str, key) -> str:
    if isinstance(key, int):
        return f"{loc}[{key}]"
    return f"{loc}.{key}" if loc else str(key)


# --------------------------------------------------------------------------
# scenario objects


@dataclass(frozen=True)
class Task:
    kind: str
    params: dict
    location: str


@dataclass(frozen=True)
class Scenario:
    base: BaseSurface | None
    curve: BaseCurve | None
    extras: dict | None
    tasks: tuple
    format: str = "json"
    base_spec: Any = None
    raw: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def kind(self) -> str | None:
        if self.base is not None:
            return "CY3"
        if self.curve is not None:
            return "surface"
        return None


_TOP_KEYS = {"schema_version", "format", "base", "surface", "tasks"}
_CUSTOM_KEYS = {"name", "divisor_names", "pairing", "c1", "c2", "effective_generators"}


def _parse_base(value, loc: str):
    if isinstance(value, str):
        spec = value
    else:
        t = _table(value, loc)
        if set(t) == {"name"}:
            spec = t["name"]
        else:
            _check_keys(t, _CUSTOM_KEYS, loc, required=("divisor_names", "pairing", "c1", "c2", "effective_generators"))
            spec = {
                "name": str(t.get("name", "custom")),
                "divisor_names": [str(n) for n in t["divisor_names"]],
                "pairing": [list(frac_list(r, f"{loc}.pairing[{i}]")) for i, r in enumerate(t["pairing"])],
                "c1": list(frac_list(t["c1"], f"{loc}.c1")),
                "c2": frac(t["c2"], f"{loc}.c2"),
                "effective_generators": [
                    list(frac_list(g, f"{loc}.effective_generators[{i}]")) for i, g in enumerate(t["effective_generators"])
                ],
            }
    try:
        return build_base(spec), spec
    except UnknownCatalogEntry as exc:
        err = UnknownCatalogEntry(f"{_join(loc, 'name') if not isinstance(value, str) else loc}: {exc}")
        err.location = _join(loc, "name") if not isinstance(value, str) else loc
        raise err from None
    except ScenarioError:
        raise
    except Exception as exc:
        raise ScenarioError(str(exc), loc) from None


def _parse_surface(value, loc: str):
    t = _table(value, loc)
    _check_keys(t, {"genus", "e", "extras"}, loc)
    genus = integer(t.get("genus", 0), _join(loc, "genus"))
    e = integer(t.get("e", 1), _join(loc, "e"))
    if genus < 0 or e < 0:
        raise ScenarioError("genus and e must be non-negative", loc)
    extras = None
    if "extras" in t:
        extras = {}
        for name, pairs in _table(t["extras"], f"{loc}.extras").items():
            pl = f"{loc}.extras.{name}"
            extras[name] = {k: frac(v, f"{pl}.{k}") for k, v in _table(pairs, pl).items()}
    return BaseCurve(genus, e), extras


# per-task schemas -----------------------------------------------------------


def _cy3_data(value, loc: str, r: int) -> dict:
    t = _table(value, loc)
    _check_keys(t, {"n", "x", "S", "eta", "a", "s"}, loc)
    zero = [0] * r
    return {
        "n": frac(t.get("n", 0), _join(loc, "n")),
        "x": frac(t.get("x", 0), _join(loc, "x")),
        "S": frac_list(t.get("S", zero), _join(loc, "S"), r),
        "eta": frac_list(t.get("eta", zero), _join(loc, "eta"), r),
        "a": frac(t.get("a", 0), _join(loc, "a")),
        "s": frac(t.get("s", 0), _join(loc, "s")),
    }


def _surface_data(value, loc: str, names) -> dict:
    t = _table(value, loc)
    _check_keys(t, {"n", "c1", "s"}, loc)
    c1 = {}
    if "c1" in t:
        cl = _join(loc, "c1")
        for k, v in _table(t["c1"], cl).items():
            if k not in names:
                raise UnknownKey(f"unknown divisor class {k!r}", _join(cl, k))
            c1[k] = frac(v, _join(cl, k))
    return {"n": frac(t.get("n", 0), _join(loc, "n")), "c1": c1, "s": frac(t.get("s", 0), _join(loc, "s"))}


def _class_data(value, loc: str, sc: Scenario):
    if sc.base is not None:
        return _cy3_data(value, loc, sc.base.h11)
    if sc.curve is not None:
        names = ("Θ", "f", *((sc.extras or {}).keys()))
        return _surface_data(value, loc, names)
    raise ScenarioError("task needs a [base] or [surface] section", loc)


def _need(sc: Scenario, kind: str, loc: str):
    if kind == "CY3" and sc.base is None:
        raise ScenarioError("task needs a CY3 fibration: declare [base]", loc)
    if kind == "surface" and sc.curve is None:
        raise ScenarioError("task needs an elliptic surface: declare [surface]", loc)


def _direction(value, loc):
    if value not in ("forward", "inverse"):
        raise ScenarioError(f"direction must be 'forward' or 'inverse', got {value!r}", loc)
    return value


def _prepotential(value, loc: str) -> dict:
    t = _table(value, loc)
    _check_keys(t, {"k", "c2J", "chi", "c_ab", "kappa"}, loc, required=("k", "c2J"))
    c2J = frac_list(t["c2J"], _join(loc, "c2J"))
    h = len(c2J)
    entries = []
    for i, row in enumerate(t["k"]):
        rl = f"{loc}.k[{i}]"
        if not isinstance(row, list) or len(row) != 4:
            raise DimensionMismatch(f"{rl}: k entries are [a, b, c, value]")
        a, b, c = (integer(x, f"{rl}[{j}]") for j, x in enumerate(row[:3]))
        if not all(0 <= idx < h for idx in (a, b, c)):
            raise DimensionMismatch(f"{rl}: index out of range for h11={h}")
        entries.append((a, b, c, frac(row[3], f"{rl}[3]")))
    c_ab = None
    if "c_ab" in t:
        c_ab = tuple(frac_list(r, f"{loc}.c_ab[{i}]", h) for i, r in enumerate(t["c_ab"]))
        if len(c_ab) != h:
            raise DimensionMismatch(f"{loc}.c_ab: expected {h} rows")
    return {
        "entries": entries,
        "c2J": c2J,
        "chi": frac(t.get("chi", 0), _join(loc, "chi")),
        "c_ab": c_ab,
        "kappa": str(t.get("kappa", "κ")),
    }


def _kahler(value, loc: str) -> tuple:
    if not isinstance(value, list):
        raise BadFraction("t must be a list", loc)
    out = []
    for i, v in enumerate(value):
        il = f"{loc}[{i}]"
        if isinstance(v, list):
            if len(v) != 2:
                raise DimensionMismatch(f"{il}: complex entries are [re, im]")
            out.append((frac(v[0], f"{il}[0]"), frac(v[1], f"{il}[1]")))
        else:
            out.append((frac(v, il), Fraction(0)))
    return tuple(out)


def _range_spec(value, loc: str) -> tuple:
    """Either an explicit list of numbers or a table {min, max, step}."""
    if isinstance(value, list):
        return frac_list(value, loc)
    t = _table(value, loc)
    _check_keys(t, {"min", "max", "step"}, loc, required=("min", "max"))
    lo, hi = frac(t["min"], _join(loc, "min")), frac(t["max"], _join(loc, "max"))
    step = frac(t.get("step", 1), _join(loc, "step"))
    if step <= 0:
        raise ScenarioError("step must be positive", _join(loc, "step"))
    out, v = [], lo
    while v <= hi:
        out.append(v)
        v += step
    return tuple(out)


def _parse_task(raw, index: int, sc: Scenario) -> Task:
    loc = f"tasks[{index}]"
    t = dict(_table(raw, loc))
    kind = t.pop("type", None)
    if kind not in TASK_KINDS:
        raise ScenarioError(f"task type must be one of {', '.join(TASK_KINDS)}; got {kind!r}", _join(loc, "type"))
    p: dict = {}
    if kind == "transform":
        _check_keys(t, {"E", "direction"}, loc, required=("E",))
        p["E"] = _class_data(t["E"], _join(loc, "E"), sc)
        p["direction"] = _direction(t.get("direction", "forward"), _join(loc, "direction"))
    elif kind == "factorization-check":
        _need(sc, "CY3", loc)
        _check_keys(t, {"E"}, loc, required=("E",))
        p["E"] = _class_data(t["E"], _join(loc, "E"), sc)
    elif kind == "tduality":
        _need(sc, "CY3", loc)
        _check_keys(t, {"frame"}, loc)
        frame = t.get("frame", "both")
        if frame not in ("effective", "adiabatic", "both"):
            raise ScenarioError(f"unknown frame {frame!r}", _join(loc, "frame"))
        p["frame"] = frame
    elif kind == "spectral":
        _need(sc, "CY3", loc)
        _check_keys(t, {"n", "eta", "lambda", "eta_E"}, loc, required=("n", "eta", "lambda"))
        r = sc.base.h11
        p["n"] = integer(t["n"], _join(loc, "n"))
        p["eta"] = frac_list(t["eta"], _join(loc, "eta"), r)
        p["lambda"] = frac(t["lambda"], _join(loc, "lambda"))
        p["eta_E"] = frac_list(t["eta_E"], _join(loc, "eta_E"), r) if "eta_E" in t else None
    elif kind == "scan":
        _need(sc, "CY3", loc)
        _check_keys(t, {"n", "eta", "lambda", "target_n_gen", "require_anomaly"}, loc, required=("n", "eta", "lambda"))
        r = sc.base.h11
        p["n"] = tuple(integer(v, f"{loc}.n[{i}]") for i, v in enumerate(t["n"])) if isinstance(t["n"], list) else tuple(
            int(v) for v in _range_spec(t["n"], _join(loc, "n"))
        )
        eta = t["eta"]
        if not isinstance(eta, list) or len(eta) != r:
            raise DimensionMismatch(f"{loc}.eta: need one range per base divisor ({r})")
        p["eta"] = tuple(_range_spec(v, f"{loc}.eta[{i}]") for i, v in enumerate(eta))
        p["lambda"] = _range_spec(t["lambda"], _join(loc, "lambda"))
        p["target_n_gen"] = frac(t["target_n_gen"], _join(loc, "target_n_gen")) if "target_n_gen" in t else None
        req = t.get("require_anomaly", True)
        if not isinstance(req, bool):
            raise ScenarioError("require_anomaly must be a boolean", _join(loc, "require_anomaly"))
        p["require_anomaly"] = req
    elif kind == "charges":
        _check_keys(t, {"charge", "E", "t", "prepotential", "monodromies"}, loc, required=("t",))
        p["prepotential"] = _prepotential(t["prepotential"], _join(loc, "prepotential")) if "prepotential" in t else None
        if p["prepotential"] is None:
            _need(sc, "CY3", loc)
        if ("charge" in t) == ("E" in t):
            raise ScenarioError("give exactly one of 'charge' or 'E'", loc)
        if "E" in t:
            if p["prepotential"] is not None:
                raise ScenarioError("'E' needs the fibration prepotential; use 'charge' with explicit data", _join(loc, "E"))
            p["E"] = _cy3_data(t["E"], _join(loc, "E"), sc.base.h11)
        else:
            p["charge"] = frac_list(t["charge"], _join(loc, "charge"))
        p["t"] = _kahler(t["t"], _join(loc, "t"))
    elif kind == "monodromy":
        _check_keys(t, {"seed", "generators", "max_steps", "prepotential"}, loc, required=("seed", "max_steps"))
        p["prepotential"] = _prepotential(t["prepotential"], _join(loc, "prepotential")) if "prepotential" in t else None
        if p["prepotential"] is None:
            _need(sc, "CY3", loc)
        p["seed"] = frac_list(t["seed"], _join(loc, "seed"))
        gens = t.get("generators", [])
        if not isinstance(gens, list):
            raise ScenarioError("generators must be a list of names", _join(loc, "generators"))
        for i, g in enumerate(gens):
            if not isinstance(g, str) or not re.match(r"^(conifold|conifold-raw|lcsl(-inv)?:\d+)$", g):
                raise ScenarioError(
                    f"unknown generator {g!r}; use conifold, conifold-raw, lcsl:A or lcsl-inv:A", f"{loc}.generators[{i}]"
                )
        p["generators"] = tuple(gens)
        p["max_steps"] = integer(t["max_steps"], _join(loc, "max_steps"))
        if p["max_steps"] < 0:
            raise ScenarioError("max_steps must be non-negative", _join(loc, "max_steps"))
    elif kind == "stability":
        _check_keys(t, {"polarization", "F", "E", "spectral", "support"}, loc, required=("polarization",))
        pl = _join(loc, "polarization")
        if sc.curve is not None:
            pol = _table(t["polarization"], pl)
            _check_keys(pol, {"a", "b"}, pl, required=("a", "b"))
            p["polarization"] = (frac(pol["a"], _join(pl, "a")), frac(pol["b"], _join(pl, "b")))
            if p["polarization"][0] <= 0 or p["polarization"][1] <= 0:
                raise ScenarioError("surface polarization needs a > 0 and b > 0", pl)
        elif sc.base is not None:
            pol = _table(t["polarization"], pl)
            _check_keys(pol, {"theta", "D"}, pl, required=("theta", "D"))
            p["polarization"] = (frac(pol["theta"], _join(pl, "theta")), frac_list(pol["D"], _join(pl, "D"), sc.base.h11))
        else:
            raise ScenarioError("stability task needs [base] or [surface]", loc)
        if "F" in t:
            _need(sc, "surface", _join(loc, "F"))
            f = _table(t["F"], _join(loc, "F"))
            _check_keys(f, {"n", "c", "s"}, _join(loc, "F"), required=("n", "c", "s"))
            p["F"] = {k: frac(f[k], f"{loc}.F.{k}") for k in ("n", "c", "s")}
        if "spectral" in t:
            _need(sc, "surface", _join(loc, "spectral"))
            s = _table(t["spectral"], _join(loc, "spectral"))
            _check_keys(s, {"n", "ell", "r"}, _join(loc, "spectral"), required=("n", "ell", "r"))
            p["spectral"] = {k: frac(s[k], f"{loc}.spectral.{k}") for k in ("n", "ell", "r")}
        if "E" in t:
            p["E"] = _class_data(t["E"], _join(loc, "E"), sc)
        if "support" in t:
            if "E" not in t:
                raise ScenarioError("'support' only applies together with 'E'", _join(loc, "support"))
            p["support"] = _class_data(t["support"], _join(loc, "support"), sc)
        if not any(k in t for k in ("F", "spectral", "E")):
            raise ScenarioError("stability task needs one of 'F', 'spectral' or 'E'", loc)
    if kind == "transform" and sc.kind is None:
        raise ScenarioError("transform needs [base] or [surface]", loc)
    return Task(kind, p, loc)


def _syntax_location(exc: Exception) -> str | None:
    m = re.search(r"line (\d+), column (\d+)", str(exc))
    return f"line {m.group(1)}, column {m.group(2)}" if m else None


def parse_scenario(text: str) -> Scenario:
    """Parse and validate scenario text; raise ScenarioError subclasses with locations."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        msg = re.sub(r"\s*\(at line \d+, column \d+\)", "", str(exc))
        raise ScenarioSyntaxError(msg, _syntax_location(exc)) from None
    return scenario_from_dict(data)


def scenario_from_dict(data: Mapping) -> Scenario:
    _check_keys(data, _TOP_KEYS, "")
    version = data.get("schema_version", SCHEMA_VERSION)
    if isinstance(version, bool) or not isinstance(version, int) or version != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema_version {version!r}", "schema_version")
    fmt = data.get("format", "json")
    if fmt not in FORMATS:
        raise ScenarioError(f"format must be one of {', '.join(FORMATS)}", "format")
    if "base" in data and "surface" in data:
        raise ScenarioError("declare either [base] or [surface], not both", "surface")
    base = spec = curve = extras = None
    if "base" in data:
        base, spec = _parse_base(data["base"], "base")
    if "surface" in data:
        curve, extras = _parse_surface(data["surface"], "surface")
    tasks_raw = data.get("tasks", [])
    if not isinstance(tasks_raw, list):
        raise ScenarioError("tasks must be an array of tables", "tasks")
    sc = Scenario(base, curve, extras, (), fmt, spec, dict(data))
    tasks = tuple(_parse_task(t, i, sc) for i, t in enumerate(tasks_raw))
    return Scenario(base, curve, extras, tasks, fmt, spec, dict(data))
