"""Run scenarios and render deterministic reports (JSON, CSV, text)."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from . import charges as ch
from . import fm
from . import spectral as sp
from . import stability as st
from .errors import DimensionMismatch
from .geometry import FibrationModel, build_fibration
from .ring import GradedClass, QQi
from .scenario import SCHEMA_VERSION, Scenario, Task

FAST = "fast"
FULL = "full"


# --------------------------------------------------------------------------
# exact serialisation


def exact(obj: Any) -> Any:
    """Turn results into JSON-ready structures; rationals become "p/q" strings, plain ints stay ints."""
    if isinstance(obj, (bool, int)) or obj is None:
        return obj
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, QQi):
        return {"re": str(obj.re), "im": str(obj.im)}
    if isinstance(obj, GradedClass):
        return {b: str(a) for b, a in zip(obj.ring.basis, obj.coeffs) if a != 0}
    if isinstance(obj, fm.ChernData3):
        return {
            "n": str(obj.n),
            "x": str(obj.x),
            "S": [str(v) for v in obj.S],
            "eta": [str(v) for v in obj.eta],
            "a": str(obj.a),
            "s": str(obj.s),
        }
    if isinstance(obj, fm.ChernData2):
        return {"n": str(obj.n), "c1": exact(obj.c1), "s": str(obj.s), "d": str(obj.d), "c": str(obj.c)}
    if isinstance(obj, ch.ChargeVector):
        return {"n6": str(obj.n6), "n4": [str(v) for v in obj.n4], "n2": [str(v) for v in obj.n2], "n0": str(obj.n0)}
    if isinstance(obj, dict):
        return {str(k): exact(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [exact(v) for v in obj]
    if isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialise {type(obj).__name__}")


# --------------------------------------------------------------------------
# task runners


@dataclass
class TaskResult:
    index: int
    kind: str
    inputs: dict
    outputs: dict
    checks: dict
    findings: dict

    def as_dict(self) -> dict:
        out = {"index": self.index, "type": self.kind, "inputs": self.inputs, "outputs": self.outputs, "checks": self.checks}
        if self.findings:
            out["findings"] = self.findings
        return out


def _model(sc: Scenario) -> FibrationModel:
    if sc.base is not None:
        return build_fibration(sc.base)
    return build_fibration(sc.curve, sc.extras)


def _class(params: dict, X: FibrationModel):
    if "x" in params:
        return fm.ChernData3(params["n"], params["x"], params["S"], params["eta"], params["a"], params["s"])
    c1 = X.ring.zero()
    for name, v in params["c1"].items():
        c1 = c1 + X.ring.element(name) * v
    return fm.ChernData2(params["n"], c1, params["s"])


def _run_transform(task: Task, X: FibrationModel, level: str, **_) -> TaskResult:
    E = _class(task.params["E"], X)
    d = task.params["direction"]
    other = fm.INVERSE if d == fm.FORWARD else fm.FORWARD
    if isinstance(E, fm.ChernData3):
        out = fm.fm_cy3(E, X, d)
        back = fm.fm_cy3(out, X, other)
    else:
        out = fm.fm_surface(E, X, d)
        back = fm.fm_surface(out, X, other)
    n, deg = fm.relative_invariants(E, X)
    n2, deg2 = fm.relative_invariants(out, X)
    checks = {"roundtrip": back == -E, "relative_flip": (n2, deg2) == (deg, -n)}
    if level == FULL:
        checks["oracle_agreement"] = fm.grr_transform(E, X, d) == out
    outputs = {
        "transform": out,
        "relative_invariants": {"input": [n, deg], "output": [n2, deg2]},
        "wit_advisory": fm.wit_sign_check(n, deg) if n >= 0 else "negative-rank",
    }
    return TaskResult(0, task.kind, {"E": E, "direction": d}, outputs, checks, {})


def _run_factorization(task: Task, X: FibrationModel, level: str, **_) -> TaskResult:
    E = _class(task.params["E"], X)
    rep = fm.factorization_check(E, X)
    outputs = {
        "status": rep.status,
        "composition": rep.composition,
        "transform": rep.transform,
        "convention": {"sign": rep.convention["sign"], "post_twist_c1_multiple": rep.convention["c1_twist"]},
    }
    checks = {"factorization": rep.ok}
    if level == FULL:
        found = fm.discover_factorization_convention(X)
        checks["convention_rediscovered"] = found == fm.FACTORIZATION_CONVENTION
    return TaskResult(0, task.kind, {"E": E}, outputs, checks, {})


def _tdual_block(rep: ch.TDualityReport) -> dict:
    return {
        "matrix": [list(r) for r in rep.matrix],
        "x0_columns_match_block_matrix": rep.x0_columns_match,
        "full_match": rep.full_match,
        "squares_to_minus_identity": rep.squares_to_minus_identity,
        "residual": [list(r) for r in rep.residual],
    }


def _run_tduality(task: Task, X: FibrationModel, level: str, **_) -> TaskResult:
    frames = ("effective", "adiabatic") if task.params["frame"] == "both" else (task.params["frame"],)
    outputs, checks, findings = {}, {}, {}
    for frame in frames:
        rep = ch.tduality_matrix(X, frame)
        outputs[frame] = _tdual_block(rep)
        if frame == "adiabatic":
            checks["adiabatic_frame_is_block_matrix"] = rep.full_match and rep.squares_to_minus_identity
        else:
            findings["effective_frame_matches_block_matrix"] = rep.ok
    outputs["coordinates"] = ["n", "x"] + [f"S_{i + 1}" for i in range(X.base.h11)] + [
        f"eta_{i + 1}" for i in range(X.base.h11)
    ] + ["a", "s"]
    return TaskResult(0, task.kind, {"frame": task.params["frame"]}, outputs, checks, findings)


def _bundle_outputs(V: sp.SpectralBundle, X: FibrationModel) -> tuple[dict, dict]:
    W = sp.five_brane_class(V, X) if V.is_sun else None
    rep = sp.anomaly_check(V, X)
    gen = sp.n_generations(V)
    out = {
        "ch_V": V.ch,
        "gamma_S": V.gamma_S,
        "varpi": V.varpi,
        "a_E": V.a_E,
        "s_E": V.s_E,
        "c1_V": list(V.c1_V),
        "c2_V": V.c2_V,
        "c3_V": V.c3_V,
        "N_gen": gen.value,
        "N_gen_signed": gen.signed,
        "N_gen_integral": gen.integral,
        "anomaly": {
            "c1_even": rep.c1_even,
            "W_B_effective": rep.W_B_effective,
            "a_f_nonneg": rep.a_f_nonneg,
            "pass": rep.passed,
        },
    }
    if W is not None:
        out["five_brane"] = {"W_B": list(W.W_B), "a_f": W.a_f, "F_theory_threebranes_chi_over_24": W.a_f}
    checks = {"anomaly_identity": rep.anomaly_identity if V.is_sun else True}
    return out, checks


def _run_spectral(task: Task, X: FibrationModel, level: str, **_) -> TaskResult:
    p = task.params
    inp = sp.SpectralInput(p["n"], p["eta"], p["lambda"], p["eta_E"])
    V = sp.build_bundle(inp, X)
    outputs, checks = _bundle_outputs(V, X)
    checks["index_equals_half_c3"] = sp.index_by_hrr(V, X) == V.c3_V / 2 if V.is_sun else True
    if level == FULL:
        Vo = sp.build_bundle(inp, X, route="oracle")
        checks["oracle_route_agrees"] = Vo.c2_V == V.c2_V and Vo.c3_V == V.c3_V and Vo.ch == V.ch
        if V.is_sun:
            checks["closed_form_agrees"] = sp.sun_closed_form(inp, X) == (V.c2_V, V.c3_V)
    inputs = {"n": p["n"], "eta": list(p["eta"]), "lambda": p["lambda"], "eta_E": list(inp.eta_E) if inp.eta_E else None}
    return TaskResult(0, task.kind, inputs, outputs, checks, {})


def _run_scan(task: Task, X: FibrationModel, level: str, parallel: int = 0, base_spec=None, **_) -> TaskResult:
    p = task.params
    rows = sp.scan_models(
        X,
        p["n"],
        p["eta"],
        p["lambda"],
        target_n_gen=p["target_n_gen"],
        require_anomaly=p["require_anomaly"],
        parallel=parallel,
        base_spec=base_spec,
    )
    inputs = {
        "n": list(p["n"]),
        "eta": [list(r) for r in p["eta"]],
        "lambda": list(p["lambda"]),
        "target_n_gen": p["target_n_gen"],
        "require_anomaly": p["require_anomaly"],
    }
    outputs = {"count": len(rows), "rows": [r.as_dict() for r in rows]}
    return TaskResult(0, task.kind, inputs, outputs, {"anomaly_identity_all_rows": all(r.identity_ok for r in rows)}, {})


def _prepotential(p: dict | None, X: FibrationModel | None) -> ch.PrepotentialData:
    if p is None:
        return ch.prepotential_from_fibration(X)
    return ch.PrepotentialData.from_entries(p["entries"], p["c2J"], p["chi"], p["c_ab"], p["kappa"])


def _run_charges(task: Task, X: FibrationModel | None, level: str, **_) -> TaskResult:
    p = task.params
    P = _prepotential(p["prepotential"], X)
    t = ch.KahlerPoint(tuple(QQi(re, im) for re, im in p["t"]))
    inputs: dict = {"t": list(t.t)}
    if "E" in p:
        E = _class(p["E"], X)
        cls = ch.to_j_basis(X, P, E.to_class(X))
        n = ch.chern_to_charge(cls, P)
        inputs["E"] = E
    else:
        n = ch.ChargeVector.from_tuple(p["charge"])
        cls = ch.charge_to_chern(n, P)
        inputs["charge"] = n
    zA = ch.central_charge_A(n, t, P)
    zB = ch.central_charge_B(cls, t, P)
    pv = ch.period_vector(t, P)
    con = ch.conifold_on_charges(n, P)
    outputs = {
        "charge": n,
        "chern_J_basis": cls,
        "Z_A": zA,
        "Z_B": zB,
        "periods": list(pv.values),
        "periods_formal_terms": pv.formal,
        "conifold_raw": ch.conifold_on_charges(n, P, normalized=False),
        "conifold_sign_normalized": con,
        "prepotential": {"c2J": list(P.c2J), "chi": P.chi, "kappa": P.kappa},
    }
    checks = {
        "central_charge_contract": zA == zB,
        "charge_roundtrip": ch.chern_to_charge(ch.charge_to_chern(n, P), P) == n,
        "conifold_shift": con == ch.ChargeVector(n.n6 + n.n0, n.n4, n.n2, n.n0),
    }
    if level == FULL:
        checks["lcsl_kahler_shift"] = all(
            ch.central_charge_B(ch.lcsl_monodromy(cls, P.J(a)), t, P) == ch.central_charge_B(cls, t.shift(a, -1), P)
            for a in range(P.h11)
        )
    return TaskResult(0, task.kind, inputs, outputs, checks, {})


def _generator(name: str, P: ch.PrepotentialData):
    if name == "conifold":
        return lambda n: ch.conifold_on_charges(n, P)
    if name == "conifold-raw":
        return lambda n: ch.conifold_on_charges(n, P, normalized=False)
    head, _, idx = name.partition(":")
    a = int(idx)
    if a >= P.h11:
        raise ValueError(f"generator {name}: divisor index out of range")
    power = -1 if head == "lcsl-inv" else 1
    return lambda n: ch.lcsl_on_charges(n, a, P, power)


def _run_monodromy(task: Task, X: FibrationModel | None, level: str, **_) -> TaskResult:
    p = task.params
    P = _prepotential(p["prepotential"], X)
    seed = ch.ChargeVector.from_tuple(p["seed"])
    if seed.h11 != P.h11:
        raise DimensionMismatch(f"seed has h11={seed.h11}, prepotential has {P.h11}")
    gens = [(g, _generator(g, P)) for g in p["generators"]]
    res = ch.monodromy_orbit(seed, gens, p["max_steps"])
    outputs = {
        "orbit_size": len(res.orbit),
        "orbit": list(res.orbit),
        "relations": [[s, g, t] for s, g, t in res.relations],
        "truncated": res.truncated,
    }
    checks = {}
    if level == FULL:
        checks["conifold_shift_on_orbit"] = all(
            ch.conifold_on_charges(n, P) == ch.ChargeVector(n.n6 + n.n0, n.n4, n.n2, n.n0) for n in res.orbit
        )
    inputs = {"seed": seed, "generators": list(p["generators"]), "max_steps": p["max_steps"]}
    return TaskResult(0, task.kind, inputs, outputs, checks, {})


def _run_stability(task: Task, X: FibrationModel, level: str, **_) -> TaskResult:
    p = task.params
    if X.kind == "elliptic-surface-over-curve":
        a, b = p["polarization"]
        H = st.Polarization.surface(X, a, b)
        inputs: dict = {"polarization": {"a": a, "b": b}}
    else:
        theta, D = p["polarization"]
        H = st.Polarization(X.theta * theta + X.pull_divisor(D))
        inputs = {"polarization": {"theta": theta, "D": list(D)}}
    outputs, checks, findings = {}, {}, {}
    if "F" in p:
        f = p["F"]
        e, c1B = X.base.e, X.base.euler
        line = st.transformed_hilbert_line(f["n"], f["c"], f["s"], e, c1B, a, b)
        F = fm.ChernData2(f["n"], X.fiber * f["c"], f["s"])
        hp = st.hilbert_polynomial(st.transformed_class(F, X), X, H)
        inputs["F"] = dict(f)
        outputs["transformed_line"] = {"linear": line.linear, "constant": line.constant, "slope": line.slope}
        checks["line_matches_hrr"] = hp == line.as_hilbert()
    if "spectral" in p:
        s = p["spectral"]
        closed = st.spectral_surface_invariants(s["n"], s["ell"], s["r"], X.base.e, X.base.euler)
        derived = st.spectral_surface_invariants_by_transform(s["n"], s["ell"], s["r"], X)
        inputs["spectral"] = dict(s)
        outputs["spectral_invariants"] = {"rank": closed.rank, "d": closed.d, "c": closed.c, "s": closed.s}
        outputs["spectral_invariants_by_transform"] = {
            "rank": derived.rank,
            "d": derived.d,
            "c": derived.c,
            "s": derived.s,
        }
        findings["spectral_s_agrees_with_transform"] = closed == derived
    if "E" in p:
        E = _class(p["E"], X)
        hp = st.hilbert_polynomial(E, X, H)
        inputs["E"] = E
        block: dict = {"hilbert_polynomial": list(hp.coeffs), "degree": hp.degree, "r": hp.r, "d": hp.d}
        if hp.r != 0:
            red, mu = st.reduced_and_slope(hp)
            block["reduced"] = list(red.coeffs)
            block["slope"] = mu
            support = _class(p["support"], X).to_class(X) if "support" in p else None
            block["polarized_rank"] = st.polarized_rank(E, X, H, support)
        outputs["hilbert"] = block
        checks["additivity"] = st.hilbert_polynomial(E.scale(2), X, H) == hp.scale(2)
    return TaskResult(0, task.kind, inputs, outputs, checks, findings)


_RUNNERS = {
    "transform": _run_transform,
    "factorization-check": _run_factorization,
    "tduality": _run_tduality,
    "spectral": _run_spectral,
    "scan": _run_scan,
    "charges": _run_charges,
    "monodromy": _run_monodromy,
    "stability": _run_stability,
}


class TaskFailure(Exception):
    def __init__(self, index: int, kind: str, exc: Exception):
        self.index, self.kind, self.cause = index, kind, exc
        super().__init__(f"task {index} ({kind}): {type(exc).__name__}: {exc}")


def run(sc: Scenario, check_level: str = FAST, parallel: int = 0) -> dict:
    """Execute all tasks; the returned document is deterministic for a given scenario."""
    X = _model(sc) if sc.kind is not None else None
    results = []
    for i, task in enumerate(sc.tasks):
        try:
            res = _RUNNERS[task.kind](task, X, check_level, parallel=parallel, base_spec=sc.base_spec)
        except Exception as exc:
            raise TaskFailure(i, task.kind, exc) from exc
        res.index = i
        results.append(res)
    model = None
    if sc.base is not None:
        model = {"kind": "CY3-over-surface", "base": sc.base.name, "h11_base": sc.base.h11}
    elif sc.curve is not None:
        model = {"kind": "elliptic-surface-over-curve", "genus": sc.curve.genus, "e": sc.curve.e}
    all_ok = all(all(r.checks.values()) for r in results)
    return exact(
        {
            "schema_version": SCHEMA_VERSION,
            "check_level": check_level,
            "model": model,
            "tasks": [r.as_dict() for r in results],
            "all_checks_passed": all_ok,
        }
    )


# --------------------------------------------------------------------------
# rendering


def render_json(doc: dict, header: dict | None = None) -> str:
    body = dict(doc)
    if header is not None:
        body = {"header": header, **body}
    return json.dumps(body, indent=2, ensure_ascii=False, sort_keys=False) + "\n"


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list):
        if not obj:
            yield prefix, ""
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, "" if obj is None else (str(obj).lower() if isinstance(obj, bool) else obj)


SCAN_FIELDS = ("n", "eta", "lambda", "c2_theta", "c2_f", "c3", "W_B", "a_f", "N_gen", "anomaly_pass", "flags")


def render_csv(doc: dict, header: dict | None = None) -> str:
    """RFC-4180 CSV.  Scan-only reports become one row per model; others a path/value table."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    tasks = doc["tasks"]
    if tasks and all(t["type"] == "scan" for t in tasks):
        w.writerow(("task",) + SCAN_FIELDS)
        for t in tasks:
            for row in t["outputs"]["rows"]:
                vals = []
                for f in SCAN_FIELDS:
                    v = row[f]
                    if isinstance(v, list):
                        v = ";".join(v)
                    elif isinstance(v, bool):
                        v = str(v).lower()
                    vals.append(v)
                w.writerow([t["index"], *vals])
        return buf.getvalue()
    w.writerow(("path", "value"))
    if header is not None:
        for path, val in _flatten(header, "header"):
            w.writerow((path, val))
    for path, val in _flatten(doc):
        w.writerow((path, val))
    return buf.getvalue()


def render_text(doc: dict, header: dict | None = None) -> str:
    lines = []
    if header is not None:
        for path, val in _flatten(header, "header"):
            lines.append(f"{path} = {val}")
    for path, val in _flatten(doc):
        lines.append(f"{path} = {val}")
    return "\n".join(lines) + "\n"


RENDERERS = {"json": render_json, "csv": render_csv, "text": render_text}


def render(doc: dict, fmt: str, header: dict | None = None) -> str:
    return RENDERERS[fmt](doc, header)
