"""Declarative scenarios: parsing, validation and execution.

A scenario is one JSON document::

    {"kind": "qqe", "inputs": {...}, "output": {"path": "...", "format": "json"},
     "seed": 0, "tolerance": 1e-10}

The published schema is ``schemas/scenario.schema.json``; ``inputs`` is
validated against ``$defs/kinds/<kind>``.  Matrices use the matrix literal
format of :mod:`quantumlike.hilbert`.
"""
from __future__ import annotations

import copy
import datetime as _dt
import hashlib
import io
import json
from dataclasses import dataclass, field
from importlib import resources

import jsonschema
import numpy as np

from . import __version__, config, kernels
from .contextuality import SlitConfiguration, chsh_report, chsh_sampled, slit_probabilities
from .effects import (
    load_profile_fixture,
    qq_residual,
    qoe_gap,
    rre_report,
    verify_effect_profile,
)
from .errors import ScenarioError
from .hilbert import (
    DensityOperator,
    density_from_pure,
    make_pure_state,
    matrix_from_literal,
    matrix_to_literal,
    spectrum_additivity_report,
    vector_from_literal,
)
from .instruments import (
    instrument_from_kraus,
    projection_instrument,
    sequential_distribution,
    yes_no_instrument,
)
from .logic import commute, distributivity_violations, join, meet, state_distributivity_failures
from .open_systems import (
    GkslGenerator,
    evolve,
    hump_profile,
    order_stability_report,
    stationary_state,
    write_trajectory_csv,
)

KINDS = (
    "logic-check", "sequential", "qqe", "rre", "profile",
    "gksl", "order-stability", "chsh", "sorkin", "spectrum",
)

_DEFAULT_TOLERANCE = {"qqe": 1e-10, "profile": 1e-6, "sorkin": 1e-10, "chsh": 1e-9,
                      "logic-check": 1e-8}


def load_schema() -> dict:
    text = resources.files("quantumlike.schemas").joinpath("scenario.schema.json").read_text()
    return json.loads(text)


@dataclass
class Scenario:
    kind: str
    inputs: dict
    output_path: str | None = None
    output_format: str = "json"
    seed: int = 0
    tolerance: float | None = None
    document: dict = field(default_factory=dict, repr=False)
    parsed: dict = field(default_factory=dict, repr=False)

    @property
    def digest(self) -> str:
        canon = json.dumps(self.document, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    def effective_tolerance(self) -> float | None:
        return self.tolerance if self.tolerance is not None else _DEFAULT_TOLERANCE.get(self.kind)


def _path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


def _schema_problems(validator, doc, prefix=()):
    problems = []
    for err in sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path))):
        problems.append((_path(list(prefix) + list(err.absolute_path)), err.message))
    return problems


class _Parser:
    """Turns validated JSON fragments into numpy objects, collecting problems."""

    def __init__(self):
        self.problems = []

    def fail(self, path, msg):
        self.problems.append((path, msg))

    def matrix(self, obj, path, dim=None):
        try:
            m = matrix_from_literal(obj)
        except ValueError as exc:
            self.fail(path, str(exc))
            return None
        if dim is not None and m.shape[0] != dim:
            self.fail(path, f"dimension {m.shape[0]} inconsistent with expected {dim}")
        return m

    def vector(self, obj, path):
        try:
            return vector_from_literal(obj)
        except ValueError as exc:
            self.fail(path, str(exc))
            return None

    def state(self, obj, path):
        try:
            if "vector" in obj:
                v = self.vector(obj["vector"], path + ".vector")
                return None if v is None else density_from_pure(make_pure_state(v))
            m = self.matrix(obj["density"], path + ".density")
            return None if m is None else DensityOperator(m)
        except ValueError as exc:
            self.fail(path, str(exc))
            return None

    def instrument(self, obj, path):
        try:
            if "observable" in obj:
                m = self.matrix(obj["observable"], path + ".observable")
                return None if m is None else projection_instrument(m)
            if "projector" in obj:
                m = self.matrix(obj["projector"], path + ".projector")
                return None if m is None else yes_no_instrument(m)
            table = {}
            for x in obj["outcomes"]:
                ops = obj["kraus"].get(str(x))
                if ops is None:
                    self.fail(path + ".kraus", f"no Kraus operators for outcome {x!r}")
                    return None
                mats = [self.matrix(k, f"{path}.kraus.{x}[{i}]") for i, k in enumerate(ops)]
                if any(m is None for m in mats):
                    return None
                table[x] = mats
            return instrument_from_kraus(table)
        except ValueError as exc:
            self.fail(path, str(exc))
            return None


def _dims_of(objs):
    return {o.dim if hasattr(o, "dim") else o.shape[0] for o in objs if o is not None}


def _parse_inputs(kind, inputs, p: _Parser) -> dict:
    out = {}
    pre = "inputs"
    if kind == "logic-check":
        for name in ("P", "Q", "R"):
            if name in inputs:
                out[name] = p.matrix(inputs[name], f"{pre}.{name}")
        if "state" in inputs:
            out["state"] = p.vector(inputs["state"], f"{pre}.state")
    elif kind == "sequential":
        out["instruments"] = [p.instrument(x, f"{pre}.instruments[{i}]")
                              for i, x in enumerate(inputs["instruments"])]
        out["state"] = p.state(inputs["state"], f"{pre}.state")
    elif kind in ("qqe", "rre", "profile"):
        if kind == "profile" and "fixture" in inputs:
            out["fixture"] = inputs["fixture"]
        else:
            out["A"] = p.instrument(inputs["A"], f"{pre}.A")
            out["B"] = p.instrument(inputs["B"], f"{pre}.B")
            out["state"] = p.state(inputs["state"], f"{pre}.state")
        if kind == "profile":
            out["expectations"] = dict(inputs.get("expectations", {}))
    elif kind in ("gksl", "order-stability"):
        out["hamiltonian"] = p.matrix(inputs["hamiltonian"], f"{pre}.hamiltonian")
        out["jumps"] = [p.matrix(m, f"{pre}.jumps[{i}]") for i, m in enumerate(inputs.get("jumps", []))]
        out["rho0"] = p.state(inputs["rho0"], f"{pre}.rho0")
        for key in ("t_end", "dt", "window", "noise_floor", "dump_states", "stationary",
                    "backend", "dims"):
            if key in inputs:
                out[key] = inputs[key]
    elif kind == "chsh":
        out["state"] = p.state(inputs["state"], f"{pre}.state")
        for name in ("A1", "A2", "B1", "B2"):
            out[name] = p.matrix(inputs[name], f"{pre}.{name}")
        out["dims"] = inputs.get("dims")
        out["shots"] = inputs.get("shots")
    elif kind == "sorkin":
        out["slits"] = [p.matrix(m, f"{pre}.slits[{i}]") for i, m in enumerate(inputs["slits"])]
        out["detector"] = p.matrix(inputs["detector"], f"{pre}.detector")
        out["source"] = p.vector(inputs["source"], f"{pre}.source")
    elif kind == "spectrum":
        out["A"] = p.matrix(inputs["A"], f"{pre}.A")
        out["B"] = p.matrix(inputs["B"], f"{pre}.B")
    _check_dims(kind, out, p)
    return out


def _check_dims(kind, out, p: _Parser):
    if p.problems:
        return
    objs = []
    if kind == "logic-check":
        objs = [out.get(k) for k in ("P", "Q", "R")]
        if out.get("state") is not None:
            n = out["state"].shape[0]
            objs.append(np.empty((n, n)))
    elif kind == "sequential":
        objs = out["instruments"] + [out["state"]]
    elif kind in ("qqe", "rre") or (kind == "profile" and "A" in out):
        objs = [out["A"], out["B"], out["state"]]
    elif kind in ("gksl", "order-stability"):
        objs = [out["hamiltonian"], out["rho0"], *out["jumps"]]
        if kind == "order-stability":
            da, db = out["dims"]
            if da * db != out["hamiltonian"].shape[0]:
                p.fail("inputs.dims", f"product {da * db} != operator dimension "
                                      f"{out['hamiltonian'].shape[0]}")
    elif kind == "chsh":
        a, b = out["A1"].shape[0], out["B1"].shape[0]
        if out["A2"].shape[0] != a or out["B2"].shape[0] != b:
            p.fail("inputs", "A1/A2 or B1/B2 dimensions differ")
        if a * b != out["state"].dim:
            p.fail("inputs.state", f"dimension {out['state'].dim} != {a} x {b}")
        if out["dims"] is not None and tuple(out["dims"]) != (a, b):
            p.fail("inputs.dims", f"dims {out['dims']} do not match observables ({a}, {b})")
    elif kind == "sorkin":
        objs = out["slits"] + [out["detector"]]
        if len(_dims_of(objs)) == 1 and out["source"].shape[0] != objs[0].shape[0]:
            p.fail("inputs.source", "source dimension differs from slits")
    elif kind == "spectrum":
        objs = [out["A"], out["B"]]
    dims = _dims_of(objs)
    if len(dims) > 1:
        p.fail("inputs", f"dimension inconsistency: operators have dimensions {sorted(dims)}")


def parse_scenario(text) -> Scenario:
    """Parse and fully validate a scenario from JSON text or a decoded dict.

    A report produced by :func:`run_scenario` is accepted too; its embedded
    ``scenario`` document is parsed.  Raises :class:`ScenarioError` listing
    every problem with its location.
    """
    if isinstance(text, (str, bytes)):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError([("", f"malformed JSON: {exc}")]) from None
    else:
        doc = copy.deepcopy(text)
    if isinstance(doc, dict) and "scenario" in doc and "result" in doc:
        doc = doc["scenario"]
    if not isinstance(doc, dict):
        raise ScenarioError([("", "scenario must be a JSON object")])
    schema = load_schema()
    kind = doc.get("kind")
    if kind is not None and kind not in KINDS:
        raise ScenarioError([("kind", f"unknown kind {kind!r}; valid kinds: {', '.join(KINDS)}")])
    problems = _schema_problems(jsonschema.Draft202012Validator(schema), doc)
    if problems:
        raise ScenarioError(problems)
    sub = {"$ref": f"#/$defs/kinds/{kind}", "$defs": schema["$defs"]}
    problems = _schema_problems(jsonschema.Draft202012Validator(sub), doc["inputs"], ("inputs",))
    if problems:
        raise ScenarioError(problems)
    p = _Parser()
    parsed = _parse_inputs(kind, doc["inputs"], p)
    if p.problems:
        raise ScenarioError(p.problems)
    out = doc.get("output", {})
    return Scenario(
        kind=kind,
        inputs=doc["inputs"],
        output_path=out.get("path"),
        output_format=out.get("format", "json"),
        seed=int(doc.get("seed", 0)),
        tolerance=doc.get("tolerance"),
        document=doc,
        parsed=parsed,
    )


# --------------------------------------------------------------------------
# execution


def _key(x):
    return x if isinstance(x, str) else repr(x)


def _dist_records(dist):
    return [{"outcomes": list(k), "p": v} for k, v in dist.items()]


def _run_logic(s: Scenario):
    tol = s.effective_tolerance()
    m = s.parsed
    names = [n for n in ("P", "Q", "R") if m.get(n) is not None]
    res = {"commute": {}, "meet": {}, "join": {}}
    for a, b in ((a, b) for i, a in enumerate(names) for b in names[i + 1:]):
        res["commute"][a + b] = commute(m[a], m[b])
        res["meet"][a + b] = matrix_to_literal(meet(m[a], m[b]).matrix)
        res["join"][a + b] = matrix_to_literal(join(m[a], m[b]).matrix)
    if "R" in names:
        viol = distributivity_violations(m["P"], m["Q"], m["R"], threshold=tol)
        res["violations"] = [v.as_dict() for v in viol]
        res["distributive"] = not viol
    if m.get("state") is not None:
        psi = make_pure_state(m["state"])
        fails = state_distributivity_failures(m["P"], m["Q"], psi, threshold=tol)
        res["state_violations"] = [v.as_dict() for v in fails]
        res["state_distributive"] = not fails
    return res


def _run_profile(s: Scenario):
    m = s.parsed
    if "fixture" in m:
        ia, ib, rho, _ = load_profile_fixture()
        expectations = {"qoe": True, "rre": True, "qqe": True}
    else:
        ia, ib, rho = m["A"], m["B"], m["state"]
        expectations = {}
    expectations.update(m.get("expectations", {}))
    expectations.setdefault("qq_tolerance", s.effective_tolerance())
    prof = verify_effect_profile(ia, ib, rho, expectations)
    out = prof.as_dict()
    out["qoe_present"] = prof.qoe_present
    out["rre_holds"] = prof.rre_holds
    out["details"] = prof.details
    return out


def _generator(m):
    return GkslGenerator(m["hamiltonian"], m["jumps"])


def _run_gksl(s: Scenario):
    m = s.parsed
    gen = _generator(m)
    traj = evolve(gen, m["rho0"], m["t_end"], m["dt"], backend=m.get("backend"))
    hump = hump_profile(traj, window=m.get("window", 5), noise_floor=m.get("noise_floor", 1e-6))
    res = {
        "steps": len(traj) - 1,
        "trace_drift": traj.trace_drift,
        "min_eigenvalue": float(traj.min_eigenvalues.min()),
        "clip_events": traj.clip_events,
        "final_state": matrix_to_literal(traj.states[-1]),
        "S_vonNeumann_final": float(traj.von_neumann[-1]),
        "S_linear_final": float(traj.linear[-1]),
        "camel": hump.as_dict(),
    }
    if m.get("stationary"):
        st = stationary_state(gen)
        res["stationary"] = {"state": matrix_to_literal(st.state.matrix), "unique": st.unique,
                             "residual": st.residual}
    return res, traj, None


def _run_order(s: Scenario):
    m = s.parsed
    rep = order_stability_report(_generator(m), m["rho0"], m["dims"], m["t_end"], m["dt"],
                                 backend=m.get("backend"))
    return rep.as_dict(), rep.trajectory, (rep.entropy_a, rep.entropy_b)


def _run_chsh(s: Scenario):
    m = s.parsed
    args = (m["state"], m["A1"], m["A2"], m["B1"], m["B2"])
    dims = tuple(m["dims"]) if m["dims"] else None
    res = chsh_report(*args, dims=dims).as_dict()
    if m["shots"]:
        sampled = chsh_sampled(*args, shots=m["shots"], rng=s.seed, dims=dims)
        res["sampled"] = {k: v for k, v in sampled.as_dict().items() if not k.startswith("bound")}
        res["sampled"]["shots"] = m["shots"]
    res["violates_classical"] = res["S"] > 2.0 + s.effective_tolerance()
    return res


def _run_sorkin(s: Scenario):
    from .contextuality import sorkin_residual, two_slit_interference

    m = s.parsed
    cfg = SlitConfiguration(m["slits"], m["detector"], make_pure_state(m["source"]))
    probs = slit_probabilities(cfg)
    res = {"p": {"".join(map(str, k)): v for k, v in probs.items()}}
    if len(m["slits"]) >= 2:
        res["two_slit_interference"] = two_slit_interference(cfg)
    i3 = sorkin_residual(cfg)
    res["I3"] = i3
    res["sorkin_holds"] = abs(i3) <= s.effective_tolerance()
    return res


def execute(s: Scenario):
    """Run a parsed scenario; returns ``(result dict, trajectory or None, subsystem)``."""
    m = s.parsed
    tol = s.effective_tolerance()
    if s.kind == "logic-check":
        return _run_logic(s), None, None
    if s.kind == "sequential":
        return {"distribution": _dist_records(
            sequential_distribution(m["instruments"], m["state"]))}, None, None
    if s.kind == "qqe":
        q = qq_residual(m["A"], m["B"], m["state"])
        return {"qq_residual": q, "qqe_holds": abs(q) <= tol}, None, None
    if s.kind == "rre":
        v = rre_report(m["A"], m["B"], m["state"])
        return {"rre": v.as_dict(), "rre_holds": v.rre_holds,
                "qoe_gap": qoe_gap(m["A"], m["B"], m["state"])}, None, None
    if s.kind == "profile":
        return _run_profile(s), None, None
    if s.kind == "gksl":
        return _run_gksl(s)
    if s.kind == "order-stability":
        return _run_order(s)
    if s.kind == "chsh":
        return _run_chsh(s), None, None
    if s.kind == "sorkin":
        return _run_sorkin(s), None, None
    if s.kind == "spectrum":
        return spectrum_additivity_report(m["A"], m["B"]).as_dict(), None, None
    raise ScenarioError([("kind", f"unknown kind {s.kind!r}")])


def _jsonable(x):
    if isinstance(x, dict):
        return {_key(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    return x


def build_report(s: Scenario, result: dict, timestamp: str | None = None) -> dict:
    if timestamp is None:
        timestamp = _dt.datetime.now(_dt.timezone.utc).isoformat()
    return {
        "header": {
            "tool": "quantumlike",
            "version": __version__,
            "timestamp": timestamp,
            "config_digest": s.digest,
            "seed": s.seed,
            "backend": kernels.BACKEND,
        },
        "kind": s.kind,
        "scenario": s.document,
        "result": _jsonable(result),
    }


def _flatten(prefix, x, rows):
    if isinstance(x, dict):
        for k, v in x.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    elif isinstance(x, list) and x and isinstance(x[0], (dict, list)):
        for i, v in enumerate(x):
            _flatten(f"{prefix}[{i}]", v, rows)
    else:
        rows.append((prefix, json.dumps(x)))


def render(s: Scenario, result, traj=None, subsystem=None, fmt=None, path=None,
           timestamp=None) -> str:
    """Write the report to ``path`` (or return it as text when ``path`` is None)."""
    fmt = fmt or s.output_format
    report = build_report(s, result, timestamp)
    if fmt == "json":
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
        if path:
            with open(path, "w") as fh:
                fh.write(text)
        return text
    footer = [f"{k}: {v}" for k, v in _header_lines(report)]
    if traj is not None:
        footer += [f"{k}: {v}" for k, v in _flat_rows(report["result"])]
        buf = io.StringIO()
        write_trajectory_csv(buf, traj, subsystem, bool(s.parsed.get("dump_states")), footer)
        text = buf.getvalue()
        if path:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text
    buf = io.StringIO()
    buf.write("key,value\n")
    for k, v in _flat_rows(report["result"]):
        buf.write(f"{k},{json.dumps(v) if ',' in v else v}\n")
    for k, v in _header_lines(report):
        buf.write(f"# {k}: {v}\n")
    text = buf.getvalue()
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def _header_lines(report):
    return [(f"header.{k}", v) for k, v in report["header"].items()]


def _flat_rows(result):
    rows = []
    _flatten("", result, rows)
    return rows


def run_scenario(s: Scenario, out=None, fmt=None, tolerance=None, seed=None):
    """Execute ``s`` and write its report.  Returns ``(exit_status, text)``.

    Exit status 0 means the computation completed, whatever its verdict.
    """
    if tolerance is not None:
        s.tolerance = tolerance
        s.document["tolerance"] = tolerance
    if seed is not None:
        s.seed = seed
        s.document["seed"] = seed
    overrides = {}
    if s.tolerance is not None and s.kind == "profile":
        overrides["qq_certify"] = s.tolerance
    with config.override(**overrides):
        result, traj, sub = execute(s)
    text = render(s, result, traj, sub, fmt=fmt, path=out if out is not None else s.output_path)
    return 0, text
