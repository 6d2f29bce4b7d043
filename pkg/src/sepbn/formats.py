"""JSON file formats for CPTs, factorizations, influence models and initial conditions.

Outcomes and statuses are 1-based in files; sites are referred to by their
0-based position in the ``sites`` array. Numbers are written with 12
significant digits, so loaders accept probability sums within ``FILE_TOL``
and renormalize.
"""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import numpy as np

from .cpt import Cpt
from .errors import SepbnError
from .influence import InfluenceModel, NetworkState
from .linalg import VariableSet
from .separability import SeparableFactorization

FILE_TOL = 1e-9
SIG_DIGITS = 12


class FormatError(SepbnError):
    """Malformed or invalid input file."""


_named_card = {
    "type": "object",
    "required": ["name", "cardinality"],
    "properties": {"name": {"type": "string"},
                   "cardinality": {"type": "integer", "minimum": 1}},
}
_matrix = {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}
_vector = {"type": "array", "items": {"type": "number"}}

CPT_SCHEMA = {
    "type": "object",
    "required": ["variables", "target", "rows"],
    "properties": {
        "variables": {"type": "array", "minItems": 1, "items": _named_card},
        "target": _named_card,
        "rows": _matrix,
    },
}

FACTORIZATION_SCHEMA = {
    "type": "object",
    "required": ["variables", "target", "gammas", "tables"],
    "properties": {
        "variables": {"type": "array", "minItems": 1, "items": _named_card},
        "target": _named_card,
        "gammas": _vector,
        "tables": {"type": "array", "items": _matrix},
    },
}

MODEL_SCHEMA = {
    "type": "object",
    "required": ["sites", "D", "A"],
    "properties": {
        "sites": {"type": "array", "minItems": 1, "items": _named_card},
        "D": _matrix,
        "A": {"type": "array", "items": {
            "type": "object",
            "required": ["from", "to", "rows"],
            "properties": {"from": {"type": "integer", "minimum": 0},
                           "to": {"type": "integer", "minimum": 0},
                           "rows": _matrix},
        }},
    },
}

INIT_SCHEMA = {
    "type": "object",
    "oneOf": [
        {"required": ["marginals"],
         "properties": {"marginals": {"type": "array", "items": _vector}}},
        {"required": ["state"],
         "properties": {"state": {"type": "array",
                                  "items": {"type": "integer", "minimum": 1}}}},
    ],
}


def _check(doc, schema, what):
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as e:
        raise FormatError(f"{what}: field {e.json_path}: {e.message}") from None


def _read(path, schema, what):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise FormatError(f"{what}: cannot read {path}: {e.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"{what}: {path}: line {e.lineno} column {e.colno}: {e.msg}") from None
    _check(doc, schema, what)
    return doc


def _array(rows, shape, field, what):
    try:
        a = np.array(rows, dtype=float)
    except ValueError:
        raise FormatError(f"{what}: field {field}: ragged matrix") from None
    if a.shape != shape:
        raise FormatError(f"{what}: field {field}: shape {a.shape}, expected {shape}")
    return a


def _stochastic(a, field, what, tol=FILE_TOL):
    """Check unit row sums within ``tol`` and renormalize."""
    a = np.atleast_2d(a)
    if a.size and a.min() < -tol:
        r = int(np.argwhere(a < -tol)[0][0])
        raise FormatError(f"{what}: field {field}[{r}]: negative probability")
    sums = a.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1) > tol)
    if bad.size:
        raise FormatError(f"{what}: field {field}[{bad[0]}]: row sums to {sums[bad[0]]:.12g}, not 1")
    return np.clip(a, 0, None) / np.clip(a, 0, None).sum(axis=1, keepdims=True)


def _vars_from(doc):
    return VariableSet(tuple(v["cardinality"] for v in doc["variables"]),
                       doc["target"]["cardinality"],
                       names=tuple(v["name"] for v in doc["variables"]),
                       target_name=doc["target"]["name"])


def _vars_to(vars):
    names = vars.names or tuple(f"X{i + 1}" for i in range(vars.n))
    return ([{"name": nm, "cardinality": m} for nm, m in zip(names, vars.cards)],
            {"name": vars.target_name or "Z", "cardinality": vars.target_card})


def cpt_from_dict(doc) -> Cpt:
    _check(doc, CPT_SCHEMA, "CPT")
    vars = _vars_from(doc)
    rows = _array(doc["rows"], (vars.joint_size, vars.target_card), "$.rows", "CPT")
    return Cpt(vars, _stochastic(rows, "$.rows", "CPT"))


def factorization_from_dict(doc) -> SeparableFactorization:
    what = "factorization"
    _check(doc, FACTORIZATION_SCHEMA, what)
    vars = _vars_from(doc)
    g = _array(doc["gammas"], (vars.n,), "$.gammas", what)
    g = _stochastic(g[None, :], "$.gammas", what)[0]
    if len(doc["tables"]) != vars.n:
        raise FormatError(f"{what}: field $.tables: {len(doc['tables'])} tables for {vars.n} variables")
    tables = []
    for i, (t, m) in enumerate(zip(doc["tables"], vars.cards)):
        field = f"$.tables[{i}]"
        tables.append(_stochastic(_array(t, (m, vars.target_card), field, what), field, what))
    return SeparableFactorization(vars, g, tuple(tables))


def model_from_dict(doc) -> InfluenceModel:
    what = "model"
    _check(doc, MODEL_SCHEMA, what)
    cards = tuple(s["cardinality"] for s in doc["sites"])
    n = len(cards)
    d = _stochastic(_array(doc["D"], (n, n), "$.D", what), "$.D", what)
    local = {}
    for k, entry in enumerate(doc["A"]):
        i, j = entry["to"], entry["from"]
        field = f"$.A[{k}]"
        if i >= n or j >= n:
            raise FormatError(f"{what}: field {field}: site index out of range 0..{n - 1}")
        if (i, j) in local:
            raise FormatError(f"{what}: field {field}: duplicate table from {j} to {i}")
        a = _array(entry["rows"], (cards[j], cards[i]), field + ".rows", what)
        local[(i, j)] = _stochastic(a, field + ".rows", what)
    try:
        return InfluenceModel(cards, d, local, tuple(s["name"] for s in doc["sites"]))
    except ValueError as e:
        raise FormatError(f"{what}: {e}") from None


def init_from_dict(doc, model: InfluenceModel):
    """Return ``("marginals", list)`` or ``("state", NetworkState)`` (0-based)."""
    what = "init"
    _check(doc, INIT_SCHEMA, what)
    n = model.n_sites
    if "marginals" in doc:
        ms = doc["marginals"]
        if len(ms) != n:
            raise FormatError(f"{what}: field $.marginals: {len(ms)} entries for {n} sites")
        out = []
        for i, (p, m) in enumerate(zip(ms, model.site_cards)):
            field = f"$.marginals[{i}]"
            out.append(_stochastic(_array(p, (m,), field, what)[None, :], field, what)[0])
        return "marginals", out
    st = doc["state"]
    if len(st) != n:
        raise FormatError(f"{what}: field $.state: {len(st)} entries for {n} sites")
    for i, (s, m) in enumerate(zip(st, model.site_cards)):
        if s > m:
            raise FormatError(f"{what}: field $.state[{i}]: status {s} outside 1..{m}")
    return "state", NetworkState(tuple(s - 1 for s in st))


def load_cpt(path) -> Cpt:
    return cpt_from_dict(_read(path, CPT_SCHEMA, "CPT"))


def load_factorization(path) -> SeparableFactorization:
    return factorization_from_dict(_read(path, FACTORIZATION_SCHEMA, "factorization"))


def load_model(path) -> InfluenceModel:
    return model_from_dict(_read(path, MODEL_SCHEMA, "model"))


def load_init(path, model):
    return init_from_dict(_read(path, INIT_SCHEMA, "init"), model)


def fmt(x) -> float:
    """Round to the printed precision; also turns -0.0 into 0.0."""
    return float(f"{float(x):.{SIG_DIGITS}g}") + 0.0


def _rounded(a):
    return [fmt(x) for x in a] if np.ndim(a) == 1 else [_rounded(r) for r in a]


def cpt_to_dict(c: Cpt) -> dict:
    variables, target = _vars_to(c.vars)
    return {"variables": variables, "target": target, "rows": _rounded(c.rows)}


def factorization_to_dict(f: SeparableFactorization) -> dict:
    variables, target = _vars_to(f.vars)
    return {"variables": variables, "target": target,
            "gammas": _rounded(f.gammas), "tables": [_rounded(t) for t in f.tables]}


def model_to_dict(model: InfluenceModel) -> dict:
    names = model.site_names or tuple(f"site{i}" for i in range(model.n_sites))
    return {
        "sites": [{"name": nm, "cardinality": m} for nm, m in zip(names, model.site_cards)],
        "D": _rounded(model.D),
        "A": [{"from": j, "to": i, "rows": _rounded(a)}
              for (i, j), a in sorted(model.local.items())],
    }


def dumps(doc) -> str:
    """JSON with one matrix row per line."""
    def enc(v, indent):
        pad = " " * indent
        flat = isinstance(v, dict) and not any(isinstance(x, (list, dict)) for x in v.values())
        if flat:
            return json.dumps(v)
        if isinstance(v, dict):
            items = [f'{pad}  {json.dumps(k)}: {enc(x, indent + 2)}' for k, x in v.items()]
            return "{\n" + ",\n".join(items) + "\n" + pad + "}"
        if isinstance(v, list) and v and isinstance(v[0], (list, dict)):
            items = [f"{pad}  {enc(x, indent + 2)}" for x in v]
            return "[\n" + ",\n".join(items) + "\n" + pad + "]"
        return json.dumps(v)
    return enc(doc, 0) + "\n"


def write_json(doc, path) -> None:
    Path(path).write_text(dumps(doc), encoding="utf-8")
