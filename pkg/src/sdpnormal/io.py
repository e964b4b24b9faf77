"""JSON documents: systems in, reports and certificates out.

Scalars travel as ``"p/q"`` strings or integers in rational mode and as
JSON numbers in float mode. Output is canonical (sorted keys, lowest terms)
so equal reports are byte-identical.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from fractions import Fraction

import jsonschema
import numpy as np

from . import linalg as la
from .errors import AsymmetricMatrix, SchemaError
from .linalg import Mode
from .system import Congruence, Replace, ReformTrace, SemidefSystem, ShiftB, Swap

FORMAT_VERSION = 1

_SCALAR = {"oneOf": [{"type": "number"}, {"type": "string"}]}
_MATRIX = {"type": "array", "items": {"type": "array", "items": _SCALAR}}

SYSTEM_SCHEMA = {
    "type": "object",
    "required": ["format_version", "mode", "n", "m", "A"],
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "mode": {"enum": ["rational", "float"]},
        "n": {"type": "integer", "minimum": 1},
        "m": {"type": "integer", "minimum": 1},
        "A": {"type": "array", "items": _MATRIX},
        "B": _MATRIX,
        "c": {"type": "array", "items": _SCALAR},
        "name": {"type": "string"},
    },
    "additionalProperties": False,
}

DIRECTION_SCHEMA = {
    "type": "object",
    "required": ["format_version", "mode", "n", "Z", "V"],
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "mode": {"enum": ["rational", "float"]},
        "n": {"type": "integer", "minimum": 1},
        "Z": _MATRIX,
        "V": _MATRIX,
    },
    "additionalProperties": False,
}

MODE_NAMES = {"rational": Mode.EXACT, "float": Mode.FLOAT}
MODE_LABELS = {Mode.EXACT: "rational", Mode.FLOAT: "float"}


# ---------------------------------------------------------------- scalars


def parse_scalar(value, mode: Mode, path: str):
    if mode == Mode.EXACT:
        if isinstance(value, bool):
            raise SchemaError("booleans are not scalars", path)
        if isinstance(value, int):
            return Fraction(value)
        if isinstance(value, float):
            raise SchemaError("float entry in a rational document; write it as a string \"p/q\"", path)
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError, AttributeError):
            raise SchemaError(f"not a rational number: {value!r}", path) from None
    if isinstance(value, str):
        raise SchemaError("string entry in a float document", path)
    return float(value)


def scalar_out(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v)) if not isinstance(v, bool) else v
    return float(v)


def to_jsonable(obj):
    """Recursively convert arrays, fractions, enums and tuples to JSON types."""
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()] if obj.ndim else to_jsonable(obj.item())
    if isinstance(obj, (Fraction, np.floating, float)):
        return scalar_out(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def emit(obj) -> bytes:
    """Canonical JSON bytes (sorted keys, two-space indent, trailing newline)."""
    return (json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n").encode()


# ---------------------------------------------------------------- documents


@dataclass(frozen=True)
class SystemDocument:
    mode: Mode
    n: int
    m: int
    A: tuple
    B: np.ndarray | None = None
    c: np.ndarray | None = None
    name: str | None = None

    @property
    def system(self) -> SemidefSystem:
        B = self.B if self.B is not None else la.zeros((self.n, self.n), self.mode)
        return SemidefSystem(self.A, B)

    def to_json(self) -> dict:
        out = {
            "format_version": FORMAT_VERSION,
            "mode": MODE_LABELS[self.mode],
            "n": self.n,
            "m": self.m,
            "A": [a for a in self.A],
        }
        if self.B is not None:
            out["B"] = self.B
        if self.c is not None:
            out["c"] = self.c
        if self.name is not None:
            out["name"] = self.name
        return to_jsonable(out)

    def with_mode(self, mode: Mode) -> "SystemDocument":
        if mode == self.mode:
            return self
        if mode == Mode.EXACT:
            raise SchemaError("float documents cannot be read in exact mode", "mode")
        f = la.to_float
        return SystemDocument(
            mode, self.n, self.m, tuple(la.frozen(f(a)) for a in self.A),
            None if self.B is None else la.frozen(f(self.B)),
            None if self.c is None else f(self.c), self.name,
        )


def _validate(doc, schema):
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as err:
        path = "/".join(str(p) for p in err.absolute_path)
        raise SchemaError(err.message, path or "<root>") from None


def _load(data):
    if isinstance(data, (bytes, bytearray)):
        data = data.decode()
    if isinstance(data, str):
        try:
            return json.loads(data)
        except json.JSONDecodeError as err:
            raise SchemaError(f"invalid JSON: {err.msg} at line {err.lineno}", "<root>") from None
    return data


def parse_matrix(rows, n: int, mode: Mode, path: str, symmetric: bool = True) -> np.ndarray:
    if len(rows) != n:
        raise SchemaError(f"expected {n} rows, got {len(rows)}", path)
    vals = []
    for i, row in enumerate(rows):
        if len(row) != n:
            raise SchemaError(f"expected {n} entries, got {len(row)}", f"{path}/{i}")
        vals.append([parse_scalar(v, mode, f"{path}/{i}/{j}") for j, v in enumerate(row)])
    if not symmetric:
        return la.frozen(la.matrix(vals, mode))
    try:
        return la.sym(vals, mode)
    except AsymmetricMatrix as err:
        raise SchemaError(f"matrix is not symmetric: {err}", path) from None


def parse_vector(vals, length: int, mode: Mode, path: str) -> np.ndarray:
    if len(vals) != length:
        raise SchemaError(f"expected {length} entries, got {len(vals)}", path)
    return la.vector([parse_scalar(v, mode, f"{path}/{i}") for i, v in enumerate(vals)], mode)


def parse(data) -> SystemDocument:
    """Validate and decode a system document (bytes, str or already-loaded dict)."""
    doc = _load(data)
    _validate(doc, SYSTEM_SCHEMA)
    mode = MODE_NAMES[doc["mode"]]
    n, m = doc["n"], doc["m"]
    if len(doc["A"]) != m:
        raise SchemaError(f"m = {m} but {len(doc['A'])} matrices given", "A")
    A = tuple(parse_matrix(a, n, mode, f"A/{i}") for i, a in enumerate(doc["A"]))
    B = parse_matrix(doc["B"], n, mode, "B") if "B" in doc else None
    c = parse_vector(doc["c"], m, mode, "c") if "c" in doc else None
    return SystemDocument(mode, n, m, A, B, c, doc.get("name"))


def parse_direction(data):
    """Decode a ``{Z, V}`` document; returns ``(mode, Z, V)``."""
    doc = _load(data)
    _validate(doc, DIRECTION_SCHEMA)
    mode = MODE_NAMES[doc["mode"]]
    n = doc["n"]
    return mode, parse_matrix(doc["Z"], n, mode, "Z"), parse_matrix(doc["V"], n, mode, "V")


# ---------------------------------------------------------------- traces


def trace_to_json(trace: ReformTrace) -> dict:
    steps = []
    for s in trace.steps:
        if isinstance(s, Congruence):
            steps.append({"op": "congruence", "M": s.M})
        elif isinstance(s, ShiftB):
            steps.append({"op": "shift_b", "mu": list(s.mu)})
        elif isinstance(s, Swap):
            steps.append({"op": "swap", "i": s.i, "j": s.j})
        elif isinstance(s, Replace):
            steps.append({"op": "replace", "i": s.i, "lam": list(s.lam)})
    return to_jsonable({"steps": steps, "source": trace.source, "target": trace.target})


def trace_from_json(data, mode: Mode) -> ReformTrace:
    doc = _load(data)
    if not isinstance(doc, dict) or not isinstance(doc.get("steps"), list):
        raise SchemaError("a trace is an object with a 'steps' list", "<root>")
    steps = []
    for k, st in enumerate(doc["steps"]):
        path = f"steps/{k}"
        op = st.get("op") if isinstance(st, dict) else None
        if op == "congruence":
            M = st["M"]
            steps.append(Congruence(parse_matrix(M, len(M), mode, f"{path}/M", symmetric=False)))
        elif op == "shift_b":
            steps.append(ShiftB(tuple(parse_scalar(v, mode, f"{path}/mu/{i}") for i, v in enumerate(st["mu"]))))
        elif op == "swap":
            steps.append(Swap(int(st["i"]), int(st["j"])))
        elif op == "replace":
            lam = tuple(parse_scalar(v, mode, f"{path}/lam/{i}") for i, v in enumerate(st["lam"]))
            steps.append(Replace(int(st["i"]), lam))
        else:
            raise SchemaError(f"unknown operation {op!r}", path)
    return ReformTrace(tuple(steps), doc.get("source"), doc.get("target"))


# ---------------------------------------------------------------- reports


def system_to_json(sys: SemidefSystem) -> dict:
    out = {"A": list(sys.A), "B": sys.B, "n": sys.n, "m": sys.m}
    if sys.r is not None:
        out["r"] = sys.r
    return to_jsonable(out)


def slack_to_json(slack) -> dict:
    return to_jsonable(
        {
            "kind": "slack",
            "r": slack.r,
            "Z": slack.Z,
            "x_Z": slack.x_Z,
            "Q": slack.Q,
            "certificates": [c.Y for c in slack.certs],
        }
    )


def bad_certificate_to_json(cert, Q=None) -> dict:
    out = {
        "kind": "bad",
        "r": cert.r,
        "Z": cert.Z,
        "lambda": cert.lam,
        "V": cert.V,
        "column": cert.column,
        "source": cert.source,
    }
    if Q is not None:
        out["Q"] = Q
    return to_jsonable(out)


def good_certificate_to_json(cert, Q=None) -> dict:
    out = {
        "kind": "good",
        "r": cert.r,
        "Z": cert.Z,
        "U": cert.U,
        "kernel_basis": [list(b) for b in cert.kernel_basis],
    }
    if Q is not None:
        out["Q"] = Q
    return to_jsonable(out)


def normal_form_to_json(nf) -> dict:
    out = {"system": system_to_json(nf.system), "k": nf.k, "trace": trace_to_json(nf.trace)}
    U = getattr(nf, "U", None)
    if U is not None:
        out["U"] = to_jsonable(U)
    return out


def certificate_from_json(data, mode: Mode, n: int, m: int):
    """Decode a certificate document into a dict of parsed arrays, keyed like the document."""
    doc = _load(data)
    if not isinstance(doc, dict) or doc.get("kind") not in ("bad", "good", "slack"):
        raise SchemaError("certificate needs 'kind' in {'bad', 'good', 'slack'}", "kind")
    kind = doc["kind"]
    out = {"kind": kind}
    if "Q" in doc:
        out["Q"] = parse_matrix(doc["Q"], n, mode, "Q", symmetric=False)
    if kind in ("bad", "good"):
        if not isinstance(doc.get("r"), int):
            raise SchemaError("missing integer 'r'", "r")
        out["r"] = doc["r"]
    if "Z" not in doc:
        raise SchemaError("missing 'Z'", "Z")
    out["Z"] = parse_matrix(doc["Z"], n, mode, "Z")
    if kind == "bad":
        if "lambda" not in doc:
            raise SchemaError("missing 'lambda'", "lambda")
        out["lambda"] = parse_vector(doc["lambda"], m, mode, "lambda")
        if "V" in doc:
            out["V"] = parse_matrix(doc["V"], n, mode, "V")
        if "column" in doc:
            out["column"] = int(doc["column"])
    elif kind == "good":
        q = n - out["r"]
        out["U"] = parse_matrix(doc.get("U", []), q, mode, "U")
        out["kernel_basis"] = tuple(
            parse_vector(v, m, mode, f"kernel_basis/{i}") for i, v in enumerate(doc.get("kernel_basis", []))
        )
    else:
        out["certificates"] = [
            parse_matrix(y, n, mode, f"certificates/{i}") for i, y in enumerate(doc.get("certificates", []))
        ]
    return out
