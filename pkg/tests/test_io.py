import json

import numpy as np
import pytest

from sdpnormal import fixtures as fx
from sdpnormal import io
from sdpnormal import linalg as la
from sdpnormal.errors import SchemaError
from sdpnormal.linalg import Mode
from sdpnormal.pathology import verdict

from .conftest import FIXTURES


def _doc(**over):
    d = {
        "format_version": 1,
        "mode": "rational",
        "n": 2,
        "m": 1,
        "A": [[["0", "1"], ["1", "0"]]],
        "B": [["1", "0"], ["0", "0"]],
    }
    d.update(over)
    return d


def test_parse_example1_fixture():
    doc = io.parse((FIXTURES / "example1.json").read_bytes())
    assert doc.n == 2 and doc.m == 1 and doc.mode == Mode.EXACT
    assert doc.system.equals(fx.example1())


def test_rational_normalized_on_emit():
    doc = io.parse(_doc(A=[[["2/4", "1"], ["1", "0"]]]))
    out = json.loads(io.emit(doc.to_json()))
    assert out["A"][0][0][0] == "1/2"


def test_roundtrip_all_fixtures():
    for path in sorted(FIXTURES.glob("*.json")):
        data = json.loads(path.read_text())
        if "A" not in data:
            continue
        doc = io.parse(data)
        again = io.parse(io.emit(doc.to_json()))
        assert again.to_json() == doc.to_json(), path.name


def test_asymmetric_matrix_names_entry():
    with pytest.raises(SchemaError) as err:
        io.parse(_doc(A=[[["0", "1"], ["2", "0"]]]))
    assert err.value.path == "A/0"
    assert "(0,1)" in str(err.value) and "(1,0)" in str(err.value)


def test_float_rejected_in_rational_document():
    with pytest.raises(SchemaError) as err:
        io.parse(_doc(B=[[1.5, 0], [0, 0]]))
    assert err.value.path == "B/0/0"


def test_schema_violations():
    with pytest.raises(SchemaError):
        io.parse(_doc(format_version=2))
    with pytest.raises(SchemaError):
        io.parse(_doc(extra=1))
    with pytest.raises(SchemaError):
        io.parse(_doc(m=2))
    with pytest.raises(SchemaError):
        io.parse(b"{not json")
    with pytest.raises(SchemaError) as err:
        io.parse(_doc(B=[["1", "0"]]))
    assert err.value.path == "B"


def test_float_document():
    doc = io.parse(_doc(mode="float", A=[[[0.0, 1.0], [1.0, 0.0]]], B=[[1.0, 0.0], [0.0, 0.0]]))
    assert doc.mode == Mode.FLOAT
    assert doc.with_mode(Mode.FLOAT).mode == Mode.FLOAT


def test_trace_roundtrip():
    trace = fx.large_example_trace()
    back = io.trace_from_json(json.loads(io.emit(io.trace_to_json(trace))), Mode.EXACT)
    assert back.source == trace.source and back.target == trace.target
    s = fx.large_bad().with_r(2)
    from sdpnormal.system import apply_trace

    assert apply_trace(s, back, check=False).equals(apply_trace(s, trace, check=False))


def test_certificate_roundtrip():
    v = verdict(fx.large_bad())
    data = json.loads(io.emit(io.bad_certificate_to_json(v.certificate, v.Q)))
    out = io.certificate_from_json(data, Mode.EXACT, 4, 4)
    assert out["kind"] == "bad" and out["r"] == 2
    assert np.all(out["V"] == v.certificate.V) and list(out["lambda"]) == list(v.certificate.lam)
    assert np.all(out["Q"] == v.Q)


def test_certificate_kind_required():
    with pytest.raises(SchemaError):
        io.certificate_from_json({"kind": "other"}, Mode.EXACT, 2, 1)


def test_emit_is_canonical():
    doc = io.parse((FIXTURES / "large_bad.json").read_bytes())
    a = io.emit(doc.to_json())
    b = io.emit(io.parse(a).to_json())
    assert a == b and a.endswith(b"\n")
