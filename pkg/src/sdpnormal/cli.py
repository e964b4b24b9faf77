"""Command-line interface: ``sdpnormal <subcommand> [options] FILE``.

Exit codes: 0 completed, 1 input error, 2 verification failure,
3 numerical limit.
"""

from __future__ import annotations

import logging
import sys as _sys
import time
from pathlib import Path

import click
import numpy as np

from . import certify
from . import facial
from . import closedness as cl
from . import io
from . import linalg as la
from . import normal_forms as nfm
from . import pathology as pt
from .errors import (
    AsymmetricMatrix,
    CertificateRoundingFailed,
    DimensionMismatch,
    InconsistentCertificate,
    InconsistentSlack,
    InfeasiblePoint,
    InfeasibleSystem,
    InvalidStep,
    ModeMismatch,
    NumericalLimit,
    SchemaError,
    FingerprintMismatch,
    Unbounded,
)
from .facial import ReducingCertificate, max_rank_slack, verify_max_rank
from .linalg import Mode
from .sdp import SdpProblem, SolverConfig, Status, solve
from .system import SemidefSystem

log = logging.getLogger("sdpnormal")

EXIT_OK, EXIT_INPUT, EXIT_VERIFY, EXIT_NUMERIC = 0, 1, 2, 3


class VerificationFailed(Exception):
    pass


class NumericalStop(Exception):
    pass


# ---------------------------------------------------------------- report builders


def analyze_report(doc: io.SystemDocument, cfg=None, trace=None) -> dict:
    sys = doc.system
    v = pt.verdict(sys, cfg)
    report = {
        "command": "analyze",
        "mode": io.MODE_LABELS[doc.mode],
        "verdict": v.behavior.value,
        "r": v.slack.r,
        "slack": io.slack_to_json(v.slack),
        "normalized_system": io.system_to_json(v.normalized),
        "Q": io.to_jsonable(v.Q),
    }
    if v.bad:
        report["certificate"] = io.bad_certificate_to_json(v.certificate, v.Q)
        nf = nfm.to_bad_normal_form(v.normalized, v.certificate, v.slack.x_Z, trace)
        obj = nfm.bad_objective(nf)
        report["bad_objective"] = io.to_jsonable(
            {"c_normal_form": obj.c_normal, "c": obj.c_source, "offset": obj.offset, "optimum": obj.optimum}
        )
    else:
        report["certificate"] = io.good_certificate_to_json(v.certificate, v.Q)
        nf = nfm.to_good_normal_form(v.normalized, v.certificate, v.slack.x_Z, trace)
    report["normal_form"] = io.normal_form_to_json(nf)
    return report


def slack_report(doc: io.SystemDocument, cfg=None) -> dict:
    sys = doc.system
    s = max_rank_slack(sys, cfg)
    out = {"command": "slack", "mode": io.MODE_LABELS[doc.mode], "verified": bool(verify_max_rank(sys, s.Z, s.certs))}
    out.update(io.slack_to_json(s))
    return out


def reformulate_report(doc: io.SystemDocument, target: str | None, cfg=None, trace=None) -> dict:
    sys = doc.system
    v = pt.verdict(sys, cfg)
    want = target or ("bad" if v.bad else "good")
    if (want == "bad") != v.bad:
        raise VerificationFailed(f"system is {v.behavior.value}; no {want} normal form exists")
    if want == "bad":
        nf = nfm.to_bad_normal_form(v.normalized, v.certificate, v.slack.x_Z, trace)
    else:
        nf = nfm.to_good_normal_form(v.normalized, v.certificate, v.slack.x_Z, trace)
    return {
        "command": "reformulate",
        "mode": io.MODE_LABELS[doc.mode],
        "target": want,
        "Q": io.to_jsonable(v.Q),
        "normal_form": io.normal_form_to_json(nf),
    }


def solve_report(doc: io.SystemDocument, cfg=None) -> dict:
    if doc.c is None:
        raise SchemaError("the solve command needs an objective 'c'", "c")
    sol = solve(SdpProblem(doc.system, tuple(doc.c)), cfg)
    out = {
        "command": "solve",
        "status": sol.status.value,
        "primal_value": float(sol.primal_value),
        "dual_value": float(sol.dual_value),
        "x": io.to_jsonable(np.asarray(sol.x, dtype=float)),
        "Y": io.to_jsonable(np.asarray(sol.Y, dtype=float)),
        "residuals": {k: float(v) for k, v in sol.residuals.items()},
    }
    if sol.status == Status.NUMERICAL_LIMIT:
        out["minimal_face"] = _minimal_face_values(doc, cfg)
    return out


def _minimal_face_values(doc: io.SystemDocument, cfg) -> dict:
    """Both optimal values recomputed after facial reduction of each side."""
    res = {}
    for side, fn in (("primal", facial.solve_on_minimal_face), ("dual", facial.dual_value_on_minimal_face)):
        try:
            sol = fn(doc.system, doc.c, cfg)
            res[side] = {"status": sol.status.value, "value": float(sol.value)}
        except (InfeasibleSystem, NumericalStop, NumericalLimit, CertificateRoundingFailed) as err:
            res[side] = {"status": "failed", "reason": str(err)}
    return res


def closedness_report(doc: io.SystemDocument, cfg=None, trace=None) -> dict:
    if doc.B is not None and not la.is_zero(doc.B):
        log.warning("closedness uses only the matrices A; the right-hand side B is ignored")
    res = cl.image_closedness(cl.LinearMapOnSym(doc.A), trace, cfg)
    out = {
        "command": "closedness",
        "mode": io.MODE_LABELS[doc.mode],
        "status": res.status.value,
        "r": res.verdict.slack.r,
        "normal_form": io.normal_form_to_json(res.normal_form),
    }
    if res.witness is not None:
        w = res.witness
        out["witness"] = io.to_jsonable(
            {
                "c": w.c,
                "c_normal_form": w.c_normal,
                "dual_infeasible": w.weak.dual_infeasible,
                "alternative_infeasible": w.weak.alternative_infeasible,
            }
        )
    return out


def certify_report(doc: io.SystemDocument, cert_data) -> dict:
    sys = doc.system
    c = io.certificate_from_json(cert_data, doc.mode, doc.n, doc.m)
    if "Q" in c:
        Q = c["Q"]
        sys = SemidefSystem(tuple(la.congruence(Q, a) for a in sys.A), la.congruence(Q, sys.B))
    kind = c["kind"]
    if kind == "slack":
        check = verify_max_rank(sys, c["Z"], [ReducingCertificate(y) for y in c["certificates"]])
    elif kind == "bad":
        r = c["r"]
        V = c.get("V")
        if V is None:
            V = sys.lhs(c["lambda"])
        column = c.get("column")
        if column is None:
            inside, column = la.range_contains(V[r:, r:], V[:r, r:].T)
            column = 0 if inside else column
        cert = pt.BadCertificate(c["lambda"], V, c["Z"], r, la.psd_check(V[r:, r:]), column, "supplied")
        check = certify.verify_bad(sys.with_r(r), cert)
    else:
        r = c["r"]
        cert = pt.GoodCertificate(c["U"], la.psd_check(c["U"]), c["kernel_basis"], c["Z"], r)
        check = certify.verify_good(sys.with_r(r), cert)
    return {"command": "certify", "kind": kind, "verified": bool(check), "reason": check.reason}


def direction_report(data) -> dict:
    mode, Z, V = io.parse_direction(data)
    d = cl.is_feasible_direction(Z, V)
    return {"command": "direction", "mode": io.MODE_LABELS[mode], "classification": d.value}


# ---------------------------------------------------------------- text rendering


def _text(report: dict) -> str:
    lines = []
    for key in ("command", "verdict", "status", "classification", "r", "verified", "reason", "target"):
        if key in report:
            lines.append(f"{key}: {report[key]}")
    cert = report.get("certificate")
    if cert:
        if cert["kind"] == "bad":
            lines.append(f"V = sum lambda_i A_i with lambda = {cert['lambda']}")
        else:
            lines.append(f"U = {cert['U']}")
    if "witness" in report:
        lines.append(f"frontier witness c = {report['witness']['c']}")
        lines.append(f"  (normal-form coordinates: {report['witness']['c_normal_form']})")
    if "primal_value" in report:
        lines.append(f"primal value: {report['primal_value']:.10g}")
        lines.append(f"dual value:   {report['dual_value']:.10g}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- click plumbing


def _read(path: str) -> bytes:
    if path == "-":
        return _sys.stdin.buffer.read()
    try:
        return Path(path).read_bytes()
    except OSError as err:
        raise SchemaError(f"cannot read file: {err.strerror}", path) from None


def _load_doc(path: str, mode: str | None) -> io.SystemDocument:
    doc = io.parse(_read(path))
    if mode:
        want = Mode.EXACT if mode == "exact" else Mode.FLOAT
        if want == Mode.FLOAT and doc.mode == Mode.EXACT:
            log.warning("rational input downgraded to float arithmetic")
        doc = doc.with_mode(want)
    return doc


def _cfg(tol: float | None):
    return SolverConfig(tol=tol) if tol else None


def _emit(ctx_obj, report: dict):
    if ctx_obj["output"] == "text":
        click.echo(_text(report), nl=False)
    else:
        click.echo(io.emit(report).decode(), nl=False)


def _trace(path: str | None, mode: Mode):
    """Supplied trace if the file exists; otherwise ``None`` plus a path to record into."""
    if path and Path(path).exists():
        return io.trace_from_json(Path(path).read_bytes(), mode), None
    return None, path


def _record_trace(path, report):
    if path and "normal_form" in report:
        Path(path).write_bytes(io.emit(report["normal_form"]["trace"]))


def _common(f):
    f = click.option("--mode", type=click.Choice(["exact", "float"]), default=None, help="Scalar arithmetic (default: from the document).")(f)
    f = click.option("--tol", type=float, default=None, help="Solver tolerance for auxiliary SDPs.")(f)
    f = click.option("--output", type=click.Choice(["json", "text"]), default="json")(f)
    return f


@click.group()
@click.option("-v", "--verbose", count=True, help="Log progress to standard error.")
@click.pass_context
def main(ctx, verbose):
    """Analyze semidefinite systems sum x_i A_i <= B for bad behavior."""
    logging.basicConfig(level=logging.WARNING - 10 * min(verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    ctx.ensure_object(dict)


def _timed(name, fn):
    t0 = time.perf_counter()
    out = fn()
    log.info("%s finished in %.3f s", name, time.perf_counter() - t0)
    return out


@main.command()
@_common
@click.option("--trace-file", type=click.Path(dir_okay=False), default=None, help="Trace to replay (if it exists) or to record.")
@click.argument("path")
def analyze(path, mode, tol, output, trace_file):
    """Verdict, maximum-rank slack, certificate and normal form."""
    doc = _load_doc(path, mode)
    trace, record_to = _trace(trace_file, doc.mode)
    report = _timed("analyze", lambda: analyze_report(doc, _cfg(tol), trace))
    _record_trace(record_to, report)
    _emit({"output": output}, report)


@main.command()
@_common
@click.argument("path")
def slack(path, mode, tol, output):
    """Maximum-rank slack with its reducing certificates."""
    doc = _load_doc(path, mode)
    _emit({"output": output}, _timed("slack", lambda: slack_report(doc, _cfg(tol))))


@main.command()
@_common
@click.option("--target", type=click.Choice(["bad", "good"]), default=None)
@click.option("--trace-file", type=click.Path(dir_okay=False), default=None, help="Trace to replay (if it exists) or to record.")
@click.argument("path")
def reformulate(path, mode, tol, output, target, trace_file):
    """Bring the system into bad or good normal form."""
    doc = _load_doc(path, mode)
    trace, record_to = _trace(trace_file, doc.mode)
    report = _timed("reformulate", lambda: reformulate_report(doc, target, _cfg(tol), trace))
    _record_trace(record_to, report)
    _emit({"output": output}, report)


@main.command("solve")
@_common
@click.argument("path")
def solve_cmd(path, mode, tol, output):
    """Solve sup c^T x over the system and its dual numerically."""
    doc = _load_doc(path, mode)
    report = _timed("solve", lambda: solve_report(doc, _cfg(tol)))
    _emit({"output": output}, report)
    face = report.get("minimal_face")
    if report["status"] == Status.NUMERICAL_LIMIT.value and not (
        face and all(face[k]["status"] == Status.OPTIMAL.value for k in face)
    ):
        raise NumericalStop("solver stopped at its numerical limit")


@main.command()
@_common
@click.option("--trace-file", type=click.Path(dir_okay=False), default=None, help="Trace to replay (if it exists) or to record.")
@click.argument("path")
def closedness(path, mode, tol, output, trace_file):
    """Is the image of the PSD cone under Y -> (A_i . Y) closed?"""
    doc = _load_doc(path, mode)
    trace, record_to = _trace(trace_file, doc.mode)
    report = _timed("closedness", lambda: closedness_report(doc, _cfg(tol), trace))
    _record_trace(record_to, report)
    _emit({"output": output}, report)


@main.command("certify")
@_common
@click.option("--certificate", "cert_path", required=True, type=click.Path(dir_okay=False))
@click.argument("path")
def certify_cmd(path, mode, tol, output, cert_path):
    """Check a bad, good or slack certificate exactly."""
    doc = _load_doc(path, mode)
    report = certify_report(doc, _read(cert_path))
    _emit({"output": output}, report)
    if not report["verified"]:
        raise VerificationFailed(report["reason"])


@main.command()
@_common
@click.argument("path")
def direction(path, mode, tol, output):
    """Classify V against the feasible directions of the PSD cone at Z."""
    _emit({"output": output}, direction_report(_read(path)))


INPUT_ERRORS = (
    SchemaError, AsymmetricMatrix, DimensionMismatch, ModeMismatch, InvalidStep,
    FingerprintMismatch, InfeasibleSystem, InfeasiblePoint, Unbounded,
)
VERIFY_ERRORS = (VerificationFailed, InconsistentCertificate, InconsistentSlack)
NUMERIC_ERRORS = (NumericalStop, NumericalLimit, CertificateRoundingFailed)


def run(argv=None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    try:
        main.main(args=list(argv) if argv is not None else None, standalone_mode=False, prog_name="sdpnormal")
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return EXIT_INPUT
    except click.exceptions.Abort:
        return EXIT_INPUT
    except INPUT_ERRORS as e:
        click.echo(f"input error: {e}", err=True)
        return EXIT_INPUT
    except VERIFY_ERRORS as e:
        click.echo(f"verification failed: {e}", err=True)
        return EXIT_VERIFY
    except NUMERIC_ERRORS as e:
        click.echo(f"numerical limit: {e}", err=True)
        return EXIT_NUMERIC
    return EXIT_OK


def entry():
    _sys.exit(run())


if __name__ == "__main__":
    entry()
