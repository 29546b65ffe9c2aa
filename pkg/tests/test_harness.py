"""Harness sampling, report determinism, and the CLI surface."""

import json
import os

import pytest

from qcfrac import (
    CheckSpec,
    ConfigError,
    Corollary3Params,
    EmptyRegion,
    MassonParams,
    ParameterSet10,
    QContext,
    Report,
    run_check,
    sample_params,
)
from qcfrac.cli import main

CTX = QContext(q=0.35, identity_tol=1e-6, series_tol=1e-14)


# ---------------------------------------------------------------------------
# Sampling


def test_sampler_reproducible():
    a = sample_params("interior", 5, 42, CTX)
    b = sample_params("interior", 5, 42, CTX)
    assert [(p.a, p.b, p.f) for p in a] == [(p.a, p.b, p.f) for p in b]


def test_interior_points_inside_annulus():
    for p in sample_params("interior", 8, 7, CTX):
        assert isinstance(p, MassonParams)
        with CTX.workprec():
            s, aq = abs(p.s), abs(p.a * CTX.q)
            assert aq * abs(CTX.q) < s < aq


def test_contiguous_points_balanced():
    for p in sample_params("contiguous", 5, 3, CTX):
        assert isinstance(p, ParameterSet10)
        p.validate(CTX)


def test_corollary3_points_in_region():
    for p in sample_params("corollary3", 5, 3, CTX):
        assert isinstance(p, Corollary3Params)
        z = abs(p.b * p.c * p.d * p.e / (p.a ** 2 * CTX.q))
        assert z <= 0.5


def test_empty_region():
    with pytest.raises(EmptyRegion):
        sample_params("corollary3", 3, 0, CTX, z_max=1e-9)


def test_unknown_region():
    with pytest.raises(ConfigError):
        sample_params("nowhere", 1, 0, CTX)


# ---------------------------------------------------------------------------
# run_check and Report


def test_unknown_check_name():
    with pytest.raises(ConfigError):
        CheckSpec(name="bogus", ctx=CTX)


def test_report_byte_identical_for_same_spec():
    spec = CheckSpec(name="pincherle", ctx=CTX, seed=1, count=3, depth=100)
    r1 = run_check(spec).to_json()
    r2 = run_check(spec).to_json()
    assert r1 == r2


def test_report_schema_and_status():
    rep = run_check(CheckSpec(name="corollary2", ctx=CTX, seed=2, count=5))
    assert isinstance(rep, Report)
    doc = json.loads(rep.to_json())
    assert doc["check"] == "corollary2"
    assert doc["summary"]["total"] == len(doc["records"])
    for rec in doc["records"]:
        assert rec["status"] in ("pass", "fail", "error")
        assert rec["index"] >= 0
    assert doc["passed"] is rep.passed


def test_report_csv_flat_table():
    rep = run_check(CheckSpec(name="asymptotics", ctx=CTX, seed=1, count=2))
    lines = rep.to_csv().strip().splitlines()
    assert lines[0].startswith("check,index,status")
    assert len(lines) == 1 + len(rep.records)


def test_check_all_covers_every_suite():
    rep = run_check(CheckSpec(name="all", ctx=CTX, seed=4, count=2, depth=100))
    names = {r["check"] for r in rep.records}
    assert names == {"contiguous", "recurrence_residuals", "asymptotics",
                     "pincherle", "theorem1", "corollary2", "corollary3",
                     "aw_limit_trend"}
    assert rep.passed


def test_point_errors_are_captured_not_raised():
    # a tiny term budget makes series raise MaxTermsExceeded; the report
    # must record errors instead of raising
    ctx = QContext(q=0.6, identity_tol=1e-6, series_tol=1e-14, max_terms=20)
    rep = run_check(CheckSpec(name="pincherle", ctx=ctx, seed=1, count=2,
                              depth=30))
    assert rep.summary["total"] == 2
    assert not rep.passed
    for rec in rep.records:
        if rec["status"] == "error":
            assert "detail" in rec


# ---------------------------------------------------------------------------
# CLI


MASSON_INLINE = "a=0.55,b=0.3,c=0.35,d=0.4,e=0.45,f=0.0165"


def _masson_inline():
    # an interior point: f solved so s = a q^1.5
    p = sample_params("interior", 1, 9, CTX)[0]
    from qcfrac import scalar_to_json
    return ",".join(f"{k}={scalar_to_json(getattr(p, k), 25)}"
                    for k in ("a", "b", "c", "d", "e", "f"))


def test_cli_eval_cf_and_theorem1_agree(capsys):
    inline = _masson_inline()
    assert main(["eval", "cf", "--q", "0.35", "--params", inline,
                 "--depth", "80"]) == 0
    v1 = json.loads(capsys.readouterr().out)["value"]
    assert main(["eval", "theorem1", "--q", "0.35", "--params", inline]) == 0
    v2 = json.loads(capsys.readouterr().out)["value"]
    assert abs(float(v1) - float(v2)) < 1e-6 * abs(float(v1))


def test_cli_eval_corollary3(capsys):
    assert main(["eval", "corollary3", "--q", "0.3", "--params",
                 "a=0.7,b=0.3,c=0.3,d=0.3,e=0.3", "--N", "16"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert abs(float(doc["value"]) - 0.604840971025) < 1e-9
    assert abs(float(doc["bridge_value"]) - float(doc["value"])) < 1e-6


def test_cli_params_file_with_q(tmp_path, capsys):
    f = tmp_path / "point.json"
    f.write_text(json.dumps({
        "q": "0.3", "a": "0.7", "b": "0.3", "c": "0.3", "d": "0.3",
        "e": "0.3",
    }))
    assert main(["eval", "corollary3", "--params", str(f)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert abs(float(doc["value"]) - 0.604840971025) < 1e-9


def test_cli_check_exit_zero_iff_pass(tmp_path, capsys):
    out = tmp_path / "rep.json"
    code = main(["check", "corollary2", "--q", "0.35", "--count", "5",
                 "--seed", "1", "--identity-tol", "1e-10",
                 "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["passed"] is True


def test_cli_check_csv_format(capsys):
    assert main(["check", "asymptotics", "--q", "0.35", "--count", "2",
                 "--seed", "2", "--identity-tol", "1e-6",
                 "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("check,index,status")


def test_cli_sweep_depth(capsys):
    inline = _masson_inline()
    assert main(["sweep", "depth", "--q", "0.35", "--params", inline,
                 "--values", "20,40,80", "--identity-tol", "1e-8"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["stable"] is True
    assert len(doc["steps"]) == 2


def test_cli_sweep_precision(capsys):
    inline = _masson_inline()
    assert main(["sweep", "precision", "--q", "0.35", "--params", inline,
                 "--target", "theorem1", "--values", "53,100",
                 "--identity-tol", "1e-8"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["stable"] is True


def test_cli_missing_q_is_config_error(capsys):
    assert main(["eval", "cf", "--params", MASSON_INLINE]) == 2
    assert "ConfigError" in capsys.readouterr().err


def test_cli_env_var_precision_default(capsys, monkeypatch):
    monkeypatch.setenv("QCFRAC_PRECISION_BITS", "90")
    from qcfrac.cli import build_parser
    args = build_parser().parse_args(
        ["eval", "cf", "--q", "0.3", "--params", MASSON_INLINE])
    assert args.precision_bits == 90
    # explicit flag wins
    args = build_parser().parse_args(
        ["eval", "cf", "--q", "0.3", "--params", MASSON_INLINE,
         "--precision-bits", "60"])
    assert args.precision_bits == 60
