"""Command-line interface: exit codes, output formats, determinism."""

import json

import pytest

from confsub import catalog, report
from confsub.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main
from confsub.manifest import KNOWN_CHECKS, parse_manifest

SMALL = """
total.dim    = 2
total.coords = x1 x2
total.metric = exp(-2*x2), 0 ; 0, 1
base.dim     = 1
base.coords  = y1
base.metric  = 1
map.components = x1
fields.xi  = total : 0, 0
soliton.xi = xi
soliton.mu = 1
checks = G2.12, R3.11, fit-mu, structure-flags
points.list = (0, 0) ; (1, 0.5) ; (-1, 1)
"""

# declares a soliton constant the metric does not satisfy: flat plane
# with mu = 1 makes fit-mu hard-fail
FAILING = """
total.dim    = 2
total.coords = x1 x2
total.metric = 1, 0 ; 0, 1
base.dim     = 1
base.coords  = y1
base.metric  = 1
map.components = x1
fields.xi  = total : 0, 0
soliton.xi = xi
soliton.mu = 1
checks = fit-mu
points.list = (0, 0) ; (1, 0.5)
"""


@pytest.fixture()
def small_manifest(tmp_path):
    path = tmp_path / "small.cfsm"
    path.write_text(SMALL)
    return str(path)


def test_verify_ok(small_manifest, capsys):
    assert main(["verify", small_manifest]) == EXIT_OK
    out = capsys.readouterr().out
    assert "G2.12" in out and "fit-mu" in out
    assert "pass=" in out


def test_verify_hard_failure_exit_code(tmp_path, capsys):
    path = tmp_path / "failing.cfsm"
    path.write_text(FAILING)
    assert main(["verify", str(path)]) == EXIT_FAIL
    out = capsys.readouterr().out
    assert "FAIL" in out


def test_verify_json_byte_deterministic(small_manifest, capsys):
    assert main(["verify", small_manifest, "--format", "json"]) == EXIT_OK
    first = capsys.readouterr().out
    assert main(["verify", small_manifest, "--format", "json"]) == EXIT_OK
    second = capsys.readouterr().out
    assert first == second
    payload = json.loads(first)
    assert set(payload) == {"job", "records", "counts", "flagged_fails",
                            "meta"}
    assert payload["counts"]["fail"] == 0
    for rec in payload["records"]:
        assert rec["verdict"] in ("pass", "fail", "hypothesis-not-met")


def test_missing_manifest_is_usage_error(capsys):
    assert main(["verify", "/no/such/file.cfsm"]) == EXIT_USAGE
    assert "error" in capsys.readouterr().err


def test_malformed_manifest_is_usage_error(tmp_path, capsys):
    path = tmp_path / "bad.cfsm"
    path.write_text("total.dim = 2\n")
    assert main(["verify", str(path)]) == EXIT_USAGE
    assert "error" in capsys.readouterr().err


def test_checks_override(small_manifest, capsys):
    assert main(["verify", small_manifest, "--checks", "L2.2"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "L2.2" in out
    assert "G2.12" not in out


def test_tol_override_loosens(small_manifest):
    # a huge tolerance cannot make valid checks fail
    assert main(["verify", small_manifest, "--tol", "1"]) == EXIT_OK


def test_example_command(capsys):
    assert main(["example", "5.4"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "no divergences" in out
    assert main(["example", "5.2"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "diverging" in out and "Ric(e1,e1)" in out


def test_example_json(capsys):
    assert main(["example", "5.2", "--format", "json"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["example"] == "5.2"
    assert payload["discrepancies"] == ["Ric(e1,e1) printed"]


def test_list_checks(capsys):
    assert main(["list-checks"]) == EXIT_OK
    out = capsys.readouterr().out.split()
    assert list(KNOWN_CHECKS) == out


def test_shipped_manifest_54_verifies_clean(capsys):
    from importlib.resources import files
    path = files("confsub") / "manifests" / "example_5_4.cfsm"
    assert main(["verify", str(path), "--checks",
                 "G2.12,R3.13,T3.4,fit-mu,harmonicity"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "fail=0" in out
