import csv
import json

from click.testing import CliRunner

from vdims.cli import main
from vdims.services import runner
from vdims.services.matrix_io import import_mtx, import_sms
from vdims.services.polyak import PolyakError
from vdims.services.weight_relations import CaseSpec, weight_matrix


def invoke(*args):
    return CliRunner().invoke(main, list(args))


def test_dump_diagrams():
    result = invoke("dump-diagrams", "--skeleton", "long", "--degree", "1")
    assert result.exit_code == 0
    assert result.output == "1: T1 H1\n1: H1 T1\n"
    round_two = invoke("dump-diagrams", "--skeleton", "round", "--degree", "2")
    assert len(round_two.output.splitlines()) == 4


def test_dump_signed_diagrams():
    result = invoke("dump-diagrams", "--skeleton", "descending", "--degree", "1", "--signed")
    assert result.output.splitlines() == ["1: T1- H1-", "1: T1+ H1+"]


def test_run_writes_csv(tmp_path):
    out = tmp_path / "report.csv"
    result = invoke("run", "--skeleton", "long", "--max-degree", "2", "--format", "csv", "--out", str(out))
    assert result.exit_code == 0, result.output
    rows = list(csv.DictReader(out.open()))
    assert [row["dim_w"] for row in rows] == ["1", "0", "2"]
    assert [row["dim_v"] for row in rows] == ["1", "0", "2"]


def test_run_json_weight_only(tmp_path):
    out = tmp_path / "report.json"
    result = invoke(
        "run", "--skeleton", "round", "--r23", "r2only", "--r1", "no",
        "--max-degree", "2", "--space", "w", "--format", "json", "--out", str(out),
    )
    assert result.exit_code == 0, result.output
    (report,) = json.loads(out.read_text())
    assert [r["dim_w"] for r in report["records"]] == [1, 1, 3]


def test_run_needs_a_case():
    result = invoke("run", "--max-degree", "1")
    assert result.exit_code == 2


def test_heavy_degree_is_refused():
    result = invoke("run", "--skeleton", "long", "--max-degree", "5")
    assert result.exit_code == 1
    assert "ALLOW_HEAVY" in result.output


def test_export_matrix(tmp_path):
    sms = tmp_path / "w.sms"
    result = invoke("export-matrix", "--skeleton", "long", "--degree", "2", "--out", str(sms))
    assert result.exit_code == 0, result.output
    expected = weight_matrix(CaseSpec.parse("long/standard/mod"), 2)
    assert import_sms(sms) == expected

    mtx = tmp_path / "p.mtx"
    result = invoke("export-matrix", "--skeleton", "long", "--degree", "2", "--space", "p", "--format", "mtx", "--out", str(mtx))
    assert result.exit_code == 0, result.output
    assert import_mtx(mtx).n_cols == 15


def test_verify_degree_one():
    result = invoke("verify", "--max-degree", "1")
    assert result.exit_code == 0, result.output
    assert "PASS 36  FAIL 0  SKIP 0" in result.output


def test_manifest():
    result = invoke("manifest", "--skeleton", "long", "--degree", "1")
    assert result.exit_code == 0
    assert result.output.splitlines()[0] == "case long/standard/mod"
    assert "basis total 3" in result.output


def test_export_matrix_by_case_label(tmp_path):
    sms = tmp_path / "braid.sms"
    result = invoke("export-matrix", "--case", "long/braid/no", "--degree", "2", "--out", str(sms))
    assert result.exit_code == 0, result.output
    assert import_sms(sms) == weight_matrix(CaseSpec.parse("long/braid/no"), 2)
    assert invoke("export-matrix", "--case", "long/braid", "--degree", "2", "--out", str(sms)).exit_code == 2


def test_verify_fails_when_a_case_crashes(monkeypatch):
    def broken(case, n, primes, mode=None):
        raise PolyakError("no pivot")

    monkeypatch.setattr(runner, "compute_polyak", broken)
    result = invoke("verify", "--max-degree", "1")
    assert result.exit_code == 1
    assert "FAILED long/standard/mod: PolyakError: no pivot" in result.output
    assert "ERROR 36" in result.output
