#!/usr/bin/env python3
"""
Tests for the command-line front end: commands, output formats and exit codes
"""

import json
import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'src'))

from yoneda_workbench import cli
from yoneda_workbench.modules.identities import SuiteResult

DATA = Path(__file__).resolve().parent.parent / "data"
ALGEBRAS = DATA / "algebras"
COMPLEXES = DATA / "complexes"
DUAL = str(ALGEBRAS / "dual_numbers_f2.toml")
A2 = str(ALGEBRAS / "a2_rational.toml")
NAKAYAMA = str(ALGEBRAS / "cyclic_nakayama_f3.toml")
RADICAL = str(ALGEBRAS / "radical_square_zero_f2.toml")


def run_json(capsys, argv):
    """Run the CLI with JSON output and parse what it printed"""
    code = cli.main(argv + ["--format", "json"])
    out = capsys.readouterr().out
    return code, json.loads(out)


@pytest.mark.unit
class TestCommands:
    """Test each command on the shipped algebras"""

    def test_algebra_check(self, capsys):
        """The projectives of A2 have dimensions 2 and 1"""
        code = cli.main(["algebra", "check", "--algebra", A2])
        out = capsys.readouterr().out
        assert code == 0
        assert "a2_rational: valid algebra of dimension 3" in out

    def test_algebra_check_json(self, capsys):
        """JSON rows follow the fixed schema"""
        code, payload = run_json(capsys, ["algebra", "check", "--algebra", A2])
        assert code == 0
        assert set(payload) == {"command", "algebra", "parameters", "table", "warnings"}
        assert [row["value"] for row in payload["table"]] == [2, 1]
        assert payload["parameters"]["self_injective"] is False

    def test_bar_dump(self, capsys):
        """Four keys per degree over the dual numbers"""
        code, payload = run_json(capsys, ["bar", "dump", "--algebra", DUAL, "--max-deg", "2"])
        assert code == 0
        assert [(row["degree"], row["value"]) for row in payload["table"]] == [(-2, 4), (-1, 4), (0, 4)]

    def test_ext(self, capsys):
        """Ext^n(S1, S2) over A2"""
        code, payload = run_json(capsys, ["ext", "S1", "S2", "--algebra", A2, "--max-deg", "2"])
        assert code == 0
        assert [row["value"] for row in payload["table"]] == [0, 1, 0]

    def test_tate(self, capsys):
        """Tate cohomology of k is one-dimensional"""
        argv = ["tate", "k", "--algebra", DUAL, "--window=-1..1", "--stab-count", "2", "--max-stage", "6"]
        code, payload = run_json(capsys, argv)
        assert code == 0
        assert [row["value"] for row in payload["table"]] == [1, 1, 1]
        assert all(row["stable"] for row in payload["table"])
        assert payload["parameters"]["range"] == "-1..1"

    def test_dsg_hom(self, capsys):
        """Shifts swap the simples of the Nakayama algebra"""
        argv = ["dsg-hom", "S1", "S2", "--algebra", NAKAYAMA, "--range", "0..1", "--stab-count", "2"]
        code, payload = run_json(capsys, argv + ["--max-stage", "6"])
        assert code == 0
        assert [row["value"] for row in payload["table"]] == [0, 1]

    def test_complex_from_file(self, capsys):
        """A resolution of S1 vanishes in the singularity category"""
        path = str(COMPLEXES / "a2_simple_resolution.toml")
        argv = ["tate", path, "--algebra", A2, "--window", "0..0", "--stab-count", "2", "--max-stage", "6"]
        code, payload = run_json(capsys, argv)
        assert code == 0
        assert payload["table"][0]["value"] == 0

    def test_resolve(self, capsys):
        """Betti numbers of S1 over A2"""
        code, payload = run_json(capsys, ["resolve", "S1", "--algebra", A2, "--max-deg", "2"])
        assert code == 0
        assert [row["value"] for row in payload["table"]] == [1, 1, 0]

    def test_gorenstein(self, capsys):
        """One simple with Ext^1(S, Λ) ≠ 0 over A2"""
        code, payload = run_json(capsys, ["gorenstein", "--algebra", A2, "--max-deg", "4"])
        assert code == 0
        assert [row["value"] for row in payload["table"]] == [1, 0, 0, 0]
        assert payload["parameters"]["consistent"] is True
        assert payload["warnings"] == []

    def test_csv(self, capsys):
        """CSV starts with the column header"""
        code = cli.main(["ext", "k", "k", "--algebra", DUAL, "--max-deg", "2", "--format", "csv"])
        lines = capsys.readouterr().out.splitlines()
        assert code == 0
        assert lines[0] == "degree,value,stable,stage"
        assert len(lines) == 4

    def test_out_file(self, tmp_path, capsys):
        """--out writes the rendering to a file"""
        target = tmp_path / "ext.json"
        argv = ["ext", "k", "k", "--algebra", DUAL, "--max-deg", "1", "--format", "json"]
        code = cli.main(argv + ["--out", str(target)])
        assert code == 0
        assert capsys.readouterr().out == ""
        assert json.loads(target.read_text(encoding="utf-8"))["command"] == "ext"

    def test_deterministic(self, capsys):
        """Repeated runs print the same bytes"""
        argv = ["ext", "S1", "S2", "--algebra", A2, "--max-deg", "2", "--format", "json"]
        cli.main(argv)
        first = capsys.readouterr().out
        cli.main(argv)
        assert capsys.readouterr().out == first


@pytest.mark.unit
class TestExitCodes:
    """Test errors, strict mode and failed verification"""

    def test_unknown_module(self, capsys):
        """Unknown object names exit with 1"""
        code = cli.main(["ext", "Q7", "S1", "--algebra", A2])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_k_needs_local_algebra(self, capsys):
        """'k' is ambiguous over a quiver with two vertices"""
        assert cli.main(["ext", "k", "k", "--algebra", A2]) == 1

    def test_vertex_out_of_range(self, capsys):
        """S3 does not exist over A2"""
        assert cli.main(["resolve", "S3", "--algebra", A2]) == 1

    def test_missing_document(self, tmp_path, capsys):
        """A missing algebra file is reported, not raised"""
        assert cli.main(["algebra", "check", "--algebra", str(tmp_path / "none.toml")]) == 1
        assert "No such document" in capsys.readouterr().err

    def test_bad_window(self, capsys):
        """Empty ranges are rejected"""
        assert cli.main(["tate", "k", "--algebra", DUAL, "--window", "3..1"]) == 1

    def test_missing_algebra_flag(self):
        """argparse exits on a missing required option"""
        with pytest.raises(SystemExit):
            cli.main(["ext", "k", "k"])

    def test_strict_non_stabilization(self, capsys):
        """--strict turns a missing stabilization into exit code 2"""
        argv = ["tate", "k", "--algebra", DUAL, "--window", "0..0", "--stab-count", "3", "--max-stage", "1"]
        assert cli.main(argv + ["--strict"]) == 2
        out = capsys.readouterr().out
        assert "warning:" in out
        assert cli.main(argv) == 0

    def test_compare_low_window(self, capsys):
        """A window reaching below the stages that fit exits with 1 instead of crashing"""
        argv = ["compare", "k", "--algebra", DUAL, "--window=-8..1", "--stab-count", "3", "--max-stage", "10"]
        assert cli.main(argv) == 1
        assert "needs max stage" in capsys.readouterr().err

    def test_failed_verify(self, mocker, capsys):
        """A failing suite makes verify exit with 1"""
        broken = SuiteResult("broken", 1, ["sample 0"])
        mocker.patch.object(cli, "run_suites", return_value=[broken])
        mocker.patch.object(cli, "singular_agreement", return_value=SuiteResult("agreement", 1))
        code, payload = run_json(capsys, ["verify", "--algebra", DUAL])
        assert code == 1
        rows = {row["suite"]: row for row in payload["table"]}
        assert rows["broken"]["value"] == 1
        assert rows["broken"]["stable"] is False
        assert rows["agreement"]["stable"] is True

    def test_verify_without_oracle(self, mocker, capsys):
        """Algebras without an oracle skip the agreement suite with a warning"""
        mocker.patch.object(cli, "run_suites", return_value=[SuiteResult("ok", 1)])
        code, payload = run_json(capsys, ["verify", "--algebra", RADICAL])
        assert code == 0
        assert any("No singularity-category oracle" in w for w in payload["warnings"])


@pytest.mark.slow
class TestVerify:
    """Run the real suites through the CLI"""

    def test_verify_dual_numbers(self, capsys):
        """Every suite passes over the dual numbers"""
        argv = ["verify", "--algebra", DUAL, "--samples", "2", "--window=-1..1", "--stab-count", "2"]
        code = cli.main(argv + ["--max-stage", "6", "--max-deg", "3"])
        out = capsys.readouterr().out
        assert code == 0
        assert "all identity suites passed" in out

    def test_stab_and_compare(self, capsys):
        """𝕊(k) and the comparison over the dual numbers"""
        code, payload = run_json(capsys, ["stab", "k", "--algebra", DUAL, "--window=-2..2"])
        assert code == 0
        assert all(row["value"] == 2 and row["stable"] for row in payload["table"])
        argv = ["compare", "k", "--algebra", DUAL, "--window=-1..1", "--stab-count", "1", "--max-stage", "8"]
        code, payload = run_json(capsys, argv)
        assert code == 0
        assert payload["parameters"]["certified"] is True

    def test_complete_resolution(self, capsys):
        """resolve --complete reports the Gorenstein evidence"""
        argv = ["resolve", "k", "--complete", "--algebra", DUAL, "--window=-1..2"]
        code, payload = run_json(capsys, argv)
        assert code == 0
        assert payload["parameters"]["matches_injective_resolution"] is True

    def test_compare_without_gorenstein(self, capsys):
        """Over the radical square zero algebra c_k is not certified and --strict exits with 2"""
        argv = ["compare", "k", "--algebra", RADICAL, "--window", "0..0", "--stab-count", "1", "--max-stage", "3"]
        code, payload = run_json(capsys, argv)
        assert code == 0
        assert payload["parameters"]["certified"] is False
        assert any("did not settle" in w for w in payload["warnings"])
        assert cli.main(argv + ["--strict"]) == 2

    def test_complete_resolution_without_gorenstein(self, capsys):
        """A failed Gorenstein probe is a warning, and an error under --strict"""
        argv = ["resolve", "k", "--complete", "--algebra", RADICAL, "--window=-1..1"]
        code, payload = run_json(capsys, argv)
        assert code == 0
        assert payload["parameters"]["gorenstein_consistent"] is False
        assert any("fails the Gorenstein probe" in w for w in payload["warnings"])
        assert cli.main(argv + ["--strict"]) == 2
