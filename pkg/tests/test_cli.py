import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from kgtopos.cli import main

DATA = Path(__file__).parent / "data"
FAN = str(DATA / "fan.txt")
PRODUCT = str(DATA / "product_presheaf.json")
UNDERSIZED = str(DATA / "undersized_presheaf.json")


@pytest.fixture()
def runner():
    return CliRunner()


class TestMatrices:
    def test_adjacency_out_matches_golden(self, runner):
        result = runner.invoke(main, ["matrices", FAN, "--adjacency-out"])
        assert result.exit_code == 0
        assert result.output == (DATA / "adjacency_out.csv").read_text()

    def test_head_matches_golden(self, runner):
        result = runner.invoke(main, ["matrices", FAN, "--head"])
        assert result.output == (DATA / "head_incidence.csv").read_text()

    def test_tail_matches_golden(self, runner):
        result = runner.invoke(main, ["matrices", FAN, "--tail"])
        assert result.output == (DATA / "tail_incidence.csv").read_text()

    def test_all_matrices_with_headers(self, runner):
        result = runner.invoke(main, ["matrices", FAN])
        assert "# head\n" in result.output and "# adjacency-in\n" in result.output

    def test_json_format(self, runner):
        result = runner.invoke(main, ["matrices", FAN, "--format", "json"])
        data = json.loads(result.output)
        assert data["adjacency_out"] == [
            [0, 1, 0, 0],
            [1, 0, 0, 0],
            [0, 0, 0, 1],
            [0, 0, 1, 0],
        ]

    def test_empty_file(self, runner, tmp_path):
        empty = tmp_path / "empty.txt"
        empty.write_text("")
        result = runner.invoke(main, ["matrices", str(empty), "--head"])
        assert result.exit_code == 0
        assert result.output == ""

    def test_malformed_line_exits_2(self, runner, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("A r B\noops\n")
        result = runner.invoke(main, ["matrices", str(bad)])
        assert result.exit_code == 2
        assert "line 2" in result.output or "line 2" in (result.stderr or "")


class TestLine:
    def test_dot_output(self, runner):
        result = runner.invoke(main, ["line", FAN, "--format", "dot"])
        assert result.exit_code == 0
        assert 't0 [label="A --r1--> B"];' in result.output

    def test_json_components(self, runner):
        result = runner.invoke(main, ["line", FAN, "--format", "json"])
        data = json.loads(result.output)
        assert data["components"] == [[0, 1], [2, 3]]

    def test_csv_matches_matrix(self, runner):
        result = runner.invoke(main, ["line", FAN, "--format", "csv"])
        assert result.output == (DATA / "adjacency_out.csv").read_text()


class TestFreecat:
    def test_json_shape(self, runner):
        result = runner.invoke(main, ["freecat", FAN])
        data = json.loads(result.output)
        assert data["objects"] == ["A", "B", "C", "D"]
        assert data["hom_sets"]["D->C"] == [[3]]

    def test_cyclic_needs_bound(self, runner, tmp_path):
        loop = tmp_path / "loop.txt"
        loop.write_text("A r B\nB s A\n")
        result = runner.invoke(main, ["freecat", str(loop)])
        assert result.exit_code == 2
        bounded = runner.invoke(main, ["freecat", str(loop), "--max-path-length", "2"])
        assert bounded.exit_code == 0


class TestCovers:
    def test_path_covering_dump(self, runner):
        result = runner.invoke(main, ["covers", FAN, "--topology", "path"])
        data = json.loads(result.output)
        assert data["covering"]["B"] == [["0", "2"], ["0", "2", "id@B"]]

    def test_atomic_covering_dump(self, runner):
        result = runner.invoke(main, ["covers", FAN, "--topology", "atomic"])
        data = json.loads(result.output)
        assert data["covering"]["B"] == [["0", "2", "id@B"]]

    def test_sieve_cap_exit_3(self, runner, tmp_path):
        wide = tmp_path / "wide.txt"
        wide.write_text("".join(f"s{i} r T\n" for i in range(13)))
        result = runner.invoke(main, ["covers", str(wide)])
        assert result.exit_code == 3


class TestSheafCommands:
    def test_check_product_is_sheaf(self, runner):
        result = runner.invoke(main, ["sheaf", "check", FAN, PRODUCT])
        assert result.exit_code == 0
        assert json.loads(result.output) == {"is_sheaf": True}

    def test_check_undersized_fails(self, runner):
        result = runner.invoke(main, ["sheaf", "check", FAN, UNDERSIZED])
        assert result.exit_code == 1
        data = json.loads(result.output)
        assert data["is_sheaf"] is False
        assert "counterexample" in data

    def test_glue_pair(self, runner, tmp_path):
        family = tmp_path / "family.json"
        family.write_text(
            json.dumps({"object": "B", "assignment": {"0": "a1", "2": "d1"}})
        )
        result = runner.invoke(
            main, ["sheaf", "glue", FAN, PRODUCT, "--family", str(family)]
        )
        assert result.exit_code == 0
        assert json.loads(result.output) == {"object": "B", "section": "(a1,d1)"}

    def test_sheafify_counts(self, runner):
        result = runner.invoke(main, ["sheaf", "sheafify", FAN, UNDERSIZED])
        data = json.loads(result.output)
        assert data["section_counts"]["B"] == 2
        assert data["is_sheaf"] is True

    def test_global_sections(self, runner):
        result = runner.invoke(main, ["sheaf", "global", FAN, PRODUCT])
        data = json.loads(result.output)
        assert data["count"] == 2

    def test_omega_counts(self, runner):
        result = runner.invoke(main, ["sheaf", "omega", FAN, "--topology", "path"])
        data = json.loads(result.output)
        assert data["section_counts"] == {"A": 2, "B": 4, "C": 4, "D": 2}
        assert data["is_sheaf"] is True

    def test_adjoint(self, runner, tmp_path):
        constant = tmp_path / "constant.json"
        constant.write_text(
            json.dumps(
                {
                    "sections": {o: ["x", "y"] for o in "ABCD"},
                    "restrictions": {
                        t: {"x": "x", "y": "y"}
                        for t in ("A r1 B", "A r2 C", "D r3 B", "D r4 C")
                    },
                }
            )
        )
        result = runner.invoke(
            main, ["sheaf", "adjoint", FAN, str(constant), "--other", PRODUCT]
        )
        assert result.exit_code == 0
        data = json.loads(result.output)
        assert data["passed"] is True
        assert data["hom_into_path_sheaf"] == data["hom_from_atomic_presheaf"] == 4


class TestVerify:
    def test_fan_verifies_clean(self, runner):
        result = runner.invoke(main, ["verify", FAN])
        assert result.exit_code == 0
        assert "all checks passed" in result.output

    def test_json_format(self, runner):
        result = runner.invoke(main, ["verify", FAN, "--format", "json"])
        data = json.loads(result.output)
        assert data["passed"] is True
        names = {c["name"] for c in data["checks"]}
        assert "line.scc_theorem" in names and "sheaf.omega" in names

    def test_no_input_exits_2(self, runner):
        result = runner.invoke(main, ["verify"])
        assert result.exit_code == 2

    def test_seed_env_fallback(self, runner, monkeypatch):
        monkeypatch.setenv("KGTOPOS_SEED", "7")
        result = runner.invoke(main, ["verify", FAN])
        assert "seed=7" in result.output

    def test_random_small_run(self, runner):
        result = runner.invoke(main, ["verify", "--random", "--cases", "8", "--seed", "3"])
        assert result.exit_code == 0

    def test_deterministic_output(self, runner):
        first = runner.invoke(main, ["verify", "--random", "--cases", "4", "--seed", "9",
                                     "--format", "json"])
        second = runner.invoke(main, ["verify", "--random", "--cases", "4", "--seed", "9",
                                      "--format", "json"])
        strip = lambda out: [
            {k: v for k, v in c.items() if k != "seconds"}
            for c in json.loads(out)["checks"]
        ]
        assert strip(first.output) == strip(second.output)

    def test_byte_identical_across_processes(self):
        # Hash randomization differs per interpreter process; covering
        # sieve dumps and sheafification output must not depend on it.
        import subprocess
        import sys

        def run(args):
            return subprocess.run(
                [sys.executable, "-m", "kgtopos", *args],
                capture_output=True,
                text=True,
                timeout=60,
            ).stdout

        for args in (
            ["covers", FAN, "--topology", "path"],
            ["sheaf", "sheafify", FAN, UNDERSIZED],
            ["sheaf", "omega", FAN],
        ):
            assert run(args) == run(args)

    def test_gated_checks_report_skipped(self, runner, tmp_path):
        # Fourteen morphisms point into T, past the sieve cap: the site
        # and sheaf checks must say so instead of silently passing.
        wide = tmp_path / "wide.txt"
        wide.write_text("".join(f"s{i} r T\n" for i in range(13)))
        result = runner.invoke(main, ["verify", str(wide)])
        assert result.exit_code == 0
        assert "SKIPPED sites.axioms" in result.output

    def test_cyclic_graph_skips_category_checks(self, runner, tmp_path):
        loop = tmp_path / "loop.txt"
        loop.write_text("A r B\nB s A\n")
        result = runner.invoke(main, ["verify", str(loop)])
        assert result.exit_code == 0
        assert "SKIPPED freecat.walk_count" in result.output
        assert "PASS" in result.output  # matrix-level checks still ran

    def test_check_failures_exit_1(self, runner, monkeypatch):
        from kgtopos import cli as cli_module
        from kgtopos.verify import CheckResult, VerifyReport

        def fake_verification(*args, **kwargs):
            return VerifyReport(
                0,
                (CheckResult("line.scc_theorem", "fail", "planted witness", 0.0),),
            )

        monkeypatch.setattr(cli_module, "run_verification", fake_verification)
        result = runner.invoke(main, ["verify", FAN])
        assert result.exit_code == 1
        assert "FAIL" in result.output and "planted witness" in result.output
