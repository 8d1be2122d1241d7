import json
import subprocess
import sys

import numpy as np
import pytest

from heatchern.cli import main
from heatchern.models import zero_mode_triple
from heatchern.serialization import dumps_canonical, triple_to_json

EXCHANGE = {
    "dim": 2,
    "Q": [[0, 1], [1, 0]],
    "gamma": [[1, 0], [0, -1]],
}

PAULI_SPLIT = {
    "dim": 4,
    "Q1": [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]],
    "Q2": [
        [0, 0, [0, -1], 0],
        [0, 0, 0, [0, -1]],
        [[0, 1], 0, 0, 0],
        [0, [0, 1], 0, 0],
    ],
    "gamma": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, -1, 0], [0, 0, 0, -1]],
}


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(dumps_canonical(doc))
    return str(p)


def run_main(args):
    return main(args)


class TestIndex:
    def test_zero_mode_index(self, tmp_path, capsys):
        doc = triple_to_json(zero_mode_triple())
        path = write(tmp_path, "t.json", doc)
        assert run_main(["index", "--input", path]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["values"][0] == [1.0, 0.0]
        assert out["provenance"]["seed"] == 0


class TestPair:
    def test_exchange_gamma(self, tmp_path, capsys):
        doc = dict(EXCHANGE)
        doc["a"] = [[1, 0], [0, -1]]
        path = write(tmp_path, "p.json", doc)
        assert run_main(["pair", "--input", path]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["value"][0] == pytest.approx(2.0, abs=1e-9)
        assert abs(out["value"][1]) < 1e-12
        assert out["series_value"][0] == pytest.approx(2.0, abs=1e-8)

    def test_block_input(self, tmp_path, capsys):
        doc = dict(EXCHANGE)
        a = np.kron(np.eye(2), np.diag([1.0, -1.0]))
        doc["a"] = {
            "m": 2,
            "matrix": [[[float(x), 0.0] for x in row] for row in a],
        }
        path = write(tmp_path, "p2.json", doc)
        assert run_main(["pair", "--input", path]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["value"][0] == pytest.approx(4.0, abs=1e-8)


class TestValidate:
    def test_good_triple(self, tmp_path, capsys):
        path = write(tmp_path, "t.json", EXCHANGE)
        assert run_main(["validate", "--input", path]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["passed"] is True

    def test_bad_triple_exit_one(self, tmp_path, capsys):
        doc = dict(EXCHANGE)
        doc["Q"] = [[1, 0], [0, 1]]  # commutes with gamma
        path = write(tmp_path, "bad.json", doc)
        assert run_main(["validate", "--input", path]) == 1
        out = json.loads(capsys.readouterr().out)
        names = [c["name"] for c in out["checks"] if not c["passed"]]
        assert "Q gamma + gamma Q = 0" in names

    def test_split_validation(self, tmp_path, capsys):
        path = write(tmp_path, "s.json", PAULI_SPLIT)
        assert run_main(["validate", "--input", path]) == 0


class TestSweepCommands:
    def sweep_doc(self):
        doc = dict(EXCHANGE)
        doc["a"] = [[1, 0], [0, -1]]
        doc["q"] = [[0, [0, 1]], [[0, -1], 0]]  # gamma-odd hermitian
        return doc

    def test_sweep_invariance(self, tmp_path, capsys):
        path = write(tmp_path, "sw.json", self.sweep_doc())
        code = run_main(
            ["sweep", "--input", path, "--lambda-grid=-0.4:0.4:5"]
        )
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert out["table"]["spread"] < 1e-6

    def test_sweep_csv(self, tmp_path):
        path = write(tmp_path, "sw.json", self.sweep_doc())
        outp = tmp_path / "out.csv"
        code = run_main(
            [
                "sweep",
                "--input",
                path,
                "--lambda-grid=-0.2:0.2:3",
                "--format",
                "csv",
                "--output",
                str(outp),
            ]
        )
        assert code == 0
        lines = outp.read_text().strip().split("\n")
        assert lines[0].startswith("lambda,re(value),im(value)")
        assert len(lines) == 4

    def test_beta_scan(self, tmp_path, capsys):
        doc = dict(EXCHANGE)
        doc["a"] = [[1, 0], [0, -1]]
        path = write(tmp_path, "b.json", doc)
        code = run_main(["beta-scan", "--input", path, "--beta-list", "0.5,1,2"])
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert out["table"]["spread"] < 1e-6

    def test_endpoint(self, tmp_path, capsys):
        doc = self.sweep_doc()
        doc["regularizer"] = [[0.5, 0], [0, 1.5]]
        path = write(tmp_path, "e.json", doc)
        code = run_main(
            [
                "endpoint",
                "--input",
                path,
                "--lambda-grid",
                "0.1:0.3:2",
                "--eps-grid",
                "0:0.4:3",
            ]
        )
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert len(out["table"]["rows"]) == 6

    def test_deterministic_outputs(self, tmp_path):
        path = write(tmp_path, "sw.json", self.sweep_doc())
        o1, o2 = tmp_path / "a.json", tmp_path / "b.json"
        for o in (o1, o2):
            assert (
                run_main(
                    [
                        "sweep",
                        "--input",
                        path,
                        "--lambda-grid=-0.2:0.2:3",
                        "--seed",
                        "7",
                        "--output",
                        str(o),
                    ]
                )
                == 0
            )
        assert o1.read_bytes() == o2.read_bytes()


class TestSplitCommands:
    def test_split_pair(self, tmp_path, capsys):
        doc = dict(PAULI_SPLIT)
        doc["a"] = [
            [1, 0, 0, 0],
            [0, -1, 0, 0],
            [0, 0, -1, 0],
            [0, 0, 0, 1],
        ]
        path = write(tmp_path, "sp.json", doc)
        assert run_main(["split-pair", "--input", path]) == 0
        out = json.loads(capsys.readouterr().out)
        assert (
            abs(out["series_value"][0] - out["quadrature_value"][0]) < 1e-8
        )

    def test_coupling_sweep(self, tmp_path, capsys):
        from heatchern.serialization import matrix_to_json, split_to_json
        from heatchern.split import build_n2_susy_example

        s, gens = build_n2_susy_example(levels=((1.0, 0.5),))
        doc = split_to_json(s)
        doc["a"] = matrix_to_json(s.gamma)
        doc["q2_tilde"] = matrix_to_json(gens["Qt2"])
        path = write(tmp_path, "cs.json", doc)
        code = run_main(
            ["coupling-sweep", "--input", path, "--lambda-grid", "0:0.4:3"]
        )
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert out["table"]["spread"] < 1e-6


class TestJloCommand:
    def test_exact_component(self, tmp_path, capsys):
        doc = dict(EXCHANGE)
        doc["tuple"] = [[[1, 0], [0, 1]]]
        path = write(tmp_path, "j.json", doc)
        assert run_main(["jlo", "--input", path]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["level"] == 0
        assert abs(out["value"][0]) < 1e-12  # exchange index is 0


class TestErrors:
    def test_missing_file_exit_three(self, capsys):
        assert run_main(["index", "--input", "/nonexistent.json"]) == 3

    def test_malformed_json_exit_three(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        assert run_main(["index", "--input", str(p)]) == 3
        err = capsys.readouterr().err
        assert "error" in err

    def test_bad_grid_exit_three(self, tmp_path):
        doc = dict(EXCHANGE)
        doc["a"] = [[1, 0], [0, -1]]
        doc["q"] = [[0, [0, 1]], [[0, -1], 0]]
        path = write(tmp_path, "sw.json", doc)
        assert run_main(["sweep", "--input", path, "--lambda-grid", "nope"]) == 3

    def test_invalid_triple_exit_one(self, tmp_path):
        doc = dict(EXCHANGE)
        doc["Q"] = [[1, 0], [0, 1]]
        doc["a"] = [[1, 0], [0, -1]]
        path = write(tmp_path, "t.json", doc)
        assert run_main(["pair", "--input", path]) == 1

    def test_no_convergence_exit_two(self, tmp_path):
        doc = {
            "dim": 2,
            "Q": [[0, 3], [3, 0]],
            "gamma": [[1, 0], [0, -1]],
            "a": [[1, 0], [0, -1]],
        }
        path = write(tmp_path, "n.json", doc)
        assert run_main(["pair", "--input", path, "--max-level", "6"]) == 2


class TestSelftest:
    def test_table_and_report(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = run_main(["selftest", "--seed", "0", "--output", str(out)])
        assert code == 0
        table = capsys.readouterr().out
        assert "C01  PASS" in table
        assert "overall: PASS" in table
        doc = json.loads(out.read_text())
        assert doc["report"]["passed"] is True
        assert len(doc["report"]["criteria"]) == 15


class TestEntryPoint:
    def test_console_script_runs(self, tmp_path):
        doc = triple_to_json(zero_mode_triple())
        p = tmp_path / "t.json"
        p.write_text(dumps_canonical(doc))
        proc = subprocess.run(
            [sys.executable, "-m", "heatchern.cli", "index", "--input", str(p)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["values"][0] == [1.0, 0.0]
