import csv
import io
import json
import subprocess
import sys

import pytest

from tailforge import campaigns, cli
from tailforge.hypergraph import Hypergraph


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestGen:
    def test_ap(self, tmp_path, capsys):
        path = tmp_path / "ap.json"
        code, out, _ = run(["gen", "ap", "--n", "10", "--k", "3", "--out", str(path)], capsys)
        assert code == 0
        assert Hypergraph.from_json(path.read_text()).num_edges == 20

    def test_schur_and_linsys_agree(self, tmp_path, capsys):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run(["gen", "schur", "--n", "12", "--out", str(a)], capsys)
        run(["gen", "linsys", "--n", "12", "--matrix", "[[1,1,-1]]", "--out", str(b)], capsys)
        assert Hypergraph.from_json(a.read_text()).edges == Hypergraph.from_json(b.read_text()).edges
        run(["gen", "schur", "--n", "3", "--out", str(a)], capsys)
        assert Hypergraph.from_json(a.read_text()).edges == ((1, 2, 3),)

    def test_unknown_generator_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["gen", "nope", "--n", "5"])
        assert exc.value.code == 1


class TestBound:
    def test_rows_carry_seed_and_hash(self, capsys, monkeypatch):
        monkeypatch.setenv("TAILFORGE_SEED", "41")
        code, out, _ = run(["bound", "--generator", "ap", "--n", "12", "--k", "3", "--p", "0.2,0.4",
                            "--eps", "1", "--theorems", "easy_p,randinduced"], capsys)
        assert code == 0
        table = rows(out)
        assert len(table) == 4
        assert {r["seed"] for r in table} == {"41"}
        assert len({r["config_hash"] for r in table}) == 1

    def test_not_applicable_still_exits_zero(self, capsys):
        code, out, _ = run(["bound", "--generator", "complete", "--n", "8", "--k", "3", "--p", "0.3",
                            "--eps", "1", "--theorems", "randinduced_small"], capsys)
        assert code == 0
        row = rows(out)[0]
        assert row["status"] == "not_applicable" and row["log10_bound"] == "" and row["failing"]

    def test_config_file_and_override(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"generator": "ap", "n": 12, "k": 3, "p": [0.3], "eps": [1.0], "seed": 5,
                                   "theorems": "easy_p"}))
        _, out, _ = run(["bound", "--config", str(cfg)], capsys)
        _, out2, _ = run(["bound", "--config", str(cfg), "--seed", "6"], capsys)
        assert rows(out)[0]["seed"] == "5" and rows(out2)[0]["seed"] == "6"
        assert rows(out)[0]["config_hash"] != rows(out2)[0]["config_hash"]

    def test_bad_config_is_usage_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("[1, 2]")
        code, _, err = run(["bound", "--config", str(bad)], capsys)
        assert code == 1 and "config" in err


class TestSimulate:
    def test_zero_trials(self, capsys):
        code, _, err = run(["simulate", "--generator", "ap", "--n", "10", "--k", "3", "--p", "0.3", "--eps", "1",
                            "--trials", "0"], capsys)
        assert code == 1 and "trials" in err

    def test_needs_exactly_one_grid(self, capsys):
        code, _, _ = run(["simulate", "--generator", "ap", "--n", "10", "--k", "3", "--p", "0.3", "--m", "4",
                          "--eps", "1", "--trials", "10"], capsys)
        assert code == 1

    def test_bad_m(self, capsys):
        code, _, _ = run(["simulate", "--generator", "ap", "--n", "10", "--k", "3", "--m", "40", "--eps", "1",
                          "--trials", "10"], capsys)
        assert code == 1

    def test_byte_identical(self, capsys):
        argv = ["simulate", "--generator", "ap", "--n", "14", "--k", "3", "--p", "0.3,0.5", "--eps", "0.5,1",
                "--trials", "3000", "--seed", "9"]
        _, first, _ = run(argv + ["--threads", "1"], capsys)
        _, second, _ = run(argv + ["--threads", "8"], capsys)
        assert first == second
        assert [r["threshold"] for r in rows(first)][:2] == sorted([r["threshold"] for r in rows(first)][:2])

    def test_graph_target(self, capsys):
        code, out, _ = run(["simulate", "--generator", "subgraph-edge", "--pattern", "K3", "--n", "8",
                            "--p", "0.3", "--eps", "1", "--trials", "500", "--seed", "1"], capsys)
        assert code == 0 and rows(out)[0]["regime"] == "graph-binomial"


class TestVerifyAndReport:
    def test_quick_verify(self, tmp_path, capsys):
        out = tmp_path / "v.json"
        code, text, _ = run(["verify", "--quick", "--campaigns", "chernoff,bk", "--out", str(out)], capsys)
        assert code == 0
        assert json.loads(out.read_text())["violation_count"] == 0
        assert text.count("violations=0") == 2

    def test_unknown_campaign(self, capsys):
        code, _, _ = run(["verify", "--campaigns", "nope"], capsys)
        assert code == 1

    def test_violation_exit_code(self, capsys, monkeypatch):
        fake = [{"campaign": "chernoff", "cases": 1, "checks": 1, "violation_count": 1,
                 "violations": [{"case": 0}], "stats": {}}]
        monkeypatch.setattr(campaigns, "run_all", lambda *a, **k: fake)
        code, text, err = run(["verify", "--campaigns", "chernoff"], capsys)
        assert code == 2 and "VIOLATION" in text and err

    def test_report_join(self, tmp_path, capsys):
        bpath, spath = tmp_path / "b.csv", tmp_path / "s.csv"
        common = ["--generator", "ap", "--n", "12", "--k", "3", "--p", "0.3", "--eps", "1"]
        run(["bound", *common, "--theorems", "easy_p", "--out", str(bpath)], capsys)
        run(["simulate", *common, "--trials", "2000", "--seed", "3", "--out", str(spath)], capsys)
        code, out, _ = run(["report", "--bounds", str(bpath), "--simulate", str(spath)], capsys)
        assert code == 0
        row = rows(out)[0]
        assert row["estimate"] != "" and row["consistent"] == "true"


def test_console_script_usage_error():
    res = subprocess.run([sys.executable, "-m", "tailforge.cli", "bound", "--p"], capture_output=True, text=True)
    assert res.returncode == 1
    assert "usage" in res.stderr
