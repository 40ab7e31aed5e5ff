import json
import math

import pytest

from advsel.cli import EXIT_INPUT, EXIT_OK, EXIT_VIOLATION, main
from advsel.core import Instance, RngSeed
from advsel.scheffe import candidates_to_json, planted_suite


@pytest.fixture()
def fig1_file(tmp_path):
    path = tmp_path / "fig1.json"
    path.write_text(Instance((2.0, 1.0, 0.0, 1.0)).to_json())
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


class TestSelect:
    def test_pivot_killer_example(self, capsys):
        code, out = run_cli(capsys, "select", "--gen", "zeros:10",
                            "--algo", "q-select", "--adversary", "pivot-killer",
                            "--seed", "1", "--json")
        assert code == EXIT_OK
        rec = json.loads(out)
        assert rec["queries"] == 45
        assert rec["winner_value"] == 0.0

    def test_file_instance_compl(self, capsys, fig1_file):
        code, out = run_cli(capsys, "select", "--file", fig1_file,
                            "--algo", "compl", "--seed", "7", "--json")
        rec = json.loads(out)
        assert code == EXIT_OK
        assert rec["winner_value"] >= rec["max_value"] - 2

    def test_lemma1_generator(self, capsys):
        code, out = run_cli(capsys, "select", "--gen", "lemma1:5",
                            "--algo", "compl", "--seed", "3", "--json")
        rec = json.loads(out)
        assert code == EXIT_OK
        assert rec["gap"] <= 1.0
        assert rec["queries"] == 10

    def test_json_round_trip_identity(self, capsys):
        _, out = run_cli(capsys, "select", "--gen", "zeros:6",
                         "--algo", "q-select", "--adversary", "smaller-wins",
                         "--seed", "2", "--json")
        rec = json.loads(out)
        assert json.dumps(rec, sort_keys=True) == out.strip()

    def test_seed_echoed_when_omitted(self, capsys):
        code, out = run_cli(capsys, "select", "--gen", "zeros:4",
                            "--algo", "seq", "--json")
        rec = json.loads(out)
        assert code == EXIT_OK and isinstance(rec["seed"], int)

    def test_same_seed_same_output(self, capsys):
        args = ("select", "--gen", "uniform01:12", "--algo", "comb",
                "--adversary", "random", "--seed", "9", "--json")
        _, out1 = run_cli(capsys, *args)
        _, out2 = run_cli(capsys, *args)
        assert out1 == out2

    def test_bad_instance_file(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        code, _ = run_cli(capsys, "select", "--file", str(bad),
                          "--algo", "compl", "--seed", "1")
        assert code == EXIT_INPUT

    def test_bad_generator(self, capsys):
        code, _ = run_cli(capsys, "select", "--gen", "nope:3",
                          "--algo", "compl", "--seed", "1")
        assert code == EXIT_INPUT

    def test_bad_algo(self, capsys):
        code, _ = run_cli(capsys, "select", "--gen", "zeros:3",
                          "--algo", "magic", "--seed", "1")
        assert code == EXIT_INPUT

    def test_invalid_explicit_adversary(self, capsys, tmp_path):
        inst = tmp_path / "i.json"
        inst.write_text('{"values": [2.0, 0.0]}')
        spec = '{"kind": "explicit", "edges": [[0, 1, 1]]}'
        code, _ = run_cli(capsys, "select", "--file", str(inst),
                          "--algo", "compl", "--adversary", spec, "--seed", "1")
        assert code == EXIT_INPUT

    def test_violation_exit_code(self, capsys, monkeypatch):
        class Liar:
            def decide(self, instance, i, j, log, pivot):
                return min(i, j)

        import advsel.cli as cli_mod
        monkeypatch.setattr(cli_mod, "_build_adversary",
                            lambda spec, inst, g, rng: Liar())
        code, out = run_cli(capsys, "select", "--gen", "distinct:4",
                            "--algo", "compl", "--seed", "1", "--json")
        assert code == EXIT_VIOLATION
        assert json.loads(out)["violations"] > 0


class TestSort:
    def test_distinct_descending(self, capsys):
        code, out = run_cli(capsys, "sort", "--gen", "distinct:8",
                            "--algo", "q-sort", "--seed", "5", "--json")
        rec = json.loads(out)
        assert code == EXIT_OK
        assert rec["values_in_order"] == sorted(rec["values_in_order"], reverse=True)
        assert rec["sorted_within_2"] is True

    def test_compl_sort(self, capsys):
        code, out = run_cli(capsys, "sort", "--gen", "lemma2:7",
                            "--algo", "compl-sort", "--seed", "1", "--json")
        rec = json.loads(out)
        assert code == EXIT_OK
        assert rec["queries"] == 21
        assert sorted(rec["order"]) == list(range(7))


class TestBench:
    def test_writes_csv(self, capsys, tmp_path):
        cfg = {"algorithm": "compl", "instance": "zeros:8",
               "adversary": "lower-index-wins", "t": 2.0, "trials": 30,
               "seed": 4}
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        out_path = tmp_path / "out.csv"
        code, out = run_cli(capsys, "bench", "--config", str(cfg_path),
                            "--out", str(out_path), "--json")
        assert code == EXIT_OK
        rec = json.loads(out)
        assert rec["error_rate"] == 0.0 and rec["q_mean"] == 28.0
        lines = out_path.read_text().strip().split("\n")
        assert len(lines) == 2 and lines[0].startswith("algorithm,")

    def test_seedless_config_rejected(self, capsys, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"algorithm": "compl",
                                        "instance": "zeros:4",
                                        "adversary": "random", "trials": 5}))
        code, _ = run_cli(capsys, "bench", "--config", str(cfg_path))
        assert code == EXIT_INPUT


class TestScheffe:
    @pytest.fixture()
    def cands_file(self, tmp_path):
        p0, cands = planted_suite(12, 10, 0.1, RngSeed(2).generator())
        path = tmp_path / "cands.json"
        path.write_text(candidates_to_json(p0, cands))
        return str(path)

    @pytest.mark.parametrize("method", ["tournament", "quickselect"])
    def test_methods(self, capsys, cands_file, method):
        code, out = run_cli(capsys, "scheffe", "--file", cands_file,
                            "--k", "4000", "--method", method,
                            "--seed", "2", "--json")
        rec = json.loads(out)
        assert code == EXIT_OK
        assert rec["l1_to_p0"] <= 9 * rec["min_l1"] + 1.0
        if method == "tournament":
            assert rec["tests"] == math.comb(12, 2)

    def test_support_mismatch(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"support": 3, "p0": [0.5, 0.5],
                                    "candidates": [[1.0, 0.0]]}))
        code, _ = run_cli(capsys, "scheffe", "--file", str(path), "--k", "10")
        assert code == EXIT_INPUT


class TestReport:
    def test_small_scale_report_reproducible(self, capsys, tmp_path):
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        for out in (out1, out2):
            code, _ = run_cli(capsys, "report", "--seed", "3",
                              "--out", str(out), "--max-n", "256",
                              "--scale", "0.05")
            assert code == EXIT_OK
        csv1 = (out1 / "bound_report.csv").read_bytes()
        csv2 = (out2 / "bound_report.csv").read_bytes()
        assert csv1 == csv2
        header = csv1.decode().split("\n")[0]
        assert header.startswith("algorithm,adversary,n,t,epsilon,trials,")

    def test_seed_required(self, capsys):
        code, _ = run_cli(capsys, "report")
        assert code == EXIT_INPUT
