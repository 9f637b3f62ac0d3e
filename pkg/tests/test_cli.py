import json
import subprocess
import sys
from pathlib import Path

import pytest

from flowsparse.cli import main
from flowsparse.jsonio import load_net, save_net
from flowsparse.network import TerminalNetwork


def run(args):
    return main([str(a) for a in args])


@pytest.fixture()
def qb_graph(tmp_path):
    out = tmp_path / "g.json"
    rc = run(["gen", "--kind", "quasi-bipartite", "--k", "4", "--n", "25",
              "--seed", "1", "--out", out])
    assert rc == 0
    return out


class TestGen:
    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            assert run(["gen", "--kind", "quasi-bipartite", "--k", "5",
                        "--n", "40", "--seed", "9", "--out", out]) == 0
        assert a.read_text() == b.read_text()

    def test_sp_emits_tree(self, tmp_path):
        g, t = tmp_path / "g.json", tmp_path / "t.json"
        assert run(["gen", "--kind", "sp", "--k", "4", "--leaves", "16",
                    "--seed", "2", "--out", g, "--sptree-out", t]) == 0
        tree = json.loads(t.read_text())
        assert tree["portals"] == ["s", "t"]

        def leaves(nd):
            if nd["type"] == "leaf":
                return 1
            return leaves(nd["left"]) + leaves(nd["right"])
        assert leaves(tree["root"]) == 16

    def test_bounded_component_w(self, tmp_path):
        from flowsparse.network import components_after_terminal_removal
        g = tmp_path / "g.json"
        assert run(["gen", "--kind", "bounded-component", "--k", "3",
                    "--n", "20", "--w", "3", "--seed", "3", "--out", g]) == 0
        net = load_net(str(g))
        assert all(len(c) <= 3 for c in components_after_terminal_removal(net))

    def test_manifest_written(self, qb_graph):
        manifest = json.loads(Path(f"{qb_graph}.manifest.json").read_text())
        assert manifest["command"] == "gen"
        assert manifest["seed"] == 1


class TestSparsifyVerify:
    def test_sample_roundtrip(self, qb_graph, tmp_path):
        h = tmp_path / "h.json"
        rep = tmp_path / "rep.json"
        assert run(["sparsify", "--method", "sample", "--M", "2", "--seed",
                    "7", "--graph", qb_graph, "--out", h]) == 0
        doc = json.loads(h.read_text())
        assert doc["meta"]["method"] == "sample"
        rc = run(["verify", "--g", qb_graph, "--gp", h, "--demands",
                  "random:5:1", "--claim", "4.0", "--out", rep])
        report = json.loads(rep.read_text())
        assert report["verdict"] in ("pass", "fail")
        assert rc in (0, 1)

    def test_ratio_method_verifies(self, qb_graph, tmp_path):
        h = tmp_path / "h.json"
        rep = tmp_path / "rep.json"
        assert run(["sparsify", "--method", "ratio", "--eps", "0.25",
                    "--graph", qb_graph, "--out", h]) == 0
        rc = run(["verify", "--g", qb_graph, "--gp", h, "--demands",
                  "disc:0.25:0.1", "--claim", "2.25", "--out", rep, "--cuts"])
        assert rc == 0
        report = json.loads(rep.read_text())
        assert report["verdict"] == "pass"
        assert "cuts" in report

    def test_verify_failure_exit_code(self, qb_graph, tmp_path):
        g = load_net(str(qb_graph))
        bad = TerminalNetwork.make(
            g.vertices, g.terminals,
            [(u, v, c * 10) for u, v, c in g.edges])
        badp = tmp_path / "bad.json"
        save_net(bad, str(badp))
        rep = tmp_path / "rep.json"
        rc = run(["verify", "--g", qb_graph, "--gp", badp, "--demands",
                  "random:3:1", "--claim", "1.5", "--out", rep])
        assert rc == 1

    def test_sp_on_non_sp_graph_exit_2(self, tmp_path):
        vs = ["a", "b", "c", "d"]
        edges = [(u, v, 1) for i, u in enumerate(vs) for v in vs[i + 1:]]
        net = TerminalNetwork.make(vs, ["a", "b"], edges)
        g = tmp_path / "k4.json"
        save_net(net, str(g))
        rc = run(["sparsify", "--method", "sp", "--graph", g,
                  "--out", tmp_path / "h.json"])
        assert rc == 2

    def test_sp_pipeline(self, tmp_path):
        g, t, h, rep = (tmp_path / n for n in
                        ("g.json", "t.json", "h.json", "rep.json"))
        assert run(["gen", "--kind", "sp", "--k", "4", "--leaves", "12",
                    "--seed", "4", "--out", g, "--sptree-out", t]) == 0
        assert run(["sparsify", "--method", "sp", "--graph", g,
                    "--sptree", t, "--out", h]) == 0
        base = load_net(str(g))
        cand = load_net(str(h), allow_disconnected=True)
        assert set(cand.terminal_set) >= set(base.terminals)

    def test_treewidth_pipeline(self, tmp_path):
        g, td, h = (tmp_path / n for n in ("g.json", "td.json", "h.json"))
        assert run(["gen", "--kind", "treewidth", "--k", "5", "--n", "18",
                    "--w", "2", "--seed", "5", "--out", g,
                    "--tdec-out", td]) == 0
        assert run(["sparsify", "--method", "treewidth", "--graph", g,
                    "--tdec", td, "--leaf", "identity", "--out", h]) == 0
        doc = json.loads(h.read_text())
        assert doc["meta"]["method"] == "treewidth"


class TestBudgetExit:
    def test_clump_default_demands_over_budget_exit_3(self, tmp_path):
        # eps < 1/8 triggers the default demand-set path, whose dictionary
        # is far larger than the dual-solve budget
        g = tmp_path / "g.json"
        assert run(["gen", "--kind", "quasi-bipartite", "--k", "3", "--n",
                    "12", "--seed", "2", "--out", g]) == 0
        rc = run(["sparsify", "--method", "clump", "--eps", "0.1",
                  "--graph", g, "--out", tmp_path / "h.json"])
        assert rc == 3


class TestSketchCli:
    def test_build_and_query(self, tmp_path):
        g = tmp_path / "g.json"
        save_net(TerminalNetwork.make(["s", "t"], ["s", "t"],
                                      [("s", "t", 10)]), str(g))
        sk = tmp_path / "g.sk"
        assert run(["sketch", "build", "--graph", g, "--eps", "0.1",
                    "--out", sk]) == 0
        d = tmp_path / "d.json"
        d.write_text(json.dumps([{"s": "s", "t": "t", "d": 1.0}]))
        assert run(["sketch", "query", "--sk", sk, "--demand", d]) == 0


class TestPlan:
    def test_prints_m(self, capsys):
        assert run(["plan", "--eps", "0.5", "--k", "5", "--fail", "0.1"]) == 0
        out = capsys.readouterr().out
        assert "M " in out and "predicted failure" in out


class TestDimacs:
    def test_import(self, tmp_path):
        dim = tmp_path / "g.dimacs"
        dim.write_text("c tiny instance\np max 3 2\na 1 2 5\na 2 3 7\n")
        side = tmp_path / "terms.json"
        side.write_text(json.dumps(["1", "3"]))
        out = tmp_path / "h.json"
        rc = run(["sparsify", "--method", "sample", "--M", "100", "--seed",
                  "1", "--graph", dim, "--format", "dimacs", "--terminals",
                  side, "--out", out])
        assert rc == 0
        net = load_net(str(out), allow_disconnected=True)
        assert net.cap("1", "2") == 5


def test_console_entrypoint_runs():
    proc = subprocess.run([sys.executable, "-m", "flowsparse.cli", "plan",
                           "--eps", "0.5", "--k", "4", "--fail", "0.1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "M " in proc.stdout
