import pytest

from commca import (
    Graph,
    complete_graph,
    disjoint_union,
    format_communities,
    format_graph,
    format_scenario,
    load_scenario,
    parse_graph,
)
from commca.cli import main
from commca.graph import CommunityLayout
from commca.scenarios import example2, example3


def write_graph(tmp_path, g, name="graph.txt"):
    path = tmp_path / name
    path.write_text(format_graph(g))
    return str(path)


def write_communities(tmp_path, layout, name="communities.txt"):
    path = tmp_path / name
    path.write_text(format_communities(layout))
    return str(path)


def split_graph():
    edges = [(u, v) for u in range(5) for v in range(u + 1, 5)]
    edges += [(u, v) for u in range(5, 9) for v in range(u + 1, 9)]
    edges += [(4, v) for v in range(5, 9)]
    return Graph(9, edges)


INTRUDER_DOC = """\
graph
n 5
0 1
0 2
0 3
1 2
1 3
2 3
0 4
communities
community 1: 0 1 2 3
community 2: 4
malicious
3 4
init
community 1: explicit 2.0 2.0 2.0
community 2: explicit
malicious: constant 60.0
protocol
alpha 0.9
rounds 10
seed 0
"""


class TestCheckRobustness:
    def test_rs_pass(self, tmp_path, capsys):
        path = write_graph(tmp_path, complete_graph(9))
        assert main(["check", path, "--rs", "1", "2"]) == 0
        assert "robust: yes" in capsys.readouterr().out

    def test_rs_fail_prints_witness(self, tmp_path, capsys):
        path = write_graph(tmp_path, split_graph())
        assert main(["check", path, "--rs", "1", "2"]) == 1
        out = capsys.readouterr().out
        assert "robust: no" in out
        assert "first subset:" in out

    def test_plain_r_fail(self, tmp_path, capsys):
        g = disjoint_union(complete_graph(3), complete_graph(3))
        path = write_graph(tmp_path, g)
        assert main(["check", path, "--r", "0"]) == 1
        assert "neither side has a reachable agent" in capsys.readouterr().out

    def test_plain_r_pass(self, tmp_path):
        path = write_graph(tmp_path, complete_graph(3))
        assert main(["check", path, "--r", "2"]) == 0

    def test_exactly_one_mode_required(self, tmp_path, capsys):
        path = write_graph(tmp_path, complete_graph(3))
        assert main(["check", path, "--rs", "1", "1", "--r", "0"]) == 2
        assert main(["check", path]) == 2

    def test_community_mode_needs_communities_file(self, tmp_path, capsys):
        path = write_graph(tmp_path, complete_graph(9))
        assert main(["check", path, "--community", "2"]) == 2
        assert "--communities" in capsys.readouterr().err


class TestCheckCommunities:
    def test_community_pass(self, tmp_path, capsys):
        gpath = write_graph(tmp_path, complete_graph(9))
        cpath = write_communities(
            tmp_path, CommunityLayout([range(9)], {7, 8})
        )
        rc = main(["check", gpath, "--communities", cpath, "--community", "2"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "community 1: community=yes" in out

    def test_community_degree_failure(self, tmp_path, capsys):
        gpath = write_graph(tmp_path, complete_graph(9))
        cpath = write_communities(tmp_path, CommunityLayout([range(9)]))
        rc = main(["check", gpath, "--communities", cpath, "--community", "4"])
        assert rc == 1
        assert "failed=degree" in capsys.readouterr().out

    def test_communities_must_cover_graph(self, tmp_path, capsys):
        gpath = write_graph(tmp_path, complete_graph(4))
        cpath = write_communities(tmp_path, CommunityLayout([{0, 1}]))
        rc = main(["check", gpath, "--communities", cpath, "--community", "0"])
        assert rc == 2


class TestCheckErrors:
    def test_unparseable_graph(self, tmp_path, capsys):
        path = tmp_path / "bad.txt"
        path.write_text("nodes 5\n")
        assert main(["check", str(path), "--rs", "0", "1"]) == 2
        assert "error:" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["check", str(tmp_path / "nope.txt"), "--rs", "0", "1"]) == 2

    def test_cap_exit_code(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("COMMCA_CAP", "4")
        path = write_graph(tmp_path, Graph(9, [(i, i + 1) for i in range(8)]))
        assert main(["check", path, "--rs", "0", "1"]) == 3
        assert "cap" in capsys.readouterr().err

    def test_force_lifts_cap(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("COMMCA_CAP", "4")
        path = write_graph(tmp_path, Graph(9, [(i, i + 1) for i in range(8)]))
        assert main(["check", path, "--rs", "0", "1", "--force"]) in (0, 1)

    def test_bad_cap_value(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("COMMCA_CAP", "lots")
        path = write_graph(tmp_path, complete_graph(3))
        assert main(["check", path, "--rs", "0", "1"]) == 2
        assert "COMMCA_CAP" in capsys.readouterr().err

    def test_raised_cap_allows_larger_graphs(self, tmp_path, monkeypatch):
        monkeypatch.setenv("COMMCA_CAP", "16")
        path = write_graph(tmp_path, Graph(16, [(i, i + 1) for i in range(15)]))
        assert main(["check", path, "--r", "0"]) in (0, 1)


class TestRun:
    def test_example_two_reports_split(self, tmp_path, capsys):
        out = tmp_path / "out"
        rc = main(
            ["run", "--example", "2", "--rounds", "600", "--out", str(out)]
        )
        assert rc == 1
        printed = capsys.readouterr().out
        assert "community 1: agreement=yes" in printed
        assert "community 2: agreement=no" in printed
        assert "clusters=2" in printed
        for name in ("trace.csv", "verdict.txt", "scenario.txt"):
            assert (out / name).exists()
        csv = (out / "trace.csv").read_text().splitlines()
        assert csv[0] == "round,agent,community,role,value"
        assert len(csv) == 1 + 25 * 601
        reloaded = load_scenario((out / "scenario.txt").read_text())
        assert reloaded == example2(rounds=600)
        assert (out / "verdict.txt").read_text().startswith("parameters:")

    def test_scenario_document_input(self, tmp_path, capsys):
        doc = tmp_path / "doc.txt"
        doc.write_text(
            "graph\nn 5\n"
            + "\n".join(
                f"{u} {v}" for u in range(5) for v in range(u + 1, 5)
            )
            + "\ncommunities\ncommunity 1: 0 1 2 3 4\nmalicious\n4\n"
            "init\ncommunity 1: normal 10.0 1.0\nmalicious: constant 60.0\n"
            "protocol\nalpha 0.9\nrounds 400\nseed 1\n"
        )
        rc = main(["run", "--scenario", str(doc), "--out", str(tmp_path / "o")])
        assert rc == 0
        assert "agreement=yes" in capsys.readouterr().out

    def test_invalid_rounds_override(self, capsys, tmp_path):
        rc = main(
            ["run", "--example", "1", "--rounds", "0", "--out", str(tmp_path)]
        )
        assert rc == 2
        assert "round count" in capsys.readouterr().err

    def test_example_and_scenario_flags_conflict(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            main(
                [
                    "run",
                    "--example",
                    "1",
                    "--scenario",
                    "doc.txt",
                    "--out",
                    str(tmp_path),
                ]
            )
        assert info.value.code == 2

    def test_custom_thresholds_change_verdict(self, tmp_path, capsys):
        out = tmp_path / "loose"
        rc = main(
            [
                "run",
                "--example",
                "2",
                "--rounds",
                "600",
                "--eps",
                "10.0",
                "--out",
                str(out),
            ]
        )
        assert rc == 0
        assert "community 2: agreement=yes" in capsys.readouterr().out


class TestScenarioCommand:
    def test_stdout_document_reproduces_example(self, capsys):
        assert main(["scenario", "--example", "3"]) == 0
        text = capsys.readouterr().out
        assert load_scenario(text) == example3()

    def test_seed_override_carried_into_document(self, capsys):
        assert main(["scenario", "--example", "3", "--seed", "7"]) == 0
        text = capsys.readouterr().out
        assert load_scenario(text) == example3(seed=7)

    def test_output_file(self, tmp_path, capsys):
        target = tmp_path / "doc.txt"
        assert main(["scenario", "--example", "2", "--out", str(target)]) == 0
        assert load_scenario(target.read_text()) == example2()


class TestVerifyProp1:
    def test_example_two_exhaustive_with_force(self, capsys):
        rc = main(["verify-prop1", "--example", "2", "--rounds", "80", "--force"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "community 1: preservation ok over 65535 subsets" in out
        assert "community 2: not a community (failed robustness)" in out
        assert "community 1: isolation ok over 80 rounds" in out

    def test_large_community_hits_cap_without_force(self, capsys):
        rc = main(["verify-prop1", "--example", "2", "--rounds", "80"])
        assert rc == 3

    def test_sampled_mode_on_example_one(self, capsys):
        rc = main(
            [
                "verify-prop1",
                "--example",
                "1",
                "--mode",
                "sampled",
                "--samples",
                "300",
                "--rounds",
                "60",
            ]
        )
        assert rc == 0
        out = capsys.readouterr().out
        assert "preservation ok over 300 subsets (sampled, threshold 2)" in out
        assert "isolation ok over 60 rounds" in out

    def test_uncertified_isolation_is_informational(self, tmp_path, capsys):
        doc = tmp_path / "doc.txt"
        doc.write_text(INTRUDER_DOC)
        rc = main(["verify-prop1", "--scenario", str(doc)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "not a community" in out
        assert "isolation violated" in out
        assert "[community predicate not met; informational]" in out
