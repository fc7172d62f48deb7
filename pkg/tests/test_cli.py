import csv
import io
import json

import networkx as nx
import pytest

from twinwidth.bipartite import build
from twinwidth.cli import main, run_instance
from twinwidth.graphio import parse_graph, serialize_graph
from twinwidth.trigraph import ContractionSequence


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, out


def report(out):
    return json.loads(out)


def write_graph(tmp_path, G, name="g.json", fmt="json"):
    p = tmp_path / name
    p.write_text(serialize_graph(G, fmt))
    return p


def test_gen_formats(tmp_path, capsys):
    for fmt in ("json", "edge-list", "graph6", "pace"):
        out = tmp_path / f"g.{fmt}"
        code, _ = run(capsys, "gen", "--family", "planar-tri", "--n", 30, "--seed", 2, "--format", fmt, "--out", out)
        assert code == 0
        G = parse_graph(out.read_text(), fmt)
        assert (G.number_of_nodes(), G.number_of_edges()) == (30, 84)


def test_gen_to_stdout(capsys):
    code, out = run(capsys, "gen", "--family", "bipartite", "--n", 3)
    assert code == 0
    assert json.loads(out)["n"] == 11


def test_gen_unknown_family_is_rejected():
    with pytest.raises(SystemExit) as exc:
        main(["gen", "--family", "nope", "--n", "5"])
    assert exc.value.code == 2


def test_solve_exact(tmp_path, capsys):
    g = write_graph(tmp_path, nx.cycle_graph(5))
    out = tmp_path / "seq.json"
    code, text = run(capsys, "solve-exact", "--input", g, "--out", out)
    rep = report(text)
    assert code == 0 and rep["ok"] and rep["exact"] == 2 == rep["width"]
    assert len(ContractionSequence.from_json(out.read_text())) == 4


def test_solve_exact_budget(tmp_path, capsys):
    g = write_graph(tmp_path, nx.cycle_graph(5))
    code, text = run(capsys, "solve-exact", "--input", g, "--budget", 1)
    assert code == 0 and report(text)["exceeds_budget"]


def test_solve_exact_cap(tmp_path, capsys):
    g = write_graph(tmp_path, nx.path_graph(12))
    code, _ = run(capsys, "solve-exact", "--input", g)
    assert code == 1


def test_seq_tw_with_and_without_td(tmp_path, capsys):
    g, td = tmp_path / "g.json", tmp_path / "g.td"
    run(capsys, "gen", "--family", "ktree", "--n", 60, "--k", 3, "--seed", 1, "--out", g, "--td-out", td)
    code, text = run(capsys, "seq-tw", "--input", g, "--td", td, "--assert-bound")
    rep = report(text)
    assert code == 0 and rep["width"] <= rep["bound"] == 12
    code, text = run(capsys, "seq-tw", "--input", g)
    assert code == 0 and report(text)["complete"]


def test_assert_bound_value_fails(tmp_path, capsys):
    g = write_graph(tmp_path, nx.petersen_graph())
    code, text = run(capsys, "seq-tw", "--input", g, "--assert-bound", 0)
    assert code == 1
    assert "above asserted bound" in report(text)["error"]


def test_seq_bw(tmp_path, capsys):
    g, bd = tmp_path / "g.json", tmp_path / "g.bd"
    run(capsys, "gen", "--family", "grid", "--n", 20, "--k", 4, "--out", g, "--bd-out", bd)
    code, text = run(capsys, "seq-bw", "--input", g, "--scd", bd, "--assert-bound")
    rep = report(text)
    assert code == 0 and rep["decomposition_width"] == 4 and rep["width"] <= rep["bound"] == 16


def test_seq_bw_star(tmp_path, capsys):
    g = write_graph(tmp_path, nx.star_graph(5))
    bd = tmp_path / "empty.bd"
    bd.write_text("")
    code, text = run(capsys, "seq-bw", "--input", g, "--scd", bd)
    assert code == 0 and report(text)["width"] == 0


def test_seq_planar_with_trace_and_embedding(tmp_path, capsys):
    g, emb, trace = tmp_path / "g.json", tmp_path / "g.rot", tmp_path / "trace.json"
    run(capsys, "gen", "--family", "planar-tri", "--n", 120, "--seed", 3, "--out", g, "--embedding-out", emb)
    code, text = run(capsys, "seq-planar", "--input", g, "--embedding", emb, "--trace", trace, "--assert-bound")
    rep = report(text)
    assert code == 0 and rep["width"] <= 183
    assert json.loads(trace.read_text())["stats"]["width"] == rep["width"]


def test_seq_planar_rejects_non_planar(tmp_path, capsys):
    g = write_graph(tmp_path, nx.complete_graph(5))
    code, _ = run(capsys, "seq-planar", "--input", g)
    assert code == 2


def test_seq_bipartite_and_audit(tmp_path, capsys):
    out = tmp_path / "b.json"
    code, text = run(capsys, "seq-bipartite", "--n", 6, "--k", 2, "--out", out, "--assert-bound")
    rep = report(text)
    assert code == 0 and rep["width"] <= rep["bound"] == 4
    code, text = run(capsys, "audit-bipartite", "--n", 6, "--sequence", out)
    assert code == 0 and report(text)["violations"] == []
    g = write_graph(tmp_path, build(6))
    code, text = run(capsys, "verify", g, out)
    assert code == 0 and report(text)["width"] == rep["width"]


def test_seq_bipartite_bad_k(capsys):
    code, _ = run(capsys, "seq-bipartite", "--n", 4, "--k", 9)
    assert code == 1


def test_verify_detects_broken_sequence(tmp_path, capsys):
    g = write_graph(tmp_path, nx.path_graph(4))
    s = tmp_path / "s.json"
    s.write_text(ContractionSequence(4, [(0, 1, 4), (0, 2, 5)]).to_json())
    code, text = run(capsys, "verify", g, s)
    rep = report(text)
    assert code == 1 and rep["step"] == 1


def test_verify_claimed_width_too_small(tmp_path, capsys):
    g = write_graph(tmp_path, nx.cycle_graph(5))
    s = tmp_path / "s.json"
    s.write_text(ContractionSequence(5, [(0, 2, 5), (1, 3, 6), (4, 5, 7), (6, 7, 8)], claimed_width=0).to_json())
    code, text = run(capsys, "verify", g, s)
    assert code == 1 and "exceeds claimed" in report(text)["error"]


def test_verify_unreadable_inputs(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    g = write_graph(tmp_path, nx.path_graph(3))
    assert main(["verify", str(tmp_path / "missing.json"), str(bad)]) == 2
    assert main(["verify", str(g), str(bad)]) == 2


def test_bench_json_and_csv(tmp_path, capsys):
    code, text = run(capsys, "bench", "--family", "outerplanar", "--sizes", 20, 30, "--seeds", 2,
                     "--strategies", "spherecut", "treewidth-seq", "planar183", "--assert-bound")
    data = json.loads(text)
    assert code == 0
    assert len(data["rows"]) == 12
    assert all(s["all_passed"] for s in data["summary"])
    out = tmp_path / "b.csv"
    code, _ = run(capsys, "bench", "--family", "ktree", "--sizes", 40, "--seeds", 2, "--k", 2,
                  "--strategies", "treewidth-seq", "--format", "csv", "--out", out, "--jobs", 2)
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert code == 0 and rows[-1]["family"] == "summary" and len(rows) == 3


def test_bench_unknown_strategy(capsys):
    code, _ = run(capsys, "bench", "--family", "grid", "--sizes", 8, "--strategies", "magic")
    assert code == 2


def test_bench_row_reports_errors():
    row = run_instance("ktree", 20, 0, "spherecut")
    assert not row.passed and "branch decomposition" in row.error


def test_noose_class_command(capsys):
    code, text = run(capsys, "claim5", "--tight", 5, "--random", 10, "--seed", 1)
    rep = report(text)
    assert code == 0 and rep["ok"]
    assert rep["rows"][0] == {"kind": "tight", "k": 5, "classes": 16, "bound": 16}
    assert len(rep["rows"]) == 11


def test_bipartite_lb(capsys):
    code, text = run(capsys, "bipartite-lb", "--n", 16)
    assert code == 0 and report(text)["lower_bound"] == 11
