import json

import pytest
from hypothesis import given, settings, strategies as st

from treetop import __version__
from treetop.cli import main
from treetop.determinacy import Certificate
from treetop.tree import Tree, chain_tree


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def sigma(tmp_path):
    path = tmp_path / "t.json"
    assert run("gen", "--kind", "sigma-q", "--depth", 2, "--branching", 2, "--out", path) == 0
    return path


def test_gen_sigma_q(sigma):
    assert len(Tree.from_json(json.loads(sigma.read_text()))) == 7


def test_gen_t2_has_expansion_nodes(tmp_path):
    path = tmp_path / "t2.json"
    assert run("gen", "--kind", "t2", "--depth", 1, "--s-depth", 1, "--out", path) == 0
    payloads = [n["payload"] for n in json.loads(path.read_text())["nodes"]]
    assert any("pair" in p for p in payloads)
    assert (tmp_path / "t2.family.json").exists()


def test_gen_needs_a_kind():
    with pytest.raises(SystemExit) as exc:
        run("gen", "--depth", 2)
    assert exc.value.code == 2


def test_gen_rejects_negative_depth(tmp_path):
    assert run("gen", "--kind", "sigma-q", "--depth", -1, "--out", tmp_path / "x.json") == 3


def test_certify_2det(sigma, tmp_path):
    out = tmp_path / "r.json"
    assert run("certify", "--in", sigma, "--suite", "2det", "--out", out) == 0
    rep = json.loads(out.read_text())
    assert rep["ok"] and rep["result"]["derived_label_strict"]


def test_certify_with_a_broken_certificate(sigma, tmp_path):
    full = tmp_path / "full.json"
    run("certify", "--in", sigma, "--suite", "2det", "--out", full)
    from treetop.determinacy import build_2det_network
    from treetop.labels import height_label
    t = Tree.from_json(json.loads(sigma.read_text()))
    cert = build_2det_network(t, height_label(t))
    broken = Certificate(cert.sets[:3], cert.arity, cert.provenance[:3])
    cpath = tmp_path / "cert.json"
    cpath.write_text(json.dumps(broken.to_json()))
    out = tmp_path / "r.json"
    assert run("certify", "--in", sigma, "--suite", "2det", "--cert", cpath, "--out", out) == 1
    rep = json.loads(out.read_text())
    assert rep["result"]["separation"]["failures"]


def test_unknown_suite(sigma):
    with pytest.raises(SystemExit) as exc:
        run("certify", "--in", sigma, "--suite", "4det")
    assert exc.value.code == 2


def test_export_chain(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text(chain_tree(3).dumps())
    assert run("export", "--in", path) == 0
    assert capsys.readouterr().out.count("->") == 2


def test_export_t1_captions(tmp_path, capsys):
    path = tmp_path / "t1.json"
    run("gen", "--kind", "t1", "--depth", 1, "--branching", 2, "--out", path)
    capsys.readouterr()
    assert run("export", "--in", path) == 0
    dot = capsys.readouterr().out
    assert "(0,0)" in dot and "(0,1)" in dot


def test_empty_tree_is_a_schema_error(tmp_path):
    obj = chain_tree(1).to_json()
    obj["nodes"] = []
    path = tmp_path / "e.json"
    path.write_text(json.dumps(obj))
    assert run("export", "--in", path) == 4


def test_invalid_json_is_a_schema_error(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{")
    assert run("export", "--in", path) == 4


def test_missing_file_is_usage(tmp_path):
    assert run("export", "--in", tmp_path / "nope.json") == 2


def test_report_embeds_config(sigma, tmp_path, monkeypatch):
    monkeypatch.setenv("TREETOP_SEED", "77")
    out = tmp_path / "r.json"
    run("certify", "--in", sigma, "--suite", "tree-of-sets", "--samples", 20,
        "--seed", 3, "--out", out)
    rep = json.loads(out.read_text())
    assert rep["version"] == __version__
    assert rep["config"]["seed"] == 77 and rep["config"]["samples"] == 20


def test_bad_seed_is_usage(sigma):
    assert run("certify", "--in", sigma, "--suite", "tree-of-sets", "--seed", "x") == 2


def test_analyze_kadec(sigma, tmp_path):
    out = tmp_path / "k.json"
    assert run("analyze", "--in", sigma, "--op", "kadec", "--out", out) == 0
    verdicts = json.loads(out.read_text())["result"]["verdicts"]
    assert {v["verdict"] for v in verdicts} == {"good"}


def test_compactify(sigma, tmp_path):
    coords = tmp_path / "coords.json"
    t = Tree.from_json(json.loads(sigma.read_text()))
    coords.write_text(json.dumps(sorted({str(q) for u in t.ids()
                                         for q in t.payload(u).elements()})))
    out = tmp_path / "c.json"
    assert run("compactify", "--in", sigma, "--coords", coords, "--pairs", 30, "--out", out) == 0
    assert json.loads(out.read_text())["result"]["max_fiber"] == 2


def test_kurepa(capsys):
    assert run("kurepa", "--candidate", "sup-plus-one-capped:3") == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["result"]["refuted"]


@settings(max_examples=10)
@given(st.integers(0, 2**64 - 1), st.sampled_from(["2det", "tree-of-sets", "bad-points"]))
def test_reruns_are_byte_identical(seed, suite):
    import tempfile
    from pathlib import Path
    with tempfile.TemporaryDirectory() as d:
        d = Path(d)
        run("gen", "--kind", "sigma-q", "--depth", 2, "--out", d / "t.json")
        texts = []
        for _ in range(2):
            run("certify", "--in", d / "t.json", "--suite", suite, "--samples", 30,
                "--seed", seed, "--out", d / "r.json")
            texts.append((d / "r.json").read_bytes())
        assert texts[0] == texts[1]
