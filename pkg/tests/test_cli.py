import json
from pathlib import Path

import pydot
import pytest

from prill import cli
from prill.cli import ConfigError, RunConfig, dumps, emit_diagram, main
from prill.numeric.tower import TrackingFailure
from prill.pipeline import Certificate, Verdict


def test_config_validation():
    RunConfig()
    with pytest.raises(ConfigError):
        RunConfig(branch_points=("0", "1", "2"))
    with pytest.raises(ConfigError):
        RunConfig(branch_points=("0", "1", "2", "3", "4", "0.0"))
    with pytest.raises(ConfigError):
        RunConfig(branch_points=("0", "1/2", "2", "3", "4", "0.5"))
    with pytest.raises(ConfigError):
        RunConfig(branch_points=("0", "1", "x", "3", "4", "5"))
    with pytest.raises(ConfigError):
        RunConfig(precision_bits=64)
    with pytest.raises(ConfigError):
        RunConfig(precision_bits=400, max_precision_bits=300)
    with pytest.raises(ConfigError):
        RunConfig(w5_sign=2)


def test_dumps_is_stable():
    doc = {"b": [1, 2, 3], "a": {"z": "x", "y": [[0, 1], [1, 0]]}, "c": 1.5}
    text = dumps(doc)
    assert json.loads(text) == doc
    assert dumps(json.loads(text)) == text
    assert "[1, 2, 3]" in text
    assert text.index('"a"') < text.index('"b"')


def test_bad_arguments_exit_2(capsys):
    assert main(["certify", "--branch-points", "0,1,2,3,4"]) == 2
    assert "invalid configuration" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["certify", "--w5-sign", "x"])


def test_degenerate_exits_2(tmp_path, capsys):
    rc = main(["certify", "--branch-points", "0,1,2,3,1,6", "--out", str(tmp_path / "c.json")])
    assert rc == 2
    assert not (tmp_path / "c.json").exists()


def test_tracking_failure_exits_3(monkeypatch, tmp_path):
    def boom(*a, **k):
        raise TrackingFailure("no convergence at 848 bits")
    monkeypatch.setattr(cli, "build_tower", boom)
    assert main(["certify", "--out", str(tmp_path / "c.json")]) == 3


def test_failed_certificate_exits_1(monkeypatch, tmp_path):
    cert = Certificate({}, {}, {}, {"degree_36": Verdict(False, {"degree": 35})},
                       {"degree_X_over_Y": 35, "genus": {"X": 36}}, {}, {}, {}, {})
    monkeypatch.setattr(cli, "build_tower", lambda *a, **k: None)
    monkeypatch.setattr(cli, "certify", lambda t: cert)
    out = tmp_path / "c.json"
    assert main(["certify", "--out", str(out)]) == 1
    doc = json.loads(out.read_text())
    assert doc["status"] == "FAILED" and doc["failures"] == ["degree_36"]


def test_hesse(capsys):
    assert main(["hesse"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("j = 0\n")
    for root in ("-1", "-zeta3", "-zeta3^2", "inf"):
        assert root in out


def test_diagram(reference_tower):
    graph, = pydot.graph_from_dot_data(emit_diagram(reference_tower))
    nodes = {n.get_name(): n.get_label().strip('"') for n in graph.get_nodes() if n.get_name() not in ("node", "graph")}
    assert len(nodes) == 8
    assert nodes["X"].endswith("g = 37") and nodes["C2"].endswith("g = 19") and nodes["E0"].endswith("g = 1")
    edges = {(e.get_source(), e.get_destination()): e.get_label().strip('"') for e in graph.get_edges()}
    assert edges[("X", "C2")] == "2" and edges[("C2", "C1")] == "9" and edges[("C1", "Y")] == "2"
    assert edges[("E", "E")] == "[x3] (9)"


@pytest.mark.slow
def test_certify_end_to_end_is_deterministic(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    dot = tmp_path / "t.dot"
    for p in paths:
        assert main(["certify", "--no-consistency", "--out", str(p), "--dot", str(dot)]) == 0
    a, b = (p.read_bytes() for p in paths)
    assert a == b
    doc = json.loads(a)
    assert doc["schema"] == 1 and doc["status"] == "CERTIFIED"
    assert doc["values"]["degree_X_over_Y"] == 36
    assert dot.read_text().startswith("digraph tower {")
