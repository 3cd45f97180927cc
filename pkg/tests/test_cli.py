from __future__ import annotations

import json
from pathlib import Path

import pytest

from behaviorlab.cli import main
from behaviorlab.service import WorkbenchApp
from behaviorlab.workspace import Workspace

from conftest import wsgi_call


@pytest.fixture
def synth_dir(tmp_path):
    out = tmp_path / "fx"
    assert main(["fixtures", "synth", "--cohorts", "2", "--players-per", "3",
                 "--seed", "5", "--out-dir", str(out)]) == 0
    return out


@pytest.fixture
def loaded(tmp_path, synth_dir, capsys):
    data_dir = str(tmp_path / "data")
    assert main(["--data-dir", data_dir, "ingest",
                 str(synth_dir / "session_config.json"),
                 str(synth_dir / "events.jsonl")]) == 0
    assert main(["--data-dir", data_dir, "labels", "import",
                 str(synth_dir / "labels.json")]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    ingest_report = json.loads(out[0])
    session_id = ingest_report["session_id"]
    return data_dir, session_id


def test_fixtures_synth_writes_dataset(tmp_path, capsys):
    out = tmp_path / "fx"
    assert main(["fixtures", "synth", "--cohorts", "2", "--players-per", "3",
                 "--seed", "5", "--out-dir", str(out)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert (out / "session_config.json").is_file()
    assert (out / "events.jsonl").is_file()
    assert (out / "labels.json").is_file()
    assert summary["events"] > 0 and summary["labels"] > 0


def test_fixtures_synth_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["fixtures", "synth", "--seed", "9", "--out-dir", str(a)])
    main(["fixtures", "synth", "--seed", "9", "--out-dir", str(b)])
    for name in ("session_config.json", "events.jsonl", "labels.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_ingest_reports_counts(loaded, capsys):
    data_dir, session_id = loaded
    assert Path(data_dir, "sessions", session_id, "events.jsonl").is_file()


def test_validate_clean_fixture(loaded, capsys):
    data_dir, _ = loaded
    assert main(["--data-dir", data_dir, "validate"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["clean"] is True


def test_labels_export_import_round_trip(loaded, tmp_path, capsys):
    data_dir, session_id = loaded
    out_file = tmp_path / "labels_export.json"
    assert main(["--data-dir", data_dir, "labels", "export", session_id,
                 "--out", str(out_file)]) == 0
    doc = json.loads(out_file.read_text())
    assert len(doc["labels"]) > 0

    # import into a fresh workspace built from the same telemetry
    fresh = str(tmp_path / "fresh")
    src = Path(data_dir, "sessions", session_id)
    assert main(["--data-dir", fresh, "ingest", str(src / "session.json"),
                 str(src / "events.jsonl")]) == 0
    assert main(["--data-dir", fresh, "labels", "import", str(out_file)]) == 0
    capsys.readouterr()
    assert main(["--data-dir", fresh, "labels", "export", session_id,
                 "--out", str(tmp_path / "again.json")]) == 0
    assert (tmp_path / "again.json").read_bytes() == out_file.read_bytes()


def test_sequences_build(loaded, capsys):
    data_dir, session_id = loaded
    assert main(["--data-dir", data_dir, "sequences", "build", session_id,
                 "--rater", "raterA"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["scope"] == "player"
    assert all(s["rater"] == "raterA" for s in doc["sequences"])


def test_graphs_cli_matches_api_bytes(loaded, capsys):
    data_dir, session_id = loaded
    assert main(["--data-dir", data_dir, "graphs", "sequence", session_id,
                 "--rater", "raterA", "--k", "2", "--seed", "7"]) == 0
    cli_out = capsys.readouterr().out

    app = WorkbenchApp(Workspace(data_dir))
    _, body = wsgi_call(app, "GET", f"/sessions/{session_id}/graphs/sequence",
                        query="rater=raterA&metric=jaccard&mode=collapsed&k=2&seed=7")
    assert cli_out.encode("utf-8") == body


def test_irr_cli_matches_api_bytes_and_duplicate_rater_kappa(loaded, capsys):
    data_dir, session_id = loaded
    assert main(["--data-dir", data_dir, "irr", session_id,
                 "--raters", "raterA,raterB"]) == 0
    cli_out = capsys.readouterr().out
    assert json.loads(cli_out)["kappa"] == 1.0

    app = WorkbenchApp(Workspace(data_dir))
    _, body = wsgi_call(app, "GET", f"/sessions/{session_id}/irr",
                        query="raterA=raterA&raterB=raterB&bin_ms=1000")
    assert cli_out.encode("utf-8") == body


def test_state_graph_cli_json_and_dot(loaded, capsys):
    data_dir, session_id = loaded
    assert main(["--data-dir", data_dir, "graphs", "state", session_id,
                 "--rater", "raterA"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["nodes"]
    assert main(["--data-dir", data_dir, "graphs", "state", session_id,
                 "--rater", "raterA", "--format", "dot"]) == 0
    dot = capsys.readouterr().out
    assert dot.startswith("digraph")


def test_degenerate_graph_request_exits_nonzero(tmp_path, capsys):
    # one labeled player only -> degenerate_input, machine-parseable line
    data_dir = str(tmp_path / "data")
    config = {"session_id": "solo", "game_title": "g", "duration_ms": 10_000,
              "map_bounds": [0, 0, 10, 10],
              "roster": [{"id": "p1", "team_id": "T"},
                         {"id": "p2", "team_id": "T"}]}
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(config))
    events = tmp_path / "ev.jsonl"
    events.write_text("")
    assert main(["--data-dir", data_dir, "ingest", str(cfg), str(events)]) == 0
    ws = Workspace(data_dir)
    handle = ws.open("solo")
    from behaviorlab.labeling import LabelSelection
    handle.labels.apply(LabelSelection(0, 1000, frozenset({"p1"})), "X", "A")
    handle.save_labels()
    capsys.readouterr()
    code = main(["--data-dir", data_dir, "graphs", "sequence", "solo",
                 "--rater", "A"])
    assert code == 5
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["code"] == "degenerate_input"


def test_unknown_session_exit_code(tmp_path, capsys):
    code = main(["--data-dir", str(tmp_path / "nope"), "labels", "export", "ghost"])
    assert code == 3
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["code"] == "not_found"


def test_report_writes_figures_and_csv(loaded, tmp_path, capsys):
    data_dir, session_id = loaded
    out_dir = tmp_path / "report"
    assert main(["--data-dir", data_dir, "report", session_id,
                 "--rater", "raterA", "--seed", "7",
                 "--raters", "raterA,raterB", "--out-dir", str(out_dir)]) == 0
    manifest = json.loads(capsys.readouterr().out)
    files = {Path(f).name for f in manifest["files"]}
    assert {"state_graph.png", "sequence_graph.png", "group_graph.png",
            "irr_confusion.png", "state_graph_nodes.csv", "state_graph_edges.csv",
            "sequence_graph_nodes.csv", "sequence_graph_distances.csv",
            "irr_confusion.csv"} <= files
    for f in manifest["files"]:
        assert Path(f).stat().st_size > 0
    # delimited output carries the same numbers as the API
    app = WorkbenchApp(Workspace(data_dir))
    _, doc = wsgi_call(app, "GET", f"/sessions/{session_id}/graphs/sequence",
                       query="rater=raterA&metric=jaccard&mode=collapsed&k=2&seed=7")
    doc = json.loads(doc)
    csv_lines = (out_dir / "sequence_graph_nodes.csv").read_text().strip().splitlines()
    assert len(csv_lines) == 1 + len(doc["nodes"])


def test_scatter_dot_output(loaded, capsys):
    data_dir, session_id = loaded
    assert main(["--data-dir", data_dir, "graphs", "sequence", session_id,
                 "--rater", "raterA", "--seed", "7", "--format", "dot"]) == 0
    dot = capsys.readouterr().out
    assert dot.startswith('graph "players"')
    assert "cluster=" in dot and "pos=" in dot
