"""Command-line interface: exit codes and emitted artifacts."""

import csv
import json

import pytest

from veertrack.cli import main
from veertrack.delaunay import greedy_delaunay
from veertrack.fixtures import GOLD_PERIOD_T, gold, pillow, t2
from veertrack.surface import serialize_surface


@pytest.fixture
def torus_doc(tmp_path):
    path = tmp_path / "t2.json"
    path.write_text(serialize_surface(t2()))
    return str(path)


@pytest.fixture
def gold_doc(tmp_path):
    path = tmp_path / "gold.json"
    path.write_text(serialize_surface(gold()))
    return str(path)


class TestExitCodes:
    def test_validate_ok(self, torus_doc):
        assert main(["validate", "--input", torus_doc]) == 0

    def test_missing_file(self, tmp_path):
        assert main(["validate", "--input", str(tmp_path / "nope.json")]) == 1

    def test_malformed_document(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert main(["validate", "--input", str(path)]) == 1

    def test_invalid_surface(self, tmp_path):
        doc = json.loads(serialize_surface(t2()))
        doc["edges"]["e1"] = {"w": "1", "h": "1"}
        path = tmp_path / "broken.json"
        path.write_text(json.dumps(doc))
        assert main(["validate", "--input", str(path)]) == 1

    def test_structural_degeneracy_is_exit_2(self, tmp_path):
        reduced, _ = greedy_delaunay(pillow())
        path = tmp_path / "pillow.json"
        path.write_text(serialize_surface(reduced))
        assert main(["flow", "--input", str(path), "--time", "2.0"]) == 2


class TestArtifacts:
    def test_delaunay_emits_flip_log(self, tmp_path, gold_doc):
        out = tmp_path / "flips.csv"
        reduced = tmp_path / "reduced.json"
        code = main([
            "delaunay", "--input", gold_doc,
            "--emit-flips", str(out), "--output", str(reduced),
        ])
        assert code == 0
        rows = list(csv.reader(out.open()))
        assert rows[0] == ["step", "edge", "old_w", "old_h", "new_w", "new_h"]
        json.loads(reduced.read_text())

    def test_flow_csv_lists_events(self, tmp_path, gold_doc):
        out = tmp_path / "events.csv"
        assert main([
            "flow", "--input", gold_doc, "--time", "2.0", "--csv", str(out)
        ]) == 0
        rows = list(csv.reader(out.open()))
        assert rows[0][:4] == ["index", "threshold", "t", "edge"]
        assert len(rows) > 2

    def test_analyze_report_json(self, tmp_path, gold_doc):
        out = tmp_path / "report.json"
        assert main([
            "analyze", "--input", gold_doc,
            "--time", str(5 * GOLD_PERIOD_T), "--report", str(out),
        ]) == 0
        report = json.loads(out.read_text())
        assert report["is_pseudo_anosov"]
        assert report["lam_w"] == pytest.approx(2.618033988749895, abs=1e-9)

    def test_close_outputs_fixed_point(self, tmp_path, gold_doc):
        out = tmp_path / "close.json"
        assert main([
            "close", "--input", gold_doc,
            "--delta", "1e-3", "--seed", "5", "--output", str(out),
        ]) == 0
        data = json.loads(out.read_text())
        assert data["converged"]
        assert data["T_prime"] == pytest.approx(GOLD_PERIOD_T, abs=1e-6)

    def test_track_and_report_run(self, capsys, torus_doc):
        assert main(["track", "--input", torus_doc, "--vertex-curves"]) == 0
        assert main(["report", "--input", torus_doc, "--time", "0.5"]) == 0
        text = capsys.readouterr().out
        assert "e1" in text
