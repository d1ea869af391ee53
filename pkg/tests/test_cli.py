import json

import numpy as np
import pytest
from click.testing import CliRunner

from cfmaps.cli import EXIT_INFEASIBLE, EXIT_MISSING, EXIT_SCHEMA, main
from cfmaps.ensemble import load_model


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def trained(tmp_path, runner):
    """Model + built session in a temp dir; shared by the flow tests."""
    model = tmp_path / "model.json"
    session = tmp_path / "session"
    r = runner.invoke(main, ["train", "--dataset", "blobs", "--out", str(model),
                             "--n-trees", "2", "--max-depth", "3", "--seed", "1"])
    assert r.exit_code == 0, r.output
    r = runner.invoke(main, ["build", "--model", str(model), "--out", str(session)])
    assert r.exit_code == 0, r.output
    return model, session, json.loads(r.output)


class TestFlow:
    def test_train_build_query(self, runner, trained):
        model, session, build_doc = trained
        assert build_doc["n_rects"] > 0
        assert build_doc["classes"]
        e = load_model((model).read_text())
        x = 0.5 * (e.schema.domain_lo + e.schema.domain_hi)
        x_text = ",".join(str(v) for v in x)
        r = runner.invoke(main, ["query", "--dir", str(session), "--x", x_text])
        assert r.exit_code == 0, r.output
        doc = json.loads(r.output)
        assert doc["distance"] >= 0
        assert e.predict(np.array(doc["x_cf"])) == doc["target"]

    def test_query_with_norm_and_target(self, runner, trained):
        model, session, _ = trained
        e = load_model(model.read_text())
        x = 0.5 * (e.schema.domain_lo + e.schema.domain_hi)
        pred = e.predict(x)
        target = next(c for c in e.classes if c != pred)
        r = runner.invoke(main, [
            "query", "--dir", str(session), "--x", ",".join(map(str, x)),
            "--target", str(target), "--norm", "linf",
        ])
        assert r.exit_code == 0, r.output
        assert json.loads(r.output)["target"] == target

    def test_query_target_equals_prediction(self, runner, trained):
        model, session, _ = trained
        e = load_model(model.read_text())
        x = 0.5 * (e.schema.domain_lo + e.schema.domain_hi)
        pred = int(e.predict(x))
        r = runner.invoke(main, [
            "query", "--dir", str(session), "--x", ",".join(map(str, x)),
            "--target", str(pred),
        ])
        assert r.exit_code == EXIT_INFEASIBLE

    def test_query_before_build(self, runner, tmp_path):
        r = runner.invoke(main, ["query", "--dir", str(tmp_path / "nope"),
                                 "--x", "0,0"])
        assert r.exit_code == EXIT_MISSING

    def test_query_wrong_dimension(self, runner, trained):
        _, session, _ = trained
        r = runner.invoke(main, ["query", "--dir", str(session), "--x", "0.0"])
        assert r.exit_code == EXIT_SCHEMA


class TestRaster:
    def test_csv_shape(self, runner, trained, tmp_path):
        _, session, build_doc = trained
        target = build_doc["classes"][0]
        out = tmp_path / "r.csv"
        r = runner.invoke(main, [
            "raster", "--dir", str(session), "--features", "0,1",
            "--res", "100x100", "--target", str(target), "--out", str(out),
        ])
        assert r.exit_code == 0, r.output
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "ix,iy,cx,cy,rect_id,distance"
        assert len(lines) == 1 + 100 * 100

    def test_stdout_ppm(self, runner, trained):
        _, session, build_doc = trained
        target = build_doc["classes"][0]
        r = runner.invoke(main, [
            "raster", "--dir", str(session), "--features", "0,1",
            "--res", "4x3", "--target", str(target), "--format", "ppm",
        ])
        assert r.exit_code == 0, r.output
        assert r.output.startswith("P3 4 3 255")

    def test_missing_class(self, runner, trained):
        _, session, _ = trained
        r = runner.invoke(main, [
            "raster", "--dir", str(session), "--features", "0,1",
            "--res", "3x3", "--target", "99",
        ])
        assert r.exit_code == EXIT_INFEASIBLE


class TestImportModel:
    def test_valid_model(self, runner, trained):
        model, _, _ = trained
        r = runner.invoke(main, ["import-model", str(model)])
        assert r.exit_code == 0
        assert "ok:" in r.output

    def test_missing_file(self, runner, tmp_path):
        r = runner.invoke(main, ["import-model", str(tmp_path / "absent.json")])
        assert r.exit_code == EXIT_MISSING

    def test_invalid_document(self, runner, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"version": 1}')
        r = runner.invoke(main, ["import-model", str(bad)])
        assert r.exit_code == EXIT_SCHEMA

    def test_reemit_canonical(self, runner, trained, tmp_path):
        model, _, _ = trained
        out = tmp_path / "canon.json"
        r = runner.invoke(main, ["import-model", str(model), "--out", str(out)])
        assert r.exit_code == 0
        assert load_model(out.read_text()).model_hash() == \
            load_model(model.read_text()).model_hash()


class TestTrainCsv:
    def test_csv_dataset(self, runner, tmp_path):
        rng = np.random.default_rng(0)
        rows = ["a,b,label"]
        for _ in range(60):
            x0, x1 = rng.uniform(0, 1, size=2)
            rows.append(f"{x0},{x1},{int(x0 > 0.5)}")
        csv_path = tmp_path / "toy.csv"
        csv_path.write_text("\n".join(rows) + "\n")
        model = tmp_path / "m.json"
        r = runner.invoke(main, ["train", "--dataset", str(csv_path),
                                 "--out", str(model), "--n-trees", "2",
                                 "--max-depth", "3"])
        assert r.exit_code == 0, r.output
        e = load_model(model.read_text())
        assert [f.name for f in e.schema.features] == ["a", "b"]

    def test_unknown_dataset(self, runner, tmp_path):
        r = runner.invoke(main, ["train", "--dataset", "no-such-data",
                                 "--out", str(tmp_path / "m.json")])
        assert r.exit_code == EXIT_SCHEMA


class TestBench:
    def test_tiny_run(self, runner, tmp_path):
        cfg = tmp_path / "bench.json"
        cfg.write_text(json.dumps({
            "datasets": ["blobs"], "n_trees": [2], "depths": [3],
            "n_queries": 15, "seeds": [0], "norms": ["l1"],
        }))
        out = tmp_path / "bench_out"
        r = runner.invoke(main, ["bench", "run", "--config", str(cfg),
                                 "--out", str(out)])
        assert r.exit_code == 0, r.output
        report = (out / "report.csv").read_text().strip().split("\n")
        assert report[0].startswith("dataset,")
        assert len(report) == 2

    def test_missing_config(self, runner, tmp_path):
        r = runner.invoke(main, ["bench", "run", "--config",
                                 str(tmp_path / "absent.json"),
                                 "--out", str(tmp_path / "o")])
        assert r.exit_code == EXIT_MISSING
