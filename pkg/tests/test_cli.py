"""Command-line interface: subcommands, artifacts, exit codes."""

import json

import numpy as np
import pytest

from ffest import (
    EstimatorModel,
    InnovationJointModel,
    StateSpaceModel,
    load_model,
    load_trajectory,
    save_model,
)
from ffest.cli import main


@pytest.fixture()
def system_json(tmp_path):
    path = tmp_path / "system.json"
    save_model(StateSpaceModel(
        A=np.array([[1.08, -0.23], [0.58, 0.27]]),
        B=np.array([[-0.56, -1.4], [-0.56, -0.6]]),
        C=np.array([[-0.25, 2.25], [1.24, -1.25]]),
        D=np.array([[-0.14, -1.0], [0.0, -1.0]]),
        p=1, q=1,
    ), path)
    return path


@pytest.fixture()
def innovation_json(tmp_path, system_json):
    out = tmp_path / "innovation.json"
    assert main(["innovation-form", str(system_json), str(out)]) == 0
    return out


class TestInnovationForm:
    def test_writes_model_and_prints_chain(self, innovation_json, capsys):
        m = load_model(innovation_json)
        assert isinstance(m, InnovationJointModel)
        assert np.allclose(m.Q, [[2.0, 1.0], [1.0, 1.0]], atol=0.02)

    def test_wrong_kind_exits_2(self, tmp_path, innovation_json):
        out = tmp_path / "x.json"
        assert main(["innovation-form", str(innovation_json),
                     str(out)]) == 2

    def test_missing_file_exits_2(self, tmp_path):
        assert main(["innovation-form", str(tmp_path / "nope.json"),
                     str(tmp_path / "out.json")]) == 2


class TestSynthesize:
    def test_estimator_written(self, tmp_path, innovation_json):
        out = tmp_path / "est.json"
        code = main(["synthesize", str(innovation_json), str(out),
                     "--tol-fb", "1e-2", "--rank-tol", "1e-2"])
        assert code == 0
        est = load_model(out)
        assert isinstance(est, EstimatorModel)
        assert abs(abs(est.D0[0, 0]) - 1.0) <= 0.03

    def test_tight_tolerance_exits_4(self, tmp_path, innovation_json,
                                     capsys):
        # the worked example misses the no-feedback condition at 1e-6
        out = tmp_path / "est.json"
        code = main(["synthesize", str(innovation_json), str(out),
                     "--tol-fb", "1e-6", "--rank-tol", "1e-2"])
        assert code == 4
        payload = json.loads(capsys.readouterr().err)
        assert payload["error"] == "FeedbackViolationError"
        assert payload["residual"] > 1e-6


class TestSimulateAndFilter:
    def test_simulate_filter_pipeline(self, tmp_path, innovation_json,
                                      capsys):
        est = tmp_path / "est.json"
        traj = tmp_path / "traj.csv"
        pred = tmp_path / "pred.csv"
        assert main(["synthesize", str(innovation_json), str(est),
                     "--tol-fb", "1e-2", "--rank-tol", "1e-2"]) == 0
        assert main(["simulate", str(innovation_json), str(traj),
                     "--n", "500", "--seed", "3"]) == 0
        t = load_trajectory(traj)
        assert t.N == 500
        assert main(["filter", str(est), str(traj), str(pred)]) == 0
        lines = pred.read_text().splitlines()
        assert lines[0] == "yhat1"
        assert len(lines) == 501
        out = capsys.readouterr().out
        assert "MSE" in out and "VAF" in out

    def test_simulate_deterministic(self, tmp_path, innovation_json):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            assert main(["simulate", str(innovation_json), str(path),
                         "--n", "100", "--seed", "5"]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_bad_trajectory_exits_2(self, tmp_path, innovation_json):
        est = tmp_path / "est.json"
        assert main(["synthesize", str(innovation_json), str(est),
                     "--tol-fb", "1e-2", "--rank-tol", "1e-2"]) == 0
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        assert main(["filter", str(est), str(bad),
                     str(tmp_path / "p.csv")]) == 2


class TestIdentify:
    def test_pred_partial_fit(self, tmp_path, innovation_json, capsys):
        traj = tmp_path / "traj.csv"
        truth = tmp_path / "truth.json"
        out = tmp_path / "fit.json"
        assert main(["simulate", str(innovation_json), str(traj),
                     "--n", "300", "--seed", "1"]) == 0
        # known blocks come from the (projected) triangular truth
        from ffest import innovation_form_details, triangularize
        from ffest.cli import _EXAMPLE_SYSTEM

        t = triangularize(innovation_form_details(_EXAMPLE_SYSTEM).model,
                          rank_tol=1e-2, tol_fb=1e-2)
        save_model(t, truth)
        code = main(["identify", str(traj), str(out),
                     "--case", "pred_partial", "--dims", "2,1,1,1,1",
                     "--truth", str(truth),
                     "--restarts", "1", "--maxiter", "30"])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["case"] == "pred_partial"
        assert len(doc["theta"]) == 7
        assert np.isfinite(doc["training_mse"])
        assert doc["estimator"]["kind"] == "estimator"
        assert doc["model"]["kind"] == "triangular_joint"

    def test_bad_dims_exit_2(self, tmp_path, innovation_json):
        traj = tmp_path / "traj.csv"
        assert main(["simulate", str(innovation_json), str(traj),
                     "--n", "50", "--seed", "1"]) == 0
        assert main(["identify", str(traj), str(tmp_path / "f.json"),
                     "--case", "pred_full", "--dims", "2,2,1,1,1"]) == 2


class TestBenchmarkCommand:
    def test_tiny_run_writes_csvs(self, tmp_path, capsys):
        code = main(["benchmark", "--M", "1", "--N", "60",
                     "--maxiter", "2", "--out-dir", str(tmp_path),
                     "--prefix", "tiny"])
        assert code == 0
        for suffix in ("rows", "table", "curve"):
            assert (tmp_path / f"tiny_{suffix}.csv").exists()
        out = capsys.readouterr().out
        assert "case0" in out


class TestReproduce:
    def test_sec5_golden_values(self, capsys):
        assert main(["reproduce", "sec5"]) == 0
        out = capsys.readouterr().out
        assert "MISMATCH" not in out
        assert "all golden values reproduced" in out

    def test_sec5_deterministic(self, capsys):
        assert main(["reproduce", "sec5"]) == 0
        first = capsys.readouterr().out
        assert main(["reproduce", "sec5"]) == 0
        assert capsys.readouterr().out == first
