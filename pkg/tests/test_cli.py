import csv
import json
import math
import os

import numpy as np
import pytest

import competing_weibull as cw
from competing_weibull.cli import main
from competing_weibull.io import canonical_json


def run(*argv):
    return main([str(a) for a in argv])


def read_json(path):
    with open(path) as handle:
        return json.load(handle)


def read_csv_rows(path):
    with open(path, newline="") as handle:
        return list(csv.reader(handle))


@pytest.fixture()
def spec_json_ex1(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text(
        json.dumps(
            {"groups": [{"covariates": ["x1"]}, {"covariates": ["x2"]}, {"covariates": ["x3"]}]}
        )
    )
    return path


class TestSimulate:
    def test_example_one_no_censoring(self, tmp_path):
        out = tmp_path / "data.csv"
        assert run("simulate", "--example", 1, "--censoring", 0, "--seed", 5, "--out", out) == 0
        rows = read_csv_rows(out)
        assert rows[0] == ["time", "status", "x1", "x2", "x3"]
        assert len(rows) == 1001
        assert all(r[1] == "1" for r in rows[1:])
        truth = read_json(tmp_path / "data.truth.json")
        assert truth["n"] == 1000 and len(truth["latent_causes"]) == 1000

    def test_byte_identical_determinism(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            assert (
                run("simulate", "--example", 2, "--censoring", 0.1, "--seed", 7, "--out", out)
                == 0
            )
        assert a.read_bytes() == b.read_bytes()
        assert (tmp_path / "a.truth.json").read_bytes() == (tmp_path / "b.truth.json").read_bytes()

    def test_malformed_scenario_exits_2_without_output(self, tmp_path):
        bad = tmp_path / "scenario.json"
        bad.write_text("{ not json")
        out = tmp_path / "data.csv"
        assert run("simulate", "--scenario", bad, "--out", out) == 2
        assert not out.exists()

    def test_unknown_scenario_keys_rejected(self, tmp_path):
        scenario = tmp_path / "scenario.json"
        scenario.write_text(
            json.dumps(
                {
                    "groups": [{"indices": [0], "alpha": 0.0, "beta": [1.0], "sigma": 1.0}],
                    "n": 10,
                    "target_censoring": 0.0,
                    "seed": 1,
                    "bogus": 1,
                }
            )
        )
        out = tmp_path / "data.csv"
        assert run("simulate", "--scenario", scenario, "--out", out) == 2
        assert not out.exists()

    def test_scenario_file_roundtrip(self, tmp_path):
        scenario = tmp_path / "scenario.json"
        scenario.write_text(
            canonical_json(
                {
                    "format_version": 1,
                    "groups": [
                        {"indices": [0], "alpha": 0.3, "beta": [0.9], "sigma": 1.0},
                        {"indices": [1], "alpha": 0.8, "beta": [-0.5], "sigma": 0.7},
                    ],
                    "n": 50,
                    "p": 2,
                    "target_censoring": 0.2,
                    "seed": 12,
                }
            )
        )
        out = tmp_path / "data.csv"
        assert run("simulate", "--scenario", scenario, "--out", out) == 0
        rows = read_csv_rows(out)
        assert len(rows) == 51 and rows[0] == ["time", "status", "x1", "x2"]

    def test_requires_exactly_one_source(self, tmp_path):
        assert run("simulate", "--out", tmp_path / "x.csv") == 2


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("pipeline")
    data = tmp / "data.csv"
    spec = tmp / "spec.json"
    fit = tmp / "fit.json"
    spec.write_text(
        json.dumps(
            {
                "groups": [
                    {"covariates": ["x1"]},
                    {"covariates": ["x2"]},
                    {"covariates": ["x3"]},
                ]
            }
        )
    )
    assert run("simulate", "--example", 1, "--censoring", 0, "--seed", 5, "--out", data) == 0
    assert (
        run(
            "fit",
            "--data", data,
            "--spec", spec,
            "--lambda1", 0.5,
            "--lambda2", 0.2,
            "--out", fit,
        )
        == 0
    )
    return tmp, data, spec, fit


class TestFitPredictEvaluate:
    def test_fit_output_contents(self, pipeline):
        tmp, data, spec, fit = pipeline
        payload = read_json(fit)
        assert payload["converged"] is True
        assert payload["penalty"] == {"lambda1": 0.5, "lambda2": 0.2}
        assert len(payload["groups"]) == 3
        assert len(payload["std_errors"]) == 9
        assert math.isfinite(payload["final_loglik"])
        truth = read_json(tmp / "data.truth.json")
        for est, true_group in zip(payload["groups"], truth["groups"]):
            assert abs(est["alpha"] - true_group["alpha"]) < 3 * 0.138 * 3
        eta_rows = read_csv_rows(tmp / "fit.eta.csv")
        assert eta_rows[0] == ["eta1", "eta2", "eta3", "censored"]
        sums = [sum(float(v) for v in r[:3]) for r in eta_rows[1:]]
        assert all(abs(s - 1.0) < 1e-10 for s in sums)

    def test_fit_json_roundtrips_byte_identical(self, pipeline):
        _, _, _, fit = pipeline
        text = fit.read_text()
        assert canonical_json(json.loads(text)) == text

    def test_warm_start_refit_converges_fast(self, pipeline):
        tmp, data, spec, fit = pipeline
        refit = tmp / "refit.json"
        assert (
            run(
                "fit",
                "--data", data,
                "--spec", spec,
                "--lambda1", 0.5,
                "--lambda2", 0.2,
                "--init", fit,
                "--out", refit,
            )
            == 0
        )
        assert read_json(refit)["n_iters"] <= 2

    def test_predict_columns_and_normalization(self, pipeline):
        tmp, data, spec, fit = pipeline
        pred = tmp / "pred.csv"
        assert run("predict", "--fit", fit, "--data", data, "--at", "1,2.5", "--out", pred) == 0
        rows = read_csv_rows(pred)
        assert rows[0][:3] == ["expected_time", "s_at_1", "s_at_2.5"]
        assert len(rows[0]) == 3 + 2 * 3
        for r in rows[1:50]:
            values = [float(v) for v in r]
            eta_first = values[3:6]
            eta_second = values[6:9]
            assert abs(sum(eta_first) - 1.0) < 1e-10
            assert abs(sum(eta_second) - 1.0) < 1e-10
            assert values[1] > values[2]  # survival decreases with the horizon

    def test_predict_rejects_nonpositive_times(self, pipeline):
        tmp, data, spec, fit = pipeline
        assert run("predict", "--fit", fit, "--data", data, "--at", "0,-1", "--out", tmp / "p.csv") == 2

    def test_predict_rejects_mismatched_columns(self, pipeline, tmp_path):
        tmp, data, spec, fit = pipeline
        other = tmp_path / "other.csv"
        other.write_text("time,status,z1\n1.0,1,0.5\n")
        assert run("predict", "--fit", fit, "--data", other, "--at", "1", "--out", tmp_path / "p.csv") == 2

    def test_evaluate_report_and_curves(self, pipeline):
        tmp, data, spec, fit = pipeline
        report = tmp / "report.json"
        rocdir = tmp / "rocs"
        assert (
            run("evaluate", "--fit", fit, "--data", data, "--horizons", "1,2,50", "--out", report, "--rocdir", rocdir)
            == 0
        )
        payload = read_json(report)
        assert 0.5 < payload["c_index"] < 1.0
        assert 0.5 < payload["iauc"] <= 1.0
        assert set(payload["auc_by_horizon"]) == {"1", "2"}
        assert "50" in payload["skipped_horizons"]  # beyond the data range
        for t in ("1", "2"):
            rows = read_csv_rows(rocdir / f"roc_{t}.csv")
            assert rows[0] == ["fpr", "tpr"]
            curve = read_json(rocdir / f"roc_{t}.json")
            assert curve["auc"] == payload["auc_by_horizon"][t]

    def test_inputs_not_mutated(self, pipeline):
        tmp, data, spec, fit = pipeline
        before = data.read_bytes()
        report = tmp / "report2.json"
        assert run("evaluate", "--fit", fit, "--data", data, "--horizons", "1,2", "--out", report) == 0
        assert data.read_bytes() == before

    def test_single_valid_horizon_skips_iauc(self, pipeline):
        tmp, data, spec, fit = pipeline
        report = tmp / "report3.json"
        assert run("evaluate", "--fit", fit, "--data", data, "--horizons", "1", "--out", report) == 0
        payload = read_json(report)
        assert payload["iauc"] is None
        assert "iauc" in payload["skipped_horizons"]


class TestExponentialPredictions:
    def test_exponential_predict_values(self, tmp_path):
        # hand-built unit-exponential fit: alpha=0, sigma=1, no covariates
        n = 4
        data = tmp_path / "data.csv"
        data.write_text("time,status\n" + "\n".join(f"{t},1" for t in (0.5, 1.0, 1.5, 2.0)) + "\n")
        fit = tmp_path / "fit.json"
        fit.write_text(
            canonical_json(
                {
                    "format_version": 1,
                    "covariate_names": [],
                    "groups": [{"covariates": [], "alpha": 0.0, "beta": [], "sigma": 1.0}],
                    "std_errors": None,
                    "converged": True,
                    "n_iters": 1,
                    "final_loglik": 0.0,
                    "penalty": {"lambda1": 0.0, "lambda2": 0.0},
                    "warnings": [],
                }
            )
        )
        pred = tmp_path / "pred.csv"
        assert run("predict", "--fit", fit, "--data", data, "--at", "1", "--out", pred) == 0
        rows = read_csv_rows(pred)
        for r in rows[1:]:
            assert float(r[0]) == pytest.approx(1.0, abs=1e-4)
            assert float(r[1]) == pytest.approx(math.exp(-1.0), abs=1e-4)
            assert float(r[2]) == pytest.approx(1.0, abs=1e-12)

    def test_expected_time_matches_trapezoid_oracle(self, tmp_path):
        data = tmp_path / "data.csv"
        data.write_text("time,status,x1\n0.5,1,0.3\n2.0,1,-0.8\n1.0,0,1.2\n")
        fit = tmp_path / "fit.json"
        fit.write_text(
            canonical_json(
                {
                    "format_version": 1,
                    "covariate_names": ["x1"],
                    "groups": [
                        {"covariates": ["x1"], "alpha": 0.2, "beta": [0.7], "sigma": 0.9},
                        {"covariates": [], "alpha": 1.1, "beta": [], "sigma": 1.3},
                    ],
                    "std_errors": None,
                    "converged": True,
                    "n_iters": 1,
                    "final_loglik": 0.0,
                    "penalty": {"lambda1": 0.0, "lambda2": 0.0},
                    "warnings": [],
                }
            )
        )
        pred = tmp_path / "pred.csv"
        assert run("predict", "--fit", fit, "--data", data, "--out", pred) == 0
        rows = read_csv_rows(pred)
        spec = cw.ModelSpec([cw.GroupSpec([0]), cw.GroupSpec([])], p=1)
        theta = cw.Theta(
            [cw.GroupParams(0.2, [0.7], 0.9), cw.GroupParams(1.1, [], 1.3)]
        )
        for r, x in zip(rows[1:], ([0.3], [-0.8], [1.2])):
            cutoff = cw.auto_cutoff(theta, spec, x, 1e-9)
            ts = np.linspace(0, cutoff, 200_001)
            oracle = float(
                np.trapezoid([cw.survival(theta, spec, x, t) for t in ts], ts)
            )
            assert float(r[0]) == pytest.approx(oracle, rel=1e-4)


class TestPipelineDeterminism:
    def test_simulate_fit_evaluate_byte_identical(self, tmp_path, spec_json_ex1):
        outputs = []
        for tag in ("one", "two"):
            d = tmp_path / tag
            d.mkdir()
            data, fit, report = d / "data.csv", d / "fit.json", d / "report.json"
            assert run("simulate", "--example", 1, "--censoring", 0.1, "--seed", 11, "--out", data) == 0
            assert (
                run(
                    "fit",
                    "--data", data,
                    "--spec", spec_json_ex1,
                    "--lambda1", 0.5,
                    "--lambda2", 0.2,
                    "--out", fit,
                )
                == 0
            )
            assert run("evaluate", "--fit", fit, "--data", data, "--horizons", "1,3", "--out", report) == 0
            outputs.append((data.read_bytes(), fit.read_bytes(), report.read_bytes()))
        assert outputs[0] == outputs[1]


class TestFitErrors:
    def test_dimension_mismatch_exits_2(self, tmp_path):
        data = tmp_path / "data.csv"
        data.write_text("time,status,x1\n1.0,1,0.5\n2.0,1,-0.3\n")
        spec = tmp_path / "spec.json"
        spec.write_text(json.dumps({"groups": [{"covariates": ["nope"]}]}))
        assert run("fit", "--data", data, "--spec", spec, "--out", tmp_path / "f.json") == 2

    def test_missing_file_exits_3(self, tmp_path):
        spec = tmp_path / "spec.json"
        spec.write_text(json.dumps({"groups": [{"covariates": []}]}))
        assert (
            run("fit", "--data", tmp_path / "missing.csv", "--spec", spec, "--out", tmp_path / "f.json")
            == 3
        )

    def test_non_convergence_still_exits_0(self, tmp_path):
        data = tmp_path / "data.csv"
        rng = np.random.default_rng(1)
        rows = "\n".join(f"{t},1,{x}" for t, x in zip(rng.exponential(1, 30), rng.normal(size=30)))
        data.write_text("time,status,x1\n" + rows + "\n")
        spec = tmp_path / "spec.json"
        spec.write_text(json.dumps({"groups": [{"covariates": ["x1"]}]}))
        fit = tmp_path / "fit.json"
        assert (
            run("fit", "--data", data, "--spec", spec, "--max-iters", 1, "--epsilon", "1e-14", "--out", fit)
            == 0
        )
        assert read_json(fit)["converged"] is False
