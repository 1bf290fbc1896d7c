import csv
import json

import numpy as np
import pytest

from gsrforecast import cli, pipeline
from gsrforecast.dataio import fit_standardizer, read_csv, split, synth_generate, write_csv
from gsrforecast.solarisnet import NetworkSpec, forward, init_params, layout

SPEC = NetworkSpec()


def run(*argv):
    return cli.main([str(a) for a in argv])


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    """A small ds1 file shared by the slower commands."""
    path = tmp_path_factory.mktemp("cli") / "ds1.csv"
    assert run("synth", "--profile", "ds1", "--days", 300, "--seed", 3, "--out", path) == 0
    return path


@pytest.fixture(scope="module")
def teacher_csv(tmp_path_factory):
    """Noiseless targets from a network on inputs standardized with the first 80% of days."""
    ds = synth_generate("ds1", days=250, seed=9)
    train, _ = split(ds)
    X, _ = fit_standardizer(train, ds.feature_names).apply(ds)
    teacher = init_params(SPEC, np.random.default_rng(103))
    out = layout(SPEC)[1][-1]
    teacher[out.offset : out.offset + out.size] *= 100.0
    path = tmp_path_factory.mktemp("teacher") / "teacher.csv"
    write_csv(ds.with_target(15.0 + forward(SPEC, teacher, X)), path)
    return path


class TestSynth:
    def test_row_count_and_determinism(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for p in (a, b):
            assert run("synth", "--profile", "ds1", "--days", 1461, "--seed", 7, "--out", p) == 0
        assert len(rows(a)) == 1462
        assert a.read_bytes() == b.read_bytes()
        meta = json.loads((tmp_path / "a.csv.meta.json").read_text())
        assert meta["profile"] == "ds1"

    def test_one_day_is_rejected(self, tmp_path):
        assert run("synth", "--days", 1, "--out", tmp_path / "x.csv") == 1
        assert not (tmp_path / "x.csv").exists()

    def test_extras_columns(self, tmp_path):
        assert run("synth", "--days", 10, "--extras", 2, "--out", tmp_path / "x.csv") == 0
        assert rows(tmp_path / "x.csv")[0] == ["date", "tmax_c", "tmin_c", "sunshine_h", "extra_1", "extra_2", "gsr_mj_m2_day"]


class TestTrain:
    def test_noiseless_teacher_reaches_zero_sse(self, teacher_csv, tmp_path):
        out = tmp_path / "m.json"
        assert run("train", "--model", "solarisnet", "--data", teacher_csv, "--out", out, "--max-iterations", 3000) == 0
        doc = json.loads(out.read_text())
        assert doc["train_meta"]["final_sse"] < 1e-6
        log = rows(f"{out}.log.csv")
        assert log[0] == ["iteration", "sse", "mu", "accepted"]
        assert len(log) > 2

    def test_standardizer_uses_training_rows_only(self, data, tmp_path):
        out = tmp_path / "m.json"
        assert run("train", "--model", "ann", "--data", data, "--out", out, "--max-iterations", 3) == 0
        doc = json.loads(out.read_text())
        ds = read_csv(data)
        train, _ = split(ds)
        std = fit_standardizer(train)
        assert doc["standardizer"] == json.loads(json.dumps(std.to_dict()))
        assert doc["pipeline"]["n_train"] == len(train) == 240

    def test_identical_runs_give_identical_files(self, data, tmp_path):
        for name in ("a", "b"):
            argv = ("train", "--model", "solarisnet", "--data", data, "--out", tmp_path / f"{name}.json", "--seed", 4)
            assert run(*argv, "--max-iterations", 20) == 0
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
        assert (tmp_path / "a.json.log.csv").read_bytes() == (tmp_path / "b.json.log.csv").read_bytes()

    def test_angstrom_needs_latitude(self, data, tmp_path):
        assert run("train", "--model", "angstrom", "--data", data, "--out", tmp_path / "a.json") == 1
        assert run("train", "--model", "angstrom", "--data", data, "--out", tmp_path / "a.json", "--latitude", 22.97) == 0
        assert json.loads((tmp_path / "a.json").read_text())["model_type"] == "angstrom"

    def test_unknown_model_is_a_usage_error(self, data, tmp_path):
        assert run("train", "--model", "svr", "--data", data, "--out", tmp_path / "s.json") == 1

    def test_missing_file_is_an_io_error(self, tmp_path):
        assert run("train", "--model", "ann", "--data", tmp_path / "nope.csv", "--out", tmp_path / "m.json") == 3

    def test_fit_failure_exit_code(self, tmp_path, monkeypatch):
        path = tmp_path / "d.csv"
        write_csv(synth_generate("ds1", days=40, seed=1), path)

        def broken(*args, **kwargs):
            raise np.linalg.LinAlgError("forced")

        monkeypatch.setattr(pipeline.gpr, "fit_dataset", broken)
        assert run("train", "--model", "gpr", "--data", path, "--out", tmp_path / "g.json") == 2


@pytest.fixture(scope="module")
def model(teacher_csv, tmp_path_factory):
    out = tmp_path_factory.mktemp("model") / "m.json"
    assert run("train", "--model", "solarisnet", "--data", teacher_csv, "--out", out, "--max-iterations", 3000) == 0
    return out


class TestPredictEvaluate:
    def test_predict_format(self, model, teacher_csv, tmp_path):
        out = tmp_path / "p.csv"
        assert run("predict", "--model", model, "--data", teacher_csv, "--out", out) == 0
        r = rows(out)
        assert r[0] == ["date", "gsr_pred"] and len(r) == 251
        assert r[1][0] == read_csv(teacher_csv).dates[0].isoformat()
        assert float(r[1][1]) == pytest.approx(float(rows(teacher_csv)[1][-1]), abs=1e-3)

    def test_evaluate_noiseless_training_subset(self, model, teacher_csv, tmp_path):
        out, plot = tmp_path / "r.json", tmp_path / "plot.csv"
        assert run("evaluate", "--model", model, "--data", teacher_csv, "--out", out, "--plot", plot, "--subset", "train") == 0
        report = json.loads(out.read_text())
        assert report["rmse"] < 1e-3 and report["n"] == 200
        assert rows(plot)[0] == ["index", "observed", "predicted"] and len(rows(plot)) == 201
        assert run("evaluate", "--model", model, "--data", teacher_csv, "--out", out, "--plot", plot, "--subset", "test") == 0
        assert json.loads(out.read_text())["n"] == 50 and len(rows(plot)) == 51

    def test_evaluate_needs_target(self, model, tmp_path):
        path = tmp_path / "nogsr.csv"
        path.write_text("date,tmax_c,tmin_c,sunshine_h\n2020-01-01,30,20,7\n2020-01-02,31,21,6\n")
        assert run("evaluate", "--model", model, "--data", path, "--out", tmp_path / "r", "--plot", tmp_path / "p") == 3
        assert run("predict", "--model", model, "--data", path, "--out", tmp_path / "p.csv") == 0

    def test_corrupt_model_document(self, teacher_csv, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"schema_version": 99}')
        assert run("predict", "--model", bad, "--data", teacher_csv, "--out", tmp_path / "p.csv") == 3


class TestSensitivity:
    def test_sunshine_ranked_first(self, data, tmp_path):
        out, plot = tmp_path / "s.json", tmp_path / "s.csv"
        assert run("sensitivity", "--data", data, "--out", out, "--plot", plot, "--seed", 1) == 0
        ranking = json.loads(out.read_text())["ranking"]
        assert ranking[0]["feature"] == "sunshine_h" and [r["rank"] for r in ranking] == [1, 2, 3]
        r = rows(plot)
        assert r[0] == ["feature_index", "feature_name", "log_length_scale"]
        assert [row[:2] for row in r[1:]] == [["1", "tmax_c"], ["2", "tmin_c"], ["3", "sunshine_h"]]
        first = out.read_bytes()
        assert run("sensitivity", "--data", data, "--out", out, "--plot", plot, "--seed", 1) == 0
        assert out.read_bytes() == first


class TestCompare:
    def test_table(self, data, tmp_path):
        out = tmp_path / "c.csv"
        argv = ("compare", "--data", data, "--out", out, "--latitude", 22.97, "--models", "solarisnet,gpr,ann,angstrom,svr")
        assert run(*argv) == 0
        r = rows(out)
        assert r[0] == ["model", "rmse", "mae", "mbe", "pearson_rho", "n"]
        order = [row[0] for row in r[1:]]
        assert sorted(order) == ["angstrom", "ann", "gpr", "solarisnet"]
        assert order.index("angstrom") > max(order.index("solarisnet"), order.index("gpr"))
        rmse = [float(row[1]) for row in r[1:]]
        assert rmse == sorted(rmse)
        first = out.read_bytes()
        assert run(*argv) == 0
        assert out.read_bytes() == first

    def test_usage_errors(self, data, tmp_path):
        out = tmp_path / "c.csv"
        assert run("compare", "--data", data, "--out", out, "--models", "angstrom") == 1
        assert run("compare", "--data", data, "--out", out, "--models", "knn") == 1
        assert run("compare", "--data", data, "--out", out, "--models", "ann", "--train-fraction", 1.5) == 1


class TestHelp:
    def test_top_level(self, capsys):
        assert run("--help") == 0
        assert "synth" in capsys.readouterr().out

    @pytest.mark.parametrize("command", sorted(cli.COMMANDS))
    def test_subcommand_help_shows_defaults(self, command, capsys):
        assert run(command, "--help") == 0
        text = capsys.readouterr().out
        assert "--seed" in text and "default: 0" in text

    def test_train_help_lists_optimizer_constants(self, capsys):
        run("train", "--help")
        text = " ".join(capsys.readouterr().out.split())
        for flag in ("--mu-init", "--mu-factor", "--mu-max", "--grad-tol", "--max-iterations", "--gpr-starts", "--gpr-max-iter"):
            assert flag in text
        assert "default: 0.001" in text and "default: 1000" in text

    def test_missing_command(self):
        assert run() == 1
