import pytest
from ruamel.yaml import YAML

from bcibenchmark.main import EXIT_CONFIG, EXIT_IO, EXIT_OK, build_parser, main
from bcibenchmark.signals import load_recording

from conftest import tiny_run_mapping


def _write_yaml(path, data):
    YAML(typ="safe").dump(data, path)
    return str(path)


@pytest.fixture
def run_file(tmp_path, monkeypatch):
    monkeypatch.delenv("BCIBENCH_OUTPUT_DIR", raising=False)
    return _write_yaml(tmp_path / "run.yaml", tiny_run_mapping(tmp_path / "out"))


def test_parser_knows_every_stage():
    parser = build_parser()
    for command in ("run", "extract", "select", "train", "report"):
        options = parser.parse_args([command, "-j", "2", "--paper-faithful"])
        assert options.jobs == 2
        assert options.paper_faithful
    assert parser.parse_args(["run", "--stage", "extract", "--stage", "select"]).stage == ["extract", "select"]
    with pytest.raises(SystemExit):
        parser.parse_args(["run", "--stage", "plot"])


def test_synth_writes_a_loadable_recording(tmp_path):
    out = tmp_path / "planted.csv"
    assert main(["synth", "-o", str(out), "--seed", "1"]) == EXIT_OK
    rec = load_recording(out, fs=512.0, label_column=-1)
    assert rec.n_channels == 4
    assert set(rec.labels.tolist()) == {0, 1}


def test_invalid_generator_spec(tmp_path):
    spec = _write_yaml(tmp_path / "bad.yaml", {"fs": 128, "classes": [{"sources": []}]})
    assert main(["synth", spec, "-o", str(tmp_path / "x.csv")]) == EXIT_CONFIG


def test_invalid_run_config(tmp_path, run_file):
    bad = _write_yaml(tmp_path / "bad.yaml", dict(tiny_run_mapping(tmp_path), colour="blue"))
    assert main(["run", "-c", bad]) == EXIT_CONFIG
    broken = tmp_path / "broken.yaml"
    broken.write_text("seed: [0\n")
    assert main(["extract", "-c", str(broken)]) == EXIT_CONFIG


def test_missing_upstream_output(tmp_path, run_file):
    assert main(["report", "-c", run_file]) == EXIT_IO
    assert main(["select", "-c", run_file]) == EXIT_IO
    assert main(["run", "-c", str(tmp_path / "missing.yaml")]) == EXIT_IO


@pytest.mark.slow
def test_staged_run_then_report(tmp_path, run_file):
    assert main(["extract", "-c", run_file, "-j", "1"]) == EXIT_OK
    assert (tmp_path / "out" / "features" / "tone-a.features.bcib").exists()
    assert main(["run", "-c", run_file, "--stage", "select", "--stage", "train"]) == EXIT_OK
    assert not (tmp_path / "out" / "report").exists()
    assert main(["report", "-c", run_file]) == EXIT_OK
    assert (tmp_path / "out" / "report" / "table.csv").exists()
    assert (tmp_path / "out" / "report" / "per_dataset_SVM.csv").exists()
