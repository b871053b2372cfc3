import pytest

from bcibenchmark.classifiers import ClassifierKind
from bcibenchmark.config import OUTPUT_ENV, bundled_config_path, config_from_mapping, load_config
from bcibenchmark.errors import ConfigError
from bcibenchmark.evaluation import SplitMode
from bcibenchmark.features import FeatureGroup
from bcibenchmark.selection import Protocol, SearchMethod

SYNTH_ONLY = {"datasets": [{"name": "planted", "synth": "planted"}]}


def _diagnostics(data, **kwargs):
    with pytest.raises(ConfigError) as err:
        config_from_mapping(data, environ={}, **kwargs)
    return err.value.diagnostics


def test_defaults_fill_every_section():
    cfg = config_from_mapping(SYNTH_ONLY, environ={})
    assert [d.name for d in cfg.datasets] == ["planted"]
    assert cfg.datasets[0].synth is not None
    assert cfg.datasets[0].tasks == (0, 1)
    assert len(cfg.classifiers) == len(ClassifierKind)
    assert cfg.features.groups == tuple(FeatureGroup)
    assert cfg.selection.method is SearchMethod.SFFS
    assert cfg.selection.protocol is Protocol.INNER_CV
    assert cfg.selection.k_within == 20
    assert cfg.evaluation.ratio == pytest.approx(2.0 / 3.0)
    assert cfg.evaluation.mode is SplitMode.STRATIFIED
    assert cfg.preprocessing.lowpass_order == 16
    assert cfg.formats == ("csv", "json", "plotdata")
    assert cfg.output_dir == "bcibench-out"
    # 0 workers means every core
    assert cfg.jobs == -1


def test_overrides_reach_the_components(tmp_path):
    cfg = config_from_mapping(dict(SYNTH_ONLY, seed=3, selection={"method": "genetic", "ga_pop": 12},
                                   classifiers={"kinds": ["svm", "MLP2TG"], "hyperparams": {"SVM": {"C": 2.0}}},
                                   evaluation={"split": "chronological", "overlap_guard": True}),
                              seed=7, jobs=2, environ={OUTPUT_ENV: str(tmp_path)})
    assert cfg.seed == 7
    assert cfg.selection.seed == 7
    assert cfg.selection.ga.pop == 12
    assert [s.kind for s in cfg.classifiers] == [ClassifierKind.SVM, ClassifierKind.MLP2TG]
    assert cfg.classifiers[0].resolved()["C"] == 2.0
    assert cfg.evaluation.overlap_guard
    assert cfg.jobs == 2
    assert cfg.output_dir == str(tmp_path)


def test_paper_faithful_switch():
    cfg = config_from_mapping(SYNTH_ONLY, paper_faithful=True, environ={})
    assert cfg.selection.protocol is Protocol.PAPER_FAITHFUL


def test_unknown_keys_are_reported_together():
    problems = _diagnostics(dict(SYNTH_ONLY, features={"bogus": 1}, colour="blue"))
    assert "features.bogus: unknown key" in problems
    assert "colour: unknown key" in problems


def test_bad_values_name_their_key():
    problems = _diagnostics(dict(SYNTH_ONLY, seed="abc", selection={"method": "annealing"}))
    assert any(p.startswith("seed:") for p in problems)
    assert any(p.startswith("selection.method: must be one of") for p in problems)
    assert len(problems) == 2


def test_component_checks():
    problems = _diagnostics(dict(SYNTH_ONLY, preprocessing={"low": 50.0, "high": 40.0},
                                 classifiers={"kinds": ["KNN"]}, output={"formats": ["xlsx"]}))
    assert "preprocessing.high: band edges need 0 < low < high" in problems
    assert any(p.startswith("classifiers.kinds:") for p in problems)
    assert any(p.startswith("output.formats: unknown") for p in problems)


def test_dataset_diagnostics():
    assert _diagnostics({}) == ["datasets: no datasets or subjects declared"]
    problems = _diagnostics({"datasets": [{"name": "x"}]})
    assert "datasets[0].paths: required unless a synth spec is given" in problems
    problems = _diagnostics({"datasets": [{"name": "x", "synth": {"fs": 128}}]})
    assert all(p.startswith("datasets[0].") for p in problems)
    problems = _diagnostics({"datasets": [{"name": "x", "synth": "planted"}, {"name": "x", "synth": "planted"}]})
    assert "datasets: name 'x' is declared more than once" in problems


def test_subjects_expand_to_task_pairs(tmp_path):
    cfg = config_from_mapping({"subjects": [{"subject": "s1", "paths": ["a.asc", "b.asc"]}]},
                              base_dir=str(tmp_path), environ={})
    assert [d.name for d in cfg.datasets] == ["s1-2v3", "s1-2v7", "s1-3v7"]
    assert cfg.datasets[0].paths == (str(tmp_path / "a.asc"), str(tmp_path / "b.asc"))
    assert cfg.to_dict()["datasets"][0]["paths"] == ["a.asc", "b.asc"]


def test_echo_leaves_out_workers_and_output(tmp_path):
    echo = config_from_mapping(SYNTH_ONLY, jobs=4, environ={OUTPUT_ENV: str(tmp_path)}).to_dict()
    assert "jobs" not in echo["settings"]["run"]
    assert "directory" not in echo["settings"]["output"]
    assert echo == config_from_mapping(SYNTH_ONLY, jobs=1, environ={}).to_dict()


def test_load_config_reports_yaml_errors(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("datasets: [1, 2\n")
    with pytest.raises(ConfigError):
        load_config(path, environ={})


def test_bundled_run_loads():
    cfg = load_config(bundled_config_path(), environ={})
    assert [d.name for d in cfg.datasets] == ["planted-1", "planted-2"]
    assert cfg.jobs == 1
    assert cfg.selection.k_anfis == 3
