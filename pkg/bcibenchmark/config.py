"""Run configuration.

Run files are YAML. Every section key is declared in ``run_config.json``
(type, title, description, section, key, default as a string, the same
shape as a settings-panel definition list); missing keys take the
declared default, anything else that does not fit becomes one
``section.key: message`` diagnostic in a ConfigError.
"""
from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ruamel.yaml import YAML
from ruamel.yaml.error import YAMLError

from . import Utils
from .classifiers import ClassifierKind, ClassifierSpec
from .errors import ConfigError
from .evaluation import EvaluationConfig
from .features import FeatureConfig, FeatureGroup
from .features.autoregressive import ARConfig
from .features.energy import EnergyConfig
from .features.entropy import EntropyConfig
from .features.statistic import StatisticsConfig
from .features.transform import SUPPORTED_WAVELETS, TransformConfig, WaveletConfig
from .report import REPORT_FORMATS
from .selection import GAConfig, SelectionConfig
from .signals import IDIAP_TASKS, DatasetSpec, PreprocessConfig, RecordingFormat, task_pair_datasets
from .synthetic import bundled_spec_path, load_synth_spec, synth_spec_from_mapping

logger = logging.getLogger(__name__)

DEFINITIONS_FILE = os.path.join(os.path.dirname(__file__), 'run_config.json')
OUTPUT_ENV = "BCIBENCH_OUTPUT_DIR"
TOP_LEVEL_SECTION = "run"
DATASET_KEYS = {"name", "subject", "tasks", "paths", "format", "fs", "header", "label_column",
                "delimiter", "synth", "seed"}
SUBJECT_KEYS = {"subject", "tasks", "paths", "format", "fs", "header", "label_column", "delimiter"}


def load_definitions(path=DEFINITIONS_FILE):
    with open(path) as file:
        return [setting for setting in json.load(file) if setting.get('type') != 'title']


def bundled_config_path(name="synthetic_run"):
    return Path(__file__).parent / "data" / f"{name}.yaml"


@dataclass(frozen=True)
class RunConfig:
    datasets: tuple
    preprocessing: PreprocessConfig
    features: FeatureConfig
    selection: SelectionConfig
    classifiers: tuple
    evaluation: EvaluationConfig
    output_dir: str
    formats: tuple
    use_cache: bool = True
    seed: int = 0
    jobs: int = -1
    settings: dict = field(default_factory=dict)
    dataset_entries: tuple = ()

    def to_dict(self):
        """Resolved settings echoed into reports. Worker count and output
        location do not change results and are left out."""
        settings = {section: dict(values) for section, values in self.settings.items()}
        settings.get(TOP_LEVEL_SECTION, {}).pop("jobs", None)
        settings.get("output", {}).pop("directory", None)
        return Utils.to_plain({"settings": settings, "datasets": list(self.dataset_entries)})


#------------------------------------------------------------------------------
# Section settings
#------------------------------------------------------------------------------
def _convert(setting, value):
    if setting['type'] == 'options':
        if value not in setting['options']:
            raise ValueError(f"must be one of {', '.join(setting['options'])}, got {value!r}")
        return value
    return Utils.from_config(setting['type'], value)


def resolve_settings(data, definitions, problems):
    """{section: {key: typed value}}; the ``run`` section reads top-level keys."""
    by_section = {}
    for setting in definitions:
        by_section.setdefault(setting['section'], []).append(setting)

    settings = {}
    for section, defs in by_section.items():
        if section == TOP_LEVEL_SECTION:
            raw = {k: v for k, v in data.items() if k in {d['key'] for d in defs}}
        else:
            raw = data.get(section) or {}
            if not isinstance(raw, dict):
                problems.append(f"{section}: expected a mapping, got {raw!r}")
                raw = {}
            unknown = set(raw) - {d['key'] for d in defs}
            for key in sorted(unknown):
                problems.append(f"{section}.{key}: unknown key")
        values = {}
        for setting in defs:
            key = setting['key']
            where = key if section == TOP_LEVEL_SECTION else f"{section}.{key}"
            try:
                values[key] = _convert(setting, raw[key] if key in raw else setting['default'])
            except (TypeError, ValueError) as err:
                problems.append(f"{where}: {err}")
        settings[section] = values

    known = set(by_section) | {d['key'] for d in by_section.get(TOP_LEVEL_SECTION, [])} | {"datasets", "subjects"}
    for key in sorted(set(data) - known):
        problems.append(f"{key}: unknown key")
    return settings


#------------------------------------------------------------------------------
# Datasets
#------------------------------------------------------------------------------
def _resolve_path(path, base_dir):
    path = os.path.expanduser(str(path))
    if base_dir and not os.path.isabs(path):
        path = os.path.join(base_dir, path)
    return path


def _load_options(item, where, problems):
    options = {}
    try:
        if "format" in item:
            options["format"] = RecordingFormat(item["format"]).value
        if "fs" in item:
            options["fs"] = Utils.from_config('numeric', item["fs"])
        if "header" in item:
            options["header"] = Utils.from_config('bool', item["header"])
        if "label_column" in item:
            column = item["label_column"]
            options["label_column"] = None if column is None else Utils.from_config('int', column)
        if "delimiter" in item:
            options["delimiter"] = item["delimiter"]
    except (TypeError, ValueError) as err:
        problems.append(f"{where}: {err}")
    return options


def _paths(item, where, base_dir, problems):
    paths = item.get("paths")
    if paths is None:
        return ()
    if isinstance(paths, str):
        paths = [paths]
    if not isinstance(paths, list) or not all(isinstance(p, str) for p in paths):
        problems.append(f"{where}.paths: expected a list of file names")
        return ()
    return tuple(_resolve_path(p, base_dir) for p in paths)


def _synth(value, where, base_dir, problems):
    try:
        if isinstance(value, dict):
            return synth_spec_from_mapping(value)
        if isinstance(value, str):
            path = _resolve_path(value, base_dir)
            if not os.path.exists(path):
                path = bundled_spec_path(Path(value).stem)
            return load_synth_spec(path)
        problems.append(f"{where}.synth: expected a file name or a mapping")
    except ConfigError as err:
        problems.extend(f"{where}.{d}" for d in err.diagnostics)
    except (OSError, YAMLError) as err:
        problems.append(f"{where}.synth: {err}")
    return None


def _dataset(item, where, base_dir, problems):
    if not isinstance(item, dict):
        problems.append(f"{where}: expected a mapping")
        return None
    for key in sorted(set(item) - DATASET_KEYS):
        problems.append(f"{where}.{key}: unknown key")
    name = item.get("name")
    if not isinstance(name, str) or not name:
        problems.append(f"{where}.name: required")
    synth = _synth(item["synth"], where, base_dir, problems) if "synth" in item else None
    paths = _paths(item, where, base_dir, problems)
    if not paths and "synth" not in item:
        problems.append(f"{where}.paths: required unless a synth spec is given")
    tasks = item.get("tasks", [0, 1] if "synth" in item else None)
    if not isinstance(tasks, list) or len(tasks) != 2:
        problems.append(f"{where}.tasks: expected two task labels")
    options = _load_options(item, where, problems)
    if len(problems):
        return None
    try:
        return DatasetSpec(name=name, subject=str(item.get("subject", name)), tasks=tuple(tasks),
                           paths=paths, synth=synth, synth_seed=int(item.get("seed", 0)), **options)
    except (TypeError, ValueError) as err:
        problems.append(f"{where}: {err}")
        return None


def _subject(item, where, base_dir, problems):
    if not isinstance(item, dict):
        problems.append(f"{where}: expected a mapping")
        return []
    for key in sorted(set(item) - SUBJECT_KEYS):
        problems.append(f"{where}.{key}: unknown key")
    subject = item.get("subject")
    if subject is None:
        problems.append(f"{where}.subject: required")
    paths = _paths(item, where, base_dir, problems)
    if not paths:
        problems.append(f"{where}.paths: required")
    tasks = item.get("tasks", list(IDIAP_TASKS))
    if not isinstance(tasks, list) or len(set(tasks)) < 2:
        problems.append(f"{where}.tasks: expected at least two distinct task labels")
    options = _load_options(item, where, problems)
    if len(problems):
        return []
    try:
        return task_pair_datasets({str(subject): paths}, tasks=tuple(tasks), **options)
    except (TypeError, ValueError) as err:
        problems.append(f"{where}: {err}")
        return []


def resolve_datasets(data, base_dir, problems):
    datasets = []
    for key, parse in (("datasets", _dataset), ("subjects", _subject)):
        items = data.get(key) or []
        if not isinstance(items, list):
            problems.append(f"{key}: expected a list")
            continue
        for i, item in enumerate(items):
            local = []
            result = parse(item, f"{key}[{i}]", base_dir, local)
            problems.extend(local)
            if result is None:
                continue
            datasets.extend(result if isinstance(result, list) else [result])
    if not datasets and not problems:
        problems.append("datasets: no datasets or subjects declared")
    names = [d.name for d in datasets]
    for name in sorted({n for n in names if names.count(n) > 1}):
        problems.append(f"datasets: name {name!r} is declared more than once")
    return tuple(datasets)


#------------------------------------------------------------------------------
# Component configs
#------------------------------------------------------------------------------
def _guard(problems, where, build):
    try:
        return build()
    except (TypeError, ValueError) as err:
        problems.append(f"{where}: {err}")
        return None


def _preprocessing(s, problems):
    if not 0 < s["low"] < s["high"]:
        problems.append("preprocessing.high: band edges need 0 < low < high")
    if s["window_s"] <= 0 or s["hop_s"] <= 0:
        problems.append("preprocessing.window_s: window and hop must be positive")
    return PreprocessConfig(**s)


def _features(s, seed, problems):
    try:
        groups = tuple(FeatureGroup.parse(g) for g in s["groups"])
    except ValueError as err:
        problems.append(f"features.groups: {err}")
        groups = tuple(FeatureGroup)
    unknown = [w for w in s["wavelet_families"] if w not in SUPPORTED_WAVELETS]
    if unknown:
        problems.append(f"features.wavelet_families: unsupported {unknown}")
    statistics = StatisticsConfig(max_moment_order=s["max_moment_order"], max_cumulant_order=s["max_cumulant_order"],
                                  max_triples=s["max_triples"], max_quadruples=s["max_quadruples"], seed=seed)
    entropy = _guard(problems, "features.entropy_q", lambda: EntropyConfig(
        bins=s["entropy_bins"], q_values=tuple(float(q) for q in s["entropy_q"]), apen_m=s["apen_m"],
        apen_r=s["apen_r"], neural_complexity=s["neural_complexity"]))
    bands = _guard(problems, "features.energy_bands",
                   lambda: tuple((float(lo), float(hi)) for lo, hi in s["energy_bands"]) or None)
    return FeatureConfig(
        groups=groups,
        statistics=statistics,
        entropy=entropy or EntropyConfig(),
        ar=ARConfig(orders=tuple(int(p) for p in s["ar_orders"])),
        energy=EnergyConfig(bands=bands, fine_start=s["fine_start"], fine_stop=s["fine_stop"],
                            fine_width=s["fine_width"]),
        transform=TransformConfig(k=s["dct_k"] or None),
        wavelet=WaveletConfig(families=tuple(s["wavelet_families"]), levels=s["wavelet_levels"]),
    )


def _selection(s, seed, problems):
    ga = GAConfig(pop=s["ga_pop"], gens=s["ga_gens"], p_cx=s["ga_p_cx"], p_mut=s["ga_p_mut"],
                  elite=s["ga_elite"], tournament=s["ga_tournament"])
    return _guard(problems, "selection", lambda: SelectionConfig(
        method=s["method"], protocol=s["protocol"], shortlist=s["shortlist"], k_within=s["k_within"],
        k_across=s["k_across"], k_anfis=s["k_anfis"], folds=s["folds"], demotion_exponent=s["demotion_exponent"],
        max_exhaustive=s["max_exhaustive"], ga=ga, seed=seed))


def _classifiers(s, problems):
    overrides = {}
    for name, hp in s["hyperparams"].items():
        try:
            kind = ClassifierKind.parse(name)
        except ValueError as err:
            problems.append(f"classifiers.hyperparams.{name}: {err}")
            continue
        if not isinstance(hp, dict):
            problems.append(f"classifiers.hyperparams.{name}: expected a mapping")
            continue
        overrides[kind] = hp
    specs = []
    for name in s["kinds"]:
        try:
            kind = ClassifierKind.parse(name)
        except ValueError as err:
            problems.append(f"classifiers.kinds: {err}")
            continue
        spec = _guard(problems, f"classifiers.hyperparams.{kind.value}",
                      lambda: ClassifierSpec(kind, dict(overrides.get(kind, {}))))
        if spec is not None:
            specs.append(spec)
    if not specs and not problems:
        problems.append("classifiers.kinds: no classifiers selected")
    return tuple(specs)


def config_from_mapping(data, base_dir=None, seed=None, jobs=None, paper_faithful=False, environ=None) -> RunConfig:
    """Build a RunConfig; CLI overrides are applied before validation."""
    if not isinstance(data, dict):
        raise ConfigError(["expected a mapping at the top level"])
    environ = os.environ if environ is None else environ
    data = dict(data)
    if seed is not None:
        data["seed"] = seed
    if jobs is not None:
        data["jobs"] = jobs
    if paper_faithful:
        data["selection"] = dict(data.get("selection") or {}, protocol="paper-faithful")

    problems = []
    settings = resolve_settings(data, load_definitions(), problems)
    datasets = resolve_datasets(data, base_dir, problems)
    if problems:
        raise ConfigError(problems)

    run = settings[TOP_LEVEL_SECTION]
    output = settings["output"]
    unknown = set(output["formats"]) - set(REPORT_FORMATS)
    if unknown:
        problems.append(f"output.formats: unknown {sorted(unknown)}")
    if run["jobs"] < 0:
        problems.append("jobs: must be 0 (all cores) or positive")
    preprocessing = _preprocessing(settings["preprocessing"], problems)
    features = _features(settings["features"], run["seed"], problems)
    selection = _selection(settings["selection"], run["seed"], problems)
    classifiers = _classifiers(settings["classifiers"], problems)
    ev = settings["evaluation"]
    evaluation = _guard(problems, "evaluation.ratio", lambda: EvaluationConfig(
        ratio=ev["ratio"], mode=ev["split"], overlap_guard=ev["overlap_guard"]))
    if problems:
        raise ConfigError(problems)

    output_dir = environ.get(OUTPUT_ENV) or output["directory"]
    return RunConfig(
        datasets=datasets,
        preprocessing=preprocessing,
        features=features,
        selection=selection,
        classifiers=classifiers,
        evaluation=evaluation,
        output_dir=output_dir,
        formats=tuple(output["formats"]),
        use_cache=output["cache"],
        seed=run["seed"],
        jobs=run["jobs"] or -1,
        settings=settings,
        dataset_entries=tuple(_dataset_entry(d) for d in datasets),
    )


def _dataset_entry(spec: DatasetSpec):
    entry = asdict(spec)
    entry["paths"] = [os.path.basename(p) for p in spec.paths]
    return entry


def load_config(path, seed=None, jobs=None, paper_faithful=False, environ=None) -> RunConfig:
    yaml = YAML(typ="safe")
    try:
        with open(path) as f:
            data = yaml.load(f)
    except YAMLError as err:
        raise ConfigError([f"{path}: {err}"]) from err
    cfg = config_from_mapping(data or {}, base_dir=os.path.dirname(os.path.abspath(path)), seed=seed,
                              jobs=jobs, paper_faithful=paper_faithful, environ=environ)
    logger.info("Loaded %s: %d datasets, %d classifiers", path, len(cfg.datasets), len(cfg.classifiers))
    return cfg
