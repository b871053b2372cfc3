"""Pipeline stages: extract, select, train and report.

Each stage writes its result under the work directory with the content key
of its inputs; a stage whose output already carries the current key is
skipped. ``run_benchmark`` chains all stages and returns the report.

Work directory layout::

    features/<dataset>.trials.bcib      windowed trials
    features/<dataset>.features.bcib    raw feature matrix
    selection/<dataset>/<clf>.json      selected subsets per feature set
    cells/<dataset>/<clf>.json          test accuracies per feature set
    models/<dataset>/<clf>/<set>.json   final trained models
    report/                             csv / json / plotdata
"""
from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from typing import NamedTuple

import numpy as np
from joblib import Parallel, delayed

from . import Utils, cache
from .__version__ import __version__
from .classifiers import ClassifierKind, ClassifierSpec, model_to_json, predict, train
from .config import RunConfig
from .errors import BenchmarkError, CacheVersionError, PreconditionError
from .evaluation import SplitPlan, accuracy, make_split
from .features import FeatureGroup, FeatureMatrix, apply_normalization, build_feature_matrix, normalize
from .report import BEST_OF_ALL, FEATURE_SETS, BenchmarkReport, CellResult, assemble_report, emit_report
from .selection import (
    FeatureSubset,
    RankingCache,
    WrapperCriterion,
    select_across_groups,
    select_within_group,
    subset_from_dict,
    subset_to_dict,
)
from .signals import DatasetSpec, dataset_trials

logger = logging.getLogger(__name__)

# bump when a stage changes what it produces for the same inputs
PIPELINE_VERSION = 1
STAGE_FILE_VERSION = 1
STAGES = ("extract", "select", "train", "report")
CELL_ERRORS = (BenchmarkError, ValueError, ArithmeticError, np.linalg.LinAlgError)


@dataclass(frozen=True, eq=False)
class PreparedDataset:
    name: str
    matrix: FeatureMatrix
    origins: tuple
    window_len: int
    key: str
    cache_hit: bool = False


class SplitData(NamedTuple):
    plan: SplitPlan
    train: FeatureMatrix
    test: FeatureMatrix


def _describe(err):
    return f"{type(err).__name__}: {err}"


def _safe(name):
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in str(name))


def _read_stage_file(path, key):
    with open(path) as f:
        try:
            data = json.load(f)
        except ValueError as err:
            raise CacheVersionError(path, f"unreadable stage file ({err})") from err
    if data.get("version") != STAGE_FILE_VERSION:
        raise CacheVersionError(path, f"stage file version {data.get('version')}, expected {STAGE_FILE_VERSION}")
    if key is not None and data.get("key") != key:
        raise CacheVersionError(path, "made from other inputs")
    return data


def _stage_file_current(path, key):
    if not os.path.exists(path):
        return False
    try:
        _read_stage_file(path, key)
    except (CacheVersionError, OSError):
        return False
    return True


def _write_stage_file(path, data):
    Utils.atomic_write_text(path, json.dumps(Utils.to_plain(dict(data, version=STAGE_FILE_VERSION)),
                                             sort_keys=True, indent=1))


#------------------------------------------------------------------------------
# Extract
#------------------------------------------------------------------------------
def trial_key(spec: DatasetSpec, cfg: RunConfig):
    digests = [Utils.file_digest(p) for p in spec.paths]
    source = asdict(spec)
    source["paths"] = [os.path.basename(p) for p in spec.paths]
    return Utils.content_key("trials", PIPELINE_VERSION, cache.CACHE_VERSION, source, digests,
                             cfg.preprocessing.as_dict())


def feature_key(upstream, cfg: RunConfig):
    return Utils.content_key("features", PIPELINE_VERSION, cache.CACHE_VERSION, upstream, cfg.features.to_dict())


def prepare_dataset(spec: DatasetSpec, cfg: RunConfig, workdir=None, jobs=1, require_cache=False) -> PreparedDataset:
    """Windowed trials -> raw feature matrix, through the caches when a work directory is given.

    With ``require_cache`` a missing or stale feature cache is an error
    instead of a reason to extract.
    """
    use_cache = workdir is not None and (cfg.use_cache or require_cache)
    tkey = trial_key(spec, cfg)
    fkey = feature_key(tkey, cfg)
    tpath = fpath = None
    if workdir is not None:
        tpath = os.path.join(workdir, "features", f"{_safe(spec.name)}.trials.bcib")
        fpath = os.path.join(workdir, "features", f"{_safe(spec.name)}.features.bcib")

    if use_cache and cache.is_current(fpath, "features", fkey):
        logger.info("Dataset %s: feature cache hit", spec.name)
        matrix = cache.read_feature_cache(fpath, fkey)
        extra = cache.read_header(fpath)["extra"]
        return PreparedDataset(spec.name, matrix, tuple(tuple(o) for o in extra["origins"]),
                               extra["window_len"], fkey, cache_hit=True)
    if require_cache:
        raise CacheVersionError(fpath, "missing or stale feature cache")

    if use_cache and cache.is_current(tpath, "trials", tkey):
        logger.info("Dataset %s: trial cache hit", spec.name)
        trials = cache.read_trial_cache(tpath, tkey)
    else:
        trials = dataset_trials(spec, cfg.preprocessing)
        if not trials:
            raise PreconditionError(f"dataset {spec.name}: no trials carry either task label")
        if workdir is not None:
            cache.write_trial_cache(tpath, trials, tkey)

    matrix = build_feature_matrix(trials, cfg=cfg.features, jobs=jobs)
    origins = tuple((str(t.origin[0]), int(t.origin[1])) for t in trials)
    window_len = int(trials[0].window_len)
    if workdir is not None:
        cache.write_feature_cache(fpath, matrix, fkey, extra={"origins": origins, "window_len": window_len})
        logger.info("Dataset %s: wrote %s", spec.name, fpath)
    return PreparedDataset(spec.name, matrix, origins, window_len, fkey)


def split_dataset(prepared: PreparedDataset, cfg: RunConfig) -> SplitData:
    """Split the trials, then z-score both parts with training statistics."""
    ev = cfg.evaluation
    plan = make_split(prepared.matrix.labels, ev.ratio, ev.mode, cfg.seed, origins=prepared.origins,
                      overlap_guard=ev.overlap_guard, window_len=prepared.window_len)
    if plan.test.size == 0:
        raise PreconditionError(f"dataset {prepared.name}: the overlap guard left no test windows")
    train_matrix = normalize(prepared.matrix.take_rows(plan.train))
    test_matrix = apply_normalization(prepared.matrix.take_rows(plan.test), train_matrix.stats)
    return SplitData(plan, train_matrix, test_matrix)


def rankings_for(split: SplitData, cfg: RunConfig) -> RankingCache:
    rankings = RankingCache(split.train, cfg.selection.demotion_exponent)
    for group in split.train.groups():
        rankings.get(group)
    return rankings


#------------------------------------------------------------------------------
# Select
#------------------------------------------------------------------------------
def selection_key(prepared: PreparedDataset, spec: ClassifierSpec, cfg: RunConfig):
    return Utils.content_key("selection", PIPELINE_VERSION, prepared.key, cfg.evaluation.to_dict(),
                             cfg.selection.to_dict(), spec.to_dict(), cfg.seed)


def select_cell(split: SplitData, spec: ClassifierSpec, cfg: RunConfig, rankings=None):
    """Subsets per feature set for one classifier; failures are kept per set."""
    subsets, failures = {}, {}
    try:
        criterion = WrapperCriterion(spec, split.train.values, split.train.labels, cfg.selection.protocol,
                                     cfg.selection.folds, cfg.seed, X_test=split.test.values,
                                     y_test=split.test.labels)
    except CELL_ERRORS as err:
        return {}, {fs: _describe(err) for fs in FEATURE_SETS}

    present = {g.value for g in split.train.groups()}
    for group in FeatureGroup:
        if group.value not in present:
            failures[group.value] = "feature group not extracted"
            continue
        try:
            subsets[group.value] = select_within_group(split.train, group, spec, criterion, cfg.selection, rankings)
        except CELL_ERRORS as err:
            logger.warning("%s / %s: selection failed: %s", spec.kind.value, group.value, err)
            failures[group.value] = _describe(err)

    if subsets:
        try:
            subsets[BEST_OF_ALL] = select_across_groups(split.train, subsets.values(), spec, criterion,
                                                        cfg.selection)
        except CELL_ERRORS as err:
            logger.warning("%s / %s: selection failed: %s", spec.kind.value, BEST_OF_ALL, err)
            failures[BEST_OF_ALL] = _describe(err)
    else:
        failures[BEST_OF_ALL] = "no feature group produced a subset"
    logger.debug("%s: %d wrapper evaluations", spec.kind.value, criterion.evaluations)
    return subsets, failures


#------------------------------------------------------------------------------
# Train
#------------------------------------------------------------------------------
def evaluate_subset(split: SplitData, spec: ClassifierSpec, subset: FeatureSubset, seed=0):
    """Final model on all training rows of the subset; accuracy on the test rows."""
    columns = list(subset.indices)
    model = train(spec, split.train.values[:, columns], split.train.labels, seed=seed)
    return accuracy(predict(model, split.test.values[:, columns]), split.test.labels), model


def train_cell(dataset, split: SplitData, spec: ClassifierSpec, subsets, failures, seed=0):
    """CellResults for the seven feature sets plus the trained models by set."""
    cells, models = [], {}
    for fs in FEATURE_SETS:
        if fs not in subsets:
            cells.append(CellResult(dataset, spec.kind.value, fs, failure=failures.get(fs, "not selected")))
            continue
        subset = subsets[fs]
        try:
            acc, model = evaluate_subset(split, spec, subset, seed)
        except CELL_ERRORS as err:
            logger.warning("%s / %s / %s: training failed: %s", dataset, spec.kind.value, fs, err)
            cells.append(CellResult(dataset, spec.kind.value, fs, failure=_describe(err),
                                    subset=subset_to_dict(subset)))
            continue
        models[fs] = model
        cells.append(CellResult(dataset, spec.kind.value, fs, accuracy=acc, subset=subset_to_dict(subset)))
    return cells, models


#------------------------------------------------------------------------------
# One (dataset, classifier) job
#------------------------------------------------------------------------------
def _paths(workdir, dataset, spec):
    clf = _safe(spec.kind.value)
    return (os.path.join(workdir, "selection", _safe(dataset), f"{clf}.json"),
            os.path.join(workdir, "cells", _safe(dataset), f"{clf}.json"),
            os.path.join(workdir, "models", _safe(dataset), clf))


def run_selection(prepared, split, spec, cfg, rankings, workdir=None):
    key = selection_key(prepared, spec, cfg)
    path = _paths(workdir, prepared.name, spec)[0] if workdir else None
    if path and _stage_file_current(path, key):
        logger.info("%s / %s: selection up to date", prepared.name, spec.kind.value)
        data = _read_stage_file(path, key)
        return {fs: subset_from_dict(d) for fs, d in data["subsets"].items()}, data["failures"]
    subsets, failures = select_cell(split, spec, cfg, rankings)
    if path:
        _write_stage_file(path, {"key": key, "dataset": prepared.name, "classifier": spec.kind.value,
                                 "subsets": {fs: subset_to_dict(s) for fs, s in subsets.items()},
                                 "failures": failures})
    return subsets, failures


def load_selection(prepared, spec, cfg, workdir):
    path = _paths(workdir, prepared.name, spec)[0]
    if not os.path.exists(path):
        raise CacheVersionError(path, "no selection output")
    data = _read_stage_file(path, selection_key(prepared, spec, cfg))
    return {fs: subset_from_dict(d) for fs, d in data["subsets"].items()}, data["failures"]


def run_training(prepared, split, spec, cfg, subsets, failures, workdir=None):
    key = Utils.content_key("cells", PIPELINE_VERSION, selection_key(prepared, spec, cfg))
    _, cells_path, model_dir = _paths(workdir, prepared.name, spec) if workdir else (None, None, None)
    if cells_path and _stage_file_current(cells_path, key):
        logger.info("%s / %s: results up to date", prepared.name, spec.kind.value)
        return [CellResult.from_dict(c) for c in _read_stage_file(cells_path, key)["cells"]]
    cells, models = train_cell(prepared.name, split, spec, subsets, failures, cfg.seed)
    if workdir:
        for fs, model in models.items():
            Utils.atomic_write_text(os.path.join(model_dir, f"{_safe(fs)}.json"), model_to_json(model))
        _write_stage_file(cells_path, {"key": key, "dataset": prepared.name, "classifier": spec.kind.value,
                                       "cells": [c.to_dict() for c in cells]})
    return cells


def _classifier_job(prepared, split, spec, cfg, rankings, workdir, stages):
    """Select and/or train one classifier on one dataset. Returns its cells (or [] when not training)."""
    if "select" in stages:
        subsets, failures = run_selection(prepared, split, spec, cfg, rankings, workdir)
    else:
        subsets, failures = load_selection(prepared, spec, cfg, workdir)
    if "train" not in stages:
        return []
    return run_training(prepared, split, spec, cfg, subsets, failures, workdir)


def _failed_cells(dataset, specs, err):
    return [CellResult(dataset, spec.kind.value, fs, failure=_describe(err)) for spec in specs for fs in FEATURE_SETS]


def run_stages(cfg: RunConfig, stages=STAGES, workdir=None, datasets=None, jobs=None):
    """Run the requested stages; returns the cells produced by the train stage."""
    datasets = list(cfg.datasets if datasets is None else datasets)
    jobs = cfg.jobs if jobs is None else jobs
    needs_files = "extract" not in stages or ("train" in stages and "select" not in stages)
    if needs_files and workdir is None:
        raise PreconditionError("stages that read earlier outputs need a work directory")

    cells, jobs_list = [], []
    for spec in datasets:
        logger.info("Dataset %s: extract", spec.name)
        try:
            prepared = prepare_dataset(spec, cfg, workdir, jobs, require_cache="extract" not in stages)
        except (OSError, CacheVersionError):
            raise
        except CELL_ERRORS as err:
            logger.warning("Dataset %s failed: %s", spec.name, err)
            cells += _failed_cells(spec.name, cfg.classifiers, err)
            continue
        if not {"select", "train"} & set(stages):
            continue
        try:
            split = split_dataset(prepared, cfg)
            rankings = rankings_for(split, cfg) if "select" in stages else None
        except CELL_ERRORS as err:
            logger.warning("Dataset %s failed: %s", spec.name, err)
            cells += _failed_cells(spec.name, cfg.classifiers, err)
            continue
        for clf in cfg.classifiers:
            jobs_list.append(delayed(_classifier_job)(prepared, split, clf, cfg, rankings, workdir, tuple(stages)))

    if jobs_list:
        for result in Parallel(n_jobs=jobs)(jobs_list):
            cells.extend(result)
    return cells


#------------------------------------------------------------------------------
# Report
#------------------------------------------------------------------------------
def _report_context(cfg: RunConfig, classifiers):
    hyperparams = {}
    for name in classifiers:
        kind = ClassifierKind.parse(name)
        spec = next((s for s in cfg.classifiers if s.kind is kind), ClassifierSpec(kind))
        hyperparams[kind.value] = spec.resolved()
    seeds = {"run": cfg.seed, "split": cfg.seed, "selection": cfg.selection.seed,
             "statistics": cfg.features.statistics.seed,
             "synth": {d.name: d.synth_seed for d in cfg.datasets if d.synth is not None}}
    return hyperparams, seeds


def build_report(cfg: RunConfig, cells, started=None, datasets=None) -> BenchmarkReport:
    kinds = {c.classifier for c in cells}
    classifiers = [k.value for k in ClassifierKind if k.value in kinds]
    names = {c.dataset for c in cells}
    order = cfg.datasets if datasets is None else datasets
    datasets = [d.name for d in order if d.name in names]
    hyperparams, seeds = _report_context(cfg, classifiers)
    metadata = {"finished": datetime.now(timezone.utc).isoformat(), "version": __version__}
    if started is not None:
        metadata["started"] = started
    return assemble_report(cells, datasets, classifiers, config=cfg.to_dict(), hyperparams=hyperparams,
                           seeds=seeds, metadata=metadata)


def collect_cells(cfg: RunConfig, workdir):
    """Every stored result of the configured datasets, for any classifier trained so far."""
    cells = []
    for spec in cfg.datasets:
        directory = os.path.join(workdir, "cells", _safe(spec.name))
        if not os.path.isdir(directory):
            continue
        for name in sorted(os.listdir(directory)):
            if name.endswith(".json"):
                data = _read_stage_file(os.path.join(directory, name), None)
                cells.extend(CellResult.from_dict(c) for c in data["cells"])
    if not cells:
        raise CacheVersionError(os.path.join(workdir, "cells"), "no trained results")
    return fill_missing(cells)


def fill_missing(cells):
    datasets = sorted({c.dataset for c in cells})
    classifiers = sorted({c.classifier for c in cells})
    have = {(c.dataset, c.classifier, c.feature_set) for c in cells}
    cells = list(cells)
    for ds in datasets:
        for clf in classifiers:
            for fs in FEATURE_SETS:
                if (ds, clf, fs) not in have:
                    cells.append(CellResult(ds, clf, fs, failure="no result"))
    return cells


def run_benchmark(cfg: RunConfig, datasets=None, workdir=None, jobs=None, emit=False) -> BenchmarkReport:
    """Full pipeline; with ``emit`` the report files go to ``workdir``/report."""
    started = datetime.now(timezone.utc).isoformat()
    cells = run_stages(cfg, ("extract", "select", "train"), workdir, datasets, jobs)
    report = build_report(cfg, fill_missing(cells), started, datasets)
    if emit and workdir is not None:
        emit_report(report, os.path.join(workdir, "report"), cfg.formats)
    return report
