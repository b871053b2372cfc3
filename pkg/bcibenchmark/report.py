"""Benchmark results: per-cell accuracies, aggregates across datasets,
best / second-best flags, delta analyses and selection distributions.

Standard deviations are population std (divide by n). Timestamps and host
details live in ``metadata``; everything else is a pure function of the
cells, so two runs with equal seeds and config serialize identically once
``metadata`` is left out.
"""
from __future__ import annotations

import csv
import json
import logging
import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import Utils
from .errors import DomainError, StructuralError
from .evaluation import band_distribution, feature_family_distribution
from .features import FeatureGroup
from .selection import subset_from_dict

logger = logging.getLogger(__name__)

REPORT_SCHEMA = 1
BEST_OF_ALL = "Best of all groups"
GROUP_SETS = tuple(g.value for g in FeatureGroup)
FEATURE_SETS = GROUP_SETS + (BEST_OF_ALL,)
REPORT_FORMATS = ("csv", "json", "plotdata")
AGGREGATE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class CellResult:
    dataset: str
    classifier: str
    feature_set: str
    accuracy: float | None = None
    failure: str | None = None
    subset: dict | None = None

    @property
    def failed(self):
        return self.accuracy is None

    def to_dict(self):
        return {"dataset": self.dataset, "classifier": self.classifier, "feature_set": self.feature_set,
                "accuracy": self.accuracy, "failure": self.failure, "subset": self.subset}

    @classmethod
    def from_dict(cls, data):
        return cls(**{k: data.get(k) for k in ("dataset", "classifier", "feature_set",
                                                  "accuracy", "failure", "subset")})


@dataclass(frozen=True)
class BenchmarkReport:
    datasets: tuple
    classifiers: tuple
    cells: tuple
    aggregates: dict
    flags: dict
    deltas: dict
    family_counts: dict
    band_counts: dict
    config: dict = field(default_factory=dict)
    hyperparams: dict = field(default_factory=dict)
    seeds: dict = field(default_factory=dict)
    feature_sets: tuple = FEATURE_SETS
    schema_version: int = REPORT_SCHEMA
    metadata: dict = field(default_factory=dict)

    def cell(self, dataset, classifier, feature_set):
        for c in self.cells:
            if (c.dataset, c.classifier, c.feature_set) == (dataset, classifier, feature_set):
                return c
        return None

    @property
    def failures(self):
        return [c for c in self.cells if c.failed]


#------------------------------------------------------------------------------
# Assembly
#------------------------------------------------------------------------------
def _aggregate(cells, classifiers):
    out = {}
    for clf in classifiers:
        row = {}
        for fs in FEATURE_SETS:
            values = [c.accuracy for c in cells if c.classifier == clf and c.feature_set == fs and not c.failed]
            if values:
                row[fs] = {"mean": float(np.mean(values)), "std": float(np.std(values)), "n": len(values)}
            else:
                row[fs] = {"mean": None, "std": None, "n": 0}
        out[clf] = row
    return out


def _flags(aggregates):
    """Best and second-best group per classifier; ties go to the lower std, then column order."""
    flags = {}
    for clf, row in aggregates.items():
        ranked = sorted(
            (fs for fs in GROUP_SETS if row[fs]["mean"] is not None),
            key=lambda fs: (-row[fs]["mean"], row[fs]["std"], GROUP_SETS.index(fs)),
        )
        flags[clf] = {"best": ranked[0] if ranked else None,
                      "second": ranked[1] if len(ranked) > 1 else None}
    return flags


def _spread(values):
    if not values:
        return {"mean": None, "std": None, "n": 0}
    return {"mean": float(np.mean(values)), "std": float(np.std(values)), "n": len(values)}


def _deltas(aggregates, flags):
    per_classifier = {}
    gaps, gains = [], []
    for clf, row in aggregates.items():
        best, second = flags[clf]["best"], flags[clf]["second"]
        gap = gain = None
        if best and second:
            gap = row[best]["mean"] - row[second]["mean"]
            gaps.append(gap)
        if best and row[BEST_OF_ALL]["mean"] is not None:
            gain = row[BEST_OF_ALL]["mean"] - row[best]["mean"]
            gains.append(gain)
        per_classifier[clf] = {"best_minus_second": gap, "best_of_all_minus_best_group": gain}
    return {
        "per_classifier": per_classifier,
        "best_minus_second": _spread(gaps),
        "best_of_all_minus_best_group": _spread(gains),
        # classifiers whose across-group search ended below their best group are left out
        "best_of_all_minus_best_group_without_decreases": _spread([g for g in gains if g >= 0]),
    }


def _subsets(cells, group_only=True):
    subsets = []
    for c in cells:
        if c.subset is None or (group_only and c.feature_set == BEST_OF_ALL):
            continue
        subsets.append(subset_from_dict(c.subset))
    return subsets


def assemble_report(cells, datasets, classifiers, config=None, hyperparams=None, seeds=None,
                    metadata=None) -> BenchmarkReport:
    cells = [replace(c, subset=Utils.to_plain(c.subset)) for c in cells]
    cells = tuple(sorted(cells, key=lambda c: (list(datasets).index(c.dataset),
                                               list(classifiers).index(c.classifier),
                                               FEATURE_SETS.index(c.feature_set))))
    for c in cells:
        if c.accuracy is not None and not 0.0 <= c.accuracy <= 100.0:
            raise DomainError(f"{c.dataset}/{c.classifier}/{c.feature_set}: accuracy {c.accuracy} outside [0, 100]")
    aggregates = _aggregate(cells, classifiers)
    flags = _flags(aggregates)
    subsets = _subsets(cells)
    families = feature_family_distribution(subsets)
    bands = band_distribution([s for s in subsets if s.group == FeatureGroup.ENERGY.value])
    report = BenchmarkReport(
        datasets=tuple(datasets),
        classifiers=tuple(classifiers),
        cells=cells,
        aggregates=aggregates,
        flags=flags,
        deltas=_deltas(aggregates, flags),
        family_counts={clf: families.get(clf, {}) for clf in classifiers},
        band_counts={clf: bands.get(clf, {}) for clf in classifiers},
        config=Utils.to_plain(config or {}),
        hyperparams=Utils.to_plain(hyperparams or {}),
        seeds=Utils.to_plain(seeds or {}),
        metadata=Utils.to_plain(metadata or {}),
    )
    verify_aggregates(report)
    if report.failures:
        logger.warning("%d of %d cells failed", len(report.failures), len(cells))
    return report


def verify_aggregates(report: BenchmarkReport):
    """Raise StructuralError unless every stored mean/std matches the cells."""
    fresh = _aggregate(report.cells, report.classifiers)
    for clf, row in fresh.items():
        for fs, agg in row.items():
            stored = report.aggregates.get(clf, {}).get(fs)
            if stored is None or stored["n"] != agg["n"]:
                raise StructuralError(f"aggregate {clf}/{fs} does not match its cells")
            for key in ("mean", "std"):
                a, b = stored[key], agg[key]
                if (a is None) != (b is None) or (a is not None and abs(a - b) > AGGREGATE_TOLERANCE):
                    raise StructuralError(f"aggregate {clf}/{fs} {key}={a} but the cells give {b}")
    return True


#------------------------------------------------------------------------------
# JSON
#------------------------------------------------------------------------------
def report_to_dict(report: BenchmarkReport, include_metadata=True):
    data = {
        "schema_version": report.schema_version,
        "datasets": list(report.datasets),
        "classifiers": list(report.classifiers),
        "feature_sets": list(report.feature_sets),
        "cells": [c.to_dict() for c in report.cells],
        "aggregates": report.aggregates,
        "flags": report.flags,
        "deltas": report.deltas,
        "family_counts": report.family_counts,
        "band_counts": report.band_counts,
        "config": report.config,
        "hyperparams": report.hyperparams,
        "seeds": report.seeds,
    }
    if include_metadata:
        data["metadata"] = report.metadata
    return data


def report_to_json(report: BenchmarkReport, include_metadata=True) -> str:
    return json.dumps(Utils.to_plain(report_to_dict(report, include_metadata)), sort_keys=True, indent=1)


def report_from_json(text) -> BenchmarkReport:
    data = json.loads(text)
    if data.get("schema_version") != REPORT_SCHEMA:
        raise StructuralError(f"report schema {data.get('schema_version')} is not {REPORT_SCHEMA}")
    return BenchmarkReport(
        datasets=tuple(data["datasets"]),
        classifiers=tuple(data["classifiers"]),
        feature_sets=tuple(data["feature_sets"]),
        cells=tuple(CellResult.from_dict(c) for c in data["cells"]),
        aggregates=data["aggregates"],
        flags=data["flags"],
        deltas=data["deltas"],
        family_counts=data["family_counts"],
        band_counts=data["band_counts"],
        config=data["config"],
        hyperparams=data["hyperparams"],
        seeds=data["seeds"],
        schema_version=data["schema_version"],
        metadata=data.get("metadata", {}),
    )


#------------------------------------------------------------------------------
# Files
#------------------------------------------------------------------------------
def _pair(agg):
    if agg["mean"] is None:
        return "n/a"
    return "%.1f / %.1f" % (agg["mean"], agg["std"])


def _write_rows(path, header, rows):
    with Utils.atomic_open(path, "w") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _safe_name(name):
    return "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in name)


def _emit_csv(report, directory):
    written = [_write_rows(
        os.path.join(directory, "table.csv"),
        ["classifier"] + list(report.feature_sets),
        [[clf] + [_pair(report.aggregates[clf][fs]) for fs in report.feature_sets] for clf in report.classifiers],
    )]
    written.append(_write_rows(
        os.path.join(directory, "table_flags.csv"),
        ["classifier", "best", "second_best"],
        [[clf, report.flags[clf]["best"] or "", report.flags[clf]["second"] or ""] for clf in report.classifiers],
    ))
    for clf in report.classifiers:
        rows = []
        for ds in report.datasets:
            row = [ds]
            for fs in report.feature_sets:
                c = report.cell(ds, clf, fs)
                row.append("failed" if c is None or c.failed else "%.1f" % c.accuracy)
            rows.append(row)
        written.append(_write_rows(os.path.join(directory, f"per_dataset_{_safe_name(clf)}.csv"),
                                   ["dataset"] + list(report.feature_sets), rows))
    written.append(_write_rows(
        os.path.join(directory, "families.csv"), ["classifier", "family", "count"],
        [[clf, fam, n] for clf in report.classifiers for fam, n in report.family_counts.get(clf, {}).items()],
    ))
    written.append(_write_rows(
        os.path.join(directory, "bands.csv"), ["classifier", "band", "count"],
        [[clf, band, n] for clf in report.classifiers for band, n in report.band_counts.get(clf, {}).items()],
    ))
    return written


def _emit_plotdata(report, directory):
    rows = [[c.dataset, c.classifier, c.feature_set, repr(c.accuracy)] for c in report.cells if not c.failed]
    return [_write_rows(os.path.join(directory, "plotdata.csv"),
                        ["dataset", "classifier", "feature_set", "accuracy"], rows)]


def emit_report(report: BenchmarkReport, directory, formats=REPORT_FORMATS):
    """Write the requested formats under ``directory``; returns the written paths."""
    unknown = set(formats) - set(REPORT_FORMATS)
    if unknown:
        raise DomainError(f"unknown report formats {sorted(unknown)}")
    os.makedirs(directory, exist_ok=True)
    written = []
    if "csv" in formats:
        written += _emit_csv(report, directory)
    if "json" in formats:
        path = os.path.join(directory, "report.json")
        Utils.atomic_write_text(path, report_to_json(report))
        written.append(path)
    if "plotdata" in formats:
        written += _emit_plotdata(report, directory)
    logger.info("Report written to %s (%s)", directory, ", ".join(formats))
    return written
