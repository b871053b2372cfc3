"""Command line: ``bcibench <run|extract|select|train|report|synth> [options]``.

Exit codes: 0 success, 1 failed cells under ``--strict``, 2 invalid
configuration or generator spec, 3 I/O failure or stale upstream output.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

from ruamel.yaml.error import YAMLError

from .__version__ import __version__
from .benchmark import STAGES, build_report, collect_cells, fill_missing, run_stages
from .config import bundled_config_path, load_config
from .errors import CacheVersionError, ConfigError
from .report import emit_report
from .signals import RecordingFormat, save_recording
from .synthetic import bundled_spec_path, load_synth_spec, synth_recording

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED_CELLS = 1
EXIT_CONFIG = 2
EXIT_IO = 3

_handler = None


def setup_logging(verbosity=0):
    global _handler
    package_logger = logging.getLogger("bcibenchmark")
    if _handler is not None:
        package_logger.removeHandler(_handler)
    _handler = logging.StreamHandler(sys.stdout)
    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    _handler.setFormatter(formatter)
    package_logger.addHandler(_handler)
    package_logger.setLevel(logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG)


def build_parser():
    parser = argparse.ArgumentParser(prog="bcibench", description="EEG feature and classifier benchmark")
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('-c', '--config', default=None,
                        help='run configuration (YAML); defaults to the bundled synthetic run')
    common.add_argument('-j', '--jobs', type=int, default=None,
                        help='worker processes, 0 for every logical core')
    common.add_argument('--seed', type=int, default=None,
                        help='override the configured seed')
    common.add_argument('--paper-faithful', action='store_true',
                        help='score wrapper subsets on the held-out rows')
    common.add_argument('--strict', action='store_true',
                        help='exit non-zero when any cell failed')
    common.add_argument('-v', '--verbose', action='count', default=0,
                        help='-v for progress, -vv for debug output')

    subparsers = parser.add_subparsers(dest='subcommand', required=True)
    run_parser = subparsers.add_parser('run', parents=[common], help='full pipeline')
    run_parser.add_argument('--stage', action='append', choices=STAGES,
                            help='only run these stages (repeatable)')
    for stage in ('extract', 'select', 'train', 'report'):
        subparsers.add_parser(stage, parents=[common], help=f'{stage} stage only')

    synth_parser = subparsers.add_parser('synth', help='write a generated recording')
    synth_parser.add_argument('spec', nargs='?', default='planted',
                              help='generator spec file or bundled spec name')
    synth_parser.add_argument('-o', '--output', required=True,
                              help='recording file to write')
    synth_parser.add_argument('--seed', type=int, default=0)
    synth_parser.add_argument('--format', default=RecordingFormat.CSV.value,
                              choices=[f.value for f in RecordingFormat])
    synth_parser.add_argument('-v', '--verbose', action='count', default=0)
    return parser


def _load(options):
    path = options.config or str(bundled_config_path())
    return load_config(path, seed=options.seed, jobs=options.jobs, paper_faithful=options.paper_faithful)


def _finish(report, cfg, options):
    emit_report(report, os.path.join(cfg.output_dir, "report"), cfg.formats)
    failures = report.failures
    if failures:
        logger.warning("%d failed cells; first: %s/%s/%s: %s", len(failures), failures[0].dataset,
                       failures[0].classifier, failures[0].feature_set, failures[0].failure)
    if options.strict and failures:
        return EXIT_FAILED_CELLS
    return EXIT_OK


def cmd_run(options, stages=None):
    cfg = _load(options)
    stages = tuple(s for s in STAGES if s in (stages or options.stage or STAGES))
    work = tuple(s for s in stages if s != "report")
    cells = run_stages(cfg, work, cfg.output_dir) if work else []
    if "report" not in stages:
        return EXIT_OK
    if "train" in stages and cells:
        report = build_report(cfg, fill_missing(cells))
    else:
        report = build_report(cfg, collect_cells(cfg, cfg.output_dir))
    return _finish(report, cfg, options)


def cmd_synth(options):
    path = options.spec
    if not os.path.exists(path):
        path = bundled_spec_path(options.spec)
    spec = load_synth_spec(path)
    rec = synth_recording(spec, options.seed)
    save_recording(rec, options.output, format=options.format)
    logger.info("Wrote %s: %d channels, %.1f s", options.output, rec.n_channels, rec.duration)
    return EXIT_OK


def main(argv=None):
    options = build_parser().parse_args(argv)
    setup_logging(options.verbose)
    try:
        if options.subcommand == 'synth':
            return cmd_synth(options)
        if options.subcommand == 'run':
            return cmd_run(options)
        return cmd_run(options, stages=(options.subcommand,))
    except (ConfigError, YAMLError) as err:
        print(str(err), file=sys.stderr)
        return EXIT_CONFIG
    except CacheVersionError as err:
        print(str(err), file=sys.stderr)
        return EXIT_IO
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == '__main__':
    sys.exit(main())
