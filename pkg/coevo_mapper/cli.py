"""
Command-line entry point

    python run_pipeline.py all --config data/sample/sample.cfg --out output
    python run_pipeline.py burst --gamma 2 --top-n 10

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 a prior stage has not been run.
"""

import argparse
import logging
import sys

from scrapy.utils.log import configure_logging

from coevo_mapper.config import PipelineConfig, load_settings
from coevo_mapper.exceptions import CoevoError, ConfigError, DependencyError
from coevo_mapper.stages import SUBCOMMANDS, StageContext, run_all, run_stage

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_DEPENDENCY = 3


class ArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors exiting 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = ArgumentParser(
        prog="run_pipeline.py",
        description="Co-evolution mapper - bursts, co-author networks, science maps and convergence "
                    "of publication and funding records",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Stages (each reads the artifacts of the ones before it):
  ingest      parse exports, filter, tag topics
  keywords    cluster keyword variants, extract award terms
  burst       burst detection per topic and source
  network     co-author networks, layouts, geocoding
  sciencemap  science-map overlays per year slice
  converge    overlaps, inter-citation flows, growth trends
  render      SVG figures
  report      text summary
  all         everything in order

Examples:
  python run_pipeline.py all --config data/sample/sample.cfg
  python run_pipeline.py burst --gamma 2 --scaling 3 --top-n 10
  python run_pipeline.py network --min-cited 5 --min-edge-weight 2 --seed 7
        """,
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS, help="Stage to run")
    parser.add_argument("--config", "-c", type=str, default=None,
                        help="key = value config file. Default: $COEVO_CONFIG")
    parser.add_argument("--out", "-o", type=str, default=None, help="Output directory. Default: output")
    parser.add_argument("--window", "-w", type=str, default=None, help="Analysis window START:END, e.g. 1998:2017")
    parser.add_argument("--topics", "-t", type=str, default=None,
                        help="Comma-separated topic labels to analyse. Default: all configured")
    parser.add_argument("--gamma", type=float, default=None, help="Burst transition cost. Default: 1.0")
    parser.add_argument("--scaling", type=float, default=None, help="Burst density scaling. Default: 2.0")
    parser.add_argument("--states", type=int, default=None, help="Number of burst states. Default: 1")
    parser.add_argument("--min-length", type=int, default=None, help="Shortest burst in years. Default: 1")
    parser.add_argument("--seed", type=int, default=None, help="Layout seed (required here or in the config)")
    parser.add_argument("--min-cited", type=int, default=None, help="Minimum node citations. Default: 1")
    parser.add_argument("--min-edge-weight", type=int, default=None, help="Minimum edge weight. Default: 1")
    parser.add_argument("--top-n", type=int, default=None, help="Burst terms kept per source. Default: 15")
    parser.add_argument("--log-level", "-l", type=str, choices=["debug", "info", "warning", "error"],
                        default=None, help="Logging level. Default: info")
    return parser


def parse_window(value):
    start, sep, end = value.partition(":")
    if not sep:
        raise ConfigError(f"--window expects START:END, got '{value}'", key="WINDOW_START")
    try:
        return int(start), int(end)
    except ValueError as e:
        raise ConfigError(f"--window expects years, got '{value}'", key="WINDOW_START") from e


def apply_flags(settings, args):
    """Command-line flags override the config file."""
    flags = {
        "OUTPUT_DIR": args.out,
        "BURST_GAMMA": args.gamma,
        "BURST_SCALING": args.scaling,
        "BURST_STATES": args.states,
        "BURST_MIN_LENGTH": args.min_length,
        "LAYOUT_SEED": args.seed,
        "NETWORK_MIN_CITED": args.min_cited,
        "NETWORK_MIN_EDGE_WEIGHT": args.min_edge_weight,
        "BURST_TOP_N": args.top_n,
        "LOG_LEVEL": args.log_level.upper() if args.log_level else None,
    }
    for key, value in flags.items():
        if value is not None:
            settings.set(key, value, priority="cmdline")

    if args.window:
        start, end = parse_window(args.window)
        settings.set("WINDOW_START", start, priority="cmdline")
        settings.set("WINDOW_END", end, priority="cmdline")

    if args.topics:
        queries = settings.getdict("TOPIC_QUERIES")
        wanted = [t.strip() for t in args.topics.split(",") if t.strip()]
        unknown = [t for t in wanted if t not in queries]
        if unknown:
            raise ConfigError(f"unknown topics {unknown}, configured: {sorted(queries)}", key="TOPIC_QUERIES")
        settings.set("TOPIC_QUERIES", {t: queries[t] for t in wanted}, priority="cmdline")
    return settings


def run(subcommand, settings):
    """
    Run one stage (or all) with merged settings.

    Raises:
        ConfigError, DependencyError, CoevoError
    """
    config = PipelineConfig.from_settings(settings)
    ctx = StageContext(settings, config)
    if subcommand == "all":
        run_all(ctx)
    else:
        run_stage(subcommand, ctx)
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    try:
        settings = apply_flags(load_settings(args.config), args)
        configure_logging(settings)
        return run(args.subcommand, settings)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_USAGE
    except DependencyError as e:
        logger.error(str(e))
        return EXIT_DEPENDENCY
    except (CoevoError, ValueError, OSError) as e:
        logger.error(f"Data error: {e}")
        return EXIT_DATA
