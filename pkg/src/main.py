#!/usr/bin/env python3
"""
MIA Audit Tool - Main Entry Point

Membership-inference audits of small softmax classifiers: shadow-model attack
preparation, three score-based attacks, evaluation on member and nonmember
datasets, the input-scaling sweep and cross-scenario reports.
"""

import sys
import argparse
import logging
from pathlib import Path
from typing import List, Optional

# Add src directory to Python path
sys.path.insert(0, str(Path(__file__).parent))

from utils import setup_logging, ConfigLoader, ConfigError, MIAToolkitError
from utils.version import __version__
from core import cmd_generate_data, cmd_run, cmd_scaling_sweep, cmd_report, load_experiment

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2


class UsageErrorParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with code 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def u64(value: str) -> int:
    try:
        seed = int(value, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed: {value!r}")
    if not 0 <= seed <= 2**64 - 1:
        raise argparse.ArgumentTypeError(f"seed out of range for an unsigned 64-bit integer: {value}")
    return seed


class MIAAuditTool:
    """Main orchestrator for the audit commands."""

    def __init__(self, base_path: Optional[Path] = None, verbose: bool = False):
        """
        Initialize the MIA Audit Tool.

        Args:
            base_path: Repository root holding ``config/`` (defaults to the parent of ``src/``)
            verbose: Log at DEBUG level
        """
        self.config_loader = ConfigLoader(base_path=base_path)
        self.config = self.config_loader.load_main_config()
        if verbose:
            self.config.setdefault("logging", {})["level"] = "DEBUG"

        self.logger = setup_logging(self.config, "mia_audit")
        self.progress = bool(self.config.get("progress", {}).get("enabled", False))
        logger.debug(f"MIA Audit Tool {__version__} initialized")

    def generate_data(self, config_path: Optional[str], seed: Optional[int], scenario: Optional[str],
                      out: Optional[str]) -> Path:
        config = load_experiment(self.config_loader, config_path, seed, scenario)
        run_dir = cmd_generate_data(config, self.config, out)
        print(f"Datasets written to: {run_dir / 'data'}")
        return run_dir

    def run(self, config_path: Optional[str], seed: Optional[int], scenario: Optional[str],
            out: Optional[str]) -> Path:
        config = load_experiment(self.config_loader, config_path, seed, scenario)
        runner = cmd_run(config, self.config, out, self.progress)
        self._print_summary(runner)
        return runner.run_dir

    def scaling_sweep(self, config_path: Optional[str], seed: Optional[int], scenario: Optional[str],
                      out: Optional[str]) -> None:
        config = load_experiment(self.config_loader, config_path, seed, scenario)
        table = cmd_scaling_sweep(config, self.config, out, self.progress)
        print(table.to_string(index=False, float_format=lambda v: f"{v:.6g}"))

    def report(self, run_dirs: List[str], out: Optional[str]) -> None:
        result = cmd_report(run_dirs, self.config, out)
        columns = [c for c in ("scenario", "attack", "dataset", "n_seeds", "fpr", "auroc", "delta_auroc")
                   if c in result.comparison.columns]
        print(result.comparison[columns].to_string(index=False, float_format=lambda v: f"{v:.4f}"))
        print(f"\nComparison written to: {result.paths[0].parent}")

    def _print_summary(self, runner) -> None:
        """Print the per-attack, per-dataset table to the console."""
        print("\n" + "=" * 72)
        print(f"MEMBERSHIP INFERENCE AUDIT: {runner.config.name} | scenario={runner.config.scenario.id} "
              f"| seed={runner.config.seed}")
        print("=" * 72)
        for key, value in runner.model_summary().items():
            print(f"{key}: {value:.4f}" if isinstance(value, float) else f"{key}: {value}")
        print(f"\n{'attack':<8} {'dataset':<14} {'precision':>9} {'recall':>7} {'fpr':>7} {'auroc':>7}")
        for report in runner.reports:
            print(f"{report.attack:<8} {report.dataset:<14} {report.precision:>9.4f} {report.recall:>7.4f} "
                  f"{report.fpr:>7.4f} {report.auroc:>7.4f}")
        print("=" * 72)
        print(f"Artifacts: {runner.run_dir}")


def build_parser() -> argparse.ArgumentParser:
    common = UsageErrorParser(add_help=False)
    common.add_argument('--config', '-c', type=str,
                        help='Experiment config (YAML or JSON), merged over config/experiment.yaml')
    common.add_argument('--seed', type=u64, help='Master seed (unsigned 64-bit), overrides the config')
    common.add_argument('--scenario', type=str,
                        help='Scenario id from config/scenarios (standard, label_smoothing, temperature, l2)')
    common.add_argument('--out', '-o', type=str, help='Run directory (default: derived from the config)')

    parser = UsageErrorParser(
        description="MIA Audit Tool - membership inference audits of softmax classifiers",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python src/main.py generate-data --seed 7 --out runs/data_only
  python src/main.py run                                   # default config, standard scenario
  python src/main.py run --scenario label_smoothing --seed 1 --out runs/ls_1
  python src/main.py scaling-sweep --out runs/std_42       # reuses a finished run
  python src/main.py report runs/std_42 runs/ls_1 --out runs/comparison
        """
    )
    parser.add_argument('--verbose', '-v', action='store_true', help='Enable verbose logging')
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest='command', metavar='command')
    commands.required = True

    commands.add_parser('generate-data', parents=[common], help='Write dataset splits and evaluation datasets')
    commands.add_parser('run', parents=[common], help='Full pipeline: train, fit attacks, evaluate, report')
    commands.add_parser('scaling-sweep', parents=[common], help='Input-scaling sweep on the target model')
    report = commands.add_parser('report', help='Compare completed runs')
    report.add_argument('run_dirs', nargs='+', help='Completed run directories')
    report.add_argument('--out', '-o', type=str, help='Output directory (default: <output>/report)')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    args = build_parser().parse_args(argv)

    try:
        tool = MIAAuditTool(verbose=args.verbose)

        if args.command == 'report':
            tool.report(args.run_dirs, args.out)
            return EXIT_OK

        handler = {
            'generate-data': tool.generate_data,
            'run': tool.run,
            'scaling-sweep': tool.scaling_sweep,
        }[args.command]
        handler(args.config, args.seed, args.scenario, args.out)
        return EXIT_OK

    except ConfigError as e:
        print(f"\nConfiguration error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        print("\n\nInterrupted by user", file=sys.stderr)
        return EXIT_FAILURE
    except MIAToolkitError as e:
        print(f"\nError: {e}", file=sys.stderr)
        return EXIT_FAILURE
    except Exception as e:
        print(f"\nFatal error: {e}", file=sys.stderr)
        if args.verbose:
            import traceback
            traceback.print_exc()
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
