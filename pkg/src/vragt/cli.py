"""Command-line interface for the VRA-GT simulator."""

import functools
import json
import logging
import sys
from typing import Any, Dict, List, Optional, Tuple

import click

from . import __version__
from .config import load_config, parse_value, read_config_dict
from .errors import (
    ConfigError,
    DivergenceError,
    InvalidConfigurationError,
    InvalidInputError,
    InvalidTopologyError,
    ValidationFailedError,
)
from .formatter import read_result_csv
from .harness import ExperimentRunner, fit_rate, sweep as run_sweep

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_DIVERGENCE = 4

logger = logging.getLogger("vragt")


def setup_logging(verbose: bool = False):
    """Single stream handler on the package logger."""
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter('%(asctime)s - %(levelname)s - %(message)s'))
        logger.addHandler(handler)


def handle_errors(command):
    """Map package errors onto exit codes."""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except (ConfigError, InvalidInputError, InvalidTopologyError,
                InvalidConfigurationError) as e:
            click.echo(f"Configuration error: {e}", err=True)
            sys.exit(EXIT_CONFIG)
        except ValidationFailedError as e:
            click.echo(f"Validation failed: {e}", err=True)
            sys.exit(EXIT_VALIDATION)
        except DivergenceError as e:
            click.echo(f"Diverged: {e}", err=True)
            sys.exit(EXIT_DIVERGENCE)
        except Exception as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_ERROR)
    return wrapper


def _overrides(seeds: Optional[int]) -> Dict[str, Any]:
    # --seeds N replaces any explicit seed list
    return {"num_seeds": seeds, "seeds": None} if seeds is not None else {}


def _parse_params(params: Tuple[str, ...]) -> Dict[str, List[Any]]:
    parsed: Dict[str, List[Any]] = {}
    for item in params:
        if "=" not in item:
            raise ConfigError(f"--param expects key=v1,v2, got {item!r}")
        key, values = item.split("=", 1)
        parsed[key.strip()] = [parse_value(v.strip()) for v in values.split(",")]
    return parsed


@click.group()
@click.version_option(version=__version__, prog_name="vragt")
def cli():
    """VRA-GT - noisy push-pull gradient tracking experiments on directed graphs."""
    pass


@cli.command()
@click.option('--config', '-c', 'config_path', type=click.Path(exists=True), help='JSON config (defaults when omitted)')
@click.option('--out', '-o', 'out_dir', type=click.Path(), required=True, help='Output directory')
@click.option('--seeds', type=int, help='Number of seeds (overrides the config)')
@click.option('--threads', type=int, default=1, show_default=True, help='Worker threads for the seed pool')
@click.option('--force', is_flag=True, help='Run even when validation fails')
@click.option('--verbose', is_flag=True, help='Log per-checkpoint metrics')
@handle_errors
def run(config_path: Optional[str], out_dir: str, seeds: Optional[int], threads: int, force: bool, verbose: bool):
    """Run every seed of an experiment and write CSV results."""
    setup_logging(verbose)
    config = load_config(config_path, _overrides(seeds))
    click.echo(config.show())

    summary = ExperimentRunner(config, threads=threads, force=force).run(out_dir)

    for warning in summary.warnings:
        click.echo(f"⚠ {warning}", err=True)
    click.echo(f"✓ {len(summary.seed_files)} seed file(s) written to {summary.out_dir}")
    click.echo(f"✓ Aggregate: {summary.aggregate_file}")
    click.echo(f"  Wall time: {summary.wall_time:.2f}s")


@cli.command()
@click.option('--config', '-c', 'config_path', type=click.Path(exists=True), help='JSON config (defaults when omitted)')
@click.option('--format', '-f', 'output_format', type=click.Choice(['text', 'json'], case_sensitive=False),
              default='text', help='Report format')
@click.option('--output', '-o', type=click.Path(), help='Also save the report to this file')
@click.option('--verbose', is_flag=True, help='Enable debug logging')
@handle_errors
def validate(config_path: Optional[str], output_format: str, output: Optional[str], verbose: bool):
    """Check assumptions and theorem conditions for a config."""
    setup_logging(verbose)
    config = load_config(config_path)
    report = ExperimentRunner(config).validate()

    if output_format == 'json':
        text = json.dumps(report.to_dict(), indent=2, default=str)
    else:
        text = report.export_text()
    click.echo(text)

    if output:
        with open(output, 'w') as f:
            f.write(text)
        click.echo(f"✓ Report saved to {output}")

    sys.exit(EXIT_OK if report.passed else EXIT_VALIDATION)


@cli.command('fit-rate')
@click.argument('csv_file', type=click.Path(exists=True))
@click.option('--metric', '-m', default='opt_gap', show_default=True,
              help="Metric name, or names joined by '+'")
@click.option('--k-lo', type=float, required=True, help='Window start')
@click.option('--k-hi', type=float, required=True, help='Window end')
@click.option('--json', 'as_json', is_flag=True, help='Print the fit as JSON')
@handle_errors
def fit_rate_command(csv_file: str, metric: str, k_lo: float, k_hi: float, as_json: bool):
    """Fit a log-log slope to a metric of a result CSV."""
    fit = fit_rate(read_result_csv(csv_file), metric, k_lo, k_hi)
    click.echo(fit.model_dump_json(indent=2) if as_json else fit.export_text())


@cli.command()
@click.option('--config', '-c', 'config_path', type=click.Path(exists=True), help='Base JSON config')
@click.option('--out', '-o', 'out_dir', type=click.Path(), required=True, help='Parent output directory')
@click.option('--param', '-p', 'params', multiple=True, required=True,
              help='Dotted key and values, e.g. sched.beta.e=0.6,0.7')
@click.option('--seeds', type=int, help='Number of seeds (overrides the config)')
@click.option('--threads', type=int, default=1, show_default=True, help='Worker threads per cell')
@click.option('--force', is_flag=True, help='Run cells even when validation fails')
@click.option('--verbose', is_flag=True, help='Enable debug logging')
@handle_errors
def sweep(config_path: Optional[str], out_dir: str, params: Tuple[str, ...], seeds: Optional[int],
          threads: int, force: bool, verbose: bool):
    """Run the cartesian product of parameter values, one directory per cell."""
    setup_logging(verbose)
    base = read_config_dict(config_path) if config_path else {}
    base.update(_overrides(seeds))
    cells = run_sweep(base, _parse_params(params), out_dir, threads=threads, force=force)

    for cell in cells:
        click.echo(f"✓ {cell.out_dir.name}")
    click.echo(f"\n{len(cells)} cell(s) written under {out_dir}")


def main():
    """Main entry point for the CLI."""
    cli()


if __name__ == '__main__':
    main()
