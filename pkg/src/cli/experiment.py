from pathlib import Path

import click
from rich.console import Console
from rich.table import Table

from cli.common import InputError
from fibrecl.experiment import ExperimentConfig, emit, run_experiments
from fibrecl.utils import ConfigError, FibreclError


@click.command()
@click.option(
    "--config",
    "configs",
    required=True,
    multiple=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Experiment config (YAML or JSON); may be repeated",
)
@click.option("--output", type=Path, help="Output directory (default: the config's output)")
@click.pass_context
def run(ctx, configs: tuple[Path, ...], output: Path | None):
    """
    Run experiments and write a JSON report plus one CSV per table for each
    """
    try:
        loaded = [ExperimentConfig.from_file(path) for path in configs]
    except ConfigError as e:
        raise InputError(str(e)) from e
    try:
        results = run_experiments(loaded)
    except FibreclError as e:
        raise InputError(str(e)) from e

    summary = Table(show_header=True, header_style="bold")
    for header in ("experiment", "tables", "audits", "exit code", "written to"):
        summary.add_column(header)
    for config, result in zip(loaded, results):
        target = output or (config.base_dir / (config.output or "results"))
        emit(result, target)
        audits = ", ".join(f"{r.audit}: {r.status.value}" for r in result.audits) or "-"
        tables = ", ".join(table.name for table in result.tables) or "-"
        summary.add_row(config.name, tables, audits, str(result.exit_code), str(target))
    Console(stderr=True).print(summary)
    codes = {result.exit_code for result in results}
    ctx.exit(2 if 2 in codes else max(codes))
