"""
Variational-inequality check command
"""
import sys
from pathlib import Path

import click
from rich.table import Table

from cli.output import console, fail
from proxnet.core.exceptions import ProxNetException
from proxnet.services.config_service import load_block_point, load_experiment
from proxnet.services.vi_checker import existence_flags, monotonicity_check, vi_residual

EXIT_RESIDUAL = 5


@click.command()
@click.option(
    "--config",
    "config_path",
    type=click.Path(path_type=Path),
    required=True,
    help="Experiment YAML file",
)
@click.option(
    "--point",
    "point_path",
    type=click.Path(path_type=Path),
    required=True,
    help="Block point file, one component per line",
)
@click.option("--tol", type=float, default=1e-8, show_default=True, help="Residual tolerance")
def vicheck(config_path: Path, point_path: Path, tol: float) -> None:
    """
    Check a block point against the layer variational inequalities

    Prints per-layer residuals with the monotonicity and existence flags.
    Exits 5 when the largest residual exceeds tol.

    Example: proxnet vicheck --config experiment.yaml --point point.txt
    """
    try:
        experiment = load_experiment(config_path)
        point = load_block_point(point_path)
        report = vi_residual(experiment.network, point)
        mono = monotonicity_check(experiment.network)
        flags = existence_flags(experiment.network)
    except ProxNetException as e:
        fail(e)

    for idx, r in enumerate(report.residuals, start=1):
        click.echo(f"r_{idx}={r!r}")
    click.echo(f"max_residual={report.max_residual!r}")

    table = Table(show_header=True, header_style="bold cyan")
    table.add_column("Flag")
    table.add_column("Value")
    table.add_row("max eigenvalue of WS + (WS)ᵀ", f"{mono.max_eigenvalue:.12g}")
    for name, value in flags.flags().items():
        table.add_row(name, "✓" if value else "")
    if flags.range_radius is not None:
        table.add_row("range radius", f"{flags.range_radius:.6g}")
    console.print(table)

    if not report.within(tol):
        sys.exit(EXIT_RESIDUAL)
