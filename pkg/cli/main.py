"""
proxnet CLI - Main entry point
"""
import click
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from proxnet import __version__
from proxnet.core.logging import setup_logging
from proxnet.services import scalar_activations as sa

console = Console()


@click.group()
@click.version_option(version=__version__, prog_name="proxnet")
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"], case_sensitive=False),
    default=None,
    help="Override LOG_LEVEL",
)
def cli(log_level: str | None) -> None:
    """
    proxnet - prox-affine network fixed points

    Certify averagedness, run relaxed iterations and check block
    variational inequalities.
    """
    setup_logging(log_level.upper() if log_level else None)


@cli.command()
def info() -> None:
    """Show proxnet information"""
    console.print(
        Panel.fit(
            "[bold cyan]proxnet - fixed points of prox-affine networks[/bold cyan]\n"
            f"[dim]Version: {__version__}[/dim]\n\n"
            "[yellow]Commands:[/yellow]\n"
            "  • certify      averagedness certificate of the weight chain\n"
            "  • run          relaxed fixed-point iteration, trace CSV\n"
            "  • vicheck      block variational-inequality residuals\n"
            "  • inspect      norms, monotonicity and existence flags\n"
            "  • activations  activation catalog\n\n"
            "[green]Get started: proxnet certify --config experiment.yaml[/green]",
            title="proxnet CLI",
            border_style="cyan",
        )
    )


@cli.command()
def activations() -> None:
    """List the activation catalog"""
    table = Table(show_header=True, header_style="bold cyan")
    table.add_column("Key")
    table.add_column("Potential domain")
    table.add_column("Bounded")
    table.add_column("Conjugate full domain")

    parametric = set(sa.parametric_keys())
    for key in sa.catalog_keys():
        if key in parametric:
            # the domain flags do not depend on the parameter
            act = sa.from_key(f"{key}:0.5")
            label = f"{key}:<param>"
        else:
            act = sa.from_key(key)
            label = key
        table.add_row(
            label,
            act.potential_domain.describe(),
            "✓" if act.potential_domain_bounded else "",
            "✓" if act.conjugate_full_domain else "",
        )
    console.print(table)


# Import commands
from cli.commands import certify, inspect, run, vicheck  # noqa: E402

cli.add_command(certify.certify)
cli.add_command(run.run)
cli.add_command(vicheck.vicheck)
cli.add_command(inspect.inspect)


if __name__ == "__main__":
    cli()
