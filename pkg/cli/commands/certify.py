"""
Averagedness certification command
"""
import sys
from pathlib import Path

import click

from cli.output import err_console, fail
from proxnet.core.exceptions import ConfigException, ProxNetException
from proxnet.services.certify import certify_network
from proxnet.services.config_service import load_experiment

EXIT_NOT_CERTIFIED = 2


@click.command()
@click.option(
    "--config",
    "config_path",
    type=click.Path(path_type=Path),
    required=True,
    help="Experiment YAML file",
)
@click.option("--seed", type=int, default=None, help="Override the experiment seed")
@click.option("--alpha-step", type=float, default=None, help="Override the alpha grid step")
def certify(config_path: Path, seed: int | None, alpha_step: float | None) -> None:
    """
    Certify that the network is alpha-averaged

    Prints alpha, the condition that certified it and the theta sequence.
    Exits 2 when no sufficient condition holds.

    Example: proxnet certify --config experiment.yaml
    """
    try:
        experiment = load_experiment(config_path, seed=seed)
        cfg = experiment.config.certify
        certificate = certify_network(
            experiment.network,
            alpha_step=alpha_step or cfg.alpha_step,
            eta_grid=cfg.eta_grid,
        )
        text = certificate.to_text()

        out_path = experiment.output_path(experiment.config.output.certificate)
        if out_path is not None:
            out_path.write_text(text + "\n", encoding="utf-8")
    except ProxNetException as e:
        fail(e)
    except OSError as e:
        fail(ConfigException(f"Cannot write certificate: {str(e)}"))

    click.echo(text)
    if not certificate.certified:
        err_console.print("[yellow]No sufficient condition holds on the alpha grid[/yellow]")
        sys.exit(EXIT_NOT_CERTIFIED)
