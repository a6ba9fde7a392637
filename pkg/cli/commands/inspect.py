"""
Network inspection command
"""
from pathlib import Path

import click
from rich.table import Table

from cli.output import console, fail
from proxnet.core.exceptions import DimensionMismatchException, ProxNetException
from proxnet.services.certify import (
    averagedness_violation,
    certify_layerwise,
    certify_network,
)
from proxnet.services.config_service import load_experiment
from proxnet.services.vi_checker import existence_flags, monotonicity_check


@click.command()
@click.option(
    "--config",
    "config_path",
    type=click.Path(path_type=Path),
    required=True,
    help="Experiment YAML file",
)
@click.option(
    "--samples", type=int, default=500, show_default=True, help="Pairs for the empirical check"
)
def inspect(config_path: Path, samples: int) -> None:
    """
    Show layer norms, certificates, monotonicity and existence flags

    Example: proxnet inspect --config experiment.yaml
    """
    try:
        experiment = load_experiment(config_path)
        net = experiment.network
        cfg = experiment.config
        certificate = certify_network(
            net, alpha_step=cfg.certify.alpha_step, eta_grid=cfg.certify.eta_grid
        )
        mono = monotonicity_check(net)
        flags = existence_flags(net, certificate)
        try:
            layerwise = certify_layerwise(net)
        except DimensionMismatchException:
            layerwise = None
        violation = (
            averagedness_violation(net, certificate.alpha, samples=samples, seed=cfg.seed)
            if certificate.alpha is not None
            else None
        )
    except ProxNetException as e:
        fail(e)

    layers = Table(title="Layers", show_header=True, header_style="bold cyan")
    layers.add_column("Layer")
    layers.add_column("Shape")
    layers.add_column("‖W‖")
    layers.add_column("‖b‖")
    layers.add_column("Activation")
    for idx, layer in enumerate(net.layers, start=1):
        layers.add_row(
            f"T_{idx}",
            f"{layer.dim_out}x{layer.dim_in}",
            f"{layer.weight_norm:.6g}",
            f"{layer.bias_norm:.6g}",
            layer.R.describe(),
        )
    console.print(layers)

    console.print(f"[bold cyan]Certificate:[/bold cyan] {certificate.to_text()}")
    if violation is not None:
        console.print(f"[dim]Sampled ‖Qx−Qy‖/‖x−y‖ max: {violation:.12g}[/dim]")
    if layerwise is None:
        console.print("[dim]Layerwise certificate: layers are not square of equal size[/dim]")
    elif layerwise.certified:
        betas = ", ".join(f"{b:.6g}" for b in layerwise.betas or [])
        console.print(
            f"[bold cyan]Layerwise:[/bold cyan] betas=[{betas}] "
            f"composite_alpha={layerwise.composite_alpha:.6g}"
        )
    else:
        console.print(f"[bold cyan]Layerwise:[/bold cyan] fails at layer {layerwise.failed_layer}")

    console.print(
        f"[bold cyan]Monotone:[/bold cyan] {mono.monotone} "
        f"(max eigenvalue {mono.max_eigenvalue:.12g}, margin {mono.margin:.6g})"
    )

    table = Table(title="Existence", show_header=True, header_style="bold cyan")
    table.add_column("Flag")
    table.add_column("Value")
    for name, value in flags.flags().items():
        table.add_row(name, "✓" if value else "")
    console.print(table)
