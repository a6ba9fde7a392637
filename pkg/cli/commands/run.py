"""
Relaxed iteration command
"""
import sys
from pathlib import Path

import click

from cli.output import err_console, fail
from proxnet.core.exceptions import ConfigException, ProxNetException
from proxnet.services.config_service import load_experiment
from proxnet.services.engine import RunStatus, iterate, iterate_perturbed
from proxnet.services.trace_csv_service import TraceCSVService

EXIT_CODES = {
    RunStatus.CONVERGED: 0,
    RunStatus.DIVERGED: 3,
    RunStatus.MAX_ITERATIONS: 4,
}


@click.command()
@click.option(
    "--config",
    "config_path",
    type=click.Path(path_type=Path),
    required=True,
    help="Experiment YAML file",
)
@click.option(
    "--trace",
    "trace_path",
    type=click.Path(path_type=Path),
    default=None,
    help="Write the iteration trace CSV here (overrides output.trace)",
)
@click.option(
    "--bounds",
    "bounds_path",
    type=click.Path(path_type=Path),
    default=None,
    help="Write the perturbation bound sequences CSV here (overrides output.bounds)",
)
@click.option("--seed", type=int, default=None, help="Override the experiment seed")
@click.option("--tol", type=float, default=None, help="Override the residual tolerance")
@click.option("--max-iter", type=int, default=None, help="Override the iteration budget")
def run(
    config_path: Path,
    trace_path: Path | None,
    bounds_path: Path | None,
    seed: int | None,
    tol: float | None,
    max_iter: int | None,
) -> None:
    """
    Run the relaxed fixed-point iteration

    Exits 0 when the residual reaches tol, 3 on divergence and 4 when the
    iteration budget runs out.

    Example: proxnet run --config experiment.yaml --trace trace.csv
    """
    try:
        experiment = load_experiment(config_path, seed=seed, tol=tol, max_iter=max_iter)
        config = experiment.config
        trace_path = trace_path or experiment.output_path(config.output.trace)
        bounds_path = bounds_path or experiment.output_path(config.output.bounds)

        bounds = None
        if config.perturbation is None:
            x, trace = iterate(
                experiment.network,
                experiment.x0,
                config.schedule,
                config.stop,
                x_ref=experiment.x_ref,
            )
        else:
            x, trace, bounds = iterate_perturbed(
                experiment.network,
                config.perturbation,
                experiment.x0,
                config.schedule,
                config.stop,
                x_ref=experiment.x_ref,
                alpha=config.schedule.alpha,
            )

        if trace_path is not None:
            trace_path.parent.mkdir(parents=True, exist_ok=True)
            trace_path.write_text(TraceCSVService.export_trace(trace), encoding="utf-8")
        if bounds_path is not None:
            if bounds is None:
                err_console.print(
                    "[yellow]No perturbation configured, bounds file not written[/yellow]"
                )
            else:
                bounds_path.parent.mkdir(parents=True, exist_ok=True)
                bounds_path.write_text(TraceCSVService.export_bounds(bounds), encoding="utf-8")
    except ProxNetException as e:
        fail(e)
    except OSError as e:
        fail(ConfigException(f"Cannot write output: {str(e)}"))

    status = trace.status or RunStatus.MAX_ITERATIONS
    residual = trace.last_residual
    click.echo(
        f"status={status.value} iterations={trace.iterations} "
        f"residual={'none' if residual is None else repr(residual)}"
    )
    click.echo("x=" + " ".join(repr(float(v)) for v in x))
    if status is RunStatus.MAX_ITERATIONS and trace.residual_decayed:
        err_console.print("[dim]Residual decayed but did not reach tol[/dim]")
    sys.exit(EXIT_CODES[status])
