from __future__ import annotations

import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Any, Callable

import click

import config
from classes.exceptions import ConfigurationError
from classes.run_config import SOLVERS, SWEEP_AXES, RunConfig
from harness import Harness, __version__

log = logging.getLogger()

# click parameter -> RunConfig field
OVERRIDES = {
    "gamma": "gamma",
    "kappa": "kappa",
    "big_g": "G",
    "beta": "beta",
    "beta0": "beta0",
    "grid_n": "grid_n",
    "period": "period",
    "solver": "solver",
    "nonlinear": "nonlinear",
    "t_end": "t_end",
    "tau_min": "tau_min",
    "tol": "rtol",
    "sobolev_s": "sobolev_s",
    "seed": "seed",
    "out": "out",
    "workers": "workers",
    "cs": "Cs",
    "cm": "Cm",
    "dump_spectra": "dump_spectra",
    "snapshots": "snapshots",
    "lam": "lams",
    "times": "times",
    "axis": "axis",
    "values": "values",
}

_OPTIONS = (
    click.option("--config", "config_path", type=click.Path(dir_okay=False), help="JSON file."),
    click.option("--gamma", type=float, help="Adiabatic index (> 1)."),
    click.option("--kappa", type=float, help="Polytropic constant."),
    click.option("--big-g", type=float, help="Gravitational constant."),
    click.option("--beta", type=float, help="Background data size."),
    click.option("--beta0", type=float, help="Perturbation size of the random data."),
    click.option("--grid-n", type=int, help="Grid points per direction (power of two)."),
    click.option("--period", type=float, help="Side of the periodic box."),
    click.option("--solver", type=click.Choice(SOLVERS), help="Time integrator."),
    click.option("--nonlinear/--linear", default=None, help="Keep the nonlinear term."),
    click.option("--t-end", type=float, help="Final time of the direct solver."),
    click.option("--tau-min", type=float, help="Final rescaled time of the Fuchsian solver."),
    click.option("--tol", type=float, help="Relative tolerance of the adaptive stepper."),
    click.option("--sobolev-s", type=int, help="Sobolev order of the norms."),
    click.option("--seed", type=int, help="Seed of the random data."),
    click.option("--out", type=click.Path(file_okay=False), help="Output directory."),
    click.option("--workers", type=int, help="Sweep worker processes."),
    click.option("--cs", type=float, help="Embedding constant of the admissibility bound."),
    click.option("--cm", type=float, help="Product constant of the admissibility bound."),
    click.option("--dump-spectra/--no-dump-spectra", default=None, help="Write spectra.npz."),
    click.option("--snapshots", type=int, help="Log spaced snapshots per run."),
    click.option("--lam", type=float, multiple=True, help="Laplacian eigenvalue (repeatable)."),
    click.option("--times", type=float, multiple=True, help="Sample time (repeatable)."),
    click.option("--axis", type=click.Choice(SWEEP_AXES), help="Swept parameter."),
    click.option("--values", type=float, multiple=True, help="Swept value (repeatable)."),
)


def run_options(func: Callable[..., Any]) -> Callable[..., Any]:
    for option in reversed(_OPTIONS):
        func = option(func)
    return func


_logging_ready = False


def setup_logging() -> None:
    global _logging_ready
    if _logging_ready:
        return

    log.setLevel(logging.DEBUG if config.DEBUG else logging.INFO)
    dt_format = "%d-%m-%Y %H:%M:%S"
    formatter = logging.Formatter(
        "[{asctime}] [{levelname:<8}] {name}: {message}", dt_format, style="{"
    )

    stream = logging.StreamHandler(sys.stderr)
    stream.setFormatter(formatter)
    log.addHandler(stream)

    if not Path("logs").exists():
        Path("logs").mkdir(parents=True, exist_ok=True)

    max_bytes = 32 * 1024 * 1024  # 32MiB
    handler = RotatingFileHandler(
        filename="logs/jeansbench.log",
        mode="w",
        maxBytes=max_bytes,
        backupCount=5,
        encoding="utf-8",
    )
    handler.setFormatter(formatter)
    log.addHandler(handler)
    _logging_ready = True


def execute(scenario: str, config_path: None | str, options: dict[str, Any]) -> None:
    overrides: dict[str, Any] = {}
    for name, value in options.items():
        if isinstance(value, tuple):
            # empty repeatable options keep the file or default value
            value = list(value) or None
        overrides[OVERRIDES[name]] = value

    try:
        cfg = RunConfig.resolve(scenario, path=config_path, overrides=overrides)
    except ConfigurationError as e:
        click.secho(str(e), fg="red", err=True)
        sys.exit(2)

    harness = Harness()
    harness.load_extensions()
    sys.exit(harness.run(cfg))


@click.group(options_metavar="[options]")
@click.version_option(__version__, prog_name="jeansbench")
def main():
    """Jeans instability simulator and verification harness"""
    setup_logging()


@main.command()
@run_options
def modes(config_path, **options):
    """Tabulates classification and growth of single modes"""
    execute("modes", config_path, options)


@main.command()
@run_options
def simulate(config_path, **options):
    """Runs one simulation and writes its trajectory record"""
    execute("simulate", config_path, options)


@main.command()
@run_options
def verify(config_path, **options):
    """Runs the acceptance suite and writes a pass/fail report"""
    execute("verify", config_path, options)


@main.command()
@run_options
def sweep(config_path, **options):
    """Runs independent simulations over one parameter axis"""
    execute("sweep", config_path, options)


if __name__ == "__main__":
    main()
