"""Command-line interface for Continuum DVS.

Ties the pipeline together: dataset generation, training, closed-loop runs,
evaluation sweeps and artifact inspection. Every pipeline command takes
``--config`` (flat ``key = value`` file) and ``--out`` (output directory), echoes
its effective configuration into the output directory and maps failures to exit
codes: 0 success, 1 usage/config error, 2 runtime failure, 3 not converged.
"""

from __future__ import annotations

import csv
import sys
from collections.abc import Callable, Iterator
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import click
from rich.table import Table
from structlog.stdlib import BoundLogger

from continuum_dvs import __version__
from continuum_dvs.core.config import settings
from continuum_dvs.core.exceptions import (
    EXIT_NOT_CONVERGED,
    EXIT_RUNTIME,
    EXIT_USAGE,
    ProjectBaseError,
)
from continuum_dvs.core.run_config import (
    RunConfig,
    load_run_config,
    override,
    write_effective_config,
)
from continuum_dvs.dataset import (
    MANIFEST_NAME,
    SampleRenderer,
    generate_dataset,
    load_dataset,
    read_manifest,
    sample_statistics,
)
from continuum_dvs.kinematics import TendonDisplacement, forward_kinematics
from continuum_dvs.network import init_parameters, load_parameters, save_parameters
from continuum_dvs.network.checkpoint import MAGIC
from continuum_dvs.scene import render, write_png
from continuum_dvs.servo import (
    ServoPlant,
    StepOutcome,
    difference_image,
    quadrant_starts,
    random_starts,
    run_servo,
    run_sweep,
)
from continuum_dvs.training import train
from continuum_dvs.utils.logging import console, get_logger, setup_logging
from continuum_dvs.utils.run_context import bind_run_context

logger: BoundLogger = get_logger(__name__)

CHECKPOINT_NAME = "model.cnnp"
TRAINING_LOG_NAME = "training_log.csv"
TRACE_NAME = "trace.csv"
SUMMARY_NAME = "summary.csv"
FRAMES_DIR = "frames"


@dataclass
class CLIContext:
    """Typed context object for Click commands."""

    debug: bool = False
    json_logs: bool = False


class CommandFailed(Exception):
    """Carries a non-error exit code (e.g. not converged) out of a command body."""

    def __init__(self, exit_code: int) -> None:
        super().__init__(exit_code)
        self.exit_code = exit_code


def _fail(error: ProjectBaseError) -> None:
    logger.error("Command failed", **error.to_dict())
    click.echo(f"Error: {error.message}", err=True)
    for key, value in error.details.items():
        click.echo(f"  {key}: {value}", err=True)
    sys.exit(error.exit_code)


@contextmanager
def _command(name: str, config_path: Path, out_dir: Path) -> Iterator[RunConfig]:
    """Load the config, echo it into ``out_dir`` and map failures to exit codes."""
    try:
        cfg = load_run_config(config_path).resolve_paths(config_path.parent)
        with bind_run_context(name, seed=cfg.seed) as run_id:
            out_dir.mkdir(parents=True, exist_ok=True)
            write_effective_config(cfg, out_dir)
            logger.info("Command started", config=str(config_path), out=str(out_dir), run_id=run_id)
            yield cfg
            logger.info("Command completed", out=str(out_dir))
    except CommandFailed as exc:
        sys.exit(exc.exit_code)
    except ProjectBaseError as exc:
        _fail(exc)
    except OSError as exc:
        logger.exception("I/O failure", error=str(exc))
        click.echo(f"Error: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    except Exception as exc:
        logger.exception("Command failed", error=str(exc))
        click.echo(f"Error: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)


def _plant(cfg: RunConfig, checkpoint: Path | None) -> ServoPlant:
    spec = cfg.network_spec()
    params = load_parameters(spec, checkpoint or Path(cfg.checkpoint_path))
    return ServoPlant(
        scene=cfg.scene(),
        intrinsics=cfg.intrinsics(),
        geometry=cfg.geometry(),
        spec=spec,
        params=params,
        label_map=cfg.label_map(),
    )


def _frame_writer(plant: ServoPlant, out_dir: Path, stride: int) -> Callable[[StepOutcome], None] | None:
    if stride <= 0:
        return None
    frames = out_dir / FRAMES_DIR

    def write(outcome: StepOutcome) -> None:
        iteration = outcome.record.iteration
        if iteration % stride:
            return
        write_png(frames / f"{iteration:04d}_view.png", outcome.view)
        if outcome.view_star is not None:
            diff = difference_image(outcome.view_star, plant.target_star)
            write_png(frames / f"{iteration:04d}_diff.png", diff)

    return write


config_option = click.option(
    "--config",
    "config_path",
    type=click.Path(path_type=Path, dir_okay=False),
    required=True,
    help="Run configuration file (key = value lines)",
)
out_option = click.option(
    "--out",
    "out_dir",
    type=click.Path(path_type=Path, file_okay=False),
    required=True,
    help="Output directory",
)
checkpoint_option = click.option(
    "--checkpoint",
    type=click.Path(path_type=Path, dir_okay=False),
    default=None,
    help="Checkpoint file (overrides checkpoint_path)",
)


@click.group()
@click.version_option(version=__version__, prog_name="continuum-dvs")
@click.option(
    "--debug",
    is_flag=True,
    help="Enable debug logging",
)
@click.option(
    "--json-logs",
    is_flag=True,
    help="Emit JSON log lines instead of rich console output",
)
@click.pass_context
def cli(ctx: click.Context, debug: bool, json_logs: bool) -> None:
    """Continuum DVS - deep direct visual servoing of a simulated continuum robot."""
    ctx.obj = CLIContext(debug=debug, json_logs=json_logs)
    setup_logging(
        level="DEBUG" if debug else settings.log_level,
        json_logs=json_logs or settings.json_logs,
        include_timestamp=settings.include_timestamp,
    )

    if debug:
        logger.debug("Debug mode enabled")


@cli.command("gen-dataset")
@config_option
@out_option
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Render threads")
def gen_dataset(config_path: Path, out_dir: Path, workers: int | None) -> None:
    """Render the spiral-path dataset and its manifest."""
    with _command("gen-dataset", config_path, out_dir) as cfg:
        spec = cfg.network_spec()
        renderer = SampleRenderer(
            scene=cfg.scene(),
            intrinsics=cfg.intrinsics(),
            geometry=cfg.geometry(),
            augmentation=cfg.augmentation(),
            label_map=cfg.label_map(),
            input_size=spec.input_size,
            seed=cfg.seed,
        )
        manifest = generate_dataset(
            renderer,
            cfg.spiral(),
            out_dir,
            header=cfg.as_pairs(),
            workers=workers or settings.workers,
        )
        click.echo(f"Wrote {len(manifest.rows)} samples to {out_dir / MANIFEST_NAME}")


@cli.command("train")
@config_option
@out_option
@click.option(
    "--dataset",
    "dataset_dir",
    type=click.Path(path_type=Path, file_okay=False),
    default=None,
    help="Dataset directory (overrides dataset_dir)",
)
def train_command(config_path: Path, out_dir: Path, dataset_dir: Path | None) -> None:
    """Train the regressor and write the checkpoint and training log."""
    with _command("train", config_path, out_dir) as cfg:
        spec = cfg.network_spec()
        dataset = load_dataset(dataset_dir or Path(cfg.dataset_dir))
        checkpoint = out_dir / CHECKPOINT_NAME
        params, log = train(
            dataset,
            spec,
            init_parameters(spec, cfg.seed),
            cfg.train_config(),
            checkpoint_path=checkpoint,
        )
        save_parameters(params, checkpoint)
        log.write_csv(out_dir / TRAINING_LOG_NAME)
        click.echo(f"Final train MSE: {log.final_loss!r}; checkpoint {checkpoint}")


@cli.command("servo")
@config_option
@out_option
@checkpoint_option
@click.option(
    "--start",
    type=(float, float),
    default=None,
    help="Initial tendon displacements q1 q2 in mm (overrides start_q1_mm/start_q2_mm)",
)
def servo_command(
    config_path: Path,
    out_dir: Path,
    checkpoint: Path | None,
    start: tuple[float, float] | None,
) -> None:
    """Run one closed loop; exits 3 if it does not converge."""
    with _command("servo", config_path, out_dir) as cfg:
        if start is not None:
            cfg = override(cfg, start_q1_mm=start[0], start_q2_mm=start[1])
            write_effective_config(cfg, out_dir)
        plant = _plant(cfg, checkpoint)
        trace = run_servo(
            cfg.start(),
            plant,
            cfg.servo_config(),
            cfg.perturbation_config(),
            cfg.seed,
            on_step=_frame_writer(plant, out_dir, cfg.frame_stride),
        )
        trace.write_csv(out_dir / TRACE_NAME)
        status = "converged" if trace.converged else "did not converge"
        click.echo(
            f"{status} after {trace.iterations} iterations; "
            f"final |q|inf = {trace.final_norm:.4f} mm"
        )
        if not trace.converged:
            raise CommandFailed(EXIT_NOT_CONVERGED)


@cli.command("eval")
@config_option
@out_option
@checkpoint_option
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Parallel runs")
def eval_command(
    config_path: Path, out_dir: Path, checkpoint: Path | None, workers: int | None
) -> None:
    """Sweep start points and seeds; write the summary report."""
    with _command("eval", config_path, out_dir) as cfg:
        starts = cfg.starts()
        if cfg.eval_quadrant_radius_mm > 0:
            starts += quadrant_starts(cfg.eval_quadrant_radius_mm)
        if cfg.eval_random_starts:
            starts += random_starts(
                cfg.eval_random_starts, cfg.spiral_amplitude_mm, cfg.seed
            )
        seeds = [cfg.seed + k for k in range(cfg.eval_seed_count)]
        report = run_sweep(
            starts,
            seeds,
            _plant(cfg, checkpoint),
            cfg.servo_config(),
            cfg.eval_perturbation_config(),
            scenario=cfg.eval_scenario,
            workers=workers or settings.workers,
        )
        report.write_csv(out_dir / SUMMARY_NAME)
        click.echo(report.aggregate_line().removeprefix("# "))


@cli.command("render-target")
@config_option
@out_option
def render_target(config_path: Path, out_dir: Path) -> None:
    """Write the target texture and the straight-robot camera view."""
    with _command("render-target", config_path, out_dir) as cfg:
        scene = cfg.scene()
        write_png(out_dir / "target_texture.png", scene.target_texture)
        home = forward_kinematics(TendonDisplacement(0.0, 0.0), cfg.geometry())
        write_png(out_dir / "home_view.png", render(scene, home, cfg.intrinsics()))
        click.echo(f"Wrote target_texture.png and home_view.png to {out_dir}")


def _inspect_manifest(path: Path) -> Table:
    manifest = read_manifest(path)
    table = Table(title=f"Dataset {path}")
    table.add_column("key")
    table.add_column("value")
    for key, value in sample_statistics(manifest).items():
        table.add_row(key, f"{value:g}")
    for key in ("seed", "spiral_amplitude_mm", "spiral_periods", "spiral_samples", "network_layout"):
        if key in manifest.header:
            table.add_row(key, manifest.header[key])
    return table


def _inspect_checkpoint(path: Path, cfg: RunConfig) -> Table:
    spec = cfg.network_spec()
    params = load_parameters(spec, path)
    table = Table(title=f"Checkpoint {path} ({params.parameter_count} parameters)")
    table.add_column("#", justify="right")
    table.add_column("layer")
    table.add_column("output")
    table.add_column("weight")
    table.add_column("trainable")
    for index, (layer, shape) in enumerate(zip(spec.layers, spec.output_shapes(), strict=True)):
        layer_params = params[index]
        table.add_row(
            str(index),
            layer.label(),
            str(shape),
            "" if layer_params is None else str(layer_params.weight.shape),
            str(layer.trainable).lower() if layer.has_parameters else "",
        )
    return table


def _inspect_csv(path: Path) -> Table:
    lines = path.read_text(encoding="utf-8").splitlines()
    comments = [line[1:].strip() for line in lines if line.startswith("#")]
    rows = list(csv.reader(line for line in lines if line and not line.startswith("#")))
    table = Table(title=f"{path.name}: {max(len(rows) - 1, 0)} rows")
    table.add_column("key")
    table.add_column("value")
    for comment in comments:
        key, _, value = comment.partition("=")
        table.add_row(key.strip(), value.strip())
    if len(rows) > 1:
        for column, value in zip(rows[0], rows[-1], strict=False):
            table.add_row(f"last.{column}", value)
    return table


@cli.command("inspect")
@click.argument("path", type=click.Path(path_type=Path, exists=True))
@click.option(
    "--config",
    "config_path",
    type=click.Path(path_type=Path, dir_okay=False, exists=True),
    default=None,
    help="Configuration giving the network layout of a checkpoint",
)
def inspect_command(path: Path, config_path: Path | None) -> None:
    """Summarise a dataset directory, checkpoint, trace or sweep summary."""
    try:
        cfg = load_run_config(config_path) if config_path else RunConfig()
        if path.is_dir():
            table = _inspect_manifest(path)
        elif path.read_bytes()[: len(MAGIC)] == MAGIC:
            table = _inspect_checkpoint(path, cfg)
        else:
            table = _inspect_csv(path)
    except ProjectBaseError as exc:
        _fail(exc)
        return
    except (OSError, UnicodeDecodeError, csv.Error) as exc:
        click.echo(f"Error: cannot read {path}: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    console.print(table)


@cli.command()
@click.option(
    "--config",
    "config_path",
    type=click.Path(path_type=Path, dir_okay=False),
    default=None,
    help="Show the effective values of this file instead of the defaults",
)
@click.pass_context
def config(ctx: click.Context, config_path: Path | None) -> None:
    """Display process settings and every run-configuration key.

    Shows process settings from environment variables or defaults, then the
    documented run-configuration keys with their (effective) values.
    """
    cli_ctx: CLIContext = ctx.obj if isinstance(ctx.obj, CLIContext) else CLIContext()
    try:
        cfg = load_run_config(config_path) if config_path else RunConfig()
    except ProjectBaseError as exc:
        _fail(exc)
        return

    click.echo("# Process settings")
    click.echo(f"#   version: {__version__}")
    click.echo(f"#   debug: {cli_ctx.debug}")
    click.echo(f"#   log_level: {settings.log_level}")
    click.echo(f"#   json_logs: {settings.json_logs}")
    click.echo(f"#   workers: {settings.workers}")
    click.echo(cfg.to_text(), nl=False)


def main() -> None:
    """Console entry point; usage errors exit with code 1."""
    try:
        code = cli.main(standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        sys.exit(EXIT_USAGE)
    except click.Abort:
        click.echo("Aborted!", err=True)
        sys.exit(EXIT_USAGE)
    sys.exit(code if isinstance(code, int) else 0)


if __name__ == "__main__":
    main()
