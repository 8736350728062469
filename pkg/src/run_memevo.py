import logging
import sys
from pathlib import Path

import click
import toml

from data.datagen import export_stream, generate_stream, stale_early_view
from experiments.config import build_run_config
from experiments.runner import run_experiment
from optimizer.exceptions import ConfigError, InvalidInput, NumericalBreakdown, ParseError

EXIT_CONFIG_ERROR = 2
EXIT_PARSE_ERROR = 3
EXIT_NUMERICAL_BREAKDOWN = 4

logger = logging.getLogger(__name__)


def configure_logging(level: str):
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(levelname)s - %(message)s'
    )
    logging.getLogger().setLevel(level)


def common_options(command):
    options = [
        click.option('--config', 'config_path', type=click.Path(dir_okay=False), help='Flat TOML run configuration.'),
        click.option('--view', 'views', multiple=True, type=click.Path(dir_okay=False),
                     help='View file, repeat in arrival order.'),
        click.option('--labels', type=click.Path(dir_okay=False), help='Ground-truth labels, one per line.'),
        click.option('--alpha', type=float, help='Alignment weight.'),
        click.option('--beta', type=float, help='Consolidation weight.'),
        click.option('--lambda', 'lam', type=float, help='Forgetting rate.'),
        click.option('--latent-dim', type=int, help='Latent dimension m.'),
        click.option('--max-iters', type=int, help='ADMM iteration cap per view.'),
        click.option('--tol', type=float, help='Primal residual tolerance.'),
        click.option('--k', type=int, help='Number of clusters.'),
        click.option('--restarts', type=int, help='k-means restarts.'),
        click.option('--n', type=int, help='Synthetic sample count.'),
        click.option('--stale-factor', type=float, help='Noise multiplier on the early synthetic views.'),
        click.option('--seed', type=int, help='Seed for every random choice (default 0).'),
        click.option('--output-dir', type=click.Path(file_okay=False), help='Directory for manifest and exports.'),
        click.option('--database-url', help='Run registry URL (e.g. sqlite:///runs.db).'),
        click.option('--log-level', type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False)),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _overrides(experiment: str, options: dict) -> dict:
    values = {
        'experiment': experiment,
        'views': list(options.pop('views')) or None,
        'lambda': options.pop('lam'),
    }
    options.pop('config_path', None)
    values.update(options)
    return values


def execute(experiment: str, options: dict):
    """Build the config, run one experiment and map failures to exit codes"""
    ctx = click.get_current_context()
    config_path = options.get('config_path')
    try:
        cfg = build_run_config(config_path, _overrides(experiment, dict(options)))
        configure_logging(cfg.log_level)
        manifest = run_experiment(cfg)
    except (ConfigError, InvalidInput) as e:
        logger.error(f"Configuration error: {e}")
        click.echo(f"Error: {e}", err=True)
        ctx.exit(EXIT_CONFIG_ERROR)
    except ParseError as e:
        logger.error(f"Parse error: {e}")
        click.echo(f"Error: {e}", err=True)
        ctx.exit(EXIT_PARSE_ERROR)
    except NumericalBreakdown as e:
        logger.error(f"Numerical breakdown: {e}")
        click.echo(f"Error: {e}", err=True)
        ctx.exit(EXIT_NUMERICAL_BREAKDOWN)

    table = manifest.results_frame()
    if not table.empty:
        click.echo(table.to_string(index=False, float_format=lambda v: f"{v:.4f}"))
    for key, value in manifest.summary.items():
        if key != 'wall_time':
            click.echo(f"{key}: {value}")
    click.echo(f"Manifest: {Path(manifest.output_dir) / 'manifest.json'}")


@click.group()
def cli():
    """MemEvo incremental multi-view clustering"""


def _register(name: str, help_text: str):
    @cli.command(name=name, help=help_text)
    @common_options
    def command(**options):
        execute(name, options)
    return command


_register('run', 'Solve the view stream and report final clustering metrics.')
_register('ablation', 'Compare module ablation variants of the solver.')
_register('lambda-sweep', 'Sweep the forgetting rate over 0, 1, 1.5 and 2.')
_register('view-curve', 'Report clustering metrics after every view.')
_register('scaling', 'Time per-view solves for growing sample counts.')
_register('param-grid', 'Sweep alpha and beta over 1e-3 .. 10.')
_register('latent-sweep', 'Sweep the latent dimension over 5 .. 50.')


@cli.command(name='synth', help='Write a synthetic stream in the view-file format.')
@common_options
def synth(**options):
    ctx = click.get_current_context()
    try:
        cfg = build_run_config(options.get('config_path'), _overrides('run', dict(options)))
        configure_logging(cfg.log_level)
        if cfg.synth is None:
            raise ConfigError("synth cannot be combined with --view files")
        spec = stale_early_view(cfg.synth, cfg.stale_factor) if cfg.stale_factor else cfg.synth
        views, labels = generate_stream(spec)
        paths = export_stream(views, labels, cfg.output_dir)
        (Path(cfg.output_dir) / "synth_spec.toml").write_text(toml.dumps(spec.to_dict()))
    except (ConfigError, InvalidInput) as e:
        click.echo(f"Error: {e}", err=True)
        ctx.exit(EXIT_CONFIG_ERROR)
    for path in paths:
        click.echo(str(path))


def main():
    cli(standalone_mode=True)


if __name__ == "__main__":
    sys.exit(main())
