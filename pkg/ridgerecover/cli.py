# -*- coding: utf-8 -*-
import functools
import json
import logging
import sys

import click
import numpy as np
from click import echo, secho

from ridgerecover import __version__
from ridgerecover.adversary import (
    RecoverAlgorithm, UniformSamplingAlgorithm, ZeroModelAlgorithm,
    det_lower_bound_experiment, ran_lower_bound_experiment,
)
from ridgerecover.config import CONFIG_ENV, load_config
from ridgerecover.core import OutputError, RidgeError, counting_oracle, draw_profile
from ridgerecover.estimate import sup_error_estimate
from ridgerecover.harness import (
    calibrate_spline_constant, check_output_path, draw_instance, error_envelope, recovery_parameters, run_sweep,
)
from ridgerecover.recovery import MODES, RidgeModel, recover

log = logging.getLogger(__name__)

# Exit codes by error category. Anything else under RidgeError exits with 1.
EXIT_CODES = {
    'config': 2,
    'parameter': 3,
    'regime': 3,
    'vertex_set_too_large': 3,
    'budget_exhausted': 4,
    'recovery': 5,
    'degenerate_slope': 5,
    'ledger_divergence': 6,
    'lower_bound_violation': 6,
    'no_fooling_candidate': 6,
    'max_tries': 6,
    'io': 7,
}

ALGORITHMS = ('zero', 'recover', 'uniform')


class Globals(object):

    def __init__(self):
        self.config_path = None
        self._config = None

    @property
    def config(self):
        if self._config is None:
            self._config = load_config(self.config_path)
        return self._config


pass_repo = click.make_pass_decorator(Globals)


def report_errors(fn):
    """Turn RidgeError and OSError into a JSON line on stderr and a category exit code."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            try:
                return fn(*args, **kwargs)
            except OSError as e:
                raise OutputError(str(e)) from e
        except RidgeError as e:
            log.debug("Command failed.", exc_info=True)
            document = {'error': e.category, 'message': str(e)}
            if getattr(e, 'step', None):
                document['step'] = e.step
            echo(json.dumps(document), err=True)
            sys.exit(EXIT_CODES.get(e.category, 1))
    return wrapper


def _jsonable(ob):
    if hasattr(ob, 'tolist'):
        return ob.tolist()
    return str(ob)


def pretty(ob):
    """Return a console text representation of 'ob', as JSON unless it's a string."""
    if isinstance(ob, str):
        return ob.rstrip()
    return json.dumps(ob, indent=4, sort_keys=True, default=_jsonable)


def write_or_echo(ob, out):
    if out:
        try:
            with open(out, 'w') as f:
                f.write(pretty(ob) + '\n')
        except OSError as e:
            raise OutputError("Can't write {!r}: {}".format(out, e))
        secho("Written to {}".format(out))
    else:
        echo(pretty(ob))


def tabulate(headers, rows, indent=None, col_padding=None):
    """
    Print a table of 'rows', a list of dicts, with columns named in 'headers'.
    Rows keep their order.
    """
    indent = indent or ''
    col_padding = col_padding or 3

    col_size = [[len(h) for h in headers]]
    col_size += [[len(str(row.get(h, ''))) for h in headers] for row in rows]
    col_size = [max(col) for col in zip(*col_size)]

    for row in [headers] + rows:
        echo(indent, nl=False)
        for h, width in zip(headers, col_size):
            if row is headers:
                secho(h.replace('_', ' ').title().ljust(width + col_padding), bold=True, nl=False)
            else:
                echo(str(row.get(h, '')).ljust(width + col_padding), nl=False)
        echo()


@click.group(context_settings={'help_option_names': ['-h', '--help']})
@click.option(
    '--config', '-c', 'config_path', envvar=CONFIG_ENV, metavar='PATH',
    help="Experiment config file. Defaults to ${}.".format(CONFIG_ENV))
@click.option(
    '--loglevel', default='WARNING',
    type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False),
    help="Root logger level.")
@click.version_option(__version__)
@click.pass_context
def cli(ctx, config_path, loglevel):
    """Recover ridge functions from point samples and run lower-bound experiments."""
    logging.basicConfig(level=loglevel.upper())
    ctx.obj = Globals()
    ctx.obj.config_path = config_path


@cli.command('recover')
@click.option('--seed', type=int, default=None, help="Instance and vertex seed. Defaults to the first config seed.")
@click.option('--mode', type=click.Choice(MODES), default=None, help="Vertex-set mode, overriding the config.")
@click.option('--out', '-o', type=click.Path(dir_okay=False, writable=True), help="Write the summary here.")
@pass_repo
@report_errors
def recover_command(repo, seed, mode, out):
    """Recover one instance drawn from the config and report the error."""
    if out:
        check_output_path(out)
    config = repo.config
    if mode:
        config = config.replace(mode=mode)
    seed = config.seeds[0] if seed is None else seed
    truth = draw_instance(config, seed)
    params = recovery_parameters(config, config.epsilon, seed)
    oracle = counting_oracle(truth, budget=params.worst_case_samples())
    result = recover(oracle, params)
    estimate = sup_error_estimate(truth, result, resolution=config.error_grid_resolution,
                                  random_probes=config.random_probes, seed=seed)
    summary = {
        'seed': seed,
        'scenario': result.scenario,
        'samples_used': result.samples_used,
        'error': estimate.value,
        'error_method': estimate.method,
        'witness': estimate.witness,
        'params': {
            'epsilon': params.epsilon, 'mode': params.mode, 's': params.s, 'n_v': params.n_v,
            'n_g': params.n_g, 'n_b': params.n_b, 'r0': params.r0, 'num_vertices': params.num_vertices,
        },
        'diagnostics': result.diagnostics,
    }
    if isinstance(result.model, RidgeModel):
        summary['direction'] = result.model.direction
        summary['direction_error'] = float(np.abs(result.model.direction - truth.direction).sum())
    else:
        summary['constant'] = result.model.value
    write_or_echo(summary, out)


@cli.command('sweep')
@click.option('--seed', type=int, multiple=True, help="Seeds to run, overriding the config. Repeatable.")
@click.option('--mode', type=click.Choice(MODES), default=None, help="Vertex-set mode, overriding the config.")
@click.option('--out', '-o', type=click.Path(dir_okay=False, writable=True),
              help="CSV output path. Defaults to the config output_path.")
@pass_repo
@report_errors
def sweep_command(repo, seed, mode, out):
    """Run recovery over the budget grid and write one CSV row per (budget, seed)."""
    config = repo.config
    changes = {}
    if seed:
        changes['seeds'] = list(seed)
    if mode:
        changes['mode'] = mode
    if changes:
        config = config.replace(**changes)
    out = out or config.output_path
    rows = run_sweep(config, out=out)
    regimes = {row.budget: row.regime for row in rows}
    tabulate(['budget', 'regime', 'max_error'], [
        {'budget': budget, 'regime': regimes[budget], 'max_error': '{:.4g}'.format(error)}
        for budget, error in error_envelope(rows).items()
    ])
    secho("{} rows written to {}".format(len(rows), out))


@cli.command('lower-bound')
@click.option('--budget', '-n', type=int, required=True, help="Query budget of the attacked algorithm.")
@click.option('--dim', '-d', type=int, default=None, help="Dimension, overriding the config.")
@click.option('--algorithm', type=click.Choice(ALGORITHMS), default='zero', help="Algorithm to attack.")
@click.option('--randomized', is_flag=True, help="Run the randomized experiment over many seeds.")
@click.option('--num-seeds', type=int, default=20, help="Seeds for the randomized experiment.")
@click.option('--delta', type=float, default=0.5, help="Failure probability of the randomized experiment.")
@click.option('--seed', type=int, default=0, help="Master seed.")
@click.option('--mode', type=click.Choice(MODES), default=None, help="Vertex-set mode for --algorithm recover.")
@click.option('--transcript', is_flag=True, help="Include the query transcripts in the report.")
@click.option('--out', '-o', type=click.Path(dir_okay=False, writable=True), help="Write the report here.")
@pass_repo
@report_errors
def lower_bound_command(repo, budget, dim, algorithm, randomized, num_seeds, delta, seed, mode, transcript, out):
    """Build a fooling instance against an algorithm and report the error it forces."""
    if out:
        check_output_path(out)
    config = repo.config
    changes = {}
    if dim:
        changes['d'] = dim
    if mode:
        changes['mode'] = mode
    if changes:
        config = config.replace(**changes)

    if algorithm == 'zero':
        attacked = ZeroModelAlgorithm()
    elif algorithm == 'uniform':
        attacked = UniformSamplingAlgorithm(budget)
    else:
        attacked = RecoverAlgorithm(recovery_parameters(config, config.epsilon, seed))

    if randomized:
        report = ran_lower_bound_experiment(attacked, budget, config.d, config.r, config.p, num_seeds,
                                            delta=delta, seed=seed, resolution=config.error_grid_resolution)
    else:
        report = det_lower_bound_experiment(attacked, budget, config.d, config.r, config.p, seed=seed,
                                            resolution=config.error_grid_resolution)
    write_or_echo(report.to_dict(include_transcript=transcript), out)


@cli.command('calibrate')
@click.option('--r0', type=int, default=None, help="Interpolation order. Defaults to the config r0 or ceil(r)+1.")
@click.option('--family', default=None, help="Profile family. Defaults to the config profile_family.")
@click.option('--trials', type=int, default=8, help="Number of trial profiles.")
@click.option('--level', 'levels', type=int, multiple=True, help="Grid level n (h = 1/n). Repeatable.")
@click.option('--seed', type=int, default=0, help="Seed for drawing trial profiles.")
@pass_repo
@report_errors
def calibrate_command(repo, r0, family, trials, levels, seed):
    """Estimate the quasi-interpolant constant c_r from trial profiles."""
    config = repo.config
    r0 = r0 or config.r0 or int(np.ceil(config.r)) + 1
    family = family or config.profile_family
    levels = list(levels) or [16, 32, 64]
    rng = np.random.default_rng(seed)
    profiles = [draw_profile(family, config.r, rng, index=i) for i in range(trials)]
    echo(repr(calibrate_spline_constant(r0, profiles, levels)))


def main(as_module=False):
    cli(prog_name='python -m ridgerecover.cli' if as_module else 'ridgerecover')


if __name__ == '__main__':
    main(as_module=True)
