# -*- coding: utf-8 -*-
"""
Sweep recovery error against the sample budget at d=10, r=2, p=1/2 and check
the shape of the error envelope: non-increasing over the budget grid, with a
logarithmic-regime decay close to (1/log n)^(r (1/p - 1)).
"""
import logging
import sys

import click
from click import echo, secho

from ridgerecover.cli import tabulate
from ridgerecover.harness import (
    REGIME_SWEEP_BUDGETS, error_envelope, fit_regime, is_nonincreasing, regime_boundary, regime_sweep_config,
    run_sweep,
)


@click.command()
@click.option('--budget', '-n', 'budgets', type=int, multiple=True, help='Budget grid point. Repeatable.')
@click.option('--seeds', type=int, default=10, help='Seeds per budget.')
@click.option('--family', default='mixed', help='Profile family of the drawn instances.')
@click.option('--c-r-spline', type=float, default=None, help='Spline constant. Calibrated when omitted.')
@click.option('--tolerance', type=float, default=0.5, help='Allowed relative deviation of the fitted exponent.')
@click.option('--out', '-o', default='regime-sweep.csv', help='CSV output path.')
@click.option('--verbose', '-v', is_flag=True, help='Enables verbose mode.')
def cli(budgets, seeds, family, c_r_spline, tolerance, out, verbose):
    """Run the regime-shape sweep and exit non-zero if the shape is off."""
    logging.basicConfig(level='INFO' if verbose else 'WARNING')
    config = regime_sweep_config(budgets or REGIME_SWEEP_BUDGETS, seeds=seeds, family=family,
                                 c_r_spline=c_r_spline, output_path=out)
    if c_r_spline is None:
        echo("Calibrated spline constant: {:.4g}".format(config.c_r_spline))
    d, r, p, S = config.d, config.r, config.p, config.S
    echo("Regime boundaries: 4d = {}, upper = {:.6g}".format(4 * d, regime_boundary(d, p, S)))
    rows = run_sweep(config, out=out)
    envelope = error_envelope(rows)
    regimes = {row.budget: row.regime for row in rows}
    tabulate(['budget', 'regime', 'max_error'], [
        {'budget': n, 'regime': regimes[n], 'max_error': '{:.4g}'.format(error)} for n, error in envelope.items()
    ])

    ok = True
    if not is_nonincreasing(envelope, tolerance=1e-9):
        secho("Error envelope is not non-increasing.", fg='red')
        ok = False
    fit = fit_regime(rows, r, p)
    echo("Fitted exponent {:.3f} (expected {:.3f}), constant {:.4g}.".format(
        fit.exponent, fit.expected_exponent, fit.constant))
    if fit.relative_deviation > tolerance:
        secho("Exponent deviates by {:.0%}.".format(fit.relative_deviation), fg='red')
        ok = False
    secho("\n{} rows written to {}.\n".format(len(rows), click.style(out, bold=True)))
    sys.exit(0 if ok else 1)


if __name__ == '__main__':
    cli()
