# -*- coding: utf-8 -*-
'''

Harness - Error-versus-budget sweeps, regime labels and spline-constant calibration.

A sweep draws one instance per seed and runs recovery at every budget of the grid.
For each budget the accuracy is the finest entry of the epsilon ladder whose
worst-case sample requirement fits the budget. Budgets that fit no entry run at the
coarsest one and usually end in BudgetExhausted, which is recorded in the row
together with the error of the zero model.

'''
import csv
import logging
import math
import os
from dataclasses import astuple, dataclass

import numpy as np

from ridgerecover.approx1d import quasi_interpolant
from ridgerecover.config import make_config
from ridgerecover.core import (
    OutputError, ParameterError, RidgeError, RidgeFunction, counting_oracle, draw_profile, random_ridge_vector,
)
from ridgerecover.estimate import sup_error_estimate
from ridgerecover.recovery import ConstantModel, recover, select_parameters

log = logging.getLogger(__name__)

SWEEP_HEADER = ('budget', 'seed', 'scenario', 'samples_used', 'error', 'regime')

CALIBRATION_FLOOR = 1e-3
CALIBRATION_SAFETY = 1.5
CALIBRATION_EVAL_POINTS = 4001

REGIME_SWEEP_BUDGETS = (20, 40, 60, 120, 250, 500, 1000, 2000, 2560, 6000, 20000)


@dataclass(frozen=True)
class SweepRow:
    budget: int
    seed: int
    scenario: str
    samples_used: int
    error: float
    regime: str


@dataclass(frozen=True)
class RegimeFit:
    constant: float
    exponent: float
    expected_exponent: float
    num_budgets: int

    @property
    def relative_deviation(self):
        if self.expected_exponent == 0:
            return abs(self.exponent)
        return abs(self.exponent - self.expected_exponent) / self.expected_exponent


def regime_boundary(d, p, S):
    """c_{p,S} 2^d d^(1/p - 1) with c_{p,S} = S^(1-1/p) / 4."""
    return S ** (1 - 1 / p) / 4 * 2.0 ** d * d ** (1 / p - 1)


def regime_label(n, d, p, S):
    if n <= 4 * d:
        return 'trivial'
    if n <= regime_boundary(d, p, S):
        return 'logarithmic'
    return 'asymptotic'


def recovery_parameters(config, epsilon, seed):
    return select_parameters(
        config.r, config.p, config.S, config.d, epsilon, config.delta, config.mode,
        C_r=config.C_r, c_r_spline=config.c_r_spline, seed=seed, r0=config.r0,
    )


def epsilon_ladder(config):
    """Ladder entries not finer than config.epsilon, coarsest first."""
    entries = {e for e in config.epsilon_ladder if e >= config.epsilon}
    entries.add(config.epsilon)
    return sorted(entries, reverse=True)


def params_for_budget(config, budget, seed):
    """
    Parameters for the finest ladder accuracy whose worst case fits 'budget'.
    Returns (params, fits); when nothing fits the coarsest entry is returned.
    """
    ladder = epsilon_ladder(config)
    chosen = None
    for epsilon in ladder:
        params = recovery_parameters(config, epsilon, seed)
        if params.worst_case_samples() > budget:
            break
        chosen = params
    if chosen is None:
        return recovery_parameters(config, ladder[0], seed), False
    return chosen, True


def draw_instance(config, seed):
    """The sweep instance for 'seed': a class member from config.profile_family."""
    rng = np.random.default_rng(seed)
    profile = draw_profile(config.profile_family, config.r, rng, index=seed)
    a = random_ridge_vector(config.d, config.p, config.S, rng)
    return RidgeFunction(profile, a, p=config.p, S=config.S)


def run_sweep_row(config, budget, seed):
    """One row, reproducible from (config, budget, seed) alone."""
    truth = draw_instance(config, seed)
    params, fits = params_for_budget(config, budget, seed)
    oracle = counting_oracle(truth, budget=budget)
    estimate_options = dict(resolution=config.error_grid_resolution, random_probes=config.random_probes, seed=seed)
    try:
        result = recover(oracle, params)
        scenario = result.scenario
        error = sup_error_estimate(truth, result, **estimate_options).value
    except RidgeError as e:
        log.warning("Budget %s, seed %s failed in %s: %s", budget, seed, e.step, e)
        scenario = type(e).__name__
        error = sup_error_estimate(truth, ConstantModel(0.0), **estimate_options).value
    log.info("Budget %s seed %s: scenario %s, epsilon %s%s, error %.4g.",
             budget, seed, scenario, params.epsilon, '' if fits else ' (over budget)', error)
    return SweepRow(budget=int(budget), seed=int(seed), scenario=scenario, samples_used=oracle.samples_used,
                    error=float(error), regime=regime_label(budget, config.d, config.p, config.S))


def run_sweep(config, out=None):
    """Run every (budget, seed) pair of 'config'. Writes CSV to 'out' when given."""
    if out is not None:
        check_output_path(out)
    rows = [run_sweep_row(config, budget, seed) for budget in config.budget_grid for seed in config.seeds]
    if out is not None:
        write_csv(rows, out)
    return rows


def check_output_path(path):
    """Raise OutputError unless 'path' can be created or overwritten."""
    directory = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(directory):
        raise OutputError("Directory {!r} for output {!r} does not exist.".format(directory, path))
    if os.path.isdir(path) or not os.access(path if os.path.exists(path) else directory, os.W_OK):
        raise OutputError("Output path {!r} is not writable.".format(path))


def write_csv(rows, path):
    try:
        with open(path, 'w', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(SWEEP_HEADER)
            for row in rows:
                writer.writerow([repr(value) if isinstance(value, float) else value for value in astuple(row)])
    except OSError as e:
        raise OutputError("Can't write sweep CSV {!r}: {}".format(path, e))


def read_csv(path):
    with open(path, 'r', newline='') as f:
        reader = csv.reader(f)
        header = tuple(next(reader, ()))
        if header != SWEEP_HEADER:
            raise ParameterError("Unexpected sweep header {!r}.".format(header))
        return [
            SweepRow(budget=int(budget), seed=int(seed), scenario=scenario, samples_used=int(samples_used),
                     error=float(error), regime=regime)
            for budget, seed, scenario, samples_used, error, regime in reader
        ]


def error_envelope(rows):
    """Max error over seeds for each budget, ordered by budget."""
    envelope = {}
    for row in rows:
        envelope[row.budget] = max(envelope.get(row.budget, -math.inf), row.error)
    return dict(sorted(envelope.items()))


def is_nonincreasing(envelope, tolerance=0.0):
    values = list(envelope.values())
    return all(later <= earlier + tolerance for earlier, later in zip(values, values[1:]))


def fit_regime(rows, r, p):
    """
    Fit error ~ C (1 / log n)^kappa over the logarithmic-regime envelope.
    The expected exponent is r (1/p - 1).
    """
    envelope = error_envelope([row for row in rows if row.regime == 'logarithmic'])
    budgets = [n for n, error in envelope.items() if error > 0 and n > 2]
    if len(budgets) < 2:
        raise ParameterError("Regime fit needs two logarithmic-regime budgets, got {}.".format(len(budgets)))
    x = np.log(np.log(budgets))
    y = np.log([envelope[n] for n in budgets])
    slope, intercept = np.polyfit(x, y, 1)
    return RegimeFit(constant=float(np.exp(intercept)), exponent=float(-slope),
                     expected_exponent=r * (1 / p - 1), num_budgets=len(budgets))


def spline_error_ratios(r0, trial_profiles, grid_levels, eval_points=CALIBRATION_EVAL_POINTS):
    """
    err(h) / h^r for every profile and level, where h = 1/n for n in 'grid_levels'
    and r = min(profile.r, r0). Returns an array of shape (profiles, levels).
    """
    dense = np.linspace(-1.0, 1.0, eval_points)
    ratios = np.zeros((len(trial_profiles), len(grid_levels)))
    for i, profile in enumerate(trial_profiles):
        rate = min(profile.r, r0)
        truth = profile(dense)
        for j, n in enumerate(grid_levels):
            h = 1.0 / n
            pp = quasi_interpolant(profile(np.arange(-n, n + 1) * h), h, r0)
            ratios[i, j] = np.abs(truth - pp(dense)).max() / h ** rate
    return ratios


def calibrate_spline_constant(r0, trial_profiles, grid_levels):
    """Largest observed err(h) / h^r with a safety factor, never below CALIBRATION_FLOOR."""
    if len(grid_levels) < 3:
        raise ParameterError("Calibration needs at least three grid levels, got {}.".format(len(grid_levels)))
    if not trial_profiles:
        raise ParameterError("Calibration needs at least one trial profile.")
    worst = float(spline_error_ratios(r0, trial_profiles, grid_levels).max())
    constant = max(CALIBRATION_SAFETY * worst, CALIBRATION_FLOOR)
    log.info("Calibrated spline constant %s for r0=%s over %s profiles.", constant, r0, len(trial_profiles))
    return constant


def regime_sweep_config(budgets=REGIME_SWEEP_BUDGETS, seeds=10, family='mixed', c_r_spline=None,
                        output_path='regime-sweep.csv'):
    """
    Config of the regime-shape sweep at d=10, r=2, p=1/2, S=1 and epsilon=0.05. The
    spline constant is calibrated with r0=3 on twelve sine profiles when not given.
    """
    r = 2.0
    if c_r_spline is None:
        rng = np.random.default_rng(0)
        profiles = [draw_profile('sine', r, rng) for _ in range(12)]
        c_r_spline = calibrate_spline_constant(3, profiles, [16, 32, 64])
    return make_config(
        d=10, r=r, p=0.5, S=1, epsilon=0.05, seeds=list(range(seeds)), budget_grid=sorted(budgets),
        profile_family=family, output_path=output_path, c_r_spline=c_r_spline, error_grid_resolution=150,
    )
