# -*- coding: utf-8 -*-
'''

Adversary - Fooling instances and lower-bound experiments.

Any sampling algorithm that sees only zeros on its query points cannot tell the zero
function from +f* or -f*, where f*(x) = g*(a*.x) vanishes on a half-space containing
all the queries. The error of the algorithm on one of +f*, -f* is then at least
||f*||_inf. The vector a* is found by rejection sampling sign patterns on the first s
coordinates.

'''
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.special import gamma

from ridgerecover.core import (
    BudgetExhausted, ParameterError, RidgeError, RidgeFunction, check_cube, constant_function,
    counting_oracle, p_norm, sign, truncated_power_profile,
)
from ridgerecover.estimate import sup_error_estimate
from ridgerecover.recovery import ConstantModel, recover

log = logging.getLogger(__name__)


class RegimeViolation(ParameterError):
    """The budget is too large for the fooling construction to apply."""
    category = 'regime'


class MaxTriesExceeded(RidgeError):
    category = 'max_tries'


class LedgerDivergence(RidgeError):
    """The algorithm queried differently on the fooling instance than on zero."""
    category = 'ledger_divergence'


class LowerBoundViolation(RidgeError):
    category = 'lower_bound_violation'


class NoFoolingCandidate(RidgeError):
    category = 'no_fooling_candidate'


def lower_bound_constant(r):
    """c_r = 2^-r Gamma(r + 1 - ceil(r)) / Gamma(r + 1); equals 2^-r / r! for integer r."""
    return 2.0 ** -r * gamma(r + 1 - math.ceil(r)) / gamma(r + 1)


def lower_bound_value(n, r, p):
    """c_r (1 / (8 log 2n))^(r (1/p - 1))."""
    if n < 1 or r <= 0 or not 0 < p <= 1:
        raise ParameterError("Lower bound needs n >= 1, r > 0 and p in (0, 1], got n={!r}, r={!r}, p={!r}.".format(n, r, p))
    return float(lower_bound_constant(r) * (1.0 / (8 * math.log(2 * n))) ** (r * (1 / p - 1)))


def randomized_lower_bound_value(n, r, p):
    """c_r' (1 / (8 log 4(n+1)))^(r (1/p - 1)) with c_r' = 2^-3/2 c_r."""
    if n < 0 or r <= 0 or not 0 < p <= 1:
        raise ParameterError("Lower bound needs n >= 0, r > 0 and p in (0, 1].")
    return float(2 ** -1.5 * lower_bound_constant(r) * (1.0 / (8 * math.log(4 * (n + 1)))) ** (r * (1 / p - 1)))


@dataclass(frozen=True, eq=False)
class FoolingVector:
    a: np.ndarray
    s: int
    p: float
    tries_used: int

    def __post_init__(self):
        magnitude = self.s ** (-1 / self.p)
        nonzero = np.flatnonzero(self.a)
        if nonzero.size != self.s or not np.allclose(np.abs(self.a[nonzero]), magnitude, rtol=1e-12, atol=0):
            raise RidgeError("Fooling vector must have {} entries of magnitude {}.".format(self.s, magnitude))
        if abs(p_norm(self.a, self.p) - 1) > 1e-9:
            raise RidgeError("Fooling vector must have unit l_p norm.")

    @property
    def lam(self):
        """||a||_1 = s^(1 - 1/p)."""
        return self.s ** (1 - 1 / self.p)


def default_max_tries(n, s):
    failure = n * math.exp(-s / 8)
    return int(math.ceil(100 / (1 - failure))) if failure < 1 else 10 ** 6


def fooling_vector(points, s, p, seed, max_tries=None, d=None):
    """
    Rejection-sample a = (+-s^(-1/p), ..., +-s^(-1/p), 0, ..., 0) until
    a . z < s^(1-1/p) / 2 for every point z.
    """
    points = np.asarray(points, dtype=float)
    if points.size:
        points = check_cube(np.atleast_2d(points), d)
        d = points.shape[1]
    if d is None:
        raise ParameterError("Dimension is needed when no points are given.")
    if not 1 <= s <= d:
        raise ParameterError("Sparsity s must lie in 1..{}, got {!r}.".format(d, s))
    n = points.shape[0] if points.size else 0
    if max_tries is None:
        max_tries = default_max_tries(n, s)
    elif max_tries < 1:
        raise ParameterError("max_tries must be at least 1, got {!r}.".format(max_tries))
    magnitude, threshold = s ** (-1 / p), s ** (1 - 1 / p) / 2
    rng = np.random.default_rng(seed)
    for tries in range(1, max_tries + 1):
        a = np.zeros(d)
        a[:s] = rng.choice([-1.0, 1.0], s) * magnitude
        if not n or np.all(points @ a < threshold):
            log.debug("Fooling vector found after %s tries (s=%s, n=%s).", tries, s, n)
            return FoolingVector(a=a, s=s, p=p, tries_used=tries)
    raise MaxTriesExceeded("No fooling sign pattern for {} points within {} tries (s={}).".format(n, max_tries, s))


def fooling_instance(fv, r):
    """f*(x) = g*(a* . x) with the normalized truncated power at lambda = ||a*||_1."""
    return RidgeFunction(truncated_power_profile(r, fv.lam), fv.a, p=fv.p)


def fooling_sup_norm(instance):
    """||f*||_inf, attained at sign(a*)."""
    return instance(sign(instance.a))


# Algorithm adapters. run(oracle, seed) returns a model evaluable on the cube and
# may only query through 'oracle'.

class ZeroModelAlgorithm(object):
    deterministic = True

    def run(self, oracle, seed=0):
        return ConstantModel(0.0)


class RecoverAlgorithm(object):
    """
    recover() under the oracle budget. When the budget runs out the midrange of the
    values seen so far is returned, like scenario B.
    """
    deterministic = True

    def __init__(self, params):
        self.params = params

    def run(self, oracle, seed=0):
        start = oracle.samples_used
        try:
            return recover(oracle, self.params).model
        except BudgetExhausted:
            values = oracle.values()[start:]
            if not values.size:
                return ConstantModel(0.0)
            return ConstantModel(float(values.min() + values.max()) / 2)


class UniformSamplingAlgorithm(object):
    """Queries uniform random cube points and returns their mean as a constant."""
    deterministic = False

    def __init__(self, num_queries):
        self.num_queries = num_queries

    def run(self, oracle, seed=0):
        rng = np.random.default_rng(seed)
        values = [oracle(x) for x in rng.uniform(-1.0, 1.0, size=(self.num_queries, oracle.d))]
        return ConstantModel(float(np.mean(values)) if values else 0.0)


@dataclass
class LowerBoundReport:
    n: int
    bound: float
    achieved_error: float
    instance: Optional[FoolingVector]
    r: float
    transcript: dict = field(default_factory=dict)
    sup_norm: float = 0.0
    bound_certified: bool = False
    randomized: bool = False
    fooling_fraction: Optional[float] = None
    error_fraction: Optional[float] = None
    error_quantile: Optional[float] = None
    failure: Optional[str] = None
    witness: Optional[List[float]] = None

    def to_dict(self, include_transcript=False):
        result = {
            'n': self.n,
            'bound': self.bound,
            'achieved_error': self.achieved_error,
            'sup_norm': self.sup_norm,
            'bound_certified': self.bound_certified,
            'randomized': self.randomized,
            'r': self.r,
            'instance': None if self.instance is None else {
                'a': self.instance.a.tolist(), 's': self.instance.s, 'p': self.instance.p,
                'tries_used': self.instance.tries_used,
            },
            'fooling_fraction': self.fooling_fraction,
            'error_fraction': self.error_fraction,
            'error_quantile': self.error_quantile,
            'failure': self.failure,
            'witness': self.witness,
        }
        if include_transcript:
            result['transcript'] = {
                name: [[point.tolist(), value] for point, value in ledger]
                for name, ledger in self.transcript.items()
            }
        return result


def adversary_seed(seed):
    """A child of 'seed' for the adversary's own draws, independent of the algorithm's stream."""
    return np.random.SeedSequence(seed).spawn(1)[0]


def fooling_sparsity(n, d, slack=1.0):
    """Smallest s with n < slack e^(s/8), capped at d."""
    s = int(math.floor(8 * math.log(n / slack))) + 1 if n > 0 else 1
    return int(min(max(s, 1), d))


def _ledger_equal(first, second):
    if len(first) != len(second):
        return False
    return all(np.array_equal(p, q) and v == w for (p, v), (q, w) in zip(first, second))


def det_lower_bound_experiment(algorithm, n, d, r, p, seed=0, resolution=200):
    """
    Fool a deterministic algorithm limited to 'n' queries: record its queries on the
    zero function, build f* vanishing on them, and check that +f* and -f* replay the
    same ledger. The achieved error is at least ||f*||_inf.
    """
    if not n + 1 < math.exp(d / 8):
        raise RegimeViolation("Budget n={} needs n + 1 < e^(d/8) = {:.4g}.".format(n, math.exp(d / 8)))

    zero = counting_oracle(constant_function(0.0, d), budget=n, d=d)
    algorithm.run(zero, seed)
    s = fooling_sparsity(n, d)
    fv = fooling_vector(zero.points(), s, p, adversary_seed(seed), d=d)
    plus = fooling_instance(fv, r)
    minus = plus.negated()

    transcript = {'zero': list(zero.ledger)}
    achieved = 0.0
    witness = sign(fv.a)
    for name, instance in (('plus', plus), ('minus', minus)):
        oracle = counting_oracle(instance, budget=n, d=d)
        model = algorithm.run(oracle, seed)
        transcript[name] = list(oracle.ledger)
        if not _ledger_equal(zero.ledger, oracle.ledger):
            raise LedgerDivergence("Queries on {}f* differ from the zero-input queries.".format(
                '+' if name == 'plus' else '-'))
        estimate = sup_error_estimate(instance, model, resolution=resolution, seed=seed)
        at_witness = abs(instance(witness) - float(model(witness)))
        achieved = max(achieved, estimate.value, at_witness)

    sup_norm = fooling_sup_norm(plus)
    bound = lower_bound_value(n, r, p)
    if achieved < sup_norm:
        raise LowerBoundViolation("Achieved error {} is below ||f*|| = {}.".format(achieved, sup_norm))
    certified = sup_norm >= bound
    if not certified:
        log.warning("||f*|| = %s is below the floor %s for r=%s.", sup_norm, bound, r)
    log.info("Deterministic lower bound: n=%s, s=%s, error %s, bound %s.", n, s, achieved, bound)
    return LowerBoundReport(
        n=n, bound=bound, achieved_error=achieved, instance=fv, r=r, transcript=transcript,
        sup_norm=sup_norm, bound_certified=certified, witness=witness.tolist(),
    )


def ran_lower_bound_experiment(algorithm, n, d, r, p, num_seeds, delta=0.5, seed=0, s=None,
                               num_candidates=64, resolution=100, strict=False):
    """
    Empirical counterpart of the randomized lower bound. The zero-input ledgers of
    'num_seeds' runs are pooled, candidate sign patterns are scored by the fraction of
    seeds they fool, and the best candidate above 'delta' is attacked. The report
    gives the fraction of seeds whose error reaches ||f*||_inf / 2 and the
    (1 - delta)-quantile of the errors.
    """
    if not n + 1 < math.exp(d / 8) / 2:
        raise RegimeViolation("Budget n={} needs n + 1 < e^(d/8) / 2 = {:.4g}.".format(n, math.exp(d / 8) / 2))
    if num_seeds < 1:
        raise ParameterError("At least one seed is needed.")
    seeds = [int(x) for x in np.random.SeedSequence(seed).generate_state(num_seeds, dtype=np.uint64) >> np.uint64(1)]

    ledgers, transcript = [], {}
    for index, run_seed in enumerate(seeds):
        oracle = counting_oracle(constant_function(0.0, d), budget=n, d=d)
        algorithm.run(oracle, run_seed)
        ledgers.append(oracle.points())
        transcript['zero/{}'.format(index)] = list(oracle.ledger)

    s = s or fooling_sparsity(n + 1, d, slack=1 - delta)
    magnitude, threshold = s ** (-1 / p), s ** (1 - 1 / p) / 2
    rng = np.random.default_rng(adversary_seed(seed))
    best_a, best_fraction = None, -1.0
    for _ in range(num_candidates):
        a = np.zeros(d)
        a[:s] = rng.choice([-1.0, 1.0], s) * magnitude
        fooled = [not points.size or bool(np.all(points @ a < threshold)) for points in ledgers]
        fraction = float(np.mean(fooled))
        if fraction > best_fraction:
            best_a, best_fraction = a, fraction
    bound = randomized_lower_bound_value(n, r, p)

    if best_fraction <= delta:
        message = "Best fooling fraction {} does not exceed delta={}.".format(best_fraction, delta)
        if strict:
            raise NoFoolingCandidate(message)
        log.warning(message)
        return LowerBoundReport(
            n=n, bound=bound, achieved_error=0.0, instance=None, r=r, transcript=transcript,
            randomized=True, fooling_fraction=best_fraction, failure=NoFoolingCandidate.category,
        )

    fv = FoolingVector(a=best_a, s=s, p=p, tries_used=num_candidates)
    instance = fooling_instance(fv, r)
    sup_norm = fooling_sup_norm(instance)
    witness = sign(fv.a)
    errors = []
    for index, run_seed in enumerate(seeds):
        oracle = counting_oracle(instance, budget=n, d=d)
        model = algorithm.run(oracle, run_seed)
        transcript['fooled/{}'.format(index)] = list(oracle.ledger)
        estimate = sup_error_estimate(instance, model, resolution=resolution, random_probes=200, seed=run_seed)
        errors.append(max(estimate.value, abs(instance(witness) - float(model(witness)))))
    errors = np.array(errors)
    error_fraction = float(np.mean(errors >= sup_norm / 2))
    quantile = float(np.quantile(errors, 1 - delta))
    log.info("Randomized lower bound: fooling fraction %s, error fraction %s.", best_fraction, error_fraction)
    return LowerBoundReport(
        n=n, bound=bound, achieved_error=quantile, instance=fv, r=r, transcript=transcript,
        sup_norm=sup_norm, bound_certified=quantile >= bound, randomized=True,
        fooling_fraction=best_fraction, error_fraction=error_fraction, error_quantile=quantile,
        witness=witness.tolist(),
    )
