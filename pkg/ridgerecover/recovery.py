# -*- coding: utf-8 -*-
'''

Recovery - Adaptive recovery of a ridge function from point samples.

The procedure runs in five steps:

1. Scan sign vectors v and sample f along the diagonal t -> t v on the grid
   j h, h = 1/n_g. Stop at the first v whose largest difference quotient L_v
   exceeds n_g^-r. When no such v exists return the midrange constant (scenario B).
2. Bisect the interval holding the largest quotient n_b times, keeping the half
   with the larger endpoint difference.
3. Estimate the direction a/||a||_1 from first differences around the center of
   the refined interval.
4. Sample f along sign(a_hat) and fit the quasi-interpolant.
5. Return x -> g_hat(a_hat . x) (scenario A).

'''
import contextlib
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

import numpy as np
from scipy.special import factorial

from ridgerecover.approx1d import PiecewisePolynomial, a_priori_spline_constant, quasi_interpolant
from ridgerecover.core import ParameterError, RidgeError, check_cube, sign, strict_floor

log = logging.getLogger(__name__)

MODES = ('randomized', 'derandomized', 'exhaustive')

# Largest vertex list build_vertex_set will materialize.
MAX_VERTICES = 2 ** 22


class RecoveryError(RidgeError):
    category = 'recovery'


class DegenerateSlope(RecoveryError):
    """f(z_1) == f(z_0) after bisection; the slope found in step 1 has vanished."""
    category = 'degenerate_slope'


class VertexSetTooLarge(ParameterError):
    category = 'vertex_set_too_large'


def default_C_r(r, c_r_spline):
    """max(c_r, 2 + 4 c_r + 2^m m!), the constant covering both scenarios."""
    m = strict_floor(r)
    return max(c_r_spline, 2 + 4 * c_r_spline + 2 ** m * float(factorial(m)))


@dataclass(frozen=True)
class RecoveryParams:
    r: float
    p: float
    S: int
    d: int
    epsilon: float
    delta: float
    mode: str
    s: int
    n_v: int
    n_g: int
    n_b: int
    C_r: float
    c_r_spline: float
    seed: int
    rho: float
    r0: int

    @property
    def h(self):
        return 1.0 / self.n_g

    @property
    def num_vertices(self):
        """Number of vertices actually available to the scan."""
        return min(self.n_v, 2 ** self.d)

    def worst_case_samples(self):
        """Samples needed when every vertex is scanned and scenario A still follows."""
        return self.num_vertices * (2 * self.n_g + 1) + self.n_b + self.d + (2 * self.n_g + 1) + 4


def select_parameters(r, p, S, d, epsilon, delta, mode='randomized', C_r=None, c_r_spline=None, seed=0, r0=None):
    """
    Derive s, n_v, n_g and n_b from the accuracy 'epsilon' and confidence 'delta'.

    'C_r' defaults to default_C_r() and 'c_r_spline' to the a-priori spline constant.
    n_g is raised to at least r0 so that the quasi-interpolant has enough knots.
    """
    if not r > 1:
        raise ParameterError("Recovery needs r > 1, got {!r}.".format(r))
    if not 0 < p <= 1:
        raise ParameterError("p must lie in (0, 1], got {!r}.".format(p))
    if not (int(S) == S and 1 <= S < d):
        raise ParameterError("S must be an integer with 1 <= S < d, got S={!r}, d={!r}.".format(S, d))
    if not 0 < epsilon < 1:
        raise ParameterError("epsilon must lie in (0, 1), got {!r}.".format(epsilon))
    if not 0 < delta < 1:
        raise ParameterError("delta must lie in (0, 1), got {!r}.".format(delta))
    if mode not in MODES:
        raise ParameterError("Unknown mode {!r}, expected one of {}.".format(mode, ', '.join(MODES)))

    r0 = r0 or int(math.ceil(r)) + 1
    if c_r_spline is None:
        c_r_spline = a_priori_spline_constant(r, r0)
    if C_r is None:
        C_r = default_C_r(r, c_r_spline)

    if p < 1:
        s = min(S * int(math.ceil((C_r / epsilon) ** (1.0 / (r * (1 / p - 1))))), d)
    else:
        s = d

    if mode == 'randomized':
        n_v = 2 ** s * int(math.ceil(math.log(1 / delta)))
    elif mode == 'derandomized':
        n_v = 2 ** s * int(math.ceil(s * math.log(d / s) + math.log(1 / delta)))
    else:
        n_v = 2 ** d
    n_v = max(n_v, 1)

    n_g = int(math.ceil((max(10 * c_r_spline, C_r) / epsilon) ** (1.0 / r)))
    n_g = max(n_g, r0)
    rho = min(r - 1, 1.0)
    n_b = int(math.ceil(math.log2(4 * n_g ** (r - rho) * (3 + epsilon) / epsilon) / rho))

    params = RecoveryParams(
        r=float(r), p=float(p), S=int(S), d=int(d), epsilon=float(epsilon), delta=float(delta),
        mode=mode, s=s, n_v=n_v, n_g=n_g, n_b=n_b, C_r=float(C_r), c_r_spline=float(c_r_spline),
        seed=int(seed), rho=rho, r0=r0,
    )
    log.debug("Selected parameters %s", params)
    return params


def iter_vertices(d, n_v, seed):
    """
    Yield the vertex sequence lazily: all of {-1, 1}^d in a fixed order when
    n_v >= 2^d, otherwise n_v i.i.d. uniform sign vectors from the seeded generator.
    """
    if n_v >= 2 ** d:
        for signs in itertools.product((-1.0, 1.0), repeat=d):
            yield np.array(signs)
        return
    rng = np.random.default_rng(seed)
    for _ in range(n_v):
        yield rng.integers(0, 2, size=d) * 2.0 - 1.0


def build_vertex_set(d, n_v, seed):
    """Materialize iter_vertices() as an (count, d) array."""
    if n_v < 1:
        raise ParameterError("n_v must be at least 1, got {!r}.".format(n_v))
    count = min(n_v, 2 ** d)
    if count > MAX_VERTICES:
        raise VertexSetTooLarge("Vertex set of size {} exceeds the limit of {}.".format(count, MAX_VERTICES))
    return np.array(list(iter_vertices(d, n_v, seed))).reshape(count, d)


@dataclass(frozen=True)
class FoundSlope:
    v: np.ndarray
    j: int
    L_v: float
    f_left: float
    f_right: float


@dataclass(frozen=True)
class NoLargeSlope:
    f_min: float
    f_max: float


@dataclass(frozen=True)
class Step1Outcome:
    variant: Union[FoundSlope, NoLargeSlope]
    all_samples: tuple
    scanned: int
    slopes: tuple = ()

    @property
    def found(self):
        return isinstance(self.variant, FoundSlope)


def _line_points(v, n_g):
    """The points (j / n_g) v for j = -n_g..n_g."""
    steps = np.arange(-n_g, n_g + 1) / n_g
    return steps[:, None] * np.asarray(v, dtype=float)[None, :]


def step1_scan(oracle, V, n_g, r):
    """Scan the vertices in order until one shows a quotient above n_g^-r."""
    threshold = n_g ** -float(r)
    h = 1.0 / n_g
    start = oracle.samples_used
    slopes = []
    f_min, f_max = math.inf, -math.inf
    scanned = 0
    for v in V:
        scanned += 1
        values = np.array([oracle(x) for x in _line_points(v, n_g)])
        quotients = np.abs(np.diff(values)) / h
        best = int(np.argmax(quotients))
        L_v = float(quotients[best])
        slopes.append(L_v)
        f_min, f_max = min(f_min, values.min()), max(f_max, values.max())
        if L_v > threshold:
            log.debug("Vertex %s shows slope %s at j=%s.", scanned, L_v, best - n_g)
            return Step1Outcome(
                variant=FoundSlope(v=np.asarray(v, dtype=float), j=best - n_g, L_v=L_v,
                                   f_left=float(values[best]), f_right=float(values[best + 1])),
                all_samples=tuple(oracle.ledger[start:]), scanned=scanned, slopes=tuple(slopes))
    if not scanned:
        raise ParameterError("Step 1 needs at least one vertex.")
    log.debug("No slope above %s over %s vertices.", threshold, scanned)
    return Step1Outcome(
        variant=NoLargeSlope(f_min=float(f_min), f_max=float(f_max)),
        all_samples=tuple(oracle.ledger[start:]), scanned=scanned, slopes=tuple(slopes))


@dataclass(frozen=True)
class Bisection:
    t_mid: float
    delta: float
    quotient: float
    f_low: float
    f_high: float

    def __iter__(self):
        return iter((self.t_mid, self.delta))


def _sample_on_line(oracle, t, v):
    """f(t v), served from the ledger when this exact point was queried before."""
    point = check_cube(t * v)
    recorded = oracle.lookup(point)
    return oracle(point) if recorded is None else recorded


def step2_bisect(oracle, v, j_star, n_g, n_b):
    """
    Halve [j h, (j+1) h] 'n_b' times, keeping the half with the larger absolute
    endpoint difference (ties keep the left half). Endpoint values recorded by
    step 1 are read back from the oracle ledger.
    """
    v = np.asarray(v, dtype=float)
    lo, hi = j_star / n_g, (j_star + 1) / n_g
    f_lo, f_hi = _sample_on_line(oracle, lo, v), _sample_on_line(oracle, hi, v)
    for _ in range(n_b):
        mid = (lo + hi) / 2
        f_mid = oracle(mid * v)
        if abs(f_mid - f_lo) >= abs(f_hi - f_mid):
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
    quotient = abs(f_hi - f_lo) / (hi - lo)
    return Bisection(t_mid=(lo + hi) / 2, delta=(hi - lo) / 2, quotient=quotient, f_low=f_lo, f_high=f_hi)


def step3_direction(oracle, v, t_mid, delta):
    """
    a_tilde_i = 2 (f(x_i) - f(x_0)) / (f(z_1) - f(z_0)) with x_0 = t_mid v,
    z_0/1 = (t_mid -/+ delta) v and x_i = x_0 + delta e_i. A probe leaving the cube
    is taken at x_0 - delta e_i instead and its difference negated. Returns the
    l1-normalized a_tilde.
    """
    v = np.asarray(v, dtype=float)
    f_z0 = oracle(check_cube((t_mid - delta) * v))
    f_z1 = oracle(check_cube((t_mid + delta) * v))
    denominator = f_z1 - f_z0
    if denominator == 0:
        raise DegenerateSlope("f(z_1) equals f(z_0) at t_mid={!r}, delta={!r}.".format(t_mid, delta))
    x0 = t_mid * v
    f_x0 = oracle(check_cube(x0))
    a_tilde = np.empty(v.size)
    for i in range(v.size):
        probe = x0.copy()
        if abs(x0[i] + delta) <= 1:
            probe[i] += delta
            a_tilde[i] = 2 * (oracle(probe) - f_x0) / denominator
        else:
            probe[i] -= delta
            a_tilde[i] = -2 * (oracle(probe) - f_x0) / denominator
    norm = np.abs(a_tilde).sum()
    if norm == 0:
        raise DegenerateSlope("All direction differences vanish at t_mid={!r}.".format(t_mid))
    return a_tilde / norm


def step4_profile(oracle, a_hat, n_g, r0=3):
    """Sample f along sign(a_hat) and fit the quasi-interpolant."""
    values = [oracle(x) for x in _line_points(sign(a_hat), n_g)]
    return quasi_interpolant(values, 1.0 / n_g, r0)


@dataclass(frozen=True)
class ConstantModel:
    value: float

    def __call__(self, x):
        check_cube(x)
        return self.value

    def evaluate_batch(self, points):
        points = check_cube(points)
        return np.full(points.shape[0], self.value)


@dataclass(frozen=True, eq=False)
class RidgeModel:
    """x -> profile(direction . x) with ||direction||_1 = 1."""
    profile: PiecewisePolynomial
    direction: np.ndarray

    def __post_init__(self):
        norm = float(np.abs(self.direction).sum())
        if abs(norm - 1) > 1e-12:
            raise RecoveryError("Model direction has l1 norm {!r}, expected 1.".format(norm))

    @property
    def d(self):
        return self.direction.size

    def __call__(self, x):
        x = check_cube(x, self.d)
        return float(self.profile(float(x @ self.direction)))

    def evaluate_batch(self, points):
        points = check_cube(points, self.d)
        return self.profile(points @ self.direction)


@dataclass(frozen=True)
class RecoveryResult:
    model: Union[ConstantModel, RidgeModel]
    samples_used: int
    scenario: str
    diagnostics: dict = field(default_factory=dict)

    def __call__(self, x):
        return self.model(x)


def nominal_sample_count(params):
    """The looser count n' = n_v n_g + n_g + n_b + d."""
    return params.n_v * params.n_g + params.n_g + params.n_b + params.d


def exact_sample_count(params, scanned, scenario):
    """
    Queries spent by recover() after scanning 'scanned' vertices. Each scanned
    vertex costs 2 n_g + 1 queries. Scenario A adds n_b for step 2, whose interval
    endpoints are read back from the step 1 ledger without a query, d + 3 for step 3
    (z_0, z_1, x_0 and one query per coordinate) and 2 n_g + 1 for step 4.
    """
    count = scanned * (2 * params.n_g + 1)
    if scenario == 'A':
        count += params.n_b + params.d + 3 + 2 * params.n_g + 1
    return count


def scenario_b_bound(params):
    """c~_r max((s/S)^(1-1/p), 1/n_g)^r with c~_r = 2 + 4 c_r + 2^m m!."""
    m = strict_floor(params.r)
    c_tilde = 2 + 4 * params.c_r_spline + 2 ** m * float(factorial(m))
    return c_tilde * max((params.s / params.S) ** (1 - 1 / params.p), 1.0 / params.n_g) ** params.r


def hit_membership(v, a, s):
    """True iff v agrees with sign(a) on the s largest-magnitude entries of a."""
    a = np.asarray(a, dtype=float)
    if not 1 <= s <= a.size:
        raise ParameterError("s must lie in 1..{}, got {!r}.".format(a.size, s))
    top = np.argsort(-np.abs(a), kind='stable')[:s]
    return bool(np.all(np.asarray(v)[top] == sign(a[top])))


def best_s_term_error(a, s):
    """Sum of the d - s smallest magnitudes of a."""
    magnitudes = np.sort(np.abs(np.asarray(a, dtype=float)))
    if not 0 <= s <= magnitudes.size:
        raise ParameterError("s must lie in 0..{}, got {!r}.".format(magnitudes.size, s))
    return float(magnitudes[:magnitudes.size - s].sum())


@contextlib.contextmanager
def _recovery_step(name):
    try:
        yield
    except RidgeError as e:
        if e.step is None:
            e.step = name
        raise


def recover(oracle, params, vertices: Optional[Iterator] = None):
    """
    Run the five-step recovery against 'oracle'. 'vertices' overrides the vertex
    sequence drawn from params.seed. Errors carry the failing step in 'step'.
    """
    start = oracle.samples_used
    with _recovery_step('vertices'):
        V = iter_vertices(params.d, params.n_v, params.seed) if vertices is None else vertices

    with _recovery_step('step1'):
        outcome = step1_scan(oracle, V, params.n_g, params.r)
    diagnostics = {
        'scanned': outcome.scanned,
        'max_slope': max(outcome.slopes),
        'nominal_count': nominal_sample_count(params),
        'refusals': [],
    }

    if not outcome.found:
        found = outcome.variant
        model = ConstantModel((found.f_min + found.f_max) / 2)
        diagnostics.update(f_min=found.f_min, f_max=found.f_max,
                           exact_count=exact_sample_count(params, outcome.scanned, 'B'))
        log.info("Scenario B after %s vertices, constant %s.", outcome.scanned, model.value)
        return RecoveryResult(model, oracle.samples_used - start, 'B', diagnostics)

    slope = outcome.variant
    with _recovery_step('step2'):
        bisection = step2_bisect(oracle, slope.v, slope.j, params.n_g, params.n_b)
    with _recovery_step('step3'):
        a_hat = step3_direction(oracle, slope.v, bisection.t_mid, bisection.delta)
    with _recovery_step('step4'):
        g_hat = step4_profile(oracle, a_hat, params.n_g, params.r0)

    threshold = params.n_g ** -params.r
    displayed = 2 * abs(bisection.f_high - bisection.f_low) / bisection.delta
    if not displayed > threshold:
        diagnostics['refusals'].append('bisection quotient {} not above {}'.format(displayed, threshold))
        log.warning("Bisection condition failed: %s <= %s.", displayed, threshold)
    diagnostics.update(
        v=slope.v.tolist(), j=slope.j, L_v=slope.L_v, t_mid=bisection.t_mid, delta=bisection.delta,
        quotient=bisection.quotient, exact_count=exact_sample_count(params, outcome.scanned, 'A'),
    )
    log.info("Scenario A at vertex %s with L_v=%s.", outcome.scanned, slope.L_v)
    return RecoveryResult(RidgeModel(g_hat, a_hat), oracle.samples_used - start, 'A', diagnostics)
