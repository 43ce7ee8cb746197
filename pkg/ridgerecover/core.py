# -*- coding: utf-8 -*-
'''

Core - Profiles, ridge functions and the budgeted counting oracle.

A ridge function is f(x) = g(a.x) on the cube [-1, 1]^d. The profile g carries its
regularity r together with m (the largest integer strictly below r) and
beta = r - m. Norms follow the Lipschitz scale where the Hoelder constant of order
beta is measured with the divisor 2 * min(1, |u - v|)^beta.

'''
import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from cachetools import LRUCache, cached

log = logging.getLogger(__name__)

# Points within this distance outside the cube are snapped onto its boundary.
CUBE_TOLERANCE = 1e-12

# Grid density used when a Lipschitz norm has to be estimated numerically.
LIP_GRID_POINTS = 2001


class RidgeError(RuntimeError):
    """Base class for all errors raised by this package."""
    category = 'ridge_error'
    step = None


class ParameterError(RidgeError):
    category = 'parameter'


class DimensionMismatch(RidgeError):
    category = 'dimension_mismatch'


class DomainViolation(RidgeError):
    """A point was requested outside the cube or outside a profile interval."""
    category = 'domain_violation'


class ProfileDomainError(DomainViolation):
    category = 'profile_domain'


class BudgetExhausted(RidgeError):
    """The query would exceed the oracle budget."""
    category = 'budget_exhausted'


class ClassViolation(RidgeError):
    """Ridge vector outside the class ||a||_p <= 1, ||a||_1 >= min(1, 4 S^(1-1/p))."""
    category = 'class_violation'


class DegenerateGrid(RidgeError):
    category = 'degenerate_grid'


class OutputError(RidgeError):
    """A result file could not be written."""
    category = 'io'


def strict_floor(r):
    """Return the largest integer strictly less than 'r'."""
    return int(math.ceil(r)) - 1


def sign(x):
    """Elementwise sign with sign(0) := +1."""
    return np.where(np.asarray(x) < 0, -1.0, 1.0)


def p_norm(a, p):
    """The l_p quasi-norm (sum |a_i|^p)^(1/p) for 0 < p <= 1."""
    a = np.abs(np.asarray(a, dtype=float))
    if not a.any():
        return 0.0
    return float(np.sum(a ** p) ** (1.0 / p))


@dataclass(frozen=True)
class Profile:
    """
    A univariate function on the interval [lo, hi] with regularity metadata.

    'evaluate' must accept numpy arrays. 'derivatives' holds evaluators for the
    orders 1..m when they are known analytically. 'lip_norm' is the analytic
    Lipschitz norm when known.
    """
    evaluate: Callable
    r: float
    lo: float = -1.0
    hi: float = 1.0
    derivatives: Tuple[Callable, ...] = ()
    lip_norm: Optional[float] = None
    name: str = 'profile'

    def __post_init__(self):
        if self.r <= 0:
            raise ParameterError("Profile regularity must be positive, got {!r}.".format(self.r))
        if not self.lo < self.hi:
            raise ParameterError("Profile interval [{}, {}] is empty.".format(self.lo, self.hi))

    @property
    def m(self):
        return strict_floor(self.r)

    @property
    def beta(self):
        return self.r - self.m

    def check_domain(self, t):
        t = np.asarray(t, dtype=float)
        if t.size and (t.min() < self.lo - CUBE_TOLERANCE or t.max() > self.hi + CUBE_TOLERANCE):
            raise ProfileDomainError(
                "Profile '{}' evaluated at {} outside its interval [{}, {}].".format(
                    self.name, t.min() if t.min() < self.lo else t.max(), self.lo, self.hi))
        return t

    def __call__(self, t):
        t = self.check_domain(t)
        value = self.evaluate(t)
        if np.ndim(value) == 0:
            return float(value)
        return np.asarray(value, dtype=float)

    def derivative(self, order, t):
        """Evaluate the derivative of order 1..m."""
        if not 1 <= order <= len(self.derivatives):
            raise ParameterError("Profile '{}' has no derivative evaluator of order {}.".format(self.name, order))
        return self.derivatives[order - 1](self.check_domain(t))

    def rescaled(self, c):
        """Return t -> g(c t) on [lo/c, hi/c]."""
        if c <= 0:
            raise ParameterError("Rescaling factor must be positive, got {!r}.".format(c))
        evaluate, derivatives = self.evaluate, self.derivatives
        return replace(
            self,
            evaluate=lambda t: evaluate(c * t),
            lo=self.lo / c,
            hi=self.hi / c,
            derivatives=tuple(
                (lambda t, k=k, dk=dk: c ** k * dk(c * t)) for k, dk in enumerate(derivatives, 1)
            ),
            lip_norm=None,
            name='{}(x{})'.format(self.name, c),
        )

    def scaled(self, factor):
        """Return t -> factor * g(t)."""
        evaluate, derivatives = self.evaluate, self.derivatives
        return replace(
            self,
            evaluate=lambda t: factor * evaluate(t),
            derivatives=tuple((lambda t, dk=dk: factor * dk(t)) for dk in derivatives),
            lip_norm=None if self.lip_norm is None else abs(factor) * self.lip_norm,
            name='{}*{}'.format(factor, self.name),
        )


@dataclass(frozen=True)
class FoolingProfile(Profile):
    """Normalized truncated power t -> max(0, t - lam/2)^r / normalization."""
    lam: float = 1.0
    normalization: float = 1.0


@dataclass(frozen=True, eq=False)
class RidgeFunction:
    """f(x) = profile(a.x) together with the class parameters p and S."""
    profile: Profile
    a: np.ndarray
    p: float = 1.0
    S: Optional[int] = None

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        a.setflags(write=False)
        object.__setattr__(self, 'a', a)
        if a.ndim != 1 or a.size == 0:
            raise DimensionMismatch("Ridge vector must be a non-empty 1-d array, got shape {}.".format(a.shape))
        if not 0 < self.p <= 1:
            raise ParameterError("Class parameter p must lie in (0, 1], got {!r}.".format(self.p))
        reach = self.l1_norm
        if self.profile.lo > -reach + CUBE_TOLERANCE or self.profile.hi < reach - CUBE_TOLERANCE:
            raise ProfileDomainError(
                "Profile interval [{}, {}] does not cover [-{r}, {r}].".format(
                    self.profile.lo, self.profile.hi, r=reach))

    @property
    def d(self):
        return self.a.size

    @property
    def l1_norm(self):
        return float(np.sum(np.abs(self.a)))

    @property
    def direction(self):
        """a / ||a||_1."""
        return self.a / self.l1_norm

    def check_class(self, tolerance=1e-9):
        """Raise ClassViolation unless a satisfies the class constraints."""
        norm = p_norm(self.a, self.p)
        if norm > 1 + tolerance:
            raise ClassViolation("||a||_p = {} exceeds 1 for p = {}.".format(norm, self.p))
        if self.S is not None:
            floor = min(1.0, 4 * self.S ** (1 - 1 / self.p))
            if self.l1_norm < floor - tolerance:
                raise ClassViolation("||a||_1 = {} is below the floor {} for S = {}.".format(
                    self.l1_norm, floor, self.S))
        return self

    def rescaled(self, c):
        """Same function represented as (g(c t), a / c)."""
        return RidgeFunction(self.profile.rescaled(c), self.a / c, p=self.p, S=self.S)

    def negated(self):
        return RidgeFunction(self.profile.scaled(-1.0), self.a, p=self.p, S=self.S)

    def __call__(self, x):
        return eval_ridge(self, x)

    def evaluate_batch(self, points):
        points = check_cube(points, self.d)
        return self.profile(points @ self.a)


def check_cube(x, d=None):
    """
    Validate 'x' (a point or a stack of points) against dimension 'd' and the cube.
    Coordinates within CUBE_TOLERANCE of the boundary are snapped onto it.
    """
    x = np.asarray(x, dtype=float)
    if d is not None and (x.ndim == 0 or x.shape[-1] != d):
        raise DimensionMismatch("Expected points of dimension {}, got shape {}.".format(d, x.shape))
    if x.size:
        worst = np.abs(x).max()
        if not worst <= 1 + CUBE_TOLERANCE:
            raise DomainViolation("Point with max |x_i| = {!r} lies outside the cube.".format(worst))
        if worst > 1:
            x = np.clip(x, -1.0, 1.0)
    return x


def eval_ridge(rf, x):
    """Evaluate the ridge function 'rf' at the cube point 'x'."""
    x = check_cube(x, rf.d)
    if x.ndim != 1:
        raise DimensionMismatch("eval_ridge takes a single point, got shape {}.".format(x.shape))
    return float(rf.profile(float(x @ rf.a)))


def constant_function(value, d):
    """A ridge representation of the constant function."""
    profile = Profile(
        evaluate=lambda t: np.full(np.shape(t), float(value)) if np.ndim(t) else float(value),
        r=2.0,
        lip_norm=abs(float(value)),
        name='constant',
    )
    return RidgeFunction(profile, np.zeros(d))


# Truncated power profiles

def _falling_factorial(r, i):
    """prod_{j < i} (r - j)."""
    return float(np.prod([r - j for j in range(i)])) if i else 1.0


@cached(cache=LRUCache(maxsize=256))
def truncated_power_norm(r, lam):
    """
    Analytic Lipschitz norm of t -> max(0, t - lam/2)^r on [-1, 1].

    The i-th derivative peaks at t = 1 with value P_i (1 - lam/2)^(r - i) where
    P_i = r (r-1) ... (r-i+1). The Hoelder constant of the m-th derivative is P_m / 2,
    attained by pairs straddling the kink at lam/2.
    """
    m = strict_floor(r)
    reach = max(0.0, 1.0 - lam / 2.0)
    sups = [_falling_factorial(r, i) * reach ** (r - i) for i in range(m + 1)]
    hoelder = _falling_factorial(r, m) / 2.0 if reach > 0 else 0.0
    return max(sups + [hoelder])


def truncated_power_profile(r, lam):
    """Return the fooling profile max(0, t - lam/2)^r normalized to unit Lipschitz norm."""
    if r <= 0 or lam <= 0:
        raise ParameterError("Truncated power needs r > 0 and lambda > 0, got r={!r}, lambda={!r}.".format(r, lam))
    norm = truncated_power_norm(float(r), float(lam))
    if norm == 0:
        raise ParameterError("Truncated power with lambda={!r} vanishes on [-1, 1].".format(lam))
    shift = lam / 2.0
    m = strict_floor(r)

    def evaluate(t):
        return np.maximum(0.0, t - shift) ** r / norm

    def derivative(i):
        factor = _falling_factorial(r, i) / norm
        return lambda t: factor * np.maximum(0.0, t - shift) ** (r - i)

    return FoolingProfile(
        evaluate=evaluate,
        r=float(r),
        derivatives=tuple(derivative(i) for i in range(1, m + 1)),
        lip_norm=1.0,
        name='truncated_power(r={}, lambda={})'.format(r, lam),
        lam=float(lam),
        normalization=norm,
    )


# Hoelder and Lipschitz estimates

def _hoelder_from_values(grid, values, beta):
    best = 0.0
    # Row blocks keep the pairwise arrays small on dense grids.
    for start in range(0, grid.size, 512):
        rows = slice(start, start + 512)
        dist = np.abs(grid[rows, None] - grid[None, :])
        diff = np.abs(values[rows, None] - values[None, :])
        mask = dist > 0
        ratio = diff[mask] / (2.0 * np.minimum(1.0, dist[mask]) ** beta)
        if ratio.size:
            best = max(best, float(ratio.max()))
    return best


def hoelder_constant_estimate(g, beta, grid):
    """
    Max over distinct grid pairs of |g(u) - g(v)| / (2 min(1, |u - v|)^beta).

    This is a lower bound on the true Hoelder constant of 'g'.
    """
    if not 0 < beta <= 1:
        raise ParameterError("Hoelder order must lie in (0, 1], got {!r}.".format(beta))
    grid = np.unique(np.asarray(grid, dtype=float))
    if grid.size < 2:
        raise DegenerateGrid("Hoelder estimate needs at least two distinct grid points.")
    return _hoelder_from_values(grid, np.asarray(g(grid), dtype=float), beta)


def lip_norm_estimate(profile, num_points=LIP_GRID_POINTS):
    """
    Grid estimate (a lower bound) of the Lipschitz norm of 'profile'.

    Missing derivative evaluators are replaced by numerical gradients on the grid.
    """
    grid = np.linspace(profile.lo, profile.hi, num_points)
    layers = [np.asarray(profile(grid), dtype=float)]
    for order in range(1, profile.m + 1):
        if order <= len(profile.derivatives):
            layers.append(np.asarray(profile.derivative(order, grid), dtype=float))
        else:
            log.debug("Profile '%s' lacks derivative %s, using grid gradient.", profile.name, order)
            layers.append(np.gradient(layers[-1], grid))
    sups = [float(np.abs(layer).max()) for layer in layers]
    stride = max(1, num_points // 1000)
    hoelder = _hoelder_from_values(grid[::stride], layers[-1][::stride], profile.beta)
    return max(sups + [hoelder])


# Profile families

PROFILE_FAMILIES: Dict[str, Callable] = {}


def register_profile_family(name):
    """Decorator to register a profile family factory under 'name'."""
    def decorator(factory):
        PROFILE_FAMILIES[name] = factory
        return factory
    return decorator


def linear_profile(slope=1.0, offset=0.0, r=2.0):
    m = strict_floor(r)
    derivatives = tuple(
        (lambda t: np.full(np.shape(t), float(slope))) if i == 1 else (lambda t: np.zeros(np.shape(t)))
        for i in range(1, m + 1)
    )
    return Profile(
        evaluate=lambda t: offset + slope * t,
        r=float(r),
        derivatives=derivatives,
        lip_norm=max(abs(offset) + abs(slope), abs(slope)),
        name='linear(slope={}, offset={})'.format(slope, offset),
    )


def sine_profile(frequency=3.0, amplitude=None, phase=0.0, r=2.0):
    """
    t -> amplitude * sin(frequency t + phase). The default amplitude
    frequency^-(m+1) keeps the profile inside the unit Lipschitz ball.
    """
    m = strict_floor(r)
    if amplitude is None:
        amplitude = max(1.0, frequency) ** -(m + 1)

    def derivative(i):
        scale = amplitude * frequency ** i
        return lambda t: scale * np.sin(frequency * t + phase + i * np.pi / 2)

    return Profile(
        evaluate=lambda t: amplitude * np.sin(frequency * t + phase),
        r=float(r),
        derivatives=tuple(derivative(i) for i in range(1, m + 1)),
        name='sine(freq={:.4g}, amp={:.4g}, phase={:.4g})'.format(frequency, amplitude, phase),
    )


@register_profile_family('linear')
def _linear_family(r, rng):
    slope = rng.uniform(0.5, 1.0) * rng.choice([-1.0, 1.0])
    return linear_profile(slope=slope, offset=0.0, r=r)


@register_profile_family('sine')
def _sine_family(r, rng):
    return sine_profile(frequency=rng.uniform(1.0, 3.0), phase=rng.uniform(-np.pi, np.pi), r=r)


@register_profile_family('truncated_power')
def _truncated_power_family(r, rng):
    return truncated_power_profile(r, rng.uniform(0.1, 1.0))


MIXED_FAMILIES = ('linear', 'sine', 'truncated_power')


def draw_profile(family, r, rng, index=0):
    """Draw a profile from a registered family. 'mixed' cycles by 'index'."""
    if family == 'mixed':
        family = MIXED_FAMILIES[index % len(MIXED_FAMILIES)]
    if family not in PROFILE_FAMILIES:
        raise ParameterError("No profile family registered under {!r}.".format(family))
    return PROFILE_FAMILIES[family](r, rng)


def random_ridge_vector(d, p, S, rng):
    """
    Draw a with ||a||_p = 1 and ||a||_1 >= min(1, 4 S^(1-1/p)): a few dominant
    entries plus a tail that is halved until the l1 floor holds.
    """
    signs = rng.choice([-1.0, 1.0], d)
    if p == 1:
        a = np.abs(rng.standard_normal(d))
        return signs * a / a.sum()
    floor = min(1.0, 4 * S ** (1 - 1 / p))
    support = rng.permutation(d)
    a = np.zeros(d)
    if floor >= 1:
        # Only 1-sparse vectors reach ||a||_1 = ||a||_p = 1 when p < 1.
        a[support[0]] = 1.0
        return signs * a
    # k-sparse unit vectors have ||a||_1 >= k^(1-1/p) >= floor for this k.
    k = int(np.clip(int(S * 4 ** (-1 / (1 / p - 1))), 1, d))
    a[support[:k]] = rng.uniform(0.5, 1.0, k)
    tail = rng.uniform(0.0, 0.05, d - k)
    while True:
        a[support[k:]] = tail
        scaled = a / p_norm(a, p)
        if scaled.sum() >= floor or not tail.any():
            return signs * scaled
        tail = np.where(tail > 1e-12, tail / 2, 0.0)


# Counting oracle

class CountingOracle(object):
    """
    Budgeted black-box evaluator over the cube.

    Every answered query is appended to 'ledger' as (point, value). A query that
    would exceed 'budget' raises BudgetExhausted, a point outside the cube raises
    DomainViolation. Neither is recorded. An oracle has a single writer.
    """

    def __init__(self, target, budget=None, d=None):
        if budget is not None and budget < 0:
            raise ParameterError("Oracle budget must be non-negative, got {!r}.".format(budget))
        self.target = target
        self.budget = budget
        self.d = d if d is not None else getattr(target, 'd', None)
        self.ledger: List[Tuple[np.ndarray, float]] = []
        self._recorded = {}

    def __repr__(self):
        return "CountingOracle(d={}, used={}, budget={})".format(self.d, self.samples_used, self.budget)

    @property
    def samples_used(self):
        return len(self.ledger)

    @property
    def remaining(self):
        if self.budget is None:
            return None
        return self.budget - len(self.ledger)

    def __call__(self, x):
        x = check_cube(x, self.d)
        if x.ndim != 1:
            raise DimensionMismatch("Oracle takes a single point, got shape {}.".format(x.shape))
        if self.budget is not None and len(self.ledger) >= self.budget:
            raise BudgetExhausted("Query {} exceeds the budget of {} samples.".format(len(self.ledger) + 1, self.budget))
        point = x.copy()
        point.setflags(write=False)
        value = float(self.target(point))
        self.ledger.append((point, value))
        self._recorded[point.tobytes()] = value
        return value

    def lookup(self, x):
        """Value recorded for exactly the point 'x', or None. Does not count as a query."""
        x = check_cube(x, self.d)
        return self._recorded.get(np.ascontiguousarray(x).tobytes())

    def points(self):
        if not self.ledger:
            return np.zeros((0, self.d or 0))
        return np.vstack([point for point, _ in self.ledger])

    def values(self):
        return np.array([value for _, value in self.ledger])

    def replay(self, target=None):
        """Re-evaluate the ledger points against 'target' (default: own target)."""
        target = target or self.target
        return np.array([float(target(point)) for point, _ in self.ledger])


def counting_oracle(f, budget=None, d=None):
    """Wrap 'f' in a CountingOracle with the given budget (None is unlimited)."""
    return CountingOracle(f, budget=budget, d=d)
