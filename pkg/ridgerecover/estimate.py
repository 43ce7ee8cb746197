# -*- coding: utf-8 -*-
'''

Estimate - Sup-norm error between a ridge function and a recovered model.

For a ridge model x -> g_hat(a_hat . x) the error at x only depends on the pair
(u, w) = (a . x, a_hat . x). Over the cube these pairs fill a zonogon whose vertical
section at u is [w_min(u), w_max(u)], obtained exactly from a continuous knapsack:
optimize a_hat . x subject to a . x = u and x in the cube. The error is maximized on
a (u, w) grid, refined around the best cells, and every candidate is turned back
into a cube point and re-evaluated, so the reported value is attained at its witness.

'''
import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np

from ridgerecover.core import DimensionMismatch, RidgeFunction, check_cube, sign
from ridgerecover.recovery import ConstantModel, RecoveryResult, RidgeModel

log = logging.getLogger(__name__)

DEFAULT_RESOLUTION = 400
DEFAULT_RANDOM_PROBES = 2000
REFINE_CANDIDATES = 8
REFINE_ROUNDS = 2
REFINE_POINTS = 41


@dataclass(frozen=True)
class ErrorEstimate:
    value: float
    method: str
    certificate_points: List[np.ndarray] = field(default_factory=list)

    @property
    def witness(self):
        return self.certificate_points[0] if self.certificate_points else None


class _Knapsack(object):
    """
    Greedy solution of max/min c . x subject to a . x = u, x in [-1, 1]^d.

    Starting from x = -sign(a), flipping coordinate i to +sign(a) raises a . x by
    2|a_i| and changes c . x by 2 c_i sign(a_i). Flips are taken in order of that
    ratio, the last one fractionally. Coordinates with a_i = 0 are set freely.
    """

    def __init__(self, a, c):
        self.a = np.asarray(a, dtype=float)
        self.c = np.asarray(c, dtype=float)
        self.reach = float(np.abs(self.a).sum())
        active = self.a != 0
        self.active = np.flatnonzero(active)
        self.free = np.flatnonzero(~active)
        s = sign(self.a[self.active])
        self.weights = 2 * np.abs(self.a[self.active])
        self.profits = 2 * self.c[self.active] * s
        self.base = -(self.c[self.active] * s).sum()
        self.free_mass = np.abs(self.c[self.free]).sum()
        self.orders = {}
        for maximize in (True, False):
            ratio = self.profits / self.weights
            order = np.argsort(-ratio if maximize else ratio, kind='stable')
            self.orders[maximize] = (order, np.concatenate([[0.0], np.cumsum(self.weights[order])]),
                                     np.concatenate([[0.0], np.cumsum(self.profits[order])]))

    def _fill(self, u, maximize):
        """Index of the fractional item and its fill fraction for each capacity."""
        order, cum_weight, _ = self.orders[maximize]
        capacity = np.clip(np.asarray(u, dtype=float) + self.reach, 0.0, cum_weight[-1])
        k = np.clip(np.searchsorted(cum_weight, capacity, side='right') - 1, 0, max(order.size - 1, 0))
        fraction = np.zeros_like(capacity)
        if order.size:
            fraction = np.clip((capacity - cum_weight[k]) / self.weights[order[k]], 0.0, 1.0)
        return k, fraction

    def extreme(self, u, maximize):
        """w_max(u) (or w_min(u)) for an array of u."""
        order, _, cum_profit = self.orders[maximize]
        if not order.size:
            return np.full(np.shape(u), self.free_mass if maximize else -self.free_mass)
        k, fraction = self._fill(u, maximize)
        value = self.base + cum_profit[k] + fraction * self.profits[order[k]]
        return value + (self.free_mass if maximize else -self.free_mass)

    def point(self, u, maximize):
        """A cube point attaining extreme(u, maximize)."""
        x = np.empty(self.a.size)
        x[self.free] = sign(self.c[self.free]) * (1 if maximize else -1)
        s = sign(self.a[self.active])
        order, _, _ = self.orders[maximize]
        theta = np.zeros(order.size)
        if order.size:
            k, fraction = self._fill(u, maximize)
            theta[order[:int(k)]] = 1.0
            theta[order[int(k)]] = float(fraction)
        x[self.active] = s * (2 * theta - 1)
        return x


def knapsack_envelope(a, a_hat, u):
    """The zonogon section [w_min(u), w_max(u)] for each u."""
    solver = _Knapsack(a, a_hat)
    return solver.extreme(u, False), solver.extreme(u, True)


def _model_of(model):
    return model.model if isinstance(model, RecoveryResult) else model


def _batch(model, points):
    if hasattr(model, 'evaluate_batch'):
        return np.asarray(model.evaluate_batch(points), dtype=float)
    return np.array([float(model(x)) for x in points])


class _Tracker(object):
    """Keeps the best re-evaluated error and its witness."""

    def __init__(self, truth, model):
        self.truth, self.model = truth, model
        self.value, self.points = -np.inf, []

    def offer(self, points):
        points = check_cube(np.atleast_2d(points), self.truth.d)
        errors = np.abs(self.truth.evaluate_batch(points) - _batch(self.model, points))
        best = int(np.argmax(errors))
        if errors[best] > self.value:
            self.value = float(errors[best])
            self.points = [points[best].copy()] + self.points[:4]


def _zonogon_search(truth, model, tracker, resolution):
    g, a = truth.profile, truth.a
    reach = truth.l1_norm
    if isinstance(model, RidgeModel):
        solver = _Knapsack(a, model.direction)
        g_hat = model.profile
    else:
        solver = _Knapsack(a, np.zeros(a.size))
        g_hat = None

    def section(u, tau):
        lo, hi = solver.extreme(u, False), solver.extreme(u, True)
        return lo + tau * (hi - lo)

    def errors(u, tau):
        truth_values = g(u)[:, None]
        if g_hat is None:
            return np.abs(truth_values - model.value) + 0 * tau[None, :]
        return np.abs(truth_values - g_hat(section(u[:, None], tau[None, :])))

    def to_point(u, tau):
        low, high = solver.point(u, False), solver.point(u, True)
        return np.clip(low + tau * (high - low), -1.0, 1.0)

    u = np.linspace(-reach, reach, resolution)
    tau = np.linspace(0.0, 1.0, resolution if g_hat is not None else 1)
    grid = errors(u, tau)
    flat = np.argsort(grid, axis=None)[::-1][:REFINE_CANDIDATES]
    du = 2 * reach / max(resolution - 1, 1)
    dtau = 1.0 / max(tau.size - 1, 1)
    for index in flat:
        i, j = np.unravel_index(index, grid.shape)
        cu, ct, su, st = u[i], tau[j], du, dtau
        tracker.offer(to_point(cu, ct))
        for _ in range(REFINE_ROUNDS):
            lu = np.clip(np.linspace(cu - su, cu + su, REFINE_POINTS), -reach, reach)
            lt = np.clip(np.linspace(ct - st, ct + st, REFINE_POINTS), 0.0, 1.0) if g_hat is not None else tau
            local = errors(lu, lt)
            bi, bj = np.unravel_index(int(np.argmax(local)), local.shape)
            cu, ct = lu[bi], lt[bj]
            su, st = su / (REFINE_POINTS // 2), st / (REFINE_POINTS // 2)
            tracker.offer(to_point(cu, ct))


def sup_error_estimate(truth, model, resolution=DEFAULT_RESOLUTION, random_probes=DEFAULT_RANDOM_PROBES, seed=0):
    """
    Estimate ||truth - model||_inf over the cube.

    'model' is a RecoveryResult, a ConstantModel, a RidgeModel or any callable on cube
    points. Ridge and constant models get the zonogon search; every model gets
    random cube probes and probes along the lines t sign(a) and t sign(a_hat).
    """
    if not isinstance(truth, RidgeFunction):
        raise TypeError("Truth must be a RidgeFunction, got {!r}.".format(type(truth)))
    model = _model_of(model)
    if getattr(model, 'd', truth.d) != truth.d:
        raise DimensionMismatch("Model dimension {} differs from truth dimension {}.".format(model.d, truth.d))

    tracker = _Tracker(truth, model)
    structured = isinstance(model, (RidgeModel, ConstantModel))
    if structured:
        _zonogon_search(truth, model, tracker, resolution)

    steps = np.linspace(-1.0, 1.0, resolution)
    tracker.offer(steps[:, None] * sign(truth.a)[None, :])
    if isinstance(model, RidgeModel):
        tracker.offer(steps[:, None] * sign(model.direction)[None, :])
    if random_probes:
        rng = np.random.default_rng(seed)
        tracker.offer(rng.uniform(-1.0, 1.0, size=(random_probes, truth.d)))

    method = 'combined' if structured else 'random_sampling'
    log.debug("Sup error estimate %s (%s).", tracker.value, method)
    return ErrorEstimate(value=tracker.value, method=method, certificate_points=tracker.points)
