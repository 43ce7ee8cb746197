# -*- coding: utf-8 -*-
'''

Approx1d - Univariate quasi-interpolation, divided differences and Taylor extrapolation.

The quasi-interpolant is a local Lagrange interpolant: on the interval
[k h, (k+1) h] it interpolates the r0 consecutive knots centered on the interval,
with the window clamped at the ends of the knot span [-n h, n h]. Outside the span
the endpoint Taylor extrapolants take over.

'''
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from cachetools import LRUCache, cached
from scipy.special import binom, factorial

from ridgerecover.core import ParameterError, strict_floor

log = logging.getLogger(__name__)

# Sampling density for the Lebesgue function on a unit interval.
LEBESGUE_GRID_POINTS = 4001


def divided_difference(samples, m, h):
    """
    D_h^m(g, t) = h^-m sum_j C(m, j) (-1)^(m-j) g(t + j h).

    'samples' holds g(t), g(t + h), ..., g(t + m h). Negative 'h' is allowed.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (m + 1,):
        raise ParameterError("Divided difference of order {} needs {} samples, got {}.".format(
            m, m + 1, samples.shape))
    if h == 0:
        raise ParameterError("Divided difference step must be nonzero.")
    j = np.arange(m + 1)
    weights = binom(m, j) * (-1.0) ** (m - j)
    return float(weights @ samples / h ** m)


@dataclass(frozen=True)
class TaylorExtrapolant:
    """T(t1) = sum_i derivative_estimates[i] / i! (t1 - t0)^i."""
    t0: float
    m: int
    derivative_estimates: Tuple[float, ...]

    def __call__(self, t1):
        return taylor_extrapolate(self, t1)


def taylor_extrapolate(ext, t1):
    offset = np.asarray(t1, dtype=float) - ext.t0
    orders = np.arange(ext.m + 1)
    terms = np.asarray(ext.derivative_estimates) / factorial(orders)
    value = np.polynomial.polynomial.polyval(offset, terms)
    return float(value) if np.ndim(value) == 0 else value


def _taylor_data(samples, m, step, t0):
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (m + 1,):
        raise ParameterError("Taylor data of order {} needs {} samples, got {}.".format(m, m + 1, samples.shape))
    estimates = [float(samples[0])]
    estimates += [divided_difference(samples[:i + 1], i, step) for i in range(1, m + 1)]
    return TaylorExtrapolant(t0=float(t0), m=m, derivative_estimates=tuple(estimates))


def endpoint_derivative_estimates(samples, m, h, t0=0.0):
    """
    Taylor data at 't0' from the backward samples g(t0), g(t0 - h), ..., g(t0 - m h):
    estimate i is D_{-h}^i(g, t0).
    """
    if h <= 0:
        raise ParameterError("Backward spacing must be positive, got {!r}.".format(h))
    return _taylor_data(samples, m, -h, t0)


def _window_start(k, n, r0):
    """First knot of the r0-knot window serving the interval [k h, (k+1) h]."""
    return min(max(k - (r0 - 1) // 2, -n), n - r0 + 1)


@cached(cache=LRUCache(maxsize=128))
def _local_basis(r0, offset):
    """
    Inverse Vandermonde matrix for the nodes offset, ..., offset + r0 - 1 in the
    local variable s = t/h - k. Multiplying window values by it gives the monomial
    coefficients of the interpolating polynomial in s.
    """
    nodes = np.arange(offset, offset + r0, dtype=float)
    inverse = np.linalg.inv(np.polynomial.polynomial.polyvander(nodes, r0 - 1))
    inverse.setflags(write=False)
    return inverse


@cached(cache=LRUCache(maxsize=32))
def lebesgue_constant(r0):
    """
    Max over all window placements of sum_j |l_j(s)| for s in [0, 1]. Bounds
    ||Q_h g|| by this multiple of max_i |g(i h)|.
    """
    s = np.linspace(0.0, 1.0, LEBESGUE_GRID_POINTS)
    powers = np.polynomial.polynomial.polyvander(s, r0 - 1)
    best = 0.0
    for offset in range(-(r0 - 2), 1):
        basis = _local_basis(r0, offset)
        best = max(best, float(np.abs(powers @ basis).sum(axis=1).max()))
    return best


def a_priori_spline_constant(r, r0):
    """
    Conservative c with ||g - Q_h g|| <= c h^r for g in the unit Lipschitz ball:
    (1 + Lebesgue constant) times the Taylor remainder over a window.
    """
    m = strict_floor(r)
    return (1 + lebesgue_constant(r0)) * (2.0 / float(factorial(m))) * ((r0 - 1) / 2.0) ** r


@dataclass(frozen=True, eq=False)
class PiecewisePolynomial:
    """
    Knots i h for i = -n..n, one polynomial of degree r0 - 1 per interval stored as
    monomial coefficients in s = t/h - k, and Taylor extrapolants at both ends.
    """
    h: float
    n: int
    r0: int
    coeffs: np.ndarray
    left: TaylorExtrapolant
    right: TaylorExtrapolant

    @property
    def degree(self):
        return self.r0 - 1

    @property
    def span(self):
        return self.n * self.h

    @property
    def knots(self):
        return np.arange(-self.n, self.n + 1) * self.h

    def __call__(self, t):
        return eval_pp(self, t)


def eval_pp(pp, t):
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    out = np.empty_like(t)

    inside = np.abs(t) <= pp.span
    local = t[inside] / pp.h
    k = np.clip(np.floor(local).astype(int), -pp.n, pp.n - 1)
    s = local - k
    coeffs = pp.coeffs[k + pp.n]
    value = coeffs[:, -1].copy()
    for i in range(pp.r0 - 2, -1, -1):
        value = value * s + coeffs[:, i]
    out[inside] = value

    above, below = t > pp.span, t < -pp.span
    if above.any():
        out[above] = pp.right(t[above])
    if below.any():
        out[below] = pp.left(t[below])
    return float(out[0]) if scalar else out


def quasi_interpolant(values, h, r0, taylor_order=None):
    """
    Build Q_h g from 'values' = g(i h), i = -n..n.

    'taylor_order' of the endpoint extrapolants defaults to r0 - 2, which is the
    largest integer below r when r0 = ceil(r) + 1.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size % 2 == 0:
        raise ParameterError("Quasi-interpolant needs 2n+1 knot values, got shape {}.".format(values.shape))
    if h <= 0:
        raise ParameterError("Knot spacing must be positive, got {!r}.".format(h))
    if r0 < 2:
        raise ParameterError("Window size r0 must be at least 2, got {!r}.".format(r0))
    n = (values.size - 1) // 2
    if n < r0:
        raise ParameterError("Too few knots: n={} is below r0={}.".format(n, r0))
    m = r0 - 2 if taylor_order is None else taylor_order
    if not 0 <= m < values.size:
        raise ParameterError("Taylor order {} is out of range.".format(m))

    coeffs = np.empty((2 * n, r0))
    for k in range(-n, n):
        start = _window_start(k, n, r0)
        coeffs[k + n] = _local_basis(r0, start - k) @ values[start + n:start + n + r0]
    coeffs.setflags(write=False)

    left = _taylor_data(values[:m + 1], m, h, -n * h)
    right = endpoint_derivative_estimates(values[::-1][:m + 1], m, h, t0=n * h)
    log.debug("Quasi-interpolant with n=%s, h=%s, r0=%s, taylor order %s.", n, h, r0, m)
    return PiecewisePolynomial(h=float(h), n=n, r0=r0, coeffs=coeffs, left=left, right=right)
