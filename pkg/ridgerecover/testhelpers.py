# -*- coding: utf-8 -*-
import numpy as np

from ridgerecover.core import (
    RidgeFunction, counting_oracle, draw_profile, linear_profile, random_ridge_vector, sine_profile,
)
from ridgerecover.recovery import select_parameters

DIMENSION = 6
REGULARITY = 2.0
EPSILON = 0.5
DELTA = 0.1
SEED = 7

# Constants small enough to keep test grids coarse.
TEST_C_R = 1.0
TEST_SPLINE_CONSTANT = 0.1


def create_test_instance(d=None, r=None, p=1.0, S=1, family='sine', seed=None):
    """
    Creates a ridge function in the class for (r, p, S) to use for testing.
    The profile is drawn from 'family' and the ridge vector from random_ridge_vector,
    both from a generator seeded with 'seed'.
    """
    d = d or DIMENSION
    r = r or REGULARITY
    rng = np.random.default_rng(SEED if seed is None else seed)
    profile = draw_profile(family, r, rng, index=0 if seed is None else seed)
    a = random_ridge_vector(d, p, S, rng)
    return RidgeFunction(profile, a, p=p, S=S)


def linear_instance(a, slope=1.0, r=None):
    """f(x) = slope * (a . x), with 'a' normalized to unit l1 norm."""
    a = np.asarray(a, dtype=float)
    return RidgeFunction(linear_profile(slope=slope, r=r or REGULARITY), a / np.abs(a).sum())


def sine_instance(a, frequency=2.0, phase=0.3, r=None):
    a = np.asarray(a, dtype=float)
    return RidgeFunction(sine_profile(frequency=frequency, phase=phase, r=r or REGULARITY), a / np.abs(a).sum())


def make_oracle(f, budget=None):
    return counting_oracle(f, budget=budget)


def make_params(d=None, r=None, p=1.0, S=1, epsilon=None, delta=None, mode='randomized', seed=None, **kw):
    """select_parameters with the test constants filled in."""
    kw.setdefault('C_r', TEST_C_R)
    kw.setdefault('c_r_spline', TEST_SPLINE_CONSTANT)
    return select_parameters(
        r or REGULARITY, p, S, d or DIMENSION, epsilon or EPSILON, delta or DELTA, mode,
        seed=SEED if seed is None else seed, **kw
    )
