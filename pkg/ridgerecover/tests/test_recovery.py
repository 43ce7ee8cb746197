# -*- coding: utf-8 -*-
import math
import unittest

import numpy as np

from ridgerecover.adversary import FoolingVector, fooling_instance
from ridgerecover.core import (
    BudgetExhausted, ParameterError, Profile, RidgeFunction, constant_function, draw_profile, linear_profile, p_norm,
    random_ridge_vector, sign, sine_profile,
)
from ridgerecover.estimate import sup_error_estimate
from ridgerecover.recovery import (
    ConstantModel, DegenerateSlope, FoundSlope, NoLargeSlope, RecoveryError, RidgeModel, VertexSetTooLarge,
    best_s_term_error, build_vertex_set, default_C_r, exact_sample_count, hit_membership, nominal_sample_count,
    recover, scenario_b_bound, select_parameters, step1_scan, step2_bisect, step3_direction, step4_profile,
)
from ridgerecover.testhelpers import (
    TEST_C_R, TEST_SPLINE_CONSTANT, linear_instance, make_oracle, make_params, sine_instance,
)


class TestSelectParameters(unittest.TestCase):

    def test_bisection_depth(self):
        params = select_parameters(2.0, 1.0, 1, 4, 0.1, 0.1, C_r=10.0, c_r_spline=0.1)
        self.assertEqual(params.n_g, 10)
        self.assertEqual(params.rho, 1.0)
        self.assertEqual(params.n_b, 11)

    def test_sparsity_and_vertex_counts(self):
        randomized = select_parameters(2.0, 0.5, 1, 64, 0.1, 0.05, 'randomized', C_r=1.0, c_r_spline=0.1)
        self.assertEqual(randomized.s, 4)
        self.assertEqual(randomized.n_v, 48)
        derandomized = select_parameters(2.0, 0.5, 1, 64, 0.1, 0.05, 'derandomized', C_r=1.0, c_r_spline=0.1)
        self.assertEqual(derandomized.n_v, 240)
        exhaustive = select_parameters(2.0, 0.5, 1, 12, 0.1, 0.05, 'exhaustive', C_r=1.0, c_r_spline=0.1)
        self.assertEqual(exhaustive.n_v, 2 ** 12)

    def test_full_sparsity_at_p_one(self):
        params = make_params(d=9, p=1.0)
        self.assertEqual(params.s, 9)

    def test_grid_covers_window(self):
        params = make_params(epsilon=0.9, r0=5)
        self.assertGreaterEqual(params.n_g, 5)
        self.assertGreaterEqual(params.n_g, math.ceil((max(10 * TEST_SPLINE_CONSTANT, TEST_C_R) / 0.9) ** 0.5))

    def test_defaults(self):
        params = select_parameters(2.0, 1.0, 1, 4, 0.1, 0.1)
        self.assertEqual(params.r0, 3)
        self.assertEqual(params.C_r, default_C_r(2.0, params.c_r_spline))
        self.assertGreaterEqual(params.C_r, 2 + 4 * params.c_r_spline + 2)

    def test_domain_errors(self):
        for args in [(1.0, 1.0, 1, 4), (2.0, 0.0, 1, 4), (2.0, 1.0, 4, 4), (2.0, 1.0, 0, 4)]:
            with self.assertRaises(ParameterError):
                select_parameters(*args, epsilon=0.1, delta=0.1)
        with self.assertRaises(ParameterError):
            select_parameters(2.0, 1.0, 1, 4, 1.0, 0.1)
        with self.assertRaises(ParameterError):
            select_parameters(2.0, 1.0, 1, 4, 0.1, 0.1, mode='bogus')


class TestVertexSet(unittest.TestCase):

    def test_exhaustive(self):
        V = build_vertex_set(2, 4, seed=0)
        self.assertEqual(sorted(map(tuple, V)), [(-1, -1), (-1, 1), (1, -1), (1, 1)])

    def test_replay(self):
        np.testing.assert_array_equal(build_vertex_set(64, 48, seed=99), build_vertex_set(64, 48, seed=99))
        self.assertEqual(build_vertex_set(64, 48, seed=99).shape, (48, 64))

    def test_uniform_first_coordinate(self):
        sigma = math.sqrt(0.25 / 10000)
        for seed in range(5):
            V = build_vertex_set(16, 10000, seed=seed)
            frequency = np.mean(V[:, 0] == 1.0)
            self.assertLess(abs(frequency - 0.5), 4 * sigma)

    def test_too_large(self):
        with self.assertRaises(VertexSetTooLarge):
            build_vertex_set(30, 2 ** 23, seed=0)
        with self.assertRaises(ParameterError):
            build_vertex_set(3, 0, seed=0)


class TestStep1(unittest.TestCase):

    def test_zero_function(self):
        V = build_vertex_set(3, 8, seed=0)
        outcome = step1_scan(make_oracle(constant_function(0.0, 3)), V, 4, 2.0)
        self.assertEqual(outcome.variant, NoLargeSlope(0.0, 0.0))
        self.assertEqual(outcome.scanned, 8)
        self.assertEqual(len(outcome.all_samples), 8 * 9)

    def test_linear_slope_found(self):
        f = linear_instance([0.5, -0.3, 0.2])
        V = [sign(f.a), np.ones(3)]
        oracle = make_oracle(f)
        outcome = step1_scan(oracle, V, 4, 2.0)
        self.assertIsInstance(outcome.variant, FoundSlope)
        self.assertAlmostEqual(outcome.variant.L_v, 1.0)
        self.assertEqual(outcome.scanned, 1)
        self.assertEqual(oracle.samples_used, 9)

    def test_fooling_instance_outside_hit(self):
        fv = FoolingVector(a=np.full(4, 0.25), s=4, p=1.0, tries_used=1)
        f = fooling_instance(fv, 2.0)
        V = [np.array([1.0, 1.0, -1.0, -1.0]), np.array([1.0, -1.0, 1.0, -1.0])]
        outcome = step1_scan(make_oracle(f), V, 4, 2.0)
        self.assertEqual(outcome.variant, NoLargeSlope(0.0, 0.0))

    def test_budget(self):
        with self.assertRaises(BudgetExhausted):
            step1_scan(make_oracle(constant_function(0.0, 2), budget=10), build_vertex_set(2, 4, 0), 4, 2.0)


class TestStep2(unittest.TestCase):

    def test_linear_quotient_is_preserved(self):
        f = linear_instance([0.6, 0.4])
        v = np.array([1.0, -1.0])
        bisection = step2_bisect(make_oracle(f), v, 1, 4, 6)
        self.assertAlmostEqual(bisection.quotient, abs(f.a @ v))
        self.assertAlmostEqual(bisection.delta, 0.25 / 2 ** 6 / 2)

    def test_no_halving(self):
        t_mid, delta = step2_bisect(make_oracle(linear_instance([1.0, 1.0])), np.ones(2), 0, 4, 0)
        self.assertEqual(t_mid, 0.125)
        self.assertEqual(delta, 0.125)

    def test_convex_profile_keeps_right_halves(self):
        square = Profile(evaluate=np.square, r=2.0)
        f = RidgeFunction(square, [0.5, 0.5])
        h = 0.25
        bisection = step2_bisect(make_oracle(f), np.ones(2), 0, 4, 3)
        self.assertAlmostEqual(bisection.t_mid, 15 * h / 16)
        self.assertGreaterEqual(bisection.quotient, h)

    def test_endpoints_come_from_the_ledger(self):
        f = linear_instance([0.6, 0.4])
        v = np.ones(2)
        oracle = make_oracle(f)
        outcome = step1_scan(oracle, [v], 4, 2.0)
        before = oracle.samples_used
        step2_bisect(oracle, v, outcome.variant.j, 4, 5)
        self.assertEqual(oracle.samples_used - before, 5)


class TestStep3(unittest.TestCase):

    def test_linear_profile_is_exact(self):
        a = np.array([0.4, -0.35, 0.25])
        f = linear_instance(a)
        for v in (np.ones(3), -np.ones(3)):
            a_hat = step3_direction(make_oracle(f), v, 0.1, 0.01)
            np.testing.assert_allclose(a_hat, sign(a @ v) * a, rtol=0, atol=1e-9)
            self.assertAlmostEqual(np.abs(a_hat).sum(), 1.0, places=12)

    def test_interval_at_the_cube_boundary(self):
        a = np.array([0.4, -0.35, 0.25])
        oracle = make_oracle(linear_instance(a))
        delta = 1 / 3 / 2 ** 7
        a_hat = step3_direction(oracle, np.ones(3), 1 - delta, delta)
        np.testing.assert_allclose(a_hat, a, rtol=0, atol=1e-9)
        self.assertEqual(oracle.samples_used, 3 + 3)

    def test_degenerate(self):
        with self.assertRaises(DegenerateSlope):
            step3_direction(make_oracle(constant_function(0.2, 3)), np.ones(3), 0.1, 0.01)

    def test_sine_direction(self):
        rng = np.random.default_rng(21)
        epsilon = 0.1
        params = make_params(d=8, epsilon=epsilon, mode='exhaustive')
        for _ in range(5):
            a = random_ridge_vector(8, 1.0, 1, rng)
            f = sine_instance(a, frequency=2.0, phase=rng.uniform(-1, 1))
            result = recover(make_oracle(f), params)
            if result.scenario != 'A':
                continue
            v = np.array(result.diagnostics['v'])
            error = np.abs(sign(a @ v) * result.model.direction - a / np.abs(a).sum()).sum()
            self.assertLessEqual(error, epsilon / 3)

    def test_direction_guarantee(self):
        # Profiles with |g'| >= 0.1 on [-1, 1].
        rng = np.random.default_rng(2024)
        epsilon = 0.1
        params = make_params(d=8, epsilon=epsilon, mode='exhaustive')
        violations = 0
        for _ in range(100):
            slope, wiggle, phase = rng.uniform(0.3, 0.5), rng.uniform(0.0, 0.1), rng.uniform(-np.pi, np.pi)
            g = Profile(evaluate=lambda t, c=slope, w=wiggle, ph=phase: c * t + w * np.sin(2 * t + ph), r=2.0)
            a = random_ridge_vector(8, 1.0, 1, rng)
            result = recover(make_oracle(RidgeFunction(g, a)), params)
            self.assertEqual(result.scenario, 'A')
            v = np.array(result.diagnostics['v'])
            error = np.abs(sign(a @ v) * result.model.direction - a / np.abs(a).sum()).sum()
            violations += error > epsilon / 3
        self.assertEqual(violations, 0)


class TestStep4(unittest.TestCase):

    def test_constant(self):
        g_hat = step4_profile(make_oracle(constant_function(0.3, 4)), np.full(4, 0.25), 4)
        np.testing.assert_allclose(g_hat(np.linspace(-1, 1, 101)), 0.3, rtol=0, atol=1e-12)

    def test_linear_with_exact_direction(self):
        a = np.array([0.3, 0.2])
        f = RidgeFunction(draw_profile('linear', 2.0, np.random.default_rng(0)), a)
        g_hat = step4_profile(make_oracle(f), a / np.abs(a).sum(), 4)
        t = np.linspace(-1, 1, 101)
        np.testing.assert_allclose(g_hat(t), f.profile(0.5 * t), rtol=0, atol=1e-12)

    def test_spline_error_on_composed_profile(self):
        a = np.array([0.5, -0.25, 0.25])
        f = sine_instance(a, frequency=2.0, phase=0.4)
        n_g = 8
        g_hat = step4_profile(make_oracle(f), a, n_g, r0=3)
        t = np.linspace(-1, 1, 2001)
        error = np.abs(g_hat(t) - f.profile(t)).max()
        self.assertLessEqual(error, TEST_SPLINE_CONSTANT * n_g ** -2)


class TestRecover(unittest.TestCase):

    def test_constant_function(self):
        params = make_params(d=4)
        oracle = make_oracle(constant_function(0.3, 4))
        result = recover(oracle, params)
        self.assertEqual(result.scenario, 'B')
        self.assertEqual(result.model, ConstantModel(0.3))
        self.assertEqual(result.samples_used, oracle.samples_used)
        self.assertEqual(result.samples_used, exact_sample_count(params, result.diagnostics['scanned'], 'B'))

    def test_linear_function(self):
        params = make_params(d=5, epsilon=0.1, mode='exhaustive')
        f = linear_instance([0.3, -0.1, 0.25, 0.05, -0.3])
        oracle = make_oracle(f, budget=params.worst_case_samples())
        result = recover(oracle, params)
        self.assertEqual(result.scenario, 'A')
        self.assertIsInstance(result.model, RidgeModel)
        self.assertLessEqual(sup_error_estimate(f, result, resolution=100, random_probes=200).value, 0.1)
        self.assertEqual(result.samples_used, len(oracle.ledger))
        self.assertEqual(result.samples_used, result.diagnostics['exact_count'])
        self.assertEqual(result.diagnostics['refusals'], [])

    def test_fooling_instance_forces_scenario_b(self):
        fv = FoolingVector(a=np.full(4, 0.25), s=4, p=1.0, tries_used=1)
        f = fooling_instance(fv, 2.0)
        V = [np.array([1.0, 1.0, -1.0, -1.0]), np.array([-1.0, 1.0, 1.0, -1.0])]
        result = recover(make_oracle(f), make_params(d=4), vertices=iter(V))
        self.assertEqual(result.scenario, 'B')
        self.assertEqual(result.model, ConstantModel(0.0))
        estimate = sup_error_estimate(f, result, resolution=100, random_probes=0)
        self.assertAlmostEqual(estimate.value, 0.25)

    def test_flat_instances_respect_scenario_b_bound(self):
        params = make_params(d=8, p=0.5, S=1, epsilon=0.05)
        self.assertEqual((params.s, params.n_g), (5, 5))
        bound = scenario_b_bound(params)
        for seed in range(6):
            rng = np.random.default_rng(seed)
            a = random_ridge_vector(8, 0.5, 1, rng)
            if seed % 2:
                profile = sine_profile(frequency=1.0, amplitude=0.035, phase=rng.uniform(-1, 1))
            else:
                profile = linear_profile(slope=0.035)
            f = RidgeFunction(profile, a, p=0.5, S=1)
            V = [rng.choice([-1.0, 1.0], 8) for _ in range(3)] + [sign(a)]
            self.assertTrue(any(hit_membership(v, a, params.s) for v in V))
            result = recover(make_oracle(f), params, vertices=iter(V))
            self.assertEqual(result.scenario, 'B')
            self.assertLessEqual(result.diagnostics['max_slope'], params.n_g ** -params.r)
            error = sup_error_estimate(f, result, resolution=100, random_probes=200, seed=seed).value
            self.assertLessEqual(error, bound)

    def test_replay(self):
        params = make_params(d=6, seed=5)
        f = sine_instance([0.2, -0.3, 0.1, 0.1, 0.2, -0.1])
        first, second = make_oracle(f), make_oracle(f)
        one, two = recover(first, params), recover(second, params)
        self.assertEqual(one.diagnostics, two.diagnostics)
        np.testing.assert_array_equal(first.points(), second.points())
        np.testing.assert_array_equal(first.values(), second.values())

    def test_representation_invariance(self):
        # Doubling a and halving the profile argument is exact in floating point.
        params = make_params(d=6, seed=5)
        f = sine_instance([0.2, -0.3, 0.1, 0.1, 0.2, -0.1])
        one, two = recover(make_oracle(f), params), recover(make_oracle(f.rescaled(2.0)), params)
        self.assertEqual(one.scenario, two.scenario)
        self.assertEqual(one.samples_used, two.samples_used)
        self.assertEqual(one.diagnostics, two.diagnostics)
        if one.scenario == 'A':
            np.testing.assert_array_equal(one.model.direction, two.model.direction)
            np.testing.assert_array_equal(one.model.profile.coeffs, two.model.profile.coeffs)

    def test_representation_invariance_up_to_rounding(self):
        params = make_params(d=6, seed=5)
        f = sine_instance([0.2, -0.3, 0.1, 0.1, 0.2, -0.1])
        one = recover(make_oracle(f), params)
        points = np.random.default_rng(0).uniform(-1, 1, size=(50, 6))
        for c in (3.0, 0.7, 1.3):
            two = recover(make_oracle(f.rescaled(c)), params)
            self.assertEqual(one.scenario, two.scenario)
            self.assertEqual(one.samples_used, two.samples_used)
            self.assertEqual(one.diagnostics['scanned'], two.diagnostics['scanned'])
            np.testing.assert_allclose(one.model.evaluate_batch(points), two.model.evaluate_batch(points),
                                       rtol=0, atol=1e-9)
            if one.scenario == 'A':
                np.testing.assert_allclose(one.model.direction, two.model.direction, rtol=0, atol=1e-9)

    def test_error_carries_step(self):
        params = make_params(d=4)
        with self.assertRaises(BudgetExhausted) as context:
            recover(make_oracle(linear_instance([1.0, 1.0, 1.0, 1.0]), budget=5), params)
        self.assertEqual(context.exception.step, 'step1')

        params = make_params(d=2)
        f = linear_instance([0.5, 0.5])
        budget = params.n_g * 2 + 1 + params.n_b
        with self.assertRaises(BudgetExhausted) as context:
            recover(make_oracle(f, budget=budget + 1), params, vertices=iter([np.ones(2)]))
        self.assertEqual(context.exception.step, 'step3')

    def test_model_direction_is_unit(self):
        with self.assertRaises(RecoveryError):
            RidgeModel(profile=None, direction=np.array([0.5, 0.4]))

    def test_end_to_end_sparse_class(self):
        # d = 20, r = 2, p = 1/2, S = 1, epsilon = 0.1, delta = 0.05 over mixed profiles.
        d, epsilon, trials = 20, 0.1, 40
        failures = 0
        for seed in range(trials):
            rng = np.random.default_rng(seed)
            profile = draw_profile('mixed', 2.0, rng, index=seed)
            f = RidgeFunction(profile, random_ridge_vector(d, 0.5, 1, rng), p=0.5, S=1)
            params = make_params(d=d, p=0.5, S=1, epsilon=epsilon, delta=0.05, seed=seed)
            oracle = make_oracle(f, budget=params.worst_case_samples())
            result = recover(oracle, params)
            error = sup_error_estimate(f, result, resolution=100, random_probes=200, seed=seed).value
            failures += error > epsilon

            self.assertEqual(result.samples_used, oracle.samples_used)
            self.assertEqual(result.samples_used, exact_sample_count(params, result.diagnostics['scanned'],
                                                                     result.scenario))
            self.assertLessEqual(result.samples_used, 3 * nominal_sample_count(params))
        self.assertLessEqual(failures / trials, 0.125)


class TestAccounting(unittest.TestCase):

    def test_counts(self):
        params = make_params(d=6)
        self.assertEqual(nominal_sample_count(params), params.n_v * params.n_g + params.n_g + params.n_b + 6)
        per_vertex = 2 * params.n_g + 1
        self.assertEqual(exact_sample_count(params, 3, 'B'), 3 * per_vertex)
        self.assertEqual(exact_sample_count(params, 3, 'A'), 4 * per_vertex + params.n_b + 6 + 3)
        self.assertEqual(params.worst_case_samples(),
                         params.num_vertices * per_vertex + params.n_b + 6 + per_vertex + 4)

    def test_scenario_a_count_by_step(self):
        params = make_params(d=5)
        f = linear_instance([0.3, -0.1, 0.25, 0.05, -0.3])
        v = np.array([1.0, -1.0, 1.0, 1.0, -1.0])
        oracle = make_oracle(f)
        outcome = step1_scan(oracle, [v], params.n_g, params.r)
        spent = [oracle.samples_used]
        t_mid, delta = step2_bisect(oracle, v, outcome.variant.j, params.n_g, params.n_b)
        spent.append(oracle.samples_used)
        a_hat = step3_direction(oracle, v, t_mid, delta)
        spent.append(oracle.samples_used)
        step4_profile(oracle, a_hat, params.n_g, params.r0)
        spent.append(oracle.samples_used)
        self.assertEqual(np.diff(spent).tolist(), [params.n_b, params.d + 3, 2 * params.n_g + 1])
        self.assertEqual(oracle.samples_used, exact_sample_count(params, 1, 'A'))

    def test_scenario_b_bound(self):
        params = select_parameters(2.0, 0.5, 1, 64, 0.1, 0.05, C_r=1.0, c_r_spline=0.1)
        c_tilde = 2 + 4 * 0.1 + 2
        expected = c_tilde * max((4 / 1) ** (1 - 2), 1 / params.n_g) ** 2
        self.assertAlmostEqual(scenario_b_bound(params), expected)


class TestSparsity(unittest.TestCase):

    def test_hit_membership(self):
        a = np.array([0.6, -0.4])
        self.assertTrue(hit_membership(sign(a), a, 2))
        self.assertTrue(hit_membership([1.0, 1.0], a, 1))
        self.assertFalse(hit_membership([1.0, 1.0], a, 2))
        with self.assertRaises(ParameterError):
            hit_membership([1.0, 1.0], a, 3)

    def test_hit_ties_use_lowest_index(self):
        a = np.array([0.5, -0.5, 0.0])
        self.assertTrue(hit_membership([1.0, 1.0, 1.0], a, 1))
        self.assertFalse(hit_membership([-1.0, -1.0, 1.0], a, 1))

    def test_best_s_term_error(self):
        self.assertAlmostEqual(best_s_term_error([0.5, 0.3, 0.2], 1), 0.5)
        self.assertEqual(best_s_term_error([0.5, 0.3, 0.2], 3), 0.0)

    def test_best_s_term_bound(self):
        rng = np.random.default_rng(1)
        for _ in range(1000):
            a = rng.standard_normal(16) * rng.uniform(0, 1, 16) ** 4
            a /= p_norm(a, 0.5)
            self.assertLessEqual(best_s_term_error(a, 4), 0.25 + 1e-12)

    def test_hit_gap(self):
        rng = np.random.default_rng(7)
        d = 32
        violations = 0
        for _ in range(1000):
            p = rng.choice([1 / 3, 0.5, 1.0])
            s = int(rng.integers(1, d + 1))
            a = rng.standard_normal(d) * rng.uniform(0, 1, d) ** 3
            a *= rng.uniform(0.1, 1.0) / p_norm(a, p)
            top = np.argsort(-np.abs(a), kind='stable')[:s]
            v = rng.choice([-1.0, 1.0], d)
            v[top] = sign(a[top])
            self.assertTrue(hit_membership(v, a, s))
            gap = np.abs(a).sum() - abs(a @ v)
            if not -1e-12 <= gap <= 2 * best_s_term_error(a, s) + 1e-12:
                violations += 1
            if gap > 2 * s ** (1 - 1 / p) + 1e-12:
                violations += 1
        self.assertEqual(violations, 0)


if __name__ == '__main__':
    unittest.main()
