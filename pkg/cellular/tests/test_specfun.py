import math
import unittest

import numpy as np
from scipy import special as sp_special

from cellular.exceptions import InvalidParameterError, NonFiniteIntegrandError, UnsupportedKernelError
from cellular.services.specfun import (
    BiJet,
    Jet,
    QuadratureSpec,
    binomial_coeffs,
    damped_kummer_1f1 as damped_1f1,
    erfc,
    gauss_2f1,
    gaver_stehfest,
    integrate,
    integrate_vec,
    jet_lift,
    kummer_1f1,
)


class IntegrateTests(unittest.TestCase):
    def test_finite_interval(self):
        res = integrate(lambda x: x * x, 0.0, 1.0)
        self.assertTrue(res.converged)
        self.assertAlmostEqual(res.value, 1.0 / 3.0, places=12)

    def test_semi_infinite_interval(self):
        res = integrate(lambda x: math.exp(-x), 0.0, math.inf)
        self.assertAlmostEqual(res.value, 1.0, places=10)

    def test_semi_infinite_with_scale(self):
        # Gaussian of width 1000 needs the midpoint moved out
        res = integrate(lambda x: math.exp(-(x / 1000.0) ** 2), 0.0, math.inf, scale=1000.0)
        self.assertAlmostEqual(res.value / (500.0 * math.sqrt(math.pi)), 1.0, places=9)

    def test_result_unpacks(self):
        value, err = integrate(lambda x: 1.0, 0.0, 2.0)
        self.assertAlmostEqual(value, 2.0)
        self.assertGreaterEqual(err, 0.0)

    def test_linearity(self):
        f = lambda x: math.exp(-x) * math.cos(x)
        g = lambda x: 1.0 / (1.0 + x * x)
        combined = integrate(lambda x: 2.0 * f(x) - 3.0 * g(x), 0.0, math.inf).value
        separate = 2.0 * integrate(f, 0.0, math.inf).value - 3.0 * integrate(g, 0.0, math.inf).value
        self.assertAlmostEqual(combined, separate, places=6)
        self.assertAlmostEqual(separate, 1.0 - 1.5 * math.pi, places=6)

    def test_non_finite_integrand_raises(self):
        with self.assertRaises(NonFiniteIntegrandError):
            integrate(lambda x: math.inf, 0.0, 1.0)

    def test_budget_exhaustion_is_flagged_not_raised(self):
        spec = QuadratureSpec(rel_tol=1e-10, abs_tol=1e-300, max_subdivisions=1)
        res = integrate(lambda x: math.sin(50.0 * x) ** 2, 0.0, 10.0, spec)
        self.assertFalse(res.converged)
        self.assertTrue(res.message)

    def test_invalid_tolerances(self):
        with self.assertRaises(InvalidParameterError):
            QuadratureSpec(rel_tol=0.0)

    def test_vector_integrand(self):
        values, _err, ok = integrate_vec(lambda x: np.array([math.exp(-x), x * math.exp(-x)]), 0.0, math.inf)
        self.assertTrue(ok)
        np.testing.assert_allclose(values, [1.0, 1.0], rtol=1e-9)


class HypergeometricTests(unittest.TestCase):
    def test_2f1_matches_scipy(self):
        cases = [
            (-0.5, 1.0, 0.5, -1.0),
            (-0.5, 2.0, 0.5, -0.3),
            (-0.5, 3.0, 0.5, -50.0),
            (-0.4, 2.0, 0.6, -1e4),
            (-0.5, 1.5, 0.5, -1.5),
            (0.7, 1.2, 2.5, 0.6),
        ]
        for a, b, c, x in cases:
            with self.subTest(a=a, b=b, c=c, x=x):
                self.assertAlmostEqual(gauss_2f1(a, b, c, x) / sp_special.hyp2f1(a, b, c, x), 1.0, places=9)

    def test_2f1_arctan_identity(self):
        # 2F1(-1/2, 1; 1/2; -x^2) = 1 + x arctan(x)
        for x in (0.3, 1.0, 7.0):
            self.assertAlmostEqual(gauss_2f1(-0.5, 1.0, 0.5, -x * x), 1.0 + x * math.atan(x), places=10)

    def test_2f1_rejects_bad_arguments(self):
        with self.assertRaises(InvalidParameterError):
            gauss_2f1(0.5, 1.0, 0.0, -1.0)
        with self.assertRaises(InvalidParameterError):
            gauss_2f1(0.5, 1.0, 1.5, 1.0)

    def test_1f1_matches_scipy(self):
        cases = [
            (-2.0, 1.5, 3.0),
            (-5.0, 2.0, 4.0),
            (0.5, 1.5, -3.0),
            (0.5, 2.0, 80.0),
            (1.5, 2.5, 10.0),
        ]
        for a, b, x in cases:
            with self.subTest(a=a, b=b, x=x):
                self.assertAlmostEqual(kummer_1f1(a, b, x) / sp_special.hyp1f1(a, b, x), 1.0, places=8)

    def test_damped_1f1_matches_kummer_transform(self):
        # e^-x 1F1(-n; b; x) = 1F1(b + n; b; -x)
        for n, b, x in ((2, 1.5, 3.0), (5, 2.0, 4.0), (10, 1.5, 12.0), (0, 2.0, 1.0)):
            with self.subTest(n=n, b=b, x=x):
                expected = math.exp(-x) * sp_special.hyp1f1(-n, b, x)
                np.testing.assert_allclose(damped_1f1(n, b, x), expected, rtol=1e-9, atol=1e-15)
                np.testing.assert_allclose(damped_1f1(n, b, x), math.exp(-x) * kummer_1f1(-n, b, x),
                                           rtol=1e-9, atol=1e-15)

    def test_damped_1f1_stays_finite_at_high_degree(self):
        n = 63
        self.assertAlmostEqual(damped_1f1(n, 1.5, 0.0), 1.0, places=10)
        for x in (1.0, 40.0, 250.0, 1e3, 7367.45 ** 2, 1e300):
            with self.subTest(x=x):
                value = damped_1f1(n, 1.5, x)
                self.assertTrue(math.isfinite(value))
                self.assertLessEqual(abs(value), math.exp(min(700.0, n * math.log1p(x) - x)))
        self.assertEqual(damped_1f1(n, 2.0, 5e7), 0.0)

    def test_damped_1f1_rejects_bad_arguments(self):
        for args in ((-1, 1.5, 1.0), (2, 0.5, 1.0), (2, 1.5, -1.0), (2, 1.5, math.inf)):
            with self.subTest(args=args):
                with self.assertRaises(InvalidParameterError):
                    damped_1f1(*args)

    def test_binomial_coefficients_for_negative_integers(self):
        np.testing.assert_allclose(binomial_coeffs(-2.0, 3), [1.0, -2.0, 3.0, -4.0])
        np.testing.assert_allclose(binomial_coeffs(2.0, 3), [1.0, 2.0, 1.0, 0.0])
        np.testing.assert_allclose(binomial_coeffs(0.5, 3), sp_special.binom(0.5, np.arange(4)), rtol=1e-14)

    def test_1f1_at_zero(self):
        self.assertEqual(kummer_1f1(-3.0, 1.5, 0.0), 1.0)

    def test_erfc(self):
        self.assertEqual(erfc(0.0), 1.0)
        self.assertAlmostEqual(erfc(1.0), 0.157299207050285, places=12)


class JetTests(unittest.TestCase):
    def test_exp_of_identity(self):
        jet = Jet.variable(0.5, 4).exp()
        expected = math.exp(0.5) / sp_special.factorial(np.arange(5))
        np.testing.assert_allclose(jet.coeffs, expected, rtol=1e-14)

    def test_power(self):
        jet = Jet([1.0, 1.0, 0.0, 0.0]).power(0.5)
        np.testing.assert_allclose(jet.coeffs, sp_special.binom(0.5, np.arange(4)), rtol=1e-14)

    def test_exp_ring_identity(self):
        jet = Jet([0.3, -1.2, 0.7, 2.0, -0.4], 0.1)
        product = jet.exp() * (-jet).exp()
        np.testing.assert_allclose(product.coeffs, [1.0, 0.0, 0.0, 0.0, 0.0], atol=1e-12)

    def test_power_kernel_with_negative_integer_exponent(self):
        jet = jet_lift("power", 0.0, 3, alpha=1.0, nu=-2.0)
        np.testing.assert_allclose(jet.coeffs, [1.0, -2.0, 3.0, -4.0])

    def test_derivatives_use_factorials(self):
        jet = Jet([1.0, 2.0, 3.0])
        self.assertEqual(jet.derivative(2), 6.0)
        np.testing.assert_allclose(jet.derivatives(), [1.0, 2.0, 6.0])

    def test_product_kernel(self):
        # z e^z = sum z^(k+1) / k!
        jet = jet_lift([("exp", {}), ("affine", {})], 0.0, 3)
        np.testing.assert_allclose(jet.coeffs, [0.0, 1.0, 1.0, 0.5], atol=1e-15)

    def test_power_kernel(self):
        jet = jet_lift("power", 0.3, 3, alpha=2.0, nu=-1.5)
        f = lambda z: (1.0 + 2.0 * z) ** -1.5
        self.assertAlmostEqual(jet.value, f(0.3), places=14)
        self.assertAlmostEqual(jet.derivative(1), -3.0 * (1.6 ** -2.5), places=12)

    def test_hypergeometric_kernel_matches_finite_differences(self):
        a, b, c, z0 = -0.5, 2.0, 0.5, -0.8
        jet = jet_lift("gauss_2f1", z0, 2, a=a, b=b, c=c)
        f = lambda z: gauss_2f1(a, b, c, z)
        h = 1e-3
        first = (f(z0 - 2 * h) - 8 * f(z0 - h) + 8 * f(z0 + h) - f(z0 + 2 * h)) / (12 * h)
        second = (-f(z0 - 2 * h) + 16 * f(z0 - h) - 30 * f(z0) + 16 * f(z0 + h) - f(z0 + 2 * h)) / (12 * h * h)
        self.assertAlmostEqual(jet.derivative(1) / first, 1.0, places=7)
        self.assertAlmostEqual(jet.derivative(2) / second, 1.0, places=5)

    def test_rescaled(self):
        jet = Jet([1.0, 1.0, 1.0]).rescaled(-2.0)
        np.testing.assert_allclose(jet.coeffs, [1.0, -2.0, 4.0])

    def test_unknown_kernel(self):
        with self.assertRaises(UnsupportedKernelError):
            jet_lift("bessel", 0.0, 2)

    def test_mismatched_orders(self):
        with self.assertRaises(InvalidParameterError):
            Jet([1.0, 2.0]) + Jet([1.0, 2.0, 3.0])

    def test_non_finite_coefficients_rejected(self):
        with self.assertRaises(InvalidParameterError):
            Jet([1.0, math.nan])


class BiJetTests(unittest.TestCase):
    def test_exp_of_separable_sum_is_outer_product(self):
        a = Jet([0.2, 0.5, -0.3])
        b = Jet([0.1, 0.4])
        bj = BiJet([[0.3, 0.4], [0.5, 0.0], [-0.3, 0.0]])
        np.testing.assert_allclose(bj.exp().coeffs, BiJet.outer(a.exp(), b.exp()).coeffs, rtol=1e-12, atol=1e-15)

    def test_slice_matches_univariate_exp(self):
        bj = BiJet([[0.1, 0.2, 0.3], [0.4, 0.5, 0.6], [0.7, 0.8, 0.9]])
        np.testing.assert_allclose(bj.exp().slice_z1().coeffs, bj.slice_z1().exp().coeffs, rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(bj.exp().slice_z2().coeffs, bj.slice_z2().exp().coeffs, rtol=1e-12, atol=1e-15)

    def test_exp_commutes_with_transpose(self):
        bj = BiJet([[0.1, -0.2], [0.4, 0.5], [0.7, 0.3]])
        np.testing.assert_allclose(bj.transpose().exp().coeffs, bj.exp().transpose().coeffs, rtol=1e-12, atol=1e-15)

    def test_product(self):
        x = BiJet([[0.0, 0.0], [1.0, 0.0]])
        y = BiJet([[0.0, 1.0], [0.0, 0.0]])
        np.testing.assert_allclose((x * y).coeffs, [[0.0, 0.0], [0.0, 1.0]])

    def test_scaled(self):
        bj = BiJet(np.ones((2, 3))).scaled(2.0, -1.0)
        np.testing.assert_allclose(bj.coeffs, [[1.0, -1.0, 1.0], [2.0, -2.0, 2.0]])


class LaplaceInversionTests(unittest.TestCase):
    def test_exponential(self):
        self.assertAlmostEqual(gaver_stehfest(lambda s: 1.0 / (s + 1.0), 1.0), math.exp(-1.0), places=4)

    def test_unit_step(self):
        self.assertAlmostEqual(gaver_stehfest(lambda s: 1.0 / s, 2.5), 1.0, places=6)

    def test_rejects_odd_order(self):
        with self.assertRaises(InvalidParameterError):
            gaver_stehfest(lambda s: 1.0 / s, 1.0, n=5)
