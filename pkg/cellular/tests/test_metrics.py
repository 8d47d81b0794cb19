import math
import unittest
from unittest.mock import patch

import numpy as np

from cellular.exceptions import InvalidParameterError
from cellular.services import metrics
from cellular.services.interference import NetworkModel
from cellular.services.metrics import AsepMethod, RetxConfig
from cellular.services.schemes import Exactness, GammaParams, Miso, Ostbc, Sdma, Simo, Siso, SmMimo, ZfRx, qam

LIMITED = NetworkModel(1e-5)


def siso_outage(theta, p=1.0):
    root = math.sqrt(theta)
    return 1.0 - 1.0 / (1.0 + p * root * math.atan(root))


class OutageTests(unittest.TestCase):
    def test_siso_closed_form(self):
        for theta_db in (0.0, 10.0):
            theta = 10.0 ** (theta_db / 10.0)
            with self.subTest(theta_db=theta_db):
                res = metrics.outage(LIMITED, Siso().gamma_params(), theta)
                self.assertAlmostEqual(res.value, siso_outage(theta), places=7)
                self.assertFalse(res.failed)

    def test_siso_closed_form_with_partial_load(self):
        net = NetworkModel(1e-5, p=0.5)
        self.assertAlmostEqual(metrics.outage(net, Siso().gamma_params(), 10.0).value, siso_outage(10.0, 0.5),
                               places=7)

    def test_independent_of_density_and_power(self):
        gp = ZfRx(2, 5).gamma_params()
        base = metrics.outage(LIMITED, gp, 2.0).value
        self.assertAlmostEqual(metrics.outage(NetworkModel(4e-5, power=100.0), gp, 2.0).value, base, places=9)

    def test_diversity_lowers_outage(self):
        values = [metrics.outage(LIMITED, GammaParams(m_o, 1, 1), 1.0).value for m_o in (1, 2, 3)]
        self.assertTrue(values[0] > values[1] > values[2] > 0.0)

    def test_heavier_interferers_raise_outage(self):
        self.assertLess(metrics.outage(LIMITED, GammaParams(2, 1, 1), 1.0).value,
                        metrics.outage(LIMITED, GammaParams(2, 3, 3), 1.0).value)

    def test_increasing_in_threshold(self):
        gp = Simo(3).gamma_params()
        values = [metrics.outage(LIMITED, gp, t).value for t in metrics.sir_grid([-5.0, 0.0, 5.0, 10.0])]
        self.assertTrue(all(np.diff(values) > 0))

    def test_approximate_scheme_is_flagged(self):
        self.assertIs(metrics.outage(LIMITED, Sdma(5, 3).gamma_params(), 1.0).exactness, Exactness.APPROXIMATE)

    def test_laplace_inversion_beyond_jet_cap(self):
        gp = Simo(3).gamma_params()
        jet_value = metrics.outage(LIMITED, gp, 1.0).value
        with patch("cellular.services.metrics.max_jet_order", return_value=1):
            res = metrics.outage(LIMITED, gp, 1.0)
        self.assertAlmostEqual(res.value, jet_value, delta=0.02)
        self.assertTrue(any("Laplace inversion" in d for d in res.diagnostics))

    def test_rejects_non_positive_threshold(self):
        with self.assertRaises(InvalidParameterError):
            metrics.outage(LIMITED, Siso().gamma_params(), 0.0)

    def test_sir_grid(self):
        np.testing.assert_allclose(metrics.sir_grid([0.0, 10.0, -10.0]), [1.0, 10.0, 0.1])


class RateTests(unittest.TestCase):
    def test_siso_rate_in_nats(self):
        self.assertAlmostEqual(metrics.ergodic_rate(LIMITED, Siso().gamma_params()).value / 1.48899, 1.0, delta=5e-3)

    def test_per_cell_rates_in_bits(self):
        cases = [(Simo(2), 2.9523), (Miso(2), 2.9523), (Ostbc(2, 2, 2, 2), 2.9771),
                 (ZfRx(2, 2), 3.1644), (Sdma(2, 2), 3.1644)]
        for scheme, expected in cases:
            with self.subTest(scheme=scheme):
                res = metrics.ergodic_rate(LIMITED, scheme.gamma_params(), per_cell=True, bits=True)
                self.assertAlmostEqual(res.value / expected, 1.0, delta=5e-3)

    def test_bits_and_cell_factors(self):
        gp = ZfRx(2, 2).gamma_params()
        nats = metrics.ergodic_rate(LIMITED, gp).value
        self.assertAlmostEqual(metrics.ergodic_rate(LIMITED, gp, per_cell=True, bits=True).value,
                               2.0 * nats / math.log(2.0), places=10)


class AsepTests(unittest.TestCase):
    def test_cell_throughput_of_2x2_setups(self):
        cases = [(ZfRx(2, 2), 4, 2.63), (Ostbc(2, 2, 2, 2), 4, 1.7228), (Simo(2), 4, 1.6926),
                 (Siso(), 4, 1.4780), (Siso(), 16, 1.6936)]
        for scheme, M, expected in cases:
            with self.subTest(scheme=scheme, M=M):
                gp = scheme.gamma_params()
                mod = qam(M)
                tput = metrics.cell_throughput(metrics.asep(LIMITED, gp, mod).value, mod, gp)
                self.assertAlmostEqual(tput / expected, 1.0, delta=0.015)

    def test_between_zero_and_worst_case(self):
        mod = qam(16)
        value = metrics.asep(LIMITED, Siso().gamma_params(), mod).value
        self.assertGreater(value, 0.0)
        self.assertLess(value, mod.w1 + mod.w2)

    def test_jensen_overestimates_slightly(self):
        gp = Simo(2).gamma_params()
        mod = qam(16)
        exact = metrics.asep(LIMITED, gp, mod, AsepMethod.EXACT).value
        jensen = metrics.asep(LIMITED, gp, mod, "jensen").value
        self.assertGreaterEqual(jensen - exact, 0.0)
        self.assertLessEqual(jensen - exact, 0.05)

    def test_jensen_stays_finite_at_high_diversity(self):
        mod = qam(16)
        for m_o, m_i in ((16, 16), (50, 1), (64, 1), (64, 64)):
            with self.subTest(m_o=m_o, m_i=m_i):
                res = metrics.asep(LIMITED, GammaParams(m_o, m_i, m_i), mod, AsepMethod.JENSEN)
                self.assertFalse(res.failed)
                self.assertTrue(math.isfinite(res.value))
                self.assertGreaterEqual(res.value, 0.0)
                self.assertLessEqual(res.value, 1.0)

    def test_jensen_keeps_falling_with_diversity(self):
        mod = qam(4)
        values = [metrics.asep(LIMITED, GammaParams(m_o, 1, 1), mod, "jensen").value for m_o in (8, 32, 64)]
        self.assertTrue(values[0] > values[1] > values[2])

    def test_non_finite_integrand_becomes_failed_result(self):
        with patch("cellular.services.metrics.damped_kummer_1f1", return_value=math.inf):
            res = metrics.asep(LIMITED, Siso().gamma_params(), qam(4), AsepMethod.JENSEN)
        self.assertTrue(res.failed)
        self.assertTrue(math.isnan(res.value))

    def test_auto_switches_to_jensen_for_high_diversity(self):
        with patch("cellular.services.metrics.setting", return_value=1):
            res = metrics.asep(LIMITED, Simo(2).gamma_params(), qam(4))
        self.assertTrue(any("Jensen" in d for d in res.diagnostics))

    def test_diversity_lowers_asep(self):
        mod = qam(4)
        values = [metrics.asep(LIMITED, GammaParams(m_o, 1, 1), mod).value for m_o in (1, 2, 3)]
        self.assertTrue(values[0] > values[1] > values[2])

    def test_noise_raises_asep(self):
        mod = qam(4)
        gp = Siso().gamma_params()
        noisy = NetworkModel(1e-5, power=1e-3, n0=1e-12)
        self.assertGreater(metrics.asep(noisy, gp, mod, "jensen").value,
                           metrics.asep(LIMITED, gp, mod, "jensen").value)

    def test_throughput(self):
        self.assertAlmostEqual(metrics.throughput(0.25, qam(4)), 1.5)
        self.assertAlmostEqual(metrics.cell_throughput(0.25, qam(4), ZfRx(2, 2).gamma_params()), 3.0)
        with self.assertRaises(InvalidParameterError):
            metrics.throughput(1.5, qam(4))


class SpatialMultiplexingTests(unittest.TestCase):
    def test_pairwise_error_decreases_with_distance(self):
        scheme = SmMimo(2, 2)
        mod = qam(4)
        values = [metrics.apep_sm(LIMITED, scheme, mod, d).value for d in (0.5, 1.0, 2.0)]
        self.assertTrue(values[0] > values[1] > values[2] > 0.0)
        self.assertLess(values[0], 0.5)

    def test_infinitely_distant_codewords(self):
        self.assertEqual(metrics.apep_sm(LIMITED, SmMimo(2, 2), qam(4), math.inf).value, 0.0)

    def test_rejects_zero_distance(self):
        with self.assertRaises(InvalidParameterError):
            metrics.apep_sm(LIMITED, SmMimo(2, 2), qam(4), 0.0)

    def test_nearest_neighbour_composition(self):
        scheme = SmMimo(2, 2)
        mod = qam(16)
        pep = metrics.apep_sm(LIMITED, scheme, mod, mod.d_min).value
        self.assertAlmostEqual(metrics.asep_sm(LIMITED, scheme, mod).value, min(1.0, mod.mean_neighbours * pep), places=12)


class RetransmissionTests(unittest.TestCase):
    def test_single_attempt_is_plain_coverage(self):
        gp = Simo(2).gamma_params()
        res = metrics.coverage_retx(RetxConfig(gp, None, 1.0, LIMITED))
        self.assertAlmostEqual(res.value, metrics.coverage(LIMITED, gp, 1.0).value, places=6)

    def test_independent_mode(self):
        gp = Siso().gamma_params()
        c = metrics.coverage(LIMITED, gp, 1.0).value
        res = metrics.coverage_retx(RetxConfig(gp, gp, 1.0, LIMITED), "independent")
        self.assertAlmostEqual(res.value, 2.0 * c - c * c, places=9)

    def test_correlation_costs_diversity(self):
        for p in (0.5, 1.0):
            net = NetworkModel(1e-5, p=p)
            first = Siso().gamma_params()
            second = Simo(2).gamma_params()
            cfg = RetxConfig(first, second, 1.0, net)
            correlated = metrics.coverage_retx(cfg).value
            independent = metrics.coverage_retx(cfg, "independent").value
            c2 = metrics.coverage(net, second, 1.0).value
            with self.subTest(p=p):
                self.assertGreaterEqual(correlated, c2)
                self.assertLessEqual(correlated, independent + 1e-9)

    def test_diverse_slots_in_both_modes(self):
        gp = GammaParams(2, 2, 2)
        c = metrics.coverage(LIMITED, gp, 1.0).value
        for mode in metrics.COMPARE_MODES:
            with self.subTest(mode=mode):
                res = metrics.coverage_retx(RetxConfig(gp, gp, 1.0, LIMITED), mode)
                self.assertFalse(res.failed)
                self.assertTrue(math.isfinite(res.value))
                self.assertGreaterEqual(res.value, c - 1e-9)
                self.assertLessEqual(res.value, 2.0 * c + 1e-9)
        independent = metrics.coverage_retx(RetxConfig(gp, gp, 1.0, LIMITED), "independent").value
        self.assertAlmostEqual(independent, 2.0 * c - c * c, places=9)

    def test_second_slot_diversity_sweep(self):
        first = Siso().gamma_params()
        values = []
        for m_o in (2, 3, 4, 5):
            res = metrics.coverage_retx(RetxConfig(first, GammaParams(m_o, 1, 1), 1.0, LIMITED))
            self.assertFalse(res.failed)
            self.assertTrue(math.isfinite(res.value))
            values.append(res.value)
        self.assertTrue(all(a < b for a, b in zip(values, values[1:])))

    def test_exactness_combines_both_slots(self):
        cfg = RetxConfig(Siso().gamma_params(), Sdma(3, 2).gamma_params(), 1.0, LIMITED)
        self.assertIs(metrics.coverage_retx(cfg).exactness, Exactness.APPROXIMATE)

    def test_rejects_bad_input(self):
        gp = Siso().gamma_params()
        with self.assertRaises(InvalidParameterError):
            RetxConfig(gp, gp, 0.0, LIMITED)
        with self.assertRaises(InvalidParameterError):
            metrics.coverage_retx(RetxConfig(gp, gp, 1.0, LIMITED), "fading")
