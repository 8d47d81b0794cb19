import math
import unittest
from unittest.mock import patch

from cellular.exceptions import InfeasibleDesignError, InvalidParameterError
from cellular.services import design, metrics
from cellular.services.interference import NetworkModel
from cellular.services.schemes import SCHEMES, Exactness, GammaParams, SmMimo, ZfRx, qam

LIMITED = NetworkModel(1e-5)
THETA = 1.0


def outage_at(m_o, m_i):
    return metrics.outage(LIMITED, GammaParams(m_o, m_i, m_i), THETA).value


class MinDiversityTests(unittest.TestCase):
    def test_outage_target(self):
        eps = outage_at(3, 1) * 1.001
        self.assertEqual(design.min_diversity(LIMITED, 1, design.MaxOutage(eps, THETA)), 3)

    def test_loose_asep_target(self):
        self.assertEqual(design.min_diversity(LIMITED, 1, design.MaxAsep(0.75, qam(4))), 1)

    def test_unreachable(self):
        with self.assertRaises(InfeasibleDesignError):
            design.min_diversity(LIMITED, 2, design.MaxOutage(1e-9, THETA), max_m_o=3)

    def test_unreachable_asep_up_to_the_diversity_cap(self):
        with self.assertRaises(InfeasibleDesignError):
            design.min_diversity(LIMITED, 1, design.MaxAsep(1e-9, qam(16)))

    def test_constraint_validation(self):
        with self.assertRaises(InvalidParameterError):
            design.MaxOutage(1.0, THETA)
        with self.assertRaises(InvalidParameterError):
            design.MaxOutage(0.1, 0.0)
        with self.assertRaises(InvalidParameterError):
            design.MaxAsep(0.0, qam(4))


class QueryTests(unittest.TestCase):
    def test_validation(self):
        constraint = design.MaxOutage(0.1, THETA)
        with self.assertRaises(InvalidParameterError):
            design.DesignQuery(constraint, 0, LIMITED)
        with self.assertRaises(InvalidParameterError):
            design.DesignQuery(constraint, 1, LIMITED, candidate_schemes=("mimo9000",))
        with self.assertRaises(InvalidParameterError):
            design.DesignQuery(constraint, 1, LIMITED, antenna_budget={"K": 2})

    def test_candidate_tags(self):
        self.assertEqual(design.candidate_tags(None), tuple(SCHEMES))
        self.assertEqual(design.candidate_tags([" ZFRX", "ostbc", ""]), ("zfrx", "ostbc"))


class SelectTests(unittest.TestCase):
    def test_two_by_two_budget_leaves_ostbc(self):
        eps = outage_at(4, 2) * 1.001
        query = design.DesignQuery(design.MaxOutage(eps, THETA), 2, LIMITED, antenna_budget={"Nt": 2, "Nr": 2})
        answer = design.select(query)
        self.assertEqual(answer.m_o, 4)
        self.assertEqual(answer.tags(), ["ostbc"])
        self.assertEqual((answer.candidates[0].nt, answer.candidates[0].nr), (2, 2))
        self.assertIn("zfrx", answer.rejected)

    def test_zf_receiver_antennas(self):
        eps = metrics.outage(LIMITED, ZfRx(2, 5).gamma_params(), THETA).value * (1 + 1e-9)
        query = design.DesignQuery(design.MaxOutage(eps, THETA), 2, LIMITED, candidate_schemes=("zfrx",))
        best = design.select(query).candidates[0]
        self.assertEqual(best.antennas, {"Nt": 2, "Nr": 5})
        self.assertLessEqual(best.metric_value, eps)
        self.assertIs(best.exactness, Exactness.EXACT)

    def test_single_stream_ranking(self):
        query = design.DesignQuery(design.MaxAsep(0.75, qam(4)), 1, LIMITED)
        answer = design.select(query)
        self.assertEqual(answer.m_o, 1)
        self.assertEqual(answer.candidates[0].tag, "siso")
        totals = [c.total_antennas for c in answer.candidates]
        self.assertEqual(totals, sorted(totals))

    def test_spatial_multiplexing_uses_its_own_asep(self):
        constraint = design.MaxAsep(0.75, qam(4))
        scheme = SmMimo(2, 2)
        self.assertEqual(constraint.evaluate_scheme(LIMITED, scheme).value,
                         metrics.asep_sm(LIMITED, scheme, qam(4)).value)

        query = design.DesignQuery(constraint, 2, LIMITED, candidate_schemes=("smmimo",))
        sm_result = metrics.MetricResult(0.01, 0.0, Exactness.APPROXIMATE)
        with patch("cellular.services.design.metrics.asep_sm", return_value=sm_result) as asep_sm:
            answer = design.select(query)
        asep_sm.assert_called_once()
        self.assertIsInstance(asep_sm.call_args.args[1], SmMimo)
        self.assertEqual(answer.tags(), ["smmimo"])
        self.assertEqual(answer.candidates[0].metric_value, 0.01)

    def test_failed_evaluation_rejects_the_candidate(self):
        query = design.DesignQuery(design.MaxAsep(0.75, qam(4)), 2, LIMITED, candidate_schemes=("smmimo",))
        failed = metrics.MetricResult(math.nan, math.inf, Exactness.APPROXIMATE, ["integrand is not finite"], True)
        with patch("cellular.services.design.metrics.asep_sm", return_value=failed):
            with self.assertRaises(InfeasibleDesignError) as ctx:
                design.select(query)
        self.assertIn("metric evaluation failed", str(ctx.exception))

    def test_infeasible(self):
        eps = (outage_at(1, 1) + outage_at(2, 1)) / 2.0
        query = design.DesignQuery(design.MaxOutage(eps, THETA), 1, LIMITED, candidate_schemes=("siso",))
        with self.assertRaises(InfeasibleDesignError):
            design.select(query)


class RenderTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        eps = outage_at(4, 2) * 1.001
        query = design.DesignQuery(design.MaxOutage(eps, THETA), 2, LIMITED,
                                   candidate_schemes=("ostbc", "zfrx"))
        cls.answer = design.select(query)

    def test_table(self):
        text = design.render_table(self.answer)
        self.assertTrue(text.startswith("# outage <="))
        self.assertIn("ostbc", text)
        self.assertIn("zfrx", text)

    def test_rows(self):
        rows = design.as_rows(self.answer)
        self.assertEqual([r["rank"] for r in rows], list(range(1, len(rows) + 1)))
        self.assertEqual(rows[0]["scheme"], "ostbc")
        self.assertEqual(rows[1]["Nr"], 5)
