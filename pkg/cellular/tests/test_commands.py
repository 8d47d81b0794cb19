import io
import os
import tempfile
import unittest
from unittest.mock import patch

from django.core.management import call_command
from django.core.management.base import CommandError

from cellular.exceptions import InfeasibleDesignError
from cellular.management.commands import selftest

SCENARIOS = os.path.join(os.path.dirname(__file__), "..", "scenarios")

SMALL = """\
network.n0 = none
scheme.use = siso
scheme.use = simo Nr=2
metric.compute = outage
metric.theta = 0, 10 dB
"""


def run(*args, **kwargs):
    out = io.StringIO()
    call_command(*args, stdout=out, **kwargs)
    return out.getvalue()


class ScenarioFileMixin:
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def write(self, text, name="scenario.cfg"):
        path = os.path.join(self.tmp.name, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        return path


class ValidateCommandTests(ScenarioFileMixin, unittest.TestCase):
    def test_bundled_scenario(self):
        out = run("validate", os.path.join(SCENARIOS, "fig1a.cfg"))
        self.assertIn("grid points: 36", out)
        self.assertIn("10000 trials per point", out)

    def test_invalid_scenario(self):
        path = self.write("scheme.use = siso\nmetric.compute = outage\nsim.bogus = 1\n")
        with self.assertRaises(CommandError) as ctx:
            run("validate", path)
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn("line 3", str(ctx.exception))


class RunCommandTests(ScenarioFileMixin, unittest.TestCase):
    def test_writes_one_file_per_metric(self):
        out_dir = os.path.join(self.tmp.name, "out")
        out = run("run", self.write(SMALL), output_dir=out_dir, threads=1)
        self.assertIn("wrote", out)
        with open(os.path.join(out_dir, "outage.csv"), encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        self.assertEqual(lines[0], "# sg-mimo scenario")
        self.assertIn(f"# output.dir = {out_dir}", lines)
        self.assertEqual(sum(1 for line in lines if not line.startswith("#")), 1 + 4)

    def test_config_error_exit_code(self):
        with self.assertRaises(CommandError) as ctx:
            run("run", os.path.join(self.tmp.name, "missing.cfg"))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_numeric_failure_exit_code(self):
        with patch("cellular.services.sweep.failed_rows", return_value=2):
            with self.assertRaises(CommandError) as ctx:
                run("run", self.write(SMALL), output_dir=os.path.join(self.tmp.name, "out"))
        self.assertEqual(ctx.exception.returncode, 3)


class DesignCommandTests(ScenarioFileMixin, unittest.TestCase):
    def test_ranked_table(self):
        out = run("design", streams=1, max_outage=0.5, theta_db=0.0)
        self.assertIn("siso", out)
        self.assertIn("rank", out)

    def test_csv(self):
        path = os.path.join(self.tmp.name, "design.csv")
        run("design", "--streams", "1", "--max-outage", "0.5", "--theta-db", "0", "--schemes", "simo", "miso",
            "--csv", path)
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        self.assertTrue(text.startswith("# outage <= 0.5"))
        self.assertIn("rank,scheme,m_o,m_i,Nt,Nr,metric,cell_rate_bits,exactness", text)

    def test_usage_errors(self):
        cases = [
            dict(streams=1, max_outage=0.1, theta_db=0.0, max_asep=0.1),
            dict(streams=1, max_outage=0.1),
            dict(streams=1),
            dict(streams=0, max_outage=0.1, theta_db=0.0),
        ]
        for kwargs in cases:
            with self.subTest(**kwargs):
                with self.assertRaises(CommandError) as ctx:
                    run("design", **kwargs)
                self.assertEqual(ctx.exception.returncode, 2)

    def test_infeasible_exit_code(self):
        with patch("cellular.services.design.select", side_effect=InfeasibleDesignError("nothing fits")):
            with self.assertRaises(CommandError) as ctx:
                run("design", streams=2, max_outage=0.01, theta_db=10.0)
        self.assertEqual(ctx.exception.returncode, 4)
        self.assertIn("nothing fits", str(ctx.exception))


class SelftestCommandTests(unittest.TestCase):
    def test_analytic_checks_pass(self):
        out = run("selftest", skip_sim=True)
        self.assertIn("SKIP", out)
        self.assertIn("all self-checks passed", out)
        self.assertNotIn("FAIL", out)

    def test_failure_exit_code(self):
        failing = [selftest.Check("broken", lambda: (1.0, 2.0), 0.1)]
        with patch.object(selftest, "CHECKS", failing):
            with self.assertRaises(CommandError) as ctx:
                run("selftest")
        self.assertEqual(ctx.exception.returncode, 3)


if __name__ == "__main__":
    unittest.main()
