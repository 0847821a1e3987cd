import math
import unittest

from test_config import TestConfig
from core.magnetization import (first_crossing, log_denominator, log_denominator_expectation,
                                magnetization_brute_force, magnetization_crossover,
                                magnetization_decay_scan, magnetization_plus_exact, positivity_check)
from models.errors import DomainError


class TestClosedForm(unittest.TestCase):
    def test_infinite_temperature(self):
        result = magnetization_plus_exact(3, 0.0)
        self.assertEqual(result.value, 0.0)
        self.assertEqual(result.L, 8)

    def test_matches_brute_force(self):
        for beta in TestConfig.BETA_GRID:
            closed = magnetization_plus_exact(1, beta).value
            brute = magnetization_brute_force(1, beta).value
            self.assertAlmostEqual(closed, brute, delta=TestConfig.LOOSE_TOL, msg=f"β={beta}")

    def test_denominator_forms_agree(self):
        for ell in (1, 2, 5, 20):
            for beta in (0.3, 1.0, 4.0):
                self.assertAlmostEqual(log_denominator(ell, beta), log_denominator_expectation(ell, beta),
                                       delta=1e-9 * max(1.0, abs(log_denominator(ell, beta))))

    def test_low_temperature(self):
        self.assertGreater(magnetization_plus_exact(1, 6.0).value, 0.9)

    def test_large_box_stays_finite(self):
        result = magnetization_plus_exact(2000, 3.0)
        self.assertTrue(math.isfinite(result.log_n))
        self.assertTrue(0.0 <= result.value <= 1.0)

    def test_domain(self):
        with self.assertRaises(DomainError):
            magnetization_plus_exact(0, 1.0)
        with self.assertRaises(DomainError):
            magnetization_plus_exact(1, -1.0)
        with self.assertRaises(DomainError):
            magnetization_brute_force(2, 1.0)


class TestDecayScan(unittest.TestCase):
    def test_scan_decreases(self):
        table = magnetization_decay_scan(1.0, range(1, 7))
        self.assertEqual(list(table.columns), ['beta', 'ell', 'value', 'below'])
        values = table['value'].tolist()
        for a, b in zip(values, values[1:]):
            self.assertLessEqual(b, a + TestConfig.EXACT_TOL)

    def test_crossover_is_first_crossing(self):
        beta = 2.0
        crossover = magnetization_crossover(beta)
        self.assertIsNotNone(crossover)
        table = magnetization_decay_scan(beta, range(1, crossover + 1))
        self.assertEqual(first_crossing(table), crossover)

    def test_crossover_grows_with_beta(self):
        self.assertLess(magnetization_crossover(2.0), magnetization_crossover(4.0))

    def test_no_crossover(self):
        self.assertIsNone(magnetization_crossover(1.0, threshold=1.1))
        self.assertIsNone(first_crossing(magnetization_decay_scan(5.0, [1], threshold=0.01)))

    def test_positivity(self):
        for row in positivity_check([3.0, 4.0, 5.0]):
            self.assertTrue(row['ok'], msg=str(row))


if __name__ == '__main__':
    unittest.main()
