import math
import unittest

from test_config import TestConfig
from core.correlators import (multispin_infinite, multispin_plus_finite, plus_lower_bound,
                              plus_representation)
from core.magnetization import magnetization_plus_exact
from models.errors import DomainError
from models.lattice import ModelSpec, Region


class TestMultispinInfinite(unittest.TestCase):
    def test_square_corners(self):
        beta = 1.5
        value = multispin_infinite(ModelSpec.spm(), [(0, 0), (2, 0), (0, 2), (2, 2)], beta)
        self.assertEqual(value.n, 4)
        self.assertAlmostEqual(value.value, math.tanh(beta / 2) ** 4, delta=TestConfig.EXACT_TOL)

    def test_triangle(self):
        beta = 1.5
        value = multispin_infinite(ModelSpec.tpm(), [(0, 0), (0, 2), (2, 2)], beta)
        self.assertEqual(value.n, 3)
        self.assertAlmostEqual(value.value, math.tanh(beta / 2) ** 3, delta=TestConfig.EXACT_TOL)

    def test_not_equivalent(self):
        value = multispin_infinite(ModelSpec.spm(), [(0, 0)], 2.0)
        self.assertEqual(value.value, 0.0)
        self.assertIsNone(value.n)

    def test_empty_and_zero_temperature_limits(self):
        self.assertEqual(multispin_infinite(ModelSpec.spm(), [], 1.0).value, 1.0)
        self.assertEqual(multispin_infinite(ModelSpec.spm(), [(0, 0), (1, 0), (0, 1), (1, 1)], 0.0).value, 0.0)

    def test_large_beta_log_domain(self):
        # tanh(β/2)^n con n = 256 y β grande no debe redondearse a 1 en el logaritmo
        value = multispin_infinite(ModelSpec.spm(), [(0, 0), (16, 0), (0, 16), (16, 16)], 30.0)
        self.assertEqual(value.n, 256)
        self.assertLess(value.log_value, 0.0)
        self.assertAlmostEqual(value.log_value, -512 * math.exp(-30.0), delta=1e-20)

    def test_negative_beta(self):
        with self.assertRaises(DomainError):
            multispin_infinite(ModelSpec.spm(), [(0, 0)], -1.0)


class TestMultispinPlus(unittest.TestCase):
    def setUp(self):
        self.spm = ModelSpec.spm()

    def test_expansion_matches_enumeration(self):
        region = Region.centered_box(1)
        for sites in ([(0, 0)], [(-1, -1), (1, 1)], [(0, 0), (1, 0), (0, 1), (1, 1)]):
            expansion = multispin_plus_finite(self.spm, region, sites, 1.2)
            enumeration = multispin_plus_finite(self.spm, region, sites, 1.2, method="enumeration")
            self.assertAlmostEqual(expansion, enumeration, delta=TestConfig.LOOSE_TOL)

    def test_generic_region(self):
        region = Region.box((0, 0), 3, 2)
        for model in (self.spm, ModelSpec.tpm()):
            expansion = multispin_plus_finite(model, region, [(0, 0), (2, 1)], 0.8)
            enumeration = multispin_plus_finite(model, region, [(0, 0), (2, 1)], 0.8, method="enumeration")
            self.assertAlmostEqual(expansion, enumeration, delta=TestConfig.LOOSE_TOL)

    def test_origin_is_magnetization(self):
        value = multispin_plus_finite(self.spm, Region.centered_box(2), [(0, 0)], 1.0)
        self.assertAlmostEqual(value, magnetization_plus_exact(2, 1.0).value, delta=TestConfig.LOOSE_TOL)

    def test_lower_bound(self):
        region = Region.centered_box(1)
        for sites in ([(0, 0)], [(-1, 0), (1, 0)]):
            n, bound = plus_lower_bound(self.spm, region, sites, 1.0)
            exact = multispin_plus_finite(self.spm, region, sites, 1.0, method="enumeration")
            self.assertGreaterEqual(n, 1)
            self.assertLessEqual(bound, exact + TestConfig.EXACT_TOL)

    def test_representation_sums_to_sites(self):
        region = Region.centered_box(1)
        rep = plus_representation(self.spm, region, [(0, 0)])
        self.assertEqual(rep.alpha.vertex_set(), {(0, 0)})

    def test_sites_outside_region(self):
        with self.assertRaises(DomainError):
            plus_representation(self.spm, Region.centered_box(1), [(5, 5)])
        with self.assertRaises(DomainError):
            multispin_plus_finite(self.spm, Region.centered_box(1), [(0, 0)], 1.0, method="sampling")


if __name__ == '__main__':
    unittest.main()
