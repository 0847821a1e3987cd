import math
import unittest

from test_config import TestConfig
from core.gibbs_exact import (GibbsEnumerator, cavity_boxes, covariance, dlr_discrepancy, expectation,
                              flip_identity_gap, h_x, partition_function, phi_ell, psi_sup,
                              separated_pairs, spin_observable, spin_product_observable,
                              total_variation_marginal)
from models.boundary import BoundaryCondition, SpinConfig
from models.errors import DomainError, EmptyRegionError, EnumerationCapError, FreeBoundaryError
from models.lattice import ModelSpec, PlaquetteMode, Region
from models.results import Exactness
from models.specs import GibbsSpec


class TestPartitionFunction(unittest.TestCase):
    def setUp(self):
        self.spm = ModelSpec.spm()
        self.tpm = ModelSpec.tpm()

    def test_infinite_temperature(self):
        region = Region.square(2)
        for bc in (BoundaryCondition.all_plus(), BoundaryCondition.checkerboard(), BoundaryCondition.random(7)):
            log_z = partition_function(GibbsSpec(self.spm, region, 0.0, bc))
            self.assertAlmostEqual(log_z, 4 * math.log(2), delta=TestConfig.EXACT_TOL)

    def test_single_site_plus(self):
        # Las cuatro plaquetas que tocan Q_1 valen σ
        beta = 0.8
        spec = GibbsSpec(self.spm, Region.square(1), beta)
        self.assertAlmostEqual(partition_function(spec), math.log(2 * math.cosh(2 * beta)),
                               delta=TestConfig.EXACT_TOL)
        m = expectation(spec, spin_observable(spec.region, (1, 1)))
        self.assertAlmostEqual(m, math.tanh(2 * beta), delta=TestConfig.EXACT_TOL)
        f = spin_observable(spec.region, (1, 1))
        self.assertAlmostEqual(covariance(spec, f, f), 1 - math.tanh(2 * beta) ** 2,
                               delta=TestConfig.EXACT_TOL)

    def test_free_inside(self):
        beta = 1.3
        spec = GibbsSpec(self.spm, Region.square(2), beta, BoundaryCondition.free(), PlaquetteMode.INSIDE)
        expected = 3 * math.log(2) + math.log(2 * math.cosh(beta / 2))
        self.assertAlmostEqual(partition_function(spec), expected, delta=TestConfig.EXACT_TOL)

    def test_clipped_equals_plus_meeting(self):
        region = Region.square(3)
        plus = partition_function(GibbsSpec(self.tpm, region, 1.1))
        clipped = partition_function(GibbsSpec(self.tpm, region, 1.1, plaquette_mode=PlaquetteMode.CLIPPED))
        self.assertAlmostEqual(plus, clipped, delta=TestConfig.EXACT_TOL)

    def test_free_meeting_rejected(self):
        with self.assertRaises(FreeBoundaryError):
            partition_function(GibbsSpec(self.spm, Region.square(2), 1.0, BoundaryCondition.free()))

    def test_restricted_family(self):
        # P = B^f(Λ): no lee el exterior, así que coincide con el modo inside
        region = Region.square(3)
        inside = {(1, 1), (1, 2), (2, 1), (2, 2)}
        restricted = GibbsSpec(self.spm, region, 0.9, BoundaryCondition.free(), restricted=frozenset(inside))
        reference = GibbsSpec(self.spm, region, 0.9, BoundaryCondition.free(), PlaquetteMode.INSIDE)
        self.assertAlmostEqual(partition_function(restricted), partition_function(reference),
                               delta=TestConfig.EXACT_TOL)
        with self.assertRaises(DomainError):
            partition_function(GibbsSpec(self.spm, region, 0.9, restricted=frozenset({(1, 1)})))

    def test_cap_and_empty(self):
        enumerator = GibbsEnumerator({'enumeration': {'cap': 8}})
        with self.assertRaises(EnumerationCapError):
            enumerator.partition_function(GibbsSpec(self.spm, Region.square(3), 1.0))
        with self.assertRaises(EmptyRegionError):
            GibbsSpec(self.spm, Region([]), 1.0)
        with self.assertRaises(DomainError):
            GibbsSpec(self.spm, Region.square(1), -0.5)

    def test_explicit_boundary_coverage(self):
        from models.errors import BoundaryCoverageError
        bc = BoundaryCondition.explicit({(0, 0): 1})
        with self.assertRaises(BoundaryCoverageError):
            partition_function(GibbsSpec(self.spm, Region.square(1), 1.0, bc))

    def test_deterministic(self):
        spec = GibbsSpec(self.tpm, Region.square(4), 0.7, BoundaryCondition.random(3))
        self.assertEqual(partition_function(spec), partition_function(spec))
        chunked = GibbsEnumerator({'enumeration': {'cap': 28, 'chunk_bits': 4}})
        self.assertAlmostEqual(chunked.partition_function(spec), partition_function(spec),
                               delta=TestConfig.EXACT_TOL)


class TestFlipIdentities(unittest.TestCase):
    def setUp(self):
        self.spm = ModelSpec.spm()

    def test_flip_identity(self):
        region = Region.square(2)
        spec = GibbsSpec(self.spm, region, 0.7, BoundaryCondition.checkerboard())
        f = spin_product_observable(region, [(1, 1), (2, 2)])
        for x in [(0, 1), (3, 3), (2, 0)]:
            lhs, rhs = flip_identity_gap(spec, x, f)
            self.assertAlmostEqual(lhs, rhs, delta=TestConfig.EXACT_TOL)

    def test_h_x_range(self):
        beta = 1.2
        region = Region.square(2)
        spec = GibbsSpec(self.spm, region, beta)
        norm = self.spm.half_norm
        for index in range(16):
            value = h_x(spec, (0, 1), SpinConfig.from_index(region, index))
            self.assertGreaterEqual(value, math.exp(-2 * beta * norm) - 1e-12)
            self.assertLessEqual(value, math.exp(2 * beta * norm) + 1e-12)
        with self.assertRaises(DomainError):
            h_x(spec, (1, 1), SpinConfig.all_plus(region))

    def test_dlr(self):
        for model in (ModelSpec.spm(), ModelSpec.tpm()):
            self.assertLess(dlr_discrepancy(model, 1.0), TestConfig.EXACT_TOL)


class TestMixingQuantities(unittest.TestCase):
    def setUp(self):
        self.spm = ModelSpec.spm()

    def test_cavity_boxes(self):
        outer, inner = cavity_boxes(1, 5)
        self.assertEqual(len(outer), 25)
        self.assertEqual(list(inner), [(0, 0)])
        outer, inner = cavity_boxes(2, 3)
        self.assertEqual(len(outer), 36)
        self.assertTrue(all(s in outer for s in inner))

    def test_phi_trivial(self):
        result = phi_ell(self.spm, 2, 0.0)
        self.assertEqual(result.value, 0.0)
        self.assertEqual(result.exactness, Exactness.EXACT)

    def test_phi_exact(self):
        result = phi_ell(self.spm, 1, 0.5)
        self.assertEqual(result.exactness, Exactness.EXACT)
        self.assertGreaterEqual(result.value, 0.0)
        self.assertTrue(math.isfinite(result.value))

    def test_phi_pairs_use_l1_distance(self):
        # d((0,0),(1,1)) = 2 en ℓ1; en la red triangular serían vecinos
        sites = [(0, 0), (1, 1), (1, 0)]
        self.assertEqual(separated_pairs(sites, 8), [(0, 1)])
        self.assertEqual(separated_pairs(sites, 4), [(0, 1), (0, 2), (1, 2)])
        self.assertEqual(separated_pairs(sites, 9), [])

    def test_psi_sup_dominates_pair(self):
        beta = 1.0
        sup = psi_sup(self.spm, 1, 3, beta)
        self.assertEqual(sup.exactness, Exactness.EXACT)
        pair = total_variation_marginal(self.spm, 1, 3, beta, BoundaryCondition.all_plus(),
                                        BoundaryCondition.all_minus())
        self.assertEqual(pair.exactness, Exactness.EXACT)
        self.assertGreaterEqual(sup.value + TestConfig.EXACT_TOL, pair.value)
        self.assertLessEqual(sup.value, 1.0)

    def test_psi_same_boundary(self):
        bc = BoundaryCondition.checkerboard()
        record = total_variation_marginal(self.spm, 1, 3, 2.0, bc, bc)
        self.assertEqual(record.value, 0.0)


if __name__ == '__main__':
    unittest.main()
