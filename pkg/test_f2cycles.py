import math
import unittest

import numpy as np

from test_config import TestConfig
from core.f2cycles import (alpha_star, alpha_w_size, alpha_w_star_size, alpha_of_subset, bottom_row_check,
                           combine, cycle_space, cycle_sum_bound, decompose, economic_decomposition_check,
                           generator_subset_collisions, high_temperature_log_partition, is_cycle,
                           is_staircase, plus_bc_generators, plus_cycle_sum_check, screening_bound,
                           screening_ratio, spm_stripe_basis, staircase_expectation_check,
                           tpm_pascal_basis, weighted_cycle_sum)
from core.gf2 import (EchelonBasis, gf2_is_in_rowspan, gf2_nullspace, gf2_rank, min_weight_in_coset,
                      polynomial_sum, span_weight_counts)
from core.gibbs_exact import partition_function
from models.boundary import BoundaryCondition
from models.cycles import ParitySet
from models.errors import CycleCountCapError, DomainError, NotInSpanError
from models.lattice import ModelSpec, PlaquetteMode, Region
from models.results import Exactness
from models.specs import GibbsSpec


class TestGF2(unittest.TestCase):
    def test_rank_and_span(self):
        rows = [0b011, 0b110, 0b101]
        self.assertEqual(gf2_rank(rows), 2)
        self.assertTrue(gf2_is_in_rowspan(0b101, rows[:2]))
        self.assertFalse(gf2_is_in_rowspan(0b001, rows))

    def test_echelon_solve(self):
        vectors = [0b0011, 0b0110, 0b1100]
        basis = EchelonBasis.from_vectors(vectors)
        combo = basis.solve(0b1001)
        acc = 0
        for k, v in enumerate(vectors):
            if (combo >> k) & 1:
                acc ^= v
        self.assertEqual(acc, 0b1001)
        with self.assertRaises(NotInSpanError):
            basis.solve(0b0001)

    def test_relations(self):
        basis = EchelonBasis.from_vectors([0b01, 0b10, 0b11])
        self.assertEqual(basis.rank, 2)
        self.assertEqual(basis.relations, [0b111])

    def test_nullspace(self):
        rows = [0b0111, 0b1110]
        kernel = gf2_nullspace(rows, 4)
        self.assertEqual(len(kernel), 2)
        for x in kernel:
            for r in rows:
                self.assertEqual((x & r).bit_count() % 2, 0)

    def test_weight_counts(self):
        counts = span_weight_counts([0b0011, 0b1100], 4)
        self.assertEqual(counts[0].tolist(), [1, 0, 2, 0, 1])
        self.assertAlmostEqual(polynomial_sum(counts, 0.5), 1 + 2 * 0.25 + 0.0625)
        self.assertEqual(min_weight_in_coset(0b0111, [0b0011, 0b1100], 4), 1)
        with self.assertRaises(CycleCountCapError):
            span_weight_counts([1 << k for k in range(5)], 5, cap=4)

    def test_gray_code_matches_table(self):
        vectors = [1 << k | 1 << (k + 1) for k in range(6)]
        split = span_weight_counts(vectors, 7, low_bits=2)
        table = span_weight_counts(vectors, 7, low_bits=16)
        np.testing.assert_array_equal(split, table)


class TestCycleBases(unittest.TestCase):
    def test_spm_stripes(self):
        for n in range(1, 5):
            basis = spm_stripe_basis(n)
            generic = cycle_space(ModelSpec.spm(), basis.region)
            self.assertEqual(len(basis.generators), 2 * (n + 1))
            self.assertEqual(basis.rank, 2 * n + 1)
            self.assertEqual(generic.rank, basis.rank)
            for g in basis.generators:
                self.assertTrue(is_cycle(g, basis.region))

    def test_tpm_pascal(self):
        for n in range(0, 6):
            basis = tpm_pascal_basis(n)
            generic = cycle_space(ModelSpec.tpm(), basis.region)
            self.assertEqual(len(basis.generators), n + 2)
            self.assertEqual(generic.rank, n + 2)
            for g in basis.generators:
                self.assertTrue(is_cycle(g, basis.region))

    def test_decompose_roundtrip(self):
        basis = tpm_pascal_basis(4)
        coeffs = (1, 0, 1, 1, 0, 1)
        alpha = combine(basis, coeffs)
        self.assertEqual(decompose(alpha, basis), coeffs)
        stripes = spm_stripe_basis(3)
        alpha = combine(stripes, (1, 0, 0, 1, 0, 1, 0, 0))
        self.assertEqual(combine(stripes, decompose(alpha, stripes)).bits, alpha.bits)

    def test_decompose_rejects_non_cycle(self):
        basis = tpm_pascal_basis(3)
        stray = ParitySet.from_bases(basis.universe, [(0, 0)])
        with self.assertRaises(NotInSpanError):
            decompose(stray, basis)

    def test_bottom_row(self):
        for n in range(0, 6):
            self.assertTrue(bottom_row_check(n))

    def test_cycle_sum_bound(self):
        for n in range(1, 6):
            basis = tpm_pascal_basis(n)
            for t in (0.1, 0.5, 0.9):
                self.assertLessEqual(weighted_cycle_sum(basis, t, skip_empty=True), cycle_sum_bound(n, t))

    def test_economic_decomposition(self):
        for n in range(1, 5):
            report = economic_decomposition_check(n)
            self.assertTrue(report.ok, msg=f"n={n}: {report.counterexamples[:3]}")
            self.assertEqual(report.checked, 4 ** (n + 1))


class TestHighTemperature(unittest.TestCase):
    def test_expansion_matches_enumeration(self):
        for model in (ModelSpec.spm(), ModelSpec.tpm()):
            for bc in (BoundaryCondition.all_plus(), BoundaryCondition.checkerboard(), BoundaryCondition.random(5)):
                spec = GibbsSpec(model, Region.square(3), 0.9, bc)
                self.assertAlmostEqual(high_temperature_log_partition(spec), partition_function(spec),
                                       delta=TestConfig.LOOSE_TOL)

    def test_screening(self):
        for model in (ModelSpec.spm(), ModelSpec.tpm()):
            report = screening_ratio(model, 2, 1.0)
            self.assertEqual(report.exactness, Exactness.EXACT)
            self.assertTrue(report.ok)
            self.assertGreaterEqual(report.ratio, 1.0)
            self.assertAlmostEqual(report.expansion_ratio, report.ratio, delta=1e-9 * report.ratio)

    def test_screening_inside_trivial(self):
        report = screening_ratio(ModelSpec.tpm(), 2, 1.0, mode=PlaquetteMode.INSIDE)
        self.assertEqual(report.ratio, 1.0)
        self.assertAlmostEqual(screening_bound(2, 0.0), 1.0)
        self.assertAlmostEqual(screening_bound(2, 1.0), 3 * math.exp(8 * math.tanh(0.5)) - 2)


class TestStaircase(unittest.TestCase):
    def test_staircase_identity(self):
        sets = [[0], [0, 1], [1, 2, 3], [4], [2, 4, 5]]
        self.assertTrue(is_staircase(sets))
        for c in (-1.0, 0.3, 2.0):
            check = staircase_expectation_check(sets, c)
            self.assertTrue(check.equal, msg=f"c={c}: {check.lhs} vs {check.rhs}")

    def test_not_staircase(self):
        self.assertFalse(is_staircase([[0, 1], [1], [0]]))
        check = staircase_expectation_check([[0, 1], [0, 1]], 1.0)
        self.assertFalse(check.staircase_ok)
        self.assertFalse(check.equal)


class TestPlusBoundaryCycles(unittest.TestCase):
    def test_generators_are_cycles(self):
        for ell in (1, 2):
            basis = plus_bc_generators(ell)
            self.assertEqual(len(basis.generators), 2 * (2 * ell + 2))
            kernel = cycle_space(ModelSpec.spm(), basis.region, PlaquetteMode.CLIPPED, merge=False)
            self.assertEqual(kernel.rank, basis.rank)
            for g in basis.generators:
                self.assertTrue(is_cycle(g, basis.region))

    def test_alpha_w_size(self):
        ell = 2
        basis = plus_bc_generators(ell)
        L = 2 * ell + 2
        for rows, cols in [(0, 0), (1, 0), (2, 3), (L, L)]:
            subset = sum(1 << i for i in range(rows)) | sum(1 << (L + j) for j in range(cols))
            self.assertEqual(len(alpha_of_subset(basis, subset)), alpha_w_size(ell, rows, cols))

    def test_alpha_star(self):
        ell = 2
        basis = plus_bc_generators(ell)
        star = alpha_star(basis, ell)
        self.assertEqual(star.vertex_set() & set(basis.region), {(0, 0)})
        self.assertEqual(len(star), (ell + 1) ** 2)
        self.assertEqual(alpha_w_star_size(ell, 0, 0, 0, 0), (ell + 1) ** 2)

    def test_cycle_sum_halving(self):
        t = math.tanh(0.6)
        lhs, rhs = plus_cycle_sum_check(1, lambda alpha: t ** len(alpha))
        self.assertAlmostEqual(lhs, rhs, delta=TestConfig.EXACT_TOL * max(1.0, lhs))

    def test_no_collisions(self):
        self.assertEqual(generator_subset_collisions(1), [])
        with self.assertRaises(DomainError):
            generator_subset_collisions(3)


if __name__ == '__main__':
    unittest.main()
