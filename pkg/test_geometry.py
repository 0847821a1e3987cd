import unittest

from test_config import TestConfig
from core.geometry import (bases_through, f2_vertex_sum, gamma_set, l1_distance, plaquette_family,
                           plaquette_sites, staircase_order, triangular_distance)
from core.shadows import (a_of_z, decomposition_by_elimination, gamma_membership_count, is_null_equivalent,
                          minimal_decomposition, odd_columns, pascal_parity, shadow, shadow_sum)
from models.cycles import ShadowScreen
from models.errors import DomainError, EmptyRegionError, ScreenError
from models.lattice import ModelSpec, PlaquetteMode, Region, Site


class TestGeometry(unittest.TestCase):
    def setUp(self):
        self.spm = ModelSpec.spm()
        self.tpm = ModelSpec.tpm()

    def test_plaquette_sites(self):
        self.assertEqual(plaquette_sites(self.spm, (0, 0)), {(0, 0), (1, 0), (0, 1), (1, 1)})
        self.assertEqual(plaquette_sites(self.tpm, (2, 3)), {(2, 3), (2, 4), (3, 4)})

    def test_bases_through(self):
        self.assertEqual(bases_through(self.tpm, (0, 0)), [(-1, -1), (0, -1), (0, 0)])
        for b in bases_through(self.spm, (3, 5)):
            self.assertIn((3, 5), plaquette_sites(self.spm, b))

    def test_family_sizes(self):
        region = Region.square(2)
        self.assertEqual(len(plaquette_family(self.spm, region, PlaquetteMode.MEETING)), 9)
        self.assertEqual(len(plaquette_family(self.spm, region, PlaquetteMode.INSIDE)), 1)
        self.assertEqual(len(plaquette_family(self.spm, region, PlaquetteMode.CLIPPED)), 9)

    def test_clipped_merge(self):
        # En Q_1 las cuatro plaquetas recortadas son {(1,1)}
        region = Region.square(1)
        merged = plaquette_family(self.spm, region, PlaquetteMode.CLIPPED)
        unmerged = plaquette_family(self.spm, region, PlaquetteMode.CLIPPED, merge=False)
        self.assertEqual(len(merged), 1)
        self.assertEqual(len(unmerged), 4)
        self.assertTrue(all(p.sites == {(1, 1)} for p in unmerged))

    def test_empty_region(self):
        with self.assertRaises(EmptyRegionError):
            plaquette_family(self.spm, Region([]), PlaquetteMode.MEETING)

    def test_gamma_set(self):
        n = 4
        for j in range(-1, n + 1):
            sites = gamma_set(n, j)
            self.assertEqual(len(sites), n + 2)
            expected = {(j, i) for i in range(-1, j + 1)} | {(j + i, i - 1) for i in range(1, n - j + 1)}
            self.assertEqual(set(sites), expected)
        self.assertEqual(gamma_set(2, -1), [(-1, -1), (0, 0), (1, 1), (2, 2)])
        with self.assertRaises(DomainError):
            gamma_set(3, 4)

    def test_staircase_order(self):
        self.assertEqual(staircase_order(3, 1), [(1, -1), (1, 0), (1, 1), (2, 0), (3, 1)])
        self.assertEqual(staircase_order(3, 3), [(3, i) for i in range(-1, 4)])

    def test_distances(self):
        self.assertEqual(l1_distance((0, 0), (2, 3)), 5)
        self.assertEqual(triangular_distance((0, 0), (1, 1)), 1)
        self.assertEqual(triangular_distance((0, 0), (1, -1)), 2)

    def test_vertex_sum(self):
        self.assertEqual(f2_vertex_sum(self.spm, [(0, 0), (1, 0)]), {(0, 0), (0, 1), (2, 0), (2, 1)})
        self.assertEqual(f2_vertex_sum(self.spm, [(0, 0), (0, 0)]), frozenset())

    def test_region_serialization(self):
        region = Region.extended_triangle(3)
        self.assertEqual(Region.from_dict(region.to_dict()), region)
        with self.assertRaises(DomainError):
            Region.from_dict({'kind': 'hexagon'})


class TestShadows(unittest.TestCase):
    def setUp(self):
        self.spm = ModelSpec.spm()
        self.tpm = ModelSpec.tpm()

    def test_pascal_parity(self):
        self.assertEqual(odd_columns(4), [0, 4])
        self.assertEqual(odd_columns(3), [0, 1, 2, 3])
        self.assertEqual(pascal_parity(6, 2), 1)
        self.assertEqual(pascal_parity(6, 1), 0)
        self.assertEqual(pascal_parity(2, 5), 0)

    def test_tpm_shadow(self):
        screen = ShadowScreen.tpm_line(2)
        self.assertEqual(shadow(self.tpm, (0, 0), screen), {(0, 2), (2, 2)})
        self.assertEqual(shadow(self.tpm, (1, 2), screen), {(1, 2)})
        with self.assertRaises(ScreenError):
            shadow(self.tpm, (0, 3), screen)

    def test_screen_mismatch(self):
        with self.assertRaises(DomainError):
            shadow(self.spm, (0, 0), ShadowScreen.tpm_line(3))

    def test_null_equivalence(self):
        corners = [(0, 0), (2, 0), (0, 2), (2, 2)]
        self.assertTrue(is_null_equivalent(self.spm, corners))
        self.assertFalse(shadow_sum(self.spm, corners))
        self.assertFalse(is_null_equivalent(self.spm, [(0, 0)]))
        self.assertTrue(is_null_equivalent(self.tpm, [(0, 0), (0, 4), (4, 4)]))
        self.assertFalse(is_null_equivalent(self.tpm, [(0, 0), (0, 3), (3, 3)]))

    def test_minimal_decomposition_sizes(self):
        for ell in range(1, 5):
            corners = [(0, 0), (ell, 0), (0, ell), (ell, ell)]
            self.assertEqual(minimal_decomposition(self.spm, corners).size, ell * ell)
        for k in range(4):
            side = 1 << k
            triangle = [(0, 0), (0, side), (side, side)]
            self.assertEqual(minimal_decomposition(self.tpm, triangle).size, 3 ** k)

    def test_shadow_matches_elimination(self):
        sites = [(1, 1), (4, 1), (1, 3), (4, 3)]
        self.assertEqual(minimal_decomposition(self.spm, sites).bases,
                         decomposition_by_elimination(self.spm, sites).bases)
        triangle = [(2, 0), (2, 2), (4, 2)]
        self.assertEqual(minimal_decomposition(self.tpm, triangle).bases,
                         decomposition_by_elimination(self.tpm, triangle).bases)

    def test_rectangle_decomposition(self):
        rect = ModelSpec.rect(2, 3)
        sites = plaquette_sites(rect, (0, 0))
        self.assertEqual(minimal_decomposition(rect, sites).bases, {Site(0, 0)})
        self.assertFalse(is_null_equivalent(rect, [(0, 0)]))
        with self.assertRaises(DomainError):
            ModelSpec.rect(1, 3)

    def test_a_of_z_methods_agree(self):
        n = 5
        for z in Region.extended_triangle(n):
            self.assertEqual(a_of_z(n, z, "lucas"), a_of_z(n, z, "direct"), msg=f"z={z}")

    def test_gamma_membership(self):
        # Cada sitio de T^(n) pertenece a algún Γ(j)
        n = 4
        for z in Region.extended_triangle(n):
            self.assertGreaterEqual(gamma_membership_count(n, z), 1)


if __name__ == '__main__':
    unittest.main()
