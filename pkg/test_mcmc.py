import unittest

import numpy as np

from test_config import TestConfig
from core.geometry import bases_through, plaquette_sites
from core.magnetization import magnetization_plus_exact
from core.mcmc import (ChainRunner, Lattice, batch_means, chain_rng, defect_density_observable,
                       detailed_balance_gap, spin_product_observable, transition_kernel)
from models.boundary import BoundaryCondition, SpinConfig
from models.errors import DomainError
from models.lattice import ModelSpec, Region
from models.specs import ChainSpec, Dynamics


class TestLattice(unittest.TestCase):
    def setUp(self):
        self.spm = ModelSpec.spm()

    def test_local_field_matches_plaquette_sum(self):
        region = Region.square(3)
        lattice = Lattice(self.spm, region, BoundaryCondition.all_plus())
        spins = lattice.initial(1, chain_rng(TestConfig.SEED, 0), "random")
        interior = tuple(int(spins[0, a, b]) for a, b in (lattice.cell(s) for s in region))
        sigma = SpinConfig(region, interior, BoundaryCondition.all_plus())
        field_ = lattice.local_field(spins)[0]
        for s in region:
            expected = sum(sigma.product(plaquette_sites(self.spm, b)) for b in bases_through(self.spm, s))
            a, b = lattice.cell(s)
            self.assertEqual(field_[a - 1, b - 1], expected, msg=f"sitio {s}")

    def test_colour_flip_negates_field(self):
        # Los sitios de un mismo color no comparten plaqueta
        lattice = Lattice(self.spm, Region.box((0, 0), 6, 6), BoundaryCondition.checkerboard())
        spins = lattice.initial(2, chain_rng(TestConfig.SEED, 1), "random")
        mask = lattice.colours[1]
        before = lattice.local_field(spins)[:, mask]
        interior = lattice.interior(spins)
        interior[:, mask] *= -1
        after = lattice.local_field(spins)[:, mask]
        np.testing.assert_array_equal(after, -before)

    def test_odd_torus_rejected(self):
        with self.assertRaises(DomainError):
            Lattice(self.spm, None, BoundaryCondition.all_plus(), torus=(5, 4))

    def test_non_rectangular_rejected(self):
        with self.assertRaises(DomainError):
            Lattice(self.spm, Region.triangle(3), BoundaryCondition.all_plus())


class TestBatchMeans(unittest.TestCase):
    def test_constant_series(self):
        mean, stderr = batch_means(np.ones((40, 2)), 4)
        np.testing.assert_array_equal(mean, [1.0, 1.0])
        np.testing.assert_array_equal(stderr, [0.0, 0.0])

    def test_too_short(self):
        with self.assertRaises(DomainError):
            batch_means(np.ones((3, 1)), 4)
        with self.assertRaises(DomainError):
            batch_means(np.ones((10, 1)), 1)


class TestChains(unittest.TestCase):
    def setUp(self):
        self.runner = ChainRunner(TestConfig.SETTINGS)
        self.spm = ModelSpec.spm()

    def _spec(self, region, beta, **kwargs):
        options = dict(seed=TestConfig.SEED, sweeps=TestConfig.MCMC_SWEEPS, burn_in=TestConfig.MCMC_BURN_IN)
        options.update(kwargs)
        return ChainSpec(self.spm, region, beta, **options)

    def test_infinite_temperature_defects(self):
        spec = self._spec(Region.box((0, 0), 8, 8), 0.0)
        mean, stderr = self.runner.defect_density(spec, ring=2)
        self.assertLess(abs(mean - 0.5), TestConfig.SIGMAS * stderr)

    def test_reproducible(self):
        spec = self._spec(Region.box((0, 0), 4, 4), 1.0)
        observables = {'spin': spin_product_observable([(1, 1)])}
        first = self.runner.run(spec, observables).series['spin']
        second = self.runner.run(spec, observables).series['spin']
        np.testing.assert_array_equal(first, second)
        other = self.runner.run(self._spec(Region.box((0, 0), 4, 4), 1.0, chain_id=1), observables)
        self.assertFalse(np.array_equal(first, other.series['spin']))

    def test_torus_symmetry(self):
        spec = self._spec(Region.box((0, 0), 8, 8), 1.0, torus=(8, 8))
        mean, stderr = self.runner.estimate_multispin(spec, [(0, 0)])
        self.assertLess(abs(mean), TestConfig.SIGMAS * stderr)

    def test_matches_exact_magnetization(self):
        beta = 1.0
        spec = self._spec(Region.centered_box(1), beta, sweeps=2000)
        mean, stderr = self.runner.estimate_multispin(spec, [(0, 0)])
        exact = magnetization_plus_exact(1, beta).value
        self.assertLess(abs(mean - exact), TestConfig.SIGMAS * stderr)

    def test_run_many_keeps_order(self):
        specs = [self._spec(Region.box((0, 0), 4, 4), 0.5, chain_id=k) for k in range(3)]
        results = self.runner.run_many(specs, {'defects': defect_density_observable(0)})
        self.assertEqual([r.spec.chain_id for r in results], [0, 1, 2])
        frame = results[0].to_frame()
        self.assertEqual(list(frame.columns), ['sweep', 'defects'])
        self.assertEqual(len(frame), TestConfig.MCMC_SWEEPS)


class TestDetailedBalance(unittest.TestCase):
    def setUp(self):
        self.spm = ModelSpec.spm()
        self.region = Region.square(2)

    def test_kernel(self):
        for dynamics in (Dynamics.HEAT_BATH, Dynamics.METROPOLIS):
            kernel, pi = transition_kernel(self.spm, self.region, 1.0, BoundaryCondition.all_plus(), dynamics)
            np.testing.assert_allclose(kernel.sum(axis=1), 1.0, atol=1e-14)
            self.assertLess(detailed_balance_gap(kernel, pi), 1e-14)
            np.testing.assert_allclose(pi @ kernel, pi, atol=1e-14)

    def test_empirical_transitions(self):
        beta = 1.0
        bc = BoundaryCondition.all_plus()
        kernel, _ = transition_kernel(self.spm, self.region, beta, bc)
        runner = ChainRunner({'mcmc': {'replicas': 1000}})
        spec = ChainSpec(self.spm, self.region, beta, bc, seed=TestConfig.SEED)
        counts = runner.single_site_transitions(spec, 1000)
        visits = counts.sum(axis=1)
        expected = visits[:, None] * kernel
        sigma = np.sqrt(visits[:, None] * kernel * (1 - kernel))
        self.assertTrue(np.all(counts[kernel == 0] == 0))
        excess = np.abs(counts - expected) - TestConfig.TRANSITION_SIGMAS * sigma
        self.assertLessEqual(float(excess.max()), 1e-9)

    def test_transition_cap(self):
        runner = ChainRunner()
        spec = ChainSpec(self.spm, Region.square(4), 1.0)
        with self.assertRaises(DomainError):
            runner.single_site_transitions(spec, 1)


if __name__ == '__main__':
    unittest.main()
