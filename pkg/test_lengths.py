import math
import unittest

from test_config import TestConfig
from core.lengths import (ell_cavity_estimate, ell_mix_estimate, ell_multispin, ell_renorm, expected_slope,
                          extremal_family, extremal_size, length_records, ordering_report, ordering_status,
                          scaling_slopes)
from core.magnetization import magnetization_plus_exact
from core.renorm import beta_prime, log_tanh_half
from core.shadows import minimal_decomposition
from models.errors import DomainError
from models.lattice import ModelSpec
from models.results import Exactness
from models.specs import RenormSpec


class TestMultispinLength(unittest.TestCase):
    def setUp(self):
        self.models = (ModelSpec.spm(), ModelSpec.tpm())

    def test_infinite_temperature(self):
        for model in self.models:
            estimate = ell_multispin(model, 0.0)
            self.assertEqual((estimate.lo, estimate.hi), (1, 1))
            self.assertEqual(estimate.certainty, Exactness.EXACT)

    def test_rectangles_rejected(self):
        with self.assertRaises(DomainError):
            ell_multispin(ModelSpec.rect(2, 3), 1.0)

    def test_extremal_sizes(self):
        for model in self.models:
            for ell in range(1, 6):
                family = extremal_family(model, ell)
                self.assertEqual(minimal_decomposition(model, family).size, extremal_size(model, ell))

    def test_bracket_validity(self):
        threshold = TestConfig.MULTISPIN_THRESHOLD
        for model in self.models:
            for beta in (2.0, 3.0, 5.0, 8.0):
                estimate = ell_multispin(model, beta, threshold)
                log_t = log_tanh_half(beta)
                self.assertLessEqual(estimate.lo, estimate.hi)
                self.assertLessEqual(extremal_size(model, estimate.hi) * log_t, math.log(threshold) + 1e-12)
                self.assertLessEqual(extremal_size(model, estimate.lo) * log_t, math.log(threshold) + 1e-12)
                if estimate.lo > 1:
                    self.assertGreater(extremal_size(model, estimate.lo - 1) * log_t, math.log(threshold))

    def test_monotone(self):
        for model in self.models:
            los = [ell_multispin(model, beta).lo for beta in (1.0, 2.0, 4.0, 6.0, 8.0)]
            self.assertEqual(los, sorted(los))
            self.assertGreaterEqual(ell_multispin(model, 5.0, 0.1).lo, ell_multispin(model, 5.0, 0.3).lo)


class TestRenormLength(unittest.TestCase):
    def test_minimal_step(self):
        for beta in (2.0, 4.0, 7.0):
            estimate = ell_renorm(ModelSpec.spm(), beta)
            self.assertEqual(estimate.certainty, Exactness.EXACT)
            self.assertLessEqual(beta_prime(beta, RenormSpec.spm(estimate.value)).value, 1.0 + 1e-12)
            if estimate.value > 1:
                self.assertGreater(beta_prime(beta, RenormSpec.spm(estimate.value - 1)).value, 1.0)

    def test_tpm_power_of_two(self):
        estimate = ell_renorm(ModelSpec.tpm(), 6.0)
        self.assertEqual(estimate.value & (estimate.value - 1), 0)
        n = estimate.value.bit_length() - 1
        self.assertLessEqual(beta_prime(6.0, RenormSpec.tpm(n)).value, 1.0 + 1e-12)
        self.assertGreater(beta_prime(6.0, RenormSpec.tpm(n - 1)).value, 1.0)

    def test_infinite_temperature(self):
        self.assertEqual(ell_renorm(ModelSpec.spm(), 0.0).value, 1)


class TestScaling(unittest.TestCase):
    def _check(self, model, tolerance):
        fits = scaling_slopes(model, TestConfig.SLOPE_BETA_MIN, TestConfig.SLOPE_BETA_MAX,
                              TestConfig.SLOPE_POINTS, TestConfig.MULTISPIN_THRESHOLD)
        for kind in ('multispin_lo', 'renorm'):
            self.assertAlmostEqual(fits[kind].slope, expected_slope(model), delta=tolerance,
                                   msg=f"{model.name} {kind}")

    def test_spm_slope(self):
        self._check(ModelSpec.spm(), TestConfig.SLOPE_TOL_SPM)

    def test_tpm_slope(self):
        self._check(ModelSpec.tpm(), TestConfig.SLOPE_TOL_TPM)


class TestCavityAndMixing(unittest.TestCase):
    def setUp(self):
        self.spm = ModelSpec.spm()

    def test_trivial_at_zero(self):
        self.assertEqual(ell_mix_estimate(self.spm, 0.0).certainty, Exactness.EXACT)
        self.assertEqual(ell_cavity_estimate(self.spm, 0.0).value, 1)

    def test_cavity_lower_bound(self):
        # ψ(1) >= μ^+(σ_0) por la simetría de inversión global del SPM
        beta = 1.5
        self.assertGreater(magnetization_plus_exact(1, beta).value, 0.1)
        estimate = ell_cavity_estimate(self.spm, beta, u=0.1, ratio=3, max_ell=1,
                                       config=TestConfig.SETTINGS)
        self.assertEqual(estimate.certainty, Exactness.LOWER_BOUND)
        self.assertEqual(estimate.value, 2)

    def test_ordering_report(self):
        table = ordering_report(self.spm, [0.0, 1.5], TestConfig.SETTINGS, include_mix=False)
        self.assertTrue(table['ok'].all())
        first = table.iloc[0]
        self.assertEqual((first['multispin_lo'], first['cavity'], first['renorm']), (1, 1, 1))
        self.assertNotIn('mix', table.columns)
        self.assertEqual(table['status'].tolist(), ['ok', 'ok'])

    def test_ordering_grid_both_models(self):
        betas = [0.5, 1.0, 1.5]
        for model in (self.spm, ModelSpec.tpm()):
            table = ordering_report(model, betas, TestConfig.SETTINGS, include_mix=False)
            self.assertEqual(table['beta'].tolist(), betas)
            for row in table.to_dict('records'):
                msg = f"{model.name} β={row['beta']}: {row}"
                self.assertIn(row['status'], ('ok', 'inconclusive'), msg=msg)
                self.assertEqual(row['cavity_flag'], Exactness.LOWER_BOUND.value, msg=msg)
                self.assertEqual(row['ok'], row['multispin_lo'] <= row['cavity'], msg=msg)
                self.assertEqual(row['status'] == 'ok', row['ok'], msg=msg)

    def test_ordering_status(self):
        self.assertEqual(ordering_status(True, Exactness.LOWER_BOUND), 'ok')
        self.assertEqual(ordering_status(True, Exactness.EXACT), 'ok')
        self.assertEqual(ordering_status(False, Exactness.LOWER_BOUND), 'inconclusive')
        self.assertEqual(ordering_status(False, Exactness.EXACT), 'violated')

    def test_length_records(self):
        records = length_records([ell_multispin(self.spm, 3.0), ell_renorm(self.spm, 3.0)])
        self.assertEqual(list(records.columns), ['beta', 'kind', 'lo', 'hi', 'flag'])
        self.assertEqual(records['kind'].tolist(), ['multispin', 'renorm'])


if __name__ == '__main__':
    unittest.main()
