import io
import json
import os
import tempfile
import unittest
from unittest.mock import patch

from config import DEFAULT_SETTINGS, get_settings, merge_settings, validate_settings
from core.verification import MC_SIGMAS, VerificationSuite, verify_all
from main import EXIT_OK, EXIT_USAGE, main
from test_config import TestConfig


def run_cli(*argv):
    with patch('sys.stdout', new_callable=io.StringIO) as out, \
            patch('sys.stderr', new_callable=io.StringIO):
        code = main(list(argv))
    return code, out.getvalue()


class TestCommands(unittest.TestCase):
    def test_multispin(self):
        code, out = run_cli('multispin', '--model', 'spm', '--beta', '1.0',
                            '--sites', '[[0,0],[2,0],[0,2],[2,2]]')
        self.assertEqual(code, EXIT_OK)
        self.assertIn("n(A) = 4", out)

    def test_decompose_not_equivalent(self):
        code, out = run_cli('decompose', '--model', 'spm', '--sites', '[[0,0]]')
        self.assertEqual(code, EXIT_OK)
        self.assertIn("A no es equivalente a ∅", out)

    def test_decompose_triangle(self):
        code, out = run_cli('decompose', '--model', 'tpm', '--sites', '[[0,0],[0,2],[2,2]]')
        self.assertEqual(code, EXIT_OK)
        self.assertIn("n(A) = 3", out)

    def test_renorm_check(self):
        code, out = run_cli('renorm-check', '--model', 'spm', '--ell', '2', '--N', '1', '--beta', '1.0')
        self.assertEqual(code, EXIT_OK)
        self.assertIn("PASS", out)

    def test_magnetization_scan(self):
        code, out = run_cli('magnetization', '--scan', '--beta', '1', '--ells', '1,2,3')
        self.assertEqual(code, EXIT_OK)
        lines = out.strip().splitlines()
        self.assertEqual(lines[0], "beta,ell,value")
        self.assertEqual(len(lines), 4)

    def test_lengths_csv(self):
        code, out = run_cli('lengths', '--model', 'tpm', '--betas', '6,7')
        self.assertEqual(code, EXIT_OK)
        lines = out.strip().splitlines()
        self.assertEqual(lines[0], "beta,kind,lo,hi,flag")
        self.assertEqual(len(lines), 5)

    def test_json_block(self):
        code, out = run_cli('multispin', '--beta', '2.0', '--sites', '[[0,0],[1,0],[0,1],[1,1]]', '--json')
        self.assertEqual(code, EXIT_OK)
        payload = json.loads(out[out.index('{'):])
        self.assertEqual(payload['n'], 1)


class TestUsageErrors(unittest.TestCase):
    def test_mcmc_requires_seed(self):
        code, _ = run_cli('mcmc-validate', '--beta', '1.0')
        self.assertEqual(code, EXIT_USAGE)

    def test_bad_sites(self):
        code, _ = run_cli('multispin', '--beta', '1.0', '--sites', '[[0,0')
        self.assertEqual(code, EXIT_USAGE)

    def test_unknown_subcommand(self):
        with patch('sys.stderr', new_callable=io.StringIO):
            with self.assertRaises(SystemExit) as ctx:
                main(['teleport'])
        self.assertEqual(ctx.exception.code, 2)

    def test_config_schema(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'run.json')
            with open(path, 'w') as f:
                json.dump({'schema': 2, 'beta': 1.0}, f)
            code, _ = run_cli('magnetization', '--ell', '1', '--config', path)
        self.assertEqual(code, EXIT_USAGE)

    def test_config_fills_arguments(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'run.json')
            with open(path, 'w') as f:
                json.dump({'schema': 1, 'command': 'magnetization', 'beta': 1.0, 'ell': 1}, f)
            code, out = run_cli('magnetization', '--config', path)
        self.assertEqual(code, EXIT_OK)
        self.assertIn("μ+(σ_0) ℓ=1", out)

    def test_flag_zero_overrides_config(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'run.json')
            with open(path, 'w') as f:
                json.dump({'schema': 1, 'beta': 2.0}, f)
            code, out = run_cli('multispin', '--beta', '0', '--sites', '[[0,0],[1,0],[0,1],[1,1]]',
                                '--json', '--config', path)
        self.assertEqual(code, EXIT_OK)
        payload = json.loads(out[out.index('{'):])
        self.assertEqual(payload['beta'], 0.0)
        self.assertEqual(payload['value'], 0.0)
        self.assertEqual(payload['n'], 1)


class TestSettings(unittest.TestCase):
    def test_defaults_are_valid(self):
        self.assertEqual(validate_settings(DEFAULT_SETTINGS), [])
        self.assertEqual(validate_settings(get_settings()), [])

    def test_invalid_values(self):
        broken = merge_settings(DEFAULT_SETTINGS, {'lengths': {'u': 0.7}, 'enumeration': {'cap': 64}})
        errors = validate_settings(broken)
        self.assertEqual(len(errors), 2)
        self.assertEqual(DEFAULT_SETTINGS['lengths']['u'], 0.1)

    def test_quick_verification_group(self):
        checks = verify_all(get_settings(), quick=True, only=['multispin'])
        self.assertTrue(checks)
        self.assertTrue(all(c['ok'] for c in checks), msg=str([c for c in checks if not c['ok']]))
        self.assertEqual({c['group'] for c in checks}, {'multispin'})

    def test_ordering_group_reports_every_beta(self):
        checks = verify_all(TestConfig.SETTINGS, only=['ordering'])
        rows = [c for c in checks if c['name'].startswith('orden ')]
        self.assertEqual(len(rows), 6)
        self.assertTrue(all(c['status'] in ('ok', 'inconclusive') for c in rows), msg=str(rows))
        self.assertTrue(all(c['ok'] for c in checks), msg=str([c for c in checks if not c['ok']]))

    def test_monte_carlo_band(self):
        self.assertEqual(MC_SIGMAS, TestConfig.SIGMAS)
        self.assertTrue(VerificationSuite._within('x', 3.5, 0.0, 1.0)['ok'])
        self.assertFalse(VerificationSuite._within('x', 4.5, 0.0, 1.0)['ok'])


if __name__ == '__main__':
    unittest.main()
