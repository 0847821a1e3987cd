# core/__init__.py
from core.correlators import multispin_infinite, multispin_plus_finite, plus_lower_bound
from core.f2cycles import cycle_space, decompose, screening_ratio
from core.gibbs_exact import GibbsEnumerator, partition_function, phi_ell, psi_sup
from core.lengths import ell_cavity_estimate, ell_mix_estimate, ell_multispin, ell_renorm
from core.magnetization import magnetization_plus_exact
from core.mcmc import ChainRunner
from core.renorm import beta_prime, decimation_check
from core.shadows import shadow, shadow_sum
from core.verification import VerificationSuite, verify_all

__all__ = [
    'ChainRunner',
    'GibbsEnumerator',
    'VerificationSuite',
    'beta_prime',
    'cycle_space',
    'decimation_check',
    'decompose',
    'ell_cavity_estimate',
    'ell_mix_estimate',
    'ell_multispin',
    'ell_renorm',
    'magnetization_plus_exact',
    'multispin_infinite',
    'multispin_plus_finite',
    'partition_function',
    'phi_ell',
    'plus_lower_bound',
    'psi_sup',
    'screening_ratio',
    'shadow',
    'shadow_sum',
    'verify_all',
]
