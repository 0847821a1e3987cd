class TestConfig:
    SEED = 2024
    EXACT_TOL = 1e-12          # identidades exactas (log Z, decimación, fórmulas cerradas)
    LOOSE_TOL = 1e-10
    SIGMAS = 4                 # bandas Monte Carlo (una sola semilla por test)
    TRANSITION_SIGMAS = 4.5    # conteos de transiciones: ~80 entradas comparadas a la vez
    SLOPE_TOL_SPM = 0.02
    SLOPE_TOL_TPM = 0.03
    SLOPE_BETA_MIN = 6.0
    SLOPE_BETA_MAX = 20.0
    SLOPE_POINTS = 141
    MULTISPIN_THRESHOLD = 0.2
    BETA_GRID = [0.5, 1.0, 1.5, 2.0, 3.0]
    MCMC_SWEEPS = 400
    MCMC_BURN_IN = 50
    SETTINGS = {
        'enumeration': {'cap': 28, 'chunk_bits': 16, 'exhaustive_boundary_cap': 20, 'cycle_generator_cap': 24},
        'boundary_family': {'seed': 2024, 'random_count': 4},
        'lengths': {'u': 0.1, 'multispin_threshold': 0.2, 'ratio': 3, 'eps0': 0.1,
                    'renorm_beta_threshold': 1.0, 'max_ell': 2, 'mix_max_ell': 1},
        'mcmc': {'dynamics': 'heat-bath', 'scan': 'random', 'sweeps': 400, 'burn_in': 50,
                 'thinning': 1, 'batches': 20, 'beta_warning': 2.5, 'replicas': 8, 'init': 'random'},
        'parallel': {'threads': 1},
    }
