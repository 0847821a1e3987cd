# config/__init__.py
"""
Módulo de configuración del toolkit de plaquetas.
Carga settings.json y aplica las variables de entorno (.env incluido).
"""
import os
from typing import Any, Dict, Optional

from dotenv import load_dotenv

from config.validator import (SETTINGS_PATH, RunConfig, load_settings, merge_settings,
                              validate_settings)

load_dotenv()

# --- Valores por defecto si settings.json no está disponible ---
DEFAULT_SETTINGS: Dict[str, Any] = {
    'enumeration': {'cap': 28, 'chunk_bits': 16, 'exhaustive_boundary_cap': 20, 'cycle_generator_cap': 24},
    'boundary_family': {'seed': 2024, 'random_count': 8},
    'lengths': {'u': 0.1, 'multispin_threshold': 0.2, 'ratio': 5, 'eps0': 0.1,
                'renorm_beta_threshold': 1.0, 'max_ell': 4, 'mix_max_ell': 3},
    'magnetization': {'threshold': 0.2, 'prefactor': 0.1},
    'mcmc': {'dynamics': 'heat-bath', 'scan': 'random', 'sweeps': 2000, 'burn_in': 200,
             'thinning': 1, 'batches': 20, 'beta_warning': 2.5,
             'replicas': 8, 'init': 'random'},
    'parallel': {'threads': 1},
    'logging': {'level': 'INFO', 'file': ''},
}

# --- Variables de entorno ---
ENUM_CAP_ENV = "PLAQ_ENUM_CAP"
LOG_LEVEL_ENV = "PLAQ_LOG_LEVEL"
THREADS_ENV = "PLAQ_THREADS"


def get_settings(path: Optional[str] = None) -> Dict[str, Any]:
    """
    Devuelve la configuración efectiva: settings.json sobre los valores por defecto,
    y encima las variables de entorno.
    """
    here = os.path.dirname(os.path.abspath(__file__))
    path = path or os.path.join(here, 'settings.json')
    loaded = load_settings(path) or {}
    settings = merge_settings(DEFAULT_SETTINGS, loaded)

    if os.getenv(ENUM_CAP_ENV):
        settings['enumeration']['cap'] = int(os.getenv(ENUM_CAP_ENV))
    if os.getenv(LOG_LEVEL_ENV):
        settings['logging']['level'] = os.getenv(LOG_LEVEL_ENV)
    if os.getenv(THREADS_ENV):
        settings['parallel']['threads'] = int(os.getenv(THREADS_ENV))
    return settings


def enumeration_cap(settings: Optional[Dict[str, Any]] = None) -> int:
    settings = settings or get_settings()
    return settings.get('enumeration', {}).get('cap', 28)


__all__ = ['DEFAULT_SETTINGS', 'RunConfig', 'SETTINGS_PATH', 'enumeration_cap', 'get_settings',
           'load_settings', 'merge_settings', 'validate_settings']
