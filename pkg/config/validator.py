import json
import logging
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

logger = logging.getLogger(__name__)

SETTINGS_PATH = 'config/settings.json'


class RunConfig(BaseModel):
    """Configuración de ejecución que acepta la CLI (--config). Claves desconocidas se rechazan."""
    model_config = ConfigDict(extra='forbid', populate_by_name=True)

    schema_version: Literal[1] = Field(alias='schema')
    command: Optional[str] = None
    model: Optional[Literal['spm', 'tpm', 'rect']] = None
    width: Optional[int] = Field(default=None, ge=2)
    height: Optional[int] = Field(default=None, ge=2)
    beta: Optional[float] = Field(default=None, ge=0)
    betas: Optional[List[float]] = None
    sites: Optional[List[Tuple[int, int]]] = None
    ell: Optional[int] = Field(default=None, ge=1)
    ells: Optional[List[int]] = None
    n: Optional[int] = Field(default=None, ge=0)
    N: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = None
    threads: Optional[int] = Field(default=None, ge=1)
    finite: Optional[bool] = None
    threshold: Optional[float] = None
    sweeps: Optional[int] = Field(default=None, ge=1)
    burn_in: Optional[int] = Field(default=None, ge=0)
    thinning: Optional[int] = Field(default=None, ge=1)
    dynamics: Optional[Literal['heat-bath', 'metropolis']] = None
    settings: Dict[str, Dict[str, Any]] = Field(default_factory=dict)


def load_settings(path: str = SETTINGS_PATH) -> Optional[Dict[str, Any]]:
    try:
        with open(path, 'r') as f:
            return json.load(f)
    except Exception as e:
        logger.error(f"Error cargando configuración: {e}")
        return None


def validate_settings(config: Dict[str, Any]) -> List[str]:
    required_sections = {
        'enumeration': ['cap', 'chunk_bits', 'exhaustive_boundary_cap', 'cycle_generator_cap'],
        'boundary_family': ['seed', 'random_count'],
        'lengths': ['u', 'multispin_threshold', 'ratio', 'eps0', 'renorm_beta_threshold', 'max_ell'],
        'magnetization': ['threshold', 'prefactor'],
        'mcmc': ['dynamics', 'scan', 'sweeps', 'burn_in', 'thinning', 'batches', 'beta_warning'],
        'parallel': ['threads'],
        'logging': ['level'],
    }

    errors = []

    for section, keys in required_sections.items():
        if section not in config:
            errors.append(f"Falta sección '{section}'")
            continue

        for key in keys:
            if key not in config[section] or config[section][key] in [None, '', []]:
                errors.append(f"Configuración incorrecta en '{section}': Falta o vacío '{key}'")

    enumeration = config.get('enumeration', {})
    if isinstance(enumeration.get('cap'), int) and not 1 <= enumeration['cap'] <= 40:
        errors.append("'enumeration.cap' debe estar entre 1 y 40")
    if isinstance(enumeration.get('chunk_bits'), int) and not 4 <= enumeration['chunk_bits'] <= 24:
        errors.append("'enumeration.chunk_bits' debe estar entre 4 y 24")

    lengths = config.get('lengths', {})
    u = lengths.get('u')
    if isinstance(u, (int, float)) and not 0 < u < 0.5:
        errors.append("'lengths.u' debe estar en (0, 1/2)")

    mcmc = config.get('mcmc', {})
    if mcmc.get('dynamics') not in (None, 'heat-bath', 'metropolis'):
        errors.append(f"Dinámica desconocida '{mcmc.get('dynamics')}'")
    if mcmc.get('scan') not in (None, 'random', 'sequential'):
        errors.append(f"Orden de barrido desconocido '{mcmc.get('scan')}'")

    return errors


def merge_settings(base: Dict[str, Any], overrides: Dict[str, Dict[str, Any]]) -> Dict[str, Any]:
    """Copia de `base` con las secciones de `overrides` superpuestas clave a clave."""
    merged = {section: dict(values) for section, values in base.items()}
    for section, values in overrides.items():
        merged.setdefault(section, {}).update(values)
    return merged
