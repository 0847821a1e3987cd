# core/magnetization.py
"""
Magnetización exacta del SPM en el origen de [−ℓ, ℓ]² con condición más.

μ^+_Λ(σ_0) = N(β)/D(β) con L = 2ℓ+2 y t = tanh(β/2):

    D = Σ_i C(L,i) (t^i + t^{L−i})^L
    N = t^{L²/4} Σ_{u,v} C(L/2,u) C(L/2,v) (t^{2v} + t^{L−2v} + t^{2u} + t^{L−2u})^{L/2}

Todas las sumas se hacen en dominio logarítmico con binomiales por log-gamma.
"""
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional

import numpy as np
import pandas as pd
from scipy.special import gammaln, logsumexp
from scipy.stats import binom

from core.gibbs_exact import GibbsEnumerator, spin_observable
from models.errors import DomainError
from models.lattice import ModelSpec, Region
from models.results import MagnetizationResult
from models.specs import GibbsSpec

logger = logging.getLogger(__name__)


def log_binomial(n: int, k: np.ndarray) -> np.ndarray:
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def _log_t(beta: float) -> float:
    e = math.exp(-beta)
    return math.log1p(-e) - math.log1p(e)


def _check(ell: int, beta: float):
    if ell < 1:
        raise DomainError(f"ℓ debe ser >= 1, recibido {ell}")
    if beta < 0:
        raise DomainError(f"beta debe ser no negativo, recibido {beta}")


def log_denominator(ell: int, beta: float) -> float:
    """log D(β); el sumando es simétrico en i ↔ L−i."""
    L = 2 * ell + 2
    log_t = _log_t(beta)
    i = np.arange(L + 1)
    terms = log_binomial(L, i) + L * np.logaddexp(i * log_t, (L - i) * log_t)
    if not np.allclose(terms, terms[::-1], rtol=1e-12, atol=1e-9):
        raise ArithmeticError("El sumando de D no es simétrico")
    return float(logsumexp(terms))


def log_numerator(ell: int, beta: float) -> float:
    """log N(β); la doble suma es simétrica en (u, v) y se recorre el triángulo u ≤ v."""
    L = 2 * ell + 2
    half = L // 2
    log_t = _log_t(beta)
    lb = log_binomial(half, np.arange(half + 1))
    rows = []
    for u in range(half + 1):
        v = np.arange(u, half + 1)
        inner = np.logaddexp.reduce([2 * v * log_t, (L - 2 * v) * log_t,
                                     np.full(len(v), 2 * u * log_t),
                                     np.full(len(v), (L - 2 * u) * log_t)])
        row = lb[u] + lb[v] + half * inner
        row[1:] += math.log(2)
        rows.append(logsumexp(row))
    return (L * L / 4) * log_t + float(logsumexp(rows))


def magnetization_plus_exact(ell: int, beta: float) -> MagnetizationResult:
    _check(ell, beta)
    L = 2 * ell + 2
    if beta == 0:
        return MagnetizationResult(ell, beta, L, -math.inf, math.log(2))
    return MagnetizationResult(ell, beta, L, log_numerator(ell, beta), log_denominator(ell, beta))


def magnetization_brute_force(ell: int, beta: float,
                              config: Optional[Dict[str, Any]] = None) -> MagnetizationResult:
    """Enumeración de los 9 espines de [−1, 1]² con condición más y familia meeting."""
    _check(ell, beta)
    if ell != 1:
        raise DomainError("La enumeración de la magnetización solo está disponible para ℓ = 1")
    region = Region.centered_box(1)
    spec = GibbsSpec(ModelSpec.spm(), region, beta)
    run = GibbsEnumerator(config).run(spec, [spin_observable(region, (0, 0))])
    log_z = float(run.log_z[0])
    value = float(run.means[0, 0])
    log_n = log_z + math.log(value) if value > 0 else -math.inf
    return MagnetizationResult(ell, beta, 2 * ell + 2, log_n, log_z, method="brute-force")


def log_denominator_expectation(ell: int, beta: float) -> float:
    """
    log D por la forma D = 2^{2L} t^{L²/2} E[((t^X + t^{−X})/2)^L] con X = Bin(L, 1/2) − L/2.

    Sirve de comprobación independiente de log_denominator.
    """
    L = 2 * ell + 2
    log_t = _log_t(beta)
    i = np.arange(L + 1)
    x = i - L / 2
    log_inner = L * (np.logaddexp(x * log_t, -x * log_t) - math.log(2))
    log_e = logsumexp(log_inner, b=binom.pmf(i, L, 0.5))
    return 2 * L * math.log(2) + (L * L / 2) * log_t + float(log_e)


# --- barrido de decaimiento ---

def magnetization_decay_scan(beta: float, ells: Iterable[int], threshold: float = 0.2) -> pd.DataFrame:
    """Tabla (beta, ell, value, below) sobre la rejilla de ℓ."""
    rows = []
    for ell in ells:
        result = magnetization_plus_exact(ell, beta)
        rows.append({'beta': beta, 'ell': ell, 'value': result.value,
                     'below': result.value < threshold})
    return pd.DataFrame(rows, columns=['beta', 'ell', 'value', 'below'])


def first_crossing(table: pd.DataFrame) -> Optional[int]:
    """Menor ℓ de la tabla con valor por debajo del umbral, o None."""
    below = table[table['below']]
    if below.empty:
        return None
    return int(below['ell'].min())


def magnetization_crossover(beta: float, threshold: float = 0.2, ell_max: int = 1 << 16) -> Optional[int]:
    """
    Menor ℓ con μ^+_{Λ_ℓ}(σ_0) < umbral, por duplicación y bisección (el valor decrece con ℓ).

    None si no hay cruce hasta ell_max.
    """
    if threshold > 1:
        return None
    if magnetization_plus_exact(1, beta).value < threshold:
        return 1
    lo, hi = 1, 2
    while magnetization_plus_exact(hi, beta).value >= threshold:
        lo, hi = hi, hi * 2
        if hi > ell_max:
            logger.info(f"Sin cruce del umbral {threshold} hasta ℓ={ell_max} para β={beta}")
            return None
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if magnetization_plus_exact(mid, beta).value < threshold:
            hi = mid
        else:
            lo = mid
    return hi


def positivity_check(betas: Iterable[float], prefactor: float = 0.1,
                     threshold: float = 0.2) -> List[Dict[str, Any]]:
    """μ^+(σ_0) en ℓ = round(prefactor·e^β/2), que debe quedar por encima del umbral."""
    rows = []
    for beta in betas:
        ell = max(1, round(prefactor * math.exp(beta) / 2))
        value = magnetization_plus_exact(ell, beta).value
        rows.append({'beta': beta, 'ell': ell, 'value': value, 'ok': value >= threshold})
    return rows
