# core/lengths.py
"""
Longitudes críticas a escala de escritorio.

Cada estimación lleva su bandera: exacta, bracket (lo, hi) o cota inferior. Las
afirmaciones asintóticas no se comprueban aquí; solo se calcula lo que es calculable.
"""
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.stats import linregress

from core.gibbs_exact import cavity_boxes, psi_sup, sm_condition_value
from core.renorm import beta_prime, log_tanh_half
from models.boundary import BoundaryCondition
from models.errors import DomainError
from models.lattice import ModelKind, ModelSpec, Site
from models.results import Exactness, LengthEstimate, LengthKind
from models.specs import RenormSpec

logger = logging.getLogger(__name__)


def _lengths_settings(config: Optional[Dict[str, Any]]) -> Dict[str, Any]:
    lengths = (config or {}).get('lengths', {})
    return {
        'u': lengths.get('u', 0.1),
        'threshold': lengths.get('multispin_threshold', 0.2),
        'ratio': lengths.get('ratio', 5),
        'eps0': lengths.get('eps0', 0.1),
        'renorm_threshold': lengths.get('renorm_beta_threshold', 1.0),
        'max_ell': lengths.get('max_ell', 4),
        'mix_max_ell': lengths.get('mix_max_ell', 3),
    }


def _check_model(model: ModelSpec):
    if model.kind == ModelKind.RECT:
        raise DomainError("Las longitudes críticas solo están definidas para SPM y TPM")


def _needed_size(beta: float, threshold: float) -> float:
    """Menor n real con tanh(β/2)^n ≤ umbral; 0 si ya se cumple con n = 0."""
    if not 0 < threshold:
        raise DomainError(f"El umbral debe ser positivo, recibido {threshold}")
    if threshold >= 1:
        return 0.0
    log_t = log_tanh_half(beta)
    if log_t == -math.inf:
        return 0.0
    return math.log(threshold) / log_t


def _smallest_square_root(need: float) -> int:
    """Menor m >= 1 con m² >= need."""
    m = max(1, math.ceil(math.sqrt(need)))
    while m > 1 and (m - 1) ** 2 >= need:
        m -= 1
    while m * m < need:
        m += 1
    return m


def _smallest_power_of_three(need: float) -> int:
    """Menor k >= 0 con 3^k >= need."""
    k = 0
    while 3 ** k < need:
        k += 1
    return k


# --- familias extremales ---

def extremal_family(model: ModelSpec, ell: int) -> List[Site]:
    """
    Familia de F_ℓ con el menor n(A) conocido: las cuatro esquinas de un cuadrado de
    lado ℓ (SPM, n = ℓ²) o el triángulo de lado 2^⌈log2 ℓ⌉ (TPM, n = 3^k).
    """
    _check_model(model)
    if ell < 1:
        raise DomainError(f"ℓ debe ser >= 1, recibido {ell}")
    if model.kind == ModelKind.SPM:
        return [Site(0, 0), Site(ell, 0), Site(0, ell), Site(ell, ell)]
    side = 1 << (ell - 1).bit_length()
    return [Site(0, 0), Site(0, side), Site(side, side)]


def extremal_size(model: ModelSpec, ell: int) -> int:
    """n(A) de extremal_family(model, ℓ)."""
    if model.kind == ModelKind.SPM:
        return ell * ell
    return 3 ** (ell - 1).bit_length()


# --- longitud multispín ---

def ell_multispin(model: ModelSpec, beta: float, threshold: float = 0.2) -> LengthEstimate:
    """
    Bracket de ℓ_multispin = min{ℓ: sup_{A∈F_ℓ} |μ^β([σ]_A)| ≤ umbral}.

    lo sale de la familia extremal (su valor debe quedar por debajo del umbral);
    hi de la cota n(A) >= ⌊ℓ/2⌋² (SPM) o n(A) >= 3^{k−1} con 2^k ≤ ℓ (TPM).
    Un A no vacío equivalente al vacío tiene siempre n(A) >= 1.
    """
    _check_model(model)
    if beta < 0:
        raise DomainError(f"beta debe ser no negativo, recibido {beta}")
    params = {'threshold': threshold}
    need = _needed_size(beta, threshold)
    if need <= 1:
        certainty = Exactness.EXACT if beta == 0 else Exactness.BRACKET
        return LengthEstimate(LengthKind.MULTISPIN, beta, 1, 1, certainty, params)

    if model.kind == ModelKind.SPM:
        m = _smallest_square_root(need)
        lo, hi = m, 2 * m
    else:
        k = _smallest_power_of_three(need)
        lo = (1 << (k - 1)) + 1
        hi = 1 << (k + 1)
    return LengthEstimate(LengthKind.MULTISPIN, beta, lo, hi, Exactness.BRACKET, params)


# --- longitud de renormalización ---

def ell_renorm(model: ModelSpec, beta: float, threshold: float = 1.0) -> LengthEstimate:
    """
    Menor paso de decimación ℓ con β′(β, ℓ) ≤ umbral (ℓ = 2^n en el TPM).

    β′ ≤ c equivale a tanh(β/2)^k ≤ tanh(c/2); el candidato se confirma con beta_prime.
    """
    _check_model(model)
    if threshold <= 0:
        raise DomainError(f"El umbral debe ser positivo, recibido {threshold}")
    need = _needed_size(beta, math.tanh(threshold / 2))
    if model.kind == ModelKind.SPM:
        ell = _smallest_square_root(need)
        spec, previous = RenormSpec.spm(ell), RenormSpec.spm(ell - 1) if ell > 1 else None
    else:
        n = _smallest_power_of_three(need)
        spec, previous = RenormSpec.tpm(n), RenormSpec.tpm(n - 1) if n > 0 else None
        ell = spec.ell

    if beta_prime(beta, spec).value > threshold * (1 + 1e-12):
        raise ArithmeticError(f"β′(β={beta}, ℓ={ell}) supera el umbral {threshold}")
    if previous is not None and beta_prime(beta, previous).value <= threshold * (1 - 1e-12):
        raise ArithmeticError(f"β′(β={beta}, ℓ={previous.ell}) ya cumple el umbral {threshold}")
    return LengthEstimate(LengthKind.RENORM, beta, ell, ell, Exactness.EXACT, {'threshold': threshold})


# --- longitud de cavidad ---

def ell_cavity_estimate(model: ModelSpec, beta: float, u: float = 0.1, ratio: int = 5,
                        method: str = "auto", max_ell: int = 4,
                        bc_family: Optional[Sequence[BoundaryCondition]] = None, seed: int = 0,
                        config: Optional[Dict[str, Any]] = None) -> LengthEstimate:
    """
    ℓ_cavity = min{ℓ: ψ(ℓ′) ≤ u para todo ℓ′ >= ℓ}, sobre los ℓ calculables.

    Devuelve 1 + el mayor ℓ explorado con ψ(ℓ) > u. El resultado es una cota inferior:
    la exploración es finita y la familia de bordes puede no ser exhaustiva. Con
    method="auto" se exploran solo los ℓ cuyo Λ cabe en el límite de enumeración.
    """
    _check_model(model)
    params = {'u': u, 'ratio': ratio}
    if beta == 0:
        return LengthEstimate(LengthKind.CAVITY, beta, 1, 1, Exactness.EXACT, params)
    if method == "mcmc" and beta > 2.5:
        raise DomainError(f"La estimación Monte Carlo de ψ requiere β ≤ 2.5, recibido {beta}")

    cap = (config or {}).get('enumeration', {}).get('cap', 28)
    last_above, scanned = 0, []
    for ell in range(1, max_ell + 1):
        outer, _ = cavity_boxes(ell, ratio)
        if method != "mcmc" and len(outer) > cap:
            logger.info(f"ψ({ell}) fuera del límite de enumeración ({len(outer)} sitios): fin de la exploración")
            break
        psi = psi_sup(model, ell, ratio, beta, bc_family, method, seed, config)
        scanned.append({'ell': ell, 'psi': psi.value, 'flag': psi.exactness.value})
        logger.debug(f"ψ({ell}) = {psi.value!r} [{psi.exactness.value}]")
        if psi.value > u:
            last_above = ell

    if not scanned:
        logger.warning(f"Ningún ℓ calculable para ψ con R={ratio}: se devuelve la cota trivial 1")
    params['scanned'] = scanned
    value = last_above + 1
    return LengthEstimate(LengthKind.CAVITY, beta, value, value, Exactness.LOWER_BOUND, params)


# --- longitud de mezcla ---

def ell_mix_estimate(model: ModelSpec, beta: float, eps0: float = 0.1,
                     bc_family: Optional[Sequence[BoundaryCondition]] = None, max_ell: int = 3,
                     config: Optional[Dict[str, Any]] = None) -> LengthEstimate:
    """
    Menor ℓ con e^{4β‖H‖} ℓ φ(ℓ) ≤ ε₀ entre 1 y max_ell.

    El valor es exacto si todos los φ usados lo son; si no hay cruce se devuelve
    max_ell + 1 como cota inferior.
    """
    _check_model(model)
    params = {'eps0': eps0}
    if beta == 0:
        return LengthEstimate(LengthKind.MIX, beta, 1, 1, Exactness.EXACT, params)

    all_exact = True
    scanned = []
    for ell in range(1, max_ell + 1):
        value = sm_condition_value(model, ell, beta, bc_family, config)
        scanned.append({'ell': ell, 'value': value.value, 'flag': value.exactness.value})
        if value.value <= eps0:
            params['scanned'] = scanned
            exact = all_exact and value.exactness == Exactness.EXACT
            certainty = Exactness.EXACT if exact else Exactness.LOWER_BOUND
            return LengthEstimate(LengthKind.MIX, beta, ell, ell, certainty, params)
        all_exact = all_exact and value.exactness == Exactness.EXACT

    params['scanned'] = scanned
    logger.info(f"Sin cruce de la condición de mezcla hasta ℓ={max_ell} para β={beta}")
    return LengthEstimate(LengthKind.MIX, beta, max_ell + 1, max_ell + 1, Exactness.LOWER_BOUND, params)


# --- ajustes de pendiente ---

@dataclass
class SlopeFit:
    """Ajuste lineal de ln ℓ frente a β."""
    kind: str
    slope: float
    intercept: float
    stderr: float
    rvalue: float

    def to_dict(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'slope': self.slope, 'intercept': self.intercept,
                'stderr': self.stderr, 'rvalue': self.rvalue}


def expected_slope(model: ModelSpec) -> float:
    """1/2 en el SPM, ln2/ln3 en el TPM."""
    return 0.5 if model.kind == ModelKind.SPM else math.log(2) / math.log(3)


def length_series(model: ModelSpec, betas: Iterable[float], threshold: float = 0.2,
                  renorm_threshold: float = 1.0) -> pd.DataFrame:
    """Serie (beta, ln_multispin_lo, ln_multispin_hi, ln_renorm) para ajustes y gráficas."""
    rows = []
    for beta in betas:
        multispin = ell_multispin(model, beta, threshold)
        renorm = ell_renorm(model, beta, renorm_threshold)
        rows.append({'beta': beta, 'ln_multispin_lo': math.log(multispin.lo),
                     'ln_multispin_hi': math.log(multispin.hi), 'ln_renorm': math.log(renorm.lo)})
    return pd.DataFrame(rows, columns=['beta', 'ln_multispin_lo', 'ln_multispin_hi', 'ln_renorm'])


def fit_slopes(series: pd.DataFrame) -> List[SlopeFit]:
    """linregress de cada columna ln_* de la serie frente a β."""
    fits = []
    for column in [c for c in series.columns if c.startswith('ln_')]:
        result = linregress(series['beta'].to_numpy(), series[column].to_numpy())
        fits.append(SlopeFit(column[3:], float(result.slope), float(result.intercept),
                             float(result.stderr), float(result.rvalue)))
    return fits


def scaling_slopes(model: ModelSpec, beta_min: float = 6.0, beta_max: float = 20.0,
                   points: int = 141, threshold: float = 0.2) -> Dict[str, SlopeFit]:
    betas = np.linspace(beta_min, beta_max, points)
    return {fit.kind: fit for fit in fit_slopes(length_series(model, betas, threshold))}


# --- tabla de orden ---

def ordering_report(model: ModelSpec, betas: Iterable[float], config: Optional[Dict[str, Any]] = None,
                    cavity_method: str = "auto", include_mix: bool = True, seed: int = 0) -> pd.DataFrame:
    """
    Tabla de las cuatro longitudes por β con sus banderas.

    La columna ok recoge la desigualdad literal ℓ_multispin.lo ≤ ℓ_cavity y status la califica
    según la bandera de ℓ_cavity (ver ordering_status). Las relaciones
    O(·) entre longitudes son asintóticas y solo se reportan.
    """
    settings = _lengths_settings(config)
    rows = []
    for beta in betas:
        multispin = ell_multispin(model, beta, settings['threshold'])
        cavity = ell_cavity_estimate(model, beta, settings['u'], settings['ratio'], cavity_method,
                                     settings['max_ell'], seed=seed, config=config)
        renorm = ell_renorm(model, beta, settings['renorm_threshold'])
        row = {'beta': beta, 'multispin_lo': multispin.lo, 'multispin_hi': multispin.hi,
               'cavity': cavity.value, 'cavity_flag': cavity.certainty.value,
               'renorm': renorm.value}
        if include_mix:
            mix = ell_mix_estimate(model, beta, settings['eps0'], max_ell=settings['mix_max_ell'], config=config)
            row.update({'mix': mix.value, 'mix_flag': mix.certainty.value})
        row['ok'] = multispin.lo <= cavity.value
        row['status'] = ordering_status(row['ok'], cavity.certainty)
        if row['status'] == 'violated':
            logger.warning(f"β={beta}: ℓ_multispin.lo={multispin.lo} > ℓ_cavity={cavity.value} con ℓ_cavity exacta")
        elif row['status'] == 'inconclusive':
            logger.info(f"β={beta}: ℓ_multispin.lo={multispin.lo} > {cavity.value}, pero ℓ_cavity es solo cota "
                        f"inferior (exploración limitada a ℓ ≤ {settings['max_ell']})")
        rows.append(row)
    return pd.DataFrame(rows)


def ordering_status(holds: bool, cavity_certainty: Exactness) -> str:
    """'ok', 'inconclusive' si falla contra una cota inferior de ℓ_cavity, o 'violated'."""
    if holds:
        return 'ok'
    return 'violated' if cavity_certainty == Exactness.EXACT else 'inconclusive'


def length_records(estimates: Iterable[LengthEstimate]) -> pd.DataFrame:
    """CSV (beta, kind, lo, hi, flag)."""
    return pd.DataFrame([e.to_dict() for e in estimates], columns=['beta', 'kind', 'lo', 'hi', 'flag'])
