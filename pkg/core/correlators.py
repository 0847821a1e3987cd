# core/correlators.py
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Optional, Tuple

from core.f2cycles import cycle_space, plus_bc_generators
from core.gf2 import (EchelonBasis, independent_subset, min_weight_in_coset, polynomial_sum,
                      span_weight_counts)
from core.gibbs_exact import GibbsEnumerator, spin_product_observable
from core.renorm import log_tanh_half
from core.shadows import minimal_decomposition
from models.cycles import CycleBasis, ParitySet
from models.errors import CycleCountCapError, DomainError, NotInSpanError, NotRepresentableError
from models.lattice import ModelKind, ModelSpec, PlaquetteMode, Region, Site
from models.specs import GibbsSpec

logger = logging.getLogger(__name__)


@dataclass
class MultispinValue:
    """μ([σ]_A) junto con el tamaño n(A) de la descomposición usada (None si A ≁ ∅)."""
    value: float
    n: Optional[int]
    log_value: float

    def to_dict(self) -> Dict[str, Any]:
        return {'value': self.value, 'n': self.n, 'log_value': self.log_value}


def multispin_infinite(model: ModelSpec, sites: Iterable[Tuple[int, int]], beta: float) -> MultispinValue:
    """
    μ^β([σ]_A) en volumen infinito: 0 si A ≁ ∅ y tanh(β/2)^{n(A)} si A ∼ ∅.

    El valor se calcula en dominio logarítmico.
    """
    if beta < 0:
        raise DomainError(f"beta debe ser no negativo, recibido {beta}")
    decomposition = minimal_decomposition(model, sites)
    if decomposition is None:
        return MultispinValue(0.0, None, -math.inf)
    n = decomposition.size
    if n == 0:
        return MultispinValue(1.0, 0, 0.0)
    log_value = n * log_tanh_half(beta)
    return MultispinValue(math.exp(log_value), n, log_value)


# --- volumen finito con condición más ---

@dataclass
class PlusRepresentation:
    """α_A ⊂ B^+(Λ) con suma de vértices A, y el espacio de ciclos K^+(Λ)."""
    alpha: ParitySet
    kernel: CycleBasis

    @property
    def n_bits(self) -> int:
        return len(self.kernel.universe)


def _kernel(model: ModelSpec, region: Region) -> CycleBasis:
    if model.kind == ModelKind.SPM and region.kind == "centered_box":
        return plus_bc_generators(region.params['ell'])
    return cycle_space(model, region, PlaquetteMode.CLIPPED, merge=False)


def plus_representation(model: ModelSpec, region: Region, sites: Iterable[Tuple[int, int]]) -> PlusRepresentation:
    """
    Resuelve en F2 una familia de plaquetas recortadas cuya suma de vértices es A.

    Raises:
        NotRepresentableError: con el residuo de la eliminación si A no es representable
    """
    sites = [Site(*s) for s in sites]
    outside = [s for s in sites if s not in region]
    if outside:
        raise DomainError(f"A debe estar contenido en Λ; fuera: {outside[:3]}")
    kernel = _kernel(model, region)
    universe = kernel.universe
    columns = [sum(1 << region.index(s) for s in members) for members in universe.site_sets]
    target = 0
    for s in sites:
        target ^= 1 << region.index(s)
    try:
        combo = EchelonBasis.from_vectors(columns).solve(target)
    except NotInSpanError as e:
        residual = frozenset(region.sites[i] for i in range(len(region)) if (e.residual >> i) & 1)
        raise NotRepresentableError("A no es suma de plaquetas recortadas de Λ", residual=residual)
    return PlusRepresentation(ParitySet(combo, universe), kernel)


def multispin_plus_finite(model: ModelSpec, region: Region, sites: Iterable[Tuple[int, int]], beta: float,
                          method: str = "cycle-expansion", config: Optional[Dict[str, Any]] = None) -> float:
    """
    μ^{β,+}_Λ([σ]_A).

    Args:
        method: "cycle-expansion" usa Σ_{α∈K^+} t^{|α Δ α_A|} / Σ_{α∈K^+} t^{|α|};
            "enumeration" recorre los 2^|Λ| estados
    """
    sites = [Site(*s) for s in sites]
    if method == "enumeration":
        spec = GibbsSpec(model, region, beta, plaquette_mode=PlaquetteMode.CLIPPED)
        return GibbsEnumerator(config).expectation(spec, spin_product_observable(region, sites))
    if method != "cycle-expansion":
        raise DomainError(f"Método desconocido '{method}'")

    rep = plus_representation(model, region, sites)
    cap = (config or {}).get('enumeration', {}).get('cycle_generator_cap', 24)
    generators = independent_subset(rep.kernel.masks)
    t = math.tanh(beta / 2)
    numerator = polynomial_sum(span_weight_counts(generators, rep.n_bits, offset=rep.alpha.bits, cap=cap), t)
    denominator = polynomial_sum(span_weight_counts(generators, rep.n_bits, cap=cap), t)
    return numerator / denominator


def plus_lower_bound(model: ModelSpec, region: Region, sites: Iterable[Tuple[int, int]], beta: float,
                     cap: int = 24) -> Tuple[int, float]:
    """
    (n, tanh(β/2)^n) con n el menor número de plaquetas recortadas distintas de suma A.

    μ^{β,+}_Λ([σ]_A) ≥ tanh(β/2)^n para cualquier representación; si el espacio de ciclos
    excede el límite se usa la solución de la eliminación.
    """
    rep = plus_representation(model, region, sites)
    try:
        n = min_weight_in_coset(rep.alpha.bits, rep.kernel.masks, rep.n_bits, cap=cap)
    except CycleCountCapError:
        logger.warning("Espacio de ciclos demasiado grande: se usa la representación de la eliminación")
        n = len(rep.alpha)
    bound = 1.0 if n == 0 else math.exp(n * log_tanh_half(beta))
    return n, bound
