# core/f2cycles.py
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from core.enumeration import ExteriorJoint, build_terms, enumeration_settings, exterior_joint
from core.geometry import family_universe
from core.gf2 import (EchelonBasis, gf2_nullspace, independent_subset, polynomial_sum,
                      span_weight_counts, to_words)
from core.shadows import tpm_pascal_bases
from models.boundary import BoundaryCondition
from models.cycles import CycleBasis, ParitySet, Provenance, iter_bits
from models.errors import DomainError, NotInSpanError, PlaquetteError
from models.lattice import ModelKind, ModelSpec, PlaquetteMode, Region, Site
from models.results import Exactness
from models.specs import GibbsSpec

logger = logging.getLogger(__name__)


def is_cycle(alpha: ParitySet, region: Region) -> bool:
    """Cada sitio de la región está en un número par de plaquetas de α."""
    for row in alpha.universe.site_incidence(region):
        if (alpha.bits & row).bit_count() & 1:
            return False
    return True


def cycle_space(model: ModelSpec, region: Region, mode: PlaquetteMode = PlaquetteMode.MEETING,
                merge: bool = True) -> CycleBasis:
    """Base genérica: núcleo de la matriz de incidencia sitio × plaqueta."""
    universe = family_universe(model, region, mode, merge)
    kernel = gf2_nullspace(universe.site_incidence(region), len(universe))
    return CycleBasis(region, mode, universe, [ParitySet(k, universe) for k in kernel], Provenance.CUSTOM)


def spm_stripe_basis(n: int) -> CycleBasis:
    """Franjas H_j (bases con x2 = j) y V_j (bases con x1 = j), j = 0..n, sobre [n]²."""
    if n < 1:
        raise DomainError(f"[n]² requiere n >= 1, recibido {n}")
    model = ModelSpec.spm()
    region = Region.square(n)
    universe = family_universe(model, region, PlaquetteMode.MEETING)
    rows = [ParitySet.from_bases(universe, [(i, j) for i in range(n + 1)]) for j in range(n + 1)]
    cols = [ParitySet.from_bases(universe, [(j, i) for i in range(n + 1)]) for j in range(n + 1)]
    return CycleBasis(region, PlaquetteMode.MEETING, universe, rows + cols, Provenance.SPM_STRIPES, relations=1)


def tpm_pascal_basis(n: int) -> CycleBasis:
    """P_i = triángulo de Pascal de plaquetas con raíz (i, −1), cortado a B(T*^(n)), i ∈ [n]_−."""
    if n < 0:
        raise DomainError(f"n debe ser no negativo, recibido {n}")
    model = ModelSpec.tpm()
    region = Region.triangle(n)
    universe = family_universe(model, region, PlaquetteMode.MEETING)
    generators = []
    for i in range(-1, n + 1):
        bases = [b for b in tpm_pascal_bases((i, -1), n + 2) if universe.index_of_base(b) is not None]
        generators.append(ParitySet.from_bases(universe, bases))
    return CycleBasis(region, PlaquetteMode.MEETING, universe, generators, Provenance.TPM_PASCAL)


def plus_bc_generators(ell: int) -> CycleBasis:
    """
    Ciclos de fila R_i y columna C_i de B^+([−ℓ, ℓ]²), i = 0..2ℓ+1.

    R_i son las plaquetas recortadas con base en la fila −ℓ−1+i. La suma de todos
    los generadores es ∅ y es la única relación.
    """
    if ell < 1:
        raise DomainError(f"ℓ debe ser >= 1, recibido {ell}")
    model = ModelSpec.spm()
    region = Region.centered_box(ell)
    universe = family_universe(model, region, PlaquetteMode.CLIPPED, merge=False)
    span = range(-ell - 1, ell + 1)
    rows = [ParitySet.from_bases(universe, [(a, b) for a in span]) for b in span]
    cols = [ParitySet.from_bases(universe, [(b, a) for a in span]) for b in span]
    return CycleBasis(region, PlaquetteMode.CLIPPED, universe, rows + cols,
                      Provenance.PLUS_BC_ROWS_COLS, relations=1)


def decompose(alpha: ParitySet, basis: CycleBasis) -> Tuple[int, ...]:
    """
    Coeficientes en F2 de α respecto a los generadores.

    Para la base de Pascal basta leer la fila inferior: (i, −1) + B* ∈ P_j si y solo si i = j.
    """
    if alpha.universe is not basis.universe:
        raise DomainError("α y la base viven en universos distintos")
    if basis.provenance == Provenance.TPM_PASCAL:
        n = len(basis.generators) - 2
        coeffs = tuple(1 if (alpha.bits >> basis.universe.index_of_base((i, -1))) & 1 else 0
                       for i in range(-1, n + 1))
        rebuilt = 0
        for c, g in zip(coeffs, basis.generators):
            if c:
                rebuilt ^= g.bits
        if rebuilt != alpha.bits:
            raise NotInSpanError("α no está en el span de la base de Pascal", residual=rebuilt ^ alpha.bits)
        return coeffs

    echelon = EchelonBasis.from_vectors(basis.masks)
    combo = echelon.solve(alpha.bits)
    return tuple((combo >> k) & 1 for k in range(len(basis.generators)))


def combine(basis: CycleBasis, coeffs: Sequence[int]) -> ParitySet:
    bits = 0
    for c, g in zip(coeffs, basis.generators):
        if c:
            bits ^= g.bits
    return ParitySet(bits, basis.universe)


def weighted_cycle_sum(basis: CycleBasis, t: float, skip_empty: bool = False, cap: int = 24) -> float:
    """Σ t^{|α|} sobre el span de la base (sin ∅ si skip_empty)."""
    independent = independent_subset(basis.masks)
    if not independent:
        return 0.0 if skip_empty else 1.0
    counts = span_weight_counts(independent, len(basis.universe), cap=cap)
    total = polynomial_sum(counts, t)
    return total - 1.0 if skip_empty else total


def cycle_sum_bound(n: int, t: float) -> float:
    """exp{2(n+2) t^{(n+1)/3}} − 1."""
    return math.expm1(2 * (n + 2) * t ** ((n + 1) / 3))


def screening_bound(n: int, beta: float) -> float:
    """3 exp(2(n+2) tanh(β/2)^{(n+1)/3}) − 2."""
    return 3 * math.exp(2 * (n + 2) * math.tanh(beta / 2) ** ((n + 1) / 3)) - 2


def screening_region(model: ModelSpec, n: int) -> Region:
    """T*^(n): el cuadrado [n]² (SPM) o el triángulo (TPM)."""
    if model.kind == ModelKind.SPM:
        return Region.square(n)
    if model.kind == ModelKind.TPM:
        return Region.triangle(n)
    raise DomainError("La cota de apantallamiento solo está definida para SPM y TPM")


# --- desarrollo de alta temperatura ---

def high_temperature_log_partition(spec: GibbsSpec, cap: int = 24) -> float:
    """
    log Z^{τ,P} = |P| log cosh(β/2) + |Λ| log 2 + log Σ_{α ciclo} t^{|α|} Π_{B∈α} [τ]_{B∖Λ}.

    Los ciclos son el núcleo de la incidencia sitio × plaqueta de la familia activa.
    """
    terms = build_terms(spec.model, spec.region, spec.plaquette_mode, [spec.bc], spec.restricted)
    n_p = len(terms.masks)
    incidence = [sum(1 << j for j in range(n_p) if (int(terms.masks[j]) >> s) & 1)
                 for s in range(len(spec.region))]
    kernel = gf2_nullspace(incidence, n_p)
    sign_mask = sum(1 << j for j in range(n_p) if terms.signs[0, j] < 0)
    counts = span_weight_counts(kernel, n_p, sign_mask=sign_mask, cap=cap)
    total = polynomial_sum(counts, math.tanh(spec.beta / 2))
    if total <= 0:
        raise DomainError("La suma de ciclos no es positiva")
    return n_p * math.log(math.cosh(spec.beta / 2)) + len(spec.region) * math.log(2) + math.log(total)


@dataclass
class ScreeningReport:
    model: str
    n: int
    beta: float
    ratio: float
    bound: float
    exactness: Exactness
    expansion_ratio: Optional[float] = None
    argmax: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.ratio <= self.bound * (1 + 1e-12)

    def to_dict(self) -> Dict[str, Any]:
        return {'model': self.model, 'n': self.n, 'beta': self.beta, 'ratio': self.ratio,
                'bound': self.bound, 'flag': self.exactness.value,
                'expansion_ratio': self.expansion_ratio, 'ok': self.ok}


def _exhaustive_log_z(model: ModelSpec, region: Region, beta: float,
                      cap: int, exhaustive_cap: int) -> Optional[Tuple[np.ndarray, ExteriorJoint]]:
    joint = exterior_joint(model, region, cap, exhaustive_cap)
    if joint is None:
        return None
    log_z = np.empty(joint.n_rows)
    for start, log_w in joint.blocks(beta):
        log_z[start:start + len(log_w)] = logsumexp(log_w, axis=1)
    return log_z, joint


def screening_ratio(model: ModelSpec, n: int, beta: float, mode: PlaquetteMode = PlaquetteMode.MEETING,
                    bc_family: Optional[Sequence[BoundaryCondition]] = None,
                    config: Optional[Dict[str, Any]] = None) -> ScreeningReport:
    """
    sup_{τ,τ′} Z^{τ,P}/Z^{τ′,P} sobre T*^(n) con P = B(T*^(n)), frente a su cota.

    Exacto si el soporte exterior cabe en el límite exhaustivo; si no, supremo sobre la
    familia declarada (cota inferior). El cociente se recalcula con el desarrollo de
    alta temperatura para el par que realiza el supremo.
    """
    config = config or {}
    settings = enumeration_settings(config)
    exhaustive_cap = config.get('enumeration', {}).get('exhaustive_boundary_cap', 20)
    region = screening_region(model, n)
    bound = screening_bound(n, beta)

    # inside y clipped no leen el exterior
    if mode != PlaquetteMode.MEETING:
        return ScreeningReport(model.name, n, beta, 1.0, bound, Exactness.EXACT)

    exhaustive = _exhaustive_log_z(model, region, beta, settings['cap'], exhaustive_cap)
    if exhaustive is not None:
        log_z, joint = exhaustive
        hi, lo = int(np.argmax(log_z)), int(np.argmin(log_z))
        pair = (joint.boundary(hi), joint.boundary(lo))
        flag = Exactness.EXACT
    else:
        family = list(bc_family) if bc_family is not None else BoundaryCondition.declared_family(
            config.get('boundary_family', {}).get('seed', 2024),
            config.get('boundary_family', {}).get('random_count', 8))
        from core.gibbs_exact import GibbsEnumerator
        spec = GibbsSpec(model, region, beta, family[0], mode)
        log_z = GibbsEnumerator(config).run(spec, boundaries=family).log_z
        hi, lo = int(np.argmax(log_z)), int(np.argmin(log_z))
        pair = (family[hi], family[lo])
        flag = Exactness.LOWER_BOUND
        logger.info(f"Apantallamiento n={n} con familia declarada: cota inferior")

    ratio = float(np.exp(log_z[hi] - log_z[lo]))
    expansion = None
    try:
        top = high_temperature_log_partition(GibbsSpec(model, region, beta, pair[0], mode))
        bottom = high_temperature_log_partition(GibbsSpec(model, region, beta, pair[1], mode))
        expansion = math.exp(top - bottom)
    except PlaquetteError as e:
        logger.warning(f"No se pudo evaluar el desarrollo de alta temperatura: {e}")

    report = ScreeningReport(model.name, n, beta, ratio, bound, flag, expansion,
                             f"{pair[0].label}|{pair[1].label}")
    if not report.ok:
        logger.error(f"Cociente {ratio!r} supera la cota {bound!r} (n={n}, β={beta})")
    return report


# --- familias escalonadas ---

def is_staircase(sets: Sequence[Sequence[int]]) -> bool:
    """A_k ∖ (A_1 ∪ … ∪ A_{k−1}) ≠ ∅ para todo k."""
    seen = set()
    for s in sets:
        s = set(s)
        if not s - seen:
            return False
        seen |= s
    return True


@dataclass
class StaircaseCheck:
    lhs: float
    rhs: float
    staircase_ok: bool

    @property
    def equal(self) -> bool:
        return abs(self.lhs - self.rhs) <= 1e-12 * max(1.0, abs(self.rhs))


def staircase_expectation_check(sets: Sequence[Sequence[int]], c: float,
                                max_bits: int = 24) -> StaircaseCheck:
    """
    E[exp{c Σ_k 1([σ]_{A_k} = −1)}] bajo σ uniforme, frente a 2^{−m}(e^c + 1)^m.

    La igualdad está garantizada para familias escalonadas; si no lo son se devuelven
    ambos lados igualmente.
    """
    universe = sorted({v for s in sets for v in s})
    if len(universe) > max_bits:
        raise DomainError(f"Universo de {len(universe)} elementos supera {max_bits} bits")
    position = {v: k for k, v in enumerate(universe)}
    masks = np.array([sum(1 << position[v] for v in s) for s in sets], dtype=np.int64)
    states = np.arange(1 << len(universe), dtype=np.int64)
    if len(masks):
        defects = (np.bitwise_count(states[:, None] & masks[None, :]) & 1).sum(axis=1)
    else:
        defects = np.zeros(len(states))
    lhs = float(np.exp(c * defects).mean())
    m = len(sets)
    rhs = ((math.exp(c) + 1) / 2) ** m
    return StaircaseCheck(lhs, rhs, is_staircase(sets))


# --- condiciones más: ciclos de fila y columna ---

def alpha_w_size(ell: int, rows: int, cols: int) -> int:
    """|α(W)| = (i + j)L − 2ij con L = 2ℓ + 2."""
    L = 2 * ell + 2
    if not (0 <= rows <= L and 0 <= cols <= L):
        raise DomainError(f"i, j deben estar en [0, {L}]")
    return (rows + cols) * L - 2 * rows * cols


def alpha_w_star_size(ell: int, u: int, v: int, j: int, k: int) -> int:
    """
    |α(W) Δ α*| para W con u filas bajas, v filas altas, j columnas izquierdas y k derechas.

    Incluye el término L²/4 = (ℓ+1)² de las plaquetas de α*.
    """
    L = 2 * ell + 2
    half = L // 2
    if not all(0 <= p <= half for p in (u, v, j, k)):
        raise DomainError(f"u, v, j, k deben estar en [0, {half}]")
    return half * half + j * L + v * L - 2 * v * j - 2 * u * j - 2 * v * k + 2 * u * k


def alpha_star(basis: CycleBasis, ell: int) -> ParitySet:
    """Plaquetas recortadas contenidas en [0, ℓ] × [−ℓ, 0]; su suma de vértices es {0}."""
    bases = [(i, j) for i in range(0, ell + 1) for j in range(-ell - 1, 0)]
    return ParitySet.from_bases(basis.universe, bases)


def alpha_of_subset(basis: CycleBasis, subset: int) -> ParitySet:
    bits = 0
    for k in iter_bits(subset):
        bits ^= basis.generators[k].bits
    return ParitySet(bits, basis.universe)


def plus_cycle_sum_check(ell: int, f: Callable[[ParitySet], float]) -> Tuple[float, float]:
    """
    Σ_{α∈K^+} f(α) frente a (1/2) Σ_{W⊂G} f(α(W)).

    El lado izquierdo recorre el núcleo de la incidencia de B^+, calculado aparte de G.
    """
    if ell > 2:
        raise DomainError("La comprobación exhaustiva está limitada a ℓ <= 2")
    basis = plus_bc_generators(ell)
    kernel = cycle_space(ModelSpec.spm(), basis.region, PlaquetteMode.CLIPPED, merge=False)
    lhs = 0.0
    gens = [g.bits for g in kernel.generators]
    for subset in range(1 << len(gens)):
        bits = 0
        for k in iter_bits(subset):
            bits ^= gens[k]
        lhs += f(ParitySet(bits, basis.universe))
    rhs = 0.5 * sum(f(alpha_of_subset(basis, w)) for w in range(1 << len(basis.generators)))
    return lhs, rhs


def generator_subset_collisions(ell: int) -> List[Tuple[int, int]]:
    """
    Pares W ≠ W′ con α(W) = α(W′) y W′ distinto del complemento de W.

    La lista vacía confirma que α(W) determina W salvo complemento.
    """
    if ell > 2:
        raise DomainError("La comprobación exhaustiva está limitada a ℓ <= 2")
    basis = plus_bc_generators(ell)
    full = (1 << len(basis.generators)) - 1
    seen: Dict[int, int] = {}
    collisions = []
    for w in range(full + 1):
        bits = alpha_of_subset(basis, w).bits
        first = seen.setdefault(bits, w)
        if first != w and first != full ^ w:
            collisions.append((first, w))
    return collisions


# --- comprobaciones estructurales ---

def bottom_row_check(n: int) -> bool:
    """Todo ciclo no vacío de K(T*^(n)) contiene una plaqueta con base (i, −1)."""
    space = cycle_space(ModelSpec.tpm(), Region.triangle(n))
    bottom = space.universe.mask_of_bases((i, -1) for i in range(-1, n + 1))
    gens = [g.bits for g in space.generators]
    for subset in range(1, 1 << len(gens)):
        bits = 0
        for k in iter_bits(subset):
            bits ^= gens[k]
        if not bits & bottom:
            logger.error(f"Ciclo sin plaqueta en la fila inferior para n={n}")
            return False
    return True


@dataclass
class EconomicReport:
    n: int
    checked: int
    counterexamples: List[Tuple[int, int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.counterexamples


def economic_decomposition_check(n: int) -> EconomicReport:
    """
    |α| ≥ (|α(1)| + |α(2)|)/3 para todo ciclo α = Σ_I H + Σ_J V de [n]².

    De las dos descomposiciones complementarias se toma la de α(1) mínima (y, a igualdad,
    la de menos franjas). Un contraejemplo se avisa; no se aborta.
    """
    basis = spm_stripe_basis(n)
    size = n + 1
    n_bits = len(basis.universe)
    h, v = basis.masks[:size], basis.masks[size:]

    def subset_sums(gens):
        sums = [0]
        for g in gens:
            sums += [s ^ g for s in sums]
        return sums

    h_sums, v_sums = subset_sums(h), subset_sums(v)
    h_count = np.array([bin(k).count('1') for k in range(len(h_sums))])
    v_words = to_words(v_sums, n_bits)
    v_count = np.array([bin(k).count('1') for k in range(len(v_sums))])

    report = EconomicReport(n, 0)
    for hi, hs in enumerate(h_sums):
        weights = np.bitwise_count(v_words ^ to_words([hs], n_bits)[0]).sum(axis=1, dtype=np.int64)
        i = h_count[hi]
        for j_count in np.unique(v_count):
            sel = v_count == j_count
            options = [(i, j_count), (size - i, size - j_count)]
            i1, j1 = min(options, key=lambda o: (o[0], o[0] + o[1]))
            bad = weights[sel] * 3 < (i1 + j1) * size
            if bad.any():
                alpha = int(weights[sel][bad][0])
                report.counterexamples.append((int(i), int(j_count), alpha))
            report.checked += int(sel.sum())
    if report.counterexamples:
        logger.warning(f"Desigualdad de descomposición económica violada para n={n}: "
                       f"{report.counterexamples[:3]}")
    return report
