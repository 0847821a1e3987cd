# core/gibbs_exact.py
import logging
import math
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.enumeration import (EnumerationTerms, build_terms, check_cap, enumerate_terms,
                              enumeration_settings, exterior_joint, marginal_keys, parity_signs,
                              site_mask, site_spins)
from core.geometry import (bases_through, exterior_support, l1_distance, plaquette_family,
                           plaquette_sites)
from models.boundary import BoundaryCondition, SpinConfig
from models.errors import DomainError, EnumerationCapError
from models.lattice import ModelSpec, PlaquetteMode, Region, Site
from models.results import Exactness, QuantityRecord, SupResult
from models.specs import GibbsSpec

logger = logging.getLogger(__name__)

Observable = Callable[[np.ndarray], np.ndarray]


class GibbsEnumerator:
    """
    Cálculos exactos de Gibbs en volumen finito por enumeración completa.

    Lee de la configuración la sección `enumeration` (cap, chunk_bits,
    exhaustive_boundary_cap) y `boundary_family` (seed, random_count).
    """

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        self.config = config or {}
        settings = enumeration_settings(self.config)
        self.cap = settings['cap']
        self.chunk_bits = settings['chunk_bits']
        self.exhaustive_cap = self.config.get('enumeration', {}).get('exhaustive_boundary_cap', 20)
        family = self.config.get('boundary_family', {})
        self.family_seed = family.get('seed', 2024)
        self.random_count = family.get('random_count', 8)

    def declared_family(self) -> List[BoundaryCondition]:
        return BoundaryCondition.declared_family(self.family_seed, self.random_count)

    def terms(self, spec: GibbsSpec, boundaries: Optional[Sequence[BoundaryCondition]] = None) -> EnumerationTerms:
        return build_terms(spec.model, spec.region, spec.plaquette_mode,
                           boundaries if boundaries is not None else [spec.bc], spec.restricted)

    def run(self, spec: GibbsSpec, observables: Sequence[Observable] = (),
            boundaries: Optional[Sequence[BoundaryCondition]] = None,
            marginal_sites: Optional[Sequence[Tuple[int, int]]] = None):
        check_cap(spec.region, self.cap)
        bits = [spec.region.index(Site(*s)) for s in marginal_sites] if marginal_sites is not None else None
        return enumerate_terms(self.terms(spec, boundaries), spec.beta, observables, bits,
                               self.cap, self.chunk_bits)

    def partition_function(self, spec: GibbsSpec) -> float:
        """log Z_Λ^{β,τ} (o Z^{τ,P} si hay familia restringida)."""
        log_z = float(self.run(spec).log_z[0])
        logger.debug(f"log Z = {log_z!r} para {spec.region} con β={spec.beta}")
        return log_z

    def expectation(self, spec: GibbsSpec, f: Observable) -> float:
        return float(self.run(spec, [f]).means[0, 0])

    def expectations(self, spec: GibbsSpec, observables: Sequence[Observable]) -> np.ndarray:
        return self.run(spec, observables).means[0]

    def covariance(self, spec: GibbsSpec, f: Observable, g: Observable) -> float:
        """Cov(f, g) = E(fg) − E(f)E(g)."""
        means = self.run(spec, [f, g, lambda idx: f(idx) * g(idx)]).means[0]
        return float(means[2] - means[0] * means[1])

    def marginal(self, spec: GibbsSpec, sites: Sequence[Tuple[int, int]],
                 boundaries: Optional[Sequence[BoundaryCondition]] = None) -> np.ndarray:
        """Ley de σ_V; el bit k del estado es 1 si σ del k-ésimo sitio vale −1."""
        return self.run(spec, boundaries=boundaries, marginal_sites=sites).marginals


_DEFAULT = GibbsEnumerator()


def _enumerator(config: Optional[Dict[str, Any]]) -> GibbsEnumerator:
    return GibbsEnumerator(config) if config is not None else _DEFAULT


def partition_function(spec: GibbsSpec, config: Optional[Dict[str, Any]] = None) -> float:
    return _enumerator(config).partition_function(spec)


def expectation(spec: GibbsSpec, f: Observable, config: Optional[Dict[str, Any]] = None) -> float:
    return _enumerator(config).expectation(spec, f)


def covariance(spec: GibbsSpec, f: Observable, g: Observable, config: Optional[Dict[str, Any]] = None) -> float:
    return _enumerator(config).covariance(spec, f, g)


# --- observables ---

def spin_product_observable(region: Region, sites: Sequence[Tuple[int, int]]) -> Observable:
    """[σ]_V para V ⊂ Λ."""
    for s in sites:
        if s not in region:
            raise DomainError(f"El sitio {tuple(s)} no pertenece a la región")
    mask = np.array([site_mask(region, sites)], dtype=np.int64)
    return lambda idx: parity_signs(idx, mask)[:, 0]


def spin_observable(region: Region, site: Tuple[int, int]) -> Observable:
    bit = region.index(Site(*site))
    return lambda idx: site_spins(idx, bit)


def _h_terms(model: ModelSpec, region: Region, bc: BoundaryCondition,
             x: Tuple[int, int]) -> Tuple[np.ndarray, np.ndarray]:
    masks, signs = [], []
    for b in bases_through(model, x):
        sites = plaquette_sites(model, b)
        exterior = 1
        for s in sites:
            if s not in region:
                exterior *= bc.spin(s)
        masks.append(site_mask(region, sites))
        signs.append(exterior)
    return np.array(masks, dtype=np.int64), np.array(signs, dtype=np.float64)


def h_observable(spec: GibbsSpec, x: Tuple[int, int]) -> Observable:
    """h_x como función de la configuración interior, con los espines exteriores de spec.bc."""
    if x in spec.region:
        raise DomainError(f"h_x requiere x fuera de la región, recibido {tuple(x)}")
    masks, signs = _h_terms(spec.model, spec.region, spec.bc, x)
    beta = spec.beta
    return lambda idx: np.exp(-beta * (parity_signs(idx, masks) @ signs))


def h_x(spec: GibbsSpec, x: Tuple[int, int], config: SpinConfig) -> float:
    """
    h_x(σ) = exp((β/2) Σ_{B∋x} ([σ^x]_B − [σ]_B)).

    Args:
        spec: medida de referencia (modelo y β)
        x: sitio exterior a la región
        config: configuración con su condición de borde

    Returns:
        Valor en [e^{−2β‖H‖}, e^{2β‖H‖}]
    """
    if x in spec.region:
        raise DomainError(f"h_x requiere x fuera de la región, recibido {tuple(x)}")
    flipped = config.with_flip(x)
    total = 0
    for b in bases_through(spec.model, x):
        sites = plaquette_sites(spec.model, b)
        total += flipped.product(sites) - config.product(sites)
    return math.exp(0.5 * spec.beta * total)


def flip_identity_gap(spec: GibbsSpec, x: Tuple[int, int], f: Observable,
                      config: Optional[Dict[str, Any]] = None) -> Tuple[float, float]:
    """
    Los dos lados de μ^{τ^x}(f) − μ^τ(f) = Cov^τ(h_x, f) / μ^τ(h_x).

    Returns:
        (lhs, rhs)
    """
    enumerator = _enumerator(config)
    flipped = spec.with_bc(spec.bc.with_flip(x))
    h = h_observable(spec, x)
    means = enumerator.run(spec, [f, h, lambda idx: h(idx) * f(idx)]).means[0]
    lhs = enumerator.expectation(flipped, f) - means[0]
    rhs = (means[2] - means[0] * means[1]) / means[1]
    return float(lhs), float(rhs)


def dlr_discrepancy(model: ModelSpec, beta: float, bc: Optional[BoundaryCondition] = None,
                    config: Optional[Dict[str, Any]] = None) -> float:
    """
    Condiciona la medida en Q_3 a su anillo interior y la compara con la de Q_1
    desplazado al centro, con el anillo como condición de borde explícita.

    Returns:
        Máxima diferencia absoluta entre ambas probabilidades condicionales
    """
    enumerator = _enumerator(config)
    bc = bc or BoundaryCondition.all_plus()
    outer = Region.square(3)
    center = Site(2, 2)
    ring = [s for s in outer if s != center]
    joint = enumerator.marginal(GibbsSpec(model, outer, beta, bc), [center] + ring)[0]

    inner = Region.from_sites([center])
    worst = 0.0
    for ring_state in range(1 << len(ring)):
        up = joint[ring_state << 1]
        down = joint[(ring_state << 1) | 1]
        values = {s: (-1 if (ring_state >> k) & 1 else 1) for k, s in enumerate(ring)}
        for s in exterior_support(inner, plaquette_family(model, inner, PlaquetteMode.MEETING)):
            if s not in outer:
                values[s] = bc.spin(s)
        local = BoundaryCondition.explicit(values)
        p_local = enumerator.marginal(GibbsSpec(model, inner, beta, local), [center])[0]
        worst = max(worst, abs(up / (up + down) - p_local[0]))
    return worst


# --- φ(ℓ) y la condición de mezcla fuerte ---

class _Pair:
    """Par (x, y) admisible con la tabla de máximos de los factores lejanos."""

    def __init__(self, i: int, j: int, ring_bits: List[int], table: np.ndarray):
        self.i, self.j = i, j
        self.ring_bits = ring_bits
        self.table = table

    def factor(self, rows: np.ndarray) -> np.ndarray:
        return self.table[marginal_keys(rows, self.ring_bits)]


def _far_table(model: ModelSpec, near: set, ring_index: Dict[Site, int], beta: float,
               plaquettes: List[Site]) -> Tuple[List[int], np.ndarray]:
    """max sobre los espines lejanos de exp(−β Σ_B [τ]_B), como función de los bits del anillo."""
    ring_sites, far_sites = [], []
    for b in plaquettes:
        for s in plaquette_sites(model, b):
            if s in near:
                continue
            if s in ring_index:
                if s not in ring_sites:
                    ring_sites.append(s)
            elif s not in far_sites:
                far_sites.append(s)
    position = {s: k for k, s in enumerate(ring_sites + far_sites)}
    n_ring = len(ring_sites)
    states = np.arange(1 << (n_ring + len(far_sites)), dtype=np.int64)
    masks = np.array([sum(1 << position[s] for s in plaquette_sites(model, b) if s in position)
                      for b in plaquettes], dtype=np.int64)
    exponent = -beta * parity_signs(states, masks).sum(axis=1) if len(masks) else np.zeros(len(states))
    values = np.exp(exponent).reshape(1 << len(far_sites), 1 << n_ring)
    return [ring_index[s] for s in ring_sites], values.max(axis=0)


def separated_pairs(sites: Sequence[Tuple[int, int]], ell: int) -> List[Tuple[int, int]]:
    """Pares (i, j), i < j, con distancia ℓ1 d(x, y) ≥ ℓ/4 en ambos modelos."""
    return [(i, j) for i in range(len(sites)) for j in range(i + 1, len(sites))
            if 4 * l1_distance(sites[i], sites[j]) >= ell]


def phi_ell(model: ModelSpec, ell: int, beta: float,
            bc_family: Optional[Sequence[BoundaryCondition]] = None,
            config: Optional[Dict[str, Any]] = None) -> SupResult:
    """
    φ(ℓ) = sup_{x,y∉Q_ℓ, d(x,y)≥ℓ/4} sup_τ |Cov_{Q_ℓ}^{β,τ}(h_x, h_y)|.

    Solo el anillo exterior R entra en la medida de Q_ℓ; los factores de h_x que
    dependen de espines más lejanos se maximizan aparte. Si R cabe en el límite
    exhaustivo se recorren todas sus asignaciones y el resultado es exacto; si no,
    se usa la familia declarada y el valor es una cota inferior.
    """
    enumerator = _enumerator(config)
    region = Region.square(ell)
    family = plaquette_family(model, region, PlaquetteMode.MEETING)
    ring = exterior_support(region, family)
    n_q, n_r = len(region), len(ring)
    ring_index = {s: n_q + k for k, s in enumerate(ring)}
    near = set(region.sites)
    joint_bit = {s: region.index(s) for s in region}
    joint_bit.update(ring_index)

    masks = np.array([sum(1 << joint_bit[s] for s in p.sites) for p in family], dtype=np.int64)
    meeting = {p.base for p in family}
    h_masks = []
    for x in ring:
        h_masks.append(np.array([sum(1 << joint_bit[s] for s in plaquette_sites(model, b))
                                 for b in bases_through(model, x) if b in meeting], dtype=np.int64))

    pairs: List[_Pair] = []
    for i, j in separated_pairs(ring, ell):
        far = [b for b in bases_through(model, ring[i]) if b not in meeting]
        far += [b for b in bases_through(model, ring[j]) if b not in meeting]
        bits, table = _far_table(model, near, ring_index, beta, far)
        pairs.append(_Pair(i, j, [b - n_q for b in bits], table))

    if beta == 0 or not pairs:
        return SupResult(0.0, Exactness.EXACT, None, 0)

    exhaustive = n_r <= enumerator.exhaustive_cap and n_q + n_r <= enumerator.cap
    if exhaustive:
        rows = np.arange(1 << n_r, dtype=np.int64)
        exactness = Exactness.EXACT
    else:
        bc_family = list(bc_family) if bc_family is not None else enumerator.declared_family()
        rows = np.array([sum(1 << k for k, s in enumerate(ring) if bc.spin(s) < 0) for bc in bc_family],
                        dtype=np.int64)
        exactness = Exactness.LOWER_BOUND
        logger.warning(f"φ({ell}) con familia declarada de {len(rows)} condiciones: cota inferior")
        check_cap(region, enumerator.cap)

    states = np.arange(1 << n_q, dtype=np.int64)
    block = max(1, (1 << 16) >> n_q)
    best, argmax = 0.0, None
    for start in range(0, len(rows), block):
        tau = rows[start:start + block]
        idx = ((tau[:, None] << n_q) | states[None, :]).ravel()
        log_w = (0.5 * beta * parity_signs(idx, masks).sum(axis=1)).reshape(len(tau), -1)
        log_w -= log_w.max(axis=1, keepdims=True)
        p = np.exp(log_w)
        p /= p.sum(axis=1, keepdims=True)

        h = np.stack([np.exp(-beta * parity_signs(idx, m).sum(axis=1)) for m in h_masks], axis=1)
        h = h.reshape(len(tau), len(states), n_r)
        mean_h = np.einsum('bs,bsx->bx', p, h)
        second = np.matmul((h * p[:, :, None]).transpose(0, 2, 1), h)
        cov = second - mean_h[:, :, None] * mean_h[:, None, :]

        for pair in pairs:
            values = np.abs(cov[:, pair.i, pair.j]) * pair.factor(tau)
            k = int(np.argmax(values))
            if values[k] > best:
                best = float(values[k])
                argmax = f"x={tuple(ring[pair.i])} y={tuple(ring[pair.j])} τ_R={int(tau[k])}"

    logger.debug(f"φ({ell}) = {best!r} en {argmax}")
    return SupResult(best, exactness, argmax, len(rows))


def sm_condition_value(model: ModelSpec, ell: int, beta: float,
                       bc_family: Optional[Sequence[BoundaryCondition]] = None,
                       config: Optional[Dict[str, Any]] = None) -> SupResult:
    """e^{4β‖H‖} ℓ φ(ℓ), con la misma bandera de exactitud que φ."""
    phi = phi_ell(model, ell, beta, bc_family, config)
    value = math.exp(4 * beta * model.half_norm) * ell * phi.value
    return SupResult(value, phi.exactness, phi.argmax, phi.evaluated)


# --- ψ(ℓ; τ, τ′) ---

def cavity_boxes(ell: int, ratio: int) -> Tuple[Region, Region]:
    """Cuadrados concéntricos Λ (lado Rℓ) y V (lado ℓ), medidos en número de sitios."""
    if ell < 1 or ratio < 1:
        raise DomainError(f"ℓ y R deben ser positivos, recibidos {ell}, {ratio}")
    side = ratio * ell
    corner = -((side - 1) // 2)
    outer = Region.box((corner, corner), side, side)
    offset = corner + ((ratio - 1) * ell) // 2
    inner = Region.box((offset, offset), ell, ell)
    return outer, inner


def _tv(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(p - q).sum())


def total_variation_marginal(model: ModelSpec, ell: int, ratio: int, beta: float,
                             bc: BoundaryCondition, bc_prime: BoundaryCondition,
                             method: str = "auto", seed: int = 0,
                             config: Optional[Dict[str, Any]] = None) -> QuantityRecord:
    """
    ψ(ℓ; τ, τ′): distancia en variación total entre las marginales en V.

    Args:
        method: "exact", "mcmc" o "auto" (exacto si Λ cabe en el límite)

    Returns:
        QuantityRecord con exactitud EXACT o ESTIMATE (con error estándar)
    """
    enumerator = _enumerator(config)
    outer, inner = cavity_boxes(ell, ratio)
    label = f"{bc.label}|{bc_prime.label}"
    if beta == 0 or bc == bc_prime:
        return QuantityRecord(model.name, repr(outer), beta, label, "psi", 0.0, Exactness.EXACT)

    use_exact = method == "exact" or (method == "auto" and len(outer) <= enumerator.cap)
    if use_exact:
        spec = GibbsSpec(model, outer, beta, bc)
        marginals = enumerator.marginal(spec, list(inner), [bc, bc_prime])
        return QuantityRecord(model.name, repr(outer), beta, label, "psi",
                              _tv(marginals[0], marginals[1]), Exactness.EXACT)
    if method not in ("auto", "mcmc"):
        raise DomainError(f"Método desconocido '{method}'")

    from core.mcmc import ChainRunner
    runner = ChainRunner(config)
    p, se_p = runner.marginal_estimate(model, outer, beta, bc, list(inner), seed, chain_id=0)
    q, se_q = runner.marginal_estimate(model, outer, beta, bc_prime, list(inner), seed, chain_id=1)
    stderr = 0.5 * float(np.sqrt((se_p ** 2 + se_q ** 2).sum()))
    return QuantityRecord(model.name, repr(outer), beta, label, "psi", _tv(p, q), Exactness.ESTIMATE, stderr)


def _exhaustive_marginals(enumerator: GibbsEnumerator, model: ModelSpec, outer: Region,
                          inner: Region, beta: float) -> Optional[np.ndarray]:
    """Marginales en V para todas las asignaciones del soporte exterior, o None si no cabe."""
    joint = exterior_joint(model, outer, enumerator.cap, enumerator.exhaustive_cap)
    if joint is None:
        return None
    bits = [outer.index(s) for s in inner]
    keys = marginal_keys(np.arange(1 << len(outer), dtype=np.int64), bits)
    n_states = 1 << len(bits)

    result = np.zeros((joint.n_rows, n_states))
    for start, log_w in joint.blocks(beta):
        log_w -= log_w.max(axis=1, keepdims=True)
        w = np.exp(log_w)
        w /= w.sum(axis=1, keepdims=True)
        for k in range(n_states):
            result[start:start + len(w), k] = w[:, keys == k].sum(axis=1)
    return result


def psi_sup(model: ModelSpec, ell: int, ratio: int, beta: float,
            bc_family: Optional[Sequence[BoundaryCondition]] = None, method: str = "auto",
            seed: int = 0, config: Optional[Dict[str, Any]] = None) -> SupResult:
    """
    ψ(ℓ) = sup_{τ,τ′} ψ(ℓ; τ, τ′).

    Exacto cuando el soporte exterior se puede recorrer entero; si no, supremo sobre
    la familia declarada (cota inferior) o estimación por Monte Carlo si Λ no cabe.
    """
    enumerator = _enumerator(config)
    outer, inner = cavity_boxes(ell, ratio)
    if beta == 0:
        return SupResult(0.0, Exactness.EXACT, None, 0)

    if method != "mcmc":
        exhaustive = _exhaustive_marginals(enumerator, model, outer, inner, beta)
        if exhaustive is not None and (exhaustive.shape[1] == 2 or len(exhaustive) <= 4096):
            if exhaustive.shape[1] == 2:
                value = float(exhaustive[:, 0].max() - exhaustive[:, 0].min())
            else:
                value = max(_tv(exhaustive[a], exhaustive[b])
                            for a in range(len(exhaustive)) for b in range(a + 1, len(exhaustive)))
            return SupResult(value, Exactness.EXACT, "exhaustive", len(exhaustive))

    family = list(bc_family) if bc_family is not None else enumerator.declared_family()
    if method != "mcmc" and len(outer) <= enumerator.cap:
        marginals = enumerator.marginal(GibbsSpec(model, outer, beta, family[0]), list(inner), family)
        flag = Exactness.LOWER_BOUND
    elif method == "exact":
        raise EnumerationCapError(f"Λ de {len(outer)} sitios excede el límite sin alternativa Monte Carlo")
    else:
        from core.mcmc import ChainRunner
        runner = ChainRunner(config)
        marginals = np.array([runner.marginal_estimate(model, outer, beta, bc, list(inner), seed, k)[0]
                              for k, bc in enumerate(family)])
        flag = Exactness.ESTIMATE

    best, argmax = 0.0, None
    for a in range(len(family)):
        for b in range(a + 1, len(family)):
            value = _tv(marginals[a], marginals[b])
            if value > best:
                best, argmax = value, f"{family[a].label}|{family[b].label}"
    if flag == Exactness.LOWER_BOUND:
        logger.info(f"ψ({ell}) sobre familia declarada = {best!r} (cota inferior)")
    return SupResult(best, flag, argmax, len(family))


def record(spec: GibbsSpec, quantity: str, value: float,
           exactness: Exactness = Exactness.EXACT, stderr: Optional[float] = None) -> QuantityRecord:
    return QuantityRecord(spec.model.name, repr(spec.region), spec.beta, spec.bc.label, quantity,
                          value, exactness, stderr)
