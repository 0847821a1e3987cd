# core/enumeration.py
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Optional, Sequence

import numpy as np

from core.geometry import plaquette_family, plaquette_sites
from models.boundary import BoundaryCondition
from models.errors import DomainError, EnumerationCapError, FreeBoundaryError
from models.lattice import ModelSpec, PlaquetteMode, Region, Site

logger = logging.getLogger(__name__)

# Un observable recibe el bloque de índices (c,) y devuelve (c,) o (c, n_bc)
Observable = Callable[[np.ndarray], np.ndarray]


def parity_signs(idx: np.ndarray, masks: np.ndarray) -> np.ndarray:
    """(−1)^{|idx ∧ mask|} para cada índice y cada máscara; forma (c, m)."""
    odd = np.bitwise_count(idx[:, None] & masks[None, :]) & 1
    return 1.0 - 2.0 * odd.astype(np.float64)


def site_spins(idx: np.ndarray, bit: int) -> np.ndarray:
    return 1.0 - 2.0 * ((idx >> bit) & 1).astype(np.float64)


def iter_chunks(n_bits: int, chunk_bits: int) -> Iterator[np.ndarray]:
    """Bloques consecutivos de índices de configuración, en orden fijo."""
    total = 1 << n_bits
    step = 1 << min(chunk_bits, n_bits)
    for start in range(0, total, step):
        yield np.arange(start, start + step, dtype=np.int64)


@dataclass
class EnumerationTerms:
    """
    Términos del hamiltoniano sobre los bits de la región.

    masks[j] son los bits de la región dentro de la plaqueta j; signs[b, j] es el
    producto de los espines exteriores de la plaqueta j bajo la condición b.
    """
    region: Region
    masks: np.ndarray
    signs: np.ndarray
    bases: List[Site]
    labels: List[str]

    @property
    def n_boundaries(self) -> int:
        return self.signs.shape[0]

    def log_weights(self, idx: np.ndarray, beta: float) -> np.ndarray:
        """(β/2) Σ_B [σ]_B, forma (c, n_bc)."""
        if len(self.masks) == 0:
            return np.zeros((len(idx), self.n_boundaries))
        return 0.5 * beta * (parity_signs(idx, self.masks) @ self.signs.T)


def site_mask(region: Region, sites) -> int:
    mask = 0
    for s in sites:
        if s in region:
            mask |= 1 << region.index(s)
    return mask


def exterior_sign(bc: BoundaryCondition, region: Region, sites) -> float:
    value = 1
    for s in sites:
        if s not in region:
            value *= bc.spin(s)
    return float(value)


def build_terms(model: ModelSpec, region: Region, mode: PlaquetteMode,
                boundaries: Sequence[BoundaryCondition],
                restricted: Optional[Sequence[Site]] = None) -> EnumerationTerms:
    """
    Construye las máscaras y los signos exteriores para una o varias condiciones de borde.

    MEETING usa B(Λ) (o la familia restringida P), INSIDE usa B^f(Λ) sin leer el exterior
    y CLIPPED usa {B∩Λ} por base, que coincide con MEETING bajo condición más.
    """
    region.require_nonempty()
    boundaries = list(boundaries) or [BoundaryCondition.all_plus()]

    if mode == PlaquetteMode.INSIDE:
        family = plaquette_family(model, region, PlaquetteMode.INSIDE)
        bases = [p.base for p in family]
        masks = np.array([site_mask(region, p.sites) for p in family], dtype=np.int64)
        signs = np.ones((len(boundaries), len(bases)))
        return EnumerationTerms(region, masks, signs, bases, [bc.label for bc in boundaries])

    if mode == PlaquetteMode.CLIPPED:
        family = plaquette_family(model, region, PlaquetteMode.CLIPPED, merge=False)
        bases = [p.base for p in family]
        masks = np.array([site_mask(region, p.sites) for p in family], dtype=np.int64)
        signs = np.ones((len(boundaries), len(bases)))
        return EnumerationTerms(region, masks, signs, bases, ['clipped'] * len(boundaries))

    meeting = {p.base for p in plaquette_family(model, region, PlaquetteMode.MEETING)}
    if restricted is not None:
        chosen = sorted({Site(*b) for b in restricted})
        outside = [b for b in chosen if b not in meeting]
        if outside:
            raise DomainError(f"La familia restringida contiene plaquetas que no tocan la región: {outside[:3]}")
        inside = {p.base for p in plaquette_family(model, region, PlaquetteMode.INSIDE)}
        missing = inside - set(chosen)
        if missing:
            raise DomainError(f"La familia restringida debe contener todas las plaquetas internas; faltan {sorted(missing)[:3]}")
    else:
        chosen = sorted(meeting)

    site_sets = [plaquette_sites(model, b) for b in chosen]
    needs_exterior = any(any(s not in region for s in sites) for sites in site_sets)
    if needs_exterior and any(bc.is_free for bc in boundaries):
        raise FreeBoundaryError("La condición libre requiere modo inside o una familia restringida interna")

    masks = np.array([site_mask(region, sites) for sites in site_sets], dtype=np.int64)
    signs = np.array([[exterior_sign(bc, region, sites) for sites in site_sets] for bc in boundaries],
                     dtype=np.float64).reshape(len(boundaries), len(chosen))
    return EnumerationTerms(region, masks, signs, chosen, [bc.label for bc in boundaries])


class StreamingAccumulator:
    """
    Suma Σ_σ w_b(σ)·f_k(σ) en dominio logarítmico, reescalando por el máximo corriente.

    Opcionalmente acumula el histograma de pesos de una clave entera (marginales).
    """

    def __init__(self, n_bc: int, n_obs: int = 0, n_states: int = 0):
        self.shift = np.full(n_bc, -np.inf)
        self.total = np.zeros(n_bc)
        self.moments = np.zeros((n_bc, n_obs))
        self.histogram = np.zeros((n_bc, n_states)) if n_states else None

    def add(self, log_w: np.ndarray, values: Optional[np.ndarray] = None,
            keys: Optional[np.ndarray] = None):
        new_shift = np.maximum(self.shift, log_w.max(axis=0))
        scale = np.exp(self.shift - new_shift)
        w = np.exp(log_w - new_shift)

        self.total = self.total * scale + w.sum(axis=0)
        if values is not None and self.moments.shape[1]:
            self.moments = self.moments * scale[:, None] + np.einsum('cb,cbk->bk', w, values)
        if self.histogram is not None and keys is not None:
            n_states = self.histogram.shape[1]
            self.histogram *= scale[:, None]
            for b in range(w.shape[1]):
                self.histogram[b] += np.bincount(keys, weights=w[:, b], minlength=n_states)
        self.shift = new_shift

    def log_total(self) -> np.ndarray:
        return self.shift + np.log(self.total)

    def means(self) -> np.ndarray:
        return self.moments / self.total[:, None]

    def marginals(self) -> Optional[np.ndarray]:
        if self.histogram is None:
            return None
        return self.histogram / self.total[:, None]


@dataclass
class EnumerationResult:
    log_z: np.ndarray
    means: np.ndarray
    marginals: Optional[np.ndarray]
    labels: List[str]


def _stack_values(idx: np.ndarray, observables: Sequence[Observable], n_bc: int) -> Optional[np.ndarray]:
    if not observables:
        return None
    columns = []
    for f in observables:
        v = np.asarray(f(idx), dtype=np.float64)
        if v.ndim == 1:
            v = np.broadcast_to(v[:, None], (len(idx), n_bc))
        columns.append(v)
    return np.stack(columns, axis=2)


def marginal_keys(idx: np.ndarray, bits: Sequence[int]) -> np.ndarray:
    key = np.zeros(len(idx), dtype=np.int64)
    for k, bit in enumerate(bits):
        key |= ((idx >> bit) & 1) << k
    return key


def check_cap(region: Region, cap: int):
    if len(region) > cap:
        raise EnumerationCapError(f"La región tiene {len(region)} sitios; el límite de enumeración es {cap}")


def enumerate_terms(terms: EnumerationTerms, beta: float, observables: Sequence[Observable] = (),
                    marginal_bits: Optional[Sequence[int]] = None, cap: int = 28,
                    chunk_bits: int = 16) -> EnumerationResult:
    """
    Enumeración completa de los 2^|Λ| estados de la región, por bloques vectorizados.

    Todas las condiciones de borde de `terms` se procesan en la misma pasada.
    El orden de acumulación es fijo, así que el resultado no depende de nada externo.
    """
    check_cap(terms.region, cap)
    n_bits = len(terms.region)
    n_bc = terms.n_boundaries
    n_states = 1 << len(marginal_bits) if marginal_bits is not None else 0
    acc = StreamingAccumulator(n_bc, len(observables), n_states)

    logger.debug(f"Enumerando 2^{n_bits} estados con {len(terms.masks)} plaquetas y {n_bc} condiciones")
    for idx in iter_chunks(n_bits, chunk_bits):
        log_w = terms.log_weights(idx, beta)
        values = _stack_values(idx, observables, n_bc)
        keys = marginal_keys(idx, marginal_bits) if marginal_bits is not None else None
        acc.add(log_w, values, keys)

    return EnumerationResult(acc.log_total(), acc.means(), acc.marginals(), terms.labels)


def enumeration_settings(config: Optional[Dict]) -> Dict[str, int]:
    section = (config or {}).get('enumeration', {})
    return {'cap': section.get('cap', 28), 'chunk_bits': section.get('chunk_bits', 16)}


@dataclass
class ExteriorJoint:
    """Máscaras sobre los bits conjuntos (región en los bits bajos, soporte exterior en los altos)."""
    region: Region
    support: List[Site]
    masks: np.ndarray

    @property
    def n_rows(self) -> int:
        return 1 << len(self.support)

    def blocks(self, beta: float, block_bits: int = 16) -> Iterator:
        """Bloques (inicio, log_w) con log_w[fila τ, estado σ] = (β/2) Σ_B [σ, τ]_B."""
        n_in = len(self.region)
        states = np.arange(1 << n_in, dtype=np.int64)
        rows = np.arange(self.n_rows, dtype=np.int64)
        block = max(1, (1 << block_bits) >> n_in)
        for start in range(0, len(rows), block):
            tau = rows[start:start + block]
            idx = ((tau[:, None] << n_in) | states[None, :]).ravel()
            log_w = (0.5 * beta * parity_signs(idx, self.masks).sum(axis=1)).reshape(len(tau), -1)
            yield start, log_w

    def boundary(self, row: int) -> BoundaryCondition:
        return BoundaryCondition.explicit({s: (-1 if (row >> k) & 1 else 1)
                                           for k, s in enumerate(self.support)})


def exterior_joint(model: ModelSpec, region: Region, cap: int,
                   exhaustive_cap: int) -> Optional[ExteriorJoint]:
    """Prepara la enumeración conjunta de Λ y su soporte exterior; None si no cabe."""
    family = plaquette_family(model, region, PlaquetteMode.MEETING)
    support = sorted({s for p in family for s in p.sites if s not in region})
    n_in, n_out = len(region), len(support)
    if n_out > exhaustive_cap or n_in + n_out > cap:
        return None
    joint_bit = {s: region.index(s) for s in region}
    joint_bit.update({s: n_in + k for k, s in enumerate(support)})
    masks = np.array([sum(1 << joint_bit[s] for s in p.sites) for p in family], dtype=np.int64)
    return ExteriorJoint(region, support, masks)
