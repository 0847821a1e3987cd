# core/geometry.py
import logging
from typing import Dict, FrozenSet, Iterable, List, Tuple

from models.cycles import PlaquetteUniverse
from models.errors import DomainError
from models.lattice import ModelKind, ModelSpec, PlaquetteId, PlaquetteMode, Region, Site

logger = logging.getLogger(__name__)


def plaquette_sites(spec: ModelSpec, base: Tuple[int, int]) -> FrozenSet[Site]:
    """B* + base."""
    b1, b2 = base
    return frozenset(Site(b1 + o.x1, b2 + o.x2) for o in spec.offsets)


def bases_through(spec: ModelSpec, site: Tuple[int, int]) -> List[Site]:
    """Bases de las |B*| plaquetas que contienen el sitio."""
    x1, x2 = site
    return sorted(Site(x1 - o.x1, x2 - o.x2) for o in spec.offsets)


def _meeting_bases(spec: ModelSpec, region: Region) -> List[Site]:
    bases = set()
    for s in region:
        bases.update(bases_through(spec, s))
    return sorted(bases)


def plaquette_family(spec: ModelSpec, region: Region, mode: PlaquetteMode,
                     merge: bool = True) -> List[PlaquetteId]:
    """
    Familia de plaquetas relativa a la región.

    Args:
        spec: modelo
        region: región finita no vacía
        mode: MEETING → B(Λ); INSIDE → B^f(Λ); CLIPPED → B^+(Λ) = {B∩Λ}
        merge: en modo recortado, fusiona plaquetas con el mismo conjunto de sitios
            (el representante es la base menor)

    Returns:
        Lista ordenada por base de PlaquetteId
    """
    region.require_nonempty()
    bases = _meeting_bases(spec, region)

    if mode == PlaquetteMode.MEETING:
        return [PlaquetteId(b, False, plaquette_sites(spec, b)) for b in bases]

    if mode == PlaquetteMode.INSIDE:
        family = []
        for b in bases:
            sites = plaquette_sites(spec, b)
            if all(s in region for s in sites):
                family.append(PlaquetteId(b, False, sites))
        return family

    family = []
    seen: Dict[FrozenSet[Site], Site] = {}
    for b in bases:
        clipped = frozenset(s for s in plaquette_sites(spec, b) if s in region)
        if merge and clipped in seen:
            logger.debug(f"Plaqueta recortada {tuple(b)} fusionada con {tuple(seen[clipped])}")
            continue
        seen[clipped] = b
        family.append(PlaquetteId(b, True, clipped))
    return family


def family_universe(spec: ModelSpec, region: Region, mode: PlaquetteMode,
                    merge: bool = True) -> PlaquetteUniverse:
    family = plaquette_family(spec, region, mode, merge)
    return PlaquetteUniverse(family, [p.sites for p in family])


def universe_from_bases(spec: ModelSpec, bases: Iterable[Tuple[int, int]]) -> PlaquetteUniverse:
    """Universo de plaquetas completas con las bases dadas."""
    ordered = sorted({Site(*b) for b in bases})
    family = [PlaquetteId(b, False, plaquette_sites(spec, b)) for b in ordered]
    return PlaquetteUniverse(family, [p.sites for p in family])


def exterior_support(region: Region, family: Iterable[PlaquetteId]) -> List[Site]:
    """Sitios fuera de la región tocados por alguna plaqueta de la familia."""
    support = set()
    for p in family:
        support.update(s for s in p.sites if s not in region)
    return sorted(support)


def gamma_set(n: int, j: int) -> List[Site]:
    """
    Γ(j) = {(j, i): −1 ≤ i ≤ j} ∪ {(j+i, i−1): 1 ≤ i ≤ n−j}, en el orden escalonado.

    Tiene n+2 sitios.
    """
    if not -1 <= j <= n:
        raise DomainError(f"j={j} fuera de [-1, {n}]")
    return staircase_order(n, j)


def staircase_order(n: int, j: int) -> List[Site]:
    """Orden z^(1), …, z^(n+2) de Γ(j): columna j hacia arriba y luego la diagonal."""
    order = []
    for i in range(1, n + 3):
        if i <= j + 2:
            order.append(Site(j, i - 2))
        else:
            order.append(Site(i - 2, i - j - 3))
    return order


def l1_distance(x: Tuple[int, int], y: Tuple[int, int]) -> int:
    return abs(x[0] - y[0]) + abs(x[1] - y[1])


def triangular_distance(x: Tuple[int, int], y: Tuple[int, int]) -> int:
    """Distancia de grafo de la red triangular con pasos ±e1, ±e2, ±(e1+e2)."""
    a, b = x[0] - y[0], x[1] - y[1]
    return max(abs(a), abs(b), abs(a - b))


def model_distance(spec: ModelSpec, x: Tuple[int, int], y: Tuple[int, int]) -> int:
    if spec.kind == ModelKind.TPM:
        return triangular_distance(x, y)
    return l1_distance(x, y)


def min_pairwise_distance(spec: ModelSpec, sites: List[Tuple[int, int]]) -> int:
    best = None
    for i in range(len(sites)):
        for j in range(i + 1, len(sites)):
            d = model_distance(spec, sites[i], sites[j])
            best = d if best is None else min(best, d)
    return best if best is not None else 0


def f2_vertex_sum(spec: ModelSpec, bases: Iterable[Tuple[int, int]]) -> FrozenSet[Site]:
    """Suma en F2 de los conjuntos de vértices de las plaquetas dadas."""
    acc = set()
    for b in bases:
        acc ^= plaquette_sites(spec, b)
    return frozenset(acc)
