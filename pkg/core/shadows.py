# core/shadows.py
import logging
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Set, Tuple

from core.geometry import f2_vertex_sum, gamma_set, plaquette_sites, staircase_order
from core.gf2 import EchelonBasis
from models.cycles import CornerSign, Decomposition, ScreenKind, ShadowScreen
from models.errors import DomainError, NotInSpanError, NotRepresentableError, ScreenError
from models.lattice import ModelKind, ModelSpec, Region, Site

logger = logging.getLogger(__name__)


def pascal_parity(row: int, col: int) -> int:
    """C(row, col) mod 2 por dominación binaria (Lucas); 0 fuera de [0, row]."""
    if row < 0 or col < 0 or col > row:
        return 0
    return 1 if (col & row) == col else 0


def odd_columns(row: int) -> List[int]:
    """S: columnas c con C(row, c) impar."""
    return [c for c in range(row + 1) if (c & row) == c]


def pascal_rows(max_row: int) -> Iterator[int]:
    """Filas del triángulo de Pascal mod 2 como bitsets, por la recurrencia r ⊕ (r << 1)."""
    bits = 1
    for _ in range(max_row + 1):
        yield bits
        bits ^= bits << 1


def tpm_pascal_bases(root: Tuple[int, int], rows: int) -> Iterator[Site]:
    """Bases (x1+c, x2+r) con C(r, c) impar, para r < rows, generadas fila a fila."""
    x1, x2 = root
    for r, bits in enumerate(pascal_rows(rows - 1)):
        c = 0
        while bits:
            if bits & 1:
                yield Site(x1 + c, x2 + r)
            bits >>= 1
            c += 1


# --- pantallas ---

def auto_screen(model: ModelSpec, sites: Iterable[Tuple[int, int]]) -> ShadowScreen:
    """Pantalla mínima por encima de A: recta y = max x2 + 1 (TPM) o esquina negativa (SPM)."""
    sites = list(sites)
    if not sites:
        return ShadowScreen.tpm_line(0) if model.kind == ModelKind.TPM else ShadowScreen.spm_corner((0, 0))
    top1 = max(s[0] for s in sites)
    top2 = max(s[1] for s in sites)
    if model.kind == ModelKind.TPM:
        return ShadowScreen.tpm_line(top2 + 1)
    if model.kind == ModelKind.SPM:
        return ShadowScreen.spm_corner((top1 + 1, top2 + 1), CornerSign.NEGATIVE)
    raise DomainError("Las sombras solo están definidas para SPM y TPM")


def _check_screen(model: ModelSpec, x: Tuple[int, int], screen: ShadowScreen):
    expected = ScreenKind.TPM_LINE if model.kind == ModelKind.TPM else ScreenKind.SPM_CORNER
    if model.kind not in (ModelKind.SPM, ModelKind.TPM) or screen.kind != expected:
        raise DomainError(f"Pantalla {screen.kind.value} no válida para el modelo {model.name}")
    if not screen.covers(x):
        raise ScreenError(f"La pantalla no cubre el sitio {tuple(x)}")


def shadow(model: ModelSpec, x: Tuple[int, int], screen: ShadowScreen) -> FrozenSet[Site]:
    """
    Sombra de x sobre la pantalla R.

    TPM: los sitios de la recta en un número impar de plaquetas de B_{x,R}, es decir
    el trasladado del conjunto de Lucas de la fila h − x2. SPM: las tres esquinas del
    rectángulo con vértices x y el vértice de la esquina.
    """
    _check_screen(model, x, screen)
    x = Site(*x)
    if screen.on_screen(x):
        return frozenset([x])
    if model.kind == ModelKind.TPM:
        h = screen.height
        return frozenset(Site(x.x1 + c, h) for c in odd_columns(h - x.x2))
    m1, m2 = screen.apex
    return frozenset([Site(m1, x.x2), Site(x.x1, m2), Site(m1, m2)])


def shadow_plaquettes(model: ModelSpec, x: Tuple[int, int], screen: ShadowScreen) -> FrozenSet[Site]:
    """Familia B_{x,R} (por bases): su suma de vértices en F2 es {x} + sombra(x)."""
    _check_screen(model, x, screen)
    x = Site(*x)
    if screen.on_screen(x):
        return frozenset()
    if model.kind == ModelKind.TPM:
        return frozenset(tpm_pascal_bases(x, screen.height - x.x2))
    m1, m2 = screen.apex
    if screen.sign == CornerSign.NEGATIVE:
        lo1, hi1, lo2, hi2 = x.x1, m1, x.x2, m2
    else:
        lo1, hi1, lo2, hi2 = m1, x.x1, m2, x.x2
    return frozenset(Site(i, j) for i in range(lo1, hi1) for j in range(lo2, hi2))


def shadow_sum(model: ModelSpec, sites: Iterable[Tuple[int, int]],
               screen: Optional[ShadowScreen] = None) -> FrozenSet[Site]:
    sites = [Site(*s) for s in sites]
    screen = screen or auto_screen(model, sites)
    acc: Set[Site] = set()
    for x in sites:
        acc ^= shadow(model, x, screen)
    return frozenset(acc)


def is_null_equivalent(model: ModelSpec, sites: Iterable[Tuple[int, int]],
                       screen: Optional[ShadowScreen] = None) -> bool:
    """A ∼ ∅ si y solo si la suma de las sombras en F2 es vacía."""
    sites = list(sites)
    if model.kind == ModelKind.RECT:
        return decomposition_by_elimination(model, sites) is not None
    return not shadow_sum(model, sites, screen)


def minimal_decomposition(model: ModelSpec, sites: Iterable[Tuple[int, int]],
                          screen: Optional[ShadowScreen] = None) -> Optional[Decomposition]:
    """
    Descomposición mínima de A: plaquetas en un número impar de familias B_{x,R}.

    Returns:
        Decomposition, o None si A no es equivalente a ∅
    """
    sites = frozenset(Site(*s) for s in sites)
    if model.kind == ModelKind.RECT:
        return decomposition_by_elimination(model, sites)

    screen = screen or auto_screen(model, sites)
    if shadow_sum(model, sites, screen):
        logger.debug(f"A con {len(sites)} sitios no es equivalente a ∅")
        return None

    bases: Set[Site] = set()
    for x in sites:
        bases ^= shadow_plaquettes(model, x, screen)

    residual = f2_vertex_sum(model, bases) ^ sites
    if residual:
        raise NotRepresentableError(f"La suma de vértices difiere de A en {len(residual)} sitios",
                                    residual=frozenset(residual))
    return Decomposition(model, frozenset(bases))


def decomposition_by_elimination(model: ModelSpec, sites: Iterable[Tuple[int, int]]) -> Optional[Decomposition]:
    """
    Descomposición por eliminación en F2 sobre el universo de bases de la caja envolvente.

    La descomposición, si existe, es única y tiene sus bases en
    [min x1, max x1 − (a−1)] × [min x2, max x2 − (b−1)], con a × b la caja de B*.
    """
    sites = frozenset(Site(*s) for s in sites)
    if not sites:
        return Decomposition(model, frozenset())
    width = max(o.x1 for o in model.offsets) + 1
    height = max(o.x2 for o in model.offsets) + 1
    lo1, hi1 = min(s.x1 for s in sites), max(s.x1 for s in sites)
    lo2, hi2 = min(s.x2 for s in sites), max(s.x2 for s in sites)
    bases = [Site(i, j) for i in range(lo1, hi1 - width + 2) for j in range(lo2, hi2 - height + 2)]
    if not bases:
        return None

    box = Region.box((lo1, lo2), hi1 - lo1 + 1, hi2 - lo2 + 1)
    basis = EchelonBasis()
    for b in bases:
        basis.add(sum(1 << box.index(s) for s in plaquette_sites(model, b)))
    target = sum(1 << box.index(s) for s in sites)
    try:
        combo = basis.solve(target)
    except NotInSpanError:
        return None
    chosen = frozenset(b for k, b in enumerate(bases) if (combo >> k) & 1)
    return Decomposition(model, chosen)


# --- el TPM sobre T^(n) ---

def _check_extended(n: int, z: Tuple[int, int]):
    if z not in Region.extended_triangle(n):
        raise DomainError(f"z={tuple(z)} no pertenece a T^({n})")


def a_of_z(n: int, z: Tuple[int, int], method: str = "lucas") -> FrozenSet[int]:
    """
    A(z) = {j ∈ [n]_− : z + B* ∈ P_j} = z1 − S(z2), recortado a [−1, n].

    Args:
        n: tamaño del triángulo
        z: base en T^(n)
        method: "lucas" (paridad binomial) o "direct" (pertenencia a P_j construido por recurrencia)
    """
    _check_extended(n, z)
    z1, z2 = z
    if method == "lucas":
        return frozenset(z1 - c for c in odd_columns(z2 + 1) if -1 <= z1 - c <= n)
    if method == "direct":
        target = Site(z1, z2)
        return frozenset(j for j in range(-1, n + 1)
                         if target in set(tpm_pascal_bases((j, -1), z2 + 2)))
    raise DomainError(f"Método desconocido '{method}'")


def gamma_families(n: int) -> Dict[int, List[FrozenSet[int]]]:
    """Para cada j ∈ [n]_−, los conjuntos A(z^(1)), …, A(z^(n+2)) de Γ(j) en orden escalonado."""
    return {j: [a_of_z(n, z) for z in staircase_order(n, j)] for j in range(-1, n + 1)}


def gamma_membership_count(n: int, z: Tuple[int, int]) -> int:
    """|{j ∈ [n]_− : z ∈ Γ(j)}|."""
    return sum(1 for j in range(-1, n + 1) if Site(*z) in set(gamma_set(n, j)))
