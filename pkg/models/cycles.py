# models/cycles.py
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

from models.errors import DomainError
from models.lattice import ModelSpec, PlaquetteId, PlaquetteMode, Region, Site


class PlaquetteUniverse:
    """Familia indexada densamente de plaquetas; los ParitySet son máscaras de bits sobre ella."""

    def __init__(self, plaquettes: Sequence[PlaquetteId], site_sets: Sequence[Iterable[Site]]):
        self.plaquettes: Tuple[PlaquetteId, ...] = tuple(plaquettes)
        self.site_sets: Tuple[FrozenSet[Site], ...] = tuple(frozenset(s) for s in site_sets)
        self._index: Dict[PlaquetteId, int] = {p: i for i, p in enumerate(self.plaquettes)}
        self._base_index: Dict[Site, int] = {p.base: i for i, p in enumerate(self.plaquettes)}

    def __len__(self) -> int:
        return len(self.plaquettes)

    def index(self, plaquette: PlaquetteId) -> int:
        return self._index[plaquette]

    def index_of_base(self, base: Tuple[int, int]) -> Optional[int]:
        return self._base_index.get(Site(*base))

    def vertex_sum(self, bits: int) -> FrozenSet[Site]:
        """Suma en F2 de los conjuntos de vértices de las plaquetas de `bits`."""
        acc = set()
        for i in iter_bits(bits):
            acc ^= self.site_sets[i]
        return frozenset(acc)

    def site_incidence(self, region: Region) -> List[int]:
        """Una máscara por sitio de la región: qué plaquetas lo contienen."""
        rows = [0] * len(region)
        for i, sites in enumerate(self.site_sets):
            for s in sites:
                if s in region:
                    rows[region.index(s)] |= 1 << i
        return rows

    def mask_of_bases(self, bases: Iterable[Tuple[int, int]]) -> int:
        bits = 0
        for b in bases:
            idx = self.index_of_base(b)
            if idx is None:
                raise DomainError(f"La plaqueta con base {tuple(b)} no pertenece al universo")
            bits ^= 1 << idx
        return bits


def iter_bits(bits: int) -> Iterator[int]:
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


@dataclass(frozen=True)
class ParitySet:
    """Elemento del espacio F2 de conjuntos de plaquetas; la suma es la diferencia simétrica."""
    bits: int
    universe: PlaquetteUniverse = field(compare=False, hash=False, repr=False)

    @classmethod
    def zero(cls, universe: PlaquetteUniverse) -> 'ParitySet':
        return cls(0, universe)

    @classmethod
    def from_bases(cls, universe: PlaquetteUniverse, bases: Iterable[Tuple[int, int]]) -> 'ParitySet':
        return cls(universe.mask_of_bases(bases), universe)

    def __add__(self, other: 'ParitySet') -> 'ParitySet':
        if other.universe is not self.universe:
            raise DomainError("No se pueden sumar ParitySet de universos distintos")
        return ParitySet(self.bits ^ other.bits, self.universe)

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __bool__(self) -> bool:
        return self.bits != 0

    def __iter__(self) -> Iterator[PlaquetteId]:
        return (self.universe.plaquettes[i] for i in iter_bits(self.bits))

    def __contains__(self, plaquette: PlaquetteId) -> bool:
        return bool((self.bits >> self.universe.index(plaquette)) & 1)

    @property
    def bases(self) -> List[Site]:
        return sorted(p.base for p in self)

    def vertex_set(self) -> FrozenSet[Site]:
        return self.universe.vertex_sum(self.bits)


class Provenance(Enum):
    SPM_STRIPES = "spm-stripes"
    TPM_PASCAL = "tpm-pascal"
    PLUS_BC_ROWS_COLS = "plus-bc-rows-cols"
    CUSTOM = "custom"


@dataclass
class CycleBasis:
    """Generadores del espacio de ciclos; `relations` cuenta las dependencias conocidas."""
    region: Region
    mode: PlaquetteMode
    universe: PlaquetteUniverse
    generators: List[ParitySet]
    provenance: Provenance = Provenance.CUSTOM
    relations: int = 0

    @property
    def rank(self) -> int:
        return len(self.generators) - self.relations

    @property
    def masks(self) -> List[int]:
        return [g.bits for g in self.generators]


class ScreenKind(Enum):
    TPM_LINE = "tpm-horizontal-line"
    SPM_CORNER = "spm-corner"


class CornerSign(Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class ShadowScreen:
    """Pantalla R: recta horizontal (TPM) o esquina con vértice `apex` (SPM)."""
    kind: ScreenKind
    height: int = 0
    apex: Site = Site(0, 0)
    sign: CornerSign = CornerSign.NEGATIVE

    @classmethod
    def tpm_line(cls, height: int) -> 'ShadowScreen':
        return cls(ScreenKind.TPM_LINE, height=height)

    @classmethod
    def spm_corner(cls, apex: Tuple[int, int], sign: CornerSign = CornerSign.NEGATIVE) -> 'ShadowScreen':
        return cls(ScreenKind.SPM_CORNER, apex=Site(*apex), sign=sign)

    def covers(self, site: Tuple[int, int]) -> bool:
        if self.kind == ScreenKind.TPM_LINE:
            return site[1] <= self.height
        if self.sign == CornerSign.NEGATIVE:
            return site[0] <= self.apex.x1 and site[1] <= self.apex.x2
        return site[0] >= self.apex.x1 and site[1] >= self.apex.x2

    def on_screen(self, site: Tuple[int, int]) -> bool:
        if self.kind == ScreenKind.TPM_LINE:
            return site[1] == self.height
        return self.covers(site) and (site[0] == self.apex.x1 or site[1] == self.apex.x2)


@dataclass(frozen=True)
class Decomposition:
    """Descomposición en plaquetas (dadas por su base) cuya suma de vértices es A."""
    model: ModelSpec
    bases: FrozenSet[Site]

    @property
    def size(self) -> int:
        return len(self.bases)

    def to_parity_set(self, universe: PlaquetteUniverse) -> ParitySet:
        return ParitySet.from_bases(universe, self.bases)

    def to_dict(self) -> Dict:
        return {'model': self.model.name, 'n': self.size,
                'plaquettes': [list(b) for b in sorted(self.bases)]}
