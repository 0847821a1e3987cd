# models/boundary.py
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Tuple

import numpy as np

from models.errors import BoundaryCoverageError, DomainError
from models.lattice import Region, Site

# Desplazamiento para que SeedSequence reciba enteros no negativos
_COORD_OFFSET = 2 ** 31


class BoundaryKind(Enum):
    ALL_PLUS = "all_plus"
    ALL_MINUS = "all_minus"
    FREE = "free"
    EXPLICIT = "explicit"
    RANDOM = "random"
    CHECKERBOARD = "checkerboard"
    STRIPES_H = "stripes_h"
    STRIPES_V = "stripes_v"


@dataclass
class BoundaryCondition:
    """
    Regla que produce los espines fuera de la región.

    Los mapas explícitos deben cubrir todo el soporte exterior que se lea;
    un sitio ausente es un error, nunca un valor por defecto.
    """
    kind: BoundaryKind
    values: Dict[Site, int] = field(default_factory=dict)
    seed: int = 0
    index: int = 0
    phase: int = 0
    flips: FrozenSet[Site] = frozenset()

    @classmethod
    def all_plus(cls) -> 'BoundaryCondition':
        return cls(BoundaryKind.ALL_PLUS)

    @classmethod
    def all_minus(cls) -> 'BoundaryCondition':
        return cls(BoundaryKind.ALL_MINUS)

    @classmethod
    def free(cls) -> 'BoundaryCondition':
        return cls(BoundaryKind.FREE)

    @classmethod
    def explicit(cls, values: Dict[Tuple[int, int], int]) -> 'BoundaryCondition':
        clean = {Site(*s): (1 if v > 0 else -1) for s, v in values.items()}
        return cls(BoundaryKind.EXPLICIT, values=clean)

    @classmethod
    def random(cls, seed: int, index: int = 0) -> 'BoundaryCondition':
        return cls(BoundaryKind.RANDOM, seed=seed, index=index)

    @classmethod
    def checkerboard(cls, phase: int = 0) -> 'BoundaryCondition':
        return cls(BoundaryKind.CHECKERBOARD, phase=phase)

    @classmethod
    def stripes(cls, axis: str, phase: int = 0) -> 'BoundaryCondition':
        kind = BoundaryKind.STRIPES_H if axis == 'h' else BoundaryKind.STRIPES_V
        return cls(kind, phase=phase)

    @staticmethod
    def random_family(seed: int, count: int) -> List['BoundaryCondition']:
        return [BoundaryCondition.random(seed, i) for i in range(count)]

    @staticmethod
    def declared_family(seed: int, random_count: int) -> List['BoundaryCondition']:
        """{AllPlus, AllMinus, tablero, 4 franjas, N aleatorias}."""
        family = [BoundaryCondition.all_plus(), BoundaryCondition.all_minus(),
                  BoundaryCondition.checkerboard()]
        for axis in ('h', 'v'):
            for phase in (0, 1):
                family.append(BoundaryCondition.stripes(axis, phase))
        family.extend(BoundaryCondition.random_family(seed, random_count))
        return family

    @property
    def is_free(self) -> bool:
        return self.kind == BoundaryKind.FREE

    @property
    def label(self) -> str:
        if self.kind == BoundaryKind.RANDOM:
            text = f"random[{self.seed}:{self.index}]"
        elif self.kind in (BoundaryKind.CHECKERBOARD, BoundaryKind.STRIPES_H, BoundaryKind.STRIPES_V):
            text = f"{self.kind.value}[{self.phase}]"
        elif self.kind == BoundaryKind.EXPLICIT:
            text = f"explicit[{len(self.values)}]"
        else:
            text = self.kind.value
        if self.flips:
            text += "^" + ",".join(f"({s.x1},{s.x2})" for s in sorted(self.flips))
        return text

    def with_flip(self, site: Tuple[int, int]) -> 'BoundaryCondition':
        """τ^x: la misma condición con el espín en x invertido."""
        flips = set(self.flips) ^ {Site(*site)}
        return BoundaryCondition(self.kind, dict(self.values), self.seed, self.index,
                                 self.phase, frozenset(flips))

    def spin(self, site: Tuple[int, int]) -> int:
        site = Site(*site)
        value = self._base_spin(site)
        return -value if site in self.flips else value

    def _base_spin(self, site: Site) -> int:
        if self.kind == BoundaryKind.ALL_PLUS:
            return 1
        if self.kind == BoundaryKind.ALL_MINUS:
            return -1
        if self.kind == BoundaryKind.CHECKERBOARD:
            return -1 if (site.x1 + site.x2 + self.phase) % 2 else 1
        if self.kind == BoundaryKind.STRIPES_H:
            return -1 if (site.x2 + self.phase) % 2 else 1
        if self.kind == BoundaryKind.STRIPES_V:
            return -1 if (site.x1 + self.phase) % 2 else 1
        if self.kind == BoundaryKind.RANDOM:
            seq = np.random.SeedSequence([self.seed, self.index,
                                          site.x1 + _COORD_OFFSET, site.x2 + _COORD_OFFSET])
            return 1 if seq.generate_state(1)[0] & 1 else -1
        if self.kind == BoundaryKind.EXPLICIT:
            if site not in self.values:
                raise BoundaryCoverageError(f"La condición explícita no cubre el sitio {tuple(site)}")
            return self.values[site]
        raise BoundaryCoverageError("La condición libre no define espines exteriores")

    def to_dict(self) -> Dict:
        data = {'kind': self.kind.value}
        if self.kind == BoundaryKind.RANDOM:
            data.update({'seed': self.seed, 'index': self.index})
        elif self.kind in (BoundaryKind.CHECKERBOARD, BoundaryKind.STRIPES_H, BoundaryKind.STRIPES_V):
            data['phase'] = self.phase
        elif self.kind == BoundaryKind.EXPLICIT:
            data['values'] = [[s.x1, s.x2, v] for s, v in sorted(self.values.items())]
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> 'BoundaryCondition':
        kind = BoundaryKind(data.get('kind', 'all_plus'))
        if kind == BoundaryKind.EXPLICIT:
            return cls.explicit({(x1, x2): v for x1, x2, v in data.get('values', [])})
        return cls(kind, seed=data.get('seed', 0), index=data.get('index', 0),
                   phase=data.get('phase', 0))


def exhaustive_family(support: List[Site]) -> List[BoundaryCondition]:
    """Todas las asignaciones ±1 de un soporte exterior (2^|soporte| condiciones)."""
    family = []
    for mask in range(2 ** len(support)):
        values = {s: (-1 if (mask >> i) & 1 else 1) for i, s in enumerate(support)}
        family.append(BoundaryCondition(BoundaryKind.EXPLICIT, values=values))
    return family


@dataclass
class SpinConfig:
    """
    Configuración ±1 en la región más la condición de borde que da los espines exteriores.

    `interior` sigue el orden de los sitios de la región. Con el índice entero de la
    enumeración, el bit i a 1 significa σ_i = −1.
    """
    region: Region
    interior: Tuple[int, ...]
    boundary: BoundaryCondition = field(default_factory=BoundaryCondition.all_plus)

    def __post_init__(self):
        if len(self.interior) != len(self.region):
            raise DomainError(f"Se esperaban {len(self.region)} espines, recibidos {len(self.interior)}")
        if any(v not in (1, -1) for v in self.interior):
            raise DomainError("Los espines deben valer +1 o -1")

    @classmethod
    def from_index(cls, region: Region, index: int, boundary: Optional[BoundaryCondition] = None) -> 'SpinConfig':
        spins = tuple(-1 if (index >> i) & 1 else 1 for i in range(len(region)))
        return cls(region, spins, boundary or BoundaryCondition.all_plus())

    @classmethod
    def all_plus(cls, region: Region, boundary: Optional[BoundaryCondition] = None) -> 'SpinConfig':
        return cls(region, (1,) * len(region), boundary or BoundaryCondition.all_plus())

    def to_index(self) -> int:
        return sum(1 << i for i, v in enumerate(self.interior) if v < 0)

    def spin(self, site: Tuple[int, int]) -> int:
        if site in self.region:
            return self.interior[self.region.index(site)]
        return self.boundary.spin(site)

    def product(self, sites) -> int:
        """[σ]_V = Π_{x∈V} σ_x."""
        value = 1
        for s in sites:
            value *= self.spin(s)
        return value

    def with_flip(self, site: Tuple[int, int]) -> 'SpinConfig':
        """σ^x: el espín en x invertido, dentro o fuera de la región."""
        if site in self.region:
            spins = list(self.interior)
            spins[self.region.index(site)] *= -1
            return SpinConfig(self.region, tuple(spins), self.boundary)
        return SpinConfig(self.region, self.interior, self.boundary.with_flip(site))

    def with_spins(self, values: Dict[Tuple[int, int], int]) -> 'SpinConfig':
        spins = list(self.interior)
        for s, v in values.items():
            spins[self.region.index(Site(*s))] = 1 if v > 0 else -1
        return SpinConfig(self.region, tuple(spins), self.boundary)
