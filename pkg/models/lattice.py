# models/lattice.py
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Any, Iterable, Iterator, List, NamedTuple, Optional, Tuple, FrozenSet

from models.errors import DomainError, EmptyRegionError


class Site(NamedTuple):
    """Sitio de Z². Es una tupla, así que (1, 2) == Site(1, 2)."""
    x1: int
    x2: int

    def shift(self, dx1: int, dx2: int) -> 'Site':
        return Site(self.x1 + dx1, self.x2 + dx2)

    def distance(self, other: Tuple[int, int]) -> int:
        """Distancia ℓ1."""
        return abs(self.x1 - other[0]) + abs(self.x2 - other[1])


class ModelKind(Enum):
    SPM = "spm"
    TPM = "tpm"
    RECT = "rect"


@dataclass(frozen=True)
class ModelSpec:
    """Qué plaqueta fundamental B* genera la interacción."""
    kind: ModelKind
    width: int = 2
    height: int = 2

    def __post_init__(self):
        if self.kind == ModelKind.RECT and (self.width < 2 or self.height < 2):
            raise DomainError(f"Rectángulo genérico requiere ancho y alto >= 2, recibido {self.width}x{self.height}")

    @classmethod
    def spm(cls) -> 'ModelSpec':
        return cls(ModelKind.SPM)

    @classmethod
    def tpm(cls) -> 'ModelSpec':
        return cls(ModelKind.TPM)

    @classmethod
    def rect(cls, width: int, height: int) -> 'ModelSpec':
        return cls(ModelKind.RECT, width, height)

    @classmethod
    def from_name(cls, name: str, width: int = 2, height: int = 2) -> 'ModelSpec':
        try:
            kind = ModelKind(name.lower())
        except ValueError:
            raise DomainError(f"Modelo desconocido '{name}' (esperado spm, tpm o rect)")
        if kind == ModelKind.RECT:
            return cls.rect(width, height)
        return cls(kind)

    @property
    def offsets(self) -> Tuple[Site, ...]:
        if self.kind == ModelKind.SPM:
            return (Site(0, 0), Site(1, 0), Site(0, 1), Site(1, 1))
        if self.kind == ModelKind.TPM:
            return (Site(0, 0), Site(0, 1), Site(1, 1))
        return tuple(Site(i, j) for j in range(self.height) for i in range(self.width))

    @property
    def plaquette_size(self) -> int:
        return len(self.offsets)

    @property
    def half_norm(self) -> float:
        """‖H‖ = |B*|/2."""
        return self.plaquette_size / 2.0

    @property
    def name(self) -> str:
        if self.kind == ModelKind.RECT:
            return f"rect{self.width}x{self.height}"
        return self.kind.value

    def to_dict(self) -> Dict[str, Any]:
        data = {'kind': self.kind.value}
        if self.kind == ModelKind.RECT:
            data.update({'width': self.width, 'height': self.height})
        return data


class PlaquetteMode(Enum):
    """Familia de plaquetas relativa a una región."""
    MEETING = "meeting"
    INSIDE = "inside"
    CLIPPED = "clipped"


@dataclass(frozen=True)
class PlaquetteId:
    """Plaqueta B* + base. En modo recortado `sites` guarda B ∩ Λ."""
    base: Site
    clipped: bool = False
    sites: Optional[FrozenSet[Site]] = field(default=None, compare=False, hash=False)

    @property
    def mode(self) -> str:
        return "clipped-to-region" if self.clipped else "full"


class Region:
    """
    Subconjunto finito de Z², guardado como lista ordenada de sitios
    más un índice hash para consultas de pertenencia.
    """

    def __init__(self, sites: Iterable[Tuple[int, int]], kind: str = "sites",
                 params: Optional[Dict[str, Any]] = None):
        self.sites: Tuple[Site, ...] = tuple(sorted({Site(int(s[0]), int(s[1])) for s in sites}))
        self._index: Dict[Site, int] = {s: i for i, s in enumerate(self.sites)}
        self.kind = kind
        self.params = params or {}

    def __len__(self) -> int:
        return len(self.sites)

    def __iter__(self) -> Iterator[Site]:
        return iter(self.sites)

    def __contains__(self, site) -> bool:
        return site in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, Region) and self.sites == other.sites

    def __hash__(self) -> int:
        return hash(self.sites)

    def __repr__(self) -> str:
        return f"Region({self.kind}, {self.params}, |Λ|={len(self)})"

    def index(self, site) -> int:
        return self._index[site]

    def require_nonempty(self):
        if not self.sites:
            raise EmptyRegionError("La región está vacía")

    @property
    def bounding_box(self) -> Tuple[int, int, int, int]:
        """(min x1, min x2, max x1, max x2)."""
        self.require_nonempty()
        xs = [s.x1 for s in self.sites]
        ys = [s.x2 for s in self.sites]
        return min(xs), min(ys), max(xs), max(ys)

    def translate(self, dx1: int, dx2: int) -> 'Region':
        return Region((s.shift(dx1, dx2) for s in self.sites), kind="sites")

    def minus(self, other: Iterable) -> 'Region':
        drop = set(other)
        return Region((s for s in self.sites if s not in drop), kind="sites")

    # --- constructores ---

    @classmethod
    def from_sites(cls, sites: Iterable[Tuple[int, int]]) -> 'Region':
        return cls(sites)

    @classmethod
    def box(cls, corner: Tuple[int, int], width: int, height: int) -> 'Region':
        c1, c2 = corner
        sites = [(c1 + i, c2 + j) for i in range(width) for j in range(height)]
        return cls(sites, "box", {'corner': [c1, c2], 'width': width, 'height': height})

    @classmethod
    def square(cls, ell: int) -> 'Region':
        """Q_ℓ = [ℓ]² = {1..ℓ}²."""
        region = cls.box((1, 1), ell, ell)
        region.kind, region.params = "square", {'ell': ell}
        return region

    @classmethod
    def centered_box(cls, ell: int) -> 'Region':
        """[−ℓ, ℓ]²."""
        region = cls.box((-ell, -ell), 2 * ell + 1, 2 * ell + 1)
        region.kind, region.params = "centered_box", {'ell': ell}
        return region

    @classmethod
    def triangle(cls, n: int) -> 'Region':
        """T*^(n): vértices origen, n·e1, n·(e1+e2)."""
        sites = [(x1, x2) for x1 in range(n + 1) for x2 in range(x1 + 1)]
        return cls(sites, "triangle", {'n': n})

    @classmethod
    def extended_triangle(cls, n: int) -> 'Region':
        """T^(n) = T*^(n) ∪ {(i, −1): −1 ≤ i ≤ n}."""
        sites = [(x1, x2) for x1 in range(n + 1) for x2 in range(x1 + 1)]
        sites += [(i, -1) for i in range(-1, n + 1)]
        return cls(sites, "extended_triangle", {'n': n})

    @classmethod
    def decimation_triangle(cls, n: int, big_n: int) -> 'Region':
        """T_{n,N}: vértices origen, 2^{n+N}e2, 2^{n+N}(e1+e2)."""
        side = 2 ** (n + big_n)
        sites = [(x1, x2) for x2 in range(side + 1) for x1 in range(x2 + 1)]
        return cls(sites, "decimation_triangle", {'n': n, 'N': big_n})

    @classmethod
    def decimation_square(cls, ell: int, big_n: int) -> 'Region':
        """Λ_{ℓ,N} = {0..ℓN}²."""
        region = cls.box((0, 0), ell * big_n + 1, ell * big_n + 1)
        region.kind, region.params = "decimation_square", {'ell': ell, 'N': big_n}
        return region

    @classmethod
    def annulus(cls, outer: 'Region', inner: 'Region') -> 'Region':
        return outer.minus(inner)

    # --- serialización ---

    def to_dict(self) -> Dict[str, Any]:
        if self.kind == "sites":
            return {'kind': 'sites', 'sites': [list(s) for s in self.sites]}
        return {'kind': self.kind, **self.params}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Region':
        kind = data.get('kind')
        builders = {
            'box': lambda d: cls.box(tuple(d['corner']), d['width'], d['height']),
            'square': lambda d: cls.square(d['ell']),
            'centered_box': lambda d: cls.centered_box(d['ell']),
            'triangle': lambda d: cls.triangle(d['n']),
            'extended_triangle': lambda d: cls.extended_triangle(d['n']),
            'decimation_triangle': lambda d: cls.decimation_triangle(d['n'], d['N']),
            'decimation_square': lambda d: cls.decimation_square(d['ell'], d['N']),
            'sites': lambda d: cls(d['sites']),
        }
        if kind not in builders:
            raise DomainError(f"Tipo de región desconocido: {kind}")
        try:
            return builders[kind](data)
        except KeyError as e:
            raise DomainError(f"Falta parámetro {e} en la región '{kind}'")


def sites_from_json(data: Any) -> List[Site]:
    """Acepta [[x1, x2], ...] y devuelve sitios."""
    try:
        return [Site(int(p[0]), int(p[1])) for p in data]
    except (TypeError, ValueError, IndexError) as e:
        raise DomainError(f"Lista de sitios mal formada: {e}")
