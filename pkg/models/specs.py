# models/specs.py
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, FrozenSet, Optional, Tuple

from models.boundary import BoundaryCondition
from models.errors import DomainError, EmptyRegionError
from models.lattice import ModelKind, ModelSpec, PlaquetteMode, Region, Site


@dataclass
class GibbsSpec:
    """
    Especificación de una medida de Gibbs en volumen finito.

    Args:
        model: modelo (SPM, TPM o rectángulo)
        region: región Λ
        beta: temperatura inversa, no negativa
        bc: condición de borde
        plaquette_mode: familia activa (meeting, inside, clipped)
        restricted: familia P ⊆ B(Λ) opcional, dada por sus bases
    """
    model: ModelSpec
    region: Region
    beta: float
    bc: BoundaryCondition = field(default_factory=BoundaryCondition.all_plus)
    plaquette_mode: PlaquetteMode = PlaquetteMode.MEETING
    restricted: Optional[FrozenSet[Site]] = None

    def __post_init__(self):
        if len(self.region) == 0:
            raise EmptyRegionError("GibbsSpec con región vacía")
        if self.beta < 0:
            raise DomainError(f"beta debe ser no negativo, recibido {self.beta}")

    def with_bc(self, bc: BoundaryCondition) -> 'GibbsSpec':
        return GibbsSpec(self.model, self.region, self.beta, bc, self.plaquette_mode, self.restricted)

    def with_beta(self, beta: float) -> 'GibbsSpec':
        return GibbsSpec(self.model, self.region, beta, self.bc, self.plaquette_mode, self.restricted)


class Dynamics(Enum):
    HEAT_BATH = "heat-bath"
    METROPOLIS = "metropolis"


class ScanOrder(Enum):
    RANDOM = "random"
    SEQUENTIAL = "sequential"


@dataclass
class ChainSpec:
    """Cadena de Glauber/Metropolis de un solo espín; misma spec, misma trayectoria."""
    model: ModelSpec
    region: Region
    beta: float
    bc: BoundaryCondition = field(default_factory=BoundaryCondition.all_plus)
    dynamics: Dynamics = Dynamics.HEAT_BATH
    seed: int = 0
    sweeps: int = 1000
    burn_in: int = 100
    thinning: int = 1
    scan: ScanOrder = ScanOrder.RANDOM
    torus: Optional[Tuple[int, int]] = None
    chain_id: int = 0

    def __post_init__(self):
        if self.beta < 0:
            raise DomainError(f"beta debe ser no negativo, recibido {self.beta}")
        if self.sweeps <= 0 or self.thinning <= 0 or self.burn_in < 0:
            raise DomainError("sweeps y thinning deben ser positivos, burn_in no negativo")
        if self.torus is None and len(self.region) == 0:
            raise EmptyRegionError("ChainSpec con región vacía")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'model': self.model.name,
            'region': self.region.to_dict() if self.torus is None else {'torus': list(self.torus)},
            'beta': self.beta,
            'bc': self.bc.label,
            'dynamics': self.dynamics.value,
            'seed': self.seed,
            'sweeps': self.sweeps,
            'burn_in': self.burn_in,
            'thinning': self.thinning,
            'scan': self.scan.value,
            'chain_id': self.chain_id,
        }


@dataclass(frozen=True)
class RenormSpec:
    """Paso de decimación ℓ y exponente k (ℓ² en el SPM, 3^n con ℓ = 2^n en el TPM)."""
    kind: ModelKind
    ell: int

    def __post_init__(self):
        if self.ell < 1:
            raise DomainError(f"El paso de decimación debe ser positivo, recibido {self.ell}")
        if self.kind == ModelKind.TPM and self.ell & (self.ell - 1):
            raise DomainError(f"En el TPM el paso debe ser potencia de dos, recibido {self.ell}")
        if self.kind == ModelKind.RECT:
            raise DomainError("La renormalización exacta solo está definida para SPM y TPM")

    @classmethod
    def spm(cls, ell: int) -> 'RenormSpec':
        return cls(ModelKind.SPM, ell)

    @classmethod
    def tpm(cls, n: int) -> 'RenormSpec':
        return cls(ModelKind.TPM, 2 ** n)

    @property
    def n(self) -> int:
        return self.ell.bit_length() - 1

    @property
    def k(self) -> int:
        if self.kind == ModelKind.SPM:
            return self.ell * self.ell
        return 3 ** self.n
