# models/results.py
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional


class Exactness(Enum):
    EXACT = "exact"
    LOWER_BOUND = "lower-bound"
    BRACKET = "bracket"
    ESTIMATE = "estimate"


@dataclass
class QuantityRecord:
    """Registro emitido en CSV/JSON para cualquier cantidad calculada"""
    model: str
    region: str
    beta: float
    bc: str
    quantity: str
    value: float
    exactness: Exactness = Exactness.EXACT
    stderr: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'model': self.model,
            'region': self.region,
            'beta': self.beta,
            'bc': self.bc,
            'quantity': self.quantity,
            'value': self.value,
            'exactness_flag': self.exactness.value,
            'stderr': self.stderr,
        }


@dataclass
class SupResult:
    """Supremo sobre una familia de condiciones de borde, con la bandera de exactitud."""
    value: float
    exactness: Exactness
    argmax: Optional[str] = None
    evaluated: int = 0


@dataclass
class MagnetizationResult:
    ell: int
    beta: float
    L: int
    log_n: float
    log_d: float
    method: str = "closed-form"

    @property
    def value(self) -> float:
        if self.log_n == -math.inf:
            return 0.0
        return math.exp(self.log_n - self.log_d)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'ell': self.ell,
            'beta': self.beta,
            'L': self.L,
            'logN': self.log_n,
            'logD': self.log_d,
            'value': self.value,
            'method': self.method,
        }


class LengthKind(Enum):
    MIX = "mix"
    CAVITY = "cavity"
    MULTISPIN = "multispin"
    RENORM = "renorm"


@dataclass
class LengthEstimate:
    """Estimación de una longitud crítica; en un bracket se cumple lo <= hi."""
    kind: LengthKind
    beta: float
    lo: int
    hi: int
    certainty: Exactness
    parameters: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"Bracket inválido: lo={self.lo} > hi={self.hi}")
        if self.certainty == Exactness.EXACT and self.lo != self.hi:
            raise ValueError("Una longitud exacta requiere lo == hi")

    @property
    def value(self) -> int:
        return self.lo

    def to_dict(self) -> Dict[str, Any]:
        return {
            'beta': self.beta,
            'kind': self.kind.value,
            'lo': self.lo,
            'hi': self.hi,
            'flag': self.certainty.value,
        }
