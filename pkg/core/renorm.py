# core/renorm.py
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

import numpy as np
from scipy.special import expit

from core.geometry import bases_through, plaquette_sites
from core.gibbs_exact import GibbsEnumerator
from core.shadows import tpm_pascal_bases
from models.boundary import BoundaryCondition, SpinConfig
from models.errors import DomainError
from models.lattice import ModelKind, ModelSpec, PlaquetteMode, Region, Site
from models.specs import GibbsSpec, RenormSpec

logger = logging.getLogger(__name__)

# Por debajo de este valor de (1−2q)^k se usa β′ ≈ 2(1−2q)^k
_LINEAR_THRESHOLD = 1e-300


def q_of_beta(beta: float) -> float:
    """q(β) = e^{−β/2}/(e^{−β/2} + e^{β/2}) = 1/(1 + e^β): probabilidad de un defecto."""
    if beta < 0:
        raise DomainError(f"beta debe ser no negativo, recibido {beta}")
    return float(expit(-beta))


def beta_of_q(q: float) -> float:
    """Inversa de q_of_beta, definida para q ∈ (0, 1/2]."""
    if not 0 < q <= 0.5:
        raise DomainError(f"q debe estar en (0, 1/2], recibido {q}")
    return math.log1p(-q) - math.log(q)


def phi_q_k(q: float, k: int) -> float:
    """φ(q, k) = 1/2 − (1/2)(1−2q)^k: probabilidad de que el producto de k signos sea −1."""
    if not 0 <= q <= 0.5:
        raise DomainError(f"q debe estar en [0, 1/2], recibido {q}")
    if k < 1:
        raise DomainError(f"k debe ser >= 1, recibido {k}")
    return 0.5 - 0.5 * (1 - 2 * q) ** k


@dataclass
class BetaPrime:
    beta: float
    ell: int
    k: int
    value: float
    linearized: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {'beta': self.beta, 'ell': self.ell, 'k': self.k, 'beta_prime': self.value,
                'linearized': self.linearized}


def log_tanh_half(beta: float) -> float:
    """log tanh(β/2) = log(1 − 2q(β)), estable para β grande."""
    if beta <= 0:
        return -math.inf
    e = math.exp(-beta)
    return math.log1p(-e) - math.log1p(e)


def beta_prime(beta: float, spec: RenormSpec) -> BetaPrime:
    """
    β′ = log((1 + (1−2q)^k)/(1 − (1−2q)^k)) con 1 − 2q(β) = tanh(β/2).

    Cuando (1−2q)^k cae por debajo de 1e−300 se devuelve la aproximación 2(1−2q)^k,
    marcada como linealizada.
    """
    if beta < 0:
        raise DomainError(f"beta debe ser no negativo, recibido {beta}")
    k = spec.k
    if beta == 0:
        return BetaPrime(beta, spec.ell, k, 0.0)
    log_r = k * log_tanh_half(beta)
    if log_r < math.log(_LINEAR_THRESHOLD):
        value = 2 * math.exp(log_r)
        logger.warning(f"β′ linealizado para β={beta}, ℓ={spec.ell}: {value!r}")
        return BetaPrime(beta, spec.ell, k, value, linearized=True)
    r = math.exp(log_r)
    value = math.log1p(r) - math.log(-math.expm1(log_r))
    return BetaPrime(beta, spec.ell, k, value)


# --- variables de plaqueta renormalizadas ---

SpinSource = Union[SpinConfig, Mapping[Tuple[int, int], int]]


def _spin(eta: SpinSource, site: Site) -> int:
    if isinstance(eta, SpinConfig):
        return eta.spin(site)
    if site not in eta:
        raise DomainError(f"Falta el espín del sitio {tuple(site)}")
    return eta[site]


def plaquette_value(model: ModelSpec, sigma: SpinSource, base: Tuple[int, int]) -> int:
    """p_x(σ) = [σ]_{B*+x}."""
    value = 1
    for s in plaquette_sites(model, base):
        value *= _spin(sigma, s)
    return value


def _model(spec: RenormSpec) -> ModelSpec:
    return ModelSpec.spm() if spec.kind == ModelKind.SPM else ModelSpec.tpm()


def renormalized_plaquette(spec: RenormSpec, eta: SpinSource, x: Tuple[int, int]) -> int:
    """p̂_x(η) = [η]_{ℓB*+x} con x en la subred ℓZ²."""
    x = Site(*x)
    if x.x1 % spec.ell or x.x2 % spec.ell:
        raise DomainError(f"{tuple(x)} no pertenece a la subred {spec.ell}Z²")
    value = 1
    for o in _model(spec).offsets:
        value *= _spin(eta, Site(x.x1 + spec.ell * o.x1, x.x2 + spec.ell * o.x2))
    return value


def block_bases(spec: RenormSpec, x: Tuple[int, int]) -> List[Site]:
    """Plaquetas cuyo producto es p̂_x: el bloque {0..ℓ−1}²+x (SPM) o el triángulo de Pascal P^n_x (TPM)."""
    x = Site(*x)
    if spec.kind == ModelKind.SPM:
        return [Site(x.x1 + i, x.x2 + j) for i in range(spec.ell) for j in range(spec.ell)]
    return list(tpm_pascal_bases(x, spec.ell))


def block_product(spec: RenormSpec, sigma: SpinSource, x: Tuple[int, int]) -> int:
    model = _model(spec)
    value = 1
    for b in block_bases(spec, x):
        value *= plaquette_value(model, sigma, b)
    return value


# --- regiones de decimación ---

@dataclass
class DecimationLayout:
    """
    Región Λ_{ℓ,N} (SPM) o T_{n,N} (TPM) con su borde libre y sus plaquetas internas.

    El borde es Sur+Oeste en el SPM y la columna Oeste en el TPM; junto con las
    variables de plaqueta determina la configuración.
    """
    spec: RenormSpec
    big_n: int
    region: Region
    boundary: List[Site]
    bases: List[Site]

    @classmethod
    def build(cls, spec: RenormSpec, big_n: int) -> 'DecimationLayout':
        if big_n < 1:
            raise DomainError(f"N debe ser >= 1, recibido {big_n}")
        if spec.kind == ModelKind.SPM:
            side = spec.ell * big_n
            region = Region.decimation_square(spec.ell, big_n)
            boundary = [s for s in region if s.x1 == 0 or s.x2 == 0]
            bases = [Site(a, b) for b in range(side) for a in range(side)]
        else:
            side = 2 ** (spec.n + big_n)
            region = Region.decimation_triangle(spec.n, big_n)
            boundary = [s for s in region if s.x1 == 0]
            bases = [Site(a, b) for a in range(side) for b in range(a, side)]
        return cls(spec, big_n, region, boundary, bases)

    @property
    def model(self) -> ModelSpec:
        return _model(self.spec)

    @property
    def normalizer_bits(self) -> int:
        """log2 del número de configuraciones compatibles con unas variables de plaqueta dadas."""
        return len(self.boundary)

    def decimated_sites(self) -> Tuple[Region, List[Site]]:
        """Región de paso unidad y, en el mismo orden, los sitios de Λ ∩ ℓZ²."""
        if self.spec.kind == ModelKind.SPM:
            small = Region.decimation_square(1, self.big_n)
        else:
            small = Region.decimation_triangle(0, self.big_n)
        ell = self.spec.ell
        return small, [Site(ell * s.x1, ell * s.x2) for s in small]

    def reconstruct(self, boundary_spins: np.ndarray, plaquettes: np.ndarray) -> np.ndarray:
        """
        Configuraciones (filas) a partir del borde y las variables de plaqueta.

        SPM: barrido por filas desde el Suroeste, σ(a+1,b+1) = p_(a,b) σ(a,b) σ(a+1,b) σ(a,b+1).
        TPM: barrido por columnas desde el Oeste, σ(a+1,b+1) = p_(a,b) σ(a,b) σ(a,b+1).
        """
        count = boundary_spins.shape[0]
        spins = np.zeros((count, len(self.region)), dtype=np.int8)
        pos = self.region.index
        for k, s in enumerate(self.boundary):
            spins[:, pos(s)] = boundary_spins[:, k]
        model = self.model
        for j, b in enumerate(self.bases):
            sites = sorted(plaquette_sites(model, b))
            target = Site(b.x1 + 1, b.x2 + 1)
            value = plaquettes[:, j].astype(np.int8)
            for s in sites:
                if s != target:
                    value = value * spins[:, pos(s)]
            spins[:, pos(target)] = value
        return spins

    def extract(self, spins: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Inversa de reconstruct: (espines del borde, variables de plaqueta)."""
        pos = self.region.index
        boundary = spins[:, [pos(s) for s in self.boundary]]
        model = self.model
        plaquettes = np.ones((spins.shape[0], len(self.bases)), dtype=np.int8)
        for j, b in enumerate(self.bases):
            for s in plaquette_sites(model, b):
                plaquettes[:, j] *= spins[:, pos(s)]
        return boundary, plaquettes


class FreeProductSampler:
    """
    Muestreo exacto de la medida de Gibbs libre como producto: borde uniforme y
    variables de plaqueta i.i.d. con P(−1) = q(β), seguidas de la reconstrucción.
    """

    def __init__(self, layout: DecimationLayout, beta: float, seed: int, stream: int = 0,
                 verify: bool = False):
        self.layout = layout
        self.beta = beta
        self.q = q_of_beta(beta)
        self.verify = verify
        self.rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stream])))

    def sample(self, count: int) -> np.ndarray:
        n_b, n_p = len(self.layout.boundary), len(self.layout.bases)
        boundary = np.where(self.rng.integers(0, 2, size=(count, n_b)) == 1, -1, 1).astype(np.int8)
        plaquettes = np.where(self.rng.random((count, n_p)) < self.q, -1, 1).astype(np.int8)
        spins = self.layout.reconstruct(boundary, plaquettes)
        if self.verify:
            _, check = self.layout.extract(spins)
            if not np.array_equal(check, plaquettes):
                raise RuntimeError("La reconstrucción no reproduce las variables de plaqueta muestreadas")
        return spins

    def stream(self, batch: int = 1024) -> Iterator[SpinConfig]:
        region = self.layout.region
        free = BoundaryCondition.free()
        while True:
            for row in self.sample(batch):
                yield SpinConfig(region, tuple(int(v) for v in row), free)


def free_gibbs_product_sampler(model: ModelSpec, ell: int, big_n: int, beta: float, seed: int,
                               verify: bool = False) -> FreeProductSampler:
    """Sampler sobre Λ_{ℓ,N} (SPM) o T_{n,N} con ℓ = 2^n (TPM)."""
    spec = RenormSpec(model.kind, ell)
    return FreeProductSampler(DecimationLayout.build(spec, big_n), beta, seed, verify=verify)


# --- comprobación de la decimación ---

@dataclass
class DecimationReport:
    model: str
    ell: int
    big_n: int
    beta: float
    beta_prime: float
    max_discrepancy: float
    states: int
    tolerance: float = 1e-10

    @property
    def ok(self) -> bool:
        return self.max_discrepancy <= self.tolerance

    def to_dict(self) -> Dict[str, Any]:
        return {'model': self.model, 'ell': self.ell, 'N': self.big_n, 'beta': self.beta,
                'beta_prime': self.beta_prime, 'max_discrepancy': self.max_discrepancy,
                'states': self.states, 'ok': self.ok}


def decimation_check(spec: RenormSpec, big_n: int, beta: float, tolerance: float = 1e-10,
                     config: Optional[Dict[str, Any]] = None) -> DecimationReport:
    """
    Compara estado a estado la marginal de μ^{β,f} en Λ ∩ ℓZ² con μ^{β′,f} en la región
    de paso unidad, ambas por enumeración exacta.
    """
    layout = DecimationLayout.build(spec, big_n)
    enumerator = GibbsEnumerator(config)
    model = layout.model
    small, decimated = layout.decimated_sites()
    free = BoundaryCondition.free()

    logger.info(f"Decimación {model.name} ℓ={spec.ell} N={big_n} β={beta}: {len(layout.region)} sitios")
    lhs = enumerator.marginal(GibbsSpec(model, layout.region, beta, free, PlaquetteMode.INSIDE), decimated)[0]
    renormalized = beta_prime(beta, spec)
    rhs = enumerator.marginal(GibbsSpec(model, small, renormalized.value, free, PlaquetteMode.INSIDE),
                              list(small))[0]
    discrepancy = float(np.abs(lhs - rhs).max())
    report = DecimationReport(model.name, spec.ell, big_n, beta, renormalized.value, discrepancy,
                              len(lhs), tolerance)
    if not report.ok:
        logger.error(f"Discrepancia de decimación {discrepancy!r} > {tolerance}")
    return report


# --- mapas de inversión ---

def tpm_flip_map(i: int, anchor: Tuple[int, int] = (0, 0)) -> FrozenSet[Site]:
    """
    T_i + anchor, con T_0 = {(0,0),(1,0),(1,1)} y
    T_{i+1} = T_i ∪ (T_i + (ℓ_i+1)e1) ∪ (T_i + (ℓ_i+1)(e1+e2)), ℓ_0 = 1.
    """
    if i < 0:
        raise DomainError(f"i debe ser >= 0, recibido {i}")
    sites = {Site(0, 0), Site(1, 0), Site(1, 1)}
    ell = 1
    for _ in range(i):
        step = ell + 1
        sites |= {s.shift(step, 0) for s in sites} | {s.shift(step, step) for s in sites}
        ell = 2 * ell + 1
    a1, a2 = anchor
    return frozenset(s.shift(a1, a2) for s in sites)


def tpm_flip_side(i: int) -> int:
    """ℓ_i = 2^{i+1} − 1."""
    return 2 ** (i + 1) - 1


def spm_flip_map(region: Region, axis: str, index: int) -> FrozenSet[Site]:
    """Fila (axis='row', x2 = index) o columna (axis='col', x1 = index) completa de la región."""
    if axis not in ('row', 'col'):
        raise DomainError(f"Eje desconocido '{axis}'")
    coord = 1 if axis == 'row' else 0
    sites = frozenset(s for s in region if s[coord] == index)
    if not sites:
        raise DomainError(f"La región no tiene {axis} con índice {index}")
    return sites


def flipped_plaquettes(model: ModelSpec, flip: Iterable[Tuple[int, int]]) -> FrozenSet[Site]:
    """Bases de las plaquetas que contienen un número impar de sitios invertidos."""
    acc = set()
    for s in flip:
        acc ^= set(bases_through(model, s))
    return frozenset(acc)


def apply_flip(config: SpinConfig, flip: Iterable[Tuple[int, int]]) -> SpinConfig:
    for s in flip:
        config = config.with_flip(s)
    return config
