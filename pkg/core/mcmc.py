# core/mcmc.py
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from core.enumeration import build_terms
from core.geometry import plaquette_family
from models.boundary import BoundaryCondition
from models.errors import DomainError
from models.lattice import ModelSpec, PlaquetteMode, Region, Site
from models.specs import ChainSpec, Dynamics, ScanOrder
from utils.parallel import ordered_map

logger = logging.getLogger(__name__)


def chain_rng(seed: int, chain_id: int) -> np.random.Generator:
    """Flujo Philox-4x64 propio de (seed, chain_id): cadenas distintas nunca comparten estado."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, chain_id])))


def flip_probability(field_: np.ndarray, beta: float, dynamics: Dynamics) -> np.ndarray:
    """
    Probabilidad de invertir un espín con campo local h = Σ_{B∋x} [σ]_B.

    La inversión cambia el logaritmo del peso en −βh.
    """
    if dynamics == Dynamics.HEAT_BATH:
        return 1.0 / (1.0 + np.exp(beta * field_))
    return np.minimum(1.0, np.exp(-beta * field_))


class Lattice:
    """
    Espines de una caja (con un marco exterior fijo) o de un toro, como array
    (réplicas, ancho, alto). Los sitios se reparten en cuatro colores (x1 mod 2, x2 mod 2):
    dos sitios del mismo color nunca comparten plaqueta, así que se actualizan a la vez.
    """

    def __init__(self, model: ModelSpec, region: Optional[Region], bc: BoundaryCondition,
                 torus: Optional[Tuple[int, int]] = None):
        self.model = model
        self.offsets = list(model.offsets)
        if any(o.x1 > 1 or o.x2 > 1 for o in self.offsets):
            raise DomainError("El muestreador requiere plaquetas contenidas en una caja 2×2")
        self.torus = torus is not None
        self.bc = bc

        if self.torus:
            width, height = torus
            if width % 2 or height % 2 or width < 2 or height < 2:
                raise DomainError(f"El toro necesita lados pares, recibido {torus}")
            self.width, self.height = width, height
            self.origin = (0, 0)
            self.pad = 0
            self.region = Region.box((0, 0), width, height)
            self.active = np.ones((width, height))
        else:
            lo1, lo2, hi1, hi2 = region.bounding_box
            self.width, self.height = hi1 - lo1 + 1, hi2 - lo2 + 1
            if len(region) != self.width * self.height:
                raise DomainError("El muestreador solo admite regiones rectangulares o toros")
            self.region = region
            self.origin = (lo1 - 1, lo2 - 1)
            self.pad = 1
            self.active = self._active_mask()

        ii, jj = np.meshgrid(np.arange(self.width), np.arange(self.height), indexing='ij')
        parity = ((ii + self.origin[0] + self.pad) % 2) * 2 + (jj + self.origin[1] + self.pad) % 2
        self.colours = [parity == c for c in range(4)]

    # --- coordenadas ---

    def cell(self, site: Tuple[int, int]) -> Tuple[int, int]:
        """Índice en el array completo (con marco si es una caja)."""
        if self.torus:
            return site[0] % self.width, site[1] % self.height
        return site[0] - self.origin[0], site[1] - self.origin[1]

    def base_site(self, a: int, b: int) -> Site:
        return Site(a + self.origin[0], b + self.origin[1])

    def _active_mask(self) -> np.ndarray:
        """Plaquetas activas por base: meeting, o solo internas si el borde es libre."""
        mode = PlaquetteMode.INSIDE if self.bc.is_free else PlaquetteMode.MEETING
        active = np.zeros((self.width + 1, self.height + 1))
        for p in plaquette_family(self.model, self.region, mode):
            a, b = self.cell(p.base)
            active[a, b] = 1.0
        return active

    def initial(self, replicas: int, rng: np.random.Generator, init: str = "random") -> np.ndarray:
        if self.torus:
            shape = (replicas, self.width, self.height)
            spins = np.ones(shape, dtype=np.int8)
        else:
            shape = (replicas, self.width + 2, self.height + 2)
            spins = np.ones(shape, dtype=np.int8)
            if not self.bc.is_free:
                for a in range(self.width + 2):
                    for b in range(self.height + 2):
                        site = self.base_site(a, b)
                        if site not in self.region and self._frame_needed(a, b):
                            spins[:, a, b] = self.bc.spin(site)
        if init == "random":
            interior = rng.integers(0, 2, size=(replicas, self.width, self.height), dtype=np.int8)
            self.interior(spins)[...] = 1 - 2 * interior
        elif init != "plus":
            raise DomainError(f"Inicialización desconocida '{init}'")
        return spins

    def _frame_needed(self, a: int, b: int) -> bool:
        """El sitio del marco pertenece a alguna plaqueta activa."""
        for o in self.offsets:
            pa, pb = a - o.x1, b - o.x2
            if 0 <= pa <= self.width and 0 <= pb <= self.height and self.active[pa, pb]:
                return True
        return False

    def interior(self, spins: np.ndarray) -> np.ndarray:
        if self.torus:
            return spins
        return spins[:, 1:self.width + 1, 1:self.height + 1]

    # --- plaquetas y campo local ---

    def plaquettes(self, spins: np.ndarray) -> np.ndarray:
        """[σ]_B por base, forma (réplicas, ancho+1, alto+1) en la caja o (réplicas, ancho, alto) en el toro."""
        if self.torus:
            prod = np.ones_like(spins)
            for o in self.offsets:
                prod = prod * np.roll(spins, (-o.x1, -o.x2), axis=(1, 2))
            return prod
        w, h = self.width + 1, self.height + 1
        prod = np.ones((spins.shape[0], w, h), dtype=np.int8)
        for o in self.offsets:
            prod = prod * spins[:, o.x1:o.x1 + w, o.x2:o.x2 + h]
        return prod

    def local_field(self, spins: np.ndarray) -> np.ndarray:
        """h_x = Σ_{B∋x, B activa} [σ]_B en los sitios de la región."""
        weighted = self.plaquettes(spins) * self.active
        if self.torus:
            total = np.zeros(spins.shape, dtype=np.float64)
            for o in self.offsets:
                total += np.roll(weighted, (o.x1, o.x2), axis=(1, 2))
            return total
        total = np.zeros((spins.shape[0], self.width, self.height))
        for o in self.offsets:
            total += weighted[:, 1 - o.x1:1 - o.x1 + self.width, 1 - o.x2:1 - o.x2 + self.height]
        return total

    def state_index(self, spins: np.ndarray) -> np.ndarray:
        """Índice entero por réplica con el bit i a 1 si σ del i-ésimo sitio de la región vale −1."""
        index = np.zeros(spins.shape[0], dtype=np.int64)
        for i, s in enumerate(self.region):
            a, b = self.cell(s)
            index |= (spins[:, a, b] < 0).astype(np.int64) << i
        return index


Observable = Callable[[Lattice, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SpinProduct:
    """[σ]_A por réplica."""
    sites: Tuple[Tuple[int, int], ...]

    def __call__(self, lattice: Lattice, spins: np.ndarray) -> np.ndarray:
        value = np.ones(spins.shape[0])
        for s in self.sites:
            a, b = lattice.cell(s)
            value = value * spins[:, a, b]
        return value[:, None]


@dataclass(frozen=True)
class MarginalIndicators:
    """Indicadores de los 2^|V| estados de σ_V (bit k a 1 si el k-ésimo sitio vale −1)."""
    sites: Tuple[Tuple[int, int], ...]

    def __call__(self, lattice: Lattice, spins: np.ndarray) -> np.ndarray:
        key = np.zeros(spins.shape[0], dtype=np.int64)
        for k, s in enumerate(self.sites):
            a, b = lattice.cell(s)
            key |= (spins[:, a, b] < 0).astype(np.int64) << k
        out = np.zeros((spins.shape[0], 1 << len(self.sites)))
        out[np.arange(spins.shape[0]), key] = 1.0
        return out


@dataclass(frozen=True)
class DefectDensity:
    """Fracción de plaquetas con [σ]_B = −1, sin las bases a menos de `ring` del borde."""
    ring: int = 2

    def __call__(self, lattice: Lattice, spins: np.ndarray) -> np.ndarray:
        prod = lattice.plaquettes(spins)
        if lattice.torus:
            bulk = prod
        else:
            lo = 1 + self.ring
            bulk = prod[:, lo:lattice.width - self.ring, lo:lattice.height - self.ring]
            if bulk.size == 0:
                raise DomainError(f"No quedan plaquetas tras excluir un anillo de {self.ring}")
        return (bulk < 0).mean(axis=(1, 2))[:, None]


def spin_product_observable(sites: Sequence[Tuple[int, int]]) -> Observable:
    return SpinProduct(tuple(tuple(s) for s in sites))


def marginal_observable(sites: Sequence[Tuple[int, int]]) -> Observable:
    return MarginalIndicators(tuple(tuple(s) for s in sites))


def defect_density_observable(ring: int = 2) -> Observable:
    return DefectDensity(ring)


@dataclass
class ChainResult:
    """Series promediadas sobre réplicas; errores por medias de lotes."""
    spec: ChainSpec
    series: Dict[str, np.ndarray]
    means: Dict[str, np.ndarray]
    stderr: Dict[str, np.ndarray]
    replicas: int
    sweeps: List[int] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        columns = {'sweep': self.sweeps}
        for name, values in self.series.items():
            if values.shape[1] == 1:
                columns[name] = values[:, 0]
            else:
                for k in range(values.shape[1]):
                    columns[f"{name}[{k}]"] = values[:, k]
        return pd.DataFrame(columns)

    def summary(self) -> Dict[str, Any]:
        return {'spec': self.spec.to_dict(), 'replicas': self.replicas,
                'means': {k: v.tolist() for k, v in self.means.items()},
                'stderr': {k: v.tolist() for k, v in self.stderr.items()}}


def batch_means(series: np.ndarray, batches: int) -> Tuple[np.ndarray, np.ndarray]:
    """Media y error estándar por medias de lotes; la serie tiene forma (registros, m)."""
    n = series.shape[0]
    if n < batches or batches < 2:
        raise DomainError(f"Se necesitan al menos {batches} registros para {batches} lotes, hay {n}")
    size = n // batches
    blocks = series[:size * batches].reshape(batches, size, -1).mean(axis=1)
    return series.mean(axis=0), blocks.std(axis=0, ddof=1) / math.sqrt(batches)


class ChainRunner:
    """
    Dinámica de Glauber (baño térmico) o Metropolis con actualizaciones por color.

    Lee la sección `mcmc` de la configuración: batches, replicas, init y beta_warning.
    """

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        self.config = config or {}
        mcmc = self.config.get('mcmc', {})
        self.batches = mcmc.get('batches', 20)
        self.replicas = mcmc.get('replicas', 8)
        self.init = mcmc.get('init', 'random')
        self.beta_warning = mcmc.get('beta_warning', 2.5)
        self.defaults = {'sweeps': mcmc.get('sweeps', 2000), 'burn_in': mcmc.get('burn_in', 200),
                         'thinning': mcmc.get('thinning', 1),
                         'dynamics': Dynamics(mcmc.get('dynamics', 'heat-bath')),
                         'scan': ScanOrder(mcmc.get('scan', 'random'))}
        self.threads = self.config.get('parallel', {}).get('threads', 1)

    def lattice(self, spec: ChainSpec) -> Lattice:
        return Lattice(spec.model, None if spec.torus else spec.region, spec.bc, spec.torus)

    def sweep(self, lattice: Lattice, spins: np.ndarray, spec: ChainSpec, rng: np.random.Generator):
        order = rng.permutation(4) if spec.scan == ScanOrder.RANDOM else range(4)
        interior = lattice.interior(spins)
        for c in order:
            mask = lattice.colours[c]
            field_ = lattice.local_field(spins)[:, mask]
            flip = rng.random(field_.shape) < flip_probability(field_, spec.beta, spec.dynamics)
            values = interior[:, mask]
            interior[:, mask] = np.where(flip, -values, values)

    def run(self, spec: ChainSpec, observables: Dict[str, Observable]) -> ChainResult:
        """Ejecuta la cadena y devuelve las series de los observables."""
        if spec.beta > self.beta_warning:
            logger.warning(f"β={spec.beta} > {self.beta_warning}: los tiempos de relajación crecen "
                           f"como e^β y las estimaciones pueden no estar equilibradas")
        lattice = self.lattice(spec)
        rng = chain_rng(spec.seed, spec.chain_id)
        spins = lattice.initial(self.replicas, rng, self.init)

        records: Dict[str, List[np.ndarray]] = {name: [] for name in observables}
        sweeps = []
        for t in range(spec.burn_in + spec.sweeps):
            self.sweep(lattice, spins, spec, rng)
            if t >= spec.burn_in and (t - spec.burn_in) % spec.thinning == 0:
                sweeps.append(t)
                for name, f in observables.items():
                    records[name].append(f(lattice, spins).mean(axis=0))

        series = {name: np.array(values) for name, values in records.items()}
        means, stderr = {}, {}
        for name, values in series.items():
            means[name], stderr[name] = batch_means(values, min(self.batches, len(values)))
        logger.info(f"Cadena {spec.model.name} β={spec.beta} semilla={spec.seed}:{spec.chain_id} "
                    f"con {len(sweeps)} registros")
        return ChainResult(spec, series, means, stderr, self.replicas, sweeps)

    def run_many(self, specs: Sequence[ChainSpec], observables: Dict[str, Observable]) -> List[ChainResult]:
        """Cadenas independientes en paralelo; el orden del resultado es el de las specs."""
        return ordered_map(_ChainTask(self.config, observables), specs, self.threads)

    # --- estimadores ---

    def estimate_multispin(self, spec: ChainSpec, sites: Sequence[Tuple[int, int]]) -> Tuple[float, float]:
        result = self.run(spec, {'multispin': spin_product_observable(sites)})
        return float(result.means['multispin'][0]), float(result.stderr['multispin'][0])

    def defect_density(self, spec: ChainSpec, ring: int = 2) -> Tuple[float, float]:
        result = self.run(spec, {'defects': defect_density_observable(ring)})
        return float(result.means['defects'][0]), float(result.stderr['defects'][0])

    def marginal_estimate(self, model: ModelSpec, region: Region, beta: float, bc: BoundaryCondition,
                          sites: Sequence[Tuple[int, int]], seed: int, chain_id: int = 0) -> Tuple[np.ndarray, np.ndarray]:
        """Ley estimada de σ_V y su error estándar por estado."""
        spec = ChainSpec(model, region, beta, bc, self.defaults['dynamics'], seed,
                         self.defaults['sweeps'], self.defaults['burn_in'], self.defaults['thinning'],
                         self.defaults['scan'], chain_id=chain_id)
        result = self.run(spec, {'marginal': marginal_observable(sites)})
        return result.means['marginal'], result.stderr['marginal']

    # --- balance detallado ---

    def single_site_transitions(self, spec: ChainSpec, steps: int) -> np.ndarray:
        """
        Cuenta de transiciones (estado → estado) de la cadena de un solo espín con sitio
        elegido al azar, sobre todas las réplicas.
        """
        lattice = self.lattice(spec)
        if len(lattice.region) > 12:
            raise DomainError("El conteo de transiciones está limitado a 12 sitios")
        rng = chain_rng(spec.seed, spec.chain_id)
        spins = lattice.initial(self.replicas, rng, "random")
        interior = lattice.interior(spins)
        n_states = 1 << len(lattice.region)
        counts = np.zeros((n_states, n_states), dtype=np.int64)
        cells = np.array([lattice.cell(s) for s in lattice.region]) - lattice.pad
        rows = np.arange(self.replicas)
        for _ in range(steps):
            before = lattice.state_index(spins)
            chosen = cells[rng.integers(0, len(cells), size=self.replicas)]
            field_ = lattice.local_field(spins)[rows, chosen[:, 0], chosen[:, 1]]
            flip = rng.random(self.replicas) < flip_probability(field_, spec.beta, spec.dynamics)
            interior[rows[flip], chosen[flip, 0], chosen[flip, 1]] *= -1
            np.add.at(counts, (before, lattice.state_index(spins)), 1)
        return counts


@dataclass
class _ChainTask:
    config: Dict[str, Any]
    observables: Dict[str, Observable]

    def __call__(self, spec: ChainSpec) -> ChainResult:
        return ChainRunner(self.config).run(spec, self.observables)


def transition_kernel(model: ModelSpec, region: Region, beta: float, bc: BoundaryCondition,
                      dynamics: Dynamics = Dynamics.HEAT_BATH) -> Tuple[np.ndarray, np.ndarray]:
    """
    Núcleo teórico de la dinámica de un solo espín con sitio uniforme y la medida de Gibbs.

    Returns:
        (P, π) con P[i, j] la probabilidad de pasar del estado i al j
    """
    mode = PlaquetteMode.INSIDE if bc.is_free else PlaquetteMode.MEETING
    terms = build_terms(model, region, mode, [bc])
    n = len(region)
    states = np.arange(1 << n, dtype=np.int64)
    log_w = terms.log_weights(states, beta)[:, 0]
    pi = np.exp(log_w - log_w.max())
    pi /= pi.sum()

    kernel = np.zeros((len(states), len(states)))
    for i in range(n):
        target = states ^ (1 << i)
        ratio = np.exp(log_w[target] - log_w)
        move = ratio / (1 + ratio) if dynamics == Dynamics.HEAT_BATH else np.minimum(1.0, ratio)
        kernel[states, target] += move / n
    kernel[states, states] = 1.0 - kernel.sum(axis=1)
    return kernel, pi


def detailed_balance_gap(kernel: np.ndarray, pi: np.ndarray) -> float:
    """max |π_i P_ij − π_j P_ji|."""
    flow = pi[:, None] * kernel
    return float(np.abs(flow - flow.T).max())
