# core/gf2.py
"""Álgebra lineal sobre F2 con vectores como enteros (bitsets)."""
import logging
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from models.errors import CycleCountCapError, NotInSpanError

logger = logging.getLogger(__name__)

_WORD = 64
_WORD_MASK = (1 << _WORD) - 1


def gf2_rank(rows: Sequence[int]) -> int:
    """Rango sobre F2 por eliminación gaussiana."""
    return len(EchelonBasis.from_vectors(rows).pivots)


def gf2_is_in_rowspan(vec: int, rows: Sequence[int]) -> bool:
    residual, _ = EchelonBasis.from_vectors(rows).reduce(vec)
    return residual == 0


class EchelonBasis:
    """
    Base escalonada incremental que recuerda qué vectores originales combina cada fila.

    `combos[k]` tiene el bit i a 1 si el i-ésimo vector añadido interviene en la fila k.
    """

    def __init__(self):
        self.rows: List[int] = []
        self.combos: List[int] = []
        self.pivots: List[int] = []
        self.relations: List[int] = []
        self.count = 0

    @classmethod
    def from_vectors(cls, vectors: Iterable[int]) -> 'EchelonBasis':
        basis = cls()
        for v in vectors:
            basis.add(v)
        return basis

    def reduce(self, vec: int) -> Tuple[int, int]:
        """(residuo, combinación usada); residuo 0 significa que vec está en el span."""
        combo = 0
        for row, c, pivot in zip(self.rows, self.combos, self.pivots):
            if (vec >> pivot) & 1:
                vec ^= row
                combo ^= c
        return vec, combo

    def add(self, vec: int) -> bool:
        """Añade un vector; devuelve False si era dependiente (y registra la relación)."""
        label = 1 << self.count
        self.count += 1
        residual, combo = self.reduce(vec)
        if residual == 0:
            self.relations.append(combo ^ label)
            return False
        pivot = residual.bit_length() - 1
        # Mantener la forma reducida: eliminar el nuevo pivote de las filas existentes
        for k, row in enumerate(self.rows):
            if (row >> pivot) & 1:
                self.rows[k] ^= residual
                self.combos[k] ^= combo ^ label
        self.rows.append(residual)
        self.combos.append(combo ^ label)
        self.pivots.append(pivot)
        return True

    @property
    def rank(self) -> int:
        return len(self.rows)

    def solve(self, vec: int) -> int:
        """Combinación de los vectores añadidos que suma `vec`; NotInSpanError si no existe."""
        residual, combo = self.reduce(vec)
        if residual:
            raise NotInSpanError(f"El vector no está en el span (residuo con {residual.bit_count()} bits)",
                                 residual=residual)
        return combo


def gf2_nullspace(rows: Sequence[int], n_cols: int) -> List[int]:
    """Base de {x : popcount(row ∧ x) par para toda fila}."""
    pivot_rows: List[Tuple[int, int]] = []
    for r in rows:
        for pivot, prow in pivot_rows:
            if (r >> pivot) & 1:
                r ^= prow
        if r == 0:
            continue
        pivot = (r & -r).bit_length() - 1
        pivot_rows = [(p, pr ^ r if (pr >> pivot) & 1 else pr) for p, pr in pivot_rows]
        pivot_rows.append((pivot, r))

    pivots = {p for p, _ in pivot_rows}
    kernel = []
    for free in range(n_cols):
        if free in pivots:
            continue
        x = 1 << free
        for pivot, prow in pivot_rows:
            if (prow >> free) & 1:
                x |= 1 << pivot
        kernel.append(x)
    return kernel


def independent_subset(vectors: Sequence[int]) -> List[int]:
    basis = EchelonBasis()
    return [v for v in vectors if basis.add(v)]


def to_words(vectors: Sequence[int], n_bits: int) -> np.ndarray:
    """Empaqueta enteros en palabras uint64, forma (len, ⌈n_bits/64⌉)."""
    n_words = max(1, (n_bits + _WORD - 1) // _WORD)
    return np.array([[(v >> (_WORD * w)) & _WORD_MASK for w in range(n_words)] for v in vectors],
                    dtype=np.uint64).reshape(len(vectors), n_words)


def span_weight_counts(vectors: Sequence[int], n_bits: int, offset: int = 0,
                       sign_mask: Optional[int] = None, cap: int = 24,
                       low_bits: int = 16) -> np.ndarray:
    """
    Enumerador de pesos de la variedad afín offset + span(vectors).

    Los vectores deben ser independientes. Una tabla con las 2^low combinaciones de los
    primeros vectores se construye por duplicación; las combinaciones de los restantes se
    recorren en código Gray, así que cada paso es un solo XOR.

    Returns:
        counts[s, w]: número de elementos de peso w cuyo signo (paridad de ∧ sign_mask) es s
    """
    k = len(vectors)
    if k > cap:
        raise CycleCountCapError(f"{k} generadores superan el límite de {cap}; "
                                 f"usar un estimador Monte Carlo")
    words = to_words(list(vectors), n_bits)
    n_words = words.shape[1]
    low = min(k, low_bits)

    table = np.zeros((1 << low, n_words), dtype=np.uint64)
    for i in range(low):
        table[1 << i: 2 << i] = table[: 1 << i] ^ words[i]

    current = to_words([offset], n_bits)[0]
    sign_words = to_words([sign_mask or 0], n_bits)[0]
    counts = np.zeros((2, n_bits + 1), dtype=np.int64)
    for g in range(1 << (k - low)):
        if g:
            bit = (g & -g).bit_length() - 1
            current = current ^ words[low + bit]
        block = table ^ current
        weights = np.bitwise_count(block).sum(axis=1, dtype=np.int64)
        if sign_mask:
            signs = np.bitwise_count(block & sign_words).sum(axis=1, dtype=np.int64) & 1
        else:
            signs = np.zeros(len(block), dtype=np.int64)
        flat = np.bincount(signs * (n_bits + 1) + weights, minlength=2 * (n_bits + 1))
        counts += flat.reshape(2, n_bits + 1)
    return counts


def polynomial_sum(counts: np.ndarray, t: float) -> float:
    """Σ_s Σ_w (−1)^s counts[s, w] t^w."""
    powers = np.power(float(t), np.arange(counts.shape[1]))
    return float((counts[0] - counts[1]) @ powers)


def min_weight_in_coset(offset: int, kernel: Sequence[int], n_bits: int, cap: int = 24) -> int:
    """Mínimo |x| sobre x ∈ offset + span(kernel)."""
    counts = span_weight_counts(independent_subset(kernel), n_bits, offset, cap=cap).sum(axis=0)
    return int(np.flatnonzero(counts)[0])
