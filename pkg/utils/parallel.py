# utils/parallel.py
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')


def available_workers() -> int:
    return os.cpu_count() or 1


def ordered_map(func: Callable[[T], R], tasks: Iterable[T], threads: Optional[int] = 1) -> List[R]:
    """
    Aplica `func` a cada tarea, en paralelo si threads > 1.

    El resultado conserva el orden de las tareas, así que la fusión posterior
    no depende del número de procesos. `func` debe ser una función de módulo (picklable).
    """
    tasks = list(tasks)
    workers = min(threads or available_workers(), len(tasks)) if tasks else 1
    if workers <= 1:
        return [func(t) for t in tasks]

    logger.debug(f"Repartiendo {len(tasks)} tareas entre {workers} procesos")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, tasks))
