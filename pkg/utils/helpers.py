import json
import logging
import math
import sys
from datetime import datetime
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional

import numpy as np
import pandas as pd


def setup_logging(level: str = "INFO", log_file: Optional[str] = None) -> logging.Logger:
    """Configura el sistema de logging."""
    log_format = '%(asctime)s [%(levelname)s] %(name)s: %(message)s'
    log_level = getattr(logging, str(level).upper(), logging.INFO)

    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(level=log_level, format=log_format, handlers=handlers, force=True)
    return logging.getLogger("plaquettes")


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, Enum):
        return value.value
    return value


def to_json(data: Any) -> str:
    """JSON estable (claves ordenadas) con los números a precisión completa."""
    return json.dumps(_jsonable(data), indent=2, sort_keys=True)


def records_to_frame(records: Iterable[Any], columns: Optional[List[str]] = None) -> pd.DataFrame:
    rows = [r.to_dict() if hasattr(r, 'to_dict') else dict(r) for r in records]
    frame = pd.DataFrame(rows)
    if columns is not None:
        frame = frame.reindex(columns=columns)
    return frame


def emit_csv(frame: pd.DataFrame, path: Optional[str] = None) -> str:
    """Escribe el DataFrame como CSV (cabecera y orden de columnas estables)."""
    text = frame.to_csv(index=False, float_format='%.17g', lineterminator='\n')
    if path:
        with open(path, 'w') as f:
            f.write(text)
    return text


def emit_json(data: Any, path: Optional[str] = None) -> str:
    text = to_json(data)
    if path:
        with open(path, 'w') as f:
            f.write(text + "\n")
    return text


def format_value(value: float) -> str:
    """Número con precisión completa."""
    return repr(float(value))


def print_banner(title: str, width: int = 70):
    """Imprime un banner con un título"""
    print("\n" + "=" * width, file=sys.stderr)
    print(f"{title} - {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}", file=sys.stderr)
    print("=" * width, file=sys.stderr)


def print_section(title: str):
    """Imprime un encabezado de sección"""
    print(f"\n{'-' * 10} {title} {'-' * 10}", file=sys.stderr)


def summarize(checks: List[Dict[str, Any]]) -> Dict[str, Any]:
    failed = [c['name'] for c in checks if not c.get('ok')]
    return {'total': len(checks), 'passed': len(checks) - len(failed), 'failed': failed}
