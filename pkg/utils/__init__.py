# utils/__init__.py
"""
Utilidades del toolkit: logging, emisores CSV/JSON y reparto de tareas
"""
from utils.helpers import (emit_csv, emit_json, format_value, print_banner, print_section,
                           records_to_frame, setup_logging, summarize, to_json)
from utils.parallel import available_workers, ordered_map


__all__ = ['available_workers', 'emit_csv', 'emit_json', 'format_value', 'ordered_map',
           'print_banner', 'print_section', 'records_to_frame', 'setup_logging', 'summarize',
           'to_json']
