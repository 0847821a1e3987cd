# models/errors.py
from typing import Optional


class PlaquetteError(ValueError):
    """Error base del toolkit. `code` es estable y la CLI lo usa en sus mensajes."""

    code = "plaquette-error"

    def __init__(self, message: str, code: Optional[str] = None):
        super().__init__(message)
        if code is not None:
            self.code = code

    def __str__(self) -> str:
        return f"[{self.code}] {super().__str__()}"


class EmptyRegionError(PlaquetteError):
    code = "empty-region"


class EnumerationCapError(PlaquetteError):
    code = "too-large-for-enumeration"


class FreeBoundaryError(PlaquetteError):
    code = "free-needs-inside-or-restricted"


class BoundaryCoverageError(PlaquetteError):
    code = "missing-boundary-site"


class ScreenError(PlaquetteError):
    code = "screen-does-not-cover"


class CycleCountCapError(PlaquetteError):
    code = "too-many-generators"


class DomainError(PlaquetteError):
    code = "out-of-domain"


class ConfigError(PlaquetteError):
    code = "bad-config"


class NotInSpanError(PlaquetteError):
    """El vector no pertenece al span de la base; `residual` es lo que queda tras eliminar."""

    code = "not-in-span"

    def __init__(self, message: str, residual: int = 0):
        super().__init__(message)
        self.residual = residual


class NotRepresentableError(PlaquetteError):
    """A no es suma de plaquetas recortadas distintas; `residual` son los sitios sin cubrir."""

    code = "not-representable"

    def __init__(self, message: str, residual=frozenset()):
        super().__init__(message)
        self.residual = residual
