"""
Errores de dominio de hybridzx.

Toda la jerarquía hereda de ValueError: los handlers de la API y el CLI
tratan cualquier ValueError como error de input (400 / exit code 2).
"""

from typing import Iterable, Optional


class HybridZXError(ValueError):
    """Base de todos los errores de dominio."""


class ShapeError(HybridZXError):
    """Dimensiones incompatibles (matrices, vectores, superoperadores)."""


class ArityError(HybridZXError):
    """
    Interfaz incompatible dentro de un término ZX.

    Attributes:
        path: Ruta del subtérmino que falla (ej: "term.seq[1].par[0]")
    """

    def __init__(self, message: str, path: str = "term"):
        super().__init__(f"{path}: {message}")
        self.message = message
        self.path = path


class DiagramSyntaxError(HybridZXError):
    """
    Error de sintaxis en un archivo de diagrama o grafo.

    Attributes:
        line: Línea (1-based) si se conoce
        column: Columna (1-based) si se conoce
        path: Ruta dentro del JSON si se conoce
    """

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
        path: Optional[str] = None
    ):
        location = ""
        if line is not None:
            location = f"line {line}, column {column}: "
        elif path:
            location = f"{path}: "
        super().__init__(f"{location}{message}")
        self.line = line
        self.column = column
        self.path = path


class UnboundParameterError(HybridZXError):
    """Quedan parámetros libres donde se necesita un término constante."""

    def __init__(self, names: Iterable[str]):
        self.names = tuple(sorted(names))
        super().__init__(f"Parámetros sin binding: {', '.join(self.names)}")


class ImaginaryResidueError(HybridZXError):
    """
    Residuo imaginario no despreciable al calcular una PTM.

    Indica un mapa que no preserva hermiticidad (input corrupto o bug de
    convenciones), no error de redondeo.
    """

    def __init__(self, residue: float, tolerance: float):
        super().__init__(
            f"Residuo imaginario {residue:.3e} excede tolerancia {tolerance:.1e}"
        )
        self.residue = residue


class GraphError(HybridZXError):
    """Grafo híbrido mal formado (ciclos, anchos, referencias)."""


class OneWireOutError(GraphError):
    """La salida de un functor box se divide en más de un cable."""


class DatasetError(HybridZXError):
    """Archivo IDX inválido, dataset vacío o clase ausente."""


class ConfigError(HybridZXError):
    """Configuración de entrenamiento inválida."""
