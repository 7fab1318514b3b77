"""
Pydantic schemas para Diagrams API.
"""

from typing import Any, Dict, List

from pydantic import BaseModel, Field


class PtmRequest(BaseModel):
    """Schema para calcular la PTM de un diagrama."""
    diagram: Dict[str, Any] = Field(
        ...,
        description='Contenedor JSON del diagrama: {"version": 1, "term": {...}}'
    )
    bind: Dict[str, float] = Field(
        default_factory=dict,
        description="Valores de los parámetros libres del diagrama"
    )


class PtmResponse(BaseModel):
    """PTM como matriz real (filas en orden de Pauli base 4)."""
    n_in: int
    n_out: int
    shape: List[int]
    trace_preserving: bool = Field(..., description="Primera fila = (1, 0, ..., 0)")
    matrix: List[List[float]]
