"""
Pydantic schemas para Graphs API.
"""

from typing import List, Optional

from pydantic import BaseModel, Field

from app.core.hybrid import HybridGraph


class GraphEvalRequest(BaseModel):
    """Schema para evaluar un grafo híbrido."""
    graph: HybridGraph
    inputs: List[float] = Field(default_factory=list, description="Un valor por input del grafo")
    params: List[float] = Field(default_factory=list, description="Un valor por parámetro del grafo")
    jacobian: bool = Field(default=False, description="Si True calcula también el Jacobiano FD")
    fd_step: float = Field(default=1e-4, gt=0, description="Paso h de diferencias centrales")


class GraphEvalResponse(BaseModel):
    outputs: List[float]
    jacobian: Optional[List[List[float]]] = Field(
        None,
        description="Matriz (ancho de salida) x (número de parámetros)"
    )


class DemoGraphRequest(BaseModel):
    """Schema para generar el grafo del clasificador."""
    bits: int = Field(default=4, ge=1, le=8, description="Bits por muestra (k)")
    layers: int = Field(default=1, ge=1, description="Capas de gadgets ZX+XX")


class DemoGraphResponse(BaseModel):
    bits: int
    layers: int
    params: List[str]
    graph: HybridGraph
