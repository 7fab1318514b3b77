"""
Graphs endpoints - Evaluación de grafos híbridos y grafo demo.
"""

import logging

from fastapi import APIRouter, Depends

from app.api.v1.schemas.graph import (
    DemoGraphRequest,
    DemoGraphResponse,
    GraphEvalRequest,
    GraphEvalResponse,
)
from app.services.hybrid_service import HybridService, get_hybrid_service

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post(
    "/eval",
    response_model=GraphEvalResponse,
    summary="Evaluar un grafo híbrido",
    description="""
    Evalúa el grafo en orden topológico y retorna la concatenación de sus salidas.

    Con `jacobian=true` agrega el Jacobiano respecto a los parámetros por
    diferencias centrales de paso `fd_step`.

    Un grafo mal formado (ciclos, anchos incompatibles, salida de box dividida)
    responde 400.
    """
)
async def evaluate_graph(
    request: GraphEvalRequest,
    service: HybridService = Depends(get_hybrid_service)
) -> GraphEvalResponse:
    """Evaluar un grafo."""
    outputs = service.evaluate_graph(request.graph, request.inputs, request.params)
    jacobian = None
    if request.jacobian:
        jacobian = service.graph_jacobian(
            request.graph, request.inputs, request.params, request.fd_step
        ).tolist()
    return GraphEvalResponse(outputs=outputs.tolist(), jacobian=jacobian)


@router.post(
    "/demo",
    response_model=DemoGraphResponse,
    summary="Grafo del clasificador",
    description="""
    Grafo del clasificador híbrido para strings de `bits` bits.

    Inputs: x0..x{k-1} e y (label ±1). Outputs: [loss, expectation].
    """
)
async def demo_graph(
    request: DemoGraphRequest,
    service: HybridService = Depends(get_hybrid_service)
) -> DemoGraphResponse:
    graph = service.demo_graph(request.bits, request.layers)
    return DemoGraphResponse(
        bits=request.bits,
        layers=request.layers,
        params=list(graph.params),
        graph=graph
    )
