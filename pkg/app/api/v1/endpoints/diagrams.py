"""
Diagrams endpoints - PTM de diagramas ZX.

El diagrama llega en el mismo contenedor JSON que usa el CLI; los errores de
formato, aridad o parámetros sin valor son ValueError y el handler global los
responde con 400.
"""

import json
import logging

from fastapi import APIRouter, Depends

from app.api.v1.schemas.diagram import PtmRequest, PtmResponse
from app.core.ptm import is_trace_preserving
from app.services.hybrid_service import HybridService, get_hybrid_service

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post(
    "/ptm",
    response_model=PtmResponse,
    summary="PTM de un diagrama",
    description="""
    Calcula la Pauli transfer matrix de un diagrama ZX doblado.

    **Formato:**
    `{"version": 1, "term": {...}}` con nodos `gen`, `seq` y `par`.

    **Parámetros:**
    Las fases con parámetros libres se evalúan con `bind`.
    """
)
async def compute_ptm(
    request: PtmRequest,
    service: HybridService = Depends(get_hybrid_service)
) -> PtmResponse:
    """Calcular la PTM de un diagrama."""
    ptm = service.compute_ptm(json.dumps(request.diagram), request.bind)
    return PtmResponse(
        n_in=ptm.n_in,
        n_out=ptm.n_out,
        shape=list(ptm.mat.shape),
        trace_preserving=is_trace_preserving(ptm),
        matrix=ptm.mat.tolist()
    )
