"""
Training endpoints - Entrenamiento del clasificador y suite de verificación.

Ambas operaciones son síncronas y CPU-bound; FastAPI las corre en su
threadpool (endpoints `def`).
"""

import logging

from fastapi import APIRouter, Depends, Query

from app.api.v1.schemas.training import CheckResponse, TrainRequest, TrainResponse
from app.services.hybrid_service import HybridService, get_hybrid_service
from app.services.verification_service import VerificationService

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post(
    "/training/run",
    response_model=TrainResponse,
    summary="Entrenar el clasificador",
    description="""
    Descenso de gradiente full-batch con gradientes por diferencias finitas.

    **Dataset:** CSV (`dataset`) > IDX (`idx`) > sintético (`synth`).

    **Retorna:**
    - Métricas por iteración (si `include_history`)
    - θ finales, pérdida y accuracy finales
    """,
    tags=["Training"]
)
def run_training(
    request: TrainRequest,
    service: HybridService = Depends(get_hybrid_service)
) -> TrainResponse:
    """Entrenar el clasificador."""
    config = request.config.with_env_overrides()
    logger.info(f"Training request: seed={config.seed}, iterations={config.iterations}")
    report = service.train(config)

    if report.stopped_early:
        message = (
            f"Accuracy {report.final_accuracy:.1%} alcanzada en "
            f"{report.iterations_run} iteraciones."
        )
    else:
        message = (
            f"{report.iterations_run} iteraciones completadas. "
            f"Accuracy final {report.final_accuracy:.1%}, loss {report.final_loss:.4f}."
        )

    return TrainResponse(
        k=report.k,
        layers=report.layers,
        n_samples=report.n_samples,
        seed=report.seed,
        iterations_run=report.iterations_run,
        stopped_early=report.stopped_early,
        final_loss=report.final_loss,
        final_accuracy=report.final_accuracy,
        params=report.params,
        history=report.history if request.include_history else [],
        message=message
    )


@router.get(
    "/check",
    response_model=CheckResponse,
    summary="Suite de invariantes",
    description="""
    Ejecuta la suite de verificación (matrices de referencia, equivalencia con
    el oráculo, leyes del functor, coherencias μ/ε, física, regla de un wire,
    gradiente y demo contra el oráculo).
    """,
    tags=["Check"]
)
def run_check(
    seed: int = Query(0, description="Seed de los casos aleatorios"),
    corpus_size: int = Query(100, ge=1, le=500, description="Términos aleatorios por check"),
    instances: int = Query(50, ge=1, le=500, description="Instancias de coherencias y corolario")
) -> CheckResponse:
    report = VerificationService(seed=seed, corpus_size=corpus_size, instances=instances).run()
    return CheckResponse(
        passed=report.passed,
        seed=report.seed,
        failed=report.failed,
        checks=report.checks
    )
