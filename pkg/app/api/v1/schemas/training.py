"""
Pydantic schemas para Training y Check API.
"""

from typing import List

from pydantic import BaseModel, Field

from app.core.classifier import IterationMetrics
from app.core.config import TrainConfig
from app.services.verification_service import CheckResult


class TrainRequest(BaseModel):
    """
    Schema para entrenar el clasificador.

    Mismos campos que el archivo de configuración del CLI.
    """
    config: TrainConfig = Field(default_factory=TrainConfig)
    include_history: bool = Field(default=True, description="Incluir métricas por iteración")


class TrainResponse(BaseModel):
    k: int
    layers: int
    n_samples: int
    seed: int
    iterations_run: int
    stopped_early: bool
    final_loss: float
    final_accuracy: float
    params: dict
    history: List[IterationMetrics] = Field(default_factory=list)
    message: str


class CheckResponse(BaseModel):
    passed: bool
    seed: int
    failed: List[str]
    checks: List[CheckResult]
