"""
Configuración de entrenamiento del clasificador.

Orden de precedencia del dataset: CSV (`dataset`) > IDX (`idx`) > sintético
(`synth`). La variable de entorno HYBRIDZX_SEED (también desde `.env`)
reemplaza el seed del archivo.
"""

import json
import logging
import os
from pathlib import Path
from typing import Optional, Tuple, Union

from dotenv import find_dotenv, load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from app.core.dataset import MAX_SYNTH_BITS, SynthRule
from app.core.exceptions import ConfigError

logger = logging.getLogger(__name__)

SEED_ENV_VAR = "HYBRIDZX_SEED"


class IdxSpec(BaseModel):
    """Ingesta desde archivos IDX (MNIST)."""
    model_config = ConfigDict(extra="forbid")

    images: str = Field(..., description="Archivo IDX de imágenes (magic 0x00000803)")
    labels: str = Field(..., description="Archivo IDX de labels (magic 0x00000801)")
    classes: Tuple[int, int] = Field(
        default=(3, 6),
        description="Dígitos a clasificar: el primero → +1, el segundo → -1"
    )
    threshold: float = Field(default=0.5, description="Umbral de binarización sobre el pixel en [0, 1]")
    side: int = Field(default=2, description="Lado de la imagen reducida (side² bits, a lo más 8)")
    limit: Optional[int] = Field(default=None, description="Máximo de muestras (None = todas)")

    @field_validator('threshold')
    @classmethod
    def validate_threshold(cls, v: float) -> float:
        if not 0 <= v <= 1:
            raise ValueError(f"threshold debe estar entre 0 y 1, got {v}")
        return v

    @field_validator('side')
    @classmethod
    def validate_side(cls, v: int) -> int:
        if v < 1 or v * v > MAX_SYNTH_BITS:
            raise ValueError(f"side² debe estar en [1, {MAX_SYNTH_BITS}], got side={v}")
        return v

    @field_validator('limit')
    @classmethod
    def validate_limit(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v < 1:
            raise ValueError(f"limit debe ser >= 1, got {v}")
        return v


class SynthSpec(BaseModel):
    """Dataset sintético."""
    model_config = ConfigDict(extra="forbid")

    bits: int = Field(default=4, description="Bits por muestra (k)")
    rule: SynthRule = Field(default=SynthRule.SINGLE_BIT, description="Regla de etiquetado")
    n: int = Field(default=32, description="Número de muestras")

    @field_validator('bits')
    @classmethod
    def validate_bits(cls, v: int) -> int:
        if not 1 <= v <= MAX_SYNTH_BITS:
            raise ValueError(f"bits debe estar entre 1 y {MAX_SYNTH_BITS}, got {v}")
        return v

    @field_validator('n')
    @classmethod
    def validate_n(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"n debe ser >= 1, got {v}")
        return v


class TrainConfig(BaseModel):
    """
    Configuración de un entrenamiento full-batch por descenso de gradiente.

    Los gradientes se estiman con diferencias centrales de paso `fd_step`.
    """
    model_config = ConfigDict(extra="forbid")

    seed: int = Field(default=0, description="Seed para θ inicial y dataset sintético")
    learning_rate: float = Field(default=0.05, description="Paso de descenso de gradiente")
    iterations: int = Field(default=500, description="Iteraciones full-batch")
    fd_step: float = Field(default=1e-4, description="Paso h de diferencias centrales")
    layers: int = Field(default=1, description="Capas de gadgets ZX+XX")
    dataset: Optional[str] = Field(default=None, description="CSV de muestras (bits, label)")
    idx: Optional[IdxSpec] = Field(default=None, description="Ingesta IDX")
    synth: SynthSpec = Field(default_factory=SynthSpec, description="Dataset sintético (default)")
    stop_at_accuracy: Optional[float] = Field(
        default=None,
        description="Detener al alcanzar esta accuracy de entrenamiento (None = nunca)"
    )
    log_every: int = Field(default=25, description="Iteraciones entre líneas de log")

    @field_validator('learning_rate', 'fd_step')
    @classmethod
    def validate_positive(cls, v: float, info) -> float:
        if v <= 0:
            raise ValueError(f"{info.field_name} debe ser > 0, got {v}")
        return v

    @field_validator('iterations', 'layers', 'log_every')
    @classmethod
    def validate_at_least_one(cls, v: int, info) -> int:
        if v < 1:
            raise ValueError(f"{info.field_name} debe ser >= 1, got {v}")
        return v

    @field_validator('stop_at_accuracy')
    @classmethod
    def validate_accuracy(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and not 0 < v <= 1:
            raise ValueError(f"stop_at_accuracy debe estar en (0, 1], got {v}")
        return v

    @classmethod
    def from_file(cls, path: Union[str, Path], env: bool = True) -> "TrainConfig":
        """
        Carga la configuración desde JSON.

        Args:
            path: Archivo JSON
            env: Si True aplica HYBRIDZX_SEED (tras cargar `.env`)

        Raises:
            ConfigError: JSON inválido o valores fuera de rango
        """
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: JSON inválido en línea {e.lineno}, columna {e.colno}: {e.msg}") from e
        try:
            config = cls.model_validate(data)
        except ValidationError as e:
            first = e.errors()[0]
            loc = ".".join(str(p) for p in first["loc"])
            raise ConfigError(f"{path}: {loc}: {first['msg']}") from e
        return config.with_env_overrides() if env else config

    def with_env_overrides(self) -> "TrainConfig":
        """
        Aplica HYBRIDZX_SEED si está definida.

        Raises:
            ConfigError: Valor no entero
        """
        load_dotenv(find_dotenv(usecwd=True))
        raw = os.environ.get(SEED_ENV_VAR)
        if raw is None or raw.strip() == "":
            return self
        try:
            seed = int(raw)
        except ValueError as e:
            raise ConfigError(f"{SEED_ENV_VAR} debe ser un entero, got '{raw}'") from e
        logger.info(f"Seed {seed} desde {SEED_ENV_VAR}")
        return self.model_copy(update={"seed": seed})


class QuickTrainConfig(TrainConfig):
    """
    Corrida corta de humo.

    - 2 bits sintéticos, 16 muestras
    - 100 iteraciones
    """
    iterations: int = Field(default=100)
    synth: SynthSpec = Field(default_factory=lambda: SynthSpec(bits=2, n=16))


class AcceptanceTrainConfig(TrainConfig):
    """
    Corrida de aceptación del clasificador.

    - Tarea single-bit, 4 bits, 32 muestras
    - Learning rate 0.1, se detiene al llegar a 90% de accuracy
    """
    learning_rate: float = Field(default=0.1)
    synth: SynthSpec = Field(default_factory=lambda: SynthSpec(bits=4, rule=SynthRule.SINGLE_BIT, n=32))
    stop_at_accuracy: Optional[float] = Field(default=0.9)
