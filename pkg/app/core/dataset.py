"""
Datasets de strings binarios etiquetados.

- IDX (MNIST): lectura genérica, filtrado a dos dígitos, downsampling por
  promedio de bloques y binarización por umbral
- Sintéticos: reglas single-bit, parity y threshold, deterministas por seed
- CSV: bits y luego label, una muestra por fila
"""

import logging
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.core.exceptions import DatasetError

logger = logging.getLogger(__name__)

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
IDX_UBYTE = 0x08
MAX_SYNTH_BITS = 8

PathLike = Union[str, Path]


class Sample(BaseModel):
    """Una muestra: bits en {0, 1} y label en {-1, +1}."""
    model_config = ConfigDict(frozen=True)

    bits: Tuple[int, ...] = Field(..., min_length=1)
    label: int

    @field_validator("bits")
    @classmethod
    def validate_bits(cls, v):
        if any(b not in (0, 1) for b in v):
            raise ValueError(f"bits deben ser 0 o 1, got {v}")
        return v

    @field_validator("label")
    @classmethod
    def validate_label(cls, v):
        if v not in (-1, 1):
            raise ValueError(f"label debe ser -1 o +1, got {v}")
        return v

    @property
    def k(self) -> int:
        return len(self.bits)


class SynthRule(str, Enum):
    """
    Reglas de etiquetado sintético.

    - single-bit: +1 si bit₀ = 1
    - parity: +1 si la cantidad de unos es par
    - threshold: +1 si al menos la mitad de los bits son 1
    """
    SINGLE_BIT = "single-bit"
    PARITY = "parity"
    THRESHOLD = "threshold"


# ============================================================================
# IDX
# ============================================================================

def read_idx(path: PathLike) -> Tuple[int, np.ndarray]:
    """
    Lee un archivo IDX (big-endian, tipo unsigned byte).

    Returns:
        (magic, array con la shape declarada en el header)

    Raises:
        DatasetError: Header inválido, tipo no soportado o archivo truncado
    """
    data = Path(path).read_bytes()
    if len(data) < 4:
        raise DatasetError(f"{path}: archivo IDX truncado (sin header)")
    if data[0] != 0 or data[1] != 0:
        raise DatasetError(f"{path}: magic inválido {data[:4].hex()}")
    dtype_code, ndim = data[2], data[3]
    if dtype_code != IDX_UBYTE:
        raise DatasetError(f"{path}: tipo IDX 0x{dtype_code:02x} no soportado (solo 0x08)")
    header_size = 4 + 4 * ndim
    if len(data) < header_size:
        raise DatasetError(f"{path}: archivo IDX truncado (dimensiones)")
    dims = tuple(int.from_bytes(data[4 + 4 * i:8 + 4 * i], "big") for i in range(ndim))
    count = int(np.prod(dims)) if dims else 1
    if len(data) < header_size + count:
        raise DatasetError(
            f"{path}: archivo IDX truncado ({len(data) - header_size} de {count} bytes)"
        )
    magic = int.from_bytes(data[:4], "big")
    array = np.frombuffer(data, dtype=np.uint8, count=count, offset=header_size).reshape(dims)
    return magic, array


def downsample(image: np.ndarray, side: int) -> np.ndarray:
    """Promedio por bloques de una imagen h x w a side x side (h, w múltiplos de side)."""
    h, w = image.shape
    if side < 1 or h % side or w % side:
        raise DatasetError(f"imagen {h}x{w} no se puede reducir a {side}x{side}")
    return image.reshape(side, h // side, side, w // side).mean(axis=(1, 3))


def binarize(image: np.ndarray, threshold: float) -> Tuple[int, ...]:
    """Pixel (escalado a [0, 1]) >= threshold → 1, en orden row-major."""
    return tuple(int(x) for x in (image.reshape(-1) / 255.0 >= threshold))


def ingest_idx(
    images_path: PathLike,
    labels_path: PathLike,
    classes: Tuple[int, int] = (3, 6),
    threshold: float = 0.5,
    side: int = 2,
    limit: Optional[int] = None
) -> List[Sample]:
    """
    Convierte un par de archivos IDX (imágenes, labels) en muestras binarias.

    Filtra a los dos dígitos pedidos (el primero → +1, el segundo → -1),
    reduce cada imagen a side x side por promedio de bloques y binariza.

    Raises:
        DatasetError: Magic incorrecto, archivos truncados o clase ausente
    """
    img_magic, images = read_idx(images_path)
    lbl_magic, labels = read_idx(labels_path)
    if img_magic != IDX_IMAGES_MAGIC:
        raise DatasetError(f"{images_path}: magic 0x{img_magic:08x}, se esperaba 0x{IDX_IMAGES_MAGIC:08x}")
    if lbl_magic != IDX_LABELS_MAGIC:
        raise DatasetError(f"{labels_path}: magic 0x{lbl_magic:08x}, se esperaba 0x{IDX_LABELS_MAGIC:08x}")
    if images.shape[0] != labels.shape[0]:
        raise DatasetError(f"{images.shape[0]} imágenes vs {labels.shape[0]} labels")
    if classes[0] == classes[1]:
        raise DatasetError(f"las dos clases deben ser distintas, got {classes}")

    for c in classes:
        if not np.any(labels == c):
            raise DatasetError(f"clase {c} ausente en {labels_path}")

    samples: List[Sample] = []
    for image, digit in zip(images, labels):
        if digit not in classes:
            continue
        bits = binarize(downsample(image.astype(float), side), threshold)
        samples.append(Sample(bits=bits, label=1 if digit == classes[0] else -1))
        if limit is not None and len(samples) >= limit:
            break
    logger.info(
        f"IDX: {len(samples)} muestras de clases {classes} ({side}x{side}, umbral {threshold})"
    )
    return samples


# ============================================================================
# Synthetic
# ============================================================================

def label_for(bits: Sequence[int], rule: SynthRule) -> int:
    rule = SynthRule(rule)
    if rule == SynthRule.SINGLE_BIT:
        return 1 if bits[0] == 1 else -1
    ones = int(sum(bits))
    if rule == SynthRule.PARITY:
        return 1 if ones % 2 == 0 else -1
    return 1 if 2 * ones >= len(bits) else -1


def synth_dataset(k: int, rule: Union[SynthRule, str], n: int, seed: int = 0) -> List[Sample]:
    """
    Dataset sintético determinista.

    Raises:
        DatasetError: k fuera de [1, 8], n < 1 o regla desconocida
    """
    if not 1 <= k <= MAX_SYNTH_BITS:
        raise DatasetError(f"k debe estar en [1, {MAX_SYNTH_BITS}], got {k}")
    if n < 1:
        raise DatasetError(f"n debe ser >= 1, got {n}")
    try:
        rule = SynthRule(rule)
    except ValueError as e:
        raise DatasetError(f"regla desconocida: {rule}") from e
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=(n, k))
    return [Sample(bits=tuple(int(b) for b in row), label=label_for(row, rule)) for row in bits]


# ============================================================================
# CSV
# ============================================================================

def samples_to_array(samples: Sequence[Sample]) -> np.ndarray:
    """Matriz entera n x (k + 1): bits y luego label."""
    if not samples:
        raise DatasetError("dataset vacío")
    k = samples[0].k
    if any(s.k != k for s in samples):
        raise DatasetError("todas las muestras deben tener el mismo número de bits")
    return np.array([list(s.bits) + [s.label] for s in samples], dtype=int)


def write_samples_csv(samples: Sequence[Sample], path) -> None:
    """Escribe las muestras como CSV (header comentado con los nombres de columna)."""
    table = samples_to_array(samples)
    k = table.shape[1] - 1
    header = ",".join([f"b{i}" for i in range(k)] + ["label"])
    np.savetxt(path, table, fmt="%d", delimiter=",", header=header)


def read_samples_csv(path: PathLike) -> List[Sample]:
    """
    Lee un CSV escrito por write_samples_csv.

    Raises:
        DatasetError: Archivo vacío o valores inválidos
    """
    try:
        table = np.loadtxt(path, delimiter=",", dtype=int, ndmin=2)
    except ValueError as e:
        raise DatasetError(f"{path}: CSV inválido ({e})") from e
    if table.size == 0:
        raise DatasetError(f"{path}: dataset vacío")
    try:
        return [Sample(bits=tuple(int(b) for b in row[:-1]), label=int(row[-1])) for row in table]
    except ValueError as e:
        raise DatasetError(f"{path}: muestra inválida ({e})") from e
