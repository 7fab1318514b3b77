"""
Kernel de álgebra lineal densa para matrices complejas y reales.

Convenciones globales (compartidas por todo el paquete):
- Qubit más a la izquierda = factor Kronecker más significativo
- Vectorización por columnas (column stacking): vec(A)[c*d + r] = A[r, c]
- Base de Pauli n-qubit en orden base-4 (0=I, 1=X, 2=Y, 3=Z), dígito más
  significativo = qubit más a la izquierda

Storage denso: a escala de escritorio (~6 qubits) una PTM ocupa 4096 x 4096.
"""

from functools import lru_cache
from typing import Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.exceptions import ShapeError

# Alias documentales: todos son np.ndarray 2D
CMat = np.ndarray
RMat = np.ndarray
RVec = np.ndarray

PAULI_LABELS = "IXYZ"

_I2 = np.eye(2, dtype=complex)
_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)
SINGLE_QUBIT_PAULIS = (_I2, _SX, _SY, _SZ)


def as_cmat(a: Union[np.ndarray, Sequence, complex]) -> CMat:
    """
    Normaliza un input a matriz compleja 2D.

    Escalares → 1x1 (objeto de 0 qubits); vectores 1D → columna.
    """
    m = np.asarray(a, dtype=complex)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    elif m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeError(f"Se esperaba matriz 2D no vacía, got shape {m.shape}")
    return m


def as_rmat(a: Union[np.ndarray, Sequence, float]) -> RMat:
    """Normaliza un input a matriz real 2D (RVec = columna)."""
    m = np.asarray(a, dtype=float)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    elif m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeError(f"Se esperaba matriz 2D no vacía, got shape {m.shape}")
    return m


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Producto de Kronecker; `a` es el factor más significativo."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"kron requiere matrices 2D, got {a.shape} y {b.shape}")
    return np.kron(a, b)


def dagger(a: CMat) -> CMat:
    """Conjugada traspuesta."""
    return np.asarray(a).conj().T


def trace(a: np.ndarray) -> complex:
    """Traza de una matriz cuadrada."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"Traza requiere matriz cuadrada, got {a.shape}")
    return complex(np.trace(a))


def vec(rho: CMat) -> CMat:
    """
    Vectorización por columnas de una matriz cuadrada.

    Example:
        >>> vec(np.array([[a, b], [c, d]]))  # → (a, c, b, d)ᵀ
    """
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ShapeError(f"vec requiere matriz cuadrada, got {rho.shape}")
    return rho.reshape((-1, 1), order="F")


def unvec(v: CMat, dim: int) -> CMat:
    """Inversa de vec: columna de largo dim² → matriz dim x dim."""
    v = np.asarray(v)
    if v.size != dim * dim:
        raise ShapeError(f"unvec: largo {v.size} no es {dim}² = {dim * dim}")
    return v.reshape((dim, dim), order="F")


def qubits_from_dim(dim: int, base: int = 2) -> int:
    """
    Número de qubits n tal que dim == base**n.

    Raises:
        ShapeError: Si dim no es potencia de base
    """
    n = 0
    d = int(dim)
    while d > 1 and d % base == 0:
        d //= base
        n += 1
    if d != 1:
        raise ShapeError(f"Dimensión {dim} no es potencia de {base}")
    return n


class PauliIndex(BaseModel):
    """
    Índice de un operador de Pauli n-qubit en el orden fijo del paquete.

    El índice se decodifica en dígitos base 4 (0=I, 1=X, 2=Y, 3=Z) con el
    qubit de la izquierda como dígito más significativo:
    (n=2) 0=I⊗I, 1=I⊗X, 2=I⊗Y, 3=I⊗Z, 4=X⊗I, ..., 15=Z⊗Z.
    """
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=0, description="Número de qubits")
    idx: int = Field(..., ge=0, description="Índice en [0, 4^n)")

    @model_validator(mode="after")
    def validate_range(self) -> "PauliIndex":
        if self.idx >= 4 ** self.n:
            raise ValueError(f"idx debe estar en [0, {4 ** self.n}), got {self.idx}")
        return self

    @property
    def digits(self) -> Tuple[int, ...]:
        """Dígitos base 4, qubit 0 primero."""
        out = []
        rest = self.idx
        for _ in range(self.n):
            out.append(rest % 4)
            rest //= 4
        return tuple(reversed(out))

    @property
    def label(self) -> str:
        """Etiqueta legible, ej: 'XZ'. El índice de 0 qubits es ''."""
        return "".join(PAULI_LABELS[d] for d in self.digits)


@lru_cache(maxsize=None)
def _pauli_op_cached(n: int, idx: int) -> CMat:
    out = np.ones((1, 1), dtype=complex)
    for d in PauliIndex(n=n, idx=idx).digits:
        out = np.kron(out, SINGLE_QUBIT_PAULIS[d])
    out.setflags(write=False)
    return out


def pauli_op(p: PauliIndex) -> CMat:
    """Matriz 2^n x 2^n del Pauli tensorial en el índice dado (n=0 → [1])."""
    return _pauli_op_cached(p.n, p.idx)


@lru_cache(maxsize=8)
def pauli_basis(n: int) -> np.ndarray:
    """
    Base de Pauli completa como array (4^n, 2^n, 2^n), read-only.

    Se construye por Kronecker de la base de n-1 qubits con la de 1 qubit,
    lo que reproduce el orden de PauliIndex sin decodificar índice por índice.
    """
    if n < 0:
        raise ShapeError(f"n debe ser >= 0, got {n}")
    basis = np.ones((1, 1, 1), dtype=complex)
    single = np.stack(SINGLE_QUBIT_PAULIS)
    for _ in range(n):
        basis = np.einsum("iab,jcd->ijacbd", basis, single).reshape(
            basis.shape[0] * 4, basis.shape[1] * 2, basis.shape[2] * 2
        )
    basis.setflags(write=False)
    return basis


def partial_trace(rho: CMat, keep: Sequence[int], n: int) -> CMat:
    """
    Traza parcial de una matriz densidad de n qubits.

    Args:
        rho: Matriz 2^n x 2^n
        keep: Qubits a conservar (índices desde la izquierda), en el orden de salida
        n: Número total de qubits

    Returns:
        Matriz 2^k x 2^k sobre los qubits conservados
    """
    rho = np.asarray(rho)
    if rho.shape != (2 ** n, 2 ** n):
        raise ShapeError(f"rho debe ser {2 ** n}x{2 ** n}, got {rho.shape}")
    keep = list(keep)
    if len(set(keep)) != len(keep) or any(not 0 <= q < n for q in keep):
        raise ShapeError(f"Qubits a conservar inválidos: {keep}")
    traced = [q for q in range(n) if q not in keep]
    tensor = rho.reshape((2,) * (2 * n))
    # Índices: filas 0..n-1, columnas n..2n-1; se contraen filas y columnas trazadas
    letters = [chr(ord("a") + i) for i in range(2 * n)]
    for q in traced:
        letters[n + q] = letters[q]
    out_letters = [letters[q] for q in keep] + [letters[n + q] for q in keep]
    spec = "".join(letters) + "->" + "".join(out_letters)
    k = len(keep)
    return np.einsum(spec, tensor).reshape(2 ** k, 2 ** k)


def allclose_up_to_phase(a: CMat, b: CMat, tol: float = 1e-10) -> bool:
    """
    Igualdad módulo un escalar complejo no nulo (global scalar factor).

    Se alinea `a` con `b` usando la entrada de mayor módulo de `b`.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        return False
    pivot = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(b[pivot]) < tol:
        return bool(np.allclose(a, 0, atol=tol))
    if abs(a[pivot]) < tol:
        return False
    scale = b[pivot] / a[pivot]
    return bool(np.allclose(a * scale, b, atol=tol))
