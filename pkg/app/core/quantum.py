"""
Semántica oráculo: matrices puras, doubling y superoperadores CP.

Este módulo es el ground truth independiente contra el que se verifica la
PTM. Los superoperadores actúan sobre matrices densidad vectorizadas por
columnas (vec), así que el doubling de M es kron(conj(M), M).
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import eigvalsh

from app.core.exceptions import ArityError, ShapeError, UnboundParameterError
from app.core.linalg import CMat, as_cmat, dagger, qubits_from_dim, unvec, vec
from app.core.zx import Gen, Generator, GeneratorKind, Seq, ZxTerm, free_parameters, has_discard

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)
DISCARD_ROW = np.array([[1, 0, 0, 1]], dtype=complex)


# ============================================================================
# Types
# ============================================================================

@dataclass(frozen=True)
class SuperOp:
    """
    Superoperador sobre densidades vectorizadas.

    Attributes:
        n_in: Qubits de entrada
        n_out: Qubits de salida
        mat: Matriz 4^n_out x 4^n_in
    """
    n_in: int
    n_out: int
    mat: CMat

    def __post_init__(self):
        expected = (4 ** self.n_out, 4 ** self.n_in)
        if self.mat.shape != expected:
            raise ShapeError(f"SuperOp {self.n_in}→{self.n_out} requiere shape {expected}, got {self.mat.shape}")

    @classmethod
    def from_matrix(cls, mat: np.ndarray) -> "SuperOp":
        """Infere n_in/n_out desde la shape (potencias de 4)."""
        mat = as_cmat(mat)
        return cls(qubits_from_dim(mat.shape[1], 4), qubits_from_dim(mat.shape[0], 4), mat)

    @classmethod
    def identity(cls, n: int) -> "SuperOp":
        return cls(n, n, np.eye(4 ** n, dtype=complex))


@dataclass(frozen=True)
class KrausMap:
    """
    Mapa CP en forma de Kraus: ρ ↦ Σ_j K_j ρ K_j†.

    Attributes:
        n_in: Qubits de entrada
        n_out: Qubits de salida
        operators: Lista no vacía de matrices 2^n_out x 2^n_in
    """
    n_in: int
    n_out: int
    operators: tuple

    def __post_init__(self):
        if not self.operators:
            raise ShapeError("KrausMap requiere al menos un operador")
        expected = (2 ** self.n_out, 2 ** self.n_in)
        for k in self.operators:
            if np.shape(k) != expected:
                raise ShapeError(f"Operador de Kraus con shape {np.shape(k)}, se esperaba {expected}")

    @classmethod
    def from_operators(cls, operators: Sequence[np.ndarray]) -> "KrausMap":
        ops = tuple(as_cmat(k) for k in operators)
        if not ops:
            raise ShapeError("KrausMap requiere al menos un operador")
        rows, cols = ops[0].shape
        return cls(qubits_from_dim(cols), qubits_from_dim(rows), ops)


# ============================================================================
# Pure semantics
# ============================================================================

def _basis_projector(bit: int, n: int, m: int) -> CMat:
    """|b^m⟩⟨b^n| (b ∈ {0,1})."""
    out = np.zeros((2 ** m, 2 ** n), dtype=complex)
    row = (2 ** m - 1) if bit else 0
    col = (2 ** n - 1) if bit else 0
    out[row, col] = 1.0
    return out


def _hadamard_power(n: int) -> CMat:
    out = np.ones((1, 1), dtype=complex)
    for _ in range(n):
        out = np.kron(out, _H)
    return out


@lru_cache(maxsize=512)
def _generator_matrix(kind: GeneratorKind, n_in: int, n_out: int, alpha: float, value: complex) -> CMat:
    if kind == GeneratorKind.Z:
        out = _basis_projector(0, n_in, n_out) + np.exp(1j * alpha) * _basis_projector(1, n_in, n_out)
    elif kind == GeneratorKind.X:
        z = _basis_projector(0, n_in, n_out) + np.exp(1j * alpha) * _basis_projector(1, n_in, n_out)
        out = _hadamard_power(n_out) @ z @ _hadamard_power(n_in)
    elif kind == GeneratorKind.H:
        out = _H.copy()
    elif kind == GeneratorKind.SWAP:
        out = _SWAP.copy()
    elif kind == GeneratorKind.ID:
        out = np.eye(2, dtype=complex)
    elif kind == GeneratorKind.SCALAR:
        out = np.array([[value]], dtype=complex)
    else:
        raise ArityError("Discard no tiene interpretación pura", path="gen")
    out.setflags(write=False)
    return out


def generator_matrix(g: Generator) -> CMat:
    """
    Matriz pura 2^n_out x 2^n_in de un generador con fase constante.

    Raises:
        UnboundParameterError: Fase con parámetros libres
        ArityError: Discard
    """
    if g.phase.free_parameters:
        raise UnboundParameterError(g.phase.free_parameters)
    return _generator_matrix(g.kind, g.n_in, g.n_out, g.phase.const, g.value)


def interp_pure(t: ZxTerm) -> CMat:
    """
    Interpretación pura de un término sin Discard ni parámetros libres.

    Seq ↦ producto (then · first); Par ↦ Kronecker con `left` más significativo.
    """
    missing = free_parameters(t)
    if missing:
        raise UnboundParameterError(missing)
    if has_discard(t):
        raise ArityError("interp_pure no admite Discard", path="term")
    return _interp_pure(t)


def _interp_pure(t: ZxTerm) -> CMat:
    if isinstance(t, Gen):
        return generator_matrix(t.gen)
    if isinstance(t, Seq):
        return _interp_pure(t.then) @ _interp_pure(t.first)
    return np.kron(_interp_pure(t.left), _interp_pure(t.right))


# ============================================================================
# CPM semantics
# ============================================================================

def double(m: CMat) -> SuperOp:
    """Doubling ρ ↦ MρM†, realizado como kron(conj(M), M) sobre vec(ρ)."""
    m = as_cmat(m)
    n_out = qubits_from_dim(m.shape[0])
    n_in = qubits_from_dim(m.shape[1])
    return SuperOp(n_in, n_out, np.kron(m.conj(), m))


def superop_tensor(a: SuperOp, b: SuperOp) -> SuperOp:
    """
    Producto tensorial de superoperadores en el orden de vec por columnas.

    vec(ρ_A ⊗ ρ_B) indexa (c_A, c_B, r_A, r_B) de más a menos significativo,
    mientras que kron(vec ρ_A, vec ρ_B) indexa (c_A, r_A, c_B, r_B); de ahí el
    reshuffle de ejes. Con él, superop_tensor(double(A), double(B)) = double(A⊗B).
    """
    da_out, da_in = 2 ** a.n_out, 2 ** a.n_in
    db_out, db_in = 2 ** b.n_out, 2 ** b.n_in
    ta = a.mat.reshape(da_out, da_out, da_in, da_in)  # (c', r', c, r)
    tb = b.mat.reshape(db_out, db_out, db_in, db_in)
    out = np.einsum("abcd,efgh->aebfcgdh", ta, tb)
    return SuperOp(
        a.n_in + b.n_in,
        a.n_out + b.n_out,
        out.reshape(4 ** (a.n_out + b.n_out), 4 ** (a.n_in + b.n_in))
    )


def superop_compose(a: SuperOp, b: SuperOp) -> SuperOp:
    """a después de b."""
    if a.n_in != b.n_out:
        raise ShapeError(f"superop_compose: {a.n_in} qubits de entrada vs {b.n_out} de salida")
    return SuperOp(b.n_in, a.n_out, a.mat @ b.mat)


def interp_cpm(t: ZxTerm) -> SuperOp:
    """
    Interpretación CP de un término (con Discard permitido).

    Raises:
        UnboundParameterError: Parámetros libres
    """
    missing = free_parameters(t)
    if missing:
        raise UnboundParameterError(missing)
    return _interp_cpm(t)


def _interp_cpm(t: ZxTerm) -> SuperOp:
    if isinstance(t, Gen):
        if t.gen.kind == GeneratorKind.DISCARD:
            return SuperOp(1, 0, DISCARD_ROW.copy())
        return double(generator_matrix(t.gen))
    if isinstance(t, Seq):
        return superop_compose(_interp_cpm(t.then), _interp_cpm(t.first))
    return superop_tensor(_interp_cpm(t.left), _interp_cpm(t.right))


def kraus_to_superop(k: KrausMap) -> SuperOp:
    """Σ_j kron(conj(K_j), K_j)."""
    mat = sum(np.kron(op.conj(), op) for op in k.operators)
    return SuperOp(k.n_in, k.n_out, np.asarray(mat, dtype=complex))


def apply(s: SuperOp, rho: CMat) -> CMat:
    """unvec(S · vec(ρ))."""
    rho = as_cmat(rho)
    if rho.shape != (2 ** s.n_in, 2 ** s.n_in):
        raise ShapeError(f"apply: rho debe ser {2 ** s.n_in}x{2 ** s.n_in}, got {rho.shape}")
    return unvec(s.mat @ vec(rho), 2 ** s.n_out)


def simulate_density(t: ZxTerm, rho: Optional[CMat] = None) -> CMat:
    """
    Simulación de matriz densidad por el oráculo.

    Términos sin Discard se simulan como MρM† con M = interp_pure(t), lo que
    evita materializar el superoperador (4^n x 4^n) en circuitos de 5 qubits.

    Args:
        t: Término sin parámetros libres
        rho: Densidad de entrada; None para términos 0→m
    """
    if rho is None:
        rho = np.ones((1, 1), dtype=complex)
    rho = as_cmat(rho)
    if rho.shape != (2 ** t.n_in, 2 ** t.n_in):
        raise ShapeError(f"simulate_density: rho debe ser {2 ** t.n_in}x{2 ** t.n_in}, got {rho.shape}")
    if not has_discard(t):
        m = interp_pure(t)
        return m @ rho @ dagger(m)
    return apply(interp_cpm(t), rho)


def is_psd(rho: CMat, tol: float = 1e-10) -> bool:
    """Hermítica con autovalor mínimo >= -tol."""
    rho = as_cmat(rho)
    if not np.allclose(rho, dagger(rho), atol=tol):
        return False
    return bool(eigvalsh(rho).min() >= -tol)

