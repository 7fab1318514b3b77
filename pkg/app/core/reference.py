"""
Matrices de referencia en forma cerrada.

PTMs y vectores de Pauli de los ejemplos canónicos (estados de fase, R_Z,
R_X, Hadamard, CNOT). Los usan la suite de verificación y los tests como
valores esperados independientes del functor.
"""

import numpy as np

from app.core.linalg import CMat, RMat, RVec


def z_state_vector(alpha: float) -> RVec:
    """Vector de Pauli de (|0⟩ + e^{iα}|1⟩)/√2."""
    return np.array([1.0, np.cos(alpha), np.sin(alpha), 0.0])


def x_state_vector(alpha: float) -> RVec:
    """Vector de Pauli de (|+⟩ + e^{iα}|−⟩)/√2."""
    return np.array([1.0, 0.0, -np.sin(alpha), np.cos(alpha)])


def rz_ptm(alpha: float) -> RMat:
    c, s = np.cos(alpha), np.sin(alpha)
    return np.array([
        [1, 0, 0, 0],
        [0, c, -s, 0],
        [0, s, c, 0],
        [0, 0, 0, 1],
    ], dtype=float)


def rx_ptm(alpha: float) -> RMat:
    c, s = np.cos(alpha), np.sin(alpha)
    return np.array([
        [1, 0, 0, 0],
        [0, 1, 0, 0],
        [0, 0, c, -s],
        [0, 0, s, c],
    ], dtype=float)


def hadamard_ptm() -> RMat:
    return np.array([
        [1, 0, 0, 0],
        [0, 0, 0, 1],
        [0, 0, -1, 0],
        [0, 1, 0, 0],
    ], dtype=float)


def cnot_unitary() -> CMat:
    """CNOT con control en el qubit de la izquierda."""
    return np.array([
        [1, 0, 0, 0],
        [0, 1, 0, 0],
        [0, 0, 0, 1],
        [0, 0, 1, 0],
    ], dtype=complex)


def cnot_ptm() -> RMat:
    """
    PTM 16x16 del CNOT como matriz de bloques 2x2.

    Las filas de bloque agrupan (II,IX), (IY,IZ), (XI,XX), (XY,XZ), (YI,YX),
    (YY,YZ), (ZI,ZX), (ZY,ZZ). Bloques no nulos: I, σ_x e iσ_y = [[0,1],[-1,0]].
    """
    eye = np.eye(2)
    sx = np.array([[0, 1], [1, 0]], dtype=float)
    isy = np.array([[0, 1], [-1, 0]], dtype=float)
    blocks = {
        (0, 0): eye,
        (1, 7): eye,
        (2, 2): sx,
        (3, 5): isy,
        (4, 4): sx,
        (5, 3): -isy,
        (6, 6): eye,
        (7, 1): eye,
    }
    out = np.zeros((16, 16))
    for (r, c), block in blocks.items():
        out[2 * r:2 * r + 2, 2 * c:2 * c + 2] = block
    return out
