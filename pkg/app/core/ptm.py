"""
Functor G: mapas CP → matrices de transferencia de Pauli (PTM) reales.

Entradas de la PTM de Φ con n_in qubits de entrada:

    M_ij = 2^{-n_in} · tr(σ_i† · Φ(σ_j))

El factor 2^{-n_in} hace que los estados de traza 1 tengan vector de Pauli
con primera componente 1 y que G respete la composición.

Dos caminos de evaluación:
- Denso (ptm_of_term): recursión estructural sobre el término, compone las
  PTMs de cada generador con producto y Kronecker.
- Estructurado (ptm_action / PtmProgram): nunca materializa la PTM completa;
  contrae PTMs de generadores (o bloques fusionados) sobre un tensor con un
  eje de tamaño 4 por wire.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from app.core.exceptions import ImaginaryResidueError, ShapeError, UnboundParameterError
from app.core.linalg import RMat, RVec, as_cmat, as_rmat, pauli_basis, qubits_from_dim
from app.core.quantum import DISCARD_ROW, KrausMap, SuperOp, apply, double, generator_matrix
from app.core.zx import (
    Gen,
    Generator,
    GeneratorKind,
    Phase,
    Seq,
    ZxTerm,
    free_parameters,
    substitute,
)

logger = logging.getLogger(__name__)

IMAG_TOLERANCE = 1e-8


# ============================================================================
# Ptm type
# ============================================================================

@dataclass(frozen=True)
class Ptm:
    """
    Matriz de transferencia de Pauli real 4^n_out x 4^n_in.

    Attributes:
        n_in: Qubits de entrada
        n_out: Qubits de salida
        mat: Matriz real
    """
    n_in: int
    n_out: int
    mat: RMat

    def __post_init__(self):
        expected = (4 ** self.n_out, 4 ** self.n_in)
        if self.mat.shape != expected:
            raise ShapeError(f"Ptm {self.n_in}→{self.n_out} requiere shape {expected}, got {self.mat.shape}")

    @classmethod
    def from_matrix(cls, mat: np.ndarray) -> "Ptm":
        mat = as_rmat(mat)
        return cls(qubits_from_dim(mat.shape[1], 4), qubits_from_dim(mat.shape[0], 4), mat)


def _realify(mat: np.ndarray, tolerance: float = IMAG_TOLERANCE) -> RMat:
    residue = float(np.max(np.abs(mat.imag))) if mat.size else 0.0
    if residue > tolerance:
        raise ImaginaryResidueError(residue, tolerance)
    return np.ascontiguousarray(mat.real)


@lru_cache(maxsize=8)
def _pauli_vec_matrix(n: int) -> np.ndarray:
    """Q_n: columna j = vec(σ_j) (vec por columnas)."""
    basis = pauli_basis(n)
    d = 2 ** n
    q = basis.transpose(0, 2, 1).reshape(4 ** n, d * d).T.copy()
    q.setflags(write=False)
    return q


def superop_to_ptm(s: SuperOp) -> Ptm:
    """
    Cambio de base vec → Pauli: M = 2^{-n_in} · Q_m† · S · Q_n.

    Raises:
        ImaginaryResidueError: Residuo imaginario > 1e-8
    """
    q_in = _pauli_vec_matrix(s.n_in)
    q_out = _pauli_vec_matrix(s.n_out)
    mat = (q_out.conj().T @ s.mat @ q_in) / 2 ** s.n_in
    return Ptm(s.n_in, s.n_out, _realify(mat))


def ptm_direct(phi: Union[KrausMap, SuperOp]) -> Ptm:
    """
    PTM entrada por entrada: M_ij = 2^{-n_in} tr(σ_i† Φ(σ_j)).

    Φ(σ_j) se evalúa con el oráculo (Kraus o superoperador) sobre cada
    Pauli de entrada.
    """
    basis_in = pauli_basis(phi.n_in)
    basis_out = pauli_basis(phi.n_out)
    if isinstance(phi, KrausMap):
        images = sum(
            np.einsum("ab,jbc,dc->jad", k, basis_in, k.conj()) for k in phi.operators
        )
    else:
        images = np.stack([apply(phi, sigma) for sigma in basis_in])
    mat = np.einsum("iab,jab->ij", basis_out.conj(), images) / 2 ** phi.n_in
    return Ptm(phi.n_in, phi.n_out, _realify(mat))


# ============================================================================
# Generators and dense functor
# ============================================================================

@lru_cache(maxsize=4096)
def _generator_ptm(kind: GeneratorKind, n_in: int, n_out: int, alpha: float, value: complex) -> RMat:
    if kind == GeneratorKind.DISCARD:
        s = SuperOp(1, 0, DISCARD_ROW.copy())
    else:
        g = Generator(kind, n_in, n_out, phase=Phase.constant(alpha), value=value)
        s = double(generator_matrix(g))
    mat = superop_to_ptm(s).mat
    mat.setflags(write=False)
    return mat


def generator_ptm(g: Generator, binding: Optional[Mapping[str, float]] = None) -> Ptm:
    """PTM (cacheada) de un generador; la fase se evalúa con `binding`."""
    alpha = g.phase.evaluate(binding or {}) if g.is_spider else 0.0
    return Ptm(g.n_in, g.n_out, _generator_ptm(g.kind, g.n_in, g.n_out, alpha, g.value))


def ptm_apply(p: Ptm, v: np.ndarray) -> np.ndarray:
    """
    M · v (functor H: la matriz como mapa lineal).

    Acepta un vector 1D o una matriz con una columna por muestra.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim == 0 or v.shape[0] != p.mat.shape[1]:
        raise ShapeError(f"ptm_apply: largo {v.shape[0] if v.ndim else 1} vs {p.mat.shape[1]}")
    return p.mat @ v


def ptm_compose(a: Ptm, b: Ptm) -> Ptm:
    """a después de b."""
    if a.n_in != b.n_out:
        raise ShapeError(f"ptm_compose: {a.n_in} qubits de entrada vs {b.n_out} de salida")
    return Ptm(b.n_in, a.n_out, a.mat @ b.mat)


def ptm_tensor(a: Ptm, b: Ptm) -> Ptm:
    """Kronecker con `a` más significativo (el orden de Pauli es base 4)."""
    return Ptm(a.n_in + b.n_in, a.n_out + b.n_out, np.kron(a.mat, b.mat))


def identity_ptm(n: int) -> Ptm:
    return Ptm(n, n, np.eye(4 ** n))


def is_trace_preserving(p: Ptm, tol: float = 1e-10) -> bool:
    """Primera fila = (1, 0, ..., 0)."""
    expected = np.zeros(p.mat.shape[1])
    expected[0] = 1.0
    return bool(np.allclose(p.mat[0], expected, atol=tol))


def ptm_of_term(t: ZxTerm, binding: Optional[Mapping[str, float]] = None) -> Ptm:
    """
    Imagen del término bajo ⟦·⟧;G, calculada compositivamente.

    Pensado para términos de escritorio (≤ 4 qubits en cada interfaz); para
    circuitos más anchos usar ptm_action.

    Raises:
        UnboundParameterError: Quedan parámetros libres tras el binding
    """
    if binding:
        t = substitute(t, binding)
    missing = free_parameters(t)
    if missing:
        raise UnboundParameterError(missing)
    return _ptm_of_term(t)


def _ptm_of_term(t: ZxTerm) -> Ptm:
    if isinstance(t, Gen):
        return generator_ptm(t.gen)
    if isinstance(t, Seq):
        return ptm_compose(_ptm_of_term(t.then), _ptm_of_term(t.first))
    return ptm_tensor(_ptm_of_term(t.left), _ptm_of_term(t.right))


def pauli_vector(rho: np.ndarray) -> RVec:
    """v_i = tr(σ_i ρ); para ρ de traza 1 la primera componente es 1."""
    rho = as_cmat(rho)
    n = qubits_from_dim(rho.shape[0])
    v = np.einsum("iab,ba->i", pauli_basis(n), rho)
    return _realify(v)


def density_from_pauli(v: np.ndarray) -> np.ndarray:
    """Inversa de pauli_vector: ρ = 2^{-n} Σ v_i σ_i."""
    v = np.asarray(v, dtype=float).reshape(-1)
    n = qubits_from_dim(v.size, 4)
    return np.einsum("i,iab->ab", v, pauli_basis(n)) / 2 ** n


# ============================================================================
# Structured evaluation
# ============================================================================

_BATCH = -1


@dataclass(frozen=True)
class _Op:
    """Un generador conectado a wires lógicos."""
    gen: Generator
    inputs: Tuple[int, ...]
    outputs: Tuple[int, ...]


@dataclass
class _Block:
    """Secuencia contigua de ops fusionada en un solo mapa sobre pocos wires."""
    ops: List[_Op]
    inputs: Tuple[int, ...]
    outputs: Tuple[int, ...]
    cache: Dict[Tuple[float, ...], RMat] = field(default_factory=dict)

    def matrix(self, binding: Mapping[str, float]) -> RMat:
        key = tuple(op.gen.phase.evaluate(binding) for op in self.ops if op.gen.phase.coeffs)
        cached = self.cache.get(key)
        if cached is not None:
            return cached
        d = 4 ** len(self.inputs)
        state = np.eye(d).reshape((4,) * len(self.inputs) + (d,))
        live = list(self.inputs) + [_BATCH]
        live, state = _contract(self.ops, live, state, binding)
        mat = _finalize(live, state, self.outputs)
        if len(self.cache) >= 256:
            self.cache.clear()
        self.cache[key] = mat
        return mat


def _op_matrix(op: Union[_Op, _Block], binding: Mapping[str, float]) -> RMat:
    if isinstance(op, _Block):
        return op.matrix(binding)
    return generator_ptm(op.gen, binding).mat


def _contract(
    ops: Sequence[Union[_Op, _Block]],
    live: List[int],
    state: np.ndarray,
    binding: Mapping[str, float]
) -> Tuple[List[int], np.ndarray]:
    """Aplica cada op contrayendo su PTM contra los ejes de sus wires de entrada."""
    for op in ops:
        k_in = len(op.inputs)
        k_out = len(op.outputs)
        g = _op_matrix(op, binding).reshape((4,) * k_out + (4,) * k_in)
        positions = [live.index(w) for w in op.inputs]
        state = np.tensordot(g, state, axes=(list(range(k_out, k_out + k_in)), positions))
        consumed = set(op.inputs)
        live = list(op.outputs) + [w for w in live if w not in consumed]
    return live, state


def _finalize(live: List[int], state: np.ndarray, outputs: Sequence[int]) -> RMat:
    order = [live.index(w) for w in outputs] + [live.index(_BATCH)]
    batch = state.shape[live.index(_BATCH)]
    return np.ascontiguousarray(state.transpose(order)).reshape(4 ** len(outputs), batch)


class PtmProgram:
    """
    Forma compilada de un término para ptm_action.

    La compilación asigna un id a cada wire lógico: Id no genera op, Swap es un
    reetiquetado y los Scalar se acumulan en un factor |c|². Luego fusiona ops
    contiguas en bloques mientras el bloque toque a lo más `max_block_inputs`
    wires externos y mantenga a lo más `max_block_live` wires abiertos; cada
    bloque cachea su matriz por valores de fase.

    Example:
        >>> program = PtmProgram(build_cnot())
        >>> program.run(np.eye(16))  # PTM completa del CNOT
    """

    def __init__(self, term: ZxTerm, max_block_inputs: int = 3, max_block_live: int = 4):
        self.n_in = term.n_in
        self.n_out = term.n_out
        self.free_parameters = free_parameters(term)
        self._next_id = 0
        self._scale = 1.0
        self.inputs = tuple(self._fresh(self.n_in))
        ops: List[_Op] = []
        self.outputs = tuple(self._compile(term, list(self.inputs), ops))
        self.ops = self._fuse(ops, max_block_inputs, max_block_live)
        logger.debug(
            f"PtmProgram {self.n_in}→{self.n_out}: {len(ops)} generadores en {len(self.ops)} ops"
        )

    def _fresh(self, count: int) -> List[int]:
        ids = list(range(self._next_id, self._next_id + count))
        self._next_id += count
        return ids

    def _compile(self, t: ZxTerm, wires: List[int], ops: List[_Op]) -> List[int]:
        if isinstance(t, Seq):
            return self._compile(t.then, self._compile(t.first, wires, ops), ops)
        if not isinstance(t, Gen):
            split = t.left.n_in
            return (
                self._compile(t.left, wires[:split], ops)
                + self._compile(t.right, wires[split:], ops)
            )
        g = t.gen
        if g.kind == GeneratorKind.ID:
            return wires
        if g.kind == GeneratorKind.SWAP:
            return [wires[1], wires[0]]
        if g.kind == GeneratorKind.SCALAR:
            self._scale *= abs(g.value) ** 2
            return []
        outputs = self._fresh(g.n_out)
        ops.append(_Op(g, tuple(wires), tuple(outputs)))
        return outputs

    @staticmethod
    def _fuse(ops: List[_Op], max_inputs: int, max_live: int) -> List[Union[_Op, _Block]]:
        fused: List[Union[_Op, _Block]] = []
        current: List[_Op] = []
        inputs: List[int] = []
        produced: List[int] = []
        open_wires: List[int] = []

        def flush():
            if len(current) == 1:
                fused.append(current[0])
            elif current:
                outputs = tuple(w for w in produced if w in open_wires)
                fused.append(_Block(list(current), tuple(inputs), outputs))

        for op in ops:
            external = [w for w in op.inputs if w not in produced]
            new_open = open_wires + external
            after = [w for w in new_open if w not in op.inputs] + list(op.outputs)
            fits = (
                len(inputs) + len(external) <= max_inputs
                and len(new_open) <= max_live
                and len(after) <= max_live
            )
            if current and not fits:
                flush()
                current, inputs, produced, open_wires = [], [], [], []
                external = list(op.inputs)
                after = list(op.outputs)
            current.append(op)
            inputs.extend(external)
            produced.extend(op.outputs)
            open_wires = after
        flush()
        return fused

    def run(self, v: np.ndarray, binding: Optional[Mapping[str, float]] = None) -> np.ndarray:
        """
        Aplica la PTM del término a v (vector 4^n_in o matriz 4^n_in x batch).

        Raises:
            UnboundParameterError: Falta binding para algún parámetro
            ShapeError: Largo de v incompatible
        """
        binding = binding or {}
        missing = self.free_parameters.difference(binding)
        if missing:
            raise UnboundParameterError(missing)
        v = np.asarray(v, dtype=float)
        if v.ndim not in (1, 2) or v.shape[0] != 4 ** self.n_in:
            raise ShapeError(f"ptm_action: se esperaba largo {4 ** self.n_in}, got {v.shape}")
        batch = 1 if v.ndim == 1 else v.shape[1]
        state = v.reshape((4,) * self.n_in + (batch,))
        live = list(self.inputs) + [_BATCH]
        live, state = _contract(self.ops, live, state, binding)
        out = _finalize(live, state, self.outputs) * self._scale
        return out.reshape(-1) if v.ndim == 1 else out


def ptm_action(t: ZxTerm, v: np.ndarray, binding: Optional[Mapping[str, float]] = None) -> np.ndarray:
    """Equivale a ptm_apply(ptm_of_term(t, binding), v) sin materializar la PTM."""
    return PtmProgram(t).run(v, binding)
