"""
Grafo híbrido cuántico-clásico.

Un HybridGraph es un DAG con cuatro tipos de nodo:
- smooth: primitiva clásica suave (Const, Linear, Add, Mul, Sin, Cos, Scale,
  Proj, Concat, Copy) aplicada a la concatenación de sus argumentos
- box: functor box cuántico; recibe vectores de Pauli de sus wires de estado
  (fusionados con μ) y escalares de parámetro, y entrega UN solo wire de
  ancho 4^m
- mu: coherencia μ (Kronecker de vectores de Pauli 4^n, 4^m → 4^{n+m})
- epsilon: coherencia ε, el vector (1)

Todos los wires de entrada y de parámetro del grafo son escalares (ancho 1).
"""

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from graphlib import CycleError, TopologicalSorter
from typing import Any, Dict, List, Optional, Sequence, Set, Tuple, Union

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PrivateAttr,
    ValidationError,
    field_serializer,
    field_validator,
    model_validator,
)

from app.core.exceptions import DiagramSyntaxError, GraphError, OneWireOutError, ShapeError
from app.core.linalg import qubits_from_dim
from app.core.ptm import Ptm, PtmProgram, ptm_apply, ptm_of_term
from app.core.serialization import FORMAT_VERSION, term_from_dict, term_to_dict
from app.core.zx import Gen, Par, Seq, ZxTerm, free_parameters

logger = logging.getLogger(__name__)

DISCARD_PTM_ROW = np.array([1.0, 0.0, 0.0, 0.0])
PROB0_PTM_ROW = np.array([0.5, 0.0, 0.0, 0.5])


# ============================================================================
# Coherence maps and readout
# ============================================================================

def epsilon() -> np.ndarray:
    """ε: el vector (1) de ancho 4^0."""
    return np.ones(1)


def mu(v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """
    μ: Kronecker de vectores de Pauli, `v` más significativo.

    Raises:
        ShapeError: Algún ancho no es potencia de 4
    """
    v = np.asarray(v, dtype=float).reshape(-1)
    w = np.asarray(w, dtype=float).reshape(-1)
    qubits_from_dim(v.size, 4)
    qubits_from_dim(w.size, 4)
    return np.kron(v, w)


def mu_fold(states: Sequence[np.ndarray]) -> np.ndarray:
    """μ aplicado de izquierda a derecha; lista vacía → ε."""
    out = epsilon()
    for s in states:
        out = mu(out, s)
    return out


def prob0_readout(m_qubits: int, which: int) -> Ptm:
    """
    Efecto 1 x 4^m: ρ ↦ ⟨0|tr_otros(ρ)|0⟩.

    Producto Kronecker de filas de discard (1,0,0,0) y la fila ½(1,0,0,1) en
    el qubit leído.
    """
    if not 0 <= which < m_qubits:
        raise ShapeError(f"readout fuera de rango: {which} no está en [0, {m_qubits})")
    row = np.ones(1)
    for q in range(m_qubits):
        row = np.kron(row, PROB0_PTM_ROW if q == which else DISCARD_PTM_ROW)
    return Ptm(m_qubits, 0, row.reshape(1, -1))


def expectation_from_prob(p: float, tol: float = 1e-9) -> float:
    """
    2p - 1.

    Raises:
        ValueError: p fuera de [-tol, 1 + tol]
    """
    p = float(p)
    if not -tol <= p <= 1 + tol:
        raise ValueError(f"probabilidad debe estar en [0, 1], got {p}")
    return 2 * p - 1


def bit_encoder(x: float) -> np.ndarray:
    """Vector de Pauli del X-spider con fase πx: (1, 0, -sin πx, cos πx)."""
    return np.array([1.0, 0.0, -np.sin(np.pi * x), np.cos(np.pi * x)])


def squared_loss(y: float, e: float) -> float:
    return (float(y) - float(e)) ** 2


# ============================================================================
# Smooth primitives
# ============================================================================

class PrimKind(str, Enum):
    CONST = "Const"
    LINEAR = "Linear"
    ADD = "Add"
    MUL = "Mul"
    SQUARED_LOSS = "SquaredLoss"
    SIN = "Sin"
    COS = "Cos"
    SCALE = "Scale"
    PROJ = "Proj"
    CONCAT = "Concat"
    COPY = "Copy"


class SmoothPrim(BaseModel):
    """
    Primitiva suave; su input es la concatenación de los argumentos del nodo.

    Add, Mul y SquaredLoss parten el input en dos mitades y operan elemento a
    elemento (SquaredLoss: (y - e)² con y en la primera mitad).
    """
    model_config = ConfigDict(extra="forbid")

    kind: PrimKind
    value: Optional[List[float]] = Field(default=None, description="Const: vector constante")
    matrix: Optional[List[List[float]]] = Field(default=None, description="Linear: matriz (filas)")
    c: Optional[float] = Field(default=None, description="Scale: factor")
    start: Optional[int] = Field(default=None, ge=0, description="Proj: inicio (inclusive)")
    stop: Optional[int] = Field(default=None, ge=0, description="Proj: fin (exclusive)")

    _array: Optional[np.ndarray] = PrivateAttr(default=None)

    @model_validator(mode="after")
    def validate_fields(self) -> "SmoothPrim":
        if self.kind == PrimKind.CONST and self.value is None:
            raise ValueError("Const requiere 'value'")
        if self.kind == PrimKind.LINEAR:
            if not self.matrix or not self.matrix[0]:
                raise ValueError("Linear requiere 'matrix' no vacía")
            if len({len(row) for row in self.matrix}) != 1:
                raise ValueError("Linear: filas de largo distinto")
        if self.kind == PrimKind.SCALE and self.c is None:
            raise ValueError("Scale requiere 'c'")
        if self.kind == PrimKind.PROJ:
            if self.start is None or self.stop is None:
                raise ValueError("Proj requiere 'start' y 'stop'")
            if self.stop < self.start:
                raise ValueError(f"Proj: stop debe ser >= start, got [{self.start}, {self.stop})")
        return self

    def model_post_init(self, __context: Any) -> None:
        if self.kind == PrimKind.CONST:
            self._array = np.asarray(self.value, dtype=float)
        elif self.kind == PrimKind.LINEAR:
            self._array = np.asarray(self.matrix, dtype=float)

    # Constructores
    @classmethod
    def const(cls, value: Sequence[float]) -> "SmoothPrim":
        return cls(kind=PrimKind.CONST, value=[float(x) for x in np.ravel(value)])

    @classmethod
    def linear(cls, matrix: np.ndarray) -> "SmoothPrim":
        return cls(kind=PrimKind.LINEAR, matrix=np.atleast_2d(np.asarray(matrix, dtype=float)).tolist())

    @classmethod
    def scale(cls, c: float) -> "SmoothPrim":
        return cls(kind=PrimKind.SCALE, c=float(c))

    @classmethod
    def proj(cls, start: int, stop: int) -> "SmoothPrim":
        return cls(kind=PrimKind.PROJ, start=start, stop=stop)

    @classmethod
    def of(cls, kind: Union[PrimKind, str]) -> "SmoothPrim":
        """Primitivas sin campos (Add, Mul, SquaredLoss, Sin, Cos, Concat, Copy)."""
        return cls(kind=PrimKind(kind))

    def out_width(self, in_width: int) -> int:
        """
        Ancho de salida para un ancho de entrada dado.

        Raises:
            GraphError: Ancho de entrada incompatible
        """
        k = self.kind
        if k == PrimKind.CONST:
            if in_width != 0:
                raise GraphError(f"Const no recibe argumentos, got ancho {in_width}")
            return len(self.value)
        if k == PrimKind.LINEAR:
            rows, cols = self._array.shape
            if in_width != cols:
                raise GraphError(f"Linear {rows}x{cols} recibe ancho {in_width}")
            return rows
        if k in (PrimKind.ADD, PrimKind.MUL, PrimKind.SQUARED_LOSS):
            if in_width == 0 or in_width % 2:
                raise GraphError(f"{k.value} requiere ancho par > 0, got {in_width}")
            return in_width // 2
        if k == PrimKind.PROJ:
            if self.stop > in_width:
                raise GraphError(f"Proj [{self.start}, {self.stop}) fuera de ancho {in_width}")
            return self.stop - self.start
        if k == PrimKind.COPY:
            return 2 * in_width
        return in_width

    def apply(self, x: np.ndarray) -> np.ndarray:
        k = self.kind
        if k == PrimKind.CONST:
            return self._array.copy()
        if k == PrimKind.LINEAR:
            return self._array @ x
        if k in (PrimKind.ADD, PrimKind.MUL):
            half = x.size // 2
            return x[:half] + x[half:] if k == PrimKind.ADD else x[:half] * x[half:]
        if k == PrimKind.SQUARED_LOSS:
            half = x.size // 2
            return np.array([squared_loss(y, e) for y, e in zip(x[:half], x[half:])])
        if k == PrimKind.SIN:
            return np.sin(x)
        if k == PrimKind.COS:
            return np.cos(x)
        if k == PrimKind.SCALE:
            return self.c * x
        if k == PrimKind.PROJ:
            return x[self.start:self.stop].copy()
        if k == PrimKind.COPY:
            return np.concatenate([x, x])
        return x.copy()


# ============================================================================
# Quantum boxes
# ============================================================================

class QuantumBox(BaseModel):
    """
    Functor box: un término ZX visto desde el lado clásico.

    Attributes:
        term: Término con aridad (Σ state_qubits, out_qubits)
        param_wires: Nombres de parámetros del término, en el orden de los
            wires escalares que los alimentan
        state_qubits: Qubits n_i de cada wire de estado (ancho 4^{n_i})
        out_qubits: Qubits m de salida; el único wire de salida tiene ancho 4^m
    """
    model_config = ConfigDict(extra="forbid", arbitrary_types_allowed=True)

    term: Any = Field(..., description="Término ZX (objeto o forma JSON)")
    param_wires: List[str] = Field(default_factory=list)
    state_qubits: List[int] = Field(default_factory=list)
    out_qubits: int = Field(..., ge=0)

    _program: Optional[PtmProgram] = PrivateAttr(default=None)

    @field_validator("term", mode="before")
    @classmethod
    def parse_term(cls, v):
        if isinstance(v, dict):
            return term_from_dict(v)
        if not isinstance(v, (Gen, Seq, Par)):
            raise ValueError(f"term debe ser un término ZX, got {type(v).__name__}")
        return v

    @field_validator("state_qubits")
    @classmethod
    def validate_state_qubits(cls, v):
        if any(n < 0 for n in v):
            raise ValueError(f"state_qubits debe ser >= 0, got {v}")
        return v

    @field_serializer("term")
    def serialize_term(self, term: ZxTerm) -> Dict[str, Any]:
        return term_to_dict(term)

    @model_validator(mode="after")
    def validate_arity(self) -> "QuantumBox":
        if self.term.n_in != sum(self.state_qubits):
            raise ValueError(
                f"term tiene {self.term.n_in} wires de entrada, state_qubits suma {sum(self.state_qubits)}"
            )
        if self.term.n_out != self.out_qubits:
            raise ValueError(f"term tiene {self.term.n_out} wires de salida, out_qubits={self.out_qubits}")
        if len(set(self.param_wires)) != len(self.param_wires):
            raise ValueError(f"param_wires duplicados: {self.param_wires}")
        unbound = free_parameters(self.term).difference(self.param_wires)
        if unbound:
            raise ValueError(f"parámetros del término sin wire: {sorted(unbound)}")
        return self

    @property
    def out_width(self) -> int:
        return 4 ** self.out_qubits

    @property
    def state_widths(self) -> List[int]:
        return [4 ** n for n in self.state_qubits]

    @property
    def program(self) -> PtmProgram:
        if self._program is None:
            self._program = PtmProgram(self.term)
        return self._program


def eval_box(
    b: QuantumBox,
    params: Sequence[float],
    states: Sequence[np.ndarray],
    dense: bool = False
) -> np.ndarray:
    """
    Evalúa un box: bind de parámetros, μ-fold de los estados y acción de la PTM.

    Args:
        b: Box
        params: Un valor por param_wire
        states: Vectores de Pauli, uno por state wire
        dense: Si True materializa ptm_of_term (solo términos pequeños)
    """
    params = np.asarray(params, dtype=float).reshape(-1)
    if params.size != len(b.param_wires):
        raise ShapeError(f"box espera {len(b.param_wires)} parámetros, got {params.size}")
    if len(states) != len(b.state_qubits):
        raise ShapeError(f"box espera {len(b.state_qubits)} estados, got {len(states)}")
    for i, (s, w) in enumerate(zip(states, b.state_widths)):
        if np.size(s) != w:
            raise ShapeError(f"estado {i}: ancho {np.size(s)}, se esperaba {w}")
    binding = dict(zip(b.param_wires, params.tolist()))
    v = mu_fold(states)
    if dense:
        return ptm_apply(ptm_of_term(b.term, binding), v)
    return b.program.run(v, binding)


# ============================================================================
# Graph model
# ============================================================================

class NodeKind(str, Enum):
    SMOOTH = "smooth"
    BOX = "box"
    MU = "mu"
    EPSILON = "epsilon"


class GraphNode(BaseModel):
    """
    Nodo del grafo; su salida es un único wire con nombre = id.

    Attributes:
        args: Wires de entrada (inputs, params o ids de nodos)
        params: Solo box: wires escalares para cada param_wire del box
        n, m: Solo mu: qubits de cada argumento
        width: Ancho declarado (opcional, se verifica contra el inferido)
    """
    model_config = ConfigDict(extra="forbid")

    id: str = Field(..., min_length=1)
    kind: NodeKind
    args: List[str] = Field(default_factory=list)
    prim: Optional[SmoothPrim] = None
    box: Optional[QuantumBox] = None
    params: List[str] = Field(default_factory=list)
    n: Optional[int] = Field(default=None, ge=0)
    m: Optional[int] = Field(default=None, ge=0)
    width: Optional[int] = Field(default=None, ge=0)

    @model_validator(mode="after")
    def validate_kind_fields(self) -> "GraphNode":
        if self.kind == NodeKind.SMOOTH and self.prim is None:
            raise ValueError(f"nodo '{self.id}': smooth requiere 'prim'")
        if self.kind == NodeKind.BOX:
            if self.box is None:
                raise ValueError(f"nodo '{self.id}': box requiere 'box'")
            if len(self.params) != len(self.box.param_wires):
                raise ValueError(
                    f"nodo '{self.id}': {len(self.params)} wires de parámetro para "
                    f"{len(self.box.param_wires)} param_wires"
                )
            if len(self.args) != len(self.box.state_qubits):
                raise ValueError(
                    f"nodo '{self.id}': {len(self.args)} wires de estado para "
                    f"{len(self.box.state_qubits)} state_qubits"
                )
        if self.kind == NodeKind.MU:
            if self.n is None or self.m is None or len(self.args) != 2:
                raise ValueError(f"nodo '{self.id}': mu requiere n, m y dos argumentos")
        if self.kind == NodeKind.EPSILON and self.args:
            raise ValueError(f"nodo '{self.id}': epsilon no recibe argumentos")
        return self

    @property
    def refs(self) -> List[str]:
        return list(self.args) + list(self.params)


class HybridGraph(BaseModel):
    """DAG híbrido con puertos de entrada, parámetros y salidas con nombre."""
    model_config = ConfigDict(extra="forbid")

    inputs: List[str] = Field(default_factory=list, description="Wires escalares de datos")
    params: List[str] = Field(default_factory=list, description="Wires escalares entrenables")
    nodes: List[GraphNode] = Field(default_factory=list)
    outputs: List[str] = Field(..., min_length=1)


@dataclass
class CheckedGraph:
    """Resultado de graph_check: orden topológico y anchos inferidos."""
    graph: HybridGraph
    order: List[GraphNode]
    widths: Dict[str, int]
    param_dependent: Set[str] = field(default_factory=set)

    @property
    def output_width(self) -> int:
        return sum(self.widths[o] for o in self.graph.outputs)


def graph_check(g: HybridGraph) -> CheckedGraph:
    """
    Verifica que el grafo esté bien formado.

    Chequea nombres únicos, referencias existentes, aciclicidad, anchos de
    cada wire (incluidos los declarados), wires de parámetro escalares, μ
    sobre anchos 4^n y 4^m, y la regla de un solo wire de salida por box: la
    salida de un box tiene exactamente un consumidor (una salida del grafo
    cuenta) y ese consumidor no es un Proj ni un Copy.

    Raises:
        GraphError: Grafo mal formado
        OneWireOutError: La salida de un box se divide en varios cables
    """
    names = list(g.inputs) + list(g.params) + [n.id for n in g.nodes]
    seen: Set[str] = set()
    for name in names:
        if name in seen:
            raise GraphError(f"nombre duplicado: '{name}'")
        seen.add(name)

    nodes = {n.id: n for n in g.nodes}
    for node in g.nodes:
        for ref in node.refs:
            if ref not in seen:
                raise GraphError(f"nodo '{node.id}': referencia desconocida '{ref}'")
    for ref in g.outputs:
        if ref not in seen:
            raise GraphError(f"salida desconocida '{ref}'")

    sorter = TopologicalSorter({n.id: [r for r in n.refs if r in nodes] for n in g.nodes})
    try:
        order = [nodes[i] for i in sorter.static_order()]
    except CycleError as e:
        raise GraphError(f"el grafo tiene un ciclo: {' -> '.join(e.args[1])}") from e

    widths: Dict[str, int] = {name: 1 for name in list(g.inputs) + list(g.params)}
    param_dependent: Set[str] = set(g.params)
    for node in order:
        in_widths = [widths[a] for a in node.args]
        if node.kind == NodeKind.SMOOTH:
            try:
                out = node.prim.out_width(sum(in_widths))
            except GraphError as e:
                raise GraphError(f"nodo '{node.id}': {e}") from e
        elif node.kind == NodeKind.BOX:
            for i, (w, expected) in enumerate(zip(in_widths, node.box.state_widths)):
                if w != expected:
                    raise GraphError(f"nodo '{node.id}': wire de estado {i} tiene ancho {w}, se esperaba {expected}")
            for p in node.params:
                if widths[p] != 1:
                    raise GraphError(f"nodo '{node.id}': wire de parámetro '{p}' tiene ancho {widths[p]}")
            out = node.box.out_width
        elif node.kind == NodeKind.MU:
            expected = [4 ** node.n, 4 ** node.m]
            if in_widths != expected:
                raise GraphError(f"nodo '{node.id}': mu espera anchos {expected}, got {in_widths}")
            out = 4 ** (node.n + node.m)
        else:
            out = 1
        if node.width is not None and node.width != out:
            raise GraphError(f"nodo '{node.id}': ancho declarado {node.width}, inferido {out}")
        widths[node.id] = out
        if any(r in param_dependent for r in node.refs):
            param_dependent.add(node.id)

    _check_one_wire_out(g, nodes)
    return CheckedGraph(graph=g, order=order, widths=widths, param_dependent=param_dependent)


def _check_one_wire_out(g: HybridGraph, nodes: Dict[str, GraphNode]) -> None:
    consumers: Dict[str, List[Optional[GraphNode]]] = {
        n.id: [] for n in g.nodes if n.kind == NodeKind.BOX
    }
    for node in g.nodes:
        for ref in node.refs:
            if ref in consumers:
                consumers[ref].append(node)
    for ref in g.outputs:
        if ref in consumers:
            consumers[ref].append(None)
    for box_id, users in consumers.items():
        if not users:
            raise OneWireOutError(f"box '{box_id}': salida sin usar; su wire debe llegar a un consumidor")
        if len(users) > 1:
            raise OneWireOutError(
                f"box '{box_id}' tiene {len(users)} consumidores; su salida debe ser un único wire"
            )
        user = users[0]
        if (
            user is not None
            and user.kind == NodeKind.SMOOTH
            and user.prim.kind in (PrimKind.PROJ, PrimKind.COPY)
        ):
            raise OneWireOutError(
                f"box '{box_id}': el consumidor '{user.id}' ({user.prim.kind.value}) divide el wire de salida"
            )


# ============================================================================
# Evaluation
# ============================================================================

class GraphEvaluator:
    """
    Evaluador de un grafo chequeado una sola vez.

    Reutiliza resultados solo cuando los inputs son idénticos bit a bit:
    - salidas de box, por (parámetros, estados)
    - nodos que no dependen de parámetros, por inputs del grafo

    Example:
        >>> evaluator = GraphEvaluator(graph)
        >>> evaluator.evaluate(inputs=[0, 1, 0, 0, 1], params=theta)
    """

    def __init__(self, graph: HybridGraph, memo_size: int = 4096):
        self.graph = graph
        self.checked = graph_check(graph)
        self.memo_size = memo_size
        self._box_memo: Dict[Tuple[str, bytes, bytes], np.ndarray] = {}
        self._static_memo: Dict[bytes, Dict[str, np.ndarray]] = {}
        logger.debug(
            f"Grafo chequeado: {len(graph.nodes)} nodos, {self.n_inputs} inputs, "
            f"{self.n_params} params, ancho de salida {self.checked.output_width}"
        )

    @property
    def n_inputs(self) -> int:
        return len(self.graph.inputs)

    @property
    def n_params(self) -> int:
        return len(self.graph.params)

    def clear_memo(self) -> None:
        self._box_memo.clear()
        self._static_memo.clear()

    def _eval_box_node(self, node: GraphNode, values: Dict[str, np.ndarray]) -> np.ndarray:
        params = np.concatenate([values[p] for p in node.params]) if node.params else np.zeros(0)
        states = [values[a] for a in node.args]
        key = (
            node.id,
            params.tobytes(),
            b"".join(np.ascontiguousarray(s).tobytes() for s in states),
        )
        cached = self._box_memo.get(key)
        if cached is not None:
            return cached
        out = eval_box(node.box, params, states)
        if len(self._box_memo) >= self.memo_size:
            self._box_memo.clear()
        self._box_memo[key] = out
        return out

    def evaluate(self, inputs: Sequence[float], params: Sequence[float]) -> np.ndarray:
        """
        Evaluación en orden topológico; retorna la concatenación de las salidas.

        Raises:
            ShapeError: Largo de inputs o params distinto al declarado
        """
        inputs = np.asarray(inputs, dtype=float).reshape(-1)
        params = np.asarray(params, dtype=float).reshape(-1)
        if inputs.size != self.n_inputs:
            raise ShapeError(f"se esperaban {self.n_inputs} inputs, got {inputs.size}")
        if params.size != self.n_params:
            raise ShapeError(f"se esperaban {self.n_params} params, got {params.size}")

        input_key = inputs.tobytes()
        static = self._static_memo.get(input_key)
        fresh_static = static is None
        if fresh_static:
            static = {}

        values: Dict[str, np.ndarray] = {}
        for name, x in zip(self.graph.inputs, inputs):
            values[name] = np.array([x])
        for name, x in zip(self.graph.params, params):
            values[name] = np.array([x])

        dependent = self.checked.param_dependent
        for node in self.checked.order:
            if not fresh_static and node.id not in dependent:
                values[node.id] = static[node.id]
                continue
            if node.kind == NodeKind.SMOOTH:
                x = np.concatenate([values[a] for a in node.args]) if node.args else np.zeros(0)
                out = node.prim.apply(x)
            elif node.kind == NodeKind.BOX:
                out = self._eval_box_node(node, values)
            elif node.kind == NodeKind.MU:
                out = mu(values[node.args[0]], values[node.args[1]])
            else:
                out = epsilon()
            values[node.id] = out
            if fresh_static and node.id not in dependent:
                static[node.id] = out

        if fresh_static:
            if len(self._static_memo) >= self.memo_size:
                self._static_memo.clear()
            self._static_memo[input_key] = static
        return np.concatenate([values[o] for o in self.graph.outputs])

    __call__ = evaluate


def eval_graph(g: HybridGraph, inputs: Sequence[float], params: Sequence[float]) -> np.ndarray:
    """Evaluación única (chequea el grafo en cada llamada)."""
    return GraphEvaluator(g).evaluate(inputs, params)


def jacobian_fd(
    g: Union[HybridGraph, GraphEvaluator],
    inputs: Sequence[float],
    params: Sequence[float],
    h: float = 1e-4
) -> np.ndarray:
    """
    Jacobiano de las salidas respecto a los parámetros por diferencias centrales.

    J[:, k] = (f(p + h·e_k) - f(p - h·e_k)) / 2h

    Returns:
        Matriz (ancho de salida) x (número de parámetros)
    """
    if h <= 0:
        raise ValueError(f"h debe ser > 0, got {h}")
    evaluator = g if isinstance(g, GraphEvaluator) else GraphEvaluator(g)
    params = np.asarray(params, dtype=float).reshape(-1)
    columns = []
    for k in range(params.size):
        plus = params.copy()
        minus = params.copy()
        plus[k] += h
        minus[k] -= h
        columns.append((evaluator.evaluate(inputs, plus) - evaluator.evaluate(inputs, minus)) / (2 * h))
    if not columns:
        return np.zeros((evaluator.checked.output_width, 0))
    return np.stack(columns, axis=1)


# ============================================================================
# Builder
# ============================================================================

class GraphBuilder:
    """
    Construcción fluida de grafos híbridos.

    Cada método agrega un nodo y retorna el nombre de su wire de salida.

    Example:
        >>> b = GraphBuilder()
        >>> x = b.input("x0")
        >>> enc = b.bit_encoder(x)
        >>> b.output(b.box(box, states=[enc]))
        >>> graph = b.build()
    """

    def __init__(self):
        self._inputs: List[str] = []
        self._params: List[str] = []
        self._nodes: List[GraphNode] = []
        self._outputs: List[str] = []
        self._counter = 0

    def _next_id(self, prefix: str) -> str:
        self._counter += 1
        return f"{prefix}{self._counter}"

    def _add(self, node: GraphNode) -> str:
        self._nodes.append(node)
        return node.id

    def input(self, name: str) -> str:
        self._inputs.append(name)
        return name

    def param(self, name: str) -> str:
        self._params.append(name)
        return name

    def smooth(self, prim: SmoothPrim, *args: str, id: Optional[str] = None, width: Optional[int] = None) -> str:
        return self._add(GraphNode(
            id=id or self._next_id(prim.kind.value.lower()),
            kind=NodeKind.SMOOTH, args=list(args), prim=prim, width=width
        ))

    def const(self, value: Sequence[float], id: Optional[str] = None) -> str:
        return self.smooth(SmoothPrim.const(value), id=id)

    def box(
        self,
        box: QuantumBox,
        states: Sequence[str] = (),
        params: Sequence[str] = (),
        id: Optional[str] = None
    ) -> str:
        return self._add(GraphNode(
            id=id or self._next_id("box"), kind=NodeKind.BOX,
            args=list(states), params=list(params), box=box, width=box.out_width
        ))

    def mu(self, a: str, b: str, n: int, m: int, id: Optional[str] = None) -> str:
        return self._add(GraphNode(id=id or self._next_id("mu"), kind=NodeKind.MU, args=[a, b], n=n, m=m))

    def epsilon(self, id: Optional[str] = None) -> str:
        return self._add(GraphNode(id=id or self._next_id("eps"), kind=NodeKind.EPSILON))

    def mu_tree(self, refs: Sequence[str], qubits: Sequence[int]) -> Tuple[str, int]:
        """μ de izquierda a derecha sobre wires de vectores de Pauli; vacío → ε."""
        if not refs:
            return self.epsilon(), 0
        acc, total = refs[0], qubits[0]
        for ref, n in zip(refs[1:], qubits[1:]):
            acc = self.mu(acc, ref, total, n)
            total += n
        return acc, total

    def bit_encoder(self, x: str) -> str:
        """(1, 0, -sin πx, cos πx) construido con Scale, Sin, Cos, Const y Concat."""
        angle = self.smooth(SmoothPrim.scale(np.pi), x)
        sin = self.smooth(SmoothPrim.of(PrimKind.SIN), angle)
        neg_sin = self.smooth(SmoothPrim.scale(-1.0), sin)
        cos = self.smooth(SmoothPrim.of(PrimKind.COS), angle)
        head = self.const([1.0, 0.0])
        return self.smooth(SmoothPrim.of(PrimKind.CONCAT), head, neg_sin, cos, width=4)

    def output(self, ref: str) -> str:
        self._outputs.append(ref)
        return ref

    def build(self, check: bool = True) -> HybridGraph:
        graph = HybridGraph(
            inputs=list(self._inputs), params=list(self._params),
            nodes=list(self._nodes), outputs=list(self._outputs)
        )
        if check:
            graph_check(graph)
        return graph


# ============================================================================
# JSON I/O
# ============================================================================

def graph_to_json(g: HybridGraph) -> str:
    """Mismo contenedor que los diagramas: {"version": 1, "graph": {...}}."""
    payload = {"version": FORMAT_VERSION, "graph": g.model_dump(mode="json", exclude_none=True)}
    return json.dumps(payload, indent=2)


def graph_from_json(text: str) -> HybridGraph:
    """
    Parsea un grafo serializado.

    Raises:
        DiagramSyntaxError: JSON inválido o contenedor incorrecto
        GraphError: Modelo inválido
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise DiagramSyntaxError(e.msg, line=e.lineno, column=e.colno) from e
    if not isinstance(data, dict) or data.get("version") != FORMAT_VERSION or "graph" not in data:
        raise DiagramSyntaxError("se esperaba {\"version\": 1, \"graph\": {...}}", path="$")
    try:
        return HybridGraph.model_validate(data["graph"])
    except ValidationError as e:
        first = e.errors()[0]
        loc = ".".join(str(p) for p in first["loc"])
        raise GraphError(f"graph.{loc}: {first['msg']}") from e
