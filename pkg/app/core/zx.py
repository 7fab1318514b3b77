"""
IR de términos para diagramas ZX doblados (el PROP ZX con discard).

Un diagrama es un árbol inmutable:
- Gen: un generador (spiders Z/X, Hadamard, Discard, Swap, Id, Scalar)
- Seq: composición secuencial (first luego then)
- Par: producto tensorial (left es el bloque de wires superior / más significativo)

Las fases son afines en parámetros con nombre, lo que cubre tanto las
codificaciones π·x_i como los ángulos θ entrenables con un solo mecanismo.
"""

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterator, List, Mapping, Sequence, Tuple, Union

from app.core.exceptions import ArityError, DiagramSyntaxError, UnboundParameterError


# ============================================================================
# Phase
# ============================================================================

@dataclass(frozen=True)
class Phase:
    """
    Expresión afina c₀ + Σ c_k·p_k (radianes).

    Las fases se comparan módulo 2π solo al evaluarlas; como término son
    simplemente coeficientes reales.
    """
    const: float = 0.0
    coeffs: Tuple[Tuple[str, float], ...] = ()

    def __post_init__(self):
        merged: Dict[str, float] = {}
        for name, coeff in self.coeffs:
            merged[name] = merged.get(name, 0.0) + float(coeff)
        normalized = tuple(sorted((n, c) for n, c in merged.items() if c != 0.0))
        object.__setattr__(self, "const", float(self.const))
        object.__setattr__(self, "coeffs", normalized)

    @classmethod
    def constant(cls, value: float) -> "Phase":
        return cls(const=value)

    @classmethod
    def param(cls, name: str, coeff: float = 1.0, const: float = 0.0) -> "Phase":
        """Fase const + coeff·name."""
        return cls(const=const, coeffs=((name, coeff),))

    @classmethod
    def coerce(cls, value: Union["Phase", float, int, str]) -> "Phase":
        """Acepta Phase, número o expresión de texto ('pi*x0')."""
        if isinstance(value, Phase):
            return value
        if isinstance(value, str):
            return parse_phase(value)
        return cls(const=float(value))

    @property
    def free_parameters(self) -> FrozenSet[str]:
        return frozenset(name for name, _ in self.coeffs)

    @property
    def is_constant(self) -> bool:
        return not self.coeffs

    def evaluate(self, binding: Mapping[str, float] = None) -> float:
        """
        Valor numérico bajo un binding total.

        Raises:
            UnboundParameterError: Si falta algún parámetro
        """
        binding = binding or {}
        missing = [name for name, _ in self.coeffs if name not in binding]
        if missing:
            raise UnboundParameterError(missing)
        return self.const + sum(c * float(binding[name]) for name, c in self.coeffs)

    def substitute(self, binding: Mapping[str, float]) -> "Phase":
        """Sustitución parcial: los nombres sin binding quedan libres."""
        const = self.const
        remaining = []
        for name, coeff in self.coeffs:
            if name in binding:
                const += coeff * float(binding[name])
            else:
                remaining.append((name, coeff))
        return Phase(const=const, coeffs=tuple(remaining))

    def __add__(self, other: Union["Phase", float]) -> "Phase":
        other = Phase.coerce(other)
        return Phase(const=self.const + other.const, coeffs=self.coeffs + other.coeffs)

    __radd__ = __add__

    def __mul__(self, factor: float) -> "Phase":
        factor = float(factor)
        return Phase(
            const=self.const * factor,
            coeffs=tuple((n, c * factor) for n, c in self.coeffs)
        )

    __rmul__ = __mul__

    def __neg__(self) -> "Phase":
        return self * -1.0

    def __str__(self) -> str:
        parts = [f"{c!r}*{n}" for n, c in self.coeffs]
        if self.const != 0.0 or not parts:
            parts.insert(0, repr(self.const))
        return " + ".join(parts)


_PHASE_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"
    r"|(?P<name>[A-Za-z_π][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/]))"
)


def parse_phase(text: str) -> Phase:
    """
    Parsea una expresión afín de fase.

    Gramática: término (('+'|'-') término)*, donde cada término es un producto
    de números, `pi` y a lo más un nombre de parámetro, con divisiones solo
    por constantes. Ej: "pi*x0", "-pi/2 + 0.5*theta", "2*pi".

    Raises:
        DiagramSyntaxError: Token inválido o expresión no afín
    """
    source = text.strip()
    tokens: List[Tuple[str, str, int]] = []
    pos = 0
    while pos < len(source):
        m = _PHASE_TOKEN.match(source, pos)
        if not m:
            raise DiagramSyntaxError(
                f"token inválido en fase '{text}' (posición {pos + 1})"
            )
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    if not tokens:
        raise DiagramSyntaxError("expresión de fase vacía")

    const = 0.0
    coeffs: List[Tuple[str, float]] = []
    i = 0

    def fail(message: str, at: int) -> DiagramSyntaxError:
        return DiagramSyntaxError(f"{message} en fase '{text}' (posición {at + 1})")

    while i < len(tokens):
        sign = 1.0
        while i < len(tokens) and tokens[i][0] == "op" and tokens[i][1] in "+-":
            if tokens[i][1] == "-":
                sign = -sign
            i += 1
        value = sign
        name = None
        expect_factor = True
        while True:
            if i >= len(tokens):
                raise fail("falta un factor", len(source) - 1)
            kind, tok, at = tokens[i]
            if kind == "op":
                raise fail(f"operador inesperado '{tok}'", at)
            divide = not expect_factor
            if kind == "num":
                factor = float(tok)
            elif tok in ("pi", "π"):
                factor = math.pi
            else:
                if divide:
                    raise fail("división por parámetro no es afín", at)
                if name is not None:
                    raise fail("producto de parámetros no es afín", at)
                name = tok
                factor = 1.0
            if divide:
                if factor == 0.0:
                    raise fail("división por cero", at)
                value /= factor
            else:
                value *= factor
            i += 1
            if i < len(tokens) and tokens[i][0] == "op" and tokens[i][1] in "*/":
                expect_factor = tokens[i][1] == "*"
                i += 1
                continue
            break
        if name is None:
            const += value
        else:
            coeffs.append((name, value))
        if i < len(tokens) and not (tokens[i][0] == "op" and tokens[i][1] in "+-"):
            raise fail(f"token inesperado '{tokens[i][1]}'", tokens[i][2])
    return Phase(const=const, coeffs=tuple(coeffs))


# ============================================================================
# Generators
# ============================================================================

class GeneratorKind(str, Enum):
    """Generadores del PROP (los nombres coinciden con el formato JSON)."""
    Z = "Z"
    X = "X"
    H = "H"
    DISCARD = "discard"
    SWAP = "swap"
    ID = "id"
    SCALAR = "scalar"


_FIXED_ARITY = {
    GeneratorKind.H: (1, 1),
    GeneratorKind.ID: (1, 1),
    GeneratorKind.SWAP: (2, 2),
    GeneratorKind.DISCARD: (1, 0),
    GeneratorKind.SCALAR: (0, 0),
}


@dataclass(frozen=True)
class Generator:
    """
    Un generador con su aridad.

    Attributes:
        kind: Tipo de generador
        n_in: Wires de entrada
        n_out: Wires de salida
        phase: Fase (solo spiders)
        value: Escalar complejo (solo Scalar)
    """
    kind: GeneratorKind
    n_in: int
    n_out: int
    phase: Phase = Phase()
    value: complex = 1 + 0j

    def __post_init__(self):
        if self.n_in < 0 or self.n_out < 0:
            raise ArityError(f"aridad negativa ({self.n_in}, {self.n_out})", path="gen")
        fixed = _FIXED_ARITY.get(self.kind)
        if fixed is not None and (self.n_in, self.n_out) != fixed:
            raise ArityError(
                f"{self.kind.value} es {fixed[0]}→{fixed[1]}, got {self.n_in}→{self.n_out}",
                path="gen"
            )
        object.__setattr__(self, "value", complex(self.value))

    @property
    def is_spider(self) -> bool:
        return self.kind in (GeneratorKind.Z, GeneratorKind.X)


def z_spider(n_in: int, n_out: int, phase: Union[Phase, float, str] = 0.0) -> Generator:
    return Generator(GeneratorKind.Z, n_in, n_out, phase=Phase.coerce(phase))


def x_spider(n_in: int, n_out: int, phase: Union[Phase, float, str] = 0.0) -> Generator:
    return Generator(GeneratorKind.X, n_in, n_out, phase=Phase.coerce(phase))


def hadamard() -> Generator:
    return Generator(GeneratorKind.H, 1, 1)


def discard() -> Generator:
    return Generator(GeneratorKind.DISCARD, 1, 0)


def swap() -> Generator:
    return Generator(GeneratorKind.SWAP, 2, 2)


def identity() -> Generator:
    return Generator(GeneratorKind.ID, 1, 1)


def scalar(value: complex) -> Generator:
    return Generator(GeneratorKind.SCALAR, 0, 0, value=value)


# ============================================================================
# Terms
# ============================================================================

@dataclass(frozen=True)
class Gen:
    """Hoja del árbol: un generador."""
    gen: Generator

    @property
    def n_in(self) -> int:
        return self.gen.n_in

    @property
    def n_out(self) -> int:
        return self.gen.n_out


@dataclass(frozen=True)
class Seq:
    """Composición secuencial: primero `first`, luego `then`."""
    first: "ZxTerm"
    then: "ZxTerm"
    n_in: int = field(init=False, repr=False, compare=False)
    n_out: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.first.n_out != self.then.n_in:
            raise ArityError(
                f"interfaz incompatible en seq ({self.first.n_out} vs {self.then.n_in})",
                path="seq"
            )
        object.__setattr__(self, "n_in", self.first.n_in)
        object.__setattr__(self, "n_out", self.then.n_out)


@dataclass(frozen=True)
class Par:
    """Producto tensorial: `left` ocupa los wires superiores."""
    left: "ZxTerm"
    right: "ZxTerm"
    n_in: int = field(init=False, repr=False, compare=False)
    n_out: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "n_in", self.left.n_in + self.right.n_in)
        object.__setattr__(self, "n_out", self.left.n_out + self.right.n_out)


ZxTerm = Union[Gen, Seq, Par]


def arity(t: ZxTerm) -> Tuple[int, int]:
    """
    Aridad (n_in, n_out) calculada bottom-up.

    Raises:
        ArityError: Interfaz incompatible en algún Seq (con la ruta del subtérmino)
    """
    return _arity(t, "term")


def _arity(t: ZxTerm, path: str) -> Tuple[int, int]:
    if isinstance(t, Gen):
        return t.gen.n_in, t.gen.n_out
    if isinstance(t, Seq):
        a = _arity(t.first, f"{path}.seq[0]")
        b = _arity(t.then, f"{path}.seq[1]")
        if a[1] != b[0]:
            raise ArityError(f"interfaz incompatible en seq ({a[1]} vs {b[0]})", path=path)
        return a[0], b[1]
    if isinstance(t, Par):
        a = _arity(t.left, f"{path}.par[0]")
        b = _arity(t.right, f"{path}.par[1]")
        return a[0] + b[0], a[1] + b[1]
    raise TypeError(f"No es un término ZX: {type(t).__name__}")


def seq(*terms: ZxTerm) -> ZxTerm:
    """Composición secuencial de varios términos (en orden de aplicación)."""
    if not terms:
        raise ValueError("seq requiere al menos un término")
    out = terms[0]
    for t in terms[1:]:
        out = Seq(out, t)
    return out


def par(*terms: ZxTerm) -> ZxTerm:
    """Producto tensorial de varios términos (el primero arriba)."""
    if not terms:
        return Gen(scalar(1.0))
    out = terms[0]
    for t in terms[1:]:
        out = Par(out, t)
    return out


def ids(n: int) -> ZxTerm:
    """Identidad sobre n wires; ids(0) es el wire vacío Scalar(1)."""
    if n < 0:
        raise ArityError(f"ids requiere n >= 0, got {n}")
    if n == 0:
        return Gen(scalar(1.0))
    return par(*[Gen(identity()) for _ in range(n)])


def iter_generators(t: ZxTerm) -> Iterator[Generator]:
    """Generadores en orden de recorrido (izquierda a derecha, first antes que then)."""
    stack = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, Gen):
            yield node.gen
        elif isinstance(node, Seq):
            stack.append(node.then)
            stack.append(node.first)
        else:
            stack.append(node.right)
            stack.append(node.left)


def free_parameters(t: ZxTerm) -> FrozenSet[str]:
    names = set()
    for g in iter_generators(t):
        names |= g.phase.free_parameters
    return frozenset(names)


def has_discard(t: ZxTerm) -> bool:
    return any(g.kind == GeneratorKind.DISCARD for g in iter_generators(t))


def substitute(t: ZxTerm, binding: Mapping[str, float]) -> ZxTerm:
    """
    Reemplaza parámetros por constantes (binding parcial permitido).

    La estructura del término no cambia; con binding vacío retorna el mismo término.
    """
    if not binding:
        return t
    if isinstance(t, Gen):
        g = t.gen
        if not g.is_spider or g.phase.free_parameters.isdisjoint(binding):
            return t
        return Gen(Generator(g.kind, g.n_in, g.n_out, phase=g.phase.substitute(binding)))
    if isinstance(t, Seq):
        return Seq(substitute(t.first, binding), substitute(t.then, binding))
    return Par(substitute(t.left, binding), substitute(t.right, binding))


# ============================================================================
# Builders
# ============================================================================

class PauliBasis(str, Enum):
    """Base de cada pata de un phase gadget."""
    Z = "Z"
    X = "X"


def _layer(n: int, blocks: Mapping[int, ZxTerm]) -> ZxTerm:
    """Capa sobre n wires: bloques 1→k en las posiciones dadas, Id en el resto."""
    pieces = [blocks.get(q, Gen(identity())) for q in range(n)]
    return par(*pieces)


def _swap_layer(n: int, pos: int) -> ZxTerm:
    """Swap de los wires pos y pos+1 dentro de n wires."""
    pieces: List[ZxTerm] = [Gen(identity()) for _ in range(pos)]
    pieces.append(Gen(swap()))
    pieces.extend(Gen(identity()) for _ in range(n - pos - 2))
    return par(*pieces)


def build_permutation(order: Sequence[int]) -> ZxTerm:
    """
    Permutación de wires con Swaps adyacentes.

    Args:
        order: order[j] = wire de entrada que sale en la posición j

    Returns:
        Término n→n (ids(n) si la permutación es trivial)
    """
    n = len(order)
    if sorted(order) != list(range(n)):
        raise ArityError(f"no es una permutación de {n} wires: {list(order)}", path="permutation")
    current = list(range(n))
    layers: List[ZxTerm] = []
    for target_pos, wire in enumerate(order):
        p = current.index(wire)
        while p > target_pos:
            layers.append(_swap_layer(n, p - 1))
            current[p - 1], current[p] = current[p], current[p - 1]
            p -= 1
    if not layers:
        return ids(n)
    return seq(*layers)


def build_cnot() -> ZxTerm:
    """
    CNOT con control en el wire 0 y target en el wire 1.

    Z-spider copia el control, X-spider calcula la paridad; las spiders dan
    CNOT/√2, el Scalar(√2) deja la interpretación pura exactamente unitaria.
    """
    return seq(
        par(Gen(scalar(math.sqrt(2))), Gen(z_spider(1, 2)), Gen(identity())),
        par(Gen(identity()), Gen(x_spider(2, 1)))
    )


def build_phase_gadget(
    basis: Union[PauliBasis, str, Sequence[Union[PauliBasis, str]]],
    qubits: Sequence[int],
    n: int,
    phase: Union[Phase, float, str]
) -> ZxTerm:
    """
    Phase gadget exp(-i·phase/2 · P₁⊗...⊗P_k) sobre los qubits seleccionados.

    Construcción: cada pata copia su wire con un Z-spider 1→2, las copias se
    llevan al final con Swaps, un X-spider k→1 calcula la paridad y un Z-spider
    1→0 aplica la fase. Las patas en base X se conjugan con Hadamard.

    Convención de fase global: el término puro es e^{iα/2}·exp(-iα/2·P),
    es decir diag(1, e^{iα}) para una pata Z. La PTM no depende de esta elección.

    Args:
        basis: Una base para todas las patas o una por pata
        qubits: Índices distintos en [0, n)
        n: Número total de wires
        phase: Ángulo α (constante o parametrizado)

    Raises:
        ArityError: Índices duplicados, fuera de rango o lista de bases inválida
    """
    qubits = list(qubits)
    if not qubits:
        raise ArityError("phase gadget requiere al menos una pata", path="gadget")
    if len(set(qubits)) != len(qubits):
        raise ArityError(f"qubits duplicados: {qubits}", path="gadget")
    if any(not 0 <= q < n for q in qubits):
        raise ArityError(f"qubits fuera de [0, {n}): {qubits}", path="gadget")
    if isinstance(basis, (PauliBasis, str)):
        bases = [PauliBasis(basis)] * len(qubits)
    else:
        bases = [PauliBasis(b) for b in basis]
        if len(bases) != len(qubits):
            raise ArityError(
                f"{len(bases)} bases para {len(qubits)} patas", path="gadget"
            )
    legs = sorted(zip(qubits, bases))
    leg_set = {q for q, _ in legs}
    x_legs = {q: Gen(hadamard()) for q, b in legs if b == PauliBasis.X}
    k = len(legs)

    layers: List[ZxTerm] = []
    if x_legs:
        layers.append(_layer(n, x_legs))

    copy_layer = _layer(n, {q: Gen(z_spider(1, 2)) for q in leg_set})
    if k > 1:
        copy_layer = Par(Gen(scalar(2 ** ((k - 1) / 2))), copy_layer)
    layers.append(copy_layer)

    labels: List[Tuple[str, int]] = []
    for q in range(n):
        labels.append(("q", q))
        if q in leg_set:
            labels.append(("c", q))
    target = [("q", q) for q in range(n)] + [("c", q) for q, _ in legs]
    order = [labels.index(t) for t in target]
    if order != list(range(len(order))):
        layers.append(build_permutation(order))

    hub = seq(Gen(x_spider(k, 1)), Gen(z_spider(1, 0, phase)))
    layers.append(par(ids(n), hub) if n else hub)

    if x_legs:
        layers.append(_layer(n, x_legs))
    return seq(*layers)


def build_basis_prep(bits: Sequence[str]) -> ZxTerm:
    """
    Preparación en base computacional parametrizada por nombres de bits.

    Cada qubit es un X-spider 0→1 con fase π·x_i y Scalar(1/√2), de modo que
    con x_i ∈ {0, 1} se prepara exactamente |x₀...x_{k-1}⟩.
    """
    bits = list(bits)
    if not bits:
        raise ArityError("basis prep requiere k >= 1", path="basis_prep")
    return par(*[
        Par(Gen(scalar(1 / math.sqrt(2))), Gen(x_spider(0, 1, Phase.param(name, coeff=math.pi))))
        for name in bits
    ])


def build_basis_state(bits: Sequence[int]) -> ZxTerm:
    """Estado computacional constante |b₀...b_{k-1}⟩."""
    names = [f"b{i}" for i in range(len(bits))]
    return substitute(build_basis_prep(names), dict(zip(names, (float(b) for b in bits))))


def build_readout_effect(m: int, which: int) -> ZxTerm:
    """
    Efecto m→0 que mide Prob(⟨0|) en el qubit `which` y descarta el resto.

    ⟨0| es el X-spider 1→0 con Scalar(1/√2).
    """
    if not 0 <= which < m:
        raise ArityError(f"readout fuera de rango: {which} no está en [0, {m})", path="readout")
    pieces = []
    for q in range(m):
        if q == which:
            pieces.append(Par(Gen(scalar(1 / math.sqrt(2))), Gen(x_spider(1, 0))))
        else:
            pieces.append(Gen(discard()))
    return par(*pieces)
