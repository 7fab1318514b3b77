"""
Formato de archivo de diagramas (JSON UTF-8).

    {"version": 1, "term": T}
    T = {"gen": "Z"|"X"|"H"|"discard"|"swap"|"id"|"scalar", ...}
      | {"seq": [T, T]} | {"par": [T, T]}

Spiders llevan "in", "out" y "phase" = {"const": real, "terms": {name: coeff}};
Scalar lleva "re" y "im". Las constantes de fase aceptan expresiones como "pi/2".
"""

import json
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, ValidationInfo, field_validator

from app.core.exceptions import ArityError, DiagramSyntaxError
from app.core.zx import (
    Gen,
    Generator,
    GeneratorKind,
    Par,
    Phase,
    Seq,
    ZxTerm,
    parse_phase,
)

FORMAT_VERSION = 1


# ============================================================================
# Schemas
# ============================================================================

def _number(value: Union[float, int, str]) -> float:
    """Número decimal o expresión constante ('pi', '-pi/2')."""
    if isinstance(value, str):
        phase = parse_phase(value)
        if not phase.is_constant:
            raise ValueError(f"se esperaba una constante, got '{value}'")
        return phase.const
    return float(value)


class PhaseSchema(BaseModel):
    """Fase afín: const + Σ terms[name]·name."""
    model_config = ConfigDict(extra="forbid")

    const: float = Field(default=0.0, description="Término constante (radianes)")
    terms: Dict[str, float] = Field(default_factory=dict, description="Coeficiente por parámetro")

    @field_validator("const", mode="before")
    @classmethod
    def parse_const(cls, v):
        return _number(v)

    @field_validator("terms", mode="before")
    @classmethod
    def parse_terms(cls, v):
        if not isinstance(v, dict):
            raise ValueError(f"terms debe ser un objeto, got {type(v).__name__}")
        return {name: _number(coeff) for name, coeff in v.items()}


class GenNode(BaseModel):
    """Hoja generador."""
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    gen: Literal["Z", "X", "H", "discard", "swap", "id", "scalar"]
    n_in: Optional[int] = Field(default=None, alias="in", ge=0)
    n_out: Optional[int] = Field(default=None, alias="out", ge=0)
    phase: Optional[PhaseSchema] = None
    re: Optional[float] = None
    im: Optional[float] = None

    @field_validator("phase", mode="before")
    @classmethod
    def parse_phase_text(cls, v):
        # Se acepta también la forma corta "phase": "pi*x0" o un número
        if isinstance(v, (str, int, float)):
            p = parse_phase(v) if isinstance(v, str) else Phase.constant(v)
            return {"const": p.const, "terms": dict(p.coeffs)}
        return v

    @field_validator("re", "im", mode="before")
    @classmethod
    def parse_scalar_part(cls, v):
        return None if v is None else _number(v)

    @field_validator("phase")
    @classmethod
    def validate_phase_owner(cls, v, info: ValidationInfo):
        gen = info.data.get("gen")
        if v is not None and gen not in ("Z", "X"):
            raise ValueError(f"phase solo aplica a spiders Z o X, got gen='{gen}'")
        return v

    @field_validator("re", "im")
    @classmethod
    def validate_scalar_owner(cls, v, info: ValidationInfo):
        gen = info.data.get("gen")
        if v is not None and gen != "scalar":
            raise ValueError(f"{info.field_name} solo aplica a scalar, got gen='{gen}'")
        return v


class SeqNode(BaseModel):
    model_config = ConfigDict(extra="forbid")

    seq: List["TermNode"] = Field(..., min_length=2)


class ParNode(BaseModel):
    model_config = ConfigDict(extra="forbid")

    par: List["TermNode"] = Field(..., min_length=2)


TermNode = Union[GenNode, SeqNode, ParNode]
SeqNode.model_rebuild()
ParNode.model_rebuild()


class DiagramFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    version: Literal[1]
    term: TermNode


# ============================================================================
# Schema <-> term
# ============================================================================

def _generator_from_node(node: GenNode, path: str) -> Generator:
    kind = GeneratorKind(node.gen)
    if kind in (GeneratorKind.Z, GeneratorKind.X):
        if node.n_in is None or node.n_out is None:
            raise DiagramSyntaxError("spider requiere 'in' y 'out'", path=path)
        phase = node.phase or PhaseSchema()
        return Generator(
            kind, node.n_in, node.n_out,
            phase=Phase(const=phase.const, coeffs=tuple(phase.terms.items()))
        )
    if kind == GeneratorKind.SCALAR:
        return Generator(kind, 0, 0, value=complex(node.re or 0.0, node.im or 0.0))
    fixed = {
        GeneratorKind.H: (1, 1),
        GeneratorKind.ID: (1, 1),
        GeneratorKind.SWAP: (2, 2),
        GeneratorKind.DISCARD: (1, 0),
    }[kind]
    n_in = fixed[0] if node.n_in is None else node.n_in
    n_out = fixed[1] if node.n_out is None else node.n_out
    try:
        return Generator(kind, n_in, n_out)
    except ArityError as e:
        raise ArityError(e.message, path=path) from e


def _term_from_node(node: TermNode, path: str) -> ZxTerm:
    if isinstance(node, GenNode):
        return Gen(_generator_from_node(node, path))
    if isinstance(node, SeqNode):
        out = _term_from_node(node.seq[0], f"{path}.seq[0]")
        for i, child in enumerate(node.seq[1:], start=1):
            then = _term_from_node(child, f"{path}.seq[{i}]")
            if out.n_out != then.n_in:
                raise ArityError(
                    f"interfaz incompatible en seq ({out.n_out} vs {then.n_in})", path=path
                )
            out = Seq(out, then)
        return out
    out = _term_from_node(node.par[0], f"{path}.par[0]")
    for i, child in enumerate(node.par[1:], start=1):
        out = Par(out, _term_from_node(child, f"{path}.par[{i}]"))
    return out


def _validation_message(err: ValidationError, root: str) -> DiagramSyntaxError:
    first = err.errors()[0]
    loc = ".".join(str(p) for p in (root, *first["loc"]) if p != "")
    return DiagramSyntaxError(first["msg"], path=loc)


def term_from_dict(data: Any, path: str = "term") -> ZxTerm:
    """
    Convierte un objeto JSON ya decodificado en ZxTerm.

    Raises:
        DiagramSyntaxError: Estructura inválida
        ArityError: Seq mal tipado (con ruta del subtérmino)
    """
    try:
        node = DiagramFile.model_validate({"version": FORMAT_VERSION, "term": data}).term
    except ValidationError as e:
        raise _validation_message(e, "") from e
    return _term_from_node(node, path)


def parse_diagram(text: str) -> ZxTerm:
    """
    Parsea un archivo de diagrama.

    Raises:
        DiagramSyntaxError: JSON inválido (con línea y columna) o esquema inválido
        ArityError: Interfaz incompatible (con ruta del subtérmino)
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise DiagramSyntaxError(e.msg, line=e.lineno, column=e.colno) from e
    if not isinstance(data, dict) or "term" not in data:
        raise DiagramSyntaxError("se esperaba un objeto con 'version' y 'term'", path="$")
    try:
        diagram = DiagramFile.model_validate(data)
    except ValidationError as e:
        raise _validation_message(e, "$") from e
    return _term_from_node(diagram.term, "term")


def _phase_to_dict(phase: Phase) -> Dict[str, Any]:
    return {"const": phase.const, "terms": {name: c for name, c in phase.coeffs}}


def term_to_dict(t: ZxTerm) -> Dict[str, Any]:
    """Forma JSON de un término (sin el contenedor de versión)."""
    if isinstance(t, Gen):
        g = t.gen
        out: Dict[str, Any] = {"gen": g.kind.value}
        if g.is_spider:
            out["in"] = g.n_in
            out["out"] = g.n_out
            out["phase"] = _phase_to_dict(g.phase)
        elif g.kind == GeneratorKind.SCALAR:
            out["re"] = g.value.real
            out["im"] = g.value.imag
        return out
    if isinstance(t, Seq):
        return {"seq": [term_to_dict(t.first), term_to_dict(t.then)]}
    return {"par": [term_to_dict(t.left), term_to_dict(t.right)]}


def serialize(t: ZxTerm) -> str:
    """Serializa un término al formato de archivo (estable byte a byte)."""
    return json.dumps({"version": FORMAT_VERSION, "term": term_to_dict(t)}, indent=2)
