"""
Generador de términos ZX aleatorios bien tipados.

Produce el corpus de las suites de verificación: árboles Seq/Par de
profundidad acotada cuyos wires intermedios nunca superan `max_qubits`.
Determinista por seed.
"""

import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.core.zx import (
    Gen,
    Par,
    Phase,
    Seq,
    ZxTerm,
    discard,
    hadamard,
    identity,
    scalar,
    swap,
    x_spider,
    z_spider,
)


class RandomTermGenerator:
    """
    Términos aleatorios con n_in dado y a lo más `max_qubits` wires en cada corte.

    Attributes:
        seed: Seed del generador numpy
        max_qubits: Cota de wires (entrada, salida e intermedios)
        max_depth: Profundidad máxima del árbol Seq/Par
        allow_discard: Si False genera solo términos puros
        param_names: Si no está vacío, algunas fases usan estos parámetros

    Example:
        >>> gen = RandomTermGenerator(seed=7)
        >>> corpus = gen.corpus(100)
    """

    def __init__(
        self,
        seed: int = 0,
        max_qubits: int = 4,
        max_depth: int = 6,
        allow_discard: bool = True,
        param_names: Sequence[str] = ()
    ):
        if max_qubits < 1:
            raise ValueError(f"max_qubits debe ser >= 1, got {max_qubits}")
        if max_depth < 0:
            raise ValueError(f"max_depth debe ser >= 0, got {max_depth}")
        self.rng = np.random.default_rng(seed)
        self.max_qubits = max_qubits
        self.max_depth = max_depth
        self.allow_discard = allow_discard
        self.param_names = tuple(param_names)

    # ------------------------------------------------------------------
    # Leaves
    # ------------------------------------------------------------------

    def _phase(self) -> Phase:
        alpha = float(self.rng.uniform(-math.pi, math.pi))
        if self.param_names and self.rng.random() < 0.3:
            name = self.param_names[int(self.rng.integers(len(self.param_names)))]
            return Phase.param(name, coeff=float(self.rng.choice([-1.0, 1.0, 0.5])), const=alpha)
        return Phase.constant(alpha)

    def _spider(self, n_in: int, budget: int) -> Gen:
        n_out = int(self.rng.integers(0, min(2, budget) + 1))
        factory = z_spider if self.rng.random() < 0.5 else x_spider
        return Gen(factory(n_in, n_out, self._phase()))

    def _chunk(self, width: int, budget: int) -> Gen:
        """Un generador con `width` entradas y a lo más `budget` salidas."""
        roll = self.rng.random()
        if width == 0:
            if roll < 0.2:
                magnitude = float(self.rng.uniform(0.5, 1.5))
                angle = float(self.rng.uniform(-math.pi, math.pi))
                return Gen(scalar(magnitude * complex(math.cos(angle), math.sin(angle))))
            return self._spider(0, budget)
        if width == 1:
            if self.allow_discard and roll < 0.15:
                return Gen(discard())
            if roll < 0.35 and budget >= 1:
                return Gen(hadamard())
            if roll < 0.45 and budget >= 1:
                return Gen(identity())
            return self._spider(1, budget)
        if roll < 0.3 and budget >= 2:
            return Gen(swap())
        return self._spider(2, budget)

    def leaf(self, n_in: int, max_out: Optional[int] = None) -> ZxTerm:
        """Capa de generadores en paralelo que consume exactamente n_in wires."""
        budget = self.max_qubits if max_out is None else max_out
        if n_in == 0:
            return self._chunk(0, budget)
        chunks: List[ZxTerm] = []
        remaining = n_in
        while remaining > 0:
            width = 2 if remaining >= 2 and self.rng.random() < 0.4 else 1
            g = self._chunk(width, budget)
            budget -= g.n_out
            remaining -= width
            chunks.append(g)
        term = chunks[0]
        for g in chunks[1:]:
            term = Par(term, g)
        return term

    # ------------------------------------------------------------------
    # Trees
    # ------------------------------------------------------------------

    def _term(self, n_in: int, depth: int, max_out: int) -> ZxTerm:
        roll = self.rng.random()
        if depth <= 0 or roll < 0.3:
            return self.leaf(n_in, max_out)
        if roll < 0.65 or n_in == 0:
            first = self._term(n_in, depth - 1, self.max_qubits)
            second = self._term(first.n_out, depth - 1, max_out)
            return Seq(first, second)
        split = int(self.rng.integers(0, n_in + 1))
        left = self._term(split, depth - 1, max_out)
        right = self._term(n_in - split, depth - 1, max_out - left.n_out)
        return Par(left, right)

    def term(self, n_in: Optional[int] = None, depth: Optional[int] = None) -> ZxTerm:
        """
        Un término aleatorio.

        Args:
            n_in: Wires de entrada (None = aleatorio en [0, max_qubits])
            depth: Profundidad máxima (None = max_depth)
        """
        if n_in is None:
            n_in = int(self.rng.integers(0, self.max_qubits + 1))
        if not 0 <= n_in <= self.max_qubits:
            raise ValueError(f"n_in debe estar en [0, {self.max_qubits}], got {n_in}")
        return self._term(n_in, self.max_depth if depth is None else depth, self.max_qubits)

    def corpus(self, count: int) -> List[ZxTerm]:
        return [self.term() for _ in range(count)]

    def pair(self) -> Tuple[ZxTerm, ZxTerm]:
        """Dos términos cuyo producto tensorial sigue dentro de max_qubits."""
        half = max(1, self.max_qubits // 2)
        saved = self.max_qubits
        self.max_qubits = half
        try:
            return self.term(), self.term()
        finally:
            self.max_qubits = saved
