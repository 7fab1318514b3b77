"""
Pytest configuration and shared fixtures.
"""

import math

import numpy as np
import pytest

from app.core.classifier import build_demo_graph
from app.core.dataset import Sample, SynthRule, synth_dataset
from app.core.hybrid import GraphBuilder, GraphEvaluator, QuantumBox, SmoothPrim
from app.core.random_terms import RandomTermGenerator
from app.core.zx import Gen, Par, PauliBasis, Phase, build_phase_gadget, scalar, seq, z_spider


@pytest.fixture
def rng():
    """Generador numpy con seed fijo."""
    return np.random.default_rng(1234)


@pytest.fixture
def term_generator():
    """Términos aleatorios de hasta 4 qubits y profundidad 6."""
    return RandomTermGenerator(seed=42, max_qubits=4, max_depth=6)


@pytest.fixture
def small_corpus():
    """Corpus chico (con y sin discard) para tests de equivalencia."""
    return RandomTermGenerator(seed=7, max_qubits=3, max_depth=4).corpus(25)


@pytest.fixture
def plus_state():
    """|+⟩ normalizado: Z-spider 0→1 con Scalar(1/√2)."""
    return Par(Gen(scalar(1 / math.sqrt(2))), Gen(z_spider(0, 1)))


@pytest.fixture
def rz_graph(plus_state):
    """
    Grafo sin inputs con un parámetro θ.

    |+⟩ → R_Z(θ) → componente X del vector de Pauli (= cos θ).
    """
    term = seq(plus_state, build_phase_gadget(PauliBasis.Z, [0], 1, Phase.param("theta")))
    box = QuantumBox(term=term, param_wires=["theta"], state_qubits=[], out_qubits=1)
    b = GraphBuilder()
    theta = b.param("theta")
    out = b.box(box, params=[theta], id="rz")
    b.output(b.smooth(SmoothPrim.linear(np.array([[0.0, 1.0, 0.0, 0.0]])), out, id="x_component"))
    return b.build()


@pytest.fixture
def demo_graph_k2():
    """Grafo del clasificador con 2 bits y 1 capa."""
    return build_demo_graph(2, 1)


@pytest.fixture
def demo_evaluator_k2(demo_graph_k2):
    return GraphEvaluator(demo_graph_k2)


@pytest.fixture
def single_bit_samples():
    """16 muestras de 2 bits, label = +1 si bit₀ = 1."""
    return synth_dataset(2, SynthRule.SINGLE_BIT, 16, seed=0)


@pytest.fixture
def hand_samples():
    """Las cuatro combinaciones de 2 bits etiquetadas por bit₀."""
    return [
        Sample(bits=(0, 0), label=-1),
        Sample(bits=(0, 1), label=-1),
        Sample(bits=(1, 0), label=1),
        Sample(bits=(1, 1), label=1),
    ]
