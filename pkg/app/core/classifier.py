"""
Clasificador cuántico híbrido sobre strings binarios.

Circuito (k qubits de datos + 1 qubit de readout, índice k):
1. Readout preparado en |0⟩ dentro del box
2. Por capa: gadgets ZX (Z en el dato i, X en el readout) y luego gadgets XX,
   cada uno con su propio θ (theta_l{l}_zx{i}, theta_l{l}_xx{i})
3. Cambio de base a Y: X-gadget con fase π/2 (R_X(π/2)) en el readout
4. Efecto ⟨0| en el readout y discard en los datos

El box entrega Prob(0) como un único wire escalar; fuera del box se calcula
la expectativa 2p - 1 = ⟨σ_Y⟩ y la pérdida cuadrática contra el label.
"""

import logging
import math
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

from app.core.config import TrainConfig
from app.core.dataset import Sample, ingest_idx, read_samples_csv, synth_dataset
from app.core.exceptions import DatasetError
from app.core.hybrid import (
    GraphBuilder,
    GraphEvaluator,
    HybridGraph,
    PrimKind,
    QuantumBox,
    SmoothPrim,
    expectation_from_prob,
    jacobian_fd,
)
from app.core.linalg import partial_trace
from app.core.quantum import simulate_density
from app.core.zx import (
    PauliBasis,
    Phase,
    ZxTerm,
    build_basis_state,
    build_phase_gadget,
    build_readout_effect,
    ids,
    par,
    seq,
    substitute,
)

logger = logging.getLogger(__name__)

LOSS_OUTPUT = 0
EXPECTATION_OUTPUT = 1


# ============================================================================
# Circuit and graph
# ============================================================================

def classifier_parameter_names(k: int, layers: int) -> List[str]:
    """Nombres de θ en el orden de los wires de parámetro del box."""
    names = []
    for layer in range(layers):
        names.extend(f"theta_l{layer}_zx{i}" for i in range(k))
        names.extend(f"theta_l{layer}_xx{i}" for i in range(k))
    return names


def build_y_basis_change(n: int, which: int) -> ZxTerm:
    """
    R_X(π/2) en el qubit `which`: lleva ⟨σ_Y⟩ a ⟨σ_Z⟩.

    Con esta elección el autoestado +Y queda en el outcome 0.
    """
    return build_phase_gadget(PauliBasis.X, [which], n, math.pi / 2)


def build_classifier_unitary(k: int, layers: int) -> ZxTerm:
    """
    Parte unitaria (k+1 → k+1): gadgets ZX y XX por capa y el cambio a base Y.

    Raises:
        ValueError: k < 1 o layers < 1
    """
    if k < 1:
        raise ValueError(f"k debe ser >= 1, got {k}")
    if layers < 1:
        raise ValueError(f"layers debe ser >= 1, got {layers}")
    n = k + 1
    readout = k
    steps: List[ZxTerm] = []
    for layer in range(layers):
        for i in range(k):
            steps.append(build_phase_gadget(
                [PauliBasis.Z, PauliBasis.X], [i, readout], n,
                Phase.param(f"theta_l{layer}_zx{i}")
            ))
        for i in range(k):
            steps.append(build_phase_gadget(
                PauliBasis.X, [i, readout], n, Phase.param(f"theta_l{layer}_xx{i}")
            ))
    steps.append(build_y_basis_change(n, readout))
    return seq(*steps)


def build_classifier_circuit(k: int, layers: int) -> ZxTerm:
    """Término k → 0 del box: prep |0⟩ del readout, parte unitaria y Prob(⟨0|)."""
    return seq(
        par(ids(k), build_basis_state([0])),
        build_classifier_unitary(k, layers),
        build_readout_effect(k + 1, k),
    )


def oracle_expectation(k: int, layers: int, bits: Sequence[int], params: Sequence[float]) -> float:
    """
    ⟨σ_Y⟩ del readout calculado con el oráculo de matrices densidad.

    Prepara |bits, 0⟩, aplica la parte unitaria y traza los datos; no usa
    el functor G, por lo que sirve para verificar la evaluación del grafo.
    """
    binding = dict(zip(classifier_parameter_names(k, layers), (float(p) for p in params)))
    circuit = seq(
        build_basis_state(list(bits) + [0]),
        substitute(build_classifier_unitary(k, layers), binding),
    )
    rho = simulate_density(circuit)
    reduced = partial_trace(rho, [k], k + 1)
    return expectation_from_prob(float(np.real(reduced[0, 0])))


def build_demo_graph(k: int, layers: int) -> HybridGraph:
    """
    Grafo completo del clasificador.

    Inputs: x0..x{k-1} (bits) e y (label ±1). Params: θ de cada gadget.
    Outputs: [loss, expectation].
    """
    term = build_classifier_circuit(k, layers)
    names = classifier_parameter_names(k, layers)
    box = QuantumBox(term=term, param_wires=names, state_qubits=[k], out_qubits=0)

    b = GraphBuilder()
    xs = [b.input(f"x{i}") for i in range(k)]
    y = b.input("y")
    thetas = [b.param(name) for name in names]

    encoded = [b.bit_encoder(x) for x in xs]
    state, _ = b.mu_tree(encoded, [1] * k)
    prob = b.box(box, states=[state], params=thetas, id="classifier")

    scaled = b.smooth(SmoothPrim.scale(2.0), prob, id="two_p")
    minus_one = b.const([-1.0], id="minus_one")
    expectation = b.smooth(SmoothPrim.of(PrimKind.ADD), scaled, minus_one, id="expectation")

    loss = b.smooth(SmoothPrim.of(PrimKind.SQUARED_LOSS), y, expectation, id="loss")

    b.output(loss)
    b.output(expectation)
    return b.build()


def sample_inputs(sample: Sample) -> np.ndarray:
    """Vector de inputs del grafo demo: bits y luego label."""
    return np.array(list(sample.bits) + [sample.label], dtype=float)


def predict(expectation: float) -> int:
    """Clase predicha: e >= 0 → +1."""
    return 1 if expectation >= 0 else -1


def evaluate_dataset(
    graph: Union[HybridGraph, GraphEvaluator],
    samples: Sequence[Sample],
    params: Sequence[float]
) -> Tuple[float, float]:
    """
    Pérdida media y accuracy sobre el dataset.

    Raises:
        DatasetError: Dataset vacío
    """
    if not samples:
        raise DatasetError("dataset vacío")
    evaluator = graph if isinstance(graph, GraphEvaluator) else GraphEvaluator(graph)
    losses = []
    hits = 0
    for s in samples:
        out = evaluator.evaluate(sample_inputs(s), params)
        losses.append(out[LOSS_OUTPUT])
        hits += predict(out[EXPECTATION_OUTPUT]) == s.label
    return float(np.mean(losses)), hits / len(samples)


# ============================================================================
# Training
# ============================================================================

class IterationMetrics(BaseModel):
    """Una línea del archivo de métricas JSONL."""
    iter: int
    loss: float
    accuracy: float


class TrainReport(BaseModel):
    """Resultado de un entrenamiento."""
    k: int = Field(..., description="Bits por muestra")
    layers: int
    n_samples: int
    seed: int
    history: List[IterationMetrics] = Field(default_factory=list)
    params: Dict[str, float] = Field(default_factory=dict, description="θ finales por nombre")
    final_loss: float
    final_accuracy: float
    iterations_run: int
    stopped_early: bool = False
    runtime_seconds: float = 0.0


def load_samples(config: TrainConfig) -> List[Sample]:
    """Dataset según la precedencia CSV > IDX > sintético."""
    if config.dataset:
        samples = read_samples_csv(Path(config.dataset))
        source = f"CSV {config.dataset}"
    elif config.idx is not None:
        spec = config.idx
        samples = ingest_idx(
            spec.images, spec.labels, classes=spec.classes,
            threshold=spec.threshold, side=spec.side, limit=spec.limit
        )
        source = f"IDX {spec.images}"
    else:
        spec = config.synth
        samples = synth_dataset(spec.bits, spec.rule, spec.n, seed=config.seed)
        source = f"sintético {spec.rule.value} k={spec.bits}"
    if not samples:
        raise DatasetError("dataset vacío")
    logger.info(f"Dataset: {len(samples)} muestras ({source})")
    return samples


def loss_gradient(
    evaluator: GraphEvaluator,
    samples: Sequence[Sample],
    params: np.ndarray,
    h: float
) -> np.ndarray:
    """Gradiente full-batch de la pérdida media (fila LOSS de cada Jacobiano)."""
    grad = np.zeros_like(params)
    for s in samples:
        grad += jacobian_fd(evaluator, sample_inputs(s), params, h)[LOSS_OUTPUT]
    return grad / len(samples)


def train(
    config: TrainConfig,
    samples: Optional[Sequence[Sample]] = None,
    on_iteration: Optional[Callable[[IterationMetrics], None]] = None
) -> TrainReport:
    """
    Descenso de gradiente full-batch con gradientes por diferencias finitas.

    θ inicial uniforme en (-π, π) desde `config.seed`. Las métricas de cada
    iteración se calculan antes de la actualización; con `stop_at_accuracy`
    se detiene en la primera iteración que alcanza esa accuracy.

    Args:
        config: Configuración
        samples: Dataset explícito (si None, se carga según config)
        on_iteration: Callback por iteración (ej: escribir JSONL)
    """
    start = time.perf_counter()
    samples = list(samples) if samples is not None else load_samples(config)
    if not samples:
        raise DatasetError("dataset vacío")
    k = samples[0].k

    graph = build_demo_graph(k, config.layers)
    evaluator = GraphEvaluator(graph)
    rng = np.random.default_rng(config.seed)
    theta = rng.uniform(-np.pi, np.pi, size=len(graph.params))
    logger.info(
        f"Entrenando: k={k}, layers={config.layers}, {len(theta)} parámetros, "
        f"{len(samples)} muestras, lr={config.learning_rate}"
    )

    history: List[IterationMetrics] = []
    stopped_early = False
    for it in range(config.iterations):
        loss, accuracy = evaluate_dataset(evaluator, samples, theta)
        metrics = IterationMetrics(iter=it, loss=loss, accuracy=accuracy)
        history.append(metrics)
        if on_iteration is not None:
            on_iteration(metrics)
        if it % config.log_every == 0:
            logger.info(f"iter {it}: loss={loss:.6f} accuracy={accuracy:.3f}")
        if not np.isfinite(loss):
            logger.warning(f"iter {it}: pérdida no finita, se detiene el entrenamiento")
            break
        if config.stop_at_accuracy is not None and accuracy >= config.stop_at_accuracy:
            stopped_early = True
            logger.info(f"iter {it}: accuracy {accuracy:.3f} >= {config.stop_at_accuracy}, fin")
            break
        theta = theta - config.learning_rate * loss_gradient(evaluator, samples, theta, config.fd_step)

    final_loss, final_accuracy = evaluate_dataset(evaluator, samples, theta)
    runtime = time.perf_counter() - start
    logger.info(
        f"Entrenamiento terminado: {len(history)} iteraciones, loss={final_loss:.6f}, "
        f"accuracy={final_accuracy:.3f} ({runtime:.1f}s)"
    )
    return TrainReport(
        k=k,
        layers=config.layers,
        n_samples=len(samples),
        seed=config.seed,
        history=history,
        params=dict(zip(graph.params, theta.tolist())),
        final_loss=final_loss,
        final_accuracy=final_accuracy,
        iterations_run=len(history),
        stopped_early=stopped_early,
        runtime_seconds=runtime,
    )
