"""
Hybrid service - Orquestación de diagramas, grafos y entrenamiento.

Lo usan tanto el CLI como la API HTTP; no guarda estado salvo un cache de
evaluadores por grafo.
"""

import hashlib
import logging
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np

from app.core.classifier import IterationMetrics, TrainReport, build_demo_graph, train
from app.core.config import TrainConfig
from app.core.dataset import Sample, SynthRule, ingest_idx, synth_dataset
from app.core.hybrid import GraphEvaluator, HybridGraph, graph_to_json, jacobian_fd
from app.core.ptm import Ptm, ptm_action, ptm_of_term
from app.core.serialization import parse_diagram
from app.core.zx import ZxTerm, free_parameters

logger = logging.getLogger(__name__)

# Términos con interfaces más anchas se evalúan por ptm_action
DENSE_PTM_MAX_QUBITS = 4


class HybridService:
    """
    Servicio de alto nivel sobre el kernel.

    Responsabilidades:
    - PTM de diagramas (denso o estructurado según el tamaño)
    - Evaluación de grafos con evaluadores cacheados
    - Grafo demo, datasets y entrenamiento
    """

    def __init__(self, max_cached_graphs: int = 32):
        self._evaluators: Dict[str, GraphEvaluator] = {}
        self.max_cached_graphs = max_cached_graphs

    # ------------------------------------------------------------------
    # Diagrams
    # ------------------------------------------------------------------

    def compute_ptm(
        self,
        diagram: Union[str, ZxTerm],
        binding: Optional[Mapping[str, float]] = None
    ) -> Ptm:
        """
        PTM de un diagrama (texto JSON o término).

        Raises:
            DiagramSyntaxError, ArityError: Diagrama inválido
            UnboundParameterError: Parámetros sin valor en `binding`
        """
        term = parse_diagram(diagram) if isinstance(diagram, str) else diagram
        binding = dict(binding or {})
        extra = set(binding).difference(free_parameters(term))
        if extra:
            logger.warning(f"Parámetros sin uso en el diagrama: {sorted(extra)}")
        if max(term.n_in, term.n_out) <= DENSE_PTM_MAX_QUBITS:
            ptm = ptm_of_term(term, binding)
        else:
            mat = ptm_action(term, np.eye(4 ** term.n_in), binding)
            ptm = Ptm(term.n_in, term.n_out, mat)
        logger.info(f"PTM {term.n_in}→{term.n_out} calculada ({ptm.mat.shape[0]}x{ptm.mat.shape[1]})")
        return ptm

    # ------------------------------------------------------------------
    # Graphs
    # ------------------------------------------------------------------

    def evaluator_for(self, graph: HybridGraph) -> GraphEvaluator:
        """Evaluador cacheado por el contenido serializado del grafo."""
        key = hashlib.sha256(graph_to_json(graph).encode("utf-8")).hexdigest()
        evaluator = self._evaluators.get(key)
        if evaluator is None:
            if len(self._evaluators) >= self.max_cached_graphs:
                self._evaluators.clear()
            evaluator = GraphEvaluator(graph)
            self._evaluators[key] = evaluator
        return evaluator

    def evaluate_graph(
        self,
        graph: HybridGraph,
        inputs: Sequence[float],
        params: Sequence[float]
    ) -> np.ndarray:
        return self.evaluator_for(graph).evaluate(inputs, params)

    def graph_jacobian(
        self,
        graph: HybridGraph,
        inputs: Sequence[float],
        params: Sequence[float],
        h: float = 1e-4
    ) -> np.ndarray:
        return jacobian_fd(self.evaluator_for(graph), inputs, params, h)

    def demo_graph(self, k: int, layers: int = 1) -> HybridGraph:
        logger.info(f"Grafo demo: k={k}, layers={layers}")
        return build_demo_graph(k, layers)

    # ------------------------------------------------------------------
    # Datasets and training
    # ------------------------------------------------------------------

    def synth_samples(self, k: int, rule: Union[SynthRule, str], n: int, seed: int = 0) -> List[Sample]:
        return synth_dataset(k, rule, n, seed=seed)

    def idx_samples(self, images: str, labels: str, **kwargs) -> List[Sample]:
        return ingest_idx(images, labels, **kwargs)

    def train(
        self,
        config: TrainConfig,
        samples: Optional[Sequence[Sample]] = None,
        on_iteration: Optional[Callable[[IterationMetrics], None]] = None
    ) -> TrainReport:
        return train(config, samples=samples, on_iteration=on_iteration)


# Singleton instance
_hybrid_service = HybridService()


def get_hybrid_service() -> HybridService:
    """
    Dependency injection para HybridService.

    En FastAPI se usa como:
    def endpoint(service: HybridService = Depends(get_hybrid_service)):
        ...
    """
    return _hybrid_service
