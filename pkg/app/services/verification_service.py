"""
Verification service - Suite de invariantes del sistema.

Cada check es independiente: calcula el error máximo contra su referencia,
lo compara con la tolerancia y registra una línea de log. Un check que lanza
una excepción cuenta como fallido (con el mensaje en `detail`).
"""

import logging
import math
import time
from typing import Callable, List, Tuple

import numpy as np
from pydantic import BaseModel, Field

from app.core.classifier import (
    EXPECTATION_OUTPUT,
    build_demo_graph,
    classifier_parameter_names,
    oracle_expectation,
)
from app.core.exceptions import OneWireOutError
from app.core.hybrid import (
    GraphBuilder,
    GraphEvaluator,
    QuantumBox,
    SmoothPrim,
    eval_box,
    jacobian_fd,
    mu,
    epsilon,
    prob0_readout,
)
from app.core.linalg import as_cmat, qubits_from_dim
from app.core.ptm import (
    identity_ptm,
    is_trace_preserving,
    pauli_vector,
    ptm_action,
    ptm_apply,
    ptm_direct,
    ptm_of_term,
    ptm_tensor,
    superop_to_ptm,
)
from app.core.quantum import interp_cpm, is_psd, simulate_density, superop_compose, superop_tensor
from app.core.random_terms import RandomTermGenerator
from app.core.reference import (
    cnot_ptm,
    hadamard_ptm,
    rx_ptm,
    rz_ptm,
    x_state_vector,
    z_state_vector,
)
from app.core.zx import (
    Gen,
    Par,
    PauliBasis,
    Phase,
    Seq,
    build_cnot,
    build_permutation,
    build_phase_gadget,
    hadamard,
    ids,
    par,
    scalar,
    seq,
    x_spider,
    z_spider,
)

logger = logging.getLogger(__name__)

SYMBOLIC_ANGLES = (0.0, math.pi / 3, math.pi / 2, 1.234)
PROB1_PTM_ROW = np.array([0.5, 0.0, 0.0, -0.5])


class CheckResult(BaseModel):
    """Resultado de un check de la suite."""
    name: str
    passed: bool
    max_error: float = Field(default=0.0, description="Máximo error absoluto observado")
    tolerance: float
    cases: int = Field(default=0, description="Instancias evaluadas")
    detail: str = ""
    runtime_seconds: float = 0.0


class VerificationReport(BaseModel):
    seed: int
    checks: List[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failed(self) -> List[str]:
        return [c.name for c in self.checks if not c.passed]


def _err(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        return math.inf
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def _random_pauli_state(rng: np.random.Generator, n: int) -> np.ndarray:
    """Vector de Pauli de un estado puro aleatorio de n qubits."""
    psi = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    psi /= np.linalg.norm(psi)
    return pauli_vector(np.outer(psi, psi.conj()))


def _phase_state(alpha: float, spider) -> Par:
    return Par(Gen(scalar(1 / math.sqrt(2))), Gen(spider(0, 1, alpha)))


class VerificationService:
    """
    Ejecuta la suite de invariantes.

    Args:
        seed: Seed de todos los casos aleatorios
        corpus_size: Términos aleatorios para los checks de oráculo y functor
        instances: Instancias aleatorias para coherencias y corolario

    Example:
        >>> report = VerificationService(seed=0).run()
        >>> report.passed
        True
    """

    def __init__(self, seed: int = 0, corpus_size: int = 100, instances: int = 50):
        self.seed = seed
        self.corpus_size = corpus_size
        self.instances = instances

    def checks(self) -> List[Tuple[str, float, Callable[[np.random.Generator], Tuple[float, int]]]]:
        return [
            ("reference_matrices", 1e-12, self.check_reference_matrices),
            ("oracle_equivalence", 1e-9, self.check_oracle_equivalence),
            ("functor_laws", 1e-10, self.check_functor_laws),
            ("coherence_maps", 1e-10, self.check_coherence_maps),
            ("monoidal_product", 1e-10, self.check_monoidal_product),
            ("physicality", 1e-10, self.check_physicality),
            ("one_wire_out", 0.0, self.check_one_wire_out),
            ("gradient", 1e-6, self.check_gradient),
            ("demo_oracle", 1e-9, self.check_demo_oracle),
        ]

    def run(self) -> VerificationReport:
        report = VerificationReport(seed=self.seed)
        for i, (name, tol, fn) in enumerate(self.checks()):
            rng = np.random.default_rng([self.seed, i])
            start = time.perf_counter()
            try:
                max_error, cases = fn(rng)
                passed = max_error <= tol
                detail = "" if passed else f"error {max_error:.3e} > {tol:.0e}"
            except Exception as e:
                max_error, cases, passed = math.inf, 0, False
                detail = f"{type(e).__name__}: {e}"
            result = CheckResult(
                name=name, passed=passed, max_error=max_error, tolerance=tol,
                cases=cases, detail=detail, runtime_seconds=time.perf_counter() - start
            )
            report.checks.append(result)
            status = "OK" if passed else "FAIL"
            line = f"[{status}] {name}: {cases} casos, error máx {max_error:.2e} (tol {tol:.0e})"
            if passed:
                logger.info(line)
            else:
                logger.error(f"{line} {detail}")
        return report

    # ------------------------------------------------------------------
    # Checks (cada uno retorna (error máximo, casos))
    # ------------------------------------------------------------------

    def check_reference_matrices(self, rng: np.random.Generator) -> Tuple[float, int]:
        """Estados de fase, R_Z, R_X, Hadamard y CNOT contra su forma cerrada."""
        errors = []
        for alpha in SYMBOLIC_ANGLES:
            errors.append(_err(ptm_of_term(_phase_state(alpha, z_spider)).mat[:, 0], z_state_vector(alpha)))
            errors.append(_err(ptm_of_term(_phase_state(alpha, x_spider)).mat[:, 0], x_state_vector(alpha)))
            errors.append(_err(ptm_of_term(build_phase_gadget(PauliBasis.Z, [0], 1, alpha)).mat, rz_ptm(alpha)))
            errors.append(_err(ptm_of_term(build_phase_gadget(PauliBasis.X, [0], 1, alpha)).mat, rx_ptm(alpha)))
        errors.append(_err(ptm_of_term(Gen(hadamard())).mat, hadamard_ptm()))
        errors.append(_err(ptm_of_term(build_cnot()).mat, cnot_ptm()))
        return max(errors), len(errors)

    def check_oracle_equivalence(self, rng: np.random.Generator) -> Tuple[float, int]:
        """ptm_of_term = ptm_direct(interp_cpm) sobre el corpus aleatorio."""
        gen = RandomTermGenerator(seed=int(rng.integers(2 ** 31)))
        worst = 0.0
        for t in gen.corpus(self.corpus_size):
            worst = max(worst, _err(ptm_of_term(t).mat, ptm_direct(interp_cpm(t)).mat))
        return worst, self.corpus_size

    def check_functor_laws(self, rng: np.random.Generator) -> Tuple[float, int]:
        """
        Seq ↦ producto y Par ↦ Kronecker contra el oráculo, y fusión de boxes.

        La fusión compara un box con Seq(a, b) contra dos boxes encadenados.
        """
        gen = RandomTermGenerator(seed=int(rng.integers(2 ** 31)))
        worst = 0.0
        for _ in range(self.corpus_size):
            a = gen.term()
            b = gen.term(n_in=a.n_out)
            composed = superop_to_ptm(superop_compose(interp_cpm(b), interp_cpm(a))).mat
            worst = max(worst, _err(ptm_of_term(Seq(a, b)).mat, composed))
            # Structured path (fused box) vs dense path
            v = _random_pauli_state(rng, a.n_in)
            fused = eval_box(QuantumBox(term=Seq(a, b), state_qubits=[a.n_in], out_qubits=b.n_out), [], [v])
            chained = ptm_action(b, ptm_action(a, v))
            worst = max(worst, _err(fused, chained))
            worst = max(worst, _err(fused, ptm_apply(ptm_of_term(Seq(a, b)), v)))
        return worst, self.corpus_size

    def check_coherence_maps(self, rng: np.random.Generator) -> Tuple[float, int]:
        """Asociatividad, unitalidad y naturalidad de μ y ε."""
        gen = RandomTermGenerator(seed=int(rng.integers(2 ** 31)), max_qubits=2)
        worst = 0.0
        for _ in range(self.instances):
            u, v, w = (_random_pauli_state(rng, int(rng.integers(0, 3))) for _ in range(3))
            worst = max(worst, _err(mu(mu(u, v), w), mu(u, mu(v, w))))
            if not (np.array_equal(mu(epsilon(), v), v) and np.array_equal(mu(v, epsilon()), v)):
                return math.inf, self.instances
            t = gen.term()
            p = ptm_of_term(t)
            x = _random_pauli_state(rng, t.n_in)
            n_u = qubits_from_dim(u.size, 4)
            left = ptm_apply(ptm_tensor(identity_ptm(n_u), p), mu(u, x))
            worst = max(worst, _err(left, mu(u, ptm_apply(p, x))))
            right = ptm_apply(ptm_tensor(p, identity_ptm(n_u)), mu(x, u))
            worst = max(worst, _err(right, mu(ptm_apply(p, x), u)))
        return worst, self.instances

    def check_monoidal_product(self, rng: np.random.Generator) -> Tuple[float, int]:
        """⟦D₁⊗D₂⟧ = ⟦D₁⟧⊗⟦D₂⟧ como superoperador y como PTM."""
        gen = RandomTermGenerator(seed=int(rng.integers(2 ** 31)))
        worst = 0.0
        for _ in range(self.instances):
            a, b = gen.pair()
            t = Par(a, b)
            worst = max(worst, _err(interp_cpm(t).mat, superop_tensor(interp_cpm(a), interp_cpm(b)).mat))
            worst = max(worst, _err(
                ptm_direct(interp_cpm(t)).mat,
                ptm_tensor(ptm_direct(interp_cpm(a)), ptm_direct(interp_cpm(b))).mat
            ))
        return worst, self.instances

    def check_physicality(self, rng: np.random.Generator) -> Tuple[float, int]:
        """Firma CPTP de los builders unitarios, probabilidades y positividad."""
        theta = float(rng.uniform(-math.pi, math.pi))
        builders = [
            build_cnot(),
            build_phase_gadget(PauliBasis.Z, [0, 2], 3, theta),
            build_phase_gadget([PauliBasis.Z, PauliBasis.X], [0, 1], 2, theta),
            build_permutation([2, 0, 1]),
            Gen(hadamard()),
            seq(build_cnot(), par(Gen(hadamard()), build_phase_gadget(PauliBasis.X, [0], 1, theta))),
        ]
        worst = 0.0
        for t in builders:
            if not is_trace_preserving(ptm_of_term(t)):
                return math.inf, len(builders)
        cases = len(builders)
        for _ in range(self.instances):
            n = int(rng.integers(1, 4))
            which = int(rng.integers(n))
            v = _random_pauli_state(rng, n)
            p0 = float(ptm_apply(prob0_readout(n, which), v)[0])
            row1 = np.ones(1)
            for q in range(n):
                row1 = np.kron(row1, PROB1_PTM_ROW if q == which else np.array([1.0, 0, 0, 0]))
            p1 = float(row1 @ v)
            worst = max(worst, abs(p0 + p1 - 1.0), max(0.0, -p0), max(0.0, p0 - 1.0))
            cases += 1
        gen = RandomTermGenerator(seed=int(rng.integers(2 ** 31)), max_qubits=3)
        for _ in range(self.instances):
            t = gen.term(n_in=0)
            rho = simulate_density(t)
            if t.n_out and not is_psd(as_cmat(rho)):
                return math.inf, cases
            cases += 1
        return worst, cases

    def check_one_wire_out(self, rng: np.random.Generator) -> Tuple[float, int]:
        """Un grafo que divide la salida de un box debe ser rechazado."""
        box = QuantumBox(term=ids(2), state_qubits=[2], out_qubits=2)
        b = GraphBuilder()
        x0, x1 = b.input("x0"), b.input("x1")
        state, _ = b.mu_tree([b.bit_encoder(x0), b.bit_encoder(x1)], [1, 1])
        out = b.box(box, states=[state])
        b.output(b.smooth(SmoothPrim.proj(0, 4), out))
        try:
            b.build()
        except OneWireOutError:
            return 0.0, 1
        return math.inf, 1

    def check_gradient(self, rng: np.random.Generator) -> Tuple[float, int]:
        """Derivada FD de ⟨X⟩ tras R_Z(θ) sobre |+⟩ contra -sin θ."""
        graph = rz_expectation_graph()
        evaluator = GraphEvaluator(graph)
        worst = 0.0
        thetas = rng.uniform(-math.pi, math.pi, size=10)
        for theta in thetas:
            jac = jacobian_fd(evaluator, [], [theta], h=1e-4)
            worst = max(worst, abs(jac[0, 0] + math.sin(theta)))
        return worst, len(thetas)

    def check_demo_oracle(self, rng: np.random.Generator) -> Tuple[float, int]:
        """Grafo demo (k=4) contra simulación de densidad en 5 puntos."""
        k, layers = 4, 1
        evaluator = GraphEvaluator(build_demo_graph(k, layers))
        n_params = len(classifier_parameter_names(k, layers))
        worst = 0.0
        for _ in range(5):
            bits = [int(b) for b in rng.integers(0, 2, size=k)]
            params = rng.uniform(-math.pi, math.pi, size=n_params)
            out = evaluator.evaluate(bits + [1.0], params)
            worst = max(worst, abs(out[EXPECTATION_OUTPUT] - oracle_expectation(k, layers, bits, params)))
        return worst, 5


def rz_expectation_graph():
    """
    Grafo sin inputs: |+⟩ → R_Z(θ) → ⟨X⟩ = cos θ.

    La salida del box (ancho 4) pasa por un Linear que extrae la componente X.
    """
    plus = Par(Gen(scalar(1 / math.sqrt(2))), Gen(z_spider(0, 1, 0.0)))
    term = seq(plus, build_phase_gadget(PauliBasis.Z, [0], 1, Phase.param("theta")))
    box = QuantumBox(term=term, param_wires=["theta"], state_qubits=[], out_qubits=1)
    b = GraphBuilder()
    theta = b.param("theta")
    out = b.box(box, params=[theta])
    b.output(b.smooth(SmoothPrim.linear(np.array([[0.0, 1.0, 0.0, 0.0]])), out))
    return b.build()
