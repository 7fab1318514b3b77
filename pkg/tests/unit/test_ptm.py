"""
Unit tests para la Pauli transfer matrix.

Testing strategy:
- Matrices en forma cerrada (estados de fase, R_Z, R_X, Hadamard, CNOT)
- Equivalencia con el oráculo (ptm_direct sobre interp_cpm)
- Homomorfismo de composición y producto tensorial
- Evaluación estructurada (PtmProgram) contra la PTM densa
"""

import math

import numpy as np
import pytest

from app.core.exceptions import ImaginaryResidueError, ShapeError, UnboundParameterError
from app.core.quantum import KrausMap, SuperOp, interp_cpm, kraus_to_superop
from app.core.ptm import (
    Ptm,
    PtmProgram,
    density_from_pauli,
    identity_ptm,
    is_trace_preserving,
    pauli_vector,
    ptm_action,
    ptm_apply,
    ptm_compose,
    ptm_direct,
    ptm_of_term,
    ptm_tensor,
    superop_to_ptm,
)
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
    build_basis_state,
    build_cnot,
    build_phase_gadget,
    discard,
    hadamard,
    identity,
    scalar,
    x_spider,
    z_spider,
)

ANGLES = [0.0, math.pi / 3, math.pi / 2, 1.234]
INV_SQRT2 = 1 / math.sqrt(2)


def rz_unitary(alpha):
    return np.diag([np.exp(-0.5j * alpha), np.exp(0.5j * alpha)])


class TestReferenceMatrices:
    """Tests que reproducen las matrices en forma cerrada."""

    @pytest.mark.parametrize("alpha", ANGLES)
    def test_rz_direct(self, alpha):
        """Test ptm_direct de la conjugación por R_Z."""
        p = ptm_direct(KrausMap.from_operators([rz_unitary(alpha)]))
        assert np.allclose(p.mat, rz_ptm(alpha), atol=1e-12)

    @pytest.mark.parametrize("alpha", ANGLES)
    def test_rz_gadget(self, alpha):
        """Test que el gadget Z de un qubit tiene la PTM de R_Z."""
        p = ptm_of_term(build_phase_gadget(PauliBasis.Z, [0], 1, alpha))
        assert np.allclose(p.mat, rz_ptm(alpha), atol=1e-12)

    @pytest.mark.parametrize("alpha", ANGLES)
    def test_rx_gadget(self, alpha):
        """Test que el gadget X de un qubit tiene la PTM de R_X."""
        p = ptm_of_term(build_phase_gadget(PauliBasis.X, [0], 1, alpha))
        assert np.allclose(p.mat, rx_ptm(alpha), atol=1e-12)

    def test_hadamard(self):
        """Test PTM del Hadamard (directa y por término)."""
        h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
        assert np.allclose(ptm_direct(KrausMap.from_operators([h])).mat, hadamard_ptm(), atol=1e-12)
        assert np.allclose(ptm_of_term(Gen(hadamard())).mat, hadamard_ptm(), atol=1e-12)

    def test_cnot(self):
        """Test PTM 16x16 del CNOT construido con spiders."""
        assert np.allclose(ptm_of_term(build_cnot()).mat, cnot_ptm(), atol=1e-12)

    def test_cnot_blocks(self):
        """Test que la matriz de referencia es una permutación con signos."""
        m = cnot_ptm()
        assert np.allclose(m @ m.T, np.eye(16))
        assert np.allclose(m @ m, np.eye(16))

    @pytest.mark.parametrize("alpha", ANGLES)
    def test_phase_states(self, alpha):
        """Test vectores de Pauli de los estados de fase normalizados."""
        z_state = Par(Gen(scalar(INV_SQRT2)), Gen(z_spider(0, 1, alpha)))
        x_state = Par(Gen(scalar(INV_SQRT2)), Gen(x_spider(0, 1, alpha)))
        assert np.allclose(ptm_of_term(z_state).mat.reshape(-1), z_state_vector(alpha), atol=1e-12)
        assert np.allclose(ptm_of_term(x_state).mat.reshape(-1), x_state_vector(alpha), atol=1e-12)

    def test_identity_channel(self):
        """Test canal identidad → I."""
        p = ptm_direct(SuperOp.identity(2))
        assert np.allclose(p.mat, np.eye(16))

    def test_basis_state_one(self):
        """Test |1⟩ → (1, 0, 0, -1)."""
        assert np.allclose(ptm_of_term(build_basis_state([1])).mat.reshape(-1), [1, 0, 0, -1], atol=1e-12)


class TestPtmOperations:
    """Tests para ptm_apply, ptm_compose y ptm_tensor."""

    def test_apply_rz(self):
        """Test R_Z(π/2) aplicado a (1,1,0,0) → (1,0,1,0)."""
        out = ptm_apply(Ptm.from_matrix(rz_ptm(math.pi / 2)), np.array([1.0, 1.0, 0.0, 0.0]))
        assert np.allclose(out, [1, 0, 1, 0])

    def test_apply_identity(self):
        v = np.array([1.0, 0.2, -0.3, 0.4])
        assert np.array_equal(ptm_apply(identity_ptm(1), v), v)

    def test_apply_discard(self):
        """Test que Discard de un estado con 1 adelante da 1."""
        p = ptm_of_term(Gen(discard()))
        assert np.array_equal(p.mat, [[1, 0, 0, 0]])
        assert ptm_apply(p, np.array([1.0, 0.3, 0.1, -0.5]))[0] == pytest.approx(1.0)

    def test_apply_batch(self):
        """Test que una matriz aplica columna por columna."""
        v = np.random.default_rng(0).normal(size=(4, 5))
        out = ptm_apply(Ptm.from_matrix(hadamard_ptm()), v)
        assert out.shape == (4, 5)

    def test_apply_length_mismatch(self):
        with pytest.raises(ShapeError):
            ptm_apply(identity_ptm(1), np.ones(16))

    def test_hadamard_involution(self):
        """Test H·H = I en PTMs."""
        h = Ptm.from_matrix(hadamard_ptm())
        assert np.allclose(ptm_compose(h, h).mat, np.eye(4))

    def test_tensor_matches_par(self):
        """Test ptm_tensor(I, R_Z) = ptm_of_term(Par(Id, gadget))."""
        alpha = 0.77
        gadget = build_phase_gadget(PauliBasis.Z, [0], 1, alpha)
        expected = ptm_tensor(identity_ptm(1), ptm_of_term(gadget))
        assert np.allclose(ptm_of_term(Par(Gen(identity()), gadget)).mat, expected.mat, atol=1e-12)

    def test_compose_identity(self):
        p = Ptm.from_matrix(rx_ptm(0.3))
        assert np.array_equal(ptm_compose(p, identity_ptm(1)).mat, p.mat)

    def test_compose_mismatch(self):
        with pytest.raises(ShapeError):
            ptm_compose(identity_ptm(1), identity_ptm(2))

    def test_shape_validation(self):
        with pytest.raises(ShapeError):
            Ptm(1, 1, np.eye(3))


class TestOracleEquivalence:
    """Tests que comparan la PTM compositiva contra el oráculo."""

    def test_corpus(self, small_corpus):
        """Test ptm_of_term(t) = ptm_direct(interp_cpm(t))."""
        for t in small_corpus:
            expected = ptm_direct(interp_cpm(t))
            assert np.allclose(ptm_of_term(t).mat, expected.mat, atol=1e-9)

    def test_change_of_basis_matches_direct(self, small_corpus):
        """Test superop_to_ptm = ptm_direct sobre el mismo superoperador."""
        for t in small_corpus[:10]:
            s = interp_cpm(t)
            assert np.allclose(superop_to_ptm(s).mat, ptm_direct(s).mat, atol=1e-10)

    def test_kraus_matches_superop(self, rng):
        """Test que ptm_direct da lo mismo desde Kraus o desde superoperador."""
        ops = [rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(2)]
        k = KrausMap.from_operators(ops)
        assert np.allclose(ptm_direct(k).mat, ptm_direct(kraus_to_superop(k)).mat, atol=1e-10)

    def test_composition_homomorphism(self, term_generator):
        """Test G(Seq(a, b)) = G(b)·G(a) y G(Par(a, b)) = G(a)⊗G(b)."""
        for _ in range(10):
            a = term_generator.term(n_in=2, depth=3)
            b = term_generator.leaf(a.n_out, max_out=3)
            assert np.allclose(
                ptm_of_term(Seq(a, b)).mat,
                ptm_compose(ptm_of_term(b), ptm_of_term(a)).mat,
                atol=1e-10,
            )
            left, right = term_generator.pair()
            assert np.allclose(
                ptm_of_term(Par(left, right)).mat,
                ptm_tensor(ptm_of_term(left), ptm_of_term(right)).mat,
                atol=1e-10,
            )

    def test_trace_preserving_unitaries(self):
        """Test primera fila (1, 0, ..., 0) en circuitos unitarios."""
        for t in (build_cnot(), build_phase_gadget(PauliBasis.X, [0, 1], 2, 0.5)):
            assert is_trace_preserving(ptm_of_term(t))
        assert not is_trace_preserving(ptm_of_term(Par(Gen(scalar(2.0)), Gen(identity()))))

    def test_imaginary_residue(self):
        """Test que un mapa que no preserva hermiticidad es rechazado."""
        with pytest.raises(ImaginaryResidueError):
            superop_to_ptm(SuperOp(1, 1, 1j * np.eye(4, dtype=complex)))

    def test_unbound_parameter(self):
        with pytest.raises(UnboundParameterError):
            ptm_of_term(Gen(z_spider(1, 1, "theta")))

    def test_binding(self):
        """Test que el binding se aplica antes de calcular la PTM."""
        t = build_phase_gadget(PauliBasis.Z, [0], 1, Phase.param("theta", coeff=2.0))
        assert np.allclose(ptm_of_term(t, {"theta": 0.25}).mat, rz_ptm(0.5), atol=1e-12)


class TestPauliVector:
    """Tests para pauli_vector y density_from_pauli."""

    def test_zero_state(self):
        """Test |0⟩⟨0| → (1, 0, 0, 1)."""
        assert np.allclose(pauli_vector(np.diag([1, 0])), [1, 0, 0, 1])

    def test_inverse(self, rng):
        """Test que density_from_pauli invierte pauli_vector."""
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = a @ a.conj().T
        rho /= np.trace(rho)
        v = pauli_vector(rho)
        assert v[0] == pytest.approx(1.0)
        assert np.allclose(density_from_pauli(v), rho, atol=1e-12)


class TestPtmProgram:
    """Tests de la evaluación estructurada."""

    def test_matches_dense_on_corpus(self, small_corpus, rng):
        """Test ptm_action(t, v) = ptm_apply(ptm_of_term(t), v)."""
        for t in small_corpus:
            v = rng.normal(size=4 ** t.n_in)
            assert np.allclose(ptm_action(t, v), ptm_apply(ptm_of_term(t), v), atol=1e-10)

    def test_full_matrix_from_identity(self):
        """Test que aplicar a la identidad reconstruye la PTM."""
        assert np.allclose(PtmProgram(build_cnot()).run(np.eye(16)), cnot_ptm(), atol=1e-12)

    def test_batch(self, rng):
        """Test que una matriz de columnas se evalúa como batch."""
        t = build_phase_gadget([PauliBasis.Z, PauliBasis.X], [0, 2], 3, 0.4)
        v = rng.normal(size=(64, 3))
        assert np.allclose(PtmProgram(t).run(v), ptm_of_term(t).mat @ v, atol=1e-10)

    def test_parameters_and_cache(self):
        """Test que el mismo programa sirve para distintos bindings."""
        t = build_phase_gadget(PauliBasis.Z, [0, 1], 2, Phase.param("theta"))
        program = PtmProgram(t)
        v = np.eye(16)
        for theta in (0.1, 0.9, 0.1):
            assert np.allclose(program.run(v, {"theta": theta}), ptm_of_term(t, {"theta": theta}).mat, atol=1e-12)

    def test_fusion_respects_limits(self):
        """Test que los bloques fusionados cubren todos los generadores."""
        program = PtmProgram(build_phase_gadget(PauliBasis.X, [0, 1, 2], 3, 0.2))
        assert 0 < len(program.ops)

    def test_missing_binding(self):
        t = Gen(z_spider(1, 1, "theta"))
        with pytest.raises(UnboundParameterError):
            PtmProgram(t).run(np.ones(4))

    def test_wrong_length(self):
        with pytest.raises(ShapeError):
            PtmProgram(Gen(hadamard())).run(np.ones(16))

    def test_scalars_tracked(self):
        """Test que los Scalar se acumulan como |c|²."""
        t = Par(Gen(scalar(0.5j)), Gen(identity()))
        assert np.allclose(PtmProgram(t).run(np.eye(4)), 0.25 * np.eye(4))
