"""
Unit tests para el kernel de álgebra lineal.

Testing strategy:
- Convenciones globales: vec por columnas, orden de Pauli base 4
- Propiedades algebraicas (mixed-product, ortogonalidad de Pauli)
- Errores de dimensión
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.core.exceptions import ShapeError
from app.core.linalg import (
    PauliIndex,
    allclose_up_to_phase,
    as_cmat,
    dagger,
    kron,
    partial_trace,
    pauli_basis,
    pauli_op,
    qubits_from_dim,
    trace,
    unvec,
    vec,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def random_cmat(rng, rows, cols):
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))


class TestKron:
    """Tests para kron."""

    def test_identity(self):
        """Test que kron(I₂, I₂) = I₄."""
        assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_block_structure(self):
        """Test que kron(σ_x, σ_z) tiene bloques [[0, σ_z], [σ_z, 0]]."""
        out = kron(SX, SZ)
        assert np.array_equal(out[:2, :2], np.zeros((2, 2)))
        assert np.array_equal(out[:2, 2:], SZ)
        assert np.array_equal(out[2:, :2], SZ)

    def test_vectors(self):
        """Test índices i·4+j del Kronecker de dos columnas."""
        v = np.array([[1], [0], [0], [1]])
        w = np.array([[1], [0], [0], [-1]])
        out = kron(v, w).reshape(-1)
        expected = np.zeros(16)
        expected[[0, 12]] = 1
        expected[[3, 15]] = -1
        assert np.array_equal(out, expected)

    def test_mixed_product(self, rng):
        """Test kron(A,B)·kron(C,D) = kron(AC, BD)."""
        a, b, c, d = (random_cmat(rng, 2, 2) for _ in range(4))
        assert np.allclose(kron(a, b) @ kron(c, d), kron(a @ c, b @ d), atol=1e-12)

    def test_associative(self, rng):
        """Test asociatividad."""
        a, b, c = (random_cmat(rng, 2, 2) for _ in range(3))
        assert np.allclose(kron(kron(a, b), c), kron(a, kron(b, c)), atol=1e-12)

    def test_rejects_1d(self):
        """Test que vectores 1D son rechazados."""
        with pytest.raises(ShapeError):
            kron(np.ones(2), np.eye(2))


class TestDaggerTrace:
    """Tests para dagger y trace."""

    def test_dagger_phase(self):
        """Test dagger(diag(1, e^{iα})) = diag(1, e^{-iα})."""
        alpha = 0.7
        m = np.diag([1, np.exp(1j * alpha)])
        assert np.allclose(dagger(m), np.diag([1, np.exp(-1j * alpha)]))

    def test_dagger_hermitian(self):
        """Test que σ_y es hermítica."""
        assert np.array_equal(dagger(SY), SY)

    def test_trace_requires_square(self):
        """Test que la traza rechaza matrices no cuadradas."""
        with pytest.raises(ShapeError):
            trace(np.ones((2, 3)))

    def test_as_cmat_scalar(self):
        """Test que un escalar es una matriz 1x1."""
        assert as_cmat(3.0).shape == (1, 1)


class TestVec:
    """Tests para vec/unvec (column stacking)."""

    def test_vec_identity(self):
        """Test vec(I₂) = (1,0,0,1)ᵀ."""
        assert np.array_equal(vec(np.eye(2)).reshape(-1), [1, 0, 0, 1])

    def test_vec_off_diagonal(self):
        """Test vec(|0⟩⟨1|) = (0,0,1,0)ᵀ."""
        m = np.array([[0, 1], [0, 0]])
        assert np.array_equal(vec(m).reshape(-1), [0, 0, 1, 0])

    def test_unvec_inverts_vec(self, rng):
        """Test unvec(vec(A)) = A."""
        a = random_cmat(rng, 2, 2)
        assert np.array_equal(unvec(vec(a), 2), a)

    def test_sandwich_identity(self, rng):
        """Test vec(AρB) = kron(Bᵀ, A)·vec(ρ)."""
        a, b, rho = (random_cmat(rng, 2, 2) for _ in range(3))
        assert np.allclose(vec(a @ rho @ b), kron(b.T, a) @ vec(rho), atol=1e-12)

    def test_unvec_wrong_length(self):
        """Test error de largo."""
        with pytest.raises(ShapeError):
            unvec(np.ones(5), 2)

    def test_vec_requires_square(self):
        with pytest.raises(ShapeError):
            vec(np.ones((2, 4)))


class TestPauli:
    """Tests para PauliIndex, pauli_op y pauli_basis."""

    def test_single_qubit_identity(self):
        """Test (n=1, idx=0) → I₂."""
        assert np.array_equal(pauli_op(PauliIndex(n=1, idx=0)), np.eye(2))

    def test_leftmost_most_significant(self):
        """Test (n=2, idx=1) → I⊗σ_X y (n=2, idx=15) → σ_Z⊗σ_Z."""
        assert np.array_equal(pauli_op(PauliIndex(n=2, idx=1)), np.kron(np.eye(2), SX))
        assert np.array_equal(pauli_op(PauliIndex(n=2, idx=15)), np.kron(SZ, SZ))

    def test_zero_qubits(self):
        """Test que el Pauli de 0 qubits es [1]."""
        assert np.array_equal(pauli_op(PauliIndex(n=0, idx=0)), [[1]])

    def test_labels(self):
        """Test etiquetas legibles."""
        assert PauliIndex(n=2, idx=4).label == "XI"
        assert PauliIndex(n=2, idx=6).label == "XY"
        assert PauliIndex(n=3, idx=27).digits == (0, 1, 2, 3)

    def test_out_of_range(self):
        """Test que idx >= 4^n es inválido."""
        with pytest.raises(ValueError, match="idx debe estar en"):
            PauliIndex(n=1, idx=4)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_orthogonality(self, n):
        """Test tr(σ_i† σ_j) = 2^n δ_ij."""
        basis = pauli_basis(n)
        gram = np.einsum("iab,jab->ij", basis.conj(), basis)
        assert np.allclose(gram, 2 ** n * np.eye(4 ** n), atol=1e-12)

    @pytest.mark.parametrize("n", [1, 2])
    def test_involution(self, n):
        """Test σ·σ = I para todo Pauli."""
        for sigma in pauli_basis(n):
            assert np.allclose(sigma @ sigma, np.eye(2 ** n))

    def test_basis_matches_pauli_op(self):
        """Test que pauli_basis sigue el mismo orden que PauliIndex."""
        basis = pauli_basis(2)
        for idx in range(16):
            assert np.array_equal(basis[idx], pauli_op(PauliIndex(n=2, idx=idx)))

    def test_basis_read_only(self):
        """Test que la base cacheada no se puede mutar."""
        with pytest.raises(ValueError):
            pauli_basis(1)[0, 0, 0] = 5


class TestHelpers:
    """Tests para qubits_from_dim, partial_trace y allclose_up_to_phase."""

    @given(st.integers(min_value=0, max_value=6))
    @settings(max_examples=20)
    def test_qubits_from_dim(self, n):
        """Test que potencias de 2 y de 4 decodifican su exponente."""
        assert qubits_from_dim(2 ** n) == n
        assert qubits_from_dim(4 ** n, 4) == n

    def test_qubits_from_dim_rejects(self):
        with pytest.raises(ShapeError):
            qubits_from_dim(6)

    def test_partial_trace_product_state(self):
        """Test que la traza parcial de ρ_A⊗ρ_B devuelve cada factor."""
        rho_a = np.array([[0.75, 0.25], [0.25, 0.25]], dtype=complex)
        rho_b = np.array([[0.5, 0.5j], [-0.5j, 0.5]], dtype=complex)
        rho = np.kron(rho_a, rho_b)
        assert np.allclose(partial_trace(rho, [0], 2), rho_a)
        assert np.allclose(partial_trace(rho, [1], 2), rho_b)

    def test_partial_trace_reorders(self, rng):
        """Test que `keep` fija el orden de salida."""
        a = random_cmat(rng, 2, 2)
        b = random_cmat(rng, 2, 2)
        rho = np.kron(np.kron(a, np.eye(2) / 2), b)
        assert np.allclose(partial_trace(rho, [2, 0], 3), np.kron(b, a))

    def test_partial_trace_invalid(self):
        with pytest.raises(ShapeError):
            partial_trace(np.eye(4), [0, 0], 2)

    def test_up_to_phase(self, rng):
        """Test igualdad módulo escalar complejo."""
        a = random_cmat(rng, 3, 3)
        assert allclose_up_to_phase(a * np.exp(0.4j) * 2, a)
        assert not allclose_up_to_phase(a + np.eye(3), a)
