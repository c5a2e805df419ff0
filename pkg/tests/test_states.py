import numpy as np
import pytest

from twirlsim import (
    DensityMatrix,
    DimensionError,
    QuantumChannel,
    UnitaryMatrix,
    apply_channel,
    partial_trace,
    projection_probability,
    purity,
    tensor,
    zz_coupling,
)
from conftest import random_density, random_kraus_channel

I2 = np.eye(2, dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)
KET0 = np.diag([1.0, 0.0]).astype(complex)


def brute_force_partial_trace(rho: np.ndarray, n: int, keep: tuple[int, ...]) -> np.ndarray:
    """Independent oracle: explicit index-pair summation, qubit 1 = MSB."""
    traced = [q for q in range(1, n + 1) if q not in keep]
    m = len(keep)
    out = np.zeros((2**m, 2**m), dtype=complex)
    for row in range(2**n):
        for col in range(2**n):
            if any(((row >> (n - q)) & 1) != ((col >> (n - q)) & 1) for q in traced):
                continue
            r_out = 0
            c_out = 0
            for pos, q in enumerate(keep):
                r_out |= ((row >> (n - q)) & 1) << (m - 1 - pos)
                c_out |= ((col >> (n - q)) & 1) << (m - 1 - pos)
            out[r_out, c_out] += rho[row, col]
    return out


class TestTensor:
    def test_identity_case(self):
        assert np.array_equal(tensor(I2, I2), np.eye(4))

    def test_zz(self):
        assert np.array_equal(tensor(SZ, SZ), np.diag([1, -1, -1, 1]).astype(complex))

    def test_projector_times_mixed(self):
        got = tensor(KET0, I2 / 2)
        assert np.allclose(got, np.diag([0.5, 0.5, 0.0, 0.0]))

    def test_dimension_cap(self):
        big = np.eye(2**6)
        with pytest.raises(DimensionError):
            tensor(big, np.eye(2**5))

    def test_non_square_rejected(self):
        with pytest.raises(DimensionError):
            tensor(np.ones((2, 3)), I2)

    def test_non_power_of_two_rejected(self):
        with pytest.raises(DimensionError):
            tensor(np.eye(3), I2)


class TestDensityMatrix:
    def test_valid(self):
        rho = DensityMatrix(np.diag([0.25, 0.75]).astype(complex))
        assert rho.n == 1

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError, match="Hermitian"):
            DensityMatrix(np.array([[0.5, 0.5], [0.0, 0.5]]))

    def test_rejects_wrong_trace(self):
        with pytest.raises(ValueError, match="trace"):
            DensityMatrix(np.diag([0.5, 0.6]))

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(ValueError, match="negative eigenvalue"):
            DensityMatrix(np.diag([1.5, -0.5]))

    def test_rejects_oversized_register(self):
        with pytest.raises(DimensionError):
            DensityMatrix(np.eye(2**11) / 2**11)

    def test_immutable(self):
        rho = DensityMatrix.maximally_mixed(1)
        with pytest.raises(ValueError):
            rho.data[0, 0] = 3.0

    def test_computational_basis(self):
        rho = DensityMatrix.computational_basis(2, 0b10)
        assert rho.data[2, 2] == 1.0

    def test_product_constructor(self):
        rho = DensityMatrix.product([KET0, I2 / 2, KET0])
        assert rho.n == 3
        assert projection_probability(rho, [1, 3]) == pytest.approx(1.0)


class TestUnitaryMatrix:
    def test_valid(self):
        UnitaryMatrix(np.array([[0, 1], [1, 0]], dtype=complex))

    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError, match="unitary"):
            UnitaryMatrix(np.array([[1, 0], [0, 2]], dtype=complex))


class TestQuantumChannel:
    def test_ensemble_weights_must_sum_to_one(self):
        with pytest.raises(ValueError, match="sum"):
            QuantumChannel.unitary_ensemble([(0.5, I2), (0.4, SZ)])

    def test_ensemble_operators_must_be_unitary(self):
        with pytest.raises(ValueError, match="unitary"):
            QuantumChannel.unitary_ensemble([(1.0, np.diag([1.0, 2.0]))])

    def test_kraus_must_resolve_identity(self):
        with pytest.raises(ValueError, match="identity"):
            QuantumChannel.from_kraus([np.diag([0.5, 0.5])])

    def test_mixed_dimensions_rejected(self):
        with pytest.raises(DimensionError):
            QuantumChannel.unitary_ensemble([(0.5, I2), (0.5, np.eye(4))])

    def test_valid_kraus(self):
        k0 = np.diag([1.0, np.sqrt(0.5)]).astype(complex)
        k1 = np.array([[0, np.sqrt(0.5)], [0, 0]], dtype=complex)
        ch = QuantumChannel.from_kraus([k0, k1])
        assert ch.kind == "kraus"
        assert ch.n == 1


class TestPartialTrace:
    def test_product_state_recovers_factor(self, rng):
        rho_a = random_density(1, rng)
        rho_b = random_density(2, rng)
        joint = DensityMatrix(tensor(rho_a, rho_b))
        reduced = partial_trace(joint, [1])
        assert np.max(np.abs(reduced.data - rho_a)) < 1e-12

    def test_bell_state_reduces_to_mixed(self):
        bell = DensityMatrix.from_vector(np.array([1, 0, 0, 1]) / np.sqrt(2))
        for q in (1, 2):
            reduced = partial_trace(bell, [q])
            assert np.allclose(reduced.data, I2 / 2)

    def test_against_bruteforce_oracle(self):
        rho = DensityMatrix(np.diag([0.5, 0.5, 0.0, 0.0]).astype(complex))
        reduced = partial_trace(rho, [2])
        expected = brute_force_partial_trace(rho.data, 2, (2,))
        assert np.allclose(reduced.data, expected)
        assert np.allclose(reduced.data, np.diag([0.5, 0.5]))

    def test_random_states_match_oracle(self, rng):
        for _ in range(5):
            rho = DensityMatrix(random_density(3, rng))
            for keep in [(1,), (2,), (3,), (1, 3), (3, 1), (2, 3)]:
                got = partial_trace(rho, keep).data
                want = brute_force_partial_trace(rho.data, 3, keep)
                assert np.max(np.abs(got - want)) < 1e-12

    def test_trace_preserved(self, rng):
        rho = DensityMatrix(random_density(3, rng))
        assert abs(np.trace(partial_trace(rho, [2]).data) - 1.0) < 1e-12

    def test_empty_keep_rejected(self):
        rho = DensityMatrix.maximally_mixed(2)
        with pytest.raises(ValueError, match="nonempty"):
            partial_trace(rho, [])

    def test_duplicate_keep_rejected(self):
        rho = DensityMatrix.maximally_mixed(2)
        with pytest.raises(ValueError, match="duplicate"):
            partial_trace(rho, [1, 1])


class TestPurity:
    def test_pure_state(self):
        assert purity(DensityMatrix(KET0)) == pytest.approx(1.0)

    def test_maximally_mixed(self):
        assert purity(DensityMatrix.maximally_mixed(1)) == pytest.approx(0.5)

    def test_three_quarter_mixture(self):
        # 9/16 + 1/16 by direct evaluation
        rho = DensityMatrix(np.diag([0.75, 0.25]).astype(complex))
        assert purity(rho) == pytest.approx(0.625, abs=1e-12)

    def test_range_after_partial_trace(self, rng):
        for _ in range(10):
            rho = DensityMatrix(random_density(3, rng))
            for keep in [(1,), (1, 2)]:
                p = purity(partial_trace(rho, keep))
                assert 2.0 ** (-len(keep)) - 1e-9 <= p <= 1.0 + 1e-9


class TestApplyChannel:
    def test_identity_channel(self, rng):
        rho = DensityMatrix(random_density(2, rng))
        out = apply_channel(QuantumChannel.identity(2), rho)
        assert np.max(np.abs(out.data - rho.data)) < 1e-12

    def test_bit_flip_mixing(self):
        sx = np.array([[0, 1], [1, 0]], dtype=complex)
        ch = QuantumChannel.unitary_ensemble([(0.5, I2), (0.5, sx)])
        out = apply_channel(ch, DensityMatrix(KET0))
        assert np.allclose(out.data, I2 / 2)

    def test_diagonal_gate_fixes_basis_state(self):
        ch = QuantumChannel.from_unitary(zz_coupling(0.7, (1, 2), n=2))
        rho = DensityMatrix.computational_basis(2, 0)
        out = apply_channel(ch, rho)
        assert np.max(np.abs(out.data - rho.data)) < 1e-12

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(DimensionError):
            apply_channel(QuantumChannel.identity(2), DensityMatrix.maximally_mixed(1))

    def test_random_kraus_channels_preserve_trace(self, rng):
        for _ in range(100):
            n = int(rng.integers(1, 4))
            ch = random_kraus_channel(n, 4, rng)
            rho = DensityMatrix(random_density(n, rng))
            out = apply_channel(ch, rho)
            assert abs(np.trace(out.data).real - 1.0) < 1e-9


class TestProjectionProbability:
    def test_all_zeros_state(self):
        rho = DensityMatrix.computational_basis(2, 0)
        assert projection_probability(rho, [1, 2]) == pytest.approx(1.0)

    def test_uniform(self):
        rho = DensityMatrix.maximally_mixed(2)
        assert projection_probability(rho, [1, 2]) == pytest.approx(0.25)

    def test_separable_projector(self):
        rho = DensityMatrix(tensor(I2 / 2, KET0))
        assert projection_probability(rho, [2]) == pytest.approx(1.0)

    def test_linear_in_state(self, rng):
        for _ in range(5):
            a = random_density(2, rng)
            b = random_density(2, rng)
            lam = rng.random()
            mix = DensityMatrix(lam * a + (1 - lam) * b)
            direct = projection_probability(mix, [1])
            parts = (lam * projection_probability(DensityMatrix(a), [1])
                     + (1 - lam) * projection_probability(DensityMatrix(b), [1]))
            assert direct == pytest.approx(parts, abs=1e-12)

    def test_invalid_subset(self):
        rho = DensityMatrix.maximally_mixed(2)
        with pytest.raises(ValueError):
            projection_probability(rho, [3])
