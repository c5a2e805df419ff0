"""Dense density-matrix linear algebra for registers of up to 10 qubits.

Qubits are labelled 1..n, with qubit 1 the leftmost tensor factor (most
significant bit of the computational-basis index). All wrapper types are
immutable after construction and all operations are pure functions, so
values can be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 10

#: tolerance for validity checks (hermiticity, trace, unitarity, ...)
ATOL = 1e-9


class DimensionError(ValueError):
    """Raised when operands have incompatible or oversized dimensions."""


def _check_square_pow2(data: np.ndarray, what: str) -> int:
    if data.ndim != 2 or data.shape[0] != data.shape[1]:
        raise DimensionError(f"{what} must be a square matrix, got shape {data.shape}")
    dim = data.shape[0]
    n = dim.bit_length() - 1
    if dim != 2**n:
        raise DimensionError(f"{what} dimension {dim} is not a power of two")
    if n > MAX_QUBITS:
        raise DimensionError(f"{what} spans {n} qubits, limit is {MAX_QUBITS}")
    return n


def _freeze(data: np.ndarray) -> np.ndarray:
    arr = np.array(data, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DensityMatrix:
    """A valid n-qubit density matrix (Hermitian, unit trace, PSD)."""

    data: np.ndarray
    n: int = field(init=False)

    def __post_init__(self) -> None:
        arr = _freeze(self.data)
        n = _check_square_pow2(arr, "density matrix")
        if np.max(np.abs(arr - arr.conj().T)) > ATOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(arr).real - 1.0) > ATOL or abs(np.trace(arr).imag) > ATOL:
            raise ValueError(f"density matrix trace {np.trace(arr)} is not 1")
        if np.min(np.linalg.eigvalsh(arr)) < -ATOL:
            raise ValueError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "n", n)

    @classmethod
    def computational_basis(cls, n: int, bits: int = 0) -> "DensityMatrix":
        """|bits><bits| with the bit of qubit 1 in the most significant position."""
        dim = 2**n
        if not 0 <= bits < dim:
            raise ValueError(f"basis index {bits} out of range for {n} qubits")
        arr = np.zeros((dim, dim), dtype=complex)
        arr[bits, bits] = 1.0
        return cls(arr)

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "DensityMatrix":
        v = np.asarray(vec, dtype=complex).reshape(-1)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, n: int) -> "DensityMatrix":
        dim = 2**n
        return cls(np.eye(dim, dtype=complex) / dim)

    @classmethod
    def product(cls, factors: Sequence[np.ndarray]) -> "DensityMatrix":
        """Tensor product of single-qubit (or multi-qubit) density blocks."""
        out = np.array([[1.0 + 0j]])
        for f in factors:
            out = tensor(out, np.asarray(f, dtype=complex))
        return cls(out)


@dataclass(frozen=True)
class UnitaryMatrix:
    """A unitary on n qubits (U^dag U = I within Frobenius tolerance)."""

    data: np.ndarray
    n: int = field(init=False)

    def __post_init__(self) -> None:
        arr = _freeze(self.data)
        n = _check_square_pow2(arr, "unitary")
        dev = np.linalg.norm(arr.conj().T @ arr - np.eye(arr.shape[0]))
        if dev > ATOL:
            raise ValueError(f"matrix is not unitary (deviation {dev:.3e})")
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "n", n)

    @classmethod
    def identity(cls, n: int) -> "UnitaryMatrix":
        return cls(np.eye(2**n, dtype=complex))


@dataclass(frozen=True)
class QuantumChannel:
    """A CP trace-preserving map stored as a weighted operator list.

    ``kind="unitary-ensemble"``: terms are (probability, unitary) pairs whose
    probabilities sum to 1; the map is the convex mixture of the unitaries.
    ``kind="kraus"``: weights are all 1 and the operators A_k satisfy
    sum_k A_k^dag A_k = I.
    """

    terms: tuple[tuple[float, np.ndarray], ...]
    kind: str
    n: int = field(init=False)

    def __post_init__(self) -> None:
        if self.kind not in ("unitary-ensemble", "kraus"):
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if not self.terms:
            raise ValueError("channel needs at least one term")
        frozen = []
        n = None
        for w, op in self.terms:
            arr = _freeze(op)
            n_op = _check_square_pow2(arr, "channel operator")
            if n is None:
                n = n_op
            elif n_op != n:
                raise DimensionError("channel operators have mixed dimensions")
            if w < -ATOL:
                raise ValueError(f"negative channel weight {w}")
            frozen.append((float(w), arr))
        assert n is not None
        if self.kind == "unitary-ensemble":
            total = sum(w for w, _ in frozen)
            if abs(total - 1.0) > ATOL:
                raise ValueError(f"ensemble weights sum to {total}, expected 1")
            for _, op in frozen:
                UnitaryMatrix(op)
        else:
            acc = np.zeros((2**n, 2**n), dtype=complex)
            for w, op in frozen:
                if abs(w - 1.0) > ATOL:
                    raise ValueError("kraus terms must carry weight 1")
                acc += op.conj().T @ op
            if np.max(np.abs(acc - np.eye(2**n))) > ATOL:
                raise ValueError("kraus operators do not resolve the identity")
        object.__setattr__(self, "terms", tuple(frozen))
        object.__setattr__(self, "n", n)

    @classmethod
    def from_unitary(cls, op: np.ndarray | UnitaryMatrix) -> "QuantumChannel":
        mat = op.data if isinstance(op, UnitaryMatrix) else np.asarray(op, dtype=complex)
        return cls(((1.0, mat),), "unitary-ensemble")

    @classmethod
    def unitary_ensemble(
        cls, pairs: Iterable[tuple[float, np.ndarray]]
    ) -> "QuantumChannel":
        return cls(tuple((float(w), np.asarray(op, dtype=complex)) for w, op in pairs),
                   "unitary-ensemble")

    @classmethod
    def from_kraus(cls, ops: Iterable[np.ndarray]) -> "QuantumChannel":
        return cls(tuple((1.0, np.asarray(op, dtype=complex)) for op in ops), "kraus")

    @classmethod
    def identity(cls, n: int) -> "QuantumChannel":
        return cls.from_unitary(np.eye(2**n, dtype=complex))


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two square power-of-two matrices.

    Rejects results that would exceed the 10-qubit register cap.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    na = _check_square_pow2(a, "left factor") if a.shape != (1, 1) else 0
    nb = _check_square_pow2(b, "right factor") if b.shape != (1, 1) else 0
    if na + nb > MAX_QUBITS:
        raise DimensionError(f"tensor product spans {na + nb} qubits, limit is {MAX_QUBITS}")
    return np.kron(a, b)


def _validate_subset(subset: Iterable[int], n: int, *, allow_empty: bool = False) -> tuple[int, ...]:
    qs = tuple(int(q) for q in subset)
    if not qs and not allow_empty:
        raise ValueError("qubit subset must be nonempty")
    if len(set(qs)) != len(qs):
        raise ValueError(f"duplicate qubit labels in {qs}")
    for q in qs:
        if not 1 <= q <= n:
            raise ValueError(f"qubit label {q} out of range 1..{n}")
    return qs


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state on the ``keep`` qubits, tracing out the rest.

    ``keep`` orders the qubits of the result; labels are 1-based.
    """
    kept = _validate_subset(keep, rho.n)
    n = rho.n
    traced = [q for q in range(1, n + 1) if q not in kept]
    tens = rho.data.reshape([2] * (2 * n))
    # axes are (row bits of qubits 1..n, column bits of qubits 1..n)
    for q in sorted(traced, reverse=True):
        n_cur = tens.ndim // 2
        # position of qubit q among the remaining axes
        remaining = [p for p in range(1, n + 1) if p in kept or (p in traced and p <= q)]
        pos = remaining.index(q)
        tens = np.trace(tens, axis1=pos, axis2=pos + n_cur)
    m = len(kept)
    # remaining axes follow sorted(kept); permute into the requested order
    sorted_kept = sorted(kept)
    src = [sorted_kept.index(q) for q in kept]
    tens = np.transpose(tens, axes=src + [m + s for s in src])
    return DensityMatrix(tens.reshape(2**m, 2**m))


def purity(rho: DensityMatrix) -> float:
    """Tr[rho^2], between 2^-n (maximally mixed) and 1 (pure)."""
    return float(np.trace(rho.data @ rho.data).real)


def apply_channel(channel: QuantumChannel, rho: DensityMatrix) -> DensityMatrix:
    """Propagate ``rho`` through the channel: sum_k w_k A_k rho A_k^dag."""
    if channel.n != rho.n:
        raise DimensionError(
            f"channel acts on {channel.n} qubits, state has {rho.n}")
    return DensityMatrix(_apply_channel_raw(channel, rho.data))


def _apply_channel_raw(channel: QuantumChannel, rho: np.ndarray) -> np.ndarray:
    out = np.zeros_like(rho)
    for w, op in channel.terms:
        out += w * (op @ rho @ op.conj().T)
    return out


def projection_probability(rho: DensityMatrix, subset: Iterable[int]) -> float:
    """Probability that every qubit in ``subset`` reads 0.

    Tr[rho (|0..0><0..0|_subset x I_rest)], clamped to [0, 1].
    """
    qs = _validate_subset(subset, rho.n)
    p = float(_projection_probability_diag(np.diag(rho.data).real, rho.n, qs))
    if p < -ATOL or p > 1.0 + ATOL:
        raise ValueError(f"projection probability {p} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def _zero_mask(n: int, subset: Sequence[int]) -> np.ndarray:
    """Boolean mask over basis indices where all subset bits are zero."""
    idx = np.arange(2**n)
    mask = np.ones(2**n, dtype=bool)
    for q in subset:
        mask &= ((idx >> (n - q)) & 1) == 0
    return mask


def _projection_probability_diag(diag: np.ndarray, n: int, subset: Sequence[int]) -> float:
    return float(diag[_zero_mask(n, subset)].sum())
