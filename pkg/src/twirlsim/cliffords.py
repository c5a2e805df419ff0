"""Single-qubit Clifford group as symplectic-times-Pauli products, and twirls.

The 24 group elements (mod phase) factor as S*P where S comes from six
symplectic rotations and P from the four Paulis. The S family splits into
two halves, either of which already averages like the full group:

* ``S1``: rotations by 0, 120, 240 degrees about the (1,1,1)/sqrt(3) axis,
  which cyclically permute the x, y, z axes;
* ``S2``: 90-degree rotations about x, y and z.

When the only quantity read out is the projection of the twirled state
onto |0...0>, six elements per qubit suffice: one S half combined with two
Paulis, one from {I, Z} and one from {X, Y}. That gives 2 x 2 x 2 = 8
distinct six-element pools, all equivalent for that projection (and only
for it; the six-element twirl does not reproduce the full twirled state).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .states import (
    ATOL,
    DensityMatrix,
    DimensionError,
    QuantumChannel,
    _apply_channel_raw,
    _validate_subset,
)
from .paulis import SINGLE_QUBIT_PAULIS

#: hard cap on the number of exact twirl terms before sampling is required
MAX_EXACT_ASSIGNMENTS = 10**6

SYMPLECTIC_LABELS = ("S1.0", "S1.1", "S1.2", "S2.x", "S2.y", "S2.z")
PAULI_FIRST_CHOICES = ("I", "Z")
PAULI_SECOND_CHOICES = ("X", "Y")


def _symplectic_matrices() -> dict[str, np.ndarray]:
    axis = (SINGLE_QUBIT_PAULIS["X"] + SINGLE_QUBIT_PAULIS["Y"]
            + SINGLE_QUBIT_PAULIS["Z"]) / np.sqrt(3)
    mats = {}
    for nu in range(3):
        half_angle = nu * np.pi / 3
        mats[f"S1.{nu}"] = (np.cos(half_angle) * np.eye(2)
                            - 1j * np.sin(half_angle) * axis)
    for p in "xyz":
        mats[f"S2.{p}"] = (np.cos(np.pi / 4) * np.eye(2)
                           - 1j * np.sin(np.pi / 4) * SINGLE_QUBIT_PAULIS[p.upper()])
    return mats


@dataclass(frozen=True)
class CliffordElement:
    """One single-qubit Clifford, tagged with its S*P factorization."""

    symplectic: str
    pauli: str
    matrix: np.ndarray

    @property
    def label(self) -> str:
        return f"{self.symplectic}*{self.pauli}"

    def inverse_matrix(self) -> np.ndarray:
        return self.matrix.conj().T


def _build_elements() -> tuple[CliffordElement, ...]:
    sym = _symplectic_matrices()
    out = []
    for slab in SYMPLECTIC_LABELS:
        for plab in "IXYZ":
            mat = sym[slab] @ SINGLE_QUBIT_PAULIS[plab]
            mat.setflags(write=False)
            out.append(CliffordElement(slab, plab, mat))
    return tuple(out)


_ELEMENTS = _build_elements()


def enumerate_cliffords() -> tuple[CliffordElement, ...]:
    """All 24 single-qubit Cliffords, pairwise distinct up to global phase."""
    return _ELEMENTS


@dataclass(frozen=True)
class CliffordPool:
    """A twirl set: the full 24-element group, a 12-element half, or a
    6-element pool for |0>-projection measurements."""

    elements: tuple[CliffordElement, ...]
    kind: str
    label: str

    @property
    def size(self) -> int:
        return len(self.elements)


def build_pool(
    kind: str = "minimal-6",
    symplectic: str = "S1",
    pauli_pair: tuple[str, str] = ("I", "X"),
) -> CliffordPool:
    """Assemble a twirl pool.

    ``kind`` is one of ``full-24``, ``half-12`` or ``minimal-6``. The
    ``symplectic`` half (``S1`` or ``S2``) selects the S triple for the two
    reduced kinds; ``pauli_pair`` must pick one letter from {I, Z} and one
    from {X, Y} and only applies to ``minimal-6``.
    """
    if kind == "full-24":
        return CliffordPool(_ELEMENTS, kind, "full-24")
    if symplectic not in ("S1", "S2"):
        raise ValueError(f"symplectic half must be S1 or S2, got {symplectic!r}")
    subset = tuple(e for e in _ELEMENTS if e.symplectic.startswith(symplectic))
    if kind == "half-12":
        return CliffordPool(subset, kind, f"half-12:{symplectic}")
    if kind == "minimal-6":
        p1, p2 = pauli_pair
        if p1 not in PAULI_FIRST_CHOICES or p2 not in PAULI_SECOND_CHOICES:
            raise ValueError(
                f"pauli pair must combine one of {PAULI_FIRST_CHOICES} with one of "
                f"{PAULI_SECOND_CHOICES}, got {pauli_pair!r}")
        chosen = tuple(e for e in subset if e.pauli in (p1, p2))
        return CliffordPool(chosen, kind, f"{symplectic}:{p1}:{p2}")
    raise ValueError(f"unknown pool kind {kind!r}")


def minimal_pool_choices() -> list[tuple[str, str, str]]:
    """The 8 (symplectic, pauli1, pauli2) choices that define 6-element pools."""
    return [(s, p1, p2)
            for s in ("S1", "S2")
            for p1 in PAULI_FIRST_CHOICES
            for p2 in PAULI_SECOND_CHOICES]


def parse_pool(text: str) -> CliffordPool:
    """Parse a pool description like ``full-24``, ``half-12:S2`` or ``S1:I:X``."""
    text = text.strip()
    if text == "full-24":
        return build_pool("full-24")
    if text.startswith("half-12"):
        parts = text.split(":")
        sym = parts[1] if len(parts) > 1 else "S1"
        return build_pool("half-12", symplectic=sym)
    parts = text.split(":")
    if len(parts) == 3:
        return build_pool("minimal-6", symplectic=parts[0], pauli_pair=(parts[1], parts[2]))
    raise ValueError(f"cannot parse pool description {text!r}")


def _embed_assignment(
    n: int, subset: tuple[int, ...], mats: tuple[np.ndarray, ...]
) -> np.ndarray:
    """Tensor the per-qubit operators onto ``subset``, identity elsewhere."""
    out = np.array([[1.0 + 0j]])
    eye = np.eye(2, dtype=complex)
    lookup = dict(zip(subset, mats))
    for q in range(1, n + 1):
        out = np.kron(out, lookup.get(q, eye))
    return out


def twirl_exact(
    channel: QuantumChannel,
    subset,
    rho0: DensityMatrix,
    pool: CliffordPool,
) -> DensityMatrix:
    """Average the channel over every pool assignment on the given qubits.

    Returns (1/K^m) sum_k C_k^dag S(C_k rho0 C_k^dag) C_k with C_k ranging
    over all m-fold tensor products drawn from the pool; unmeasured qubits
    are untouched. The assignment enumeration is a fixed itertools.product
    order, so the summation is deterministic.
    """
    if channel.n != rho0.n:
        raise DimensionError(
            f"channel acts on {channel.n} qubits, state has {rho0.n}")
    qs = tuple(sorted(_validate_subset(subset, rho0.n)))
    m = len(qs)
    if pool.size**m > MAX_EXACT_ASSIGNMENTS:
        raise ValueError(
            f"{pool.size}^{m} assignments exceed the exact-twirl cap; use sampling")
    n = rho0.n
    acc = np.zeros_like(rho0.data)
    for combo in itertools.product([e.matrix for e in pool.elements], repeat=m):
        big = _embed_assignment(n, qs, combo)
        twirled_in = big @ rho0.data @ big.conj().T
        out = _apply_channel_raw(channel, twirled_in)
        acc += big.conj().T @ out @ big
    acc /= pool.size**m
    return DensityMatrix(acc)


@dataclass(frozen=True)
class PoolEquivalenceReport:
    """Projection probabilities per pool, and their maximum spread."""

    subset: tuple[int, ...]
    probabilities: dict[str, float]
    max_spread: float
    tolerance: float
    passed: bool

    def to_text(self) -> str:
        lines = [
            f"subset {','.join(str(q) for q in self.subset)}",
            f"tolerance {self.tolerance:.1e}",
        ]
        for label in sorted(self.probabilities):
            lines.append(f"projection {label} {self.probabilities[label]:.12e}")
        lines.append(f"max_spread {self.max_spread:.12e}")
        lines.append(f"passed {str(self.passed).lower()}")
        return "\n".join(lines) + "\n"


def pool_equivalence_check(
    channel: QuantumChannel,
    subset,
    rho0: DensityMatrix | None = None,
    tolerance: float = ATOL,
) -> PoolEquivalenceReport:
    """Compare the measured projection across all ten pool variants.

    Runs the exact twirl with the full 24-element group, the 12-element
    half, and each of the eight 6-element pools, and records the
    probability of reading 0 on every measured qubit. Limited to one or
    two measured qubits to keep the full-group twirl small.
    """
    from .protocol import protocol_initial_state  # cycle-free late import
    from .states import projection_probability

    qs = tuple(sorted(_validate_subset(subset, channel.n)))
    if len(qs) > 2:
        raise ValueError("pool equivalence check supports at most 2 measured qubits")
    if rho0 is None:
        rho0 = protocol_initial_state(channel.n, qs)
    pools = [build_pool("full-24"), build_pool("half-12")]
    pools += [build_pool("minimal-6", symplectic=s, pauli_pair=(p1, p2))
              for s, p1, p2 in minimal_pool_choices()]
    probs = {}
    for pool in pools:
        rho1 = twirl_exact(channel, qs, rho0, pool)
        probs[pool.label] = projection_probability(rho1, qs)
    spread = max(probs.values()) - min(probs.values())
    return PoolEquivalenceReport(qs, probs, spread, tolerance, spread <= tolerance)
