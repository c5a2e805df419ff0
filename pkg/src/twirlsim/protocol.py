"""Fidelity-decay measurement and its combination into correlation coefficients.

The workflow: prepare |0> on the measured qubits and maximally mixed
elsewhere, twirl the channel under test with a Clifford pool, and read the
probability that every measured qubit still returns 0. One minus that
probability is the decay for the measured subset. Decays taken over all
nonempty sub-subsets of a target set combine, inclusion-exclusion style,
into the channel's collective coefficient on exactly that set (plus any
higher-weight tail the channel carries).

Exact mode enumerates every twirl assignment; sampled mode is the
shot-by-shot Monte Carlo variant whose statistics follow Bernoulli bounds.
Sampled draws come from a counter-based generator keyed by the seed, so
realization i sees the same randomness no matter how the surrounding work
is scheduled.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .cliffords import (
    CliffordPool,
    MAX_EXACT_ASSIGNMENTS,
    _embed_assignment,
    build_pool,
    twirl_exact,
)
from .paulis import ChiDiagonal
from .states import (
    ATOL,
    DensityMatrix,
    QuantumChannel,
    _validate_subset,
    projection_probability,
)

#: decays with |M| beyond this are out of exact-mode scope
MAX_EXACT_SUBSET = 3


@dataclass(frozen=True)
class DecayEstimate:
    """A fidelity-decay value for one measured subset.

    ``realizations`` is 0 for exact-mode values (std_error 0); sampled
    values carry the binomial standard error, which never exceeds
    1/sqrt(N).
    """

    subset: tuple[int, ...]
    value: float
    std_error: float = 0.0
    realizations: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "subset", tuple(sorted(int(q) for q in self.subset)))
        if self.realizations < 0:
            raise ValueError("realization count cannot be negative")
        if self.realizations == 0:
            if self.std_error != 0.0:
                raise ValueError("exact estimates carry zero standard error")
        elif self.std_error > 1.0 / math.sqrt(self.realizations) + 1e-12:
            raise ValueError(
                f"standard error {self.std_error} exceeds the 1/sqrt(N) bound")


@dataclass(frozen=True)
class SamplePlan:
    """Realization count for a target precision and failure probability."""

    delta: float
    epsilon: float
    realizations: int
    dominant_bound: str = "chernoff"

    def __post_init__(self) -> None:
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"precision delta must lie in (0, 1), got {self.delta}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"failure probability must lie in (0, 1), got {self.epsilon}")
        floor = math.log(2.0 / self.epsilon) / (2.0 * self.delta**2)
        if self.realizations < math.ceil(floor - 1e-9):
            raise ValueError(
                f"{self.realizations} realizations fall below the "
                f"concentration bound {math.ceil(floor)}")


def plan_realizations(delta: float, epsilon: float) -> SamplePlan:
    """Realizations needed for precision ``delta`` at failure rate ``epsilon``.

    Takes the larger of the Chernoff requirement ln(2/eps)/(2 delta^2) and
    the central-limit floor 1/delta^2, and records which one decided. The
    two coincide when eps = 2 e^-2; below that the Chernoff count is the
    stricter one.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"precision delta must lie in (0, 1), got {delta}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"failure probability must lie in (0, 1), got {epsilon}")
    chernoff = math.ceil(math.log(2.0 / epsilon) / (2.0 * delta**2))
    clt = math.ceil(1.0 / delta**2)
    if chernoff > clt:
        dominant = "chernoff"
    elif clt > chernoff:
        dominant = "clt"
    else:
        dominant = "tie"
    return SamplePlan(delta, epsilon, max(chernoff, clt), dominant)


def plan_from_count(realizations: int) -> SamplePlan:
    """Plan for an explicitly chosen N; implies precision 1/sqrt(N)."""
    if realizations <= 0:
        raise ValueError(f"realization count must be positive, got {realizations}")
    delta = 1.0 / math.sqrt(realizations)
    return SamplePlan(delta, 2.0 * math.exp(-2.0), realizations, "tie")


@dataclass(frozen=True)
class ErrorBudget:
    """Systematic error levels: state preparation and twirl-gate accuracy."""

    preparation: float = 0.0
    clifford: float = 0.0

    def __post_init__(self) -> None:
        for name, v in (("preparation", self.preparation), ("clifford", self.clifford)):
            if not math.isfinite(v) or v < 0.0:
                raise ValueError(f"{name} error must be finite and nonnegative, got {v}")


def protocol_initial_state(n: int, subset: Iterable[int]) -> DensityMatrix:
    """|0> on each measured qubit, maximally mixed on the rest."""
    qs = set(_validate_subset(subset, n))
    diag = np.ones(1)
    for q in range(1, n + 1):
        factor = np.array([1.0, 0.0]) if q in qs else np.array([0.5, 0.5])
        diag = np.kron(diag, factor)
    return DensityMatrix(np.diag(diag).astype(complex))


def fidelity_decay_exact(
    channel: QuantumChannel, subset, pool: CliffordPool | None = None
) -> DecayEstimate:
    """Decay for one subset from a full enumeration of twirl assignments."""
    qs = tuple(sorted(_validate_subset(subset, channel.n)))
    if len(qs) > MAX_EXACT_SUBSET:
        raise ValueError(
            f"exact decay supports at most {MAX_EXACT_SUBSET} measured qubits")
    if pool is None:
        pool = build_pool()
    rho0 = protocol_initial_state(channel.n, qs)
    rho1 = twirl_exact(channel, qs, rho0, pool)
    return DecayEstimate(qs, 1.0 - projection_probability(rho1, qs))


def decays_from_twirled_state(rho1: DensityMatrix, subset) -> dict[tuple[int, ...], float]:
    """Decays of every nonempty sub-subset, read off one twirled state.

    A twirl of the full subset already determines the decay of each smaller
    subset through the corresponding marginal projection; this is the
    single-preparation readout path.
    """
    qs = tuple(sorted(_validate_subset(subset, rho1.n)))
    out = {}
    for r in range(1, len(qs) + 1):
        for sub in itertools.combinations(qs, r):
            out[sub] = 1.0 - projection_probability(rho1, sub)
    return out


def _purity_factor(purity: float, letter: str) -> float:
    if letter == "I":
        return purity
    return (2.0 / 3.0) * (1.0 - purity / 2.0)


def fidelity_decay_from_chi(
    chi: ChiDiagonal, purities: Mapping[int, float], subset
) -> float:
    """Decay predicted directly from the chi diagonal.

    Each string contributes its chi weight times the gap between the
    product of initial purities over the measured qubits and the product of
    per-qubit depolarizing factors: 2/3 (1 - P/2) where the string acts,
    P itself where it is the identity. The identity string contributes
    nothing by construction.
    """
    qs = tuple(sorted(_validate_subset(subset, chi.n)))
    for q in qs:
        if q not in purities:
            raise ValueError(f"missing purity for qubit {q}")
        if not 0.5 - ATOL <= purities[q] <= 1.0 + ATOL:
            raise ValueError(f"purity {purities[q]} for qubit {q} outside [1/2, 1]")
    pure_product = 1.0
    for q in qs:
        pure_product *= purities[q]
    total = 0.0
    for lab, v in chi.values.items():
        if v == 0.0:
            continue
        twirled = 1.0
        for q in qs:
            twirled *= _purity_factor(purities[q], lab[q - 1])
        total += v * (pure_product - twirled)
    return total


def _as_value(x) -> float:
    return float(x.value) if isinstance(x, DecayEstimate) else float(x)


def combine_pair(decay_a, decay_b, decay_ab) -> float:
    """Collective coefficient of a pair from its three decays.

    Assumes pure preparation on both qubits: 9/4 (g_a + g_b - g_ab). Equals
    the pair coefficient exactly when the channel has no terms that touch
    the pair plus further qubits; any such terms add on top. Sampling noise
    can push the result slightly negative; it is reported unclamped.
    """
    return 2.25 * (_as_value(decay_a) + _as_value(decay_b) - _as_value(decay_ab))


def combine_subset(decays: Mapping) -> float:
    """Collective coefficient of a set M from the decays of all its subsets.

    Requires a decay for each of the 2^|M| - 1 nonempty subsets of M, with
    pure preparation. The combination is

        (3/2)^|M| * sum_S (-1)^(|S|+1) decay(S)

    which cancels every term supported on fewer than all of M and returns
    the coefficient on M plus the coefficients of its strict supersets.
    The alternating-sign pattern is pinned by the brute-force oracle tests
    before anything downstream relies on it; for |M| = 2 it reduces to
    ``combine_pair``.
    """
    table: dict[tuple[int, ...], float] = {}
    for key, val in decays.items():
        qs = tuple(sorted(int(q) for q in key))
        table[qs] = _as_value(val)
    target = max(table, key=len)
    m = len(target)
    total = 0.0
    for r in range(1, m + 1):
        for sub in itertools.combinations(target, r):
            if sub not in table:
                raise ValueError(f"missing decay for subset {sub}")
            total += (-1.0) ** (r + 1) * table[sub]
    return (1.5**m) * total


def subset_coefficient_error(std_errors: Iterable[float]) -> float:
    """Propagated error of a combined coefficient: (3/2)^m sqrt(sum sigma^2).

    The sum runs over all 2^m - 1 subset decays, so the error of a combined
    coefficient grows with the square root of that count: isolating
    coefficients on large subsets amplifies shot noise, which is why a
    weight cutoff is chosen before measuring anything.
    """
    sigmas = [float(s) for s in std_errors]
    for s in sigmas:
        if s < 0.0:
            raise ValueError(f"standard error cannot be negative, got {s}")
    m = round(math.log2(len(sigmas) + 1))
    if 2**m - 1 != len(sigmas):
        raise ValueError(f"{len(sigmas)} errors do not cover the subsets of any set")
    return (1.5**m) * math.sqrt(sum(s * s for s in sigmas))


def pair_coefficient_error(sigma_a: float, sigma_b: float, sigma_ab: float) -> float:
    """Pair case of the propagated coefficient error."""
    return subset_coefficient_error((sigma_a, sigma_b, sigma_ab))


def decay_error_bound(budget: ErrorBudget, decay: float) -> float:
    """Systematic error bound on one decay from the implementation budget.

    sqrt(e_prep^2 (1 + 4 g) + e_clifford^2) for decay value g.
    """
    if not -ATOL <= decay <= 1.0 + ATOL:
        raise ValueError(f"decay value {decay} outside [0, 1]")
    return math.sqrt(budget.preparation**2 * (1.0 + 4.0 * decay) + budget.clifford**2)


class ExperimentCounts(tuple):
    """(protocol experiments, full process-tomography experiments)."""

    __slots__ = ()

    def __new__(cls, protocol: int, process_tomography: int):
        return super().__new__(cls, (protocol, process_tomography))

    @property
    def protocol(self) -> int:
        return self[0]

    @property
    def process_tomography(self) -> int:
        return self[1]


def experiment_counts(n: int, w: int, realizations: int) -> ExperimentCounts:
    """Experiments to cover every w-qubit subset, next to the tomography cost.

    N (n choose w) experiments measure every subset of w qubits; exhaustive
    process tomography of the same register needs N 2^(4n). Exact integers,
    no overflow.
    """
    if not 1 <= w <= n:
        raise ValueError(f"weight cutoff {w} out of range 1..{n}")
    if realizations < 0:
        raise ValueError("realization count cannot be negative")
    return ExperimentCounts(realizations * math.comb(n, w),
                            realizations * 2 ** (4 * n))


def derive_seed(seed: int, index: int) -> int:
    """Stable child seed for stream ``index`` of a campaign family."""
    words = np.random.SeedSequence(entropy=seed, spawn_key=(index,)).generate_state(2, np.uint64)
    return (int(words[0]) << 64) | int(words[1])


def _assignment_matrices(pool: CliffordPool, m: int, index: int) -> tuple[np.ndarray, ...]:
    """Pool element matrices for exact-enumeration assignment ``index``."""
    K = pool.size
    mats = []
    for pos in range(m):
        digit = (index // K ** (m - 1 - pos)) % K
        mats.append(pool.elements[digit].matrix)
    return tuple(mats)


def run_sampled_campaign(
    channel: QuantumChannel,
    subset,
    plan: SamplePlan,
    pool: CliffordPool | None = None,
    seed: int = 0,
    assignment_order: str = "random",
    channel_sampling: str = "exact",
) -> dict[tuple[int, ...], DecayEstimate]:
    """Monte-Carlo decay estimates for a subset and all its sub-subsets.

    Each realization prepares a computational-basis state (|0> on the
    measured qubits, an independent uniformly random bit on each of the
    others), conjugates the channel by a twirl assignment, and draws one
    measurement outcome bit per measured qubit from the exact outcome
    distribution of the resulting state. The recorded bit-vectors yield the
    decay of the full subset and of every smaller subset from the same
    realizations.

    ``assignment_order`` picks twirl assignments uniformly at random
    (``random``) or cycles the pool deterministically (``cyclic``).
    ``channel_sampling`` applies the channel exactly per shot (``exact``)
    or, for unitary ensembles only, draws one ensemble member per shot
    (``per-shot-ensemble``), which is unbiased but noisier.

    All randomness comes from a Philox stream keyed by ``seed``; the draws
    for realization i sit at fixed stream offsets, so estimates are
    reproducible and independent of any outer parallelism.
    """
    qs = tuple(sorted(_validate_subset(subset, channel.n)))
    n, m = channel.n, len(qs)
    if pool is None:
        pool = build_pool()
    if plan.realizations <= 0:
        raise ValueError("sampling needs a positive realization count")
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    if assignment_order not in ("random", "cyclic"):
        raise ValueError(f"unknown assignment order {assignment_order!r}")
    if channel_sampling not in ("exact", "per-shot-ensemble"):
        raise ValueError(f"unknown channel sampling mode {channel_sampling!r}")
    if channel_sampling == "per-shot-ensemble" and channel.kind != "unitary-ensemble":
        raise ValueError("per-shot sampling requires a unitary-ensemble channel")
    if pool.size**m > MAX_EXACT_ASSIGNMENTS:
        raise ValueError("assignment space too large to index; reduce the subset")

    N = plan.realizations
    complement = [q for q in range(1, n + 1) if q not in qs]
    mbar = len(complement)
    n_assign = pool.size**m
    rng = np.random.Generator(np.random.Philox(key=seed))

    # fixed draw order: complement flips, assignments, ensemble terms, outcome uniforms
    flips = rng.integers(0, 2**mbar, size=N) if mbar else np.zeros(N, dtype=np.int64)
    if assignment_order == "random":
        assigns = rng.integers(0, n_assign, size=N)
    else:
        assigns = np.arange(N, dtype=np.int64) % n_assign
    if channel_sampling == "per-shot-ensemble":
        weights = np.array([w for w, _ in channel.terms])
        edges = np.cumsum(weights)
        terms = np.searchsorted(edges, rng.random(N) * edges[-1], side="right")
        terms = np.minimum(terms, len(weights) - 1)
    else:
        terms = np.zeros(N, dtype=np.int64)
    uniforms = rng.random(N)

    dim = 2**n
    # measured-outcome index per basis state: bits of qs, first qubit most significant
    idx = np.arange(dim)
    outcome_of_basis = np.zeros(dim, dtype=np.int64)
    for pos, q in enumerate(qs):
        outcome_of_basis |= (((idx >> (n - q)) & 1) << (m - 1 - pos)).astype(np.int64)

    def basis_index(flip: int) -> int:
        x = 0
        for pos, q in enumerate(complement):
            bit = (flip >> (mbar - 1 - pos)) & 1
            x |= bit << (n - q)
        return x

    assignment_cache: dict[int, np.ndarray] = {}
    cdf_cache: dict[tuple[int, int, int], np.ndarray] = {}

    def outcome_cdf(a: int, flip: int, term: int) -> np.ndarray:
        """Cumulative outcome distribution for the state the shot measures."""
        key = (a, flip, term)
        cached = cdf_cache.get(key)
        if cached is not None:
            return cached
        big = assignment_cache.get(a)
        if big is None:
            big = _embed_assignment(n, qs, _assignment_matrices(pool, m, a))
            assignment_cache[a] = big
        psi = big[:, basis_index(flip)]
        applied = channel.terms if term < 0 else ((1.0, channel.terms[term][1]),)
        pvec = np.zeros(2**m)
        for w, op in applied:
            amps = big.conj().T @ (op @ psi)
            pvec += w * np.bincount(outcome_of_basis, weights=np.abs(amps) ** 2,
                                    minlength=2**m)
        cdf = np.cumsum(pvec)
        cdf_cache[key] = cdf
        return cdf

    per_shot = channel_sampling == "per-shot-ensemble"
    n_terms = len(channel.terms)
    group_key = assigns * (2**mbar) + flips
    if per_shot:
        group_key = group_key * n_terms + terms
    outcomes = np.empty(N, dtype=np.int64)
    for key in np.unique(group_key):
        sel = group_key == key
        rest, term = divmod(int(key), n_terms) if per_shot else (int(key), -1)
        a, flip = divmod(rest, 2**mbar)
        drawn = np.searchsorted(outcome_cdf(a, flip, term), uniforms[sel], side="right")
        outcomes[sel] = np.minimum(drawn, 2**m - 1)

    results: dict[tuple[int, ...], DecayEstimate] = {}
    for r in range(1, m + 1):
        for sub in itertools.combinations(qs, r):
            mask = 0
            for pos, q in enumerate(qs):
                if q in sub:
                    mask |= 1 << (m - 1 - pos)
            successes = int(np.count_nonzero((outcomes & mask) == 0))
            p_hat = successes / N
            std = math.sqrt(p_hat * (1.0 - p_hat) / N)
            results[sub] = DecayEstimate(sub, 1.0 - p_hat, std, N)
    return results


def run_sampled_protocol(
    channel: QuantumChannel,
    subset,
    plan: SamplePlan,
    pool: CliffordPool | None = None,
    seed: int = 0,
    assignment_order: str = "random",
    channel_sampling: str = "exact",
) -> DecayEstimate:
    """Sampled decay of one subset (the full-subset entry of the campaign)."""
    qs = tuple(sorted(_validate_subset(subset, channel.n)))
    campaign = run_sampled_campaign(
        channel, qs, plan, pool, seed,
        assignment_order=assignment_order, channel_sampling=channel_sampling)
    return campaign[qs]
