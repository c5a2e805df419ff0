"""Config-driven experiment runner.

Reads a flat key-value config file (overridable from the command line),
runs the decay protocol on the requested gate for each target subset, and
writes two machine-readable outputs: a key-value report and a flat CSV
table. Outputs are byte-stable for a fixed config and seed; wall-clock
timing goes to the console only.

Exit codes: 0 on success, 1 for configuration problems, 2 when an
exact-mode result disagrees with the chi-diagonal oracle beyond tolerance.
"""

from __future__ import annotations

import argparse
import itertools
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .cliffords import CliffordPool, parse_pool
from .nmr import (
    cnot_gate,
    compile_sequence,
    crotonic_preset,
    time_suspension_sequence,
    zz_coupling,
)
from .paulis import (
    MAX_CHI_QUBITS,
    CollectiveCoefficients,
    chi_diagonal,
    collective_coefficients,
)
from .protocol import (
    DecayEstimate,
    ErrorBudget,
    SamplePlan,
    combine_subset,
    decay_error_bound,
    derive_seed,
    fidelity_decay_exact,
    plan_from_count,
    plan_realizations,
    run_sampled_campaign,
    subset_coefficient_error,
)
from .states import MAX_QUBITS, QuantumChannel

ORACLE_TOL = 1e-9


class ConfigError(Exception):
    """Invalid configuration; maps to exit code 1."""


class OracleMismatch(Exception):
    """Exact-mode result off the oracle beyond tolerance; exit code 2."""


@dataclass(frozen=True)
class ExperimentConfig:
    gate: str = "identity"
    n: int = 4
    subsets: tuple[tuple[int, ...], ...] = ()
    mode: str = "exact"
    pool: str = "S1:I:X"
    seed: int = 0
    delta: float | None = None
    epsilon: float | None = None
    realizations: int | None = None
    prep_error: float = 0.0
    clifford_error: float = 0.0
    out: str | None = None
    threads: int = 1
    oracle: bool = True
    assignment_order: str = "random"
    channel_sampling: str = "exact"
    ie_duration: float = 12.2e-3
    ie_pulse_error: float = 0.0


def parse_subsets(text: str) -> tuple[tuple[int, ...], ...]:
    """Parse ``1-2,2-3,1-4`` style target lists (dash-joined qubits per subset)."""
    text = text.strip()
    if not text or text == "none":
        return ()
    out = []
    for token in text.split(","):
        try:
            qs = tuple(int(q) for q in token.strip().split("-"))
        except ValueError as exc:
            raise ConfigError(f"cannot parse subset {token!r}") from exc
        out.append(qs)
    return tuple(out)


def format_subset(subset: tuple[int, ...]) -> str:
    return "-".join(str(q) for q in subset)


_CONFIG_KEYS = {
    "gate": str,
    "n": int,
    "subsets": parse_subsets,
    "mode": str,
    "pool": str,
    "seed": int,
    "delta": float,
    "epsilon": float,
    "realizations": int,
    "prep_error": float,
    "clifford_error": float,
    "out": str,
    "threads": int,
    "oracle": lambda s: s.lower() in ("on", "true", "1", "yes"),
    "assignment_order": str,
    "channel_sampling": str,
    "ie_duration": float,
    "ie_pulse_error": float,
}


def parse_config_file(path: str | Path) -> ExperimentConfig:
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition(" ")
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            values[key] = _CONFIG_KEYS[key](value.strip())
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value for {key!r}: {value!r}") from exc
    return ExperimentConfig(**values)


def build_channel(config: ExperimentConfig) -> QuantumChannel:
    """Instantiate the gate or noise process named by the config."""
    gate = config.gate.strip()
    n = config.n
    if gate == "identity":
        return QuantumChannel.identity(n)
    if gate == "cnot":
        return QuantumChannel.from_unitary(cnot_gate(1, 2, n))
    if gate == "cnot2":
        u = cnot_gate(1, 2, n).data
        return QuantumChannel.from_unitary(u @ u)
    if gate.startswith("c12"):
        arg = gate[3:].strip().strip(":()")
        try:
            beta = float(arg)
        except ValueError as exc:
            raise ConfigError(f"cannot parse coupling angle in {gate!r}") from exc
        return QuantumChannel.from_unitary(zz_coupling(beta, (1, 2), n))
    if gate in ("ie", "ie-sequence"):
        if n != crotonic_preset().n:
            raise ConfigError("the ie-sequence gate requires n = 4")
        seq = time_suspension_sequence(config.ie_duration, config.ie_pulse_error)
        return QuantumChannel.from_unitary(compile_sequence(seq, crotonic_preset()))
    if gate.startswith("matrix:"):
        return QuantumChannel.from_unitary(_read_matrix_file(gate[len("matrix:"):]))
    if gate.startswith("ensemble:"):
        return QuantumChannel.unitary_ensemble(_read_ensemble_file(gate[len("ensemble:"):]))
    raise ConfigError(f"unknown gate {config.gate!r}")


def _parse_matrix_rows(lines: list[str], origin: str) -> np.ndarray:
    rows = []
    for line in lines:
        try:
            rows.append([complex(tok) for tok in line.split()])
        except ValueError as exc:
            raise ConfigError(f"bad matrix entry in {origin}: {line!r}") from exc
    if not rows or any(len(r) != len(rows) for r in rows):
        raise ConfigError(f"matrix in {origin} is not square")
    return np.array(rows, dtype=complex)


def _read_matrix_file(path: str) -> np.ndarray:
    """Whitespace-separated complex entries (Python syntax, e.g. 0.5+0.5j),
    one matrix row per line."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read matrix file {path}: {exc}") from exc
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    return _parse_matrix_rows(lines, path)


def _read_ensemble_file(path: str) -> list[tuple[float, np.ndarray]]:
    """Blocks of ``weight w`` followed by matrix rows, separated by blank lines."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read ensemble file {path}: {exc}") from exc
    terms = []
    block: list[str] = []
    weight: float | None = None

    def flush() -> None:
        nonlocal block, weight
        if weight is None and not block:
            return
        if weight is None or not block:
            raise ConfigError(f"incomplete ensemble block in {path}")
        terms.append((weight, _parse_matrix_rows(block, path)))
        block, weight = [], None

    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            flush()
            continue
        if line.startswith("weight"):
            flush()
            weight = float(line.split()[1])
        else:
            block.append(line)
    flush()
    if not terms:
        raise ConfigError(f"no ensemble terms in {path}")
    return terms


@dataclass(frozen=True)
class SubsetResult:
    subset: tuple[int, ...]
    decays: dict[tuple[int, ...], DecayEstimate]
    eta_col: float
    eta_stderr: float
    oracle: float | None
    discrepancy: float | None
    tail: float | None
    decay_bounds: dict[tuple[int, ...], float] = field(default_factory=dict)
    eta_bound: float | None = None


@dataclass(frozen=True)
class Report:
    config: ExperimentConfig
    plan: SamplePlan | None
    results: tuple[SubsetResult, ...]

    def to_report_text(self) -> str:
        cfg = self.config
        lines = ["# twirlsim experiment report", "[config]"]
        lines.append(f"gate {cfg.gate}")
        lines.append(f"n {cfg.n}")
        lines.append(f"mode {cfg.mode}")
        lines.append(f"pool {cfg.pool}")
        lines.append(f"seed {cfg.seed}")
        lines.append("subsets " + (",".join(format_subset(s) for s in cfg.subsets) or "none"))
        lines.append(f"realizations {self.plan.realizations if self.plan else 0}")
        lines.append(f"assignment_order {cfg.assignment_order}")
        lines.append(f"channel_sampling {cfg.channel_sampling}")
        lines.append(f"prep_error {cfg.prep_error:.12e}")
        lines.append(f"clifford_error {cfg.clifford_error:.12e}")
        for res in self.results:
            lines.append("")
            lines.append(f"[subset {format_subset(res.subset)}]")
            for sub in sorted(res.decays, key=lambda s: (len(s), s)):
                est = res.decays[sub]
                lines.append(
                    f"decay {format_subset(sub)} {est.value:.12e} "
                    f"stderr {est.std_error:.12e} realizations {est.realizations}")
            lines.append(f"eta_col {res.eta_col:.12e}")
            lines.append(f"eta_stderr {res.eta_stderr:.12e}")
            if res.oracle is not None:
                lines.append(f"oracle {res.oracle:.12e}")
                lines.append(f"discrepancy {res.discrepancy:.12e}")
                lines.append(f"oracle_tail {res.tail:.12e}")
            for sub in sorted(res.decay_bounds, key=lambda s: (len(s), s)):
                lines.append(
                    f"decay_bound {format_subset(sub)} {res.decay_bounds[sub]:.12e}")
            if res.eta_bound is not None:
                lines.append(f"eta_bound {res.eta_bound:.12e}")
        return "\n".join(lines) + "\n"

    def to_table_csv(self) -> str:
        lines = ["gate,subset,gamma,stderr,eta_col,eta_stderr,oracle,discrepancy"]
        for res in self.results:
            full = res.decays[res.subset]
            oracle = f"{res.oracle:.12e}" if res.oracle is not None else ""
            disc = f"{res.discrepancy:.12e}" if res.discrepancy is not None else ""
            lines.append(
                f"{self.config.gate},{format_subset(res.subset)},"
                f"{full.value:.12e},{full.std_error:.12e},"
                f"{res.eta_col:.12e},{res.eta_stderr:.12e},{oracle},{disc}")
        return "\n".join(lines) + "\n"


def _validate_config(config: ExperimentConfig) -> SamplePlan | None:
    if not 1 <= config.n <= MAX_QUBITS:
        raise ConfigError(f"register size {config.n} out of range 1..{MAX_QUBITS}")
    if config.mode not in ("exact", "sampled"):
        raise ConfigError(f"mode must be exact or sampled, got {config.mode!r}")
    for subset in config.subsets:
        if len(subset) != len(set(subset)):
            raise ConfigError(f"duplicate qubits in subset {subset}")
        if any(not 1 <= q <= config.n for q in subset):
            raise ConfigError(f"subset {format_subset(subset)} outside 1..{config.n}")
        if not 1 <= len(subset) <= 3:
            raise ConfigError("target subsets must have 1 to 3 qubits")
    if config.threads < 1:
        raise ConfigError("thread count must be at least 1")
    try:
        parse_pool(config.pool)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if config.mode != "sampled":
        return None
    if config.realizations is not None:
        if config.realizations <= 0:
            raise ConfigError("realization count must be positive")
        if config.delta is not None:
            floor = math.ceil(1.0 / config.delta**2)
            if config.realizations < floor:
                raise ConfigError(
                    f"{config.realizations} realizations below the "
                    f"1/delta^2 floor of {floor}")
        return plan_from_count(config.realizations)
    if config.delta is None or config.epsilon is None:
        raise ConfigError("sampled mode needs realizations, or delta and epsilon")
    try:
        return plan_realizations(config.delta, config.epsilon)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _oracle_values(
    channel: QuantumChannel, config: ExperimentConfig
) -> CollectiveCoefficients | None:
    if not config.oracle or config.n > MAX_CHI_QUBITS:
        return None
    return collective_coefficients(chi_diagonal(channel))


def _run_subset(
    channel: QuantumChannel,
    config: ExperimentConfig,
    plan: SamplePlan | None,
    pool: CliffordPool,
    oracle: CollectiveCoefficients | None,
    index: int,
    subset: tuple[int, ...],
) -> SubsetResult:
    qs = tuple(sorted(subset))
    if config.mode == "exact":
        decays = {}
        for r in range(1, len(qs) + 1):
            for sub in itertools.combinations(qs, r):
                decays[sub] = fidelity_decay_exact(channel, sub, pool)
    else:
        assert plan is not None
        decays = run_sampled_campaign(
            channel, qs, plan, pool, derive_seed(config.seed, index),
            assignment_order=config.assignment_order,
            channel_sampling=config.channel_sampling)
    eta = combine_subset(decays)
    ordered = sorted(decays, key=lambda s: (len(s), s))
    if config.mode == "exact":
        eta_err = 0.0
    else:
        eta_err = subset_coefficient_error([decays[s].std_error for s in ordered])
    oracle_val = tail = disc = None
    if oracle is not None:
        oracle_val = oracle[qs]
        tail = sum(v for s, v in oracle.values.items()
                   if set(s) > set(qs))
        disc = eta - oracle_val
        if config.mode == "exact" and abs(disc - tail) > ORACLE_TOL:
            raise OracleMismatch(
                f"subset {format_subset(qs)}: combined coefficient {eta} is "
                f"{disc - tail} away from the oracle prediction")
    bounds: dict[tuple[int, ...], float] = {}
    eta_bound = None
    if config.prep_error > 0.0 or config.clifford_error > 0.0:
        budget = ErrorBudget(config.prep_error, config.clifford_error)
        bounds = {s: decay_error_bound(budget, max(0.0, min(1.0, decays[s].value)))
                  for s in ordered}
        eta_bound = subset_coefficient_error([bounds[s] for s in ordered])
    return SubsetResult(qs, dict(decays), eta, eta_err, oracle_val, disc, tail,
                        bounds, eta_bound)


def run_experiment(config: ExperimentConfig) -> Report:
    """Execute the configured experiment over every target subset."""
    plan = _validate_config(config)
    channel = build_channel(config)
    pool = parse_pool(config.pool)
    oracle = _oracle_values(channel, config)
    jobs = list(enumerate(config.subsets))
    if config.threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool_exec:
            results = list(pool_exec.map(
                lambda job: _run_subset(channel, config, plan, pool, oracle, *job),
                jobs))
    else:
        results = [_run_subset(channel, config, plan, pool, oracle, i, s)
                   for i, s in jobs]
    return Report(config, plan, tuple(results))


def report_write(report: Report, out_base: str | Path) -> tuple[Path, Path]:
    """Write ``<base>.report.txt`` and ``<base>.table.csv``."""
    base = Path(out_base)
    report_path = base.with_name(base.name + ".report.txt")
    table_path = base.with_name(base.name + ".table.csv")
    try:
        base.parent.mkdir(parents=True, exist_ok=True)
        report_path.write_text(report.to_report_text())
        table_path.write_text(report.to_table_csv())
    except OSError as exc:
        raise ConfigError(f"cannot write outputs at {base}: {exc}") from exc
    return report_path, table_path


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twirlsim",
        description="Measure spatially resolved error coefficients of a gate "
                    "by Clifford twirling.")
    parser.add_argument("--config", help="flat key-value config file")
    parser.add_argument("--gate", help="identity | ie-sequence | c12(beta) | cnot | "
                                       "cnot2 | matrix:<file> | ensemble:<file>")
    parser.add_argument("--n", type=int, help="register size")
    parser.add_argument("--subsets", help="targets, e.g. 1-2,2-3,1-4")
    parser.add_argument("--mode", choices=["exact", "sampled"])
    parser.add_argument("--pool", help="full-24 | half-12[:S] | S:P1:P2 (e.g. S1:I:X)")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--delta", type=float, help="target precision")
    parser.add_argument("--epsilon", type=float, help="allowed failure probability")
    parser.add_argument("--n-realizations", type=int, dest="realizations")
    parser.add_argument("--prep-error", type=float, dest="prep_error")
    parser.add_argument("--clifford-error", type=float, dest="clifford_error")
    parser.add_argument("--out", help="output base path (writes .report.txt and .table.csv)")
    parser.add_argument("--threads", type=int)
    parser.add_argument("--oracle", choices=["on", "off"])
    parser.add_argument("--assignment-order", choices=["random", "cyclic"],
                        dest="assignment_order")
    parser.add_argument("--channel-sampling", choices=["exact", "per-shot-ensemble"],
                        dest="channel_sampling")
    parser.add_argument("--ie-duration", type=float, dest="ie_duration")
    parser.add_argument("--ie-pulse-error", type=float, dest="ie_pulse_error")
    return parser


def _merge_args(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    updates = {}
    for key in ("gate", "n", "mode", "pool", "seed", "delta", "epsilon",
                "realizations", "prep_error", "clifford_error", "out", "threads",
                "assignment_order", "channel_sampling", "ie_duration",
                "ie_pulse_error"):
        val = getattr(args, key)
        if val is not None:
            updates[key] = val
    if args.subsets is not None:
        updates["subsets"] = parse_subsets(args.subsets)
    if args.oracle is not None:
        updates["oracle"] = args.oracle == "on"
    return replace(config, **updates)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = parse_config_file(args.config) if args.config else ExperimentConfig()
        config = _merge_args(config, args)
        started = time.perf_counter()
        report = run_experiment(config)
        elapsed = time.perf_counter() - started
    except ConfigError as exc:
        print(f"twirlsim: config error: {exc}", file=sys.stderr)
        return 1
    except OracleMismatch as exc:
        print(f"twirlsim: numerical invariant violated: {exc}", file=sys.stderr)
        return 2
    if config.out:
        try:
            report_path, table_path = report_write(report, config.out)
        except ConfigError as exc:
            print(f"twirlsim: {exc}", file=sys.stderr)
            return 1
        print(f"wrote {report_path} and {table_path} ({elapsed:.2f} s)")
    else:
        sys.stdout.write(report.to_report_text())
        print(f"# elapsed {elapsed:.2f} s", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
