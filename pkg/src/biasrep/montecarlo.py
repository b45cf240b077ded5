"""Majority decoding, Monte Carlo logical-error estimation, and an exact
small-instance fault-enumeration oracle.

A trial is classified by combining the run's residual output frame with the
corrections derived from the (majority-decoded) measurement outcomes:

* logical phase error: the Z-pattern on an output block, after applying any
  recorded logical-Z correction (Z on every block qubit), has weight above
  n/2, i.e. it majority-decodes to the coded Z operator;
* logical bit-flip error: the X-parity of the block (X-type components mod
  the code's X-pair stabilizers) disagrees with the recorded logical-X
  correction;
* leaked output: any output-block qubit ends leaked.  Leakage cannot be
  corrected by the code, so by default it is folded into the non-phase
  logical rate while remaining separately visible on the trial flags.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product
from typing import Sequence

import numpy as np

from .gadgets import Circuit
from .noise_model import (ErrorRateTable, FaultEvent, FaultKind, OpKind,
                          Rates, Species)
from .pauli_frame import (BatchRunResult, LeakPolicy, RunResult,
                          run_circuit, run_circuit_batch)


def majority(bits: Sequence[int]) -> int:
    """Majority value of an odd-length bit list."""
    if len(bits) % 2 == 0:
        raise ValueError(f"majority needs an odd number of bits, got {len(bits)}")
    return int(sum(bits) * 2 > len(bits))


@dataclass(frozen=True)
class TrialResult:
    logical_z_error: bool
    logical_x_error: bool
    leaked_output: bool


@dataclass(frozen=True)
class RateEstimate:
    mean: float
    stderr: float
    trials: int
    seed: int

    @staticmethod
    def from_counts(errors: int, trials: int, seed: int) -> "RateEstimate":
        mean = errors / trials
        return RateEstimate(mean, math.sqrt(mean * (1.0 - mean) / trials),
                            trials, seed)


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

def _majority_bits_batch(circuit: Circuit, result: BatchRunResult
                         ) -> dict[str, np.ndarray]:
    out = {}
    for name, loc_ids in circuit.groups.items():
        rows = np.stack([result.outcome_row(loc) for loc in loc_ids])
        out[name] = rows.sum(axis=0) * 2 > rows.shape[0]
    return out


def classify_batch(circuit: Circuit, result: BatchRunResult
                   ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized trial classification; returns boolean arrays
    (logical_z, logical_x, leaked_output), each of shape [B]."""
    B = result.outcome_bits.shape[1]
    maj = _majority_bits_batch(circuit, result)
    x_corr = {b.name: np.zeros(B, dtype=bool) for b in circuit.output_blocks}
    z_corr = {b.name: np.zeros(B, dtype=bool) for b in circuit.output_blocks}
    for corr in circuit.corrections:
        bit = np.zeros(B, dtype=bool)
        for src in corr.sources:
            bit ^= maj[src]
        (x_corr if corr.pauli == "X" else z_corr)[corr.block] ^= bit

    logical_z = np.zeros(B, dtype=bool)
    logical_x = np.zeros(B, dtype=bool)
    leaked = np.zeros(B, dtype=bool)
    for block in circuit.output_blocks:
        ids = list(block.qubits)
        n = len(ids)
        xpar = np.logical_xor.reduce(result.frame_x[ids], axis=0)
        logical_x |= xpar ^ x_corr[block.name]
        weight = result.frame_z[ids].sum(axis=0)
        weight = np.where(z_corr[block.name], n - weight, weight)
        logical_z |= weight * 2 > n
        leaked |= result.frame_leaked[ids].any(axis=0)
    return logical_z, logical_x, leaked


def classify_run(circuit: Circuit, result: RunResult) -> TrialResult:
    """Scalar counterpart of :func:`classify_batch`."""
    maj = {name: majority([result.outcomes.bits[loc] for loc in ids])
           for name, ids in circuit.groups.items()}
    x_corr = {b.name: 0 for b in circuit.output_blocks}
    z_corr = {b.name: 0 for b in circuit.output_blocks}
    for corr in circuit.corrections:
        bit = 0
        for src in corr.sources:
            bit ^= maj[src]
        if corr.pauli == "X":
            x_corr[corr.block] ^= bit
        else:
            z_corr[corr.block] ^= bit
    lz = lx = leaked = False
    frame = result.frame
    for block in circuit.output_blocks:
        n = len(block.qubits)
        xpar = 0
        weight = 0
        for q in block.qubits:
            xpar ^= frame.x[q]
            weight += frame.z[q]
            leaked = leaked or bool(frame.leaked[q])
        if z_corr[block.name]:
            weight = n - weight
        lz = lz or (weight * 2 > n)
        lx = lx or bool(xpar ^ x_corr[block.name])
    return TrialResult(lz, lx, leaked)


def run_trial(gadget: Circuit, rates: ErrorRateTable, seed: int,
              trial_index: int = 0, *,
              forced_faults: Sequence[FaultEvent] = (),
              leak_policy: LeakPolicy | str = LeakPolicy.RANDOM_Z,
              validate: bool = True) -> TrialResult:
    """Execute one trial and classify the residual logical error."""
    result = run_circuit(gadget, rates, seed, trial=trial_index,
                         forced_faults=forced_faults, leak_policy=leak_policy,
                         validate=validate)
    return classify_run(gadget, result)


# ---------------------------------------------------------------------------
# Monte Carlo estimation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrialCounts:
    trials: int
    logical_z: int
    logical_x: int
    leaked: int
    logical_other: int     # logical_x OR leaked (leakage folded in)

    def __add__(self, other: "TrialCounts") -> "TrialCounts":
        return TrialCounts(self.trials + other.trials,
                           self.logical_z + other.logical_z,
                           self.logical_x + other.logical_x,
                           self.leaked + other.leaked,
                           self.logical_other + other.logical_other)


def count_trials(gadget: Circuit, rates: ErrorRateTable, seed: int,
                 trial_start: int, trial_stop: int, *,
                 leak_policy: LeakPolicy | str = LeakPolicy.RANDOM_Z,
                 batch_size: int = 1 << 17) -> TrialCounts:
    """Classify trials [trial_start, trial_stop) in vectorized batches.
    Results depend only on absolute trial indices, never on batching."""
    total = TrialCounts(0, 0, 0, 0, 0)
    for lo in range(trial_start, trial_stop, batch_size):
        hi = min(lo + batch_size, trial_stop)
        trials = np.arange(lo, hi, dtype=np.uint64)
        batch = run_circuit_batch(gadget, rates, seed, trials,
                                  leak_policy=leak_policy, validate=(lo == trial_start))
        lz, lx, leaked = classify_batch(gadget, batch)
        total = total + TrialCounts(hi - lo, int(lz.sum()), int(lx.sum()),
                                    int(leaked.sum()),
                                    int((lx | leaked).sum()))
    return total


def estimate_logical_rates(gadget: Circuit, rates: ErrorRateTable,
                           trials: int, seed: int, *,
                           leak_policy: LeakPolicy | str = LeakPolicy.RANDOM_Z,
                           include_leaked: bool = True,
                           batch_size: int = 1 << 17
                           ) -> tuple[RateEstimate, RateEstimate]:
    """Monte Carlo estimates of the logical phase-error rate and the logical
    non-phase rate (X/Y-type, plus leaked outputs unless disabled)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    counts = count_trials(gadget, rates, seed, 0, trials,
                          leak_policy=leak_policy, batch_size=batch_size)
    other = counts.logical_other if include_leaked else counts.logical_x
    return (RateEstimate.from_counts(counts.logical_z, trials, seed),
            RateEstimate.from_counts(other, trials, seed))


# ---------------------------------------------------------------------------
# Exact low-weight fault enumeration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FaultSite:
    """One elementary fault opportunity: a (location, qubit) cell with its
    possible fault classes and their probabilities."""

    location_id: int
    qubit: int
    choices: tuple[tuple[FaultKind, float], ...]

    @property
    def total(self) -> float:
        return sum(p for _, p in self.choices)


@dataclass(frozen=True)
class OracleResult:
    """Truncated exact logical-error probabilities from fault patterns of
    weight <= weight_max.  ``remainder_bound`` bounds the probability of any
    heavier pattern, hence the truncation error."""

    weight_max: int
    sites: int
    prob_z: float
    prob_x: float
    prob_either: float
    by_weight_z: tuple[float, ...]     # contribution per pattern weight
    by_weight_x: tuple[float, ...]
    count_z: tuple[int, ...]           # error-causing patterns per weight
    count_x: tuple[int, ...]
    remainder_bound: float
    patterns_run: int


def fault_sites(circuit: Circuit, rates: ErrorRateTable) -> list[FaultSite]:
    """Enumerate the fault opportunities of a circuit under a rate table.
    Leakage rates are rejected: a leak makes downstream propagation random,
    so exact enumeration only covers Pauli and outcome-flip faults."""
    sites: list[FaultSite] = []
    for loc in circuit.locations:
        for q in loc.qubits:
            r = rates.get(loc.kind, circuit.species_of(q))
            if r.eps_leak:
                raise ValueError(
                    "fault enumeration requires a leak-free rate table "
                    f"(location {loc.index}, qubit {q})")
            choices: list[tuple[FaultKind, float]] = []
            if loc.kind is OpKind.PREP_PLUS:
                if r.eps:
                    choices.append((FaultKind.Z, r.eps))
                if r.eps_other:
                    choices.append((FaultKind.Y, r.eps_other))
            elif loc.kind is OpKind.CPHASE:
                if r.eps:
                    choices.append((FaultKind.Z, r.eps))
                if r.eps_other:
                    choices.append((FaultKind.X, r.eps_other / 2))
                    choices.append((FaultKind.Y, r.eps_other / 2))
            else:
                if r.eps:
                    choices.append((FaultKind.MEAS_FLIP, r.eps))
            if choices:
                sites.append(FaultSite(loc.index, q, tuple(choices)))
        if loc.kind is OpKind.CPHASE and rates.cphase_zz:
            raise ValueError("fault enumeration does not support cphase_zz")
    return sites


def brute_force_oracle(gadget: Circuit, rates: ErrorRateTable,
                       weight_max: int, *,
                       max_patterns: int = 2_000_000) -> OracleResult:
    """Exact logical-error probability from exhaustive fault patterns up to
    the given weight.

    Every pattern is propagated deterministically through the frame backend
    (zero sampled rates, forced faults only) and weighted by the product of
    its fault probabilities and the no-fault survival of all other sites.
    The result is exact up to patterns of weight > weight_max, whose total
    probability is bounded by ``remainder_bound``.
    """
    from .gadgets import check_schedule, ScheduleViolation
    violations = check_schedule(gadget)
    if violations:
        raise ScheduleViolation(*violations[0])
    sites = fault_sites(gadget, rates)
    L = len(sites)
    budget = 0
    for w in range(weight_max + 1):
        per_site = max((len(s.choices) for s in sites), default=1)
        budget += math.comb(L, w) * per_site**w
    if budget > max_patterns:
        raise ValueError(f"enumeration budget exceeded: about {budget} patterns "
                         f"for {L} sites at weight {weight_max} "
                         f"(limit {max_patterns})")

    zero = ErrorRateTable(entries={
        (kind, species): Rates() for kind in OpKind for species in Species})
    survival_all = 1.0
    for s in sites:
        survival_all *= 1.0 - s.total

    by_z = [0.0] * (weight_max + 1)
    by_x = [0.0] * (weight_max + 1)
    cnt_z = [0] * (weight_max + 1)
    cnt_x = [0] * (weight_max + 1)
    prob_either = 0.0
    patterns_run = 0
    for w in range(1, weight_max + 1):
        for combo in combinations(range(L), w):
            chosen = [sites[i] for i in combo]
            for picks in product(*(s.choices for s in chosen)):
                weight = survival_all
                events = []
                for site, (kind, p) in zip(chosen, picks):
                    weight *= p / (1.0 - site.total)
                    events.append(FaultEvent(site.location_id, site.qubit, kind))
                trial = run_trial(gadget, zero, 0, 0, forced_faults=events,
                                  leak_policy=LeakPolicy.NEVER_Z,
                                  validate=False)
                patterns_run += 1
                if trial.logical_z_error:
                    by_z[w] += weight
                    cnt_z[w] += 1
                if trial.logical_x_error:
                    by_x[w] += weight
                    cnt_x[w] += 1
                if trial.logical_z_error or trial.logical_x_error:
                    prob_either += weight

    # P(more than weight_max faults) via the binomial tail union bound.
    p_max = max((s.total for s in sites), default=0.0)
    remainder = math.comb(L, weight_max + 1) * p_max**(weight_max + 1) \
        if L > weight_max else 0.0
    return OracleResult(weight_max, L, sum(by_z), sum(by_x), prob_either,
                        tuple(by_z), tuple(by_x), tuple(cnt_z), tuple(cnt_x),
                        remainder, patterns_run)
