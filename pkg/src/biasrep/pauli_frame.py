"""Pauli-frame simulation backend.

Errors are tracked symbolically relative to the noiseless reference run of a
circuit: each qubit carries one of {I, X, Y, Z, Leaked}, stored as (x, z)
bits plus a leak flag, with global signs ignored.  Measurement outcomes are
reported as flips against the reference outcome (bit 0), which is a valid
trajectory of every gadget circuit built here.

Leaked is absorbing.  A CPHASE between a leaked and a normal qubit dephases
the normal partner according to the leak policy (by default a random Z,
the maximally ignorant choice for an undefined partner phase); measuring a
leaked qubit yields a uniformly random outcome, and the measurement replaces
the qubit with a fresh unleaked one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .gadgets import Circuit, ScheduleViolation, check_schedule
from .noise_model import (ErrorRateTable, FaultEvent, FaultKind, OpKind,
                          sample_faults)
from .streams import (TAG_FAULT, TAG_LEAK_CZ, TAG_LEAK_OUTCOME, FaultStream,
                      uniform_vector)


class LeakPolicy(str, Enum):
    """What a CPHASE does to the normal partner of a leaked qubit."""

    RANDOM_Z = "random-z"
    ALWAYS_Z = "always-z"
    NEVER_Z = "never-z"


_STATES = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}


class PauliFrame:
    """Per-qubit symbolic error state, sign-free."""

    __slots__ = ("x", "z", "leaked")

    def __init__(self, n_qubits: int):
        self.x = bytearray(n_qubits)
        self.z = bytearray(n_qubits)
        self.leaked = bytearray(n_qubits)

    def __len__(self) -> int:
        return len(self.x)

    def state(self, q: int) -> str:
        if self.leaked[q]:
            return "Leaked"
        return _STATES[(self.x[q], self.z[q])]

    def states(self) -> list[str]:
        return [self.state(q) for q in range(len(self))]

    def multiply(self, q: int, x: int, z: int) -> None:
        """Multiply the frame entry by a Pauli with the given (x, z) bits.
        No effect on leaked qubits (leak is absorbing)."""
        if self.leaked[q]:
            return
        self.x[q] ^= x
        self.z[q] ^= z

    def set_leaked(self, q: int) -> None:
        self.leaked[q] = 1
        self.x[q] = 0
        self.z[q] = 0

    def reset(self, q: int) -> None:
        """Fresh qubit (preparation or measurement replacement)."""
        self.x[q] = 0
        self.z[q] = 0
        self.leaked[q] = 0

    def inject(self, event: FaultEvent) -> None:
        kind = event.error
        if kind is FaultKind.Z:
            self.multiply(event.qubit, 0, 1)
        elif kind is FaultKind.X:
            self.multiply(event.qubit, 1, 0)
        elif kind is FaultKind.Y:
            self.multiply(event.qubit, 1, 1)
        elif kind is FaultKind.LEAK:
            self.set_leaked(event.qubit)
        else:
            raise ValueError(f"cannot inject {kind} into a frame")

    def digest(self) -> str:
        parts = [f"{q}:{'L' if self.leaked[q] else _STATES[(self.x[q], self.z[q])]}"
                 for q in range(len(self))
                 if self.leaked[q] or self.x[q] or self.z[q]]
        return " ".join(parts) if parts else "-"

    def copy(self) -> "PauliFrame":
        other = PauliFrame(len(self))
        other.x[:] = self.x
        other.z[:] = self.z
        other.leaked[:] = self.leaked
        return other


def conjugate_through_cz(frame: PauliFrame, q1: int, q2: int, *,
                         policy: LeakPolicy | str = LeakPolicy.RANDOM_Z,
                         stream: FaultStream | None = None,
                         location_id: int = 0) -> PauliFrame:
    """Conjugate the frame through a CPHASE on (q1, q2), in place.

    X and Y components pick up a Z on the partner qubit; Z components
    commute.  If exactly one qubit is leaked the normal partner acquires a Z
    per the leak policy (the random-Z policy draws from ``stream``); if both
    are leaked nothing happens.
    """
    if q1 == q2:
        raise ValueError("CPHASE requires two distinct qubits")
    policy = LeakPolicy(policy)
    l1, l2 = frame.leaked[q1], frame.leaked[q2]
    if not l1 and not l2:
        frame.z[q2] ^= frame.x[q1]
        frame.z[q1] ^= frame.x[q2]
        return frame
    if l1 and l2:
        return frame
    normal = q2 if l1 else q1
    if policy is LeakPolicy.ALWAYS_Z:
        frame.z[normal] ^= 1
    elif policy is LeakPolicy.RANDOM_Z:
        if stream is None:
            raise ValueError("random-z leak policy needs a FaultStream")
        if stream.uniform(location_id, normal, TAG_LEAK_CZ) < 0.5:
            frame.z[normal] ^= 1
    return frame


def measure_x(frame: PauliFrame, q: int, ideal_outcome: int = 0,
              flip_fault: bool = False, *, stream: FaultStream | None = None,
              location_id: int = 0) -> int:
    """Resolve an X-basis measurement against the frame.

    A leaked qubit yields a uniformly random bit (leakage converted to a
    regular outcome error); otherwise the outcome is the ideal one flipped
    by any Z or Y frame component and by a measurement fault.  The qubit is
    replaced by a fresh one afterwards.
    """
    if frame.leaked[q]:
        if stream is None:
            raise ValueError("measuring a leaked qubit needs a FaultStream")
        bit = int(stream.uniform(location_id, q, TAG_LEAK_OUTCOME) < 0.5)
    else:
        bit = ideal_outcome ^ frame.z[q] ^ int(flip_fault)
    frame.reset(q)
    return bit


@dataclass
class OutcomeRecord:
    """Measurement outcomes by location id; bit 0 is the +1 outcome of the
    noiseless reference run.  ``leaked_random`` marks outcomes that were
    drawn uniformly because the measured qubit was leaked."""

    bits: dict[int, int] = field(default_factory=dict)
    leaked_random: dict[int, bool] = field(default_factory=dict)


@dataclass
class RunResult:
    outcomes: OutcomeRecord
    frame: PauliFrame
    trace: list[str] | None = None


def run_circuit(circuit: Circuit, rates: ErrorRateTable, seed: int, *,
                trial: int = 0, forced_faults: Sequence[FaultEvent] = (),
                leak_policy: LeakPolicy | str = LeakPolicy.RANDOM_Z,
                trace: bool = False, validate: bool = True) -> RunResult:
    """Single-trial frame propagation through a circuit.

    Iterates locations in time order: gate action first (frame conjugation
    for CPHASE), then sampled faults plus any forced faults for that
    location.  Deterministic given (seed, trial); draws are keyed per
    (location, qubit) so they are independent of execution order.
    """
    if validate:
        violations = check_schedule(circuit)
        if violations:
            raise ScheduleViolation(*violations[0])
    rates.validate()
    noiseless = all(r.total == 0.0 for r in rates.entries.values()) \
        and not rates.cphase_zz
    policy = LeakPolicy(leak_policy)
    stream = FaultStream(seed, trial)
    frame = PauliFrame(circuit.n_qubits)
    record = OutcomeRecord()
    lines: list[str] | None = [] if trace else None
    forced_by_loc: dict[int, list[FaultEvent]] = {}
    for ev in forced_faults:
        forced_by_loc.setdefault(ev.location_id, []).append(ev)

    def location_faults(loc) -> list[FaultEvent]:
        forced = forced_by_loc.get(loc.index, [])
        if noiseless:
            return forced
        species = tuple(circuit.species_of(q) for q in loc.qubits)
        return sample_faults(loc.kind, loc.qubits, species, loc.index,
                             rates, stream) + forced

    for loc in circuit.locations:
        if loc.kind is OpKind.PREP_PLUS:
            frame.reset(loc.qubits[0])
            faults = location_faults(loc)
            for ev in faults:
                frame.inject(ev)
        elif loc.kind is OpKind.CPHASE:
            conjugate_through_cz(frame, *loc.qubits, policy=policy,
                                 stream=stream, location_id=loc.index)
            faults = location_faults(loc)
            for ev in faults:
                frame.inject(ev)
        else:
            q = loc.qubits[0]
            faults = location_faults(loc)
            flip = False
            for ev in faults:
                if ev.error is FaultKind.MEAS_FLIP:
                    flip = not flip
                else:
                    frame.inject(ev)  # forced pre-measurement Pauli/leak
            was_leaked = bool(frame.leaked[q])
            bit = measure_x(frame, q, 0, flip, stream=stream,
                            location_id=loc.index)
            record.bits[loc.index] = bit
            record.leaked_random[loc.index] = was_leaked
        if lines is not None:
            fault_str = ",".join(f"{ev.qubit}:{ev.error.value}" for ev in faults) or "-"
            lines.append(f"{loc.index}\t{loc.kind.value} {' '.join(map(str, loc.qubits))}"
                         f"\tfaults={fault_str}\tframe={frame.digest()}")
    return RunResult(record, frame, lines)


# ---------------------------------------------------------------------------
# Vectorized batch runner
# ---------------------------------------------------------------------------

@dataclass
class BatchRunResult:
    """Trial-parallel run output: arrays indexed [column, trial]."""

    trials: np.ndarray                 # uint64 trial indices, shape [B]
    meas_locations: tuple[int, ...]    # measurement location ids, row order
    outcome_bits: np.ndarray           # bool [M, B]
    leaked_random: np.ndarray          # bool [M, B]
    frame_x: np.ndarray                # bool [N, B]
    frame_z: np.ndarray                # bool [N, B]
    frame_leaked: np.ndarray           # bool [N, B]

    def outcome_row(self, location_id: int) -> np.ndarray:
        return self.outcome_bits[self.meas_locations.index(location_id)]


def run_circuit_batch(circuit: Circuit, rates: ErrorRateTable, seed: int,
                      trials: np.ndarray, *,
                      leak_policy: LeakPolicy | str = LeakPolicy.RANDOM_Z,
                      validate: bool = True) -> BatchRunResult:
    """Run a block of trials at once with numpy boolean arrays.

    Per-trial results are bit-identical to :func:`run_circuit` because every
    random decision is keyed by (seed, trial, location, qubit, purpose), not
    by draw order.  Batch boundaries therefore never affect outcomes.
    """
    if validate:
        violations = check_schedule(circuit)
        if violations:
            raise ScheduleViolation(*violations[0])
    rates.validate()
    policy = LeakPolicy(leak_policy)
    trials = np.asarray(trials, dtype=np.uint64)
    B = trials.shape[0]
    N = circuit.n_qubits
    meas_locs = circuit.measure_locations
    row_of = {loc: i for i, loc in enumerate(meas_locs)}

    x = np.zeros((N, B), dtype=bool)
    z = np.zeros((N, B), dtype=bool)
    lk = np.zeros((N, B), dtype=bool)
    out_bits = np.zeros((len(meas_locs), B), dtype=bool)
    out_leakrand = np.zeros((len(meas_locs), B), dtype=bool)

    def pauli_faults(loc_id: int, q: int, eps: float, half_other: float,
                     y_width: float, leak: float) -> None:
        """Categorical fault draw on qubit q: thresholds [Z, X, Y, LEAK]."""
        if eps == 0.0 and half_other == 0.0 and y_width == 0.0 and leak == 0.0:
            return
        u = uniform_vector(seed, trials, loc_id, q, TAG_FAULT)
        ok = ~lk[q]
        zf = (u < eps) & ok
        e1 = eps + half_other
        xf = (u >= eps) & (u < e1) & ok
        e2 = e1 + y_width
        yf = (u >= e1) & (u < e2) & ok
        leakf = (u >= e2) & (u < e2 + leak) & ok
        z[q] ^= zf | yf
        x[q] ^= xf | yf
        lk[q] |= leakf
        x[q] &= ~leakf
        z[q] &= ~leakf

    for loc in circuit.locations:
        if loc.kind is OpKind.PREP_PLUS:
            q = loc.qubits[0]
            x[q] = False
            z[q] = False
            lk[q] = False
            r = rates.get(loc.kind, circuit.species_of(q))
            # Prep faults: Z, Y (X is trivial on |+>), leak.
            pauli_faults(loc.index, q, r.eps, 0.0, r.eps_other, r.eps_leak)
        elif loc.kind is OpKind.CPHASE:
            q1, q2 = loc.qubits
            both_ok = ~lk[q1] & ~lk[q2]
            z[q2] ^= x[q1] & both_ok
            z[q1] ^= x[q2] & both_ok
            if policy is not LeakPolicy.NEVER_Z:
                for leaked_q, normal_q in ((q1, q2), (q2, q1)):
                    one = lk[leaked_q] & ~lk[normal_q]
                    if policy is LeakPolicy.RANDOM_Z:
                        draw = uniform_vector(seed, trials, loc.index, normal_q,
                                              TAG_LEAK_CZ) < 0.5
                        z[normal_q] ^= one & draw
                    else:
                        z[normal_q] ^= one
            for q in (q1, q2):
                r = rates.get(loc.kind, circuit.species_of(q))
                pauli_faults(loc.index, q, r.eps, r.eps_other / 2,
                             r.eps_other / 2, r.eps_leak)
            if rates.cphase_zz:
                u = uniform_vector(seed, trials, loc.index, -1, TAG_FAULT)
                zz = u < rates.cphase_zz
                z[q1] ^= zz & ~lk[q1]
                z[q2] ^= zz & ~lk[q2]
        else:
            q = loc.qubits[0]
            r = rates.get(loc.kind, circuit.species_of(q))
            bit = z[q].copy()
            if r.eps:
                flip = uniform_vector(seed, trials, loc.index, q, TAG_FAULT) < r.eps
                bit ^= flip
            leaked_now = lk[q]
            if leaked_now.any():
                rnd = uniform_vector(seed, trials, loc.index, q,
                                     TAG_LEAK_OUTCOME) < 0.5
                bit = np.where(leaked_now, rnd, bit)
            row = row_of[loc.index]
            out_bits[row] = bit
            out_leakrand[row] = leaked_now
            x[q] = False
            z[q] = False
            lk[q] = False
    return BatchRunResult(trials, meas_locs, out_bits, out_leakrand, x, z, lk)
