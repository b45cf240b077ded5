"""Biased stochastic noise model for the {|+> prep, CPHASE, X-measure} gate set.

Noise is parameterized per (operation, qubit species) by three numbers:

* ``eps``       phase (Z-type) error rate, the dominant channel,
* ``eps_other`` all non-phase errors (realized as X/Y flips),
* ``eps_leak``  leakage out of the computational space.

The built-in default table carries the device estimates for the two qubit
species; species A is used for data qubits and species B for ancillas.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .streams import TAG_FAULT, FaultStream, uniform_vector


class Species(str, Enum):
    """Qubit family, distinguished by resonator frequency. Couplings exist
    only across species."""

    A = "A"
    B = "B"


class OpKind(str, Enum):
    PREP_PLUS = "prep"
    CPHASE = "cz"
    MEASURE_X = "measx"


class FaultKind(str, Enum):
    Z = "Z"
    X = "X"
    Y = "Y"
    LEAK = "LEAK"
    MEAS_FLIP = "FLIP"


@dataclass(frozen=True)
class Rates:
    """Error rates for one (operation, species) table entry."""

    eps: float = 0.0
    eps_other: float = 0.0
    eps_leak: float = 0.0

    def validate(self) -> None:
        for name, value in (("eps", self.eps), ("eps_other", self.eps_other),
                            ("eps_leak", self.eps_leak)):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")
        if self.eps + self.eps_other + self.eps_leak > 1.0 + 1e-12:
            raise ValueError("eps + eps_other + eps_leak exceeds 1")

    @property
    def total(self) -> float:
        return self.eps + self.eps_other + self.eps_leak


@dataclass(frozen=True)
class FaultEvent:
    location_id: int
    qubit: int
    error: FaultKind


@dataclass
class ErrorRateTable:
    """Per-(operation, species) rates, plus an optional correlated Z(x)Z rate
    for CPHASE locations (``cphase_zz``, default 0: the stochastic table does
    not assign the two-qubit dephasing term its own rate)."""

    entries: dict[tuple[OpKind, Species], Rates] = field(default_factory=dict)
    cphase_zz: float = 0.0

    def get(self, kind: OpKind, species: Species) -> Rates:
        try:
            return self.entries[(kind, species)]
        except KeyError:
            raise KeyError(f"no rates for ({kind.value}, {species.value})") from None

    def validate(self) -> None:
        for rates in self.entries.values():
            rates.validate()
        if not 0.0 <= self.cphase_zz <= 1.0:
            raise ValueError(f"cphase_zz={self.cphase_zz} outside [0, 1]")

    def bias(self, kind: OpKind = OpKind.CPHASE, species: Species = Species.A) -> float:
        r = self.get(kind, species)
        return r.eps / r.eps_other if r.eps_other else float("inf")

    # -- JSON round trip ----------------------------------------------------

    def to_json(self) -> str:
        rows = [
            {"operation": kind.value, "species": species.value,
             "eps": r.eps, "eps_other": r.eps_other, "eps_leak": r.eps_leak}
            for (kind, species), r in sorted(
                self.entries.items(), key=lambda kv: (kv[0][0].value, kv[0][1].value))
        ]
        return json.dumps({"rates": rows, "cphase_zz": self.cphase_zz}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ErrorRateTable":
        doc = json.loads(text)
        entries = {}
        for row in doc["rates"]:
            key = (OpKind(row["operation"]), Species(row["species"]))
            entries[key] = Rates(float(row.get("eps", 0.0)),
                                 float(row.get("eps_other", 0.0)),
                                 float(row.get("eps_leak", 0.0)))
        table = cls(entries=entries, cphase_zz=float(doc.get("cphase_zz", 0.0)))
        table.validate()
        return table


def default_rates() -> ErrorRateTable:
    """The built-in rate estimates for the elementary operations.

    CPHASE phase noise differs per species (the B qubit is unparked more
    deeply); relaxation and leakage sit near 3.5e-6 for both.  Preparation
    leaks much more on species B.  Measurement noise is a single outcome-flip
    rate, independent of the measurement angle.
    """
    return ErrorRateTable(entries={
        (OpKind.CPHASE, Species.A): Rates(1.96e-3, 3.5e-6, 3.5e-6),
        (OpKind.CPHASE, Species.B): Rates(4.6e-3, 3.5e-6, 3.5e-6),
        (OpKind.PREP_PLUS, Species.A): Rates(2.75e-3, 3.5e-7, 3.77e-7),
        (OpKind.PREP_PLUS, Species.B): Rates(2.75e-3, 3.5e-7, 1.5e-5),
        (OpKind.MEASURE_X, Species.A): Rates(1.83e-3, 0.0, 0.0),
        (OpKind.MEASURE_X, Species.B): Rates(1.83e-3, 0.0, 0.0),
    })


def zero_rates() -> ErrorRateTable:
    """An all-zero table (noiseless runs)."""
    return ErrorRateTable(entries={
        (kind, species): Rates()
        for kind in OpKind for species in Species
    })


# ---------------------------------------------------------------------------
# Fault sampling
# ---------------------------------------------------------------------------

def _classify_uniform(u: float, first: float, second: float, third: float,
                      fourth: float = 0.0) -> int:
    """Map one uniform draw onto fault classes 1..4 by cumulative thresholds
    (0 = no fault).  Classes are mutually exclusive within the draw."""
    if u < first:
        return 1
    u -= first
    if u < second:
        return 2
    u -= second
    if u < third:
        return 3
    u -= third
    if u < fourth:
        return 4
    return 0


_CZ_CLASSES = (None, FaultKind.Z, FaultKind.X, FaultKind.Y, FaultKind.LEAK)
_PREP_CLASSES = (None, FaultKind.Z, FaultKind.Y, FaultKind.LEAK)


def sample_faults(kind: OpKind, qubits: Sequence[int], species: Sequence[Species],
                  location_id: int, rates: ErrorRateTable,
                  stream: FaultStream) -> list[FaultEvent]:
    """Draw the faults for one circuit location.

    PREP_PLUS draws one class among {Z: eps, Y: eps_other, LEAK: eps_leak}
    (X acts trivially on |+>, so the non-phase error is realized as Y).
    CPHASE draws independently per qubit among {Z: eps, X: eps_other/2,
    Y: eps_other/2, LEAK: eps_leak} of that qubit's species, plus an optional
    correlated Z(x)Z event at rate ``cphase_zz``.  MEASURE_X flips the
    outcome with probability eps.
    """
    rates.validate()
    events: list[FaultEvent] = []
    if kind is OpKind.PREP_PLUS:
        (q,) = qubits
        r = rates.get(kind, species[0])
        cls = _classify_uniform(stream.uniform(location_id, q, TAG_FAULT),
                                r.eps, r.eps_other, r.eps_leak)
        if cls:
            events.append(FaultEvent(location_id, q, _PREP_CLASSES[cls]))
    elif kind is OpKind.CPHASE:
        for q, sp in zip(qubits, species):
            r = rates.get(kind, sp)
            cls = _classify_uniform(stream.uniform(location_id, q, TAG_FAULT),
                                    r.eps, r.eps_other / 2.0, r.eps_other / 2.0,
                                    r.eps_leak)
            if cls:
                events.append(FaultEvent(location_id, q, _CZ_CLASSES[cls]))
        if rates.cphase_zz:
            # Correlated draw keyed to the location itself (qubit slot -1).
            if stream.uniform(location_id, -1, TAG_FAULT) < rates.cphase_zz:
                for q in qubits:
                    events.append(FaultEvent(location_id, q, FaultKind.Z))
    elif kind is OpKind.MEASURE_X:
        (q,) = qubits
        r = rates.get(kind, species[0])
        if stream.uniform(location_id, q, TAG_FAULT) < r.eps:
            events.append(FaultEvent(location_id, q, FaultKind.MEAS_FLIP))
    else:
        raise ValueError(f"unknown operation kind {kind}")
    return events


def fault_class_counts(kind: OpKind, species: Species, rates: ErrorRateTable,
                       seed: int, location_id: int, qubit: int,
                       trials: int) -> dict[FaultKind, int]:
    """Vectorized fault-class frequencies for one (location, qubit) cell,
    using exactly the draws :func:`sample_faults` would make per trial."""
    u = uniform_vector(seed, np.arange(trials, dtype=np.uint64),
                       location_id, qubit, TAG_FAULT)
    r = rates.get(kind, species)
    if kind is OpKind.PREP_PLUS:
        edges = np.cumsum([r.eps, r.eps_other, r.eps_leak])
        classes = _PREP_CLASSES
    elif kind is OpKind.CPHASE:
        edges = np.cumsum([r.eps, r.eps_other / 2, r.eps_other / 2, r.eps_leak])
        classes = _CZ_CLASSES
    else:
        edges = np.cumsum([r.eps])
        classes = (None, FaultKind.MEAS_FLIP)
    idx = np.searchsorted(edges, u, side="right")
    counts: dict[FaultKind, int] = {}
    for code in range(1, len(classes)):
        counts[classes[code]] = counts.get(classes[code], 0) + int(np.sum(idx == code - 1))
    return counts


# ---------------------------------------------------------------------------
# First-order composition
# ---------------------------------------------------------------------------

def compose_rates(op_rates: Iterable[Mapping[str, float] | tuple[float, float] | Rates]
                  ) -> Rates:
    """Union-bound composition of independent locations: column-wise sums of
    (eps, eps_other).  Used for quick error budgets of composite gates built
    from elementary operations."""
    eps = 0.0
    other = 0.0
    for item in op_rates:
        if isinstance(item, Rates):
            eps += item.eps
            other += item.eps_other
        elif isinstance(item, Mapping):
            eps += float(item.get("eps", 0.0))
            other += float(item.get("eps_other", 0.0))
        else:
            e, o = item
            eps += float(e)
            other += float(o)
    return Rates(eps=eps, eps_other=other)
