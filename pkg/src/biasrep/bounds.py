"""Closed-form logical-error bounds for repetition-coded gadgets and the
(n, k) optimizer.

For an n-qubit phase-flip repetition code in which each qubit sees t fault
opportunities of phase rate eps, a logical phase error needs more than half
the block to dephase:

    phase bound:  comb(n, (n+1)/2) * (t * eps)**((n+1)//2)

while a single non-phase error anywhere is already logical:

    other bound:  n * t * eps_other

The teleported-CNOT bound applies these with t = c*k (k measurement
repetitions, c a per-round step constant of about 2 or 3), either from a
single (eps, bias) point or from a per-operation, per-species rate table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

from .noise_model import ErrorRateTable, OpKind, Species


def logical_phase_bound(n: int, t: float, eps: float) -> float:
    """Probability bound for a logical phase error: more than half of an
    odd block of n qubits must dephase within t steps at rate eps."""
    if n < 1 or n % 2 == 0:
        raise ValueError(f"n must be odd and >= 1, got {n}")
    m = (n + 1) // 2
    return math.comb(n, m) * (t * eps) ** m


def logical_other_bound(n: int, t: float, eps_other: float) -> float:
    """Probability bound for a logical non-phase error: any single X/Y-type
    fault on any of the n qubits at any of the t steps is uncorrectable."""
    return n * t * eps_other


@dataclass(frozen=True)
class BiasPoint:
    """One operating point: phase rate eps, noise bias eps/eps_other, the
    step constant c, and odd code parameters (n, k).  The per-qubit step
    count ``t`` defaults to c*k but may be pinned directly."""

    eps: float
    bias: float
    n: int
    k: int
    c: float = 3.0
    t: float | None = None

    def __post_init__(self):
        if self.bias <= 0:
            raise ValueError("bias must be positive")
        if self.n < 1 or self.n % 2 == 0 or self.k < 1 or self.k % 2 == 0:
            raise ValueError(f"n and k must be odd, got ({self.n}, {self.k})")

    @property
    def steps(self) -> float:
        return self.c * self.k if self.t is None else self.t

    @property
    def eps_other(self) -> float:
        return self.eps / self.bias


@dataclass(frozen=True)
class BoundReport:
    n: int
    k: int
    c: float
    t: float
    eps_L: float
    epsp_L: float
    parts: dict[str, float] = field(default_factory=dict, compare=False)

    @property
    def total(self) -> float:
        return self.eps_L + self.epsp_L


def cnot_bound(point: BiasPoint, table: ErrorRateTable | None = None) -> BoundReport:
    """Logical-error bound for the teleported CNOT gadget.

    Without a table, evaluates the two closed forms at t = c*k (leakage has
    no separate rate at a bias point).  With a table, accounts per species
    and per location type:

    * each of the four data blocks contributes a phase-bound term with its
      own per-qubit exposure (t CPHASE steps at the species-A phase rate,
      plus one preparation for output blocks or one readout for input
      blocks);
    * an ancilla X/Y/leak fault mid-chain dephases the data qubits it has
      yet to touch, adding a term linear in the per-round ancilla non-phase
      rates to the phase bound;
    * non-phase and leakage faults on data-qubit locations add linearly to
      the other bound (leakage is uncorrectable by the code, so it is
      charged there);
    * each of the two repeated parity measurements fails when a majority of
      its k rounds report wrongly; a round is wrong at most at the summed
      ancilla fault rate (preparation + one CPHASE per coupled data qubit +
      readout), giving comb(k, (k+1)/2) * q**((k+1)/2) per measurement.
    """
    n, k, c, t = point.n, point.k, point.c, point.steps
    m_block = (n + 1) // 2
    m_rep = (k + 1) // 2
    if table is None:
        eps_L = logical_phase_bound(n, t, point.eps)
        epsp_L = logical_other_bound(n, t, point.eps_other)
        return BoundReport(n, k, c, t, eps_L, epsp_L,
                           {"blocks": eps_L, "data_other": epsp_L})

    cz_a = table.get(OpKind.CPHASE, Species.A)
    cz_b = table.get(OpKind.CPHASE, Species.B)
    prep_a = table.get(OpKind.PREP_PLUS, Species.A)
    prep_b = table.get(OpKind.PREP_PLUS, Species.B)
    meas_a = table.get(OpKind.MEASURE_X, Species.A)
    meas_b = table.get(OpKind.MEASURE_X, Species.B)

    exposure_in = t * cz_a.eps + meas_a.eps          # C and T qubits
    exposure_out = t * cz_a.eps + prep_a.eps         # C' and T' qubits
    blocks = 2 * math.comb(n, m_block) * (exposure_in ** m_block) \
        + 2 * math.comb(n, m_block) * (exposure_out ** m_block)

    anc_nonphase = [prep_b.eps_other + prep_b.eps_leak
                    + g * (cz_b.eps_other + cz_b.eps_leak)
                    for g in (2 * n, 3 * n)]
    anc_spread = k * sum(anc_nonphase)

    data_other_per_qubit_in = t * (cz_a.eps_other + cz_a.eps_leak)
    data_other_per_qubit_out = data_other_per_qubit_in \
        + prep_a.eps_other + prep_a.eps_leak
    data_other = 2 * n * data_other_per_qubit_in + 2 * n * data_other_per_qubit_out

    anc_majority = 0.0
    round_rates = []
    for g in (2 * n, 3 * n):
        q_round = prep_b.total + g * cz_b.total + meas_b.eps
        round_rates.append(q_round)
        anc_majority += math.comb(k, m_rep) * q_round ** m_rep

    eps_L = blocks + anc_spread
    epsp_L = data_other + anc_majority
    return BoundReport(n, k, c, t, eps_L, epsp_L, {
        "blocks": blocks,
        "ancilla_spread": anc_spread,
        "data_other": data_other,
        "ancilla_majority": anc_majority,
        "round_rate_2n": round_rates[0],
        "round_rate_3n": round_rates[1],
    })


@dataclass(frozen=True)
class OptimizeResult:
    n: int
    k: int
    eps_L: float
    epsp_L: float
    total: float
    report: BoundReport = field(compare=False, default=None)


def optimize_nk(eps: float | None = None, bias: float | None = None,
                c: float = 3.0, n_max: int = 15, constraint: str = "n=k",
                table: ErrorRateTable | None = None,
                k_max: int | None = None) -> OptimizeResult:
    """Exhaustive search over odd (n, k) minimizing max(eps_L, epsp_L), with
    ties broken by the total and then by the smaller (n, k).

    ``constraint`` is either ``"n=k"`` (single-parameter family) or
    ``"free"``.  Either give (eps, bias) for the closed forms or a rate
    table for the per-species accounting.
    """
    if n_max < 1 or n_max % 2 == 0:
        raise ValueError(f"n_max must be odd and >= 1, got {n_max}")
    if constraint not in ("n=k", "free"):
        raise ValueError(f"constraint must be 'n=k' or 'free', got {constraint!r}")
    if table is None and (eps is None or bias is None):
        raise ValueError("need either (eps, bias) or a rate table")
    k_max = n_max if k_max is None else k_max

    ns = range(1, n_max + 1, 2)
    best: tuple | None = None
    for n in ns:
        ks = (n,) if constraint == "n=k" else range(1, k_max + 1, 2)
        for k in ks:
            point = BiasPoint(eps if eps is not None else 0.0,
                              bias if bias is not None else 1.0, n, k, c)
            report = cnot_bound(point, table)
            key = (max(report.eps_L, report.epsp_L), report.total, n, k)
            if best is None or key < best[0]:
                best = (key, report)
    report = best[1]
    return OptimizeResult(report.n, report.k, report.eps_L, report.epsp_L,
                          report.total, report)


def sweep(eps_values: Iterable[float], bias_values: Iterable[float],
          c: float = 3.0, n_max: int = 15,
          constraint: str = "n=k") -> list[tuple[float, float, OptimizeResult]]:
    """Optimizer curve over a grid of (eps, bias) points, for plotting the
    total logical bound against the physical phase rate."""
    rows = []
    for bias in bias_values:
        for eps in eps_values:
            rows.append((eps, bias, optimize_nk(eps, bias, c, n_max, constraint)))
    return rows
