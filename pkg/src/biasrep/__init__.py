"""Fault-tolerance toolkit for phase-biased qubits.

Repetition-code gadgets over {|+> prep, CPHASE, X-measure}, a Pauli-frame
Monte Carlo backend with keyed deterministic randomness, closed-form
logical-error bounds with an (n, k) optimizer, and a superoperator
error-rate calculus.
"""

__version__ = "0.1.0"

from .noise_model import (ErrorRateTable, FaultEvent, FaultKind, OpKind,
                          Rates, Species, compose_rates, default_rates,
                          sample_faults, zero_rates)
from .gadgets import (Block, Circuit, Correction, GadgetParams, Location,
                      Qubit, ScheduleViolation, build_gadget,
                      build_logical_cnot, build_parity_measurement,
                      build_teleport_identity, check_schedule,
                      circuit_from_text, circuit_to_text)
from .pauli_frame import (LeakPolicy, OutcomeRecord, PauliFrame, RunResult,
                          conjugate_through_cz, measure_x, run_circuit,
                          run_circuit_batch)
from .montecarlo import (OracleResult, RateEstimate, TrialResult,
                         brute_force_oracle, estimate_logical_rates,
                         majority, run_trial)
from .bounds import (BiasPoint, BoundReport, OptimizeResult, cnot_bound,
                     logical_other_bound, logical_phase_bound, optimize_nk)
from .channels import (AmplitudeDamping, ChannelParts, ClassifiedKraus,
                       KrausSet, PairMap, amplitude_damping, apply_channel,
                       bell_phi0, builtin_cphase_kraus, diamond_lower_bound,
                       input_distance, kraus_from_json, kraus_to_json,
                       prep_error_rates, split_channel, trace_norm)
