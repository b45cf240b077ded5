"""Acceptance suite: one test per numbered criterion, each printing a
PASS/FAIL line with the measured quantities.  Tolerances are pinned here and
nowhere else.  Run with ``pytest tests/test_acceptance.py -v -s``.
"""

import itertools
import math
import time

import numpy as np

from biasrep.bounds import (BiasPoint, cnot_bound, logical_other_bound,
                            logical_phase_bound, optimize_nk)
from biasrep.channels import (I2, SZ, amplitude_damping, bell_phi0,
                              builtin_cphase_kraus, input_distance,
                              split_channel)
from biasrep.cli import main as cli_main
from biasrep.gadgets import (build_logical_cnot, build_teleport_identity)
from biasrep.montecarlo import brute_force_oracle, estimate_logical_rates
from biasrep.noise_model import (FaultEvent, FaultKind, Rates,
                                 compose_rates, default_rates, zero_rates)
from biasrep.pauli_frame import run_circuit
from biasrep.streams import uniform

from conftest import table_with, uniform_table
from oracles import (Tableau, apply_corrections, decode_corrections,
                     diamond_norm_1q_exact, kron_all, reduced_state,
                     run_statevector, state_fidelity)


def report(criterion: int, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, f"criterion {criterion}: {detail}"


def test_criterion_1_break_even_point():
    start = time.perf_counter()
    eps_L = logical_phase_bound(7, 1.0, 0.05)
    epsp_L = logical_other_bound(7, 1.0, 0.05 / 1e3)
    elapsed = time.perf_counter() - start
    ok = (abs(eps_L - 2.1875e-4) < 1e-9
          and abs(epsp_L - 3.5e-4) < 1e-12
          and eps_L < 3.5e-4 + 1e-6
          and epsp_L < 3.5e-4 + 1e-6
          and elapsed < 1.0)
    report(1, ok, f"eps_L={eps_L:.4e} epsp_L={epsp_L:.4e} "
                  f"(both < 3.5e-4 + 1e-6) in {elapsed:.3f}s")


def test_criterion_2_indirect_cnot_compositions():
    # one CPHASE (.45%) and two H (.4% each); then three CPHASEs, two |+>
    # preparations (.3%) and two X measurements (.2%)
    first = compose_rates([(0.0045, 0.0)] + [(0.004, 0.0)] * 2).eps
    second = compose_rates([(0.0045, 0.0)] * 3 + [(0.003, 0.0)] * 2
                           + [(0.002, 0.0)] * 2).eps
    ok = abs(first - 0.0125) < 1e-12 and abs(second - 0.0235) < 5e-4
    report(2, ok, f"first={first:.4%} (exact 1.25%), "
                  f"second={second:.4%} (2.35% within 0.05pp)")


def _bell_map_is_cnot(n: int, k: int, seed: int) -> bool:
    circ = build_logical_cnot(n, k)
    N = circ.n_qubits
    ref_c, ref_t = N, N + 1
    tab = Tableau(N + 2)
    rng = np.random.default_rng(seed)
    for ref, block in ((ref_c, circ.block("C")), (ref_t, circ.block("T"))):
        tab.h(ref)
        for q in block.qubits:
            tab.h(q)
            tab.cz(ref, q)
    outcomes = tab.run_gadget(circ, 0, rng=rng)
    corr = decode_corrections(circ, outcomes)
    for block in circ.output_blocks:
        xb = np.zeros(N + 2, dtype=bool)
        zb = np.zeros(N + 2, dtype=bool)
        if corr[block.name]["X"]:
            xb[block.qubits[0]] = True
        if corr[block.name]["Z"]:
            for q in block.qubits:
                zb[q] = True
        tab.apply_pauli(xb, zb)
    cp, tp = circ.block("Cp").qubits, circ.block("Tp").qubits
    correlators = [
        {ref_c: "X", **{q: "Z" for q in cp}},
        {ref_c: "Z", cp[0]: "X", tp[0]: "X"},
        {ref_t: "X", **{q: "Z" for q in cp}, **{q: "Z" for q in tp}},
        {ref_t: "Z", tp[0]: "X"},
    ]
    code_checks = [{block[i]: "X", block[i + 1]: "X"}
                   for block in (cp, tp) for i in range(len(block) - 1)]
    return all(tab.expectation(op) == 1 for op in correlators + code_checks)


def test_criterion_3_gadget_correctness():
    start = time.perf_counter()
    map_ok = all(_bell_map_is_cnot(n, 3 if n > 1 else 1, seed)
                 for n in (1, 3, 5) for seed in range(4))

    circ = build_logical_cnot(1, 1)
    basis = [np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)]
    keep = list(circ.block("Cp").qubits) + list(circ.block("Tp").qubits)
    truth_ok = True
    for a, b in itertools.product((0, 1), repeat=2):
        expected = kron_all(basis[a], basis[a ^ b])
        for branch in run_statevector(circ, kron_all(basis[a], basis[b])):
            corr = decode_corrections(circ, branch.outcomes)
            state = apply_corrections(circ, branch.state, corr)
            rho = reduced_state(state, circ.n_qubits, keep)
            truth_ok &= abs(state_fidelity(rho, expected) - 1.0) < 1e-9
    elapsed = time.perf_counter() - start
    ok = map_ok and truth_ok and elapsed < 10.0
    report(3, ok, f"stabilizer map CNOT for n in (1,3,5): {map_ok}, "
                  f"n=1 truth table exact: {truth_ok}, in {elapsed:.2f}s")


def _phase_only_table(eps: float):
    return table_with(cz_A=Rates(eps=eps))


def _other_only_table(epsp: float):
    return table_with(cz_A=Rates(eps_other=epsp))


def test_criterion_4_scaling_exponents():
    start = time.perf_counter()
    total_trials = 0
    slopes = {}
    grids = {3: [(1e-3, 2_000_000), (2.15e-3, 1_000_000),
                 (4.64e-3, 1_000_000), (1e-2, 1_000_000)],
             5: [(3e-3, 2_000_000), (5.5e-3, 1_500_000), (1e-2, 1_000_000)]}
    for n, grid in grids.items():
        gadget = build_teleport_identity(n, 3)
        points = []
        for eps, trials in grid:
            est, _ = estimate_logical_rates(gadget, _phase_only_table(eps),
                                            trials, seed=101)
            total_trials += trials
            points.append((eps, est.mean))
        logs = np.log(np.array(points))
        slopes[n] = float(np.polyfit(logs[:, 0], logs[:, 1], 1)[0])

    gadget = build_teleport_identity(3, 3)
    lin_points = []
    for epsp in (2e-4, 4.5e-4, 1e-3):
        _, est = estimate_logical_rates(gadget, _other_only_table(epsp),
                                        1_000_000, seed=103)
        total_trials += 1_000_000
        lin_points.append((epsp, est.mean))
    logs = np.log(np.array(lin_points))
    lin_slope = float(np.polyfit(logs[:, 0], logs[:, 1], 1)[0])
    # the closed-form other bound with t = c*k must dominate every point
    bound_ok = all(rate <= logical_other_bound(3, 3.0 * 3, epsp)
                   for epsp, rate in lin_points)

    elapsed = time.perf_counter() - start
    slope_ok = all(abs(slopes[n] - (n + 1) / 2) <= 0.1 * (n + 1) / 2
                   for n in (3, 5))
    lin_ok = abs(lin_slope - 1.0) <= 0.15
    ok = slope_ok and lin_ok and bound_ok
    report(4, ok, f"phase slopes n=3: {slopes[3]:.3f} (target 2), "
                  f"n=5: {slopes[5]:.3f} (target 3), both within 10%; "
                  f"non-phase log-log slope {lin_slope:.3f} within 15% of 1; "
                  f"{total_trials:.2e} trials in {elapsed:.1f}s")


def test_criterion_5_oracle_equivalence():
    results = []
    for k in (1, 3):
        gadget = build_teleport_identity(3, k)
        for eps in (5e-4, 1e-3):
            table = uniform_table(eps, eps / 10)
            oracle = brute_force_oracle(gadget, table, 2)
            est_z, est_x = estimate_logical_rates(gadget, table, 1_500_000,
                                                  seed=107)
            dz = abs(est_z.mean - oracle.prob_z)
            dx = abs(est_x.mean - oracle.prob_x)
            ok_z = dz <= 3 * est_z.stderr + oracle.remainder_bound
            ok_x = dx <= 3 * est_x.stderr + oracle.remainder_bound
            results.append(((k, eps), ok_z and ok_x,
                            dz / max(est_z.stderr, 1e-15),
                            dx / max(est_x.stderr, 1e-15)))
    ok = all(r[1] for r in results)
    detail = "; ".join(f"k={k} eps={eps:.0e}: z at {sz:.2f} sigma, "
                       f"x at {sx:.2f} sigma"
                       for (k, eps), _, sz, sx in results)
    report(5, ok, detail + " (all within 3 sigma + truncation)")


def test_criterion_6_reported_optimum_regime():
    table = default_rates()
    result = optimize_nk(table=table, c=3.0, n_max=13, constraint="free")
    bound = cnot_bound(BiasPoint(0.0, 1.0, 5, 7, c=3.0), table=table)
    in_range = 1e-4 <= bound.eps_L <= 1.2e-2 and 1e-4 <= bound.epsp_L <= 1.2e-2
    ok = result.k > result.n and in_range
    report(6, ok, f"free optimum (n*, k*) = ({result.n}, {result.k}) with "
                  f"k* > n*; (5,7) bound eps_L={bound.eps_L:.3e}, "
                  f"epsp_L={bound.epsp_L:.3e}, both in [1e-4, 1.2e-2] "
                  f"(order-of-magnitude agreement with 4.62e-3 / 3.98e-3; "
                  f"exact closed forms are out of scope)")


def test_criterion_7_channel_norms():
    start = time.perf_counter()
    cks = builtin_cphase_kraus()
    bell = bell_phi0()
    e_d = input_distance(split_channel(cks).e_phase, bell)
    e_d_a = input_distance(split_channel(cks, resolve="A").e_phase, bell)
    e_d_b = input_distance(split_channel(cks, resolve="B").e_phase, bell)
    elapsed = time.perf_counter() - start
    ok = (abs(e_d - 4.73e-3) <= 0.15 * 4.73e-3
          and abs(e_d_a - 1.96e-3) <= 0.15 * 1.96e-3
          and abs(e_d_b - 4.6e-3) <= 0.15 * 4.6e-3
          and elapsed < 1.0)
    report(7, ok, f"bell-input phase norms: full={e_d:.3e} (4.73e-3 +-15%), "
                  f"A={e_d_a:.3e} (1.96e-3 +-15%), B={e_d_b:.3e} "
                  f"(4.6e-3 +-15%) in {elapsed:.3f}s")


def test_criterion_8_amplitude_damping():
    details = []
    ok = True
    for gamma in (1e-4, 1e-2, 1e-1):
        ad = amplitude_damping(gamma, random_restarts=12, seed=11)
        gram = sum(m.conj().T @ m for m in ad.kraus.operators)
        complete = np.abs(gram - np.eye(2)).max() < 1e-12
        other_exact = abs(ad.other_rate - gamma) < 1e-15 * max(1.0, 1 / gamma)
        s = math.sqrt(1 - gamma)
        m0 = ((1 + s) / 2) * I2 + ((1 - s) / 2) * SZ
        c = (1 + s) ** 2 / 4
        exact = diamond_norm_1q_exact(
            lambda rho: m0 @ rho @ m0.conj().T - c * rho, restarts=16)
        near_half = abs(ad.phase_rate - gamma / 2) <= 0.2 * (gamma / 2)
        oracle_consistent = ad.phase_rate <= exact + 1e-9 \
            and abs(exact - gamma / 2) <= 0.2 * (gamma / 2)
        ok &= complete and other_exact and near_half and oracle_consistent
        details.append(f"gamma={gamma:.0e}: phase={ad.phase_rate:.3e} "
                       f"(oracle {exact:.3e}, gamma/2 {gamma/2:.3e})")
    report(8, ok, "completeness < 1e-12, other rate = gamma exactly; "
                  + "; ".join(details))


def test_criterion_9_bias_preservation():
    gadget = build_logical_cnot(3, 3)
    zero = zero_rates()
    sites = [(loc.index, q) for loc in gadget.locations for q in loc.qubits]
    out_qubits = [q for b in gadget.output_blocks for q in b.qubits]
    injections = 100_000
    violations = 0
    for i in range(injections):
        # keyed pseudo-random site choice so the sweep is reproducible
        site = sites[int(uniform(2024, i, 0, 0) * len(sites))]
        result = run_circuit(gadget, zero, 0, trial=i,
                             forced_faults=[FaultEvent(site[0], site[1],
                                                       FaultKind.Z)],
                             validate=False)
        for q in out_qubits:
            if result.frame.x[q]:
                violations += 1
                break
    ok = violations == 0
    report(9, ok, f"{injections} single-Z injections over {len(sites)} "
                  f"fault sites: {violations} X/Y output-frame components")


def test_criterion_10_worker_determinism(tmp_path):
    args = ["simulate", "--gadget", "cnot", "--n", "3", "--k", "3",
            "--rates", "table1", "--trials", "30000", "--seed", "13"]
    out1 = tmp_path / "workers1.csv"
    out4 = tmp_path / "workers4.csv"
    assert cli_main(args + ["--workers", "1", "--output", str(out1)]) == 0
    assert cli_main(args + ["--workers", "4", "--output", str(out4)]) == 0
    body1 = "\n".join(l for l in out1.read_text().splitlines()
                      if not l.startswith("#"))
    body4 = "\n".join(l for l in out4.read_text().splitlines()
                      if not l.startswith("#"))
    ok = body1 == body4 and len(body1) > 0
    report(10, ok, f"CSV bodies byte-identical across 1 vs 4 workers "
                   f"({len(body1)} bytes)")
