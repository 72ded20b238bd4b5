"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the verdict lines are printed
even when output capture is on.
"""

import math
import time

import numpy as np
import pytest

from riemflow.cli import main
from riemflow.flows import (
    adaptive_flow_step,
    coefficients,
    exact_flow_step,
    flow_generator,
    replay,
    riemannian_coefficient,
    rotosolve_angle,
    trotter_flow_step,
)
from riemflow.oracle import ground_truth, gradient_spectrum
from riemflow.pauli import (
    PauliSum,
    PauliWord,
    basis_full,
    parse_pauli_sum,
    pauli_sum_to_dense,
    tfim,
    word_to_dense,
)
from riemflow.presets import PRESET_NAMES, preset_configs
from riemflow.runner import execute
from riemflow.simulator import PauliRotation, apply_gate, expectation
from riemflow.vqe import parameter_shift_gradient, template_fig3, template_hva_tfim

from conftest import all_words, random_state


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        assert ok, detail

    return emit


def test_criterion_1_fig3(report):
    configs = preset_configs("fig3")
    flow = execute(configs["riemannian"])
    vqe = execute(configs["vqe"])
    best = min(r["energy"] for r in flow.rows[:51])
    final_vqe = vqe.final_energy
    ok = best <= -2.40 and final_vqe > -2.3
    report(1, ok, f"exact flow min energy over 50 steps {best:.5f} (need <= -2.40), "
                  f"VQE final {final_vqe:.5f} (need > -2.3), E0 {flow.oracle.ground_energy:.5f}")


def test_criterion_2_fig4(report):
    result = execute(preset_configs("fig4")["riemannian"])
    rows = result.rows
    stalls = [r for r in rows if r["grad_norm"] < 1e-6 and r["residual"] > 1e-3]
    first_stall = stalls[0]["step"] if stalls else None
    used = sum(r["perturbations"] for r in rows)
    ok = (
        first_stall is not None
        and 10 <= first_stall <= 40
        and used >= 1
        and result.termination == "converged"
        and result.final_residual < 1e-6
    )
    report(2, ok, f"stall at step {first_stall} (residual {stalls[0]['residual'] if stalls else float('nan'):.3f}), "
                  f"{used} perturbation(s), final residual {result.final_residual:.2e} at step {rows[-1]['step']}")


def test_criterion_3_fig5(report):
    result = execute(preset_configs("fig5")["riemannian"])
    res = [r["residual"] for r in result.rows]
    ratios = [res[k + 5] / res[k] for k in range(len(res) - 5) if res[k] > 0]
    geometric = all(q < 1 for q in ratios)
    h = result.hamiltonian
    kept = {PauliWord.from_label("Y0 Y1"), PauliWord.from_label("Z0 Z1")}
    others = [w for w in all_words(2)[1:] if w not in kept]
    worst = 0.0
    for state in replay(result.initial_state, result.flow_trace.records):
        worst = max(worst, max(abs(riemannian_coefficient(state, h, w)) for w in others))
    ok = geometric and res[-1] < 1e-6 and len(res) <= 101 and len(others) == 13 and worst < 1e-10
    report(3, ok, f"max 5-step ratio {max(ratios):.3f}, final residual {res[-1]:.2e} after {len(res) - 1} steps, "
                  f"max |c| off {{YY, ZZ}} {worst:.1e}")


def test_criterion_4_fig7(report):
    t0 = time.perf_counter()
    configs = preset_configs("fig7")
    adaptive = execute(configs["adaptive"])
    vqe = execute(configs["vqe"])
    elapsed = time.perf_counter() - t0
    res = [r["residual"] for r in adaptive.rows]
    plateau = res[-1]
    final_state = replay(adaptive.initial_state, adaptive.flow_trace.records)[-1]
    spec = gradient_spectrum(final_state, adaptive.hamiltonian)
    low = max(m for w in (1, 2) for _, m in spec[w])
    high = max(m for w in (3, 4) for _, m in spec[w])
    ok = (
        1e-3 <= plateau <= 1e-1
        and low < 1e-6
        and high > 1e-3
        and vqe.final_residual < plateau
        and elapsed < 60
    )
    report(4, ok, f"adaptive plateau residual {plateau:.4f}, weight<=2 max {low:.1e}, weight 3/4 max {high:.3f}, "
                  f"HVA-VQE final residual {vqe.final_residual:.1e}, runtime {elapsed:.1f}s")


def _random_h(n, rng, k=6):
    words = all_words(n)[1:]
    idx = rng.choice(len(words), size=min(k, len(words)), replace=False)
    return PauliSum.from_terms(n, [(rng.normal(), words[i]) for i in idx])


def _properties(rng):
    failures = []

    def check(name, cond):
        if not cond:
            failures.append(name)

    # descent and norm preservation at small eps
    for _ in range(10):
        h = _random_h(3, rng)
        s = random_state(3, rng)
        eps = 0.01 / ground_truth(h).spectral_norm
        e = expectation(s, h)
        for _ in range(10):
            s, _ = exact_flow_step(s, h, eps)
            e_new = expectation(s, h)
            check("descent", e_new <= e + 1e-12)
            check("norm", abs(s.norm() - 1) < 1e-10)
            e = e_new

    # dL/dt = -||[rho,H]||_F^2, first-order error
    h = _random_h(3, rng)
    s = random_state(3, rng)
    g2 = np.linalg.norm(flow_generator(s, h)) ** 2
    errs = [abs((expectation(exact_flow_step(s, h, eps)[0], h) - expectation(s, h)) / eps + g2)
            for eps in (1e-3, 5e-4)]
    check("dL/dt first order", 1.8 < errs[0] / errs[1] < 2.2)

    # exact vs parameter shift, and full-basis reconstruction
    for n in (1, 2, 3):
        h = _random_h(n, rng)
        s = random_state(n, rng)
        coeffs = coefficients(s, h, basis_full(n))
        for w in (all_words(2)[1:] if n == 2 else list(coeffs)[:12]):
            shift = riemannian_coefficient(s, h, w, "parameter_shift")
            check("exact vs shift", abs(coeffs[w] - shift) < 1e-10)
        omega = sum(c * 1j * word_to_dense(w) for w, c in coeffs.items()) / (1 << n)
        rho = np.outer(s.amplitudes, s.amplitudes.conj())
        hd = pauli_sum_to_dense(h)
        check("reconstruction", np.max(np.abs(omega - (rho @ hd - hd @ rho))) < 1e-10)

    # Trotter error ratio under step halving
    for n in (2, 3):
        h = _random_h(n, rng)
        s = random_state(n, rng)
        errs = []
        for eps in (1e-2, 5e-3):
            exact, _ = exact_flow_step(s, h, eps)
            trot, gates, _ = trotter_flow_step(s, h, basis_full(n), eps / (1 << n))
            errs.append(np.linalg.norm(trot.amplitudes - exact.amplitudes))
            check("trotter norm", abs(trot.norm() - 1) < 1e-10)
        check("trotter ratio", 3.5 <= errs[0] / errs[1] <= 4.5)

    # parameter-shift VQE gradient vs finite differences
    for circuit, h in ((template_fig3(), parse_pauli_sum("X0 + X1 + Y1")),
                       (template_hva_tfim(4, 2, prepare=True), tfim(4))):
        theta = rng.uniform(-math.pi, math.pi, circuit.n_params)
        grad = parameter_shift_gradient(circuit, theta, h)
        for k in range(circuit.n_params):
            d = np.zeros(circuit.n_params)
            d[k] = 1e-5
            fd = (circuit.energy(theta + d, h) - circuit.energy(theta - d, h)) / 2e-5
            check("vqe gradient", abs(grad[k] - fd) < 1e-6)

    # rotosolve against a grid search
    grid = np.linspace(-math.pi, math.pi, 10_000)
    for _ in range(50):
        a, b, c = rng.normal(size=3)
        f = lambda t: a + b * np.cos(t) + c * np.sin(t)  # noqa: E731
        theta = rotosolve_angle(f(0.0), f(math.pi / 2), f(-math.pi / 2))
        check("rotosolve", f(theta) <= f(grid).min() + 1e-3)
    s = random_state(2, rng)
    h = _random_h(2, rng)
    step = adaptive_flow_step(s, h, basis_full(2))
    grid = np.linspace(-math.pi, math.pi, 10_000)
    best = min(expectation(apply_gate(s, PauliRotation(step.word, t)), h) for t in grid[::10])
    check("rotosolve in circuit", expectation(step.state, h) <= best + 1e-3)

    # identity shift invariance
    for n in (1, 2, 3):
        h = _random_h(n, rng)
        s = random_state(n, rng)
        a = adaptive_flow_step(s, h, basis_full(n))
        b = adaptive_flow_step(s, h.shifted(2.5), basis_full(n))
        check("shift selection", a.word == b.word and abs(a.angle - b.angle) < 1e-10)
        check("shift coefficients", all(abs(a.coefficients[w] - b.coefficients[w]) < 1e-12 for w in a.coefficients))
        check("adaptive norm", abs(a.state.norm() - 1) < 1e-10)
    return failures


def test_criterion_5_properties(report):
    failures = _properties(np.random.default_rng(2024))
    detail = "all property checks hold" if not failures else f"failed: {sorted(set(failures))}"
    report(5, not failures, detail)


def test_criterion_6_determinism(report, tmp_path, capsys):
    mismatched = []
    for name in PRESET_NAMES:
        dirs = [tmp_path / name / run for run in ("a", "b")]
        for d in dirs:
            assert main(["preset", name, "--out", str(d)]) == 0
        for f in sorted(dirs[0].iterdir()):
            if f.read_bytes() != (dirs[1] / f.name).read_bytes():
                mismatched.append(f.name)
    files = sum(1 for _ in tmp_path.rglob("*.csv")) // 2
    report(6, not mismatched, f"{files} trace files compared across two runs per preset, mismatches: {mismatched or 'none'}")
