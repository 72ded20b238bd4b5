"""Execute a :class:`RunConfig` and write its trace files."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import GateSpec, RunConfig, SubspaceSpec, TemplateSpec
from .flows import FlowConfig, FlowTrace, Perturbation, replay, run_flow
from .oracle import GroundTruth, ground_truth, gradient_spectrum
from .pauli import (
    PauliSum,
    PauliWord,
    SubspaceBasis,
    basis_custom,
    basis_full,
    basis_single_qubit,
    basis_two_local,
)
from .simulator import CNOT, RX, RY, RZ, Hadamard, PauliRotation, StateVector, apply_gates, init_zero_state
from .vqe import ParamCircuit, VqeTrace, template_fig3, template_hva_tfim, vqe_run

TRACE_COLUMNS = (
    "step", "energy", "residual", "grad_norm", "n_appended_gates", "selected_word", "theta", "perturbations",
)
SPECTRUM_COLUMNS = ("step", "weight", "word", "magnitude")

# independent streams derived from the run seed
_PERTURBATION_STREAM, _SHOT_STREAM, _INIT_STREAM = 0, 1, 2


def derived_seed(seed: int, stream: int) -> int:
    return int(np.random.SeedSequence([seed, stream]).generate_state(1)[0])


@dataclass
class RunResult:
    config: RunConfig
    hamiltonian: PauliSum
    oracle: GroundTruth
    rows: list[dict]
    termination: str
    spectrum_rows: list[dict] = field(default_factory=list)
    flow_trace: FlowTrace | None = None
    vqe_trace: VqeTrace | None = None
    initial_state: StateVector | None = None

    @property
    def final_energy(self) -> float:
        return self.rows[-1]["energy"]

    @property
    def final_residual(self) -> float:
        return self.rows[-1]["residual"]


def build_subspace(spec: SubspaceSpec, n_qubits: int) -> SubspaceBasis:
    if spec.kind == "single_qubit":
        return basis_single_qubit(n_qubits)
    if spec.kind == "full":
        return basis_full(n_qubits)
    if spec.kind == "custom":
        return basis_custom([PauliWord.from_label(w, n_qubits) for w in spec.words])
    return basis_two_local(n_qubits, spec.kind == "two_local_nn", spec.periodic, spec.include_singles)


def _gate(spec: GateSpec, n_qubits: int):
    if spec.gate == "H":
        return Hadamard(spec.wire)
    if spec.gate == "CNOT":
        return CNOT(spec.control, spec.target)
    if spec.gate == "PAULI":
        return PauliRotation(PauliWord.from_label(spec.word, n_qubits), spec.angle)
    return {"RX": RX, "RY": RY, "RZ": RZ}[spec.gate](spec.wire, spec.angle)


def build_template(spec: TemplateSpec, n_qubits: int, seed: int) -> tuple[ParamCircuit, np.ndarray]:
    if spec.template == "fig3":
        circuit = template_fig3()
    else:
        layers = spec.layers if spec.layers is not None else n_qubits // 2
        circuit = template_hva_tfim(n_qubits, layers, prepare=True)
    if spec.params is not None:
        params = np.array(spec.params, dtype=float)
        if params.shape != (circuit.n_params,):
            raise ValueError(f"template {spec.template} takes {circuit.n_params} parameters")
    else:
        params = np.random.default_rng(derived_seed(seed, _INIT_STREAM)).uniform(0.0, 0.1, circuit.n_params)
    return circuit, params


def initial_state(cfg: RunConfig, n_qubits: int) -> StateVector:
    ic = cfg.initial_circuit
    state = init_zero_state(n_qubits)
    if ic == "zero":
        return state
    if ic == "hadamard":
        return apply_gates(state, [Hadamard(q) for q in range(n_qubits)])
    if isinstance(ic, TemplateSpec):
        circuit, params = build_template(ic, n_qubits, cfg.seed)
        return circuit.state(params)
    return apply_gates(state, [_gate(g, n_qubits) for g in ic])


def flow_config(cfg: RunConfig, n_qubits: int) -> FlowConfig:
    spec = cfg.optimizer.flow
    return FlowConfig(
        mode=spec.mode,
        step_size=spec.step_size,
        max_steps=spec.max_steps,
        subspace=build_subspace(spec.subspace, n_qubits) if spec.subspace else None,
        coefficient_method=spec.coefficient_method,
        shots=spec.shots,
        grad_tolerance=spec.grad_tolerance,
        energy_tolerance=spec.energy_tolerance,
        perturbation=(
            Perturbation(spec.perturbation.sigma, spec.perturbation.max_attempts,
                         derived_seed(cfg.seed, _PERTURBATION_STREAM))
            if spec.perturbation else None
        ),
        step_strategy=spec.step_strategy,
        shot_seed=derived_seed(cfg.seed, _SHOT_STREAM),
    )


def _flow_rows(trace: FlowTrace) -> list[dict]:
    rows = []
    for r in trace.records:
        single = len(r.appended_gates) == 1
        rows.append({
            "step": r.step,
            "energy": r.energy,
            "residual": r.residual,
            "grad_norm": r.gradient_norm,
            "n_appended_gates": len(r.appended_gates),
            "selected_word": r.appended_gates[0][0].label() if single else "",
            "theta": r.appended_gates[0][1] if single else None,
            "perturbations": r.perturbations_used,
        })
    return rows


def _vqe_rows(trace: VqeTrace) -> list[dict]:
    return [
        {
            "step": k, "energy": e, "residual": res, "grad_norm": g,
            "n_appended_gates": 0, "selected_word": "", "theta": None, "perturbations": 0,
        }
        for k, (e, res, g) in enumerate(zip(trace.energies, trace.residuals, trace.gradient_norms))
    ]


def _spectrum_rows(initial: StateVector, h: PauliSum, trace: FlowTrace) -> list[dict]:
    rows = []
    for record, state in zip(trace.records, replay(initial, trace.records)):
        for weight, entries in gradient_spectrum(state, h).items():
            for word, mag in entries:
                rows.append({"step": record.step, "weight": weight, "word": word.label(), "magnitude": mag})
    return rows


def execute(cfg: RunConfig) -> RunResult:
    h = cfg.build_hamiltonian()
    n = h.n_qubits
    gt = ground_truth(h)
    if cfg.optimizer.flow is not None:
        psi0 = initial_state(cfg, n)
        trace = run_flow(psi0, h, flow_config(cfg, n), gt)
        result = RunResult(cfg, h, gt, _flow_rows(trace), trace.termination, flow_trace=trace, initial_state=psi0)
        if cfg.output.emit_spectrum:
            result.spectrum_rows = _spectrum_rows(psi0, h, trace)
        return result
    circuit, params = build_template(cfg.initial_circuit, n, cfg.seed)
    spec = cfg.optimizer.vqe
    vt = vqe_run(circuit, params, h, spec.step_size, spec.max_iters, gt)
    stopped = len(vt) <= spec.max_iters
    result = RunResult(cfg, h, gt, _vqe_rows(vt), "converged" if stopped else "max_steps", vqe_trace=vt)
    result.initial_state = circuit.state(params)
    return result


# --- serialization ---------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def metadata(result: RunResult) -> dict:
    return {
        "tool": "riemflow",
        "version": __version__,
        "config": result.config.echo(),
        "ground_energy": result.oracle.ground_energy,
        "degeneracy": result.oracle.degeneracy,
        "termination": result.termination,
    }


def render_csv(meta: dict, rows: list[dict], columns) -> str:
    buf = io.StringIO()
    for key, value in meta.items():
        text = json.dumps(value, sort_keys=True) if isinstance(value, dict) else _fmt(value)
        buf.write(f"# {key}: {text}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def render_json(meta: dict, rows: list[dict]) -> str:
    return json.dumps({"meta": meta, "rows": rows}, indent=2, sort_keys=True) + "\n"


def spectrum_path(path: Path) -> Path:
    return path.with_name(f"{path.stem}_spectrum{path.suffix}")


def write_result(result: RunResult, path: str | Path) -> list[Path]:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = metadata(result)
    fmt = result.config.output.format
    written = []
    outputs = [(path, result.rows, TRACE_COLUMNS)]
    if result.config.output.emit_spectrum:
        outputs.append((spectrum_path(path), result.spectrum_rows, SPECTRUM_COLUMNS))
    for target, rows, columns in outputs:
        text = render_csv(meta, rows, columns) if fmt == "csv" else render_json(meta, rows)
        target.write_text(text, encoding="utf-8")
        written.append(target)
    return written
