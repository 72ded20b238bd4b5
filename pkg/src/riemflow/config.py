"""Run configuration schema (JSON, unknown keys rejected)."""

from __future__ import annotations

import json
import re
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .pauli import DENSE_MAX_QUBITS, PauliSum, SizeGuardError, parse_pauli_sum, tfim
from .simulator import EXACT_FLOW_MAX_QUBITS


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class TfimSpec(_Strict):
    n: int = Field(ge=2)
    g: float = 1.0
    periodic: bool = True


class ModelSpec(_Strict):
    tfim: TfimSpec


class TemplateSpec(_Strict):
    template: Literal["fig3", "hva"]
    params: Optional[list[float]] = None
    layers: Optional[int] = Field(default=None, ge=1)


class GateSpec(_Strict):
    gate: Literal["H", "CNOT", "RX", "RY", "RZ", "PAULI"]
    wire: Optional[int] = Field(default=None, ge=0)
    control: Optional[int] = Field(default=None, ge=0)
    target: Optional[int] = Field(default=None, ge=0)
    angle: Optional[float] = None
    word: Optional[str] = None

    @model_validator(mode="after")
    def _fields_match_kind(self):
        need = {
            "H": {"wire"},
            "CNOT": {"control", "target"},
            "RX": {"wire", "angle"},
            "RY": {"wire", "angle"},
            "RZ": {"wire", "angle"},
            "PAULI": {"word", "angle"},
        }[self.gate]
        given = {k for k in ("wire", "control", "target", "angle", "word") if getattr(self, k) is not None}
        if given != need:
            raise ValueError(f"gate {self.gate} takes exactly {sorted(need)}, got {sorted(given)}")
        return self


class SubspaceSpec(_Strict):
    kind: Literal["single_qubit", "two_local_nn", "two_local_all", "full", "custom"]
    periodic: bool = True
    include_singles: bool = False
    words: Optional[list[str]] = None

    @model_validator(mode="after")
    def _custom_needs_words(self):
        if (self.kind == "custom") != (self.words is not None):
            raise ValueError("'words' is required for kind 'custom' and only allowed there")
        return self


class PerturbationSpec(_Strict):
    sigma: float = Field(default=0.1, ge=0)
    max_attempts: int = Field(default=50, ge=1)


class FlowSpec(_Strict):
    mode: Literal["exact_dense", "trotter_full", "trotter_restricted", "adaptive"]
    step_size: float = Field(gt=0)
    max_steps: int = Field(default=100, ge=1)
    subspace: Optional[SubspaceSpec] = None
    coefficient_method: Literal["exact_commutator", "parameter_shift"] = "exact_commutator"
    shots: int = Field(default=0, ge=0)
    grad_tolerance: float = Field(default=1e-6, gt=0)
    energy_tolerance: float = Field(default=1e-3, gt=0)
    perturbation: Optional[PerturbationSpec] = None
    step_strategy: Literal["fixed", "rotosolve"] = "fixed"


class VqeSpec(_Strict):
    step_size: float = Field(gt=0)
    max_iters: int = Field(default=100, ge=0)


class OptimizerSpec(_Strict):
    flow: Optional[FlowSpec] = None
    vqe: Optional[VqeSpec] = None

    @model_validator(mode="after")
    def _exactly_one(self):
        if (self.flow is None) == (self.vqe is None):
            raise ValueError("exactly one of 'flow' or 'vqe' must be given")
        return self


class OutputSpec(_Strict):
    path: str = "trace.csv"
    format: Literal["csv", "json"] = "csv"
    emit_spectrum: bool = False


class RunConfig(_Strict):
    hamiltonian: Union[str, ModelSpec]
    n_qubits: Optional[int] = Field(default=None, ge=1)
    initial_circuit: Union[Literal["zero", "hadamard"], TemplateSpec, list[GateSpec]] = "zero"
    optimizer: OptimizerSpec
    seed: int = Field(default=0, ge=0)
    output: OutputSpec = OutputSpec()

    @field_validator("hamiltonian")
    @classmethod
    def _parses(cls, v):
        if isinstance(v, str):
            parse_pauli_sum(v)  # raises PauliParseError, a ValueError
        return v

    def build_hamiltonian(self) -> PauliSum:
        if isinstance(self.hamiltonian, str):
            return parse_pauli_sum(self.hamiltonian, self.n_qubits)
        spec = self.hamiltonian.tfim
        if self.n_qubits not in (None, spec.n):
            raise ValueError("n_qubits disagrees with the model size")
        return tfim(spec.n, spec.g, spec.periodic)

    @model_validator(mode="after")
    def _consistent(self):
        h = self.build_hamiltonian()
        n = h.n_qubits
        if n > DENSE_MAX_QUBITS:
            raise SizeGuardError(f"{n} qubits exceeds the statevector limit of {DENSE_MAX_QUBITS}")
        flow = self.optimizer.flow
        dense = self.output.emit_spectrum or (
            flow is not None and (flow.mode == "exact_dense" or flow.perturbation is not None)
        )
        if dense and n > EXACT_FLOW_MAX_QUBITS:
            raise SizeGuardError(f"{n} qubits exceeds the dense limit of {EXACT_FLOW_MAX_QUBITS}")
        if flow is not None:
            if flow.mode in ("trotter_restricted", "adaptive") and flow.subspace is None:
                raise ValueError(f"flow mode {flow.mode!r} requires a subspace")
            if flow.step_strategy == "rotosolve" and flow.mode != "adaptive":
                raise ValueError("step_strategy 'rotosolve' requires mode 'adaptive'")
            if flow.shots and flow.coefficient_method != "parameter_shift":
                raise ValueError("shots require coefficient_method 'parameter_shift'")
        if self.optimizer.vqe is not None and not isinstance(self.initial_circuit, TemplateSpec):
            raise ValueError("a vqe run needs a template initial_circuit")
        if isinstance(self.initial_circuit, TemplateSpec):
            t = self.initial_circuit
            if t.template == "fig3" and n != 2:
                raise ValueError("the fig3 template acts on 2 qubits")
            if t.template == "hva" and n % 2:
                raise ValueError("the hva template needs an even qubit count")
        return self

    def echo(self) -> dict:
        """Config as emitted in trace headers (output path excluded)."""
        data = self.model_dump(mode="json")
        data["output"].pop("path")
        return data


class ConfigError(ValueError):
    pass


def _line_of_key(text: str, loc: tuple) -> int | None:
    keys = [k for k in loc if isinstance(k, str)]
    for key in reversed(keys):
        m = re.search(rf'"{re.escape(key)}"\s*:', text)
        if m:
            return text.count("\n", 0, m.start()) + 1
    return None


def load_run_config(text: str) -> RunConfig:
    """Parse and validate a JSON run config, with line numbers in error messages."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        lines = []
        for err in exc.errors():
            loc = tuple(err["loc"])
            line = _line_of_key(text, loc)
            where = ".".join(str(p) for p in loc) or "<root>"
            prefix = f"line {line}: " if line else ""
            lines.append(f"{prefix}{where}: {err['msg']}")
        raise ConfigError("\n".join(lines)) from exc
    except SizeGuardError as exc:
        raise ConfigError(str(exc)) from exc


def config_schema() -> dict:
    return RunConfig.model_json_schema()
