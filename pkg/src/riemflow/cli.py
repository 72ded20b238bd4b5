"""``riemflow`` command-line interface.

Exit codes: 0 success, 1 validation error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from .config import ConfigError, ModelSpec, config_schema, load_run_config
from .oracle import ground_truth
from .pauli import PauliParseError, SizeGuardError, parse_pauli_sum, tfim
from .presets import PRESET_NAMES, preset_configs
from .runner import execute, write_result

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2

log = logging.getLogger("riemflow")


def _parse_model(text: str):
    """Hamiltonian from an expression, ``tfim:n=4,g=1,periodic=true`` or a JSON model."""
    text = text.strip()
    if text.startswith("{"):
        spec = ModelSpec.model_validate_json(text).tfim
        return tfim(spec.n, spec.g, spec.periodic)
    if text.startswith("tfim"):
        opts = {"n": "4", "g": "1", "periodic": "true"}
        _, _, rest = text.partition(":")
        for item in filter(None, rest.split(",")):
            key, sep, value = item.partition("=")
            if not sep or key.strip() not in opts:
                raise ValueError(f"bad tfim option {item!r}")
            opts[key.strip()] = value.strip()
        periodic = opts["periodic"].lower()
        if periodic not in ("true", "false"):
            raise ValueError("periodic must be true or false")
        return tfim(int(opts["n"]), float(opts["g"]), periodic == "true")
    return parse_pauli_sum(text)


def cmd_preset(args) -> int:
    configs = preset_configs(args.name, seed=args.seed, shots=args.shots, fmt=args.format, out_dir=args.out)
    for run, cfg in configs.items():
        result = execute(cfg)
        for path in write_result(result, cfg.output.path):
            print(path)
        print(
            f"{args.name}/{run}: {result.termination} after {result.rows[-1]['step']} steps, "
            f"energy {result.final_energy:.6f}, residual {result.final_residual:.3e}"
        )
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = load_run_config(Path(args.config).read_text(encoding="utf-8"))
    result = execute(cfg)
    for path in write_result(result, cfg.output.path):
        print(path)
    print(f"{result.termination}: energy {result.final_energy:.6f}, residual {result.final_residual:.3e}")
    return EXIT_OK


def cmd_ground(args) -> int:
    h = _parse_model(args.hamiltonian)
    gt = ground_truth(h)
    print(f"E0 = {gt.ground_energy!r}")
    print(f"degeneracy = {gt.degeneracy}")
    return EXIT_OK


def cmd_schema(args) -> int:
    print(json.dumps(config_schema(), indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="riemflow", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preset", help="reproduce one of the reference experiments")
    p.add_argument("name", choices=PRESET_NAMES)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shots", type=int, default=0, help="sampled coefficient estimation (0 = exact)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("run", help="run a JSON config file")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("ground", help="print the ground energy and degeneracy")
    p.add_argument("hamiltonian", help='e.g. "X0 + X1 + Y1" or tfim:n=4,g=1,periodic=true')
    p.set_defaults(func=cmd_ground)

    p = sub.add_parser("schema", help="print the JSON schema of run configs")
    p.set_defaults(func=cmd_schema)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "shots", 0) < 0:
        parser.error("--shots must be nonnegative")
    try:
        return args.func(args)
    except (ConfigError, PauliParseError, SizeGuardError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        # malformed command-line input is a validation failure
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID if args.command == "ground" else EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
