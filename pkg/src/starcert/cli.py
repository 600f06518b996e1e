"""Command-line front end.

Subcommands: bounds, certify, prepare-state, scan, validate.  Exit codes:
0 success / certified, 1 certification failure or inconclusive, 2 invalid
input or usage.  Structured output is JSON with floats printed at 17
significant digits (round-trip exact for double precision).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from datetime import datetime, timezone

from . import __version__
from .bell import (
    classical_bound_bruteforce,
    classical_bound_formula,
    quantum_bound,
)
from .certify import (
    CertificationReport,
    certify,
    certify_state_preparation,
    check_part1,
    noise_scan,
)
from .config import DEFAULT_TOL, Tolerances
from .errors import StarcertError, ValidationError
from .measurements import (
    embed_rank1_povm,
    load_mixed_state_spec,
    load_povm,
    trine_povm,
)
from .network import born_table, load_scenario
from .presets import ideal_scenario


@dataclass(frozen=True)
class RunConfig:
    command: str
    scenario: str | None = None
    reference: str | None = None
    mode: str = "projective"
    state_spec: str | None = None
    n: int | None = None
    tol: float | None = None
    noise: str = "isotropic"
    grid: tuple = ()
    out: str | None = None
    fmt: str = "text"
    seed: int | None = None
    reproducible: bool = False

    def tolerances(self) -> Tolerances:
        if self.tol is None:
            return DEFAULT_TOL
        if self.tol <= 0:
            raise ValidationError(f"tolerance must be positive, got {self.tol}")
        return Tolerances(
            structural=DEFAULT_TOL.structural,
            spectral=DEFAULT_TOL.spectral,
            acceptance=self.tol,
            rank=DEFAULT_TOL.rank,
            probability=DEFAULT_TOL.probability,
        )


def _f(x) -> float:
    """Normalize a float to its 17-significant-digit decimal value."""
    x = float(x)
    if math.isnan(x):
        return x
    return float(format(x, ".17g"))


def _sha256(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _envelope(config: RunConfig, body: dict) -> dict:
    doc = {
        "tool": "starcert",
        "version": __version__,
        "command": config.command,
        "inputs": {},
    }
    for label, path in (
        ("scenario", config.scenario),
        ("reference", config.reference),
        ("state_spec", config.state_spec),
    ):
        if path:
            doc["inputs"][label] = {"path": path, "sha256": _sha256(path)}
    if config.seed is not None:
        doc["seed"] = config.seed
    if not config.reproducible:
        doc["timestamp"] = datetime.now(timezone.utc).isoformat()
    doc.update(body)
    return doc


def _emit(config: RunConfig, text: str, structured: dict) -> None:
    if config.fmt == "structured":
        payload = json.dumps(structured, indent=2, sort_keys=True)
    else:
        payload = text
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(payload + "\n")
    else:
        print(payload)


def _report_body(report: CertificationReport) -> dict:
    part1 = {
        "bell_values": [_f(ev.value) for ev in report.part1.evaluations],
        "pbar": [_f(p) for p in report.part1.pbar],
        "bell_passed": report.part1.bell_passed,
        "pbar_passed": report.part1.pbar_passed,
        "passed": report.part1.passed,
    }
    body = {"part1": part1, "verdict": report.verdict,
            "tolerance": _f(report.tolerances.acceptance)}
    if report.part2 is not None:
        body["part2"] = {
            "mode": report.part2.mode,
            "residuals_plain": [_f(r) for r in report.part2.residuals_plain],
            "residuals_conjugate": [_f(r) for r in report.part2.residuals_conjugate],
            "branch": report.part2.branch,
            "passed": report.part2.passed,
        }
    if report.part3 is not None:
        p3 = report.part3
        body["part3"] = {
            "outcomes": list(p3.outcomes),
            "probabilities": [_f(p) for p in p3.probabilities],
            "expected_probabilities": [_f(p) for p in p3.expected_probabilities],
            "total_probability": _f(p3.total_probability),
            "branch": p3.branch.branch,
            "distance": _f(p3.branch.distance),
            "passed": p3.passed,
        }
    return body


def _report_text(report: CertificationReport) -> str:
    lines = [f"verdict: {report.verdict}"]
    p1 = report.part1
    lines.append(
        f"part1: bell {'pass' if p1.bell_passed else 'FAIL'}, "
        f"outcome weights {'pass' if p1.pbar_passed else 'FAIL'}"
    )
    for ev, p in zip(p1.evaluations, p1.pbar):
        bits = "".join(str(b) for b in ev.label.bits)
        lines.append(
            f"  l={bits}  value={ev.value:.12f}  bound={ev.quantum_bound:.12f}  "
            f"pbar={p:.12f}"
        )
    if report.part2 is not None:
        p2 = report.part2
        lines.append(
            f"part2 ({p2.mode}): {'pass' if p2.passed else 'FAIL'}, branch {p2.branch}"
        )
        lines.append(
            f"  max residual plain={max(p2.residuals_plain):.3e} "
            f"conjugate={max(p2.residuals_conjugate):.3e}"
        )
    if report.part3 is not None:
        p3 = report.part3
        lines.append(
            f"part3: {'pass' if p3.passed else 'FAIL'}, branch {p3.branch.branch}, "
            f"distance {p3.branch.distance:.3e}"
        )
    return "\n".join(lines)


def cmd_bounds(config: RunConfig) -> int:
    n = config.n
    if n is None or not 2 <= n <= 5:
        raise ValidationError("bounds requires --n between 2 and 5")
    formula = classical_bound_formula(n)
    beta_q = quantum_bound(n)
    if n <= 4:
        result = classical_bound_bruteforce(n)
        brute = result.bound
        delta = abs(brute - formula)
        marker = ""
    else:
        brute = formula
        delta = 0.0
        marker = "  (formula-only: exhaustive search capped at N=4)"
    text = (
        f"N={n}  classical(enumerated)={brute:.9f}  classical(formula)={formula:.9f}  "
        f"quantum={beta_q:.1f}  delta={delta:.3e}{marker}"
    )
    body = {
        "n": n,
        "classical_enumerated": _f(brute),
        "classical_formula": _f(formula),
        "quantum": _f(beta_q),
        "delta": _f(delta),
        "formula_only": n == 5,
    }
    _emit(config, text, _envelope(config, body))
    return 0


def cmd_certify(config: RunConfig) -> int:
    if not config.scenario or not config.reference:
        raise ValidationError("certify requires --scenario and --reference")
    scenario = load_scenario(config.scenario)
    reference = load_povm(config.reference)
    tol = config.tolerances()
    report = certify(scenario, reference.effects, config.mode, tol)
    _emit(config, _report_text(report), _envelope(config, _report_body(report)))
    return 0 if report.verdict == "Certified" else 1


def cmd_prepare_state(config: RunConfig) -> int:
    if not config.state_spec:
        raise ValidationError("prepare-state requires --state-spec")
    spec = load_mixed_state_spec(config.state_spec)
    n = config.n
    if n is None:
        n = 2
        while 2**n < 2 * spec.d:
            n += 1
    if 2**n < 2 * spec.d:
        raise ValidationError(
            f"N={n} gives Eve dimension {2**n} < 2d = {2 * spec.d}"
        )
    tol = config.tolerances()
    povm = embed_rank1_povm(trine_povm(spec, tol), n, tol)
    scenario = ideal_scenario(n, eve_second=povm)
    table = born_table(scenario, tol)
    part1 = check_part1(table, n, tol)
    part3 = certify_state_preparation(scenario, spec, table, tol)
    passed = part1.passed and part3.passed
    text = "\n".join([
        f"verdict: {'Certified' if passed else 'Failed'}",
        f"part1: {'pass' if part1.passed else 'FAIL'}",
        f"part3: {'pass' if part3.passed else 'FAIL'}, branch {part3.branch.branch}, "
        f"distance {part3.branch.distance:.3e}",
        f"total preparation probability: {part3.total_probability:.12f} "
        f"(target {2.0**-n:.12f})",
    ])
    body = {
        "n": n,
        "part1_passed": part1.passed,
        "part3": {
            "probabilities": [_f(p) for p in part3.probabilities],
            "expected_probabilities": [_f(p) for p in part3.expected_probabilities],
            "total_probability": _f(part3.total_probability),
            "branch": part3.branch.branch,
            "distance": _f(part3.branch.distance),
            "passed": part3.passed,
        },
        "verdict": "Certified" if passed else "Failed",
    }
    _emit(config, text, _envelope(config, body))
    return 0 if passed else 1


def cmd_scan(config: RunConfig) -> int:
    if not config.grid:
        raise ValidationError("scan requires a non-empty --grid")
    if config.scenario:
        scenario = load_scenario(config.scenario)
    else:
        scenario = ideal_scenario(config.n or 2)
    reference = load_povm(config.reference).effects if config.reference else None
    tol = config.tolerances()
    report = noise_scan(scenario, config.noise, config.grid,
                        reference_effects=reference, mode=config.mode, tol=tol)
    lines = ["level\tmin_bell\tpbar_deviation\tpart2_max_residual"]
    rows = []
    for row in report.rows:
        res = "" if row.part2_max_residual is None else f"{row.part2_max_residual:.6e}"
        lines.append(
            f"{row.level:.6f}\t{row.min_bell:.12f}\t{row.pbar_deviation:.6e}\t{res}"
        )
        rows.append({
            "level": _f(row.level),
            "bell_values": [_f(v) for v in row.bell_values],
            "min_bell": _f(row.min_bell),
            "pbar_deviation": _f(row.pbar_deviation),
            "part2_max_residual": (
                None if row.part2_max_residual is None else _f(row.part2_max_residual)
            ),
        })
    lines.append(f"min_bell non-decreasing: {report.bell_monotone}")
    body = {"model": report.model, "rows": rows, "bell_monotone": report.bell_monotone}
    _emit(config, "\n".join(lines), _envelope(config, body))
    return 0


def cmd_validate(config: RunConfig) -> int:
    checked = []
    if config.scenario:
        load_scenario(config.scenario)
        checked.append(("scenario", config.scenario))
    if config.reference:
        load_povm(config.reference)
        checked.append(("reference", config.reference))
    if config.state_spec:
        load_mixed_state_spec(config.state_spec)
        checked.append(("state_spec", config.state_spec))
    if not checked:
        raise ValidationError(
            "validate requires at least one of --scenario, --reference, --state-spec"
        )
    text = "\n".join(f"{kind}: {path}: valid" for kind, path in checked)
    body = {"validated": [{"kind": k, "path": p} for k, p in checked]}
    _emit(config, text, _envelope(config, body))
    return 0


def _parse_grid(raw: str):
    try:
        values = tuple(float(v) for v in raw.split(",") if v.strip() != "")
    except ValueError:
        raise ValidationError(f"--grid: could not parse {raw!r}") from None
    if any(not 0 <= v <= 1 for v in values):
        raise ValidationError("--grid values must lie in [0, 1]")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="starcert",
        description="Simulate and certify star-network self-testing scenarios.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--scenario", help="scenario JSON file")
        p.add_argument("--reference", help="reference measurement JSON file")
        p.add_argument("--mode", choices=["projective", "povm"], default="projective")
        p.add_argument("--state-spec", dest="state_spec", help="target state JSON file")
        p.add_argument("--n", type=int, help="number of external parties")
        p.add_argument("--tol", type=float, help="acceptance tolerance override")
        p.add_argument("--noise", choices=["isotropic", "effects"], default="isotropic")
        p.add_argument("--grid", default="", help="comma-separated noise levels in [0,1]")
        p.add_argument("--out", help="write the report to this path instead of stdout")
        p.add_argument("--format", dest="fmt", choices=["text", "structured"],
                       default="text")
        p.add_argument("--seed", type=int, help="seed for randomized generation")
        p.add_argument("--reproducible", action="store_true",
                       help="suppress the timestamp field for byte-identical output")

    for name in ("bounds", "certify", "prepare-state", "scan", "validate"):
        add_common(sub.add_parser(name))
    return parser


COMMANDS = {
    "bounds": cmd_bounds,
    "certify": cmd_certify,
    "prepare-state": cmd_prepare_state,
    "scan": cmd_scan,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = RunConfig(
            command=args.command,
            scenario=args.scenario,
            reference=args.reference,
            mode=args.mode,
            state_spec=args.state_spec,
            n=args.n,
            tol=args.tol,
            noise=args.noise,
            grid=_parse_grid(args.grid) if args.grid else (),
            out=args.out,
            fmt=args.fmt,
            seed=args.seed,
            reproducible=args.reproducible,
        )
        return COMMANDS[args.command](config)
    except (StarcertError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
