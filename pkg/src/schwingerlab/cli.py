"""Command-line front end.

Every invocation produces a :class:`RunReport`.  Exit codes: 0 when all
checks pass, 1 when any check fails (or the report cannot be written),
2 for usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from . import fock, grassmann, schwinger, thermo
from .fock import ModeSpace
from .opcore import DomainError, Operator, ShapeError, SizeError

__all__ = [
    "Check",
    "RunReport",
    "EnsembleParseError",
    "parse_ensemble_file",
    "parse_ensemble_text",
    "run",
    "emit_report",
    "to_json",
    "main",
]

SWEEP_HEADER = ("beta", "logZ_closed", "logZ_trace", "energy_closed", "energy_fd")
SPECTRUM_HEADER = ("eigenvalue", "multiplicity", "j")
CSV_COMMANDS = ("partition", "energy", "casimir")


@dataclass
class Check:
    name: str
    passed: bool
    max_error: float


@dataclass
class RunReport:
    command: str
    params: dict[str, Any] = field(default_factory=dict)
    results: dict[str, Any] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    exit_code: int = 0

    def add_check(self, name: str, error: float, tol: float) -> None:
        error = float(error)
        self.checks.append(Check(name, bool(error <= tol), error))

    def finalize(self) -> "RunReport":
        self.exit_code = 0 if all(c.passed for c in self.checks) else 1
        return self

    def as_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "params": self.params,
            "results": self.results,
            "checks": [
                {"name": c.name, "passed": c.passed, "max_error": c.max_error}
                for c in self.checks
            ],
            "exit_code": self.exit_code,
        }


# -- serialization -------------------------------------------------------------


def _number(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    if x == 0:
        return "0"
    return format(x, ".17g")


def to_json(value: Any) -> str:
    """Compact JSON with floats rendered to 17 significant digits."""
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating, Fraction)):
        return _number(float(value))
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{to_json(v)}" for k, v in value.items()) + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ",".join(to_json(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating, Fraction)):
        return _number(float(value)).replace("null", "")
    return str(value)


def _render_csv(report: RunReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if report.command == "casimir":
        writer.writerow(SPECTRUM_HEADER)
        for level in report.results["levels"]:
            writer.writerow([_csv_cell(level[k]) for k in SPECTRUM_HEADER])
    else:
        writer.writerow(SWEEP_HEADER)
        for row in report.results["rows"]:
            writer.writerow([_csv_cell(row[k]) for k in SWEEP_HEADER])
    return buf.getvalue()


def emit_report(report: RunReport, fmt: str = "json", destination: str | None = None) -> int:
    """Write the report; returns the (possibly updated) exit code."""
    text = _render_csv(report) if fmt == "csv" else to_json(report.as_dict()) + "\n"
    if destination in (None, "-"):
        sys.stdout.write(text)
        return report.exit_code
    try:
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        report.checks.append(Check("io", False, float("nan")))
        report.exit_code = 1
        report.results["io_error"] = str(exc)
        sys.stderr.write(f"schwingerlab: cannot write {destination}: {exc}\n")
        sys.stdout.write(to_json(report.as_dict()) + "\n")
    return report.exit_code


# -- ensemble files ------------------------------------------------------------


class EnsembleParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def parse_ensemble_text(
    text: str, beta: float = 1.0, hbar: float = 1.0, kB: float = 1.0
) -> thermo.EnsembleSpec:
    """Parse ``boson <omega> <cutoff>`` / ``fermion <omega>`` lines; ``#`` comments."""
    modes = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0].lower()
        try:
            if kind == "fermion" and len(parts) == 2:
                modes.append(ModeSpace.fermion(float(parts[1])))
            elif kind == "boson" and len(parts) == 3:
                modes.append(ModeSpace.boson(float(parts[1]), int(parts[2])))
            else:
                raise EnsembleParseError(
                    lineno, f"expected 'boson <omega> <cutoff>' or 'fermion <omega>', got {line!r}"
                )
        except (ValueError, DomainError) as exc:
            if isinstance(exc, EnsembleParseError):
                raise
            raise EnsembleParseError(lineno, f"{exc} in {line!r}") from None
    if not modes:
        raise EnsembleParseError(0, "no modes defined")
    return thermo.EnsembleSpec(tuple(modes), beta, hbar, kB)


def parse_ensemble_file(
    path: str, beta: float = 1.0, hbar: float = 1.0, kB: float = 1.0
) -> thermo.EnsembleSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_ensemble_text(fh.read(), beta, hbar, kB)


# -- argument parsing ----------------------------------------------------------


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a number like 1/2 or 0.5, got {text!r}")


def _build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--hbar", type=float, default=1.0)
    common.add_argument("--kB", type=float, default=1.0)
    common.add_argument("--cutoff", type=int, default=None)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--output", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None, metavar="FILE")

    parser = _Parser(prog="schwingerlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text)

    kinds = schwinger.KINDS
    p = add("verify", "su(2) algebra and Casimir identities for one construction")
    p.add_argument("--kind", required=True, choices=kinds)
    p.add_argument("--jz-form", choices=schwinger.JZ_FORMS, default=None)

    p = add("casimir", "Casimir spectrum on the safe subspace")
    p.add_argument("--kind", required=True, choices=kinds)
    p.add_argument("--jz-form", choices=schwinger.JZ_FORMS, default=None)

    p = add("state", "angular-momentum state built from two bosonic modes")
    p.add_argument("--j", type=_fraction, required=True)
    p.add_argument("--m", type=_fraction, required=True)

    for name, text in (("partition", "partition-function sweep"), ("energy", "mean-energy sweep")):
        p = add(name, text)
        p.add_argument("--ensemble", default=None, metavar="FILE")
        p.add_argument("--kind", choices=("fermion", "boson"), default="fermion")
        p.add_argument("--omega", type=float, default=1.0)
        p.add_argument("--beta", type=_float_list, required=True)
        p.add_argument("--delta", type=float, default=1e-5)

    p = add("rotor", "rotor equivalent of identical ground-state oscillators")
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--j", type=_fraction, default=Fraction(1))
    p.add_argument("--n", type=int, default=2, choices=(2, 3))
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--j-max", type=_fraction, default=Fraction(1))

    p = add("grassmann-derive", "derive the oscillator Hamiltonian from its Lagrangian")
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--expr", default=None)
    p.add_argument("--generators", default=None)
    p.add_argument("--wrt", default=None)
    p.add_argument("--side", choices=("left", "right"), default="left")

    p = add("shift-check", "number-operator shift identities")
    p.add_argument("--r", type=_float_list, default=[-0.5, 0.0, 0.5, 1.0, 2.0])

    p = add("frequencies", "Heisenberg-picture frequencies of a ladder operator")
    p.add_argument("--kind", choices=("fermion", "boson"), default="fermion")
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--operator", choices=("lower", "raise", "number"), default="lower")
    return parser


# -- commands ------------------------------------------------------------------


def _tol(args, default: float) -> float:
    return default if args.tol is None else args.tol


def _cutoff(args, default: int) -> int:
    return default if args.cutoff is None else args.cutoff


def _generators(args, default_cutoff: int = 16) -> schwinger.SchwingerGenerators:
    return schwinger.build_generators(
        args.kind, cutoff=_cutoff(args, default_cutoff), hbar=args.hbar, jz_form=args.jz_form
    )


def _vacuum_complement(p: Operator) -> Operator:
    e = np.array(p.entries)
    e[0, 0] = 0.0
    return Operator(e, p.layout)


def _cmd_verify(args, report: RunReport) -> None:
    g = _generators(args)
    tol = _tol(args, schwinger.DEFAULT_TOL)
    proj = schwinger.safe_projector(g)
    alg = schwinger.algebra_report(g, proj, tol)
    for name, res in alg.residuals.items():
        report.add_check(name, res, alg.tolerance)
    comm = schwinger.casimir_commutators(g, proj)
    for name, res in comm.items():
        report.add_check(name, res, tol * g.hbar ** 3)
    identity_proj = _vacuum_complement(proj) if g.kind == "bf_corrected" else proj
    ident = schwinger.casimir_identity_residual(g, identity_proj)
    report.add_check("casimir_closed_form", ident, tol * g.hbar ** 2)
    results = {
        "kind": g.kind,
        "jz_form": g.jz_form,
        "dim": g.dim,
        "safe_dim": int(round(np.trace(proj.entries).real)),
        "algebra_residuals": alg.residuals,
        "casimir_commutators": comm,
        "casimir_closed_form_residual": ident,
        "vacuum_casimir": float(schwinger.casimir(g).entries[0, 0].real),
    }
    if g.kind == "bb":
        results["printed_prefactor_residual"] = schwinger.casimir_identity_residual(
            g, proj, variant="printed_bb"
        )
    report.results = results


def _cmd_casimir(args, report: RunReport) -> None:
    g = _generators(args)
    proj = schwinger.safe_projector(g)
    levels = schwinger.casimir_spectrum(g, proj)
    eigenvalues = []
    for lvl in levels:
        eigenvalues.extend([lvl.eigenvalue] * lvl.multiplicity)
    report.results = {
        "kind": g.kind,
        "jz_form": g.jz_form,
        "eigenvalues": eigenvalues,
        "levels": [
            {"eigenvalue": lvl.eigenvalue, "multiplicity": lvl.multiplicity, "j": lvl.j}
            for lvl in levels
        ],
    }


def _cmd_state(args, report: RunReport) -> None:
    label = schwinger.JMLabel(args.j, args.m)
    cutoff = _cutoff(args, max(label.n1, label.n2) + 2)
    tol = _tol(args, 1e-10)
    vec = schwinger.schwinger_state(label, cutoff)
    g = schwinger.build_generators("bb", cutoff=cutoff, hbar=args.hbar)
    h = args.hbar
    jz_res = float(np.max(np.abs(g.jz @ vec - h * float(label.m) * vec)))
    jj = float(label.j * (label.j + 1))
    j2_res = float(np.max(np.abs(schwinger.casimir(g) @ vec - h ** 2 * jj * vec)))
    norm_res = abs(float(np.linalg.norm(vec)) - 1.0)
    report.add_check("norm", norm_res, 1e-12)
    report.add_check("jz_eigenvalue", jz_res, tol * h)
    report.add_check("casimir_eigenvalue", j2_res, tol * h ** 2)
    amps = fock.decompose(vec, (cutoff, cutoff))
    report.results = {
        "j": label.j,
        "m": label.m,
        "occupations": [list(k) for k in amps],
        "amplitudes": [v.real for v in amps.values()],
        "jz_eigenvalue": h * float(label.m),
        "casimir_eigenvalue": h ** 2 * jj,
    }


def _ensemble(args) -> thermo.EnsembleSpec:
    beta0 = args.beta[0] if args.beta else 1.0
    if args.ensemble:
        return parse_ensemble_file(args.ensemble, beta0, args.hbar, args.kB)
    if args.kind == "boson":
        mode = ModeSpace.boson(args.omega, _cutoff(args, 60))
    else:
        mode = ModeSpace.fermion(args.omega)
    return thermo.EnsembleSpec((mode,), beta0, args.hbar, args.kB)


def _cmd_sweep(args, report: RunReport) -> None:
    if not args.beta:
        raise DomainError("at least one beta is required")
    spec = _ensemble(args)
    hw = args.hbar * max(m.omega for m in spec.modes)
    rows = []
    for beta in args.beta:
        tr = thermo.thermal_report(spec.with_beta(beta), args.delta)
        rows.append({
            "beta": beta,
            "logZ_closed": tr.logZ_closed,
            "logZ_trace": tr.logZ_trace,
            "energy_closed": tr.energy_closed,
            "energy_fd": tr.energy_fd,
        })
        if args.command == "partition":
            report.add_check(f"logZ@beta={beta!r}", tr.residuals["logZ"], _tol(args, 1e-9))
        else:
            report.add_check(f"energy@beta={beta!r}", tr.residuals["energy"], _tol(args, 1e-6) * hw)
    report.results = {
        "modes": [{"kind": m.kind, "omega": m.omega, "cutoff": m.cutoff} for m in spec.modes],
        "rows": rows,
    }


def _cmd_rotor(args, report: RunReport) -> None:
    rot = thermo.rotor_equivalence(args.omega, args.j, args.n, args.hbar)
    results = {
        "inertia": rot.inertia,
        "rotor_omega": rot.rotor_omega,
        "j": rot.j_used,
        "vibrational_energy": rot.vibrational_energy,
        "rotational_energy": rot.rotational_energy,
        "convention_note": rot.convention_note,
    }
    if args.beta is not None:
        results["rotational_partition"] = thermo.rotational_partition(
            rot.inertia, args.beta, args.j_max, args.hbar
        )
        results["rotational_energy_mean"] = thermo.rotational_energy(
            rot.inertia, args.beta, args.j_max, args.hbar
        )
    report.results = results


def _element_json(x: grassmann.GrassmannElement) -> list[dict[str, Any]]:
    return [
        {"monomial": list(names), "re": str(c.re), "im": str(c.im)}
        for names, c in x.monomials()
    ]


def _cmd_grassmann(args, report: RunReport) -> None:
    d = grassmann.oscillator_derivation(args.omega, args.hbar)
    for name, res in d.residuals.items():
        report.add_check(name, 0.0 if res.is_zero() else 1.0, 0.0)
    theta = grassmann.check_theta_representation()
    report.add_check("theta_anticommutator_identity", 0.0 if theta.anticommutator_is_identity else 1.0, 0.0)
    report.add_check("theta_nilpotent", 0.0 if theta.nilpotent else 1.0, 0.0)
    results = {
        "lagrangian": str(d.lagrangian),
        "momentum_psi": str(d.momentum_field),
        "momentum_psibar": str(d.momentum_conj),
        "hamiltonian": str(d.hamiltonian),
        "hamiltonian_terms": _element_json(d.hamiltonian),
        "legendre_ordering": d.legendre_ordering,
        "derivative_side": d.derivative_side,
        "psibar_rate": str(d.conj_rate),
        "psi_rate": str(d.field_rate),
        "rotation_parameter": d.rotation_parameter,
        "theta_multiply": theta.multiply.tolist(),
        "theta_derivative": theta.derivative.tolist(),
    }
    if args.expr is not None:
        gens = args.generators.split(",") if args.generators else None
        try:
            x = grassmann.parse_expression(args.expr, gens)
        except grassmann.ExpressionError as exc:
            raise DomainError(str(exc)) from None
        results["expression"] = str(x)
        if args.wrt:
            dx = grassmann.g_derivative(x, args.wrt, args.side)
            results["derivative"] = str(dx)
            results["derivative_terms"] = _element_json(dx)
    report.results = results


def _cmd_shift(args, report: RunReport) -> None:
    cutoff = _cutoff(args, 16)
    tol = _tol(args, 1e-12)
    rows = []
    for r in args.r:
        sr = schwinger.shift_theorem_check(r, cutoff, tol)
        rows.append({"r": r, "residual_lower": sr.residual_lower, "residual_raise": sr.residual_raise})
        report.add_check(f"shift@r={r!r}", sr.max_residual, tol)
    report.results = {"cutoff": cutoff, "rows": rows}


def _cmd_frequencies(args, report: RunReport) -> None:
    if args.kind == "boson":
        mode = ModeSpace.boson(args.omega, _cutoff(args, 16))
    else:
        mode = ModeSpace.fermion(args.omega)
    ops = fock.mode_operators(mode)
    op = {"lower": ops.annihilation, "raise": ops.creation, "number": ops.number}[args.operator]
    freqs = thermo.spectral_frequencies(fock.hamiltonian(mode, args.hbar), op, args.hbar)
    results: dict[str, Any] = {
        "frequencies": [f for f, _ in freqs],
        "weights": [w for _, w in freqs],
    }
    if args.kind == "fermion":
        results["comparison"] = thermo.frequency_comparison(args.omega, args.hbar)
    report.results = results


_COMMANDS = {
    "verify": _cmd_verify,
    "casimir": _cmd_casimir,
    "state": _cmd_state,
    "partition": _cmd_sweep,
    "energy": _cmd_sweep,
    "rotor": _cmd_rotor,
    "grassmann-derive": _cmd_grassmann,
    "shift-check": _cmd_shift,
    "frequencies": _cmd_frequencies,
}


def _usage_failure(argv: Sequence[str], message: str) -> RunReport:
    sys.stderr.write(message.rstrip("\n") + "\n")
    command = argv[0] if argv else ""
    return RunReport(command=command, results={"error": message.strip()}, exit_code=2)


def run(argv: Sequence[str]) -> RunReport:
    """Parse ``argv`` and execute one command, returning its report."""
    argv = list(argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        return _usage_failure(argv, str(exc))
    except SystemExit as exc:  # --help
        return RunReport(command=argv[0] if argv else "", exit_code=int(exc.code or 0))

    if args.output == "csv" and args.command not in CSV_COMMANDS:
        return _usage_failure(
            argv, f"schwingerlab: error: --output csv is only available for {', '.join(CSV_COMMANDS)}"
        )
    params = {k: v for k, v in sorted(vars(args).items()) if k != "command"}
    report = RunReport(command=args.command, params=params)
    try:
        _COMMANDS[args.command](args, report)
    except (DomainError, ShapeError, SizeError, EnsembleParseError, OSError) as exc:
        return _usage_failure(argv, f"schwingerlab {args.command}: error: {exc}")
    return report.finalize()


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    report = run(argv)
    if report.exit_code == 2 or report.command not in _COMMANDS:
        return report.exit_code
    return emit_report(report, report.params.get("output", "json"), report.params.get("out"))


if __name__ == "__main__":
    sys.exit(main())
