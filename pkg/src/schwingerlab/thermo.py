"""Thermal and rotor-equivalence quantities for oscillator ensembles.

Closed forms are always paired with an independent oracle: the trace
``Tr exp(-beta H)`` over an explicit Hamiltonian for partition functions,
a central difference of ``ln Z`` for mean energies and adaptive quadrature
for the continuum-limit energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np
from scipy import integrate, special

from .fock import ModeSpace, fermion_mode, hamiltonian, lift
from .opcore import DomainError, Operator, hermitian_eigensystem, log_trace_exp, trace_exp

__all__ = [
    "BOLTZMANN_SI",
    "EnsembleSpec",
    "ThermalReport",
    "RotorEquivalence",
    "ContinuumEnergy",
    "closed_partition",
    "log_closed_partition",
    "trace_partition",
    "ensemble_log_partition",
    "ensemble_log_partition_trace",
    "ensemble_hamiltonian",
    "mean_energy",
    "mode_mean_energy",
    "mean_energy_fd",
    "thermal_report",
    "continuum_energy",
    "rotor_equivalence",
    "fermion_pair_rotor",
    "rotational_partition",
    "rotational_energy",
    "spectral_frequencies",
    "frequency_comparison",
]

BOLTZMANN_SI = 1.380649e-23


@dataclass(frozen=True)
class EnsembleSpec:
    """Independent modes at inverse temperature ``beta`` (units 1/energy)."""

    modes: tuple[ModeSpace, ...]
    beta: float
    hbar: float = 1.0
    kB: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.modes:
            raise DomainError("an ensemble needs at least one mode")
        if not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta}")
        if not self.hbar > 0 or not self.kB > 0:
            raise DomainError("hbar and kB must be positive")

    @classmethod
    def from_temperature(cls, modes, T: float, hbar: float = 1.0, kB: float = 1.0):
        return cls(tuple(modes), 1.0 / (kB * T), hbar, kB)

    @property
    def temperature(self) -> float:
        return 1.0 / (self.kB * self.beta)

    def with_beta(self, beta: float) -> "EnsembleSpec":
        return EnsembleSpec(self.modes, beta, self.hbar, self.kB)


def _x(mode: ModeSpace, beta: float, hbar: float) -> float:
    return beta * hbar * mode.omega


def closed_partition(mode: ModeSpace, beta: float, hbar: float = 1.0) -> float:
    """``2 cosh(x/2)`` (fermion) or ``exp(-x/2) / (1 - exp(-x))`` (boson), ``x = beta hbar omega``."""
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    x = _x(mode, beta, hbar)
    if mode.kind == "fermion":
        return 2.0 * math.cosh(x / 2)
    return math.exp(-x / 2) / -math.expm1(-x)


def log_closed_partition(mode: ModeSpace, beta: float, hbar: float = 1.0) -> float:
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    x = _x(mode, beta, hbar)
    if mode.kind == "fermion":
        return x / 2 + math.log1p(math.exp(-x))
    return -x / 2 - math.log(-math.expm1(-x))


def trace_partition(h: Operator, beta: float) -> float:
    """``Tr exp(-beta H)``; the oracle for every closed form."""
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    return trace_exp(h, beta)


def ensemble_log_partition(spec: EnsembleSpec) -> float:
    return sum(log_closed_partition(m, spec.beta, spec.hbar) for m in spec.modes)


def ensemble_log_partition_trace(spec: EnsembleSpec, beta: float | None = None) -> float:
    """``ln Z`` from traces over each mode's truncated Hamiltonian."""
    beta = spec.beta if beta is None else beta
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    return sum(log_trace_exp(hamiltonian(m, spec.hbar), beta) for m in spec.modes)


def ensemble_hamiltonian(spec: EnsembleSpec) -> Operator:
    """``sum_k H_k`` lifted onto the full tensor-product space."""
    layout = tuple(m.dim for m in spec.modes)
    total = None
    for k, m in enumerate(spec.modes):
        term = lift(hamiltonian(m, spec.hbar), k, layout)
        total = term if total is None else total + term
    return total


def mode_mean_energy(mode: ModeSpace, beta: float, hbar: float = 1.0) -> float:
    x = _x(mode, beta, hbar)
    hw = hbar * mode.omega
    if mode.kind == "fermion":
        return -hw * (0.5 - float(special.expit(-x)))
    return hw * (0.5 + 1.0 / math.expm1(x))


def mean_energy(spec: EnsembleSpec) -> float:
    """``<E> = -d ln Z / d beta`` from the closed forms, summed over modes."""
    return sum(mode_mean_energy(m, spec.beta, spec.hbar) for m in spec.modes)


def mean_energy_fd(spec: EnsembleSpec, delta: float = 1e-5) -> float:
    """Central difference of the traced ``ln Z``; second order in ``delta``."""
    if not delta > 0 or not spec.beta - delta > 0:
        raise DomainError("need delta > 0 and beta - delta > 0")
    up = ensemble_log_partition_trace(spec, spec.beta + delta)
    down = ensemble_log_partition_trace(spec, spec.beta - delta)
    return -(up - down) / (2 * delta)


@dataclass(frozen=True)
class ThermalReport:
    beta: float
    logZ_closed: float
    logZ_trace: float
    energy_closed: float
    energy_fd: float

    @property
    def residuals(self) -> dict[str, float]:
        return {
            "logZ": abs(self.logZ_closed - self.logZ_trace),
            "energy": abs(self.energy_closed - self.energy_fd),
        }


def thermal_report(spec: EnsembleSpec, delta: float = 1e-5) -> ThermalReport:
    return ThermalReport(
        beta=spec.beta,
        logZ_closed=ensemble_log_partition(spec),
        logZ_trace=ensemble_log_partition_trace(spec),
        energy_closed=mean_energy(spec),
        energy_fd=mean_energy_fd(spec, delta),
    )


class ContinuumEnergy(NamedTuple):
    closed: float
    quadrature: float
    printed: float

    @property
    def printed_deviation(self) -> float:
        return abs(self.printed - self.quadrature)


def continuum_energy(
    eps_m: float, T: float = 1.0, kB: float = 1.0, eps_min: float = 1.0
) -> ContinuumEnergy:
    """Continuum-limit fermionic energy ``kT * int_{eps_min}^{eps_m} (1/(1+e^x) - 1/2) dx``.

    ``closed`` uses the antiderivative ``x/2 - ln(1 + e^x)``; ``printed``
    is the variant with ``(1 - eps_m)/2`` in place of ``(eps_m - 1)/2``.
    Both closed expressions assume ``eps_min = 1``.
    """
    if eps_m < eps_min:
        raise DomainError(f"eps_m must be >= {eps_min}, got {eps_m}")
    kT = kB * T

    def antiderivative(x: float) -> float:
        return -(x / 2) - math.log1p(math.exp(-x))

    closed = kT * (antiderivative(eps_m) - antiderivative(eps_min))
    value, _ = integrate.quad(lambda x: special.expit(-x) - 0.5, eps_min, eps_m,
                              epsabs=1e-12, epsrel=1e-12, limit=200)
    log_ratio = math.log1p(math.e) - (eps_m + math.log1p(math.exp(-eps_m)))
    printed = kT * ((1 - eps_m) / 2 + log_ratio)
    return ContinuumEnergy(closed, kT * value, printed)


@dataclass(frozen=True)
class RotorEquivalence:
    inertia: float
    rotor_omega: float
    j_used: Fraction
    vibrational_energy: float
    rotational_energy: float
    convention_note: str = ""

    def __post_init__(self):
        if not self.inertia > 0 or not self.rotor_omega > 0:
            raise DomainError("inertia and rotor frequency must be positive")


def _as_half_integer(j) -> Fraction:
    jf = Fraction(j).limit_denominator(2)
    if (2 * jf).denominator != 1 or abs(float(jf) - float(j)) > 1e-12:
        raise DomainError(f"j must be a half-integer, got {j}")
    return jf


def _solve_rotor(rot_energy: float, j: Fraction, hbar: float) -> tuple[float, float]:
    jj = float(j * (j + 1))
    inertia = hbar ** 2 * jj / (2 * rot_energy)
    rotor_omega = hbar * math.sqrt(jj) / inertia
    return inertia, rotor_omega


def rotor_equivalence(
    omega: float, j=1, n_oscillators: int = 2, hbar: float = 1.0
) -> RotorEquivalence:
    """Rigid rotor whose level ``j`` matches identical ground-state oscillators.

    For two modes ``hbar^2 j(j+1) / (2 I) = 2 * hbar omega / 2``, then
    ``I * omega_rot = hbar sqrt(j(j+1))``.  For three modes one oscillator
    is left unpaired: ``E_rot + hbar omega / 2 = 3 hbar omega / 2``.
    """
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega}")
    j = _as_half_integer(j)
    if j <= 0:
        raise DomainError("j must be positive")
    hw = hbar * omega
    if n_oscillators == 2:
        e_vib = 2 * hw / 2
        e_rot = e_vib
        note = "two identical ground-state modes; E_vib = hbar*omega"
    elif n_oscillators == 3:
        e_vib = 3 * hw / 2
        e_rot = e_vib - hw / 2
        printed_vib = 4.5 * hw
        _, printed_omega = _solve_rotor(printed_vib - hw / 2, j, hbar)
        note = (
            "three ground-state modes counted as 3*hbar*omega/2; the count "
            f"9*hbar*omega/2 would give rotor_omega = {printed_omega / omega:.17g}*omega"
        )
    else:
        raise DomainError(f"n_oscillators must be 2 or 3, got {n_oscillators}")
    inertia, rotor_omega = _solve_rotor(e_rot, j, hbar)
    return RotorEquivalence(inertia, rotor_omega, j, e_vib, e_rot, note)


def fermion_pair_rotor(
    omega1: float, omega2: float, beta: float, j=1, hbar: float = 1.0
) -> RotorEquivalence:
    """Match the thermal energy of two fermionic modes to a rotor level.

    Raises
    ------
    DomainError
        When the pair energy is not positive, since ``hbar^2 j(j+1)/(2I)``
        cannot equal a non-positive energy for any positive inertia.  The
        fermionic thermal energy is negative at every finite temperature.
    """
    spec = EnsembleSpec((ModeSpace.fermion(omega1), ModeSpace.fermion(omega2)), beta, hbar)
    energy = mean_energy(spec)
    j = _as_half_integer(j)
    if energy <= 0 or j <= 0:
        raise DomainError(
            f"fermion-pair energy {energy:.17g} is not positive; no rotor inertia solves "
            "hbar^2 j(j+1)/(2I) = E"
        )
    inertia, rotor_omega = _solve_rotor(energy, j, hbar)
    return RotorEquivalence(inertia, rotor_omega, j, energy, energy, "fermion pair")


def rotational_partition(inertia: float, beta: float, j_max, hbar: float = 1.0) -> float:
    """``sum_{j=0}^{j_max} (2j+1) exp(-beta hbar^2 j(j+1) / (2I))`` over integer ``j``."""
    if not inertia > 0 or not beta > 0:
        raise DomainError("inertia and beta must be positive")
    if j_max < 0:
        raise DomainError("j_max must be non-negative")
    js = np.arange(0, math.floor(j_max) + 1, dtype=float)
    eps = hbar ** 2 * js * (js + 1) / (2 * inertia)
    return float(np.sum((2 * js + 1) * np.exp(-beta * eps)))


def rotational_energy(inertia: float, beta: float, j_max, hbar: float = 1.0) -> float:
    """``-d ln Z_rot / d beta`` for :func:`rotational_partition`."""
    js = np.arange(0, math.floor(j_max) + 1, dtype=float)
    eps = hbar ** 2 * js * (js + 1) / (2 * inertia)
    w = (2 * js + 1) * np.exp(-beta * eps)
    return float(np.sum(w * eps) / np.sum(w))


def spectral_frequencies(
    h: Operator, o: Operator, hbar: float = 1.0, atol: float = 1e-10
) -> list[tuple[float, float]]:
    """Heisenberg-picture frequencies of ``o`` under ``h``.

    With ``o(t) = exp(iHt/hbar) o exp(-iHt/hbar)`` every matrix element
    ``<i|o|j>`` in the eigenbasis evolves as ``exp(-i nu t)`` with
    ``nu = (E_j - E_i)/hbar``.  Returns ``(nu, weight)`` pairs, ``weight``
    the summed ``|<i|o|j>|^2`` over transitions sharing that frequency,
    sorted by frequency.
    """
    values, vectors = hermitian_eigensystem(h)
    elems = vectors.conj().T @ o.entries @ vectors
    found: list[list[float]] = []
    for i, j in zip(*np.nonzero(np.abs(elems) > atol)):
        nu = (values[j] - values[i]) / hbar
        w = float(abs(elems[i, j]) ** 2)
        for entry in found:
            if abs(entry[0] - nu) <= 1e-9 * max(1.0, abs(nu)):
                entry[1] += w
                break
        else:
            found.append([float(nu), w])
    return sorted((nu, w) for nu, w in found)


def frequency_comparison(omega: float = 1.0, hbar: float = 1.0) -> dict[str, float]:
    """Fermionic spectral gap next to the half-frequency rotation parameter.

    ``spectral_gap`` is the only frequency at which ``f(t)`` oscillates;
    ``half_frequency_claim`` is ``omega/2``, the parameter that writes the
    classical equation of motion as ``psibar' = 2 i w~ psibar``.
    """
    mode = ModeSpace.fermion(omega)
    freqs = spectral_frequencies(hamiltonian(mode, hbar), fermion_mode(omega).annihilation, hbar)
    (gap, _), = freqs
    return {
        "omega": omega,
        "spectral_gap": gap,
        "half_frequency_claim": omega / 2,
        "ratio_gap_to_claim": gap / (omega / 2),
    }
