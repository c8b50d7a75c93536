"""Schwinger realizations of su(2) from pairs of oscillator modes.

Four constructions are supported:

``bb``
    two truncated bosons, ``J+ = hbar a1^dag a2``, ``Jz = hbar (N1 - N2)/2``.
``ff``
    two fermions, ``J+ = hbar f1^dag f2``, ``Jz = hbar (N1 - N2)/2``.
``bf_naive``
    boson (first factor) and fermion, ``J+ = hbar a^dag f``,
    ``Jz = hbar (N - Nf)/2``.
``bf_corrected``
    the same pair with ``J+ = hbar a^dag (1+N)^(-1/2) f``.  ``Jz`` is either
    ``hbar/2 (a^dag (1+N)^(-1) a (1-Nf) - Nf)`` (``jz_form='eq58'``) or
    ``hbar/2 (1 - 2 Nf)`` (``'eq59'``); the two differ only on ``|0,0>``.

Boson and fermion factors are composed as a plain tensor product, so the
lifted operators of different modes commute.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .fock import basis_state, boson_mode, fermion_mode, iter_basis, lift
from .opcore import (
    DomainError,
    Operator,
    bracket,
    hermitian_eigensystem,
    identity,
    max_norm,
    spectral_function,
)

__all__ = [
    "KINDS",
    "JZ_FORMS",
    "SchwingerGenerators",
    "JMLabel",
    "AlgebraReport",
    "CasimirLevel",
    "ShiftReport",
    "build_generators",
    "safe_projector",
    "algebra_report",
    "casimir",
    "casimir_closed_form",
    "casimir_identity_residual",
    "casimir_commutators",
    "casimir_spectrum",
    "infer_j",
    "restricted_eigenvalues",
    "schwinger_state",
    "jm_map",
    "shift_theorem_check",
]

KINDS = ("bb", "ff", "bf_naive", "bf_corrected")
JZ_FORMS = ("eq58", "eq59")
DEFAULT_TOL = 1e-10


def _normalize_kind(kind: str) -> str:
    k = str(kind).lower().replace("-", "_")
    if k not in KINDS:
        raise DomainError(f"unknown Schwinger kind {kind!r}; expected one of {KINDS}")
    return k


@dataclass(frozen=True, eq=False)
class SchwingerGenerators:
    kind: str
    jplus: Operator
    jminus: Operator
    jz: Operator
    hbar: float = 1.0
    cutoff: int | None = None
    jz_form: str | None = None

    def __post_init__(self):
        if not np.array_equal(self.jminus.entries, self.jplus.entries.conj().T):
            raise DomainError("J- must be the exact conjugate transpose of J+")
        if max_norm(self.jz.entries - self.jz.entries.conj().T) > 1e-12:
            raise DomainError("Jz is not Hermitian")

    @property
    def layout(self) -> tuple[int, ...]:
        return self.jz.layout

    @property
    def dim(self) -> int:
        return self.jz.dim


@dataclass(frozen=True, order=True)
class JMLabel:
    j: Fraction
    m: Fraction

    def __post_init__(self):
        j, m = Fraction(self.j), Fraction(self.m)
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "m", m)
        if j < 0 or (2 * j).denominator != 1 or (2 * m).denominator != 1:
            raise DomainError(f"j and m must be half-integers with j >= 0, got ({j}, {m})")
        if abs(m) > j or (j + m).denominator != 1:
            raise DomainError(f"invalid label (j={j}, m={m})")

    @property
    def n1(self) -> int:
        return int(self.j + self.m)

    @property
    def n2(self) -> int:
        return int(self.j - self.m)


def jm_map(n1: int, n2: int) -> JMLabel:
    """Occupations ``(n1, n2)`` to ``j = (n1+n2)/2``, ``m = (n1-n2)/2``."""
    if n1 < 0 or n2 < 0:
        raise DomainError("occupations must be non-negative")
    return JMLabel(Fraction(n1 + n2, 2), Fraction(n1 - n2, 2))


def _number_power(number: Operator, r: float) -> Operator:
    kernel = 0.0 if r < 0 else None
    return spectral_function(number, lambda x: x ** r, kernel_value=kernel)


def build_generators(
    kind: str,
    cutoff: int = 16,
    hbar: float = 1.0,
    jz_form: str | None = None,
) -> SchwingerGenerators:
    """Assemble ``(J+, J-, Jz)`` for one of :data:`KINDS`.

    ``cutoff`` is the level count of every bosonic mode and is ignored for
    ``'ff'``.  ``jz_form`` applies only to ``'bf_corrected'`` and defaults
    to ``'eq58'``.
    """
    kind = _normalize_kind(kind)
    if jz_form is not None and kind != "bf_corrected":
        raise DomainError(f"jz_form is only meaningful for bf_corrected, not {kind}")
    if kind == "bf_corrected":
        jz_form = jz_form or "eq58"
        if jz_form not in JZ_FORMS:
            raise DomainError(f"jz_form must be one of {JZ_FORMS}, got {jz_form!r}")

    if kind == "bb":
        b = boson_mode(cutoff)
        layout = (cutoff, cutoff)
        a1, a1d, n1 = (lift(op, 0, layout) for op in (b.annihilation, b.creation, b.number))
        a2, a2d, n2 = (lift(op, 1, layout) for op in (b.annihilation, b.creation, b.number))
        jp = hbar * (a1d @ a2)
        jz = (hbar / 2) * (n1 - n2)
        return SchwingerGenerators(kind, jp, jp.dag(), jz, hbar, cutoff)

    if kind == "ff":
        f = fermion_mode()
        layout = (2, 2)
        f1, f1d, m1 = (lift(op, 0, layout) for op in (f.annihilation, f.creation, f.number))
        f2, f2d, m2 = (lift(op, 1, layout) for op in (f.annihilation, f.creation, f.number))
        jp = hbar * (f1d @ f2)
        jz = (hbar / 2) * (m1 - m2)
        return SchwingerGenerators(kind, jp, jp.dag(), jz, hbar, None)

    b, f = boson_mode(cutoff), fermion_mode()
    layout = (cutoff, 2)
    a, ad, n = (lift(op, 0, layout) for op in (b.annihilation, b.creation, b.number))
    fl, fd, nf = (lift(op, 1, layout) for op in (f.annihilation, f.creation, f.number))

    if kind == "bf_naive":
        jp = hbar * (ad @ fl)
        jz = (hbar / 2) * (n - nf)
        return SchwingerGenerators(kind, jp, jp.dag(), jz, hbar, cutoff)

    one = identity(n.dim, layout)
    if jz_form == "eq58":
        inv_sqrt = _number_power(one + n, -0.5)
        jp = hbar * (ad @ inv_sqrt @ fl)
        inv = _number_power(one + n, -1.0)
        jz = (hbar / 2) * (ad @ inv @ a @ (one - nf) - nf)
    else:
        inv_sqrt_n = _number_power(n, -0.5)
        jp = hbar * (inv_sqrt_n @ ad @ fl)
        jz = (hbar / 2) * (one - 2 * nf)
    return SchwingerGenerators(kind, jp, jp.dag(), jz, hbar, cutoff, jz_form)


def safe_projector(g: SchwingerGenerators, summed: bool | None = None) -> Operator:
    """Diagonal projector onto basis states away from the truncation edge.

    Boson occupations are limited to ``cutoff - 2``.  For ``'bb'`` the
    default (``summed=True``) bounds the total ``n1 + n2`` instead, which
    keeps every su(2) multiplet complete.  Fermionic spaces are untouched.
    """
    layout = g.layout
    if g.kind == "ff":
        return identity(g.dim, layout)
    top = g.cutoff - 2
    if summed is None:
        summed = g.kind == "bb"
    keep = []
    for occ in iter_basis(layout):
        if g.kind == "bb":
            ok = (occ[0] + occ[1] <= top) if summed else max(occ) <= top
        else:
            ok = occ[0] <= top
        keep.append(1.0 if ok else 0.0)
    return Operator(np.diag(np.array(keep, dtype=np.complex128)), layout)


def _check_projector(p: Operator) -> None:
    e = p.entries
    if max_norm(e @ e - e) > 1e-12 or max_norm(e - e.conj().T) > 1e-12:
        raise DomainError("safe projector must be Hermitian and idempotent")


def _sandwich(p: Operator, x: Operator) -> np.ndarray:
    return p.entries @ x.entries @ p.entries


@dataclass(frozen=True)
class AlgebraReport:
    kind: str
    residuals: dict[str, float]
    tolerance: float

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance


def algebra_report(
    g: SchwingerGenerators,
    projector: Operator | None = None,
    tol: float = DEFAULT_TOL,
) -> AlgebraReport:
    """Projected residuals of the three su(2) brackets.

    The commutators are formed on the full truncated space and then
    sandwiched between the projector; the report passes when every
    residual is at most ``tol * hbar``.
    """
    p = projector if projector is not None else safe_projector(g)
    _check_projector(p)
    h = g.hbar
    checks = {
        "[Jz,J+]-hbar*J+": bracket(g.jz, g.jplus) - h * g.jplus,
        "[Jz,J-]+hbar*J-": bracket(g.jz, g.jminus) + h * g.jminus,
        "[J+,J-]-2hbar*Jz": bracket(g.jplus, g.jminus) - 2 * h * g.jz,
    }
    residuals = {name: max_norm(_sandwich(p, x)) for name, x in checks.items()}
    return AlgebraReport(g.kind, residuals, tol * h)


def casimir(g: SchwingerGenerators) -> Operator:
    """``J^2 = Jz^2 + {J+, J-}/2``."""
    return g.jz @ g.jz + 0.5 * bracket(g.jplus, g.jminus, "anticommutator")


def casimir_commutators(
    g: SchwingerGenerators, projector: Operator | None = None
) -> dict[str, float]:
    p = projector if projector is not None else safe_projector(g)
    j2 = casimir(g)
    return {
        "[J2,Jz]": max_norm(_sandwich(p, bracket(j2, g.jz))),
        "[J2,J+]": max_norm(_sandwich(p, bracket(j2, g.jplus))),
        "[J2,J-]": max_norm(_sandwich(p, bracket(j2, g.jminus))),
    }


def _number_ops(g: SchwingerGenerators) -> tuple[Operator, Operator]:
    layout = g.layout
    if g.kind == "bb":
        b = boson_mode(g.cutoff)
        return lift(b.number, 0, layout), lift(b.number, 1, layout)
    if g.kind == "ff":
        f = fermion_mode()
        return lift(f.number, 0, layout), lift(f.number, 1, layout)
    b, f = boson_mode(g.cutoff), fermion_mode()
    return lift(b.number, 0, layout), lift(f.number, 1, layout)


def casimir_closed_form(g: SchwingerGenerators, variant: str = "derived") -> Operator:
    """Closed-form Casimir predicted for each construction.

    ``variant='printed_bb'`` returns the bosonic form carrying an extra
    ``1/4`` prefactor, ``hbar^2/4 (N/2)(N/2 + 1)``, for comparison.
    """
    h2 = g.hbar ** 2
    n1, n2 = _number_ops(g)
    one = identity(g.dim, g.layout)
    if g.kind == "bb":
        half = 0.5 * (n1 + n2)
        form = h2 * (half @ (half + one))
        if variant == "printed_bb":
            return 0.25 * form
        return form
    if variant != "derived":
        raise DomainError(f"variant {variant!r} only applies to bb")
    if g.kind == "ff":
        half = 0.5 * (n1 + n2)
        return h2 * (half @ (half + one)) - 2 * h2 * (n1 @ n2)
    if g.kind == "bf_naive":
        n, nf = n1, n2
        return (h2 / 4) * (nf @ (nf + 2 * one) + n @ (n + 2 * one)
                           - bracket(n, nf, "anticommutator"))
    return 0.75 * h2 * one


def casimir_identity_residual(
    g: SchwingerGenerators,
    projector: Operator | None = None,
    variant: str = "derived",
) -> float:
    p = projector if projector is not None else safe_projector(g)
    diff = casimir(g) - casimir_closed_form(g, variant)
    return max_norm(_sandwich(p, diff))


def infer_j(eigenvalue: float, hbar: float = 1.0, atol: float = 1e-6) -> Fraction | None:
    """Half-integer ``j`` with ``hbar^2 j(j+1) = eigenvalue``, if one exists."""
    x = eigenvalue / hbar ** 2
    if x < -atol:
        return None
    j = (-1.0 + math.sqrt(max(1.0 + 4.0 * x, 0.0))) / 2.0
    twice = round(2 * j)
    if abs(2 * j - twice) <= atol:
        return Fraction(twice, 2)
    return None


@dataclass(frozen=True)
class CasimirLevel:
    eigenvalue: float
    multiplicity: int
    j: Fraction | None


def _restrict(op: Operator, projector: Operator) -> np.ndarray:
    vals, vecs = hermitian_eigensystem(projector)
    basis = vecs[:, vals > 0.5]
    return basis.conj().T @ op.entries @ basis


def casimir_spectrum(
    g: SchwingerGenerators,
    projector: Operator | None = None,
    cluster_tol: float = 1e-8,
) -> list[CasimirLevel]:
    """Clustered eigenvalues of ``J^2`` restricted to the projector's range."""
    p = projector if projector is not None else safe_projector(g)
    _check_projector(p)
    block = _restrict(casimir(g), p)
    values = hermitian_eigensystem(Operator(block)).eigenvalues
    tol = cluster_tol * g.hbar ** 2
    levels: list[list[float]] = []
    for v in values:
        if levels and abs(v - levels[-1][0]) <= tol:
            levels[-1].append(v)
        else:
            levels.append([v])
    out = []
    for group in levels:
        mean = float(np.mean(group))
        out.append(CasimirLevel(mean, len(group), infer_j(mean, g.hbar)))
    return out


def restricted_eigenvalues(op: Operator, projector: Operator) -> np.ndarray:
    return hermitian_eigensystem(Operator(_restrict(op, projector))).eigenvalues


def schwinger_state(label: JMLabel, cutoff: int) -> np.ndarray:
    """``(a1^dag)^(j+m) (a2^dag)^(j-m) |0,0> / sqrt((j+m)! (j-m)!)``."""
    n1, n2 = label.n1, label.n2
    if max(n1, n2) > cutoff - 1:
        raise DomainError(
            f"cutoff {cutoff} too small for (j={label.j}, m={label.m}); need > {max(n1, n2)}"
        )
    layout = (cutoff, cutoff)
    b = boson_mode(cutoff)
    a1d, a2d = lift(b.creation, 0, layout), lift(b.creation, 1, layout)
    vec = basis_state((0, 0), layout)
    for _ in range(n1):
        vec = a1d @ vec
    for _ in range(n2):
        vec = a2d @ vec
    return vec / math.sqrt(math.factorial(n1) * math.factorial(n2))


@dataclass(frozen=True)
class ShiftReport:
    r: float
    cutoff: int
    residual_lower: float
    residual_raise: float
    tolerance: float = 1e-12

    @property
    def max_residual(self) -> float:
        return max(self.residual_lower, self.residual_raise)

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance


def shift_theorem_check(r: float, cutoff: int = 16, tol: float = 1e-12) -> ShiftReport:
    """Residuals of ``a N^r = (1+N)^r a`` and ``N^r a^dag = a^dag (1+N)^r``.

    Negative powers use the pseudoinverse convention on the vacuum.  Both
    residuals are measured on levels ``0..cutoff-2``.
    """
    if cutoff < 3:
        raise DomainError(f"cutoff must be >= 3, got {cutoff}")
    b = boson_mode(cutoff)
    a, ad, n = b.annihilation, b.creation, b.number
    n_r = _number_power(n, r)
    shifted = _number_power(n + 1.0, r)
    p = np.diag([1.0] * (cutoff - 1) + [0.0]).astype(np.complex128)
    lower = p @ (a @ n_r - shifted @ a).entries @ p
    upper = p @ (n_r @ ad - ad @ shifted).entries @ p
    return ShiftReport(float(r), cutoff, max_norm(lower), max_norm(upper), tol)
