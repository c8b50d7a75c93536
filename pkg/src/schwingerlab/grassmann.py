"""Exact calculus on a finite exterior (Grassmann) algebra.

Elements carry exact complex-rational coefficients.  Floats supplied for
hbar and omega are converted with :class:`fractions.Fraction`, which is
exact for binary floating point values, so symbolic identities such as
``H - hbar*omega*psibar*psi == 0`` are checked with no tolerance.

Conventions
-----------
The generator universe is an ordered tuple of names; monomials are stored
with generators in that order.  ``g_derivative(x, g, 'left')`` anticommutes
``g`` to the far left of each monomial and strips it; ``'right'`` does the
same on the right.  Canonical momenta and Euler-Lagrange equations use the
left derivative.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Number
from typing import Iterable, Mapping, Sequence

import numpy as np

from .opcore import DomainError

__all__ = [
    "ExactComplex",
    "GrassmannElement",
    "GrassmannAlgebra",
    "g_multiply",
    "g_derivative",
    "oscillator_lagrangian",
    "OscillatorDerivation",
    "oscillator_derivation",
    "derive_oscillator_hamiltonian",
    "euler_lagrange",
    "ThetaRepresentation",
    "check_theta_representation",
    "parse_expression",
    "ExpressionError",
]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        if not np.isfinite(x):
            raise DomainError(f"coefficient must be finite, got {x}")
        return Fraction(x)
    return Fraction(x)


@dataclass(frozen=True)
class ExactComplex:
    """Complex number with rational real and imaginary parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", _frac(self.re))
        object.__setattr__(self, "im", _frac(self.im))

    @classmethod
    def of(cls, value) -> "ExactComplex":
        if isinstance(value, ExactComplex):
            return value
        if isinstance(value, complex):
            return cls(_frac(value.real), _frac(value.imag))
        if isinstance(value, (np.floating, np.integer)):
            value = value.item()
        if isinstance(value, (int, float, Fraction)):
            return cls(_frac(value))
        if isinstance(value, str):
            return cls(Fraction(value))
        raise TypeError(f"cannot convert {type(value).__name__} to ExactComplex")

    @staticmethod
    def _maybe(other):
        try:
            return ExactComplex.of(other)
        except TypeError:
            return None

    def __add__(self, other):
        o = self._maybe(other)
        if o is None:
            return NotImplemented
        return ExactComplex(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return ExactComplex(-self.re, -self.im)

    def __sub__(self, other):
        o = self._maybe(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return ExactComplex.of(other) - self

    def __mul__(self, other):
        o = self._maybe(other)
        if o is None:
            return NotImplemented
        return ExactComplex(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._maybe(other)
        if o is None:
            return NotImplemented
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("division by exact zero")
        return self * ExactComplex(o.re / den, -o.im / den)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        o = self._maybe(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __str__(self):
        if not self.im:
            return str(self.re)
        return f"({self.re},{self.im})"

    def __repr__(self):
        return f"ExactComplex({self.re!s}, {self.im!s})"


Monomial = tuple[int, ...]
_ZERO = ExactComplex()


def _merge_sign(a: Monomial, b: Monomial) -> int:
    """Sign from sorting ``a + b`` into canonical order, or 0 on a repeat."""
    if set(a) & set(b):
        return 0
    inversions = sum(1 for i in a for j in b if i > j)
    return -1 if inversions % 2 else 1


class GrassmannElement:
    """Finite sum of coefficient * ordered-monomial over a generator universe."""

    __slots__ = ("generators", "terms")

    def __init__(
        self,
        generators: Sequence[str],
        terms: Mapping[Monomial, object] | None = None,
    ):
        gens = tuple(generators)
        if len(set(gens)) != len(gens):
            raise DomainError(f"duplicate generator names in {gens}")
        clean: dict[Monomial, ExactComplex] = {}
        for mono, coeff in (terms or {}).items():
            mono = tuple(mono)
            if any(not 0 <= k < len(gens) for k in mono):
                raise DomainError(f"monomial {mono} refers to unknown generators")
            order = sorted(mono)
            if len(set(order)) != len(order):
                continue
            sign = _permutation_sign(mono)
            c = ExactComplex.of(coeff) * sign
            key = tuple(order)
            total = clean.get(key, _ZERO) + c
            if total:
                clean[key] = total
            else:
                clean.pop(key, None)
        self.generators = gens
        self.terms = dict(sorted(clean.items(), key=lambda kv: (len(kv[0]), kv[0])))

    # construction helpers
    @classmethod
    def scalar(cls, generators: Sequence[str], value=1) -> "GrassmannElement":
        return cls(generators, {(): value})

    @classmethod
    def generator(cls, generators: Sequence[str], name: str) -> "GrassmannElement":
        gens = tuple(generators)
        if name not in gens:
            raise DomainError(f"unknown generator {name!r}")
        return cls(gens, {(gens.index(name),): 1})

    def _check_universe(self, other: "GrassmannElement"):
        if self.generators != other.generators:
            raise DomainError(
                f"generator universes differ: {self.generators} vs {other.generators}"
            )

    def _coerce(self, other) -> "GrassmannElement":
        if isinstance(other, GrassmannElement):
            self._check_universe(other)
            return other
        if isinstance(other, (Number, ExactComplex, Fraction)):
            return GrassmannElement.scalar(self.generators, other)
        raise TypeError(f"cannot combine GrassmannElement with {type(other).__name__}")

    def __add__(self, other):
        o = self._coerce(other)
        terms = dict(self.terms)
        for mono, c in o.terms.items():
            terms[mono] = terms.get(mono, _ZERO) + c
        return GrassmannElement(self.generators, terms)

    __radd__ = __add__

    def __neg__(self):
        return GrassmannElement(self.generators, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        return g_multiply(self, self._coerce(other))

    def __rmul__(self, other):
        return g_multiply(self._coerce(other), self)

    def __eq__(self, other):
        if isinstance(other, GrassmannElement):
            return self.generators == other.generators and self.terms == other.terms
        if isinstance(other, (Number, ExactComplex, Fraction)):
            return self == self._coerce(other)
        return NotImplemented

    __hash__ = None

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, *names: str) -> ExactComplex:
        """Coefficient of the monomial ``names`` as written (sign-adjusted)."""
        idx = tuple(self.generators.index(n) for n in names)
        probe = GrassmannElement(self.generators, {idx: 1})
        if not probe.terms:
            return _ZERO
        (mono, sign), = probe.terms.items()
        return self.terms.get(mono, _ZERO) * sign

    def degree_parts(self) -> dict[int, "GrassmannElement"]:
        parts: dict[int, dict] = {}
        for mono, c in self.terms.items():
            parts.setdefault(len(mono), {})[mono] = c
        return {d: GrassmannElement(self.generators, t) for d, t in parts.items()}

    def monomials(self) -> list[tuple[tuple[str, ...], ExactComplex]]:
        return [
            (tuple(self.generators[k] for k in mono), c) for mono, c in self.terms.items()
        ]

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for names, c in self.monomials():
            coeff = f"({c.re},{c.im})"
            parts.append("*".join((coeff,) + names))
        return " + ".join(parts)

    def __repr__(self):
        return f"GrassmannElement({self})"


def _permutation_sign(seq: Sequence[int]) -> int:
    inversions = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
    return -1 if inversions % 2 else 1


class GrassmannAlgebra:
    """Factory bound to a fixed generator universe."""

    def __init__(self, generators: Iterable[str]):
        self.generators = tuple(generators)
        if len(set(self.generators)) != len(self.generators):
            raise DomainError("duplicate generator names")

    def __getitem__(self, name: str) -> GrassmannElement:
        return GrassmannElement.generator(self.generators, name)

    def gens(self, *names: str) -> tuple[GrassmannElement, ...]:
        return tuple(self[n] for n in names)

    def scalar(self, value=1) -> GrassmannElement:
        return GrassmannElement.scalar(self.generators, value)

    @property
    def zero(self) -> GrassmannElement:
        return GrassmannElement(self.generators)

    @property
    def one(self) -> GrassmannElement:
        return self.scalar(1)


def g_multiply(x: GrassmannElement, y: GrassmannElement) -> GrassmannElement:
    """Bilinear exterior product; repeated generators annihilate the term."""
    if x.generators != y.generators:
        raise DomainError(f"generator universes differ: {x.generators} vs {y.generators}")
    terms: dict[Monomial, ExactComplex] = {}
    for ma, ca in x.terms.items():
        for mb, cb in y.terms.items():
            sign = _merge_sign(ma, mb)
            if not sign:
                continue
            key = tuple(sorted(ma + mb))
            terms[key] = terms.get(key, _ZERO) + ca * cb * sign
    return GrassmannElement(x.generators, terms)


def g_derivative(x: GrassmannElement, gen: str, side: str = "left") -> GrassmannElement:
    """Left or right derivative with respect to generator ``gen``."""
    if gen not in x.generators:
        raise DomainError(f"unknown generator {gen!r}")
    if side not in ("left", "right"):
        raise DomainError(f"side must be 'left' or 'right', got {side!r}")
    g = x.generators.index(gen)
    terms: dict[Monomial, ExactComplex] = {}
    for mono, c in x.terms.items():
        if g not in mono:
            continue
        pos = mono.index(g)
        hops = pos if side == "left" else len(mono) - 1 - pos
        rest = mono[:pos] + mono[pos + 1:]
        terms[rest] = c * (-1 if hops % 2 else 1)
    return GrassmannElement(x.generators, terms)


# -- fermionic oscillator -----------------------------------------------------


def _velocity_names(field: str, conj: str) -> tuple[str, str]:
    return f"{field}dot", f"{conj}dot"


def oscillator_lagrangian(
    omega: float,
    hbar: float = 1.0,
    field: str = "psi",
    conj: str = "psibar",
) -> GrassmannElement:
    """``(i hbar/2)(conj*field' - conj'*field) - (hbar omega/2)[conj, field]``.

    The universe is ``(field, conj, field', conj')`` where the primed
    velocities are named ``<field>dot`` and ``<conj>dot``.
    """
    vf, vc = _velocity_names(field, conj)
    alg = GrassmannAlgebra((field, conj, vf, vc))
    q, qb, qd, qbd = alg.gens(field, conj, vf, vc)
    i_hbar_half = ExactComplex(0, _frac(hbar) / 2)
    hw_half = ExactComplex(_frac(hbar) * _frac(omega) / 2)
    kinetic = i_hbar_half * (qb * qd - qbd * q)
    commutator = qb * q - q * qb
    return kinetic - hw_half * commutator


def _time_derivative(x: GrassmannElement, rename: Mapping[str, str]) -> GrassmannElement:
    """d/dt of an element linear in the coordinates (coordinate -> velocity)."""
    gens = x.generators
    terms: dict[Monomial, ExactComplex] = {}
    for mono, c in x.terms.items():
        if len(mono) != 1 or gens[mono[0]] not in rename:
            raise DomainError("time derivative is only defined for elements linear in coordinates")
        key = (gens.index(rename[gens[mono[0]]]),)
        terms[key] = terms.get(key, _ZERO) + c
    return GrassmannElement(gens, terms)


def euler_lagrange(
    lagrangian: GrassmannElement, coordinate: str, velocities: Mapping[str, str]
) -> GrassmannElement:
    """``d/dt(dL/d coordinate') - dL/d coordinate`` using left derivatives.

    ``velocities`` maps each coordinate name to its velocity name.
    """
    momentum = g_derivative(lagrangian, velocities[coordinate], "left")
    return _time_derivative(momentum, velocities) - g_derivative(lagrangian, coordinate, "left")


def _linear_rate(equation: GrassmannElement, coord: str, vel: str) -> ExactComplex:
    """Solve ``c_v * vel + c_q * coord = 0`` for ``vel = rate * coord``."""
    c_v = equation.coefficient(vel)
    c_q = equation.coefficient(coord)
    extra = equation - GrassmannElement(equation.generators, {
        (equation.generators.index(vel),): c_v,
        (equation.generators.index(coord),): c_q,
    })
    if not extra.is_zero() or not c_v:
        raise DomainError("equation of motion is not of the form v = rate * q")
    return -(c_q / c_v)


@dataclass(frozen=True)
class OscillatorDerivation:
    """Every intermediate of the Lagrangian -> Hamiltonian pipeline."""

    lagrangian: GrassmannElement
    momentum_field: GrassmannElement
    momentum_conj: GrassmannElement
    expected_momentum_field: GrassmannElement
    expected_momentum_conj: GrassmannElement
    hamiltonian: GrassmannElement
    expected_hamiltonian: GrassmannElement
    commutator_form: GrassmannElement
    conj_rate: ExactComplex
    field_rate: ExactComplex
    legendre_ordering: str
    derivative_side: str = "left"

    @property
    def residuals(self) -> dict[str, GrassmannElement]:
        return {
            "momentum_field": self.momentum_field - self.expected_momentum_field,
            "momentum_conj": self.momentum_conj - self.expected_momentum_conj,
            "hamiltonian": self.hamiltonian - self.expected_hamiltonian,
            "hamiltonian_commutator_form": self.hamiltonian - self.commutator_form,
        }

    @property
    def exact(self) -> bool:
        return all(r.is_zero() for r in self.residuals.values())

    @property
    def rotation_parameter(self) -> Fraction:
        """The ``w~`` that writes ``conj' = 2 i w~ conj``: half the rate."""
        return self.conj_rate.im / 2


def oscillator_derivation(
    omega: float,
    hbar: float = 1.0,
    field: str = "psi",
    conj: str = "psibar",
) -> OscillatorDerivation:
    """Derive the oscillator Hamiltonian from its first-order Lagrangian.

    Momenta are left derivatives with respect to the velocities.  The
    Legendre transform is ``field' * P_field + conj' * P_conj - L``; with
    the velocity written to the left of each momentum the kinetic term
    cancels identically and the result is ``hbar*omega*conj*field``.
    """
    if omega < 0:
        raise DomainError(f"omega must be non-negative, got {omega}")
    L = oscillator_lagrangian(omega, hbar, field, conj)
    vf, vc = _velocity_names(field, conj)
    alg = GrassmannAlgebra(L.generators)
    q, qb, qd, qbd = alg.gens(field, conj, vf, vc)

    p_field = g_derivative(L, vf, "left")
    p_conj = g_derivative(L, vc, "left")
    H = qd * p_field + qbd * p_conj - L

    minus_i_hbar_half = ExactComplex(0, -_frac(hbar) / 2)
    hw = ExactComplex(_frac(hbar) * _frac(omega))
    velocities = {field: vf, conj: vc}
    return OscillatorDerivation(
        lagrangian=L,
        momentum_field=p_field,
        momentum_conj=p_conj,
        expected_momentum_field=minus_i_hbar_half * qb,
        expected_momentum_conj=minus_i_hbar_half * q,
        hamiltonian=H,
        expected_hamiltonian=hw * (qb * q),
        commutator_form=hw / 2 * (qb * q - q * qb),
        conj_rate=_linear_rate(euler_lagrange(L, field, velocities), conj, vc),
        field_rate=_linear_rate(euler_lagrange(L, conj, velocities), field, vf),
        legendre_ordering=f"H = {vf}*P_{field} + {vc}*P_{conj} - L",
    )


def derive_oscillator_hamiltonian(omega: float, hbar: float = 1.0) -> GrassmannElement:
    return oscillator_derivation(omega, hbar).hamiltonian


# -- operator realization on span{1, theta} ----------------------------------


@dataclass(frozen=True)
class ThetaRepresentation:
    multiply: np.ndarray
    derivative: np.ndarray
    anticommutator: np.ndarray
    multiply_squared: np.ndarray
    derivative_squared: np.ndarray

    @property
    def anticommutator_is_identity(self) -> bool:
        return bool(np.array_equal(self.anticommutator, np.eye(2)))

    @property
    def nilpotent(self) -> bool:
        return not self.multiply_squared.any() and not self.derivative_squared.any()


def check_theta_representation(name: str = "theta") -> ThetaRepresentation:
    """Matrices of ``theta*`` and ``d/dtheta`` on the basis ``(1, theta)``.

    Under ``|0> <-> 1, |1> <-> theta`` multiplication by theta is the
    creation operator of a fermionic mode and the derivative its
    annihilation operator; swapping the identification exchanges them.
    """
    alg = GrassmannAlgebra((name,))
    basis = (alg.one, alg[name])

    def matrix(action) -> np.ndarray:
        out = np.zeros((2, 2), dtype=int)
        for col, b in enumerate(basis):
            image = action(b)
            for row, target in enumerate(basis):
                c = image.terms.get(next(iter(target.terms)), _ZERO)
                if c.im:
                    raise AssertionError("unexpected complex coefficient")
                out[row, col] = int(c.re)
        return out

    mul = matrix(lambda e: alg[name] * e)
    der = matrix(lambda e: g_derivative(e, name, "left"))
    return ThetaRepresentation(
        multiply=mul,
        derivative=der,
        anticommutator=mul @ der + der @ mul,
        multiply_squared=mul @ mul,
        derivative_squared=der @ der,
    )


# -- plain-text expressions ---------------------------------------------------


class ExpressionError(ValueError):
    pass


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[()+*,\-/]))"
)


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExpressionError(f"unexpected character at position {pos}: {text[pos:pos + 10]!r}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str, generators: Sequence[str] | None):
        self.tokens = _tokenize(text)
        self.pos = 0
        if generators is None:
            seen: list[str] = []
            for kind, val in self.tokens:
                if kind == "name" and val not in seen:
                    seen.append(val)
            generators = seen
        self.generators = tuple(generators)

    def peek(self, offset: int = 0):
        k = self.pos + offset
        return self.tokens[k] if k < len(self.tokens) else (None, None)

    def take(self, value: str | None = None):
        tok = self.peek()
        if tok[0] is None or (value is not None and tok[1] != value):
            raise ExpressionError(f"expected {value or 'token'} at token {self.pos}, got {tok[1]!r}")
        self.pos += 1
        return tok

    def parse(self) -> GrassmannElement:
        out = self.expr()
        if self.pos != len(self.tokens):
            raise ExpressionError(f"trailing input at token {self.pos}: {self.peek()[1]!r}")
        return out

    def expr(self) -> GrassmannElement:
        out = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self) -> GrassmannElement:
        out = self.factor()
        while self.peek()[1] == "*":
            self.take("*")
            out = out * self.factor()
        return out

    def signed_number(self) -> Fraction:
        sign = 1
        if self.peek()[1] == "-":
            self.take("-")
            sign = -1
        kind, val = self.take()
        if kind != "num":
            raise ExpressionError(f"expected a number, got {val!r}")
        value = Fraction(val)
        if self.peek()[1] == "/":
            self.take("/")
            kind, den = self.take()
            if kind != "num":
                raise ExpressionError(f"expected a denominator, got {den!r}")
            value /= Fraction(den)
        return sign * value

    def is_literal(self) -> bool:
        k = 1
        if self.peek(k)[1] == "-":
            k += 1
        if self.peek(k)[0] != "num":
            return False
        k += 1
        if self.peek(k)[1] == "/":
            k += 2
        return self.peek(k)[1] == ","

    def factor(self) -> GrassmannElement:
        kind, val = self.peek()
        if val == "-":
            self.take("-")
            return -self.factor()
        if kind == "num":
            return GrassmannElement.scalar(self.generators, self.signed_number())
        if kind == "name":
            self.take()
            if val not in self.generators:
                raise ExpressionError(f"unknown generator {val!r}")
            return GrassmannElement.generator(self.generators, val)
        if val == "(":
            if self.is_literal():
                self.take("(")
                re_part = self.signed_number()
                self.take(",")
                im_part = self.signed_number()
                self.take(")")
                return GrassmannElement.scalar(self.generators, ExactComplex(re_part, im_part))
            self.take("(")
            inner = self.expr()
            self.take(")")
            return inner
        raise ExpressionError(f"unexpected token {val!r}")


def parse_expression(text: str, generators: Sequence[str] | None = None) -> GrassmannElement:
    """Parse ``+``/``-``/``*`` expressions over generator identifiers.

    Complex literals are written ``(re,im)``; parentheses without a comma
    group.  When ``generators`` is omitted the universe is the identifiers
    in order of first appearance.

    >>> str(parse_expression("(0,1)*a*b + b*a", ["a", "b"]))
    '(-1,1)*a*b'
    """
    return _Parser(text, generators).parse()
