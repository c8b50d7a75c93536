"""Dense complex operator algebra on small, exactly-dimensioned spaces.

Every operator in the package is an :class:`Operator`: an immutable
``dim x dim`` complex matrix tagged with the dimensions of the modes it
acts on.  Tolerances are relative to the max-norm of the input so results
do not depend on the unit system chosen for hbar or omega.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "MAX_DIM",
    "DomainError",
    "ShapeError",
    "SizeError",
    "Operator",
    "EigenSystem",
    "as_operator",
    "identity",
    "tensor_product",
    "bracket",
    "hermitian_eigensystem",
    "spectral_function",
    "trace_exp",
    "log_trace_exp",
    "max_norm",
]

MAX_DIM = 4096
HERMITIAN_RTOL = 1e-10
KERNEL_ATOL = 1e-12


class DomainError(ValueError):
    """Input lies outside the mathematical domain of an operation."""


class ShapeError(ValueError):
    """Operand dimensions are incompatible."""


class SizeError(ValueError):
    """Requested space exceeds the configured dimension limit."""


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=np.complex128, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Operator:
    """Square complex matrix with a mode layout.

    ``layout`` lists the dimension of each tensor factor, in order.  An
    empty layout marks a raw matrix with no factor structure.
    """

    entries: np.ndarray
    layout: tuple[int, ...] = ()

    def __post_init__(self):
        arr = np.asarray(self.entries)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ShapeError(f"operator entries must be square, got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise ShapeError("operator dimension must be at least 1")
        layout = tuple(int(d) for d in self.layout)
        if layout and math.prod(layout) != arr.shape[0]:
            raise ShapeError(f"layout {layout} does not multiply to dim {arr.shape[0]}")
        if any(d < 1 for d in layout):
            raise ShapeError(f"layout entries must be positive, got {layout}")
        object.__setattr__(self, "entries", _frozen(arr))
        object.__setattr__(self, "layout", layout)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def factors(self) -> tuple[int, ...]:
        """Layout, with a raw matrix treated as a single factor."""
        return self.layout or (self.dim,)

    def dag(self) -> "Operator":
        return Operator(self.entries.conj().T, self.layout)

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.entries)))

    def is_hermitian(self, rtol: float = HERMITIAN_RTOL) -> bool:
        scale = self.max_norm()
        return float(np.max(np.abs(self.entries - self.entries.conj().T))) <= rtol * scale

    def _other(self, other) -> np.ndarray:
        if isinstance(other, Operator):
            if other.dim != self.dim:
                raise ShapeError(f"dimension mismatch: {self.dim} vs {other.dim}")
            return other.entries
        raise TypeError(f"unsupported operand {type(other).__name__}")

    def _layout_with(self, other: "Operator") -> tuple[int, ...]:
        return self.layout or other.layout

    def __matmul__(self, other):
        if isinstance(other, np.ndarray) and other.ndim == 1:
            return self.entries @ other
        return Operator(self.entries @ self._other(other), self._layout_with(other))

    def __add__(self, other):
        if isinstance(other, Operator):
            return Operator(self.entries + self._other(other), self._layout_with(other))
        if np.isscalar(other):
            return Operator(self.entries + other * np.eye(self.dim), self.layout)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Operator):
            return Operator(self.entries - self._other(other), self._layout_with(other))
        if np.isscalar(other):
            return Operator(self.entries - other * np.eye(self.dim), self.layout)
        return NotImplemented

    def __rsub__(self, other):
        if np.isscalar(other):
            return Operator(other * np.eye(self.dim) - self.entries, self.layout)
        return NotImplemented

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return Operator(self.entries * scalar, self.layout)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if np.isscalar(scalar):
            return Operator(self.entries / scalar, self.layout)
        return NotImplemented

    def __neg__(self):
        return Operator(-self.entries, self.layout)

    def __eq__(self, other):
        # exact entrywise equality; layouts are metadata
        if not isinstance(other, Operator):
            return NotImplemented
        return self.dim == other.dim and bool(np.array_equal(self.entries, other.entries))

    __hash__ = None

    def __repr__(self):
        return f"Operator(dim={self.dim}, layout={list(self.layout)})"


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Ascending real eigenvalues and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)

    def __iter__(self):
        yield self.eigenvalues
        yield self.eigenvectors


def as_operator(value, layout: Sequence[int] = ()) -> Operator:
    if isinstance(value, Operator):
        return value
    return Operator(np.asarray(value, dtype=np.complex128), tuple(layout))


def identity(dim: int, layout: Sequence[int] = ()) -> Operator:
    return Operator(np.eye(dim, dtype=np.complex128), tuple(layout))


def max_norm(value) -> float:
    arr = value.entries if isinstance(value, Operator) else np.asarray(value)
    if arr.size == 0:
        return 0.0
    return float(np.max(np.abs(arr)))


def tensor_product(a: Operator, b: Operator, *, max_dim: int = MAX_DIM) -> Operator:
    """Kronecker product ``a (x) b`` with concatenated layouts.

    Entry ``(i*dim_b + k, j*dim_b + l)`` of the result is ``a[i, j] * b[k, l]``.
    """
    a, b = as_operator(a), as_operator(b)
    dim = a.dim * b.dim
    if dim > max_dim:
        raise SizeError(f"tensor product dimension {dim} exceeds maximum {max_dim}")
    return Operator(np.kron(a.entries, b.entries), a.factors + b.factors)


def bracket(a: Operator, b: Operator, kind: str = "commutator") -> Operator:
    """``ab - ba`` for ``kind='commutator'``, ``ab + ba`` for ``'anticommutator'``."""
    a, b = as_operator(a), as_operator(b)
    if a.dim != b.dim:
        raise ShapeError(f"dimension mismatch: {a.dim} vs {b.dim}")
    ab = a.entries @ b.entries
    ba = b.entries @ a.entries
    if kind == "commutator":
        out = ab - ba
    elif kind == "anticommutator":
        out = ab + ba
    else:
        raise DomainError(f"unknown bracket kind {kind!r}")
    return Operator(out, a.layout or b.layout)


def _require_hermitian(a: Operator) -> None:
    if not a.is_hermitian():
        dev = max_norm(a.entries - a.entries.conj().T)
        raise DomainError(f"operator is not Hermitian (max |A - A^dag| = {dev:.3e})")


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    out = vectors.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        cutoff = 1e-12 * np.max(np.abs(col))
        lead = np.flatnonzero(np.abs(col) > cutoff)[0]
        phase = col[lead] / abs(col[lead])
        out[:, k] = col / phase
        out[lead, k] = abs(col[lead])
    return out


def hermitian_eigensystem(a: Operator) -> EigenSystem:
    """Eigen-decomposition of a Hermitian operator.

    Eigenvalues come back ascending.  Each eigenvector is rotated so that
    its first non-negligible component is real and positive, which makes
    the output reproducible between runs.

    Raises
    ------
    DomainError
        If ``a`` deviates from Hermiticity by more than ``1e-10`` relative
        to its max-norm.
    """
    a = as_operator(a)
    _require_hermitian(a)
    sym = 0.5 * (a.entries + a.entries.conj().T)
    values, vectors = np.linalg.eigh(sym)
    values = np.array(values, dtype=float)
    vectors = _fix_phases(vectors)
    values.setflags(write=False)
    vectors.setflags(write=False)
    return EigenSystem(values, vectors)


def spectral_function(
    a: Operator,
    f: Callable[[float], float],
    kernel_value: float | None = 0.0,
) -> Operator:
    """Apply a real function to a Hermitian operator through its spectrum.

    Eigenvalues with ``|lambda| <= 1e-12`` are sent to ``kernel_value``
    instead of ``f(lambda)``; with the default of 0 this is the
    pseudoinverse rule needed for negative powers of a number operator.
    Pass ``kernel_value=None`` to evaluate ``f`` on the kernel as well.
    """
    a = as_operator(a)
    values, vectors = hermitian_eigensystem(a)
    mapped = np.empty_like(values)
    for k, lam in enumerate(values):
        if kernel_value is not None and abs(lam) <= KERNEL_ATOL:
            mapped[k] = kernel_value
            continue
        try:
            with np.errstate(all="ignore"):
                val = f(float(lam))
        except (ZeroDivisionError, OverflowError, ValueError) as exc:
            raise DomainError(f"function is undefined at eigenvalue {lam!r}: {exc}") from None
        if np.iscomplexobj(val) or not np.isfinite(val):
            raise DomainError(f"function is not finite and real at eigenvalue {lam!r}")
        mapped[k] = val
    out = (vectors * mapped) @ vectors.conj().T
    return Operator(out, a.layout)


def trace_exp(h: Operator, beta: float) -> float:
    """``Tr exp(-beta h)`` for Hermitian ``h``."""
    if beta < 0:
        raise DomainError(f"beta must be non-negative, got {beta}")
    values = hermitian_eigensystem(h).eigenvalues
    with np.errstate(over="ignore"):
        return float(np.sum(np.exp(-beta * values)))


def log_trace_exp(h: Operator, beta: float) -> float:
    """``ln Tr exp(-beta h)`` evaluated without overflow."""
    if beta < 0:
        raise DomainError(f"beta must be non-negative, got {beta}")
    values = hermitian_eigensystem(h).eigenvalues
    shifted = -beta * values
    top = float(np.max(shifted))
    return top + math.log(float(np.sum(np.exp(shifted - top))))
