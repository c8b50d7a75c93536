"""Single-mode bosonic and fermionic spaces and their multimode lifts.

Bosonic modes are truncated to ``cutoff`` levels ``|0>, ..., |cutoff-1>``;
the creation operator annihilates the top level, so canonical relations
hold only on levels ``0..cutoff-2``.  Fermionic modes use the ordered basis
``(|0>, |1>)`` with ``f|0> = 0`` and ``f|1> = |0>``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .opcore import (
    DomainError,
    Operator,
    ShapeError,
    identity,
    tensor_product,
)

__all__ = [
    "ModeSpace",
    "ModeOperators",
    "boson_mode",
    "fermion_mode",
    "mode_operators",
    "lift",
    "hamiltonian",
    "pauli",
    "relabel_fermion",
    "basis_index",
    "basis_occupations",
    "basis_state",
    "iter_basis",
    "decompose",
    "apply_to_basis",
]


@dataclass(frozen=True)
class ModeSpace:
    """One oscillator mode: ``kind`` is ``'boson'`` or ``'fermion'``."""

    kind: str
    omega: float = 1.0
    cutoff: int = 2

    def __post_init__(self):
        if self.kind not in ("boson", "fermion"):
            raise DomainError(f"mode kind must be 'boson' or 'fermion', got {self.kind!r}")
        if not self.omega > 0:
            raise DomainError(f"omega must be positive, got {self.omega}")
        if self.kind == "fermion" and self.cutoff != 2:
            raise DomainError("a fermionic mode has exactly 2 levels")
        if self.kind == "boson" and self.cutoff < 2:
            raise DomainError(f"boson cutoff must be >= 2, got {self.cutoff}")

    @classmethod
    def boson(cls, omega: float = 1.0, cutoff: int = 16) -> "ModeSpace":
        return cls("boson", float(omega), int(cutoff))

    @classmethod
    def fermion(cls, omega: float = 1.0) -> "ModeSpace":
        return cls("fermion", float(omega), 2)

    @property
    def dim(self) -> int:
        return self.cutoff


@dataclass(frozen=True)
class ModeOperators:
    annihilation: Operator
    creation: Operator
    number: Operator

    @property
    def dim(self) -> int:
        return self.number.dim


def boson_mode(cutoff: int = 16, omega: float = 1.0) -> ModeOperators:
    """Truncated bosonic ladder operators on ``cutoff`` levels.

    ``a`` has ``sqrt(n)`` on the superdiagonal (``a|n> = sqrt(n)|n-1>``),
    ``a^dag`` is its exact conjugate transpose and ``N = a^dag a``.
    ``omega`` is validated but does not enter the matrices.
    """
    ModeSpace.boson(omega, cutoff)
    a = np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), k=1).astype(np.complex128)
    lower = Operator(a, (cutoff,))
    raise_ = lower.dag()
    return ModeOperators(lower, raise_, raise_ @ lower)


def fermion_mode(omega: float = 1.0) -> ModeOperators:
    """Fermionic ladder operators on ``(|0>, |1>)``: ``f = [[0, 1], [0, 0]]``."""
    ModeSpace.fermion(omega)
    lower = Operator(np.array([[0, 1], [0, 0]], dtype=np.complex128), (2,))
    raise_ = lower.dag()
    return ModeOperators(lower, raise_, raise_ @ lower)


def mode_operators(mode: ModeSpace) -> ModeOperators:
    if mode.kind == "boson":
        return boson_mode(mode.cutoff, mode.omega)
    return fermion_mode(mode.omega)


def pauli() -> tuple[Operator, Operator, Operator]:
    s1 = Operator(np.array([[0, 1], [1, 0]], dtype=np.complex128))
    s2 = Operator(np.array([[0, -1j], [1j, 0]], dtype=np.complex128))
    s3 = Operator(np.array([[1, 0], [0, -1]], dtype=np.complex128))
    return s1, s2, s3


def relabel_fermion(op: Operator) -> Operator:
    """Conjugate a single-fermion operator by the swap ``|0> <-> |1>``.

    The Pauli realization ``f = (s1 - i s2)/2`` is written
    on a basis whose first vector is the occupied state; this swap maps it
    onto the ``f|0> = 0`` convention used throughout the package.
    """
    if op.dim != 2:
        raise ShapeError("relabeling applies to 2-dimensional operators")
    swap, _, _ = pauli()
    return Operator((swap @ op @ swap).entries, op.layout)


def lift(op: Operator, position: int, layout: Sequence[int]) -> Operator:
    """Embed ``op`` at ``position`` of a multimode ``layout``, identities elsewhere."""
    layout = tuple(int(d) for d in layout)
    if not 0 <= position < len(layout):
        raise DomainError(f"position {position} out of range for layout {list(layout)}")
    if op.dim != layout[position]:
        raise ShapeError(
            f"operator dim {op.dim} does not match layout[{position}] = {layout[position]}"
        )
    out = None
    for k, d in enumerate(layout):
        factor = Operator(op.entries, (d,)) if k == position else identity(d, (d,))
        out = factor if out is None else tensor_product(out, factor)
    return out


def hamiltonian(mode: ModeSpace, hbar: float = 1.0) -> Operator:
    """``hbar omega (N + 1/2)`` for a boson, ``hbar omega (N - 1/2)`` for a fermion."""
    ops = mode_operators(mode)
    shift = 0.5 if mode.kind == "boson" else -0.5
    return hbar * mode.omega * (ops.number + shift)


def basis_index(occupations: Sequence[int], layout: Sequence[int]) -> int:
    if len(occupations) != len(layout):
        raise ShapeError("occupation list and layout differ in length")
    idx = 0
    for n, d in zip(occupations, layout):
        if not 0 <= n < d:
            raise DomainError(f"occupation {n} outside 0..{d - 1}")
        idx = idx * d + int(n)
    return idx


def basis_occupations(index: int, layout: Sequence[int]) -> tuple[int, ...]:
    return tuple(int(k) for k in np.unravel_index(index, tuple(layout)))


def iter_basis(layout: Sequence[int]) -> Iterator[tuple[int, ...]]:
    return itertools.product(*(range(d) for d in layout))


def basis_state(occupations: Sequence[int], layout: Sequence[int]) -> np.ndarray:
    vec = np.zeros(math.prod(layout), dtype=np.complex128)
    vec[basis_index(occupations, layout)] = 1.0
    return vec


def decompose(
    vector: np.ndarray, layout: Sequence[int], atol: float = 1e-12
) -> dict[tuple[int, ...], complex]:
    """Nonzero amplitudes of ``vector`` keyed by occupation tuple."""
    return {
        basis_occupations(i, layout): complex(c)
        for i, c in enumerate(np.asarray(vector))
        if abs(c) > atol
    }


def apply_to_basis(
    op: Operator, occupations: Sequence[int], layout: Sequence[int] | None = None
) -> dict[tuple[int, ...], complex]:
    layout = tuple(layout) if layout is not None else op.factors
    return decompose(op @ basis_state(occupations, layout), layout)
