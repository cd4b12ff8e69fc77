"""Graded differential forms on T^d with algebra-valued Fourier coefficients.

A :class:`GradedForm` maps strictly increasing multi-indices
I subset {0, ..., d-1} to finitely supported frequency dictionaries
``{k in Z^d: block}`` where the block is a bundle matrix over a traced
*-algebra backend.  The component for I is the coefficient of
dx_I = dx_{i_1} ^ ... ^ dx_{i_p}.

All values are immutable after construction and every operation is a pure
function; exterior derivative, wedge product and involution are exact at the
coefficient level (floating point rounding aside).
"""

from __future__ import annotations

import itertools
import math
from typing import Any, Iterable, Mapping

import numpy as np

from .algebras import SCALARS, MatrixBackend, resolve_tensor, direct_sum_block
from .conventions import COEFF_DROP
from .errors import ContractError, StructureError
from .fourier import _check_cap

Freq = tuple[int, ...]
MultiIndex = tuple[int, ...]
Block = Any

_TWO_PI_I = 2j * math.pi


def merge_sign(left: MultiIndex, right: MultiIndex) -> int:
    """Parity of interleaving two disjoint increasing multi-indices."""
    inversions = sum(1 for i in left for j in right if j < i)
    return -1 if inversions % 2 else 1


def insert_sign(j: int, index: MultiIndex) -> int:
    """Sign of dx_j ^ dx_I relative to dx_{I union {j}}."""
    before = sum(1 for i in index if i < j)
    return -1 if before % 2 else 1


def cycle_label(index: MultiIndex) -> str:
    """1-based human-readable label for a coordinate cycle."""
    if not index:
        return "pt"
    return "[" + ",".join(str(i + 1) for i in index) + "]"


class GradedForm:
    """Algebra-valued differential form on the flat torus T^d."""

    __slots__ = ("dim", "shape", "algebra", "parts")

    def __init__(self, dim, shape, algebra, parts, _canonical=False):
        if dim < 1:
            raise StructureError(f"dimension must be positive, got {dim}")
        shape = (int(shape[0]), int(shape[1]))
        if _canonical:
            clean = parts
        else:
            clean = {}
            for index, comp in parts.items():
                index = tuple(index)
                if any(b <= a for a, b in zip(index, index[1:])):
                    raise StructureError(f"multi-index {index} is not strictly increasing")
                if index and (index[0] < 0 or index[-1] >= dim):
                    raise StructureError(f"multi-index {index} out of range for T^{dim}")
                kept = {}
                for k, block in comp.items():
                    k = tuple(int(x) for x in k)
                    if len(k) != dim:
                        raise StructureError(f"frequency {k} does not have dimension {dim}")
                    if algebra.block_shape(block) != shape:
                        raise StructureError(
                            f"block shape {algebra.block_shape(block)} != form shape {shape}"
                        )
                    if not algebra.is_zero(block, COEFF_DROP):
                        kept[k] = block
                if kept:
                    clean[index] = kept
        _check_cap(sum(len(c) for c in clean.values()))
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "algebra", algebra)
        object.__setattr__(self, "parts", clean)

    def __setattr__(self, name, value):
        raise AttributeError("GradedForm is immutable")

    # -- constructors --------------------------------------------------------

    @staticmethod
    def zero(dim: int, shape: tuple[int, int], algebra) -> "GradedForm":
        return GradedForm(dim, shape, algebra, {}, _canonical=True)

    @staticmethod
    def constant(dim: int, block, algebra) -> "GradedForm":
        shape = algebra.block_shape(block)
        return GradedForm(dim, shape, algebra, {(): {(0,) * dim: block}})

    @staticmethod
    def monomial(dim: int, index: Iterable[int], freq: Iterable[int], block, algebra) -> "GradedForm":
        shape = algebra.block_shape(block)
        return GradedForm(dim, shape, algebra, {tuple(index): {tuple(freq): block}})

    @staticmethod
    def identity(dim: int, rank: int, algebra) -> "GradedForm":
        return GradedForm.constant(dim, algebra.eye_block(rank), algebra)

    # -- structure -------------------------------------------------------------

    def _require_compatible(self, other: "GradedForm") -> None:
        if self.dim != other.dim:
            raise StructureError(f"dimension mismatch: {self.dim} vs {other.dim}")
        if self.algebra != other.algebra:
            raise StructureError(f"coefficient algebra mismatch: {self.algebra!r} vs {other.algebra!r}")

    def degrees(self) -> tuple[int, ...]:
        return tuple(sorted({len(i) for i in self.parts}))

    def component(self, index: Iterable[int]) -> Mapping[Freq, Block]:
        return dict(self.parts.get(tuple(index), {}))

    def homogeneous(self, degree: int) -> "GradedForm":
        parts = {i: dict(c) for i, c in self.parts.items() if len(i) == degree}
        return GradedForm(self.dim, self.shape, self.algebra, parts, _canonical=True)

    def degree_flip(self) -> "GradedForm":
        """Multiply each homogeneous component of degree p by (-1)^p."""
        alg = self.algebra
        parts = {}
        for index, comp in self.parts.items():
            if len(index) % 2:
                parts[index] = {k: alg.scale(-1.0, b) for k, b in comp.items()}
            else:
                parts[index] = dict(comp)
        return GradedForm(self.dim, self.shape, self.algebra, parts, _canonical=True)

    # -- linear operations -------------------------------------------------------

    def __add__(self, other: "GradedForm") -> "GradedForm":
        if not isinstance(other, GradedForm):
            return NotImplemented
        self._require_compatible(other)
        if self.shape != other.shape:
            raise StructureError(f"shape mismatch: {self.shape} vs {other.shape}")
        alg = self.algebra
        parts = {i: dict(c) for i, c in self.parts.items()}
        for index, comp in other.parts.items():
            dest = parts.setdefault(index, {})
            for k, block in comp.items():
                dest[k] = alg.add(dest[k], block) if k in dest else block
        return GradedForm(self.dim, self.shape, self.algebra, parts)

    def __sub__(self, other: "GradedForm") -> "GradedForm":
        return self + (-other)

    def __neg__(self) -> "GradedForm":
        return self * (-1.0)

    def __mul__(self, z) -> "GradedForm":
        z = complex(z)
        alg = self.algebra
        parts = {
            i: {k: alg.scale(z, b) for k, b in comp.items()}
            for i, comp in self.parts.items()
        }
        return GradedForm(self.dim, self.shape, self.algebra, parts)

    __rmul__ = __mul__

    # -- multiplicative structure ---------------------------------------------------

    def wedge(self, other: "GradedForm") -> "GradedForm":
        """Wedge product; noncommutative coefficients multiply in written order."""
        self._require_compatible(other)
        if self.shape[1] != other.shape[0]:
            raise StructureError(f"shapes {self.shape} and {other.shape} do not compose")
        alg = self.algebra
        out: dict[MultiIndex, dict[Freq, Block]] = {}
        for index_a, comp_a in self.parts.items():
            set_a = set(index_a)
            for index_b, comp_b in other.parts.items():
                if set_a & set(index_b):
                    continue
                index = tuple(sorted(index_a + index_b))
                sign = merge_sign(index_a, index_b)
                dest = out.setdefault(index, {})
                for ka, block_a in comp_a.items():
                    for kb, block_b in comp_b.items():
                        k = tuple(a + b for a, b in zip(ka, kb))
                        prod = alg.mul(block_a, block_b)
                        if sign < 0:
                            prod = alg.scale(-1.0, prod)
                        dest[k] = alg.add(dest[k], prod) if k in dest else prod
        shape = (self.shape[0], other.shape[1])
        return GradedForm(self.dim, shape, self.algebra, out)

    def star(self) -> "GradedForm":
        """Involution: conjugate-transpose blocks, negate frequencies."""
        alg = self.algebra
        parts: dict[MultiIndex, dict[Freq, Block]] = {}
        for index, comp in self.parts.items():
            parts[index] = {
                tuple(-x for x in k): alg.star(block) for k, block in comp.items()
            }
        return GradedForm(self.dim, (self.shape[1], self.shape[0]), self.algebra, parts, _canonical=True)

    # -- calculus ----------------------------------------------------------------

    def exterior_derivative(self, twists: tuple[int, ...] = ()) -> "GradedForm":
        """d acting by 2 pi i k_j dx_j ^ (.), plus the twist derivation on the
        listed directions for holonomy-twisted frames."""
        alg = self.algebra
        out: dict[MultiIndex, dict[Freq, Block]] = {}

        def accumulate(index, k, block):
            dest = out.setdefault(index, {})
            dest[k] = alg.add(dest[k], block) if k in dest else block

        for index, comp in self.parts.items():
            free = [j for j in range(self.dim) if j not in index]
            for k, block in comp.items():
                for j in free:
                    coeff = _TWO_PI_I * k[j]
                    sign = insert_sign(j, index)
                    new_index = tuple(sorted(index + (j,)))
                    if k[j] != 0:
                        accumulate(new_index, k, alg.scale(sign * coeff, block))
                    if j in twists:
                        twisted = alg.twist_block(block)
                        if not alg.is_zero(twisted, 0.0):
                            if sign < 0:
                                twisted = alg.scale(-1.0, twisted)
                            accumulate(new_index, k, twisted)
        return GradedForm(self.dim, self.shape, self.algebra, out)

    d = exterior_derivative

    # -- trace and pairings ----------------------------------------------------------

    def trace(self) -> "GradedForm":
        """Apply the algebra trace over the bundle diagonal; scalar-valued output."""
        if self.shape[0] != self.shape[1]:
            raise StructureError(f"trace requires a square shape, got {self.shape}")
        alg = self.algebra
        parts: dict[MultiIndex, dict[Freq, Block]] = {}
        for index, comp in self.parts.items():
            dest = {}
            for k, block in comp.items():
                dest[k] = np.array([[alg.trace(block)]], dtype=complex)
            parts[index] = dest
        return GradedForm(self.dim, (1, 1), SCALARS, parts)

    def pair_with_cycle(self, index: Iterable[int]) -> complex:
        """Integrate the matching homogeneous component over the coordinate
        subtorus T^index (coordinates outside ``index`` restricted to zero)."""
        if not (isinstance(self.algebra, MatrixBackend) and self.algebra.is_scalar and self.shape == (1, 1)):
            raise ContractError("cycle pairing requires a scalar-valued form; apply trace() first")
        index = tuple(sorted(index))
        comp = self.parts.get(index, {})
        total = 0.0 + 0.0j
        for k, block in comp.items():
            if all(k[i] == 0 for i in index):
                total += complex(block[0, 0])
        return total

    def cycle_pairings(self, parity: str) -> dict[MultiIndex, complex]:
        """Pairings with every coordinate cycle of the given parity ("odd"/"even")."""
        want = 1 if parity == "odd" else 0
        out = {}
        for p in range(self.dim + 1):
            if p % 2 != want:
                continue
            for index in itertools.combinations(range(self.dim), p):
                out[index] = self.pair_with_cycle(index)
        return out

    # -- inspection ----------------------------------------------------------------

    def norm(self) -> float:
        alg = self.algebra
        return max(
            (alg.norm(b) for comp in self.parts.values() for b in comp.values()),
            default=0.0,
        )

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.norm() <= tol

    def support_size(self) -> int:
        return sum(len(c) for c in self.parts.values())

    def __repr__(self) -> str:
        degs = ",".join(str(p) for p in self.degrees()) or "-"
        return (
            f"GradedForm(T^{self.dim}, shape={self.shape}, degrees=[{degs}], "
            f"support={self.support_size()}, algebra={self.algebra!r})"
        )


# -- convenience builders ------------------------------------------------------------


def dx(dim: int, j: int) -> GradedForm:
    """The scalar coordinate 1-form dx_j (0-based axis)."""
    return GradedForm.monomial(dim, (j,), (0,) * dim, np.array([[1.0 + 0.0j]]), SCALARS)


def scalar_monomial(dim: int, index: Iterable[int], freq: Iterable[int], coeff: complex = 1.0) -> GradedForm:
    return GradedForm.monomial(dim, tuple(index), tuple(freq), np.array([[complex(coeff)]]), SCALARS)


def constant_one_form(dim: int, blocks: list, algebra) -> GradedForm:
    """sum_j X_j dx_j with constant blocks X_j (len(blocks) == dim)."""
    if len(blocks) != dim:
        raise StructureError(f"need {dim} blocks, got {len(blocks)}")
    shape = algebra.block_shape(blocks[0])
    parts = {}
    zero_freq = (0,) * dim
    for j, block in enumerate(blocks):
        if not algebra.is_zero(block, 0.0):
            parts[(j,)] = {zero_freq: block}
    return GradedForm(dim, shape, algebra, parts)


def tensor_form(a: GradedForm, b: GradedForm) -> GradedForm:
    """Wedge-tensor of forms over tensored coefficient algebras."""
    if a.dim != b.dim:
        raise StructureError(f"dimension mismatch: {a.dim} vs {b.dim}")
    algebra, kron = resolve_tensor(a.algebra, b.algebra)
    shape = (a.shape[0] * b.shape[0], a.shape[1] * b.shape[1])
    out: dict[MultiIndex, dict[Freq, Block]] = {}
    for index_a, comp_a in a.parts.items():
        set_a = set(index_a)
        for index_b, comp_b in b.parts.items():
            if set_a & set(index_b):
                continue
            index = tuple(sorted(index_a + index_b))
            sign = merge_sign(index_a, index_b)
            dest = out.setdefault(index, {})
            for ka, block_a in comp_a.items():
                for kb, block_b in comp_b.items():
                    k = tuple(x + y for x, y in zip(ka, kb))
                    prod = kron(block_a, block_b)
                    if sign < 0:
                        prod = algebra.scale(-1.0, prod)
                    dest[k] = algebra.add(dest[k], prod) if k in dest else prod
    return GradedForm(a.dim, shape, algebra, out)


def direct_sum_form(a: GradedForm, b: GradedForm) -> GradedForm:
    """Block-diagonal direct sum over a shared coefficient algebra."""
    a._require_compatible(b)
    alg = a.algebra
    shape = (a.shape[0] + b.shape[0], a.shape[1] + b.shape[1])
    zero_a = alg.zero_block(*a.shape)
    zero_b = alg.zero_block(*b.shape)
    out: dict[MultiIndex, dict[Freq, Block]] = {}
    indices = set(a.parts) | set(b.parts)
    for index in indices:
        comp_a = a.parts.get(index, {})
        comp_b = b.parts.get(index, {})
        dest = {}
        for k in set(comp_a) | set(comp_b):
            dest[k] = direct_sum_block(alg, comp_a.get(k, zero_a), comp_b.get(k, zero_b))
        out[index] = dest
    return GradedForm(a.dim, shape, alg, out)
