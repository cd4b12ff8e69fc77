"""Traced *-algebra backends.

A backend owns the coefficient blocks that graded forms carry: for a
rank-(r, c) bundle matrix over the backend, the block is

* a dense complex ``(r*n, c*n)`` array for :class:`MatrixBackend` (the n x n
  algebra entries are inlined, so block products are single matmuls), or
* a nested tuple of backend elements for :class:`ObjectBackend` subclasses
  (crossed products, free products, Haar polynomials).

Every backend provides a normalized trace with tau(1) = 1, tau(ab) = tau(ba)
and tau(a*) = conj(tau(a)); the block-level ``trace`` sums the algebra trace
over the bundle diagonal, so the trace of the rank-m identity block is m.
"""

from __future__ import annotations

from typing import Any

import numpy as np

from .conventions import COEFF_DROP
from .errors import StructureError

Block = Any


class MatrixBackend:
    """M_n(C) with the normalized trace tr/n."""

    def __init__(self, n: int):
        if n < 1:
            raise StructureError(f"matrix size must be positive, got {n}")
        self.n = int(n)

    # backends compare structurally so forms over two MatrixBackend(2)
    # instances are compatible
    def __eq__(self, other):
        return isinstance(other, MatrixBackend) and other.n == self.n

    def __hash__(self):
        return hash(("MatrixBackend", self.n))

    def __repr__(self):
        return f"MatrixBackend({self.n})"

    @property
    def is_scalar(self) -> bool:
        return self.n == 1

    # -- block API -----------------------------------------------------------

    def zero_block(self, rows: int, cols: int) -> Block:
        return np.zeros((rows * self.n, cols * self.n), dtype=complex)

    def eye_block(self, m: int) -> Block:
        return np.eye(m * self.n, dtype=complex)

    def block_shape(self, a: Block) -> tuple[int, int]:
        r, c = a.shape
        if r % self.n or c % self.n:
            raise StructureError(f"array shape {a.shape} is not a multiple of n={self.n}")
        return r // self.n, c // self.n

    def as_block(self, a) -> Block:
        arr = np.asarray(a, dtype=complex)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        self.block_shape(arr)
        return arr

    def add(self, a: Block, b: Block) -> Block:
        return a + b

    def scale(self, z: complex, a: Block) -> Block:
        return z * a

    def mul(self, a: Block, b: Block) -> Block:
        return a @ b

    def star(self, a: Block) -> Block:
        return a.conj().T

    def trace(self, a: Block) -> complex:
        r, c = self.block_shape(a)
        if r != c:
            raise StructureError("trace requires a square block")
        return complex(np.trace(a)) / self.n

    def norm(self, a: Block) -> float:
        return float(np.abs(a).max()) if a.size else 0.0

    def is_zero(self, a: Block, tol: float = COEFF_DROP) -> bool:
        return self.norm(a) <= tol

    twist_block = None  # no holonomy twist on plain matrix algebras


#: the complex scalars, used for all trace-valued forms
SCALARS = MatrixBackend(1)


class ObjectBackend:
    """Matrix blocks as nested tuples over element-level algebra operations.

    Subclasses implement ``el_zero``, ``el_one``, ``el_add``, ``el_scale``,
    ``el_mul``, ``el_star``, ``el_trace``, ``el_norm`` and optionally
    ``el_twist`` (the weight derivation used by twisted frames).
    """

    is_scalar = False
    el_twist = None

    # -- element API (overridden) ---------------------------------------------

    def el_zero(self):
        raise NotImplementedError

    def el_one(self):
        raise NotImplementedError

    def el_add(self, a, b):
        raise NotImplementedError

    def el_scale(self, z, a):
        raise NotImplementedError

    def el_mul(self, a, b):
        raise NotImplementedError

    def el_star(self, a):
        raise NotImplementedError

    def el_trace(self, a) -> complex:
        raise NotImplementedError

    def el_norm(self, a) -> float:
        raise NotImplementedError

    # -- block API -------------------------------------------------------------

    def zero_block(self, rows: int, cols: int) -> Block:
        z = self.el_zero()
        return tuple(tuple(z for _ in range(cols)) for _ in range(rows))

    def eye_block(self, m: int) -> Block:
        one, zero = self.el_one(), self.el_zero()
        return tuple(
            tuple(one if i == j else zero for j in range(m)) for i in range(m)
        )

    def block_from_entries(self, rows) -> Block:
        return tuple(tuple(row) for row in rows)

    def block_shape(self, a: Block) -> tuple[int, int]:
        return len(a), (len(a[0]) if a else 0)

    def add(self, a: Block, b: Block) -> Block:
        return tuple(
            tuple(self.el_add(x, y) for x, y in zip(ra, rb)) for ra, rb in zip(a, b)
        )

    def scale(self, z: complex, a: Block) -> Block:
        return tuple(tuple(self.el_scale(z, x) for x in row) for row in a)

    def mul(self, a: Block, b: Block) -> Block:
        ra, inner = self.block_shape(a)
        rb, cb = self.block_shape(b)
        if inner != rb:
            raise StructureError(f"block shapes {self.block_shape(a)} and {self.block_shape(b)} do not compose")
        out = []
        for i in range(ra):
            row = []
            for j in range(cb):
                acc = self.el_zero()
                for l in range(inner):
                    acc = self.el_add(acc, self.el_mul(a[i][l], b[l][j]))
                row.append(acc)
            out.append(tuple(row))
        return tuple(out)

    def star(self, a: Block) -> Block:
        r, c = self.block_shape(a)
        return tuple(
            tuple(self.el_star(a[i][j]) for i in range(r)) for j in range(c)
        )

    def trace(self, a: Block) -> complex:
        r, c = self.block_shape(a)
        if r != c:
            raise StructureError("trace requires a square block")
        return sum((self.el_trace(a[i][i]) for i in range(r)), 0.0 + 0.0j)

    def norm(self, a: Block) -> float:
        return max((self.el_norm(x) for row in a for x in row), default=0.0)

    def is_zero(self, a: Block, tol: float = COEFF_DROP) -> bool:
        return self.norm(a) <= tol

    def twist_block(self, a: Block) -> Block:
        if self.el_twist is None:
            raise StructureError(f"{self!r} has no twist derivation")
        return tuple(tuple(self.el_twist(x) for x in row) for row in a)

    def scale_block_entrywise(self, scalars: np.ndarray, a: Block) -> Block:
        """Entrywise complex rescaling (used by scalar tensor factors)."""
        return tuple(
            tuple(self.el_scale(scalars[i, j], a[i][j]) for j in range(len(a[0])))
            for i in range(len(a))
        )


# -- tensor products ------------------------------------------------------------


def resolve_tensor(alg_a, alg_b):
    """Tensor of coefficient algebras, limited to the supported cases.

    Returns ``(algebra, kron)`` where ``kron(block_a, block_b)`` produces the
    tensor block.  Supported: matrix (x) matrix, and a scalar factor on either
    side of any backend.
    """
    if isinstance(alg_a, MatrixBackend) and isinstance(alg_b, MatrixBackend):
        out = MatrixBackend(alg_a.n * alg_b.n)

        def kron(a, b):
            return np.kron(a, b)

        return out, kron

    if isinstance(alg_a, MatrixBackend) and alg_a.is_scalar:

        def kron_scalar_left(a, b):
            rb, cb = alg_b.block_shape(b)
            rows = []
            for i in range(a.shape[0]):
                for bi in range(rb):
                    row = []
                    for j in range(a.shape[1]):
                        for bj in range(cb):
                            row.append(alg_b.el_scale(a[i, j], b[bi][bj]))
                    rows.append(tuple(row))
            return tuple(rows)

        return alg_b, kron_scalar_left

    if isinstance(alg_b, MatrixBackend) and alg_b.is_scalar:

        def kron_scalar_right(a, b):
            ra, ca = alg_a.block_shape(a)
            rows = []
            for ai in range(ra):
                for i in range(b.shape[0]):
                    row = []
                    for aj in range(ca):
                        for j in range(b.shape[1]):
                            row.append(alg_a.el_scale(b[i, j], a[ai][aj]))
                    rows.append(tuple(row))
            return tuple(rows)

        return alg_a, kron_scalar_right

    raise StructureError(
        f"tensor products are supported for matrix backends or a scalar factor, got {alg_a!r} (x) {alg_b!r}"
    )


def direct_sum_block(alg, a: Block, b: Block) -> Block:
    """Block-diagonal direct sum over a shared backend."""
    if isinstance(alg, MatrixBackend):
        ra, ca = a.shape
        rb, cb = b.shape
        out = np.zeros((ra + rb, ca + cb), dtype=complex)
        out[:ra, :ca] = a
        out[ra:, ca:] = b
        return out
    ra, ca = alg.block_shape(a)
    rb, cb = alg.block_shape(b)
    zero = alg.el_zero()
    rows = []
    for i in range(ra):
        rows.append(tuple(a[i]) + tuple(zero for _ in range(cb)))
    for i in range(rb):
        rows.append(tuple(zero for _ in range(ca)) + tuple(b[i]))
    return tuple(rows)


# -- randomness helpers ----------------------------------------------------------


def haar_unitary(rng: np.random.Generator, m: int) -> np.ndarray:
    """Single Haar-distributed m x m unitary (Ginibre + phase-fixed QR)."""
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def is_unitary(a: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(np.abs(a @ a.conj().T - np.eye(a.shape[0])).max() <= tol)
