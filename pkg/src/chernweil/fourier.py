"""Trigonometric polynomials on the d-torus.

A :class:`TrigPoly` is a finitely supported map from frequency vectors
k in Z^d to complex coefficients, representing
f(x) = sum_k c_k exp(2 pi i k.x).  Products are exact coefficient
convolutions, derivatives multiply by 2 pi i k_j, and integration over the
torus extracts the zero-frequency coefficient.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable, Mapping

from .conventions import COEFF_DROP
from .errors import StructureError, SupportCapError

Freq = tuple[int, ...]

TWO_PI = 2.0 * math.pi

_support_cap = 10**6


def set_support_cap(n: int) -> None:
    """Configure the global frequency-support cap (entries per object)."""
    global _support_cap
    _support_cap = int(n)


def support_cap() -> int:
    return _support_cap


def _check_cap(n_entries: int) -> None:
    if n_entries > _support_cap:
        raise SupportCapError(
            f"frequency support of size {n_entries} exceeds cap {_support_cap}"
        )


class TrigPoly:
    """Finite Fourier sum on T^d with exact integer frequencies."""

    __slots__ = ("dim", "coeffs")

    def __init__(self, dim: int, coeffs: Mapping[Freq, complex] | None = None):
        if dim < 1:
            raise StructureError(f"dimension must be positive, got {dim}")
        clean: dict[Freq, complex] = {}
        for k, c in (coeffs or {}).items():
            if len(k) != dim:
                raise StructureError(f"frequency {k} does not have dimension {dim}")
            c = complex(c)
            if abs(c) >= COEFF_DROP:
                kk = tuple(int(x) for x in k)
                clean[kk] = clean.get(kk, 0.0) + c
        clean = {k: c for k, c in clean.items() if abs(c) >= COEFF_DROP}
        _check_cap(len(clean))
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "coeffs", clean)

    def __setattr__(self, name, value):  # values are immutable after construction
        raise AttributeError("TrigPoly is immutable")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(dim: int) -> "TrigPoly":
        return TrigPoly(dim, {})

    @staticmethod
    def one(dim: int) -> "TrigPoly":
        return TrigPoly(dim, {(0,) * dim: 1.0})

    @staticmethod
    def monomial(dim: int, k: Iterable[int], coeff: complex = 1.0) -> "TrigPoly":
        return TrigPoly(dim, {tuple(int(x) for x in k): coeff})

    # -- ring operations ---------------------------------------------------

    def _require_same(self, other: "TrigPoly") -> None:
        if self.dim != other.dim:
            raise StructureError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        if not isinstance(other, TrigPoly):
            return NotImplemented
        self._require_same(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0.0) + c
        return TrigPoly(self.dim, out)

    def __sub__(self, other: "TrigPoly") -> "TrigPoly":
        return self + (-other)

    def __neg__(self) -> "TrigPoly":
        return TrigPoly(self.dim, {k: -c for k, c in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, TrigPoly):
            self._require_same(other)
            out: dict[Freq, complex] = {}
            for k1, c1 in self.coeffs.items():
                for k2, c2 in other.coeffs.items():
                    k = tuple(a + b for a, b in zip(k1, k2))
                    out[k] = out.get(k, 0.0) + c1 * c2
            _check_cap(len(out))
            return TrigPoly(self.dim, out)
        return TrigPoly(self.dim, {k: complex(other) * c for k, c in self.coeffs.items()})

    __rmul__ = __mul__

    def conj(self) -> "TrigPoly":
        """Involution: c_k -> conj(c_{-k})."""
        return TrigPoly(
            self.dim,
            {tuple(-x for x in k): c.conjugate() for k, c in self.coeffs.items()},
        )

    # -- calculus ----------------------------------------------------------

    def derivative(self, j: int) -> "TrigPoly":
        """d/dx_j acting by 2 pi i k_j on each monomial."""
        if not 0 <= j < self.dim:
            raise StructureError(f"direction {j} out of range for dimension {self.dim}")
        return TrigPoly(
            self.dim,
            {k: (2j * math.pi * k[j]) * c for k, c in self.coeffs.items() if k[j] != 0},
        )

    def constant_term(self) -> complex:
        """Normalized integral over the torus."""
        return self.coeffs.get((0,) * self.dim, 0.0 + 0.0j)

    def cycle_sum(self, axes: Iterable[int]) -> complex:
        """Sum of coefficients whose frequencies vanish on the given axes.

        Equals the integral over the coordinate subtorus spanned by `axes`
        of the restriction that sets all other coordinates to zero.
        """
        axes = tuple(axes)
        total = 0.0 + 0.0j
        for k, c in self.coeffs.items():
            if all(k[a] == 0 for a in axes):
                total += c
        return total

    def rotate(self, shift: float) -> "TrigPoly":
        """Pullback along x -> x + shift on T^1 style coordinates: c_k -> c_k e^{2 pi i k.shift}.

        For dim > 1 the same shift is applied along every axis weight sum(k).
        """
        return TrigPoly(
            self.dim,
            {
                k: c * complex(math.cos(TWO_PI * sum(k) * shift), math.sin(TWO_PI * sum(k) * shift))
                for k, c in self.coeffs.items()
            },
        )

    def freq_scale(self, fn: Callable[[Freq], complex]) -> "TrigPoly":
        """Multiply each coefficient by a function of its frequency."""
        return TrigPoly(self.dim, {k: c * fn(k) for k, c in self.coeffs.items()})

    # -- inspection --------------------------------------------------------

    def norm(self) -> float:
        """Max coefficient magnitude."""
        return max((abs(c) for c in self.coeffs.values()), default=0.0)

    def support(self) -> frozenset[Freq]:
        return frozenset(self.coeffs)

    def evaluate(self, x: Iterable[float]) -> complex:
        x = tuple(x)
        total = 0.0 + 0.0j
        for k, c in self.coeffs.items():
            phase = TWO_PI * sum(a * b for a, b in zip(k, x))
            total += c * complex(math.cos(phase), math.sin(phase))
        return total

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.norm() <= tol

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TrigPoly)
            and self.dim == other.dim
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.dim, frozenset(self.coeffs.items())))

    def __repr__(self) -> str:
        if not self.coeffs:
            return f"TrigPoly({self.dim}, 0)"
        terms = ", ".join(f"{k}: {c:.4g}" for k, c in sorted(self.coeffs.items()))
        return f"TrigPoly({self.dim}, {{{terms}}})"
