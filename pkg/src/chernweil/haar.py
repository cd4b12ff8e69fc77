"""Monte-Carlo model of functions on U(n) with the Haar trace.

Elements are polynomials in the matrix-entry coordinate functions
u_{ij}: g -> g_{ij} and their conjugates (commuting symbols).  The trace is
the normalized Haar integral, evaluated by averaging over a seeded batch of
Haar-distributed unitaries (Ginibre + phase-fixed QR), so results are
deterministic given (samples, seed) and carry an O(N^{-1/2}) standard error.

The Z-action is right translation by a diagonal unitary; on symbols
u_{ij} -> lambda_j^m u_{ij}.  The weight derivation for the twisted frame is
D(u_{ij}) = -2 pi i theta_j u_{ij}, conjugates with the opposite sign.
"""

from __future__ import annotations

import math
from typing import Mapping

import numpy as np

from .algebras import ObjectBackend
from .conventions import COEFF_DROP
from .errors import ContractError, StructureError

# a symbol is (i, j, conj_flag); a monomial is a sorted tuple of symbols
Symbol = tuple[int, int, bool]
Monomial = tuple[Symbol, ...]
PolyEl = Mapping[Monomial, complex]


def haar_batch(n: int, samples: int, seed: int) -> np.ndarray:
    """Deterministic batch of Haar unitaries, shape (samples, n, n)."""
    rng = np.random.Generator(np.random.Philox(seed))
    z = (rng.standard_normal((samples, n, n)) + 1j * rng.standard_normal((samples, n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    return q * (d / np.abs(d))[:, None, :]


class HaarFunctionAlgebra(ObjectBackend):
    """Polynomials in U(n) matrix entries; trace = seeded Haar average."""

    def __init__(self, n: int, angles=None, samples: int = 10_000, seed: int = 0):
        if n < 1:
            raise StructureError(f"n must be positive, got {n}")
        self.n = int(n)
        self.samples = int(samples)
        self.seed = int(seed)
        # angles (in turns) of the diagonal translation unitary; required by
        # the action and the twist derivation
        self.angles = None if angles is None else tuple(float(a) for a in angles)
        if self.angles is not None and len(self.angles) != self.n:
            raise StructureError("need one angle per matrix dimension")
        self._batch: np.ndarray | None = None

    def batch(self) -> np.ndarray:
        if self._batch is None:
            self._batch = haar_batch(self.n, self.samples, self.seed)
        return self._batch

    # -- element ring ------------------------------------------------------------

    def symbol(self, i: int, j: int, conj: bool = False) -> dict:
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise StructureError(f"symbol index ({i},{j}) out of range for n={self.n}")
        return {((i, j, bool(conj)),): 1.0 + 0.0j}

    def el_zero(self):
        return {}

    def el_one(self):
        return {(): 1.0 + 0.0j}

    def _clean(self, parts: dict) -> dict:
        return {m: c for m, c in parts.items() if abs(c) >= COEFF_DROP}

    def el_add(self, a, b):
        out = dict(a)
        for m, c in b.items():
            out[m] = out.get(m, 0.0) + c
        return self._clean(out)

    def el_scale(self, z, a):
        return self._clean({m: complex(z) * c for m, c in a.items()})

    def el_mul(self, a, b):
        out: dict[Monomial, complex] = {}
        for ma, ca in a.items():
            for mb, cb in b.items():
                m = tuple(sorted(ma + mb))
                out[m] = out.get(m, 0.0) + ca * cb
        return self._clean(out)

    def el_star(self, a):
        return self._clean(
            {
                tuple(sorted((i, j, not f) for i, j, f in m)): c.conjugate()
                for m, c in a.items()
            }
        )

    def el_norm(self, a) -> float:
        return max((abs(c) for c in a.values()), default=0.0)

    # -- Haar trace -----------------------------------------------------------------

    def evaluate_samples(self, a) -> np.ndarray:
        """Pointwise values of the polynomial on the sample batch."""
        batch = self.batch()
        total = np.zeros(batch.shape[0], dtype=complex)
        for m, c in a.items():
            term = np.full(batch.shape[0], c, dtype=complex)
            for i, j, conj in m:
                col = batch[:, i, j]
                term = term * (np.conj(col) if conj else col)
            total += term
        return total

    def el_trace(self, a) -> complex:
        if not a:
            return 0.0 + 0.0j
        if set(a) == {()}:  # constants integrate exactly
            return complex(a[()])
        return complex(np.mean(self.evaluate_samples(a)))

    def trace_with_error(self, a) -> tuple[complex, float]:
        """Monte-Carlo trace value with estimated standard error of the mean."""
        if not a or set(a) == {()}:
            return self.el_trace(a), 0.0
        vals = self.evaluate_samples(a)
        mean = np.mean(vals)
        if len(vals) < 2:
            return complex(mean), float("inf")
        var = np.sum(np.abs(vals - mean) ** 2) / (len(vals) - 1)
        return complex(mean), float(np.sqrt(var / len(vals)))

    # -- translation action and twist ---------------------------------------------------

    def _require_angles(self):
        if self.angles is None:
            raise ContractError("this Haar algebra was built without translation angles")

    def translate(self, m: int, a):
        """Right translation by diag(e^{2 pi i theta_j})^m on symbols."""
        self._require_angles()
        out = {}
        for mono, c in a.items():
            phase = 0.0
            for i, j, conj in mono:
                phase += -self.angles[j] * m if conj else self.angles[j] * m
            out[mono] = out.get(mono, 0.0) + c * complex(
                math.cos(2 * math.pi * phase), math.sin(2 * math.pi * phase)
            )
        return self._clean(out)

    def el_twist(self, a):
        self._require_angles()
        out = {}
        for mono, c in a.items():
            weight = 0.0
            for i, j, conj in mono:
                weight += -self.angles[j] if conj else self.angles[j]
            if weight:
                out[mono] = c * (-2j * math.pi * weight)
        return self._clean(out)

    def random_element(self, rng: np.random.Generator, terms: int = 3):
        out = {}
        for _ in range(terms):
            deg = int(rng.integers(0, 3))
            mono = tuple(
                sorted(
                    (int(rng.integers(0, self.n)), int(rng.integers(0, self.n)), bool(rng.integers(0, 2)))
                    for _ in range(deg)
                )
            )
            out[mono] = out.get(mono, 0.0) + complex(rng.standard_normal(), rng.standard_normal())
        return self._clean(out)
