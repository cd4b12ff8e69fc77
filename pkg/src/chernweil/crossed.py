"""Crossed products by Z with trace-preserving automorphisms.

Elements are finitely supported sums sum_m f_m g^m over a base traced
algebra, with (f g^m)(h g^l) = f rho_m(h) g^{m+l} and trace
tau(sum f_m g^m) = tau_base(f_0).  The rotation algebra C(S^1) x_theta Z is
the special case where the base is the circle-function algebra and the
action rotates by theta; its inclusion unitary u (the coordinate function)
satisfies g u g^{-1} = e^{2 pi i theta} u.
"""

from __future__ import annotations

import math
from typing import Callable, Mapping

import numpy as np

from .algebras import ObjectBackend
from .conventions import COEFF_DROP
from .errors import ContractError, SupportCapError
from .fourier import TrigPoly

CrossedEl = Mapping[int, object]


class TrigPolyAlgebra(ObjectBackend):
    """Circle functions as trigonometric polynomials, trace = normalized integral."""

    is_scalar = False

    def el_zero(self):
        return TrigPoly.zero(1)

    def el_one(self):
        return TrigPoly.one(1)

    def el_add(self, a, b):
        return a + b

    def el_scale(self, z, a):
        return complex(z) * a

    def el_mul(self, a, b):
        return a * b

    def el_star(self, a):
        return a.conj()

    def el_trace(self, a) -> complex:
        return a.constant_term()

    def el_norm(self, a) -> float:
        return a.norm()

    def monomial(self, k: int, coeff: complex = 1.0) -> TrigPoly:
        return TrigPoly.monomial(1, (k,), coeff)

    def random_element(self, rng: np.random.Generator, terms: int = 3, kmax: int = 2) -> TrigPoly:
        coeffs = {}
        for _ in range(terms):
            k = int(rng.integers(-kmax, kmax + 1))
            coeffs[(k,)] = coeffs.get((k,), 0.0) + complex(rng.standard_normal(), rng.standard_normal())
        return TrigPoly(1, coeffs)


class CrossedProductAlgebra(ObjectBackend):
    """base x Z for a Z-action by trace-preserving automorphisms."""

    def __init__(self, base, action: Callable[[int, object], object], m_cap: int = 64):
        self.base = base
        self.action = action
        self.m_cap = int(m_cap)

    def _clean(self, parts: dict[int, object]) -> dict[int, object]:
        out = {}
        for m, f in parts.items():
            if abs(m) > self.m_cap:
                raise SupportCapError(f"group support |m|={abs(m)} exceeds cap {self.m_cap}")
            if self.base.el_norm(f) >= COEFF_DROP:
                out[m] = f
        return out

    def element(self, parts: Mapping[int, object]) -> dict[int, object]:
        return self._clean(dict(parts))

    def el_zero(self):
        return {}

    def el_one(self):
        return {0: self.base.el_one()}

    def generator(self, m: int = 1):
        """The implementing unitary g^m of the Z-action."""
        if abs(m) > self.m_cap:
            raise SupportCapError(f"generator power {m} exceeds cap {self.m_cap}")
        return {m: self.base.el_one()}

    def embed(self, f):
        """Base element as the g^0 component."""
        return self._clean({0: f})

    def el_add(self, a, b):
        out = dict(a)
        for m, f in b.items():
            out[m] = self.base.el_add(out[m], f) if m in out else f
        return self._clean(out)

    def el_scale(self, z, a):
        return self._clean({m: self.base.el_scale(z, f) for m, f in a.items()})

    def el_mul(self, a, b):
        out: dict[int, object] = {}
        for m, f in a.items():
            for l, h in b.items():
                fh = self.base.el_mul(f, self.action(m, h))
                key = m + l
                out[key] = self.base.el_add(out[key], fh) if key in out else fh
        return self._clean(out)

    def el_star(self, a):
        return self._clean(
            {-m: self.action(-m, self.base.el_star(f)) for m, f in a.items()}
        )

    def el_trace(self, a) -> complex:
        f0 = a.get(0)
        return self.base.el_trace(f0) if f0 is not None else 0.0 + 0.0j

    def el_norm(self, a) -> float:
        return max((self.base.el_norm(f) for f in a.values()), default=0.0)

    def el_twist(self, a):
        """Weight derivation lifted from the base algebra (component-wise)."""
        if getattr(self.base, "el_twist", None) is None:
            raise ContractError(f"{self.base!r} carries no weight derivation")
        return self._clean({m: self.base.el_twist(f) for m, f in a.items()})

    def random_element(self, rng: np.random.Generator, m_range: int = 2):
        parts = {}
        for m in range(-m_range, m_range + 1):
            if rng.random() < 0.7:
                parts[m] = self.base.random_element(rng)
        return self._clean(parts)


def build_crossed_product(
    base,
    action: Callable[[int, object], object],
    m_cap: int = 64,
    rng: np.random.Generator | None = None,
    check_tol: float = 1e-10,
    check_samples: int = 8,
) -> CrossedProductAlgebra:
    """Construct base x Z, first checking that the action preserves the trace."""
    rng = rng or np.random.default_rng(0)
    for _ in range(check_samples):
        f = base.random_element(rng)
        for m in (-2, -1, 1, 2):
            moved = action(m, f)
            if abs(base.el_trace(moved) - base.el_trace(f)) > check_tol:
                raise ContractError("the Z-action does not preserve the base trace")
    return CrossedProductAlgebra(base, action, m_cap)


class RotationAlgebra(CrossedProductAlgebra):
    """C(S^1) x_theta Z with right-translation action and inclusion unitary u.

    Carries the weight derivation D(w^c) = -2 pi i c theta used by the
    holonomy-twisted working frame of the circle witness.
    """

    def __init__(self, theta: float, m_cap: int = 64):
        self.theta = float(theta)

        def action(m: int, f: TrigPoly) -> TrigPoly:
            return f.rotate(m * self.theta)

        super().__init__(TrigPolyAlgebra(), action, m_cap)

    def inclusion_unitary(self):
        """u(w) = w, the degree-1 circle monomial; g u g^{-1} = e^{2 pi i theta} u."""
        return self.embed(self.base.monomial(1))

    def el_twist(self, a):
        scale = -2j * math.pi * self.theta

        def weight(k):
            return scale * k[0]

        return self._clean({m: f.freq_scale(weight) for m, f in a.items()})
