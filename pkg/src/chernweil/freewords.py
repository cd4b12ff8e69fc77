"""Truncated free product of a matrix algebra with the circle algebra.

Elements are complex linear combinations of canonical alternating words whose
letters are either matrix-algebra elements ('a' letters) or circle monomials
z^k, k != 0 ('z' letters).  Canonical form merges adjacent same-side letters
and absorbs scalar multiples of the unit; products whose canonical words
exceed the length cap raise :class:`TruncationError` instead of silently
truncating.

The trace is tau_A on lone matrix letters and the normalized circle integral
on z-powers, extended by the centering recursion: replace each letter x by
(x - tau(x) 1) + tau(x) 1, expand multilinearly, and use that a nonempty
alternating word of trace-zero letters has trace zero.  Each expansion
strictly shortens words, so the recursion terminates.

phi_u is the automorphism fixing the matrix algebra with z -> z u (right
multiplication by a unitary u); phi_u o phi_v = phi_{uv}, and phi_u preserves
the trace.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable

import numpy as np

from .algebras import MatrixBackend, ObjectBackend, is_unitary
from .conventions import COEFF_DROP
from .errors import ContractError, StructureError, TruncationError

# letters: ("a", nested-tuple matrix) | ("z", k)
Letter = tuple
Word = tuple

_UNIT_ABSORB_TOL = 1e-12


def _mat_to_key(m: np.ndarray) -> tuple:
    return tuple(tuple(complex(x) for x in row) for row in m)


def _key_to_mat(key: tuple) -> np.ndarray:
    return np.array(key, dtype=complex)


class FreeWordAlgebra(ObjectBackend):
    """A * C(S^1) for A = M_n(C), truncated at a word-length cap."""

    def __init__(self, base: MatrixBackend, max_len: int = 32):
        if not isinstance(base, MatrixBackend):
            raise StructureError("the free-product base must be a matrix backend")
        self.base = base
        self.max_len = int(max_len)
        self._trace_cache: dict[Word, complex] = {}

    # -- letters and canonical words ------------------------------------------------

    def a_letter(self, m) -> Letter:
        m = np.asarray(m, dtype=complex)
        if m.shape != (self.base.n, self.base.n):
            raise StructureError(f"matrix letter must be {self.base.n} x {self.base.n}")
        return ("a", _mat_to_key(m))

    def z_letter(self, k: int) -> Letter:
        if k == 0:
            raise StructureError("z^0 is the unit, not a letter")
        return ("z", int(k))

    def _absorb_scalar(self, letter: Letter):
        """Return c if the letter equals c * unit (within tolerance), else None."""
        if letter[0] == "z":
            return None
        m = _key_to_mat(letter[1])
        c = complex(np.trace(m)) / self.base.n
        if np.abs(m - c * np.eye(self.base.n)).max() <= _UNIT_ABSORB_TOL:
            return c
        return None

    def canonical_word(self, letters: Iterable[Letter]) -> tuple[complex, Word]:
        """Merge adjacent same-side letters and absorb unit letters.

        Returns (coefficient, word); the empty word is the unit.
        """
        coeff = 1.0 + 0.0j
        stack: list[Letter] = []
        for letter in letters:
            stack.append(letter)
            while len(stack) >= 1:
                top = stack[-1]
                if top[0] == "z" and top[1] == 0:
                    stack.pop()
                    continue
                if top[0] == "a":
                    c = self._absorb_scalar(top)
                    if c is not None:
                        stack.pop()
                        coeff *= c
                        if coeff == 0:
                            return 0.0 + 0.0j, ()
                        continue
                if len(stack) >= 2 and stack[-2][0] == top[0]:
                    second = stack[-2]
                    stack.pop()
                    stack.pop()
                    if top[0] == "z":
                        stack.append(("z", second[1] + top[1]))
                    else:
                        prod = _key_to_mat(second[1]) @ _key_to_mat(top[1])
                        stack.append(("a", _mat_to_key(prod)))
                    continue
                break
        if len(stack) > self.max_len:
            raise TruncationError(
                f"canonical word of length {len(stack)} exceeds cap {self.max_len}"
            )
        return coeff, tuple(stack)

    def word(self, letters: Iterable[Letter]) -> dict:
        coeff, w = self.canonical_word(letters)
        return {} if abs(coeff) < COEFF_DROP else {w: coeff}

    # -- element ring -------------------------------------------------------------------

    def el_zero(self):
        return {}

    def el_one(self):
        return {(): 1.0 + 0.0j}

    def _clean(self, parts: dict) -> dict:
        return {w: c for w, c in parts.items() if abs(c) >= COEFF_DROP}

    def el_add(self, a, b):
        out = dict(a)
        for w, c in b.items():
            out[w] = out.get(w, 0.0) + c
        return self._clean(out)

    def el_scale(self, z, a):
        return self._clean({w: complex(z) * c for w, c in a.items()})

    def el_mul(self, a, b):
        out: dict[Word, complex] = {}
        for wa, ca in a.items():
            for wb, cb in b.items():
                coeff, w = self.canonical_word(wa + wb)
                if abs(coeff) >= COEFF_DROP:
                    out[w] = out.get(w, 0.0) + ca * cb * coeff
        return self._clean(out)

    def _star_letter(self, letter: Letter) -> Letter:
        if letter[0] == "z":
            return ("z", -letter[1])
        return ("a", _mat_to_key(_key_to_mat(letter[1]).conj().T))

    def el_star(self, a):
        out: dict[Word, complex] = {}
        for w, c in a.items():
            coeff, sw = self.canonical_word(self._star_letter(x) for x in reversed(w))
            if abs(coeff) >= COEFF_DROP:
                out[sw] = out.get(sw, 0.0) + c.conjugate() * coeff
        return self._clean(out)

    def el_norm(self, a) -> float:
        return max((abs(c) for c in a.values()), default=0.0)

    # -- the free-product trace ------------------------------------------------------------

    def _letter_trace(self, letter: Letter) -> complex:
        if letter[0] == "z":
            return 0.0 + 0.0j  # integral of z^k, k != 0
        return complex(np.trace(_key_to_mat(letter[1]))) / self.base.n

    def _centered(self, letter: Letter) -> Letter:
        if letter[0] == "z":
            return letter
        m = _key_to_mat(letter[1])
        t = complex(np.trace(m)) / self.base.n
        return ("a", _mat_to_key(m - t * np.eye(self.base.n)))

    def word_trace(self, word: Word) -> complex:
        if not word:
            return 1.0 + 0.0j
        if len(word) == 1:
            return self._letter_trace(word[0])
        cached = self._trace_cache.get(word)
        if cached is not None:
            return cached
        traced = [(i, self._letter_trace(x)) for i, x in enumerate(word)]
        traced = [(i, t) for i, t in traced if t != 0]
        total = 0.0 + 0.0j
        # multilinear centering expansion; the all-centered term vanishes by
        # freeness, and removing letters can only shorten words after merging
        for r in range(1, len(traced) + 1):
            for subset in combinations(traced, r):
                chosen = {i for i, _ in subset}
                scalar = 1.0 + 0.0j
                for _, t in subset:
                    scalar *= t
                rest = [self._centered(x) for i, x in enumerate(word) if i not in chosen]
                coeff, merged = self.canonical_word(rest)
                if coeff == 0:
                    continue
                if len(merged) == len(rest) and merged:
                    continue  # still an alternating word of centered letters
                total += scalar * coeff * self.word_trace(merged)
        self._trace_cache[word] = total
        return total

    def el_trace(self, a) -> complex:
        return sum((c * self.word_trace(w) for w, c in a.items()), 0.0 + 0.0j)

    # -- automorphisms phi_u -----------------------------------------------------------------

    def phi(self, u) -> "callable":
        """phi_u: a -> a, z -> z u, extended multiplicatively."""
        u = np.asarray(u, dtype=complex)
        if not is_unitary(u, 1e-12):
            raise ContractError("phi_u requires a unitary element of the base algebra")
        u_letter = ("a", _mat_to_key(u))
        u_star_letter = ("a", _mat_to_key(u.conj().T))

        def map_letter(letter: Letter) -> list[Letter]:
            if letter[0] == "a":
                return [letter]
            k = letter[1]
            if k > 0:
                return [("z", 1), u_letter] * k
            return [u_star_letter, ("z", -1)] * (-k)

        def apply(a: dict) -> dict:
            out: dict[Word, complex] = {}
            for w, c in a.items():
                letters: list[Letter] = []
                for x in w:
                    letters.extend(map_letter(x))
                coeff, merged = self.canonical_word(letters)
                if abs(coeff * c) >= COEFF_DROP:
                    out[merged] = out.get(merged, 0.0) + c * coeff
            return self._clean(out)

        return apply

    def random_element(self, rng: np.random.Generator, letters_max: int = 3):
        letters: list[Letter] = []
        side = rng.integers(0, 2)
        for _ in range(int(rng.integers(1, letters_max + 1))):
            if side == 0:
                m = rng.standard_normal((self.base.n, self.base.n)) + 1j * rng.standard_normal(
                    (self.base.n, self.base.n)
                )
                letters.append(self.a_letter(m))
            else:
                k = int(rng.integers(1, 3)) * (1 if rng.random() < 0.5 else -1)
                letters.append(self.z_letter(k))
            side = 1 - side
        return self.word(letters)
