"""Connections d + omega on trivialized bundles over T^d.

Flat unitary bundles with commuting holonomies are represented by constant
connection forms omega = sum_j X_j dx_j with X_j a simultaneous matrix
logarithm of the holonomies.  Conventions (see :mod:`chernweil.conventions`):
the holonomy of d + X dx along the j-th cycle is exp(+X_j), and logarithms
take eigenvalue angles in [0, 1) turns, so the circle bundle with holonomy
e^{2 pi i theta} has omega = 2 pi i theta dx and alpha pairing theta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np
import scipy.linalg

from .algebras import SCALARS, MatrixBackend, is_unitary, resolve_tensor
from .errors import ContractError, StructureError
from .forms import GradedForm, constant_one_form, direct_sum_form, tensor_form

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Bundle:
    """Trivialized free module of the given rank over a coefficient algebra."""

    dim: int
    rank: int
    algebra: Any

    def __post_init__(self):
        if self.rank < 1:
            raise StructureError(f"rank must be positive, got {self.rank}")


@dataclass(frozen=True)
class Connection:
    """nabla = d + omega in the global frame.

    ``twists`` lists the directions along which the frame's exterior
    derivative carries the backend's weight derivation (the holonomy-twisted
    working frame of witness constructions); empty for ordinary frames.
    """

    bundle: Bundle
    omega: GradedForm
    twists: tuple[int, ...] = ()

    def __post_init__(self):
        if self.omega.dim != self.bundle.dim:
            raise StructureError("connection form dimension does not match the bundle")
        if self.omega.shape != (self.bundle.rank, self.bundle.rank):
            raise StructureError(
                f"connection form shape {self.omega.shape} does not match rank {self.bundle.rank}"
            )
        degrees = self.omega.degrees()
        if degrees not in ((), (1,)):
            raise StructureError(f"connection form must be homogeneous of degree 1, got degrees {degrees}")

    @property
    def dim(self) -> int:
        return self.bundle.dim

    @property
    def rank(self) -> int:
        return self.bundle.rank

    @property
    def algebra(self):
        return self.bundle.algebra

    def d(self, form: GradedForm) -> GradedForm:
        """Frame exterior derivative (twisted where the frame requires it)."""
        return form.exterior_derivative(self.twists)

    def covariant(self, form: GradedForm) -> GradedForm:
        """d_nabla on endomorphism-valued forms: d eta + omega ^ eta - (-1)^|eta| eta ^ omega."""
        return self.d(form) + self.omega.wedge(form) - form.degree_flip().wedge(self.omega)


def trivial_connection(bundle: Bundle) -> Connection:
    omega = GradedForm.zero(bundle.dim, (bundle.rank, bundle.rank), bundle.algebra)
    return Connection(bundle, omega)


def curvature(conn: Connection) -> GradedForm:
    """F = d omega + omega ^ omega (degree 2)."""
    return conn.d(conn.omega) + conn.omega.wedge(conn.omega)


def is_flat(conn: Connection, tol: float = 1e-10) -> bool:
    return curvature(conn).norm() <= tol


# -- logarithms of commuting unitaries ------------------------------------------------


def angle01(values: np.ndarray) -> np.ndarray:
    """Eigenvalue arguments in turns, branch [0, 1)."""
    turns = np.angle(np.asarray(values, dtype=complex)) / _TWO_PI
    turns = np.mod(turns, 1.0)
    # snap rounding dust at the cut so identity eigenvalues give angle 0
    turns[turns >= 1.0 - 1e-12] = 0.0
    return turns


_COMBO_SEEDS = (0x5DEECE66D, 0x9E3779B97F4A7C15, 0x2545F4914F6CDD1D, 0xDA942042E4DD58B5)


def _simultaneous_diagonalization(mats: Sequence[np.ndarray], tol: float = 1e-9) -> np.ndarray:
    """Common unitary eigenbasis for a family of commuting unitaries."""
    m = mats[0].shape[0]
    for attempt, seed in enumerate(_COMBO_SEEDS):
        rng = np.random.default_rng(seed + attempt)
        weights = rng.standard_normal(2 * len(mats))
        h = np.zeros((m, m), dtype=complex)
        for j, u in enumerate(mats):
            h += weights[2 * j] * (u + u.conj().T)
            h += weights[2 * j + 1] * 1j * (u - u.conj().T)
        _, s = np.linalg.eigh(h)
        ok = True
        for u in mats:
            t = s.conj().T @ u @ s
            if np.abs(t - np.diag(np.diagonal(t))).max() > tol:
                ok = False
                break
        if ok:
            return s
    raise ContractError("could not find a common eigenbasis; holonomies may not commute")


def log_unitary(u: np.ndarray, basis: np.ndarray | None = None) -> np.ndarray:
    """Principal-free logarithm with eigenvalue angles in [0, 1) turns."""
    if basis is None:
        basis = _simultaneous_diagonalization([u])
    diag = np.diagonal(basis.conj().T @ u @ basis)
    theta = angle01(diag)
    return basis @ np.diag(2j * math.pi * theta) @ basis.conj().T


def flat_from_holonomies(
    unitaries: Sequence[np.ndarray],
    algebra: MatrixBackend = SCALARS,
    explicit_logs: Sequence[np.ndarray] | None = None,
    tol: float = 1e-12,
) -> Connection:
    """Flat connection omega = sum_j log(U_j) dx_j from commuting unitaries.

    The U_j are full coefficient blocks (rank x algebra size); they must be
    unitary and pairwise commute.  ``explicit_logs`` overrides the branch
    choice where the caller needs a nonstandard logarithm.
    """
    mats = [np.asarray(u, dtype=complex) for u in unitaries]
    d = len(mats)
    if d < 1:
        raise StructureError("need at least one holonomy")
    m = mats[0].shape[0]
    for u in mats:
        if u.shape != (m, m):
            raise StructureError("holonomies must share a square shape")
        if not is_unitary(u, tol):
            raise ContractError("holonomy is not unitary within tolerance")
    for a in range(d):
        for b in range(a + 1, d):
            if np.abs(mats[a] @ mats[b] - mats[b] @ mats[a]).max() > tol:
                raise ContractError(f"holonomies {a} and {b} do not commute")

    if explicit_logs is not None:
        logs = [np.asarray(x, dtype=complex) for x in explicit_logs]
    elif all(np.abs(u - np.diag(np.diagonal(u))).max() <= tol for u in mats):
        logs = [np.diag(2j * math.pi * angle01(np.diagonal(u))) for u in mats]
    else:
        basis = _simultaneous_diagonalization(mats)
        logs = [log_unitary(u, basis) for u in mats]

    for u, x in zip(mats, logs):
        if np.abs(scipy.linalg.expm(x) - u).max() > 1e-10:
            raise ContractError("logarithm does not exponentiate back to the holonomy")

    if m % algebra.n:
        raise StructureError(f"holonomy size {m} is not a multiple of the algebra size {algebra.n}")
    rank = m // algebra.n
    bundle = Bundle(d, rank, algebra)
    omega = constant_one_form(d, logs, algebra)
    return Connection(bundle, omega)


def holonomy(conn: Connection, j: int) -> np.ndarray:
    """exp(+X_j) for a constant connection form over a matrix backend."""
    if not isinstance(conn.algebra, MatrixBackend):
        raise ContractError("holonomy is available for matrix-backed connections only")
    comp = conn.omega.component((j,))
    zero_freq = (0,) * conn.dim
    for k in comp:
        if k != zero_freq:
            raise ContractError("holonomy of a non-constant connection form is unsupported")
    x = comp.get(zero_freq)
    size = conn.rank * conn.algebra.n
    if x is None:
        return np.eye(size, dtype=complex)
    return scipy.linalg.expm(np.asarray(x, dtype=complex))


def unitarity_check(conn: Connection, tol: float = 1e-12) -> bool:
    """True iff omega* = -omega (skew-adjoint in the standard frame metric)."""
    return (conn.omega.star() + conn.omega).norm() <= tol


def isometry_form_check(
    unitaries: Sequence[np.ndarray], q: np.ndarray, tol: float = 1e-10
) -> bool:
    """True iff every holonomy preserves the nondegenerate form Q (U* Q U = Q).

    Q must be invertible, self-adjoint and normalized with Q^2 = 1.
    """
    q = np.asarray(q, dtype=complex)
    if np.abs(q - q.conj().T).max() > tol:
        raise ContractError("Q must be self-adjoint")
    if abs(np.linalg.det(q)) < 1e-12:
        raise ContractError("Q is singular")
    if np.abs(q @ q - np.eye(q.shape[0])).max() > 1e-10:
        raise ContractError("Q must be normalized so that Q^2 = 1")
    for u in unitaries:
        u = np.asarray(u, dtype=complex)
        if np.abs(u.conj().T @ q @ u - q).max() > tol:
            return False
    return True


# -- constructions ---------------------------------------------------------------------


def gauge_transform(conn: Connection, t: GradedForm, tol: float = 1e-10) -> Connection:
    """T^{-1} nabla T for a degree-0 unitary frame automorphism T."""
    if t.degrees() not in ((), (0,)):
        raise ContractError("gauge transformations must be degree-0 forms")
    t_star = t.star()
    ident = GradedForm.identity(conn.dim, conn.rank, conn.algebra)
    if (t.wedge(t_star) - ident).norm() > tol or (t_star.wedge(t) - ident).norm() > tol:
        raise ContractError("gauge transformation is not unitary within tolerance")
    omega = t_star.wedge(conn.d(t)) + t_star.wedge(conn.omega).wedge(t)
    return Connection(conn.bundle, omega, conn.twists)


def tensor_connection(a: Connection, b: Connection) -> Connection:
    """nabla_V (x) 1 + 1 (x) nabla_W on V (x) W."""
    if a.dim != b.dim:
        raise StructureError("tensor factors must share the base torus")
    algebra, _ = resolve_tensor(a.algebra, b.algebra)
    eye_a = GradedForm.identity(a.dim, a.rank, a.algebra)
    eye_b = GradedForm.identity(b.dim, b.rank, b.algebra)
    omega = tensor_form(a.omega, eye_b) + tensor_form(eye_a, b.omega)
    bundle = Bundle(a.dim, a.rank * b.rank, algebra)
    twists = tuple(sorted(set(a.twists) | set(b.twists)))
    return Connection(bundle, omega, twists)


def direct_sum_connection(a: Connection, b: Connection) -> Connection:
    if a.dim != b.dim:
        raise StructureError("summands must share the base torus")
    if a.algebra != b.algebra:
        raise StructureError("direct sums require a shared coefficient algebra")
    if a.twists != b.twists:
        raise StructureError("summands must live in the same frame")
    omega = direct_sum_form(a.omega, b.omega)
    bundle = Bundle(a.dim, a.rank + b.rank, a.algebra)
    return Connection(bundle, omega, a.twists)
