"""Chern character, Chern-Simons transgressions, odd character, alpha invariants.

All outputs are scalar-valued graded forms (the trace is already applied);
classes modulo exact forms are compared through coordinate-cycle pairings,
which are complete on tori.  Normalizations are pinned by the transgression
identity d cs = ch(nabla_1) - ch(nabla_0); see :mod:`chernweil.conventions`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
import scipy.linalg

from .algebras import SCALARS, MatrixBackend
from .connections import Bundle, Connection, curvature, is_flat, holonomy
from .conventions import CONVENTIONS
from .errors import ContractError, StructureError
from .forms import GradedForm

_TWO_PI_I = 2j * math.pi


def _wedge_power(form: GradedForm, k: int, unit: GradedForm) -> GradedForm:
    out = unit
    for _ in range(k):
        out = out.wedge(form)
    return out


def default_nodes(dim: int) -> int:
    """Gauss-Legendre node count exact for the polynomial t-integrand."""
    return math.ceil((dim + 4) / 2)


def min_nodes(dim: int) -> int:
    return math.ceil((dim + 2) / 2) + 1


def _gauss01(q: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(q)
    return (x + 1.0) / 2.0, w / 2.0


# -- Chern character -----------------------------------------------------------------


def chern_character(conn: Connection) -> GradedForm:
    """ch(nabla) = sum_k tau(F^k) / (k! (2 pi i)^k); closed, even, scalar-valued."""
    unit = GradedForm.identity(conn.dim, conn.rank, conn.algebra)
    total = unit.trace()  # degree-0 part: dim_tau of the bundle
    f = curvature(conn)
    power = unit
    k = 0
    while 2 * (k + 1) <= conn.dim:
        k += 1
        power = power.wedge(f)
        if power.is_zero():
            break
        coeff = 1.0 / (math.factorial(k) * _TWO_PI_I**k)
        total = total + coeff * power.trace()
    return total


# -- Chern-Simons along paths ----------------------------------------------------------


@dataclass(frozen=True)
class PathOfConnections:
    """Linear path nabla_t = nabla_0 + t * alpha with Gauss-Legendre quadrature."""

    start: Connection
    alpha: GradedForm
    nodes: int

    def __post_init__(self):
        if self.alpha.dim != self.start.dim or self.alpha.shape != self.start.omega.shape:
            raise StructureError("path difference does not match the base connection")
        if self.nodes < min_nodes(self.start.dim):
            raise ContractError(
                f"{self.nodes} quadrature nodes < required {min_nodes(self.start.dim)} for T^{self.start.dim}"
            )

    def at(self, t: float) -> Connection:
        return Connection(self.start.bundle, self.start.omega + t * self.alpha, self.start.twists)

    @property
    def end(self) -> Connection:
        return self.at(1.0)


def linear_path(conn0: Connection, conn1: Connection, nodes: int | None = None) -> PathOfConnections:
    if conn0.bundle != conn1.bundle or conn0.twists != conn1.twists:
        raise StructureError("path endpoints must live on the same bundle and frame")
    alpha = conn1.omega - conn0.omega
    return PathOfConnections(conn0, alpha, nodes or default_nodes(conn0.dim))


def chern_simons_path(path: PathOfConnections) -> GradedForm:
    """Transgression of the Chern character along the path (odd, scalar-valued).

    Satisfies d cs = ch(nabla_1) - ch(nabla_0) up to quadrature exactness
    (the linear-path integrand is polynomial in t, so exact at default nodes).
    """
    dim = path.start.dim
    unit = GradedForm.identity(dim, path.start.rank, path.start.algebra)
    t_nodes, weights = _gauss01(path.nodes)
    total = GradedForm.zero(dim, (1, 1), SCALARS)
    for t, w in zip(t_nodes, weights):
        conn_t = path.at(float(t))
        f_t = curvature(conn_t)
        power = unit
        k = 0
        while 2 * k + 1 <= dim:
            integrand = path.alpha.wedge(power) if k else path.alpha
            coeff = w / (math.factorial(k) * _TWO_PI_I ** (k + 1))
            total = total + coeff * integrand.trace()
            k += 1
            if 2 * k + 1 <= dim:
                power = power.wedge(f_t)
                if power.is_zero():
                    break
    return total


def chern_simons_flat(conn1: Connection, conn0: Connection, flat_tol: float = 1e-10) -> GradedForm:
    """Closed-form transgression between flat connections (odd, scalar-valued).

    cs = sum_k (-1)^k k! / ((2 pi i)^{k+1} (2k+1)!) tau(alpha^{2k+1}),
    alpha = omega_1 - omega_0.  Agrees with the linear-path quadrature up to
    exact forms.
    """
    if conn0.bundle != conn1.bundle or conn0.twists != conn1.twists:
        raise StructureError("endpoints must live on the same bundle and frame")
    for conn in (conn0, conn1):
        res = curvature(conn).norm()
        if res > flat_tol:
            raise ContractError(f"connection is not flat: curvature norm {res:.3e} > {flat_tol:.1e}")
    alpha = conn1.omega - conn0.omega
    dim = conn0.dim
    total = GradedForm.zero(dim, (1, 1), SCALARS)
    power = alpha
    k = 0
    while 2 * k + 1 <= dim:
        coeff = ((-1) ** k * math.factorial(k)) / (
            _TWO_PI_I ** (k + 1) * math.factorial(2 * k + 1)
        )
        total = total + coeff * power.trace()
        k += 1
        if 2 * k + 1 <= dim:
            power = power.wedge(alpha).wedge(alpha)
            if power.is_zero():
                break
    return total


# -- odd character and even transgression ------------------------------------------------


def _check_pointwise_unitary(u: GradedForm, tol: float) -> None:
    ident = GradedForm.identity(u.dim, u.shape[0], u.algebra)
    if (u.wedge(u.star()) - ident).norm() > tol or (u.star().wedge(u) - ident).norm() > tol:
        raise ContractError("automorphism is not pointwise unitary within tolerance")


def odd_chern_character(u: GradedForm, conn: Connection, unitary_tol: float = 1e-12) -> GradedForm:
    """ch(u, nabla) = sum_k (-1)^k k!/((2k+1)! (2 pi i)^{k+1}) tau(g^{2k+1}),
    with g = u^{-1} d_nabla u; odd, scalar-valued, closed for flat nabla."""
    if u.degrees() not in ((), (0,)):
        raise ContractError("the automorphism must be a degree-0 form")
    if u.shape != (conn.rank, conn.rank):
        raise StructureError("automorphism shape does not match the bundle rank")
    _check_pointwise_unitary(u, unitary_tol)
    g = u.star().wedge(conn.covariant(u))
    dim = conn.dim
    total = GradedForm.zero(dim, (1, 1), SCALARS)
    power = g
    k = 0
    while 2 * k + 1 <= dim:
        coeff = ((-1) ** k * math.factorial(k)) / (
            math.factorial(2 * k + 1) * _TWO_PI_I ** (k + 1)
        )
        total = total + coeff * power.trace()
        k += 1
        if 2 * k + 1 <= dim:
            power = power.wedge(g).wedge(g)
            if power.is_zero():
                break
    return total


@dataclass(frozen=True)
class UnitaryPath:
    """Piecewise path u(t) = U_i exp(s H_i) of pointwise-unitary automorphisms.

    ``start`` is a degree-0 monomial-type unitary form; each segment generator
    H_i is a constant skew-adjoint block, so Fourier supports stay finite along
    the whole path.
    """

    start: GradedForm
    generators: tuple[np.ndarray, ...]

    def __post_init__(self):
        if self.start.degrees() not in ((), (0,)):
            raise ContractError("path start must be a degree-0 form")
        if not isinstance(self.start.algebra, MatrixBackend):
            raise ContractError("unitary paths are supported over matrix backends")
        size = self.start.shape[0] * self.start.algebra.n
        for h in self.generators:
            if h.shape != (size, size):
                raise StructureError("segment generator size does not match the bundle")
            if np.abs(h + h.conj().T).max() > 1e-10:
                raise ContractError("segment generators must be skew-adjoint")

    def endpoint(self) -> GradedForm:
        u = self.start
        for h in self.generators:
            step = GradedForm.constant(u.dim, scipy.linalg.expm(h), u.algebra)
            u = u.wedge(step)
        return u


def even_chern_simons(path: UnitaryPath, conn: Connection, nodes: int = 24) -> GradedForm:
    """Even transgression for a path of automorphisms:
    integral over t of sum_k (-1)^k k!/((2k)! (2 pi i)^{k+1}) tau(u^{-1} u' (u^{-1} d_nabla u)^{2k}).

    Satisfies d cs = ch(u_1, nabla) - ch(u_0, nabla) for flat nabla; the
    integrand is analytic (not polynomial) in t, so accuracy is set by the
    node count.
    """
    dim = conn.dim
    total = GradedForm.zero(dim, (1, 1), SCALARS)
    t_nodes, weights = _gauss01(nodes)
    u_seg = path.start
    for h in path.generators:
        h_form = GradedForm.constant(dim, h, u_seg.algebra)
        for t, w in zip(t_nodes, weights):
            step = GradedForm.constant(dim, scipy.linalg.expm(float(t) * h), u_seg.algebra)
            u_t = u_seg.wedge(step)
            u_t_star = u_t.star()
            g = u_t_star.wedge(conn.covariant(u_t))
            # u^{-1} u' = exp(-sH) u_seg^{-1} u_seg exp(sH) H = H
            power = GradedForm.identity(dim, conn.rank, conn.algebra)
            k = 0
            while 2 * k <= dim:
                integrand = h_form.wedge(power) if k else h_form
                coeff = w * ((-1) ** k * math.factorial(k)) / (
                    math.factorial(2 * k) * _TWO_PI_I ** (k + 1)
                )
                total = total + coeff * integrand.trace()
                k += 1
                if 2 * k <= dim:
                    power = power.wedge(g).wedge(g)
                    if power.is_zero():
                        break
        u_seg = u_seg.wedge(GradedForm.constant(dim, scipy.linalg.expm(h), u_seg.algebra))
    return total


# -- alpha invariants ---------------------------------------------------------------------


@dataclass(frozen=True)
class AlphaResult:
    """Odd cycle pairings of the flat transgression, with audit metadata."""

    pairings: dict[tuple[int, ...], complex]
    im_max: float
    metadata: dict = field(default_factory=dict)

    def real_vector(self) -> dict[tuple[int, ...], float]:
        return {i: v.real for i, v in self.pairings.items()}


def _has_trivial_holonomy(conn: Connection, tol: float = 1e-10) -> bool:
    if conn.omega.norm() <= 1e-12:
        return True
    if not isinstance(conn.algebra, MatrixBackend):
        return False
    size = conn.rank * conn.algebra.n
    try:
        return all(
            np.abs(holonomy(conn, j) - np.eye(size)).max() <= tol for j in range(conn.dim)
        )
    except ContractError:
        return False


def alpha_invariant(conn_flat: Connection, conn_triv: Connection, flat_tol: float = 1e-10) -> AlphaResult:
    """Cycle-pairing vector of cs(nabla_flat, nabla_triv) over odd coordinate cycles.

    For unitary flat inputs the pairings are real; the circle normalization is
    alpha(holonomy e^{2 pi i theta}) = theta.
    """
    if not _has_trivial_holonomy(conn_triv):
        raise ContractError("the reference connection must have trivial holonomy")
    cs = chern_simons_flat(conn_flat, conn_triv, flat_tol=flat_tol)
    pairings = cs.cycle_pairings("odd")
    im_max = max((abs(v.imag) for v in pairings.values()), default=0.0)
    metadata = {
        "conventions": {
            "alpha": CONVENTIONS["alpha"],
            "holonomy": CONVENTIONS["holonomy"],
            "log_branch": CONVENTIONS["log_branch"],
        },
        "flat_tolerance": flat_tol,
        "rank": conn_flat.rank,
        "dim": conn_flat.dim,
    }
    return AlphaResult(pairings=pairings, im_max=im_max, metadata=metadata)
