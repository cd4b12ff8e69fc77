"""Randomized verification suites for the calculus and character identities.

Each suite draws seeded instances, measures the worst residual of one named
identity, and returns rows ``{identity, cases, max_residual, tolerance,
pass}``.  Suites are deterministic functions of their seed; the runner may
execute different suites on a thread pool, but each suite accumulates serially so
reports are byte-identical regardless of the thread count.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable

import numpy as np
import scipy.linalg

from .algebras import SCALARS, MatrixBackend, haar_unitary
from .characters import (
    UnitaryPath,
    chern_character,
    chern_simons_flat,
    chern_simons_path,
    default_nodes,
    even_chern_simons,
    linear_path,
    odd_chern_character,
    alpha_invariant,
)
from .connections import (
    Bundle,
    Connection,
    curvature,
    direct_sum_connection,
    flat_from_holonomies,
    gauge_transform,
    holonomy,
    isometry_form_check,
    tensor_connection,
    trivial_connection,
    unitarity_check,
)
from .errors import ContractError
from .forms import GradedForm, dx, scalar_monomial
from .witness import (
    build_rotation_witness,
    haar_witness_check,
    main_prop_check,
    trace_invariance_suite,
)

THETA_GRID = tuple(k / 7 for k in range(7)) + (0.6180339887,)


# -- random instances ----------------------------------------------------------------


def random_block(rng: np.random.Generator, size: int, scale: float = 0.7) -> np.ndarray:
    return scale * (rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size)))


def random_form(
    rng: np.random.Generator,
    dim: int,
    degree: int,
    rank: int = 2,
    algebra: MatrixBackend = None,
    terms: int = 2,
    kmax: int = 1,
) -> GradedForm:
    algebra = algebra or MatrixBackend(1)
    size = rank * algebra.n
    indices = list(itertools.combinations(range(dim), degree))
    parts: dict = {}
    for _ in range(terms):
        index = indices[int(rng.integers(0, len(indices)))]
        k = tuple(int(x) for x in rng.integers(-kmax, kmax + 1, size=dim))
        block = random_block(rng, size)
        comp = parts.setdefault(index, {})
        comp[k] = comp[k] + block if k in comp else block
    return GradedForm(dim, (rank, rank), algebra, parts)


def random_connection(
    rng: np.random.Generator, dim: int, rank: int = 2, algebra: MatrixBackend = None, terms: int = 3
) -> Connection:
    algebra = algebra or MatrixBackend(1)
    omega = random_form(rng, dim, 1, rank, algebra, terms=terms)
    return Connection(Bundle(dim, rank, algebra), omega)


def random_commuting_unitaries(rng: np.random.Generator, dim: int, size: int) -> list[np.ndarray]:
    basis = haar_unitary(rng, size)
    out = []
    for _ in range(dim):
        angles = rng.uniform(0.05, 0.95, size=size)
        out.append(basis @ np.diag(np.exp(2j * math.pi * angles)) @ basis.conj().T)
    return out


def random_monomial_unitary(rng: np.random.Generator, dim: int, size: int, kmax: int = 1) -> GradedForm:
    """Permutation-monomial unitary: row i carries e^{2 pi i k_i . x} at column sigma(i)."""
    perm = rng.permutation(size)
    parts: dict = {}
    for i in range(size):
        k = tuple(int(x) for x in rng.integers(-kmax, kmax + 1, size=dim))
        phase = complex(np.exp(2j * math.pi * rng.uniform()))
        block = np.zeros((size, size), dtype=complex)
        block[i, perm[i]] = phase
        comp = parts.setdefault((), {})
        comp[k] = comp[k] + block if k in comp else block
    return GradedForm(dim, (size, size), SCALARS, parts)


def _axis_monomial(dim: int, axis: int, powers, size: int) -> GradedForm:
    """diag(e^{2 pi i k_i x_axis}) as a degree-0 unitary form."""
    parts: dict = {}
    for i, k in enumerate(powers):
        freq = [0] * dim
        freq[axis] = int(k)
        block = np.zeros((size, size), dtype=complex)
        block[i, i] = 1.0
        comp = parts.setdefault((), {})
        key = tuple(freq)
        comp[key] = comp[key] + block if key in comp else block
    return GradedForm(dim, (size, size), SCALARS, parts)


def random_multiaxis_unitary(rng: np.random.Generator, dim: int, size: int) -> GradedForm:
    """Product of per-axis diagonal monomials interleaved with constant Haar
    unitaries; its differential has full rank, so degree >= 3 character terms
    are nonzero (plain permutation monomials factor through a 2-torus)."""
    u = _axis_monomial(dim, 0, rng.integers(-1, 2, size=size), size)
    for axis in range(1, dim):
        mixer = GradedForm.constant(dim, haar_unitary(rng, size), SCALARS)
        u = u.wedge(mixer).wedge(_axis_monomial(dim, axis, rng.integers(-1, 2, size=size), size))
    return u


def _row(identity: str, residual: float, tol: float, cases: int, **extra) -> dict:
    row = {
        "identity": identity,
        "cases": cases,
        "max_residual": float(residual),
        "tolerance": float(tol),
        "pass": bool(residual <= tol),
    }
    row.update(extra)
    return row


# -- calculus suite -------------------------------------------------------------------


def forms_suite(seed: int = 0, dims: Iterable[int] = (1, 2, 3, 4), cases: int = 50, tol: float = 1e-12) -> list[dict]:
    rng = np.random.default_rng(seed)
    res_dd = res_leibniz = res_assoc = res_inv = res_stokes = 0.0
    total = 0
    for dim in dims:
        for _ in range(cases):
            total += 1
            deg_a = int(rng.integers(0, dim))
            deg_b = int(rng.integers(0, max(1, dim - deg_a)))
            a = random_form(rng, dim, deg_a, rank=2)
            b = random_form(rng, dim, deg_b, rank=2)
            c = random_form(rng, dim, int(rng.integers(0, 2)), rank=2)

            res_dd = max(res_dd, a.d().d().norm())

            sign = -1.0 if deg_a % 2 else 1.0
            leibniz = (a.wedge(b)).d() - (a.d().wedge(b) + sign * a.wedge(b.d()))
            res_leibniz = max(res_leibniz, leibniz.norm())

            assoc = (a.wedge(b)).wedge(c) - a.wedge(b.wedge(c))
            res_assoc = max(res_assoc, assoc.norm())

            inv_sign = -1.0 if (deg_a * deg_b) % 2 else 1.0
            inv = (a.wedge(b)).star() - inv_sign * (b.star()).wedge(a.star())
            res_inv = max(res_inv, inv.norm())

            exact = random_form(rng, dim, int(rng.integers(0, dim)), rank=1).d().trace()
            for index, value in exact.cycle_pairings("odd").items():
                res_stokes = max(res_stokes, abs(value))
            for index, value in exact.cycle_pairings("even").items():
                res_stokes = max(res_stokes, abs(value))
    return [
        _row("d o d = 0 on random forms", res_dd, tol, total),
        _row("graded Leibniz rule d(a^b) = da^b + (-1)^|a| a^db", res_leibniz, tol, total),
        _row("wedge associativity", res_assoc, tol, total),
        _row("involution (a^b)* = (-1)^{|a||b|} b*^a*", res_inv, tol, total),
        _row("cycle pairing of exact forms vanishes", res_stokes, tol, total),
    ]


# -- character suites -----------------------------------------------------------------


def closedness_suite(seed: int = 1, dims: Iterable[int] = (1, 2, 3, 4), cases: int = 25, tol: float = 1e-10) -> list[dict]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    total = 0
    for dim in dims:
        for _ in range(cases):
            total += 1
            conn = random_connection(rng, dim, rank=2)
            worst = max(worst, chern_character(conn).d().norm())
    return [_row("Chern character is closed", worst, tol, total)]


def transgression_suite(
    seed: int = 2,
    dims: Iterable[int] = (1, 2, 3, 4),
    cases: int = 25,
    tol: float = 1e-9,
    audit_tol: float = 1e-12,
) -> list[dict]:
    rng = np.random.default_rng(seed)
    worst = worst_audit = 0.0
    total = 0
    for dim in dims:
        for _ in range(cases):
            total += 1
            conn0 = random_connection(rng, dim, rank=2)
            conn1 = random_connection(rng, dim, rank=2)
            path = linear_path(conn0, conn1)
            cs = chern_simons_path(path)
            lhs = cs.d()
            rhs = chern_character(conn1) - chern_character(conn0)
            worst = max(worst, (lhs - rhs).norm())

            doubled = chern_simons_path(linear_path(conn0, conn1, nodes=2 * path.nodes))
            worst_audit = max(worst_audit, (cs - doubled).norm())
    return [
        _row("transgression d cs = ch(nabla1) - ch(nabla0)", worst, tol, total),
        _row("quadrature exactness: doubling nodes leaves cs unchanged", worst_audit, audit_tol, total),
    ]


def flat_vs_path_suite(seed: int = 3, cases: int = 25, tol: float = 1e-9, dim: int = 3) -> list[dict]:
    """Gauge-equivalent flat pairs on T^3: closed form vs quadrature, modulo exact forms."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        size = 2
        angles = [rng.uniform(0.05, 0.95, size=size) for _ in range(dim)]
        unitaries = [np.diag(np.exp(2j * math.pi * a)) for a in angles]
        conn0 = flat_from_holonomies(unitaries, SCALARS)
        t = random_monomial_unitary(rng, dim, size)
        conn1 = gauge_transform(conn0, t)
        cs_closed = chern_simons_flat(conn1, conn0)
        cs_quad = chern_simons_path(linear_path(conn0, conn1))
        pair_closed = cs_closed.cycle_pairings("odd")
        pair_quad = cs_quad.cycle_pairings("odd")
        for index in pair_closed:
            worst = max(worst, abs(pair_closed[index] - pair_quad[index]))
    return [_row("flat closed form matches path transgression on cycles", worst, tol, cases)]


def prop19_suite(seed: int = 4, cases: int = 10, tol: float = 1e-9, dim: int = 3) -> list[dict]:
    """Sum/tensor/cocycle ledger for characters and transgressions."""
    rng = np.random.default_rng(seed)
    r_sum = r_tensor = r_cocycle = r_cs_sum = 0.0
    r_item5_a = r_item5_b = 0.0
    for _ in range(cases):
        conn_v0 = random_connection(rng, dim, rank=2)
        conn_v1 = random_connection(rng, dim, rank=2)
        conn_v2 = random_connection(rng, dim, rank=2)
        conn_w0 = random_connection(rng, dim, rank=2)
        conn_w1 = random_connection(rng, dim, rank=2)

        # (1) additivity under direct sums
        ch_sum = chern_character(direct_sum_connection(conn_v0, conn_w0))
        r_sum = max(r_sum, (ch_sum - chern_character(conn_v0) - chern_character(conn_w0)).norm())

        # (2) multiplicativity under tensor products
        ch_tensor = chern_character(tensor_connection(conn_v0, conn_w0))
        ch_prod = chern_character(conn_v0).wedge(chern_character(conn_w0))
        r_tensor = max(r_tensor, (ch_tensor - ch_prod).norm())

        # (3) cocycle identity modulo exact forms
        cs01 = chern_simons_path(linear_path(conn_v0, conn_v1))
        cs12 = chern_simons_path(linear_path(conn_v1, conn_v2))
        cs02 = chern_simons_path(linear_path(conn_v0, conn_v2))
        gap = (cs01 + cs12 - cs02).cycle_pairings("odd")
        r_cocycle = max(r_cocycle, max((abs(v) for v in gap.values()), default=0.0))

        # (4) transgression additivity under direct sums
        cs_sum = chern_simons_path(
            linear_path(direct_sum_connection(conn_v0, conn_w0), direct_sum_connection(conn_v1, conn_w1))
        )
        cs_parts = chern_simons_path(linear_path(conn_v0, conn_v1)) + chern_simons_path(
            linear_path(conn_w0, conn_w1)
        )
        r_cs_sum = max(r_cs_sum, (cs_sum - cs_parts).norm())

        # (5) tensor transgression; two endpoint placements recorded
        lhs = chern_simons_path(
            linear_path(tensor_connection(conn_v0, conn_w0), tensor_connection(conn_v1, conn_w1))
        ).cycle_pairings("odd")
        cs_v = chern_simons_path(linear_path(conn_v0, conn_v1))
        cs_w = chern_simons_path(linear_path(conn_w0, conn_w1))
        rhs_a = chern_character(conn_v0).wedge(cs_w) + chern_character(conn_w1).wedge(cs_v)
        rhs_b = chern_character(conn_v1).wedge(cs_w) + chern_character(conn_w0).wedge(cs_v)
        pair_a = rhs_a.cycle_pairings("odd")
        pair_b = rhs_b.cycle_pairings("odd")
        r_item5_a = max(r_item5_a, max(abs(lhs[i] - pair_a[i]) for i in lhs))
        r_item5_b = max(r_item5_b, max(abs(lhs[i] - pair_b[i]) for i in lhs))

    validated = []
    if r_item5_a <= tol:
        validated.append("ch(nabla0_V) cs_W + ch(nabla1_W) cs_V")
    if r_item5_b <= tol:
        validated.append("ch(nabla1_V) cs_W + ch(nabla0_W) cs_V")
    rows = [
        _row("character additivity under direct sums", r_sum, tol, cases),
        _row("character multiplicativity under tensor products", r_tensor, tol, cases),
        _row("transgression cocycle identity on cycles", r_cocycle, tol, cases),
        _row("transgression additivity under direct sums", r_cs_sum, tol, cases),
        _row(
            "tensor transgression factorization on cycles",
            min(r_item5_a, r_item5_b),
            tol,
            cases,
            placement_residuals={
                "ch(nabla0_V) cs_W + ch(nabla1_W) cs_V": r_item5_a,
                "ch(nabla1_V) cs_W + ch(nabla0_W) cs_V": r_item5_b,
            },
            validated_placements=validated,
        ),
    ]
    return rows


def prop111_suite(seed: int = 5, cases: int = 25, tol: float = 1e-10) -> list[dict]:
    """Odd character equals the flat transgression of the conjugated pair."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for case in range(cases):
        dim = int(rng.integers(1, 4)) if case % 2 == 0 else 3
        size = 2
        unitaries = random_commuting_unitaries(rng, dim, size)
        conn = flat_from_holonomies(unitaries, SCALARS)
        t = random_monomial_unitary(rng, dim, size) if case % 2 == 0 else random_multiaxis_unitary(rng, dim, size)
        odd = odd_chern_character(t, conn)
        cs = chern_simons_flat(gauge_transform(conn, t), conn)
        worst = max(worst, (odd - cs).norm())
    return [_row("odd character equals conjugation transgression", worst, tol, cases)]


def even_transgression_suite(seed: int = 6, cases: int = 8, tol: float = 1e-8) -> list[dict]:
    # degree-3 terms are the first place the identity is non-vacuous, so run on T^3
    rng = np.random.default_rng(seed)
    worst = worst_loop = 0.0
    for _ in range(cases):
        dim = 3
        size = 2
        conn = flat_from_holonomies(random_commuting_unitaries(rng, dim, size), SCALARS)
        u0 = random_multiaxis_unitary(rng, dim, size)
        h = random_block(rng, size)
        h = 0.8 * (h - h.conj().T) / 2
        path = UnitaryPath(u0, (h,))
        cs = even_chern_simons(path, conn, nodes=24)
        u1 = path.endpoint()
        rhs = odd_chern_character(u1, conn, unitary_tol=1e-8) - odd_chern_character(
            u0, conn, unitary_tol=1e-8
        )
        worst = max(worst, (cs.d() - rhs).norm())

        # closed loop: exp(2 pi i diag(integers)) returns to the start
        h_loop = 2j * math.pi * np.diag(rng.integers(-1, 2, size=size).astype(complex))
        loop = UnitaryPath(u0, (h_loop,))
        cs_loop = even_chern_simons(loop, conn, nodes=24)
        worst_loop = max(worst_loop, cs_loop.d().norm())
    return [
        _row("even transgression d cs = ch(u1) - ch(u0)", worst, tol, cases),
        _row("even transgression of a closed loop is closed", worst_loop, tol, cases),
    ]


# -- alpha and witness suites ----------------------------------------------------------------


def alpha_circle_suite(tol: float = 1e-9, thetas: Iterable[float] = THETA_GRID) -> list[dict]:
    worst = 0.0
    values = {}
    for theta in thetas:
        hol = np.array([[np.exp(2j * math.pi * theta)]], dtype=complex)
        conn = flat_from_holonomies([hol], SCALARS)
        triv = trivial_connection(Bundle(1, 1, SCALARS))
        alpha = alpha_invariant(conn, triv)
        value = alpha.pairings[(0,)]
        values[f"{theta:.10f}"] = value.real
        worst = max(worst, abs(value - theta))
    return [_row("circle alpha normalization alpha(theta) = theta", worst, tol, len(values), values=values)]


def rotation_witness_suite(tol: float = 1e-9, thetas: Iterable[float] = THETA_GRID) -> list[dict]:
    worst_diff = worst_intertwine = 0.0
    zero_exact = True
    details = []
    for theta in thetas:
        witness = build_rotation_witness(theta)
        report = main_prop_check(witness, tol=tol)
        worst_diff = max(worst_diff, report["difference"], max(report["chain"].values()))
        worst_intertwine = max(worst_intertwine, report["intertwining_residual"])
        if theta == 0.0 and report["intertwining_residual"] != 0.0:
            zero_exact = False
        details.append(
            {
                "theta": theta,
                "ch_pairing": report["ch_pairing"].real,
                "alpha_pairing": report["alpha_pairing"].real,
                "difference": report["difference"],
            }
        )
    rows = [
        _row("witness character equals alpha on the circle", worst_diff, tol, len(details), details=details),
        _row("witness intertwining residual", worst_intertwine, tol, len(details), zero_theta_exact=zero_exact),
    ]
    return rows


def haar_suite(samples: int = 100_000, seed: int = 11, sigma: float = 3.0) -> list[dict]:
    tests = [
        ("diag(1/3, -1/3)", np.diag([np.exp(2j * math.pi / 3), np.exp(-2j * math.pi / 3)])),
        (
            "real rotation by 0.2 turns",
            np.array(
                [
                    [math.cos(2 * math.pi * 0.2), -math.sin(2 * math.pi * 0.2)],
                    [math.sin(2 * math.pi * 0.2), math.cos(2 * math.pi * 0.2)],
                ],
                dtype=complex,
            ),
        ),
        ("seeded Haar unitary", haar_unitary(np.random.default_rng(2024), 2)),
    ]
    rows = []
    for label, u in tests:
        report = haar_witness_check(u, samples=samples, seed=seed, sigma=sigma)
        rows.append(
            {
                "identity": f"Monte-Carlo witness pairing matches eigenvalue-angle alpha [{label}]",
                "cases": 1,
                "max_residual": report["difference"],
                "tolerance": report["threshold"],
                "pass": report["pass"],
                "alpha_raw": report["alpha_raw"],
                "estimate": report["ch_pairing_estimate"].real,
                "stderr": report["stderr"],
                "intertwining_residual": report["intertwining_residual"],
            }
        )
    return rows


def reality_suite(seed: int = 7, unitary_cases: int = 10, form_cases: int = 5, tol: float = 1e-9) -> list[dict]:
    rng = np.random.default_rng(seed)
    worst_unitary = 0.0
    for _ in range(unitary_cases):
        dim = int(rng.integers(1, 3))
        conn = flat_from_holonomies(random_commuting_unitaries(rng, dim, 2), SCALARS)
        triv = trivial_connection(Bundle(dim, 2, SCALARS))
        alpha = alpha_invariant(conn, triv)
        worst_unitary = max(worst_unitary, alpha.im_max)

    worst_q = 0.0
    q = np.diag([1.0, -1.0]).astype(complex)
    for _ in range(form_cases):
        a, c = rng.standard_normal(2)
        b = rng.standard_normal() + 1j * rng.standard_normal()
        s = np.array([[1j * a, b], [np.conj(b), 1j * c]], dtype=complex)
        dim = int(rng.integers(1, 3))
        coeffs = rng.standard_normal(dim)
        blocks = [coeffs[j] * s for j in range(dim)]
        omega = sum(
            (GradedForm.monomial(dim, (j,), (0,) * dim, blocks[j], SCALARS) for j in range(dim)),
            GradedForm.zero(dim, (2, 2), SCALARS),
        )
        conn = Connection(Bundle(dim, 2, SCALARS), omega)
        if curvature(conn).norm() > 1e-12:
            raise ContractError("isometry-form instance is not flat")
        holos = [scipy.linalg.expm(blocks[j]) for j in range(dim)]
        if not isometry_form_check(holos, q):
            raise ContractError("isometry-form instance failed the Q-isometry check")
        triv = trivial_connection(Bundle(dim, 2, SCALARS))
        alpha = alpha_invariant(conn, triv)
        worst_q = max(worst_q, alpha.im_max)
    return [
        _row("alpha pairings are real for unitary holonomies", worst_unitary, tol, unitary_cases),
        _row("alpha pairings are real for Q-isometry holonomies", worst_q, tol, form_cases),
    ]


def lemma_suite(seed: int = 8, n_unitaries: int = 20, max_len: int = 6, tol: float = 1e-10) -> list[dict]:
    report = trace_invariance_suite(n=2, n_unitaries=n_unitaries, max_len=max_len, seed=seed)
    return [
        _row(
            report["identity"],
            report["max_residual"],
            tol,
            n_unitaries,
            max_word_len=max_len,
        )
    ]


# -- named suite registry --------------------------------------------------------------------


def _suite_forms(seed, tol):
    return forms_suite(seed=seed, tol=tol if tol is not None else 1e-12)


def _suite_characters(seed, tol):
    rows = []
    rows += closedness_suite(seed=seed + 1, tol=tol if tol is not None else 1e-10)
    rows += transgression_suite(seed=seed + 2, tol=tol if tol is not None else 1e-9)
    rows += flat_vs_path_suite(seed=seed + 3, tol=tol if tol is not None else 1e-9)
    rows += prop111_suite(seed=seed + 5, tol=tol if tol is not None else 1e-10)
    rows += even_transgression_suite(seed=seed + 6, tol=tol if tol is not None else 1e-8)
    return rows


def _suite_prop19(seed, tol):
    return prop19_suite(seed=seed + 4, tol=tol if tol is not None else 1e-9)


def _suite_witness(seed, tol):
    rows = []
    rows += alpha_circle_suite(tol=tol if tol is not None else 1e-9)
    rows += rotation_witness_suite(tol=tol if tol is not None else 1e-9)
    rows += haar_suite(samples=20_000, seed=seed + 11)
    rows += reality_suite(seed=seed + 7, tol=tol if tol is not None else 1e-9)
    return rows


def _suite_lemma33(seed, tol):
    return lemma_suite(seed=seed + 8, tol=tol if tol is not None else 1e-10)


SUITES: dict[str, Callable] = {
    "forms": _suite_forms,
    "characters": _suite_characters,
    "prop19": _suite_prop19,
    "witness": _suite_witness,
    "lemma33": _suite_lemma33,
}


def run_verify(name: str, seed: int = 0, tol: float | None = None, threads: int = 1) -> dict:
    """Run one named suite (or "all"); deterministic given (name, seed, tol)."""
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise ContractError(f"unknown suite {name!r}; choose from {sorted(SUITES)} or 'all'")

    if threads > 1 and len(names) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda n: SUITES[n](seed, tol), names))
    else:
        results = [SUITES[n](seed, tol) for n in names]

    rows = [row for chunk in results for row in chunk]
    return {
        "suite": name,
        "seed": seed,
        "tolerance_override": tol,
        "rows": rows,
        "pass": all(row["pass"] for row in rows),
    }
