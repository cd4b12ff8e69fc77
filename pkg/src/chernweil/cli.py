"""Scenario-driven command line interface.

Scenarios are JSON files validated against the schema in
``docs/scenario-schema.json``; reports are JSON with sorted keys and no
volatile fields, so identical scenarios and seeds produce byte-identical
reports regardless of ``--threads`` (timing goes to stderr).

Exit codes: 0 success, 1 criterion failure, 2 invalid input or resource cap.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from .algebras import SCALARS, MatrixBackend
from .characters import alpha_invariant, chern_simons_flat, chern_simons_path, linear_path, odd_chern_character
from .connections import Bundle, Connection, flat_from_holonomies, trivial_connection
from .conventions import CONVENTIONS
from .errors import ContractError, ScenarioError, StructureError, SupportCapError, TruncationError
from .forms import GradedForm, cycle_label
from .suites import SUITES, run_verify
from .witness import (
    build_freeproduct_witness,
    build_rotation_witness,
    haar_witness_check,
    main_prop_check,
    trace_invariance_suite,
)

TASKS = ("alpha", "cs", "odd-chern", "kk-witness", "lemma33", "verify")


# -- scenario parsing ------------------------------------------------------------------


def parse_angle(value, field: str) -> float:
    """Angles are decimal numbers or exact 'p/q' strings (in turns)."""
    if isinstance(value, str):
        try:
            return float(Fraction(value))
        except (ValueError, ZeroDivisionError) as exc:
            raise ScenarioError(field, f"not a valid rational angle: {value!r}") from exc
    if isinstance(value, (int, float)) and math.isfinite(value):
        return float(value)
    raise ScenarioError(field, f"expected a finite number or 'p/q' string, got {value!r}")


def parse_complex(value, field: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(isinstance(x, (int, float)) for x in value):
        if not all(math.isfinite(x) for x in value):
            raise ScenarioError(field, "complex components must be finite")
        return complex(value[0], value[1])
    raise ScenarioError(field, f"expected [re, im], got {value!r}")


def parse_matrix(value, field: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ScenarioError(field, "expected a nonempty matrix")
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list):
            raise ScenarioError(f"{field}[{i}]", "expected a list of entries")
        rows.append([parse_complex(x, f"{field}[{i}][{j}]") for j, x in enumerate(row)])
    mat = np.array(rows, dtype=complex)
    if mat.shape[0] != mat.shape[1]:
        raise ScenarioError(field, f"matrix must be square, got shape {mat.shape}")
    return mat


def _require(scenario: dict, field: str, types, path: str):
    if field not in scenario:
        raise ScenarioError(f"{path}.{field}" if path else field, "missing required field")
    value = scenario[field]
    if types is not None and not isinstance(value, types):
        raise ScenarioError(f"{path}.{field}" if path else field, f"unexpected type {type(value).__name__}")
    return value


def load_scenario(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError("scenario", f"cannot read {path}: {exc}") from exc
    try:
        scenario = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError("scenario", f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(scenario, dict):
        raise ScenarioError("scenario", "top level must be an object")

    task = _require(scenario, "task", str, "")
    if task not in TASKS:
        raise ScenarioError("task", f"unknown task {task!r}; expected one of {TASKS}")

    manifold = scenario.get("manifold", {"type": "torus", "dim": 1})
    if not isinstance(manifold, dict):
        raise ScenarioError("manifold", "expected an object")
    if manifold.get("type", "torus") != "torus":
        raise ScenarioError("manifold.type", "only 'torus' bases are supported")
    dim = manifold.get("dim", 1)
    if not isinstance(dim, int) or not 1 <= dim <= 4:
        raise ScenarioError("manifold.dim", f"dimension must be an integer in [1, 4], got {dim!r}")
    scenario["manifold"] = {"type": "torus", "dim": dim}

    tol = scenario.get("tolerance", 1e-9)
    if not isinstance(tol, (int, float)) or not math.isfinite(tol) or tol < 0:
        raise ScenarioError("tolerance", f"must be a finite non-negative number, got {tol!r}")
    scenario["tolerance"] = float(tol)

    seed = scenario.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ScenarioError("seed", f"must be a non-negative integer, got {seed!r}")
    return scenario


def build_connection(spec, dim: int, rank: int, algebra, field: str) -> Connection:
    if not isinstance(spec, dict):
        raise ScenarioError(field, "expected an object")
    kind = _require(spec, "kind", str, field)
    if kind == "trivial":
        return trivial_connection(Bundle(dim, rank, algebra))
    if kind == "holonomy":
        if "angles" in spec:
            angles = spec["angles"]
            if not isinstance(angles, list) or len(angles) != dim:
                raise ScenarioError(f"{field}.angles", f"need one entry per direction ({dim})")
            unitaries = []
            for j, entry in enumerate(angles):
                values = entry if isinstance(entry, list) else [entry] * rank
                if len(values) != rank:
                    raise ScenarioError(f"{field}.angles[{j}]", f"need {rank} angles for rank {rank}")
                turns = [parse_angle(v, f"{field}.angles[{j}]") for v in values]
                unitaries.append(np.diag(np.exp(2j * math.pi * np.array(turns))))
            return flat_from_holonomies(unitaries, algebra)
        if "unitaries" in spec:
            mats = spec["unitaries"]
            if not isinstance(mats, list) or len(mats) != dim:
                raise ScenarioError(f"{field}.unitaries", f"need one matrix per direction ({dim})")
            unitaries = [parse_matrix(m, f"{field}.unitaries[{j}]") for j, m in enumerate(mats)]
            return flat_from_holonomies(unitaries, algebra)
        raise ScenarioError(field, "holonomy connections need 'angles' or 'unitaries'")
    if kind == "explicit":
        terms = _require(spec, "terms", list, field)
        size = rank * algebra.n
        form = GradedForm.zero(dim, (rank, rank), algebra)
        for i, term in enumerate(terms):
            if not isinstance(term, dict):
                raise ScenarioError(f"{field}.terms[{i}]", "expected an object")
            axis = _require(term, "axis", int, f"{field}.terms[{i}]")
            if not 1 <= axis <= dim:
                raise ScenarioError(f"{field}.terms[{i}].axis", f"axis must be in [1, {dim}]")
            freq = term.get("freq", [0] * dim)
            if not isinstance(freq, list) or len(freq) != dim or not all(isinstance(x, int) for x in freq):
                raise ScenarioError(f"{field}.terms[{i}].freq", f"expected {dim} integers")
            mat = parse_matrix(_require(term, "matrix", list, f"{field}.terms[{i}]"), f"{field}.terms[{i}].matrix")
            if mat.shape != (size, size):
                raise ScenarioError(f"{field}.terms[{i}].matrix", f"expected shape ({size}, {size})")
            form = form + GradedForm.monomial(dim, (axis - 1,), tuple(freq), mat, algebra)
        return Connection(Bundle(dim, rank, algebra), form)
    raise ScenarioError(f"{field}.kind", f"unknown connection kind {kind!r}")


def build_unitary_form(spec, dim: int, size: int, field: str) -> GradedForm:
    if not isinstance(spec, dict):
        raise ScenarioError(field, "expected an object")
    if spec.get("kind", "monomial") != "monomial":
        raise ScenarioError(f"{field}.kind", "only 'monomial' unitaries are supported")
    freqs = _require(spec, "freqs", list, field)
    if len(freqs) != size:
        raise ScenarioError(f"{field}.freqs", f"need one frequency vector per row ({size})")
    perm = spec.get("perm", list(range(1, size + 1)))
    if sorted(perm) != list(range(1, size + 1)):
        raise ScenarioError(f"{field}.perm", f"must be a permutation of 1..{size}")
    phases = spec.get("phases", [0.0] * size)
    if len(phases) != size:
        raise ScenarioError(f"{field}.phases", f"need {size} phases")
    parts: dict = {}
    for i in range(size):
        k = freqs[i]
        if not isinstance(k, list) or len(k) != dim or not all(isinstance(x, int) for x in k):
            raise ScenarioError(f"{field}.freqs[{i}]", f"expected {dim} integers")
        phase = parse_angle(phases[i], f"{field}.phases[{i}]")
        block = np.zeros((size, size), dtype=complex)
        block[i, perm[i] - 1] = np.exp(2j * math.pi * phase)
        comp = parts.setdefault((), {})
        key = tuple(k)
        block = block + comp[key] if key in comp else block
        comp[key] = block
    return GradedForm(dim, (size, size), SCALARS, parts)


# -- task execution ----------------------------------------------------------------------


def _pairing_rows(pairings: dict) -> list[dict]:
    rows = []
    for index in sorted(pairings):
        value = pairings[index]
        rows.append({"cycle": cycle_label(index), "re": value.real, "im": value.imag})
    return rows


def run_task(scenario: dict) -> dict:
    task = scenario["task"]
    dim = scenario["manifold"]["dim"]
    tol = scenario["tolerance"]
    seed = scenario.get("seed", 0)
    bundle_spec = scenario.get("bundle", {"rank": 1, "algebra": {"kind": "matrix", "n": 1}})
    if not isinstance(bundle_spec, dict):
        raise ScenarioError("bundle", "expected an object")
    rank = bundle_spec.get("rank", 1)
    if not isinstance(rank, int) or rank < 1:
        raise ScenarioError("bundle.rank", f"must be a positive integer, got {rank!r}")
    algebra_spec = bundle_spec.get("algebra", {"kind": "matrix", "n": 1})
    if not isinstance(algebra_spec, dict):
        raise ScenarioError("bundle.algebra", "expected an object")
    kind = algebra_spec.get("kind", "matrix")

    checks: list[dict] = []
    results: dict = {}

    if task == "alpha":
        if kind != "matrix":
            raise ScenarioError("bundle.algebra.kind", "alpha scenarios use the matrix backend")
        algebra = MatrixBackend(algebra_spec.get("n", 1))
        conns = _require(scenario, "connections", list, "")
        if len(conns) != 2:
            raise ScenarioError("connections", "alpha needs [flat, trivial]")
        conn_flat = build_connection(conns[0], dim, rank, algebra, "connections[0]")
        conn_triv = build_connection(conns[1], dim, rank, algebra, "connections[1]")
        alpha = alpha_invariant(conn_flat, conn_triv)
        results["pairings"] = _pairing_rows(alpha.pairings)
        checks.append(
            {
                "identity": "alpha pairings are real for unitary/isometry holonomies",
                "max_residual": alpha.im_max,
                "tolerance": tol,
                "pass": alpha.im_max <= tol,
            }
        )

    elif task == "cs":
        if kind != "matrix":
            raise ScenarioError("bundle.algebra.kind", "cs scenarios use the matrix backend")
        algebra = MatrixBackend(algebra_spec.get("n", 1))
        conns = _require(scenario, "connections", list, "")
        if len(conns) != 2:
            raise ScenarioError("connections", "cs needs [nabla0, nabla1]")
        conn0 = build_connection(conns[0], dim, rank, algebra, "connections[0]")
        conn1 = build_connection(conns[1], dim, rank, algebra, "connections[1]")
        method = scenario.get("method", "path")
        nodes = scenario.get("nodes")
        if method in ("path", "both"):
            cs_p = chern_simons_path(linear_path(conn0, conn1, nodes))
            results["path_pairings"] = _pairing_rows(cs_p.cycle_pairings("odd"))
        if method in ("flat", "both"):
            cs_f = chern_simons_flat(conn1, conn0)
            results["flat_pairings"] = _pairing_rows(cs_f.cycle_pairings("odd"))
        if method == "both":
            worst = max(
                abs(complex(a["re"], a["im"]) - complex(b["re"], b["im"]))
                for a, b in zip(results["path_pairings"], results["flat_pairings"])
            )
            checks.append(
                {
                    "identity": "flat closed form matches path transgression on cycles",
                    "max_residual": worst,
                    "tolerance": tol,
                    "pass": worst <= tol,
                }
            )
        elif method not in ("path", "flat"):
            raise ScenarioError("method", f"expected 'path', 'flat' or 'both', got {method!r}")

    elif task == "odd-chern":
        if kind != "matrix":
            raise ScenarioError("bundle.algebra.kind", "odd-chern scenarios use the matrix backend")
        algebra = MatrixBackend(algebra_spec.get("n", 1))
        conns = _require(scenario, "connections", list, "")
        if len(conns) != 1:
            raise ScenarioError("connections", "odd-chern needs exactly one connection")
        conn = build_connection(conns[0], dim, rank, algebra, "connections[0]")
        unitary = build_unitary_form(
            _require(scenario, "unitary", dict, ""), dim, rank * algebra.n, "unitary"
        )
        odd = odd_chern_character(unitary, conn)
        results["pairings"] = _pairing_rows(odd.cycle_pairings("odd"))
        closed = odd.d().norm()
        checks.append(
            {
                "identity": "odd character is closed for flat connections",
                "max_residual": closed,
                "tolerance": max(tol, 1e-10),
                "pass": closed <= max(tol, 1e-10),
            }
        )

    elif task == "kk-witness":
        if kind == "rotation":
            theta = parse_angle(algebra_spec.get("theta", 0.0), "bundle.algebra.theta")
            witness = build_rotation_witness(theta)
            report = main_prop_check(witness, tol=tol)
            results["theta"] = theta
            results["ch_pairing"] = report["ch_pairing"].real
            results["alpha_pairing"] = report["alpha_pairing"].real
            results["chain"] = report["chain"]
            checks.append(
                {
                    "identity": "witness character equals alpha on the circle",
                    "max_residual": report["difference"],
                    "tolerance": tol,
                    "pass": report["pass"],
                }
            )
            checks.append(
                {
                    "identity": "witness intertwining residual",
                    "max_residual": report["intertwining_residual"],
                    "tolerance": tol,
                    "pass": report["intertwining_residual"] <= tol,
                }
            )
        elif kind == "haar":
            n = algebra_spec.get("n", 2)
            samples = algebra_spec.get("samples", 100_000)
            mc_seed = algebra_spec.get("seed", seed)
            if "unitary" in scenario:
                u = parse_matrix(scenario["unitary"], "unitary")
            elif "angles" in scenario:
                turns = [parse_angle(a, "angles") for a in scenario["angles"]]
                if len(turns) != n:
                    raise ScenarioError("angles", f"need {n} angles")
                u = np.diag(np.exp(2j * math.pi * np.array(turns)))
            else:
                raise ScenarioError("unitary", "haar witnesses need 'unitary' or 'angles'")
            report = haar_witness_check(u, samples=samples, seed=mc_seed)
            results.update(
                {
                    "alpha_raw": report["alpha_raw"],
                    "alpha_mod1": report["alpha_mod1"],
                    "estimate": report["ch_pairing_estimate"].real,
                    "stderr": report["stderr"],
                    "angles": report["angles"],
                }
            )
            checks.append(
                {
                    "identity": "Monte-Carlo witness pairing matches eigenvalue-angle alpha",
                    "max_residual": report["difference"],
                    "tolerance": report["threshold"],
                    "pass": report["pass"],
                }
            )
        elif kind == "freeproduct":
            n = algebra_spec.get("n", 2)
            cap = algebra_spec.get("max_word_len", 32)
            if "psi" in scenario:
                psi = parse_matrix(scenario["psi"], "psi")
            elif "angles" in scenario:
                turns = [parse_angle(a, "angles") for a in scenario["angles"]]
                psi = np.diag(np.exp(2j * math.pi * np.array(turns)))
            else:
                psi = np.eye(n, dtype=complex)
            witness = build_freeproduct_witness(n, psi, word_cap=cap)
            results["checks"] = {k: v for k, v in witness.checks.items() if k != "trace_of_unit"}
            worst = max(
                witness.checks["intertwining_residual"],
                witness.checks["commutator_trace_residual"],
                witness.checks["recursion_oracle_residual"],
            )
            checks.append(
                {
                    "identity": "free-product witness intertwining and trace oracles",
                    "max_residual": worst,
                    "tolerance": tol,
                    "pass": worst <= tol,
                }
            )
        else:
            raise ScenarioError("bundle.algebra.kind", f"kk-witness supports rotation/haar/freeproduct, got {kind!r}")

    elif task == "lemma33":
        n = algebra_spec.get("n", 2) if kind == "freeproduct" else 2
        max_len = algebra_spec.get("max_word_len", 6) if kind == "freeproduct" else 6
        count = scenario.get("unitaries", 20)
        report = trace_invariance_suite(n=n, n_unitaries=count, max_len=max_len, seed=seed)
        results["unitaries"] = count
        results["max_word_len"] = max_len
        checks.append(
            {
                "identity": report["identity"],
                "max_residual": report["max_residual"],
                "tolerance": max(tol, 1e-10) if tol else 1e-10,
                "pass": report["max_residual"] <= (max(tol, 1e-10) if tol else 1e-10),
            }
        )

    elif task == "verify":
        suite = scenario.get("suite", "all")
        threads = scenario.get("threads", 1)
        override = scenario.get("tolerance_override")
        report = run_verify(suite, seed=seed, tol=override, threads=threads)
        results["suite"] = suite
        checks.extend(report["rows"])

    return {
        "schema": "chernweil-report-v1",
        "task": task,
        "seed": seed,
        "tolerance": tol,
        "conventions": CONVENTIONS,
        "results": results,
        "checks": checks,
        "pass": all(c["pass"] for c in checks),
    }


# -- serialization -------------------------------------------------------------------------


def _sanitize(value):
    if isinstance(value, dict):
        return {str(k): _sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sanitize(v) for v in value]
    if isinstance(value, (bool, int, str)) or value is None:
        return value
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, float):
        return value
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.complexfloating):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.ndarray):
        return _sanitize(value.tolist())
    return repr(value)


def render_report(report: dict) -> str:
    return json.dumps(_sanitize(report), sort_keys=True, indent=2) + "\n"


def write_pairings_csv(report: dict, path: str) -> None:
    rows = []
    for key in ("pairings", "path_pairings", "flat_pairings"):
        rows.extend(report.get("results", {}).get(key, []))
    lines = ["cycle,re,im"]
    for row in rows:
        lines.append(f"{row['cycle']},{row['re']!r},{row['im']!r}")
    Path(path).write_text("\n".join(lines) + "\n")


# -- entry point ----------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser, scenario_required: bool = True) -> None:
    parser.add_argument("--scenario", required=scenario_required, help="scenario JSON file")
    parser.add_argument("--out", help="write the JSON report here (default: stdout)")
    parser.add_argument("--csv", help="write pairing vectors as CSV")
    parser.add_argument("--tol", type=float, help="override the scenario tolerance")
    parser.add_argument("--seed", type=int, help="override the scenario seed")
    parser.add_argument("--threads", type=int, default=1, help="suite parallelism (does not affect results)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chernweil",
        description="Traced Chern-Weil computations on flat tori: transgressions, alpha invariants, and operator-algebra witnesses.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for task in TASKS:
        p = sub.add_parser(task, help=f"run a {task} scenario")
        _add_common(p, scenario_required=(task != "verify"))
        if task == "verify":
            p.add_argument("--suite", choices=sorted(SUITES) + ["all"], help="named suite (alternative to --scenario)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        if args.command == "verify" and args.scenario is None:
            if args.suite is None:
                print("error: verify needs --scenario or --suite", file=sys.stderr)
                return 2
            scenario = {
                "task": "verify",
                "suite": args.suite,
                "manifold": {"type": "torus", "dim": 1},
                "tolerance": args.tol if args.tol is not None else 1e-9,
                "seed": args.seed if args.seed is not None else 0,
                "threads": args.threads,
            }
            if args.tol is not None:
                scenario["tolerance_override"] = args.tol
        else:
            scenario = load_scenario(args.scenario)
            if scenario["task"] != args.command:
                raise ScenarioError("task", f"scenario task {scenario['task']!r} does not match subcommand {args.command!r}")
            if args.tol is not None:
                scenario["tolerance"] = args.tol
                if scenario["task"] == "verify":
                    scenario["tolerance_override"] = args.tol
            if args.seed is not None:
                scenario["seed"] = args.seed
            if scenario["task"] == "verify":
                scenario.setdefault("threads", args.threads)
                if args.threads != 1:
                    scenario["threads"] = args.threads
        report = run_task(scenario)
    except ScenarioError as exc:
        print(f"error: invalid scenario -- {exc}", file=sys.stderr)
        return 2
    except (SupportCapError, TruncationError) as exc:
        print(f"error: resource cap -- {exc}", file=sys.stderr)
        return 2
    except (ContractError, StructureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    text = render_report(report)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.csv:
        write_pairings_csv(report, args.csv)
    elapsed = time.perf_counter() - started
    print(f"elapsed {elapsed:.2f}s", file=sys.stderr)
    return 0 if report["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
