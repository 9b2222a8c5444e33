"""Command line: ``rgw validate|report|codazzi|theorems|fuzz``.

Exit status: 0 success, 1 invariant or assertion failure, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from rgw import _linalg as la
from rgw.codazzi import NotCodazziError, classify, codazzi_solution_space
from rgw.connections import koszul_product
from rgw.core_algebra import (
    DEFAULT_TOL,
    InvalidSpaceError,
    is_nilpotent,
    is_split_solvable,
    killing_form,
    require_valid,
    validate_space,
)
from rgw.curvature import curvature_report, naturally_reductive_check, sectional
from rgw.workbench.corpus import builtin_corpus
from rgw.workbench.document import DocumentError, SpaceDocument, load_document, to_json_obj
from rgw.workbench.fuzz import MAX_DIM, fuzz_instance
from rgw.workbench.theorems import SCHEMA, run_theorems

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _num(x):
    """JSON-friendly scalar: rational strings in exact mode, 9 significant digits otherwise."""
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return float(f"{float(x):.9g}") + 0.0


def _arr(a):
    a = np.asarray(a)
    if a.ndim == 0:
        return _num(a[()])
    return [_arr(x) for x in a]


def _fmt_num(x) -> str:
    return str(_num(x))


def _emit(args, obj: dict, text: str) -> None:
    if args.format == "machine":
        obj = {"schema": SCHEMA, "command": args.command, **obj}
        sys.stdout.write(json.dumps(obj, indent=1) + "\n")
    else:
        sys.stdout.write(text.rstrip("\n") + "\n")


def _load(args) -> SpaceDocument:
    doc = load_document(args.file)
    return doc.as_exact() if args.exact else doc


# --- commands -------------------------------------------------------------------------


def cmd_validate(args) -> int:
    doc = _load(args)
    rep = validate_space(doc.to_spec(), args.tol)
    checks = {k: {"passed": c.passed, "residual": _num(c.residual), "detail": c.detail} for k, c in rep.checks.items()}
    lines = [f"{doc.name or args.file}: {'valid' if rep.valid else 'INVALID'}"]
    for k, c in rep.checks.items():
        lines.append(f"  [{'PASS' if c.passed else 'FAIL'}] {k}  residual={float(c.residual):.3e}  {c.detail}".rstrip())
    _emit(args, {"name": doc.name, "valid": rep.valid, "checks": checks}, "\n".join(lines))
    return EXIT_OK if rep.valid else EXIT_FAIL


def _plane_table(R, gram, n):
    out = {}
    for a in range(n):
        for b in range(a + 1, n):
            e = np.eye(n)
            out[(a, b)] = sectional(R, gram, e[a], e[b])
    return out


def cmd_report(args) -> int:
    doc = _load(args)
    spec = doc.to_spec()
    require_valid(spec, args.tol)
    alg = spec.algebra
    alpha = koszul_product(alg.bracket_m, spec.gram)
    cr = curvature_report(spec, alpha, args.tol)
    nat = naturally_reductive_check(spec, args.tol)
    nil, step = is_nilpotent(alg, args.tol)
    split = is_split_solvable(alg.to_float(), args.tol)
    n = spec.dim_m
    K = _plane_table(cr.R, spec.gram, n)
    Kd = _plane_table(cr.Rd, spec.gram, n)
    prod = [
        {"i": i + 1, "j": j + 1, "value": _arr(alpha[i, j])}
        for i in range(n)
        for j in range(n)
        if la.max_abs(alpha[i, j]) != 0
    ]
    obj = {
        "name": doc.name,
        "exact": spec.exact,
        "levi_civita_product": prod,
        "sectional": [{"plane": [a + 1, b + 1], "K": _num(v), "Kd": _num(Kd[(a, b)])} for (a, b), v in K.items()],
        "ricci": _arr(cr.Ric),
        "ricci_d": _arr(cr.Ricd),
        "scalar": _num(cr.s),
        "scalar_0": _num(cr.s0),
        "scalar_d": _num(cr.sd),
        "killing_form": _arr(killing_form(alg)),
        "bianchi_R0": cr.bianchi.bianchi,
        "jacobi_m": cr.bianchi.jacobi_m,
        "naturally_reductive": nat.holds,
        "nilpotent": nil,
        "nilpotency_step": step,
        "split_solvable": split.verdict,
    }
    lines = [f"{doc.name}: dim h = {spec.dim_h}, dim m = {n}, {'exact' if spec.exact else 'float'}"]
    lines.append("Levi-Civita product (nonzero alpha(e_i, e_j)):")
    lines += [f"  alpha(e{p['i']}, e{p['j']}) = {p['value']}" for p in prod] or ["  zero"]
    lines.append("sectional curvature on coordinate planes (K, K^d):")
    lines += [f"  e{a + 1}^e{b + 1}: K = {v:.9g}, K^d = {Kd[(a, b)]:.9g}" for (a, b), v in K.items()]
    lines.append(f"scalar curvature s = {_fmt_num(cr.s)}, s0 = {_fmt_num(cr.s0)}, s^d = {_fmt_num(cr.sd)}")
    lines.append(f"Ricci = {obj['ricci']}")
    lines.append(f"Bianchi(R0) = {cr.bianchi.bianchi}, Jacobi(m) = {cr.bianchi.jacobi_m}")
    lines.append(f"naturally reductive = {nat.holds}, nilpotent = {nil} (step {step}), split-solvable = {split.verdict}")
    _emit(args, obj, "\n".join(lines))
    return EXIT_OK


def cmd_codazzi(args) -> int:
    doc = _load(args)
    spec = doc.to_spec()
    require_valid(spec, args.tol)
    alpha = koszul_product(spec.algebra.bracket_m, spec.gram)
    basis = codazzi_solution_space(spec, alpha, args.tol)
    sols, lines = [], [f"{doc.name}: Codazzi solution space has dimension {len(basis)}"]
    status = EXIT_OK
    for t, A in enumerate(basis):
        try:
            c = classify(A, spec, alpha, args.tol)
        except NotCodazziError as e:
            status = EXIT_FAIL
            lines.append(f"  basis[{t}]: {e}")
            continue
        kind = "parallel" if c.parallel else ("essential" if c.essential else "nonparallel")
        sols.append(
            {
                "form": _arr(A),
                "kind": kind,
                "r": c.r,
                "eigenvalues": _arr(c.decomp.lambdas),
                "multiplicities": c.decomp.dims,
                "ideal_blocks": [i + 1 for i in c.ideal_blocks],
            }
        )
        lines.append(f"  basis[{t}]: {kind}, r = {c.r}, eigenvalues {np.round(c.decomp.lambdas, 9).tolist()}")
        lines.append(f"    form = {_arr(A)}")
    _emit(args, {"name": doc.name, "dimension": len(basis), "solutions": sols}, "\n".join(lines))
    return status


def _theorem_run(args, items) -> int:
    reports = [run_theorems(d, args.tol, reproducer=rep) for d, rep in items]
    failed = [r for r in reports if not r.ok]
    summary = {"instances": len(reports), "failed": len(failed)}
    text = "\n".join(r.text() for r in reports)
    text += f"\n{len(reports)} instance(s), {len(failed)} with failures"
    _emit(args, {"summary": summary, "reports": [r.to_obj() for r in reports]}, text)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_theorems(args) -> int:
    if args.corpus == (args.file is not None):
        raise DocumentError("give exactly one of FILE or --corpus")
    if args.corpus:
        docs = builtin_corpus()
        items = [(d.as_exact() if args.exact else d, f"corpus instance {d.name}") for d in docs]
    else:
        items = [(_load(args), f"file {args.file}")]
    return _theorem_run(args, items)


def cmd_fuzz(args) -> int:
    if args.count < 0:
        raise DocumentError("--count must be non-negative")
    if any(not 1 <= d <= MAX_DIM for d in args.dim):
        raise DocumentError(f"--dim values must lie in [1, {MAX_DIM}]")
    dims = args.dim
    items = []
    for i in range(args.count):
        d = fuzz_instance(args.seed, i, dims)
        items.append((d.as_exact() if args.exact else d, f"fuzz --seed {args.seed} --dim {' '.join(map(str, dims))} index {i}"))
    if args.theorems:
        return _theorem_run(args, items)
    docs = [to_json_obj(d) for d, _ in items]
    text = "\n".join(json.dumps(o) for o in docs)
    _emit(args, {"seed": args.seed, "dims": dims, "instances": docs}, text)
    return EXIT_OK


# --- parser -----------------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--tol", type=float, default=d(DEFAULT_TOL), help="numerical tolerance (default 1e-9)")
    p.add_argument("--exact", action="store_true", default=d(False), help="rational arithmetic")
    p.add_argument("--format", choices=("text", "machine"), default=d("text"), help="output format")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rgw", description="Invariant geometry of reductive homogeneous spaces.")
    _add_common(ap, suppress=False)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("validate", "check the structure constants and metric"),
        ("report", "Levi-Civita product, curvatures and structure"),
        ("codazzi", "invariant Codazzi tensors and their classification"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("file")
        _add_common(p, suppress=True)
    p = sub.add_parser("theorems", help="run every identity and proposition check")
    p.add_argument("file", nargs="?")
    p.add_argument("--corpus", action="store_true", help="run on the built-in corpus")
    _add_common(p, suppress=True)
    p = sub.add_parser("fuzz", help="generate seeded random instances")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--dim", type=int, nargs="+", required=True, help="dim m (one or several values)")
    p.add_argument("--theorems", action="store_true", help="run the theorem checks on each instance")
    _add_common(p, suppress=True)
    return ap


COMMANDS = {
    "validate": cmd_validate,
    "report": cmd_report,
    "codazzi": cmd_codazzi,
    "theorems": cmd_theorems,
    "fuzz": cmd_fuzz,
}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    if args.tol <= 0:
        print("rgw: error: --tol must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        return COMMANDS[args.command](args)
    except DocumentError as e:
        print(f"rgw: input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except InvalidSpaceError as e:
        print(f"rgw: invalid space: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
