"""Full pipeline on one instance, with every identity and proposition as a named check.

A check that fails is an assertion failure of the geometry, not an input
problem; each report carries a reproducer string so the instance can be
regenerated.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from rgw import _linalg as la
from rgw.codazzi import (
    CompatibilityError,
    NotCodazziError,
    check_compatibility,
    classify,
    codazzi_residual,
    codazzi_solution_space,
    construct_codazzi,
    eigen_alpha_residual,
    intermediate_residuals,
    skew_representation_all,
)
from rgw.connections import (
    check_equivariance,
    covariant_differential,
    equivariance_residual,
    koszul_product,
    skew_adjointness_residual,
    torsion,
)
from rgw.core_algebra import (
    DEFAULT_TOL,
    SpaceSpec,
    is_nilpotent,
    is_split_solvable,
    killing_split,
    validate_space,
    verify_chain,
)
from rgw.curvature import (
    curvature_report,
    difference_curvature,
    kd_sign_search,
    naturally_reductive_check,
    ricci_corollary_check,
    ricci_s_checks,
    sec_d_residual,
)
from rgw.workbench.document import SpaceDocument

SCHEMA = "rgw-report/1"
IDENTITY_TOL = 1e-8
KOSZUL_TOL = 1e-12
SIGN_MARGIN = 1e-8


def _r(x) -> float | None:
    """Residuals rounded to four significant digits so reports are stable text."""
    if x is None:
        return None
    return float(f"{float(x):.3e}")


def _v(x) -> list:
    return [float(f"{float(t):.9g}") + 0.0 for t in np.ravel(x)]


@dataclass
class CheckResult:
    name: str
    status: str  # "pass" | "fail" | "skip"
    residual: float | None = None
    detail: str = ""
    witness: dict | None = None

    def to_obj(self) -> dict:
        obj = {"name": self.name, "status": self.status}
        if self.residual is not None:
            obj["residual"] = _r(self.residual)
        if self.detail:
            obj["detail"] = self.detail
        if self.witness:
            obj["witness"] = self.witness
        return obj


@dataclass
class RunReport:
    name: str
    reproducer: str
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def failures(self) -> list:
        return [c for c in self.checks if c.status == "fail"]

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_obj(self) -> dict:
        """Machine form; timing is left out so reports are reproducible byte for byte."""
        return {
            "name": self.name,
            "reproducer": self.reproducer,
            "ok": self.ok,
            "data": self.data,
            "checks": [c.to_obj() for c in self.checks],
        }

    def add(self, name, passed, residual=None, detail="", witness=None) -> CheckResult:
        c = CheckResult(name, "pass" if passed else "fail", residual, detail, witness)
        self.checks.append(c)
        return c

    def skip(self, name, detail=""):
        self.checks.append(CheckResult(name, "skip", None, detail))

    def text(self) -> str:
        lines = [f"== {self.name}  [{'ok' if self.ok else 'FAILED'}]  ({self.elapsed:.2f}s)"]
        for k, v in self.data.items():
            lines.append(f"   {k}: {v}")
        for c in self.checks:
            res = "" if c.residual is None else f"  residual={c.residual:.3e}"
            det = f"  {c.detail}" if c.detail else ""
            lines.append(f"   [{c.status.upper():4}] {c.name}{res}{det}")
        if not self.ok:
            lines.append(f"   reproducer: {self.reproducer}")
        return "\n".join(lines)


def _magnitude(spec: SpaceSpec) -> float:
    """Size of the data: bracket scale times the metric's condition-type factor."""
    g = la.as_float(spec.gram)
    return max(1.0, spec.algebra.to_float().scale) * max(1.0, la.max_abs(g)) * max(1.0, la.max_abs(np.linalg.inv(g)))


def _solutions_to_test(basis: list, seed: int = 0) -> list[tuple[str, np.ndarray]]:
    """Every basis element plus one seeded generic combination."""
    out = [(f"basis[{t}]", la.as_float(A)) for t, A in enumerate(basis)]
    if len(basis) > 1:
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(len(basis))
        A = sum(t * la.as_float(B) for t, B in zip(x, basis))
        out.append(("generic", A / max(1e-300, la.max_abs(A))))
    return out


def run_theorems(
    doc: SpaceDocument | SpaceSpec,
    tol: float = DEFAULT_TOL,
    reproducer: str | None = None,
    identity_tol: float = IDENTITY_TOL,
) -> RunReport:
    t0 = time.perf_counter()
    spec = doc.to_spec() if isinstance(doc, SpaceDocument) else doc
    rep = RunReport(spec.name, reproducer or f"instance {spec.name}")
    try:
        _pipeline(spec, tol, identity_tol, rep)
    except Exception as e:  # noqa: BLE001 - recorded with provenance rather than lost mid-sweep
        rep.add("pipeline", False, detail=f"{type(e).__name__}: {e}")
    rep.elapsed = time.perf_counter() - t0
    return rep


def _pipeline(spec: SpaceSpec, tol: float, identity_tol: float, rep: RunReport) -> None:
    exact = spec.exact
    v = validate_space(spec, tol)
    rep.add("validate", v.valid, max((c.residual for c in v.checks.values()), default=0.0), "; ".join(v.failures()))
    rep.data.update({"dim_h": spec.dim_h, "dim_m": spec.dim_m, "exact": exact})
    if not v.valid:
        return
    alg = spec.algebra
    mag = _magnitude(spec)
    ktol = KOSZUL_TOL * mag**2
    itol = identity_tol * mag**2

    # Levi-Civita product
    alpha = koszul_product(alg.bracket_m, spec.gram)
    tor = la.max_abs(torsion(alg, alpha))
    ng = la.max_abs(covariant_differential(alpha, spec.gram))
    rep.add("koszul.torsion_free", la.within(tor, ktol, exact), tor)
    rep.add("koszul.metric", la.within(ng, ktol, exact), ng)
    rep.add("koszul.skew_adjoint", la.within(skew_adjointness_residual(alpha, spec.gram), ktol, exact),
            skew_adjointness_residual(alpha, spec.gram))
    eq = equivariance_residual(spec, alpha)
    rep.add("koszul.equivariant", check_equivariance(spec, alpha, ktol), eq)

    # curvatures
    cr = curvature_report(spec, alpha, tol)
    b = cr.bianchi
    rep.add("curvature.bianchi_iff_jacobi", b.equivalence_holds, None,
            f"bianchi={b.bianchi} jacobi_m={b.jacobi_m}")
    rep.add("curvature.R0_pair_skew", b.pair_skew, b.pair_skew_residual)
    ric_sym = la.max_abs(cr.Ric - cr.Ric.T)
    rep.add("curvature.ricci_symmetric", la.within(ric_sym, itol, exact), ric_sym)
    rep.data.update({"s": _r(cr.s), "s0": _r(cr.s0), "sd": _r(cr.sd)})

    nat = naturally_reductive_check(spec, tol)
    rep.data["naturally_reductive"] = nat.holds
    if nat.holds:
        rep.add("natred.kd_formula", nat.kd_formula_residual <= itol, nat.kd_formula_residual)
        rep.add("natred.kd_nonnegative", nat.kd_min >= -itol, detail=f"min K^d = {nat.kd_min:.6g}")

    # structure
    fspec = spec.to_float()
    falg = fspec.algebra
    nil, step = is_nilpotent(alg, tol)
    split = is_split_solvable(falg, tol)
    rep.data.update({"nilpotent": nil, "nilpotency_step": step, "split_solvable": split.verdict})
    if split.verdict == "yes":
        rep.add("structure.chain_verified", verify_chain(falg, split.chain, max(tol, 1e-7)), detail=f"{len(split.chain) - 1} steps")
    elif split.verdict == "no" and split.witness is not None:
        rep.add("structure.nonreal_witness", bool(np.any(np.abs(np.imag(split.witness_eigenvalues)) > 0)),
                witness={"Z": _v(split.witness)})

    # Codazzi solutions
    basis = codazzi_solution_space(spec, alpha, tol)
    rep.data["codazzi_dim"] = len(basis)
    falpha = la.as_float(alpha)
    g = fspec.gram
    counts = {"parallel": 0, "nonparallel": 0, "essential": 0}
    for label, A in _solutions_to_test(basis):
        _solution_checks(rep, fspec, falpha, g, A, label, nat.holds, nil, split.verdict, tol, itol, counts)
    rep.data.update(counts)

    cor = ricci_corollary_check(fspec, tol)
    rep.data["corollary"] = cor.status
    if cor.status in ("holds", "violated"):
        rep.add("corollary.ricci_d", cor.status == "holds", detail=cor.detail)


def _solution_checks(rep, spec, alpha, g, A, label, natred, nilpotent, split, tol, itol, counts):
    name = f"codazzi.{label}"
    try:
        cls = classify(A, spec, alpha, tol)
    except NotCodazziError as e:
        rep.add(f"{name}.is_codazzi", False, detail=str(e))
        return
    d = cls.decomp
    alg = spec.algebra
    kind = "parallel" if cls.parallel else ("essential" if cls.essential else "nonparallel")
    counts["parallel" if cls.parallel else "nonparallel"] += 1
    counts["essential"] += int(cls.essential)
    rep.add(f"{name}.criteria_agree", cls.criteria_agree, cls.nabla_residual, f"{kind}, r={d.r}")

    # compatibility biconditional, both directions
    ok, viol = check_compatibility(alg, g, d, tol)
    worst = max((x.residual for x in viol), default=0.0)
    rep.add(f"{name}.solver_implies_compatible", ok, worst)
    try:
        B = construct_codazzi(spec, d.blocks, d.lambdas, tol)
        res = codazzi_residual(B, alpha)
        rep.add(f"{name}.compatible_implies_solver", res <= itol * max(1.0, d.spread), res)
    except (CompatibilityError, ValueError) as e:
        rep.add(f"{name}.compatible_implies_solver", False, detail=str(e))
    if not ok:
        return

    # identities
    r1, r2 = intermediate_residuals(alg, d)
    rep.add(f"{name}.intermediate", max(r1, r2) <= itol, max(r1, r2))
    ea = eigen_alpha_residual(alg, d, alpha)
    rep.add(f"{name}.eigen_alpha", ea <= itol, ea)
    Rd = difference_curvature(alg, g)
    sd = sec_d_residual(alg, d, Rd)
    rep.add(f"{name}.sec_d_formula", sd <= itol, sd)
    rc = ricci_s_checks(alg, g, d, tol)
    rep.add(f"{name}.cyclic_identity", rc.cyclic_residual <= itol, rc.cyclic_residual)
    rep.add(f"{name}.scalar_sum", rc.scalar_sum_residual <= itol, rc.scalar_sum_residual)
    rep.add(f"{name}.ricci_forms", max(rc.first_form_residual, rc.estimate_form_residual) <= itol,
            max(rc.first_form_residual, rc.estimate_form_residual))
    rep.add(f"{name}.ricci_inequality", rc.inequality_holds,
            detail=" ".join(f"j={j + 1}:{m:.3e}" for j, m in rc.inequality_margins.items()))
    rep.add(f"{name}.restricted_block_invariant", rc.restricted_leak <= itol, rc.restricted_leak)
    ks = 0.0
    for k in range(d.r):
        for beta, beta_k, corr in killing_split(alg, d, k):
            ks = max(ks, abs(beta - beta_k - corr))
    rep.add(f"{name}.killing_split", ks <= itol, ks)
    skew_ok, skew_res = skew_representation_all(alg, g, d, tol)
    rep.add(f"{name}.skew_representation", skew_ok, skew_res)

    # propositions
    if cls.parallel:
        return
    rep.add(f"{name}.nonparallel_r_ge_3", d.r >= 3, detail=f"r={d.r}")
    ks_ = kd_sign_search(alg, g, d, tol)
    pos = ks_.positive.value if ks_.positive else None
    neg = ks_.negative.value if ks_.negative else None
    wit = {}
    if ks_.positive:
        wit["positive"] = {"X": _v(ks_.positive.X), "Y": _v(ks_.positive.Y), "K": _v([pos])[0]}
    if ks_.negative:
        wit["negative"] = {"X": _v(ks_.negative.X), "Y": _v(ks_.negative.Y), "K": _v([neg])[0]}
    both = pos is not None and neg is not None and pos > SIGN_MARGIN and neg < -SIGN_MARGIN
    rep.add(f"{name}.kd_both_signs", both, detail=f"K+={pos} K-={neg}", witness=wit or None)
    rep.add(f"{name}.not_naturally_reductive", not natred)
    if cls.essential:
        rep.add(f"{name}.essential_obstruction", (not nilpotent) and split != "yes",
                detail=f"nilpotent={nilpotent} split_solvable={split}")
