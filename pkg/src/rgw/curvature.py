"""Curvatures of the Levi-Civita and canonical connections and their difference.

``R^d = R - R^0`` together with ``K^d``, ``Ric^d`` and ``s^d``. The checks
here take a spectral decomposition coming from a Codazzi solution and test
the identities that such a decomposition forces on the difference curvature.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from rgw import _linalg as la
from rgw.codazzi import (
    CompatibilityError,
    NotCodazziError,
    relative_residual,
    SpectralDecomp,
    check_compatibility,
    classify,
    codazzi_residual,
    frame_brackets,
)
from rgw.connections import canonical_curvature, curvature, koszul_product
from rgw.core_algebra import DEFAULT_TOL, MAlgebra, SpaceSpec, _jacobiator, is_abelian, is_subalgebra


@dataclass
class CurvatureReport:
    R: np.ndarray
    R0: np.ndarray
    Rd: np.ndarray
    Ric: np.ndarray
    Ric0: np.ndarray
    Ricd: np.ndarray
    s: object
    s0: object
    sd: object
    bianchi: "BianchiCheck"
    ricci_symmetric: bool


def sectional(R: np.ndarray, gram, X, Y) -> float:
    """<R(X,Y)Y, X> for a gram-orthonormalised basis of the plane spanned by X, Y."""
    g = la.as_float(gram)
    try:
        F = la.gram_orthonormalize(np.column_stack([X, Y]), g)
    except ValueError:
        raise ValueError("plane vectors are linearly dependent") from None
    x, y = F[:, 0], F[:, 1]
    return float(la.einsum("ijkl,i,j,k,lm,m->", la.as_float(R), x, y, y, g, x))


def ricci(R: np.ndarray) -> np.ndarray:
    """Ric(Y, Z) = tr(X -> R(X, Y) Z)."""
    return la.einsum("ijki->jk", R)


def scalar(Ric: np.ndarray, gram) -> object:
    return la.einsum("jk,jk->", la.inverse(np.asarray(gram)), Ric)


@dataclass
class BianchiCheck:
    bianchi: bool
    pair_skew: bool
    jacobi_m: bool
    bianchi_residual: float
    pair_skew_residual: float
    jacobi_residual: float

    @property
    def equivalence_holds(self) -> bool:
        return self.bianchi == self.jacobi_m


def bianchi_check(R0: np.ndarray, alg: MAlgebra, gram, tol: float = DEFAULT_TOL) -> BianchiCheck:
    """First Bianchi identity and (Z, W) skewness of R0, next to the Jacobi identity of [.,.]_m."""
    exact = la.is_exact(R0) and alg.exact and la.is_exact(gram)
    cyc = R0 + R0.transpose(1, 2, 0, 3) + R0.transpose(2, 0, 1, 3)
    low = la.einsum("ijkl,lw->ijkw", R0, gram)
    jac = _jacobiator(alg.bracket_m)
    scale = alg.scale
    rb, rs, rj = la.max_abs(cyc), la.max_abs(low + low.transpose(0, 1, 3, 2)), la.max_abs(jac)
    t = tol * scale * scale
    return BianchiCheck(
        la.within(rb, t, exact), la.within(rs, t * la.max_abs(gram), exact), la.within(rj, t, exact), rb, rs, rj
    )


def curvature_report(spec: SpaceSpec, alpha=None, tol: float = DEFAULT_TOL) -> CurvatureReport:
    alg = spec.algebra
    if alpha is None:
        alpha = koszul_product(alg.bracket_m, spec.gram)
    R = curvature(alg, alpha)
    R0 = canonical_curvature(alg)
    Rd = R - R0
    Ric, Ric0 = ricci(R), ricci(R0)
    Ricd = Ric - Ric0
    s, s0 = scalar(Ric, spec.gram), scalar(Ric0, spec.gram)
    b = bianchi_check(R0, alg, spec.gram, tol)
    sym = la.within(la.max_abs(Ricd - Ricd.T), tol * alg.scale**2, la.is_exact(Ricd))
    return CurvatureReport(R, R0, Rd, Ric, Ric0, Ricd, s, s0, s - s0, b, sym)


def difference_curvature(alg: MAlgebra, gram) -> np.ndarray:
    """R^d = R - R^0 for the Levi-Civita product of ``gram``."""
    alg = alg.to_float()
    alpha = koszul_product(alg.bracket_m, la.as_float(gram))
    return curvature(alg, alpha) - canonical_curvature(alg)


def frame_curvature(Rd: np.ndarray, decomp: SpectralDecomp) -> np.ndarray:
    """Rf[a,b,c,d] = <R(E_a,E_b)E_c, E_d> over the decomposition frame."""
    E = decomp.frame
    T = la.as_float(Rd) @ (decomp.gram @ E)
    T = np.tensordot(E, T, axes=([0], [2]))  # c,i,j,d
    T = np.tensordot(E, T, axes=([0], [2]))  # b,c,i,d
    T = np.tensordot(E, T, axes=([0], [2]))  # a,b,c,d
    return T


# --- the K^d eigen-formula ------------------------------------------------------


def _require_codazzi_decomp(alg, gram, decomp, tol):
    ok, violations = check_compatibility(alg, gram, decomp, tol)
    if not ok:
        raise CompatibilityError(violations)


def sec_d_eigenformula(alg: MAlgebra, gram, decomp: SpectralDecomp, X, Y, i: int, j: int) -> float:
    """2/(l_i-l_j)^2 sum_{k != j} (l_i-l_k)(l_j-l_k) |[X_i, Y_j]_k|^2 for X in m_i, Y in m_j."""
    if i == j:
        raise ValueError("the K^d eigen-formula needs i != j")
    alg = alg.to_float()
    g = decomp.gram
    v = alg.bracket(np.asarray(X, dtype=float), np.asarray(Y, dtype=float))
    li, lj = decomp.lambdas[i], decomp.lambdas[j]
    total = 0.0
    for k, B in enumerate(decomp.blocks):
        if k == j:
            continue
        comp = B.T @ g @ v
        total += (li - decomp.lambdas[k]) * (lj - decomp.lambdas[k]) * float(comp @ comp)
    return 2.0 * total / (li - lj) ** 2


def _sec_d_terms(alg: MAlgebra, decomp: SpectralDecomp) -> np.ndarray:
    """terms[a,b,c] = 2 (l_a-l_c)(l_b-l_c)/(l_a-l_b)^2 <[E_a,E_b],E_c>^2 on mixed pairs, 0 elsewhere."""
    Ct = frame_brackets(alg, decomp)
    L = decomp.frame_lambdas
    la_a, la_b, la_c = L[:, None, None], L[None, :, None], L[None, None, :]
    mixed = (decomp.labels[:, None] != decomp.labels[None, :])[:, :, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = 2.0 * (la_a - la_c) * (la_b - la_c) / (la_a - la_b) ** 2 * Ct**2
    return np.where(mixed, terms, 0.0)


def sec_d_table(alg: MAlgebra, decomp: SpectralDecomp) -> np.ndarray:
    """Eigen-formula values for every frame pair from distinct blocks (NaN elsewhere)."""
    mixed = decomp.labels[:, None] != decomp.labels[None, :]
    return np.where(mixed, _sec_d_terms(alg, decomp).sum(axis=2), np.nan)


def sec_d_residual(alg: MAlgebra, decomp: SpectralDecomp, Rd: np.ndarray) -> float:
    """Eigen-formula against <R^d(E_a,E_b)E_b,E_a> on mixed frame pairs, relative to the largest term."""
    terms = _sec_d_terms(alg, decomp)
    table = terms.sum(axis=2)
    Rf = frame_curvature(Rd, decomp)
    direct = np.einsum("abba->ab", Rf)
    mixed = decomp.labels[:, None] != decomp.labels[None, :]
    if not mixed.any():
        return 0.0
    return relative_residual(np.where(mixed, table - direct, 0.0), terms)


# --- K^d sign witnesses -------------------------------------------------------------


@dataclass
class Witness:
    X: np.ndarray
    Y: np.ndarray
    value: float
    structured: bool


@dataclass
class KdSearch:
    parallel: bool
    positive: Witness | None = None
    negative: Witness | None = None
    rho: int | None = None
    mu_nu: tuple | None = None

    @property
    def found_both(self) -> bool:
        return self.positive is not None and self.negative is not None


def _distinct_triple_nonzero(alg, decomp, tol) -> bool:
    Ct = frame_brackets(alg, decomp)
    lab = decomp.labels
    d = (lab[:, None, None] != lab[None, :, None]) & (lab[None, :, None] != lab[None, None, :])
    d &= lab[:, None, None] != lab[None, None, :]
    return bool(d.any() and np.abs(np.where(d, Ct, 0.0)).max() > tol * alg.scale * 10)


def kd_sign_search(alg: MAlgebra, gram, decomp: SpectralDecomp, tol: float = DEFAULT_TOL) -> KdSearch:
    """Planes on which K^d is strictly positive and strictly negative, for nonparallel A.

    The structured candidates come first: the smallest rho with m_1+..+m_rho
    not a subalgebra gives the positive plane, and the widest pair mu < nu
    with m_mu + m_nu not a subalgebra gives the negative one. An exhaustive
    scan of frame pairs is the fallback. Every value is re-evaluated with
    :func:`sectional`.
    """
    alg = alg.to_float()
    _require_codazzi_decomp(alg, gram, decomp, tol)
    if not _distinct_triple_nonzero(alg, decomp, tol):
        return KdSearch(parallel=True)
    Rd = difference_curvature(alg, gram)
    Rf = frame_curvature(Rd, decomp)
    K = la.einsum("abba->ab", Rf)
    lab = decomp.labels
    E = decomp.frame
    margin = 10 * tol * max(1.0, alg.scale**2)
    out = KdSearch(parallel=False)
    r = decomp.r
    sub_tol = max(tol, 1e-8)

    def witness(a, b, structured):
        val = sectional(Rd, gram, E[:, a], E[:, b])
        return Witness(E[:, a].copy(), E[:, b].copy(), val, structured)

    for rho in range(2, r):
        if not is_subalgebra(alg, np.hstack(decomp.blocks[:rho]), sub_tol):
            out.rho = rho
            cand = [(a, b) for a in np.flatnonzero(lab < rho - 1) for b in np.flatnonzero(lab == rho - 1)]
            if cand:
                a, b = max(cand, key=lambda p: K[p])
                w = witness(a, b, True)
                if w.value > margin:
                    out.positive = w
            break
    pairs = [(mu, nu) for mu in range(r) for nu in range(mu + 1, r)]
    bad = [p for p in pairs if not is_subalgebra(alg, np.hstack([decomp.blocks[p[0]], decomp.blocks[p[1]]]), sub_tol)]
    if bad:
        mu, nu = max(bad, key=lambda p: (p[1] - p[0], -p[0]))
        out.mu_nu = (mu + 1, nu + 1)
        cand = [(a, b) for a in np.flatnonzero(lab == mu) for b in np.flatnonzero(lab == nu)]
        a, b = min(cand, key=lambda p: K[p])
        w = witness(a, b, True)
        if w.value < -margin:
            out.negative = w
    mixed = np.argwhere(lab[:, None] != lab[None, :])
    if out.positive is None and len(mixed):
        a, b = max(map(tuple, mixed), key=lambda p: K[p])
        w = witness(a, b, False)
        if w.value > margin:
            out.positive = w
    if out.negative is None and len(mixed):
        a, b = min(map(tuple, mixed), key=lambda p: K[p])
        w = witness(a, b, False)
        if w.value < -margin:
            out.negative = w
    return out


# --- naturally reductive spaces ----------------------------------------------------------


@dataclass
class NaturallyReductive:
    holds: bool
    defect: float
    kd_formula_residual: float | None = None
    kd_min: float | None = None


def naturally_reductive_check(spec: SpaceSpec, tol: float = DEFAULT_TOL, planes: int = 8, seed: int = 0):
    """Test <[X,Y]_m,Z> + <Y,[X,Z]_m> = 0 and, if it holds, K^d = |[X,Y]_m|^2 / 4 >= 0."""
    alg = spec.algebra
    low = la.einsum("ijk,kl->ijl", alg.bracket_m, spec.gram)
    defect = la.max_abs(low + low.transpose(0, 2, 1))
    exact = spec.exact
    holds = la.within(defect, tol * alg.scale * max(1.0, la.max_abs(spec.gram)), exact)
    if not holds:
        return NaturallyReductive(False, defect)
    falg = alg.to_float()
    g = la.as_float(spec.gram)
    Rd = difference_curvature(falg, g)
    n = spec.dim_m
    F = np.linalg.inv(np.linalg.cholesky(g)).T  # gram-orthonormal columns
    rng = np.random.default_rng(seed)
    pairs = [(F[:, a], F[:, b]) for a in range(n) for b in range(a + 1, n)]
    pairs += [(rng.standard_normal(n), rng.standard_normal(n)) for _ in range(planes if n > 1 else 0)]
    worst, kmin = 0.0, np.inf
    for X, Y in pairs:
        Q = la.gram_orthonormalize(np.column_stack([X, Y]), g)
        x, y = Q[:, 0], Q[:, 1]
        kd = sectional(Rd, g, x, y)
        v = falg.bracket(x, y)
        worst = max(worst, abs(kd - (v @ g @ v) / 4.0))
        kmin = min(kmin, kd)
    return NaturallyReductive(True, defect, worst, float(kmin) if pairs else 0.0)


# --- Ricci on eigenspaces ------------------------------------------------------------------


def restricted_ricci(alg: MAlgebra, gram, decomp: SpectralDecomp, i: int, Rd: np.ndarray | None = None, Rf=None):
    """Ric^d_i on block ``i`` (matrix in the block basis), s^d_i and the block-preservation defect."""
    if not 0 <= i < decomp.r:
        raise IndexError(f"block index {i} out of range")
    if Rf is None:
        Rf = frame_curvature(difference_curvature(alg, gram) if Rd is None else Rd, decomp)
    idx = np.flatnonzero(decomp.labels == i)
    out_idx = np.flatnonzero(decomp.labels != i)
    leak = la.max_abs(Rf[np.ix_(idx, idx, idx, out_idx)]) if out_idx.size else 0.0
    ric_i = np.einsum("abca->bc", Rf[np.ix_(idx, idx, idx, idx)])
    return ric_i, float(np.trace(ric_i)), leak


@dataclass
class RicciChecks:
    cyclic_residual: float
    inequality_margins: dict  # block -> min(Ric^d_j(Y) - Ric^d(Y)) over frame vectors
    inequality_holds: bool
    scalar_sum_residual: float
    first_form_residual: float
    estimate_form_residual: float
    restricted_leak: float
    s_blocks: list = field(default_factory=list)
    sd: float = 0.0

    def passed(self, tol: float) -> bool:
        return (
            self.inequality_holds
            and max(
                self.cyclic_residual,
                self.scalar_sum_residual,
                self.first_form_residual,
                self.estimate_form_residual,
            )
            <= tol
        )


def ricci_s_checks(alg: MAlgebra, gram, decomp: SpectralDecomp, tol: float = DEFAULT_TOL) -> RicciChecks:
    alg = alg.to_float()
    g = la.as_float(gram)
    _require_codazzi_decomp(alg, g, decomp, tol)
    Ct = frame_brackets(alg, decomp)
    L = decomp.frame_lambdas
    lab = decomp.labels
    Rd = difference_curvature(alg, g)
    Rf = frame_curvature(Rd, decomp)
    E = decomp.frame
    Ricd = ricci(Rd)
    ric_frame = la.einsum("ia,ij,jb->ab", E, Ricd, E)
    li, lj, lk = L[:, None, None], L[None, :, None], L[None, None, :]
    distinct = (lab[:, None, None] != lab[None, :, None]) & (lab[None, :, None] != lab[None, None, :])
    distinct &= lab[:, None, None] != lab[None, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        cyc = (
            (li - lk) * (lj - lk) / (li - lj) ** 2 * Ct**2
            + (lj - li) * (lk - li) / (lj - lk) ** 2 * Ct.transpose(2, 0, 1) ** 2
            + (lk - lj) * (li - lj) / (lk - li) ** 2 * Ct.transpose(1, 2, 0) ** 2
        )
        # Ct.transpose(2,0,1)[a,b,c] = Ct[b,c,a]; Ct.transpose(1,2,0)[a,b,c] = Ct[c,a,b]
        ref = np.where(distinct, (li - lk) * (lj - lk) / (li - lj) ** 2 * Ct**2, 0.0)
    cyclic = relative_residual(np.where(distinct, cyc, 0.0), ref)

    restricted = [restricted_ricci(alg, g, decomp, i, Rf=Rf) for i in range(decomp.r)]
    s_blocks = [s for _, s, _ in restricted]
    leak = max(lk_ for _, _, lk_ in restricted)
    diag_restricted = np.zeros(len(L))
    for i, (ric_i, _, _) in enumerate(restricted):
        diag_restricted[lab == i] = np.diag(ric_i)
    direct = np.diag(ric_frame)

    first = np.zeros(len(L))
    estimate = np.zeros(len(L))
    ref_first = ref_est = 0.0
    for c in range(len(L)):
        j = lab[c]
        lam_j = L[c]
        others = np.flatnonzero(lab != j)
        with np.errstate(divide="ignore", invalid="ignore"):
            A = L[others][:, None]
            D = L[others][None, :]
            coef_first = (A - D) * (lam_j - D) / (A - lam_j) ** 2
            block = Ct[np.ix_(others, [c], others)][:, 0, :] ** 2  # <[E_a, Y], E_d>^2
            tf = 2.0 * coef_first * block
            first[c] = diag_restricted[c] + np.sum(tf)
            same = lab[others][:, None] == lab[others][None, :]
            coef_est = np.where(same, 0.0, (D - lam_j) * (A - lam_j) / (D - A) ** 2)
            # <[E_d, E_a], Y>^2 indexed [a, d]
            block2 = Ct[np.ix_(others, others, [c])][:, :, 0].T ** 2
            te = np.where(same, 0.0, coef_est * block2)
            estimate[c] = diag_restricted[c] - np.sum(te)
        ref_first = max(ref_first, la.max_abs(tf))
        ref_est = max(ref_est, la.max_abs(te))

    margins = {}
    ok = True
    thr = tol * max(1.0, la.max_abs(Ct)) ** 2 * max(1.0, decomp.spread)
    for j in sorted({0, decomp.r - 1}):
        idx = np.flatnonzero(lab == j)
        m = float(np.min(diag_restricted[idx] - direct[idx]))
        margins[j] = m
        ok = ok and m >= -thr
    sd = float(la.einsum("jk,jk->", np.linalg.inv(g), Ricd))
    return RicciChecks(
        cyclic_residual=cyclic,
        inequality_margins=margins,
        inequality_holds=ok,
        scalar_sum_residual=abs(sum(s_blocks) - sd),
        first_form_residual=relative_residual(first - direct, [ref_first], diag_restricted),
        estimate_form_residual=relative_residual(estimate - direct, [ref_est], diag_restricted),
        restricted_leak=leak,
        s_blocks=s_blocks,
        sd=sd,
    )


@dataclass
class CorollaryCheck:
    status: str  # "skipped" | "hypotheses not met" | "holds" | "violated"
    detail: str = ""
    s_blocks: list = field(default_factory=list)


def ricci_corollary_check(spec: SpaceSpec, tol: float = DEFAULT_TOL) -> CorollaryCheck:
    """If Ric^d is a nonparallel Codazzi tensor with s^d_i >= 0 for i < r, then s^d_r != 0 and some eigenspace is non-Abelian."""
    fspec = spec.to_float()
    alg = fspec.algebra
    g = fspec.gram
    alpha = koszul_product(alg.bracket_m, g)
    Ricd = ricci(curvature(alg, alpha) - canonical_curvature(alg))
    # curvature is quadratic in the data; below this Ric^d is roundoff and its spectrum is noise
    curv_scale = max(1.0, la.max_abs(alpha) ** 2, alg.scale**2) * Ricd.shape[0]
    if la.max_abs(Ricd) <= tol * curv_scale * 10:
        return CorollaryCheck("hypotheses not met", "Ric^d vanishes, hence parallel")
    scale = max(1.0, la.max_abs(Ricd))
    if la.max_abs(Ricd - Ricd.T) > tol * scale * 10:
        return CorollaryCheck("skipped", "Ric^d is not symmetric")
    Ricd = 0.5 * (Ricd + Ricd.T)
    if codazzi_residual(Ricd, alpha) > tol * scale * max(1.0, la.max_abs(alpha)) * 10:
        return CorollaryCheck("hypotheses not met", "Ric^d is not Codazzi")
    invariant = max((la.max_abs(M.T @ Ricd + Ricd @ M) for M in alg.h_action), default=0.0)
    if invariant > tol * scale * 10:
        return CorollaryCheck("hypotheses not met", "Ric^d is not ad(h)-invariant")
    try:
        cls = classify(Ricd, fspec, alpha, tol)
    except NotCodazziError:
        return CorollaryCheck("hypotheses not met", "Ric^d is not Codazzi")
    if cls.parallel:
        return CorollaryCheck("hypotheses not met", "Ric^d is parallel")
    decomp = cls.decomp
    Rd = curvature(alg, alpha) - canonical_curvature(alg)
    Rf = frame_curvature(Rd, decomp)
    s_blocks = [restricted_ricci(alg, g, decomp, i, Rf=Rf)[1] for i in range(decomp.r)]
    thr = tol * scale * 100
    if any(s < -thr for s in s_blocks[:-1]):
        return CorollaryCheck("hypotheses not met", "some s^d_i < 0 with i < r", s_blocks)
    nonzero = abs(s_blocks[-1]) > thr
    non_abelian = any(not is_abelian(alg, B, max(tol, 1e-8)) for B in decomp.blocks)
    if nonzero and non_abelian:
        return CorollaryCheck("holds", f"s^d_r = {s_blocks[-1]:.6g}", s_blocks)
    return CorollaryCheck("violated", f"s^d_r = {s_blocks[-1]:.3e}, non-Abelian block: {non_abelian}", s_blocks)
