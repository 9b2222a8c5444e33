"""Invariant Codazzi tensors on m: solving, decomposing, constructing, classifying."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from rgw import _linalg as la
from rgw.connections import covariant_differential
from rgw.core_algebra import DEFAULT_TOL, MAlgebra, SpaceSpec, is_ideal, require_valid

CLUSTER_TOL = 1e-7


class CompatibilityError(ValueError):
    """A decomposition violating the compatibility condition."""

    def __init__(self, violations: list):
        self.violations = violations
        worst = max(violations, key=lambda v: abs(v.residual))
        super().__init__(f"compatibility fails, e.g. on frame triple {worst.triple} (residual {worst.residual:.3e})")


class NotCodazziError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SpectralDecomp:
    """m = m_1 + ... + m_r into gram-orthonormal blocks with increasing eigenvalues."""

    lambdas: np.ndarray
    blocks: tuple
    gram: np.ndarray

    @property
    def r(self) -> int:
        return len(self.blocks)

    @property
    def dims(self) -> list[int]:
        return [b.shape[1] for b in self.blocks]

    @property
    def frame(self) -> np.ndarray:
        """All block bases side by side; a gram-orthonormal basis of m."""
        return np.hstack(self.blocks)

    @property
    def labels(self) -> np.ndarray:
        """Block index of each frame column."""
        return np.repeat(np.arange(self.r), self.dims)

    @property
    def frame_lambdas(self) -> np.ndarray:
        return self.lambdas[self.labels]

    @property
    def spread(self) -> float:
        return float(self.lambdas[-1] - self.lambdas[0]) if self.r else 0.0

    def projector(self, i: int) -> np.ndarray:
        B = self.blocks[i]
        return B @ B.T @ self.gram

    def form(self) -> np.ndarray:
        """The symmetric form sum_i lambda_i <.,.>|_{m_i x m_i}."""
        g = self.gram
        return sum(lam * (g @ B @ B.T @ g) for lam, B in zip(self.lambdas, self.blocks))

    @classmethod
    def from_blocks(cls, gram, blocks, lambdas=None, tol: float = 1e-9) -> "SpectralDecomp":
        """Build from arbitrary spanning blocks; each is gram-orthonormalised.

        Blocks are sorted by ``lambdas`` (default ``0, 1, 2, ...``), which must
        be distinct.
        """
        g = la.as_float(gram)
        blocks = [np.atleast_2d(la.as_float(b).T).T for b in blocks]
        n = g.shape[0]
        if lambdas is None:
            lambdas = np.arange(len(blocks), dtype=float)
        lambdas = la.as_float(lambdas)
        if len(lambdas) != len(blocks):
            raise ValueError("one eigenvalue per block required")
        if len(set(lambdas.tolist())) != len(lambdas):
            raise ValueError("eigenvalues must be mutually distinct")
        blocks = [la.gram_orthonormalize(b, g) for b in blocks]
        order = np.argsort(lambdas)
        blocks = [blocks[i] for i in order]
        frame = np.hstack(blocks)
        if frame.shape[1] != n:
            raise ValueError(f"blocks have total dimension {frame.shape[1]}, expected {n}")
        cross = la.max_abs(frame.T @ g @ frame - np.eye(n))
        if cross > tol * max(1.0, la.max_abs(g)) * 1e3:
            raise ValueError(f"blocks are not mutually orthogonal (defect {cross:.2e})")
        return cls(lambdas[order], tuple(blocks), g)


@dataclass
class Violation:
    triple: tuple  # frame indices (a, b, c)
    blocks: tuple  # block indices (i, j, k)
    residual: float


# --- the linear Codazzi system --------------------------------------------


def codazzi_defect(A: np.ndarray, prod: np.ndarray) -> np.ndarray:
    """alpha(X,A)(Y,Z) - alpha(Y,A)(X,Z) over basis triples."""
    D = covariant_differential(prod, A)
    return D - D.transpose(1, 0, 2)


def codazzi_residual(A: np.ndarray, prod: np.ndarray) -> float:
    return la.max_abs(codazzi_defect(A, prod))


def _pairing(S: np.ndarray, T: np.ndarray, ginv: np.ndarray):
    return np.trace(ginv @ S @ ginv @ T)


def _order_basis(forms: list, gram: np.ndarray) -> list:
    """Orthogonalise under tr(g^-1 S g^-1 T) with the gram direction first.

    Float forms are normalised; exact forms are left unnormalised.
    """
    if not forms:
        return []
    exact = la.is_exact(gram) and all(la.is_exact(f) for f in forms)
    g = gram if exact else la.as_float(gram)
    ginv = la.inverse(g)
    fs = forms if exact else [la.as_float(f) for f in forms]
    out = [g]
    for f in fs:
        w = f
        for q in out:
            w = w - (_pairing(q, w, ginv) / _pairing(q, q, ginv)) * q
        if exact:
            if la.max_abs(w) != 0:
                out.append(w)
        else:
            w2 = _pairing(w, w, ginv)
            if w2 > 1e-16 * _pairing(f, f, ginv) and np.sqrt(w2) > 1e-8 * np.sqrt(_pairing(f, f, ginv)):
                out.append(w)
    if len(out) != len(forms):
        # gram is not in the span: report the solver basis unchanged
        return list(forms)
    if not exact:
        out = [q / np.sqrt(_pairing(q, q, ginv)) for q in out]
        out = [0.5 * (q + q.T) for q in out]
    return out


def codazzi_solution_space(spec: SpaceSpec, alpha: np.ndarray, tol: float = DEFAULT_TOL) -> list[np.ndarray]:
    """Basis of the ad(h)-invariant symmetric forms A with alpha(X,A)(Y,Z) symmetric in X, Y."""
    require_valid(spec, tol)
    n = spec.dim_m
    exact = spec.exact and la.is_exact(alpha)
    if not exact:
        alpha = la.as_float(alpha)
    alg = spec.algebra
    h_action = alg.h_action if exact else la.as_float(alg.h_action)
    gens = spec.isotropy_generators if exact else [la.as_float(p) for p in spec.isotropy_generators]
    cols = []
    for a, b in la.sym_basis(n):
        E = la.sym_unit(a, b, n, exact)
        eqs = [(M.T @ E + E @ M).ravel() for M in h_action]
        eqs += [(P.T @ E @ P - E).ravel() for P in gens]
        eqs.append(codazzi_defect(E, alpha).ravel())
        cols.append(np.concatenate(eqs))
    null = la.nullspace(np.column_stack(cols))
    forms = [la.sym_from_vector(null[:, t], n) for t in range(null.shape[1])]
    return _order_basis(forms, spec.gram)


# --- spectral decomposition -------------------------------------------------


def spectral_decompose(A, gram, cluster_tol: float = CLUSTER_TOL) -> SpectralDecomp:
    """Eigenspaces of A relative to gram, merging eigenvalues closer than ``cluster_tol`` (relative)."""
    A = la.as_float(A)
    g = la.as_float(gram)
    try:
        L = np.linalg.cholesky(0.5 * (g + g.T))
    except np.linalg.LinAlgError:
        raise ValueError("gram is not positive-definite") from None
    Linv = np.linalg.inv(L)
    M = Linv @ (0.5 * (A + A.T)) @ Linv.T
    w, U = np.linalg.eigh(0.5 * (M + M.T))
    V = Linv.T @ U
    scale = max(float(np.abs(w).max()), float(w[-1] - w[0]))
    if scale == 0.0:
        scale = 1.0
    groups: list[list[int]] = [[0]]
    for t in range(1, len(w)):
        if w[t] - w[t - 1] <= cluster_tol * scale:
            groups[-1].append(t)
        else:
            groups.append([t])
    lambdas = np.array([w[grp].mean() for grp in groups])
    blocks = tuple(V[:, grp] for grp in groups)
    return SpectralDecomp(lambdas, blocks, g)


def frame_brackets(alg: MAlgebra, decomp: SpectralDecomp) -> np.ndarray:
    """Ct[a, b, c] = <[E_a, E_b]_m, E_c> over the decomposition frame (read-only, cached per bracket)."""
    b = la.as_float(alg.bracket_m)
    cache = decomp.__dict__.setdefault("_frame_brackets", {})
    key = b.tobytes()
    if key not in cache:
        E = decomp.frame
        br = np.einsum("ia,jb,ijk->abk", E, E, b)
        Ct = np.einsum("abk,kl,lc->abc", br, decomp.gram, E)
        Ct.setflags(write=False)
        cache[key] = Ct
    return cache[key]


def frame_product(prod: np.ndarray, decomp: SpectralDecomp) -> np.ndarray:
    E = decomp.frame
    p = la.einsum("ia,jb,ijk->abk", E, E, la.as_float(prod))
    return la.einsum("abk,kl,lc->abc", p, decomp.gram, E)


def _thresholds(Ct: np.ndarray, decomp: SpectralDecomp, tol: float) -> float:
    return tol * max(1.0, decomp.spread**2) * max(1.0, la.max_abs(Ct))


def compatibility_defect(alg: MAlgebra, decomp: SpectralDecomp) -> np.ndarray:
    """(l_i-l_k)^2 <[X_i,Y_j],Z_k> + (l_j-l_i)^2 <[X_i,Z_k],Y_j> over frame triples."""
    Ct = frame_brackets(alg, decomp)
    L = decomp.frame_lambdas
    la_i, la_j, la_k = L[:, None, None], L[None, :, None], L[None, None, :]
    return (la_i - la_k) ** 2 * Ct + (la_j - la_i) ** 2 * Ct.transpose(0, 2, 1)


def check_compatibility(alg: MAlgebra, gram, decomp: SpectralDecomp, tol: float = DEFAULT_TOL):
    """Return (holds, violations) for the compatibility condition on all frame triples."""
    Ct = frame_brackets(alg, decomp)
    res = compatibility_defect(alg, decomp)
    thr = _thresholds(Ct, decomp, tol)
    lab = decomp.labels
    bad = np.argwhere(np.abs(res) > thr)
    violations = [
        Violation(tuple(int(t) for t in idx), tuple(int(lab[t]) for t in idx), float(res[tuple(idx)]))
        for idx in bad
    ]
    return not violations, violations


def _require_compatible(alg, gram, decomp, tol):
    ok, violations = check_compatibility(alg, gram, decomp, tol)
    if not ok:
        raise CompatibilityError(violations)


def construct_codazzi(
    spec: SpaceSpec, blocks, lambdas, tol: float = DEFAULT_TOL
) -> np.ndarray:
    """A = sum_i lambda_i <.,.>|_{m_i x m_i} from compatible, invariant, orthogonal blocks."""
    decomp = SpectralDecomp.from_blocks(spec.gram, blocks, lambdas)
    alg = spec.algebra.to_float()
    for i, B in enumerate(decomp.blocks):
        for M in alg.h_action:
            if la.outside_residual(B, M @ B) > tol * max(1.0, la.max_abs(M)):
                raise ValueError(f"block {i} is not ad(h)-invariant")
    _require_compatible(alg, spec.gram, decomp, tol)
    A = decomp.form()
    return 0.5 * (A + A.T)


# --- classification ---------------------------------------------------------


@dataclass
class SolutionClass:
    form: np.ndarray
    decomp: SpectralDecomp
    parallel: bool
    essential: bool
    codazzi_residual: float
    nabla_residual: float
    triple_witness: tuple | None
    criteria_agree: bool
    ideal_blocks: list

    @property
    def r(self) -> int:
        return self.decomp.r


@dataclass
class CodazziClassification:
    solution_basis: list
    classes: list = field(default_factory=list)


def _scale_of(A) -> float:
    return max(1.0, la.max_abs(A))


def classify(
    A, spec: SpaceSpec, alpha, tol: float = DEFAULT_TOL, cluster_tol: float = CLUSTER_TOL
) -> SolutionClass:
    """Parallel / nonparallel and essential for a Codazzi solution ``A``.

    Parallelism is decided twice, from nabla A and from the mutually distinct
    block triple criterion; ``criteria_agree`` records whether they match.
    """
    A = la.as_float(A)
    alpha = la.as_float(alpha)
    alg = spec.algebra.to_float()
    g = la.as_float(spec.gram)
    res = codazzi_residual(A, alpha)
    base = tol * _scale_of(A) * _scale_of(alpha) * 10
    if res > base:
        raise NotCodazziError(f"Codazzi residual {res:.3e} exceeds {base:.1e}")
    decomp = spectral_decompose(A, g, cluster_tol)
    nabla = la.max_abs(covariant_differential(alpha, A))
    parallel_nabla = nabla <= base * max(1.0, decomp.spread)
    Ct = frame_brackets(alg, decomp)
    lab = decomp.labels
    distinct = (lab[:, None, None] != lab[None, :, None]) & (lab[None, :, None] != lab[None, None, :])
    distinct &= lab[:, None, None] != lab[None, None, :]
    masked = np.where(distinct, np.abs(Ct), 0.0)
    witness = None
    if masked.size and masked.max() > tol * alg.scale * 10:
        witness = tuple(int(t) for t in np.unravel_index(np.argmax(masked), masked.shape))
    parallel_triple = witness is None
    ideals = [i for i, B in enumerate(decomp.blocks) if is_ideal(alg, B, max(tol, 1e-8))]
    parallel = parallel_nabla and parallel_triple
    return SolutionClass(
        form=A,
        decomp=decomp,
        parallel=parallel,
        essential=(not parallel) and not ideals,
        codazzi_residual=res,
        nabla_residual=nabla,
        triple_witness=witness,
        criteria_agree=parallel_nabla == parallel_triple,
        ideal_blocks=ideals,
    )


def classify_solutions(spec: SpaceSpec, alpha, tol: float = DEFAULT_TOL) -> CodazziClassification:
    basis = codazzi_solution_space(spec, alpha, tol)
    return CodazziClassification(basis, [classify(A, spec, alpha, tol) for A in basis])


# --- consequences of compatibility ------------------------------------------


def relative_residual(diff, *terms) -> float:
    """max|diff| over the largest term of the identity, floored at 1.

    Identities carrying 1/(l_i - l_j)^2 amplify roundoff for close eigenvalues;
    measuring against the size of the terms keeps the test meaningful there.
    """
    ref = max([1.0] + [la.max_abs(t) for t in terms])
    return la.max_abs(diff) / ref


def _mixed_mask(decomp: SpectralDecomp) -> np.ndarray:
    lab = decomp.labels
    return lab[:, None] != lab[None, :]


def eigen_alpha(alg: MAlgebra, gram, decomp: SpectralDecomp, i: int, j: int, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Predicted alpha(E_{i,a}, E_{j,b}) = sum_k (l_i-l_k)/(l_i-l_j) [E_{i,a}, E_{j,b}]_k.

    Returns an array ``P[a, b, :]`` of m-coordinates.
    """
    if i == j:
        raise ValueError("the eigen-block formula needs i != j")
    alg = alg.to_float()
    _require_compatible(alg, gram, decomp, tol)
    Ct = frame_brackets(alg, decomp)
    lab = decomp.labels
    L = decomp.frame_lambdas
    ai, bj = np.flatnonzero(lab == i), np.flatnonzero(lab == j)
    li, lj = decomp.lambdas[i], decomp.lambdas[j]
    coef = (li - L) / (li - lj)
    frame_coords = Ct[np.ix_(ai, bj)] * coef[None, None, :]
    return la.einsum("abc,kc->abk", frame_coords, decomp.frame)


def eigen_alpha_residual(alg: MAlgebra, decomp: SpectralDecomp, alpha) -> float:
    """Relative gap between the eigen-block formula and ``alpha`` over mixed frame pairs."""
    Ct = frame_brackets(alg, decomp)
    Af = frame_product(alpha, decomp)
    L = decomp.frame_lambdas
    mixed = _mixed_mask(decomp)
    with np.errstate(divide="ignore", invalid="ignore"):
        coef = (L[:, None, None] - L[None, None, :]) / (L[:, None, None] - L[None, :, None])
        pred = np.where(mixed[:, :, None], coef * Ct, 0.0)
    diff = np.where(mixed[:, :, None], Af - pred, 0.0)
    return relative_residual(diff, pred)


def intermediate_residuals(alg: MAlgebra, decomp: SpectralDecomp) -> tuple[float, float]:
    """Backward-error residuals of the two i != j consequences of compatibility.

    (i)  <[X_i,Z_k],Y_j> = -(l_i-l_k)^2/(l_j-l_i)^2 <[X_i,Y_j],Z_k>
    (ii) <X_i,[Y_j,Z_k]> =  (l_j-l_k)^2/(l_j-l_i)^2 <[X_i,Y_j],Z_k>

    Each entry is divided by (1 + |coefficient|) times the bracket scale: the
    coefficient reaches 1/gap^2 for close eigenvalues and would otherwise
    amplify roundoff in numerically zero brackets past any fixed tolerance.
    """
    Ct = frame_brackets(alg, decomp)
    L = decomp.frame_lambdas
    li, lj, lk = L[:, None, None], L[None, :, None], L[None, None, :]
    mixed = _mixed_mask(decomp)[:, :, None]
    scale = max(1.0, la.max_abs(Ct))
    with np.errstate(divide="ignore", invalid="ignore"):
        c1 = np.where(mixed, (li - lk) ** 2 / (lj - li) ** 2, 0.0)
        c2 = np.where(mixed, (lj - lk) ** 2 / (lj - li) ** 2, 0.0)
    first = np.where(mixed, Ct.transpose(0, 2, 1) + c1 * Ct, 0.0)
    # Ct.transpose(2,0,1)[a,b,c] = Ct[b,c,a] = <[Y_b,Z_c],X_a>
    second = np.where(mixed, Ct.transpose(2, 0, 1) - c2 * Ct, 0.0)
    return (
        la.max_abs(first / ((1.0 + c1) * scale)),
        la.max_abs(second / ((1.0 + c2) * scale)),
    )


def _skew_rep(Ct: np.ndarray, decomp: SpectralDecomp, k: int, tol: float):
    lab = decomp.labels
    L = decomp.frame_lambdas
    perp = np.flatnonzero(lab != k)
    zs = np.flatnonzero(lab == k)
    W = np.diag((L[perp] - decomp.lambdas[k]) ** 2)
    spectra = []
    skew = 0.0
    worst_real = 0.0
    for z in zs:
        # column b holds the frame coordinates of [Z, E_b]
        M = Ct[z][np.ix_(perp, perp)].T
        skew = max(skew, la.max_abs(W @ M + M.T @ W))
        ev = np.linalg.eigvals(M) if perp.size else np.zeros(0)
        spectra.append(ev)
        if ev.size:
            worst_real = max(worst_real, float(np.abs(ev.real).max()))
    thr = _thresholds(Ct, decomp, tol)
    holds = skew <= thr and worst_real <= max(thr, 1e-8 * max(1.0, la.max_abs(Ct)))
    return holds, spectra, skew


def skew_representation_check(alg: MAlgebra, gram, decomp: SpectralDecomp, k: int, tol: float = DEFAULT_TOL):
    """Skew-adjointness of pi_perp ad(Z_k)|_perp for the modified inner product.

    Returns ``(holds, spectra, skew_residual)`` where ``spectra`` lists the
    eigenvalues of the operator for each basis vector of block ``k``.
    """
    if not 0 <= k < decomp.r:
        raise IndexError(f"block index {k} out of range")
    alg = alg.to_float()
    _require_compatible(alg, gram, decomp, tol)
    return _skew_rep(frame_brackets(alg, decomp), decomp, k, tol)


def skew_representation_all(alg: MAlgebra, gram, decomp: SpectralDecomp, tol: float = DEFAULT_TOL):
    """:func:`skew_representation_check` over every block: ``(all hold, worst skew residual)``."""
    alg = alg.to_float()
    _require_compatible(alg, gram, decomp, tol)
    Ct = frame_brackets(alg, decomp)
    results = [_skew_rep(Ct, decomp, k, tol) for k in range(decomp.r)]
    return all(h for h, _, _ in results), max((s for _, _, s in results), default=0.0)
