"""Free Stein discrepancy, irregularity and dimension as truncated Gram problems.

All inner products run through an ``Embedding``: a factor F of the word Gram
matrix turns polynomials into vectors, tensors into vec(F C Fᵀ) and kernel
matrices into the concatenation of their entries, so HS projections become
ordinary least squares.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import linalg, optimize

from . import config
from .codec import polys_to_json
from .errors import ModelSpecError, NumericalDiagnostic, StructuralError
from .ncalg import (KernelMatrix, NCPoly, TensorPoly, Word, adjoint, diff_quotient, jacobian,
                    left_act, mai_kernel, right_act, trace_left, trace_right)
from .scalars import QQi
from .schemas import (AlphaReport, ConjugateVariableReport, ContinuityReport, DegreeScheme,
                      DiscrepancyReport, MaiGapReport, RadiusSweepReport, SigmaMode, SigmaReport,
                      SweepPoint)
from .trace import MatrixModel, TraceModel

logger = logging.getLogger(__name__)


def _map(fn, items, threads: Optional[int]):
    threads = config.default_threads() if threads is None else threads
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


class Embedding:
    def __init__(self, model: TraceModel, words: Iterable[Word], cutoff: float = config.EIGEN_CUTOFF):
        self.model = model
        self.words = sorted(set(words) | {model.system.unit_word()}, key=Word.sort_key)
        self.index = {w: k for k, w in enumerate(self.words)}
        self.factor = model.word_factor(self.words, cutoff)
        logger.debug("embedding %d words into %d coordinates", len(self.words), self.factor.shape[0])

    @classmethod
    def covering(cls, model: TraceModel, *objects, cutoff: float = config.EIGEN_CUTOFF) -> "Embedding":
        words: set[Word] = set()
        for obj in objects:
            if isinstance(obj, (list, tuple)):
                for item in obj:
                    words |= item.words()
            else:
                words |= obj.words()
        return cls(model, words, cutoff)

    @property
    def width(self) -> int:
        return self.factor.shape[0]

    def poly(self, p: NCPoly) -> np.ndarray:
        c = np.zeros(len(self.words), dtype=complex)
        for w, a in p.items():
            c[self.index[w]] += complex(a)
        return self.factor @ c

    def polys(self, P: Sequence[NCPoly]) -> np.ndarray:
        return np.concatenate([self.poly(p) for p in P])

    def tensor(self, u: TensorPoly) -> np.ndarray:
        size = len(self.words)
        C = np.zeros((size, size), dtype=complex)
        for (a, b), x in u.items():
            C[self.index[a], self.index[b]] += complex(x)
        return (self.factor @ C @ self.factor.T).ravel()

    def tensors(self, U: Sequence[TensorPoly]) -> np.ndarray:
        return np.concatenate([self.tensor(u) for u in U])

    def kernel(self, A: KernelMatrix) -> np.ndarray:
        return self.tensors(list(A.entries()))

    def identity(self, n: int) -> np.ndarray:
        return self.kernel(KernelMatrix.identity(self.model.system, n))


class GramSystem:
    """Least squares against the span of the columns of ``vectors``."""

    def __init__(self, vectors: np.ndarray, cutoff: float = config.EIGEN_CUTOFF):
        self.vectors = vectors
        self.gram = vectors.conj().T @ vectors
        if self.gram.size == 0:
            values, U = np.zeros(0), np.zeros((0, 0), dtype=complex)
        else:
            values, U = linalg.eigh(self.gram)
        top = max(values.max(initial=0.0), 0.0)
        if values.size and values.min() < -1e-9 * top:
            logger.warning("Gram matrix has eigenvalue %.3e against a top of %.3e", values.min(), top)
        keep = values > cutoff * top if top > 0 else np.zeros(values.shape, dtype=bool)
        self.rank = int(keep.sum())
        self.truncated = int(values.size - self.rank)
        self.condition = float(top / values[keep].min()) if self.rank else 1.0
        self._values = values[keep]
        self._u = U[:, keep]
        self.basis = vectors @ self._u / np.sqrt(self._values)
        if self.truncated:
            logger.info("Gram system: %d of %d directions truncated", self.truncated, values.size)

    def coordinates(self, y: np.ndarray) -> np.ndarray:
        return self.basis.conj().T @ y

    def project(self, y: np.ndarray) -> np.ndarray:
        return self.basis @ self.coordinates(y)

    def coefficients(self, y: np.ndarray) -> np.ndarray:
        """Minimum-norm x with vectors @ x equal to the projection of y."""
        return self._u @ ((self._u.conj().T @ (self.vectors.conj().T @ y)) / self._values)

    def diagnostics(self) -> dict:
        return {"gram_condition": self.condition, "rank": self.rank,
                "truncated_eigenvalues": self.truncated}


def _require_scalar_b(m: TraceModel, what: str) -> None:
    if not m.system.b.trivial:
        raise StructuralError(f"{what} uses the Mai kernel and is only available over B = ℂ")


def _pairs(v: np.ndarray) -> list[tuple[float, float]]:
    return [(float(z.real), float(z.imag)) for z in v]


def _coefficient(z: complex, tol: float = 1e-12) -> Optional[QQi]:
    z = complex(z)
    if abs(z) < tol:
        return None
    re = z.real if abs(z.real) >= tol else 0.0
    im = z.imag if abs(z.imag) >= tol else 0.0
    return QQi.from_complex(complex(re, im))


def _slot_tuple(system, i: int, p: NCPoly) -> tuple[NCPoly, ...]:
    zero = NCPoly.zero(system)
    return tuple(p if k == i else zero for k in range(system.n))


def jacobian_basis(m: TraceModel, scheme: DegreeScheme) -> list[KernelMatrix]:
    """Jacobians of every monomial placed in every slot, zero images dropped."""
    system = m.system
    out = []
    for i in range(system.n):
        for w in system.monomials(scheme.d_proj, min_degree=1):
            J = jacobian(_slot_tuple(system, i, NCPoly(system, {w: 1})))
            if not J.is_zero():
                out.append(J)
    logger.debug("jacobian basis: %d elements at d_proj=%d", len(out), scheme.d_proj)
    return out


def _range_system(m: TraceModel, scheme: DegreeScheme, extra: Sequence, cutoff: float,
                  threads: Optional[int]) -> tuple[Embedding, GramSystem]:
    basis = jacobian_basis(m, scheme)
    emb = Embedding.covering(m, basis, *extra)
    columns = _map(emb.kernel, basis, threads)
    return emb, GramSystem(np.column_stack(columns), cutoff)


def discrepancy(m: TraceModel, Xi: Sequence[NCPoly], scheme: DegreeScheme,
                cutoff: float = config.EIGEN_CUTOFF, threads: Optional[int] = None) -> DiscrepancyReport:
    """‖Π(A_Ξ − 𝟙)‖ over the truncated Jacobian range, with A_Ξ the Mai kernel."""
    _require_scalar_b(m, "discrepancy")
    Xi = tuple(Xi)
    if len(Xi) != m.n:
        raise StructuralError(f"Xi has length {len(Xi)}, the model has {m.n} generators")
    Xi = m.center(Xi)
    A = mai_kernel(Xi, m.generators())
    emb, gram = _range_system(m, scheme, [A], cutoff, threads)
    target = emb.kernel(A) - emb.identity(m.n)
    value = float(np.linalg.norm(gram.project(target)))
    logger.info("discrepancy %.6g at d_proj=%d (rank %d)", value, scheme.d_proj, gram.rank)
    return DiscrepancyReport(value=value, scheme=scheme, kernel_distance=float(np.linalg.norm(target)),
                             optimizer=_pairs(gram.coefficients(target)), xi=polys_to_json(Xi),
                             **gram.diagnostics())


def _xi_basis(m: TraceModel, d_xi: int) -> list[tuple[int, Word]]:
    # the Mai kernel kills constants, so Ξ only needs words of degree ≥ 1
    if d_xi < 1:
        return []
    return [(i, w) for w in m.system.monomials(d_xi, min_degree=1) for i in range(m.n)]


def _xi_from(m: TraceModel, labels: Sequence[tuple[int, Word]], y: np.ndarray) -> tuple[NCPoly, ...]:
    system = m.system
    terms: list[dict] = [dict() for _ in range(m.n)]
    for (i, w), c in zip(labels, y):
        q = _coefficient(c)
        if q is not None:
            terms[i][w] = q
    return m.center([NCPoly(system, t) for t in terms])


class _XiProblem:
    """Ξ ↦ Π(A_Ξ) − Π𝟙 in orthonormal range coordinates: W y − b."""

    def __init__(self, m: TraceModel, scheme: DegreeScheme, cutoff: float, threads: Optional[int]):
        _require_scalar_b(m, "irregularity")
        self.model = m
        self.labels = _xi_basis(m, scheme.d_xi)
        X = m.generators()
        system = m.system
        self.kernels = [mai_kernel(_slot_tuple(system, i, NCPoly(system, {w: 1})), X)
                        for i, w in self.labels]
        self.emb, self.gram = _range_system(m, scheme, self.kernels, cutoff, threads)
        columns = _map(lambda A: self.gram.coordinates(self.emb.kernel(A)), self.kernels, threads)
        self.W = np.column_stack(columns) if columns else np.zeros((self.gram.rank, 0), dtype=complex)
        self.b = self.gram.coordinates(self.emb.identity(m.n))

    def solve(self, columns: int) -> tuple[float, np.ndarray]:
        W = self.W[:, :columns]
        if columns == 0:
            return float(np.linalg.norm(self.b)), np.zeros(0, dtype=complex)
        y, *_ = linalg.lstsq(W, self.b, cond=config.EIGEN_CUTOFF)
        return float(np.linalg.norm(W @ y - self.b)), y


def irregularity_estimate(m: TraceModel, scheme: DegreeScheme, cutoff: float = config.EIGEN_CUTOFF,
                          threads: Optional[int] = None) -> SigmaReport:
    problem = _XiProblem(m, scheme, cutoff, threads)
    trail = []
    value, y = problem.solve(0)
    trail.append((0, value))
    for d in range(1, scheme.d_xi + 1):
        columns = sum(1 for _, w in problem.labels if w.degree <= d)
        value, y = problem.solve(columns)
        trail.append((d, value))
        logger.info("irregularity %.6g at d_xi=%d, d_proj=%d", value, d, scheme.d_proj)
    xi = _xi_from(m, problem.labels, y)
    return SigmaReport(n=m.n, sigma=m.n - value ** 2, irregularity=value, mode=SigmaMode.ESTIMATE,
                       trail=trail, scheme=scheme, xi=polys_to_json(xi), **problem.gram.diagnostics())


def irregularity_bounded(m: TraceModel, scheme: DegreeScheme, R: float,
                         cutoff: float = config.EIGEN_CUTOFF, tol: float = config.TRUST_REGION_TOL,
                         threads: Optional[int] = None) -> DiscrepancyReport:
    """The irregularity objective restricted to ‖Ξ‖₂ ≤ R, as a trust-region subproblem."""
    if R < 0:
        raise ModelSpecError("radius", "must be nonnegative")
    problem = _XiProblem(m, scheme, cutoff, threads)
    labels = problem.labels
    y = np.zeros(len(labels), dtype=complex)
    if labels and R > 0:
        # ‖Ξ‖² = yᴴ N y; whiten so the constraint becomes ‖z‖ ≤ R
        centered = [m.center(_slot_tuple(m.system, i, NCPoly(m.system, {w: 1}))) for i, w in labels]
        Z = np.column_stack([problem.emb.polys(P) for P in centered])
        values, U = linalg.eigh(Z.conj().T @ Z)
        keep = values > cutoff * max(values.max(initial=0.0), 0.0)
        T = U[:, keep] / np.sqrt(values[keep])
        H = problem.W @ T
        P, s, Vh = linalg.svd(H, full_matrices=False)
        live = s > cutoff * s.max(initial=0.0)
        P, s, Vh = P[:, live], s[live], Vh[live]
        beta = P.conj().T @ problem.b

        def coefficients(lam):
            return s * beta / (s ** 2 + lam)

        c = beta / s
        if np.linalg.norm(c) > R:
            upper = s.max() * np.linalg.norm(beta) / R
            eps = np.finfo(float).eps
            lam = optimize.brentq(lambda t: np.linalg.norm(coefficients(t)) - R, 0.0, upper,
                                  xtol=4 * eps * max(upper, 1.0), rtol=4 * eps)
            c = coefficients(lam)
            miss = abs(float(np.linalg.norm(c)) - R)
            if miss > tol * max(R, 1.0):
                y = T @ (Vh.conj().T @ c)
                raise NumericalDiagnostic(
                    f"trust-region root misses the radius {R:.4g} by {miss:.3e}",
                    partial={"radius": R, "multiplier": float(lam), "norm_miss": miss,
                             "value": float(np.linalg.norm(problem.W @ y - problem.b))})
            logger.debug("radius %.4g binding, multiplier %.6g", R, lam)
        y = T @ (Vh.conj().T @ c)
    value = float(np.linalg.norm(problem.W @ y - problem.b)) if labels else float(np.linalg.norm(problem.b))
    xi = _xi_from(m, labels, y)
    logger.info("R-bounded irregularity %.6g at R=%.4g", value, R)
    return DiscrepancyReport(value=value, scheme=scheme, radius=R, optimizer=_pairs(y),
                             xi=polys_to_json(xi), **problem.gram.diagnostics())


# Exact dimension for finite-dimensional models

def _spanning_words(m: MatrixModel, tol: float = 1e-9) -> list[Word]:
    """Greedy word basis of the algebra generated by the generators and B."""
    chosen: list[Word] = []
    Q = np.zeros((m.dimension, 0), dtype=complex)
    for degree in range(m.system.cap + 1):
        added = False
        for w in m.system.monomials(degree, min_degree=degree):
            v = m.word_vectors([w])[:, 0]
            r = v - Q @ (Q.conj().T @ v)
            norm = np.linalg.norm(r)
            if norm > tol * max(1.0, np.linalg.norm(v)):
                Q = np.column_stack([Q, r / norm])
                chosen.append(w)
                added = True
        if not added or Q.shape[1] == m.dimension:
            break
    logger.debug("algebra spanned by %d words", len(chosen))
    return chosen


def _split_blocks(m: MatrixModel, w: Word) -> list[tuple[int, np.ndarray]]:
    """Evaluated terms of ∂w as (letter, vec(a) vec(b)ᵀ)."""
    out = []
    for k, letter in enumerate(w.letters):
        ea, eb = m.word_vectors(list(w.split(k))).T
        out.append((letter, np.outer(ea, eb)))
    return out


def _relation_space(m: MatrixModel, d: int, multipliers: Sequence[tuple[np.ndarray, np.ndarray]],
                    cutoff: float) -> np.ndarray:
    system = m.system
    words = system.monomials(d + 1)
    relations = linalg.null_space(m.word_vectors(words), rcond=cutoff)
    n, size = system.n, m.dimension
    splits = [_split_blocks(m, w) for w in words]
    columns = []
    for rho in relations.T:
        blocks = [np.zeros((size, size), dtype=complex) for _ in range(n)]
        for coeff, terms in zip(rho, splits):
            if abs(coeff) < 1e-14:
                continue
            for j, T in terms:
                blocks[j] += coeff * T
        if not any(np.abs(B).max() > 1e-13 for B in blocks):
            continue
        for L, Rt in multipliers:
            acted = [L @ B @ Rt for B in blocks]
            for i in range(n):
                K = np.zeros((n, n, size, size), dtype=complex)
                for j in range(n):
                    K[i, j] = acted[j]
                columns.append(K.ravel())
    logger.debug("%d relations, %d saturated generators at d=%d", relations.shape[1], len(columns), d)
    if not columns:
        return np.zeros((n * n * size * size, 0), dtype=complex)
    return linalg.orth(np.column_stack(columns), rcond=cutoff)


def _identity_vector(m: MatrixModel) -> np.ndarray:
    n, size = m.system.n, m.dimension
    e = m.word_vectors([m.system.unit_word()])[:, 0]
    K = np.zeros((n, n, size, size), dtype=complex)
    for i in range(n):
        K[i, i] = np.outer(e, e)
    return K.ravel()


def sigma_exact_fd(m: MatrixModel, d: int, cutoff: float = config.NULLSPACE_CUTOFF) -> SigmaReport:
    """σ = n − ‖proj_{K_d} 𝟙‖² with K_d the saturated span of evaluated relation Jacobians.

    In a finite-dimensional model A lies in the domain of the adjoint exactly
    when it is orthogonal to ev𝒥P for every relation P, so the projection of 𝟙
    onto that span is Σ*(X:B)².
    """
    if not isinstance(m, MatrixModel):
        raise StructuralError("sigma_exact_fd needs a finite-dimensional MatrixModel")
    if d < 1:
        raise ModelSpecError("degree", "must be at least 1")
    m.system.check_degree(d + 1)
    words = _spanning_words(m)
    multipliers = [(m.left_multiplier(u), m.right_multiplier(v).T) for u in words for v in words]
    one = _identity_vector(m)
    trail = []
    irregularity, rank = 0.0, 0
    for k in range(1, d + 1):
        Q = _relation_space(m, k, multipliers, cutoff)
        rank = Q.shape[1]
        irregularity = math.sqrt(min(float(np.linalg.norm(Q.conj().T @ one) ** 2), float(m.n)))
        trail.append((k, m.n - irregularity ** 2))
        logger.info("exact sigma %.10g at d=%d (relation rank %d)", trail[-1][1], k, rank)
    return SigmaReport(n=m.n, sigma=m.n - irregularity ** 2, irregularity=irregularity,
                       mode=SigmaMode.EXACT_FD, trail=trail, rank=rank)


def sigma_exact_fd_free(models: Sequence[MatrixModel], d: int,
                        cutoff: float = config.NULLSPACE_CUTOFF) -> SigmaReport:
    """Free factors add: Σ*(X,Y)² = Σ*(X)² + Σ*(Y)² and σ(X,Y) = σ(X) + σ(Y)."""
    if not models:
        raise ModelSpecError("factors", "at least one factor is required")
    factors = [sigma_exact_fd(f, d, cutoff) for f in models]
    n = sum(f.n for f in factors)
    squared = sum(f.irregularity ** 2 for f in factors)
    trail = [(k, sum(f.trail[k - 1][1] for f in factors)) for k in range(1, d + 1)]
    irregularity = math.sqrt(squared)
    return SigmaReport(n=n, sigma=n - irregularity ** 2, irregularity=irregularity,
                       mode=SigmaMode.EXACT_FD_FREE, trail=trail, factors=factors)


# Checks

def _test_tuples(m: TraceModel, d: int) -> list[tuple[str, tuple[NCPoly, ...]]]:
    system = m.system
    out = []
    for i in range(system.n):
        for w in system.monomials(d):
            P = _slot_tuple(system, i, NCPoly(system, {w: 1}))
            out.append((f"slot {i + 1}: {P[i]!r}", P))
    return out


def kernel_residual(m: TraceModel, A: KernelMatrix, Xi: Sequence[NCPoly], d: int) -> tuple[float, str, int]:
    """Largest |⟨Ξ, evP⟩ − ⟨A, ev𝒥P⟩| over monomial tuples P of degree ≤ d."""
    Xi = tuple(Xi)
    tests = _test_tuples(m, d)
    jacobians = [jacobian(P) for _, P in tests]
    emb = Embedding.covering(m, [A], Xi, jacobians, *[P for _, P in tests])
    a, xi = emb.kernel(A), emb.polys(Xi)
    worst, label = 0.0, ""
    for (name, P), J in zip(tests, jacobians):
        gap = abs(np.vdot(emb.polys(P), xi) - np.vdot(emb.kernel(J), a))
        if gap > worst:
            worst, label = float(gap), name
    return worst, label, len(tests)


def conjugate_variable_check(m: TraceModel, Xi: Sequence[NCPoly], d: int) -> ConjugateVariableReport:
    """Residual of 𝟙 as a Stein kernel for Ξ, plus Φ* = ‖Ξ‖₂²."""
    Xi = tuple(Xi)
    residual, worst, tested = kernel_residual(m, KernelMatrix.identity(m.system), Xi, d)
    fisher = sum(m.inner_l2(x, x).real for x in Xi)
    return ConjugateVariableReport(residual=residual, fisher_info=fisher, worst=worst or None, tested=tested)


def adjoint_action(m: TraceModel, eta: Sequence[TensorPoly], p: NCPoly, q: NCPoly,
                   eta_adj: NCPoly) -> NCPoly:
    """∂*((p⊗q)#η) from a known value of ∂*(η).

    (p⊗q)#∂*η − Σ_j (1⊗τ)(p·[η_j # ∂_j(q*)*]) − Σ_j (τ⊗1)([η_j # ∂_j(p*)*]·q)
    """
    eta = tuple(eta)
    if len(eta) != m.n:
        raise StructuralError(f"eta has length {len(eta)}, expected {m.n}")
    tau = m.trace_word
    out = TensorPoly.elementary(p, q).sharp(eta_adj)
    p_star, q_star = p.adjoint(), q.adjoint()
    for j, eta_j in enumerate(eta):
        out = out - trace_right(left_act(p, eta_j.sharp(adjoint(diff_quotient(j, q_star)))), tau)
        out = out - trace_left(right_act(eta_j.sharp(adjoint(diff_quotient(j, p_star))), q), tau)
    return out


def adjoint_residual(m: TraceModel, eta: Sequence[TensorPoly], value: NCPoly, d: int) -> float:
    """Largest |⟨value, r⟩ − Σ_j ⟨η_j, ∂_j r⟩| over monomials r of degree ≤ d."""
    eta = tuple(eta)
    system = m.system
    tests = [NCPoly(system, {w: 1}) for w in system.monomials(d)]
    emb = Embedding.covering(m, [value], eta, tests,
                             [diff_quotient(j, r) for r in tests for j in range(system.n)])
    v, e = emb.poly(value), emb.tensors(eta)
    worst = 0.0
    for r in tests:
        grad = emb.tensors([diff_quotient(j, r) for j in range(system.n)])
        worst = max(worst, float(abs(np.vdot(emb.poly(r), v) - np.vdot(grad, e))))
    return worst


def continuity_check(m: TraceModel, Xi: Sequence[NCPoly], Xi2: Sequence[NCPoly], scheme: DegreeScheme,
                     cutoff: float = config.EIGEN_CUTOFF, slack: float = 1e-9) -> ContinuityReport:
    """|Σ*(X∣Ξ) − Σ*(X∣Ξ')| ≤ ‖Π(A_Ξ − A_Ξ')‖ ≤ ‖A_Ξ − A_Ξ'‖."""
    _require_scalar_b(m, "continuity_check")
    X = m.generators()
    A = mai_kernel(m.center(Xi), X)
    A2 = mai_kernel(m.center(Xi2), X)
    emb, gram = _range_system(m, scheme, [A, A2], cutoff, None)
    one = emb.identity(m.n)
    a, a2 = emb.kernel(A), emb.kernel(A2)
    d1 = np.linalg.norm(gram.project(a - one))
    d2 = np.linalg.norm(gram.project(a2 - one))
    projection_gap = float(np.linalg.norm(gram.project(a - a2)))
    kernel_gap = float(np.linalg.norm(a - a2))
    gap = float(abs(d1 - d2))
    return ContinuityReport(discrepancy_gap=gap, projection_gap=projection_gap, kernel_gap=kernel_gap,
                            holds=gap <= projection_gap + slack and projection_gap <= kernel_gap + slack)


def mai_gap(m: TraceModel, Xi: Sequence[NCPoly], scheme: DegreeScheme,
            cutoff: float = config.EIGEN_CUTOFF) -> MaiGapReport:
    report = discrepancy(m, Xi, scheme, cutoff)
    kernel_sq = report.kernel_distance ** 2
    return MaiGapReport(kernel_distance_sq=kernel_sq, discrepancy_sq=report.value ** 2,
                        gap=kernel_sq - report.value ** 2)


# Sweeps

class SweepQuantity(str, Enum):
    DISCREPANCY = "discrepancy"
    IRREGULARITY = "irregularity"
    SIGMA_EXACT = "sigma-exact"


def degree_sweep(m: TraceModel, quantity: SweepQuantity | str, degrees: Sequence[int],
                 Xi: Optional[Sequence[NCPoly]] = None, d_proj: Optional[int] = None,
                 d_xi: int = 1, cutoff: float = config.EIGEN_CUTOFF,
                 threads: Optional[int] = None) -> list[SweepPoint]:
    """One value per degree: d_proj for discrepancy, d_xi for irregularity, d for sigma-exact."""
    quantity = SweepQuantity(quantity)
    points = []
    for d in degrees:
        if quantity is SweepQuantity.DISCREPANCY:
            if Xi is None:
                raise ModelSpecError("xi", "a discrepancy sweep needs Xi")
            r = discrepancy(m, Xi, DegreeScheme(d_xi=d_xi, d_proj=d), cutoff, threads)
            points.append(SweepPoint(parameter=d, value=r.value, diagnostics=f"cond={r.gram_condition:.3e}"))
        elif quantity is SweepQuantity.IRREGULARITY:
            scheme = DegreeScheme(d_xi=d, d_proj=d_proj if d_proj is not None else d + 2)
            r = irregularity_estimate(m, scheme, cutoff, threads)
            points.append(SweepPoint(parameter=d, value=r.irregularity,
                                     diagnostics=f"sigma={r.sigma:.10g} cond={r.gram_condition:.3e}"))
        else:
            r = sigma_exact_fd(m, d)
            points.append(SweepPoint(parameter=d, value=r.sigma,
                                     diagnostics=f"irregularity={r.irregularity:.10g}"))
    return points


def convexity_violations(points: Sequence[tuple[float, float]], slack: float = config.CONVEXITY_SLACK) -> list[float]:
    """Parameters whose value lies above the chord of its neighbours."""
    out = []
    for (r0, v0), (r1, v1), (r2, v2) in zip(points, points[1:], points[2:]):
        t = (r1 - r0) / (r2 - r0)
        if v1 > (1 - t) * v0 + t * v2 + slack:
            out.append(r1)
    return out


def radius_sweep(m: TraceModel, scheme: DegreeScheme, radii: Sequence[float],
                 cutoff: float = config.EIGEN_CUTOFF, slack: float = config.CONVEXITY_SLACK,
                 threads: Optional[int] = None) -> RadiusSweepReport:
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ModelSpecError("radii", "must be strictly increasing")
    points = []
    for R in radii:
        r = irregularity_bounded(m, scheme, R, cutoff, threads=threads)
        points.append(SweepPoint(parameter=R, value=r.value, diagnostics=f"cond={r.gram_condition:.3e}"))
    violations = convexity_violations([(p.parameter, p.value) for p in points], slack)
    if violations:
        logger.warning("radius sweep not convex at R=%s", violations)
    return RadiusSweepReport(points=points, violations=violations, convex=not violations)


def alpha_estimate(sweep: Sequence[tuple[float, float]], floor: float = config.ALPHA_FLOOR) -> AlphaReport:
    """Slope of ln Σ*_R against ln R over the largest radii, clipped to [−∞, 0]."""
    usable = [(float(R), float(v)) for R, v in sweep if R > 0]
    if len(usable) < 3:
        raise ModelSpecError("sweep", "needs at least three points with R > 0")
    if any(b <= a for (a, _), (b, _) in zip(usable, usable[1:])):
        raise ModelSpecError("sweep", "radii must be strictly increasing")
    window = usable[-max(3, math.ceil(len(usable) / 2)):]
    floored = [R for R, v in window if v < floor]
    if floored:
        logger.warning("alpha: %d values floored at %.1e", len(floored), floor)
    if len(floored) == len(window):
        return AlphaReport(alpha=-math.inf, diverges=True, window=window, floored=floored)
    logs = np.log([[R, max(v, floor)] for R, v in window])
    slope = float(np.polyfit(logs[:, 0], logs[:, 1], 1)[0])
    return AlphaReport(alpha=min(slope, 0.0), window=window, floored=floored)
