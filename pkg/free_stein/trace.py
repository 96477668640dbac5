"""Tracial states on concrete generators and the inner products they induce.

Every model evaluates τ on words. Inner products follow the GNS rules
⟨p, q⟩ = τ(q*p) and ⟨a⊗b, c⊗d⟩ = τ(c*a)·τ(bd*); the Hilbert–Schmidt pairing of
kernel matrices sums the entrywise tensor pairings.

``word_factor`` returns a matrix F whose columns embed the given words, with
FᴴF equal to their Gram matrix; the Stein layer does all of its linear algebra
in those coordinates.
"""
from __future__ import annotations

import functools
import logging
import threading
from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from . import config
from .errors import ModelSpecError, NumericalDiagnostic, StructuralError, UnknownLetter
from .ncalg import BAlgebra, GeneratorSystem, KernelMatrix, NCPoly, TensorPoly, Word
from .quadrature import Density, NodeSet
from .scalars import QQi

logger = logging.getLogger(__name__)


class TraceModel(ABC):
    def __init__(self, system: GeneratorSystem):
        self.system = system
        self._cache: dict[Word, complex] = {}
        self._lock = threading.Lock()

    @property
    def n(self) -> int:
        return self.system.n

    def generators(self) -> tuple[NCPoly, ...]:
        return NCPoly.generators(self.system)

    @abstractmethod
    def _evaluate(self, w: Word) -> complex:
        ...

    def trace_word(self, w: Word) -> complex:
        cached = self._cache.get(w)
        if cached is not None:
            return cached
        for letter in w.letters:
            self.system.check_letter(letter)
        for slot in w.slots:
            if not 0 <= slot < self.system.b.dim:
                raise UnknownLetter(f"b{slot + 1}", self.system.b.dim)
        self.system.check_degree(w.degree)
        value = complex(self._evaluate(w))
        with self._lock:
            self._cache.setdefault(w, value)
        return value

    def _own(self, x) -> None:
        if x.system != self.system:
            raise StructuralError("operand does not live over this model's generators")

    def trace(self, p: NCPoly) -> complex:
        self._own(p)
        return sum((complex(c) * self.trace_word(w) for w, c in p.items()), 0j)

    def word_inner(self, x: Word, y: Word) -> complex:
        """⟨x, y⟩ = τ(y*x)."""
        total = 0j
        for ys, c in self.system.star_word(y):
            for w, d in self.system.multiply_words(ys, x):
                total += complex(c * d) * self.trace_word(w)
        return total

    def inner_l2(self, p: NCPoly, q: NCPoly) -> complex:
        self._own(p)
        self._own(q)
        total = 0j
        for x, a in p.items():
            for y, b in q.items():
                total += complex(a) * complex(b).conjugate() * self.word_inner(x, y)
        return total

    def inner_tensor(self, u: TensorPoly, v: TensorPoly) -> complex:
        self._own(u)
        self._own(v)
        total = 0j
        for (a, b), x in u.items():
            for (c, d), y in v.items():
                # τ(bd*) = τ(d*b) by traciality
                total += (complex(x) * complex(y).conjugate()
                          * self.word_inner(a, c) * self.word_inner(b, d))
        return total

    def inner_hs(self, A: KernelMatrix, B: KernelMatrix) -> complex:
        if A.size != B.size:
            raise StructuralError(f"HS pairing of sizes {A.size} and {B.size}")
        return sum((self.inner_tensor(a, b) for a, b in zip(A.entries(), B.entries())), 0j)

    def gram(self, words: Sequence[Word]) -> np.ndarray:
        """G[r, s] = τ(w_r* w_s)."""
        size = len(words)
        G = np.zeros((size, size), dtype=complex)
        for r in range(size):
            for s in range(r, size):
                G[r, s] = self.word_inner(words[s], words[r])
                G[s, r] = np.conj(G[r, s])
        return G

    def word_factor(self, words: Sequence[Word], cutoff: float = config.EIGEN_CUTOFF) -> np.ndarray:
        G = self.gram(words)
        values, vectors = linalg.eigh(G)
        top = max(values.max(initial=0.0), 0.0)
        keep = values > cutoff * top
        logger.debug("word factor: %d words, rank %d", len(words), int(keep.sum()))
        return (vectors[:, keep] * np.sqrt(values[keep])).conj().T

    def center(self, P: Sequence[NCPoly]) -> tuple[NCPoly, ...]:
        """Remove the scalar component τ(p)·1 from every entry."""
        out = []
        for p in P:
            self._own(p)
            out.append(p - NCPoly.constant(self.system, QQi.from_complex(self.trace(p))))
        return tuple(out)


def _compress(V: np.ndarray) -> np.ndarray:
    if V.shape[0] <= V.shape[1]:
        return V
    _, s, vh = linalg.svd(V, full_matrices=False)
    keep = s > 1e-15 * max(s.max(initial=0.0), 1e-300)
    return s[keep, None] * vh[keep]


class MatrixModel(TraceModel):
    """⊕ (M_k_i(ℂ), λ_i tr_k_i) with generators given block by block.

    The embedding of a word stacks sqrt(λ_i/k_i)·vec(W_i) over the blocks, which
    reproduces the Gram matrix exactly.
    """

    def __init__(self, blocks: Sequence[tuple[int, float]], generators: Sequence[Sequence],
                 star: Optional[Sequence[int]] = None, b_elements: Optional[Sequence[Sequence]] = None,
                 cap: Optional[int] = None):
        self.sizes = [int(k) for k, _ in blocks]
        self.weights = [float(lam) for _, lam in blocks]
        if not self.sizes or any(k < 1 for k in self.sizes):
            raise ModelSpecError("blocks", "every block needs a positive size")
        if any(lam <= 0 for lam in self.weights):
            raise ModelSpecError("blocks", "weights must be positive")
        if abs(sum(self.weights) - 1.0) > config.MASS_TOL:
            raise ModelSpecError("blocks", f"weights sum to {sum(self.weights)!r}, not 1")
        self.matrices = [self._blocks_of(per_block, f"generators[{g}]")
                         for g, per_block in enumerate(generators)]
        if not self.matrices:
            raise ModelSpecError("generators", "at least one generator is required")
        star = tuple(range(len(self.matrices))) if star is None else tuple(star)
        for g, blocks_g in enumerate(self.matrices):
            if not 0 <= star[g] < len(self.matrices):
                raise ModelSpecError("star", f"pairing of generator {g + 1} out of range")
            for X, Y in zip(blocks_g, self.matrices[star[g]]):
                if np.abs(X.conj().T - Y).max(initial=0.0) > config.STAR_TOL:
                    raise ModelSpecError("generators", f"adjoint of generator {g + 1} is not generator {star[g] + 1}")
        if b_elements:
            self.b_matrices = [self._blocks_of(e, f"b_algebra[{k}]") for k, e in enumerate(b_elements)]
            b_algebra = _structure_constants(self.b_matrices)
        else:
            self.b_matrices = [[np.eye(k, dtype=complex) for k in self.sizes]]
            b_algebra = BAlgebra.scalars()
        super().__init__(GeneratorSystem(len(self.matrices), star, b_algebra, cap))

    @classmethod
    def diagonal(cls, values: Sequence[float], weights: Sequence[float], cap: Optional[int] = None):
        """Commutative model ℂ^k carrying one self-adjoint generator diag(values)."""
        blocks = [(1, w) for w in weights]
        return cls(blocks, [[np.array([[v]], dtype=complex) for v in values]], cap=cap)

    def _blocks_of(self, per_block, field: str) -> list[np.ndarray]:
        if len(per_block) != len(self.sizes):
            raise ModelSpecError(field, f"needs one matrix per block ({len(self.sizes)})")
        out = []
        for i, (m, k) in enumerate(zip(per_block, self.sizes)):
            arr = np.asarray(m, dtype=complex)
            if arr.shape != (k, k):
                raise ModelSpecError(f"{field}[{i}]", f"expected shape {(k, k)}, got {arr.shape}")
            out.append(arr)
        return out

    @property
    def dimension(self) -> int:
        return sum(k * k for k in self.sizes)

    def evaluate_word(self, w: Word) -> list[np.ndarray]:
        out = []
        for i in range(len(self.sizes)):
            M = self.b_matrices[w.slots[0]][i]
            for letter, slot in zip(w.letters, w.slots[1:]):
                M = M @ self.matrices[letter][i] @ self.b_matrices[slot][i]
            out.append(M)
        return out

    def evaluate(self, p: NCPoly) -> list[np.ndarray]:
        self._own(p)
        out = [np.zeros((k, k), dtype=complex) for k in self.sizes]
        for w, c in p.items():
            for i, M in enumerate(self.evaluate_word(w)):
                out[i] += complex(c) * M
        return out

    def _scales(self) -> list[float]:
        return [np.sqrt(lam / k) for lam, k in zip(self.weights, self.sizes)]

    def embed_blocks(self, blocks: Sequence[np.ndarray]) -> np.ndarray:
        return np.concatenate([s * M.ravel() for s, M in zip(self._scales(), blocks)])

    def word_vectors(self, words: Sequence[Word]) -> np.ndarray:
        if not words:
            return np.zeros((self.dimension, 0), dtype=complex)
        return np.column_stack([self.embed_blocks(self.evaluate_word(w)) for w in words])

    def word_factor(self, words, cutoff=config.EIGEN_CUTOFF):
        return self.word_vectors(words)

    def left_multiplier(self, w: Word) -> np.ndarray:
        """Matrix of x ↦ w·x in embedding coordinates."""
        return linalg.block_diag(*[np.kron(M, np.eye(k)) for M, k in zip(self.evaluate_word(w), self.sizes)])

    def right_multiplier(self, w: Word) -> np.ndarray:
        """Matrix of x ↦ x·w in embedding coordinates."""
        return linalg.block_diag(*[np.kron(np.eye(k), M.T) for M, k in zip(self.evaluate_word(w), self.sizes)])

    def _evaluate(self, w):
        return sum(lam / k * np.trace(M) for lam, k, M in zip(self.weights, self.sizes, self.evaluate_word(w)))


def _structure_constants(elements: list[list[np.ndarray]]) -> BAlgebra:
    """Exact structure constants of the span of ``elements``, which must be a unital *-algebra."""
    flat = np.column_stack([np.concatenate([M.ravel() for M in e]) for e in elements])
    if np.linalg.matrix_rank(flat) != len(elements):
        raise ModelSpecError("b_algebra", "elements must be linearly independent")
    unit = next((k for k, e in enumerate(elements)
                 if all(np.allclose(M, np.eye(M.shape[0])) for M in e)), None)
    if unit is None:
        raise ModelSpecError("b_algebra", "the identity must be one of the listed elements")

    def coordinates(blocks, what):
        target = np.concatenate([M.ravel() for M in blocks])
        coeffs, *_ = np.linalg.lstsq(flat, target, rcond=None)
        if np.abs(flat @ coeffs - target).max(initial=0.0) > 1e-9:
            raise ModelSpecError("b_algebra", f"span is not closed under {what}")
        return [QQi(Fraction(c.real).limit_denominator(10 ** 6), Fraction(c.imag).limit_denominator(10 ** 6))
                for c in coeffs]

    structure = [[coordinates([A @ B for A, B in zip(ei, ej)], "multiplication") for ej in elements]
                 for ei in elements]
    involution = [coordinates([A.conj().T for A in e], "adjoints") for e in elements]
    return BAlgebra(structure, involution, unit)


@functools.lru_cache(maxsize=None)
def noncrossing_pairings(letters: tuple[int, ...]) -> int:
    """Number of non-crossing pairings of the positions that only pair equal letters."""
    if not letters:
        return 1
    if len(letters) % 2:
        return 0
    first = letters[0]
    total = 0
    for j in range(1, len(letters), 2):
        if letters[j] == first:
            total += noncrossing_pairings(letters[1:j]) * noncrossing_pairings(letters[j + 1:])
    return total


class SemicircularModel(TraceModel):
    """A free family of standard semicircular generators."""

    def __init__(self, count: int, cap: Optional[int] = None):
        if count < 1:
            raise ModelSpecError("count", "must be at least 1")
        super().__init__(GeneratorSystem(count, cap=cap))

    def _evaluate(self, w):
        return noncrossing_pairings(w.letters)


class MeasureModel(TraceModel):
    """A single self-adjoint generator with distribution atoms + density."""

    def __init__(self, atoms: Sequence[tuple[float, float]] = (), density: Optional[Density] = None,
                 cap: Optional[int] = None, tol: float = config.QUADRATURE_TOL):
        self.atoms = [(float(t), float(m)) for t, m in atoms]
        if any(m <= 0 for _, m in self.atoms):
            raise ModelSpecError("atoms", "masses must be positive")
        if len({t for t, _ in self.atoms}) != len(self.atoms):
            raise ModelSpecError("atoms", "locations must be distinct")
        self.density = density
        total = sum(m for _, m in self.atoms) + (density.mass if density else 0.0)
        if abs(total - 1.0) > config.MASS_TOL:
            raise ModelSpecError("atoms", f"total mass is {total!r}, not 1")
        self.tol = tol
        self._nodes: Optional[NodeSet] = None
        super().__init__(GeneratorSystem(1, cap=cap))

    def node_set(self) -> NodeSet:
        if self._nodes is None:
            nodes = NodeSet(np.array([t for t, _ in self.atoms], dtype=float),
                            np.array([m for _, m in self.atoms], dtype=float))
            if self.density is not None:
                nodes = nodes + self.density.node_set(2 * self.system.cap, self.tol)
            self._nodes = nodes
        return self._nodes

    def atom_mass_squares(self) -> float:
        return sum(m * m for _, m in self.atoms)

    def _evaluate(self, w):
        nodes = self.node_set()
        return float(nodes.weights @ nodes.nodes ** w.degree)

    def word_vectors(self, words: Sequence[Word]) -> np.ndarray:
        nodes = self.node_set()
        root = np.sqrt(nodes.weights)
        degrees = np.array([w.degree for w in words], dtype=int)
        return (root[:, None] * nodes.nodes[:, None] ** degrees[None, :]).astype(complex)

    def word_factor(self, words, cutoff=config.EIGEN_CUTOFF):
        return _compress(self.word_vectors(words))


_Block = tuple  # (factor, ((letters, coefficient), ...), centered)


class FreeProductModel(TraceModel):
    """Free product of B = ℂ models; generators are the factors' generators in order."""

    def __init__(self, factors: Sequence[TraceModel], cap: Optional[int] = None):
        if len(factors) < 1:
            raise ModelSpecError("factors", "at least one factor is required")
        self.factors = list(factors)
        self._letter_map: list[tuple[int, int]] = []
        star: list[int] = []
        for f, model in enumerate(self.factors):
            if not model.system.b.trivial:
                raise StructuralError("free products are only formed over B = ℂ")
            offset = len(self._letter_map)
            star.extend(offset + s for s in model.system.star)
            self._letter_map.extend((f, i) for i in range(model.n))
        self._mixed: dict[tuple, complex] = {}
        super().__init__(GeneratorSystem(len(self._letter_map), tuple(star), cap=cap))

    def _evaluate(self, w):
        runs: list[tuple[int, list[int]]] = []
        for letter in w.letters:
            f, local = self._letter_map[letter]
            if runs and runs[-1][0] == f:
                runs[-1][1].append(local)
            else:
                runs.append((f, [local]))
        if not runs:
            return 1.0
        seq = tuple((f, ((tuple(local), 1 + 0j),), False) for f, local in runs)
        return self._mixed_trace(seq)

    def _factor_trace(self, f: int, poly) -> complex:
        model = self.factors[f]
        unit = model.system.b.unit
        return sum((c * model.trace_word(Word(letters, (unit,) * (len(letters) + 1)))
                    for letters, c in poly), 0j)

    def _mixed_trace(self, seq: tuple[_Block, ...]) -> complex:
        # Center the first uncentered block: a = å + τ(a)1. Alternating products
        # of centered blocks vanish; removing a block may fuse its neighbours.
        if not seq:
            return 1.0
        cached = self._mixed.get(seq)
        if cached is not None:
            return cached
        first = next((k for k, block in enumerate(seq) if not block[2]), None)
        if first is None:
            value = 0j
        elif len(seq) == 1:
            value = self._factor_trace(seq[0][0], seq[0][1])
        else:
            f, poly, _ = seq[first]
            alpha = self._factor_trace(f, poly)
            centered = (f, _poly_add(poly, (((), -alpha),)), True)
            value = self._mixed_trace(seq[:first] + (centered,) + seq[first + 1:])
            if alpha != 0:
                value += alpha * self._mixed_trace(_fuse(seq[:first], seq[first + 1:]))
        with self._lock:
            self._mixed[seq] = value
        return value


def _canonical(terms: dict) -> tuple:
    return tuple(sorted((k, c) for k, c in terms.items() if c != 0))


def _poly_add(p, q) -> tuple:
    out: dict = {}
    for letters, c in p + q:
        out[letters] = out.get(letters, 0j) + c
    return _canonical(out)


def _poly_mul(p, q) -> tuple:
    out: dict = {}
    for a, x in p:
        for b, y in q:
            out[a + b] = out.get(a + b, 0j) + x * y
    return _canonical(out)


def _fuse(left: tuple, right: tuple) -> tuple:
    if left and right and left[-1][0] == right[0][0]:
        merged = (left[-1][0], _poly_mul(left[-1][1], right[0][1]), False)
        return left[:-1] + (merged,) + right[1:]
    return left + right


# Functional aliases

def trace_word(m: TraceModel, w: Word) -> complex:
    return m.trace_word(w)


def inner_l2(m: TraceModel, p: NCPoly, q: NCPoly) -> complex:
    return m.inner_l2(p, q)


def inner_tensor(m: TraceModel, u: TensorPoly, v: TensorPoly) -> complex:
    return m.inner_tensor(u, v)


def inner_hs(m: TraceModel, A: KernelMatrix, B: KernelMatrix) -> complex:
    return m.inner_hs(A, B)


def free_product_trace(m: FreeProductModel, w: Word) -> complex:
    if not isinstance(m, FreeProductModel):
        raise StructuralError("free_product_trace needs a FreeProductModel")
    return m.trace_word(w)


def check_tracial(m: TraceModel, rng: np.random.Generator, samples: int = 20,
                  max_degree: int = 4, tol: float = 1e-10) -> float:
    """Largest |τ(uv) − τ(vu)| over random word pairs; raises past ``tol``."""
    system = m.system
    worst = 0.0
    for _ in range(samples):
        u, v = (_random_word(system, rng, max_degree) for _ in range(2))
        uv = sum((complex(c) * m.trace_word(w) for w, c in system.multiply_words(u, v)), 0j)
        vu = sum((complex(c) * m.trace_word(w) for w, c in system.multiply_words(v, u)), 0j)
        worst = max(worst, abs(uv - vu))
    if worst > tol:
        raise NumericalDiagnostic(f"trace property violated by {worst:.3e}")
    return worst


def _random_word(system: GeneratorSystem, rng: np.random.Generator, max_degree: int) -> Word:
    degree = int(rng.integers(0, max_degree + 1))
    letters = tuple(int(x) for x in rng.integers(0, system.n, size=degree))
    slots = tuple(int(x) for x in rng.integers(0, system.b.dim, size=degree + 1))
    return Word(letters, slots)
