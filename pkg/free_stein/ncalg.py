"""Exact noncommutative polynomial calculus over a coefficient algebra B.

Words alternate B-slots and letters, b0 t_i1 b1 ... t_id bd, with every slot
holding a single basis index of B. Products multiply the touching slots through
the structure constants, so every stored word is already canonical.

Letter indices are 0-based here; the text and JSON forms use t1..tn.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import Callable, Iterable, Iterator, Mapping, Optional, Sequence

from . import config
from .errors import DegreeCapExceeded, StructuralError, UnknownLetter
from .scalars import HALF, ONE, ZERO, QQi, Scalar

logger = logging.getLogger(__name__)

Expansion = tuple[tuple[int, QQi], ...]


def _accumulate(target: dict, key, coeff: QQi) -> None:
    total = target.get(key, ZERO) + coeff
    if total:
        target[key] = total
    else:
        target.pop(key, None)


class BAlgebra:
    """A finite-dimensional unital *-algebra given by structure constants.

    ``structure[i][j]`` holds the basis coefficients of b_i b_j and
    ``involution[i]`` those of b_i*. The involution extends conjugate-linearly.
    """

    def __init__(self, structure: Sequence[Sequence[Sequence[Scalar]]],
                 involution: Sequence[Sequence[Scalar]], unit: int):
        dim = len(structure)
        if dim == 0:
            raise StructuralError("B needs at least one basis element")
        if not 0 <= unit < dim:
            raise StructuralError(f"unit index {unit} outside a basis of size {dim}")
        self.dim = dim
        self.unit = unit
        self._products: dict[tuple[int, int], Expansion] = {}
        for i in range(dim):
            if len(structure[i]) != dim:
                raise StructuralError("structure constants must form a dim x dim table")
            for j in range(dim):
                coeffs = structure[i][j]
                if len(coeffs) != dim:
                    raise StructuralError(f"product b{i}*b{j} needs {dim} coefficients")
                self._products[i, j] = _sparse(coeffs)
        if len(involution) != dim:
            raise StructuralError("involution needs one row per basis element")
        self._stars = tuple(_sparse(row) for row in involution)
        self._check_axioms()

    @classmethod
    def scalars(cls) -> "BAlgebra":
        return cls([[[ONE]]], [[ONE]], 0)

    @property
    def trivial(self) -> bool:
        return self.dim == 1

    def product(self, i: int, j: int) -> Expansion:
        return self._products[i, j]

    def star(self, i: int) -> Expansion:
        return self._stars[i]

    def multiply(self, x: Mapping[int, QQi], y: Mapping[int, QQi]) -> dict[int, QQi]:
        out: dict[int, QQi] = {}
        for i, a in x.items():
            for j, b in y.items():
                for k, c in self._products[i, j]:
                    _accumulate(out, k, a * b * c)
        return out

    def adjoint(self, x: Mapping[int, QQi]) -> dict[int, QQi]:
        out: dict[int, QQi] = {}
        for i, a in x.items():
            for k, c in self._stars[i]:
                _accumulate(out, k, a.conjugate() * c)
        return out

    def _check_axioms(self) -> None:
        basis = [{i: ONE} for i in range(self.dim)]
        unit = basis[self.unit]
        for i, e in enumerate(basis):
            if self.multiply(unit, e) != e or self.multiply(e, unit) != e:
                raise StructuralError(f"b{self.unit} is not a unit for b{i}")
            if self.adjoint(self.adjoint(e)) != e:
                raise StructuralError(f"involution does not square to the identity on b{i}")
        for i, j in product(range(self.dim), repeat=2):
            ij = self.multiply(basis[i], basis[j])
            if self.adjoint(ij) != self.multiply(self.adjoint(basis[j]), self.adjoint(basis[i])):
                raise StructuralError(f"involution is not anti-multiplicative on b{i}, b{j}")
            for k in range(self.dim):
                left = self.multiply(ij, basis[k])
                right = self.multiply(basis[i], self.multiply(basis[j], basis[k]))
                if left != right:
                    raise StructuralError(f"structure constants not associative at b{i}, b{j}, b{k}")

    def _key(self):
        return (self.dim, self.unit, tuple(sorted(self._products.items())), self._stars)

    def __eq__(self, other):
        return isinstance(other, BAlgebra) and self._key() == other._key()

    def __hash__(self):
        return hash((self.dim, self.unit))


def _sparse(coeffs: Sequence[Scalar]) -> Expansion:
    return tuple((k, QQi.coerce(c)) for k, c in enumerate(coeffs) if QQi.coerce(c))


@dataclass(frozen=True)
class Word:
    letters: tuple[int, ...]
    slots: tuple[int, ...]

    def __post_init__(self):
        if len(self.slots) != len(self.letters) + 1:
            raise StructuralError("a word needs exactly one more B-slot than letters")

    @property
    def degree(self) -> int:
        return len(self.letters)

    def sort_key(self):
        return (len(self.letters), self.letters, self.slots)

    def split(self, k: int) -> tuple["Word", "Word"]:
        """Cut out the letter at position k."""
        return (Word(self.letters[:k], self.slots[:k + 1]),
                Word(self.letters[k + 1:], self.slots[k + 1:]))


@dataclass(frozen=True)
class GeneratorSystem:
    n: int
    star: Optional[tuple[int, ...]] = None
    b: BAlgebra = field(default_factory=BAlgebra.scalars)
    cap: Optional[int] = field(default=None, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise StructuralError("a generator system needs at least one indeterminate")
        star = tuple(range(self.n)) if self.star is None else tuple(self.star)
        if len(star) != self.n or any(not 0 <= s < self.n for s in star):
            raise StructuralError(f"star pairing {star} is not a map on {self.n} letters")
        if any(star[star[i]] != i for i in range(self.n)):
            raise StructuralError(f"star pairing {star} is not an involution")
        object.__setattr__(self, "star", star)
        if self.cap is None:
            object.__setattr__(self, "cap", config.degree_cap())

    # Words

    def unit_word(self) -> Word:
        return Word((), (self.b.unit,))

    def letter_word(self, i: int) -> Word:
        self.check_letter(i)
        return Word((i,), (self.b.unit, self.b.unit))

    def b_word(self, k: int) -> Word:
        if not 0 <= k < self.b.dim:
            raise UnknownLetter(f"b{k + 1}", self.b.dim)
        return Word((), (k,))

    def check_letter(self, i: int) -> None:
        if not 0 <= i < self.n:
            raise UnknownLetter(f"t{i + 1}", self.n)

    def check_degree(self, degree: int) -> None:
        if degree > self.cap:
            raise DegreeCapExceeded(degree, self.cap)

    def multiply_words(self, u: Word, v: Word) -> Expansion:
        self.check_degree(u.degree + v.degree)
        joined = self.b.product(u.slots[-1], v.slots[0])
        return tuple((Word(u.letters + v.letters, u.slots[:-1] + (k,) + v.slots[1:]), c)
                     for k, c in joined)

    def star_word(self, w: Word) -> Expansion:
        letters = tuple(self.star[i] for i in reversed(w.letters))
        choices = [self.b.star(s) for s in reversed(w.slots)]
        out: dict[Word, QQi] = {}
        for pick in product(*choices):
            coeff = ONE
            for _, c in pick:
                coeff = coeff * c
            _accumulate(out, Word(letters, tuple(k for k, _ in pick)), coeff)
        return tuple(out.items())

    def monomials(self, max_degree: int, min_degree: int = 0) -> list[Word]:
        """All words of degree in [min_degree, max_degree], degree-then-lexicographic."""
        self.check_degree(max_degree)
        words = []
        for d in range(min_degree, max_degree + 1):
            for letters in product(range(self.n), repeat=d):
                for slots in product(range(self.b.dim), repeat=d + 1):
                    words.append(Word(letters, slots))
        return words


def _same_system(a, b) -> None:
    if a.system != b.system:
        raise StructuralError("operands live over different generator systems")


class NCPoly:
    """A finite linear combination of words with exact coefficients."""

    __slots__ = ("system", "_terms")

    def __init__(self, system: GeneratorSystem, terms: Mapping[Word, Scalar] | Iterable = ()):
        clean: dict[Word, QQi] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for w, c in items:
            _accumulate(clean, w, QQi.coerce(c))
        self.system = system
        self._terms = clean

    @classmethod
    def zero(cls, system):
        return cls(system)

    @classmethod
    def one(cls, system):
        return cls(system, {system.unit_word(): ONE})

    @classmethod
    def constant(cls, system, c: Scalar):
        return cls(system, {system.unit_word(): c})

    @classmethod
    def variable(cls, system, i: int):
        return cls(system, {system.letter_word(i): ONE})

    @classmethod
    def b_element(cls, system, k: int):
        return cls(system, {system.b_word(k): ONE})

    @classmethod
    def generators(cls, system) -> tuple["NCPoly", ...]:
        return tuple(cls.variable(system, i) for i in range(system.n))

    def items(self) -> list[tuple[Word, QQi]]:
        return sorted(self._terms.items(), key=lambda item: item[0].sort_key())

    def words(self) -> set[Word]:
        return set(self._terms)

    def coefficient(self, w: Word) -> QQi:
        return self._terms.get(w, ZERO)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int:
        return max((w.degree for w in self._terms), default=0)

    def __add__(self, other):
        if not isinstance(other, NCPoly):
            other = NCPoly.constant(self.system, other)
        _same_system(self, other)
        out = dict(self._terms)
        for w, c in other._terms.items():
            _accumulate(out, w, c)
        return NCPoly(self.system, out)

    __radd__ = __add__

    def __neg__(self):
        return NCPoly(self.system, {w: -c for w, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, NCPoly):
            c = QQi.coerce(other)
            return NCPoly(self.system, {w: a * c for w, a in self._terms.items()})
        _same_system(self, other)
        out: dict[Word, QQi] = {}
        for u, a in self._terms.items():
            for v, b in other._terms.items():
                for w, c in self.system.multiply_words(u, v):
                    _accumulate(out, w, a * b * c)
        return NCPoly(self.system, out)

    def __rmul__(self, other):
        c = QQi.coerce(other)
        return NCPoly(self.system, {w: c * a for w, a in self._terms.items()})

    def adjoint(self) -> "NCPoly":
        out: dict[Word, QQi] = {}
        for w, a in self._terms.items():
            for v, c in self.system.star_word(w):
                _accumulate(out, v, a.conjugate() * c)
        return NCPoly(self.system, out)

    def __eq__(self, other):
        if not isinstance(other, NCPoly):
            return NotImplemented
        return self.system == other.system and self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        return f"NCPoly({format_poly(self)})"


class TensorPoly:
    """A finite combination of elementary tensors p ⊗ q° over pairs of words."""

    __slots__ = ("system", "_terms")

    def __init__(self, system: GeneratorSystem, terms: Mapping[tuple[Word, Word], Scalar] | Iterable = ()):
        clean: dict[tuple[Word, Word], QQi] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for key, c in items:
            _accumulate(clean, key, QQi.coerce(c))
        self.system = system
        self._terms = clean

    @classmethod
    def zero(cls, system):
        return cls(system)

    @classmethod
    def one(cls, system):
        u = system.unit_word()
        return cls(system, {(u, u): ONE})

    @classmethod
    def elementary(cls, p: NCPoly, q: NCPoly) -> "TensorPoly":
        _same_system(p, q)
        out: dict[tuple[Word, Word], QQi] = {}
        for u, a in p._terms.items():
            for v, b in q._terms.items():
                _accumulate(out, (u, v), a * b)
        return cls(p.system, out)

    def items(self) -> list[tuple[tuple[Word, Word], QQi]]:
        return sorted(self._terms.items(),
                      key=lambda item: (item[0][0].sort_key(), item[0][1].sort_key()))

    def words(self) -> set[Word]:
        out = set()
        for left, right in self._terms:
            out.add(left)
            out.add(right)
        return out

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int:
        return max((a.degree + b.degree for a, b in self._terms), default=0)

    def __add__(self, other):
        _same_system(self, other)
        out = dict(self._terms)
        for key, c in other._terms.items():
            _accumulate(out, key, c)
        return TensorPoly(self.system, out)

    def __neg__(self):
        return TensorPoly(self.system, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        c = QQi.coerce(other)
        return TensorPoly(self.system, {k: a * c for k, a in self._terms.items()})

    __rmul__ = __mul__

    def sharp(self, other):
        """(a⊗b) # c = acb and (a⊗b) # (c⊗d) = ac ⊗ db."""
        _same_system(self, other)
        system = self.system
        if isinstance(other, NCPoly):
            out: dict[Word, QQi] = {}
            for (a, b), x in self._terms.items():
                for c, y in other._terms.items():
                    for ac, z in system.multiply_words(a, c):
                        for acb, t in system.multiply_words(ac, b):
                            _accumulate(out, acb, x * y * z * t)
            return NCPoly(system, out)
        pairs: dict[tuple[Word, Word], QQi] = {}
        for (a, b), x in self._terms.items():
            for (c, d), y in other._terms.items():
                for ac, z in system.multiply_words(a, c):
                    for db, t in system.multiply_words(d, b):
                        _accumulate(pairs, (ac, db), x * y * z * t)
        return TensorPoly(system, pairs)

    def adjoint(self) -> "TensorPoly":
        """The involution of B<T> ⊗ B<T>°: (a⊗b)* = a*⊗b*; anti-multiplicative for #."""
        return self._starred(swap=False)

    def flip(self) -> "TensorPoly":
        """Leg-swapped adjoint (a⊗b)† = b*⊗a*, so that (U # c)* = U† # c*."""
        return self._starred(swap=True)

    def _starred(self, swap: bool) -> "TensorPoly":
        system = self.system
        out: dict[tuple[Word, Word], QQi] = {}
        for (a, b), x in self._terms.items():
            for sa, y in system.star_word(a):
                for sb, z in system.star_word(b):
                    key = (sb, sa) if swap else (sa, sb)
                    _accumulate(out, key, x.conjugate() * y * z)
        return TensorPoly(system, out)

    def __eq__(self, other):
        if not isinstance(other, TensorPoly):
            return NotImplemented
        return self.system == other.system and self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        return f"TensorPoly({format_tensor(self)})"


class KernelMatrix:
    """Square matrix of TensorPoly entries; entry (i, j) pairs with ∂_j p_i."""

    __slots__ = ("system", "size", "_entries")

    def __init__(self, system: GeneratorSystem, entries: Sequence[Sequence[TensorPoly]]):
        size = len(entries)
        if any(len(row) != size for row in entries):
            raise StructuralError("kernel matrices must be square")
        if any(entry.system != system for row in entries for entry in row):
            raise StructuralError("kernel entries live over different generator systems")
        self.system = system
        self.size = size
        self._entries = tuple(tuple(row) for row in entries)

    @classmethod
    def identity(cls, system, size: Optional[int] = None):
        size = system.n if size is None else size
        one, zero = TensorPoly.one(system), TensorPoly.zero(system)
        return cls(system, [[one if i == j else zero for j in range(size)] for i in range(size)])

    @classmethod
    def zero(cls, system, size: Optional[int] = None):
        size = system.n if size is None else size
        zero = TensorPoly.zero(system)
        return cls(system, [[zero] * size for _ in range(size)])

    def __getitem__(self, index: tuple[int, int]) -> TensorPoly:
        i, j = index
        return self._entries[i][j]

    def rows(self) -> tuple[tuple[TensorPoly, ...], ...]:
        return self._entries

    def entries(self) -> Iterator[TensorPoly]:
        for row in self._entries:
            yield from row

    def words(self) -> set[Word]:
        out = set()
        for entry in self.entries():
            out |= entry.words()
        return out

    def _zip(self, other, op):
        if not isinstance(other, KernelMatrix) or other.size != self.size:
            raise StructuralError("kernel matrices of different sizes")
        _same_system(self, other)
        return KernelMatrix(self.system, [[op(a, b) for a, b in zip(ra, rb)]
                                          for ra, rb in zip(self._entries, other._entries)])

    def __add__(self, other):
        return self._zip(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._zip(other, lambda a, b: a - b)

    def __neg__(self):
        return KernelMatrix(self.system, [[-a for a in row] for row in self._entries])

    def __mul__(self, other):
        return KernelMatrix(self.system, [[a * other for a in row] for row in self._entries])

    __rmul__ = __mul__

    def adjoint(self) -> "KernelMatrix":
        size = self.size
        return KernelMatrix(self.system, [[self._entries[j][i].adjoint() for j in range(size)]
                                          for i in range(size)])

    def is_zero(self) -> bool:
        return all(entry.is_zero() for entry in self.entries())

    def __eq__(self, other):
        if not isinstance(other, KernelMatrix):
            return NotImplemented
        return self.system == other.system and self._entries == other._entries

    def __hash__(self):
        return hash(self._entries)

    def __repr__(self):
        rows = "; ".join(", ".join(format_tensor(e) for e in row) for row in self._entries)
        return f"KernelMatrix([{rows}])"


# Operations

class ArithOp(str, Enum):
    ADD = "add"
    MUL = "mul"
    SCALE = "scale"


def algebra_arith(p: NCPoly, q, op: ArithOp | str) -> NCPoly:
    op = ArithOp(op)
    if op is ArithOp.SCALE:
        return p * QQi.coerce(q)
    if not isinstance(q, NCPoly):
        raise StructuralError(f"{op.value} needs two polynomials")
    _same_system(p, q)
    return p + q if op is ArithOp.ADD else p * q


def adjoint(x):
    return x.adjoint()


def sharp(a, b):
    """The # action, extended entrywise to kernel matrices and polynomial tuples."""
    if isinstance(a, TensorPoly):
        return a.sharp(b)
    if not isinstance(a, KernelMatrix):
        raise StructuralError(f"cannot act with {type(a).__name__}")
    size = a.size
    if isinstance(b, KernelMatrix):
        if b.size != size:
            raise StructuralError("kernel matrices of different sizes")
        zero = TensorPoly.zero(a.system)
        entries = []
        for i in range(size):
            row = []
            for j in range(size):
                total = zero
                for k in range(size):
                    total = total + a[i, k].sharp(b[k, j])
                row.append(total)
            entries.append(row)
        return KernelMatrix(a.system, entries)
    b = tuple(b)
    if len(b) != size:
        raise StructuralError(f"tuple of length {len(b)} against a {size}x{size} kernel")
    out = []
    for i in range(size):
        total = NCPoly.zero(a.system)
        for j in range(size):
            total = total + a[i, j].sharp(b[j])
        out.append(total)
    return tuple(out)


def left_act(p: NCPoly, u: TensorPoly) -> TensorPoly:
    """p·(a⊗b) = pa ⊗ b."""
    return TensorPoly.elementary(p, NCPoly.one(p.system)).sharp(u)


def right_act(u: TensorPoly, q: NCPoly) -> TensorPoly:
    """(a⊗b)·q = a ⊗ bq."""
    return TensorPoly.elementary(NCPoly.one(q.system), q).sharp(u)


def diff_quotient(i: int, p: NCPoly) -> TensorPoly:
    p.system.check_letter(i)
    out: dict[tuple[Word, Word], QQi] = {}
    for w, c in p.items():
        for k, letter in enumerate(w.letters):
            if letter == i:
                _accumulate(out, w.split(k), c)
    return TensorPoly(p.system, out)


def jacobian(P: Sequence[NCPoly]) -> KernelMatrix:
    P = tuple(P)
    system = _tuple_system(P)
    if len(P) != system.n:
        raise StructuralError(f"the Jacobian needs a tuple of length {system.n}, got {len(P)}")
    return KernelMatrix(system, [[diff_quotient(j, p) for j in range(system.n)] for p in P])


def mai_kernel(Xi: Sequence[NCPoly], X: Sequence[NCPoly]) -> KernelMatrix:
    """Entry (i, j) = ½ (ξ_i⊗1 − 1⊗ξ_i) # (x_j⊗1 − 1⊗x_j)."""
    Xi, X = tuple(Xi), tuple(X)
    system = _tuple_system(Xi + X)
    if len(Xi) != len(X):
        raise StructuralError("Xi and X must have the same length")
    one = NCPoly.one(system)

    def commutator(p):
        return TensorPoly.elementary(p, one) - TensorPoly.elementary(one, p)

    left = [commutator(xi) for xi in Xi]
    right = [commutator(x) for x in X]
    return KernelMatrix(system, [[HALF * li.sharp(rj) for rj in right] for li in left])


def transform_kernel(a: Sequence[TensorPoly], F: Sequence[NCPoly]) -> tuple[TensorPoly, ...]:
    """a # 𝒥(F)*: the k-th entry is Σ_i a_i # (∂_i f_k)*."""
    a, F = tuple(a), tuple(F)
    system = _tuple_system(a + F)
    if len(a) != system.n:
        raise StructuralError(f"a has length {len(a)}, expected {system.n}")
    out = []
    for f in F:
        total = TensorPoly.zero(system)
        for i, ai in enumerate(a):
            total = total + ai.sharp(diff_quotient(i, f).adjoint())
        out.append(total)
    return tuple(out)


def trace_right(u: TensorPoly, tau: Callable[[Word], complex]) -> NCPoly:
    """(1⊗τ°)(a⊗b) = τ(b)·a."""
    out: dict[Word, QQi] = {}
    for (a, b), c in u.items():
        _accumulate(out, a, c * QQi.from_complex(tau(b)))
    return NCPoly(u.system, out)


def trace_left(u: TensorPoly, tau: Callable[[Word], complex]) -> NCPoly:
    """(τ⊗1)(a⊗b) = τ(a)·b."""
    out: dict[Word, QQi] = {}
    for (a, b), c in u.items():
        _accumulate(out, b, c * QQi.from_complex(tau(a)))
    return NCPoly(u.system, out)


def compose(p: NCPoly, F: Sequence[NCPoly]) -> NCPoly:
    """Substitute f_i for t_i in p; B-letters map to the same B-letters of the target."""
    F = tuple(F)
    if len(F) != p.system.n:
        raise StructuralError(f"substitution needs {p.system.n} polynomials, got {len(F)}")
    target = _tuple_system(F)
    if p.system.b != target.b:
        raise StructuralError("substitution across different coefficient algebras")
    total = NCPoly.zero(target)
    for w, c in p.items():
        term = NCPoly.constant(target, c) * NCPoly.b_element(target, w.slots[0])
        for letter, slot in zip(w.letters, w.slots[1:]):
            term = term * F[letter] * NCPoly.b_element(target, slot)
        total = total + term
    return total


def _tuple_system(items) -> GeneratorSystem:
    if not items:
        raise StructuralError("empty tuple has no generator system")
    system = items[0].system
    for item in items[1:]:
        if item.system != system:
            raise StructuralError("tuple entries live over different generator systems")
    return system


# Text form

def format_coefficient(c: QQi) -> str:
    if not c.im:
        return str(c.re)
    if not c.re:
        return f"{c.im}i"
    sign = "+" if c.im > 0 else "-"
    return f"({c.re}{sign}{abs(c.im)}i)"


def format_word(w: Word, unit: int) -> str:
    parts = []
    for k, slot in enumerate(w.slots):
        if slot != unit:
            parts.append(f"b{slot + 1}")
        if k < len(w.letters):
            parts.append(f"t{w.letters[k] + 1}")
    return "*".join(parts)


def format_poly(p: NCPoly) -> str:
    if p.is_zero():
        return "0"
    unit = p.system.b.unit
    chunks = []
    for w, c in p.items():
        body = format_word(w, unit)
        if not body:
            chunks.append(format_coefficient(c))
        elif c == ONE:
            chunks.append(body)
        else:
            chunks.append(f"{format_coefficient(c)}*{body}")
    return " + ".join(chunks)


def format_tensor(u: TensorPoly) -> str:
    if u.is_zero():
        return "0"
    unit = u.system.b.unit
    chunks = []
    for (a, b), c in u.items():
        left = format_word(a, unit) or "1"
        right = format_word(b, unit) or "1"
        chunks.append(f"{format_coefficient(c)}*({left} ⊗ {right})")
    return " + ".join(chunks)
