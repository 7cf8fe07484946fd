"""Exact differential-polynomial algebra in one matrix potential.

A *word* ``(d1, ..., dm)`` stands for the noncommutative product
``Q^(d1) Q^(d2) ... Q^(dm)`` of derivatives of a single matrix-valued
potential ``Q``; the empty word is the identity.  A :class:`DiffPoly` is a
finite rational linear combination of words, kept in a canonical form
(zero coefficients dropped, terms ordered by word length then by the
derivative-order sequence).  All coefficient arithmetic is exact
(`fractions.Fraction`), so equality of polynomials is decidable and
serialisation round-trips bit-for-bit.

The grading used throughout: letter ``d`` has weight ``d + 2``, the weight
of a word is the sum over its letters and the empty word has weight 0.
Differentiation raises the weight of every term by exactly 1 and preserves
word length, which is what makes the exact antiderivative a finite linear
algebra problem.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .errors import AliasingError, NotExactDerivativeError
from .periodic import PeriodicFunction

Word = tuple[int, ...]

__all__ = [
    "Word",
    "DiffMonomial",
    "DiffPoly",
    "make",
    "add",
    "mul",
    "differentiate",
    "antiderivative",
    "commutative_image",
    "evaluate",
    "min_grid",
    "words_of_weight",
]


@dataclass(frozen=True)
class DiffMonomial:
    """A single term: rational coefficient times a derivative word."""

    coeff: Fraction
    word: Word

    @property
    def weight(self) -> int:
        return sum(d + 2 for d in self.word)


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise ValueError(f"coefficient must be exact (int/Fraction/str), got {type(c).__name__}")


def _word_key(w: Word) -> tuple:
    return (len(w), w)


class DiffPoly:
    """Canonical rational linear combination of derivative words."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Word, Fraction] | None = None):
        clean: dict[Word, Fraction] = {}
        if terms:
            for word, coeff in terms.items():
                word = tuple(int(d) for d in word)
                if any(d < 0 for d in word):
                    raise ValueError(f"negative derivative order in word {word}")
                coeff = _as_fraction(coeff)
                if coeff != 0:
                    acc = clean.get(word, Fraction(0)) + coeff
                    if acc:
                        clean[word] = acc
                    else:
                        clean.pop(word, None)
        self._terms = clean

    # -- canonical views ------------------------------------------------

    def terms(self) -> tuple[DiffMonomial, ...]:
        """Terms in canonical order (length, then sequence)."""
        return tuple(
            DiffMonomial(self._terms[w], w) for w in sorted(self._terms, key=_word_key)
        )

    def coefficient(self, word: Iterable[int]) -> Fraction:
        return self._terms.get(tuple(word), Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiffPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self) -> str:
        if not self._terms:
            return "DiffPoly(0)"
        bits = []
        for mono in self.terms():
            body = "*".join(f"Q^({d})" for d in mono.word) or "1"
            bits.append(f"{mono.coeff}*{body}")
        return "DiffPoly(" + " + ".join(bits) + ")"

    # -- grading ---------------------------------------------------------

    def weights(self) -> set[int]:
        return {sum(d + 2 for d in w) for w in self._terms}

    def is_homogeneous(self, weight: int | None = None) -> bool:
        ws = self.weights()
        if not ws:
            return True
        if weight is None:
            return len(ws) == 1
        return ws == {weight}

    def max_derivative(self) -> int:
        return max((max(w) for w in self._terms if w), default=0)

    def max_word_length(self) -> int:
        return max((len(w) for w in self._terms), default=0)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "DiffPoly") -> "DiffPoly":
        if not isinstance(other, DiffPoly):
            return NotImplemented
        out = dict(self._terms)
        for w, c in other._terms.items():
            acc = out.get(w, Fraction(0)) + c
            if acc:
                out[w] = acc
            else:
                out.pop(w, None)
        p = DiffPoly.__new__(DiffPoly)
        p._terms = out
        return p

    def __neg__(self) -> "DiffPoly":
        p = DiffPoly.__new__(DiffPoly)
        p._terms = {w: -c for w, c in self._terms.items()}
        return p

    def __sub__(self, other: "DiffPoly") -> "DiffPoly":
        if not isinstance(other, DiffPoly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, DiffPoly):
            out: dict[Word, Fraction] = {}
            for w1, c1 in self._terms.items():
                for w2, c2 in other._terms.items():
                    w = w1 + w2
                    acc = out.get(w, Fraction(0)) + c1 * c2
                    if acc:
                        out[w] = acc
                    else:
                        out.pop(w, None)
            p = DiffPoly.__new__(DiffPoly)
            p._terms = out
            return p
        c = _as_fraction(other)
        p = DiffPoly.__new__(DiffPoly)
        p._terms = {} if c == 0 else {w: c0 * c for w, c0 in self._terms.items()}
        return p

    def __rmul__(self, other):
        # scalars commute with everything; word concatenation is handled in __mul__
        if isinstance(other, DiffPoly):
            return NotImplemented
        return self.__mul__(other)

    # -- serialisation ---------------------------------------------------

    def to_json_obj(self) -> list[dict]:
        return [
            {"coeff": str(m.coeff), "word": list(m.word)} for m in self.terms()
        ]

    @classmethod
    def from_json_obj(cls, obj) -> "DiffPoly":
        terms: dict[Word, Fraction] = {}
        for entry in obj:
            word = tuple(int(d) for d in entry["word"])
            coeff = Fraction(entry["coeff"])
            terms[word] = terms.get(word, Fraction(0)) + coeff
        return cls(terms)


ZERO = DiffPoly()
IDENTITY = DiffPoly({(): Fraction(1)})


def make(coeff, word: Iterable[int]) -> DiffPoly:
    """Single-term polynomial ``coeff * Q^(d1)...Q^(dm)``."""
    return DiffPoly({tuple(word): _as_fraction(coeff)})


def add(p: DiffPoly, q: DiffPoly) -> DiffPoly:
    return p + q


def mul(p: DiffPoly, q: DiffPoly) -> DiffPoly:
    """Noncommutative product (word concatenation)."""
    return p * q


def differentiate(p: DiffPoly) -> DiffPoly:
    """Total space derivative (Leibniz over each word position)."""
    out: dict[Word, Fraction] = {}
    for w, c in p._terms.items():
        for i in range(len(w)):
            dw = w[:i] + (w[i] + 1,) + w[i + 1:]
            acc = out.get(dw, Fraction(0)) + c
            if acc:
                out[dw] = acc
            else:
                out.pop(dw, None)
    q = DiffPoly.__new__(DiffPoly)
    q._terms = out
    return q


def commutative_image(p: DiffPoly) -> DiffPoly:
    """Project onto the scalar (commutative) quotient by sorting each word.

    Valid for evaluation against scalar potentials, where factor order is
    irrelevant; the image of a Hermitian-symmetric polynomial keeps the same
    scalar values.
    """
    out: dict[Word, Fraction] = {}
    for w, c in p._terms.items():
        sw = tuple(sorted(w))
        acc = out.get(sw, Fraction(0)) + c
        if acc:
            out[sw] = acc
        else:
            out.pop(sw, None)
    q = DiffPoly.__new__(DiffPoly)
    q._terms = out
    return q


# ---------------------------------------------------------------------------
# antiderivative
# ---------------------------------------------------------------------------


def words_of_weight(weight: int, length: int, commutative: bool = False) -> list[Word]:
    """All words of the given weight and word length (sorted words if commutative)."""
    rest = weight - 2 * length
    if length == 0:
        return [()] if weight == 0 else []
    if rest < 0:
        return []
    words: list[Word] = []
    if commutative:
        # nondecreasing letter sequences
        def rec(prefix, remaining, slots, minimum):
            if slots == 1:
                if remaining >= minimum:
                    words.append(prefix + (remaining,))
                return
            for d in range(minimum, remaining + 1):
                rec(prefix + (d,), remaining - d, slots - 1, d)

        rec((), rest, length, 0)
    else:
        for cuts in itertools.combinations(range(rest + length - 1), length - 1):
            prev = -1
            word = []
            for c in cuts + (rest + length - 1,):
                word.append(c - prev - 1)
                prev = c
            words.append(tuple(word))
    return words


def _derivative_of_word(w: Word, commutative: bool) -> dict[Word, int]:
    out: dict[Word, int] = {}
    for i in range(len(w)):
        dw = w[:i] + (w[i] + 1,) + w[i + 1:]
        if commutative:
            dw = tuple(sorted(dw))
        out[dw] = out.get(dw, 0) + 1
    return out


def antiderivative(p: DiffPoly, *, commutative: bool = False) -> DiffPoly:
    """Exact inverse of :func:`differentiate` on its image.

    Solves ``differentiate(q) == p`` for the unique ``q`` with no weight-0
    (constant) part, working blockwise per (weight, word-length) over exact
    rationals.  Raises :class:`NotExactDerivativeError` if no such ``q``
    exists, for example for ``p = Q`` or any pure power of ``Q``.
    """
    if commutative:
        p = commutative_image(p)
    if p.is_zero():
        return ZERO
    # group the target by (weight, length); D preserves length, raises weight by 1
    blocks: dict[tuple[int, int], dict[Word, Fraction]] = {}
    for w, c in p._terms.items():
        key = (sum(d + 2 for d in w), len(w))
        blocks.setdefault(key, {})[w] = c
    result: dict[Word, Fraction] = {}
    for (weight, length), target in sorted(blocks.items()):
        if length == 0 or all(d == 0 for w in target for d in w):
            # the empty word and pure powers Q^m are never total derivatives
            raise NotExactDerivativeError(
                f"weight-{weight} block contains a term outside the image of d/dx"
            )
        basis = words_of_weight(weight - 1, length, commutative)
        basis = [w for w in basis if w]  # drop the empty word if it sneaks in
        columns = [_derivative_of_word(b, commutative) for b in basis]
        rows = sorted(
            {w for col in columns for w in col} | set(target), key=_word_key
        )
        row_index = {w: i for i, w in enumerate(rows)}
        m, n = len(rows), len(basis)
        mat = [[Fraction(0)] * n for _ in range(m)]
        for j, col in enumerate(columns):
            for w, mult in col.items():
                mat[row_index[w]][j] = Fraction(mult)
        rhs = [Fraction(0)] * m
        for w, c in target.items():
            rhs[row_index[w]] = c
        sol = _solve_exact(mat, rhs)
        if sol is None:
            raise NotExactDerivativeError(
                f"no exact antiderivative for the weight-{weight}, length-{length} block"
            )
        for b, x in zip(basis, sol):
            if x:
                result[b] = result.get(b, Fraction(0)) + x
    return DiffPoly(result)


def _solve_exact(mat: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Gaussian elimination over Fraction; None if the system is inconsistent.

    The derivative map is injective on positive-weight words, so when a
    solution exists it is unique; free columns would indicate a bug.
    """
    m = len(mat)
    n = len(mat[0]) if m else 0
    aug = [row[:] + [rhs[i]] for i, row in enumerate(mat)]
    piv_rows: list[int] = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, m) if aug[i][col] != 0), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = 1 / aug[r][col]
        aug[r] = [x * inv for x in aug[r]]
        for i in range(m):
            if i != r and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[r])]
        piv_rows.append(col)
        r += 1
        if r == m:
            break
    # consistency: rows beyond rank must have zero rhs
    for i in range(m):
        if all(aug[i][j] == 0 for j in range(n)) and aug[i][n] != 0:
            return None
    if len(piv_rows) < n:
        # should not happen: d/dx is injective away from constants
        raise AssertionError("antiderivative system is rank deficient")
    sol = [Fraction(0)] * n
    for i, col in enumerate(piv_rows):
        sol[col] = aug[i][n]
    return sol


# ---------------------------------------------------------------------------
# numeric evaluation against a band-limited potential
# ---------------------------------------------------------------------------


def min_grid(p: DiffPoly, bandwidth: int) -> int:
    """Smallest accepted uniform grid for evaluating ``p`` on a potential
    of the given Fourier bandwidth.

    Two constraints are combined: spectral differentiation headroom
    ``4 * bandwidth * (max derivative order + 1)`` and exact mode recovery of
    the product, which has bandwidth ``(word length) * bandwidth`` and needs
    ``2 * that + 1`` samples.
    """
    need = 4
    for w in p._terms:
        if not w:
            continue
        need = max(need, 4 * bandwidth * (max(w) + 1))
        need = max(need, 2 * len(w) * bandwidth + 1)
    return need


def evaluate(p: DiffPoly, Q: PeriodicFunction, grid: int) -> PeriodicFunction:
    """Evaluate ``p`` at a band-limited potential on a uniform grid.

    Exact for trigonometric-polynomial ``Q`` up to round-off as long as the
    grid clears :func:`min_grid`; otherwise raises :class:`AliasingError`
    instead of silently folding spectral content.
    """
    required = min_grid(p, Q.bandwidth)
    if grid < required:
        raise AliasingError(
            f"grid {grid} too coarse for this polynomial at bandwidth "
            f"{Q.bandwidth}; need at least {required}",
            required=required,
        )
    n = Q.matrix_dim
    eye = np.broadcast_to(np.eye(n, dtype=complex), (grid, n, n))
    samples: dict[int, np.ndarray] = {}
    acc = np.zeros((grid, n, n), dtype=complex)
    for word, coeff in p._terms.items():
        prod = eye
        for d in word:
            if d not in samples:
                samples[d] = Q.derivative(d).sample(grid)
            prod = prod @ samples[d]
        acc = acc + float(coeff) * prod
    return PeriodicFunction.from_samples(acc, Q.a)
