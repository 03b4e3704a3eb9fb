"""Free group combinatorics.

Reduced words, canonical representatives of oriented conjugacy classes and
exhaustive enumeration of classes up to a word length cutoff, together with
exact count oracles.

Letters are coded as integers: generator g maps to ``2g`` and its inverse to
``2g + 1``, so inversion is ``code ^ 1`` and integer order is the letter order
(generator index major, ``+1 < -1`` minor). Words print as ``a, A, b, B, ...``
with capitals for inverses.
"""

import dataclasses
import logging
from typing import Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .errors import *
from .utils import divisors, mobius, totient

__all__ = [
    "Letter",
    "ReducedWord",
    "ConjClass",
    "ClassBlock",
    "Shard",
    "reduce",
    "canonical_class",
    "invert_class",
    "class_count",
    "primitive_class_count",
    "projected_class_total",
    "enumerate_classes",
    "shard_prefixes",
    "class_blocks",
    "least_rotation",
    "parse_word",
    "format_word",
    "codes_to_word",
    "DEFAULT_MAX_CLASSES",
]

log = logging.getLogger(__name__)

DEFAULT_MAX_CLASSES = 20_000_000


class Letter(NamedTuple):
    """A generator or its inverse.

    Attributes:
        gen (int): Generator index in [0, rank).
        sign (int): +1 or -1.
    """

    gen: int
    sign: int

    @classmethod
    def from_code(cls, code: int) -> "Letter":
        return cls(code >> 1, -1 if code & 1 else 1)

    @property
    def code(self) -> int:
        return (self.gen << 1) | (self.sign < 0)

    def inverse(self) -> "Letter":
        return Letter(self.gen, -self.sign)


ReducedWord = Tuple[Letter, ...]
"""Freely reduced word, the empty tuple is the identity."""


@dataclasses.dataclass(frozen=True)
class ConjClass:
    """Oriented conjugacy class of a free group.

    Attributes:
        letters (ReducedWord): Cyclically reduced, lexicographically minimal rotation.
        period (int): Smallest rotation fixing the word, divides the length.
    """

    letters: ReducedWord
    period: int

    @property
    def primitive(self) -> bool:
        return self.period == len(self.letters)

    @property
    def codes(self) -> Tuple[int, ...]:
        return tuple(x.code for x in self.letters)

    @property
    def word(self) -> str:
        return format_word(self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return self.word


class ClassBlock(NamedTuple):
    """All canonical classes of one word length inside one shard.

    Attributes:
        n (int): Word length.
        codes (np.ndarray): (N, n) letter codes, one canonical word per row.
        keys (np.ndarray): (N,) integer sort keys, base ``2 * rank`` digits of the word.
        periods (np.ndarray): (N,) periods.
    """

    n: int
    codes: np.ndarray
    keys: np.ndarray
    periods: np.ndarray


class Shard(NamedTuple):
    """Enumeration shard.

    Attributes:
        prefix (Tuple[int, ...]): Letter codes every word of the shard starts with.
        exact (bool): Shard holds only the prefix word itself.
    """

    prefix: Tuple[int, ...]
    exact: bool = False


def _letter_char(code: int) -> str:
    g = code >> 1
    return chr((65 if code & 1 else 97) + g)


def format_word(letters: Sequence[Letter]) -> str:
    """Letter string of a word, ``a`` for a generator and ``A`` for its inverse."""

    return "".join(_letter_char(x.code) for x in letters)


def codes_to_word(codes: Sequence[int]) -> str:
    return "".join(_letter_char(int(c)) for c in codes)


def parse_word(s: str) -> ReducedWord:
    """Parse a letter string, the result is not reduced.

    Raises:
        InvalidArgumentError: Character is not a letter.
    """

    letters = []
    for ch in s:
        if "a" <= ch <= "z":
            letters.append(Letter(ord(ch) - 97, 1))
        elif "A" <= ch <= "Z":
            letters.append(Letter(ord(ch) - 65, -1))
        else:
            raise InvalidArgumentError(f"Invalid letter {ch!r} in word {s!r}.")
    return tuple(letters)


def reduce(letters: Sequence[Letter]) -> ReducedWord:
    """Free reduction, identity is the empty tuple."""

    stack: List[Letter] = []
    for x in letters:
        if stack and stack[-1].gen == x.gen and stack[-1].sign == -x.sign:
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


def _cyclic_reduce(codes: List[int]) -> List[int]:
    i, j = 0, len(codes) - 1
    while i < j and codes[i] == codes[j] ^ 1:
        i += 1
        j -= 1
    return codes[i:j + 1]


def least_rotation(codes: Sequence[int]) -> int:
    """Booth's algorithm, start index of the lexicographically least rotation."""

    s = list(codes) * 2
    n = len(s)
    f = [-1] * n
    k = 0
    for j in range(1, n):
        sj = s[j]
        i = f[j - k - 1]
        while i != -1 and sj != s[k + i + 1]:
            if sj < s[k + i + 1]:
                k = j - i - 1
            i = f[i]
        if sj != s[k + i + 1]:
            if sj < s[k]:
                k = j
            f[j - k] = -1
        else:
            f[j - k] = i + 1
    return k


def _period(codes: Sequence[int]) -> int:
    n = len(codes)
    for p in divisors(n):
        if p == n or all(codes[i] == codes[i % p] for i in range(p, n)):
            return p
    return n


def canonical_class(w: Sequence[Letter]) -> ConjClass:
    """Canonical representative of the conjugacy class of a word.

    Args:
        w: Word, reduced or not.

    Returns:
        ConjClass: Least rotation of the cyclic reduction.

    Raises:
        IdentityWordError: Word reduces to identity.
    """

    codes = _cyclic_reduce([x.code for x in reduce(w)])
    if not codes:
        raise IdentityWordError()
    k = least_rotation(codes)
    codes = codes[k:] + codes[:k]
    return ConjClass(tuple(Letter.from_code(c) for c in codes), _period(codes))


def invert_class(c: ConjClass) -> ConjClass:
    """Class of the inverse word."""

    return canonical_class(tuple(x.inverse() for x in reversed(c.letters)))


def _word_count(rank: int, n: int) -> int:
    """Trace of the n-th power of the no-backtracking transition matrix."""

    size = 2 * rank
    A = [[0 if j == i ^ 1 else 1 for j in range(size)] for i in range(size)]
    P = [[int(i == j) for j in range(size)] for i in range(size)]
    base, e = A, n
    while e:
        if e & 1:
            P = [[sum(P[i][k] * base[k][j] for k in range(size)) for j in range(size)] for i in range(size)]
        base = [[sum(base[i][k] * base[k][j] for k in range(size)) for j in range(size)] for i in range(size)]
        e >>= 1
    return sum(P[i][i] for i in range(size))


def class_count(rank: int, n: int) -> Tuple[int, int]:
    """Count oracle for cyclically reduced words and classes of length n.

    Returns:
        int: Cyclically reduced words of length n, tr(A^n).
        int: Conjugacy classes of length n, by Burnside over rotations.
    """

    if n < 1:
        raise InvalidArgumentError(f"Length must be positive, {n} given.")
    total = sum(totient(n // d) * _word_count(rank, d) for d in divisors(n))
    return _word_count(rank, n), total // n


def primitive_class_count(rank: int, n: int) -> int:
    """Primitive classes of length n, by Moebius inversion."""

    return sum(mobius(n // d) * _word_count(rank, d) for d in divisors(n)) // n


def projected_class_total(rank: int, n_max: int, include_powers: bool = True) -> int:
    if include_powers:
        return sum(class_count(rank, n)[1] for n in range(1, n_max + 1))
    return sum(primitive_class_count(rank, n) for n in range(1, n_max + 1))


def _check_budget(rank: int, n_max: int, include_powers: bool, max_classes: int) -> None:
    if rank < 2:
        raise InvalidArgumentError(f"Rank must be at least 2, {rank} given.")
    if n_max < 1:
        raise InvalidArgumentError(f"n_max must be positive, {n_max} given.")
    projected = projected_class_total(rank, n_max, include_powers)
    if projected > max_classes:
        raise CutoffTooLargeError(projected, max_classes)
    # integer keys hold n_max base-2r digits
    if (2 * rank) ** n_max >= 1 << 63:
        raise CutoffTooLargeError(projected, max_classes)


def shard_prefixes(rank: int, depth: int = 2) -> List[Shard]:
    """Disjoint enumeration shards.

    Every canonical word is the least rotation of itself, so no letter is
    smaller than its first letter. Shards are the reduced prefixes of length
    ``depth`` with that property, plus exact shards for the shorter words.
    """

    size = 2 * rank
    shards: List[Shard] = []
    level: List[Tuple[int, ...]] = [(c,) for c in range(size)]
    for k in range(1, depth + 1):
        if k == depth:
            shards.extend(Shard(p) for p in level)
            break
        shards.extend(Shard(p, True) for p in level)
        level = [p + (c,) for p in level for c in range(p[0], size) if c != p[-1] ^ 1]
    return shards


def enumerate_classes(rank: int, n_max: int, include_powers: bool = True, *,
                      shard: Optional[Shard] = None,
                      max_classes: int = DEFAULT_MAX_CLASSES) -> Iterator[ConjClass]:
    """Stream every class of word length at most n_max exactly once.

    Depth-first over the no-backtracking graph, the wrap-around check and
    Booth's least rotation decide at each node whether the word is canonical.

    Args:
        rank: Number of generators, at least 2.
        n_max: Word length cutoff.
        include_powers: Whether to include proper powers.
        shard: Restrict to one shard of `shard_prefixes`, default all.
        max_classes: Budget on the projected class count.

    Raises:
        CutoffTooLargeError: Projected count over budget.
    """

    _check_budget(rank, n_max, include_powers, max_classes)
    size = 2 * rank
    shards = [shard] if shard is not None else [Shard((c,)) for c in range(size)]

    def emit(word: List[int]) -> Optional[ConjClass]:
        if word[-1] == word[0] ^ 1 and len(word) > 1:
            return None
        k = least_rotation(word)
        if k and word[k:] + word[:k] != word:
            return None
        p = _period(word)
        if not include_powers and p != len(word):
            return None
        return ConjClass(tuple(Letter.from_code(c) for c in word), p)

    for sh in shards:
        word = list(sh.prefix)
        if len(word) > n_max:
            continue
        if sh.exact:
            c = emit(word)
            if c is not None:
                yield c
            continue
        first = word[0]
        # explicit stack of (word, next candidate letter)
        stack = [(word, first)]
        c = emit(word)
        if c is not None:
            yield c
        while stack:
            cur, nxt = stack.pop()
            if len(cur) >= n_max:
                continue
            while nxt < size and nxt == cur[-1] ^ 1:
                nxt += 1
            if nxt >= size:
                continue
            stack.append((cur, nxt + 1))
            child = cur + [nxt]
            c = emit(child)
            if c is not None:
                yield c
            stack.append((child, first))


def class_blocks(rank: int, n_max: int, include_powers: bool = True, *,
                 shard: Optional[Shard] = None,
                 max_classes: int = DEFAULT_MAX_CLASSES) -> Iterator[ClassBlock]:
    """Vectorised enumeration, one block per word length, rows in key order.

    Yields the same class set as `enumerate_classes`.

    Raises:
        CutoffTooLargeError: Projected count over budget.
    """

    _check_budget(rank, n_max, include_powers, max_classes)
    size = 2 * rank
    shards = [shard] if shard is not None else [Shard((c,)) for c in range(size)]

    for sh in shards:
        k = len(sh.prefix)
        if k > n_max:
            continue
        first = sh.prefix[0]
        words = np.array([sh.prefix], dtype=np.int8)
        letters = np.arange(first, size, dtype=np.int8)
        for n in range(k, n_max + 1):
            if n > k:
                parent = np.repeat(words, len(letters), axis=0)
                child = np.tile(letters, len(words))
                keep = child != (parent[:, -1] ^ 1)
                words = np.concatenate([parent[keep], child[keep][:, None]], axis=1)
            block = _canonical_rows(words, size, include_powers)
            if block.codes.shape[0]:
                yield block
            if sh.exact or not words.shape[0]:
                break


def _canonical_rows(words: np.ndarray, size: int, include_powers: bool) -> ClassBlock:
    n = words.shape[1]
    if n > 1:
        words = words[words[:, -1] != (words[:, 0] ^ 1)]
    keys = np.zeros(words.shape[0], dtype=np.int64)
    for i in range(n):
        keys = keys * size + words[:, i].astype(np.int64)

    minimal = np.ones(keys.shape[0], dtype=bool)
    periods = np.full(keys.shape[0], n, dtype=np.int64)
    for r in range(1, n):
        high = np.int64(size) ** (n - r)
        rot = (keys % high) * np.int64(size) ** r + keys // high
        minimal &= keys <= rot
        periods = np.where((rot == keys) & (periods == n), r, periods)

    if not include_powers:
        minimal &= periods == n
    return ClassBlock(n, words[minimal], keys[minimal], periods[minimal])
