"""Utils."""

import hashlib
import math
from typing import Iterable, List

import numpy as np

__all__ = []


def divisors(n: int) -> List[int]:
    """Positive divisors of n in increasing order."""

    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def _prime_factors(n: int) -> List[int]:
    factors = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            factors.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        factors.append(n)
    return factors


def totient(n: int) -> int:
    """Euler's phi."""

    result = n
    for p in _prime_factors(n):
        result -= result // p
    return result


def mobius(n: int) -> int:
    """Moebius mu."""

    k = 0
    for p in _prime_factors(n):
        if n % (p * p) == 0:
            return 0
        k += 1
    return -1 if k & 1 else 1


def fmt17(x: float) -> str:
    """Format a float with 17 significant digits, enough to round-trip doubles."""

    return f"{x:.17g}"


def log_fsum_exp(log_terms: np.ndarray) -> float:
    """log(sum(exp(log_terms))) with compensated summation."""

    if log_terms.size == 0:
        return -math.inf
    m = float(np.max(log_terms))
    return m + math.log(math.fsum(np.exp(log_terms - m)))


def sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_text(parts: Iterable[str]) -> str:
    h = hashlib.sha256()
    for part in parts:
        h.update(part.encode("utf-8"))
    return h.hexdigest()
