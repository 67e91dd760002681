"""Prime generation: one-shot and segmented sieves of Eratosthenes.

Both sieves store odd numbers only. The segmented iterator keeps memory at
O(segment length + sqrt(cutoff)) so censuses can stream far past what a
one-shot sieve would hold.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import isqrt
from typing import Iterator

DEFAULT_SEGMENT = 1 << 16
MAX_CUTOFF = 1 << 63


class CutoffError(ValueError):
    """Requested sieve range exceeds the supported cutoff."""


@dataclass(frozen=True)
class PrimeSegment:
    lo: int  # inclusive
    hi: int  # exclusive
    primes: tuple[int, ...]


def _check_cutoff(x: int) -> None:
    if x > MAX_CUTOFF:
        raise CutoffError(f"cutoff {x} exceeds supported maximum 2^63")


def primes_up_to(x: int) -> list[int]:
    """All primes <= x, ascending."""
    _check_cutoff(x)
    if x < 2:
        return []
    if x < 3:
        return [2]
    # index i represents the odd number 2i+1
    size = (x + 1) // 2
    mask = bytearray([1]) * size
    mask[0] = 0
    for i in range(1, (isqrt(x) + 1) // 2 + 1):
        if mask[i]:
            p = 2 * i + 1
            start = (p * p) // 2
            mask[start::p] = bytearray(len(range(start, size, p)))
    return [2] + [2 * i + 1 for i in range(1, size) if mask[i]]


def _segment_primes(lo: int, hi: int, odd_base: list[int]) -> list[int]:
    """Primes in [lo, hi), given odd base primes covering sqrt(hi)."""
    out = [2] if lo <= 2 < hi else []
    first = max(lo, 3)
    if first % 2 == 0:
        first += 1
    if first >= hi:
        return out
    size = (hi - first + 1) // 2  # odd numbers first, first+2, ...
    mask = bytearray([1]) * size
    for p in odd_base:
        if p * p >= hi:
            break
        start = max(p * p, ((first + p - 1) // p) * p)
        if start % 2 == 0:
            start += p
        if start >= hi:
            continue
        idx = (start - first) // 2
        mask[idx::p] = bytearray(len(range(idx, size, p)))
    out.extend(first + 2 * i for i in range(size) if mask[i])
    return out


def iter_prime_segments(
    x: int, segment_len: int = DEFAULT_SEGMENT
) -> Iterator[PrimeSegment]:
    """Yield PrimeSegments tiling [0, x+1); their concatenation is primes_up_to(x).

    Segment boundaries are multiples of segment_len, so the content of a
    segment depends only on (lo, hi): identical bounds give identical primes
    no matter which worker produced them.
    """
    _check_cutoff(x)
    if segment_len < 2:
        raise ValueError("segment_len must be at least 2")
    odd_base = [p for p in primes_up_to(isqrt(x)) if p > 2] if x >= 9 else []
    for lo in range(0, x + 1, segment_len):
        hi = min(lo + segment_len, x + 1)
        yield PrimeSegment(lo, hi, tuple(_segment_primes(lo, hi, odd_base)))


def segment_bounds(x: int, segment_len: int = DEFAULT_SEGMENT) -> list[tuple[int, int]]:
    """The (lo, hi) tiling iter_prime_segments uses, without sieving anything."""
    _check_cutoff(x)
    if segment_len < 2:
        raise ValueError("segment_len must be at least 2")
    return [
        (lo, min(lo + segment_len, x + 1)) for lo in range(0, x + 1, segment_len)
    ]
