"""Fermat pseudoprimality and multiplicative-order statistics.

The default Fermat test is b^n = b (mod n), which every prime passes for
every base; the strict variant b^(n-1) = 1 (mod n) is available everywhere
a base test is taken but changes the bookkeeping for primes dividing b.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .arith import carmichael_lambda, factorize, is_prime
from .primes import primes_up_to

log = logging.getLogger(__name__)


class NoCrtSolutionError(ValueError):
    """The modulus and the order share a factor; the residue system is unsolvable."""


@dataclass(frozen=True)
class PseudoprimeVerdict:
    n: int
    base: int
    fermat: bool
    prime: bool
    pseudoprime: bool

    @property
    def unit(self) -> bool:
        return self.n == 1


def fermat_holds(b: int, n: int, strict: bool = False) -> bool:
    """Whether n passes the base-b Fermat test.

    Default: b^n = b (mod n). Strict: b^(n-1) = 1 (mod n). n = 1 passes both
    (every congruence holds mod 1).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if b < 2:
        raise ValueError("base must be >= 2")
    if strict:
        return pow(b, n - 1, n) == 1 % n
    return pow(b, n, n) == b % n


def classify(b: int, n: int, strict: bool = False) -> PseudoprimeVerdict:
    """Fermat/prime/pseudoprime verdict. n = 1 is neither prime nor pseudoprime."""
    f = fermat_holds(b, n, strict)
    pr = is_prime(n)
    return PseudoprimeVerdict(n, b, f, pr, f and not pr and n != 1)


def multiplicative_order(b: int, d: int) -> int:
    """Order of b in (Z/d)^*.

    Computed by stripping prime factors from the group exponent lambda(d);
    if d resists factoring, falls back to an incremental power scan.
    """
    if d < 1:
        raise ValueError("modulus must be >= 1")
    if math.gcd(b, d) != 1:
        raise ValueError(f"gcd({b}, {d}) != 1, order undefined")
    if d == 1:
        return 1
    try:
        lam = carmichael_lambda(d)
    except ArithmeticError:
        return _order_scan(b, d)
    m = lam
    for q in factorize(lam):
        while m % q == 0 and pow(b, m // q, d) == 1:
            m //= q
    return m


def _order_scan(b: int, d: int) -> int:
    acc = b % d
    k = 1
    while acc != 1:
        acc = acc * b % d
        k += 1
    return k


def crt_residue(b: int, d: int) -> int:
    """The unique r in {1, ..., d*ord_d(b)} with r = 0 (mod d), r = 1 (mod ord_d(b)).

    Solvable exactly when gcd(d, ord_d(b)) = 1.
    """
    o = multiplicative_order(b, d)
    if math.gcd(d, o) != 1:
        raise NoCrtSolutionError(f"gcd(d={d}, ord={o}) > 1")
    r = d * pow(d, -1, o) % (d * o)
    return r if r else d * o


def iter_prime_orders(b: int, lo: int, hi: int) -> Iterator[tuple[int, int]]:
    """(ell, ord_ell(b)) over primes ell in [lo, hi]; primes dividing b are
    skipped and logged."""
    for ell in primes_up_to(hi):
        if ell < lo:
            continue
        if b % ell == 0:
            log.debug("skipping prime %d (divides base %d)", ell, b)
            continue
        yield ell, multiplicative_order(b, ell)


def order_census(b: int, t: int) -> dict[int, int]:
    """How many primes ell <= t (coprime to b) have each order m = ord_ell(b)."""
    out: dict[int, int] = {}
    for _, m in iter_prime_orders(b, 2, t):
        out[m] = out.get(m, 0) + 1
    return dict(sorted(out.items()))


def nord_bound(b: int, m: int) -> float:
    """Ceiling for the number of primes with ord_ell(b) = m: each divides
    b^m - 1, so there are at most log(b)/log(2) * m of them."""
    return math.log(b) / math.log(2) * m


def tail_sum(b: int, t: float, cap: int) -> float:
    """sum 1/(ell * ord_ell(b)) over primes t <= ell <= cap coprime to b."""
    lo = max(2, math.ceil(t))
    return math.fsum(
        1.0 / (ell * m) for ell, m in iter_prime_orders(b, lo, cap)
    )


def product_tail_sum(b: int, t: float, cap: int) -> float:
    """sum 1/(ell * ord_ell(b)) over primes ell <= cap with ell*ord_ell(b) >= t."""
    return math.fsum(
        1.0 / (ell * m) for ell, m in iter_prime_orders(b, 2, cap) if ell * m >= t
    )


def pomerance_scale(x: float) -> float:
    """L(x) = exp(log x * logloglog x / loglog x), clamped to 1 for x <= e^e."""
    if x <= math.exp(math.e):
        return 1.0
    lx = math.log(x)
    llx = math.log(lx)
    return math.exp(lx * math.log(llx) / llx)


def count_by_order(b: int, t: int, m: int) -> int:
    """|{2 <= d <= t : gcd(d, b) = 1 and ord_d(b) = m}| by exact scan."""
    count = 0
    for d in range(2, t + 1):
        if math.gcd(b, d) == 1 and multiplicative_order(b, d) == m:
            count += 1
    return count


@dataclass(frozen=True)
class OrderLevelReport:
    """Counts of moduli d <= t at each order level, with the t/sqrt(L(t))
    comparison flagged (never fatal: the threshold where it must hold is
    not effective at desk scale)."""

    t: int
    base: int
    threshold: float  # t / sqrt(L(t))
    levels: dict[int, int]  # m -> count
    flagged: dict[int, int]  # levels whose count exceeds the threshold


def order_level_report(b: int, t: int) -> OrderLevelReport:
    levels: dict[int, int] = {}
    for d in range(2, t + 1):
        if math.gcd(b, d) == 1:
            m = multiplicative_order(b, d)
            levels[m] = levels.get(m, 0) + 1
    threshold = t / math.sqrt(pomerance_scale(t))
    flagged = {m: c for m, c in sorted(levels.items()) if c > threshold}
    return OrderLevelReport(t, b, threshold, dict(sorted(levels.items())), flagged)


def pseudoprimes_below(b: int, limit: int) -> list[int]:
    """Base-b Fermat pseudoprimes below limit, regenerated by direct scan."""
    return [n for n in range(2, limit) if classify(b, n).pseudoprime]


def tail_sum_exact(b: int, t: float, cap: int) -> Fraction:
    """Exact rational tail sum, e.g. tail_sum_exact(2, 3, 7) = 1/6 + 1/20 + 1/21."""
    lo = max(2, math.ceil(t))
    total = Fraction(0)
    for ell, m in iter_prime_orders(b, lo, cap):
        total += Fraction(1, ell * m)
    return total
