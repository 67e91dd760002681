"""Sieve densities, Euler products, and pseudoprime-count envelopes.

The density system w_y assigns each prime ell >= y the weight
ell(ell^2-2) / ((ell-1)(ell^2-1)) and 0 below y; V_y(z) is the standard
sifting product over p < z. The envelopes evaluate the two headline upper
bounds for the count of primes p <= x whose group order passes a Fermat
test; at desk scales they exceed pi(x) and are flagged as vacuous.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .primes import primes_up_to
from .pseudoprimes import fermat_holds

# Hard-coded to 18+ significant digits; a unit test recomputes gamma from an
# Euler-Maclaurin series.
EULER_GAMMA = 0.577215664901532861
EXP_EULER_GAMMA = 1.78107241799019799


def euler_gamma_series(terms: int = 100_000) -> float:
    """Euler's constant from H_n - log n with Euler-Maclaurin correction."""
    n = terms
    h = math.fsum(1.0 / k for k in range(1, n + 1))
    return h - math.log(n) - 1 / (2 * n) + 1 / (12 * n * n) - 1 / (120 * n**4)


def sieve_density(ell: int, y: float = 1.0) -> Fraction:
    """w_y(ell): the density weight at a prime ell, zero below the floor y."""
    if ell < 2:
        raise ValueError("ell must be a prime >= 2")
    if ell < y:
        return Fraction(0)
    return Fraction(ell * (ell * ell - 2), (ell - 1) * (ell * ell - 1))


def density_product(y: float, z: float) -> float:
    """V_y(z) = prod_{p < z} (1 - w_y(p)/p), double precision."""
    if z < 0:
        raise ValueError("z must be nonnegative")
    v = 1.0
    for p in primes_up_to(max(0, math.ceil(z) - 1)):
        if p >= y:
            v *= float(1 - sieve_density(p, y) / p)
    return v


def euler_constant_product(cap: int) -> float:
    """Partial product of C = prod_p (1 - (p^2-p-1)/((p-1)^3 (p+1))) over p <= cap."""
    v = 1.0
    for p in primes_up_to(cap):
        v *= float(1 - Fraction(p * p - p - 1, (p - 1) ** 3 * (p + 1)))
    return v


def mertens_ratio(z: float, constant_cap: int = 100_000) -> float:
    """V_1(z) * log z / (C * e^-gamma): tends to 1 as z grows."""
    c = euler_constant_product(constant_cap)
    return density_product(1.0, z) * math.log(z) / (c / EXP_EULER_GAMMA)


def linear_sieve_F(s: float) -> float:
    """Upper linear-sieve function F(s) = 2 e^gamma / s, valid on 0 < s <= 3."""
    if not 0 < s <= 3:
        raise ValueError(f"F(s) only implemented on (0, 3], got s={s}")
    return 2 * EXP_EULER_GAMMA / s


def count_envelope(x: float, mode: str, eps: float = 0.0) -> float:
    """Headline upper-bound envelope for the Fermat-passing prime count.

    mode 'unconditional': (48 e^gamma + eps) x logloglog x / (log x loglog x);
    mode 'grh':           (28 e^gamma + eps) x loglog x / (log x)^2.
    Requires x > e^e so the iterated logs are positive.
    """
    if x <= math.exp(math.e):
        raise ValueError("envelope needs x > e^e")
    lx = math.log(x)
    llx = math.log(lx)
    lllx = math.log(llx)
    if mode == "unconditional":
        return (48 * EXP_EULER_GAMMA + eps) * x * lllx / (lx * llx)
    if mode == "grh":
        return (28 * EXP_EULER_GAMMA + eps) * x * llx / (lx * lx)
    raise ValueError(f"unknown envelope mode {mode!r}")


@dataclass(frozen=True)
class SieveParams:
    y: float
    z: float
    # Raw values before clamping z up to y; at desk scales the named presets
    # produce z < y (an empty sifting range), which is recorded, not hidden.
    raw_y: float
    raw_z: float
    preset: str | None = None


def preset_params(x: float, mode: str) -> SieveParams:
    """The named (y, z) choices. 'unconditional': y = (loglog x)^2 logloglog x,
    z = (log x)^(1/24) / loglog x. 'grh': y = (log x)^2 loglog x,
    z = x^(1/14) / log x. z is clamped up to y so [y, z) is at worst empty."""
    if x <= math.exp(math.e):
        raise ValueError("presets need x > e^e")
    lx = math.log(x)
    llx = math.log(lx)
    lllx = math.log(llx)
    if mode == "unconditional":
        y = llx * llx * lllx
        z = lx ** (1 / 24) / llx
    elif mode == "grh":
        y = lx * lx * llx
        z = x ** (1 / 14) / lx
    else:
        raise ValueError(f"unknown preset {mode!r}")
    y = max(1.0, y)
    return SieveParams(y, max(y, z), y, z, preset=mode)


def _sifting_primes(y: float, z: float) -> list[int]:
    if y > z:
        raise ValueError("need y <= z")
    return [p for p in primes_up_to(max(0, math.ceil(z) - 1)) if p >= y]


def empirical_S(records, y: float, z: float) -> int:
    """|{records : n has no prime factor in [y, z)}| (y = z counts everything)."""
    sift = _sifting_primes(y, z)
    count = 0
    for rec in records:
        n = rec.n
        if all(n % p for p in sift):
            count += 1
    return count


def empirical_T(records, b: int, y: float, z: float, strict: bool = False) -> int:
    """|{records : n has a prime factor in [y, z) yet passes the Fermat test}|."""
    sift = _sifting_primes(y, z)
    count = 0
    for rec in records:
        n = rec.n
        if any(n % p == 0 for p in sift) and fermat_holds(b, n, strict):
            count += 1
    return count


@dataclass(frozen=True)
class SieveReport:
    x: float
    y: float
    z: float
    V_y_z: float
    F_s: float
    envelope_uncond: float
    envelope_grh: float
    empirical_S: int
    empirical_T: int
    empirical_Q: int
    meta: dict

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "y": self.y,
            "z": self.z,
            "V_y_z": self.V_y_z,
            "F_s": self.F_s,
            "envelope_uncond": self.envelope_uncond,
            "envelope_grh": self.envelope_grh,
            "empirical_S": self.empirical_S,
            "empirical_T": self.empirical_T,
            "empirical_Q": self.empirical_Q,
            "meta": self.meta,
        }


def build_sieve_report(
    records,
    base: int,
    x: float,
    y: float,
    z: float,
    pi_x: int,
    s: float = 2.0,
    strict: bool = False,
    extra_meta: dict | None = None,
) -> SieveReport:
    """Assemble the densities, envelopes, and empirical S/T/Q counts.

    Q counts every record passing the Fermat test; S counts records whose n
    survives sifting by the primes in [y, z); T counts sifted-out records that
    still pass the test. Q <= S + T holds by case split on each record.
    """
    emp_s = empirical_S(records, y, z)
    emp_t = empirical_T(records, base, y, z, strict)
    emp_q = sum(1 for rec in records if fermat_holds(base, rec.n, strict))
    env_u = count_envelope(x, "unconditional")
    env_g = count_envelope(x, "grh")
    meta = {
        "s": s,
        "pi_x": pi_x,
        "base": base,
        "strict_fermat": strict,
        "envelope_uncond_vacuous": env_u > pi_x,
        "envelope_grh_vacuous": env_g > pi_x,
    }
    if extra_meta:
        meta.update(extra_meta)
    return SieveReport(
        x=x,
        y=y,
        z=z,
        V_y_z=density_product(y, z),
        F_s=linear_sieve_F(s),
        envelope_uncond=env_u,
        envelope_grh=env_g,
        empirical_S=emp_s,
        empirical_T=emp_t,
        empirical_Q=emp_q,
        meta=meta,
    )
