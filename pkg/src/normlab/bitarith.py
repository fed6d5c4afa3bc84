"""Exact fixed-point binary arithmetic with certified error bounds.

A FixedPointNumber is sign * mantissa / 2^frac_bits where frac_bits =
certified digits N plus guard digits G, together with an error radius in
units of one ulp (2^-frac_bits).  The radius is tracked through every
operation and never understated; `certified_digit_count` reports how many
leading fractional digits are provably exact digits of the represented
real (it shrinks when the guard region sits in a carry-ambiguous run).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from .seqcore import HorizonError, SymbolicSequence

DEFAULT_GUARD_BITS = 64


class PrecisionError(ValueError):
    pass


class DomainError(ValueError):
    pass


def _bits_to_int(bits: np.ndarray) -> int:
    """MSB-first digit array -> integer."""
    n = len(bits)
    if n == 0:
        return 0
    word = int.from_bytes(np.packbits(bits).tobytes(), "big")
    return word >> ((-n) % 8)


@dataclass(frozen=True)
class FixedPointNumber:
    """sign * mant * 2^-frac_bits, known to within err_ulps * 2^-frac_bits."""

    mant: int
    frac_bits: int
    guard_bits: int = DEFAULT_GUARD_BITS
    sign: int = 1
    err_ulps: int = 0

    def __post_init__(self):
        if self.mant < 0:
            raise ValueError("mantissa is stored unsigned; use sign")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.guard_bits < 0 or self.guard_bits > self.frac_bits:
            raise PrecisionError("need 0 <= guard_bits <= frac_bits")
        if self.err_ulps < 0:
            raise ValueError("error bound cannot be negative")

    # -- construction -------------------------------------------------------

    @classmethod
    def zero(cls, N: int, G: int = DEFAULT_GUARD_BITS) -> "FixedPointNumber":
        return cls(0, N + G, G)

    @classmethod
    def from_fraction(cls, value, N: int, G: int = DEFAULT_GUARD_BITS) -> "FixedPointNumber":
        """Round a rational toward zero at N+G fractional bits (err <= 1 ulp,
        0 when the value is an exactly representable dyadic)."""
        v = Fraction(value)
        sign = 1 if v >= 0 else -1
        v = abs(v)
        F = N + G
        mant, rem = divmod(v.numerator << F, v.denominator)
        return cls(mant, F, G, sign, 0 if rem == 0 else 1)

    @classmethod
    def from_sequence(
        cls,
        seq: SymbolicSequence,
        N: int,
        G: int = DEFAULT_GUARD_BITS,
        integer_part: int = 0,
        exact: bool = False,
    ) -> "FixedPointNumber":
        """0.d1 d2 ... truncated at N+G fractional digits (plus an integer
        part).  err is 1 ulp for the dropped tail unless `exact` asserts the
        sequence is zero beyond the horizon."""
        if seq.alphabet.size != 2:
            raise DomainError("fixed-point numbers are binary")
        F = N + G
        take = F if seq.horizon is None else min(F, seq.horizon)
        bits = seq.digits(1, take)
        mant = _bits_to_int(bits)
        mant <<= F - take
        mant += integer_part << F
        if take == F:
            # dropped tail (digits beyond F, if any) is strictly below 1 ulp
            err = 0 if (seq.horizon is not None and seq.horizon <= F) else 1
        else:
            # digits beyond the horizon are unknown unless asserted zero
            err = 0 if exact else 1 << (F - take)
        return cls(mant, F, G, 1, err)

    # -- views ---------------------------------------------------------------

    @property
    def certified_bits(self) -> int:
        return self.frac_bits - self.guard_bits

    def value(self) -> Fraction:
        """The stored point value (center of the certified interval)."""
        return Fraction(self.sign * self.mant, 1 << self.frac_bits)

    def error_bound(self) -> Fraction:
        return Fraction(self.err_ulps, 1 << self.frac_bits)

    def error_bound_log2(self) -> Optional[int]:
        """Smallest integer e with error bound <= 2^e (None when exact)."""
        if self.err_ulps == 0:
            return None
        e = self.err_ulps.bit_length() - 1
        if self.err_ulps & (self.err_ulps - 1):
            e += 1  # not a power of two: round the exponent up
        return e - self.frac_bits

    def integer_part(self) -> int:
        return self.mant >> self.frac_bits

    def fraction_mant(self) -> int:
        return self.mant & ((1 << self.frac_bits) - 1)

    def certified_digit_count(self) -> int:
        """Largest t such that every real in [value - err, value + err] has
        the same first t fractional digits as the stored mantissa (digits of
        the magnitude).  Capped at the certified target N."""
        lo = self.mant - self.err_ulps
        hi = self.mant + self.err_ulps
        if lo < 0:
            return 0
        t = self.certified_bits
        while t > 0 and (lo >> (self.frac_bits - t)) != (hi >> (self.frac_bits - t)):
            t -= 1
        return t

    def fraction_digits(self, count: int, certified_only: bool = True) -> np.ndarray:
        """First `count` fractional digits of the magnitude, MSB first."""
        if certified_only and count > self.certified_digit_count():
            raise PrecisionError(
                f"asked for {count} digits, certified {self.certified_digit_count()}"
            )
        if count > self.frac_bits:
            raise PrecisionError("beyond stored precision")
        word = self.fraction_mant() >> (self.frac_bits - count)
        raw = word.to_bytes((count + 7) // 8, "big")
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8))
        return bits[-count:]

    def to_sequence(self, count: Optional[int] = None) -> SymbolicSequence:
        n = self.certified_digit_count() if count is None else count
        digits = self.fraction_digits(n)
        return SymbolicSequence.from_array(digits, r=2, name="fixedpoint")

    def with_error(self, err_ulps: int) -> "FixedPointNumber":
        return FixedPointNumber(self.mant, self.frac_bits, self.guard_bits, self.sign, err_ulps)

    def __repr__(self) -> str:
        ip = self.integer_part()
        lead = "".join(map(str, self.fraction_digits(min(16, self.frac_bits), False)))
        s = "-" if self.sign < 0 else ""
        return (
            f"FixedPointNumber({s}{ip}.{lead}..., frac_bits={self.frac_bits}, "
            f"err_ulps={self.err_ulps})"
        )


def _signed(x: FixedPointNumber) -> int:
    return x.sign * x.mant


def _aligned(a: FixedPointNumber, b: FixedPointNumber, auto_align: bool):
    F = max(a.frac_bits, b.frac_bits)
    if a.frac_bits != b.frac_bits and not auto_align:
        raise PrecisionError(
            f"precision mismatch: {a.frac_bits} vs {b.frac_bits} fractional bits"
        )
    G = max(a.guard_bits, b.guard_bits)
    am = _signed(a) << (F - a.frac_bits)
    bm = _signed(b) << (F - b.frac_bits)
    ae = a.err_ulps << (F - a.frac_bits)
    be = b.err_ulps << (F - b.frac_bits)
    return F, G, am, bm, ae, be


def carry_add(a: FixedPointNumber, b: FixedPointNumber, auto_align: bool = True) -> FixedPointNumber:
    """Exact sum as big-integer addition of the aligned digit strings."""
    F, G, am, bm, ae, be = _aligned(a, b, auto_align)
    v = am + bm
    sign = 1 if v >= 0 else -1
    return FixedPointNumber(abs(v), F, G, sign, ae + be)


def mod1(x: FixedPointNumber) -> FixedPointNumber:
    """Fractional-part reduction onto [0, 1)."""
    m = x.fraction_mant()
    if x.sign < 0 and m != 0:
        m = (1 << x.frac_bits) - m
    return FixedPointNumber(m, x.frac_bits, x.guard_bits, 1, x.err_ulps)


def neg(x: FixedPointNumber) -> FixedPointNumber:
    """Mod-1 negation: the two's complement of the fraction, so the digits
    before the final ulp are the mirror of the digits of x."""
    if x.sign < 0 or x.integer_part() != 0:
        raise DomainError("neg expects a value in [0, 1)")
    m = x.fraction_mant()
    out = 0 if m == 0 else (1 << x.frac_bits) - m
    return FixedPointNumber(out, x.frac_bits, x.guard_bits, 1, x.err_ulps)


def mul_rational(x: FixedPointNumber, p: int, q: int, N: int, G: Optional[int] = None) -> FixedPointNumber:
    """x * p / q at N (+G) fractional bits: big-integer multiply by |p|, long
    division by q, truncation toward zero (adds at most 1 ulp)."""
    if q == 0:
        raise DomainError("q must be a positive integer, got 0")
    if q < 0:
        raise DomainError("q must be positive; carry the sign in p")
    if p == 0:
        raise DomainError("p must be nonzero")
    Gout = x.guard_bits if G is None else G
    F = N + Gout
    num = x.mant * abs(p) << F
    den = q << x.frac_bits
    mant, rem = divmod(num, den)
    err_num = x.err_ulps * abs(p) << F
    err = -((-err_num) // den)  # ceil
    if rem:
        err += 1
    sign = x.sign * (1 if p > 0 else -1)
    return FixedPointNumber(mant, F, Gout, sign, err)


def mul(x: FixedPointNumber, y: FixedPointNumber, N: int, G: Optional[int] = None) -> FixedPointNumber:
    """Full product at N (+G) fractional bits.

    Certified error <= |x|*err_y + |y|*err_x + err_x*err_y + 1 ulp of
    truncation; with operand errors at 1 ulp this is within the
    (|x| + |y| + 1) * 2^-(N+G) envelope.
    """
    Gout = max(x.guard_bits, y.guard_bits) if G is None else G
    F = N + Gout
    if x.frac_bits < F or y.frac_bits < F:
        raise PrecisionError(
            f"operands carry {x.frac_bits} and {y.frac_bits} fractional bits, need >= {F}"
        )
    shift = x.frac_bits + y.frac_bits - F
    prod = x.mant * y.mant
    mant = prod >> shift
    err_scaled = (
        x.mant * y.err_ulps + y.mant * x.err_ulps + x.err_ulps * y.err_ulps
    )
    err = -((-err_scaled) >> shift) if err_scaled else 0  # ceil division by 2^shift
    if prod & ((1 << shift) - 1):
        err += 1
    return FixedPointNumber(mant, F, Gout, x.sign * y.sign, err)


def shifted_sum(
    seq: SymbolicSequence,
    shifts: Iterable[int],
    N: int,
    G: int = DEFAULT_GUARD_BITS,
) -> FixedPointNumber:
    """Sum of 2^-s * (0.seq) over the shifts s, by big-integer accumulation.

    Shifts beyond N+G are dropped; each omitted term is below one ulp and
    the omitted shifts are distinct integers, so the dropped tail is below
    2^(1-(N+G)) and is covered by 2 ulps on top of the per-copy truncation.
    """
    F = N + G
    svals = sorted(set(int(s) for s in shifts))
    if any(s < 0 for s in svals):
        raise DomainError("shifts must be >= 0")
    kept = [s for s in svals if s < F]
    omitted = len(svals) - len(kept)
    if not kept:
        return FixedPointNumber(0, F, G, 1, 2 if omitted else 0)
    top = F - min(kept)
    bits = seq.digits(1, top) if (seq.horizon is None or seq.horizon >= top) else None
    if bits is None:
        bits = np.zeros(top, dtype=np.uint8)
        h = seq.horizon
        bits[:h] = seq.digits(1, h)
    acc = 0
    err = 2 if omitted else 0
    base_cache: dict[int, int] = {}
    for s in kept:
        take = F - s
        word = base_cache.get(take)
        if word is None:
            word = _bits_to_int(bits[:take])
            base_cache[take] = word
        acc += word
        if seq.horizon is None or seq.horizon > take:
            err += 1  # this copy was truncated; exact otherwise
    return FixedPointNumber(acc, F, G, 1, err)


# ---------------------------------------------------------------------------
# streaming carry addition


def stream_carry_add(
    s1: SymbolicSequence,
    s2: SymbolicSequence,
    N: int,
    lookahead_cap: int = 64,
) -> tuple[np.ndarray, np.ndarray]:
    """Digits 1..N of the carry sum of two binary digit streams.

    The carry into position n is resolved by scanning right from n+1 for
    the first column whose digit sum differs from 1: sum 2 means carry 1,
    sum 0 means carry 0.  Positions whose scan exceeds `lookahead_cap` are
    flagged ambiguous (second return value); their digit is emitted with
    carry 0 but carries no certificate.
    """
    if s1.alphabet.size != 2 or s2.alphabet.size != 2:
        raise DomainError("carry addition is defined for binary sequences")
    if N < 1:
        raise DomainError("N must be >= 1")
    M = N + lookahead_cap
    for s in (s1, s2):
        if s.horizon is not None and s.horizon < M:
            raise HorizonError(
                f"need digits up to {M} (= N + lookahead), horizon is {s.horizon}"
            )
    a = s1.digits(1, M).astype(np.int8)
    b = s2.digits(1, M).astype(np.int8)
    col = a + b  # 0, 1, or 2 per column
    pos = np.arange(N)
    non1 = np.flatnonzero(col != 1)  # columns whose digit sum differs from 1
    if len(non1) == 0:
        ambiguous = np.ones(N, dtype=bool)
        return (col[:N] % 2).astype(np.uint8), ambiguous
    nxt = np.searchsorted(non1, pos, side="right")
    has = nxt < len(non1)
    j = np.where(has, non1[np.minimum(nxt, len(non1) - 1)], M)
    within = has & (j - pos <= lookahead_cap)
    carry = np.zeros(N, dtype=np.int8)
    carry[within] = (col[j[within]] == 2).astype(np.int8)
    ambiguous = ~within
    digits = ((col[:N] + carry) % 2).astype(np.uint8)
    return digits, ambiguous
