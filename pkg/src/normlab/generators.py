"""Random-access digit generators for the constructed sequences.

Provides the Gray-ordered Champernowne-like normal sequence kappa, the
sparse indicator number y and its reciprocal partner v, seeded Bernoulli
surrogates, the Champernowne reference, and periodic-on-an-index-set
fillers.  Every generator is deterministic: identical parameters yield
identical digit functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Union

import numpy as np

from .grayorder import alt_block, reflected_gray
from .seqcore import (
    BINARY,
    Alphabet,
    Block,
    IndexSet,
    SymbolicSequence,
)


class DomainError(ValueError):
    pass


# ---------------------------------------------------------------------------
# level schedule: 2, 8, 2048, 2048*2^2048, ...


class LevelSchedule:
    """The doubling-tower level lengths n_1=2, n_{k+1} = n_k * 2^{n_k}.

    Every n_k is a power of two, so levels are stored as exact exponents
    e_k = log2(n_k), with e_{k+1} = e_k + n_k.  Exponents are materialized
    while they fit in `exponent_bit_cap` bits; with the default cap the
    first five are exact: 1, 3, 11, 2059, 2059 + 2^2059.  Level values are
    produced on demand while their bit length is sane; desk-scale work
    never materializes n_5.  The schedule is superincreasing
    (n_{k+1} > n_1 + ... + n_k), so finite-sum representations are unique.
    """

    _VALUE_EXP_CAP = 1 << 24  # refuse to materialize 2^e for e beyond this

    def __init__(self, exponent_bit_cap: int = 4096):
        exps = [1]
        while True:
            e = exps[-1]
            if e >= exponent_bit_cap:
                break
            nxt = e + (1 << e)
            if nxt.bit_length() > exponent_bit_cap:
                break
            exps.append(nxt)
        self._exponents = exps

    @property
    def depth(self) -> int:
        return len(self._exponents)

    def exponent(self, k: int) -> int:
        """log2(n_k), 1-indexed."""
        if not 1 <= k <= self.depth:
            raise DomainError(f"level {k} outside the materialized range 1..{self.depth}")
        return self._exponents[k - 1]

    def value(self, k: int) -> int:
        """n_k as an integer; refuses astronomically long values."""
        e = self.exponent(k)
        if e > self._VALUE_EXP_CAP:
            raise DomainError(f"n_{k} is too long to materialize (log2 = {e})")
        return 1 << e

    def fits_level(self, p: int, k: int) -> bool:
        """p <= n_k, comparing against the exact power of two."""
        e = self.exponent(k)
        bl = p.bit_length()
        if bl <= e:
            return True
        if bl > e + 1:
            return False
        return p == (1 << e) if e <= self._VALUE_EXP_CAP else True

    def level_of(self, p: int) -> int:
        """The k with n_k < p <= n_{k+1}; requires p > n_1."""
        if p <= 2:
            raise DomainError("level_of is defined for positions beyond n_1 = 2")
        for k in range(1, self.depth):
            if self.fits_level(p, k + 1):
                return k
        raise DomainError("position beyond the materialized schedule")

    def finite_sum_contains(self, p: int) -> bool:
        """Membership of p in {0} union FS((n_k)): greedy subtraction of the
        largest level value, valid because the schedule is superincreasing."""
        if p < 0:
            return False
        v = p
        for k in range(self.depth, 0, -1):
            e = self.exponent(k)
            if e >= v.bit_length() or e > self._VALUE_EXP_CAP:
                continue
            nk = 1 << e
            if nk <= v:
                v -= nk
        return v == 0

    def finite_sums(self) -> IndexSet:
        """S = {0} union FS((n_k)) restricted to positive positions.

        (0 belongs to the set but is not a 1-indexed position; membership
        queries at 0 still answer True via `finite_sum_contains`.)
        The enumerable view covers sums of materializable levels, which is
        every element below n_{depth}; superincreasing levels make
        subset-mask numeric order equal to sum order.
        """
        values = []
        for k in range(1, self.depth + 1):
            if self.exponent(k) <= self._VALUE_EXP_CAP:
                values.append(self.value(k))

        def it():
            for mask in range(1, 1 << len(values)):
                yield sum(values[i] for i in range(len(values)) if mask >> i & 1)

        return IndexSet(self.finite_sum_contains, it, finite=True, name="FS(levels)")


SCHEDULE = LevelSchedule()


# ---------------------------------------------------------------------------
# kappa: the Gray-ordered Champernowne-like normal sequence


@lru_cache(maxsize=None)
def _kappa_prefix_2048() -> np.ndarray:
    """First n_3 = 2048 digits, built chunkwise from the alternated orderings."""
    level = np.array([0, 1], dtype=np.uint8)  # the level-1 seed block
    for k in (1, 2):
        n_k = SCHEDULE.value(k)
        start = Block(tuple(int(b) for b in level))
        chunks = [alt_block(n_k, l, start).as_array() for l in range(1, 2**n_k + 1)]
        level = np.concatenate(chunks)
    level.setflags(write=False)
    return level


def kappa_digit(p: int) -> int:
    """Digit p (1-indexed) of the sequence kappa."""
    if p < 1:
        raise DomainError("positions are 1-indexed")
    prefix = _kappa_prefix_2048()
    if p <= 2048:
        return int(prefix[p - 1])
    k = SCHEDULE.level_of(p)
    e = SCHEDULE.exponent(k)
    if e > SCHEDULE._VALUE_EXP_CAP:
        raise DomainError("position beyond the materializable schedule")
    l = ((p - 1) >> e) + 1              # chunk index within the level-(k+1) block
    r = ((p - 1) & ((1 << e) - 1)) + 1  # position within the chunk
    # chunk l is the l-th Gray block started at the level-k prefix, mirrored
    # for even l; its bit r differs from prefix bit r by the Gray word bit.
    bit = kappa_digit(r)
    g = reflected_gray(l - 1)
    weight = (1 << e) - r               # bit weight of position r in an n_k-bit word
    if weight < g.bit_length():
        bit ^= (g >> weight) & 1
    if l % 2 == 0:
        bit ^= 1
    return bit


def _kappa_bulk(start: int, count: int) -> np.ndarray:
    prefix = _kappa_prefix_2048()
    lo, hi = start, start + count - 1
    out = np.empty(count, dtype=np.uint8)
    pos = lo
    while pos <= hi:
        if pos <= 2048:
            take = min(hi, 2048) - pos + 1
            out[pos - lo : pos - lo + take] = prefix[pos - 1 : pos - 1 + take]
            pos += take
            continue
        k = SCHEDULE.level_of(pos)
        if SCHEDULE.exponent(k) > 11:
            # chunks longer than the memoized prefix: per-digit recursion
            out[pos - lo] = kappa_digit(pos)
            pos += 1
            continue
        n_k = SCHEDULE.value(k)
        l = (pos - 1) // n_k + 1
        chunk_lo = (l - 1) * n_k + 1
        chunk = prefix[:n_k].copy()
        g = reflected_gray(l - 1)
        j = 0
        while g:
            if g & 1:
                chunk[n_k - 1 - j] ^= 1
            g >>= 1
            j += 1
        if l % 2 == 0:
            chunk ^= 1
        a = pos - chunk_lo
        take = min(hi, chunk_lo + n_k - 1) - pos + 1
        out[pos - lo : pos - lo + take] = chunk[a : a + take]
        pos += take
    return out


def kappa_sequence() -> SymbolicSequence:
    return SymbolicSequence(
        kappa_digit, BINARY, horizon=None, name="kappa", bulk_fn=_kappa_bulk
    )


# ---------------------------------------------------------------------------
# y: indicator of the finite-sums set (coordinate 0 is the integer part)

Y_INTEGER_PART = 1  # 0 is in the sum set, so the integer bit of y is 1


def y_digit(p: int) -> int:
    """Indicator digit of the sparse number y at coordinate p >= 0.

    Coordinate 0 carries the integer part; coordinates >= 1 are the
    fractional digits, 1 exactly on the finite-sums set.
    """
    if p < 0:
        raise DomainError("coordinates start at 0")
    return 1 if SCHEDULE.finite_sum_contains(p) else 0


def _y_bulk(start: int, count: int) -> np.ndarray:
    out = np.zeros(count, dtype=np.uint8)
    hi = start + count - 1
    for s in SCHEDULE.finite_sums().elements_up_to(hi):
        if s >= start:
            out[s - start] = 1
    return out


def y_sequence() -> SymbolicSequence:
    """Fractional digits of y (positions >= 1)."""
    return SymbolicSequence(y_digit, BINARY, horizon=None, name="y", bulk_fn=_y_bulk)


# ---------------------------------------------------------------------------
# v: the reciprocal partner of y


def v_digit(p: int) -> int:
    """Digit p (1-indexed) of the block-doubling sequence v.

    The level-(k+1) block is (B_k 0^{n_k}) repeated, starting from B_1 = 11,
    so the digit reduces along p -> ((p-1) mod 2 n_k) + 1 until p <= 2.
    """
    if p < 1:
        raise DomainError("positions are 1-indexed")
    while p > 2:
        k = SCHEDULE.level_of(p)
        e = SCHEDULE.exponent(k)
        if e > SCHEDULE._VALUE_EXP_CAP:
            raise DomainError("position beyond the materializable schedule")
        r = (p - 1) % (2 << e) + 1
        if r > (1 << e):
            return 0
        p = r
    return 1


@lru_cache(maxsize=None)
def _v_pattern_4096() -> np.ndarray:
    pat = np.array([1, 1], dtype=np.uint8)
    for k in (1, 2):
        n_k = SCHEDULE.value(k)
        reps = SCHEDULE.value(k + 1) // (2 * n_k)
        pat = np.tile(np.concatenate([pat, np.zeros(n_k, dtype=np.uint8)]), reps)
    pat = np.concatenate([pat, np.zeros(2048, dtype=np.uint8)])
    pat.setflags(write=False)
    return pat  # (B_3 0^2048): the tile of the level-4 block, length 4096


def _v_bulk(start: int, count: int) -> np.ndarray:
    hi = start + count - 1
    if hi.bit_length() <= 62:
        # any such position is far inside the level-4 block, which tiles
        # the 4096-digit pattern (B_3 0^2048)
        idx = np.arange(start - 1, hi, dtype=np.int64)
        return _v_pattern_4096()[idx % 4096]
    return np.fromiter(
        (v_digit(p) for p in range(start, hi + 1)), dtype=np.uint8, count=count
    )


def v_sequence() -> SymbolicSequence:
    return SymbolicSequence(v_digit, BINARY, horizon=None, name="v", bulk_fn=_v_bulk)


# ---------------------------------------------------------------------------
# counter-based PRNG (SplitMix64 finalizer on seed + counter)

_SM_GAMMA = 0x9E3779B97F4A7C15
_SM_M1 = 0xBF58476D1CE4E5B9
_SM_M2 = 0x94D049BB133111EB
_MASK64 = (1 << 64) - 1


def splitmix64(seed: int, index: int) -> int:
    """64-bit word #index (0-based) of the stream with the given seed.

    word(seed, i) = mix((seed + (i+1) * 0x9E3779B97F4A7C15) mod 2^64) where
    mix is z ^= z>>30; z *= 0xBF58476D1CE4E5B9; z ^= z>>27;
    z *= 0x94D049BB133111EB; z ^= z>>31.  Pure integer arithmetic, hence
    bit-identical across runs and platforms.
    """
    z = (seed + (index + 1) * _SM_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * _SM_M1) & _MASK64
    z = ((z ^ (z >> 27)) * _SM_M2) & _MASK64
    return z ^ (z >> 31)


def _vec_words(seed: int, indices: np.ndarray) -> np.ndarray:
    """Vectorized splitmix64 over an array of word indices."""
    with np.errstate(over="ignore"):
        z = np.uint64(seed & _MASK64) + (indices.astype(np.uint64) + np.uint64(1)) * np.uint64(_SM_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_SM_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_SM_M2)
        return z ^ (z >> np.uint64(31))


def derive_seed(seed: int, tag: str) -> int:
    """Stable per-purpose substream seed."""
    h = seed & _MASK64
    for ch in tag.encode():
        h = splitmix64(h, ch)
    return h


def _as_fraction(p) -> Fraction:
    if isinstance(p, (Fraction, str)):
        return Fraction(p)
    return Fraction(p)  # int or float (floats are exact binary rationals)


def bernoulli_stream(p, seed: int, N: int) -> SymbolicSequence:
    """Deterministic pseudorandom binary digits with marginal P(1) = p.

    Digit i is 1 iff the (i-1)-th 64-bit word is below floor(p * 2^64);
    exact, branch-simple, reproducible per (p, seed).
    """
    pf = _as_fraction(p)
    if not 0 < pf < 1:
        raise DomainError(f"p must lie strictly between 0 and 1, got {p}")
    if N < 1:
        raise DomainError("N must be >= 1")
    threshold = (pf.numerator << 64) // pf.denominator

    def digit(pos: int) -> int:
        return 1 if splitmix64(seed, pos - 1) < threshold else 0

    def bulk(start: int, count: int) -> np.ndarray:
        idx = np.arange(start - 1, start - 1 + count, dtype=np.uint64)
        return (_vec_words(seed, idx) < np.uint64(threshold)).astype(np.uint8)

    return SymbolicSequence(
        digit, BINARY, horizon=N, name=f"bernoulli(p={pf}, seed={seed})", bulk_fn=bulk
    )


def uniform_stream(r: int, seed: int, N: int) -> SymbolicSequence:
    """Uniform digits over {0..r-1}: one 64-bit word per digit reduced mod r
    (bias below 2^-56 for r <= 256, irrelevant at desk scale)."""
    if r < 2 or r > 256:
        raise DomainError("uniform_stream supports 2 <= r <= 256")
    if N < 1:
        raise DomainError("N must be >= 1")

    def digit(pos: int) -> int:
        return splitmix64(seed, pos - 1) % r

    def bulk(start: int, count: int) -> np.ndarray:
        idx = np.arange(start - 1, start - 1 + count, dtype=np.uint64)
        return (_vec_words(seed, idx) % np.uint64(r)).astype(np.uint8)

    return SymbolicSequence(
        digit, Alphabet(r), horizon=N, name=f"uniform(r={r}, seed={seed})", bulk_fn=bulk
    )


# ---------------------------------------------------------------------------
# reference sequences


def champernowne_digits(r: int, N: int) -> SymbolicSequence:
    """Concatenation of the base-r representations of 1, 2, 3, ..."""
    if r < 2:
        raise DomainError("alphabet size must be >= 2")
    cache: dict[str, object] = {"digits": np.zeros(0, dtype=np.uint8), "next": 1}

    def materialize(upto: int) -> np.ndarray:
        arr = cache["digits"]
        if len(arr) >= upto:
            return arr
        chunks = [arr]
        total = len(arr)
        value = cache["next"]
        while total < upto:
            digs = []
            v = value
            while v:
                v, d = divmod(v, r)
                digs.append(d)
            digs.reverse()
            chunks.append(np.array(digs, dtype=np.uint8 if r <= 256 else np.uint32))
            total += len(digs)
            value += 1
        arr = np.concatenate(chunks)
        cache["digits"] = arr
        cache["next"] = value
        return arr

    def digit(p: int) -> int:
        return int(materialize(p)[p - 1])

    def bulk(start: int, count: int) -> np.ndarray:
        arr = materialize(start + count - 1)
        return arr[start - 1 : start - 1 + count].copy()

    return SymbolicSequence(
        digit, Alphabet(r), horizon=N, name=f"champernowne(r={r})", bulk_fn=bulk
    )


def periodic_sparse(
    pattern: Block,
    S: IndexSet,
    filler: Union[int, Callable[[int], int]] = 0,
) -> SymbolicSequence:
    """Digits along S cycle through `pattern`; digits off S follow `filler`
    (a constant digit or a position -> digit rule)."""
    if len(pattern) < 1:
        raise DomainError("pattern must be nonempty")
    pat = pattern.digits
    L = len(pat)
    fill_fn = filler if callable(filler) else (lambda p: filler)

    def digit(p: int) -> int:
        if p in S:
            k = S.count_up_to(p)  # rank of p among the members of S
            return pat[(k - 1) % L]
        return fill_fn(p)

    def bulk(start: int, count: int) -> np.ndarray:
        hi = start + count - 1
        out = np.fromiter(
            (fill_fn(p) for p in range(start, hi + 1)),
            dtype=np.uint8 if pattern.alphabet.size <= 256 else np.uint32,
            count=count,
        )
        for k, s in enumerate(S.elements_up_to(hi), start=1):
            if s >= start:
                out[s - start] = pat[(k - 1) % L]
        return out

    return SymbolicSequence(
        digit, pattern.alphabet, horizon=None, name="periodic-sparse", bulk_fn=bulk
    )


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeneratorInstance:
    """Named, parameterized generator for the CLI and experiment harness."""

    kind: str
    p: Optional[str] = None
    seed: Optional[int] = None
    r: int = 2
    n: Optional[int] = None
    pattern: Optional[str] = None

    def build(self) -> SymbolicSequence:
        if self.kind == "kappa":
            return kappa_sequence()
        if self.kind == "y":
            return y_sequence()
        if self.kind == "v":
            return v_sequence()
        if self.kind == "bernoulli":
            if self.p is None or self.seed is None or self.n is None:
                raise DomainError("bernoulli needs p, seed, and n")
            return bernoulli_stream(Fraction(self.p), self.seed, self.n)
        if self.kind == "uniform":
            if self.seed is None or self.n is None:
                raise DomainError("uniform needs seed and n")
            return uniform_stream(self.r, self.seed, self.n)
        if self.kind == "champernowne":
            if self.n is None:
                raise DomainError("champernowne needs n")
            return champernowne_digits(self.r, self.n)
        if self.kind in ("periodic", "periodic-sparse"):
            if not self.pattern:
                raise DomainError("periodic needs a pattern")
            return SymbolicSequence.periodic(Block.from_string(self.pattern, self.r))
        raise DomainError(f"unknown generator kind {self.kind!r}")
