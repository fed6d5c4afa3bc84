"""Alphabets, blocks, symbolic sequences, index sets, and occurrence counting.

Positions are 1-indexed throughout.  Counts and frequencies are exact
rationals (`fractions.Fraction`); callers convert to float only for display.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction
from itertools import count as _count
from itertools import islice
from typing import Callable, Iterable, Iterator, Optional, Sequence

import numpy as np


class AlphabetError(ValueError):
    pass


class LengthError(ValueError):
    pass


class HorizonError(ValueError):
    pass


class EmptyWindowError(ValueError):
    pass


@dataclass(frozen=True)
class Alphabet:
    """Digit alphabet {0, 1, ..., size-1}."""

    size: int

    def __post_init__(self):
        if self.size < 2:
            raise AlphabetError(f"alphabet size must be >= 2, got {self.size}")

    def __contains__(self, digit: int) -> bool:
        return 0 <= digit < self.size


BINARY = Alphabet(2)


def _dtype_for(r: int):
    return np.uint8 if r <= 256 else np.uint32


@dataclass(frozen=True)
class Block:
    """Finite word over an alphabet; the unit of all counting."""

    digits: tuple[int, ...]
    alphabet: Alphabet = BINARY

    def __post_init__(self):
        if len(self.digits) < 1:
            raise LengthError("block must have length >= 1")
        for d in self.digits:
            if d not in self.alphabet:
                raise AlphabetError(
                    f"digit {d} outside alphabet of size {self.alphabet.size}"
                )

    @classmethod
    def from_string(cls, text: str, r: int = 2) -> "Block":
        return cls(tuple(int(c) for c in text), Alphabet(r))

    @classmethod
    def from_code(cls, code: int, length: int, r: int = 2) -> "Block":
        """Decode a base-r integer code, first digit most significant."""
        digits = []
        for _ in range(length):
            code, d = divmod(code, r)
            digits.append(d)
        return cls(tuple(reversed(digits)), Alphabet(r))

    def __len__(self) -> int:
        return len(self.digits)

    def __str__(self) -> str:
        if self.alphabet.size <= 10:
            return "".join(str(d) for d in self.digits)
        return ",".join(str(d) for d in self.digits)

    def encode(self) -> int:
        """Base-r integer code, first digit most significant."""
        code = 0
        for d in self.digits:
            code = code * self.alphabet.size + d
        return code

    def mirror(self) -> "Block":
        if self.alphabet.size != 2:
            raise AlphabetError("mirror is defined for the binary alphabet only")
        return Block(tuple(1 - d for d in self.digits), self.alphabet)

    def as_array(self) -> np.ndarray:
        return np.array(self.digits, dtype=_dtype_for(self.alphabet.size))


def mirror(block: Block) -> Block:
    """Bitwise complement of a binary block."""
    return block.mirror()


class SymbolicSequence:
    """Deterministic random-access digit source.

    `digit(p)` is defined for 1 <= p <= horizon (horizon None = unbounded)
    and always returns the same digit for the same p.
    """

    def __init__(
        self,
        digit_fn: Callable[[int], int],
        alphabet: Alphabet = BINARY,
        horizon: Optional[int] = None,
        name: str = "",
        bulk_fn: Optional[Callable[[int, int], np.ndarray]] = None,
    ):
        self._digit_fn = digit_fn
        self.alphabet = alphabet
        self.horizon = horizon
        self.name = name
        self._bulk_fn = bulk_fn

    def _check_range(self, start: int, count: int) -> None:
        if start < 1:
            raise HorizonError(f"positions are 1-indexed, got {start}")
        if count < 0:
            raise HorizonError(f"negative digit count {count}")
        if self.horizon is not None and start + count - 1 > self.horizon:
            raise HorizonError(
                f"positions up to {start + count - 1} exceed horizon {self.horizon}"
            )

    def digit(self, p: int) -> int:
        self._check_range(p, 1)
        return self._digit_fn(p)

    def digits(self, start: int, count: int) -> np.ndarray:
        """Digits at positions start .. start+count-1 as an array."""
        self._check_range(start, count)
        if self._bulk_fn is not None:
            arr = self._bulk_fn(start, count)
        else:
            dtype = _dtype_for(self.alphabet.size)
            arr = np.fromiter(
                (self._digit_fn(p) for p in range(start, start + count)),
                dtype=dtype,
                count=count,
            )
        return arr

    def prefix(self, n: int) -> np.ndarray:
        return self.digits(1, n)

    def block(self, start: int, length: int) -> Block:
        return Block(tuple(int(d) for d in self.digits(start, length)), self.alphabet)

    @classmethod
    def from_array(cls, arr, r: int = 2, name: str = "") -> "SymbolicSequence":
        data = np.asarray(arr, dtype=_dtype_for(r))
        if data.size and int(data.max()) >= r:
            raise AlphabetError("array contains digits outside the alphabet")
        return cls(
            lambda p: int(data[p - 1]),
            Alphabet(r),
            horizon=len(data),
            name=name,
            bulk_fn=lambda s, c: data[s - 1 : s - 1 + c].copy(),
        )

    @classmethod
    def periodic(cls, pattern, r: int = 2, name: str = "") -> "SymbolicSequence":
        if isinstance(pattern, Block):
            r = pattern.alphabet.size
            pat = pattern.as_array()
        else:
            pat = np.asarray(list(pattern), dtype=_dtype_for(r))
        L = len(pat)

        def bulk(start: int, count: int) -> np.ndarray:
            idx = (np.arange(start - 1, start - 1 + count)) % L
            return pat[idx]

        return cls(
            lambda p: int(pat[(p - 1) % L]),
            Alphabet(r),
            horizon=None,
            name=name or f"periodic({''.join(map(str, pat.tolist()))})",
            bulk_fn=bulk,
        )

    @classmethod
    def constant(cls, digit: int, r: int = 2, name: str = "") -> "SymbolicSequence":
        return cls.periodic([digit], r=r, name=name or f"constant({digit})")


class IndexSet:
    """Subset of the positive integers with a sorted enumerable view."""

    def __init__(
        self,
        contains: Callable[[int], bool],
        iterator_factory: Callable[[], Iterator[int]],
        finite: bool = False,
        name: str = "",
    ):
        self._contains = contains
        self._iterator_factory = iterator_factory
        self.finite = finite
        self.name = name

    def __contains__(self, p: int) -> bool:
        return p >= 1 and self._contains(p)

    def __iter__(self) -> Iterator[int]:
        return self._iterator_factory()

    def element(self, k: int) -> int:
        """k-th smallest element, 1-indexed."""
        if k < 1:
            raise IndexError("element index is 1-based")
        for i, p in enumerate(self, start=1):
            if i == k:
                return p
        raise IndexError(f"index set exhausted before element {k}")

    def elements_up_to(self, n: int) -> list[int]:
        out = []
        for p in self:
            if p > n:
                break
            out.append(p)
        return out

    def count_up_to(self, n: int) -> int:
        return len(self.elements_up_to(n))

    def size(self) -> Optional[int]:
        if not self.finite:
            return None
        return sum(1 for _ in self)

    @classmethod
    def naturals(cls) -> "IndexSet":
        return cls(lambda p: True, lambda: _count(1), finite=False, name="N")

    @classmethod
    def arithmetic(cls, first: int, step: int, stop: Optional[int] = None) -> "IndexSet":
        """first, first+step, first+2*step, ... (optionally bounded by stop)."""
        if first < 1 or step < 1:
            raise ValueError("arithmetic index set needs first >= 1, step >= 1")

        def member(p: int) -> bool:
            return p >= first and (p - first) % step == 0 and (stop is None or p <= stop)

        def it() -> Iterator[int]:
            p = first
            while stop is None or p <= stop:
                yield p
                p += step

        name = f"{first}+{step}k" + ("" if stop is None else f"<= {stop}")
        return cls(member, it, finite=stop is not None, name=name)

    @classmethod
    def interval(cls, a: int, b: int) -> "IndexSet":
        return cls.arithmetic(a, 1, stop=b)

    @classmethod
    def from_elements(cls, elements: Iterable[int]) -> "IndexSet":
        elems = sorted(set(int(e) for e in elements))
        if elems and elems[0] < 1:
            raise ValueError("index set elements must be >= 1")
        eset = set(elems)
        return cls(lambda p: p in eset, lambda: iter(elems), finite=True, name="explicit")

    @classmethod
    def empty(cls) -> "IndexSet":
        return cls(lambda p: False, lambda: iter(()), finite=True, name="empty")


# ---------------------------------------------------------------------------
# occurrence counting


def _anchor_codes(digits: np.ndarray, m: int, r: int) -> np.ndarray:
    """Base-r code of the m-block anchored at each position (first digit MSB)."""
    W = len(digits) - m + 1
    if W <= 0:
        return np.zeros(0, dtype=np.int64)
    if r**m >= 2**62:
        raise LengthError(f"block codes for m={m}, r={r} exceed the 64-bit budget")
    codes = np.zeros(W, dtype=np.int64)
    for j in range(m):
        codes *= r
        codes += digits[j : j + W].astype(np.int64)
    return codes


def block_density(B: Block, C: Block) -> Fraction:
    """Fraction of anchored windows of B equal to C."""
    if len(C) > len(B):
        raise LengthError(f"|C|={len(C)} exceeds |B|={len(B)}")
    if B.alphabet != C.alphabet:
        raise AlphabetError("blocks over different alphabets")
    codes = _anchor_codes(B.as_array(), len(C), B.alphabet.size)
    hits = int(np.count_nonzero(codes == C.encode()))
    return Fraction(hits, len(B) - len(C) + 1)


def prefix_frequency(seq: SymbolicSequence, B: Block, N: int) -> Fraction:
    """Fraction of anchors n in [1, N-|B|+1] where B occurs in seq."""
    if N < len(B):
        raise LengthError(f"window N={N} shorter than block length {len(B)}")
    digits = seq.digits(1, N)
    codes = _anchor_codes(digits, len(B), seq.alphabet.size)
    hits = int(np.count_nonzero(codes == B.encode()))
    return Fraction(hits, N - len(B) + 1)


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Occurrence fractions of the m-blocks anchored at a finite window."""

    m: int
    window: str
    counts: dict[tuple[int, ...], int]
    total: int
    alphabet: Alphabet = BINARY

    def __post_init__(self):
        if self.total < 1:
            raise EmptyWindowError("empty window")
        if sum(self.counts.values()) != self.total:
            raise ValueError("block counts do not add up to the window size")

    def fraction(self, block) -> Fraction:
        key = tuple(block.digits) if isinstance(block, Block) else tuple(block)
        return Fraction(self.counts.get(key, 0), self.total)

    def fractions(self) -> dict[tuple[int, ...], Fraction]:
        return {k: Fraction(v, self.total) for k, v in self.counts.items()}

    def to_float_dict(self) -> dict[str, float]:
        return {
            "".join(map(str, k)): v / self.total for k, v in sorted(self.counts.items())
        }

    def merge(self, other: "EmpiricalMeasure") -> "EmpiricalMeasure":
        """Associative merge of counts from disjoint sub-windows."""
        if self.m != other.m or self.alphabet != other.alphabet:
            raise ValueError("can only merge measures of the same block length")
        counts = dict(self.counts)
        for k, v in other.counts.items():
            counts[k] = counts.get(k, 0) + v
        return EmpiricalMeasure(
            self.m,
            f"{self.window}+{other.window}",
            counts,
            self.total + other.total,
            self.alphabet,
        )


def empirical_measure(seq: SymbolicSequence, m: int, window) -> EmpiricalMeasure:
    """Count m-blocks anchored at a prefix [1, N-m+1] (window=int N) or at the
    members of a finite IndexSet (window=IndexSet)."""
    r = seq.alphabet.size
    if isinstance(window, IndexSet):
        anchors = list(window)
        if not anchors:
            raise EmptyWindowError("empty window")
        top = max(anchors) + m - 1
        digits = seq.digits(1, top)
        codes = _anchor_codes(digits, m, r)
        at = codes[np.asarray(anchors, dtype=np.int64) - 1]
        desc = f"indexset({window.name}, {len(anchors)} anchors)"
    else:
        N = int(window)
        if N < m:
            raise EmptyWindowError(f"prefix {N} shorter than block length {m}")
        digits = seq.digits(1, N)
        at = _anchor_codes(digits, m, r)
        desc = f"prefix({N})"
    if r**m <= 2**24:
        binc = np.bincount(at, minlength=r**m)
        nz = np.nonzero(binc)[0]
        counts = {tuple(Block.from_code(int(c), m, r).digits): int(binc[c]) for c in nz}
    else:
        counts = {}
        uniq, cnt = np.unique(at, return_counts=True)
        for c, n in zip(uniq, cnt):
            counts[tuple(Block.from_code(int(c), m, r).digits)] = int(n)
    return EmpiricalMeasure(m, desc, counts, len(at), seq.alphabet)


def joint_frequency(
    seq1: SymbolicSequence,
    seq2: SymbolicSequence,
    B1: Block,
    B2: Block,
    N: int,
) -> Fraction:
    """Fraction of common anchors where B1 occurs in seq1 and B2 in seq2.

    Anchors range over [1, N - max(|B1|,|B2|) + 1] so that the diagonal case
    joint_frequency(s, s, B, B, N) == prefix_frequency(s, B, N) holds exactly.
    """
    k = max(len(B1), len(B2))
    if N < k:
        raise LengthError(f"window N={N} shorter than the longest block ({k})")
    W = N - k + 1
    d1 = seq1.digits(1, W + len(B1) - 1)
    d2 = seq2.digits(1, W + len(B2) - 1)
    c1 = _anchor_codes(d1, len(B1), seq1.alphabet.size)[:W]
    c2 = _anchor_codes(d2, len(B2), seq2.alphabet.size)[:W]
    hits = int(np.count_nonzero((c1 == B1.encode()) & (c2 == B2.encode())))
    return Fraction(hits, W)


def zip_product(seqs: Sequence[SymbolicSequence]) -> SymbolicSequence:
    """Multirow sequence: digit(p) encodes the column of row digits at p.

    Row-major encoding, first row most significant.
    """
    if not seqs:
        raise ValueError("need at least one row")
    if len(seqs) == 1:
        return seqs[0]
    sizes = [s.alphabet.size for s in seqs]
    R = 1
    for r in sizes:
        R *= r
    horizons = [s.horizon for s in seqs if s.horizon is not None]
    horizon = min(horizons) if horizons else None

    def digit(p: int) -> int:
        code = 0
        for s in seqs:
            code = code * s.alphabet.size + s.digit(p)
        return code

    def bulk(start: int, c: int) -> np.ndarray:
        out = np.zeros(c, dtype=_dtype_for(R))
        for s in seqs:
            out *= s.alphabet.size
            out += s.digits(start, c).astype(_dtype_for(R))
        return out

    return SymbolicSequence(
        digit, Alphabet(R), horizon=horizon, name="zip", bulk_fn=bulk
    )


def base4_split(seq: SymbolicSequence) -> tuple[SymbolicSequence, SymbolicSequence]:
    """Split a base-4 stream into its two binary rows (floor(d/2), d mod 2)."""
    if seq.alphabet.size != 4:
        raise AlphabetError("base4_split needs an alphabet of size 4")
    row1 = SymbolicSequence(
        lambda p: seq.digit(p) // 2,
        BINARY,
        horizon=seq.horizon,
        name=f"{seq.name}/hi",
        bulk_fn=lambda s, c: (seq.digits(s, c) // 2).astype(np.uint8),
    )
    row2 = SymbolicSequence(
        lambda p: seq.digit(p) % 2,
        BINARY,
        horizon=seq.horizon,
        name=f"{seq.name}/lo",
        bulk_fn=lambda s, c: (seq.digits(s, c) % 2).astype(np.uint8),
    )
    return row1, row2


def restrict(seq: SymbolicSequence, S: IndexSet) -> SymbolicSequence:
    """k-th digit of the result = seq digit at the k-th smallest element of S."""
    horizon = S.size() if S.finite else None

    def digit(k: int) -> int:
        return seq.digit(S.element(k))

    def bulk(start: int, c: int) -> np.ndarray:
        positions = list(islice(iter(S), start - 1, start - 1 + c))
        if len(positions) < c:
            raise HorizonError("index set exhausted before the requested position")
        dtype = _dtype_for(seq.alphabet.size)
        return np.fromiter((seq.digit(p) for p in positions), dtype=dtype, count=c)

    return SymbolicSequence(
        digit, seq.alphabet, horizon=horizon, name=f"{seq.name}|S", bulk_fn=bulk
    )


def index_density_profile(S: IndexSet, N: int) -> list[tuple[int, Fraction]]:
    """Running densities |S cap [1,n]| / n at dyadic n <= N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    marks = []
    n = 1
    while n <= N:
        marks.append(n)
        n *= 2
    out = []
    it = iter(S)
    seen = 0
    nxt = next(it, None)
    for n in marks:
        while nxt is not None and nxt <= n:
            seen += 1
            nxt = next(it, None)
        out.append((n, Fraction(seen, n)))
    return out


# ---------------------------------------------------------------------------
# bit-packed sequence files

_NSEQ_MAGIC = b"NSEQ"
_NSEQ_VERSION = 0x01


def write_nseq(path, seq_or_array, r: Optional[int] = None, count: Optional[int] = None) -> None:
    """Write digits to an .nseq file.

    Header: magic "NSEQ", version byte 0x01, alphabet size (uint16 LE),
    digit count (uint64 LE).  Payload is bit-packed LSB-first within bytes
    for r=2, one byte per digit for 2 < r <= 256.
    """
    if isinstance(seq_or_array, SymbolicSequence):
        if count is None:
            if seq_or_array.horizon is None:
                raise HorizonError("digit count required for an unbounded sequence")
            count = seq_or_array.horizon
        digits = seq_or_array.digits(1, count)
        r = seq_or_array.alphabet.size
    else:
        digits = np.asarray(seq_or_array, dtype=np.uint8 if (r or 2) <= 256 else np.uint32)
        if r is None:
            raise ValueError("alphabet size required when writing a raw array")
        if count is not None:
            digits = digits[:count]
    if r > 256:
        raise AlphabetError(".nseq supports alphabets up to size 256")
    header = _NSEQ_MAGIC + struct.pack("<BHQ", _NSEQ_VERSION, r, len(digits))
    if r == 2:
        payload = np.packbits(digits.astype(np.uint8), bitorder="little").tobytes()
    else:
        payload = digits.astype(np.uint8).tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_nseq(path) -> SymbolicSequence:
    """Load an .nseq file as an array-backed sequence."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != _NSEQ_MAGIC:
        raise ValueError("not an .nseq file (bad magic)")
    version, r, n = struct.unpack("<BHQ", blob[4:15])
    if version != _NSEQ_VERSION:
        raise ValueError(f"unsupported .nseq version {version}")
    payload = blob[15:]
    if r == 2:
        bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8), bitorder="little")
        digits = bits[:n]
    else:
        digits = np.frombuffer(payload, dtype=np.uint8)[:n]
    if len(digits) < n:
        raise ValueError("truncated .nseq payload")
    return SymbolicSequence.from_array(digits, r=r, name=str(path))
