"""Desk-scale algebraic dynamics: mod-p digit streams, linear cellular
automata, and integer toral endomorphism orbits.

Ergodicity of an integer matrix map on the torus means no eigenvalue is a
root of unity; this is decided exactly by resultants of the characteristic
polynomial against the cyclotomic polynomials of degree at most d.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence, Union

import numpy as np

from .seqcore import HorizonError, SymbolicSequence


class ModulusError(ValueError):
    pass


class MatrixError(ValueError):
    pass


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


# ---------------------------------------------------------------------------
# coordinatewise mod-p streams


def modp_add(s1: SymbolicSequence, s2: SymbolicSequence, N: int) -> SymbolicSequence:
    """Digit-wise (a + b) mod p; no carry."""
    p = s1.alphabet.size
    if s2.alphabet.size != p:
        raise ModulusError(
            f"modulus mismatch: {p} vs {s2.alphabet.size}"
        )
    a = s1.digits(1, N).astype(np.int64)
    b = s2.digits(1, N).astype(np.int64)
    return SymbolicSequence.from_array(((a + b) % p), r=p, name="modp-add")


def modp_neg(s: SymbolicSequence, N: int) -> SymbolicSequence:
    p = s.alphabet.size
    arr = s.digits(1, N).astype(np.int64)
    return SymbolicSequence.from_array((-arr) % p, r=p, name="modp-neg")


# ---------------------------------------------------------------------------
# linear cellular automata


@dataclass(frozen=True)
class LinearCA:
    """out[n] = sum_j coeffs[j] * in[n + j] mod p."""

    p: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ModulusError(f"modulus must be prime, got {self.p}")
        if not self.coeffs:
            raise ValueError("need at least one coefficient")

    @property
    def is_shift_dependent(self) -> bool:
        """True when some positive-index coefficient is nonzero mod p."""
        return any(c % self.p for c in self.coeffs[1:])

    @property
    def reach(self) -> int:
        return len(self.coeffs) - 1


def apply_ca(ca: LinearCA, s: SymbolicSequence, N: int) -> SymbolicSequence:
    """Apply the automaton to the first N + reach input digits."""
    if s.alphabet.size != ca.p:
        raise ModulusError(f"stream alphabet {s.alphabet.size} != modulus {ca.p}")
    k = ca.reach
    if s.horizon is not None and s.horizon < N + k:
        raise HorizonError(f"need {N + k} digits, horizon is {s.horizon}")
    arr = s.digits(1, N + k).astype(np.int64)
    out = np.zeros(N, dtype=np.int64)
    for j, c in enumerate(ca.coeffs):
        if c % ca.p:
            out += (c % ca.p) * arr[j : j + N]
    return SymbolicSequence.from_array(out % ca.p, r=ca.p, name="ca")


# ---------------------------------------------------------------------------
# integer polynomial helpers (coefficients ascending)


def poly_mul(a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return out


def poly_divmod_exact(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Exact division of integer polynomials (monic-ish divisor), remainder 0."""
    a = list(a)
    out = [0] * (len(a) - len(b) + 1)
    for i in range(len(out) - 1, -1, -1):
        c, rem = divmod(a[i + len(b) - 1], b[-1])
        if rem:
            raise ArithmeticError("division is not exact")
        out[i] = c
        for j, bj in enumerate(b):
            a[i + j] -= c * bj
    if any(a):
        raise ArithmeticError("division left a remainder")
    return out


def cyclotomic(m: int) -> list[int]:
    """Coefficients (ascending) of the m-th cyclotomic polynomial."""
    poly = [-1] + [0] * (m - 1) + [1]  # x^m - 1
    for d in range(1, m):
        if m % d == 0:
            poly = poly_divmod_exact(poly, cyclotomic(d))
    return poly


def _euler_phi(m: int) -> int:
    out = 1
    for d in range(2, m + 1):
        if gcd(d, m) == 1:
            out += 1
    return out if m > 1 else 1


def resultant(a: Sequence[int], b: Sequence[int]) -> int:
    """Resultant of two integer polynomials via the Sylvester determinant,
    computed exactly with rational Gaussian elimination."""
    a = list(a)
    b = list(b)
    while a and a[-1] == 0:
        a.pop()
    while b and b[-1] == 0:
        b.pop()
    n, m = len(a) - 1, len(b) - 1
    if n < 0 or m < 0:
        return 0
    if n == 0:
        return a[0] ** m
    if m == 0:
        return b[0] ** n
    size = n + m
    M = [[Fraction(0)] * size for _ in range(size)]
    for i in range(m):
        for j, c in enumerate(reversed(a)):
            M[i][i + j] = Fraction(c)
    for i in range(n):
        for j, c in enumerate(reversed(b)):
            M[m + i][i + j] = Fraction(c)
    det = Fraction(1)
    for col in range(size):
        pivot = next((r for r in range(col, size) if M[r][col] != 0), None)
        if pivot is None:
            return 0
        if pivot != col:
            M[col], M[pivot] = M[pivot], M[col]
            det = -det
        det *= M[col][col]
        inv = 1 / M[col][col]
        for r in range(col + 1, size):
            if M[r][col] != 0:
                factor = M[r][col] * inv
                for c in range(col, size):
                    M[r][c] -= factor * M[col][c]
    assert det.denominator == 1
    return int(det)


def charpoly(matrix: Sequence[Sequence[int]]) -> list[int]:
    """Characteristic polynomial det(xI - A), ascending integer coefficients,
    by the Faddeev-LeVerrier recursion."""
    d = len(matrix)
    A = [[Fraction(v) for v in row] for row in matrix]

    def matmul(X, Y):
        return [
            [sum(X[i][k] * Y[k][j] for k in range(d)) for j in range(d)]
            for i in range(d)
        ]

    coeffs = [Fraction(1)]  # leading coefficient of x^d
    M = [[Fraction(0)] * d for _ in range(d)]
    for k in range(1, d + 1):
        for i in range(d):
            M[i][i] += coeffs[-1]
        M = matmul(A, M)
        c = -Fraction(sum(M[i][i] for i in range(d)), k)
        coeffs.append(c)
    asc = list(reversed(coeffs))
    out = []
    for c in asc:
        assert c.denominator == 1
        out.append(int(c))
    return out


# ---------------------------------------------------------------------------
# toral endomorphisms


@dataclass(frozen=True)
class ToralMap:
    """x -> A x mod 1 on the d-torus for a nonsingular integer matrix A."""

    matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        d = len(self.matrix)
        if d < 1 or any(len(row) != d for row in self.matrix):
            raise MatrixError("matrix must be square")
        if self.determinant() == 0:
            raise MatrixError("matrix must be nonsingular")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "ToralMap":
        return cls(tuple(tuple(int(v) for v in row) for row in rows))

    @property
    def dimension(self) -> int:
        return len(self.matrix)

    def determinant(self) -> int:
        cp = charpoly(self.matrix)
        return (-1) ** self.dimension * cp[0]

    def induced_one_norm(self) -> int:
        return max(
            sum(abs(self.matrix[i][j]) for i in range(self.dimension))
            for j in range(self.dimension)
        )

    def is_ergodic(self) -> bool:
        """No eigenvalue is a root of unity: the characteristic polynomial
        has zero resultant with no cyclotomic polynomial of degree <= d."""
        cp = charpoly(self.matrix)
        d = self.dimension
        m = 1
        while True:
            if m > 2 * d * d + 6:
                break
            if _euler_phi(m) <= d and resultant(cp, cyclotomic(m)) == 0:
                return False
            m += 1
        return True

    def apply(self, x: Sequence[Fraction]) -> list[Fraction]:
        d = self.dimension
        out = []
        for i in range(d):
            v = sum(Fraction(self.matrix[i][j]) * x[j] for j in range(d))
            out.append(v - (v.numerator // v.denominator))  # mod 1
        return out


@dataclass
class OrbitResult:
    points: list[tuple[Fraction, ...]]
    ergodic: bool
    certified_steps: int
    discrepancy: Optional[float] = None
    grid_bits: Optional[int] = None

    def as_dict(self) -> dict:
        return {
            "steps": len(self.points) - 1,
            "ergodic": self.ergodic,
            "certified_steps": self.certified_steps,
            "discrepancy": self.discrepancy,
            "grid_bits": self.grid_bits,
            "first_points": [
                [str(c) for c in pt] for pt in self.points[: min(4, len(self.points))]
            ],
        }


def toral_orbit(
    tmap: ToralMap,
    x0: Sequence[Union[Fraction, str, int]],
    steps: int,
    precision_bits: Optional[int] = None,
    output_bits: int = 32,
    grid_bits: int = 4,
) -> OrbitResult:
    """Orbit of x0 under x -> Ax mod 1, computed in exact rational
    arithmetic, plus a box-counting discrepancy over a 2^grid_bits-per-axis
    grid.

    `precision_bits` declares how many bits of x0 are trusted; the error of
    the true orbit grows by at most the induced 1-norm of A per step, and
    `certified_steps` is how many steps stay within 2^-output_bits.  Exact
    rational inputs (precision_bits=None) certify every step.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    x = [Fraction(c) for c in x0]
    if len(x) != tmap.dimension:
        raise MatrixError("dimension mismatch between x0 and the matrix")
    pts = [tuple(c - (c.numerator // c.denominator) for c in x)]
    for _ in range(steps):
        pts.append(tuple(tmap.apply(pts[-1])))
    if precision_bits is None:
        certified = steps
    else:
        growth = tmap.induced_one_norm()
        err = Fraction(tmap.dimension, 1 << precision_bits)
        cap = Fraction(1, 1 << output_bits)
        certified = 0
        while certified < steps and err * growth <= cap:
            err *= growth
            certified += 1
    cells = 1 << grid_bits
    counts = np.zeros([cells] * tmap.dimension, dtype=np.int64)
    for pt in pts:
        idx = tuple(int(c * cells) % cells for c in pt)
        counts[idx] += 1
    freq = counts / len(pts)
    disc = float(np.abs(freq - 1.0 / cells**tmap.dimension).max())
    return OrbitResult(
        points=pts,
        ergodic=tmap.is_ergodic(),
        certified_steps=certified,
        discrepancy=disc,
        grid_bits=grid_bits,
    )
