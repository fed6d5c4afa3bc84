"""Closed-form carry-sum probabilities and their Monte-Carlo verification.

For two independent digit streams with ones-density p added with carry,
the carry probability and the digit statistics of the sum have exact
rational closed forms; this module evaluates them exactly and checks them
against seeded sampled streams.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
from fractions import Fraction
from typing import Optional

import numpy as np

from .bitarith import stream_carry_add
from .generators import bernoulli_stream, derive_seed


class DomainError(ValueError):
    pass


class DataQualityError(RuntimeError):
    pass


def _check_p(p) -> Fraction:
    pf = Fraction(p)
    if not 0 < pf < 1:
        raise DomainError(f"p must lie strictly between 0 and 1, got {p}")
    return pf


def carry_digit_prob(p) -> tuple[Fraction, Fraction]:
    """(P, p') for the carry sum of two independent p-streams.

    P is the probability that a carry arrives at a fixed coordinate,
    P = p^2 / (p^2 + q^2) with q = 1 - p; p' is the ones-density of the
    sum digits, p' = 2 Q p q + P (p^2 + q^2) = p^2 + 2 p q^3 / (p^2 + q^2).
    """
    pf = _check_p(p)
    q = 1 - pf
    P = pf**2 / (pf**2 + q**2)
    Q = 1 - P
    p_prime = 2 * Q * pf * q + P * (pf**2 + q**2)
    return P, p_prime


def conditional_digit_prob(p) -> tuple[Fraction, Fraction, Fraction]:
    """(Q0, P0, p0') with the next sum digit conditioned to be 0.

    Q0 = q^2 / (p^2 + q^2 + 2 p^3 / q) is the no-carry probability given
    the digit to the right of the target is 0, P0 = 1 - Q0, and
    p0' = 2 Q0 p q + P0 (p^2 + q^2).  For p != 1/2 the conditioning
    matters: p0' > p', which is what breaks product structure in the sum.
    """
    pf = _check_p(p)
    q = 1 - pf
    Q0 = q**2 / (pf**2 + q**2 + 2 * pf**3 / q)
    P0 = 1 - Q0
    p0_prime = 2 * Q0 * pf * q + P0 * (pf**2 + q**2)
    return Q0, P0, p0_prime


def rauzy_obstruction_l(p) -> int:
    """Smallest positive l with ((1-p)/p)^l < p; defined for p > 1/2."""
    pf = Fraction(p)
    if not Fraction(1, 2) < pf < 1:
        raise DomainError(f"the obstruction length needs 1/2 < p < 1, got {p}")
    ratio = (1 - pf) / pf
    power = ratio
    l = 1
    while power >= pf:
        power *= ratio
        l += 1
    return l


@dataclass
class MonteCarloCarrySum:
    """Empirical digit statistics of one sampled carry sum."""

    p: str
    seed: int
    n_digits: int
    lookahead_cap: int
    freq_one: float
    freq_one_given_next_zero: float
    dependence: float  # conditional minus unconditional ones-frequency
    correlation: float  # Pearson correlation of adjacent sum digits
    tallied: int
    tallied_pairs: int
    ambiguity_rate: float

    def as_dict(self) -> dict:
        return asdict(self)


def monte_carlo_carry_sum(
    p,
    seed: int,
    N: int,
    lookahead_cap: int = 64,
    max_ambiguity: float = 0.01,
) -> MonteCarloCarrySum:
    """Sample two independent p-streams, add them with carry, and tally the
    digit statistics of the sum.  Carry-ambiguous positions are excluded
    from every tally rather than guessed."""
    pf = _check_p(p)
    if N < 10**3:
        raise DomainError("need at least 10^3 digits for the tallies")
    M = N + lookahead_cap
    s1 = bernoulli_stream(pf, derive_seed(seed, "carry-sum/left"), M)
    s2 = bernoulli_stream(pf, derive_seed(seed, "carry-sum/right"), M)
    digits, ambiguous = stream_carry_add(s1, s2, N, lookahead_cap)
    amb_rate = float(ambiguous.mean())
    if amb_rate > max_ambiguity:
        raise DataQualityError(
            f"ambiguity rate {amb_rate:.4f} exceeds {max_ambiguity:.4f}"
        )
    ok = ~ambiguous
    tallied = int(ok.sum())
    if tallied == 0:
        raise DataQualityError("no unambiguous digits to tally")
    d = digits.astype(np.float64)
    freq1 = float(d[ok].mean())

    pair_ok = ok[:-1] & ok[1:]
    lead = d[:-1][pair_ok]
    nxt = d[1:][pair_ok]
    tallied_pairs = int(pair_ok.sum())
    next_zero = nxt == 0
    freq1_cond = float(lead[next_zero].mean()) if next_zero.any() else float("nan")
    if tallied_pairs > 1 and lead.std() > 0 and nxt.std() > 0:
        corr = float(np.corrcoef(lead, nxt)[0, 1])
    else:
        corr = 0.0
    return MonteCarloCarrySum(
        p=str(pf),
        seed=seed,
        n_digits=N,
        lookahead_cap=lookahead_cap,
        freq_one=freq1,
        freq_one_given_next_zero=freq1_cond,
        dependence=freq1_cond - freq1,
        correlation=corr,
        tallied=tallied,
        tallied_pairs=tallied_pairs,
        ambiguity_rate=amb_rate,
    )


@dataclass
class CarrySumStats:
    """Closed forms (exact rationals rendered as strings) plus optional
    Monte-Carlo estimates for one value of p."""

    p: str
    P: str
    Q: str
    pprime: str
    Q0: str
    P0: str
    pprime0: str
    l: Optional[int]
    P_float: float
    pprime_float: float
    pprime0_float: float
    mc: Optional[MonteCarloCarrySum] = None

    def as_dict(self) -> dict:
        out = asdict(self)
        del out["mc"]
        out["mc_stats"] = self.mc.as_dict() if self.mc else None
        return out


def carry_sum_stats(p, mc_n: Optional[int] = None, seed: int = 0) -> CarrySumStats:
    pf = _check_p(p)
    P, pprime = carry_digit_prob(pf)
    Q0, P0, pprime0 = conditional_digit_prob(pf)
    l = rauzy_obstruction_l(pf) if pf > Fraction(1, 2) else None
    mc = monte_carlo_carry_sum(pf, seed, mc_n) if mc_n else None
    return CarrySumStats(
        p=str(pf),
        P=str(P),
        Q=str(1 - P),
        pprime=str(pprime),
        Q0=str(Q0),
        P0=str(P0),
        pprime0=str(pprime0),
        l=l,
        P_float=float(P),
        pprime_float=float(pprime),
        pprime0_float=float(pprime0),
        mc=mc,
    )
