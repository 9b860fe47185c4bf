"""Slow, exact reference implementations for validating the fast paths.

Everything here runs on arbitrary-precision integers (``fractions.Fraction``,
``math.comb``) or naive per-rollout scans, trading speed for certainty. The
production code must agree with these answers; these never import from the
fast numeric paths they certify, except where a comparison harness
explicitly pits the two against each other.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

from .core import ContingencyTable, KtaeError, RolloutGroup

# Exact hypergeometric arithmetic is capped: factorials stay exact at any
# size, but enumeration cost and downstream float conversion do not.
MAX_EXACT_N = 64

# Rationals are kept as stdlib Fractions: arbitrary-precision integers,
# always normalized to lowest terms with a positive denominator.
ExactRational = Fraction


class TableTooLarge(KtaeError):
    """Contingency table exceeds the exact-arithmetic bound."""


def _check_table(table: ContingencyTable, max_n: int) -> ContingencyTable:
    table.check()
    if table.n > max_n:
        raise TableTooLarge(f"table total {table.n} exceeds exact bound {max_n}")
    return table


def fisher_exact_rational(table: ContingencyTable, max_n: int = MAX_EXACT_N) -> Fraction:
    """Point hypergeometric probability of a 2x2 table, as an exact rational.

    C(a+b, a) * C(c+d, c) / C(n, a+c) with the table margins held fixed.
    """
    a, b, c, d = _check_table(table, max_n)
    return Fraction(comb(a + b, a) * comb(c + d, c), comb(table.n, a + c))


def same_margin_tables(table: ContingencyTable) -> list[ContingencyTable]:
    """All tables sharing the row and column margins of ``table``."""
    r1, c1, n = table.a + table.b, table.a + table.c, table.n
    lo = max(0, r1 - (n - c1))
    hi = min(r1, c1)
    return [ContingencyTable(k, r1 - k, c1 - k, n - r1 - c1 + k) for k in range(lo, hi + 1)]


def fisher_two_sided_enum(table: ContingencyTable, max_n: int = MAX_EXACT_N) -> Fraction:
    """Two-sided test probability by exhaustive same-margin enumeration.

    Sums the point probabilities of every table (same margins) whose point
    probability is at most the observed one; comparisons are exact, so ties
    are included with no floating-point hedging.
    """
    _check_table(table, max_n)
    observed = fisher_exact_rational(table, max_n)
    total = Fraction(0)
    for candidate in same_margin_tables(table):
        p = fisher_exact_rational(candidate, max_n)
        if p <= observed:
            total += p
    return total


def brute_force_stats(group: RolloutGroup, token: int) -> ContingencyTable:
    """Build one token's contingency table by naive membership scans.

    Rebuilds each rollout's token set from scratch on every call; exists to
    cross-check any optimized occurrence indexing.
    """
    a = b = c = d = 0
    for is_correct, rollout in zip(group.correct_mask, group.rollouts):
        present = token in set(rollout.tokens)
        if is_correct:
            a += present
            c += not present
        else:
            b += present
            d += not present
    return ContingencyTable(a, b, c, d)


def all_tables_with_total(n: int):
    """Yield every non-negative (a, b, c, d) composition with a+b+c+d = n."""
    for a in range(n + 1):
        for b in range(n - a + 1):
            for c in range(n - a - b + 1):
                yield ContingencyTable(a, b, c, n - a - b - c)


def compare_fast_vs_exact(max_n: int, lngamma=None) -> tuple[float, ContingencyTable | None]:
    """Exhaustively pit the log-space point probability against the rational one.

    Returns the worst relative error over all tables with 1 <= n <= max_n and
    the table achieving it. ``lngamma`` is forwarded to the fast path so a
    deliberately perturbed table can be injected when testing this harness.
    """
    from .stats import fisher_point_prob

    if max_n > MAX_EXACT_N:
        raise TableTooLarge(f"max_n {max_n} exceeds exact bound {MAX_EXACT_N}")
    worst_err = 0.0
    worst_table: ContingencyTable | None = None
    for n in range(1, max_n + 1):
        for table in all_tables_with_total(n):
            fast = fisher_point_prob(table, lngamma=lngamma)
            exact = fisher_exact_rational(table)
            rel = abs(Fraction(fast) - exact) / exact
            if rel > worst_err:
                worst_err, worst_table = float(rel), table
    return worst_err, worst_table
