"""Association-strength statistics per token: Fisher's exact test and
information gain over 2x2 contingency tables.

Factorials are evaluated in log space (sums and differences of ln-gamma) so
the point hypergeometric probability stays accurate for any group size; a
chi-squared approximation would be unreliable at the small sample counts
(8-16 rollouts) this package is built for. Every public scalar operation
delegates to the vectorized kernel the batch pipeline uses, so the two can
never drift apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ContingencyTable, DomainError

# Smallest positive double: probabilities are floored here so exp underflow
# can never push them to an exact 0, which sits outside fisher_score's domain.
_TINY = math.nextafter(0.0, 1.0)

# Relative slack when deciding whether an enumerated table is "at most as
# likely" as the observed one; absorbs last-ulp noise on exact ties.
_TIE_SLACK = 1e-7


@dataclass(frozen=True)
class LogGammaTable:
    """Read-only cache of ln(n!) = lgamma(n+1) for n = 0 .. max_n."""

    values: np.ndarray

    @classmethod
    def for_max_n(cls, max_n: int) -> "LogGammaTable":
        values = np.array([math.lgamma(i + 1) for i in range(max_n + 1)], dtype=np.float64)
        values.flags.writeable = False
        return cls(values)

    @property
    def max_n(self) -> int:
        return len(self.values) - 1


_default_table = LogGammaTable.for_max_n(256)


def default_lngamma(max_n: int) -> LogGammaTable:
    """Shared ln-factorial cache, grown (never shrunk) on demand."""
    global _default_table
    if _default_table.max_n < max_n:
        _default_table = LogGammaTable.for_max_n(max(max_n, 2 * _default_table.max_n))
    return _default_table


def _ln_comb(lf: np.ndarray, n: np.ndarray, k: np.ndarray) -> np.ndarray:
    return lf[n] - lf[k] - lf[n - k]


def _as_int_arrays(table: ContingencyTable) -> tuple[np.ndarray, ...]:
    return tuple(np.asarray([v], dtype=np.int64) for v in table)


def fisher_point_prob_array(
    a: np.ndarray, b: np.ndarray, c: np.ndarray, d: np.ndarray, lngamma: LogGammaTable | None = None
) -> np.ndarray:
    """Point hypergeometric probability, vectorized over tables.

    exp( lnC(a+b, a) + lnC(c+d, c) - lnC(n, a+c) ), clamped into (0, 1].
    Degenerate rows or columns cancel exactly and give 1.
    """
    n = a + b + c + d
    lf = (default_lngamma(int(n.max())) if lngamma is None else lngamma).values
    log_p = _ln_comb(lf, a + b, a) + _ln_comb(lf, c + d, c) - _ln_comb(lf, n, a + c)
    return np.clip(np.exp(log_p), _TINY, 1.0)


def fisher_point_prob(table: ContingencyTable, lngamma: LogGammaTable | None = None) -> float:
    """Point hypergeometric probability of one table, in (0, 1]."""
    return float(fisher_point_prob_array(*_as_int_arrays(table), lngamma=lngamma)[0])


def fisher_two_sided_prob_array(
    a: np.ndarray, b: np.ndarray, c: np.ndarray, d: np.ndarray, lngamma: LogGammaTable | None = None
) -> np.ndarray:
    """Two-sided test probability: mass of all same-margin tables no more
    likely than the observed one (ties included up to a tiny relative slack).
    """
    n = a + b + c + d
    lngamma = default_lngamma(int(n.max())) if lngamma is None else lngamma
    observed = fisher_point_prob_array(a, b, c, d, lngamma)
    r1 = a + b
    c1 = a + c
    lo = np.maximum(0, r1 - (n - c1))
    hi = np.minimum(r1, c1)
    total = np.zeros(observed.shape, dtype=np.float64)
    for k in range(int(hi.max()) + 1):
        valid = (k >= lo) & (k <= hi)
        ak = np.where(valid, k, 0)
        bk = np.where(valid, r1 - k, 0)
        ck = np.where(valid, c1 - k, 0)
        dk = np.where(valid, n - r1 - c1 + k, 0)
        p_k = fisher_point_prob_array(ak, bk, ck, dk, lngamma)
        total += np.where(valid & (p_k <= observed * (1.0 + _TIE_SLACK)), p_k, 0.0)
    return np.clip(total, _TINY, 1.0)


def fisher_two_sided_prob(table: ContingencyTable, lngamma: LogGammaTable | None = None) -> float:
    return float(fisher_two_sided_prob_array(*_as_int_arrays(table), lngamma=lngamma)[0])


def fisher_score(p: float) -> float:
    """Map a test probability to an association strength in {0} U (e^-2, 1).

    Complete no-association (p = 1) scores exactly 0; as p falls toward 0 the
    score exp(-2p) rises toward 1, amplifying differences between the small
    probabilities where the evidence actually lives.
    """
    if not p > 0.0 or p > 1.0 + 1e-12 or math.isnan(p):
        raise DomainError(f"fisher_score expects p in (0, 1], got {p!r}")
    if abs(p - 1.0) <= 1e-12:
        return 0.0
    return math.exp(-2.0 * p)


def fisher_score_array(p: np.ndarray) -> np.ndarray:
    """Vectorized fisher_score; assumes p already clamped into (0, 1]."""
    return np.where(np.abs(p - 1.0) <= 1e-12, 0.0, np.exp(-2.0 * p))


def _xlog2x(p: np.ndarray) -> np.ndarray:
    # p * log2(p) with the 0 * log2(0) := 0 convention, no epsilon inside logs
    safe = np.where(p > 0.0, p, 1.0)
    return np.where(p > 0.0, p * np.log2(safe), 0.0)


def binary_entropy_from_counts(k: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Entropy in bits of a (k, n-k) split; an empty split (n = 0) gives 0."""
    n_safe = np.maximum(n, 1)
    h = -(_xlog2x(k / n_safe) + _xlog2x((n - k) / n_safe))
    return np.where(n > 0, h, 0.0)


def entropy_y(table: ContingencyTable) -> float:
    """Entropy of rollout correctness (column margins), in [0, 1] bits."""
    t = np.asarray([table.n_true], dtype=np.int64)
    n = np.asarray([table.n], dtype=np.int64)
    return float(binary_entropy_from_counts(t, n)[0])


def cond_entropy_array(a: np.ndarray, b: np.ndarray, c: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Correctness entropy conditioned on token occurrence, vectorized.

    Mixture of the contains/omits branch entropies; a branch with zero weight
    contributes nothing.
    """
    n = a + b + c + d
    contains = a + b
    omits = c + d
    h_contains = binary_entropy_from_counts(a, contains)
    h_omits = binary_entropy_from_counts(c, omits)
    return (contains / n) * h_contains + (omits / n) * h_omits


def cond_entropy(table: ContingencyTable) -> float:
    return float(cond_entropy_array(*_as_int_arrays(table))[0])


def info_gain_array(a: np.ndarray, b: np.ndarray, c: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Entropy reduction from observing token occurrence, clamped at 0."""
    n = a + b + c + d
    h_y = binary_entropy_from_counts(a + c, n)
    return np.maximum(h_y - cond_entropy_array(a, b, c, d), 0.0)


def info_gain(table: ContingencyTable) -> float:
    return float(info_gain_array(*_as_int_arrays(table))[0])
