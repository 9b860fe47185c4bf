from fractions import Fraction

import pytest
from hypothesis import given, settings

from ktae import ContingencyTable as CT
from ktae import (
    Rollout,
    RolloutGroup,
    TableTooLarge,
    brute_force_stats,
    compare_fast_vs_exact,
    compute_advantages,
    fisher_exact_rational,
    fisher_two_sided_enum,
    validate_group,
)
from ktae.stats import LogGammaTable

from conftest import rollout_groups


class TestFisherExactRational:
    def test_perfect_split(self):
        assert fisher_exact_rational(CT(4, 0, 0, 4)) == Fraction(1, 70)

    def test_mixed_split_reduces_to_lowest_terms(self):
        result = fisher_exact_rational(CT(3, 1, 1, 3))
        assert result == Fraction(16, 70) == Fraction(8, 35)
        assert result.denominator == 35

    def test_degenerate_row_cancels_to_one(self):
        assert fisher_exact_rational(CT(9, 5, 0, 0)) == Fraction(1)

    def test_rejects_tables_beyond_bound(self):
        with pytest.raises(TableTooLarge):
            fisher_exact_rational(CT(40, 40, 0, 0))

    def test_sums_to_one_over_fixed_margins(self):
        # the point probabilities of all same-margin tables form a distribution
        from ktae.oracle import same_margin_tables

        total = sum(fisher_exact_rational(t) for t in same_margin_tables(CT(3, 2, 4, 5)))
        assert total == Fraction(1)


class TestFisherTwoSidedEnum:
    def test_uniform_table_collects_all_mass(self):
        assert fisher_two_sided_enum(CT(2, 2, 2, 2)) == Fraction(1)

    def test_unique_minimum_equals_own_probability(self):
        table = CT(0, 3, 5, 0)
        assert fisher_two_sided_enum(table) == fisher_exact_rational(table)

    def test_perfect_split_includes_tied_corner(self):
        # margins (4,4)/(4,4): a=0 and a=4 tie at 1/70 each
        assert fisher_two_sided_enum(CT(4, 0, 0, 4)) == Fraction(2, 70) == Fraction(1, 35)


class TestBruteForceStats:
    def group(self):
        rollouts = (
            Rollout(tokens=(1, 2, 2, 3), reward=1.0),
            Rollout(tokens=(2, 4), reward=1.0),
            Rollout(tokens=(5, 6), reward=0.0),
        )
        return validate_group(RolloutGroup("g", rollouts))

    def test_absent_token(self):
        assert brute_force_stats(self.group(), 99) == CT(0, 0, 2, 1)

    def test_token_in_every_rollout(self):
        rollouts = tuple(Rollout(tokens=(7, i), reward=float(i < 2)) for i in range(4))
        group = validate_group(RolloutGroup("g", rollouts))
        assert brute_force_stats(group, 7) == CT(2, 2, 0, 0)

    def test_presence_counts_rollouts_not_occurrences(self):
        # token 2 occurs twice in one rollout but still counts one rollout
        assert brute_force_stats(self.group(), 2) == CT(2, 0, 0, 1)

    @given(rollout_groups())
    @settings(max_examples=200)
    def test_pipeline_tables_match_naive_scans(self, group):
        group = validate_group(group)
        matrix = compute_advantages(group)
        for token, stats in matrix.token_stats.items():
            assert stats.table == brute_force_stats(group, token)

    def test_pipeline_tables_match_naive_scans_bulk(self):
        import numpy as np

        from conftest import random_group

        rng = np.random.default_rng(404)
        for i in range(1000):
            group = validate_group(random_group(rng, f"bulk-{i}"))
            matrix = compute_advantages(group)
            for token, stats in matrix.token_stats.items():
                assert stats.table == brute_force_stats(group, token)


class TestCompareFastVsExact:
    def test_small_exhaustive_within_tolerance(self):
        worst, _ = compare_fast_vs_exact(8)
        assert worst <= 1e-9

    def test_rejects_bounds_beyond_exact_range(self):
        with pytest.raises(TableTooLarge):
            compare_fast_vs_exact(65)

    def test_vacuous_range_reports_zero_error(self):
        worst, table = compare_fast_vs_exact(0)
        assert worst == 0.0
        assert table is None

    def test_perturbed_log_gamma_is_caught_with_a_counterexample(self):
        values = LogGammaTable.for_max_n(64).values.copy()
        values[3] += 1e-6  # corrupt ln 3!
        worst, table = compare_fast_vs_exact(8, lngamma=LogGammaTable(values))
        assert worst > 1e-9
        assert table is not None
        assert table.n <= 8
