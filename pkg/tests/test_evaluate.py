from __future__ import annotations

import random

import numpy as np
import pytest

from linetropy.evaluate import (
    CreditMode,
    EvalCurve,
    Warning,
    aucec,
    aucecl,
    compare_entropy_distributions,
    expand_warnings,
    lift_curve,
    mix_order,
    simulate_sbf_order,
)
from linetropy.lexer import LineType
from linetropy.scoring import LineScore


def lines(n, path="F.java"):
    return [(path, i) for i in range(1, n + 1)]


def diagonal_curve(n=100):
    return EvalCurve(tuple((i / n, i / n) for i in range(n + 1)))


class TestLiftCurve:
    def test_single_bug_ranked_first(self):
        population = lines(10)
        bugs = {"b1": {("F.java", 1)}}
        for credit in CreditMode:
            curve = lift_curve(population, bugs, credit)
            assert curve.y_at(0.1) == 1.0
            assert curve.points[0] == (0.0, 0.0)
            assert curve.points[-1] == (1.0, 1.0)

    def test_two_line_bug_full_vs_partial(self):
        population = lines(100)
        bugs = {"b1": {("F.java", 1), ("F.java", 50)}}
        full = lift_curve(population, bugs, CreditMode.FULL)
        partial = lift_curve(population, bugs, CreditMode.PARTIAL)
        assert full.y_at(0.01) == 1.0
        assert partial.y_at(0.01) == 0.5

    def test_random_ordering_near_diagonal(self):
        rng = random.Random(0)
        population = lines(2000)
        bugs = {f"b{i}": {("F.java", ln)} for i, ln in enumerate(rng.sample(range(1, 2001), 100))}
        curves = []
        for seed in range(30):
            order = population[:]
            random.Random(seed).shuffle(order)
            curves.append(lift_curve(order, bugs, CreditMode.PARTIAL))
        for x in (0.2, 0.5, 0.8):
            mean_y = sum(c.y_at(x) for c in curves) / len(curves)
            assert mean_y == pytest.approx(x, abs=0.05)

    def test_zero_bugs_flat_zero(self):
        curve = lift_curve(lines(5), {}, CreditMode.FULL)
        assert all(y == 0.0 for _, y in curve.points)

    def test_empty_population_is_error(self):
        with pytest.raises(ValueError, match="empty"):
            lift_curve([], {}, CreditMode.FULL)

    def test_bug_outside_population_is_error(self):
        with pytest.raises(ValueError, match="outside"):
            lift_curve(lines(3), {"b": {("F.java", 9)}}, CreditMode.FULL)

    def test_monotone_points(self):
        rng = random.Random(3)
        population = lines(50)
        order = population[:]
        rng.shuffle(order)
        bugs = {"a": {("F.java", 7), ("F.java", 9)}, "b": {("F.java", 30)}}
        curve = lift_curve(order, bugs, CreditMode.PARTIAL)
        xs = [x for x, _ in curve.points]
        ys = [y for _, y in curve.points]
        assert xs == sorted(xs) and ys == sorted(ys)

    def test_full_credit_dominates_partial(self):
        rng = random.Random(5)
        for trial in range(50):
            n = rng.randint(5, 60)
            population = lines(n)
            order = population[:]
            rng.shuffle(order)
            bugs = {}
            for b in range(rng.randint(1, 4)):
                size = rng.randint(1, min(5, n))
                bugs[f"b{b}"] = {("F.java", ln) for ln in rng.sample(range(1, n + 1), size)}
            full = lift_curve(order, bugs, CreditMode.FULL)
            partial = lift_curve(order, bugs, CreditMode.PARTIAL)
            for (_, yf), (_, yp) in zip(full.points, partial.points):
                assert yf >= yp - 1e-12


class TestAucec:
    def test_diagonal_at_five_percent(self):
        assert aucec(diagonal_curve(), 0.05) == pytest.approx(0.00125)

    def test_zero_curve(self):
        curve = EvalCurve(tuple((i / 10, 0.0) for i in range(11)))
        assert aucec(curve, 0.5) == 0.0

    def test_perfect_predictor(self):
        # bug mass fully earned by x=0.01 on a 100-line population
        population = lines(100)
        bugs = {"b": {("F.java", 1)}}
        curve = lift_curve(population, bugs, CreditMode.FULL)
        assert aucec(curve, 0.05) == pytest.approx(0.045)

    def test_budget_bounds(self):
        with pytest.raises(ValueError):
            aucec(diagonal_curve(), 0.0)
        with pytest.raises(ValueError):
            aucec(diagonal_curve(), 1.2)

    def test_bounded_by_budget(self):
        rng = random.Random(11)
        population = lines(40)
        bugs = {"b": {("F.java", 5)}}
        for budget in (0.01, 0.05, 0.2, 1.0):
            order = population[:]
            rng.shuffle(order)
            curve = lift_curve(order, bugs, CreditMode.FULL)
            val = aucec(curve, budget)
            assert 0.0 <= val <= budget + 1e-12

    def test_interpolated_budget_between_points(self):
        # 10 points; budget 0.05 cuts the first segment in half
        curve = diagonal_curve(10)
        assert aucec(curve, 0.05) == pytest.approx(0.5 * 0.05 * 0.05)


class TestExpandWarnings:
    def test_range_expansion_and_max_priority(self):
        warnings = [
            Warning("pmd", "F.java", 2, 4, 1),
            Warning("findbugs", "F.java", 3, 3, 2),
        ]
        values = expand_warnings(warnings)
        assert values == {
            ("F.java", 2): 1,
            ("F.java", 3): 2,
            ("F.java", 4): 1,
        }

    def test_invalid_range_rejected(self):
        with pytest.raises(ValueError):
            Warning("pmd", "F.java", 5, 4, 1)


class TestSimulateSbfOrder:
    def test_no_warnings_is_seeded_shuffle(self):
        population = lines(20)
        a = simulate_sbf_order([], population, seed=1)
        b = simulate_sbf_order([], population, seed=1)
        c = simulate_sbf_order([], population, seed=2)
        assert a == b
        assert sorted(a) == sorted(population)
        assert a != c  # overwhelmingly likely for 20 lines

    def test_priority_dominates(self):
        population = lines(10)
        warnings = [
            Warning("t", "F.java", 3, 3, 1),
            Warning("t", "F.java", 7, 7, 2),
        ]
        for seed in range(20):
            order = simulate_sbf_order(warnings, population, seed)
            assert order[0] == ("F.java", 7)
            assert order[1] == ("F.java", 3)

    def test_warned_outside_population_is_error(self):
        with pytest.raises(ValueError, match="outside"):
            simulate_sbf_order([Warning("t", "G.java", 1, 1, 1)], lines(3), 0)

    def test_mean_aucec_converges(self):
        rng = random.Random(0)
        population = lines(2000)
        bug_lines = rng.sample(range(1, 2001), 150)
        bugs = {f"b{i}": {("F.java", ln)} for i, ln in enumerate(bug_lines)}
        values = []
        for seed in range(100):
            order = simulate_sbf_order([], population, seed)
            values.append(aucec(lift_curve(order, bugs, CreditMode.FULL), 0.05))
        mean = float(np.mean(values))
        sem = float(np.std(values)) / len(values) ** 0.5
        assert sem < 0.05 * mean
        assert mean == pytest.approx(0.00125, abs=0.0005)


def score(path, line, weighted, entropy=0.0):
    return LineScore(
        path=path, line=line, entropy=entropy, token_count=1,
        line_type=LineType.OTHER, z=0.0, weighted=weighted,
    )


class TestMixOrder:
    def test_same_priority_equals_entropy_order_within_warned(self):
        scores = [score("F.java", i, weighted=float(10 - i)) for i in range(1, 6)]
        warnings = [Warning("t", "F.java", 2, 3, 1)]
        order = mix_order(warnings, scores)
        assert order[:2] == [("F.java", 2), ("F.java", 3)]
        assert order[2:] == [("F.java", 1), ("F.java", 4), ("F.java", 5)]

    def test_priority_beats_inverted_entropy(self):
        scores = [
            score("F.java", 1, weighted=9.0),
            score("F.java", 2, weighted=1.0),
        ]
        warnings = [
            Warning("t", "F.java", 1, 1, 1),
            Warning("t", "F.java", 2, 2, 2),
        ]
        assert mix_order(warnings, scores) == [("F.java", 2), ("F.java", 1)]

    def test_three_by_three_permutation(self):
        # hand-sorted: priority buckets 3,2,1; weighted descending inside each
        scores = [
            score("F.java", 1, weighted=0.1), score("F.java", 2, weighted=0.9),
            score("F.java", 3, weighted=0.5), score("F.java", 4, weighted=0.7),
            score("F.java", 5, weighted=0.2), score("F.java", 6, weighted=0.8),
            score("F.java", 7, weighted=0.4), score("F.java", 8, weighted=0.6),
            score("F.java", 9, weighted=0.3),
        ]
        warnings = [
            Warning("t", "F.java", 1, 3, 3),
            Warning("t", "F.java", 4, 6, 2),
            Warning("t", "F.java", 7, 9, 1),
        ]
        order = mix_order(warnings, scores)
        want = [
            ("F.java", 2), ("F.java", 3), ("F.java", 1),  # 0.9, 0.5, 0.1
            ("F.java", 6), ("F.java", 4), ("F.java", 5),  # 0.8, 0.7, 0.2
            ("F.java", 8), ("F.java", 7), ("F.java", 9),  # 0.6, 0.4, 0.3
        ]
        assert order == want

    def test_warned_line_without_score_is_error(self):
        with pytest.raises(ValueError, match="no score"):
            mix_order([Warning("t", "F.java", 9, 9, 1)], [score("F.java", 1, 0.0)])

    def test_deterministic_and_input_order_independent(self):
        scores = [score("F.java", i, weighted=float(i % 4)) for i in range(1, 9)]
        warnings = [
            Warning("t", "F.java", 2, 4, 2),
            Warning("t", "F.java", 6, 7, 1),
        ]
        a = mix_order(warnings, scores)
        b = mix_order(list(reversed(warnings)), list(reversed(scores)))
        assert a == b


class TestAucecl:
    def test_identical_orderings_equal_scores(self):
        population = lines(20)
        bugs = {"b": {("F.java", 4)}}
        sbf, nbf = aucecl(population, population, 5, bugs, CreditMode.FULL)
        assert sbf == nbf

    def test_budget_covering_everything(self):
        population = lines(10)
        bugs = {"b": {("F.java", 10)}}
        sbf, nbf = aucecl(population, list(reversed(population)), 10, bugs, CreditMode.FULL)
        full_area_fwd = aucec(lift_curve(population, bugs, CreditMode.FULL), 1.0)
        assert sbf == pytest.approx(full_area_fwd)

    def test_sbf_marking_exact_bugs_is_maximal(self):
        population = lines(50)
        bugs = {"b1": {("F.java", 10)}, "b2": {("F.java", 20)}}
        sbf_order = [("F.java", 10), ("F.java", 20)] + [
            l for l in population if l not in {("F.java", 10), ("F.java", 20)}
        ]
        rng = random.Random(1)
        others = population[:]
        rng.shuffle(others)
        sbf, nbf = aucecl(sbf_order, others, 2, bugs, CreditMode.FULL)
        assert sbf >= nbf
        # no ordering can beat earning all credit within the warned budget
        best = aucec(lift_curve(sbf_order, bugs, CreditMode.FULL), 2 / 50)
        assert sbf == pytest.approx(best)

    def test_zero_warnings_is_error(self):
        with pytest.raises(ValueError, match="zero warnings"):
            aucecl(lines(3), lines(3), 0, {}, CreditMode.FULL)

    def test_different_populations_is_error(self):
        with pytest.raises(ValueError, match="population"):
            aucecl(lines(3), lines(4), 1, {}, CreditMode.FULL)


class TestCompareEntropyDistributions:
    def test_identical_samples(self):
        sample = [1.0, 2.0, 3.0, 4.0]
        mean_diff, lo, hi, d = compare_entropy_distributions(sample, sample, 500, seed=1)
        assert mean_diff == 0.0
        assert d == 0.0
        assert lo <= 0.0 <= hi

    def test_degenerate_pooled_sd_is_error(self):
        with pytest.raises(ValueError, match="degenerate"):
            compare_entropy_distributions([3.0, 3.0, 3.0], [1.0, 1.0, 1.0])

    def test_tiny_sample_is_error(self):
        with pytest.raises(ValueError, match="at least 2"):
            compare_entropy_distributions([1.0], [1.0, 2.0])

    def test_unit_effect_size_on_seeded_normals(self):
        rng = np.random.default_rng(2024)
        a = rng.normal(1.0, 1.0, 10000)
        b = rng.normal(0.0, 1.0, 10000)
        mean_diff, lo, hi, d = compare_entropy_distributions(a, b, 1000, seed=7)
        assert d == pytest.approx(1.0, abs=0.05)
        assert lo < mean_diff < hi
        assert mean_diff == pytest.approx(1.0, abs=0.05)

    def test_ci_brackets_at_95(self):
        rng = np.random.default_rng(5)
        a = rng.normal(0.5, 1.0, 400)
        b = rng.normal(0.0, 1.0, 400)
        _, lo, hi, _ = compare_entropy_distributions(a, b, 2000, seed=9)
        assert lo < 0.5 < hi
        assert hi - lo < 0.4

    def test_seeded_determinism(self):
        a = list(np.linspace(0, 4, 50))
        b = list(np.linspace(1, 3, 50))
        r1 = compare_entropy_distributions(a, b, 300, seed=3)
        r2 = compare_entropy_distributions(a, b, 300, seed=3)
        assert r1 == r2
