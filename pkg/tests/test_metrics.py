"""Tests for primal gap, primal integral and portfolio metrics."""

import math

import numpy as np
import pytest

from lbrelax import (
    GapSeries,
    ResultRecord,
    RunTrace,
    TraceEvent,
    best_performing_rate,
    default_survival_threshold,
    gap_at,
    gap_series,
    gap_to_virtual_best,
    primal_gap,
    primal_integral,
    summarize,
    survival_rate,
)
from lbrelax._metrics import (
    best_known_objectives,
    best_rate_curve,
    iteration_table,
    objective_at,
    survival_curve,
    virtual_best_curve,
)


def record(instance, heuristic, points, replicate=0, maximization=False):
    """Result record whose improving events are ``(time, original-sense objective)`` pairs."""
    events = []
    for i, (t, value) in enumerate(points):
        internal = -value if maximization else value
        events.append(TraceEvent(t, i, internal, heuristic, 1, True))
    trace = RunTrace(instance, heuristic, {}, maximization, events)
    return ResultRecord.from_trace(trace, seed=0, replicate=replicate)


class TestPrimalGap:
    def test_relative_difference(self):
        assert primal_gap(105, 100) == pytest.approx(5 / 105)

    def test_identity(self):
        assert primal_gap(42.0, 42.0) == 0.0
        assert primal_gap(0.0, 0.0) == 0.0

    def test_negative_pair_capped(self):
        assert primal_gap(-90, -100) == 1.0

    def test_mixed_signs(self):
        assert primal_gap(-1, 5) == 1.0

    def test_missing(self):
        assert primal_gap(None, 3.0) == 1.0
        assert primal_gap(3.0, None) == 1.0

    def test_epsilon_denominator(self):
        assert primal_gap(0.0, 1e-9) == pytest.approx(1e-9 / 1e-8)

    @pytest.mark.parametrize("seed", range(5))
    def test_unit_interval(self, seed):
        rng = np.random.default_rng(seed)
        for v, v_star in rng.normal(scale=100, size=(200, 2)):
            assert 0.0 <= primal_gap(v, v_star) <= 1.0


class TestGapSeries:
    def test_validation(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            GapSeries([1.0, 1.0], [0.5, 0.2])
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            GapSeries([0.0], [1.5])
        with pytest.raises(ValueError, match="equal length"):
            GapSeries([0.0, 1.0], [0.5])
        with pytest.raises(ValueError, match="nonnegative"):
            GapSeries([-1.0], [0.5])

    def test_from_events(self):
        rec = record("i", "A", [(0.0, 10.0), (4.0, 8.0), (4.0, 7.0)])
        series = gap_series(rec, 7.0)
        assert series.times.tolist() == [0.0, 4.0]
        assert series.gaps.tolist() == pytest.approx([3 / 10, 0.0])

    def test_maximization(self):
        rec = record("i", "A", [(1.0, 90.0)], maximization=True)
        assert gap_series(rec, 100.0).gaps.tolist() == pytest.approx([10 / 100])

    def test_gap_at(self):
        series = GapSeries([2.0, 5.0], [0.4, 0.1])
        assert gap_at(series, 1.0) == 1.0
        assert gap_at(series, 2.0) == 0.4
        assert gap_at(series, 4.99) == 0.4
        assert gap_at(series, 100.0) == 0.1

    def test_objective_at(self):
        rec = record("i", "A", [(0.0, 10.0), (4.0, 8.0)])
        assert objective_at(rec, 3.0) == 10.0
        assert objective_at(rec, 4.0) == 8.0
        assert objective_at(record("i", "A", [(2.0, 1.0)]), 1.0) is None


class TestPrimalIntegral:
    def test_step_integral(self):
        assert primal_integral(GapSeries([0.0, 10.0], [0.5, 0.2]), 20.0) == pytest.approx(7.0)

    def test_zero(self):
        assert primal_integral(GapSeries([0.0], [0.5]), 0.0) == 0.0

    def test_no_solution_yet(self):
        assert primal_integral(GapSeries([3.0], [0.0]), 10.0) == pytest.approx(3.0)

    def test_empty_series(self):
        assert primal_integral(GapSeries([], []), 12.5) == pytest.approx(12.5)

    def test_negative_q(self):
        with pytest.raises(ValueError, match="nonnegative"):
            primal_integral(GapSeries([0.0], [0.5]), -1.0)

    def test_beyond_horizon(self):
        with pytest.raises(ValueError, match="beyond the horizon"):
            primal_integral(GapSeries([0.0], [0.5], horizon=10.0), 11.0)

    @pytest.mark.parametrize("seed", range(5))
    def test_grid_oracle(self, seed):
        rng = np.random.default_rng(seed)
        times = np.sort(rng.choice(np.arange(0, 1000), size=8, replace=False)) / 10.0
        gaps = np.sort(rng.random(8))[::-1]
        series = GapSeries(times, gaps)
        # Breakpoints sit on a 0.1 grid, so a midpoint sum on a 0.01 grid is exact up to rounding.
        step = 1e-2
        grid = np.arange(0.0, 100.0, step) + step / 2
        riemann = sum(gap_at(series, t) for t in grid) * step
        assert primal_integral(series, 100.0) == pytest.approx(riemann, abs=1e-9 * 1e4)

    def test_monotone_and_lipschitz(self):
        series = GapSeries([1.0, 3.0, 7.0], [0.8, 0.3, 0.0])
        qs = np.linspace(0, 10, 101)
        values = np.array([primal_integral(series, q) for q in qs])
        assert np.all(np.diff(values) >= 0)
        assert np.all(np.diff(values) <= np.diff(qs) + 1e-12)


class TestSurvivalRate:
    def test_fraction_below(self):
        assert survival_rate([0.1, 0.6, 0.2], 0.5) == pytest.approx(2 / 3)

    def test_strict(self):
        assert survival_rate([0.0, 0.0], 0.0) == 0.0
        assert survival_rate([0.5], 0.5) == 0.0

    def test_all_below(self):
        assert survival_rate([0.1, 0.2], 0.3) == 1.0

    def test_empty(self):
        with pytest.raises(ValueError, match="empty"):
            survival_rate([], 0.5)

    def test_default_threshold(self):
        assert default_survival_threshold([0.0123, 0.0031, 0.0507]) == pytest.approx(0.0125)
        assert default_survival_threshold([0.0002]) == 0.0

    def test_default_threshold_empty(self):
        with pytest.raises(ValueError, match="no mean gaps"):
            default_survival_threshold([])


class TestBestPerformingRate:
    def test_ties_count_for_all(self):
        rates = best_performing_rate({"A": [5.0, 3.0], "B": [5.0, 4.0]}, [False, False])
        assert rates == {"A": 1.0, "B": 0.5}

    def test_single_approach(self):
        assert best_performing_rate({"A": [1.0, 2.0, 3.0]}, [False, True, False]) == {"A": 1.0}

    def test_maximization(self):
        rates = best_performing_rate({"A": [7.0], "B": [9.0]}, [True])
        assert rates == {"A": 0.0, "B": 1.0}

    def test_missing_solution(self):
        rates = best_performing_rate({"A": [None, 1.0], "B": [2.0, 1.0 + 1e-12]}, [False, False])
        assert rates == {"A": 0.5, "B": 1.0}

    def test_sum_may_exceed_one(self):
        rates = best_performing_rate({"A": [1.0], "B": [1.0], "C": [1.0]}, [False])
        assert sum(rates.values()) == 3.0

    def test_empty(self):
        with pytest.raises(ValueError, match="empty"):
            best_performing_rate({"A": []}, [])


class TestGapToVirtualBest:
    def test_holder_is_zero(self):
        gaps = gap_to_virtual_best({"A": [100.0, 50.0], "B": [105.0, 50.0]}, [False, False])
        assert gaps["A"].tolist() == [0.0, 0.0]
        assert gaps["B"].tolist() == pytest.approx([5 / 105, 0.0])

    def test_single_approach(self):
        assert gap_to_virtual_best({"A": [3.0, 8.0]}, [False, True])["A"].tolist() == [0.0, 0.0]

    def test_no_solution(self):
        assert gap_to_virtual_best({"A": [None], "B": [2.0]}, [False])["A"].tolist() == [1.0]

    def test_matches_primal_gap_at_horizon(self):
        records = [
            record("x", "A", [(0.0, 20.0), (5.0, 12.0)]),
            record("x", "B", [(1.0, 15.0)]),
            record("y", "A", [(0.0, 3.0)], maximization=True),
            record("y", "B", [(0.0, 2.0), (2.0, 4.0)], maximization=True),
        ]
        v_star = best_known_objectives(records)
        curve = virtual_best_curve(records, [10.0])
        for approach in ("A", "B"):
            expected = np.mean(
                [gap_at(gap_series(r, v_star[r.instance]), 10.0) for r in records if r.heuristic == approach]
            )
            assert curve[approach] == pytest.approx([expected])


@pytest.fixture
def portfolio():
    """Two approaches on two instances with hand-checkable numbers."""
    return [
        record("p", "A", [(0.0, 10.0), (10.0, 8.0)]),
        record("p", "B", [(0.0, 10.0)]),
        record("q", "A", [(0.0, 4.0)]),
        record("q", "B", [(0.0, 5.0), (5.0, 4.0)]),
    ]


class TestPortfolio:
    def test_best_known(self, portfolio):
        assert best_known_objectives(portfolio) == {"p": 8.0, "q": 4.0}

    def test_summarize_hand_arithmetic(self, portfolio):
        rows = summarize(portfolio, [20.0])
        by_approach = {row.heuristic: row for row in rows}
        # A: gaps 0 and 0; integrals 0.2 * 10 = 2.0 and 0.
        assert by_approach["A"].gap_pct_mean == pytest.approx(0.0)
        assert by_approach["A"].integral_mean == pytest.approx(1.0)
        assert by_approach["A"].integral_std == pytest.approx(1.0)
        # B: gaps 20 % and 0; integrals 0.2 * 20 = 4.0 and 0.2 * 5 = 1.0.
        assert by_approach["B"].gap_pct_mean == pytest.approx(10.0)
        assert by_approach["B"].gap_pct_std == pytest.approx(10.0)
        assert by_approach["B"].integral_mean == pytest.approx(2.5)
        assert by_approach["B"].integral_std == pytest.approx(1.5)
        assert by_approach["B"].runs == 2

    def test_summarize_three_runs(self):
        runs = [record(name, "A", [(0.0, value)]) for name, value in (("a", 10.0), ("b", 10.0), ("c", 10.0))]
        v_star = {"a": 10.0, "b": 8.0, "c": 5.0}
        (row,) = summarize(runs, [1.0], v_star)
        gaps = np.array([0.0, 20.0, 50.0])
        assert row.gap_pct_mean == pytest.approx(gaps.mean())
        assert row.gap_pct_std == pytest.approx(math.sqrt(((gaps - gaps.mean()) ** 2).mean()))

    def test_survival_curve(self, portfolio):
        threshold, curves = survival_curve(portfolio, [1.0, 20.0], threshold=0.01)
        assert threshold == 0.01
        assert curves == {"A": [0.5, 1.0], "B": [0.0, 0.5]}

    def test_survival_curve_default_threshold(self, portfolio):
        threshold, curves = survival_curve(portfolio, [20.0])
        # Mean gaps at the horizon: A 0, B 0.1; median 0.05.
        assert threshold == pytest.approx(0.05)
        assert curves == {"A": [1.0], "B": [0.5]}

    def test_best_rate_curve(self, portfolio):
        assert best_rate_curve(portfolio, [1.0, 20.0]) == {"A": [1.0, 1.0], "B": [0.5, 0.5]}

    def test_replicates_are_separate_cases(self):
        records = [
            record("p", "A", [(0.0, 3.0)], replicate=0),
            record("p", "A", [(0.0, 5.0)], replicate=1),
            record("p", "B", [(0.0, 4.0)], replicate=0),
            record("p", "B", [(0.0, 4.0)], replicate=1),
        ]
        assert best_rate_curve(records, [1.0]) == {"A": [0.5], "B": [0.5]}

    def test_iteration_table(self, portfolio):
        table = iteration_table(portfolio, [0, 1])
        # A after 0 iterations: p 0.2, q 0; after 1: both 0.
        assert table["A"] == pytest.approx([0.1, 0.0])
        assert table["B"] == pytest.approx([0.2, 0.1])
