"""Primal gap, primal integral and portfolio comparisons over run traces."""

from __future__ import annotations

import math
from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from typing import Any

import attrs
import numpy as np

GAP_EPSILON = 1e-8
TIE_TOL = 1e-9
THRESHOLD_STEP = 0.0005


def _readonly(value: Any) -> np.ndarray:
    array = np.array(value, dtype=np.float64)
    array.setflags(write=False)
    return array


@attrs.frozen
class GapSeries:
    """Right-continuous step function of the primal gap over time.

    The gap is 1 before ``times[0]`` and ``gaps[i]`` on ``[times[i], times[i + 1])``.
    """

    times: np.ndarray = attrs.field(converter=_readonly, eq=attrs.cmp_using(eq=np.array_equal))
    gaps: np.ndarray = attrs.field(converter=_readonly, eq=attrs.cmp_using(eq=np.array_equal))
    horizon: float = math.inf

    def __attrs_post_init__(self):
        if self.times.shape != self.gaps.shape or self.times.ndim != 1:
            raise ValueError("times and gaps must be one-dimensional and of equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("breakpoint times must be strictly increasing")
        if self.times.size and self.times[0] < 0:
            raise ValueError("breakpoint times must be nonnegative")
        if np.any(self.gaps < 0) or np.any(self.gaps > 1):
            raise ValueError("gaps must lie in [0, 1]")


def primal_gap(v: float | None, v_star: float | None, epsilon: float = GAP_EPSILON) -> float:
    """Normalized distance of ``v`` to the best known value ``v_star``.

    ``|v - v*| / max(v, v*, epsilon)`` when both exist and share a sign,
    otherwise 1. Capped at 1. Both values are in the problem's original sense.

    Examples
    --------
    >>> primal_gap(105, 100)
    0.047619047619047616
    """
    if v is None or v_star is None or v * v_star < 0:
        return 1.0
    return min(1.0, abs(v - v_star) / max(v, v_star, epsilon))


def _events_of(source: Any) -> Sequence[Any]:
    return source.events if hasattr(source, "events") else source


def objective_at(source: Any, q: float, maximization: bool | None = None) -> float | None:
    """Original-sense objective of the incumbent held at time ``q``, or ``None``."""
    maximization = getattr(source, "maximization", False) if maximization is None else maximization
    best = None
    for event in _events_of(source):
        if event.improved and event.wall_time <= q:
            best = event.objective
    if best is None:
        return None
    return -best if maximization else best


def gap_series(
    source: Any, v_star: float | None, maximization: bool | None = None, horizon: float | None = None
) -> GapSeries:
    """Build the gap step function of a trace or result record.

    Parameters
    ----------
    source : RunTrace, ResultRecord or sequence of TraceEvent
        Events with internal objectives; only improving events are used.
    v_star : float or None
        Best known objective in the original sense.
    maximization : bool or None
        Sense of the source problem; read from ``source`` when ``None``.
    horizon : float or None
        End of the evaluation window; unbounded when ``None``.
    """
    maximization = getattr(source, "maximization", False) if maximization is None else maximization
    times: list[float] = []
    gaps: list[float] = []
    for event in _events_of(source):
        if not event.improved:
            continue
        value = -event.objective if maximization else event.objective
        gap = primal_gap(value, v_star)
        if times and event.wall_time <= times[-1]:
            gaps[-1] = gap
            continue
        times.append(max(float(event.wall_time), 0.0))
        gaps.append(gap)
    return GapSeries(times, gaps, math.inf if horizon is None else float(horizon))


def gap_at(series: GapSeries, q: float) -> float:
    """Gap held at time ``q``."""
    i = int(np.searchsorted(series.times, q, side="right"))
    return 1.0 if i == 0 else float(series.gaps[i - 1])


def primal_integral(series: GapSeries, q: float) -> float:
    """Integral of the gap over ``[0, q]``.

    Raises
    ------
    ValueError
        If ``q`` is negative or beyond the series horizon.

    Examples
    --------
    >>> primal_integral(GapSeries([0.0, 10.0], [0.5, 0.2]), 20.0)
    7.0
    """
    if q < 0:
        raise ValueError(f"q must be nonnegative, got {q}")
    if q > series.horizon:
        raise ValueError(f"q={q} lies beyond the horizon {series.horizon}")
    starts = np.concatenate(([0.0], series.times))
    values = np.concatenate(([1.0], series.gaps))
    ends = np.append(series.times, math.inf)
    widths = np.clip(np.minimum(ends, q) - starts, 0.0, None)
    return float(np.sum(widths * values))


def survival_rate(gaps: Iterable[float], threshold: float) -> float:
    """Fraction of gaps strictly below ``threshold``."""
    gaps = np.asarray(list(gaps), dtype=np.float64)
    if gaps.size == 0:
        raise ValueError("survival rate of an empty set of instances")
    return float(np.mean(gaps < threshold))


def _best(values: Sequence[float | None], maximization: bool) -> float | None:
    present = [v for v in values if v is not None]
    if not present:
        return None
    return max(present) if maximization else min(present)


def best_performing_rate(
    objectives: Mapping[str, Sequence[float | None]], maximization: Sequence[bool]
) -> dict[str, float]:
    """Fraction of instances on which each approach holds the best objective, ties counted for all.

    Parameters
    ----------
    objectives : mapping of str to sequence of float or None
        Original-sense objective per instance for every approach; ``None``
        means no solution.
    maximization : sequence of bool
        Sense of each instance.
    """
    n_instances = len(maximization)
    if n_instances == 0:
        raise ValueError("best-performing rate of an empty set of instances")
    wins = dict.fromkeys(objectives, 0)
    for i, maximize in enumerate(maximization):
        best = _best([values[i] for values in objectives.values()], maximize)
        if best is None:
            continue
        for approach, values in objectives.items():
            if values[i] is not None and abs(values[i] - best) <= TIE_TOL:
                wins[approach] += 1
    return {approach: count / n_instances for approach, count in wins.items()}


def gap_to_virtual_best(
    objectives: Mapping[str, Sequence[float | None]], maximization: Sequence[bool]
) -> dict[str, np.ndarray]:
    """Per-instance primal gap of every approach against the best value any approach reached."""
    out = {approach: np.ones(len(maximization)) for approach in objectives}
    for i, maximize in enumerate(maximization):
        best = _best([values[i] for values in objectives.values()], maximize)
        for approach, values in objectives.items():
            out[approach][i] = primal_gap(values[i], best)
    return out


def default_survival_threshold(mean_gaps: Iterable[float]) -> float:
    """Median of per-approach mean gaps rounded to the nearest 0.05 %."""
    mean_gaps = np.asarray(list(mean_gaps), dtype=np.float64)
    if mean_gaps.size == 0:
        raise ValueError("no mean gaps to take the median of")
    return round(float(np.median(mean_gaps)) / THRESHOLD_STEP) * THRESHOLD_STEP


# Portfolio helpers. A "record" is anything with ``instance``, ``heuristic``,
# ``replicate``, ``maximization`` and ``events`` attributes.


def best_known_objectives(records: Iterable[Any]) -> dict[str, float | None]:
    """Best original-sense objective per instance over every record."""
    best: dict[str, float | None] = {}
    for record in records:
        value = objective_at(record, math.inf)
        current = best.get(record.instance)
        if current is None:
            best[record.instance] = value
        elif value is not None:
            best[record.instance] = max(current, value) if record.maximization else min(current, value)
    return best


def _cases(records: Iterable[Any]) -> tuple[list[tuple[str, int]], dict[str, dict[tuple[str, int], Any]]]:
    """Group records by approach and by (instance, replicate) case."""
    by_approach: dict[str, dict[tuple[str, int], Any]] = defaultdict(dict)
    cases = set()
    for record in records:
        case = (record.instance, record.replicate)
        by_approach[record.heuristic][case] = record
        cases.add(case)
    return sorted(cases), dict(sorted(by_approach.items()))


def record_metrics(
    record: Any, checkpoints: Sequence[float], v_star: float | None
) -> list[tuple[float, float]]:
    """``(primal gap, primal integral)`` of one record at every checkpoint."""
    series = gap_series(record, v_star)
    return [(gap_at(series, q), primal_integral(series, q)) for q in checkpoints]


@attrs.frozen
class SummaryRow:
    """Mean and population standard deviation of one approach at one checkpoint."""

    heuristic: str
    checkpoint: float
    gap_pct_mean: float
    gap_pct_std: float
    integral_mean: float
    integral_std: float
    runs: int


def summarize(
    records: Sequence[Any], checkpoints: Sequence[float], v_star: Mapping[str, float | None] | None = None
) -> list[SummaryRow]:
    """Primal gap (%) and primal integral per approach and checkpoint, as mean and standard deviation."""
    v_star = best_known_objectives(records) if v_star is None else v_star
    per_approach: dict[str, list[list[tuple[float, float]]]] = defaultdict(list)
    for record in records:
        per_approach[record.heuristic].append(record_metrics(record, checkpoints, v_star.get(record.instance)))

    rows = []
    for heuristic in sorted(per_approach):
        values = np.array(per_approach[heuristic], dtype=np.float64)  # (runs, checkpoints, 2)
        for c, q in enumerate(checkpoints):
            gaps = values[:, c, 0] * 100.0
            integrals = values[:, c, 1]
            rows.append(
                SummaryRow(
                    heuristic=heuristic,
                    checkpoint=float(q),
                    gap_pct_mean=float(np.mean(gaps)),
                    gap_pct_std=float(np.std(gaps)),
                    integral_mean=float(np.mean(integrals)),
                    integral_std=float(np.std(integrals)),
                    runs=int(values.shape[0]),
                )
            )
    return rows


def _objective_matrix(records: Sequence[Any], q: float) -> tuple[dict[str, list[float | None]], list[bool]]:
    cases, by_approach = _cases(records)
    maximization = {}
    for record in records:
        maximization[(record.instance, record.replicate)] = record.maximization
    objectives = {
        approach: [objective_at(runs[case], q) if case in runs else None for case in cases]
        for approach, runs in by_approach.items()
    }
    return objectives, [maximization[case] for case in cases]


def survival_curve(
    records: Sequence[Any],
    times: Sequence[float],
    threshold: float | None = None,
    v_star: Mapping[str, float | None] | None = None,
) -> tuple[float, dict[str, list[float]]]:
    """Survival rate of every approach at each time.

    Returns
    -------
    tuple of (float, dict)
        The threshold used (see :func:`default_survival_threshold` when
        ``threshold`` is ``None``) and the curve per approach.
    """
    v_star = best_known_objectives(records) if v_star is None else v_star
    _, by_approach = _cases(records)
    series = {
        approach: [gap_series(record, v_star.get(record.instance)) for record in runs.values()]
        for approach, runs in by_approach.items()
    }
    if threshold is None:
        horizon = max(times)
        threshold = default_survival_threshold(
            np.mean([gap_at(s, horizon) for s in runs]) for runs in series.values()
        )
    curves = {
        approach: [survival_rate((gap_at(s, q) for s in runs), threshold) for q in times]
        for approach, runs in series.items()
    }
    return threshold, curves


def best_rate_curve(records: Sequence[Any], times: Sequence[float]) -> dict[str, list[float]]:
    """Best-performing rate of every approach at each time."""
    curves: dict[str, list[float]] = defaultdict(list)
    for q in times:
        objectives, maximization = _objective_matrix(records, q)
        for approach, rate in best_performing_rate(objectives, maximization).items():
            curves[approach].append(rate)
    return dict(curves)


def virtual_best_curve(records: Sequence[Any], times: Sequence[float]) -> dict[str, list[float]]:
    """Mean gap to the virtual best of every approach at each time."""
    curves: dict[str, list[float]] = defaultdict(list)
    for q in times:
        objectives, maximization = _objective_matrix(records, q)
        for approach, gaps in gap_to_virtual_best(objectives, maximization).items():
            curves[approach].append(float(np.mean(gaps)))
    return dict(curves)


def iteration_table(
    records: Sequence[Any], iterations: Sequence[int], v_star: Mapping[str, float | None] | None = None
) -> dict[str, list[float]]:
    """Mean primal gap of every approach after each LNS iteration count."""
    v_star = best_known_objectives(records) if v_star is None else v_star
    table: dict[str, list[list[float]]] = defaultdict(list)
    for record in records:
        gaps = []
        for t in iterations:
            held = None
            for event in record.events:
                if event.improved and event.iteration <= t:
                    held = event.objective
            value = None if held is None else (-held if record.maximization else held)
            gaps.append(primal_gap(value, v_star.get(record.instance)))
        table[record.heuristic].append(gaps)
    return {heuristic: np.mean(rows, axis=0).tolist() for heuristic, rows in sorted(table.items())}
