"""Desk-scale reproduction of the heuristic ordering and the LB speed/quality trade-off.

Regenerates the tables in docs/source/Benchmarks.rst. Two studies run:

* **ordering**: desk MVC and MK instances, identical initial solutions,
  mean primal integral of RANDOM, LBRELAX and LBRELAX_RR at the horizon.
* **trade-off**: one LNS iteration of LBRELAX against LB (whose repair budget
  is 5x larger) on desk instances of every family, comparing the
  iteration's wall time and objective improvement.

Usage: uv run python tools/reproduce.py [--horizon 120] [--instances 20] [--study ordering|trade-off|all]
"""

import argparse
import time
from collections.abc import Sequence

import numpy as np
from tqdm import tqdm

import lbrelax
from lbrelax import FAMILY_PRESETS, Heuristic, LnsConfig, ResultRecord

ORDERING_FAMILIES = ("mvc", "mk")
ORDERING_HEURISTICS = (Heuristic.RANDOM, Heuristic.LBRELAX, Heuristic.LBRELAX_RR)


def print_table(columns: Sequence[str], rows: Sequence[Sequence[str]]) -> None:
    """Print an RST simple table; the first column is left-aligned, the rest right-aligned."""
    table = [tuple(columns), *(tuple(row) for row in rows)]
    widths = [max(len(row[i]) for row in table) for i in range(len(columns))]
    rule = "  ".join("=" * width for width in widths)
    print(rule)
    print("  ".join(name.ljust(width) for name, width in zip(columns, widths)))
    print(rule)
    for row in table[1:]:
        cells = [row[0].ljust(widths[0])] + [cell.rjust(width) for cell, width in zip(row[1:], widths[1:])]
        print("  ".join(cells).rstrip())
    print(rule)
    print()


def initial_solution(inst: lbrelax.IlpInstance, config: LnsConfig) -> tuple[lbrelax.Assignment, float]:
    t0 = time.perf_counter()
    initial = lbrelax.find_initial_solution(inst, config.initial_budget)
    return initial, time.perf_counter() - t0


def ordering(count: int, horizon: float) -> None:
    """Mean primal integral per heuristic on ``count`` instances of each ordering family."""
    for family in ORDERING_FAMILIES:
        records = []
        for seed in tqdm(range(count), desc=family):
            inst = lbrelax.generate_instance(family, FAMILY_PRESETS["desk"][family], seed)
            base = LnsConfig.desk(family, seed=seed).evolve(time_limit=horizon)
            initial, initial_time = initial_solution(inst, base)
            for heuristic in ORDERING_HEURISTICS:
                config = base.evolve(heuristic=heuristic)
                _, trace = lbrelax.run_lns(inst, config, initial, initial_time=initial_time)
                records.append(ResultRecord.from_trace(trace, seed=seed))

        rows = [
            (
                row.heuristic,
                f"{row.integral_mean:.2f} ± {row.integral_std:.2f}",
                f"{row.gap_pct_mean:.3f} ± {row.gap_pct_std:.3f}",
            )
            for row in lbrelax.summarize(records, [horizon])
        ]
        print(f"{family.upper()}: {count} instances, {horizon:g}s horizon")
        print()
        print_table(("heuristic", "primal integral", "primal gap (%)"), rows)


def first_iteration(inst: lbrelax.IlpInstance, config: LnsConfig, initial, initial_time) -> tuple[float, float]:
    """Wall time and objective improvement of a single LNS iteration."""
    _, trace = lbrelax.run_lns(inst, config.evolve(time_limit=None, iteration_limit=1), initial, initial_time=initial_time)
    event = trace.events[-1]
    return event.select_time + event.repair_time, trace.events[0].objective - event.objective


def trade_off(count: int) -> None:
    """First-iteration time and improvement of LBRELAX relative to LB."""
    rows = []
    for family in FAMILY_PRESETS["desk"]:
        seconds = {Heuristic.LBRELAX: [], Heuristic.LB: []}
        gains = {Heuristic.LBRELAX: [], Heuristic.LB: []}
        for seed in tqdm(range(count), desc=family):
            inst = lbrelax.generate_instance(family, FAMILY_PRESETS["desk"][family], seed)
            base = LnsConfig.desk(family, seed=seed)
            initial, initial_time = initial_solution(inst, base)
            for heuristic in seconds:
                spent, gain = first_iteration(inst, base.evolve(heuristic=heuristic), initial, initial_time)
                seconds[heuristic].append(spent)
                gains[heuristic].append(gain)
        lb_gain = float(np.mean(gains[Heuristic.LB]))
        ratio = float(np.mean(gains[Heuristic.LBRELAX])) / lb_gain if lb_gain > 0 else float("nan")
        rows.append(
            (
                family.upper(),
                f"{np.mean(seconds[Heuristic.LBRELAX]):.2f}",
                f"{np.mean(seconds[Heuristic.LB]):.2f}",
                f"{np.mean(gains[Heuristic.LBRELAX]):.1f}",
                f"{lb_gain:.1f}",
                f"{100 * ratio:.0f}%",
            )
        )
    print(f"First LNS iteration, {count} instances per family")
    print()
    print_table(
        ("family", "LBRELAX (s)", "LB (s)", "LBRELAX gain", "LB gain", "gain kept"),
        rows,
    )


def main() -> None:
    """Run the selected studies and print the RST tables used in docs/source/Benchmarks.rst."""
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--horizon", type=float, default=120.0, help="Seconds per ordering run.")
    parser.add_argument("--instances", type=int, default=20, help="Ordering instances per family.")
    parser.add_argument("--trade-off-instances", type=int, default=10)
    parser.add_argument("--study", choices=("ordering", "trade-off", "all"), default="all")
    args = parser.parse_args()

    if args.study in ("ordering", "all"):
        ordering(args.instances, args.horizon)
    if args.study in ("trade-off", "all"):
        trade_off(args.trade_off_instances)


if __name__ == "__main__":
    main()
