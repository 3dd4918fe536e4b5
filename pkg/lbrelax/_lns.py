"""Large Neighborhood Search engine, destroy heuristics and neighborhood-size adaptation."""

from __future__ import annotations

import itertools
import math
import time
from collections.abc import Callable
from enum import Enum
from typing import Any

import attrs
import networkx as nx
import numpy as np
from loguru import logger

from ._config import Heuristic, LnsConfig
from ._exact import SolveBudget, branch_and_bound, find_initial_solution
from ._exceptions import InfeasibleIncumbentError, NoSolutionError
from ._model import OBJECTIVE_TOL, Assignment, IlpInstance, build_lb_ilp, fix_and_project, is_feasible
from ._simplex import LpStatus, solve_lp

# Minimum |x_bar_i - x_i| for a variable to count as moved by the LP.
DELTA_TOL = 1e-9

Clock = Callable[[], float]


def _sorted_indices(value: Any) -> np.ndarray:
    array = np.unique(np.asarray(value, dtype=np.int64))
    array.setflags(write=False)
    return array


@attrs.frozen
class Neighborhood:
    """Variables selected for destruction in one iteration.

    Parameters
    ----------
    indices : numpy.ndarray
        Sorted, deduplicated variable indices.
    k : int
        Neighborhood size the heuristic was asked for.
    proposal : Assignment or None
        Improving solution already found while selecting (Local Branching only).
    note : str
        Free-form annotation copied into the trace.
    """

    indices: np.ndarray = attrs.field(converter=_sorted_indices, eq=attrs.cmp_using(eq=np.array_equal))
    k: int
    proposal: Assignment | None = None
    note: str = ""

    def __len__(self) -> int:
        return int(self.indices.shape[0])


class RrMode(Enum):
    """Phase of the LBRELAX_RR state machine."""

    RELAX = "relax"
    RANDOMIZED = "randomized"


@attrs.frozen
class TraceEvent:
    """One point of a run trace.

    ``objective`` is the internal (minimization) objective of the incumbent
    after the iteration.
    """

    wall_time: float
    iteration: int
    objective: float
    heuristic: str
    k: int
    improved: bool
    note: str = ""
    select_time: float = 0.0
    repair_time: float = 0.0

    def without_timing(self) -> tuple:
        return (self.iteration, self.objective, self.heuristic, self.k, self.improved, self.note)


@attrs.define
class RunTrace:
    """Time series of one run."""

    instance: str
    heuristic: str
    config: dict[str, Any] = attrs.field(factory=dict)
    maximization: bool = False
    events: list[TraceEvent] = attrs.field(factory=list)

    def record(self, event: TraceEvent) -> None:
        if self.events and event.wall_time < self.events[-1].wall_time:
            event = attrs.evolve(event, wall_time=self.events[-1].wall_time)
        self.events.append(event)

    def improvements(self) -> list[TraceEvent]:
        """Events that produced a new incumbent, the initial solution included."""
        return [event for event in self.events if event.improved]

    @property
    def final_objective(self) -> float | None:
        improving = self.improvements()
        return improving[-1].objective if improving else None

    @property
    def iterations(self) -> int:
        return max((event.iteration for event in self.events), default=0)

    def without_timing(self) -> list[tuple]:
        """Events stripped of timing fields, for comparing reproducible runs."""
        return [event.without_timing() for event in self.events]


def variable_graph(inst: IlpInstance) -> nx.Graph:
    """Bipartite variable/constraint incidence graph of an instance.

    Nodes ``0 .. n - 1`` are variables (``bipartite=0``) and nodes
    ``n .. n + m - 1`` are rows (``bipartite=1``). Adjacency lists are
    ascending, so breadth-first order only depends on the start node.
    """
    graph = nx.Graph()
    graph.add_nodes_from(range(inst.n), bipartite=0)
    graph.add_nodes_from(range(inst.n, inst.n + inst.m), bipartite=1)
    row_ids, cols, _ = inst.coordinates()
    order = np.lexsort((cols, row_ids))
    graph.add_edges_from(zip(cols[order].tolist(), (row_ids[order] + inst.n).tolist()))
    return graph


@attrs.define
class LnsState:
    """Mutable state of one LNS run.

    Parameters
    ----------
    incumbent : Assignment
        Best solution found so far; always feasible.
    k : int
        Current neighborhood size.
    rng : numpy.random.Generator
        The run's only source of randomness.
    """

    incumbent: Assignment
    k: int
    rng: np.random.Generator
    t: int = 0
    rr_mode: RrMode = RrMode.RELAX
    rr_failures: int = 0
    rr_phase_started: float = 0.0
    rr_phase_improved: bool = False
    graph: nx.Graph | None = None

    @classmethod
    def start(cls, inst: IlpInstance, config: LnsConfig, incumbent: Assignment) -> LnsState:
        """Initial state of a run: ``k = min(k0, max(1, floor(beta * n)))``."""
        k = min(config.k0, _size_cap(inst.n, config.beta))
        graph = variable_graph(inst) if config.heuristic is Heuristic.GRAPH else None
        return cls(incumbent=incumbent, k=k, rng=np.random.default_rng(config.seed), graph=graph)


def _size_cap(n: int, beta: float) -> int:
    return max(1, math.floor(beta * n))


def update_neighborhood_size(state: LnsState, improved: bool, config: LnsConfig) -> int:
    """Next neighborhood size.

    Unchanged after an improvement (or with ``config.fixed_k``); otherwise
    ``min(ceil(alpha * k), floor(beta * n))``, never below 1. The ceiling is
    taken with a small tolerance so that products like ``1.02 * 100`` land on
    102 rather than 103.
    """
    if improved or config.fixed_k:
        return state.k
    cap = _size_cap(state.incumbent.n, config.beta)
    grown = max(state.k + 1, math.ceil(config.alpha * state.k - 1e-9))
    return max(1, min(grown, cap))


def _sample(rng: np.random.Generator, pool: np.ndarray, size: int) -> np.ndarray:
    """Uniform sample without replacement; every random draw of a neighborhood goes through here."""
    if size <= 0:
        return np.empty(0, dtype=np.int64)
    return rng.choice(pool, size=size, replace=False)


def _complement(n: int, chosen: np.ndarray) -> np.ndarray:
    mask = np.ones(n, dtype=bool)
    mask[chosen] = False
    return np.flatnonzero(mask)


def _pad(rng: np.random.Generator, n: int, chosen: np.ndarray, k: int) -> np.ndarray:
    """Top ``chosen`` up to ``k`` indices with a uniform sample of the rest."""
    missing = k - chosen.shape[0]
    if missing <= 0:
        return chosen
    return np.concatenate([chosen, _sample(rng, _complement(n, chosen), missing)])


def destroy_random(state: LnsState, k: int) -> Neighborhood:
    """``k`` distinct indices drawn uniformly from ``[0, n)``."""
    n = state.incumbent.n
    k = min(k, n)
    return Neighborhood(_sample(state.rng, np.arange(n), k), k)


def destroy_graph(
    inst: IlpInstance, state: LnsState, k: int, graph: nx.Graph | None = None, start: int | None = None
) -> Neighborhood:
    """First ``k`` variables reached by a breadth-first search of the variable/constraint graph.

    The search starts at ``start`` (a uniformly random variable when ``None``).
    When a connected component runs out before ``k`` variables are collected,
    the search restarts from a uniformly random unvisited variable.
    """
    if graph is None:
        graph = state.graph if state.graph is not None else variable_graph(inst)
    n = inst.n
    k = min(k, n)
    taken = np.zeros(n, dtype=bool)
    order: list[int] = []

    while len(order) < k:
        if start is None:
            start = int(state.rng.choice(np.flatnonzero(~taken)))
        # Even layers hold variables, odd layers hold rows.
        for layer in itertools.islice(nx.bfs_layers(graph, start), 0, None, 2):
            order.extend(layer[: k - len(order)])
            if len(order) == k:
                break
        taken[order] = True
        start = None
    return Neighborhood(order, k)


def destroy_lb(inst: IlpInstance, state: LnsState, k: int, budget: SolveBudget) -> Neighborhood:
    """Neighborhood from the Local Branching ILP around the incumbent.

    The ILP restricted to the Hamming ball of radius ``k`` is solved with
    ``budget``. The variables where its best solution ``y`` differs from the
    incumbent are selected and padded with random indices up to ``k``; an
    improving ``y`` travels along as :attr:`Neighborhood.proposal`.
    """
    n = inst.n
    k = min(k, n)
    incumbent = state.incumbent
    lb_ilp = build_lb_ilp(inst, incumbent, k)
    result = branch_and_bound(lb_ilp, budget, warm_start=Assignment.from_values(lb_ilp, incumbent.values))
    if result.best is None:
        neighborhood = destroy_random(state, k)
        return attrs.evolve(neighborhood, note="lb-fallback")

    differ = np.flatnonzero(result.best.values != incumbent.values)
    proposal = None
    if result.best.objective < incumbent.objective - OBJECTIVE_TOL:
        proposal = Assignment.from_values(inst, result.best.values)
    return Neighborhood(_pad(state.rng, n, differ, k), k, proposal=proposal)


def _relaxation_deltas(inst: IlpInstance, state: LnsState, k: int) -> tuple[np.ndarray, str]:
    """``|x_bar - x|`` for the LP relaxation of the Local Branching ILP."""
    incumbent = state.incumbent
    lp = solve_lp(build_lb_ilp(inst, incumbent, k), start=incumbent.values)
    if lp.status is LpStatus.INFEASIBLE:
        raise InfeasibleIncumbentError(f"Local Branching relaxation of {inst.name!r} is infeasible")
    note = ""
    if lp.status is LpStatus.ITERATION_LIMIT:
        logger.warning("LP iteration limit in LB relaxation of {!r} after {} pivots", inst.name, lp.iterations)
        note = "lp-iteration-limit"
        if lp.phase_one_unresolved:
            return np.zeros(inst.n), note
    return np.abs(lp.values.values - incumbent.values), note


def destroy_lb_relax(inst: IlpInstance, state: LnsState, k: int) -> Neighborhood:
    """The ``k`` variables the Local Branching LP relaxation moves the most.

    Ties are broken uniformly at random. When fewer than ``k`` variables move,
    all of them are taken and the rest is sampled uniformly.
    """
    k = min(k, inst.n)
    delta, note = _relaxation_deltas(inst, state, k)
    candidates = np.flatnonzero(delta > DELTA_TOL)
    if candidates.shape[0] >= k:
        shuffled = state.rng.permutation(candidates)
        ranked = shuffled[np.argsort(-delta[shuffled], kind="stable")]
        return Neighborhood(ranked[:k], k, note=note)
    return Neighborhood(_pad(state.rng, inst.n, candidates, k), k, note=note)


def destroy_lb_relax_s(inst: IlpInstance, state: LnsState, k: int) -> Neighborhood:
    """As :func:`destroy_lb_relax`, but samples ``k`` of the moved variables uniformly."""
    k = min(k, inst.n)
    delta, note = _relaxation_deltas(inst, state, k)
    candidates = np.flatnonzero(delta > DELTA_TOL)
    if candidates.shape[0] >= k:
        return Neighborhood(_sample(state.rng, candidates, k), k, note=note)
    return Neighborhood(_pad(state.rng, inst.n, candidates, k), k, note=note)


def step_lb_relax_rr(inst: IlpInstance, state: LnsState, config: LnsConfig) -> Neighborhood:
    """Select with LBRELAX in relax mode, uniformly at random in randomized mode."""
    if state.rr_mode is RrMode.RELAX:
        return destroy_lb_relax(inst, state, state.k)
    neighborhood = destroy_random(state, state.k)
    return attrs.evolve(neighborhood, note="rr-randomized")


def update_rr_mode(state: LnsState, improved: bool, config: LnsConfig, now: float) -> RrMode:
    """Advance the LBRELAX_RR state machine after an iteration ending at ``now`` seconds.

    Two consecutive failures in relax mode enter the randomized phase. The
    randomized phase ends once ``config.gamma`` seconds have passed since it
    began and an improvement was found during it.
    """
    if state.rr_mode is RrMode.RELAX:
        if improved:
            state.rr_failures = 0
            return state.rr_mode
        state.rr_failures += 1
        if state.rr_failures >= 2:
            state.rr_mode = RrMode.RANDOMIZED
            state.rr_failures = 0
            state.rr_phase_started = now
            state.rr_phase_improved = False
            logger.info("t={}: switching to randomized destroy at {:.2f}s", state.t, now)
        return state.rr_mode

    if improved:
        state.rr_phase_improved = True
    if state.rr_phase_improved and now - state.rr_phase_started >= config.gamma:
        state.rr_mode = RrMode.RELAX
        state.rr_failures = 0
        logger.info("t={}: switching back to LB relaxation at {:.2f}s", state.t, now)
    return state.rr_mode


def select_neighborhood(
    inst: IlpInstance, state: LnsState, config: LnsConfig, lb_budget: SolveBudget | None = None
) -> Neighborhood:
    """Dispatch to the destroy heuristic named by ``config.heuristic``."""
    heuristic = config.heuristic
    if heuristic is Heuristic.RANDOM:
        return destroy_random(state, state.k)
    if heuristic is Heuristic.GRAPH:
        return destroy_graph(inst, state, state.k)
    if heuristic is Heuristic.LB:
        return destroy_lb(inst, state, state.k, lb_budget or config.lb_repair_budget)
    if heuristic is Heuristic.LBRELAX:
        return destroy_lb_relax(inst, state, state.k)
    if heuristic is Heuristic.LBRELAX_S:
        return destroy_lb_relax_s(inst, state, state.k)
    if heuristic is Heuristic.LBRELAX_RR:
        return step_lb_relax_rr(inst, state, config)
    raise ValueError(f"{heuristic.value} is not a destroy heuristic")


def _remaining(budget: SolveBudget, horizon: float | None, elapsed: float) -> SolveBudget:
    if horizon is None:
        return budget
    return budget.capped(horizon - elapsed)


def run_lns(
    inst: IlpInstance,
    config: LnsConfig,
    initial: Assignment | None = None,
    *,
    initial_time: float = 0.0,
    clock: Clock = time.perf_counter,
) -> tuple[Assignment, RunTrace]:
    """Improve a feasible solution of ``inst`` by destroy and repair.

    Each iteration selects a neighborhood with the configured heuristic, fixes
    every other variable at the incumbent, re-optimizes the sub-instance with
    branch-and-bound warm-started from the incumbent, and accepts the result
    only if it lowers the objective by more than 1e-9. The neighborhood size
    then adapts through :func:`update_neighborhood_size`.

    Parameters
    ----------
    inst : IlpInstance
        Instance to improve.
    config : LnsConfig
        Heuristic, sizes, budgets and seed. ``Heuristic.BNB`` runs
        :func:`run_bnb_baseline` instead.
    initial : Assignment or None
        Feasible starting solution; searched with ``config.initial_budget`` when ``None``.
    initial_time : float
        Seconds already spent finding ``initial``; trace times are offset by it.
    clock : callable
        Monotonic clock in seconds.

    Returns
    -------
    tuple of (Assignment, RunTrace)
        Final incumbent and the trace of every iteration.

    Raises
    ------
    NoSolutionError
        If no initial solution is found.
    InfeasibleIncumbentError
        If ``initial`` violates ``inst``.
    """
    if config.heuristic is Heuristic.BNB:
        return run_bnb_baseline(inst, config, clock=clock)

    started = clock() - initial_time

    def elapsed() -> float:
        return clock() - started

    if initial is None:
        budget = config.initial_budget
        if config.time_limit is not None:
            budget = budget.capped(config.time_limit)
        initial = find_initial_solution(inst, budget)
    else:
        report = is_feasible(inst, initial)
        if not report:
            raise InfeasibleIncumbentError(
                f"initial solution violates row {report.row} of {inst.name!r}",
                row=report.row,
                violation=report.violation,
            )

    state = LnsState.start(inst, config, initial)
    trace = RunTrace(
        instance=inst.name,
        heuristic=config.heuristic.value,
        config=config.snapshot(),
        maximization=inst.maximization,
    )
    trace.record(TraceEvent(elapsed(), 0, initial.objective, config.heuristic.value, state.k, True, "initial"))
    logger.info(
        "{} on {!r} (n={}, m={}): initial objective {:g}, k={}",
        config.heuristic.value,
        inst.name,
        inst.n,
        inst.m,
        inst.original_objective(initial.objective),
        state.k,
    )

    while True:
        if config.iteration_limit is not None and state.t >= config.iteration_limit:
            break
        if config.time_limit is not None and elapsed() >= config.time_limit:
            break
        state.t += 1
        k_used = state.k

        select_started = clock()
        lb_budget = _remaining(config.lb_repair_budget, config.time_limit, elapsed())
        neighborhood = select_neighborhood(inst, state, config, lb_budget)
        select_time = clock() - select_started

        repair_started = clock()
        note = neighborhood.note
        if neighborhood.proposal is not None:
            candidate = neighborhood.proposal
            note = ",".join(filter(None, (note, "lb-adopted")))
        else:
            sub = fix_and_project(inst, state.incumbent, neighborhood)
            budget = _remaining(config.repair_budget, config.time_limit, elapsed())
            result = branch_and_bound(sub.instance, budget, warm_start=sub.restrict(state.incumbent))
            candidate = state.incumbent if result.best is None else sub.lift(result.best)
        repair_time = clock() - repair_started

        improved = candidate.objective < state.incumbent.objective - OBJECTIVE_TOL
        if improved and not is_feasible(inst, candidate):
            logger.warning("t={}: discarding repaired solution that violates {!r}", state.t, inst.name)
            improved = False
        if improved:
            state.incumbent = candidate

        now = elapsed()
        trace.record(
            TraceEvent(
                wall_time=now,
                iteration=state.t,
                objective=state.incumbent.objective,
                heuristic=config.heuristic.value,
                k=k_used,
                improved=improved,
                note=note,
                select_time=select_time,
                repair_time=repair_time,
            )
        )
        logger.debug(
            "t={} {} k={} |X|={} objective={:g} improved={}",
            state.t,
            config.heuristic.value,
            k_used,
            len(neighborhood),
            inst.original_objective(state.incumbent.objective),
            improved,
        )

        state.k = update_neighborhood_size(state, improved, config)
        if config.heuristic is Heuristic.LBRELAX_RR:
            update_rr_mode(state, improved, config, now)

    logger.info(
        "{} on {!r}: final objective {:g} after {} iterations, {:.2f}s",
        config.heuristic.value,
        inst.name,
        inst.original_objective(state.incumbent.objective),
        state.t,
        elapsed(),
    )
    return state.incumbent, trace


def run_bnb_baseline(
    inst: IlpInstance, config: LnsConfig, *, clock: Clock = time.perf_counter
) -> tuple[Assignment, RunTrace]:
    """Solve the whole instance with branch-and-bound over the run horizon.

    Every incumbent the search finds becomes an improving trace event tagged
    ``BNB``.

    Raises
    ------
    NoSolutionError
        If the search ends without a feasible solution.
    """
    budget = SolveBudget.exhaustive() if config.time_limit is None else SolveBudget(time_limit=config.time_limit)
    trace = RunTrace(
        instance=inst.name,
        heuristic=Heuristic.BNB.value,
        config=config.snapshot(),
        maximization=inst.maximization,
    )

    def on_incumbent(seconds: float, assignment: Assignment) -> None:
        iteration = len(trace.events)
        note = "initial" if iteration == 0 else "bnb-incumbent"
        trace.record(TraceEvent(seconds, iteration, assignment.objective, Heuristic.BNB.value, inst.n, True, note))

    logger.info("BNB on {!r} (n={}, m={})", inst.name, inst.n, inst.m)
    result = branch_and_bound(inst, budget, on_incumbent=on_incumbent, clock=clock)
    if result.best is None:
        raise NoSolutionError(f"branch-and-bound found no solution for {inst.name!r} ({result.status.value})", result)
    trace.record(
        TraceEvent(
            result.wall_time,
            len(trace.events),
            result.best.objective,
            Heuristic.BNB.value,
            inst.n,
            False,
            result.status.value,
        )
    )
    logger.info(
        "BNB on {!r}: {} objective {:g} after {} nodes",
        inst.name,
        result.status.value,
        inst.original_objective(result.best.objective),
        result.nodes_explored,
    )
    return result.best, trace
