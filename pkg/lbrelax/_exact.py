"""Exact binary ILP solving: LP-based branch-and-bound and an exhaustive enumerator."""

from __future__ import annotations

import heapq
import itertools
import math
import time
from collections.abc import Callable
from enum import Enum

import attrs
import numpy as np
from loguru import logger

from ._exceptions import InfeasibleFixingError, NoSolutionError
from ._model import FEASIBILITY_TOL, OBJECTIVE_TOL, Assignment, IlpInstance, Sense, is_feasible, project
from ._simplex import LpStatus, solve_lp

BRUTE_FORCE_MAX_VARS = 24
INTEGRALITY_TOL = 1e-6
TIME_CHECK_INTERVAL = 64

Clock = Callable[[], float]
IncumbentCallback = Callable[[float, Assignment], None]


class BnbStatus(Enum):
    """Termination status of an exact solve."""

    OPTIMAL = "optimal"
    FEASIBLE_TIMEOUT = "feasible_timeout"
    INFEASIBLE_PROVEN = "infeasible_proven"
    NO_SOLUTION_TIMEOUT = "no_solution_timeout"


def _positive_or_none(instance, attribute, value):
    if value is not None and not value > 0:
        raise ValueError(f"'{attribute.name}' must be positive or None, got {value!r}")


@attrs.frozen
class SolveBudget:
    """Limits of one exact solve.

    Parameters
    ----------
    time_limit : float or None, default=None
        Wall-clock seconds; ``None`` means unlimited.
    node_limit : int or None, default=None
        Branch-and-bound nodes; ``None`` means unlimited.
    gap_limit : float, default=1e-6
        Relative optimality gap at which the search stops.

    At least one of ``time_limit`` and ``node_limit`` must be set. Node limits
    make a solve deterministic; time limits do not.

    Examples
    --------
    Repair budget of the desk-scale protocol

    >>> budget = SolveBudget.repair()

    Node-limited budget for reproducible runs

    >>> budget = SolveBudget(node_limit=2_000)
    """

    time_limit: float | None = attrs.field(
        default=None,
        validator=attrs.validators.and_(
            attrs.validators.optional(attrs.validators.instance_of((int, float))), _positive_or_none
        ),
    )
    node_limit: int | None = attrs.field(
        default=None,
        validator=attrs.validators.and_(attrs.validators.optional(attrs.validators.instance_of(int)), _positive_or_none),
    )
    gap_limit: float = attrs.field(
        default=1e-6,
        validator=attrs.validators.and_(attrs.validators.instance_of((int, float)), attrs.validators.gt(0)),
    )

    def __attrs_post_init__(self):
        if self.time_limit is None and self.node_limit is None:
            raise ValueError("SolveBudget needs a time_limit or a node_limit")

    def capped(self, seconds: float) -> SolveBudget:
        """Return a copy whose time limit does not exceed ``seconds``."""
        seconds = max(float(seconds), 1e-3)
        limit = seconds if self.time_limit is None else min(self.time_limit, seconds)
        return attrs.evolve(self, time_limit=limit)

    @classmethod
    def repair(cls) -> SolveBudget:
        """Desk-scale repair budget: 5 seconds or 50,000 nodes."""
        return cls(time_limit=5.0, node_limit=50_000)

    @classmethod
    def local_branching(cls) -> SolveBudget:
        """Desk-scale budget for the Local Branching ILP, five times the repair budget."""
        return cls(time_limit=25.0, node_limit=250_000)

    @classmethod
    def initial(cls) -> SolveBudget:
        """Budget for the initial-solution search."""
        return cls(time_limit=2.0)

    @classmethod
    def exhaustive(cls) -> SolveBudget:
        """No node limit; a generous time limit only guards against runaway solves."""
        return cls(time_limit=3600.0)


@attrs.frozen
class BnbResult:
    """Outcome of :func:`branch_and_bound` or :func:`brute_force`.

    Parameters
    ----------
    best : Assignment or None
        Best solution found.
    bound : float
        Best proven lower bound on the internal objective.
    status : BnbStatus
        Why the search stopped.
    nodes_explored : int
        Nodes whose LP was solved (assignments enumerated for brute force).
    wall_time : float
        Seconds spent.
    """

    best: Assignment | None
    bound: float
    status: BnbStatus
    nodes_explored: int = 0
    wall_time: float = 0.0

    @property
    def objective(self) -> float | None:
        return None if self.best is None else self.best.objective


@attrs.define
class _Node:
    bound: float
    fixed: np.ndarray  # -1 free, 0/1 fixed


def _gap_tolerance(budget: SolveBudget, incumbent: Assignment) -> float:
    return max(OBJECTIVE_TOL, budget.gap_limit * max(1.0, abs(incumbent.objective)))


def branch_and_bound(
    inst: IlpInstance,
    budget: SolveBudget,
    warm_start: Assignment | None = None,
    *,
    first_solution: bool = False,
    on_incumbent: IncumbentCallback | None = None,
    clock: Clock = time.perf_counter,
) -> BnbResult:
    """Solve ``inst`` by LP-based branch-and-bound.

    Nodes are explored depth first until the first incumbent exists, then best
    bound first. Every node LP point is rounded and kept if feasible. Branching
    picks the most fractional variable, ties going to the lowest index.

    Parameters
    ----------
    inst : IlpInstance
        Instance to solve.
    budget : SolveBudget
        Time, node and gap limits. The time limit is checked every 64 nodes.
    warm_start : Assignment or None
        Feasible starting incumbent; the result is never worse.
    first_solution : bool
        Stop as soon as the first incumbent is found.
    on_incumbent : callable or None
        Called as ``on_incumbent(elapsed_seconds, assignment)`` for every new
        incumbent found by the search.
    clock : callable
        Monotonic clock in seconds.

    Returns
    -------
    BnbResult
        ``OPTIMAL`` when no limit bound, otherwise ``FEASIBLE_TIMEOUT`` or
        ``NO_SOLUTION_TIMEOUT``; ``INFEASIBLE_PROVEN`` when the tree is
        exhausted without a solution.
    """
    started = clock()
    if warm_start is not None and not is_feasible(inst, warm_start):
        raise ValueError(f"warm start is infeasible for {inst.name!r}")
    incumbent = warm_start
    counter = itertools.count()
    plunge: list[_Node] = [_Node(-math.inf, np.full(inst.n, -1, dtype=np.int8))]
    heap: list[tuple[float, int, _Node]] = []
    nodes = 0
    ticks = 0
    stopped = False

    def open_bound(current: float) -> float:
        bounds = [current]
        if heap:
            bounds.append(heap[0][0])
        bounds.extend(node.bound for node in plunge)
        return min(bounds)

    def accept(candidate: Assignment) -> bool:
        nonlocal incumbent
        if incumbent is not None and candidate.objective >= incumbent.objective - OBJECTIVE_TOL:
            return False
        incumbent = candidate
        if on_incumbent is not None:
            on_incumbent(clock() - started, candidate)
        return True

    current_bound = math.inf
    while plunge or heap:
        if ticks % TIME_CHECK_INTERVAL == 0 and budget.time_limit is not None:
            if clock() - started >= budget.time_limit:
                stopped = True
                break
        ticks += 1
        if budget.node_limit is not None and nodes >= budget.node_limit:
            stopped = True
            break

        if incumbent is None and plunge:
            node = plunge.pop()
        else:
            while plunge:
                pending = plunge.pop()
                heapq.heappush(heap, (pending.bound, next(counter), pending))
            node = heapq.heappop(heap)[-1]
        current_bound = node.bound
        if incumbent is not None and node.bound >= incumbent.objective - _gap_tolerance(budget, incumbent):
            continue
        nodes += 1

        free = np.flatnonzero(node.fixed < 0)
        base = np.maximum(node.fixed, 0)
        try:
            sub = project(inst, free, base)
        except InfeasibleFixingError:
            continue
        lp_start = None if incumbent is None else incumbent.values[free]
        lp = solve_lp(sub.instance, start=lp_start)
        if lp.status is LpStatus.INFEASIBLE:
            continue
        if lp.status is LpStatus.OPTIMAL:
            bound = lp.objective + sub.offset
        else:
            bound = node.bound
        current_bound = bound
        if incumbent is not None and bound >= incumbent.objective - _gap_tolerance(budget, incumbent):
            continue

        point = None if lp.phase_one_unresolved else lp.values.values
        if point is not None:
            rounded = (point >= 0.5).astype(np.int8)
            integral = lp.status is LpStatus.OPTIMAL and bool(np.all(np.abs(point - rounded) <= INTEGRALITY_TOL))
            if is_feasible(sub.instance, rounded):
                accept(sub.lift(rounded))
                if first_solution and incumbent is not None:
                    stopped = bool(plunge or heap) or not integral
                    break
            if integral:
                continue
            branch_local = int(np.argmin(np.abs(point - 0.5)))
            preferred = 1 if point[branch_local] >= 0.5 else 0
        else:
            branch_local, preferred = 0, 0
        if free.size == 0:
            continue
        branch = int(free[branch_local])

        children = []
        for value in (1 - preferred, preferred):
            fixed = node.fixed.copy()
            fixed[branch] = value
            children.append(_Node(bound, fixed))
        if incumbent is None:
            plunge.extend(children)  # preferred child is popped first
        else:
            for child in children:
                heapq.heappush(heap, (child.bound, next(counter), child))

        if incumbent is not None and incumbent.objective - open_bound(bound) <= _gap_tolerance(budget, incumbent):
            heap.clear()
            plunge.clear()

    elapsed = clock() - started
    if stopped:
        bound = open_bound(current_bound)
        status = BnbStatus.FEASIBLE_TIMEOUT if incumbent is not None else BnbStatus.NO_SOLUTION_TIMEOUT
        if incumbent is not None:
            bound = min(bound, incumbent.objective)
    elif incumbent is not None:
        bound, status = incumbent.objective, BnbStatus.OPTIMAL
    else:
        bound, status = math.inf, BnbStatus.INFEASIBLE_PROVEN
    logger.debug(
        "bnb {!r}: {} after {} nodes in {:.3f}s, objective {}, bound {}",
        inst.name,
        status.value,
        nodes,
        elapsed,
        None if incumbent is None else incumbent.objective,
        bound,
    )
    return BnbResult(best=incumbent, bound=bound, status=status, nodes_explored=nodes, wall_time=elapsed)


def _feasible_mask(inst: IlpInstance, activities: np.ndarray) -> np.ndarray:
    mask = np.ones(activities.shape[0], dtype=bool)
    for r, sense in enumerate(inst.senses):
        lhs = activities[:, r]
        b = inst.rhs[r]
        if sense is Sense.LE:
            mask &= lhs <= b + FEASIBILITY_TOL
        elif sense is Sense.GE:
            mask &= lhs >= b - FEASIBILITY_TOL
        else:
            mask &= np.abs(lhs - b) <= FEASIBILITY_TOL
    return mask


def brute_force(inst: IlpInstance, chunk_bits: int = 16) -> BnbResult:
    """Enumerate all ``2^n`` assignments and return the exact optimum.

    Ties keep the assignment whose bit pattern (variable ``i`` as bit ``i``)
    is smallest.

    Raises
    ------
    ValueError
        If ``n`` exceeds 24.
    """
    if inst.n > BRUTE_FORCE_MAX_VARS:
        raise ValueError(f"brute force is limited to {BRUTE_FORCE_MAX_VARS} variables, instance has {inst.n}")
    started = time.perf_counter()
    matrix = inst.dense_matrix()
    shifts = np.arange(inst.n, dtype=np.int64)
    total = 1 << inst.n
    chunk = 1 << chunk_bits
    best_code, best_objective = -1, math.inf
    for low in range(0, total, chunk):
        codes = np.arange(low, min(low + chunk, total), dtype=np.int64)
        points = ((codes[:, None] >> shifts) & 1).astype(np.float64)
        feasible = _feasible_mask(inst, points @ matrix.T)
        if not feasible.any():
            continue
        objectives = np.where(feasible, points @ inst.objective, np.inf)
        i = int(np.argmin(objectives))
        if objectives[i] < best_objective - OBJECTIVE_TOL:
            best_code, best_objective = int(codes[i]), float(objectives[i])
    elapsed = time.perf_counter() - started
    if best_code < 0:
        return BnbResult(None, math.inf, BnbStatus.INFEASIBLE_PROVEN, total, elapsed)
    values = (best_code >> shifts) & 1
    best = Assignment.from_values(inst, values)
    return BnbResult(best, best.objective, BnbStatus.OPTIMAL, total, elapsed)


def find_initial_solution(inst: IlpInstance, budget: SolveBudget | None = None) -> Assignment:
    """Return the first incumbent branch-and-bound finds within ``budget``.

    Raises
    ------
    NoSolutionError
        If no feasible solution was found (or the instance is infeasible).
    """
    budget = SolveBudget.initial() if budget is None else budget
    result = branch_and_bound(inst, budget, first_solution=True)
    if result.best is None:
        raise NoSolutionError(f"no initial solution for {inst.name!r} ({result.status.value})", result)
    logger.info(
        "initial solution for {!r}: objective {:g} after {} nodes",
        inst.name,
        result.best.objective,
        result.nodes_explored,
    )
    return result.best
