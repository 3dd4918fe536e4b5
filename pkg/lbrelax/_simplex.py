"""Two-phase bounded-variable simplex over a dense tableau.

Solves the LP relaxation ``min c^T x`` subject to the instance rows and
``0 <= x <= 1``. GE rows are negated into LE form, every LE row gets a slack
and rows that are violated at the starting point (or are equalities) get an
artificial variable for phase 1.
"""

from __future__ import annotations

from enum import Enum
from typing import Any

import attrs
import numpy as np
from loguru import logger

from ._model import FractionalAssignment, IlpInstance, Sense

PIVOT_TOL = 1e-9
FEASIBILITY_TOL = 1e-7
REDUCED_COST_TOL = 1e-9
CERTIFICATE_TOL = 1e-7


class LpStatus(Enum):
    """Termination status of :func:`solve_lp`."""

    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    ITERATION_LIMIT = "iteration_limit"


def _readonly_float(value: Any) -> np.ndarray:
    array = np.array(value, dtype=np.float64)
    array.setflags(write=False)
    return array


_array_eq = attrs.cmp_using(eq=np.array_equal)


@attrs.frozen
class LpSolution:
    """Result of an LP relaxation solve.

    Parameters
    ----------
    status : LpStatus
        Why the solve stopped.
    values : FractionalAssignment
        Final point, clamped to ``[0, 1]``. Feasible unless ``status`` is
        ``INFEASIBLE`` or ``phase_one_unresolved`` is set.
    objective : float
        ``c^T values``.
    duals : numpy.ndarray
        One multiplier per original row (LE rows <= 0, GE rows >= 0).
    reduced_costs : numpy.ndarray
        ``c - A^T duals`` for the structural variables.
    iterations : int
        Simplex iterations spent over both phases.
    phase_one_unresolved : bool
        The iteration limit was reached before feasibility was decided.
    """

    status: LpStatus
    values: FractionalAssignment
    objective: float
    duals: np.ndarray = attrs.field(converter=_readonly_float, eq=_array_eq, repr=False)
    reduced_costs: np.ndarray = attrs.field(converter=_readonly_float, eq=_array_eq, repr=False)
    iterations: int = 0
    phase_one_unresolved: bool = False

    @property
    def is_optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def default_iteration_limit(inst: IlpInstance) -> int:
    """Default simplex iteration budget, ``50 * (n + m)``."""
    return max(1, 50 * (inst.n + inst.m))


class _Tableau:
    """Working storage of one solve. Never shared between solves."""

    def __init__(self, inst: IlpInstance, start: np.ndarray):
        n, m = inst.n, inst.m
        self.n, self.m = n, m

        self.row_sign = np.array([-1.0 if s is Sense.GE else 1.0 for s in inst.senses])
        is_eq = np.array([s is Sense.EQ for s in inst.senses], dtype=bool)
        matrix = inst.dense_matrix() * self.row_sign[:, None]
        b = inst.rhs * self.row_sign
        residual = b - matrix @ start

        has_slack = ~is_eq
        needs_artificial = is_eq | (residual < 0)
        n_slack = int(np.count_nonzero(has_slack))
        n_art = int(np.count_nonzero(needs_artificial))
        self.n_cols = n + n_slack + n_art
        self.art_start = n + n_slack

        tau = np.where(residual < 0, -1.0, 1.0)
        tableau = np.zeros((m, self.n_cols))
        tableau[:, :n] = matrix
        slack_col = np.full(m, -1, dtype=np.int64)
        slack_col[has_slack] = n + np.arange(n_slack)
        art_col = np.full(m, -1, dtype=np.int64)
        art_col[needs_artificial] = self.art_start + np.arange(n_art)
        slack_rows = np.flatnonzero(has_slack)
        tableau[slack_rows, slack_col[slack_rows]] = 1.0
        art_rows = np.flatnonzero(needs_artificial)
        tableau[art_rows, art_col[art_rows]] = tau[art_rows]

        # Initial basis is diag(+-1): slack for satisfied rows, artificial elsewhere.
        self.unit_col = np.where(needs_artificial, art_col, slack_col)
        self.unit_sign = np.where(needs_artificial, tau, 1.0)
        tableau *= self.unit_sign[:, None]
        self.tableau = tableau
        self.basis = self.unit_col.copy()
        self.xb = residual * self.unit_sign

        self.upper = np.full(self.n_cols, np.inf)
        self.upper[:n] = 1.0
        self.is_basic = np.zeros(self.n_cols, dtype=bool)
        self.is_basic[self.basis] = True
        self.at_upper = np.zeros(self.n_cols, dtype=bool)
        self.at_upper[:n] = start > 0.5
        self.d = np.zeros(self.n_cols)
        self.iterations = 0

    @property
    def has_artificials(self) -> bool:
        return self.art_start < self.n_cols

    def price(self, cost: np.ndarray) -> None:
        self.d = cost - cost[self.basis] @ self.tableau if self.m else cost.copy()

    def nonbasic_value(self, j: int) -> float:
        return float(self.upper[j]) if self.at_upper[j] else 0.0

    def pivot(self, r: int, j: int) -> None:
        tableau = self.tableau
        factor = tableau[:, j].copy()
        tableau[r] /= factor[r]
        factor[r] = 0.0
        tableau -= np.outer(factor, tableau[r])
        tableau[:, j] = 0.0
        tableau[r, j] = 1.0
        self.d -= self.d[j] * tableau[r]
        self.d[j] = 0.0

        leaving = self.basis[r]
        self.basis[r] = j
        self.is_basic[j] = True
        self.is_basic[leaving] = False
        self.at_upper[j] = False

    def iterate(self, cost: np.ndarray, limit: int) -> bool:
        """Run simplex iterations on ``cost``; return ``True`` on optimality, ``False`` on iteration limit."""
        self.price(cost)
        degenerate_run = 0
        bland_after = 5 * (self.n + self.m)
        movable = self.upper > 0
        while True:
            d = self.d
            eligible = movable & ~self.is_basic & np.where(self.at_upper, d > REDUCED_COST_TOL, d < -REDUCED_COST_TOL)
            candidates = np.flatnonzero(eligible)
            if candidates.size == 0:
                return True
            if self.iterations >= limit:
                return False
            self.iterations += 1

            bland = degenerate_run >= bland_after
            j = int(candidates[0]) if bland else int(candidates[np.argmax(np.abs(d[candidates]))])
            direction = -1.0 if self.at_upper[j] else 1.0
            alpha = direction * self.tableau[:, j]

            theta = float(self.upper[j])
            row = -1
            if self.m:
                basic_upper = self.upper[self.basis]
                ratios = np.full(self.m, np.inf)
                dec = alpha > PIVOT_TOL
                ratios[dec] = np.maximum(self.xb[dec], 0.0) / alpha[dec]
                inc = (alpha < -PIVOT_TOL) & np.isfinite(basic_upper)
                ratios[inc] = np.maximum(basic_upper[inc] - self.xb[inc], 0.0) / -alpha[inc]
                best = float(ratios.min())
                if best < theta:
                    ties = np.flatnonzero(ratios <= best + 1e-12)
                    if bland:
                        row = int(ties[np.argmin(self.basis[ties])])
                    else:
                        row = int(ties[np.argmax(np.abs(alpha[ties]))])
                    theta = best
            if not np.isfinite(theta):
                raise AssertionError("unbounded ray in a box-constrained LP")

            degenerate_run = degenerate_run + 1 if theta <= PIVOT_TOL else 0
            if self.m:
                self.xb -= theta * alpha
            if row < 0:
                self.at_upper[j] = not self.at_upper[j]
                continue

            entering_value = self.nonbasic_value(j) + direction * theta
            leaving = self.basis[row]
            leaves_at_upper = alpha[row] < 0
            self.pivot(row, j)
            self.at_upper[leaving] = leaves_at_upper
            self.xb[row] = entering_value

    def drive_out_artificials(self) -> None:
        """Pivot zero-valued artificials out of the basis where a structural or slack can replace them."""
        for r in range(self.m):
            if self.basis[r] < self.art_start:
                continue
            row = self.tableau[r, : self.art_start]
            candidates = np.flatnonzero((np.abs(row) > PIVOT_TOL) & ~self.is_basic[: self.art_start])
            if candidates.size == 0:
                continue  # redundant row; the artificial stays basic, fixed at zero
            j = int(candidates[np.argmax(np.abs(row[candidates]))])
            value = self.nonbasic_value(j)
            self.pivot(r, j)
            self.xb[r] = value
        self.upper[self.art_start :] = 0.0

    def artificial_sum(self) -> float:
        mask = self.basis >= self.art_start
        return float(np.maximum(self.xb[mask], 0.0).sum())

    def point(self) -> np.ndarray:
        x = np.where(self.at_upper, self.upper, 0.0)
        x[self.is_basic] = 0.0
        if self.m:
            x[self.basis] = self.xb
        return np.clip(x[: self.n], 0.0, 1.0)

    def duals(self) -> np.ndarray:
        if not self.m:
            return np.zeros(0)
        pi = -self.unit_sign * self.d[self.unit_col]
        return self.row_sign * pi


def solve_lp(inst: IlpInstance, iteration_limit: int | None = None, start: Any = None) -> LpSolution:
    """Solve the LP relaxation of ``inst`` over ``[0, 1]^n``.

    Parameters
    ----------
    inst : IlpInstance
        Instance whose rows define the polytope.
    iteration_limit : int or None
        Simplex iterations allowed over both phases. Defaults to ``50 * (n + m)``.
    start : array_like or None
        Optional 0/1 vector placing the nonbasic structurals at a bound.
        Rows satisfied there start with a basic slack, so a feasible ``start``
        skips phase 1 entirely.

    Returns
    -------
    LpSolution
        ``OPTIMAL`` with reduced costs sign-consistent with every nonbasic
        bound, ``INFEASIBLE`` when phase 1 ends with artificial sum above
        ``1e-7``, or ``ITERATION_LIMIT``.
    """
    if iteration_limit is None:
        iteration_limit = default_iteration_limit(inst)
    if iteration_limit < 1:
        raise ValueError("iteration_limit must be positive")
    start = np.zeros(inst.n) if start is None else np.rint(np.asarray(start, dtype=np.float64))
    if start.shape != (inst.n,):
        raise ValueError(f"start has length {start.shape[0]}, instance has {inst.n} variables")

    tab = _Tableau(inst, start)
    if tab.has_artificials:
        phase_one_cost = np.zeros(tab.n_cols)
        phase_one_cost[tab.art_start :] = 1.0
        finished = tab.iterate(phase_one_cost, iteration_limit)
        if not finished:
            logger.debug("LP {!r}: iteration limit in phase 1 after {} iterations", inst.name, tab.iterations)
            return _solution(inst, tab, LpStatus.ITERATION_LIMIT, unresolved=True)
        if tab.artificial_sum() > FEASIBILITY_TOL:
            logger.debug("LP {!r}: infeasible, artificial sum {:g}", inst.name, tab.artificial_sum())
            return _solution(inst, tab, LpStatus.INFEASIBLE)
        tab.drive_out_artificials()

    cost = np.zeros(tab.n_cols)
    cost[: inst.n] = inst.objective
    finished = tab.iterate(cost, iteration_limit)
    if not finished:
        logger.debug("LP {!r}: iteration limit in phase 2 after {} iterations", inst.name, tab.iterations)
        return _solution(inst, tab, LpStatus.ITERATION_LIMIT)
    return _solution(inst, tab, LpStatus.OPTIMAL)


def _solution(inst: IlpInstance, tab: _Tableau, status: LpStatus, unresolved: bool = False) -> LpSolution:
    values = FractionalAssignment.from_values(inst, tab.point())
    phase_two = status is not LpStatus.INFEASIBLE and not unresolved
    duals = tab.duals() if phase_two else np.zeros(inst.m)
    reduced = tab.d[: inst.n] if phase_two else np.zeros(inst.n)
    return LpSolution(
        status=status,
        values=values,
        objective=values.objective,
        duals=duals,
        reduced_costs=reduced,
        iterations=tab.iterations,
        phase_one_unresolved=unresolved,
    )


def check_optimality_certificate(inst: IlpInstance, solution: LpSolution, tol: float = CERTIFICATE_TOL) -> bool:
    """Verify an ``OPTIMAL`` LP solution from first principles.

    Checks primal feasibility, dual sign feasibility per row sense,
    complementary slackness, reduced-cost signs against each variable's
    position (at 0, at 1 or strictly inside) and that the cached objective
    matches the values.

    Returns
    -------
    bool
        ``True`` iff every condition holds within ``tol``.
    """
    if solution.status is not LpStatus.OPTIMAL:
        return False
    x = solution.values.values
    if x.shape != (inst.n,) or solution.duals.shape != (inst.m,):
        return False
    objective = float(inst.objective @ x)
    if abs(objective - solution.objective) > 1e-9 * max(1.0, abs(objective)):
        return False
    if np.any(inst.violations(x) > tol):
        return False

    y = solution.duals
    activity = inst.activities(x)
    for r, sense in enumerate(inst.senses):
        if sense is Sense.LE and y[r] > tol:
            return False
        if sense is Sense.GE and y[r] < -tol:
            return False
        if abs(activity[r] - inst.rhs[r]) > tol and abs(y[r]) > tol:
            return False

    row_ids, cols, coefs = inst.coordinates()
    reduced = inst.objective - np.bincount(cols, weights=coefs * y[row_ids], minlength=inst.n)
    scale = max(1.0, float(np.abs(inst.objective).max(initial=0.0)))
    rc_tol = tol * scale
    at_lower = x <= tol
    at_upper = x >= 1 - tol
    inside = ~at_lower & ~at_upper
    return bool(
        np.all(reduced[at_lower] >= -rc_tol)
        and np.all(reduced[at_upper] <= rc_tol)
        and np.all(np.abs(reduced[inside]) <= rc_tol)
    )
