"""Binary ILP data model, solution evaluation, Local Branching rows and variable fixing."""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from enum import Enum
from typing import Any

import attrs
import numpy as np

from ._exceptions import InfeasibleFixingError, InfeasibleIncumbentError, InvalidInstanceError

FEASIBILITY_TOL = 1e-6
OBJECTIVE_TOL = 1e-9

Row = tuple[tuple[int, float], ...]


class Sense(Enum):
    """Constraint row senses."""

    LE = "LE"
    GE = "GE"
    EQ = "EQ"


_SENSE_ALIASES = {
    "<=": Sense.LE,
    "L": Sense.LE,
    ">=": Sense.GE,
    "G": Sense.GE,
    "=": Sense.EQ,
    "==": Sense.EQ,
    "E": Sense.EQ,
}


def _convert_sense(value: Sense | str) -> Sense:
    """Convert and validate a row sense.

    Parameters
    ----------
    value : Sense or str
        Enum member, its name (case-insensitive) or one of ``<=``, ``>=``, ``=``, ``L``, ``G``, ``E``.

    Returns
    -------
    Sense
        The validated sense.

    Raises
    ------
    TypeError
        If value is neither a Sense nor a string.
    ValueError
        If the string does not name a sense.
    """
    if isinstance(value, Sense):
        return value
    if isinstance(value, str):
        key = value.strip().upper()
        if key in _SENSE_ALIASES:
            return _SENSE_ALIASES[key]
        try:
            return Sense(key)
        except ValueError:
            valid = [s.value for s in Sense]
            raise ValueError(f"Invalid sense '{value}'. Valid options: {valid}") from None
    raise TypeError("sense must be a Sense enum or string")


def _readonly(dtype: Any):
    def convert(value: Any) -> np.ndarray:
        array = np.array(value, dtype=dtype)
        array.setflags(write=False)
        return array

    return convert


def _convert_rows(rows: Iterable[Iterable[tuple[int, float]]]) -> tuple[Row, ...]:
    return tuple(tuple((int(index), float(coef)) for index, coef in row) for row in rows)


def _convert_senses(senses: Iterable[Sense | str]) -> tuple[Sense, ...]:
    return tuple(_convert_sense(sense) for sense in senses)


_array_eq = attrs.cmp_using(eq=np.array_equal)


@attrs.frozen
class IlpInstance:
    """Minimization-normalized binary integer linear program.

    Parameters
    ----------
    objective : array_like of float
        Internal (minimization) objective vector ``c`` of length ``n``.
    rows : sequence of sequences of (int, float)
        Sparse constraint rows as ``(variable index, coefficient)`` pairs.
    senses : sequence of Sense or str
        One sense per row.
    rhs : array_like of float
        Right-hand sides, one per row.
    name : str
        Free-form identifier.
    maximization : bool
        Whether the source problem maximized. The objective is already negated;
        :meth:`original_objective` undoes the negation for reporting.
    """

    objective: np.ndarray = attrs.field(converter=_readonly(np.float64), eq=_array_eq)
    rows: tuple[Row, ...] = attrs.field(converter=_convert_rows)
    senses: tuple[Sense, ...] = attrs.field(converter=_convert_senses)
    rhs: np.ndarray = attrs.field(converter=_readonly(np.float64), eq=_array_eq)
    name: str = attrs.field(default="", converter=str)
    maximization: bool = attrs.field(default=False, converter=bool)

    # Flattened coordinate form of ``rows``; derived, never compared.
    _row_ids: np.ndarray = attrs.field(init=False, eq=False, repr=False)
    _cols: np.ndarray = attrs.field(init=False, eq=False, repr=False)
    _coefs: np.ndarray = attrs.field(init=False, eq=False, repr=False)

    def __attrs_post_init__(self):
        if self.objective.ndim != 1:
            raise InvalidInstanceError("objective must be a one-dimensional vector")
        if self.rhs.ndim != 1:
            raise InvalidInstanceError("rhs must be a one-dimensional vector")
        n = self.objective.shape[0]
        if not (len(self.rows) == len(self.senses) == self.rhs.shape[0]):
            raise InvalidInstanceError(
                f"rows ({len(self.rows)}), senses ({len(self.senses)}) and rhs ({self.rhs.shape[0]}) differ in length"
            )
        if not np.all(np.isfinite(self.objective)):
            raise InvalidInstanceError("objective has non-finite coefficients")
        if not np.all(np.isfinite(self.rhs)):
            raise InvalidInstanceError("rhs has non-finite entries")

        row_ids, cols, coefs = [], [], []
        for r, row in enumerate(self.rows):
            seen = set()
            for index, coef in row:
                if not 0 <= index < n:
                    raise InvalidInstanceError(f"row {r} references variable {index} outside [0, {n})")
                if index in seen:
                    raise InvalidInstanceError(f"row {r} lists variable {index} more than once")
                if not math.isfinite(coef):
                    raise InvalidInstanceError(f"row {r} has a non-finite coefficient for variable {index}")
                seen.add(index)
                row_ids.append(r)
                cols.append(index)
                coefs.append(coef)
        object.__setattr__(self, "_row_ids", _readonly(np.int64)(row_ids))
        object.__setattr__(self, "_cols", _readonly(np.int64)(cols))
        object.__setattr__(self, "_coefs", _readonly(np.float64)(coefs))

    @property
    def n(self) -> int:
        """Number of binary variables."""
        return int(self.objective.shape[0])

    @property
    def m(self) -> int:
        """Number of constraint rows."""
        return len(self.rows)

    @property
    def nnz(self) -> int:
        """Number of nonzero constraint coefficients."""
        return int(self._coefs.shape[0])

    def coordinates(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return ``(row_ids, cols, coefs)``, the coordinate form of the constraint matrix."""
        return self._row_ids, self._cols, self._coefs

    def dense_matrix(self) -> np.ndarray:
        """Return the constraint matrix as a dense ``(m, n)`` array."""
        matrix = np.zeros((self.m, self.n))
        matrix[self._row_ids, self._cols] = self._coefs
        return matrix

    def activities(self, values: Any) -> np.ndarray:
        """Return the left-hand side of every row evaluated at ``values``."""
        values = np.asarray(values, dtype=np.float64)
        return np.bincount(self._row_ids, weights=self._coefs * values[self._cols], minlength=self.m)

    def objective_value(self, values: Any) -> float:
        """Internal (minimization) objective at ``values``."""
        return float(self.objective @ np.asarray(values, dtype=np.float64))

    def original_objective(self, internal: float) -> float:
        """Convert an internal objective value back to the source problem's sense."""
        return -internal if self.maximization else internal

    def violations(self, values: Any) -> np.ndarray:
        """Nonnegative violation of every row at ``values``."""
        activity = self.activities(values)
        slack = activity - self.rhs
        out = np.zeros(self.m)
        for r, sense in enumerate(self.senses):
            if sense is Sense.LE:
                out[r] = max(slack[r], 0.0)
            elif sense is Sense.GE:
                out[r] = max(-slack[r], 0.0)
            else:
                out[r] = abs(slack[r])
        return out


def _binary_values(value: Any) -> np.ndarray:
    array = np.array(value, dtype=np.float64)
    if array.ndim != 1:
        raise ValueError("assignment values must be one-dimensional")
    rounded = np.rint(array)
    if np.any(np.abs(array - rounded) > FEASIBILITY_TOL) or np.any((rounded != 0) & (rounded != 1)):
        raise ValueError("assignment values must be 0 or 1")
    out = rounded.astype(np.int8)
    out.setflags(write=False)
    return out


@attrs.frozen
class Assignment:
    """Full 0/1 vector over the variables of an instance.

    Use :meth:`from_values` so that ``objective`` is consistent with ``values``.
    """

    values: np.ndarray = attrs.field(converter=_binary_values, eq=_array_eq)
    objective: float = attrs.field(converter=float)

    @classmethod
    def from_values(cls, inst: IlpInstance, values: Any) -> Assignment:
        """Build an assignment of ``inst`` and cache its internal objective."""
        values = _binary_values(values)
        if values.shape[0] != inst.n:
            raise ValueError(f"assignment has length {values.shape[0]}, instance has {inst.n} variables")
        return cls(values, inst.objective_value(values))

    @property
    def n(self) -> int:
        return int(self.values.shape[0])


def _fractional_values(value: Any) -> np.ndarray:
    array = np.array(value, dtype=np.float64)
    if array.ndim != 1:
        raise ValueError("fractional values must be one-dimensional")
    if np.any(array < -OBJECTIVE_TOL) or np.any(array > 1 + OBJECTIVE_TOL):
        raise ValueError("fractional values must lie in [0, 1]")
    array = np.clip(array, 0.0, 1.0)
    array.setflags(write=False)
    return array


@attrs.frozen
class FractionalAssignment:
    """Point of the LP relaxation, every entry in ``[0, 1]``."""

    values: np.ndarray = attrs.field(converter=_fractional_values, eq=_array_eq)
    objective: float = attrs.field(converter=float)

    @classmethod
    def from_values(cls, inst: IlpInstance, values: Any) -> FractionalAssignment:
        values = _fractional_values(values)
        return cls(values, inst.objective_value(values))


@attrs.frozen
class RawVariable:
    """Variable declaration of a problem before normalization."""

    name: str
    lower: float = 0.0
    upper: float = 1.0
    integral: bool = True

    @property
    def is_binary(self) -> bool:
        return self.integral and self.lower == 0 and self.upper == 1


@attrs.frozen
class RawProblem:
    """Problem as read from a file or produced by a generator.

    Rows may list a variable more than once, senses may be any of LE/GE/EQ and
    the problem may maximize.
    """

    name: str
    variables: tuple[RawVariable, ...] = attrs.field(converter=tuple)
    objective: tuple[float, ...] = attrs.field(converter=lambda v: tuple(float(c) for c in v))
    rows: tuple[tuple[tuple[int, float], ...], ...] = attrs.field(converter=_convert_rows)
    senses: tuple[Sense, ...] = attrs.field(converter=_convert_senses)
    rhs: tuple[float, ...] = attrs.field(converter=lambda v: tuple(float(b) for b in v))
    maximize: bool = False


def _merge_row(row: Row) -> Row:
    merged: dict[int, float] = {}
    for index, coef in row:
        merged[index] = merged.get(index, 0.0) + coef
    return tuple((index, merged[index]) for index in sorted(merged) if merged[index] != 0.0)


def normalize(raw: RawProblem) -> IlpInstance:
    """Turn a raw problem into a minimization-normalized :class:`IlpInstance`.

    Parameters
    ----------
    raw : RawProblem
        Problem with binary variables only.

    Returns
    -------
    IlpInstance
        Objective negated for maximization problems; duplicate row entries merged
        by summation; senses kept as given.

    Raises
    ------
    InvalidInstanceError
        If a variable is not binary, naming the variable.
    """
    for variable in raw.variables:
        if not variable.is_binary:
            kind = "integer" if variable.integral else "continuous"
            raise InvalidInstanceError(
                f"variable {variable.name!r} is not binary ({kind}, bounds [{variable.lower}, {variable.upper}])"
            )
    if len(raw.objective) != len(raw.variables):
        raise InvalidInstanceError(
            f"objective has {len(raw.objective)} coefficients for {len(raw.variables)} variables"
        )
    objective = np.array(raw.objective, dtype=np.float64)
    if raw.maximize:
        objective = -objective
    return IlpInstance(
        objective=objective,
        rows=[_merge_row(row) for row in raw.rows],
        senses=raw.senses,
        rhs=raw.rhs,
        name=raw.name,
        maximization=raw.maximize,
    )


@attrs.frozen
class FeasibilityReport:
    """Outcome of :func:`is_feasible`; truthy iff feasible."""

    feasible: bool
    row: int | None = None
    violation: float = 0.0

    def __bool__(self) -> bool:
        return self.feasible


def _values_of(x: Assignment | FractionalAssignment | Any) -> np.ndarray:
    if isinstance(x, (Assignment, FractionalAssignment)):
        return x.values
    return np.asarray(x, dtype=np.float64)


def is_feasible(inst: IlpInstance, x: Assignment | Any, tol: float = FEASIBILITY_TOL) -> FeasibilityReport:
    """Check every row of ``inst`` at ``x`` within an absolute tolerance.

    Returns
    -------
    FeasibilityReport
        On failure, the smallest violated row index and its violation.

    Raises
    ------
    ValueError
        If ``x`` does not have one entry per variable.
    """
    values = _values_of(x)
    if values.shape != (inst.n,):
        raise ValueError(f"assignment has length {values.shape[0]}, instance has {inst.n} variables")
    violations = inst.violations(values)
    violated = np.flatnonzero(violations > tol)
    if violated.size == 0:
        return FeasibilityReport(True)
    row = int(violated[0])
    return FeasibilityReport(False, row, float(violations[row]))


def hamming(x: Assignment | Any, y: Assignment | Any) -> int:
    """Number of positions in which two 0/1 vectors differ."""
    return int(np.count_nonzero(np.rint(_values_of(x)) != np.rint(_values_of(y))))


def _require_feasible(inst: IlpInstance, incumbent: Assignment) -> None:
    report = is_feasible(inst, incumbent)
    if not report:
        raise InfeasibleIncumbentError(
            f"incumbent violates row {report.row} of {inst.name!r} by {report.violation:g}",
            row=report.row,
            violation=report.violation,
        )


def local_branching_row(incumbent: Assignment, k: int) -> tuple[Row, float]:
    """Hamming-ball constraint around ``incumbent`` in LE form.

    ``sum(x_i : x^t_i = 0) - sum(x_i : x^t_i = 1) <= k - |{i : x^t_i = 1}|``
    """
    ones = incumbent.values == 1
    row = tuple((i, -1.0 if ones[i] else 1.0) for i in range(incumbent.n))
    return row, float(k - int(np.count_nonzero(ones)))


def build_lb_ilp(inst: IlpInstance, incumbent: Assignment, k: int) -> IlpInstance:
    """Add the Local Branching constraint of radius ``k`` around ``incumbent``.

    Parameters
    ----------
    inst : IlpInstance
        Source instance.
    incumbent : Assignment
        Feasible solution of ``inst``, the center of the ball.
    k : int
        Radius, ``1 <= k <= n``.

    Returns
    -------
    IlpInstance
        Copy of ``inst`` with one extra LE row; objective unchanged.

    Raises
    ------
    ValueError
        If ``k`` is outside ``[1, n]``.
    InfeasibleIncumbentError
        If ``incumbent`` violates ``inst``.
    """
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)):
        raise TypeError("k must be an integer")
    if not 1 <= k <= inst.n:
        raise ValueError(f"neighborhood radius k={k} must lie in [1, {inst.n}]")
    _require_feasible(inst, incumbent)
    row, bound = local_branching_row(incumbent, int(k))
    return IlpInstance(
        objective=inst.objective,
        rows=(*inst.rows, row),
        senses=(*inst.senses, Sense.LE),
        rhs=np.append(inst.rhs, bound),
        name=f"{inst.name}/lb{k}",
        maximization=inst.maximization,
    )


@attrs.frozen
class SubProblem:
    """Instance restricted to a subset of free variables, the rest fixed.

    Parameters
    ----------
    instance : IlpInstance
        Instance over the free variables only.
    mapping : numpy.ndarray
        ``mapping[j]`` is the original index of sub-instance variable ``j``.
    base_values : numpy.ndarray
        Full-length 0/1 vector supplying the fixed values.
    offset : float
        Objective contribution of the fixed variables.
    source : IlpInstance
        The instance that was projected.
    """

    instance: IlpInstance
    mapping: np.ndarray = attrs.field(converter=_readonly(np.int64), eq=_array_eq)
    base_values: np.ndarray = attrs.field(converter=_readonly(np.int8), eq=_array_eq)
    offset: float
    source: IlpInstance = attrs.field(repr=False)

    def lift(self, sub_values: Assignment | Any) -> Assignment:
        """Expand a sub-instance solution to a full assignment of :attr:`source`."""
        values = np.array(self.base_values)
        values[self.mapping] = np.rint(_values_of(sub_values)).astype(np.int8)
        return Assignment.from_values(self.source, values)

    def restrict(self, assignment: Assignment | Any) -> Assignment:
        """Restrict a full assignment of :attr:`source` to the free variables."""
        return Assignment.from_values(self.instance, _values_of(assignment)[self.mapping])


def project(inst: IlpInstance, free: Sequence[int] | np.ndarray, values: Any) -> SubProblem:
    """Fix every variable outside ``free`` to ``values`` and substitute it out.

    Rows left without variables are dropped when satisfied.

    Raises
    ------
    InfeasibleFixingError
        If a row left without variables is violated.
    """
    values = np.rint(np.asarray(values, dtype=np.float64)).astype(np.int8)
    free = np.asarray(free, dtype=np.int64)
    position = np.full(inst.n, -1, dtype=np.int64)
    position[free] = np.arange(free.shape[0])

    row_ids, cols, coefs = inst.coordinates()
    is_free = position[cols] >= 0
    fixed = ~is_free
    fixed_activity = np.bincount(row_ids[fixed], weights=coefs[fixed] * values[cols[fixed]], minlength=inst.m)
    adjusted = inst.rhs - fixed_activity

    entries: list[list[tuple[int, float]]] = [[] for _ in range(inst.m)]
    for r, j, a in zip(row_ids[is_free].tolist(), position[cols[is_free]].tolist(), coefs[is_free].tolist()):
        entries[r].append((j, a))

    rows, senses, rhs = [], [], []
    for r in range(inst.m):
        if entries[r]:
            rows.append(entries[r])
            senses.append(inst.senses[r])
            rhs.append(adjusted[r])
            continue
        b = adjusted[r]
        sense = inst.senses[r]
        violation = max(-b, 0.0) if sense is Sense.LE else max(b, 0.0) if sense is Sense.GE else abs(b)
        if violation > FEASIBILITY_TOL:
            raise InfeasibleFixingError(
                f"fixed variables violate row {r} of {inst.name!r} by {violation:g}", row=r, violation=violation
            )

    fixed_mask = position < 0
    offset = float(inst.objective[fixed_mask] @ values[fixed_mask].astype(np.float64))
    sub = IlpInstance(
        objective=inst.objective[free],
        rows=rows,
        senses=senses,
        rhs=rhs,
        name=f"{inst.name}/sub{free.shape[0]}",
    )
    return SubProblem(instance=sub, mapping=free, base_values=values, offset=offset, source=inst)


def fix_and_project(inst: IlpInstance, incumbent: Assignment, destroy: Any) -> SubProblem:
    """Build the repair sub-instance: destroyed variables free, the rest fixed at the incumbent.

    Parameters
    ----------
    inst : IlpInstance
        Full instance.
    incumbent : Assignment
        Current incumbent supplying the fixed values.
    destroy : Neighborhood or iterable of int
        Indices of the variables to re-optimize.

    Returns
    -------
    SubProblem
        Reduced instance plus the mapping back to ``inst``.

    Raises
    ------
    ValueError
        If a destroyed index lies outside ``[0, n)``.
    InfeasibleIncumbentError
        If the incumbent already violates a row that loses all its variables.
    """
    indices = np.unique(np.asarray(getattr(destroy, "indices", destroy), dtype=np.int64))
    if indices.size and (indices[0] < 0 or indices[-1] >= inst.n):
        raise ValueError(f"destroyed indices must lie in [0, {inst.n})")
    try:
        return project(inst, indices, incumbent.values)
    except InfeasibleFixingError as e:
        raise InfeasibleIncumbentError(
            f"incumbent is infeasible: {e}", row=e.row, violation=e.violation
        ) from None
