"""Canonical JSON instances, an MPS-subset reader and result persistence."""

from __future__ import annotations

import csv
import json
import math
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import attrs
from loguru import logger

from ._exceptions import InvalidInstanceError, MpsParseError, ResultsFormatError
from ._lns import RunTrace, TraceEvent
from ._metrics import best_known_objectives, record_metrics
from ._model import IlpInstance, RawProblem, RawVariable, Sense, normalize

FORMAT_TAG = "lbrelax-ilp"
FORMAT_VERSION = 1

_MPS_SECTIONS = {"NAME", "ROWS", "COLUMNS", "RHS", "BOUNDS", "OBJSENSE", "ENDATA"}
_MPS_REJECTED = {"RANGES": "RANGES section is not supported", "SOS": "SOS section is not supported"}
_MPS_ROW_SENSES = {"L": Sense.LE, "G": Sense.GE, "E": Sense.EQ}
_MPS_VALUED_BOUNDS = {"UP", "LO", "FX", "UI", "LI"}
_MPS_FLAG_BOUNDS = {"BV", "MI", "PL", "FR"}


@attrs.define
class _MpsColumn:
    name: str
    integral: bool
    lower: float = 0.0
    upper: float = math.inf
    cost: float = 0.0
    entries: dict[int, float] = attrs.field(factory=dict)


def _number(token: str, line: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise MpsParseError("expected a number", line, token) from None


def parse_mps(text: str) -> IlpInstance:
    """Parse a pure-binary problem in (free or fixed) MPS format.

    Supported sections are NAME, OBJSENSE, ROWS, COLUMNS, RHS, BOUNDS and
    ENDATA. Columns count as binary when declared ``BV``, or integral
    (``'MARKER'`` block, ``UI``/``LI``) with bounds ``[0, 1]``. Integral
    columns default to ``[0, +inf)`` like continuous ones, so they need an
    ``UP 1`` bound. The first ``N`` row is the objective; later ``N`` rows are
    dropped.

    Raises
    ------
    MpsParseError
        On unknown or unsupported sections (RANGES, SOS), unknown rows or
        columns, malformed records; the error carries the 1-based line.
    InvalidInstanceError
        If a column is not binary, naming the column.
    """
    name = ""
    maximize = False
    section = None
    objective_row: str | None = None
    free_rows: set[str] = set()
    row_index: dict[str, int] = {}
    row_names: list[str] = []
    senses: list[Sense] = []
    rhs: list[float] = []
    columns: dict[str, _MpsColumn] = {}
    integral_block = False
    ended = False

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.rstrip()
        if not line.strip() or line.lstrip().startswith("*"):
            continue
        tokens = line.split()

        if not line[0].isspace():
            keyword = tokens[0].upper()
            if keyword in _MPS_REJECTED:
                raise MpsParseError(_MPS_REJECTED[keyword], lineno, tokens[0])
            if keyword not in _MPS_SECTIONS:
                raise MpsParseError("unknown section", lineno, tokens[0])
            if keyword == "ENDATA":
                ended = True
                break
            if keyword == "NAME":
                name = " ".join(tokens[1:])
                section = None
            elif keyword == "OBJSENSE" and len(tokens) > 1:
                maximize = _objsense(tokens[1], lineno)
                section = None
            else:
                section = keyword
            continue

        if section == "OBJSENSE":
            maximize = _objsense(tokens[0], lineno)
        elif section == "ROWS":
            if len(tokens) != 2:
                raise MpsParseError("ROWS records need a type and a name", lineno, tokens[0])
            kind, row = tokens[0].upper(), tokens[1]
            if kind == "N":
                if objective_row is None:
                    objective_row = row
                else:
                    free_rows.add(row)
            elif kind in _MPS_ROW_SENSES:
                if row in row_index or row == objective_row:
                    raise MpsParseError("duplicate row", lineno, row)
                row_index[row] = len(row_names)
                row_names.append(row)
                senses.append(_MPS_ROW_SENSES[kind])
                rhs.append(0.0)
            else:
                raise MpsParseError("unknown row type", lineno, tokens[0])
        elif section == "COLUMNS":
            if len(tokens) >= 3 and tokens[1].strip("'\"").upper() == "MARKER":
                marker = tokens[2].strip("'\"").upper()
                if marker == "INTORG":
                    integral_block = True
                elif marker == "INTEND":
                    integral_block = False
                else:
                    raise MpsParseError("unknown marker", lineno, tokens[2])
                continue
            if len(tokens) not in (3, 5):
                raise MpsParseError("COLUMNS records need one or two row/value pairs", lineno, tokens[0])
            column = columns.setdefault(tokens[0], _MpsColumn(tokens[0], integral_block))
            for row, value in zip(tokens[1::2], tokens[2::2]):
                coef = _number(value, lineno)
                if row == objective_row:
                    column.cost += coef
                elif row in row_index:
                    column.entries[row_index[row]] = column.entries.get(row_index[row], 0.0) + coef
                elif row not in free_rows:
                    raise MpsParseError("unknown row", lineno, row)
        elif section == "RHS":
            pairs = tokens[1:] if len(tokens) % 2 else tokens
            if not pairs or len(pairs) % 2:
                raise MpsParseError("RHS records need row/value pairs", lineno, tokens[0])
            for row, value in zip(pairs[0::2], pairs[1::2]):
                bound = _number(value, lineno)
                if row == objective_row:
                    logger.warning("line {}: ignoring objective constant {} on row {!r}", lineno, value, row)
                elif row in row_index:
                    rhs[row_index[row]] = bound
                elif row not in free_rows:
                    raise MpsParseError("unknown row", lineno, row)
        elif section == "BOUNDS":
            _apply_bound(tokens, lineno, columns)
        else:
            raise MpsParseError("data record outside a section", lineno, tokens[0])

    if not ended:
        logger.warning("MPS text for {!r} has no ENDATA record", name)
    if objective_row is None:
        raise MpsParseError("no objective (N) row", max(1, len(text.splitlines())))

    ordered = list(columns.values())
    rows: list[list[tuple[int, float]]] = [[] for _ in row_names]
    for j, column in enumerate(ordered):
        for r, coef in column.entries.items():
            rows[r].append((j, coef))
    raw = RawProblem(
        name=name,
        variables=tuple(RawVariable(c.name, c.lower, c.upper, c.integral) for c in ordered),
        objective=[c.cost for c in ordered],
        rows=rows,
        senses=senses,
        rhs=rhs,
        maximize=maximize,
    )
    return normalize(raw)


def _objsense(token: str, line: int) -> bool:
    value = token.upper()
    if value in ("MAX", "MAXIMIZE"):
        return True
    if value in ("MIN", "MINIMIZE"):
        return False
    raise MpsParseError("unknown objective sense", line, token)


def _apply_bound(tokens: list[str], line: int, columns: dict[str, _MpsColumn]) -> None:
    kind = tokens[0].upper()
    if kind in _MPS_VALUED_BOUNDS:
        if len(tokens) not in (3, 4):
            raise MpsParseError("bound records need a column and a value", line, tokens[0])
        target, value = tokens[-2], _number(tokens[-1], line)
    elif kind in _MPS_FLAG_BOUNDS:
        if len(tokens) not in (2, 3, 4):
            raise MpsParseError("malformed bound record", line, tokens[0])
        target, value = tokens[2] if len(tokens) >= 3 else tokens[1], None
    else:
        raise MpsParseError("unknown bound type", line, tokens[0])
    column = columns.get(target)
    if column is None:
        raise MpsParseError("bound on unknown column", line, target)

    if kind == "UP":
        column.upper = value
    elif kind == "LO":
        column.lower = value
    elif kind == "FX":
        column.lower = column.upper = value
    elif kind == "UI":
        column.integral, column.upper = True, value
    elif kind == "LI":
        column.integral, column.lower = True, value
    elif kind == "BV":
        column.integral, column.lower, column.upper = True, 0.0, 1.0
    elif kind == "MI":
        column.lower = -math.inf
    elif kind == "PL":
        column.upper = math.inf
    else:
        column.lower, column.upper = -math.inf, math.inf


def read_mps(path: str | Path) -> IlpInstance:
    """Read an MPS file; the file stem names the instance when NAME is absent."""
    path = Path(path)
    inst = parse_mps(path.read_text())
    if not inst.name:
        inst = attrs.evolve(inst, name=path.stem)
    return inst


def serialize_instance(inst: IlpInstance) -> str:
    """Canonical JSON text of ``inst``.

    Keys come in a fixed order and floats use their shortest exact
    representation, so equal instances serialize to equal bytes. The objective
    is stored in the problem's original sense.
    """
    objective = [-c if inst.maximization else c for c in inst.objective.tolist()]
    data = {
        "format": FORMAT_TAG,
        "version": FORMAT_VERSION,
        "name": inst.name,
        "n": inst.n,
        "maximization": inst.maximization,
        "objective": objective,
        "rows": [[[j, a] for j, a in row] for row in inst.rows],
        "senses": [sense.value for sense in inst.senses],
        "rhs": inst.rhs.tolist(),
    }
    return json.dumps(data, separators=(",", ":")) + "\n"


def parse_instance(text: str) -> IlpInstance:
    """Inverse of :func:`serialize_instance`.

    Raises
    ------
    InvalidInstanceError
        If the text is not a canonical instance.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidInstanceError(f"instance is not valid JSON: {e}") from None
    if not isinstance(data, dict) or data.get("format") != FORMAT_TAG:
        raise InvalidInstanceError(f"not a {FORMAT_TAG} document")
    if data.get("version") != FORMAT_VERSION:
        raise InvalidInstanceError(f"unsupported {FORMAT_TAG} version {data.get('version')!r}")
    missing = [key for key in ("name", "n", "maximization", "objective", "rows", "senses", "rhs") if key not in data]
    if missing:
        raise InvalidInstanceError(f"instance is missing {missing}")
    maximization = bool(data["maximization"])
    objective = [-float(c) if maximization else float(c) for c in data["objective"]]
    if len(objective) != data["n"]:
        raise InvalidInstanceError(f"objective has {len(objective)} entries, n is {data['n']}")
    try:
        rows = [[(int(j), float(a)) for j, a in row] for row in data["rows"]]
    except (TypeError, ValueError):
        raise InvalidInstanceError("rows must be lists of [index, coefficient] pairs") from None
    return IlpInstance(
        objective=objective,
        rows=rows,
        senses=data["senses"],
        rhs=data["rhs"],
        name=data["name"],
        maximization=maximization,
    )


def read_instance(path: str | Path) -> IlpInstance:
    """Read a canonical ``.ilp.json`` instance, or an ``.mps`` file by suffix."""
    path = Path(path)
    if path.suffix.lower() == ".mps":
        return read_mps(path)
    return parse_instance(path.read_text())


def write_instance(path: str | Path, inst: IlpInstance) -> Path:
    path = Path(path)
    path.write_text(serialize_instance(inst))
    logger.debug("wrote {}", path)
    return path


def _event_from_dict(data: dict[str, Any]) -> TraceEvent:
    return TraceEvent(**data)


@attrs.frozen
class ResultRecord:
    """Outcome of one (instance, heuristic, replicate) run.

    Parameters
    ----------
    instance : str
        Instance name.
    heuristic : str
        Approach tag, e.g. ``"LBRELAX"`` or ``"BNB"``.
    seed : int
        Seed the run used.
    replicate : int
        Replicate index; runs of different approaches with equal
        ``(instance, replicate)`` are compared against each other.
    status : str
        ``"ok"`` or ``"error"``.
    maximization : bool
        Sense of the instance; event objectives are internal (minimization).
    final_objective : float or None
        Final objective in the original sense.
    events : tuple of TraceEvent
        The run trace.
    config : dict
        Snapshot of the run's LnsConfig.
    error : str or None
        Failure message when ``status == "error"``.
    """

    instance: str
    heuristic: str
    seed: int
    replicate: int = 0
    status: str = "ok"
    maximization: bool = False
    final_objective: float | None = None
    events: tuple[TraceEvent, ...] = attrs.field(default=(), converter=tuple)
    config: dict[str, Any] = attrs.field(factory=dict)
    error: str | None = None

    @classmethod
    def from_trace(cls, trace: RunTrace, seed: int, replicate: int = 0) -> ResultRecord:
        final = trace.final_objective
        if final is not None and trace.maximization:
            final = -final
        return cls(
            instance=trace.instance,
            heuristic=trace.heuristic,
            seed=seed,
            replicate=replicate,
            maximization=trace.maximization,
            final_objective=final,
            events=trace.events,
            config=trace.config,
        )

    @classmethod
    def failed(cls, instance: str, heuristic: str, seed: int, replicate: int, error: str, **kwargs: Any) -> ResultRecord:
        return cls(instance, heuristic, seed, replicate, status="error", error=error, **kwargs)

    @property
    def sort_key(self) -> tuple[str, str, int, int]:
        return (self.instance, self.heuristic, self.replicate, self.seed)

    def to_json(self) -> str:
        """One-line JSON object."""
        data = attrs.asdict(self, recurse=False)
        data["events"] = [attrs.asdict(event) for event in self.events]
        return json.dumps(data, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> ResultRecord:
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ValueError("result line is not a JSON object")
        data["events"] = tuple(_event_from_dict(event) for event in data.get("events", ()))
        return cls(**data)


def read_results(path: str | Path) -> list[ResultRecord]:
    """Read a JSON-lines results file.

    Raises
    ------
    ResultsFormatError
        On the first malformed line, with its 1-based number.
    """
    path = Path(path)
    records = []
    with path.open() as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                records.append(ResultRecord.from_json(line))
            except (ValueError, TypeError, KeyError) as e:
                raise ResultsFormatError(str(e), path=path, line=lineno) from None
    return records


def _checkpoint_label(q: float) -> str:
    return f"{q:g}"


def write_results(
    out_dir: str | Path,
    records: Iterable[ResultRecord],
    checkpoints: Sequence[float],
    stem: str = "results",
) -> tuple[Path, Path]:
    """Write ``<stem>.jsonl`` (one record per line) and ``<stem>.csv`` (one summary row per record).

    The CSV holds the primal gap in percent and the primal integral at every
    checkpoint, against the best objective any record reached on the instance.

    Returns
    -------
    tuple of (Path, Path)
        The JSON-lines and CSV paths.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = sorted(records, key=lambda r: r.sort_key)
    jsonl_path = out_dir / f"{stem}.jsonl"
    csv_path = out_dir / f"{stem}.csv"

    with jsonl_path.open("w") as f:
        for record in records:
            f.write(record.to_json() + "\n")

    v_star = best_known_objectives(records)
    header = ["instance", "heuristic", "seed", "replicate", "status"]
    header += [f"primal_gap_pct_at_{_checkpoint_label(q)}" for q in checkpoints]
    header += [f"primal_integral_at_{_checkpoint_label(q)}" for q in checkpoints]
    header += ["final_objective"]
    with csv_path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for record in records:
            metrics = record_metrics(record, checkpoints, v_star.get(record.instance))
            writer.writerow(
                [record.instance, record.heuristic, record.seed, record.replicate, record.status]
                + [f"{gap * 100:.6f}" for gap, _ in metrics]
                + [f"{integral:.6f}" for _, integral in metrics]
                + ["" if record.final_objective is None else repr(record.final_objective)]
            )
    logger.info("wrote {} records to {} and {}", len(records), jsonl_path, csv_path)
    return jsonl_path, csv_path
