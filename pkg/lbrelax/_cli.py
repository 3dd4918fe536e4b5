"""Command-line harness: generate instances, run approach portfolios, report metrics."""

from __future__ import annotations

import argparse
import csv
import sys
import time
import zlib
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any

import attrs
from loguru import logger
from tqdm import tqdm

from ._config import FAMILIES, PRESET_ALIASES, PRESETS, Heuristic, LnsConfig, _convert_heuristic, _convert_preset
from ._exact import SolveBudget, find_initial_solution
from ._exceptions import LbRelaxError
from ._gen import FAMILY_PRESETS, generate_instance
from ._io import ResultRecord, read_instance, read_results, write_instance, write_results
from ._lns import run_lns
from ._metrics import best_rate_curve, iteration_table, summarize, survival_curve, virtual_best_curve
from ._model import Assignment, IlpInstance

PRESET_CHOICES = (*PRESETS, *PRESET_ALIASES)
REPORT_KINDS = ("table", "survival", "best-rate", "virtual-best", "iterations")


def _tuple_of_heuristics(value: Sequence[Heuristic | str]) -> tuple[Heuristic, ...]:
    return tuple(_convert_heuristic(h) for h in value)


def _tuple_of_paths(value: Sequence[str | Path]) -> tuple[Path, ...]:
    return tuple(Path(p) for p in value)


def _nonempty(instance, attribute, value):
    if not value:
        raise ValueError(f"'{attribute.name}' must not be empty")


@attrs.frozen
class ExperimentSpec:
    """Everything :func:`cmd_run` needs to run a portfolio.

    Parameters
    ----------
    instances : sequence of path
        Instance files (canonical JSON or MPS).
    heuristics : sequence of Heuristic or str
        Approaches to run on every instance.
    out_dir : path
        Where ``results.jsonl`` and ``results.csv`` go.
    checkpoints : sequence of float
        Times (seconds) at which the CSV evaluates gap and integral.
    preset : str
        ``desk`` or ``full`` (or the aliases ``paper-mini`` and ``paper-full``);
        supplies ``k0`` per family and the budgets.
    overrides : dict
        LnsConfig fields replacing preset values for every run.
    family : str or None
        Family used to look up ``k0``; inferred from the instance name prefix when ``None``.
    seed : int
        Base seed.
    replicates : int
        Runs per (instance, heuristic) pair.
    jobs : int
        Worker processes; 1 runs in-process.
    initial_budget : SolveBudget or None
        Budget of the shared initial-solution search; the preset's when ``None``.
    """

    instances: tuple[Path, ...] = attrs.field(converter=_tuple_of_paths, validator=_nonempty)
    heuristics: tuple[Heuristic, ...] = attrs.field(converter=_tuple_of_heuristics, validator=_nonempty)
    out_dir: Path = attrs.field(converter=Path)
    checkpoints: tuple[float, ...] = attrs.field(
        default=(),
        converter=lambda v: tuple(sorted(float(q) for q in v)),
    )
    preset: str = attrs.field(default="desk", converter=_convert_preset)
    overrides: dict[str, Any] = attrs.field(factory=dict)
    family: str | None = attrs.field(
        default=None, validator=attrs.validators.optional(attrs.validators.in_(FAMILIES))
    )
    seed: int = attrs.field(
        default=0, validator=attrs.validators.and_(attrs.validators.instance_of(int), attrs.validators.ge(0))
    )
    replicates: int = attrs.field(
        default=1, validator=attrs.validators.and_(attrs.validators.instance_of(int), attrs.validators.ge(1))
    )
    jobs: int = attrs.field(
        default=1, validator=attrs.validators.and_(attrs.validators.instance_of(int), attrs.validators.ge(1))
    )
    initial_budget: SolveBudget | None = attrs.field(
        default=None, validator=attrs.validators.optional(attrs.validators.instance_of(SolveBudget))
    )

    def __attrs_post_init__(self):
        horizon = self.overrides.get("time_limit", LnsConfig.from_preset(self.preset, "mvc").time_limit)
        if horizon is not None and self.checkpoints and self.checkpoints[-1] > horizon:
            raise ValueError(f"checkpoint {self.checkpoints[-1]:g}s lies beyond the {horizon:g}s horizon")

    def family_of(self, inst: IlpInstance) -> str:
        if self.family is not None:
            return self.family
        prefix = inst.name.split("_", 1)[0].lower()
        return prefix if prefix in FAMILIES else "mvc"

    def config_for(self, inst: IlpInstance, heuristic: Heuristic, seed: int) -> LnsConfig:
        base = LnsConfig.from_preset(self.preset, self.family_of(inst))
        return base.evolve(heuristic=heuristic, seed=seed, **self.overrides)

    def evaluation_points(self) -> tuple[float, ...]:
        if self.checkpoints:
            return self.checkpoints
        horizon = self.overrides.get("time_limit", LnsConfig.from_preset(self.preset, "mvc").time_limit)
        return (horizon,) if horizon is not None else ()


def run_seed(base: int, index: int, heuristic: Heuristic) -> int:
    """Seed of a run: base seed plus instance index plus a stable hash of the heuristic name."""
    return base + index + zlib.crc32(heuristic.value.encode())


@attrs.frozen
class _Task:
    instance: IlpInstance
    heuristic: Heuristic
    replicate: int
    config: LnsConfig
    initial: Assignment | None
    initial_time: float


def _run_task(task: _Task) -> ResultRecord:
    inst = task.instance
    try:
        if task.initial is None and task.heuristic.is_lns:
            raise LbRelaxError("no initial solution")
        _, trace = run_lns(inst, task.config, task.initial, initial_time=task.initial_time)
    except Exception as e:  # one failed run must not abort the batch
        logger.error("{} on {!r} failed: {}", task.heuristic.value, inst.name, e)
        return ResultRecord.failed(
            inst.name,
            task.heuristic.value,
            task.config.seed,
            task.replicate,
            str(e),
            maximization=inst.maximization,
            config=task.config.snapshot(),
        )
    return ResultRecord.from_trace(trace, seed=task.config.seed, replicate=task.replicate)


def cmd_generate(
    family: str, params: dict[str, Any], count: int, seed: int, out_dir: str | Path
) -> list[Path]:
    """Write ``count`` instances named ``<family>_<params>_<seed + i>.ilp.json``.

    Raises
    ------
    ValueError
        If ``count < 1`` or the generator rejects ``params``.
    """
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(count):
        inst = generate_instance(family, params, seed + i)
        paths.append(write_instance(out_dir / f"{inst.name}.ilp.json", inst))
    logger.info("generated {} {} instances in {}", count, family, out_dir)
    return paths


def cmd_run(spec: ExperimentSpec, progress: bool = True) -> list[ResultRecord]:
    """Run every (instance, heuristic, replicate) triple of ``spec`` and write the results.

    The initial solution of each instance is searched once and shared by every
    LNS heuristic, its search time counted in each trace. Failures become
    ``status="error"`` records.
    """
    tasks: list[_Task] = []
    for index, path in enumerate(tqdm(spec.instances, desc="instances", disable=not progress)):
        inst = read_instance(path)
        base = LnsConfig.from_preset(spec.preset, spec.family_of(inst))
        budget = spec.initial_budget or base.initial_budget
        started = time.perf_counter()
        try:
            initial = find_initial_solution(inst, budget)
        except LbRelaxError as e:
            logger.error("no initial solution for {!r}: {}", inst.name, e)
            initial = None
        initial_time = time.perf_counter() - started
        for heuristic in spec.heuristics:
            for replicate in range(spec.replicates):
                seed = run_seed(spec.seed, index + replicate * len(spec.instances), heuristic)
                config = spec.config_for(inst, heuristic, seed)
                tasks.append(_Task(inst, heuristic, replicate, config, initial, initial_time))

    records = []
    with tqdm(total=len(tasks), desc="runs", disable=not progress) as bar:
        if spec.jobs == 1:
            for task in tasks:
                records.append(_run_task(task))
                bar.update()
        else:
            with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
                for record in pool.map(_run_task, tasks):
                    records.append(record)
                    bar.update()
    records.sort(key=lambda r: r.sort_key)
    write_results(spec.out_dir, records, spec.evaluation_points())
    return records


def _default_checkpoints(records: Sequence[ResultRecord]) -> tuple[float, ...]:
    horizons = [r.config.get("time_limit") for r in records if r.config.get("time_limit") is not None]
    if horizons:
        return (float(max(horizons)),)
    times = [event.wall_time for r in records for event in r.events]
    return (float(max(times, default=0.0)),)


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path:
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    logger.info("wrote {}", path)
    return path


def _curve_rows(times: Sequence[float], curves: dict[str, list[float]]) -> list[list[str]]:
    return [[heuristic, f"{q:g}", f"{value:.6f}"] for heuristic, values in curves.items() for q, value in zip(times, values)]


def cmd_report(
    results: Sequence[str | Path],
    kind: str,
    out_dir: str | Path,
    checkpoints: Sequence[float] | None = None,
    threshold: float | None = None,
    iterations: Sequence[int] | None = None,
) -> dict[str, Path]:
    """Compute report tables from results files.

    Parameters
    ----------
    results : sequence of path
        JSON-lines results files, concatenated.
    kind : str
        One of ``table``, ``survival``, ``best-rate``, ``virtual-best``,
        ``iterations`` or ``all``.
    out_dir : path
        Directory receiving ``<kind>.csv``.
    checkpoints : sequence of float or None
        Evaluation times; the largest recorded horizon when ``None``.
    threshold : float or None
        Survival threshold; the median-of-means rule when ``None``.
    iterations : sequence of int or None
        Iteration counts of the ``iterations`` table; 1 to the longest run when ``None``.

    Returns
    -------
    dict
        CSV path per report kind.

    Raises
    ------
    ResultsFormatError
        On a malformed results line.
    """
    kinds = REPORT_KINDS if kind == "all" else (kind,)
    for k in kinds:
        if k not in REPORT_KINDS:
            raise ValueError(f"Invalid report kind '{k}'. Valid options: {[*REPORT_KINDS, 'all']}")
    records = sorted((r for path in results for r in read_results(path)), key=lambda r: r.sort_key)
    if not records:
        raise ValueError("results files contain no records")
    times = tuple(sorted(checkpoints)) if checkpoints else _default_checkpoints(records)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    written = {}
    for k in kinds:
        path = out_dir / f"{k}.csv"
        if k == "table":
            rows = [
                [
                    row.heuristic,
                    f"{row.checkpoint:g}",
                    f"{row.gap_pct_mean:.6f}",
                    f"{row.gap_pct_std:.6f}",
                    f"{row.integral_mean:.6f}",
                    f"{row.integral_std:.6f}",
                    row.runs,
                ]
                for row in summarize(records, times)
            ]
            header = ["heuristic", "checkpoint", "primal_gap_pct_mean", "primal_gap_pct_std",
                      "primal_integral_mean", "primal_integral_std", "runs"]  # fmt: skip
            written[k] = _write_csv(path, header, rows)
        elif k == "survival":
            used, curves = survival_curve(records, times, threshold)
            logger.info("survival threshold {:.4%}", used)
            written[k] = _write_csv(path, ["heuristic", "time", "survival_rate"], _curve_rows(times, curves))
        elif k == "best-rate":
            curves = best_rate_curve(records, times)
            written[k] = _write_csv(path, ["heuristic", "time", "best_performing_rate"], _curve_rows(times, curves))
        elif k == "virtual-best":
            curves = virtual_best_curve(records, times)
            written[k] = _write_csv(path, ["heuristic", "time", "gap_to_virtual_best"], _curve_rows(times, curves))
        else:
            steps = iterations or range(1, max(r.events[-1].iteration if r.events else 0 for r in records) + 1)
            table = iteration_table(records, list(steps))
            rows = [[h, t, f"{gap * 100:.6f}"] for h, gaps in table.items() for t, gap in zip(steps, gaps)]
            written[k] = _write_csv(path, ["heuristic", "iteration", "primal_gap_pct_mean"], rows)
    return written


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _budget(time_limit: float | None, node_limit: int | None) -> SolveBudget | None:
    if time_limit is None and node_limit is None:
        return None
    return SolveBudget(time_limit=time_limit, node_limit=node_limit)


def _generator_params(args: argparse.Namespace) -> dict[str, Any]:
    params = dict(FAMILY_PRESETS[_convert_preset(args.preset)][args.family])
    given = {
        "mvc": {"n": args.nodes, "d": args.degree_param},
        "mis": {"n": args.nodes, "d": args.degree_param},
        "sc": {"n_vars": args.vars, "n_rows": args.rows, "density": args.density},
        "mk": {"n_items": args.items, "n_knapsacks": args.knapsacks},
    }[args.family]
    params.update({key: value for key, value in given.items() if value is not None})
    return params


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    overrides: dict[str, Any] = {"alpha": args.alpha, "beta": args.beta, "gamma": args.gamma, "fixed_k": args.fixed_k}
    if args.k0 is not None:
        overrides["k0"] = args.k0
    if args.iterations is not None:
        overrides["iteration_limit"] = args.iterations
    if args.horizon is not None:
        overrides["time_limit"] = args.horizon or None
    repair = _budget(args.repair_time_limit, args.repair_node_limit)
    if repair is not None:
        overrides["repair_budget"] = repair
    lb = _budget(args.lb_time_limit, args.lb_node_limit)
    if lb is not None:
        overrides["lb_repair_budget"] = lb
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lbrelax", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logging.")
    parser.add_argument("--quiet", action="store_true", help="Disable progress bars.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="Write seeded benchmark instances.")
    gen.add_argument("family", choices=FAMILIES)
    gen.add_argument("--preset", choices=PRESET_CHOICES, default="desk")
    gen.add_argument("--nodes", type=int, help="Graph nodes (mvc, mis).")
    gen.add_argument("--degree-param", type=int, help="Barabasi-Albert edges per new node (mvc, mis).")
    gen.add_argument("--vars", type=int, help="Columns (sc).")
    gen.add_argument("--rows", type=int, help="Rows (sc).")
    gen.add_argument("--density", type=float, help="Row density (sc).")
    gen.add_argument("--items", type=int, help="Items (mk).")
    gen.add_argument("--knapsacks", type=int, help="Knapsacks (mk).")
    gen.add_argument("--count", type=int, default=1)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", type=Path, default=Path("instances"))

    run = sub.add_parser("run", help="Run approaches on instances.")
    run.add_argument("instances", nargs="+", type=Path)
    run.add_argument("--heuristics", default="RANDOM,LBRELAX", help="Comma-separated approaches.")
    run.add_argument("--family", choices=FAMILIES, help="Family for k0 lookup (inferred from names otherwise).")
    run.add_argument("--preset", choices=PRESET_CHOICES, default="desk")
    run.add_argument("--k0", type=int)
    run.add_argument("--alpha", type=float, default=1.02)
    run.add_argument("--beta", type=float, default=0.5)
    run.add_argument("--gamma", type=float, default=30.0)
    run.add_argument("--horizon", type=float, help="Seconds per run; 0 for no time limit (needs --iterations).")
    run.add_argument("--iterations", type=int, help="LNS iteration cap.")
    run.add_argument("--fixed-k", action="store_true", help="Keep the neighborhood size at k0.")
    run.add_argument("--repair-time-limit", type=float)
    run.add_argument("--repair-node-limit", type=int)
    run.add_argument("--lb-time-limit", type=float)
    run.add_argument("--lb-node-limit", type=int)
    run.add_argument("--initial-time-limit", type=float)
    run.add_argument("--initial-node-limit", type=int)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--replicates", type=int, default=1)
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--checkpoints", type=_floats, default=[], help="Comma-separated seconds.")
    run.add_argument("--out", type=Path, default=Path("results"))

    report = sub.add_parser("report", help="Compute metric tables from results files.")
    report.add_argument("results", nargs="+", type=Path)
    report.add_argument("--kind", choices=[*REPORT_KINDS, "all"], default="all")
    report.add_argument("--checkpoints", type=_floats)
    report.add_argument("--threshold", type=float, help="Survival threshold as a fraction.")
    report.add_argument("--iterations", type=_ints, help="Comma-separated iteration counts.")
    report.add_argument("--out", type=Path, default=Path("report"))
    return parser


def _configure_logging(verbose: int) -> None:
    level = ("WARNING", "INFO", "DEBUG")[min(verbose, 2)]
    logger.remove()
    logger.add(sys.stderr, level=level, format="<level>{level: <8}</level> | {message}")
    logger.enable("lbrelax")


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        if args.command == "generate":
            for path in cmd_generate(args.family, _generator_params(args), args.count, args.seed, args.out):
                print(path)
        elif args.command == "run":
            spec = ExperimentSpec(
                instances=args.instances,
                heuristics=[h for h in args.heuristics.split(",") if h.strip()],
                out_dir=args.out,
                checkpoints=args.checkpoints,
                preset=args.preset,
                overrides=_overrides(args),
                family=args.family,
                seed=args.seed,
                replicates=args.replicates,
                jobs=args.jobs,
                initial_budget=_budget(args.initial_time_limit, args.initial_node_limit),
            )
            records = cmd_run(spec, progress=not args.quiet)
            failed = sum(r.status != "ok" for r in records)
            print(f"{len(records)} runs, {failed} failed -> {spec.out_dir}")
        else:
            for path in cmd_report(args.results, args.kind, args.out, args.checkpoints, args.threshold, args.iterations).values():
                print(path)
    except (LbRelaxError, ValueError, TypeError, OSError) as e:
        logger.error("{}", e)
        return 1
    return 0
