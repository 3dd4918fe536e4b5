"""Seeded generators for vertex cover, independent set, set covering and multiple knapsack instances."""

from __future__ import annotations

from collections.abc import Sequence
from typing import Any

import attrs
import networkx as nx
import numpy as np

from ._model import IlpInstance, RawProblem, RawVariable, Sense, normalize

# Per-family generator parameters of the two benchmark scales.
FAMILY_PRESETS: dict[str, dict[str, dict[str, Any]]] = {
    "desk": {
        "mvc": {"n": 500, "d": 2},
        "mis": {"n": 500, "d": 2},
        "sc": {"n_vars": 200, "n_rows": 250},
        "mk": {"n_items": 40, "n_knapsacks": 4},
    },
    "full": {
        "mvc": {"n": 9000, "d": 3},
        "mis": {"n": 9000, "d": 3},
        "sc": {"n_vars": 4000, "n_rows": 5000},
        "mk": {"n_items": 400, "n_knapsacks": 40},
    },
}

SC_DENSITY = 0.05
SC_COST_RANGE = (1, 100)
# Shared default range of knapsack profits and weights.
MK_VALUE_RANGE = (10, 100)


def _positive_int(name: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise TypeError(f"{name} must be an integer")
    if value < 1:
        raise ValueError(f"{name} must be at least 1, got {value}")
    return int(value)


def _int_range(name: str, value: Sequence[int]) -> tuple[int, int]:
    lo, hi = (int(v) for v in value)
    if lo < 1 or hi < lo:
        raise ValueError(f"{name} must be positive integers with lo <= hi, got {tuple(value)}")
    return lo, hi


@attrs.frozen
class BaGraph:
    """Undirected simple graph from preferential attachment.

    Parameters
    ----------
    n : int
        Number of nodes.
    d : int
        Edges added per new node.
    edges : tuple of (int, int)
        Edges ``(u, v)`` with ``u < v``, sorted.
    """

    n: int
    d: int
    edges: tuple[tuple[int, int], ...]

    @classmethod
    def from_networkx(cls, graph: nx.Graph, d: int) -> BaGraph:
        edges = sorted((min(u, v), max(u, v)) for u, v in graph.edges())
        return cls(n=graph.number_of_nodes(), d=d, edges=tuple(edges))

    @property
    def degrees(self) -> np.ndarray:
        if not self.edges:
            return np.zeros(self.n, dtype=np.int64)
        return np.bincount(np.asarray(self.edges, dtype=np.int64).ravel(), minlength=self.n)

    @property
    def average_degree(self) -> float:
        return 2 * len(self.edges) / self.n


def generate_ba_graph(n: int, d: int, seed: int) -> BaGraph:
    """Barabasi-Albert graph grown from a ``d``-clique.

    Each new node attaches to ``d`` distinct existing nodes drawn with
    probability proportional to their current degree, so the graph has exactly
    ``d * (n - d) + d * (d - 1) / 2`` edges. For ``d = 1`` the one-node clique
    has no edges and the second node attaches to the first.

    Raises
    ------
    ValueError
        If ``n <= d`` or ``d < 1``.
    """
    n = _positive_int("n", n)
    d = _positive_int("d", d)
    if n <= d:
        raise ValueError(f"need more nodes than attachment edges, got n={n}, d={d}")
    # networkx cannot attach to an edgeless seed; its default star seed is the same graph for d = 1.
    initial = nx.complete_graph(d) if d > 1 else None
    graph = nx.barabasi_albert_graph(n, d, seed=int(seed), initial_graph=initial)
    return BaGraph.from_networkx(graph, d)


def _node_variables(n: int) -> tuple[RawVariable, ...]:
    return tuple(RawVariable(f"x{v}") for v in range(n))


def vertex_cover_instance(graph: BaGraph, name: str = "mvc") -> IlpInstance:
    """Minimize the number of chosen nodes subject to ``x_u + x_v >= 1`` per edge."""
    raw = RawProblem(
        name=name,
        variables=_node_variables(graph.n),
        objective=[1.0] * graph.n,
        rows=[((u, 1.0), (v, 1.0)) for u, v in graph.edges],
        senses=[Sense.GE] * len(graph.edges),
        rhs=[1.0] * len(graph.edges),
    )
    return normalize(raw)


def independent_set_instance(graph: BaGraph, name: str = "mis") -> IlpInstance:
    """Maximize the number of chosen nodes subject to ``x_u + x_v <= 1`` per edge."""
    raw = RawProblem(
        name=name,
        variables=_node_variables(graph.n),
        objective=[1.0] * graph.n,
        rows=[((u, 1.0), (v, 1.0)) for u, v in graph.edges],
        senses=[Sense.LE] * len(graph.edges),
        rhs=[1.0] * len(graph.edges),
        maximize=True,
    )
    return normalize(raw)


def generate_mvc(n: int, d: int, seed: int) -> IlpInstance:
    return vertex_cover_instance(generate_ba_graph(n, d, seed), name=instance_stem("mvc", {"n": n, "d": d}, seed))


def generate_mis(n: int, d: int, seed: int) -> IlpInstance:
    return independent_set_instance(generate_ba_graph(n, d, seed), name=instance_stem("mis", {"n": n, "d": d}, seed))


def generate_sc(
    n_vars: int,
    n_rows: int,
    density: float = SC_DENSITY,
    cost_range: Sequence[int] = SC_COST_RANGE,
    seed: int = 0,
) -> IlpInstance:
    """Random set covering instance.

    Every column joins every row independently with probability ``density``.
    Empty rows then receive one random column and uncovered columns join one
    random row, so the all-ones assignment is always feasible.

    Parameters
    ----------
    n_vars : int
        Number of columns (sets).
    n_rows : int
        Number of rows (elements to cover).
    density : float
        Inclusion probability, strictly between 0 and 1.
    cost_range : (int, int)
        Inclusive range of the integer column costs.
    seed : int
        Generator seed.
    """
    n_vars = _positive_int("n_vars", n_vars)
    n_rows = _positive_int("n_rows", n_rows)
    if not 0 < density < 1:
        raise ValueError(f"density must lie in (0, 1), got {density}")
    lo, hi = _int_range("cost_range", cost_range)
    rng = np.random.default_rng(seed)

    mask = rng.random((n_rows, n_vars)) < density
    for r in np.flatnonzero(~mask.any(axis=1)).tolist():
        mask[r, rng.integers(n_vars)] = True
    for j in np.flatnonzero(~mask.any(axis=0)).tolist():
        mask[rng.integers(n_rows), j] = True
    costs = rng.integers(lo, hi + 1, size=n_vars)

    params: dict[str, Any] = {"v": n_vars, "r": n_rows}
    if density != SC_DENSITY:
        params["p"] = f"{density:g}"
    if (lo, hi) != SC_COST_RANGE:
        params["c"] = f"{lo}to{hi}"
    raw = RawProblem(
        name=instance_stem("sc", params, seed),
        variables=_node_variables(n_vars),
        objective=costs.tolist(),
        rows=[tuple((int(j), 1.0) for j in np.flatnonzero(row)) for row in mask],
        senses=[Sense.GE] * n_rows,
        rhs=[1.0] * n_rows,
    )
    return normalize(raw)


def knapsack_instance(
    profits: Sequence[float], weights: Sequence[float], capacities: Sequence[float], name: str = "mk"
) -> IlpInstance:
    """Multiple knapsack instance; variable ``i * len(capacities) + j`` puts item ``i`` in knapsack ``j``.

    Raises
    ------
    ValueError
        If ``profits`` and ``weights`` differ in length or there are no knapsacks.
    """
    if len(profits) != len(weights):
        raise ValueError(f"{len(profits)} profits for {len(weights)} weights")
    n_items, n_knapsacks = len(profits), len(capacities)
    if n_knapsacks < 1:
        raise ValueError("need at least one knapsack")

    def var(i: int, j: int) -> int:
        return i * n_knapsacks + j

    rows, rhs = [], []
    for i in range(n_items):
        rows.append(tuple((var(i, j), 1.0) for j in range(n_knapsacks)))
        rhs.append(1.0)
    for j in range(n_knapsacks):
        rows.append(tuple((var(i, j), float(weights[i])) for i in range(n_items)))
        rhs.append(float(capacities[j]))

    raw = RawProblem(
        name=name,
        variables=tuple(RawVariable(f"x{i}_{j}") for i in range(n_items) for j in range(n_knapsacks)),
        objective=[float(profits[i]) for i in range(n_items) for _ in range(n_knapsacks)],
        rows=rows,
        senses=[Sense.LE] * len(rows),
        rhs=rhs,
        maximize=True,
    )
    return normalize(raw)


def generate_mk(
    n_items: int,
    n_knapsacks: int,
    seed: int,
    profit_range: Sequence[int] = MK_VALUE_RANGE,
    weight_range: Sequence[int] = MK_VALUE_RANGE,
) -> IlpInstance:
    """Random multiple knapsack instance.

    Profits and weights are uniform integers; every knapsack has capacity
    ``floor(0.5 * sum(weights) / n_knapsacks)``.

    Raises
    ------
    ValueError
        Unless ``n_items >= n_knapsacks >= 1``.
    """
    n_items = _positive_int("n_items", n_items)
    n_knapsacks = _positive_int("n_knapsacks", n_knapsacks)
    if n_items < n_knapsacks:
        raise ValueError(f"need at least as many items as knapsacks, got {n_items} < {n_knapsacks}")
    p_lo, p_hi = _int_range("profit_range", profit_range)
    w_lo, w_hi = _int_range("weight_range", weight_range)
    rng = np.random.default_rng(seed)
    profits = rng.integers(p_lo, p_hi + 1, size=n_items)
    weights = rng.integers(w_lo, w_hi + 1, size=n_items)
    capacity = int(0.5 * weights.sum() // n_knapsacks)
    params: dict[str, Any] = {"i": n_items, "k": n_knapsacks}
    if (p_lo, p_hi) != MK_VALUE_RANGE:
        params["p"] = f"{p_lo}to{p_hi}"
    if (w_lo, w_hi) != MK_VALUE_RANGE:
        params["w"] = f"{w_lo}to{w_hi}"
    return knapsack_instance(
        profits.tolist(),
        weights.tolist(),
        [capacity] * n_knapsacks,
        name=instance_stem("mk", params, seed),
    )


def _param_tag(params: dict[str, Any]) -> str:
    return "-".join(f"{key}{value}" for key, value in params.items())


def instance_stem(family: str, params: dict[str, Any], seed: int) -> str:
    """File stem and instance name, e.g. ``mvc_n500-d2_7``."""
    return f"{family}_{_param_tag(params)}_{seed}"


def generate_instance(family: str, params: dict[str, Any], seed: int) -> IlpInstance:
    """Dispatch to the generator of ``family`` (``mvc``, ``mis``, ``sc`` or ``mk``).

    Examples
    --------
    >>> inst = generate_instance("mvc", FAMILY_PRESETS["desk"]["mvc"], seed=7)
    """
    family = family.lower()
    if family == "mvc":
        return generate_mvc(seed=seed, **params)
    if family == "mis":
        return generate_mis(seed=seed, **params)
    if family == "sc":
        return generate_sc(seed=seed, **params)
    if family == "mk":
        return generate_mk(seed=seed, **params)
    raise ValueError(f"Invalid family '{family}'. Valid options: ['mvc', 'mis', 'sc', 'mk']")
